#include "ndf4d/cli.hpp"

int main(int argc, char** argv) { return ndf4d::run_cli(argc, argv); }
