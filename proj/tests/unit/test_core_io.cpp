#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "ndf4d/errors.hpp"
#include "ndf4d/io.hpp"
#include "ndf4d/types.hpp"
#include "support.hpp"

using namespace ndf4d;
using ndf4d::testing::TempDir;

namespace {

void write_floats(const std::filesystem::path& path, const std::vector<float>& values) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(float)));
}

Mat3 yaw(double angle) {
  Mat3 r;
  r << std::cos(angle), -std::sin(angle), 0, std::sin(angle), std::cos(angle), 0, 0, 0, 1;
  return r;
}

}  // namespace

TEST_CASE("scan bin: single record decodes and drops intensity") {
  TempDir dir("io");
  write_floats(dir / "a.bin", {1.0f, 2.0f, 3.0f, 0.5f});
  const auto r = load_scan_bin(dir / "a.bin");
  REQUIRE(r.points.size() == 1);
  CHECK(r.points[0] == Point3(1, 2, 3));
  CHECK(r.rejected == 0);
}

TEST_CASE("scan bin: empty file gives an empty list") {
  TempDir dir("io");
  write_floats(dir / "e.bin", {});
  const auto r = load_scan_bin(dir / "e.bin");
  CHECK(r.points.empty());
  CHECK(r.rejected == 0);
}

TEST_CASE("scan bin: NaN record is rejected and counted") {
  TempDir dir("io");
  const float nan = std::numeric_limits<float>::quiet_NaN();
  write_floats(dir / "n.bin", {1, 2, 3, 0, 4, nan, 6, 0});
  const auto r = load_scan_bin(dir / "n.bin");
  REQUIRE(r.points.size() == 1);
  CHECK(r.points[0] == Point3(1, 2, 3));
  CHECK(r.rejected == 1);
}

TEST_CASE("scan bin: size not a multiple of 16 is a format error") {
  TempDir dir("io");
  write_floats(dir / "bad.bin", {1, 2, 3});
  CHECK_THROWS_AS(load_scan_bin(dir / "bad.bin"), FormatError);
  CHECK_THROWS_AS(load_scan_bin(dir / "missing.bin"), DataError);
}

TEST_CASE("scan bin: write then read round-trips float32 values") {
  TempDir dir("io");
  std::vector<Point3> pts = {{0.25, -1.5, 3.0}, {100.125, 0.0, -7.75}};
  write_scan_bin(dir / "r.bin", pts);
  const auto r = load_scan_bin(dir / "r.bin");
  REQUIRE(r.points.size() == 2);
  CHECK(r.points[0] == pts[0]);
  CHECK(r.points[1] == pts[1]);
}

TEST_CASE("poses: identity and translation lines") {
  std::istringstream in("1 0 0 0 0 1 0 0 0 0 1 0\n1 0 0 5 0 1 0 0 0 0 1 -1\n");
  const auto poses = parse_poses_kitti(in, 2);
  REQUIRE(poses.size() == 2);
  CHECK(poses[0].rotation == Mat3::Identity());
  CHECK(poses[0].translation == Vec3::Zero());
  CHECK(poses[1].translation == Vec3(5, 0, -1));
  CHECK(poses[1].apply(Point3(1, 1, 1)) == Point3(6, 1, 0));
}

TEST_CASE("poses: reflection is rejected naming the line") {
  std::istringstream in("1 0 0 0 0 1 0 0 0 0 1 0\n-1 0 0 0 0 1 0 0 0 0 1 0\n");
  try {
    parse_poses_kitti(in, 2);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("poses: near-orthonormal rotation is re-orthonormalized, far one rejected") {
  std::istringstream near("1.0004 0 0 0 0 0.9997 0 0 0 0 1 0\n");
  const auto p = parse_poses_kitti(near, 1);
  CHECK((p[0].rotation.transpose() * p[0].rotation - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(p[0].rotation.determinant() == doctest::Approx(1.0).epsilon(1e-12));

  std::istringstream far("1.01 0 0 0 0 1 0 0 0 0 1 0\n");
  CHECK_THROWS_AS(parse_poses_kitti(far, 1), DataError);
}

TEST_CASE("poses: too few lines and malformed lines are errors") {
  std::istringstream short_in("1 0 0 0 0 1 0 0 0 0 1 0\n");
  CHECK_THROWS_AS(parse_poses_kitti(short_in, 2), DataError);
  std::istringstream bad("1 0 0 0 0 1 0 0 0 0 1\n");
  CHECK_THROWS_AS(parse_poses_kitti(bad, 1), FormatError);
}

TEST_CASE("poses: file round trip is exact") {
  TempDir dir("io");
  std::vector<Pose> poses = {Pose::identity(), Pose::from_parts(yaw(0.3), Vec3(1.25, -2, 0.1))};
  write_poses_kitti(dir / "poses.txt", poses);
  const auto back = load_poses_kitti(dir / "poses.txt", 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK((back[i].rotation - poses[i].rotation).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(back[i].translation == poses[i].translation);
  }
}

TEST_CASE("assemble_sequence: worked examples") {
  SUBCASE("identity pose") {
    const auto seq = assemble_sequence({{Point3(1, 0, 0)}}, {Pose::identity()});
    CHECK(seq.scan(0).points_world[0] == Point3(1, 0, 0));
    CHECK(seq.scan(0).origin == Point3(0, 0, 0));
  }
  SUBCASE("translation") {
    const auto seq = assemble_sequence({{Point3(1, 0, 0)}}, {Pose::from_parts(Mat3::Identity(), Vec3(0, 0, 2))});
    CHECK(seq.scan(0).points_world[0] == Point3(1, 0, 2));
    CHECK(seq.scan(0).origin == Point3(0, 0, 2));
  }
  SUBCASE("90 degree yaw on the second scan") {
    const auto seq = assemble_sequence({{Point3(1, 0, 0)}, {Point3(1, 0, 0)}},
                                       {Pose::identity(), Pose::from_parts(yaw(M_PI / 2), Vec3(3, 4, 5))});
    CHECK(seq.frame_count() == 2);
    CHECK(seq.scan(1).frame == 1);
    CHECK((seq.scan(1).points_world[0] - Point3(3, 5, 5)).norm() < 1e-12);
  }
  SUBCASE("length mismatch") {
    CHECK_THROWS_AS(assemble_sequence({{Point3(1, 0, 0)}}, {}), DataError);
  }
}

TEST_CASE("assemble_sequence: inverse transform recovers sensor points") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-20, 20);
  std::vector<std::vector<Point3>> raw(5);
  std::vector<Pose> poses;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 50; ++j) raw[i].emplace_back(u(rng), u(rng), u(rng));
    Eigen::Quaterniond q(u(rng), u(rng), u(rng), u(rng));
    poses.push_back(Pose::from_parts(q.normalized().toRotationMatrix(), Vec3(u(rng), u(rng), u(rng))));
  }
  const auto seq = assemble_sequence(raw, poses);
  for (int i = 0; i < 5; ++i) {
    const Pose inv = poses[i].inverse();
    for (int j = 0; j < 50; ++j) {
      const Point3 back = inv.apply(seq.scan(i).points_world[j]);
      CHECK((back - raw[i][j]).norm() <= 1e-9 * std::max(1.0, raw[i][j].norm()));
    }
  }
}

TEST_CASE("ScanSequence rejects empty scans and gaps") {
  CHECK_THROWS_AS(ScanSequence({Scan{0, Point3::Zero(), {}}}), DataError);
  CHECK_THROWS_AS(ScanSequence({Scan{1, Point3::Zero(), {Point3(1, 0, 0)}}}), DataError);
  CHECK_THROWS_AS(ScanSequence(std::vector<Scan>{}), DataError);
}

TEST_CASE("labels: byte layout, empty file and round trip") {
  TempDir dir("io");
  write_labels(dir / "l.label", {PointLabel::kStatic, PointLabel::kDynamic});
  const std::string bytes = testing::slurp(dir / "l.label");
  CHECK(bytes == std::string("\x00\x00\x00\x00\x01\x00\x00\x00", 8));

  write_labels(dir / "e.label", {});
  CHECK(testing::slurp(dir / "e.label").empty());

  std::vector<PointLabel> labels;
  std::mt19937 rng(1);
  for (int i = 0; i < 1000; ++i) labels.push_back(rng() % 2 ? PointLabel::kDynamic : PointLabel::kStatic);
  write_labels(dir / "r.label", labels);
  CHECK(read_labels(dir / "r.label") == labels);
}

TEST_CASE("labels: out-of-range values and odd sizes are format errors") {
  TempDir dir("io");
  {
    std::ofstream out(dir / "bad.label", std::ios::binary);
    const std::uint32_t v = 7;
    out.write(reinterpret_cast<const char*>(&v), 4);
  }
  CHECK_THROWS_AS(read_labels(dir / "bad.label"), FormatError);
  {
    std::ofstream out(dir / "odd.label", std::ios::binary);
    out << "abc";
  }
  CHECK_THROWS_AS(read_labels(dir / "odd.label"), FormatError);
}

TEST_CASE("atomic write leaves no temp file and replaces content") {
  TempDir dir("io");
  write_file_atomic(dir / "f.txt", [](std::ostream& o) { o << "first"; });
  write_file_atomic(dir / "f.txt", [](std::ostream& o) { o << "second"; });
  CHECK(testing::slurp(dir / "f.txt") == "second");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++entries;
  CHECK(entries == 1);
}

TEST_CASE("dataset layout loads scans with poses") {
  TempDir dir("io");
  const DatasetLayout layout{dir.path()};
  std::filesystem::create_directories(dir / "velodyne");
  write_scan_bin(layout.scan_path(0), {Point3(1, 0, 0)});
  write_scan_bin(layout.scan_path(1), {Point3(0, 1, 0), Point3(0, 0, 1)});
  write_poses_kitti(layout.poses_path(), {Pose::identity(), Pose::from_parts(Mat3::Identity(), Vec3(1, 1, 1))});
  CHECK(layout.scan_path(1).filename() == "000001.bin");
  CHECK(layout.count_scans() == 2);
  const auto data = load_dataset(layout);
  CHECK(data.sequence.frame_count() == 2);
  CHECK(data.sequence.total_points() == 3);
  CHECK(data.sequence.scan(1).points_world[1] == Point3(1, 1, 2));
}

TEST_CASE("loaders are deterministic") {
  TempDir dir("io");
  std::vector<Point3> pts;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 200; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
  write_scan_bin(dir / "d.bin", pts);
  const auto a = load_scan_bin(dir / "d.bin");
  const auto b = load_scan_bin(dir / "d.bin");
  CHECK(a.points == b.points);
}
