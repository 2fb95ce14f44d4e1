#include "ndf4d/decoder.hpp"

#include <cmath>
#include <random>

#include "ndf4d/errors.hpp"

namespace ndf4d {

void MlpGradients::set_zero() {
  for (auto& w : weight) w.setZero();
  for (auto& b : bias) b.setZero();
}

void MlpGradients::add(const MlpGradients& other) {
  for (std::size_t i = 0; i < weight.size(); ++i) {
    weight[i] += other.weight[i];
    bias[i] += other.bias[i];
  }
}

Mlp::Mlp(int input_dim, const std::vector<int>& hidden_widths, int output_dim) {
  if (input_dim < 1 || output_dim < 1) throw ConfigError("decoder dimensions must be positive");
  int fan_in = input_dim;
  auto add_layer = [&](int fan_out) {
    DenseLayer layer;
    layer.weight.resize(fan_out, fan_in);
    layer.bias.resize(fan_out, 1);
    layers_.push_back(std::move(layer));
    fan_in = fan_out;
  };
  for (int width : hidden_widths) {
    if (width < 1) throw ConfigError("decoder hidden width must be positive");
    add_layer(width);
  }
  add_layer(output_dim);
}

Mlp Mlp::glorot(int input_dim, const std::vector<int>& hidden_widths, int output_dim, std::uint64_t seed) {
  Mlp mlp(input_dim, hidden_widths, output_dim);
  std::mt19937_64 rng(seed);
  for (auto& layer : mlp.layers_) {
    const auto fan_out = layer.weight.value.rows();
    const auto fan_in = layer.weight.value.cols();
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    // Row-major draw order so the stream does not depend on storage order.
    for (Eigen::Index r = 0; r < fan_out; ++r) {
      for (Eigen::Index c = 0; c < fan_in; ++c) layer.weight.value(r, c) = dist(rng);
    }
  }
  return mlp;
}

int Mlp::input_dim() const { return static_cast<int>(layers_.front().weight.value.cols()); }

int Mlp::output_dim() const { return static_cast<int>(layers_.back().weight.value.rows()); }

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) {
    n += static_cast<std::size_t>(layer.weight.value.size() + layer.bias.value.size());
  }
  return n;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input, MlpTape* tape) const {
  if (tape) {
    tape->inputs.resize(layers_.size());
    tape->inputs[0] = input;
  }
  Eigen::MatrixXd current = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& layer = layers_[i];
    Eigen::MatrixXd z(layer.weight.value.rows(), current.cols());
    z.noalias() = layer.weight.value * current;
    z.colwise() += layer.bias.value.col(0);
    if (i + 1 < layers_.size()) {
      z = z.cwiseMax(0.0);
      if (tape) tape->inputs[i + 1] = z;
    }
    current = std::move(z);
  }
  return current;
}

Eigen::VectorXd Mlp::forward_one(const Eigen::VectorXd& input) const {
  Eigen::MatrixXd out = forward(input);
  return out.col(0);
}

Eigen::MatrixXd Mlp::backward(const MlpTape& tape, const Eigen::MatrixXd& upstream, MlpGradients& grads) const {
  Eigen::MatrixXd delta = upstream;
  for (std::size_t idx = layers_.size(); idx-- > 0;) {
    const auto& layer = layers_[idx];
    const Eigen::MatrixXd& layer_input = tape.inputs[idx];
    grads.weight[idx].noalias() += delta * layer_input.transpose();
    grads.bias[idx] += delta.rowwise().sum();
    Eigen::MatrixXd back(layer.weight.value.cols(), delta.cols());
    back.noalias() = layer.weight.value.transpose() * delta;
    if (idx > 0) {
      // ReLU gate: layer_input is the post-activation of the previous layer.
      back = (layer_input.array() > 0.0).select(back, 0.0);
    }
    delta = std::move(back);
  }
  return delta;
}

Eigen::MatrixXd Mlp::backward(const MlpTape& tape, const Eigen::MatrixXd& upstream) {
  MlpGradients grads = make_gradients();
  Eigen::MatrixXd d_input = backward(tape, upstream, grads);
  add_to_grad(grads);
  return d_input;
}

MlpGradients Mlp::make_gradients() const {
  MlpGradients g;
  for (const auto& layer : layers_) {
    g.weight.push_back(Eigen::MatrixXd::Zero(layer.weight.value.rows(), layer.weight.value.cols()));
    g.bias.push_back(Eigen::VectorXd::Zero(layer.bias.value.rows()));
  }
  return g;
}

void Mlp::add_to_grad(const MlpGradients& grads) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i].weight.grad += grads.weight[i];
    layers_[i].bias.grad.col(0) += grads.bias[i];
  }
}

void Mlp::zero_grad() {
  for (auto& layer : layers_) {
    layer.weight.zero_grad();
    layer.bias.zero_grad();
  }
}

void Mlp::apply_adam(const Adam& adam) {
  for (auto& layer : layers_) {
    adam.apply(layer.weight);
    adam.apply(layer.bias);
  }
}

}  // namespace ndf4d
