#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "ndf4d/optimizer.hpp"

namespace ndf4d {

/// Fully connected layer; weight is out x in, bias is out x 1.
struct DenseLayer {
  ParamBlock weight;
  ParamBlock bias;
};

/// Per-layer gradient accumulators, shaped like the layers they mirror.
struct MlpGradients {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;

  void set_zero();
  void add(const MlpGradients& other);
};

/// Forward record for one batch: inputs[i] is the input to layer i
/// (inputs[0] = features, later entries post-ReLU hidden activations).
struct MlpTape {
  std::vector<Eigen::MatrixXd> inputs;
};

/// Shared decoder: ReLU hidden layers, linear output. Batches are column
/// blocks (one column per query).
class Mlp {
 public:
  Mlp() = default;
  /// Zero-initialized network with the given layer widths.
  Mlp(int input_dim, const std::vector<int>& hidden_widths, int output_dim);

  /// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  static Mlp glorot(int input_dim, const std::vector<int>& hidden_widths, int output_dim,
                    std::uint64_t seed);

  int input_dim() const;
  int output_dim() const;
  std::size_t parameter_count() const;

  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, MlpTape* tape = nullptr) const;
  Eigen::VectorXd forward_one(const Eigen::VectorXd& input) const;

  /// Reverse pass. Parameter gradients are added to `grads`; returns the
  /// gradient with respect to the input (input_dim x batch).
  Eigen::MatrixXd backward(const MlpTape& tape, const Eigen::MatrixXd& upstream, MlpGradients& grads) const;
  /// Same, accumulating into the layers' own grad buffers.
  Eigen::MatrixXd backward(const MlpTape& tape, const Eigen::MatrixXd& upstream);

  MlpGradients make_gradients() const;
  void add_to_grad(const MlpGradients& grads);
  void zero_grad();
  void apply_adam(const Adam& adam);

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

 private:
  std::vector<DenseLayer> layers_;
};

}  // namespace ndf4d
