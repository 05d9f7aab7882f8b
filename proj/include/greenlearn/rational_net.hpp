#pragma once

#include "greenlearn/linalg.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace greenlearn::nn {

enum class Activation { rational, relu, tanh };

std::string to_string(Activation activation);
Activation activation_from_string(const std::string& name);

/// sigma(x) = (p0 + p1 x + p2 x^2 + p3 x^3) / (q0 + q1 x + q2 x^2)
struct RationalCoefficients {
  std::array<double, 4> p{};
  std::array<double, 3> q{};

  double operator()(double x) const;
  std::complex<double> operator()(std::complex<double> z) const;
};

/// Type (3,2) fit to max(0, x) on [-1, 1], produced by tools/fit_relu_rational.
RationalCoefficients relu_rational_init();

enum class ParameterClass { weight, bias, numerator, denominator };
std::string to_string(ParameterClass c);

/// Offsets of one affine layer (and its activation coefficients) in the flat
/// parameter vector. Weights are stored column-major, out x in.
struct LayerLayout {
  int in = 0;
  int out = 0;
  std::size_t weights = 0;
  std::size_t biases = 0;
  std::size_t coefficients = static_cast<std::size_t>(-1);  // hidden rational layers only
  bool has_coefficients() const { return coefficients != static_cast<std::size_t>(-1); }
};

/// Intermediate values kept by forward() for backward().
struct ForwardCache {
  std::vector<linalg::Matrix> pre;   // pre-activations, width x n, hidden layers only
  std::vector<linalg::Matrix> post;  // layer inputs: post[0] is the input (d_in x n)
  bool pole_hit = false;
  // scratch reused by backward()
  mutable linalg::Matrix da;
  mutable linalg::Matrix dz;
  mutable std::vector<double> accumulators;
  std::size_t batch() const { return post.empty() ? 0 : static_cast<std::size_t>(post.front().cols()); }
};

/// Fully connected network: affine hidden layers followed by the activation,
/// and a linear scalar output.
class Mlp {
 public:
  Mlp() = default;
  /// All parameters zero except rational coefficients, which start at relu_rational_init().
  Mlp(int input_dim, std::vector<int> hidden, Activation activation);

  /// Glorot normal weights (variance 2 / (fan_in + fan_out)), zero biases.
  static Mlp init(int input_dim, Activation activation, std::uint64_t seed, std::vector<int> hidden = {50, 50, 50, 50});

  int input_dim() const { return input_dim_; }
  const std::vector<int>& hidden() const { return hidden_; }
  Activation activation() const { return activation_; }
  const std::vector<LayerLayout>& layers() const { return layers_; }

  std::size_t parameter_count() const { return params_.size(); }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  ParameterClass parameter_class(std::size_t index) const;

  RationalCoefficients coefficients(std::size_t hidden_layer) const;
  void set_coefficients(std::size_t hidden_layer, const RationalCoefficients& c);

  /// Exclude a parameter class from training: backward() writes zeros for it.
  void set_frozen(ParameterClass c, bool frozen);
  bool frozen(ParameterClass c) const;

  /// `inputs` is n x input_dim (one row per point); returns n outputs.
  linalg::Vector forward(const linalg::Matrix& inputs, bool* pole_hit = nullptr) const;
  /// Same with inputs given column-wise (input_dim x n); fills `cache`.
  linalg::Vector forward_columns(const linalg::Matrix& inputs, ForwardCache& cache) const;
  /// Gradient of sum_k dout_k * output_k with respect to every parameter;
  /// `grad` must have parameter_count() entries and is overwritten.
  void backward(const ForwardCache& cache, const linalg::Vector& dout, std::span<double> grad) const;

  /// Complex evaluation (rational activation only); `inputs` is n x input_dim.
  std::vector<std::complex<double>> forward_complex(const Eigen::MatrixXcd& inputs, bool* pole_hit = nullptr) const;
  std::vector<std::complex<double>> forward_complex(std::span<const std::complex<double>> z, bool* pole_hit = nullptr) const;

 private:
  void build_layout();

  int input_dim_ = 1;
  std::vector<int> hidden_;
  Activation activation_ = Activation::rational;
  std::vector<LayerLayout> layers_;
  std::vector<double> params_;
  std::array<bool, 4> frozen_{};
};

}  // namespace greenlearn::nn
