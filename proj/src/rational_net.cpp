#include "greenlearn/rational_net.hpp"

#include "greenlearn/error.hpp"
#include "greenlearn/rng.hpp"

#include <algorithm>
#include <cmath>

namespace greenlearn::nn {

using linalg::Matrix;
using linalg::Vector;

std::string to_string(Activation activation) {
  switch (activation) {
    case Activation::rational: return "rational";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
  }
  return "unknown";
}

Activation activation_from_string(const std::string& name) {
  if (name == "rational") return Activation::rational;
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw UsageError("unknown activation '" + name + "' (expected rational, relu or tanh)");
}

std::string to_string(ParameterClass c) {
  switch (c) {
    case ParameterClass::weight: return "weight";
    case ParameterClass::bias: return "bias";
    case ParameterClass::numerator: return "numerator";
    case ParameterClass::denominator: return "denominator";
  }
  return "unknown";
}

double RationalCoefficients::operator()(double x) const {
  const double num = p[0] + x * (p[1] + x * (p[2] + x * p[3]));
  const double den = q[0] + x * (q[1] + x * q[2]);
  return num / den;
}

std::complex<double> RationalCoefficients::operator()(std::complex<double> z) const {
  const std::complex<double> num = p[0] + z * (p[1] + z * (p[2] + z * p[3]));
  const std::complex<double> den = q[0] + z * (q[1] + z * q[2]);
  return num / den;
}

RationalCoefficients relu_rational_init() {
  // Output of tools/fit_relu_rational (max deviation 2.186e-2 on [-1, 1]).
  RationalCoefficients c;
  c.p = {0.021857504812155874, 0.49999999999979672, 1.59559864810017, 1.191379752973361};
  c.q = {1.0, -1.7410310589228919e-12, 2.382759505948175};
  return c;
}

Mlp::Mlp(int input_dim, std::vector<int> hidden, Activation activation)
    : input_dim_(input_dim), hidden_(std::move(hidden)), activation_(activation) {
  if (input_dim_ < 1) throw UsageError("network input width must be positive");
  for (int w : hidden_)
    if (w < 1) throw UsageError("hidden layer widths must be positive");
  build_layout();
  if (activation_ == Activation::rational)
    for (std::size_t l = 0; l < hidden_.size(); ++l) set_coefficients(l, relu_rational_init());
}

void Mlp::build_layout() {
  layers_.clear();
  std::size_t offset = 0;
  int in = input_dim_;
  for (std::size_t l = 0; l <= hidden_.size(); ++l) {
    LayerLayout layer;
    layer.in = in;
    layer.out = l < hidden_.size() ? hidden_[l] : 1;
    layer.weights = offset;
    offset += static_cast<std::size_t>(layer.in) * static_cast<std::size_t>(layer.out);
    layer.biases = offset;
    offset += static_cast<std::size_t>(layer.out);
    if (l < hidden_.size() && activation_ == Activation::rational) {
      layer.coefficients = offset;
      offset += 7;
    }
    layers_.push_back(layer);
    in = layer.out;
  }
  params_.assign(offset, 0.0);
}

Mlp Mlp::init(int input_dim, Activation activation, std::uint64_t seed, std::vector<int> hidden) {
  Mlp net(input_dim, std::move(hidden), activation);
  Rng rng(seed);
  for (const auto& layer : net.layers_) {
    const double stddev = std::sqrt(2.0 / (layer.in + layer.out));
    const std::size_t count = static_cast<std::size_t>(layer.in) * static_cast<std::size_t>(layer.out);
    for (std::size_t k = 0; k < count; ++k) net.params_[layer.weights + k] = stddev * rng.normal();
  }
  return net;
}

ParameterClass Mlp::parameter_class(std::size_t index) const {
  for (const auto& layer : layers_) {
    if (index < layer.biases) return ParameterClass::weight;
    if (index < layer.biases + static_cast<std::size_t>(layer.out)) return ParameterClass::bias;
    if (layer.has_coefficients()) {
      if (index < layer.coefficients + 4) return ParameterClass::numerator;
      if (index < layer.coefficients + 7) return ParameterClass::denominator;
    }
  }
  throw UsageError("parameter index out of range");
}

RationalCoefficients Mlp::coefficients(std::size_t hidden_layer) const {
  if (hidden_layer >= hidden_.size() || !layers_[hidden_layer].has_coefficients())
    throw UsageError("layer has no rational coefficients");
  const double* c = params_.data() + layers_[hidden_layer].coefficients;
  RationalCoefficients out;
  for (int k = 0; k < 4; ++k) out.p[static_cast<std::size_t>(k)] = c[k];
  for (int k = 0; k < 3; ++k) out.q[static_cast<std::size_t>(k)] = c[4 + k];
  return out;
}

void Mlp::set_coefficients(std::size_t hidden_layer, const RationalCoefficients& rc) {
  if (hidden_layer >= hidden_.size() || !layers_[hidden_layer].has_coefficients())
    throw UsageError("layer has no rational coefficients");
  double* c = params_.data() + layers_[hidden_layer].coefficients;
  for (int k = 0; k < 4; ++k) c[k] = rc.p[static_cast<std::size_t>(k)];
  for (int k = 0; k < 3; ++k) c[4 + k] = rc.q[static_cast<std::size_t>(k)];
}

void Mlp::set_frozen(ParameterClass c, bool frozen) { frozen_[static_cast<std::size_t>(c)] = frozen; }
bool Mlp::frozen(ParameterClass c) const { return frozen_[static_cast<std::size_t>(c)]; }

namespace {

using Map = Eigen::Map<const Matrix>;
using VMap = Eigen::Map<const Vector>;

// Adds the bias to z in place and writes the activation into a.
void apply_activation(Activation act, const double* c, const double* bias, Matrix& z, Matrix& a, bool& pole_hit) {
  const Eigen::Index rows = z.rows();
  const Eigen::Index cols = z.cols();
  a.resize(rows, cols);
  double* zp = z.data();
  double* out = a.data();
  switch (act) {
    case Activation::relu:
      for (Eigen::Index j = 0; j < cols; ++j, zp += rows, out += rows)
        for (Eigen::Index r = 0; r < rows; ++r) {
          zp[r] += bias[r];
          out[r] = zp[r] > 0.0 ? zp[r] : 0.0;
        }
      return;
    case Activation::tanh:
      for (Eigen::Index j = 0; j < cols; ++j, zp += rows, out += rows)
        for (Eigen::Index r = 0; r < rows; ++r) zp[r] += bias[r];
      a = z.array().tanh().matrix();
      return;
    case Activation::rational: {
      bool zero_den = false;
      for (Eigen::Index j = 0; j < cols; ++j, zp += rows, out += rows)
        for (Eigen::Index r = 0; r < rows; ++r) {
          const double v = zp[r] + bias[r];
          zp[r] = v;
          const double num = c[0] + v * (c[1] + v * (c[2] + v * c[3]));
          const double den = c[4] + v * (c[5] + v * c[6]);
          zero_den |= (den == 0.0);
          out[r] = num / den;
        }
      if (zero_den) pole_hit = true;
      return;
    }
  }
}

// Rational backward pass over one layer: writes dz, the bias gradient and the
// 7 coefficient gradients. Sums run per row, columns in order.
void rational_backward(const double* c, const Matrix& z, const Matrix& sigma, const Matrix& da, Matrix& dz,
                       double* gbias, double* gc, std::vector<double>& acc) {
  const Eigen::Index rows = z.rows();
  const Eigen::Index cols = z.cols();
  dz.resize(rows, cols);
  acc.assign(static_cast<std::size_t>(7 * rows), 0.0);
  double* a0 = acc.data();
  double* a1 = a0 + rows;
  double* a2 = a1 + rows;
  double* a3 = a2 + rows;
  double* a4 = a3 + rows;
  double* a5 = a4 + rows;
  double* a6 = a5 + rows;
  const double c1 = c[1], c2x2 = 2.0 * c[2], c3x3 = 3.0 * c[3];
  const double c4 = c[4], c5 = c[5], c6 = c[6], c6x2 = 2.0 * c[6];
  for (Eigen::Index r = 0; r < rows; ++r) gbias[r] = 0.0;
  for (Eigen::Index j = 0; j < cols; ++j) {
    const double* x = z.data() + j * rows;
    const double* s = sigma.data() + j * rows;
    const double* g = da.data() + j * rows;
    double* out = dz.data() + j * rows;
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double v = x[r];
      const double inv = 1.0 / (c4 + v * (c5 + v * c6));
      const double dnum = c1 + v * (c2x2 + v * c3x3);
      const double dden = c5 + v * c6x2;
      const double g0 = g[r] * inv;
      const double gq = -g0 * s[r];
      const double d = g0 * (dnum - s[r] * dden);
      out[r] = d;
      gbias[r] += d;
      const double v2 = v * v;
      a0[r] += g0;
      a1[r] += g0 * v;
      a2[r] += g0 * v2;
      a3[r] += g0 * v2 * v;
      a4[r] += gq;
      a5[r] += gq * v;
      a6[r] += gq * v2;
    }
  }
  for (int m = 0; m < 7; ++m) {
    double total = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r) total += acc[static_cast<std::size_t>(m * rows + r)];
    gc[m] = total;
  }
}

}  // namespace

Vector Mlp::forward_columns(const Matrix& inputs, ForwardCache& cache) const {
  if (inputs.rows() != input_dim_) throw UsageError("forward: input width does not match the network");
  const std::size_t nh = hidden_.size();
  cache.pre.resize(nh);
  cache.post.resize(nh + 1);
  cache.pole_hit = false;
  cache.post[0] = inputs;
  for (std::size_t l = 0; l < nh; ++l) {
    const auto& layer = layers_[l];
    const Map w(params_.data() + layer.weights, layer.out, layer.in);
    Matrix& z = cache.pre[l];
    z.noalias() = w * cache.post[l];
    const double* c = layer.has_coefficients() ? params_.data() + layer.coefficients : nullptr;
    apply_activation(activation_, c, params_.data() + layer.biases, z, cache.post[l + 1], cache.pole_hit);
  }
  const auto& last = layers_.back();
  const Map w(params_.data() + last.weights, 1, last.in);
  Vector out = (w * cache.post[nh]).transpose();
  out.array() += params_[last.biases];
  if (!out.allFinite()) cache.pole_hit = true;
  return out;
}

Vector Mlp::forward(const Matrix& inputs, bool* pole_hit) const {
  if (inputs.cols() != input_dim_) throw UsageError("forward: input width does not match the network");
  ForwardCache cache;
  Vector out = forward_columns(inputs.transpose(), cache);
  if (pole_hit) *pole_hit = cache.pole_hit;
  return out;
}

void Mlp::backward(const ForwardCache& cache, const Vector& dout, std::span<double> grad) const {
  const std::size_t nh = hidden_.size();
  if (cache.post.size() != nh + 1 || cache.pre.size() != nh) throw UsageError("backward: missing forward cache");
  if (grad.size() != params_.size()) throw UsageError("backward: gradient buffer has the wrong size");
  if (static_cast<std::size_t>(dout.size()) != cache.batch()) throw UsageError("backward: output gradient size mismatch");
  std::fill(grad.begin(), grad.end(), 0.0);

  const auto& last = layers_.back();
  {
    Eigen::Map<Matrix> gw(grad.data() + last.weights, 1, last.in);
    gw.noalias() = dout.transpose() * cache.post[nh].transpose();
    grad[last.biases] = dout.sum();
  }
  const Map w_last(params_.data() + last.weights, 1, last.in);
  Matrix& da = cache.da;
  Matrix& dz = cache.dz;
  da.noalias() = w_last.transpose() * dout.transpose();  // width x n

  for (std::size_t l = nh; l-- > 0;) {
    const auto& layer = layers_[l];
    const Matrix& z = cache.pre[l];
    Eigen::Map<Vector> gb(grad.data() + layer.biases, layer.out);
    switch (activation_) {
      case Activation::relu:
        dz = (z.array() > 0.0).select(da, 0.0);
        gb = dz.rowwise().sum();
        break;
      case Activation::tanh:
        dz = (da.array() * (1.0 - cache.post[l + 1].array().square())).matrix();
        gb = dz.rowwise().sum();
        break;
      case Activation::rational:
        rational_backward(params_.data() + layer.coefficients, z, cache.post[l + 1], da, dz, gb.data(),
                          grad.data() + layer.coefficients, cache.accumulators);
        break;
    }
    Eigen::Map<Matrix> gw(grad.data() + layer.weights, layer.out, layer.in);
    gw.noalias() = dz * cache.post[l].transpose();
    if (l > 0) {
      const Map w(params_.data() + layer.weights, layer.out, layer.in);
      da.noalias() = w.transpose() * dz;
    }
  }

  if (std::none_of(frozen_.begin(), frozen_.end(), [](bool f) { return f; })) return;
  for (std::size_t k = 0; k < grad.size(); ++k)
    if (frozen_[static_cast<std::size_t>(parameter_class(k))]) grad[k] = 0.0;
}

std::vector<std::complex<double>> Mlp::forward_complex(const Eigen::MatrixXcd& inputs, bool* pole_hit) const {
  if (activation_ != Activation::rational) throw UsageError("forward_complex needs rational activations");
  if (inputs.cols() != input_dim_) throw UsageError("forward_complex: input width does not match the network");
  bool hit = false;
  Eigen::MatrixXcd a = inputs.transpose();
  for (std::size_t l = 0; l < hidden_.size(); ++l) {
    const auto& layer = layers_[l];
    const Eigen::MatrixXcd w = Map(params_.data() + layer.weights, layer.out, layer.in).cast<std::complex<double>>();
    Eigen::MatrixXcd z = w * a;
    for (Eigen::Index i = 0; i < z.rows(); ++i) z.row(i).array() += params_[layer.biases + static_cast<std::size_t>(i)];
    const double* c = params_.data() + layer.coefficients;
    const auto x = z.array();
    const Eigen::ArrayXXcd num = c[0] + x * (c[1] + x * (c[2] + x * c[3]));
    const Eigen::ArrayXXcd den = c[4] + x * (c[5] + x * c[6]);
    if ((den.abs() == 0.0).any()) hit = true;
    a = (num / den).matrix();
  }
  const auto& last = layers_.back();
  const Eigen::MatrixXcd w = Map(params_.data() + last.weights, 1, last.in).cast<std::complex<double>>();
  const Eigen::RowVectorXcd out = (w * a).array() + params_[last.biases];
  std::vector<std::complex<double>> result(static_cast<std::size_t>(out.size()));
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    result[static_cast<std::size_t>(k)] = out(k);
    if (!std::isfinite(out(k).real()) || !std::isfinite(out(k).imag())) hit = true;
  }
  if (pole_hit) *pole_hit = hit;
  return result;
}

std::vector<std::complex<double>> Mlp::forward_complex(std::span<const std::complex<double>> z, bool* pole_hit) const {
  if (input_dim_ != 1) throw UsageError("forward_complex: scalar overload needs a 1-D input network");
  Eigen::MatrixXcd in(static_cast<Eigen::Index>(z.size()), 1);
  for (std::size_t k = 0; k < z.size(); ++k) in(static_cast<Eigen::Index>(k), 0) = z[k];
  return forward_complex(in, pole_hit);
}

}  // namespace greenlearn::nn
