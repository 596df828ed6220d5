#pragma once

#include "kexpfam/common.hpp"
#include "kexpfam/rng.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace kexpfam {

enum class Activation { tanh_act, linear };

inline std::string activation_name(Activation a) {
  return a == Activation::tanh_act ? "tanh" : "linear";
}

inline Activation activation_from_name(const std::string& s) {
  if (s == "tanh") return Activation::tanh_act;
  if (s == "linear") return Activation::linear;
  throw ContractError("unknown activation: " + s);
}

/// Per-layer weight/bias gradients, shape-congruent with a TransportSampler.
struct ParamGradient {
  std::vector<Mat> weight_grads;
  std::vector<Vec> bias_grads;

  double squared_norm() const {
    double acc = 0.0;
    for (const auto& w : weight_grads) acc += w.squaredNorm();
    for (const auto& b : bias_grads) acc += b.squaredNorm();
    return acc;
  }

  void scale(double a) {
    for (auto& w : weight_grads) w *= a;
    for (auto& b : bias_grads) b *= a;
  }

  void add(const ParamGradient& other) {
    for (size_t l = 0; l < weight_grads.size(); ++l) {
      weight_grads[l] += other.weight_grads[l];
      bias_grads[l] += other.bias_grads[l];
    }
  }
};

/// Feed-forward transport map g: noise (optionally concatenated with a
/// conditioning input) -> samples. Holds its own noise stream; forward passes
/// are pure functions of the input.
class TransportSampler {
 public:
  struct Layer {
    Mat weight;  // out x in
    Vec bias;    // out
    Activation activation = Activation::linear;
  };

  TransportSampler() : noise_(0) {}

  /// MLP with `depth` weight layers (tanh hidden, linear output), initialized
  /// uniform in +/- sqrt(6 / (fan_in + fan_out)).
  static TransportSampler mlp(int input_dim, int noise_dim, int output_dim,
                              int hidden_dim, int depth, uint64_t init_seed,
                              uint64_t noise_seed) {
    require(input_dim >= 1 && noise_dim >= 1 && output_dim >= 1,
            "TransportSampler: dimensions must be positive");
    require(depth >= 1 && hidden_dim >= 1, "TransportSampler: bad architecture");
    TransportSampler s;
    s.noise_dim_ = noise_dim;
    s.input_dim_ = input_dim;
    s.output_dim_ = output_dim;
    s.noise_ = Rng(derive_seed(noise_seed, "sampler_noise"));
    Rng init(derive_seed(init_seed, "sampler_init"));
    int in = input_dim;
    for (int l = 0; l < depth; ++l) {
      int out = (l == depth - 1) ? output_dim : hidden_dim;
      Layer layer;
      layer.weight.resize(out, in);
      double bound = std::sqrt(6.0 / static_cast<double>(in + out));
      for (int i = 0; i < out; ++i)
        for (int j = 0; j < in; ++j)
          layer.weight(i, j) = bound * (2.0 * init.uniform() - 1.0);
      layer.bias = Vec::Zero(out);
      layer.activation =
          (l == depth - 1) ? Activation::linear : Activation::tanh_act;
      s.layers_.push_back(std::move(layer));
      in = out;
    }
    return s;
  }

  static TransportSampler from_layers(std::vector<Layer> layers, int noise_dim,
                                      uint64_t noise_seed) {
    require(!layers.empty(), "TransportSampler: no layers");
    TransportSampler s;
    s.layers_ = std::move(layers);
    s.noise_dim_ = noise_dim;
    s.input_dim_ = static_cast<int>(s.layers_.front().weight.cols());
    s.output_dim_ = static_cast<int>(s.layers_.back().weight.rows());
    s.noise_ = Rng(derive_seed(noise_seed, "sampler_noise"));
    for (size_t l = 1; l < s.layers_.size(); ++l)
      require(s.layers_[l].weight.cols() == s.layers_[l - 1].weight.rows(),
              "TransportSampler: inconsistent layer shapes");
    return s;
  }

  int noise_dim() const { return noise_dim_; }
  int input_dim() const { return input_dim_; }
  int output_dim() const { return output_dim_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  void reseed_noise(uint64_t seed) { noise_ = Rng(derive_seed(seed, "sampler_noise")); }

  /// Rescales the linear output layer so the pushforward of a probe noise
  /// batch matches the given per-dimension moments. Starting the dual
  /// distribution at the base measure keeps the early saddle dynamics stable.
  void calibrate_output(const Vec& target_mean, const Vec& target_sd,
                        uint64_t probe_seed, int probe_n = 512) {
    require(target_mean.size() == output_dim_ && target_sd.size() == output_dim_,
            "calibrate_output: dimension mismatch");
    require(layers_.back().activation == Activation::linear,
            "calibrate_output: output layer must be linear");
    Rng probe(derive_seed(probe_seed, "calibrate"));
    Mat noise = probe.normal_mat(probe_n, noise_dim_);
    Mat input;
    if (input_dim_ == noise_dim_) {
      input = noise;
    } else {
      // Conditioning inputs are unknown at init; probe with zeros there.
      input = Mat::Zero(probe_n, input_dim_);
      input.rightCols(noise_dim_) = noise;
    }
    Mat out = forward(input);
    Layer& last = layers_.back();
    for (int j = 0; j < output_dim_; ++j) {
      double m = out.col(j).mean();
      double sd = std::sqrt((out.col(j).array() - m).square().mean());
      double a = sd > 1e-12 ? target_sd[j] / sd : 1.0;
      last.weight.row(j) *= a;
      last.bias[j] = a * (last.bias[j] - m) + target_mean[j];
    }
  }

  /// Draws n noise rows from the stream, advancing it.
  Mat draw_noise(int n) {
    require(n >= 0, "draw_noise: n must be nonnegative");
    return noise_.normal_mat(n, noise_dim_);
  }

  /// Forward map applied to each input row.
  Mat forward(const Mat& input) const {
    require(input.cols() == input_dim_, "TransportSampler::forward: dimension mismatch");
    Mat a = input;
    for (const auto& layer : layers_) {
      Mat z = a * layer.weight.transpose();
      z.rowwise() += layer.bias.transpose();
      a = (layer.activation == Activation::tanh_act) ? z.array().tanh().matrix()
                                                     : std::move(z);
    }
    return a;
  }

  /// Unconditional sampling: map fresh noise through g.
  Mat sample(int n) {
    require(input_dim_ == noise_dim_,
            "TransportSampler::sample: conditional sampler needs inputs");
    if (n == 0) return Mat(0, output_dim_);
    return forward(draw_noise(n));
  }

  struct ForwardCache {
    Mat input;                      // batch x in
    std::vector<Mat> pre;           // per layer, batch x out
    std::vector<Mat> post;          // per layer, batch x out
  };

  Mat forward_cached(const Mat& input, ForwardCache& cache) const {
    require(input.cols() == input_dim_, "TransportSampler: dimension mismatch");
    cache.input = input;
    cache.pre.clear();
    cache.post.clear();
    Mat a = input;
    for (size_t l = 0; l < layers_.size(); ++l) {
      const auto& layer = layers_[l];
      Mat z = a * layer.weight.transpose();
      z.rowwise() += layer.bias.transpose();
      if (!z.allFinite())
        throw NumericError("TransportSampler: non-finite value at layer " +
                           std::to_string(l));
      cache.pre.push_back(z);
      a = (layer.activation == Activation::tanh_act) ? z.array().tanh().matrix()
                                                     : z;
      cache.post.push_back(a);
    }
    return a;
  }

  /// Backpropagates one upstream row per batch row and returns the gradient of
  /// mean_b upstream_b . g(input_b) with respect to the parameters.
  ParamGradient backprop(const ForwardCache& cache, const Mat& upstream) const {
    require(upstream.rows() == cache.input.rows() &&
                upstream.cols() == output_dim_,
            "TransportSampler::backprop: shape mismatch");
    const double inv_b = 1.0 / static_cast<double>(cache.input.rows());
    ParamGradient grad;
    grad.weight_grads.resize(layers_.size());
    grad.bias_grads.resize(layers_.size());
    Mat delta = upstream;
    for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
      const auto& layer = layers_[static_cast<size_t>(l)];
      if (layer.activation == Activation::tanh_act) {
        Mat t = cache.post[static_cast<size_t>(l)];
        delta = delta.array() * (1.0 - t.array().square());
      }
      const Mat& below =
          (l == 0) ? cache.input : cache.post[static_cast<size_t>(l) - 1];
      grad.weight_grads[static_cast<size_t>(l)] =
          inv_b * (delta.transpose() * below);
      grad.bias_grads[static_cast<size_t>(l)] =
          inv_b * delta.colwise().sum().transpose();
      if (l > 0) delta = delta * layer.weight;
    }
    if (!std::isfinite(grad.squared_norm()))
      throw NumericError("TransportSampler::backprop: non-finite gradient");
    return grad;
  }

  ParamGradient zero_gradient() const {
    ParamGradient grad;
    for (const auto& layer : layers_) {
      grad.weight_grads.push_back(Mat::Zero(layer.weight.rows(), layer.weight.cols()));
      grad.bias_grads.push_back(Vec::Zero(layer.bias.size()));
    }
    return grad;
  }

 private:
  std::vector<Layer> layers_;
  int noise_dim_ = 0;
  int input_dim_ = 0;
  int output_dim_ = 0;
  Rng noise_;
};

/// Monte-Carlo dual gradient on an explicit noise batch: for each xi,
/// v = -grad_x f(g(xi)) + (1/lambda) grad_x nu(g(xi)), backpropagated to the
/// parameters and averaged. F and N must expose grad_x(Vec) -> Vec.
template <class F, class N>
ParamGradient dual_gradient_on_noise(const TransportSampler& sampler, const F& f,
                                     const N& nu, double lambda,
                                     const Mat& noise) {
  require(lambda > 0.0, "dual_gradient: lambda must be positive");
  require(noise.rows() >= 1, "dual_gradient: empty noise batch");
  TransportSampler::ForwardCache cache;
  Mat out = sampler.forward_cached(noise, cache);
  Mat upstream(out.rows(), out.cols());
  for (int b = 0; b < out.rows(); ++b) {
    Vec x = out.row(b).transpose();
    upstream.row(b) =
        (-f.grad_x(x) + (1.0 / lambda) * nu.grad_x(x)).transpose();
  }
  if (!upstream.allFinite())
    throw NumericError("dual_gradient: non-finite witness gradient");
  return sampler.backprop(cache, upstream);
}

/// Draws `batch` noise vectors from the sampler's stream and estimates the
/// dual gradient of Theorem-style form -E[grad f(g(xi))] + (1/lambda) E[grad nu(g(xi))].
template <class F, class N>
ParamGradient dual_gradient(TransportSampler& sampler, const F& f, const N& nu,
                            double lambda, int batch) {
  require(batch >= 1, "dual_gradient: batch must be >= 1");
  return dual_gradient_on_noise(sampler, f, nu, lambda, sampler.draw_noise(batch));
}

/// Clips the gradient to `clip_norm` (global L2) and applies a descent step.
inline void apply_update(TransportSampler& sampler, const ParamGradient& grad,
                         double step, double clip_norm) {
  require(step >= 0.0, "apply_update: step must be nonnegative");
  require(clip_norm > 0.0, "apply_update: clip_norm must be positive");
  auto& layers = sampler.layers();
  require(grad.weight_grads.size() == layers.size() &&
              grad.bias_grads.size() == layers.size(),
          "apply_update: shape mismatch");
  double norm = std::sqrt(grad.squared_norm());
  double factor = (norm > clip_norm) ? clip_norm / norm : 1.0;
  for (size_t l = 0; l < layers.size(); ++l) {
    require(grad.weight_grads[l].rows() == layers[l].weight.rows() &&
                grad.weight_grads[l].cols() == layers[l].weight.cols() &&
                grad.bias_grads[l].size() == layers[l].bias.size(),
            "apply_update: shape mismatch at layer " + std::to_string(l));
    layers[l].weight -= step * factor * grad.weight_grads[l];
    layers[l].bias -= step * factor * grad.bias_grads[l];
  }
}

}  // namespace kexpfam
