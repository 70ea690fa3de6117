#pragma once

// Fully-connected tanh network with a linear head and hand-written
// reverse-mode gradient. All weights live in one flat vector so optimizers
// and gradient checks can treat the network as a point in R^P.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "semcc/errors.hpp"
#include "semcc/random.hpp"

namespace semcc::ppo {

class Mlp {
 public:
  struct Cache {
    // activations[0] is the input; activations[l] is the output of layer l.
    std::vector<std::vector<double>> activations;
  };

  Mlp() = default;

  // sizes = {input, hidden..., output}
  explicit Mlp(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw ContractError("network needs an input and an output size");
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      weight_offset_.push_back(total);
      total += sizes_[l] * sizes_[l + 1];
      bias_offset_.push_back(total);
      total += sizes_[l + 1];
    }
    params_.assign(total, 0.0);
  }

  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t num_layers() const { return sizes_.size() - 1; }
  const std::vector<std::size_t>& sizes() const { return sizes_; }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  std::size_t num_params() const { return params_.size(); }

  std::size_t weight_index(std::size_t layer, std::size_t out, std::size_t in) const {
    return weight_offset_[layer] + out * sizes_[layer] + in;
  }
  std::size_t bias_index(std::size_t layer, std::size_t out) const {
    return bias_offset_[layer] + out;
  }

  // Orthogonal init per layer (rows or columns orthonormal, whichever fits),
  // scaled by `hidden_gain` for hidden layers and `output_gain` for the head.
  void initialize(Rng& rng, double hidden_gain, double output_gain) {
    for (std::size_t l = 0; l < num_layers(); ++l) {
      const std::size_t rows = sizes_[l + 1];
      const std::size_t cols = sizes_[l];
      const double gain = (l + 1 == num_layers()) ? output_gain : hidden_gain;
      auto w = orthogonal(rows, cols, rng);
      for (std::size_t i = 0; i < rows * cols; ++i) params_[weight_offset_[l] + i] = gain * w[i];
      for (std::size_t o = 0; o < rows; ++o) params_[bias_offset_[l] + o] = 0.0;
    }
  }

  std::vector<double> forward(std::span<const double> input) const {
    Cache c;
    return forward(input, c);
  }

  std::vector<double> forward(std::span<const double> input, Cache& cache) const {
    if (input.size() != input_size()) throw ContractError("network input has the wrong length");
    cache.activations.resize(sizes_.size());
    cache.activations[0].assign(input.begin(), input.end());
    for (std::size_t l = 0; l < num_layers(); ++l) {
      const auto& x = cache.activations[l];
      auto& y = cache.activations[l + 1];
      const std::size_t rows = sizes_[l + 1];
      const std::size_t cols = sizes_[l];
      y.assign(rows, 0.0);
      const double* w = params_.data() + weight_offset_[l];
      const double* b = params_.data() + bias_offset_[l];
      const bool hidden = l + 1 < num_layers();
      for (std::size_t o = 0; o < rows; ++o) {
        double acc = b[o];
        const double* row = w + o * cols;
        for (std::size_t i = 0; i < cols; ++i) acc += row[i] * x[i];
        y[o] = hidden ? std::tanh(acc) : acc;
      }
    }
    return cache.activations.back();
  }

  // Accumulates d(upstream . output)/d(params) into `grad` (same layout as params).
  void backward(const Cache& cache, std::span<const double> upstream, std::span<double> grad) const {
    if (upstream.size() != output_size()) throw ContractError("upstream gradient has the wrong length");
    if (grad.size() != params_.size()) throw ContractError("gradient buffer has the wrong length");
    std::vector<double> delta(upstream.begin(), upstream.end());
    std::vector<double> next;
    for (std::size_t l = num_layers(); l-- > 0;) {
      const auto& x = cache.activations[l];
      const std::size_t rows = sizes_[l + 1];
      const std::size_t cols = sizes_[l];
      const double* w = params_.data() + weight_offset_[l];
      double* gw = grad.data() + weight_offset_[l];
      double* gb = grad.data() + bias_offset_[l];
      next.assign(cols, 0.0);
      for (std::size_t o = 0; o < rows; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        gb[o] += d;
        const double* row = w + o * cols;
        double* grow = gw + o * cols;
        for (std::size_t i = 0; i < cols; ++i) {
          grow[i] += d * x[i];
          next[i] += d * row[i];
        }
      }
      if (l == 0) break;
      // x = tanh(pre) for every layer below the head.
      for (std::size_t i = 0; i < cols; ++i) next[i] *= 1.0 - x[i] * x[i];
      delta.swap(next);
    }
  }

  // Convenience: fresh gradient vector for a single input.
  std::vector<double> gradient(std::span<const double> input, std::span<const double> upstream) const {
    Cache c;
    forward(input, c);
    std::vector<double> g(params_.size(), 0.0);
    backward(c, upstream, g);
    return g;
  }

  bool all_finite() const {
    for (double p : params_)
      if (!std::isfinite(p)) return false;
    return true;
  }

 private:
  static std::vector<double> orthogonal(std::size_t rows, std::size_t cols, Rng& rng) {
    // Orthonormalize the shorter dimension's vectors with modified Gram-Schmidt.
    const bool by_rows = rows <= cols;
    const std::size_t count = by_rows ? rows : cols;
    const std::size_t len = by_rows ? cols : rows;
    std::vector<std::vector<double>> v(count, std::vector<double>(len));
    for (auto& vec : v)
      for (auto& x : vec) x = rng.normal(0.0, 1.0);
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        double dot = 0.0;
        for (std::size_t t = 0; t < len; ++t) dot += v[i][t] * v[j][t];
        for (std::size_t t = 0; t < len; ++t) v[i][t] -= dot * v[j][t];
      }
      double norm = 0.0;
      for (double x : v[i]) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > 0.0)
        for (auto& x : v[i]) x /= norm;
    }
    std::vector<double> w(rows * cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) w[r * cols + c] = by_rows ? v[r][c] : v[c][r];
    return w;
  }

  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> weight_offset_;
  std::vector<std::size_t> bias_offset_;
  std::vector<double> params_;
};

}  // namespace semcc::ppo
