#pragma once

#include <functional>
#include <span>
#include <vector>

#include "rlvm/prng.hpp"

namespace rlvm {

// Dense feed-forward network with tanh hidden layers and a linear scalar
// output. Small enough that explicit loops beat any library dependency, and
// every operation stays bit-reproducible.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<int> sizes);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }

  // Hidden layers get Xavier-uniform weights; the output layer starts at
  // zero so the initial output is exactly 0 for every input.
  void init(Prng& rng);

  double forward(std::span<const double> input) const;

  // Forward pass retaining post-activation values for the backward pass.
  struct Cache {
    std::vector<std::vector<double>> acts;  // acts[0] = input copy
  };
  double forward(std::span<const double> input, Cache& cache) const;

  // Accumulates d(output_seed * output)/d(params) into `grad`, a same-shape
  // network whose weights hold the running gradient.
  void backward(const Cache& cache, double output_seed, Mlp& grad) const;

  Mlp zeros_like() const;
  void fill(double value);

  std::size_t param_count() const;
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> params);

  // Elementwise access used by the optimizer.
  void for_each_param(const std::function<void(double&)>& fn);
  void for_each_param_pair(Mlp& other, const std::function<void(double&, double&)>& fn);

  bool all_finite() const;
  bool operator==(const Mlp&) const = default;

 private:
  struct Layer {
    int in = 0, out = 0;
    std::vector<double> w;  // row-major [out][in]
    std::vector<double> b;
    bool operator==(const Layer&) const = default;
  };
  std::vector<int> sizes_;
  std::vector<Layer> layers_;
};

// Adam with bias correction; moments are stored flat across the network.
class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  AdamOptimizer(std::size_t param_count, double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);

  // One descent step along `grad` (a same-shape gradient network).
  void step(Mlp& net, const Mlp& grad);

  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

 private:
  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long long t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace rlvm
