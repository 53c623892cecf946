#include "rlvm/mlp.hpp"

#include <cassert>
#include <cmath>
#include <functional>

#include "rlvm/error.hpp"

namespace rlvm {

Mlp::Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw InvalidSpecError("network needs at least two layer sizes");
  layers_.resize(sizes_.size() - 1);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].in = sizes_[l];
    layers_[l].out = sizes_[l + 1];
    layers_[l].w.assign(static_cast<std::size_t>(sizes_[l]) * sizes_[l + 1], 0.0);
    layers_[l].b.assign(static_cast<std::size_t>(sizes_[l + 1]), 0.0);
  }
}

void Mlp::init(Prng& rng) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Layer& layer = layers_[l];
    if (l + 1 == layers_.size()) {
      // Zeroed output layer: fresh policies emit logit 0 (probability 1/2)
      // and fresh value heads emit 0.
      std::fill(layer.w.begin(), layer.w.end(), 0.0);
      std::fill(layer.b.begin(), layer.b.end(), 0.0);
      continue;
    }
    double limit = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    for (double& w : layer.w) w = limit * (2.0 * rng.next_double() - 1.0);
    std::fill(layer.b.begin(), layer.b.end(), 0.0);
  }
}

double Mlp::forward(std::span<const double> input) const {
  assert(static_cast<int>(input.size()) == input_size());
  std::vector<double> cur(input.begin(), input.end());
  std::vector<double> next;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    next.assign(static_cast<std::size_t>(layer.out), 0.0);
    for (int o = 0; o < layer.out; ++o) {
      double z = layer.b[static_cast<std::size_t>(o)];
      const double* row = &layer.w[static_cast<std::size_t>(o) * layer.in];
      for (int i = 0; i < layer.in; ++i) z += row[i] * cur[static_cast<std::size_t>(i)];
      next[static_cast<std::size_t>(o)] = (l + 1 == layers_.size()) ? z : std::tanh(z);
    }
    cur.swap(next);
  }
  return cur[0];
}

double Mlp::forward(std::span<const double> input, Cache& cache) const {
  assert(static_cast<int>(input.size()) == input_size());
  cache.acts.assign(layers_.size() + 1, {});
  cache.acts[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    const auto& prev = cache.acts[l];
    auto& out = cache.acts[l + 1];
    out.assign(static_cast<std::size_t>(layer.out), 0.0);
    for (int o = 0; o < layer.out; ++o) {
      double z = layer.b[static_cast<std::size_t>(o)];
      const double* row = &layer.w[static_cast<std::size_t>(o) * layer.in];
      for (int i = 0; i < layer.in; ++i) z += row[i] * prev[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(o)] = (l + 1 == layers_.size()) ? z : std::tanh(z);
    }
  }
  return cache.acts.back()[0];
}

void Mlp::backward(const Cache& cache, double output_seed, Mlp& grad) const {
  assert(grad.sizes_ == sizes_);
  std::vector<double> delta{output_seed};
  std::vector<double> prev_delta;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const Layer& layer = layers_[l];
    Layer& g = grad.layers_[l];
    const auto& prev = cache.acts[l];
    prev_delta.assign(static_cast<std::size_t>(layer.in), 0.0);
    for (int o = 0; o < layer.out; ++o) {
      double d = delta[static_cast<std::size_t>(o)];
      if (d == 0.0) continue;
      g.b[static_cast<std::size_t>(o)] += d;
      double* grow = &g.w[static_cast<std::size_t>(o) * layer.in];
      const double* row = &layer.w[static_cast<std::size_t>(o) * layer.in];
      for (int i = 0; i < layer.in; ++i) {
        grow[i] += d * prev[static_cast<std::size_t>(i)];
        prev_delta[static_cast<std::size_t>(i)] += d * row[i];
      }
    }
    if (l > 0) {
      // Activation derivative of the tanh layer below: 1 - a^2.
      const auto& act = cache.acts[l];
      for (int i = 0; i < layer.in; ++i) {
        double a = act[static_cast<std::size_t>(i)];
        prev_delta[static_cast<std::size_t>(i)] *= 1.0 - a * a;
      }
    }
    delta.swap(prev_delta);
  }
}

Mlp Mlp::zeros_like() const {
  Mlp g(sizes_);
  return g;
}

void Mlp::fill(double value) {
  for (Layer& layer : layers_) {
    std::fill(layer.w.begin(), layer.w.end(), value);
    std::fill(layer.b.begin(), layer.b.end(), value);
  }
}

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (const Layer& layer : layers_) n += layer.w.size() + layer.b.size();
  return n;
}

std::vector<double> Mlp::flatten() const {
  std::vector<double> out;
  out.reserve(param_count());
  for (const Layer& layer : layers_) {
    out.insert(out.end(), layer.w.begin(), layer.w.end());
    out.insert(out.end(), layer.b.begin(), layer.b.end());
  }
  return out;
}

void Mlp::unflatten(std::span<const double> params) {
  assert(params.size() == param_count());
  std::size_t pos = 0;
  for (Layer& layer : layers_) {
    for (double& w : layer.w) w = params[pos++];
    for (double& b : layer.b) b = params[pos++];
  }
}

void Mlp::for_each_param(const std::function<void(double&)>& fn) {
  for (Layer& layer : layers_) {
    for (double& w : layer.w) fn(w);
    for (double& b : layer.b) fn(b);
  }
}

void Mlp::for_each_param_pair(Mlp& other, const std::function<void(double&, double&)>& fn) {
  assert(other.sizes_ == sizes_);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    for (std::size_t i = 0; i < layers_[l].w.size(); ++i) fn(layers_[l].w[i], other.layers_[l].w[i]);
    for (std::size_t i = 0; i < layers_[l].b.size(); ++i) fn(layers_[l].b[i], other.layers_[l].b[i]);
  }
}

bool Mlp::all_finite() const {
  for (const Layer& layer : layers_) {
    for (double w : layer.w)
      if (!std::isfinite(w)) return false;
    for (double b : layer.b)
      if (!std::isfinite(b)) return false;
  }
  return true;
}

AdamOptimizer::AdamOptimizer(std::size_t param_count, double lr, double beta1, double beta2,
                             double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  m_.assign(param_count, 0.0);
  v_.assign(param_count, 0.0);
}

void AdamOptimizer::step(Mlp& net, const Mlp& grad) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  std::size_t idx = 0;
  Mlp& g = const_cast<Mlp&>(grad);
  net.for_each_param_pair(g, [&](double& p, double& gp) {
    m_[idx] = beta1_ * m_[idx] + (1.0 - beta1_) * gp;
    v_[idx] = beta2_ * v_[idx] + (1.0 - beta2_) * gp * gp;
    double mhat = m_[idx] / bc1;
    double vhat = v_[idx] / bc2;
    p -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    ++idx;
  });
}

}  // namespace rlvm
