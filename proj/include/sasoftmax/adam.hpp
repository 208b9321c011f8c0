#ifndef SASOFTMAX_ADAM_HPP
#define SASOFTMAX_ADAM_HPP

#include <cmath>
#include <cstddef>
#include <span>

namespace sasoftmax {

struct AdamConfig {
  double lr = 3e-3;
  double beta1 = 0.9;
  double beta2 = 0.95;
  double eps = 1e-8;
};

/// One bias-corrected Adam update of p in place; `step` is the 1-based
/// count including this update. No weight decay.
inline void adam_update(std::span<double> p, std::span<const double> g, std::span<double> m,
                        std::span<double> v, std::size_t step, const AdamConfig& cfg) {
  const double t = static_cast<double>(step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    p[i] -= cfg.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.eps);
  }
}

}  // namespace sasoftmax

#endif  // SASOFTMAX_ADAM_HPP
