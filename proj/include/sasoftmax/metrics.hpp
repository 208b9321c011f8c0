#ifndef SASOFTMAX_METRICS_HPP
#define SASOFTMAX_METRICS_HPP

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "sasoftmax/io.hpp"

namespace sasoftmax {

struct StepMetrics {
  std::size_t step = 0;
  double loss = 0.0;       // mean cross-entropy, nats
  double grad_norm = 0.0;  // global L2 norm, after backward and before the update
  double step_time_s = 0.0;
};

struct RunMetrics {
  std::vector<StepMetrics> steps;

  std::size_t size() const noexcept { return steps.size(); }
  bool empty() const noexcept { return steps.empty(); }

  /// Mean loss over the last `window` steps.
  double tail_loss(std::size_t window) const {
    if (steps.empty()) return 0.0;
    const std::size_t n = std::min(window, steps.size());
    double s = 0.0;
    for (std::size_t i = steps.size() - n; i < steps.size(); ++i) s += steps[i].loss;
    return s / static_cast<double>(n);
  }
};

/// CSV `step,loss,grad_norm,step_time_s`. Wall-clock times are written
/// only when with_time is set, so default output is reproducible.
inline std::string metrics_csv(const RunMetrics& m, bool with_time) {
  std::string out = "step,loss,grad_norm,step_time_s\n";
  for (const auto& s : m.steps) {
    out += std::to_string(s.step);
    out += ',';
    out += format_real(s.loss);
    out += ',';
    out += format_real(s.grad_norm);
    out += ',';
    out += with_time ? format_real(s.step_time_s) : "0";
    out += '\n';
  }
  return out;
}

}  // namespace sasoftmax

#endif  // SASOFTMAX_METRICS_HPP
