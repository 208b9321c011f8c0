#ifndef SASOFTMAX_DIAGNOSTICS_HPP
#define SASOFTMAX_DIAGNOSTICS_HPP

// Gradient-vanishing diagnostics: Jacobian summaries over synthetic
// saturated rows, gradient-norm traces between training runs, and raw
// attention-map dumps.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sasoftmax/error.hpp"
#include "sasoftmax/io.hpp"
#include "sasoftmax/jacobian.hpp"
#include "sasoftmax/matrix.hpp"
#include "sasoftmax/metrics.hpp"
#include "sasoftmax/variants.hpp"

namespace sasoftmax {

enum class SweepProfile {
  OnePeak,    // z = [g, 0, ..., 0]
  OneTrough,  // z = [-g, 0, ..., 0]
  Uniform,    // z = [g, g, ..., g]
};

constexpr std::string_view to_string(SweepProfile p) {
  switch (p) {
    case SweepProfile::OnePeak: return "one_peak";
    case SweepProfile::OneTrough: return "one_trough";
    case SweepProfile::Uniform: return "uniform";
  }
  return "?";
}

inline std::optional<SweepProfile> parse_profile(std::string_view s) {
  for (auto p : {SweepProfile::OnePeak, SweepProfile::OneTrough, SweepProfile::Uniform}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

struct SweepSpec {
  std::vector<double> gaps;
  std::size_t t = 4;
  std::vector<VariantKind> kinds;
  SweepProfile profile = SweepProfile::OnePeak;
};

/// Jacobian summary at one sweep point. "peak" is entry 0, the entry the
/// profile singles out.
struct SweepRecord {
  double g = 0.0;
  VariantKind kind = VariantKind::Baseline;
  double frob_norm = 0.0;
  double diag_peak = 0.0;
  double rowgrad_sum = 0.0;
  // sum_j |d weight_j / d z_peak|: gradient reaching the peak logit. Not
  // part of the CSV schema.
  double colgrad_sum = 0.0;
};

inline LogitRow profile_row(SweepProfile profile, double g, std::size_t t) {
  std::vector<double> z(t, 0.0);
  switch (profile) {
    case SweepProfile::OnePeak: z[0] = g; break;
    case SweepProfile::OneTrough: z[0] = -g; break;
    case SweepProfile::Uniform: std::fill(z.begin(), z.end(), g); break;
  }
  return LogitRow(std::move(z));
}

/// One record per (g, kind), ordered by ascending g then enum order of kind.
inline std::vector<SweepRecord> saturation_sweep(const SweepSpec& spec,
                                                 double eps = kDefaultEps) {
  if (spec.gaps.empty()) throw Error(ErrorCode::InvalidArgument, "sweep needs at least one gap");
  if (spec.t < 2) throw Error(ErrorCode::InvalidArgument, "sweep needs T >= 2");
  std::vector<double> gaps = spec.gaps;
  std::sort(gaps.begin(), gaps.end());
  std::vector<VariantKind> kinds = spec.kinds;
  std::sort(kinds.begin(), kinds.end());
  kinds.erase(std::unique(kinds.begin(), kinds.end()), kinds.end());

  std::vector<SweepRecord> out;
  out.reserve(gaps.size() * kinds.size());
  for (double g : gaps) {
    const LogitRow z = profile_row(spec.profile, g, spec.t);
    for (VariantKind kind : kinds) {
      const JacobianBlock jac = variant_jacobian(z, kind, eps);
      SweepRecord r;
      r.g = g;
      r.kind = kind;
      r.frob_norm = frobenius_norm(jac.entries);
      r.diag_peak = jac.entries(0, 0);
      for (std::size_t k = 0; k < spec.t; ++k) {
        r.rowgrad_sum += std::abs(jac.entries(0, k));
        r.colgrad_sum += std::abs(jac.entries(k, 0));
      }
      out.push_back(r);
    }
  }
  return out;
}

inline std::string sweep_csv(const std::vector<SweepRecord>& records) {
  std::string out = "g,kind,frob_norm,diag_peak,rowgrad_sum\n";
  for (const auto& r : records) {
    out += format_real(r.g) + "," + std::string(to_string(r.kind)) + "," +
           format_real(r.frob_norm) + "," + format_real(r.diag_peak) + "," +
           format_real(r.rowgrad_sum) + "\n";
  }
  return out;
}

struct GradNormComparison {
  std::vector<double> diff;  // variant - baseline, per step

  /// Mean difference over the first n steps (all steps if fewer).
  double mean_diff(std::size_t n) const {
    n = std::min(n, diff.size());
    if (n == 0) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += diff[i];
    return s / static_cast<double>(n);
  }
};

inline GradNormComparison grad_norm_trace(const RunMetrics& variant, const RunMetrics& baseline) {
  if (variant.empty() || baseline.empty()) {
    throw Error(ErrorCode::EmptyHistory, "gradient-norm trace needs non-empty histories");
  }
  if (variant.size() != baseline.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(variant.size()) + " vs " +
                                               std::to_string(baseline.size()) + " steps");
  }
  GradNormComparison cmp;
  cmp.diff.reserve(variant.size());
  for (std::size_t i = 0; i < variant.size(); ++i) {
    cmp.diff.push_back(variant.steps[i].grad_norm - baseline.steps[i].grad_norm);
  }
  return cmp;
}

/// Row-major CSV of a causal weight matrix; entries above the diagonal are
/// written as 0.
inline std::string attention_csv(const Matrix& weights) {
  std::string out;
  for (std::size_t i = 0; i < weights.rows(); ++i) {
    for (std::size_t j = 0; j < weights.cols(); ++j) {
      if (j) out += ',';
      const double w = weights(i, j);
      if (!std::isfinite(w)) throw Error(ErrorCode::NonFiniteInput, "attention weight not finite");
      out += j > i ? "0" : format_real(w);
    }
    out += '\n';
  }
  return out;
}

/// Writes one file per layer, `<dir>/attn_layer<l>.csv`. Returns the paths.
inline std::vector<std::filesystem::path> dump_attention(const std::vector<Matrix>& layers,
                                                         const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> paths;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto p = dir / ("attn_layer" + std::to_string(l) + ".csv");
    write_file_atomic(p, attention_csv(layers[l]));
    paths.push_back(std::move(p));
  }
  return paths;
}

}  // namespace sasoftmax

#endif  // SASOFTMAX_DIAGNOSTICS_HPP
