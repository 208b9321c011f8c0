#ifndef SASOFTMAX_GRADCHECK_HPP
#define SASOFTMAX_GRADCHECK_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sasoftmax/jacobian.hpp"
#include "sasoftmax/variants.hpp"

namespace sasoftmax {

struct GradCheckOptions {
  double tol_rel = 1e-6;
  double abs_floor = 1e-9;
  double h = 1e-5;
  // rows whose tie_gap is below tie_margin_steps * h are skipped
  double tie_margin_steps = 10.0;
  double eps = kDefaultEps;
};

struct GradCheckReport {
  VariantKind kind = VariantKind::Baseline;
  std::size_t t = 0;
  std::size_t sample = 0;
  double max_abs_err = 0.0;
  double max_rel_err = 0.0;
  std::pair<std::size_t, std::size_t> worst_entry{0, 0};
  bool passed = true;
  bool skipped_tie = false;
};

/// Compares variant_jacobian against fd_jacobian on one row. The relative
/// error of an entry counts only when its absolute error exceeds abs_floor.
inline GradCheckReport check_row(const LogitRow& z, VariantKind kind,
                                 const GradCheckOptions& opt = {}) {
  GradCheckReport rep;
  rep.kind = kind;
  rep.t = z.size();
  if (tie_gap(z, kind) < opt.tie_margin_steps * opt.h) {
    rep.skipped_tie = true;
    return rep;
  }
  const JacobianBlock analytic = variant_jacobian(z, kind, opt.eps);
  const JacobianBlock numeric = fd_jacobian(z, kind, opt.eps, opt.h);
  for (std::size_t j = 0; j < z.valid_len; ++j) {
    for (std::size_t k = 0; k < z.valid_len; ++k) {
      const double a = analytic.entries(j, k);
      const double f = numeric.entries(j, k);
      const double err = std::abs(a - f);
      const double rel =
          err > opt.abs_floor ? err / std::max(std::abs(a), std::abs(f)) : 0.0;
      if (err > rep.max_abs_err) rep.max_abs_err = err;
      if (rel > rep.max_rel_err) {
        rep.max_rel_err = rel;
        rep.worst_entry = {j, k};
      }
    }
  }
  rep.passed = rep.max_rel_err <= opt.tol_rel || rep.max_abs_err <= opt.abs_floor;
  return rep;
}

/// Draws `samples` rows per (T, kind) for T in [t_min, t_max], entries
/// uniform in [-8, 8], and checks each. Output order: T, then kind, then
/// sample. Rows are fully unmasked.
inline std::vector<GradCheckReport> gradcheck(std::size_t samples, std::size_t t_min,
                                              std::size_t t_max,
                                              const std::vector<VariantKind>& kinds,
                                              std::uint64_t seed,
                                              const GradCheckOptions& opt = {}) {
  if (samples == 0) throw Error(ErrorCode::InvalidArgument, "samples must be at least 1");
  if (t_min == 0 || t_min > t_max) throw Error(ErrorCode::InvalidArgument, "bad T range");
  if (!(opt.tol_rel > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol_rel must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-8.0, 8.0);
  std::vector<GradCheckReport> out;
  out.reserve(samples * (t_max - t_min + 1) * kinds.size());
  for (std::size_t t = t_min; t <= t_max; ++t) {
    for (VariantKind kind : kinds) {
      for (std::size_t s = 0; s < samples; ++s) {
        std::vector<double> v(t);
        for (double& x : v) x = dist(rng);
        GradCheckReport rep = check_row(LogitRow(std::move(v)), kind, opt);
        rep.sample = s;
        out.push_back(rep);
      }
    }
  }
  return out;
}

inline bool all_passed(const std::vector<GradCheckReport>& reports) {
  for (const auto& r : reports) {
    if (!r.skipped_tie && !r.passed) return false;
  }
  return true;
}

inline void to_json(nlohmann::json& j, const GradCheckReport& r) {
  j = nlohmann::json{{"kind", to_string(r.kind)},
                     {"t", r.t},
                     {"sample", r.sample},
                     {"max_abs_err", r.max_abs_err},
                     {"max_rel_err", r.max_rel_err},
                     {"worst_entry", {r.worst_entry.first, r.worst_entry.second}},
                     {"passed", r.passed},
                     {"skipped_tie", r.skipped_tie}};
}

}  // namespace sasoftmax

#endif  // SASOFTMAX_GRADCHECK_HPP
