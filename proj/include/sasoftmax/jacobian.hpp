#ifndef SASOFTMAX_JACOBIAN_HPP
#define SASOFTMAX_JACOBIAN_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "sasoftmax/error.hpp"
#include "sasoftmax/matrix.hpp"
#include "sasoftmax/variants.hpp"

namespace sasoftmax {

/// entries(j, k) = d weight_j / d z_k. Rows and columns at or beyond
/// valid_len are zero.
struct JacobianBlock {
  Matrix entries;
  std::size_t valid_len = 0;
};

/// diag(alpha) - alpha alpha^T on the live block.
inline JacobianBlock softmax_jacobian(const ScoreRow& alpha) {
  const std::size_t t = alpha.size();
  if (alpha.valid_len == 0) throw Error(ErrorCode::EmptyRow, "valid_len must be at least 1");
  if (alpha.valid_len > t) throw Error(ErrorCode::InvalidArgument, "valid_len exceeds row length");
  double total = 0.0;
  for (std::size_t j = 0; j < alpha.valid_len; ++j) total += alpha.weights[j];
  if (std::abs(total - 1.0) > 1e-8) {
    throw Error(ErrorCode::NotNormalized, "weights sum to " + std::to_string(total));
  }
  JacobianBlock jac{Matrix(t, t), alpha.valid_len};
  for (std::size_t j = 0; j < alpha.valid_len; ++j) {
    const double aj = alpha.weights[j];
    for (std::size_t k = 0; k < alpha.valid_len; ++k) {
      jac.entries(j, k) = (j == k ? aj : 0.0) - aj * alpha.weights[k];
    }
  }
  return jac;
}

namespace detail {

// d c_j / d z_k for the scaler of a row.
inline double scaler_partial(const Scaler& s, std::span<const double> z, std::size_t j,
                             std::size_t k) {
  const double kron = (j == k) ? 1.0 : 0.0;
  switch (s.kind) {
    case VariantKind::Baseline:
      return 0.0;
    case VariantKind::V1:
      return kron;
    default:
      break;
  }
  const double on_shift = (s.shift_index && *s.shift_index == k) ? 1.0 : 0.0;
  double d = (kron - on_shift) / s.denom;
  if (s.normalized) {
    const double on_upper = (s.upper_index && *s.upper_index == k) ? 1.0 : 0.0;
    const double c = (z[j] - s.shift) / s.denom;
    d -= c / s.denom * (on_upper - on_shift);
  }
  return d;
}

}  // namespace detail

/// Analytic Jacobian of apply_variant, with gradient routed through the
/// row extrema (ties resolved to the lowest index).
inline JacobianBlock variant_jacobian(const LogitRow& z, VariantKind kind,
                                      double eps = kDefaultEps) {
  const std::size_t t = z.size();
  std::vector<double> alpha(t), w(t);
  const Scaler s = apply_variant_into(z.values, z.valid_len, kind, eps, alpha, w);
  JacobianBlock jac{Matrix(t, t), z.valid_len};
  for (std::size_t j = 0; j < z.valid_len; ++j) {
    const double cj = s.value(z.values[j]);
    for (std::size_t k = 0; k < z.valid_len; ++k) {
      const double soft = alpha[j] * ((j == k ? 1.0 : 0.0) - alpha[k]);
      jac.entries(j, k) = alpha[j] * detail::scaler_partial(s, z.values, j, k) + cj * soft;
    }
  }
  return jac;
}

/// Vector-Jacobian product: dz_k = sum_j grad_w[j] * d weight_j / d z_k,
/// evaluated in O(valid_len) from the forward quantities.
inline void variant_vjp(std::span<const double> z, std::size_t valid_len, const Scaler& s,
                        std::span<const double> alpha, std::span<const double> grad_w,
                        std::span<double> dz) {
  const std::size_t n = valid_len;
  // Softmax path: u_j = g_j c_j a_j, dz_k = u_k - a_k sum(u).
  double sum_u = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double u = grad_w[j] * s.value(z[j]) * alpha[j];
    dz[j] = u;
    sum_u += u;
  }
  for (std::size_t k = 0; k < n; ++k) dz[k] -= alpha[k] * sum_u;

  // Scaler path with p_j = g_j a_j.
  if (s.kind == VariantKind::V1) {
    for (std::size_t k = 0; k < n; ++k) dz[k] += grad_w[k] * alpha[k];
  } else if (s.kind != VariantKind::Baseline) {
    double sum_p = 0.0, sum_pc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double p = grad_w[j] * alpha[j];
      dz[j] += p / s.denom;
      sum_p += p;
      sum_pc += p * s.value(z[j]);
    }
    if (s.shift_index) dz[*s.shift_index] -= sum_p / s.denom;
    if (s.normalized) {
      const double dd = sum_pc / s.denom;
      if (s.upper_index) dz[*s.upper_index] -= dd;
      if (s.shift_index) dz[*s.shift_index] += dd;
    }
  }
  for (std::size_t k = n; k < dz.size(); ++k) dz[k] = 0.0;
}

/// Central-difference Jacobian of apply_variant; only live logits are
/// perturbed.
inline JacobianBlock fd_jacobian(const LogitRow& z, VariantKind kind, double eps, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "step h must be positive");
  const std::size_t t = z.size();
  detail::check_row(z.values, z.valid_len);
  JacobianBlock jac{Matrix(t, t), z.valid_len};
  LogitRow probe = z;
  for (std::size_t k = 0; k < z.valid_len; ++k) {
    probe.values[k] = z.values[k] + h;
    const ScoreRow up = apply_variant(probe, kind, eps);
    probe.values[k] = z.values[k] - h;
    const ScoreRow down = apply_variant(probe, kind, eps);
    probe.values[k] = z.values[k];
    for (std::size_t j = 0; j < z.valid_len; ++j) {
      jac.entries(j, k) = (up.weights[j] - down.weights[j]) / (2.0 * h);
    }
  }
  return jac;
}

/// Smallest distance between two live logits. V4 also counts the distance
/// of each logit to zero, where its clamps switch branch. Infinity for a
/// singleton row with no such hazard.
inline double tie_gap(const LogitRow& z, VariantKind kind) {
  std::vector<double> pts(z.values.begin(), z.values.begin() + static_cast<long>(z.valid_len));
  if (kind == VariantKind::V4) pts.push_back(0.0);
  std::sort(pts.begin(), pts.end());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < pts.size(); ++i) gap = std::min(gap, pts[i] - pts[i - 1]);
  return gap;
}

}  // namespace sasoftmax

#endif  // SASOFTMAX_JACOBIAN_HPP
