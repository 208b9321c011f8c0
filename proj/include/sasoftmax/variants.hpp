#ifndef SASOFTMAX_VARIANTS_HPP
#define SASOFTMAX_VARIANTS_HPP

// Row-level attention scoring: the baseline softmax and the four
// self-adjusting variants, all evaluated over the causal prefix of a row.
//
//   Baseline  softmax(z)
//   V1        z * softmax(z)
//   V2        (z - min) * softmax(z)
//   V3        (z - min) / (max - min + eps) * softmax(z)
//   V4        (z - min(min, 0)) / (max(max, 0) - min(min, 0) + eps) * softmax(z)
//
// min/max range over the unmasked prefix only. Entries at or beyond
// valid_len are never read and are written as exact zeros.

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sasoftmax/error.hpp"

namespace sasoftmax {

inline constexpr double kDefaultEps = 1e-10;

enum class VariantKind { Baseline, V1, V2, V3, V4 };

inline constexpr std::array<VariantKind, 5> kAllVariants = {
    VariantKind::Baseline, VariantKind::V1, VariantKind::V2, VariantKind::V3, VariantKind::V4};

constexpr std::string_view to_string(VariantKind kind) {
  switch (kind) {
    case VariantKind::Baseline: return "baseline";
    case VariantKind::V1: return "v1";
    case VariantKind::V2: return "v2";
    case VariantKind::V3: return "v3";
    case VariantKind::V4: return "v4";
  }
  return "?";
}

inline std::optional<VariantKind> parse_variant(std::string_view name) {
  for (VariantKind k : kAllVariants) {
    if (to_string(k) == name) return k;
  }
  if (name == "softmax") return VariantKind::Baseline;
  return std::nullopt;
}

/// Pre-softmax scores of one query row. Only the first valid_len entries
/// are live; the rest are causally masked.
struct LogitRow {
  std::vector<double> values;
  std::size_t valid_len = 0;

  LogitRow() = default;
  LogitRow(std::vector<double> v, std::size_t len) : values(std::move(v)), valid_len(len) {}
  /// Fully unmasked row.
  explicit LogitRow(std::vector<double> v) : values(std::move(v)), valid_len(values.size()) {}

  std::size_t size() const noexcept { return values.size(); }
};

struct ScoreRow {
  std::vector<double> weights;
  std::size_t valid_len = 0;

  std::size_t size() const noexcept { return weights.size(); }
};

struct RowExtrema {
  double min_val = 0.0;
  double max_val = 0.0;
  std::size_t argmin = 0;
  std::size_t argmax = 0;
};

namespace detail {

inline void check_row(std::span<const double> z, std::size_t valid_len) {
  if (valid_len == 0) throw Error(ErrorCode::EmptyRow, "valid_len must be at least 1");
  if (valid_len > z.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "valid_len " + std::to_string(valid_len) + " exceeds row length " +
                    std::to_string(z.size()));
  }
  for (std::size_t j = 0; j < valid_len; ++j) {
    if (!std::isfinite(z[j])) {
      throw Error(ErrorCode::NonFiniteInput, "logit at index " + std::to_string(j));
    }
  }
}

}  // namespace detail

/// Extrema over [0, valid_len). Ties go to the lowest index.
inline RowExtrema row_extrema(std::span<const double> z, std::size_t valid_len) {
  detail::check_row(z, valid_len);
  RowExtrema e{z[0], z[0], 0, 0};
  for (std::size_t j = 1; j < valid_len; ++j) {
    if (z[j] < e.min_val) {
      e.min_val = z[j];
      e.argmin = j;
    }
    if (z[j] > e.max_val) {
      e.max_val = z[j];
      e.argmax = j;
    }
  }
  return e;
}

inline RowExtrema row_extrema(const LogitRow& z) { return row_extrema(z.values, z.valid_len); }

/// Writes softmax over the live prefix into out (same length as z); zeros the tail.
inline void softmax_into(std::span<const double> z, std::size_t valid_len, std::span<double> out) {
  detail::check_row(z, valid_len);
  double peak = z[0];
  for (std::size_t j = 1; j < valid_len; ++j) peak = std::max(peak, z[j]);
  double total = 0.0;
  for (std::size_t j = 0; j < valid_len; ++j) {
    out[j] = std::exp(z[j] - peak);
    total += out[j];
  }
  const double inv = 1.0 / total;
  for (std::size_t j = 0; j < valid_len; ++j) out[j] *= inv;
  for (std::size_t j = valid_len; j < out.size(); ++j) out[j] = 0.0;
}

inline ScoreRow softmax_row(const LogitRow& z) {
  ScoreRow r{std::vector<double>(z.size()), z.valid_len};
  softmax_into(z.values, z.valid_len, r.weights);
  return r;
}

/// The multiplicative factor a variant applies to each softmax weight,
/// written uniformly as c_j = (z_j - shift) / denom. shift_index and
/// upper_index name the logits the shift and the upper bound follow; that
/// is where gradient through the row extrema is routed.
struct Scaler {
  VariantKind kind = VariantKind::Baseline;
  double shift = 0.0;
  double denom = 1.0;
  std::optional<std::size_t> shift_index;
  std::optional<std::size_t> upper_index;
  // denom = upper - shift + eps (V3, V4); otherwise denom is the constant 1
  bool normalized = false;

  double value(double z) const {
    if (kind == VariantKind::Baseline) return 1.0;
    return (z - shift) / denom;
  }
};

inline Scaler make_scaler(std::span<const double> z, std::size_t valid_len, VariantKind kind,
                          double eps) {
  Scaler s;
  s.kind = kind;
  if (kind == VariantKind::Baseline || kind == VariantKind::V1) return s;

  const RowExtrema e = row_extrema(z, valid_len);
  switch (kind) {
    case VariantKind::V2:
      s.shift = e.min_val;
      s.shift_index = e.argmin;
      break;
    case VariantKind::V3:
      s.shift = e.min_val;
      s.shift_index = e.argmin;
      s.upper_index = e.argmax;
      s.normalized = true;
      s.denom = e.max_val - e.min_val + eps;
      break;
    case VariantKind::V4: {
      // The constant branch owns the boundary: at min == 0 (max == 0) the
      // clamp is treated as inactive.
      double lower = 0.0, upper = 0.0;
      if (e.min_val < 0.0) {
        lower = e.min_val;
        s.shift_index = e.argmin;
      }
      if (e.max_val > 0.0) {
        upper = e.max_val;
        s.upper_index = e.argmax;
      }
      s.shift = lower;
      s.normalized = true;
      s.denom = upper - lower + eps;
      break;
    }
    default:
      break;
  }
  return s;
}

/// Evaluates the variant over a row. alpha receives the softmax weights and
/// out the variant weights; both have the length of z.
inline Scaler apply_variant_into(std::span<const double> z, std::size_t valid_len,
                                 VariantKind kind, double eps, std::span<double> alpha,
                                 std::span<double> out) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  softmax_into(z, valid_len, alpha);
  const Scaler s = make_scaler(z, valid_len, kind, eps);
  for (std::size_t j = 0; j < valid_len; ++j) out[j] = s.value(z[j]) * alpha[j];
  for (std::size_t j = valid_len; j < out.size(); ++j) out[j] = 0.0;
  return s;
}

inline ScoreRow apply_variant(const LogitRow& z, VariantKind kind, double eps = kDefaultEps) {
  std::vector<double> alpha(z.size());
  ScoreRow r{std::vector<double>(z.size()), z.valid_len};
  apply_variant_into(z.values, z.valid_len, kind, eps, alpha, r.weights);
  return r;
}

}  // namespace sasoftmax

#endif  // SASOFTMAX_VARIANTS_HPP
