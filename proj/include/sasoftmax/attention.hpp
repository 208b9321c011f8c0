#ifndef SASOFTMAX_ATTENTION_HPP
#define SASOFTMAX_ATTENTION_HPP

// Single-head causal scaled dot-product attention with a pluggable scoring
// variant, optional additive bias, optional rotary embedding, and a
// hand-written backward pass.

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "sasoftmax/error.hpp"
#include "sasoftmax/jacobian.hpp"
#include "sasoftmax/matrix.hpp"
#include "sasoftmax/variants.hpp"

namespace sasoftmax {

inline constexpr double kDefaultRopeBase = 10000.0;

/// Causal logit matrix; row i has valid_len i + 1. Entries above the
/// diagonal are held at zero and never read.
struct LogitMatrix {
  Matrix z;

  std::size_t size() const noexcept { return z.rows(); }
  static std::size_t valid_len(std::size_t row) noexcept { return row + 1; }
};

struct AttentionInput {
  Matrix q;
  Matrix k;
  Matrix v;
  std::optional<Matrix> bias;
  VariantKind kind = VariantKind::Baseline;
  // rotary embedding applied to q and k when set
  std::optional<double> rope_base;
  double eps = kDefaultEps;
};

struct AttentionCache {
  Matrix q;  // post-rotation
  Matrix k;  // post-rotation
  Matrix v;
  LogitMatrix logits;
  Matrix alpha;    // softmax weights, row-wise
  Matrix weights;  // variant weights, row-wise
  std::vector<Scaler> scalers;
  std::vector<RowExtrema> extrema;
  VariantKind kind = VariantKind::Baseline;
  std::optional<double> rope_base;
  bool has_bias = false;
};

struct AttentionResult {
  Matrix output;
  AttentionCache cache;
};

struct AttentionGrads {
  Matrix dq;
  Matrix dk;
  Matrix dv;
  std::optional<Matrix> dbias;
};

/// z[i][j] = q_i . k_j / sqrt(d_k) + bias[i][j] for j <= i.
inline LogitMatrix scaled_scores(const Matrix& q, const Matrix& k,
                                 const Matrix* bias = nullptr) {
  const std::size_t t = q.rows();
  const std::size_t d = q.cols();
  require_shape(k, t, d, "K");
  if (bias) require_shape(*bias, t, t, "bias");
  if (d == 0) throw Error(ErrorCode::ShapeMismatch, "head dimension must be positive");
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  LogitMatrix out{Matrix(t, t)};
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = dot(q.row(i), k.row(j)) * scale;
      if (bias) s += (*bias)(i, j);
      out.z(i, j) = s;
    }
  }
  return out;
}

namespace detail {

inline Matrix rope_apply(const Matrix& x, double base, double direction) {
  const std::size_t d = x.cols();
  if (d % 2 != 0) {
    throw Error(ErrorCode::OddHeadDim, "rotary embedding needs an even head dimension, got " +
                                           std::to_string(d));
  }
  Matrix out(x.rows(), d);
  for (std::size_t p = 0; p < x.rows(); ++p) {
    for (std::size_t m = 0; m < d / 2; ++m) {
      const double freq = std::pow(base, -2.0 * static_cast<double>(m) / static_cast<double>(d));
      const double angle = direction * static_cast<double>(p) * freq;
      const double c = std::cos(angle), s = std::sin(angle);
      const double x0 = x(p, 2 * m), x1 = x(p, 2 * m + 1);
      out(p, 2 * m) = x0 * c - x1 * s;
      out(p, 2 * m + 1) = x0 * s + x1 * c;
    }
  }
  return out;
}

}  // namespace detail

/// Rotates each pair (x[2m], x[2m+1]) of row p by p * base^(-2m/d).
inline Matrix rope_rotate(const Matrix& x, double base = kDefaultRopeBase) {
  return detail::rope_apply(x, base, 1.0);
}

/// Adjoint of rope_rotate (rotation by the negated angle).
inline Matrix rope_rotate_backward(const Matrix& grad, double base = kDefaultRopeBase) {
  return detail::rope_apply(grad, base, -1.0);
}

inline AttentionResult attention_forward(const AttentionInput& in) {
  const std::size_t t = in.q.rows();
  const std::size_t d = in.q.cols();
  require_shape(in.k, t, d, "K");
  if (in.v.rows() != t) throw Error(ErrorCode::ShapeMismatch, "V must have T rows");
  if (!all_finite(in.v.data())) throw Error(ErrorCode::NonFiniteInput, "V has non-finite entries");

  AttentionResult res;
  AttentionCache& c = res.cache;
  c.kind = in.kind;
  c.rope_base = in.rope_base;
  c.has_bias = in.bias.has_value();
  if (in.rope_base) {
    c.q = rope_rotate(in.q, *in.rope_base);
    c.k = rope_rotate(in.k, *in.rope_base);
  } else {
    c.q = in.q;
    c.k = in.k;
  }
  c.v = in.v;
  c.logits = scaled_scores(c.q, c.k, in.bias ? &*in.bias : nullptr);
  c.alpha = Matrix(t, t);
  c.weights = Matrix(t, t);
  c.scalers.resize(t);
  c.extrema.resize(t);

  res.output = Matrix(t, in.v.cols());
  for (std::size_t i = 0; i < t; ++i) {
    const std::size_t n = i + 1;
    c.scalers[i] =
        apply_variant_into(c.logits.z.row(i), n, in.kind, in.eps, c.alpha.row(i), c.weights.row(i));
    c.extrema[i] = row_extrema(c.logits.z.row(i), n);
    auto out = res.output.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double w = c.weights(i, j);
      const auto vj = in.v.row(j);
      for (std::size_t col = 0; col < out.size(); ++col) out[col] += w * vj[col];
    }
  }
  return res;
}

inline AttentionGrads attention_backward(const AttentionCache& c, const Matrix& d_out) {
  const std::size_t t = c.v.rows();
  if (d_out.rows() != t || d_out.cols() != c.v.cols() || c.weights.rows() != t ||
      c.scalers.size() != t) {
    throw Error(ErrorCode::CacheMismatch, "upstream gradient does not match the cached forward");
  }
  const std::size_t d = c.q.cols();
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));

  AttentionGrads g;
  g.dq = Matrix(t, d);
  g.dk = Matrix(t, d);
  g.dv = Matrix(t, c.v.cols());
  Matrix dz(t, t);
  std::vector<double> grad_w(t);
  for (std::size_t i = 0; i < t; ++i) {
    const std::size_t n = i + 1;
    const auto go = d_out.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double w = c.weights(i, j);
      auto dvj = g.dv.row(j);
      for (std::size_t col = 0; col < go.size(); ++col) dvj[col] += w * go[col];
      grad_w[j] = dot(go, c.v.row(j));
    }
    variant_vjp(c.logits.z.row(i), n, c.scalers[i], c.alpha.row(i),
                std::span<const double>(grad_w.data(), n), dz.row(i).subspan(0, n));
    auto dqi = g.dq.row(i);
    const auto qi = c.q.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double s = dz(i, j) * scale;
      if (s == 0.0) continue;
      const auto kj = c.k.row(j);
      auto dkj = g.dk.row(j);
      for (std::size_t col = 0; col < d; ++col) {
        dqi[col] += s * kj[col];
        dkj[col] += s * qi[col];
      }
    }
  }
  if (c.rope_base) {
    g.dq = rope_rotate_backward(g.dq, *c.rope_base);
    g.dk = rope_rotate_backward(g.dk, *c.rope_base);
  }
  if (c.has_bias) g.dbias = std::move(dz);
  return g;
}

}  // namespace sasoftmax

#endif  // SASOFTMAX_ATTENTION_HPP
