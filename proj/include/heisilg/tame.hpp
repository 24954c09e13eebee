#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "heisilg/heisenberg.hpp"
#include "heisilg/tolerance.hpp"

namespace heisilg {

// Constants (L_{k+1}, ..., L_{2n}) for the horizontal components and
// L_{2n+1} for the quadratic condition.
struct TameConstants {
  Vec per_component;
  double quadratic = 0.0;

  bool operator==(const TameConstants&) const = default;
};

struct TameResiduals {
  double forward = 0.0;   // uses psi(y)
  double backward = 0.0;  // uses psi(x)
};

namespace detail {

// f(y) - f(x) - <psi(z), y - x> - 1/2 sum_{i=k+1..n} (phi_i(y) phi_{n+i}(x) - phi_i(x) phi_{n+i}(y)).
// Kept in the same association order as h_function so that a sign-flipped
// last component reproduces H bit for bit.
inline double tame_defect(std::span<const double> x, std::span<const double> fx,
                          std::span<const double> y, std::span<const double> fy,
                          std::span<const double> fz, const SubgroupSplit& s) {
  const int n = s.n, k = s.k;
  double lin = 0.0;
  for (int i = 1; i <= k; ++i) lin += fz[s.idx(n + i)] * (y[i - 1] - x[i - 1]);
  double bil = 0.0;
  for (int i = k + 1; i <= n; ++i) {
    bil += fy[s.idx(i)] * fx[s.idx(n + i)] - fx[s.idx(i)] * fy[s.idx(n + i)];
  }
  return (fy.back() - fx.back()) - lin - 0.5 * bil;
}

}  // namespace detail

inline TameResiduals tame_residuals(std::span<const double> x, std::span<const double> fx,
                                    std::span<const double> y, std::span<const double> fy,
                                    const SubgroupSplit& s) {
  if (static_cast<int>(x.size()) != s.k || static_cast<int>(y.size()) != s.k ||
      static_cast<int>(fx.size()) != s.value_dim() || static_cast<int>(fy.size()) != s.value_dim()) {
    throw std::invalid_argument("tame_residuals: argument sizes do not match the split");
  }
  return {std::abs(detail::tame_defect(x, fx, y, fy, fy, s)),
          std::abs(detail::tame_defect(x, fx, y, fy, fx, s))};
}

// Outcome of a tameness check. `family` is "component j" (1-based index into
// phi) or "quadratic"; the witness pair attains the worst ratio.
struct TameCheck {
  bool pass = true;
  double worst_ratio = 0.0;
  std::string family;
  std::size_t i = 0;
  std::size_t j = 0;
};

namespace detail {

inline double ratio_of(double measured, double bound) {
  if (measured == 0.0) return 0.0;
  if (bound == 0.0) return std::numeric_limits<double>::infinity();
  return measured / bound;
}

inline void require_constants(const SampledMap& map, const TameConstants& c) {
  const auto& s = map.split();
  if (static_cast<int>(c.per_component.size()) != 2 * s.n - s.k) {
    throw std::invalid_argument("TameConstants: expected " + std::to_string(2 * s.n - s.k) +
                                " component constants");
  }
  for (double v : c.per_component) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("TameConstants: negative or non-finite");
  }
  if (!(c.quadratic >= 0.0) || !std::isfinite(c.quadratic)) {
    throw std::invalid_argument("TameConstants: negative or non-finite");
  }
}

}  // namespace detail

inline TameCheck check_tame(const SampledMap& map, const TameConstants& c) {
  detail::require_constants(map, c);
  const auto& s = map.split();
  const auto& d = map.domain();
  const auto& f = map.values();
  const double slack = lip_slack();
  TameCheck out;
  out.worst_ratio = -1.0;
  for (std::size_t a = 0; a < d.size(); ++a) {
    for (std::size_t b = a + 1; b < d.size(); ++b) {
      const double dist = euclid_dist(d[a], d[b]);
      for (int j = s.k + 1; j <= 2 * s.n; ++j) {
        const double gap = std::abs(f[b][s.idx(j)] - f[a][s.idx(j)]);
        const double r = detail::ratio_of(gap, c.per_component[s.idx(j)] * dist);
        if (r > out.worst_ratio) out = {true, r, "component " + std::to_string(j), a, b};
      }
      const TameResiduals res = tame_residuals(d[a], f[a], d[b], f[b], s);
      const double r = detail::ratio_of(res.forward + res.backward, c.quadratic * dist * dist);
      if (r > out.worst_ratio) out = {true, r, "quadratic", a, b};
    }
  }
  if (out.worst_ratio < 0.0) out.worst_ratio = 0.0;
  out.pass = out.worst_ratio <= slack;
  return out;
}

// Least constants over all sample pairs.
inline TameConstants estimate_tame_constants(const SampledMap& map) {
  if (map.size() < 2) throw std::invalid_argument("estimate_tame_constants: need at least 2 points");
  const auto& s = map.split();
  const auto& d = map.domain();
  const auto& f = map.values();
  TameConstants c;
  c.per_component.assign(static_cast<std::size_t>(2 * s.n - s.k), 0.0);
  for (std::size_t a = 0; a < d.size(); ++a) {
    for (std::size_t b = a + 1; b < d.size(); ++b) {
      const double dist = euclid_dist(d[a], d[b]);
      for (int j = s.k + 1; j <= 2 * s.n; ++j) {
        const double r = std::abs(f[b][s.idx(j)] - f[a][s.idx(j)]) / dist;
        c.per_component[s.idx(j)] = std::max(c.per_component[s.idx(j)], r);
      }
      const TameResiduals res = tame_residuals(d[a], f[a], d[b], f[b], s);
      c.quadratic = std::max(c.quadratic, (res.forward + res.backward) / (dist * dist));
    }
  }
  return c;
}

// Flip the sign of the last component of every sample.
inline SampledMap flip_last(const SampledMap& map) {
  std::vector<Vec> vals = map.values();
  for (auto& v : vals) v.back() = -v.back();
  return SampledMap(map.split(), map.domain(), std::move(vals));
}

struct TameMap {
  SampledMap map;
  TameConstants constants;
};

// Intrinsic L-Lipschitz map to the tame counterpart. For k = 1 the constant
// of phi_{n+1} improves to min{L, 2L^2}.
inline TameMap ilg_to_tame(const SampledMap& map, double L) {
  if (!(L >= 0.0) || !std::isfinite(L)) throw std::invalid_argument("ilg_to_tame: L must be >= 0");
  const auto& s = map.split();
  TameMap out{flip_last(map), {}};
  out.constants.per_component.assign(static_cast<std::size_t>(2 * s.n - s.k), L);
  out.constants.quadratic = 2.0 * L * L;
  if (s.k == 1) out.constants.per_component[s.idx(s.n + 1)] = std::min(L, 2.0 * L * L);
  return out;
}

struct IlgMap {
  SampledMap map;
  double L = 0.0;
};

inline double ilg_constant_from_tame(const TameConstants& c) {
  return std::max(euclid(c.per_component), std::sqrt(c.quadratic));
}

// Tame map back to the intrinsic map with L = max{|(L_{k+1..2n})|, sqrt(L_{2n+1})}.
inline IlgMap tame_to_ilg(const SampledMap& tame, const TameConstants& c) {
  const TameCheck chk = check_tame(tame, c);
  if (!chk.pass) {
    throw std::domain_error("tame_to_ilg: map is not tame with the given constants (" + chk.family +
                            ", pair " + std::to_string(chk.i) + "," + std::to_string(chk.j) + ")");
  }
  return {flip_last(tame), ilg_constant_from_tame(c)};
}

// Values on a uniform rectangular grid over V, row-major with the last axis
// varying fastest.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(SubgroupSplit split, Vec origin, double spacing, std::vector<std::size_t> shape,
               std::vector<Vec> values)
      : split_(split), origin_(std::move(origin)), spacing_(spacing), shape_(std::move(shape)),
        values_(std::move(values)) {
    if (static_cast<int>(origin_.size()) != split_.k || static_cast<int>(shape_.size()) != split_.k) {
      throw std::invalid_argument("GridFunction: origin and shape must have k entries");
    }
    if (!(spacing_ > 0.0) || !std::isfinite(spacing_)) {
      throw std::invalid_argument("GridFunction: spacing must be positive");
    }
    std::size_t total = 1;
    for (std::size_t m : shape_) {
      if (m == 0) throw std::invalid_argument("GridFunction: empty axis");
      total *= m;
    }
    if (values_.size() != total) throw std::invalid_argument("GridFunction: values do not match shape");
    for (const auto& v : values_) {
      if (static_cast<int>(v.size()) != split_.value_dim()) {
        throw std::invalid_argument("GridFunction: value of wrong dimension");
      }
      for (double c : v) {
        if (!std::isfinite(c)) throw std::invalid_argument("GridFunction: non-finite value");
      }
    }
  }

  const SubgroupSplit& split() const { return split_; }
  const Vec& origin() const { return origin_; }
  double spacing() const { return spacing_; }
  const std::vector<std::size_t>& shape() const { return shape_; }
  const std::vector<Vec>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  std::size_t flat_index(const std::vector<std::size_t>& multi) const {
    std::size_t f = 0;
    for (std::size_t a = 0; a < shape_.size(); ++a) f = f * shape_[a] + multi[a];
    return f;
  }
  std::vector<std::size_t> multi_index(std::size_t flat) const {
    std::vector<std::size_t> m(shape_.size());
    for (std::size_t a = shape_.size(); a-- > 0;) {
      m[a] = flat % shape_[a];
      flat /= shape_[a];
    }
    return m;
  }
  Vec node(std::size_t flat) const {
    const auto m = multi_index(flat);
    Vec p(origin_.size());
    for (std::size_t a = 0; a < p.size(); ++a) p[a] = origin_[a] + spacing_ * static_cast<double>(m[a]);
    return p;
  }

  SampledMap to_sampled() const {
    std::vector<Vec> dom(size());
    for (std::size_t i = 0; i < size(); ++i) dom[i] = node(i);
    return SampledMap(split_, std::move(dom), values_);
  }

 private:
  SubgroupSplit split_;
  Vec origin_;
  double spacing_ = 1.0;
  std::vector<std::size_t> shape_;
  std::vector<Vec> values_;
};

struct GridResidual {
  double max_residual = 0.0;
  std::size_t worst_node = 0;
};

// Central-difference residual of
//   d/dv phi_{2n+1} = phi_{n+1} + 1/2 sum_{i=2..n} (phi_i' phi_{n+i} - phi_i phi_{n+i}')
// at interior nodes of a k = 1 grid.
inline GridResidual check_ode_k1(const GridFunction& g) {
  const auto& s = g.split();
  if (s.k != 1 || s.n < 2) throw std::invalid_argument("check_ode_k1: needs k = 1 and n > 1");
  if (g.size() < 3) throw std::invalid_argument("check_ode_k1: needs at least 3 grid points");
  const auto& v = g.values();
  const double h2 = 2.0 * g.spacing();
  GridResidual out;
  for (std::size_t p = 1; p + 1 < g.size(); ++p) {
    auto der = [&](int j) { return (v[p + 1][s.idx(j)] - v[p - 1][s.idx(j)]) / h2; };
    double rhs = v[p][s.idx(s.n + 1)];
    for (int i = 2; i <= s.n; ++i) {
      rhs += 0.5 * (der(i) * v[p][s.idx(s.n + i)] - v[p][s.idx(i)] * der(s.n + i));
    }
    const double r = std::abs(der(2 * s.n + 1) - rhs);
    if (r > out.max_residual) out = {r, p};
  }
  return out;
}

// Sup-norm residual of grad phi_{2n+1} = (phi_{n+1}, ..., phi_{2n}) at nodes
// interior along every axis of a k = n grid.
inline GridResidual check_gradient_kn(const GridFunction& g) {
  const auto& s = g.split();
  if (s.k != s.n) throw std::invalid_argument("check_gradient_kn: needs k = n");
  for (std::size_t m : g.shape()) {
    if (m < 3) throw std::invalid_argument("check_gradient_kn: every axis needs at least 3 points");
  }
  const auto& v = g.values();
  const double h2 = 2.0 * g.spacing();
  GridResidual out;
  for (std::size_t p = 0; p < g.size(); ++p) {
    auto m = g.multi_index(p);
    bool interior = true;
    for (std::size_t a = 0; a < m.size(); ++a) interior = interior && m[a] > 0 && m[a] + 1 < g.shape()[a];
    if (!interior) continue;
    double r = 0.0;
    for (std::size_t a = 0; a < m.size(); ++a) {
      auto up = m, dn = m;
      ++up[a];
      --dn[a];
      const double der = (v[g.flat_index(up)].back() - v[g.flat_index(dn)].back()) / h2;
      r = std::max(r, std::abs(der - v[p][s.idx(s.n + 1 + static_cast<int>(a))]));
    }
    if (r > out.max_residual) out = {r, p};
  }
  return out;
}

// On a box (k = n) the quadratic constant is at most twice the Lipschitz
// constant of the gradient part.
inline TameConstants self_improve_quadratic(const SampledMap& map, const TameConstants& c) {
  detail::require_constants(map, c);
  if (map.split().k != map.split().n) throw std::invalid_argument("self_improve_quadratic: needs k = n");
  TameConstants out = c;
  out.quadratic = std::min(c.quadratic, 2.0 * euclid(c.per_component));
  return out;
}

}  // namespace heisilg
