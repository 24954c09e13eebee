#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "heisilg/heisenberg.hpp"
#include "heisilg/random.hpp"
#include "heisilg/tolerance.hpp"

namespace heisilg {

// First-order jet (f(e), grad(e)) on a finite set E in R^n.
struct JetData {
  std::vector<Vec> points;
  Vec f;
  std::vector<Vec> grad;

  int dim() const { return points.empty() ? 0 : static_cast<int>(points.front().size()); }
  std::size_t size() const { return points.size(); }
};

inline void require_jet_shape(const JetData& jet) {
  if (jet.points.empty()) throw std::invalid_argument("JetData: empty point set");
  if (jet.f.size() != jet.points.size() || jet.grad.size() != jet.points.size()) {
    throw std::invalid_argument("JetData: points, f and grad differ in length");
  }
  const std::size_t n = jet.points.front().size();
  if (n == 0) throw std::invalid_argument("JetData: zero-dimensional points");
  for (std::size_t i = 0; i < jet.points.size(); ++i) {
    if (jet.points[i].size() != n || jet.grad[i].size() != n) {
      throw std::invalid_argument("JetData: inconsistent dimension at point " + std::to_string(i));
    }
    for (double c : jet.points[i]) {
      if (!std::isfinite(c)) throw std::invalid_argument("JetData: non-finite point");
    }
    for (double c : jet.grad[i]) {
      if (!std::isfinite(c)) throw std::invalid_argument("JetData: non-finite gradient");
    }
    if (!std::isfinite(jet.f[i])) throw std::invalid_argument("JetData: non-finite value");
  }
  for (std::size_t i = 0; i < jet.points.size(); ++i) {
    for (std::size_t j = i + 1; j < jet.points.size(); ++j) {
      if (sup_dist(jet.points[i], jet.points[j]) <= 1e-12) {
        throw std::invalid_argument("JetData: duplicate points " + std::to_string(i) + " and " +
                                    std::to_string(j));
      }
    }
  }
}

// Least lambda with |grad(x) - grad(y)| <= lambda |x - y| and
// |f(x) - f(y) - <grad(x), x - y>| <= lambda |x - y|^2 in both orders.
inline double validate_jet(const JetData& jet) {
  require_jet_shape(jet);
  double lambda = 0.0;
  for (std::size_t a = 0; a < jet.size(); ++a) {
    for (std::size_t b = 0; b < jet.size(); ++b) {
      if (a == b) continue;
      const Vec d = sub(jet.points[a], jet.points[b]);
      const double r = euclid(d);
      lambda = std::max(lambda, euclid_dist(jet.grad[a], jet.grad[b]) / r);
      lambda = std::max(lambda, std::abs(jet.f[a] - jet.f[b] - dot(jet.grad[a], d)) / (r * r));
    }
  }
  return lambda;
}

// Closed dyadic cube prod [index_d 2^-level, (index_d + 1) 2^-level].
struct DyadicCube {
  int level = 0;
  int dim = 0;
  std::array<std::int64_t, 3> index{};

  double side() const { return std::ldexp(1.0, -level); }
  double lo(std::size_t d) const { return std::ldexp(static_cast<double>(index[d]), -level); }
  double hi(std::size_t d) const { return std::ldexp(static_cast<double>(index[d] + 1), -level); }

  DyadicCube parent() const {
    DyadicCube p{level - 1, dim, index};
    for (int d = 0; d < dim; ++d) p.index[d] = (index[d] >= 0) ? index[d] / 2 : -((-index[d] + 1) / 2);
    return p;
  }

  bool operator==(const DyadicCube&) const = default;
};

// Blending profile theta on [0, 1] with theta(0) = 0, theta(1) = 1.
enum class BumpProfile {
  kSmoothstep,    // s^2 (3 - 2 s), C^1
  kSmootherstep,  // s^3 (10 - 15 s + 6 s^2), C^2
  kSmooth,        // g(s) / (g(s) + g(1 - s)) with g(s) = exp(-1/s), C^infinity
};

struct WhitneyParams {
  double inflation = 2.5;  // cube Q* = inflation * Q carries the bump
  BumpProfile profile = BumpProfile::kSmootherstep;
};

namespace detail {

inline double bump(double s, BumpProfile p) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  if (p == BumpProfile::kSmoothstep) return s * s * (3.0 - 2.0 * s);
  if (p == BumpProfile::kSmootherstep) return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
  const double a = std::exp(-1.0 / s), b = std::exp(-1.0 / (1.0 - s));
  return a / (a + b);
}

// Odometer step over the index box [first, last]; false after the last cell.
inline bool advance(std::array<std::int64_t, 3>& idx, const std::array<std::int64_t, 3>& first,
                    const std::array<std::int64_t, 3>& last, int dim) {
  for (int a = 0; a < dim; ++a) {
    if (++idx[a] <= last[a]) return true;
    idx[a] = first[a];
  }
  return false;
}

inline double bump_derivative(double s, BumpProfile p) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  if (p == BumpProfile::kSmoothstep) return 6.0 * s * (1.0 - s);
  if (p == BumpProfile::kSmootherstep) return 30.0 * s * s * (1.0 - s) * (1.0 - s);
  const double a = std::exp(-1.0 / s), b = std::exp(-1.0 / (1.0 - s));
  const double da = a / (s * s), db = -b / ((1.0 - s) * (1.0 - s));
  return (da * b - a * db) / ((a + b) * (a + b));
}

}  // namespace detail

// C^{1,1} extension of a jet built from Whitney cubes of R^n \ E: the maximal
// dyadic cubes with diam Q <= dist(Q, E), which also satisfy
// dist(Q, E) <= 4 diam Q. Each cube carries the affine polynomial of its
// nearest jet point; the polynomials are blended by a normalized partition of
// unity subordinate to the inflated cubes. Cubes are found on demand for each
// query point, so the decomposition covers all of R^n \ E.
class WhitneyExtension {
 public:
  struct Eval {
    double value = 0.0;
    Vec gradient;
  };

  explicit WhitneyExtension(JetData jet, WhitneyParams params = {})
      : jet_(std::move(jet)), params_(params) {
    require_jet_shape(jet_);
    if (jet_.dim() > 3) throw std::invalid_argument("WhitneyExtension: supports n <= 3");
    if (!(params_.inflation > 1.0 && params_.inflation < 3.0)) {
      throw std::invalid_argument("WhitneyExtension: inflation must lie in (1, 3)");
    }
    lambda_ = validate_jet(jet_);
    lex_order_.resize(jet_.size());
    std::iota(lex_order_.begin(), lex_order_.end(), std::size_t{0});
    std::stable_sort(lex_order_.begin(), lex_order_.end(),
                     [&](std::size_t a, std::size_t b) { return jet_.points[a] < jet_.points[b]; });
  }

  const JetData& jet() const { return jet_; }
  const WhitneyParams& params() const { return params_; }
  double lambda() const { return lambda_; }
  int dim() const { return jet_.dim(); }

  double dist_to_E(std::span<const double> x) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : jet_.points) best = std::min(best, euclid_dist(x, e));
    return best;
  }

  double cube_dist_to_E(const DyadicCube& q) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : jet_.points) best = std::min(best, point_cube_dist(e, q));
    return best;
  }

  bool satisfies_condition(const DyadicCube& q) const {
    const double side = q.side();
    const double need = static_cast<double>(dim()) * side * side;
    std::array<double, 3> lo{}, hi{};
    for (int d = 0; d < q.dim; ++d) {
      lo[d] = static_cast<double>(q.index[d]) * side;
      hi[d] = lo[d] + side;
    }
    for (const auto& e : jet_.points) {
      double s = 0.0;
      for (int d = 0; d < q.dim; ++d) {
        const double g = e[d] < lo[d] ? lo[d] - e[d] : (e[d] > hi[d] ? e[d] - hi[d] : 0.0);
        s += g * g;
      }
      if (s < need) return false;
    }
    return true;
  }

  bool is_whitney(const DyadicCube& q) const {
    return satisfies_condition(q) && !satisfies_condition(q.parent());
  }

  // Nearest jet point to a cube; ties go to the lexicographically first point.
  std::size_t nearest_point(const DyadicCube& q) const {
    std::size_t best = lex_order_.front();
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i : lex_order_) {
      const double d = point_cube_dist(jet_.points[i], q);
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    return best;
  }

  // Whitney cube containing x (x not in E).
  DyadicCube cube_containing(std::span<const double> x) const {
    const double d = dist_to_E(x);
    if (!(d > 0.0)) throw std::invalid_argument("cube_containing: point lies in E");
    const double rn = std::sqrt(static_cast<double>(dim()));
    int level = static_cast<int>(std::ceil(std::log2(2.0 * rn / d))) + 1;
    DyadicCube q = cube_at(x, level);
    while (!satisfies_condition(q)) q = cube_at(x, ++level);
    while (satisfies_condition(q.parent())) q = q.parent();
    return q;
  }

  // Whitney cubes meeting the box [lo, hi] with side at least min_side.
  std::vector<DyadicCube> cubes_in_box(std::span<const double> lo, std::span<const double> hi,
                                       double min_side) const {
    std::vector<DyadicCube> out;
    const int coarse = static_cast<int>(std::floor(-std::log2(max_extent(lo, hi)))) - 1;
    const int fine = static_cast<int>(std::ceil(-std::log2(min_side)));
    for (int level = coarse; level <= fine; ++level) {
      std::array<std::int64_t, 3> first{}, last{};
      for (std::size_t d = 0; d < lo.size(); ++d) {
        first[d] = static_cast<std::int64_t>(std::floor(std::ldexp(lo[d], level)));
        last[d] = static_cast<std::int64_t>(std::ceil(std::ldexp(hi[d], level))) - 1;
      }
      DyadicCube q{level, dim(), first};
      while (true) {
        if (is_whitney(q)) out.push_back(q);
        if (!detail::advance(q.index, first, last, q.dim)) break;
      }
    }
    return out;
  }

  Eval evaluate(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim()) throw std::invalid_argument("evaluate: wrong dimension");
    for (std::size_t i = 0; i < jet_.size(); ++i) {
      if (std::equal(x.begin(), x.end(), jet_.points[i].begin())) return {jet_.f[i], jet_.grad[i]};
    }
    const double d = dist_to_E(x);
    const double rn = std::sqrt(static_cast<double>(dim()));
    const double rho = params_.inflation;
    const double s_max = d / (rn * (1.0 - 0.5 * (rho - 1.0)));
    const double s_min = d / (rn * (5.0 + 0.5 * (rho - 1.0)));
    const int lvl_lo = static_cast<int>(std::floor(-std::log2(s_max))) - 1;
    const int lvl_hi = static_cast<int>(std::ceil(-std::log2(s_min))) + 1;

    double xmax = 0.0;
    for (double c : x) xmax = std::max(xmax, std::abs(c));
    if (std::ldexp(xmax + 1.0, lvl_hi) > 0x1.0p52) {
      // Below the resolvable cube size the blend is indistinguishable from
      // the nearest affine polynomial.
      return affine_at(nearest_to_point(x), x);
    }

    struct Term {
      std::size_t e;
      double w;
      std::array<double, 3> dw;
    };
    std::vector<Term> terms;
    const std::size_t n = x.size();
    for (int level = lvl_lo; level <= lvl_hi; ++level) {
      const double side = std::ldexp(1.0, -level);
      const double reach = 0.5 * (rho - 1.0) * side;
      std::array<std::int64_t, 3> first{}, last{};
      for (std::size_t a = 0; a < n; ++a) {
        first[a] = static_cast<std::int64_t>(std::floor(std::ldexp(x[a] - reach, level)));
        last[a] = static_cast<std::int64_t>(std::floor(std::ldexp(x[a] + reach, level)));
      }
      DyadicCube q{level, dim(), first};
      while (true) {
        Term t;
        if (bump_at(q, x, t.w, t.dw) && is_whitney(q)) {
          t.e = nearest_point(q);
          terms.push_back(std::move(t));
        }
        if (!detail::advance(q.index, first, last, q.dim)) break;
      }
    }
    if (terms.empty()) throw std::logic_error("WhitneyExtension: no cube covers the query point");

    double sum = 0.0;
    std::array<double, 3> dsum{};
    for (const auto& t : terms) {
      sum += t.w;
      for (std::size_t a = 0; a < n; ++a) dsum[a] += t.dw[a];
    }
    // f = P_ref + sum_Q w_Q (P_Q - P_ref), exact when all polynomials agree.
    const std::size_t ref = terms.front().e;
    const Eval base = affine_at(ref, x);
    Eval out = base;
    for (const auto& t : terms) {
      if (t.e == ref) continue;
      const double w = t.w / sum;
      const double diff = affine_value(t.e, x) - base.value;
      out.value += w * diff;
      for (std::size_t a = 0; a < n; ++a) {
        const double dw = t.dw[a] / sum - t.w * dsum[a] / (sum * sum);
        out.gradient[a] += w * (jet_.grad[t.e][a] - jet_.grad[ref][a]) + dw * diff;
      }
    }
    return out;
  }

 private:
  static double point_cube_dist(std::span<const double> e, const DyadicCube& q) {
    double s = 0.0;
    for (std::size_t d = 0; d < e.size(); ++d) {
      const double lo = q.lo(d), hi = q.hi(d);
      const double g = e[d] < lo ? lo - e[d] : (e[d] > hi ? e[d] - hi : 0.0);
      s += g * g;
    }
    return std::sqrt(s);
  }

  static double max_extent(std::span<const double> lo, std::span<const double> hi) {
    double m = 0.0;
    for (std::size_t d = 0; d < lo.size(); ++d) m = std::max(m, hi[d] - lo[d]);
    return m;
  }

  static DyadicCube cube_at(std::span<const double> x, int level) {
    DyadicCube q{level, static_cast<int>(x.size()), {}};
    for (std::size_t d = 0; d < x.size(); ++d) {
      q.index[d] = static_cast<std::int64_t>(std::floor(std::ldexp(x[d], level)));
    }
    return q;
  }

  std::size_t nearest_to_point(std::span<const double> x) const {
    std::size_t best = lex_order_.front();
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i : lex_order_) {
      const double d = euclid_dist(x, jet_.points[i]);
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    return best;
  }

  double affine_value(std::size_t e, std::span<const double> x) const {
    const auto& p = jet_.points[e];
    const auto& g = jet_.grad[e];
    double v = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) v += g[a] * (x[a] - p[a]);
    return jet_.f[e] + v;
  }

  Eval affine_at(std::size_t e, std::span<const double> x) const {
    const Vec d = sub(x, jet_.points[e]);
    return {jet_.f[e] + dot(jet_.grad[e], d), jet_.grad[e]};
  }

  // Product bump of the inflated cube; returns false when x is outside it.
  bool bump_at(const DyadicCube& q, std::span<const double> x, double& w,
               std::array<double, 3>& dw) const {
    const std::size_t n = x.size();
    const double r = 0.5 * q.side();
    const double rs = params_.inflation * r;
    std::array<double, 3> th{}, dth{};
    for (std::size_t a = 0; a < n; ++a) {
      const double c = 0.5 * (q.lo(a) + q.hi(a));
      const double u = std::abs(x[a] - c);
      if (u >= rs) return false;
      const double s = (rs - u) / (rs - r);
      th[a] = detail::bump(s, params_.profile);
      const double sgn = (x[a] > c) ? 1.0 : (x[a] < c ? -1.0 : 0.0);
      dth[a] = -sgn * detail::bump_derivative(s, params_.profile) / (rs - r);
    }
    w = 1.0;
    for (std::size_t a = 0; a < n; ++a) w *= th[a];
    if (w == 0.0) return false;
    for (std::size_t a = 0; a < n; ++a) {
      double p = dth[a];
      for (std::size_t b = 0; b < n; ++b) {
        if (b != a) p *= th[b];
      }
      dw[a] = p;
    }
    return true;
  }

  JetData jet_;
  WhitneyParams params_;
  double lambda_ = 0.0;
  std::vector<std::size_t> lex_order_;
};

inline WhitneyExtension build_extension(JetData jet, WhitneyParams params = {}) {
  return WhitneyExtension(std::move(jet), params);
}

// Axis-aligned box [lo, hi] around the jet points, scaled about its center.
struct Box {
  Vec lo;
  Vec hi;
};

inline Box jet_box(const JetData& jet, double factor) {
  const std::size_t n = static_cast<std::size_t>(jet.dim());
  Box b{Vec(n, std::numeric_limits<double>::infinity()), Vec(n, -std::numeric_limits<double>::infinity())};
  for (const auto& p : jet.points) {
    for (std::size_t d = 0; d < n; ++d) {
      b.lo[d] = std::min(b.lo[d], p[d]);
      b.hi[d] = std::max(b.hi[d], p[d]);
    }
  }
  double ext = 0.0;
  for (std::size_t d = 0; d < n; ++d) ext = std::max(ext, b.hi[d] - b.lo[d]);
  if (ext == 0.0) ext = 1.0;
  for (std::size_t d = 0; d < n; ++d) {
    const double c = 0.5 * (b.lo[d] + b.hi[d]);
    b.lo[d] = c - 0.5 * factor * ext;
    b.hi[d] = c + 0.5 * factor * ext;
  }
  return b;
}

// Empirical Lipschitz constant of the gradient over random pairs in the box,
// mixing far pairs with pairs at log-uniform small separations.
inline double estimate_gradient_lip(const WhitneyExtension& ext, const Box& box, std::size_t pairs,
                                    std::uint64_t seed) {
  SplitMix64 rng(seed);
  const std::size_t n = static_cast<std::size_t>(ext.dim());
  double diam = 0.0;
  for (std::size_t d = 0; d < n; ++d) diam = std::max(diam, box.hi[d] - box.lo[d]);
  double best = 0.0;
  Vec x(n), y(n), u(n);
  for (std::size_t p = 0; p < pairs; ++p) {
    for (std::size_t d = 0; d < n; ++d) x[d] = rng.uniform(box.lo[d], box.hi[d]);
    for (std::size_t d = 0; d < n; ++d) u[d] = rng.uniform(-1.0, 1.0);
    const double un = euclid(u);
    if (un == 0.0) continue;
    const double r = diam * std::pow(10.0, rng.uniform(-5.0, 0.0));
    for (std::size_t d = 0; d < n; ++d) y[d] = x[d] + r * u[d] / un;
    const double sep = euclid_dist(x, y);
    if (sep == 0.0) continue;
    best = std::max(best, euclid_dist(ext.evaluate(x).gradient, ext.evaluate(y).gradient) / sep);
  }
  return best;
}

// Bound C(n) with Lip(grad f) <= C(n) * lambda for this construction,
// frozen at about twice the worst ratio seen over random, clustered and
// near-affine jets (436, 280 and 170 for n = 1, 2, 3).
inline double whitney_constant(int n) {
  switch (n) {
    case 1: return 1000.0;
    case 2: return 600.0;
    case 3: return 400.0;
    default: throw std::invalid_argument("whitney_constant: supports n <= 3");
  }
}

// McShane extension min_e f(e) + L |x - e| of an L-Lipschitz function.
class McShaneExtension {
 public:
  McShaneExtension(std::vector<Vec> points, Vec values, double L)
      : points_(std::move(points)), values_(std::move(values)), L_(L) {
    if (points_.empty() || points_.size() != values_.size()) {
      throw std::invalid_argument("mcshane_extend: points and values must be non-empty and aligned");
    }
    if (!(L_ >= 0.0) || !std::isfinite(L_)) throw std::invalid_argument("mcshane_extend: L must be >= 0");
    const double slack = lip_slack();
    for (std::size_t a = 0; a < points_.size(); ++a) {
      for (std::size_t b = a + 1; b < points_.size(); ++b) {
        const double gap = std::abs(values_[a] - values_[b]);
        const double bound = L_ * euclid_dist(points_[a], points_[b]);
        if (gap > bound * slack && gap > 0.0) {
          throw std::domain_error("mcshane_extend: input is not L-Lipschitz at pair " +
                                  std::to_string(a) + "," + std::to_string(b));
        }
      }
    }
  }

  double operator()(std::span<const double> x) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (std::equal(x.begin(), x.end(), points_[i].begin())) return values_[i];
      best = std::min(best, values_[i] + L_ * euclid_dist(x, points_[i]));
    }
    return best;
  }

  double lipschitz() const { return L_; }

 private:
  std::vector<Vec> points_;
  Vec values_;
  double L_;
};

inline McShaneExtension mcshane_extend(std::vector<Vec> points, Vec values, double L) {
  return McShaneExtension(std::move(points), std::move(values), L);
}

}  // namespace heisilg
