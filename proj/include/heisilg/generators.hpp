#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

#include "heisilg/heisenberg.hpp"
#include "heisilg/random.hpp"
#include "heisilg/tame.hpp"

namespace heisilg {

struct IlgK1Params {
  std::uint64_t seed = 1;
  int n = 2;
  double L = 0.5;              // slope bound of each horizontal component
  int breakpoints = 8;         // kinks, placed on grid nodes
  double lo = -1.0;
  double hi = 2.0;
  std::size_t points = 1501;   // grid nodes
  Vec base_slope;              // optional common slope added to phi_2..phi_2n
};

// Piecewise-linear phi_2..phi_2n with kinks on grid nodes; phi_{2n+1} solves
//   phi_{2n+1}' = -phi_{n+1} + 1/2 sum_{i=2..n} (phi_i phi_{n+i}' - phi_i' phi_{n+i})
// by the trapezoid rule, exact on each cell. The result is an intrinsic
// Lipschitz map sampled on the grid.
inline GridFunction generate_ilg_k1(const IlgK1Params& p) {
  if (p.n < 1) throw std::invalid_argument("generate_ilg_k1: n must be >= 1");
  if (!(p.L >= 0.0)) throw std::invalid_argument("generate_ilg_k1: L must be >= 0");
  if (p.points < 3 || !(p.hi > p.lo)) throw std::invalid_argument("generate_ilg_k1: need >= 3 points on an interval");
  if (p.breakpoints < 0 || static_cast<std::size_t>(p.breakpoints) + 2 > p.points) {
    throw std::invalid_argument("generate_ilg_k1: too many breakpoints for the grid");
  }
  const int n = p.n;
  const std::size_t m = static_cast<std::size_t>(2 * n - 1);
  if (!p.base_slope.empty() && p.base_slope.size() != m) {
    throw std::invalid_argument("generate_ilg_k1: base_slope must have 2n-1 entries");
  }
  SplitMix64 rng(p.seed);
  std::set<std::size_t> kinks;
  while (kinks.size() < static_cast<std::size_t>(p.breakpoints)) kinks.insert(1 + rng.below(p.points - 2));
  const double h = (p.hi - p.lo) / static_cast<double>(p.points - 1);

  std::vector<Vec> vals(p.points, Vec(2 * static_cast<std::size_t>(n), 0.0));
  Vec slope(m);
  for (std::size_t c = 0; c < m; ++c) vals[0][c] = rng.uniform(-0.5, 0.5);
  vals[0].back() = rng.uniform(-0.5, 0.5);
  auto draw = [&] {
    for (std::size_t c = 0; c < m; ++c) {
      slope[c] = rng.uniform(-p.L, p.L) + (p.base_slope.empty() ? 0.0 : p.base_slope[c]);
    }
  };
  draw();
  for (std::size_t i = 0; i + 1 < p.points; ++i) {
    if (kinks.count(i)) draw();
    for (std::size_t c = 0; c < m; ++c) vals[i + 1][c] = vals[i][c] + slope[c] * h;
    Vec d(m);
    for (std::size_t c = 0; c < m; ++c) d[c] = (vals[i + 1][c] - vals[i][c]) / h;
    const Vec& a = vals[i];
    const Vec& b = vals[i + 1];
    double bil_a = 0.0, bil_b = 0.0;
    for (int k = 2; k <= n; ++k) {
      bil_a += a[k - 2] * d[n + k - 2] - d[k - 2] * a[n + k - 2];
      bil_b += b[k - 2] * d[n + k - 2] - d[k - 2] * b[n + k - 2];
    }
    const double rate_a = -a[n - 1] + 0.5 * bil_a;
    const double rate_b = -b[n - 1] + 0.5 * bil_b;
    vals[i + 1].back() = a.back() + 0.5 * h * (rate_a + rate_b);
  }
  return GridFunction(SubgroupSplit(n, 1), {p.lo}, h, {p.points}, std::move(vals));
}

// Polynomial of degree <= 3 in n variables with seeded coefficients.
class RandomPotential {
 public:
  RandomPotential(std::uint64_t seed, int n, double amplitude) : n_(n) {
    SplitMix64 rng(seed);
    auto add = [&](std::vector<int> e, double scale) {
      terms_.push_back({amplitude * scale * rng.uniform(-1.0, 1.0), std::move(e)});
    };
    add(std::vector<int>(n, 0), 1.0);
    for (int i = 0; i < n; ++i) {
      std::vector<int> e(n, 0);
      e[i] = 1;
      add(e, 1.0);
    }
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        std::vector<int> e(n, 0);
        ++e[i];
        ++e[j];
        add(e, 0.5);
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        for (int k = j; k < n; ++k) {
          std::vector<int> e(n, 0);
          ++e[i];
          ++e[j];
          ++e[k];
          add(e, 0.1);
        }
      }
    }
  }

  double value(std::span<const double> v) const {
    double s = 0.0;
    for (const auto& t : terms_) s += t.coef * monomial(t.exps, v, -1);
    return s;
  }

  Vec gradient(std::span<const double> v) const {
    Vec g(n_, 0.0);
    for (const auto& t : terms_) {
      for (int d = 0; d < n_; ++d) {
        if (t.exps[d] > 0) g[d] += t.coef * t.exps[d] * monomial(t.exps, v, d);
      }
    }
    return g;
  }

  // (grad p, p): values of the tame map for the split k = n.
  Vec tame_value(std::span<const double> v) const {
    Vec out = gradient(v);
    out.push_back(value(v));
    return out;
  }

 private:
  struct Term {
    double coef;
    std::vector<int> exps;
  };

  static double monomial(const std::vector<int>& e, std::span<const double> v, int lowered) {
    double r = 1.0;
    for (std::size_t d = 0; d < e.size(); ++d) {
      const int p = e[d] - (static_cast<int>(d) == lowered ? 1 : 0);
      for (int k = 0; k < p; ++k) r *= v[d];
    }
    return r;
  }

  int n_;
  std::vector<Term> terms_;
};

struct TameKnParams {
  std::uint64_t seed = 1;
  int n = 2;
  double lo = -1.0;
  double hi = 1.0;
  std::size_t count = 12;
  double amplitude = 1.0;
};

// Tame sample for k = n: phi_{2n+1} a random polynomial potential and the
// middle components its gradient, at random points of the box [lo, hi]^n.
inline SampledMap generate_tame_kn(const TameKnParams& p) {
  if (p.n < 1) throw std::invalid_argument("generate_tame_kn: n must be >= 1");
  if (p.count < 1 || !(p.hi > p.lo)) throw std::invalid_argument("generate_tame_kn: need points in a box");
  const RandomPotential pot(p.seed, p.n, p.amplitude);
  SplitMix64 rng(p.seed ^ 0x5DEECE66DULL);
  std::vector<Vec> dom, vals;
  for (std::size_t i = 0; i < p.count; ++i) {
    Vec v(p.n);
    for (auto& c : v) c = rng.uniform(p.lo, p.hi);
    vals.push_back(pot.tame_value(v));
    dom.push_back(std::move(v));
  }
  return SampledMap(SubgroupSplit(p.n, p.n), std::move(dom), std::move(vals));
}

}  // namespace heisilg
