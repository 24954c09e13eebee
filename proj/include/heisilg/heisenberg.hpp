#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "heisilg/tolerance.hpp"

namespace heisilg {

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double euclid(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline Vec sub(std::span<const double> a, std::span<const double> b) {
  Vec d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

inline double euclid_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline double sup_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

// Point (x_1, ..., x_2n, t) of the Heisenberg group H^n.
struct HeisPoint {
  Vec x;
  double t = 0.0;

  HeisPoint() = default;
  HeisPoint(Vec horizontal, double vertical) : x(std::move(horizontal)), t(vertical) {
    if (x.empty() || x.size() % 2 != 0) {
      throw std::invalid_argument("HeisPoint: horizontal part must have even positive length");
    }
    for (double v : x) {
      if (!std::isfinite(v)) throw std::invalid_argument("HeisPoint: non-finite coordinate");
    }
    if (!std::isfinite(t)) throw std::invalid_argument("HeisPoint: non-finite coordinate");
  }

  static HeisPoint identity(int n) { return HeisPoint(Vec(2 * static_cast<std::size_t>(n), 0.0), 0.0); }

  int n() const { return static_cast<int>(x.size() / 2); }

  // Flat coordinates (x_1, ..., x_2n, t).
  Vec flat() const {
    Vec out = x;
    out.push_back(t);
    return out;
  }
  static HeisPoint from_flat(std::span<const double> c) {
    if (c.size() < 3) throw std::invalid_argument("HeisPoint: need at least 3 coordinates");
    return HeisPoint(Vec(c.begin(), c.end() - 1), c.back());
  }
};

// Symplectic pairing sum_{i<=n} (a_i b_{n+i} - b_i a_{n+i}).
inline double symplectic(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size() / 2;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[n + i] - b[i] * a[n + i];
  return s;
}

inline void require_same_dim(const HeisPoint& p, const HeisPoint& q) {
  if (p.x.size() != q.x.size()) throw std::invalid_argument("HeisPoint: dimension mismatch");
}

inline HeisPoint product(const HeisPoint& p, const HeisPoint& q) {
  require_same_dim(p, q);
  HeisPoint r;
  r.x.resize(p.x.size());
  for (std::size_t i = 0; i < p.x.size(); ++i) r.x[i] = p.x[i] + q.x[i];
  r.t = p.t + q.t + 0.5 * symplectic(p.x, q.x);
  return r;
}

inline HeisPoint inverse(const HeisPoint& p) {
  HeisPoint r;
  r.x.resize(p.x.size());
  for (std::size_t i = 0; i < p.x.size(); ++i) r.x[i] = -p.x[i];
  r.t = -p.t;
  return r;
}

// Homogeneous norm max{|x|, sqrt|t|}.
inline double norm(const HeisPoint& p) { return std::max(euclid(p.x), std::sqrt(std::abs(p.t))); }

// Left-invariant distance d(p, q) = ||q^{-1} p||.
inline double distance(const HeisPoint& p, const HeisPoint& q) {
  require_same_dim(p, q);
  return norm(product(inverse(q), p));
}

inline HeisPoint dilation(const HeisPoint& p, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("dilation: factor must be positive");
  HeisPoint out;
  out.x.resize(p.x.size());
  for (std::size_t i = 0; i < p.x.size(); ++i) out.x[i] = r * p.x[i];
  out.t = r * r * p.t;
  return out;
}

// Splitting H^n = V * W with V = span(e_1..e_k) horizontal and W the
// complementary normal subgroup.
struct SubgroupSplit {
  int n = 1;
  int k = 1;

  SubgroupSplit() = default;
  SubgroupSplit(int n_, int k_) : n(n_), k(k_) {
    if (n < 1 || k < 1 || k > n) {
      throw std::invalid_argument("SubgroupSplit: need 1 <= k <= n, got n=" + std::to_string(n) +
                                  " k=" + std::to_string(k));
    }
  }

  // Length of the value vector (phi_{k+1}, ..., phi_{2n+1}).
  int value_dim() const { return 2 * n + 1 - k; }

  // Offset of phi_j inside the value vector.
  std::size_t idx(int j) const { return static_cast<std::size_t>(j - k - 1); }

  bool operator==(const SubgroupSplit&) const = default;
};

inline HeisPoint project_V(const HeisPoint& p, const SubgroupSplit& s) {
  if (p.n() != s.n) throw std::invalid_argument("project_V: dimension mismatch");
  HeisPoint r = HeisPoint::identity(s.n);
  for (int i = 0; i < s.k; ++i) r.x[i] = p.x[i];
  return r;
}

inline HeisPoint project_W(const HeisPoint& p, const SubgroupSplit& s) {
  if (p.n() != s.n) throw std::invalid_argument("project_W: dimension mismatch");
  HeisPoint r = p;
  double corr = 0.0;
  for (int i = 0; i < s.k; ++i) {
    corr += p.x[i] * p.x[s.n + i];
    r.x[i] = 0.0;
  }
  r.t = p.t - 0.5 * corr;
  return r;
}

// Graph map Phi(v) = v * (0, phi(v)) written in coordinates.
inline HeisPoint graph_map(std::span<const double> v, std::span<const double> value,
                           const SubgroupSplit& s) {
  if (static_cast<int>(v.size()) != s.k || static_cast<int>(value.size()) != s.value_dim()) {
    throw std::invalid_argument("graph_map: argument sizes do not match the split");
  }
  HeisPoint r = HeisPoint::identity(s.n);
  for (int i = 0; i < s.k; ++i) r.x[i] = v[i];
  for (int j = s.k + 1; j <= 2 * s.n; ++j) r.x[j - 1] = value[s.idx(j)];
  double corr = 0.0;
  for (int i = 1; i <= s.k; ++i) corr += v[i - 1] * value[s.idx(s.n + i)];
  r.t = value.back() + 0.5 * corr;
  return r;
}

// Horizontal gaps and vertical term of pi_W(Phi(v)^{-1} Phi(w)).
struct ResidualPair {
  Vec horizontal_gap;  // phi_i(w) - phi_i(v), i = k+1..2n
  double h_value = 0.0;

  double vertical_homog() const { return std::sqrt(std::abs(h_value)); }
  double norm() const { return std::max(euclid(horizontal_gap), vertical_homog()); }
};

// H(v, w) = phi_{2n+1}(w) - phi_{2n+1}(v) + <psi(v), w - v>
//           + 1/2 sum_{i=k+1..n} (phi_i(w) phi_{n+i}(v) - phi_i(v) phi_{n+i}(w)),
// psi = (phi_{n+1}, ..., phi_{n+k}).
inline double h_function(std::span<const double> v, std::span<const double> fv,
                         std::span<const double> w, std::span<const double> fw,
                         const SubgroupSplit& s) {
  const int n = s.n, k = s.k;
  double lin = 0.0;
  for (int i = 1; i <= k; ++i) lin += fv[s.idx(n + i)] * (w[i - 1] - v[i - 1]);
  double bil = 0.0;
  for (int i = k + 1; i <= n; ++i) {
    bil += fw[s.idx(i)] * fv[s.idx(n + i)] - fv[s.idx(i)] * fw[s.idx(n + i)];
  }
  return (fw.back() - fv.back()) + lin + 0.5 * bil;
}

inline ResidualPair ilg_residual(std::span<const double> v, std::span<const double> fv,
                                 std::span<const double> w, std::span<const double> fw,
                                 const SubgroupSplit& s) {
  if (static_cast<int>(v.size()) != s.k || static_cast<int>(w.size()) != s.k ||
      static_cast<int>(fv.size()) != s.value_dim() || static_cast<int>(fw.size()) != s.value_dim()) {
    throw std::invalid_argument("ilg_residual: argument sizes do not match the split");
  }
  ResidualPair r;
  r.horizontal_gap.resize(static_cast<std::size_t>(2 * s.n - s.k));
  for (int j = s.k + 1; j <= 2 * s.n; ++j) r.horizontal_gap[s.idx(j)] = fw[s.idx(j)] - fv[s.idx(j)];
  r.h_value = h_function(v, fv, w, fw, s);
  return r;
}

// Finite sample {v_i -> phi(v_i)} of a map V -> W.
class SampledMap {
 public:
  SampledMap() = default;
  SampledMap(SubgroupSplit split, std::vector<Vec> domain, std::vector<Vec> values,
             double duplicate_tol = 1e-12)
      : split_(split), domain_(std::move(domain)), values_(std::move(values)) {
    if (domain_.size() != values_.size()) {
      throw std::invalid_argument("SampledMap: domain and values differ in length");
    }
    for (std::size_t i = 0; i < domain_.size(); ++i) {
      if (static_cast<int>(domain_[i].size()) != split_.k ||
          static_cast<int>(values_[i].size()) != split_.value_dim()) {
        throw std::invalid_argument("SampledMap: point " + std::to_string(i) +
                                    " has the wrong dimension");
      }
      for (double c : domain_[i]) {
        if (!std::isfinite(c)) throw std::invalid_argument("SampledMap: non-finite domain point");
      }
      for (double c : values_[i]) {
        if (!std::isfinite(c)) throw std::invalid_argument("SampledMap: non-finite value");
      }
    }
    for (std::size_t i = 0; i < domain_.size(); ++i) {
      for (std::size_t j = i + 1; j < domain_.size(); ++j) {
        if (sup_dist(domain_[i], domain_[j]) <= duplicate_tol) {
          throw std::invalid_argument("SampledMap: duplicate domain points " + std::to_string(i) +
                                      " and " + std::to_string(j));
        }
      }
    }
  }

  const SubgroupSplit& split() const { return split_; }
  const std::vector<Vec>& domain() const { return domain_; }
  const std::vector<Vec>& values() const { return values_; }
  std::size_t size() const { return domain_.size(); }

 private:
  SubgroupSplit split_;
  std::vector<Vec> domain_;
  std::vector<Vec> values_;
};

// Least constant with ||pi_W(Phi(v)^{-1} Phi(w))|| <= L |v - w| over ordered
// sample pairs, with the first maximizing pair in lexicographic order.
struct LipschitzAudit {
  double constant = 0.0;
  std::size_t from = 0;
  std::size_t to = 0;
};

inline LipschitzAudit intrinsic_lip_audit(const SampledMap& map) {
  if (map.size() < 2) throw std::invalid_argument("intrinsic_lip_constant: need at least 2 points");
  const auto& d = map.domain();
  const auto& f = map.values();
  LipschitzAudit best;
  best.constant = -1.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (i == j) continue;
      const double ratio = ilg_residual(d[i], f[i], d[j], f[j], map.split()).norm() /
                           euclid_dist(d[i], d[j]);
      if (ratio > best.constant) best = {ratio, i, j};
    }
  }
  return best;
}

inline double intrinsic_lip_constant(const SampledMap& map) { return intrinsic_lip_audit(map).constant; }

}  // namespace heisilg
