#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "heisilg/heisenberg.hpp"
#include "heisilg/tame.hpp"

namespace heisilg {

// Continuous vector-valued piecewise-linear function, constant outside the
// first and last breakpoint.
class PiecewiseLinear {
 public:
  PiecewiseLinear() = default;
  PiecewiseLinear(std::vector<double> breaks, std::vector<Vec> values)
      : breaks_(std::move(breaks)), values_(std::move(values)) {
    if (breaks_.empty() || breaks_.size() != values_.size()) {
      throw std::invalid_argument("PiecewiseLinear: breaks and values must be non-empty and aligned");
    }
    for (std::size_t i = 1; i < breaks_.size(); ++i) {
      if (!(breaks_[i] > breaks_[i - 1])) throw std::invalid_argument("PiecewiseLinear: breaks must increase");
      if (values_[i].size() != values_[0].size()) throw std::invalid_argument("PiecewiseLinear: ragged values");
    }
  }

  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<Vec>& values() const { return values_; }
  std::size_t dim() const { return values_.front().size(); }

  Vec operator()(double s) const {
    if (s <= breaks_.front()) return values_.front();
    if (s >= breaks_.back()) return values_.back();
    const std::size_t i = piece(s);
    const double u = (s - breaks_[i]) / (breaks_[i + 1] - breaks_[i]);
    if (u == 0.0) return values_[i];
    Vec out(dim());
    for (std::size_t c = 0; c < out.size(); ++c) {
      out[c] = values_[i][c] + u * (values_[i + 1][c] - values_[i][c]);
    }
    return out;
  }

  // Slope of the piece containing s, taken from the right at breakpoints.
  Vec derivative(double s) const {
    if (s < breaks_.front() || s >= breaks_.back() || breaks_.size() < 2) return Vec(dim(), 0.0);
    const std::size_t i = piece(s);
    const double h = breaks_[i + 1] - breaks_[i];
    Vec out(dim());
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = (values_[i + 1][c] - values_[i][c]) / h;
    return out;
  }

  // Largest slope norm over all pieces.
  double lipschitz() const {
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < breaks_.size(); ++i) {
      best = std::max(best, euclid_dist(values_[i + 1], values_[i]) / (breaks_[i + 1] - breaks_[i]));
    }
    return best;
  }

  std::vector<double> breaks_in(double a, double b) const {
    std::vector<double> out;
    for (auto it = std::upper_bound(breaks_.begin(), breaks_.end(), a); it != breaks_.end() && *it < b; ++it) {
      out.push_back(*it);
    }
    return out;
  }

 private:
  std::size_t piece(double s) const {
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), s);
    return static_cast<std::size_t>(it - breaks_.begin()) - 1;
  }

  std::vector<double> breaks_;
  std::vector<Vec> values_;
};

// Map phi: R -> W for the split k = 1, evaluable anywhere. Values are
// (phi_2, ..., phi_{2n+1}); derivatives cover the horizontal part.
class IntrinsicCurve {
 public:
  virtual ~IntrinsicCurve() = default;
  virtual int n() const = 0;
  virtual Vec value(double s) const = 0;
  virtual Vec horizontal_derivative(double s) const = 0;
  // Points in (a, b) where the horizontal part may fail to be affine.
  virtual std::vector<double> breakpoints(double a, double b) const = 0;

  Vec horizontal(double s) const {
    Vec v = value(s);
    v.pop_back();
    return v;
  }
};

// Integrand of the horizontality equation for k = 1,
//   -phi_{n+1} + 1/2 sum_{i=2..n} (phi_i phi_{n+i}' - phi_i' phi_{n+i}),
// on horizontal vectors indexed from phi_2.
inline double vertical_rate(int n, std::span<const double> h, std::span<const double> dh) {
  double r = -h[n - 1];
  for (int i = 2; i <= n; ++i) r += 0.5 * (h[i - 2] * dh[n + i - 2] - dh[i - 2] * h[n + i - 2]);
  return r;
}

// Two-point Gauss-Legendre rule over [a, b] split at the given sorted cuts
// and into `panels` equal parts; exact for piecewise cubics with those cuts.
inline double integrate_pieces(double a, double b, const std::vector<double>& cuts, int panels,
                               const std::function<double(double)>& f) {
  if (!(b > a)) return 0.0;
  std::vector<double> pts;
  for (int p = 0; p <= panels; ++p) pts.push_back(a + (b - a) * p / panels);
  pts.back() = b;
  for (double c : cuts) {
    if (c > a && c < b) pts.push_back(c);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const double g = 0.5 / std::sqrt(3.0);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double u = pts[i], v = pts[i + 1], c = 0.5 * (u + v), h = v - u;
    total += 0.5 * h * (f(c - g * h) + f(c + g * h));
  }
  return total;
}

// Curve from samples at increasing nodes: horizontal part interpolated
// linearly, last component following the horizontality equation inside each
// cell plus the linear term that makes it hit the sampled values exactly.
// Outside the nodes the horizontal part is constant and the last component
// keeps solving the equation.
class GridCurve : public IntrinsicCurve {
 public:
  GridCurve(int n, std::vector<double> nodes, std::vector<Vec> values)
      : n_(n), nodes_(std::move(nodes)), values_(std::move(values)) {
    if (n_ < 1) throw std::invalid_argument("GridCurve: n must be >= 1");
    if (nodes_.size() < 2 || nodes_.size() != values_.size()) {
      throw std::invalid_argument("GridCurve: need at least 2 aligned nodes and values");
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (static_cast<int>(values_[i].size()) != 2 * n_) throw std::invalid_argument("GridCurve: value size must be 2n");
      if (i > 0 && !(nodes_[i] > nodes_[i - 1])) throw std::invalid_argument("GridCurve: nodes must increase");
    }
    correction_.resize(nodes_.size() - 1);
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
      const double h = nodes_[i + 1] - nodes_[i];
      correction_[i] = (values_[i + 1].back() - values_[i].back() - cell_integral(i, nodes_[i + 1])) / h;
    }
  }

  static GridCurve from_grid(const GridFunction& g) {
    if (g.split().k != 1) throw std::invalid_argument("GridCurve: grid must have k = 1");
    std::vector<double> nodes(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) nodes[i] = g.node(i)[0];
    return GridCurve(g.split().n, std::move(nodes), g.values());
  }

  static GridCurve from_sampled(const SampledMap& m) {
    if (m.split().k != 1) throw std::invalid_argument("GridCurve: map must have k = 1");
    std::vector<std::size_t> order(m.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return m.domain()[a][0] < m.domain()[b][0]; });
    std::vector<double> nodes;
    std::vector<Vec> vals;
    for (auto i : order) {
      nodes.push_back(m.domain()[i][0]);
      vals.push_back(m.values()[i]);
    }
    return GridCurve(m.split().n, std::move(nodes), std::move(vals));
  }

  int n() const override { return n_; }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<Vec>& node_values() const { return values_; }

  // Largest |sampled increment - equation increment| over cells.
  double equation_mismatch() const {
    double m = 0.0;
    for (std::size_t i = 0; i < correction_.size(); ++i) {
      m = std::max(m, std::abs(correction_[i]) * (nodes_[i + 1] - nodes_[i]));
    }
    return m;
  }

  Vec value(double s) const override {
    const std::size_t dim = values_.front().size();
    if (s <= nodes_.front() || s >= nodes_.back()) {
      const bool left = s <= nodes_.front();
      const Vec& end = left ? values_.front() : values_.back();
      Vec out = end;
      const double ds = s - (left ? nodes_.front() : nodes_.back());
      out[dim - 1] = end[dim - 1] - end[n_ - 1] * ds;
      return out;
    }
    const std::size_t i = cell(s);
    const double u = (s - nodes_[i]) / (nodes_[i + 1] - nodes_[i]);
    Vec out(dim);
    for (std::size_t c = 0; c + 1 < dim; ++c) out[c] = values_[i][c] + u * (values_[i + 1][c] - values_[i][c]);
    out[dim - 1] = values_[i].back() + cell_integral(i, s) + correction_[i] * (s - nodes_[i]);
    return out;
  }

  Vec horizontal_derivative(double s) const override {
    const std::size_t dim = values_.front().size() - 1;
    if (s < nodes_.front() || s >= nodes_.back()) return Vec(dim, 0.0);
    return slope(cell(s));
  }

  std::vector<double> breakpoints(double a, double b) const override {
    std::vector<double> out;
    for (auto it = std::upper_bound(nodes_.begin(), nodes_.end(), a); it != nodes_.end() && *it < b; ++it) {
      out.push_back(*it);
    }
    return out;
  }

 private:
  std::size_t cell(double s) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), s);
    return static_cast<std::size_t>(it - nodes_.begin()) - 1;
  }

  Vec slope(std::size_t i) const {
    const std::size_t dim = values_.front().size() - 1;
    const double h = nodes_[i + 1] - nodes_[i];
    Vec d(dim);
    for (std::size_t c = 0; c < dim; ++c) d[c] = (values_[i + 1][c] - values_[i][c]) / h;
    return d;
  }

  // Integral of the horizontality equation from nodes_[i] to s within cell i.
  double cell_integral(std::size_t i, double s) const {
    const Vec d = slope(i);
    const Vec& h = values_[i];
    const double r = s - nodes_[i];
    double bil = 0.0;
    for (int k = 2; k <= n_; ++k) bil += h[k - 2] * d[n_ + k - 2] - d[k - 2] * h[n_ + k - 2];
    return -(h[n_ - 1] * r + 0.5 * d[n_ - 1] * r * r) + 0.5 * bil * r;
  }

  int n_;
  std::vector<double> nodes_;
  std::vector<Vec> values_;
  std::vector<double> correction_;
};

// Samples of a curve at the given points as a k = 1 map.
inline SampledMap sample_curve(const IntrinsicCurve& c, const std::vector<double>& pts) {
  std::vector<Vec> dom, vals;
  for (double s : pts) {
    dom.push_back({s});
    vals.push_back(c.value(s));
  }
  return SampledMap(SubgroupSplit(c.n(), 1), std::move(dom), std::move(vals));
}

}  // namespace heisilg
