#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "heisilg/curve.hpp"
#include "heisilg/dyadic.hpp"
#include "heisilg/heisenberg.hpp"
#include "heisilg/tolerance.hpp"

namespace heisilg {

using VecFunction = std::function<Vec(double)>;

// Least-squares affine fit of samples of psi on 2Q.
struct AffineFit {
  Vec slope;
  Vec intercept;   // value at the sample mean
  double center = 0.0;
  double deviation = 0.0;  // max sample distance to the fit
};

inline AffineFit fit_on_double(const VecFunction& psi, const DyadicInterval& q) {
  const auto s = q.samples2();
  std::vector<Vec> y;
  y.reserve(s.size());
  for (double t : s) y.push_back(psi(t));
  const std::size_t m = y.front().size();
  double sbar = 0.0;
  for (double t : s) sbar += t;
  sbar /= static_cast<double>(s.size());
  AffineFit f{Vec(m, 0.0), Vec(m, 0.0), sbar, 0.0};
  double sxx = 0.0;
  for (double t : s) sxx += (t - sbar) * (t - sbar);
  for (std::size_t c = 0; c < m; ++c) {
    double ybar = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) ybar += y[i][c];
    ybar /= static_cast<double>(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) sxy += (s[i] - sbar) * (y[i][c] - ybar);
    f.slope[c] = sxy / sxx;
    f.intercept[c] = ybar;
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    double e = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      const double r = y[i][c] - (f.intercept[c] + f.slope[c] * (s[i] - sbar));
      e += r * r;
    }
    f.deviation = std::max(f.deviation, std::sqrt(e));
  }
  return f;
}

// Linear part L_T(x) = a_T x and Lipschitz part psi_T of one tree.
struct TreeFit {
  Vec slope;
  PiecewiseLinear psi_T;
};

struct EuclideanCorona {
  Coronization corona;
  std::vector<TreeFit> fits;
  bool slope_clamped = false;
};

// Stopping-time corona of psi: R -> R^m over the truncated grid. Intervals
// are visited top-down. A candidate top whose fit deviation on 2Q exceeds
// tau |Q| is bad and its children become candidates. Otherwise it starts a
// tree; a member keeps both children when each child has deviation at most
// tau |C| and fit slope within tau of the top's, and stops otherwise, its
// children becoming candidates. With tau = delta / 5 every member satisfies
// |psi - L_T - psi_T| <= delta |Q| at the 17 samples of 2Q.
inline EuclideanCorona euclidean_corona(const VecFunction& psi, DyadicInterval root, int depth, double delta) {
  if (depth < 0) throw std::invalid_argument("euclidean_corona: depth must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("euclidean_corona: delta must lie in (0, 1)");
  const DyadicGrid grid{root, depth};
  const double tau = delta / 5.0;
  std::map<DyadicInterval, AffineFit> fit;
  for (const auto& q : grid.all()) fit.emplace(q, fit_on_double(psi, q));

  EuclideanCorona out;
  out.corona.grid = grid;
  std::vector<DyadicInterval> candidates{root};
  while (!candidates.empty()) {
    const DyadicInterval q = candidates.back();
    candidates.pop_back();
    const AffineFit& fq = fit.at(q);
    if (fq.deviation > tau * q.length()) {
      out.corona.bad.push_back(q);
      if (!grid.at_bottom(q)) {
        candidates.push_back(q.right());
        candidates.push_back(q.left());
      }
      continue;
    }
    std::set<DyadicInterval> members{q};
    std::vector<DyadicInterval> grow{q};
    while (!grow.empty()) {
      const DyadicInterval p = grow.back();
      grow.pop_back();
      if (grid.at_bottom(p)) continue;
      auto ok = [&](const DyadicInterval& c) {
        const AffineFit& fc = fit.at(c);
        return fc.deviation <= tau * c.length() && euclid_dist(fc.slope, fq.slope) <= tau;
      };
      if (ok(p.left()) && ok(p.right())) {
        members.insert(p.left());
        members.insert(p.right());
        grow.push_back(p.right());
        grow.push_back(p.left());
      } else {
        candidates.push_back(p.right());
        candidates.push_back(p.left());
      }
    }
    Tree tree(q, std::move(members));
    Vec a = fq.slope;
    const double an = euclid(a);
    if (an > 2.0) {
      for (auto& c : a) c *= 2.0 / an;
      out.slope_clamped = true;
    }
    std::vector<double> br;
    std::vector<Vec> vals;
    for (const auto& s : tree.minimal()) br.push_back(s.lo());
    br.push_back(q.hi());
    for (double p : br) {
      Vec v = psi(p);
      for (std::size_t c = 0; c < v.size(); ++c) v[c] -= a[c] * p;
      vals.push_back(std::move(v));
    }
    out.fits.push_back({a, PiecewiseLinear(std::move(br), std::move(vals))});
    out.corona.trees.push_back(std::move(tree));
  }
  std::sort(out.corona.bad.begin(), out.corona.bad.end());
  out.corona.packing_constant = measure_packing(out.corona);
  return out;
}

// Worst value of |psi - L_T - psi_T| / (delta |Q|) over the 17 samples of 2Q
// for all members Q.
struct ApproxAudit {
  double worst_ratio = 0.0;
  DyadicInterval interval;
  double sample = 0.0;
};

inline ApproxAudit audit_euclidean(const VecFunction& psi, const Tree& tree, const Vec& slope,
                                   const PiecewiseLinear& psi_T, double delta) {
  ApproxAudit out;
  out.worst_ratio = -1.0;
  for (const auto& q : tree.members()) {
    for (double s : q.samples2()) {
      const Vec v = psi(s), w = psi_T(s);
      double e = 0.0;
      for (std::size_t c = 0; c < v.size(); ++c) {
        const double r = v[c] - slope[c] * s - w[c];
        e += r * r;
      }
      const double ratio = std::sqrt(e) / (delta * q.length());
      if (ratio > out.worst_ratio) out = {ratio, q, s};
    }
  }
  return out;
}

struct MatchedTree {
  PiecewiseLinear psi_T;                 // matched on the boundary of minimal intervals
  std::vector<DyadicInterval> minimal;   // left to right
  std::vector<Vec> c;                    // slope correction per minimal interval
  double pre_ratio = 0.0;                // approximation at delta / (8 sqrt(2n-1)), input
  double endpoint_error = 0.0;
  double max_c = 0.0;
  double lipschitz = 0.0;
};

// Adds to psi_T on each minimal S = [a, b] the affine term that makes
// psi_T + L_T agree with psi at a and b.
inline MatchedTree boundary_match(const VecFunction& psi, const Tree& tree, const TreeFit& fit, double delta) {
  const std::size_t m = fit.psi_T.dim();
  const double tight = delta / (8.0 * std::sqrt(static_cast<double>(m)));
  MatchedTree out;
  out.pre_ratio = audit_euclidean(psi, tree, fit.slope, fit.psi_T, tight).worst_ratio;
  out.minimal = tree.minimal();
  auto gap = [&](double s) {
    Vec g = psi(s);
    const Vec p = fit.psi_T(s);
    for (std::size_t c = 0; c < m; ++c) g[c] -= fit.slope[c] * s + p[c];
    return g;
  };
  std::vector<double> br;
  std::vector<Vec> vals;
  for (const auto& S : out.minimal) {
    const double a = S.lo(), b = S.hi();
    const Vec ga = gap(a), gb = gap(b);
    Vec c(m);
    for (std::size_t i = 0; i < m; ++i) c[i] = (gb[i] - ga[i]) / (b - a);
    out.max_c = std::max(out.max_c, euclid(c));
    auto matched = [&](double s) {
      Vec v = fit.psi_T(s);
      for (std::size_t i = 0; i < m; ++i) v[i] += ga[i] + c[i] * (s - a);
      return v;
    };
    br.push_back(a);
    Vec va = psi(a);
    for (std::size_t i = 0; i < m; ++i) va[i] -= fit.slope[i] * a;
    vals.push_back(std::move(va));
    for (double p : fit.psi_T.breaks_in(a, b)) {
      br.push_back(p);
      vals.push_back(matched(p));
    }
    out.c.push_back(std::move(c));
  }
  const double y = out.minimal.back().hi();
  br.push_back(y);
  Vec vy = psi(y);
  for (std::size_t i = 0; i < m; ++i) vy[i] -= fit.slope[i] * y;
  vals.push_back(std::move(vy));
  out.psi_T = PiecewiseLinear(std::move(br), std::move(vals));
  for (const auto& S : out.minimal) {
    for (double p : {S.lo(), S.hi()}) {
      const Vec v = psi(p), w = out.psi_T(p);
      for (std::size_t i = 0; i < m; ++i) {
        out.endpoint_error = std::max(out.endpoint_error, std::abs(v[i] - fit.slope[i] * p - w[i]));
      }
    }
  }
  out.lipschitz = out.psi_T.lipschitz();
  return out;
}

// Approximating map phi_T of a tree: horizontal part psi_T + L_T plus a tent
// on the middle half of every minimal interval in component n+1, last
// component solving the horizontality equation from phi_{2n+1}(x), x the
// left end of Q(T).
class TreeLift : public IntrinsicCurve {
 public:
  struct Correction {
    DyadicInterval S;
    double c = 0.0;
  };

  TreeLift(int n, Vec slope, PiecewiseLinear psi_T, std::vector<Correction> corrections,
           double anchor_s, double anchor_value, double t_start, double t_step, std::size_t t_cells)
      : n_(n), slope_(std::move(slope)), psi_T_(std::move(psi_T)), corrections_(std::move(corrections)),
        t_start_(t_start), t_step_(t_step) {
    for (const auto& k : corrections_) {
      cuts_.push_back(k.S.lo_half());
      cuts_.push_back(k.S.mid());
      cuts_.push_back(k.S.hi_half());
    }
    for (double b : psi_T_.breaks()) cuts_.push_back(b);
    std::sort(cuts_.begin(), cuts_.end());
    table_.assign(t_cells + 1, 0.0);
    const auto anchor = static_cast<std::size_t>(std::llround((anchor_s - t_start_) / t_step_));
    table_[anchor] = anchor_value;
    for (std::size_t i = anchor; i < t_cells; ++i) table_[i + 1] = table_[i] + rate_integral(node(i), node(i + 1));
    for (std::size_t i = anchor; i-- > 0;) table_[i] = table_[i + 1] - rate_integral(node(i), node(i + 1));
  }

  int n() const override { return n_; }
  const Vec& slope() const { return slope_; }
  const PiecewiseLinear& psi_T() const { return psi_T_; }
  const std::vector<Correction>& corrections() const { return corrections_; }
  const std::vector<double>& t_table() const { return table_; }
  double t_start() const { return t_start_; }
  double t_step() const { return t_step_; }

  double tent(double s) const {
    const Correction* k = find(s);
    if (k == nullptr) return 0.0;
    const double s1 = k->S.lo_half(), s2 = k->S.hi_half(), mid = k->S.mid();
    if (s <= s1 || s >= s2) return 0.0;
    return s < mid ? 4.0 * k->c * (s - s1) : 4.0 * k->c * (s2 - s);
  }

  double tent_slope(double s) const {
    const Correction* k = find(s);
    if (k == nullptr) return 0.0;
    const double s1 = k->S.lo_half(), s2 = k->S.hi_half(), mid = k->S.mid();
    if (s < s1 || s >= s2) return 0.0;
    return s < mid ? 4.0 * k->c : -4.0 * k->c;
  }

  Vec horizontal_only(double s) const {
    Vec h = psi_T_(s);
    for (std::size_t c = 0; c < h.size(); ++c) h[c] += slope_[c] * s;
    h[n_ - 1] += tent(s);
    return h;
  }

  Vec value(double s) const override {
    Vec v = horizontal_only(s);
    const double lo = t_start_;
    std::size_t i = 0;
    if (s > lo) {
      i = std::min<std::size_t>(static_cast<std::size_t>((s - lo) / t_step_), table_.size() - 1);
    }
    v.push_back(table_[i] + rate_integral(node(i), s));
    return v;
  }

  Vec horizontal_derivative(double s) const override {
    Vec d = psi_T_.derivative(s);
    for (std::size_t c = 0; c < d.size(); ++c) d[c] += slope_[c];
    d[n_ - 1] += tent_slope(s);
    return d;
  }

  std::vector<double> breakpoints(double a, double b) const override {
    std::vector<double> out;
    for (double c : cuts_) {
      if (c > a && c < b) out.push_back(c);
    }
    return out;
  }

 private:
  double node(std::size_t i) const { return t_start_ + t_step_ * static_cast<double>(i); }

  const Correction* find(double s) const {
    auto it = std::upper_bound(corrections_.begin(), corrections_.end(), s,
                               [](double v, const Correction& k) { return v < k.S.lo(); });
    if (it == corrections_.begin()) return nullptr;
    --it;
    return s < it->S.hi() ? &*it : nullptr;
  }

  // Signed integral of the horizontality rate of phi_T from a to b.
  double rate_integral(double a, double b) const {
    if (a == b) return 0.0;
    const double sign = a < b ? 1.0 : -1.0;
    const double lo = std::min(a, b), hi = std::max(a, b);
    auto f = [&](double r) { return vertical_rate(n_, horizontal_only(r), horizontal_derivative(r)); };
    return sign * integrate_pieces(lo, hi, breakpoints(lo, hi), 1, f);
  }

  int n_;
  Vec slope_;
  PiecewiseLinear psi_T_;
  std::vector<Correction> corrections_;
  std::vector<double> cuts_;
  double t_start_;
  double t_step_;
  std::vector<double> table_;
};

// Tent heights c on each minimal interval S so that phi_T reproduces the
// increment of phi_{2n+1} across S:
//   -c = 4 / |S|^2 int_S [-phi_{n+1} + psi_{T,n+1} + L_{T,n+1}
//        + 1/2 sum_{i=2..n} (phi_i phi_{n+i}' - phi_i' phi_{n+i}
//                            - phi_{T,i} phi_{T,n+i}' + phi_{T,i}' phi_{T,n+i})].
// The table for phi_{T,2n+1} spans 2 Q(T) with step 2^-(J+4) |root|.
inline TreeLift lift_tree(const IntrinsicCurve& phi, const Tree& tree, const Vec& slope,
                          const MatchedTree& matched, const DyadicGrid& grid) {
  const int n = phi.n();
  if (n < 2) throw std::invalid_argument("lift_tree: needs n > 1");
  const PiecewiseLinear& psiT = matched.psi_T;
  auto base = [&](double s) {
    Vec h = psiT(s);
    for (std::size_t c = 0; c < h.size(); ++c) h[c] += slope[c] * s;
    return h;
  };
  auto base_d = [&](double s) {
    Vec d = psiT.derivative(s);
    for (std::size_t c = 0; c < d.size(); ++c) d[c] += slope[c];
    return d;
  };
  std::vector<TreeLift::Correction> corr;
  for (const auto& S : matched.minimal) {
    const double a = S.lo(), b = S.hi();
    std::vector<double> cuts = phi.breakpoints(a, b);
    for (double p : psiT.breaks_in(a, b)) cuts.push_back(p);
    std::sort(cuts.begin(), cuts.end());
    auto g = [&](double r) {
      const Vec h = phi.horizontal(r), dh = phi.horizontal_derivative(r);
      const Vec hT = base(r), dhT = base_d(r);
      return vertical_rate(n, h, dh) - vertical_rate(n, hT, dhT);
    };
    const double integral = integrate_pieces(a, b, cuts, 64, g);
    corr.push_back({S, -4.0 * integral / (S.length() * S.length())});
  }
  const DyadicInterval top = tree.top();
  const double step = std::ldexp(grid.root.length(), -(grid.depth + 4));
  const double start = top.lo2();
  const auto cells = static_cast<std::size_t>(std::llround((top.hi2() - top.lo2()) / step));
  return TreeLift(n, slope, psiT, std::move(corr), top.lo(), phi.value(top.lo()).back(), start, step, cells);
}

// d(phi(s), phi_T(s)) = max{|horizontal gap|, sqrt|A|} with
// A = phi_{2n+1} - phi_{T,2n+1} + 1/2 sum_{i=2..n} (phi_i phi_{T,n+i} - phi_{T,i} phi_{n+i}).
struct PointGap {
  double horizontal = 0.0;
  double vertical = 0.0;  // A
  double distance() const { return std::max(horizontal, std::sqrt(std::abs(vertical))); }
};

inline PointGap intrinsic_gap(int n, const Vec& phi, const Vec& phiT) {
  PointGap g;
  double e = 0.0;
  for (std::size_t c = 0; c + 1 < phi.size(); ++c) e += (phi[c] - phiT[c]) * (phi[c] - phiT[c]);
  g.horizontal = std::sqrt(e);
  double bil = 0.0;
  for (int i = 2; i <= n; ++i) bil += phi[i - 2] * phiT[n + i - 2] - phiT[i - 2] * phi[n + i - 2];
  g.vertical = phi.back() - phiT.back() + 0.5 * bil;
  return g;
}

struct SampleRatio {
  DyadicInterval interval;
  double sample = 0.0;
  double ratio = 0.0;  // d / (eta |Q|)
};

struct IntrinsicAudit {
  std::vector<SampleRatio> samples;
  double worst_ratio = 0.0;      // d / (eta |Q|)
  double worst_quadratic = 0.0;  // |A| / (eta^2 |Q|^2)
  DyadicInterval interval;
  double sample = 0.0;
  double max_c_ratio = 0.0;      // |c| / (24 n delta)
  double max_tent_lip_ratio = 0.0;  // 4|c| / (96 n delta)
  double max_tent_sup_ratio = 0.0;  // |c| |S| / (24 n delta |S|)
  double matching_error = 0.0;   // max |phi_T,2n+1 - phi_2n+1| / |Q(T)|^2 on minimal endpoints
  DyadicInterval matching_witness;
  double matching_point = 0.0;

  bool pass() const {
    const double s = 1.0 + tol(1e-6);
    return worst_ratio <= s && worst_quadratic <= s && max_c_ratio <= s && max_tent_lip_ratio <= s &&
           max_tent_sup_ratio <= s && matching_error <= tol(1e-6);
  }
};

inline IntrinsicAudit verify_intrinsic_approx(const IntrinsicCurve& phi, const TreeLift& lift, const Tree& tree,
                                              double eta) {
  const int n = phi.n();
  const double delta = eta * eta / (100.0 * n);
  IntrinsicAudit out;
  out.worst_ratio = -1.0;
  for (const auto& q : tree.members()) {
    for (double s : q.samples2()) {
      const PointGap g = intrinsic_gap(n, phi.value(s), lift.value(s));
      const double ratio = g.distance() / (eta * q.length());
      out.samples.push_back({q, s, ratio});
      if (ratio > out.worst_ratio) {
        out.worst_ratio = ratio;
        out.interval = q;
        out.sample = s;
      }
      out.worst_quadratic =
          std::max(out.worst_quadratic, std::abs(g.vertical) / (eta * eta * q.length() * q.length()));
    }
  }
  for (const auto& k : lift.corrections()) {
    out.max_c_ratio = std::max(out.max_c_ratio, std::abs(k.c) / (24.0 * n * delta));
    out.max_tent_lip_ratio = std::max(out.max_tent_lip_ratio, 4.0 * std::abs(k.c) / (96.0 * n * delta));
    const double sup = std::abs(lift.tent(k.S.mid()));
    out.max_tent_sup_ratio = std::max(out.max_tent_sup_ratio, sup / (24.0 * n * delta * k.S.length()));
    const double top2 = tree.top().length() * tree.top().length();
    for (double p : {k.S.lo(), k.S.hi()}) {
      const double e = std::abs(lift.value(p).back() - phi.value(p).back()) / top2;
      if (e > out.matching_error) {
        out.matching_error = e;
        out.matching_witness = k.S;
        out.matching_point = p;
      }
    }
  }
  return out;
}

inline LipschitzAudit curve_lip_audit(const IntrinsicCurve& phi, const std::vector<double>& pts) {
  return intrinsic_lip_audit(sample_curve(phi, pts));
}

// Sample points of 2 root: the curve's own breakpoints plus a uniform mesh.
inline std::vector<double> audit_points(const IntrinsicCurve& phi, const DyadicInterval& root, int per_side) {
  std::vector<double> pts;
  for (int i = 0; i <= per_side; ++i) pts.push_back(root.lo2() + (root.hi2() - root.lo2()) * i / per_side);
  for (double b : phi.breakpoints(root.lo2(), root.hi2())) pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  for (double p : pts) {
    if (out.empty() || p - out.back() > 1e-12) out.push_back(p);
  }
  return out;
}

struct TreeReport {
  MatchedTree matched;
  TreeLift lift;
  IntrinsicAudit audit;
  ApproxAudit euclidean;  // matched psi_T at delta
};

struct CoronaResult {
  int n = 0;
  double eta = 0.0;
  double delta = 0.0;
  EuclideanCorona euclidean;
  std::vector<TreeReport> trees;
  double intrinsic_constant = 0.0;

  bool pass() const {
    for (const auto& t : trees) {
      if (!t.audit.pass()) return false;
    }
    return true;
  }
};

struct OutOfScope : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct PreconditionFailure : std::domain_error {
  PreconditionFailure(const std::string& what, LipschitzAudit w, double a, double b)
      : std::domain_error(what), witness(w), from(a), to(b) {}
  LipschitzAudit witness;
  double from;
  double to;
};

// Full intrinsic corona for an intrinsic 1-Lipschitz curve with n > 1.
inline CoronaResult corona_pipeline(const IntrinsicCurve& phi, DyadicInterval root, int depth, double eta) {
  const int n = phi.n();
  if (n < 2) throw OutOfScope("corona_pipeline: n = 1 is not handled (needs n > 1)");
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("corona_pipeline: eta must lie in (0, 1)");
  if (depth < 0 || depth > 16) throw std::invalid_argument("corona_pipeline: depth must lie in [0, 16]");
  CoronaResult res;
  res.n = n;
  res.eta = eta;
  res.delta = eta * eta / (100.0 * n);
  const auto pts = audit_points(phi, root, 512);
  const LipschitzAudit lip = curve_lip_audit(phi, pts);
  res.intrinsic_constant = lip.constant;
  if (lip.constant > lip_slack()) {
    throw PreconditionFailure("corona_pipeline: intrinsic Lipschitz constant exceeds 1", lip, pts[lip.from],
                              pts[lip.to]);
  }
  const VecFunction psi = [&phi](double s) { return phi.horizontal(s); };
  const double tight = res.delta / (8.0 * std::sqrt(2.0 * n - 1.0));
  res.euclidean = euclidean_corona(psi, root, depth, tight);
  const auto& trees = res.euclidean.corona.trees;
  for (std::size_t t = 0; t < trees.size(); ++t) {
    MatchedTree m = boundary_match(psi, trees[t], res.euclidean.fits[t], res.delta);
    TreeLift lift = lift_tree(phi, trees[t], res.euclidean.fits[t].slope, m, res.euclidean.corona.grid);
    IntrinsicAudit audit = verify_intrinsic_approx(phi, lift, trees[t], eta);
    ApproxAudit eu = audit_euclidean(psi, trees[t], res.euclidean.fits[t].slope, m.psi_T, res.delta);
    res.trees.push_back({std::move(m), std::move(lift), audit, eu});
  }
  return res;
}

// Rescaling phi -> (phi_2..n / N, phi_{n+1} / N^2, phi_{n+2..2n} / N,
// phi_{2n+1} / N^2) takes intrinsic N-Lipschitz maps to intrinsic
// 1-Lipschitz ones.
inline Vec rescale_forward(const Vec& value, int n, double N) {
  if (!(N >= 1.0)) throw std::invalid_argument("rescale: N must be >= 1");
  if (static_cast<int>(value.size()) != 2 * n) throw std::invalid_argument("rescale: value size must be 2n");
  Vec out = value;
  for (int j = 2; j <= 2 * n + 1; ++j) {
    const bool sq = (j == n + 1 || j == 2 * n + 1);
    out[j - 2] = value[j - 2] / (sq ? N * N : N);
  }
  return out;
}

inline Vec rescale_backward(const Vec& value, int n, double N) {
  if (!(N >= 1.0)) throw std::invalid_argument("rescale: N must be >= 1");
  if (static_cast<int>(value.size()) != 2 * n) throw std::invalid_argument("rescale: value size must be 2n");
  Vec out = value;
  for (int j = 2; j <= 2 * n + 1; ++j) {
    const bool sq = (j == n + 1 || j == 2 * n + 1);
    out[j - 2] = value[j - 2] * (sq ? N * N : N);
  }
  return out;
}

inline GridCurve rescale_curve(const GridCurve& c, double N) {
  std::vector<Vec> vals;
  for (const auto& v : c.node_values()) vals.push_back(rescale_forward(v, c.n(), N));
  return GridCurve(c.n(), c.nodes(), std::move(vals));
}

// Graph of phi viewed over the horizontal line V_L = span(v1),
// v1 = (1, a) / |(1, a)|.
struct ReparamGraph {
  Vec v1;
  std::vector<Vec> basis;   // columns of a unitary (symplectic orthogonal) matrix, basis[0] = v1
  std::vector<double> x;
  std::vector<double> z;
  SampledMap map;           // the reparameterized map over V_L, k = 1
  double min_z_slope = 0.0;
  double graph_error = 0.0; // reconstruction error of the horizontal graph points
  double intrinsic_constant = 0.0;
};

// Real 2n x 2n matrix of a unitary map of C^n whose first column is v1,
// written as columns. Such matrices preserve the symplectic form, so
// (x, t) -> (R^T x, t) is an isometric automorphism of H^n.
inline std::vector<Vec> unitary_completion(const Vec& v1) {
  const std::size_t n = v1.size() / 2;
  using C = std::complex<double>;
  std::vector<std::vector<C>> u;
  std::vector<C> first(n);
  for (std::size_t j = 0; j < n; ++j) first[j] = C(v1[j], v1[n + j]);
  u.push_back(first);
  for (std::size_t e = 0; e < n && u.size() < n; ++e) {
    std::vector<C> w(n, C(0.0, 0.0));
    w[e] = 1.0;
    for (const auto& b : u) {
      C p(0.0, 0.0);
      for (std::size_t j = 0; j < n; ++j) p += std::conj(b[j]) * w[j];
      for (std::size_t j = 0; j < n; ++j) w[j] -= p * b[j];
    }
    double nn = 0.0;
    for (const auto& c : w) nn += std::norm(c);
    nn = std::sqrt(nn);
    if (nn < 1e-8) continue;
    for (auto& c : w) c /= nn;
    u.push_back(w);
  }
  std::vector<Vec> cols(2 * n, Vec(2 * n, 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      cols[k][j] = u[k][j].real();
      cols[k][n + j] = u[k][j].imag();
      cols[n + k][j] = -u[k][j].imag();
      cols[n + k][n + j] = u[k][j].real();
    }
  }
  return cols;
}

inline ReparamGraph reparameterize_over_VL(const IntrinsicCurve& phi, const Vec& a, double lo, double hi,
                                           std::size_t count) {
  const int n = phi.n();
  if (static_cast<int>(a.size()) != 2 * n - 1) throw std::invalid_argument("reparameterize: slope must have 2n-1 entries");
  if (count < 2 || !(hi > lo)) throw std::invalid_argument("reparameterize: need an increasing grid");
  ReparamGraph g;
  Vec dir(2 * n);
  dir[0] = 1.0;
  for (int i = 1; i < 2 * n; ++i) dir[i] = a[i - 1];
  const double len = euclid(dir);
  g.v1 = dir;
  for (auto& c : g.v1) c /= len;
  g.basis = unitary_completion(g.v1);
  std::vector<Vec> dom, vals;
  for (std::size_t i = 0; i < count; ++i) {
    const double s = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    const Vec v = phi.value(s);
    Vec hpt(2 * n);
    hpt[0] = s;
    for (int c = 1; c < 2 * n; ++c) hpt[c] = v[c - 1];
    const HeisPoint P = graph_map(std::vector<double>{s}, v, SubgroupSplit(n, 1));
    HeisPoint Q = HeisPoint::identity(n);
    for (int c = 0; c < 2 * n; ++c) Q.x[c] = dot(g.basis[c], P.x);
    Q.t = P.t;
    Vec back(2 * n, 0.0);
    for (int c = 0; c < 2 * n; ++c) {
      for (int r = 0; r < 2 * n; ++r) back[r] += Q.x[c] * g.basis[c][r];
    }
    g.graph_error = std::max(g.graph_error, euclid_dist(back, hpt));
    const double zz = Q.x[0];
    Vec w(Q.x.begin() + 1, Q.x.end());
    w.push_back(Q.t - 0.5 * zz * Q.x[n]);
    g.x.push_back(s);
    g.z.push_back(zz);
    dom.push_back({zz});
    vals.push_back(std::move(w));
  }
  g.min_z_slope = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < g.z.size(); ++i) {
    g.min_z_slope = std::min(g.min_z_slope, (g.z[i + 1] - g.z[i]) / (g.x[i + 1] - g.x[i]));
  }
  g.map = SampledMap(SubgroupSplit(n, 1), std::move(dom), std::move(vals));
  g.intrinsic_constant = intrinsic_lip_constant(g.map);
  return g;
}

// Constant c with intrinsic constant over V_L at most c sqrt(eta), frozen at
// about twice the worst ratio seen (0.565 for n = 2, 3, eta in [0.01, 0.25],
// |a| <= 2).
inline double reparam_constant() { return 1.2; }

}  // namespace heisilg
