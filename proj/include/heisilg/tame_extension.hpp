#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "heisilg/heisenberg.hpp"
#include "heisilg/tame.hpp"
#include "heisilg/whitney.hpp"

namespace heisilg {

// Constant in front of the k < n bounds; covers both the horizontal and the
// quadratic estimate of the composed extension.
inline double composed_constant(int n) {
  return 2.0 * whitney_constant(n) * (1.0 + std::sqrt(static_cast<double>(n - 1)));
}

// Tame map defined on all of V = R^k.
class ExtendedTameMap {
 public:
  virtual ~ExtendedTameMap() = default;
  virtual const SubgroupSplit& split() const = 0;
  virtual Vec evaluate(std::span<const double> v) const = 0;
  virtual const TameConstants& input_constants() const = 0;
  virtual const TameConstants& formula_constants() const = 0;

  SampledMap sample(const std::vector<Vec>& pts) const {
    std::vector<Vec> vals;
    vals.reserve(pts.size());
    for (const auto& p : pts) vals.push_back(evaluate(p));
    return SampledMap(split(), pts, std::move(vals));
  }
};

inline double whitney_lambda_bound(const TameConstants& c) {
  return std::max(euclid(c.per_component), c.quadratic);
}

// k = n: the last component with the middle components as its gradient is a
// Whitney jet; the extension carries it to all of R^n.
class ExtendedTameKn : public ExtendedTameMap {
 public:
  ExtendedTameKn(const SampledMap& map, const TameConstants& c) : split_(map.split()), input_(c) {
    if (split_.k != split_.n) throw std::invalid_argument("extend_tame_kn: needs k = n");
    const TameCheck chk = check_tame(map, c);
    if (!chk.pass) {
      throw std::domain_error("extend_tame_kn: map is not tame with the given constants (" + chk.family + ")");
    }
    JetData jet;
    for (std::size_t i = 0; i < map.size(); ++i) {
      jet.points.push_back(map.domain()[i]);
      jet.f.push_back(map.values()[i].back());
      jet.grad.emplace_back(map.values()[i].begin(), map.values()[i].end() - 1);
    }
    ext_ = std::make_shared<WhitneyExtension>(std::move(jet));
    const double lambda = whitney_lambda_bound(c);
    const double C = whitney_constant(split_.n);
    formula_.per_component.assign(static_cast<std::size_t>(split_.n), C * lambda);
    formula_.quadratic = 2.0 * C * lambda;
  }

  const SubgroupSplit& split() const override { return split_; }
  const TameConstants& input_constants() const override { return input_; }
  const TameConstants& formula_constants() const override { return formula_; }
  const WhitneyExtension& whitney() const { return *ext_; }

  Vec evaluate(std::span<const double> v) const override {
    const auto e = ext_->evaluate(v);
    Vec out = e.gradient;
    out.push_back(e.value);
    return out;
  }

 private:
  SubgroupSplit split_;
  TameConstants input_;
  TameConstants formula_;
  std::shared_ptr<WhitneyExtension> ext_;
};

inline ExtendedTameKn extend_tame_kn(const SampledMap& map, const TameConstants& c) {
  return ExtendedTameKn(map, c);
}

// For k < n: the sample lifted to the graph points eta = (x, phi_{k+1..n}(x))
// in R^n with f = (phi_{n+1..2n}, phi_{2n+1} + 1/2 sum_{i=k+1..n} eta_i phi_{n+i}).
struct EmbeddedGraphMap {
  SampledMap map;          // split (n, n)
  TameConstants constants; // L'' for the embedded map
};

inline EmbeddedGraphMap embed_k_lt_n(const SampledMap& tame, const TameConstants& c) {
  const auto& s = tame.split();
  if (!(s.k < s.n)) throw std::invalid_argument("embed_k_lt_n: needs k < n");
  detail::require_constants(tame, c);
  std::vector<Vec> pts, vals;
  for (std::size_t p = 0; p < tame.size(); ++p) {
    const Vec& x = tame.domain()[p];
    const Vec& f = tame.values()[p];
    Vec eta(x);
    for (int i = s.k + 1; i <= s.n; ++i) eta.push_back(f[s.idx(i)]);
    Vec g;
    for (int i = s.n + 1; i <= 2 * s.n; ++i) g.push_back(f[s.idx(i)]);
    double corr = 0.0;
    for (int i = s.k + 1; i <= s.n; ++i) corr += eta[i - 1] * f[s.idx(s.n + i)];
    g.push_back(f.back() + 0.5 * corr);
    pts.push_back(std::move(eta));
    vals.push_back(std::move(g));
  }
  EmbeddedGraphMap out{SampledMap(SubgroupSplit(s.n, s.n), std::move(pts), std::move(vals)), {}};
  for (int i = s.n + 1; i <= 2 * s.n; ++i) out.constants.per_component.push_back(c.per_component[s.idx(i)]);
  double q = c.quadratic;
  for (int i = s.k + 1; i <= s.n; ++i) {
    q += c.per_component[s.idx(s.n + i)] * std::min(1.0, c.per_component[s.idx(i)]);
  }
  out.constants.quadratic = q;
  return out;
}

// k < n: McShane extension of phi_{k+1..n}, Whitney extension of the
// embedded map, then composition along x -> (x, phi_{k+1..n}(x)).
class ExtendedTameKltn : public ExtendedTameMap {
 public:
  ExtendedTameKltn(const SampledMap& map, const TameConstants& c) : split_(map.split()), input_(c) {
    if (!(split_.k < split_.n)) throw std::invalid_argument("extend_tame_kltn: needs k < n");
    const TameCheck chk = check_tame(map, c);
    if (!chk.pass) {
      throw std::domain_error("extend_tame_kltn: map is not tame with the given constants (" + chk.family + ")");
    }
    for (int i = split_.k + 1; i <= split_.n; ++i) {
      Vec vals;
      for (const auto& v : map.values()) vals.push_back(v[split_.idx(i)]);
      mcshane_.push_back(mcshane_extend(map.domain(), std::move(vals), c.per_component[split_.idx(i)]));
    }
    embedded_ = embed_k_lt_n(map, c);
    inner_ = std::make_shared<ExtendedTameKn>(embedded_.map, embedded_.constants);

    double sumsq = 1.0;
    for (int i = split_.k + 1; i <= split_.n; ++i) sumsq += std::pow(c.per_component[split_.idx(i)], 2);
    Vec upper;
    for (int i = split_.n + 1; i <= 2 * split_.n; ++i) upper.push_back(c.per_component[split_.idx(i)]);
    const double m = std::max(euclid(upper), embedded_.constants.quadratic);
    const double cn = composed_constant(split_.n);
    formula_.per_component = Vec(static_cast<std::size_t>(2 * split_.n - split_.k), 0.0);
    for (int i = split_.k + 1; i <= split_.n; ++i) {
      formula_.per_component[split_.idx(i)] = c.per_component[split_.idx(i)];
    }
    for (int i = split_.n + 1; i <= 2 * split_.n; ++i) {
      formula_.per_component[split_.idx(i)] = cn * std::sqrt(sumsq) * m;
    }
    formula_.quadratic = cn * sumsq * m;
  }

  const SubgroupSplit& split() const override { return split_; }
  const TameConstants& input_constants() const override { return input_; }
  const TameConstants& formula_constants() const override { return formula_; }
  const EmbeddedGraphMap& embedded() const { return embedded_; }

  Vec evaluate(std::span<const double> v) const override {
    Vec p(v.begin(), v.end());
    Vec low;
    for (const auto& m : mcshane_) {
      low.push_back(m(v));
      p.push_back(low.back());
    }
    const Vec f = inner_->evaluate(p);
    Vec out = low;
    for (int i = 0; i < split_.n; ++i) out.push_back(f[i]);
    double corr = 0.0;
    for (int i = split_.k + 1; i <= split_.n; ++i) corr += low[i - split_.k - 1] * f[i - 1];
    out.push_back(f.back() - 0.5 * corr);
    return out;
  }

 private:
  SubgroupSplit split_;
  TameConstants input_;
  TameConstants formula_;
  std::vector<McShaneExtension> mcshane_;
  EmbeddedGraphMap embedded_;
  std::shared_ptr<ExtendedTameKn> inner_;
};

inline ExtendedTameKltn extend_tame_kltn(const SampledMap& map, const TameConstants& c) {
  return ExtendedTameKltn(map, c);
}

inline std::unique_ptr<ExtendedTameMap> extend_tame(const SampledMap& map, const TameConstants& c) {
  if (map.split().k == map.split().n) return std::make_unique<ExtendedTameKn>(map, c);
  return std::make_unique<ExtendedTameKltn>(map, c);
}

// Audit points: uniform grid over V.
struct AuditGrid {
  Vec origin;
  double spacing = 1.0;
  std::vector<std::size_t> shape;

  std::vector<Vec> points() const {
    std::size_t total = 1;
    for (auto m : shape) total *= m;
    std::vector<Vec> out;
    out.reserve(total);
    std::vector<std::size_t> idx(shape.size(), 0);
    for (std::size_t f = 0; f < total; ++f) {
      std::size_t r = f;
      Vec p(shape.size());
      for (std::size_t a = shape.size(); a-- > 0;) {
        idx[a] = r % shape[a];
        r /= shape[a];
      }
      for (std::size_t a = 0; a < shape.size(); ++a) p[a] = origin[a] + spacing * static_cast<double>(idx[a]);
      out.push_back(std::move(p));
    }
    return out;
  }
};

// Grid with `per_axis` points per axis spanning twice the hull of the domain.
inline AuditGrid default_audit_grid(const SampledMap& map, std::size_t per_axis) {
  const std::size_t k = static_cast<std::size_t>(map.split().k);
  Vec lo(k, std::numeric_limits<double>::infinity()), hi(k, -std::numeric_limits<double>::infinity());
  for (const auto& p : map.domain()) {
    for (std::size_t a = 0; a < k; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  double ext = 0.0;
  for (std::size_t a = 0; a < k; ++a) ext = std::max(ext, hi[a] - lo[a]);
  if (ext == 0.0) ext = 1.0;
  AuditGrid g;
  g.shape.assign(k, per_axis);
  g.spacing = 2.0 * ext / static_cast<double>(per_axis - 1);
  for (std::size_t a = 0; a < k; ++a) g.origin.push_back(0.5 * (lo[a] + hi[a]) - ext);
  return g;
}

struct ExtensionReport {
  double input_L = 0.0;
  TameConstants input_constants;    // tame constants fed to the extension
  TameConstants formula_constants;  // recorded for the extended tame map
  double formula_L = 0.0;           // intrinsic constant recorded for the extension
  TameConstants measured_constants; // tame constants on the audit grid
  double measured_L = 0.0;          // intrinsic constant on the audit grid
  double restriction_max_error = 0.0;

  bool pass() const {
    const double s = lip_slack();
    if (restriction_max_error > tol(1e-10)) return false;
    if (measured_L > formula_L * s) return false;
    for (std::size_t i = 0; i < measured_constants.per_component.size(); ++i) {
      if (measured_constants.per_component[i] > formula_constants.per_component[i] * s) return false;
    }
    return measured_constants.quadratic <= formula_constants.quadratic * s;
  }
};

struct IlgExtension {
  std::unique_ptr<ExtendedTameMap> tame;
  ExtensionReport report;

  // Values of the intrinsic extension (last component sign restored).
  Vec evaluate(std::span<const double> v) const {
    Vec out = tame->evaluate(v);
    out.back() = -out.back();
    return out;
  }
};

// Intrinsic Lipschitz sample -> tame -> extension -> intrinsic, audited on
// the grid and at the sample points.
inline IlgExtension extend_ilg(const SampledMap& map, const AuditGrid& grid) {
  IlgExtension out;
  ExtensionReport& r = out.report;
  r.input_L = intrinsic_lip_constant(map);
  const TameMap tm = ilg_to_tame(map, r.input_L);
  r.input_constants = tm.constants;
  out.tame = extend_tame(tm.map, tm.constants);
  r.formula_constants = out.tame->formula_constants();
  r.formula_L = ilg_constant_from_tame(r.formula_constants);
  for (std::size_t i = 0; i < map.size(); ++i) {
    const Vec v = out.evaluate(map.domain()[i]);
    r.restriction_max_error = std::max(r.restriction_max_error, sup_dist(v, map.values()[i]));
  }
  const SampledMap audit_tame = out.tame->sample(grid.points());
  r.measured_constants = estimate_tame_constants(audit_tame);
  r.measured_L = intrinsic_lip_constant(flip_last(audit_tame));
  return out;
}

}  // namespace heisilg
