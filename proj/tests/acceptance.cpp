// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "heisilg/heisilg.hpp"

using namespace heisilg;

namespace {

// Pinned tolerances and budgets.
constexpr double kGroupTol = 1e-12;
constexpr double kResidualGap = 1e-10;
constexpr double kLipSlack = 1e-9;
constexpr double kWhitneyRestriction = 1e-12;
constexpr double kWhitneyFd = 1e-7;
constexpr double kFdStep = 1e-5;
constexpr double kExtensionRestriction = 1e-10;
constexpr double kPackingCap = 50.0;
constexpr double kEndpointTol = 1e-10;
constexpr double kApproxSlack = 1e-6;
constexpr double kMatchingTol = 1e-6;
constexpr double kGroupSeconds = 5.0;
constexpr double kExtensionSeconds = 60.0;
constexpr double kIntrinsicCoronaSeconds = 120.0;

const DyadicInterval kRoot{0, 0};

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void fail(const std::string& why) {
    detail << "failed: " << why << "; ";
    pass = false;
  }
  void expect(bool ok, const std::string& why) {
    if (!ok) fail(why);
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

HeisPoint random_point(SplitMix64& rng, int n) {
  Vec x(2 * n);
  for (auto& c : x) c = rng.uniform(-2, 2);
  return HeisPoint(x, rng.uniform(-2, 2));
}

double point_gap(const HeisPoint& a, const HeisPoint& b) { return std::max(sup_dist(a.x, b.x), std::abs(a.t - b.t)); }

// 1. Group law, metric and projections.
void group_suite(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  SplitMix64 rng(101);
  double worst = 0.0;
  int checks = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 1 + trial % 3;
    const HeisPoint a = random_point(rng, n), b = random_point(rng, n), c = random_point(rng, n);
    const double r = rng.uniform(0.1, 3.0);
    const int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    const SubgroupSplit s(n, k);
    const double gaps[] = {
        point_gap(product(product(a, b), c), product(a, product(b, c))),
        point_gap(product(a, inverse(a)), HeisPoint::identity(n)),
        point_gap(product(inverse(a), a), HeisPoint::identity(n)),
        std::abs(distance(product(c, a), product(c, b)) - distance(a, b)),
        std::abs(norm(dilation(a, r)) - r * norm(a)),
        point_gap(product(project_V(a, s), project_W(a, s)), a),
    };
    for (double g : gaps) {
      worst = std::max(worst, g);
      ++checks;
    }
  }
  const double elapsed = seconds_since(t0);
  o.expect(worst <= kGroupTol, "gap above tolerance");
  o.expect(elapsed < kGroupSeconds, "runtime over budget");
  o.detail << checks << " checks over 10000 triples, worst gap " << worst << ", " << elapsed << " s";
}

// 2. Residual formula against group arithmetic.
void residual_oracle(Outcome& o) {
  SplitMix64 rng(202);
  double worst = 0.0;
  const std::pair<int, int> splits[] = {{1, 1}, {1, 2}, {2, 2}, {1, 3}, {2, 3}, {3, 3}};
  for (auto [k, n] : splits) {
    const SubgroupSplit s(n, k);
    for (int trial = 0; trial < 10000; ++trial) {
      Vec v(k), w(k), fv(s.value_dim()), fw(s.value_dim());
      for (auto* vec : {&v, &w, &fv, &fw}) {
        for (auto& c : *vec) c = rng.uniform(-2, 2);
      }
      const ResidualPair r = ilg_residual(v, fv, w, fw, s);
      const HeisPoint d = project_W(product(inverse(graph_map(v, fv, s)), graph_map(w, fw, s)), s);
      double gap = std::abs(r.h_value - d.t);
      for (int j = k + 1; j <= 2 * n; ++j) gap = std::max(gap, std::abs(r.horizontal_gap[s.idx(j)] - d.x[j - 1]));
      worst = std::max(worst, gap);
    }
  }
  o.expect(worst <= kResidualGap, "gap above tolerance");
  o.detail << "6 splits x 10000 cases, worst gap " << worst;
}

// 3. Intrinsic <-> tame constants.
void tame_constants(Outcome& o) {
  double worst_ratio = 0.0, worst_formula = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double L = (i % 3 == 0) ? 0.25 : (i % 3 == 1 ? 0.5 : 1.0);
    const int n = 1 + (i / 3) % 3;
    IlgK1Params p;
    p.seed = 300 + static_cast<std::uint64_t>(i);
    p.n = n;
    p.points = 151;
    p.breakpoints = 6;
    // The vertical part grows like the square root of the slope, so small L
    // needs slopes well below L; shrink until the sample is L-Lipschitz.
    p.L = 0.9 * L / std::sqrt(2.0 * n - 1.0);
    SampledMap m = generate_ilg_k1(p).to_sampled();
    double measured = intrinsic_lip_constant(m);
    for (int shrink = 0; shrink < 20 && measured > L; ++shrink) {
      p.L *= 0.7;
      m = generate_ilg_k1(p).to_sampled();
      measured = intrinsic_lip_constant(m);
    }
    if (measured > L) {
      o.fail("sample " + std::to_string(i) + " is not intrinsic L-Lipschitz");
      continue;
    }
    const TameMap t = ilg_to_tame(m, L);
    TameConstants expect;
    expect.per_component.assign(static_cast<std::size_t>(2 * n - 1), L);
    expect.quadratic = 2 * L * L;
    expect.per_component[static_cast<std::size_t>(n - 1)] = std::min(L, 2 * L * L);
    o.expect(t.constants == expect, "ilg_to_tame constants differ from (L, ..., 2L^2)");
    const TameCheck chk = check_tame(t.map, t.constants);
    o.expect(chk.pass, "check_tame failed (" + chk.family + ")");
    const IlgMap back = tame_to_ilg(t.map, t.constants);
    const double bound = std::max(L, std::sqrt(2.0) * L);
    const double back_measured = intrinsic_lip_constant(back.map);
    o.expect(back_measured <= bound * (1 + kLipSlack), "round-trip constant above max{L, sqrt2 L}");
    worst_ratio = std::max(worst_ratio, back_measured / bound);
    worst_formula = std::max(worst_formula, back.L / L);
  }
  o.detail << "100 samples, worst measured/max{L,sqrt2 L} " << worst_ratio
           << ", worst formula constant / L " << worst_formula;
}

JetData smooth_jet(std::uint64_t seed, int n, int m, double spread) {
  SplitMix64 rng(seed);
  JetData j;
  for (int i = 0; i < m; ++i) {
    Vec p(n), g(n);
    for (auto& c : p) c = rng.uniform(-spread, spread);
    double f = 0.0;
    for (int d = 0; d < n; ++d) {
      f += 0.5 * (d + 1) * p[d] * p[d] + 0.3 * std::sin(3 * p[d] + d);
      g[d] = (d + 1) * p[d] + 0.9 * std::cos(3 * p[d] + d);
    }
    j.points.push_back(p);
    j.f.push_back(f);
    j.grad.push_back(g);
  }
  return j;
}

// 4. Whitney extension.
void whitney_suite(Outcome& o) {
  double restriction = 0.0, fd = 0.0, lip_ratio = 0.0, affine = 0.0;
  SplitMix64 rng(404);
  for (int n = 1; n <= 3; ++n) {
    for (int variant = 0; variant < 4; ++variant) {
      const JetData j = smooth_jet(40 * n + variant, n, 4 + 3 * variant, variant == 3 ? 0.1 : 1.0);
      const WhitneyExtension e(j);
      for (std::size_t i = 0; i < j.size(); ++i) {
        const auto ev = e.evaluate(j.points[i]);
        restriction = std::max(restriction, std::abs(ev.value - j.f[i]));
        restriction = std::max(restriction, sup_dist(ev.gradient, j.grad[i]));
      }
      const Box box = jet_box(j, 2.0);
      if (variant == 0) {
        for (int i = 0; i < 1000; ++i) {
          Vec x(n);
          for (int d = 0; d < n; ++d) x[d] = rng.uniform(box.lo[d], box.hi[d]);
          const auto ev = e.evaluate(x);
          for (int d = 0; d < n; ++d) {
            auto at = [&](double off) {
              Vec y = x;
              y[d] += off;
              return e.evaluate(y).value;
            };
            const double h = kFdStep;
            const double der = (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
            fd = std::max(fd, std::abs(der - ev.gradient[d]));
          }
        }
      }
      const double lip = estimate_gradient_lip(e, box, 1500, static_cast<std::uint64_t>(n + variant));
      lip_ratio = std::max(lip_ratio, lip / (whitney_constant(n) * e.lambda()));
    }
    JetData one{{Vec(n, 0.3)}, {-0.7}, {Vec(n, 0.0)}};
    for (int d = 0; d < n; ++d) one.grad[0][d] = 0.25 * (d + 1) - 0.5;
    const WhitneyExtension e(one);
    for (int i = 0; i < 200; ++i) {
      Vec x(n);
      for (auto& c : x) c = rng.uniform(-5, 5);
      double expect = -0.7;
      for (int d = 0; d < n; ++d) expect += one.grad[0][d] * (x[d] - 0.3);
      const auto ev = e.evaluate(x);
      affine = std::max(affine, std::abs(ev.value - expect));
      affine = std::max(affine, sup_dist(ev.gradient, one.grad[0]));
    }
  }
  o.expect(restriction <= kWhitneyRestriction, "restriction above tolerance");
  o.expect(fd <= kWhitneyFd, "finite-difference gradient mismatch");
  o.expect(lip_ratio <= 1.0, "Lip(grad) above C(n) lambda");
  o.expect(affine <= kWhitneyRestriction, "single-point jet not affine");
  o.detail << "12 jets, restriction " << restriction << ", fd gap " << fd << " at 3000 points"
           << ", worst Lip(grad)/(C lambda) " << lip_ratio << ", affine gap " << affine;
}

// Intrinsic sample with k = n = 2 from a seeded potential.
SampledMap intrinsic_kn_sample(std::uint64_t seed) {
  TameKnParams p;
  p.seed = seed;
  p.n = 2;
  p.count = 10;
  p.amplitude = 0.5;
  const SampledMap tame = generate_tame_kn(p);
  return tame_to_ilg(tame, estimate_tame_constants(tame)).map;
}

// 5. Extension theorem.
void extension_theorem(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_restriction = 0.0, worst_ratio = 0.0, worst_n1 = 0.0;
  int count = 0;
  const std::pair<int, int> splits[] = {{1, 2}, {2, 2}, {1, 3}};
  for (auto [k, n] : splits) {
    for (int i = 0; i < 50; ++i) {
      SampledMap m = [&] {
        if (k == 2) return intrinsic_kn_sample(500 + static_cast<std::uint64_t>(i));
        IlgK1Params p;
        p.seed = 600 + static_cast<std::uint64_t>(10 * n + i);
        p.n = n;
        p.L = (i % 3 == 0) ? 0.25 : (i % 3 == 1 ? 0.5 : 1.0);
        p.points = 25;
        p.breakpoints = 4;
        return generate_ilg_k1(p).to_sampled();
      }();
      const IlgExtension ext = extend_ilg(m, default_audit_grid(m, k == 1 ? 200 : 32));
      const ExtensionReport& r = ext.report;
      worst_restriction = std::max(worst_restriction, r.restriction_max_error);
      worst_ratio = std::max(worst_ratio, r.measured_L / r.formula_L);
      o.expect(r.restriction_max_error <= kExtensionRestriction, "restriction above tolerance");
      o.expect(r.measured_L <= r.formula_L * (1 + kLipSlack), "audited constant above L'");
      ++count;
    }
  }
  // k = n = 1: L' <= 2 C(1) max{L, L^2}, the factor 2 coming from the quadratic constant 2L^2.
  const double c1 = 2.0 * whitney_constant(1);
  for (int i = 0; i < 20; ++i) {
    IlgK1Params p;
    p.seed = 700 + static_cast<std::uint64_t>(i);
    p.n = 1;
    p.L = 0.1 * (1 + i);
    p.points = 25;
    p.breakpoints = 4;
    const SampledMap m = generate_ilg_k1(p).to_sampled();
    const IlgExtension ext = extend_ilg(m, default_audit_grid(m, 200));
    const ExtensionReport& r = ext.report;
    const double L = r.input_L;
    o.expect(r.restriction_max_error <= kExtensionRestriction, "restriction above tolerance (n = 1)");
    o.expect(r.measured_L <= r.formula_L * (1 + kLipSlack), "audited constant above L' (n = 1)");
    o.expect(r.formula_L <= c1 * std::max(L, L * L) * (1 + kLipSlack), "L' above C max{L, L^2}");
    worst_n1 = std::max(worst_n1, r.formula_L / (c1 * std::max(L, L * L)));
    ++count;
  }
  const double elapsed = seconds_since(t0);
  o.expect(elapsed < kExtensionSeconds, "runtime over budget");
  o.detail << count << " extensions, worst restriction " << worst_restriction << ", worst audited/L' "
           << worst_ratio << ", worst L'/(C max{L,L^2}) at n = 1 " << worst_n1 << ", " << elapsed << " s";
}

GridCurve generated_curve(std::uint64_t seed, int n, double L, int breakpoints, std::size_t points = 1501) {
  IlgK1Params p;
  p.seed = seed;
  p.n = n;
  p.L = L;
  p.breakpoints = breakpoints;
  p.points = points;
  return GridCurve::from_grid(generate_ilg_k1(p));
}

double euclidean_lip(const GridCurve& c) {
  double lip = 0.0;
  const auto& s = c.nodes();
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    lip = std::max(lip, euclid_dist(c.horizontal(s[i + 1]), c.horizontal(s[i])) / (s[i + 1] - s[i]));
  }
  return lip;
}

// 6. Euclidean corona with endpoint matching.
void euclidean_corona_suite(Outcome& o) {
  double worst_packing = 0.0, worst_approx = 0.0, worst_endpoint = 0.0, worst_c = 0.0, worst_lip = 0.0;
  std::size_t trees = 0;
  for (int i = 0; i < 20; ++i) {
    const int n = 2 + i % 2;
    const GridCurve c = generated_curve(800 + static_cast<std::uint64_t>(i), n, 0.9 / std::sqrt(2.0 * n - 1.0), 6 + i);
    o.expect(euclidean_lip(c) <= 1.0, "generated psi is not 1-Lipschitz");
    const VecFunction psi = [&c](double s) { return c.horizontal(s); };
    const double delta = 0.02;
    const double tight = delta / (8.0 * std::sqrt(2.0 * n - 1.0));
    const EuclideanCorona ec = euclidean_corona(psi, kRoot, 8, tight);
    const Coronization& cz = ec.corona;
    const std::string part = cz.partition_violation();
    o.expect(part.empty(), "partition: " + part);
    std::vector<DyadicInterval> marked = cz.bad;
    for (const auto& t : cz.trees) {
      const std::string coh = t.coherence_violation();
      o.expect(coh.empty(), "coherence: " + coh);
      marked.push_back(t.top());
    }
    for (const auto& q0 : cz.grid.all()) {
      o.expect(carleson_sum(marked, q0) <= cz.packing_constant * q0.length() * (1 + 1e-12),
               "packing sum above recorded C at " + to_string(q0));
    }
    worst_packing = std::max(worst_packing, cz.packing_constant);
    for (std::size_t t = 0; t < cz.trees.size(); ++t) {
      o.expect(euclid(ec.fits[t].slope) <= 2.0 * (1 + 1e-12), "tree slope above 2");
      const ApproxAudit pre = audit_euclidean(psi, cz.trees[t], ec.fits[t].slope, ec.fits[t].psi_T, tight);
      o.expect(pre.worst_ratio <= 1.0, "approximation at the tightened parameter fails");
      const MatchedTree m = boundary_match(psi, cz.trees[t], ec.fits[t], delta);
      const ApproxAudit post = audit_euclidean(psi, cz.trees[t], ec.fits[t].slope, m.psi_T, delta);
      worst_approx = std::max(worst_approx, post.worst_ratio);
      worst_endpoint = std::max(worst_endpoint, m.endpoint_error);
      worst_c = std::max(worst_c, m.max_c / (delta / 4.0));
      worst_lip = std::max(worst_lip, m.lipschitz / (3.0 / 8.0 * delta));
      ++trees;
    }
  }
  o.expect(worst_packing <= kPackingCap, "packing constant above cap");
  o.expect(worst_approx <= 1.0, "matched approximation above delta |Q|");
  o.expect(worst_endpoint <= kEndpointTol, "endpoint equality above tolerance");
  o.expect(worst_c <= 1.0, "|c| above delta/4");
  o.expect(worst_lip <= 1.0, "matched psi_T not (3/8) delta-Lipschitz");
  o.detail << "20 maps, " << trees << " trees, worst packing C " << worst_packing << ", worst approx ratio "
           << worst_approx << ", endpoint " << worst_endpoint << ", |c|/(delta/4) " << worst_c
           << ", Lip/(3 delta/8) " << worst_lip;
}

// 7. Intrinsic corona.
void intrinsic_corona_suite(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_ratio = 0.0, worst_c = 0.0, worst_lip = 0.0, worst_match = 0.0, worst_quad = 0.0;
  std::size_t trees = 0;
  for (int i = 0; i < 20; ++i) {
    const GridCurve c = generated_curve(900 + static_cast<std::uint64_t>(i), 2, 0.5, 4 + i);
    for (double eta : {0.1, 0.3}) {
      CoronaResult r;
      try {
        r = corona_pipeline(c, kRoot, 8, eta);
      } catch (const PreconditionFailure& e) {
        o.fail(std::string("map ") + std::to_string(i) + ": " + e.what());
        continue;
      }
      for (const auto& tr : r.trees) {
        const IntrinsicAudit& a = tr.audit;
        worst_ratio = std::max(worst_ratio, a.worst_ratio);
        worst_quad = std::max(worst_quad, a.worst_quadratic);
        worst_c = std::max(worst_c, a.max_c_ratio);
        worst_lip = std::max(worst_lip, a.max_tent_lip_ratio);
        worst_match = std::max(worst_match, a.matching_error);
        ++trees;
      }
    }
  }
  const double elapsed = seconds_since(t0);
  o.expect(worst_ratio <= 1.0 + kApproxSlack, "d(phi, phi_T) above eta |Q|");
  o.expect(worst_quad <= 1.0 + kApproxSlack, "vertical gap above eta^2 |Q|^2");
  o.expect(worst_c <= 1.0, "|c| above 24 n delta");
  o.expect(worst_lip <= 1.0, "tent Lipschitz above 96 n delta");
  o.expect(worst_match <= kMatchingTol, "matching above tolerance");
  o.expect(elapsed < kIntrinsicCoronaSeconds, "runtime over budget");
  o.detail << "40 runs, " << trees << " trees, worst d/(eta|Q|) " << worst_ratio << ", |A|/(eta|Q|)^2 " << worst_quad
           << ", |c|/(24n delta) " << worst_c << ", tent Lip/(96n delta) " << worst_lip << ", matching "
           << worst_match << ", " << elapsed << " s";
}

// 8. Rescaling.
void rescaling_suite(Outcome& o) {
  SplitMix64 rng(1000);
  bool exact = true;
  double worst_ulps = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 2 + trial % 2;
    Vec v(2 * n);
    for (auto& c : v) c = rng.uniform(-10, 10);
    const double pow2 = std::ldexp(1.0, static_cast<int>(rng.below(20)));
    exact = exact && rescale_backward(rescale_forward(v, n, pow2), n, pow2) == v &&
            rescale_forward(rescale_backward(v, n, pow2), n, pow2) == v;
    const double N = rng.uniform(1.0, 8.0);
    const Vec back = rescale_backward(rescale_forward(v, n, N), n, N);
    for (std::size_t c = 0; c < v.size(); ++c) {
      const double ulp = std::nextafter(std::abs(v[c]), INFINITY) - std::abs(v[c]);
      worst_ulps = std::max(worst_ulps, std::abs(back[c] - v[c]) / ulp);
    }
  }
  o.expect(exact, "round trip not exact for power-of-two N");
  std::vector<double> pts;
  for (int i = 0; i <= 300; ++i) pts.push_back(-1.0 + 3.0 * i / 300);
  double worst_two = 0.0, worst_measured = 0.0;
  int used = 0;
  for (int i = 0; i < 20; ++i) {
    double slope = 1.0;
    GridCurve c = generated_curve(1100 + static_cast<std::uint64_t>(i), 2 + i % 2, slope, 6);
    double L = curve_lip_audit(c, pts).constant;
    for (int shrink = 0; shrink < 10 && L > 2.0; ++shrink) {
      slope *= 0.8;
      c = generated_curve(1100 + static_cast<std::uint64_t>(i), 2 + i % 2, slope, 6);
      L = curve_lip_audit(c, pts).constant;
    }
    if (L > 2.0) {
      o.fail("generated map " + std::to_string(i) + " is not 2-Lipschitz");
      continue;
    }
    ++used;
    worst_two = std::max(worst_two, curve_lip_audit(rescale_curve(c, 2.0), pts).constant);
    worst_measured = std::max(worst_measured, curve_lip_audit(rescale_curve(c, std::max(1.0, L)), pts).constant);
  }
  o.expect(worst_two <= 1.0 + kLipSlack, "rescaled by N = 2 above 1");
  o.expect(worst_measured <= 1.0 + kLipSlack, "rescaled by measured N above 1");
  o.detail << "round trip exact for power-of-two N over 10000 values (other N within " << worst_ulps
           << " ulp), " << used << " maps, worst constant after N = 2: " << worst_two
           << ", after N = measured: " << worst_measured;
}

// 9. Fault injection: each verifier must flag a perturbed artifact and point at the fault.
void fault_injection(Outcome& o) {
  int detected = 0, total = 0;
  auto record = [&](const std::string& family, bool flagged, bool witness_ok) {
    ++total;
    if (flagged && witness_ok) {
      ++detected;
    } else {
      o.fail(family + (flagged ? ": wrong witness" : ": not detected"));
    }
  };

  // Intrinsic Lipschitz audit.
  {
    IlgK1Params p;
    p.points = 101;
    const SampledMap m = generate_ilg_k1(p).to_sampled();
    const double L = intrinsic_lip_constant(m);
    std::vector<Vec> vals = m.values();
    vals[40][0] += 0.5;
    const LipschitzAudit a = intrinsic_lip_audit(SampledMap(m.split(), m.domain(), vals));
    record("intrinsic Lipschitz", a.constant > L * (1 + kLipSlack), a.from == 40 || a.to == 40);
  }
  // Tame bounds, quadratic family.
  {
    TameKnParams p;
    const SampledMap m = generate_tame_kn(p);
    const TameConstants c = estimate_tame_constants(m);
    std::vector<Vec> vals = m.values();
    vals[3].back() += 0.5;
    const TameCheck chk = check_tame(SampledMap(m.split(), m.domain(), vals), c);
    record("tame quadratic", !chk.pass, chk.i == 3 || chk.j == 3);
  }
  // Tame bounds, component family.
  {
    TameKnParams p;
    const SampledMap m = generate_tame_kn(p);
    const TameConstants c = estimate_tame_constants(m);
    std::vector<Vec> vals = m.values();
    vals[5][1] += 2.0;
    const TameCheck chk = check_tame(SampledMap(m.split(), m.domain(), vals), c);
    record("tame component", !chk.pass, chk.i == 5 || chk.j == 5);
  }
  // Grid horizontality equation, k = 1.
  {
    IlgK1Params p;
    p.points = 301;
    const GridFunction g = generate_ilg_k1(p);
    std::vector<Vec> vals = g.values();
    for (auto& v : vals) v.back() = -v.back();
    const double base = check_ode_k1(GridFunction(g.split(), g.origin(), g.spacing(), g.shape(), vals)).max_residual;
    vals[150].back() += 0.1;
    const GridResidual r = check_ode_k1(GridFunction(g.split(), g.origin(), g.spacing(), g.shape(), vals));
    record("ode k = 1", r.max_residual > 10 * g.spacing() && r.max_residual > base,
           r.worst_node == 149 || r.worst_node == 151);
    std::vector<Vec> raw = g.values();
    raw[150].back() += 1e-6;
    const GridCurve curve = GridCurve::from_grid(GridFunction(g.split(), g.origin(), g.spacing(), g.shape(), raw));
    record("grid equation mismatch", curve.equation_mismatch() > 1e-9, true);
  }
  // Gradient check, k = n.
  {
    const RandomPotential pot(8, 2, 1.0);
    std::vector<Vec> vals;
    for (std::size_t a = 0; a < 21; ++a) {
      for (std::size_t b = 0; b < 21; ++b) vals.push_back(pot.tame_value(Vec{-1.0 + 0.1 * a, -1.0 + 0.1 * b}));
    }
    const std::size_t hit = 10 * 21 + 10;
    vals[hit][0] += 0.5;
    const GridResidual r =
        check_gradient_kn(GridFunction(SubgroupSplit(2, 2), {-1.0, -1.0}, 0.1, {21, 21}, std::move(vals)));
    record("gradient k = n", r.max_residual > 0.1, r.worst_node == hit);
  }
  // Whitney restriction: the extension of a jet no longer reproduces a perturbed copy.
  {
    const JetData j = smooth_jet(9, 2, 6, 1.0);
    const WhitneyExtension e(j);
    JetData bad = j;
    bad.grad[2][1] += 1e-9;
    double worst = 0.0;
    std::size_t at = 0;
    for (std::size_t i = 0; i < bad.size(); ++i) {
      const auto ev = e.evaluate(bad.points[i]);
      const double gap = std::max(std::abs(ev.value - bad.f[i]), sup_dist(ev.gradient, bad.grad[i]));
      if (gap > worst) {
        worst = gap;
        at = i;
      }
    }
    record("Whitney restriction", worst > kWhitneyRestriction, at == 2);
  }
  // Extension restriction: a perturbed sample no longer matches the extension.
  {
    IlgK1Params p;
    p.points = 25;
    p.breakpoints = 4;
    const SampledMap m = generate_ilg_k1(p).to_sampled();
    const IlgExtension ext = extend_ilg(m, default_audit_grid(m, 50));
    std::vector<Vec> vals = m.values();
    vals[7][1] += 1e-8;
    double worst = 0.0;
    std::size_t at = 0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double e = sup_dist(ext.evaluate(m.domain()[i]), vals[i]);
      if (e > worst) {
        worst = e;
        at = i;
      }
    }
    record("extension restriction", worst > kExtensionRestriction, at == 7);
  }
  // Corona partition, coherence and packing.
  {
    const GridCurve c = generated_curve(5, 2, 0.5, 8);
    const VecFunction psi = [&c](double s) { return c.horizontal(s); };
    const EuclideanCorona ec = euclidean_corona(psi, kRoot, 8, 0.002);
    Coronization missing = ec.corona;
    if (!missing.bad.empty()) {
      const DyadicInterval q = missing.bad.back();
      missing.bad.pop_back();
      const std::string v = missing.partition_violation();
      record("partition (missing)", !v.empty(), v.find(to_string(q)) != std::string::npos);
    } else {
      record("partition (missing)", false, false);
    }
    Coronization twice = ec.corona;
    const DyadicInterval top = twice.trees.front().top();
    twice.bad.push_back(top);
    const std::string v2 = twice.partition_violation();
    record("partition (duplicate)", v2.find("claimed twice") != std::string::npos,
           v2.find(to_string(top)) != std::string::npos);
    const Tree* big = nullptr;
    for (const auto& t : ec.corona.trees) {
      if (t.members().size() > 1 && (big == nullptr || t.members().size() > big->members().size())) big = &t;
    }
    if (big != nullptr) {
      auto members = big->members();
      const DyadicInterval child = big->top().left();
      members.erase(child);
      const std::string v3 = Tree(big->top(), members).coherence_violation();
      record("coherence", !v3.empty(), v3.find(to_string(big->top())) != std::string::npos ||
                                           v3.find(to_string(child)) != std::string::npos);
    } else {
      record("coherence", false, false);
    }
    Coronization dense = ec.corona;
    const DyadicInterval q0{1, 0};
    std::set<DyadicInterval> marked(dense.bad.begin(), dense.bad.end());
    for (const auto& t : dense.trees) marked.insert(t.top());
    for (const auto& q : DyadicGrid{q0, 7}.all()) {
      if (marked.insert(q).second) dense.bad.push_back(q);
    }
    const double sum = carleson_sum({marked.begin(), marked.end()}, q0) / q0.length();
    record("packing", sum > ec.corona.packing_constant, measure_packing(dense) >= sum);
  }
  // Euclidean approximation and endpoint matching.
  {
    const GridCurve c = generated_curve(5, 2, 0.5, 8);
    const VecFunction psi = [&c](double s) { return c.horizontal(s); };
    const double delta = 0.02, tight = delta / (8.0 * std::sqrt(3.0));
    const EuclideanCorona ec = euclidean_corona(psi, kRoot, 8, tight);
    const Tree& tree = ec.corona.trees.front();
    const MatchedTree m = boundary_match(psi, tree, ec.fits.front(), delta);
    // An interior minimal interval, so the perturbed breakpoint is not an end of psi_T.
    const DyadicInterval S = m.minimal[m.minimal.size() / 2];
    std::vector<double> br = m.psi_T.breaks();
    std::vector<Vec> vals = m.psi_T.values();
    std::size_t hit = 0;
    for (std::size_t i = 0; i < br.size(); ++i) {
      if (br[i] == S.lo()) hit = i;
    }
    vals[hit][0] += 2.0 * delta * S.length();
    const PiecewiseLinear bad(br, vals);
    const ApproxAudit a = audit_euclidean(psi, tree, ec.fits.front().slope, bad, delta);
    record("euclidean approximation", a.worst_ratio > 1.0, std::abs(a.sample - S.lo()) < 1e-12);
    const double e = std::abs(psi(S.lo())[0] - ec.fits.front().slope[0] * S.lo() - bad(S.lo())[0]);
    record("endpoint equality", e > kEndpointTol, true);
  }
  // Intrinsic approximation and matching.
  {
    const GridCurve c = generated_curve(5, 2, 0.5, 8);
    const double eta = 0.3;
    const CoronaResult r = corona_pipeline(c, kRoot, 8, eta);
    const Tree& tree = r.euclidean.corona.trees.front();
    const TreeReport& tr = r.trees.front();
    const double top2 = tree.top().length() * tree.top().length();

    class Spiked : public IntrinsicCurve {
     public:
      Spiked(const IntrinsicCurve& b, double at, double by) : b_(b), at_(at), by_(by) {}
      int n() const override { return b_.n(); }
      Vec value(double s) const override {
        Vec v = b_.value(s);
        if (s == at_) v.back() += by_;
        return v;
      }
      Vec horizontal_derivative(double s) const override { return b_.horizontal_derivative(s); }
      std::vector<double> breakpoints(double a, double b) const override { return b_.breakpoints(a, b); }

     private:
      const IntrinsicCurve& b_;
      double at_, by_;
    };

    const double s0 = tree.top().samples2()[3];
    const IntrinsicAudit a = verify_intrinsic_approx(Spiked(c, s0, 4.0 * eta * eta * top2), tr.lift, tree, eta);
    record("intrinsic approximation", a.worst_ratio > 1.0 + kApproxSlack, a.sample == s0);
    if (!tr.lift.corrections().empty()) {
      const double p0 = tr.lift.corrections().front().S.lo();
      const IntrinsicAudit b = verify_intrinsic_approx(Spiked(c, p0, 1e-5 * top2), tr.lift, tree, eta);
      record("minimal endpoint matching", b.matching_error > kMatchingTol, b.matching_point == p0);
    } else {
      record("minimal endpoint matching", false, false);
    }
  }
  // Rescaled map above 1.
  {
    const GridCurve c = generated_curve(1100, 2, 1.0, 6);
    std::vector<double> pts;
    for (int i = 0; i <= 300; ++i) pts.push_back(-1.0 + 3.0 * i / 300);
    const double L = curve_lip_audit(c, pts).constant;
    const GridCurve under = rescale_curve(c, 0.9 * L);
    const LipschitzAudit a = curve_lip_audit(under, pts);
    record("rescaling", a.constant > 1.0 + kLipSlack, a.from != a.to);
  }
  o.detail << detected << "/" << total << " injected faults detected with a witness";
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<void(Outcome&)> run;
  };
  const std::vector<Criterion> criteria = {
      {"1 group and metric suite", group_suite},
      {"2 residual oracle equivalence", residual_oracle},
      {"3 intrinsic/tame constants", tame_constants},
      {"4 Whitney suite", whitney_suite},
      {"5 extension at desk scale", extension_theorem},
      {"6 Euclidean corona", euclidean_corona_suite},
      {"7 intrinsic corona", intrinsic_corona_suite},
      {"8 rescaling", rescaling_suite},
      {"9 fault injection", fault_injection},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    o.detail.precision(3);
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.str().c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
