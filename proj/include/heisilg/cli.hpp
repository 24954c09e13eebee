#pragma once

#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "heisilg/corona.hpp"
#include "heisilg/curve.hpp"
#include "heisilg/generators.hpp"
#include "heisilg/io.hpp"
#include "heisilg/tame.hpp"
#include "heisilg/tame_extension.hpp"

namespace heisilg {

enum class ExitCode : int { kOk = 0, kVerificationFailed = 1, kInputError = 2 };

struct RunConfig {
  std::string subcommand;
  std::string input;
  std::string output;
  std::string constants;   // verify: tame constants file
  std::string audit_grid;  // extend: audit grid file
  std::string csv;         // report: CSV path
  std::optional<double> max_lip;

  // corona
  double eta = 0.3;
  DyadicInterval root{0, 0};
  int depth = 8;

  // generate
  std::string kind;
  std::uint64_t seed = 1;
  int n = 2;
  double L = 0.5;
  int breakpoints = 8;
  std::optional<double> lo;
  std::optional<double> hi;
  std::size_t points = 1501;
  std::size_t count = 12;
};

namespace detail {

inline json violation(const std::string& invariant, json witness) {
  return {{"invariant", invariant}, {"witness", std::move(witness)}};
}

inline int finish(const json& result, bool pass, std::ostream& out) {
  out << dump(result);
  return static_cast<int>(pass ? ExitCode::kOk : ExitCode::kVerificationFailed);
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InputError(what);
}

inline int run_verify(const RunConfig& cfg, std::ostream& out) {
  require(!cfg.input.empty(), "verify: --input is required");
  const json in = read_json_file(cfg.input);
  const SampledMap map = sampled_from_json(in);
  json result{{"command", "verify"}, {"k", map.split().k}, {"n", map.split().n}, {"points", map.size()}};
  bool pass = true;
  json violations = json::array();

  if (map.size() >= 2) {
    const LipschitzAudit lip = intrinsic_lip_audit(map);
    result["intrinsic_constant"] = lip.constant;
    const json pair{{"v", map.domain()[lip.from]}, {"w", map.domain()[lip.to]}};
    result["intrinsic_witness"] = pair;
    if (!std::isfinite(lip.constant)) {
      pass = false;
      violations.push_back(violation("intrinsic Lipschitz constant is finite", pair));
    }
    if (cfg.max_lip && lip.constant > *cfg.max_lip * lip_slack()) {
      pass = false;
      violations.push_back(violation("intrinsic Lipschitz constant <= " + json(*cfg.max_lip).dump(), pair));
    }
  }
  if (is_grid_json(in) && map.split().k == 1) {
    // Grid samples of an intrinsic map with k = 1 must solve the
    // horizontality equation cell by cell.
    const GridCurve curve = GridCurve::from_grid(grid_from_json(in));
    const double mismatch = curve.equation_mismatch();
    const double h = in.at("spacing").get<double>();
    result["equation_mismatch"] = mismatch;
    if (mismatch > tol(1e-9) * std::max(1.0, h)) {
      pass = false;
      violations.push_back(violation("horizontality equation on grid cells", {{"mismatch", mismatch}}));
    }
  }
  if (!cfg.constants.empty()) {
    const TameConstants c = constants_from_json(read_json_file(cfg.constants));
    TameCheck chk;
    try {
      chk = check_tame(map, c);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
    result["tame_check"] = {{"pass", chk.pass}, {"worst_ratio", chk.worst_ratio}, {"family", chk.family}};
    if (!chk.pass) {
      pass = false;
      violations.push_back(violation("tame bound: " + chk.family,
                                     {{"v", map.domain()[chk.i]}, {"w", map.domain()[chk.j]},
                                      {"ratio", chk.worst_ratio}}));
    }
  }
  result["violations"] = violations;
  result["pass"] = pass;
  return finish(result, pass, out);
}

inline int run_extend(const RunConfig& cfg, std::ostream& out) {
  require(!cfg.input.empty(), "extend: --input is required");
  const SampledMap map = sampled_from_json(read_json_file(cfg.input));
  require(map.size() >= 2, "extend: need at least 2 sample points");
  const AuditGrid grid = cfg.audit_grid.empty()
                             ? default_audit_grid(map, map.split().k == 1 ? 200 : 32)
                             : audit_grid_from_json(read_json_file(cfg.audit_grid));
  require(grid.origin.size() == static_cast<std::size_t>(map.split().k), "extend: audit grid dimension must be k");
  const IlgExtension ext = extend_ilg(map, grid);
  const ExtensionReport& r = ext.report;
  json report = to_json(r);
  report["audit_grid"] = to_json(grid);
  json violations = json::array();
  if (r.restriction_max_error > tol(1e-10)) {
    violations.push_back(violation("restriction to the samples", {{"error", r.restriction_max_error}}));
  }
  if (r.measured_L > r.formula_L * lip_slack()) {
    violations.push_back(violation("audited intrinsic constant <= formula constant",
                                   {{"measured", r.measured_L}, {"formula", r.formula_L}}));
  }
  report["violations"] = violations;
  if (!cfg.output.empty()) write_text_file(cfg.output, dump(report));
  return finish(report, r.pass(), out);
}

inline GridCurve curve_from_json(const json& in) {
  if (is_grid_json(in)) return GridCurve::from_grid(grid_from_json(in));
  return GridCurve::from_sampled(sampled_from_json(in));
}

inline int run_corona(const RunConfig& cfg, std::ostream& out) {
  require(!cfg.input.empty(), "corona: --input is required");
  require(cfg.eta > 0.0 && cfg.eta < 1.0, "corona: --eta must lie in (0, 1)");
  require(cfg.depth >= 0 && cfg.depth <= 16, "corona: --depth must lie in [0, 16]");
  const json in = read_json_file(cfg.input);
  require(in.value("k", 0) == 1, "corona: input must have k = 1");
  if (in.value("n", 0) == 1) throw OutOfScope("corona: n = 1 (the first Heisenberg group) is out of scope");
  const GridCurve curve = curve_from_json(in);
  CoronaResult res;
  try {
    res = corona_pipeline(curve, cfg.root, cfg.depth, cfg.eta);
  } catch (const PreconditionFailure& e) {
    json result{{"command", "corona"},
                {"pass", false},
                {"violations", json::array({violation("intrinsic 1-Lipschitz input",
                                                      {{"v", e.from}, {"w", e.to}, {"constant", e.witness.constant}})})}};
    return finish(result, false, out);
  }
  json doc = to_json(res);
  if (!cfg.output.empty()) write_text_file(cfg.output, dump(doc));
  json summary = doc["report"];
  summary.erase("samples");
  summary.erase("trees");
  json violations = json::array();
  for (std::size_t t = 0; t < res.trees.size(); ++t) {
    const IntrinsicAudit& a = res.trees[t].audit;
    if (!a.pass()) {
      violations.push_back(violation("tree approximation",
                                     {{"tree", to_json(res.euclidean.corona.trees[t].top())},
                                      {"interval", to_json(a.interval)},
                                      {"sample", a.sample},
                                      {"distance_ratio", a.worst_ratio},
                                      {"matching_error", a.matching_error}}));
    }
  }
  summary["command"] = "corona";
  summary["violations"] = violations;
  return finish(summary, res.pass(), out);
}

inline int run_generate(const RunConfig& cfg, std::ostream& out) {
  require(!cfg.output.empty(), "generate: --out is required");
  json doc;
  try {
    if (cfg.kind == "ilg-k1") {
      IlgK1Params p;
      p.seed = cfg.seed;
      p.n = cfg.n;
      p.L = cfg.L;
      p.breakpoints = cfg.breakpoints;
      p.lo = cfg.lo.value_or(p.lo);
      p.hi = cfg.hi.value_or(p.hi);
      p.points = cfg.points;
      doc = to_json(generate_ilg_k1(p));
    } else if (cfg.kind == "tame-kn") {
      TameKnParams p;
      p.seed = cfg.seed;
      p.n = cfg.n;
      p.lo = cfg.lo.value_or(p.lo);
      p.hi = cfg.hi.value_or(p.hi);
      p.count = cfg.count;
      doc = to_json(generate_tame_kn(p));
    } else {
      throw InputError("generate: --kind must be ilg-k1 or tame-kn");
    }
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  write_text_file(cfg.output, dump(doc));
  return finish({{"command", "generate"}, {"kind", cfg.kind}, {"seed", cfg.seed}, {"out", cfg.output}}, true, out);
}

inline int run_report(const RunConfig& cfg, std::ostream& out) {
  require(!cfg.input.empty(), "report: --input is required");
  require(!cfg.csv.empty(), "report: --csv is required");
  const json in = read_json_file(cfg.input);
  require(in.contains("report") && in["report"].contains("samples"), "report: input is not a corona result");
  std::string csv = "tree,interval_j,interval_m,sample,ratio\n";
  double worst = 0.0;
  for (const auto& row : in["report"]["samples"]) {
    const double r = row.at("ratio").get<double>();
    worst = std::max(worst, r);
    csv += row.at("tree").dump() + "," + row.at("interval").at("j").dump() + "," +
           row.at("interval").at("m").dump() + "," + row.at("sample").dump() + "," + row.at("ratio").dump() + "\n";
  }
  write_text_file(cfg.csv, csv);
  const bool pass = in["report"].value("pass", false);
  return finish({{"command", "report"}, {"rows", in["report"]["samples"].size()}, {"worst_ratio", worst},
                 {"pass", pass}},
                pass, out);
}

}  // namespace detail

// Dispatches one subcommand. Results go to `out` as JSON, input problems to
// `err`; the return value is the process exit status.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.subcommand == "verify") return detail::run_verify(cfg, out);
    if (cfg.subcommand == "extend") return detail::run_extend(cfg, out);
    if (cfg.subcommand == "corona") return detail::run_corona(cfg, out);
    if (cfg.subcommand == "generate") return detail::run_generate(cfg, out);
    if (cfg.subcommand == "report") return detail::run_report(cfg, out);
    throw InputError("unknown subcommand \"" + cfg.subcommand + "\"");
  } catch (const OutOfScope& e) {
    err << "error: " << e.what() << "\n";
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const json::exception& e) {
    err << "error: malformed input: " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
  }
  return static_cast<int>(ExitCode::kInputError);
}

}  // namespace heisilg
