#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "heisilg/corona.hpp"
#include "heisilg/heisenberg.hpp"
#include "heisilg/tame.hpp"
#include "heisilg/tame_extension.hpp"
#include "heisilg/whitney.hpp"

namespace heisilg {

using json = nlohmann::json;

// Malformed or inconsistent input files.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline json to_json(const HeisPoint& p) { return p.flat(); }

inline HeisPoint heis_point_from_json(const json& j) {
  if (!j.is_array()) throw InputError("HeisPoint: expected a flat array");
  return HeisPoint::from_flat(j.get<Vec>());
}

inline json to_json(const SampledMap& m) {
  return {{"k", m.split().k}, {"n", m.split().n}, {"domain", m.domain()}, {"values", m.values()}};
}

inline json to_json(const GridFunction& g) {
  return {{"k", g.split().k},        {"n", g.split().n},         {"origin", g.origin()},
          {"spacing", g.spacing()},  {"shape", g.shape()},       {"values", g.values()}};
}

inline json to_json(const TameConstants& c) {
  return {{"per_component", c.per_component}, {"quadratic", c.quadratic}};
}

inline json to_json(const JetData& j) { return {{"points", j.points}, {"f", j.f}, {"grad", j.grad}}; }

inline json to_json(const AuditGrid& g) {
  return {{"origin", g.origin}, {"spacing", g.spacing}, {"shape", g.shape}};
}

inline json to_json(const DyadicInterval& q) { return {{"j", q.j}, {"m", q.m}}; }

namespace detail {

template <class T>
T field(const json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string(what) + ": missing field \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string(what) + ": bad field \"" + key + "\": " + e.what());
  }
}

}  // namespace detail

inline bool is_grid_json(const json& j) { return j.is_object() && j.contains("spacing"); }

inline GridFunction grid_from_json(const json& j) {
  try {
    return GridFunction(SubgroupSplit(detail::field<int>(j, "n", "GridFunction"), detail::field<int>(j, "k", "GridFunction")),
                        detail::field<Vec>(j, "origin", "GridFunction"),
                        detail::field<double>(j, "spacing", "GridFunction"),
                        detail::field<std::vector<std::size_t>>(j, "shape", "GridFunction"),
                        detail::field<std::vector<Vec>>(j, "values", "GridFunction"));
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

inline SampledMap sampled_from_json(const json& j) {
  try {
    if (is_grid_json(j)) return grid_from_json(j).to_sampled();
    return SampledMap(SubgroupSplit(detail::field<int>(j, "n", "SampledMap"), detail::field<int>(j, "k", "SampledMap")),
                      detail::field<std::vector<Vec>>(j, "domain", "SampledMap"),
                      detail::field<std::vector<Vec>>(j, "values", "SampledMap"));
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

inline TameConstants constants_from_json(const json& j) {
  return {detail::field<Vec>(j, "per_component", "TameConstants"),
          detail::field<double>(j, "quadratic", "TameConstants")};
}

inline JetData jet_from_json(const json& j) {
  JetData d{detail::field<std::vector<Vec>>(j, "points", "JetData"), detail::field<Vec>(j, "f", "JetData"),
            detail::field<std::vector<Vec>>(j, "grad", "JetData")};
  try {
    require_jet_shape(d);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return d;
}

inline AuditGrid audit_grid_from_json(const json& j) {
  AuditGrid g{detail::field<Vec>(j, "origin", "AuditGrid"), detail::field<double>(j, "spacing", "AuditGrid"),
              detail::field<std::vector<std::size_t>>(j, "shape", "AuditGrid")};
  if (g.origin.size() != g.shape.size() || !(g.spacing > 0.0)) {
    throw InputError("AuditGrid: origin and shape must match and spacing must be positive");
  }
  for (auto m : g.shape) {
    if (m < 2) throw InputError("AuditGrid: every axis needs at least 2 points");
  }
  return g;
}

inline json to_json(const ExtensionReport& r) {
  return {{"input_L", r.input_L},
          {"input_constants", to_json(r.input_constants)},
          {"formula_constants", to_json(r.formula_constants)},
          {"formula_L", r.formula_L},
          {"measured_constants", to_json(r.measured_constants)},
          {"measured_L", r.measured_L},
          {"restriction_max_error", r.restriction_max_error},
          {"pass", r.pass()}};
}

inline json to_json(const Coronization& c) {
  json bad = json::array();
  for (const auto& q : c.bad) bad.push_back(to_json(q));
  return {{"root", to_json(c.grid.root)}, {"depth", c.grid.depth}, {"bad", bad},
          {"packing_constant", c.packing_constant}};
}

// Coronization with per-tree data, plus the audit of every tree.
inline json to_json(const CoronaResult& r) {
  json out = to_json(r.euclidean.corona);
  json trees = json::array();
  json audits = json::array();
  json samples = json::array();
  const auto& ts = r.euclidean.corona.trees;
  for (std::size_t t = 0; t < ts.size(); ++t) {
    const TreeReport& tr = r.trees[t];
    json members = json::array();
    for (const auto& q : ts[t].members()) members.push_back(to_json(q));
    json corr = json::array();
    for (const auto& k : tr.lift.corrections()) corr.push_back({{"S", to_json(k.S)}, {"c", k.c}});
    json match = json::array();
    for (std::size_t s = 0; s < tr.matched.minimal.size(); ++s) {
      match.push_back({{"S", to_json(tr.matched.minimal[s])}, {"c", tr.matched.c[s]}});
    }
    trees.push_back({{"top", to_json(ts[t].top())},
                     {"members", members},
                     {"slope", tr.lift.slope()},
                     {"psi_breaks", tr.lift.psi_T().breaks()},
                     {"psi_vals", tr.lift.psi_T().values()},
                     {"corrections", corr},
                     {"boundary_match", match},
                     {"t_start", tr.lift.t_start()},
                     {"t_step", tr.lift.t_step()},
                     {"t_table", tr.lift.t_table()}});
    const IntrinsicAudit& a = tr.audit;
    for (const auto& sr : a.samples) {
      samples.push_back({{"tree", t}, {"interval", to_json(sr.interval)}, {"sample", sr.sample}, {"ratio", sr.ratio}});
    }
    audits.push_back({{"top", to_json(ts[t].top())},
                      {"distance_ratio", a.worst_ratio},
                      {"quadratic_ratio", a.worst_quadratic},
                      {"witness", {{"interval", to_json(a.interval)}, {"sample", a.sample}}},
                      {"c_ratio", a.max_c_ratio},
                      {"tent_lipschitz_ratio", a.max_tent_lip_ratio},
                      {"tent_sup_ratio", a.max_tent_sup_ratio},
                      {"matching_error", a.matching_error},
                      {"euclidean_ratio", tr.euclidean.worst_ratio},
                      {"boundary_endpoint_error", tr.matched.endpoint_error},
                      {"pass", a.pass()}});
  }
  out["trees"] = trees;
  out["report"] = {{"n", r.n},
                   {"eta", r.eta},
                   {"delta", r.delta},
                   {"intrinsic_constant", r.intrinsic_constant},
                   {"tree_count", ts.size()},
                   {"bad_count", r.euclidean.corona.bad.size()},
                   {"slope_clamped", r.euclidean.slope_clamped},
                   {"trees", audits},
                   {"samples", samples},
                   {"pass", r.pass()}};
  return out;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace heisilg
