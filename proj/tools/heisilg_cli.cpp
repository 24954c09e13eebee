#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "heisilg/cli.hpp"

namespace {

heisilg::DyadicInterval parse_root(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw CLI::ValidationError("--root", "expected j,m");
  try {
    return {std::stoi(s.substr(0, comma)), std::stoll(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--root", "expected integers j,m");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intrinsic Lipschitz graphs in Heisenberg groups: checks, extensions and corona decompositions"};
  app.require_subcommand(1);
  heisilg::RunConfig cfg;
  std::string root = "0,0";
  double lo = 0.0, hi = 0.0, max_lip = 0.0;

  auto* verify = app.add_subcommand("verify", "Audit a sampled map (intrinsic constant, optional tame constants)");
  verify->add_option("--input", cfg.input, "Map JSON")->required();
  verify->add_option("--constants", cfg.constants, "Tame constants JSON");
  auto* max_lip_opt = verify->add_option("--max-lip", max_lip, "Fail when the intrinsic constant exceeds this");

  auto* extend = app.add_subcommand("extend", "Extend an intrinsic Lipschitz sample and audit the extension");
  extend->add_option("--input", cfg.input, "Map JSON")->required();
  extend->add_option("--audit-grid", cfg.audit_grid, "Audit grid JSON (default: grid over twice the hull)");
  extend->add_option("--out", cfg.output, "Report JSON");

  auto* corona = app.add_subcommand("corona", "Corona decomposition of an intrinsic 1-Lipschitz map with k = 1");
  corona->add_option("--input", cfg.input, "Map JSON with k = 1")->required();
  corona->add_option("--eta", cfg.eta, "Approximation parameter in (0, 1)");
  corona->add_option("--root", root, "Root dyadic interval as j,m");
  corona->add_option("--depth", cfg.depth, "Levels below the root");
  corona->add_option("--out", cfg.output, "Corona JSON");

  auto* generate = app.add_subcommand("generate", "Write a seeded random map");
  generate->add_option("--kind", cfg.kind, "ilg-k1 or tame-kn")->required()->check(CLI::IsMember({"ilg-k1", "tame-kn"}));
  generate->add_option("--seed", cfg.seed, "64-bit seed");
  generate->add_option("--out", cfg.output, "Map JSON")->required();
  generate->add_option("--n", cfg.n, "Heisenberg dimension n");
  generate->add_option("--L", cfg.L, "Slope bound (ilg-k1)");
  generate->add_option("--breakpoints", cfg.breakpoints, "Number of kinks (ilg-k1)");
  auto* lo_opt = generate->add_option("--lo", lo, "Domain lower bound");
  auto* hi_opt = generate->add_option("--hi", hi, "Domain upper bound");
  generate->add_option("--points", cfg.points, "Grid nodes (ilg-k1)");
  generate->add_option("--count", cfg.count, "Sample points (tame-kn)");

  auto* report = app.add_subcommand("report", "Per-sample approximation ratios of a corona result as CSV");
  report->add_option("--input", cfg.input, "Corona JSON")->required();
  report->add_option("--csv", cfg.csv, "CSV output")->required();

  try {
    app.parse(argc, argv);
    cfg.root = parse_root(root);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(heisilg::ExitCode::kInputError);
  }
  cfg.subcommand = app.get_subcommands().front()->get_name();
  if (*max_lip_opt) cfg.max_lip = max_lip;
  if (*lo_opt) cfg.lo = lo;
  if (*hi_opt) cfg.hi = hi;
  return heisilg::run(cfg, std::cout, std::cerr);
}
