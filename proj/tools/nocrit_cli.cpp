#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "nocrit/cli/config.hpp"
#include "nocrit/cli/io.hpp"
#include "nocrit/cli/suites.hpp"

namespace fs = std::filesystem;
using namespace nocrit;
using namespace nocrit::cli;

namespace {

Json config_json(const RunConfig& cfg) {
  Json j{{"dim", cfg.dim},           {"seed", cfg.seed},       {"tol_fp", cfg.tol_fp},
         {"tol_rank", cfg.tol_rank}, {"tol_norm", cfg.tol_norm}, {"tol_k", cfg.tol_k},
         {"corpus", cfg.corpus},     {"eps_base", cfg.eps_base}, {"extraction_size", cfg.extraction_size},
         {"scale", cfg.scale},       {"out", cfg.out}};
  j["layout"] = Json::object();
  const auto layout = cfg.layout();
  for (const auto& b : layout.blocks()) j["layout"][b.name] = b.indices;
  return j;
}

suites::SuiteOptions suite_options(const RunConfig& cfg) {
  suites::SuiteOptions o;
  o.dim = cfg.dim;
  o.seed = cfg.seed;
  o.scale = cfg.scale;
  o.tol_fp = cfg.tol_fp;
  o.tol_rank = cfg.tol_rank;
  o.corpus = cfg.corpus;
  o.eps_base = cfg.eps_base;
  o.extraction_size = cfg.extraction_size;
  return o;
}

Json suite_json(const suites::SuiteResult& r) {
  Json c = Json::array();
  for (const auto& k : r.clauses) c.push_back({{"clause", k.clause}, {"checks", k.checks}, {"failures", k.failures}});
  return {{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"clause", r.clause}, {"detail", r.detail}, {"clauses", c}};
}

// collects failures for one subcommand and writes its JSON report
struct Run {
  std::string name;
  const RunConfig& cfg;
  std::vector<FailureRecord> failures;

  void require(bool ok, const std::string& check, const std::string& clause, const std::string& detail = "") {
    if (!ok) failures.push_back({name, check, clause, detail});
  }
  void absorb(const suites::SuiteResult& r) {
    if (!r.pass) failures.push_back({name, r.id + " " + r.name, r.clause, r.detail});
    std::fprintf(stderr, "%s %s: %s (%.2fs)\n", r.id.c_str(), r.pass ? "PASS" : "FAIL", r.name.c_str(), r.seconds);
  }
  fs::path path(const std::string& ext) const { return fs::path(cfg.out) / (name + ext); }

  int finish(Json report) {
    report["failures"] = to_json(failures)["failures"];
    write_json(path(".json"), report);
    for (const auto& f : failures)
      std::cerr << Json{{"subcommand", f.subcommand}, {"check", f.check}, {"clause", f.clause}, {"detail", f.detail}}.dump()
                << "\n";
    std::printf("%s: %s, report in %s\n", name.c_str(), failures.empty() ? "ok" : "FAILED", path(".json").c_str());
    return failures.empty() ? 0 : 1;
  }
};

int cmd_extract_point(const RunConfig& cfg) {
  Run run{"extract-point", cfg, {}};
  const auto o = suite_options(cfg);
  const ProductSplit split = o.split();
  const auto scheme = ExtractionScheme::point_deletion(split, cfg.tol_k);
  const auto& kit = scheme.kit();
  const auto& ext = split.second();
  SparseVec dir(cfg.dim, {{ext[0], 1.0}, {ext[1], -0.5}, {ext[2], 0.25}});
  dir = (1.0 / kit.omega(dir)) * dir;

  CsvWriter csv({"t", "rho", "alpha", "displacement", "omega_displacement", "roundtrip"});
  for (int k = 1; k <= 200; ++k) {
    const double t = 0.01 * k;
    const ProductPoint p{SparseVec(cfg.dim), t * dir};
    const auto step = scheme.forward_step(p);
    const SparseVec moved = step.point.x2 - p.x2;
    const double disp = l2_norm(moved), wdisp = kit.omega(moved);
    const double rt = distance(scheme.inverse(step.point), p);
    csv.row(std::vector<double>{t, step.rho, step.alpha, disp, wdisp, rt});
    if (t >= 1.0) run.require(disp == 0.0, "trajectory", "deleting-curve:vanishes-past-1", "t=" + csv_number(t));
    run.require(wdisp <= 0.5 * std::max(0.0, 1.0 - step.rho) + 1e-12, "trajectory", "deleting-curve:semi-lipschitz",
                "t=" + csv_number(t));
    run.require(rt <= 1e-8, "trajectory", "scheme:roundtrip", "t=" + csv_number(t));
  }
  write_file(run.path(".csv"), csv.text());
  const double f0 = kit.omega(kit.gamma(kit.gamma.t_min()));
  run.require(std::abs(f0 - 1.0 / (4.0 * std::sqrt(15.0))) <= 1e-10, "small-alpha", "fixed-point:small-alpha-limit");
  Json gauge{{"omega_weights_base", 4}, {"theta_bound", kit.gamma.theta().bound()},
             {"square_arc_table", SmoothSquare::kArcTable}};
  return run.finish({{"config", config_json(cfg)},
                     {"gauge", gauge},
                     {"t_min", kit.gamma.t_min()},
                     {"small_alpha_value", f0},
                     {"trajectory", run.path(".csv").filename().string()}});
}

int cmd_extract_graph(const RunConfig& cfg) {
  Run run{"extract-graph", cfg, {}};
  suites::Table table;
  const auto r = suites::graph_extraction(suite_options(cfg), &table);
  run.absorb(r);
  CsvWriter csv(table.header);
  for (const auto& row : table.rows) csv.row(row);
  write_file(run.path(".csv"), csv.text());
  return run.finish({{"config", config_json(cfg)}, {"suite", suite_json(r)}});
}

int cmd_flatten(const RunConfig& cfg) {
  Run run{"flatten", cfg, {}};
  const auto r = suites::flattening(suite_options(cfg));
  run.absorb(r);
  CsvWriter csv({"clause", "checks", "failures", "pass"});
  for (const auto& c : r.clauses)
    csv.row({c.clause, std::to_string(c.checks), std::to_string(c.failures), c.failures == 0 ? "true" : "false"});
  write_file(run.path(".csv"), csv.text());
  return run.finish({{"config", config_json(cfg)}, {"suite", suite_json(r)}});
}

int cmd_approximate(const RunConfig& cfg) {
  Run run{"approximate", cfg, {}};
  const auto o = suite_options(cfg);
  PipelineReport rep;
  const auto r = suites::end_to_end(o, &rep);
  run.absorb(r);

  Json corpus = Json::array();
  Json samples = Json::array();
  CsvWriter csv({"sample_id", "err", "eps_budget", "sigma_min", "verdict"});
  for (std::size_t i = 0; i < rep.samples.size(); ++i) {
    const auto& s = rep.samples[i];
    corpus.push_back(to_json(s.x));
    samples.push_back({{"x", to_json(s.x)},
                       {"err", s.err},
                       {"eps", s.eps},
                       {"sigma_min", s.sigma_min},
                       {"verdict", s.verdict},
                       {"displacement", s.displacement}});
    csv.row({std::to_string(i), csv_number(s.err), csv_number(s.eps), csv_number(s.sigma_min), s.verdict});
  }
  write_file(run.path(".csv"), csv.text());
  write_json(fs::path(cfg.out) / "corpus.json", {{"dim", cfg.dim}, {"seed", cfg.seed}, {"points", corpus}});
  Json config = config_json(cfg);
  config["balls"] = rep.balls;
  config["colors"] = rep.colors;
  config["dependent_centers"] = rep.dependent_centers;
  config["tube_radius"] = rep.tube_radius;
  return run.finish({{"samples", samples},
                     {"config", config},
                     {"summary",
                      {{"worst_err_over_eps", rep.samples.empty() ? 0.0 : rep.worst_ratio()},
                       {"min_sigma", rep.samples.empty() ? 0.0 : rep.min_sigma()}}},
                     {"suite", suite_json(r)}});
}

int cmd_invariants(const RunConfig& cfg) {
  Run run{"invariants", cfg, {}};
  Json out = Json::array();
  for (const auto& r : suites::all(suite_options(cfg))) {
    run.absorb(r);
    out.push_back(suite_json(r));
  }
  return run.finish({{"config", config_json(cfg)}, {"suites", out}});
}

int cmd_negative_demo(const RunConfig& cfg) {
  Run run{"negative-demo", cfg, {}};
  LineScan scan;
  const auto r = suites::negative(suite_options(cfg), &scan);
  run.absorb(r);
  CsvWriter csv({"t", "theta", "slope", "sigma_min"});
  for (std::size_t i = 0; i < scan.t.size(); ++i)
    csv.row(std::vector<double>{scan.t[i], scan.theta[i], scan.slope[i], scan.sigma[i]});
  write_file(run.path(".csv"), csv.text());
  Json brackets = Json::array();
  for (const auto& [a, b] : scan.sign_changes) brackets.push_back({a, b});
  return run.finish({{"config", config_json(cfg)},
                     {"theta", {{"t=-1", scan.theta_left}, {"t=0", scan.theta_mid}, {"t=1", scan.theta_right}}},
                     {"stationary_brackets", brackets},
                     {"surjective_everywhere", scan.certificates_pass},
                     {"suite", suite_json(r)}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Critical-point-free approximation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::map<std::string, std::string> flags;
  std::string config_path;
  auto flag = [&](const std::string& name, const std::string& key, const std::string& help) {
    app.add_option(name, flags[key], help);
  };
  flag("--dim", "dim", "truncation dimension D");
  flag("--seed", "seed", "corpus seed");
  flag("--corpus", "corpus", "corpus size for approximate");
  flag("--eps-base", "eps_base", "eps(x) = base (1 + |x|)");
  flag("--out", "out", "output directory");
  flag("--tol-fp", "tol_fp", "fixed-point tolerance");
  flag("--tol-rank", "tol_rank", "sigma_min threshold");
  app.add_option("--config", config_path, "key = value config file; flags win");

  const std::map<std::string, std::function<int(const RunConfig&)>> commands{
      {"extract-point", cmd_extract_point}, {"extract-graph", cmd_extract_graph}, {"flatten", cmd_flatten},
      {"approximate", cmd_approximate}, {"invariants", cmd_invariants}, {"negative-demo", cmd_negative_demo}};
  const std::map<std::string, std::string> help{
      {"extract-point", "delete the origin and write the trajectory table"},
      {"extract-graph", "extract a sampled graph for delta in {0.1, 0.5}"},
      {"flatten", "flatten a sampled graph and write the clause check table"},
      {"approximate", "run the approximation pipeline on the absolute-value map"},
      {"invariants", "run every property suite"},
      {"negative-demo", "scan a 1/3-approximant of the absolute value along a line"}};
  for (const auto& [name, fn] : commands) app.add_subcommand(name, help.at(name));

  CLI11_PARSE(app, argc, argv);

  RunConfig cfg;
  try {
    if (!config_path.empty()) load_config_file(cfg, config_path);
    for (const auto& [k, v] : flags)
      if (!v.empty()) cfg.set(k, v);
    cfg.validate();
  } catch (const Error& e) {
    std::cerr << Json{{"subcommand", "config"}, {"check", "config"}, {"clause", e.clause()}, {"detail", e.what()}}.dump()
              << "\n";
    return 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    return commands.at(name)(cfg);
  } catch (const Error& e) {
    std::cerr << Json{{"subcommand", name}, {"check", "run"}, {"clause", e.clause()}, {"detail", e.what()}}.dump() << "\n";
    return 1;
  }
}
