// vpp: command-line front end for simulations, sweeps and checks.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vpp/geometry/point_io.hpp"
#include "vpp/harness/edge_study.hpp"
#include "vpp/harness/oracle.hpp"
#include "vpp/harness/run.hpp"
#include "vpp/harness/sweep.hpp"
#include "vpp/version.hpp"

namespace fs = std::filesystem;
using namespace vpp;
using namespace vpp::harness;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitPrecondition = 2;
constexpr int kExitOracle = 3;

struct PlanArgs {
  std::string plan_file;
  std::string process, selection, domain;
  double alpha = 0, gamma1 = 0, steps_per_point = 0, beta = 0, rho = 0;
  std::size_t n_points = 0, replicates = 0;
  std::uint64_t seed = 0, burnin = 0, observer_period = 0;
  int depth_filter = 0, r_points = 0, reference_grid = 0;
  unsigned threads = 0;
  bool no_jcurve = false, clipped = false;
  std::map<std::string, CLI::Option*> opts;

  void add(CLI::App* app, bool aipp_options) {
    opts["plan"] = app->add_option("--plan", plan_file, "JSON plan file; flags override its fields")
                       ->check(CLI::ExistingFile);
    opts["process"] = app->add_option("--process", process, "v | n | aipp | csr")
                          ->check(CLI::IsMember({"v", "n", "aipp", "csr"}));
    opts["alpha"] = app->add_option("--alpha", alpha, "v-process exponent");
    opts["selection"] = app->add_option("--selection", selection, "n-process rule, e.g. anti-few");
    opts["gamma1"] = app->add_option("--gamma1", gamma1, "AIPP interaction parameter");
    opts["n_points"] = app->add_option("--n-points", n_points, "number of points N");
    opts["steps_per_point"] = app->add_option("--steps-per-point", steps_per_point, "T / N");
    opts["replicates"] = app->add_option("--replicates", replicates);
    opts["seed"] = app->add_option("--seed", seed, "seed root");
    opts["domain"] = app->add_option("--domain", domain, "circle | square | torus")
                         ->check(CLI::IsMember({"circle", "square", "torus"}));
    opts["depth_filter"] = app->add_option("--depth-filter", depth_filter, "minimum NN-depth m");
    opts["r_points"] = app->add_option("--r-points", r_points, "radii in the default J grid");
    opts["reference_grid"] = app->add_option("--reference-grid", reference_grid, "F-hat grid side");
    opts["observer_period"] = app->add_option("--observer-period", observer_period,
                                              "record R* every this many steps");
    opts["threads"] = app->add_option("--threads", threads, "worker threads (0 = all cores)");
    opts["no_jcurve"] = app->add_flag("--no-jcurve", no_jcurve, "skip the J-function estimate");
    if (aipp_options) {
      opts["beta"] = app->add_option("--beta", beta, "AIPP beta; 0 tunes to the target count");
      opts["rho"] = app->add_option("--rho", rho, "disk radius");
      opts["burnin"] = app->add_option("--burnin", burnin, "proposals before the sample is taken");
      opts["clipped"] = app->add_flag("--clipped", clipped, "clip coverage to the unit square");
    }
  }

  bool given(const std::string& k) const {
    const auto it = opts.find(k);
    return it != opts.end() && it->second->count() > 0;
  }

  ExperimentPlan build() const {
    ExperimentPlan p = plan_file.empty() ? ExperimentPlan{} : read_plan_file(plan_file);
    if (given("process")) p.process = parse_process(process);
    if (given("alpha")) p.alpha = alpha;
    if (given("selection")) p.selection = selection;
    if (given("gamma1")) p.gamma1 = gamma1;
    if (given("n_points")) p.n_points = n_points;
    if (given("steps_per_point")) p.steps_per_point = steps_per_point;
    if (given("replicates")) p.replicates = replicates;
    if (given("seed")) p.seed = seed;
    if (given("domain")) p.domain = geometry::parse_domain_kind(domain);
    if (given("depth_filter")) p.depth_filter = depth_filter;
    if (given("r_points")) p.r_points = r_points;
    if (given("reference_grid")) p.reference_grid = reference_grid;
    if (given("observer_period")) p.observer_period = observer_period;
    if (given("threads")) p.threads = threads;
    if (given("no_jcurve")) p.j_curve = !no_jcurve;
    if (given("beta")) p.beta = beta;
    if (given("rho")) p.rho = rho;
    if (given("burnin")) p.burnin = burnin;
    if (given("clipped")) p.clipped = clipped;
    if (p.process == ProcessKind::n) (void)dynamics::parse_rule(p.selection);
    p.validate();
    return p;
  }
};

void print_summary(const ResultRecord& rec) {
  std::printf("%s  N=%zu  T=%llu  replicates=%zu/%zu  seed=%llu  fingerprint=%s\n",
              rec.plan.label().c_str(), rec.plan.n_points,
              static_cast<unsigned long long>(rec.plan.total_steps()), rec.r_star.count,
              rec.plan.replicates, static_cast<unsigned long long>(rec.plan.seed),
              rec.fingerprint.c_str());
  std::printf("R* mean %.6f  sd %.6f  se %.6f\n", rec.r_star.mean, rec.r_star.sd, rec.r_star.se);
  if (rec.gamma_shape) std::printf("gamma shape %.4f\n", *rec.gamma_shape);
  if (rec.aipp_beta) std::printf("beta %.4f\n", *rec.aipp_beta);
  for (const auto& r : rec.replicates) {
    if (!r.ok) std::fprintf(stderr, "replicate %zu failed: %s\n", r.replicate, r.error.c_str());
    if (r.warning) std::fprintf(stderr, "replicate %zu: %s\n", r.replicate, r.warning->c_str());
  }
}

int simulate(const ExperimentPlan& plan, const std::string& out_dir, const std::string& format,
             const std::string& jsonl) {
  std::ofstream stream;
  StepCallback cb;
  if (!jsonl.empty()) {
    const auto parent = fs::path(jsonl).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    stream.open(jsonl);
    if (!stream) throw std::invalid_argument("cannot open " + jsonl);
    stream << json{{"seed", plan.seed}, {"fingerprint", fingerprint(plan)}, {"replicate", 0}}.dump()
           << '\n';
    cb = [&](const dynamics::StepRecord& s) {
      stream << json{{"step", s.step},
                     {"culled", s.culled},
                     {"weight_share", s.weight_share},
                     {"x", s.new_point.x},
                     {"y", s.new_point.y},
                     {"redraws", s.redraws}}
                    .dump()
             << '\n';
    };
  }
  const auto rec = run(plan, cb);
  write_outputs(rec, out_dir, format);
  print_summary(rec);
  return rec.r_star.count == 0 ? kExitRuntime : kExitOk;
}

int stats_command(const std::vector<std::string>& inputs, const std::string& domain_name,
                  int depth_filter, int r_points, int reference_grid, bool jcurve,
                  const std::string& out_dir) {
  std::vector<std::string> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      for (const auto& e : fs::directory_iterator(in))
        if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path().string());
    } else {
      files.push_back(in);
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::invalid_argument("stats: no pattern files");
  const Domain domain{geometry::parse_domain_kind(domain_name)};

  std::vector<ReplicateResult> reps;
  for (const auto& f : files) {
    ReplicateResult r;
    r.replicate = reps.size();
    r.pattern = geometry::read_points_file(f);
    const auto tess = Tessellation::build(r.pattern, domain);
    detail::summarise(r, tess, depth_filter);
    r.ok = true;
    reps.push_back(std::move(r));
  }
  std::vector<double> rs;
  for (const auto& r : reps) rs.push_back(r.r_star);
  const auto agg = aggregate(rs);

  json out;
  out["version"] = kVersion;
  out["inputs"] = files;
  out["domain"] = std::string(geometry::to_string(domain.kind));
  out["depth_filter"] = depth_filter;
  out["r_star"] = aggregate_json(agg);
  json per = json::array();
  for (std::size_t i = 0; i < reps.size(); ++i)
    per.push_back({{"file", files[i]}, {"r_star", reps[i].r_star}, {"included", reps[i].included},
                   {"epmf", epmf_json(reps[i].epmf)}});
  out["patterns"] = per;
  if (jcurve && domain.planar()) {
    const auto grid = stats::default_r_grid(reps[0].pattern.points, domain, r_points, reference_grid);
    std::vector<stats::CurveData> curves;
    for (const auto& r : reps)
      curves.push_back(stats::estimate_curve(r.pattern.points, grid, domain, r.included_ids,
                                             reference_grid));
    const auto avg = stats::average_curves(curves);
    out["j_curve"] = curve_json(avg);
  }
  atomic_write(fs::path(out_dir) / "stats.json", out.dump(2) + "\n");
  std::printf("%zu patterns  R* mean %.6f  sd %.6f  se %.6f\n", reps.size(), agg.mean, agg.sd, agg.se);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Voronoi cell-culling processes and their statistics"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string out_dir = "vpp_out", format = "csv", jsonl;

  PlanArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "run replicates of one process");
  sim_args.add(sim, true);
  sim->add_option("--out-dir", out_dir);
  sim->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
  sim->add_option("--step-log", jsonl, "JSONL file receiving every step of replicate 0");

  PlanArgs aipp_args;
  auto* aipp_cmd = app.add_subcommand("aipp", "sample the area-interaction process");
  aipp_args.add(aipp_cmd, true);
  aipp_cmd->add_option("--out-dir", out_dir);
  aipp_cmd->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));

  PlanArgs sweep_args;
  std::string param, values;
  auto* sw = app.add_subcommand("sweep", "one run per value of a plan parameter");
  sweep_args.add(sw, true);
  sw->add_option("--param", param, "alpha, gamma1, selection, n_points, ...")->required();
  sw->add_option("--values", values, "start:step:stop or a comma list")->required();
  sw->add_option("--out-dir", out_dir);
  sw->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));

  std::vector<std::string> inputs;
  std::string st_domain = "square";
  int st_depth = 3, st_r_points = stats::kDefaultRadii, st_grid = stats::kDefaultReferenceGrid;
  bool st_no_j = false;
  auto* st = app.add_subcommand("stats", "recompute statistics from saved patterns");
  st->add_option("patterns", inputs, "pattern files or directories")->required();
  st->add_option("--domain", st_domain)->check(CLI::IsMember({"circle", "square", "torus"}));
  st->add_option("--depth-filter", st_depth);
  st->add_option("--r-points", st_r_points);
  st->add_option("--reference-grid", st_grid);
  st->add_flag("--no-jcurve", st_no_j);
  st->add_option("--out-dir", out_dir);

  std::string check = "all";
  std::size_t oracle_n = 32;
  std::uint64_t oracle_seed = 1;
  auto* orc = app.add_subcommand("oracle", "compare the engine against brute-force computations");
  orc->add_option("--check", check, "check name or 'all'");
  orc->add_option("--n", oracle_n, "instance size");
  orc->add_option("--seed", oracle_seed);

  PlanArgs edge_args;
  std::vector<std::string> selections;
  int classes = 4;
  auto* edge = app.add_subcommand("edge-study", "ANOVA of redundancy by selection and NN-depth");
  edge_args.add(edge, false);
  edge->add_option("--selections", selections, "csr, v:<alpha>, n:<rule> or aipp:<gamma1>")
      ->required()
      ->delimiter(',');
  edge->add_option("--depth-classes", classes, "classes 1 .. k-1 and >= k");
  edge->add_option("--out-dir", out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitPrecondition;
  }

  try {
    if (*sim) return simulate(sim_args.build(), out_dir, format, jsonl);
    if (*aipp_cmd) {
      auto plan = aipp_args.build();
      plan.process = ProcessKind::aipp;
      return simulate(plan, out_dir, format, "");
    }
    if (*sw) {
      const auto base = sweep_args.build();
      const auto pts = sweep(base, param, parse_values(values));
      for (const auto& p : pts) {
        if (p.record) {
          write_outputs(*p.record, fs::path(out_dir) / (param + "=" + p.value), format);
          std::printf("%s=%s  R* mean %.6f  se %.6f\n", param.c_str(), p.value.c_str(),
                      p.record->r_star.mean, p.record->r_star.se);
        } else {
          std::fprintf(stderr, "%s=%s failed: %s\n", param.c_str(), p.value.c_str(), p.error.c_str());
        }
      }
      atomic_write(fs::path(out_dir) / "sweep.csv", sweep_csv(pts, param, base));
      return kExitOk;
    }
    if (*st)
      return stats_command(inputs, st_domain, st_depth, st_r_points, st_grid, !st_no_j, out_dir);
    if (*orc) {
      const auto names = check == "all" ? oracle_names() : std::vector<std::string>{check};
      bool all_pass = true;
      for (const auto& name : names) {
        const auto r = run_oracle(name, oracle_n, oracle_seed);
        all_pass = all_pass && r.pass;
        std::cout << report_json(r).dump() << '\n';
      }
      return all_pass ? kExitOk : kExitOracle;
    }
    if (*edge) {
      const auto s = edge_study(edge_args.build(), selections, classes);
      auto j = edge_study_json(s);
      j["version"] = kVersion;
      j["seed"] = edge_args.build().seed;
      atomic_write(fs::path(out_dir) / "edge_study.json", j.dump(2) + "\n");
      std::cout << j["significant"].dump() << '\n';
      return kExitOk;
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitPrecondition;
  } catch (const std::out_of_range& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitPrecondition;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
