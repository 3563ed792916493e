#include "gachaos/chaos_lab.hpp"
#include "gachaos/config.hpp"
#include "gachaos/coupling.hpp"
#include "gachaos/meanfield.hpp"
#include "gachaos/report.hpp"
#include "gachaos/transport.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace gachaos;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitUsage = 64;

constexpr std::uint32_t kSimulateStream = 0;
constexpr std::uint32_t kSimulateEnsembleStream = 0x7FFE0000u;

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::optional<unsigned> threads;
};

struct Run {
  std::optional<LoadedConfig> loaded;
  std::uint64_t seed = 0;
  fs::path out;
  std::vector<fs::path> files;

  ExperimentConfig& config() { return loaded->config; }
};

Run prepare(const Globals& g, bool need_config) {
  Run run;
  if (!g.config_path.empty()) run.loaded = parse_config(g.config_path);
  else if (need_config) throw ValidationError("--config is required for this subcommand");
  if (run.loaded) {
    if (g.seed) run.config().seed = *g.seed;
    if (g.threads) run.config().threads = *g.threads;
    run.seed = run.config().seed;
  } else if (g.seed) {
    run.seed = *g.seed;
  }
  run.out = g.out;
  return run;
}

void open_out(const Run& run) {
  std::error_code ec;
  fs::create_directories(run.out, ec);
  if (ec || !fs::is_directory(run.out)) throw std::runtime_error("cannot create output directory " + run.out.string());
}

void emit(Run& run, const fs::path& name, const std::string& content) {
  const auto path = run.out / name;
  write_file_atomic(path, content);
  run.files.push_back(name);
}

void finish(Run& run, const std::string& command, const nlohmann::json& summary) {
  if (!summary.is_null()) emit(run, "summary.json", summary.dump(2) + "\n");
  const auto manifest = make_manifest(run.loaded ? &*run.loaded : nullptr, run.seed, command, run.files);
  write_file_atomic(run.out / "manifest.json", manifest.dump(2) + "\n");
}

std::string measure_text(const Measure& mu) {
  std::ostringstream out;
  write_measure(out, mu);
  return out.str();
}

Measure load_or_fail(const std::string& path) {
  try {
    return load_measure(path);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
}

int cmd_simulate(const Globals& g, const std::string& reference_flag, std::size_t snapshot_stride) {
  auto run = prepare(g, true);
  auto& cfg = run.config();
  if (!reference_flag.empty()) cfg.reference = parse_reference_kind(reference_flag);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  open_out(run);
  const std::size_t n = cfg.population_for_trace();
  const auto& fc = cfg.fitness.constants();
  const auto traj = gachaos::run(cfg.sim_params(n), cfg.fitness, cfg.initial, kSimulateStream, false);

  std::vector<GaSummaryRow> rows;
  std::vector<double> mq;
  for (const auto& s : traj.states) {
    rows.push_back(summarize(s, cfg.fitness, cfg.moment_q));
    mq.push_back(rows.back().mq);
  }
  emit(run, "ga_summary.csv", ga_summary_csv(rows, cfg.dim));
  if (snapshot_stride > 0) {
    fs::create_directories(run.out / "snapshots");
    for (std::size_t k = 0; k < traj.states.size(); k += snapshot_stride) {
      char name[48];
      std::snprintf(name, sizeof name, "snapshots/step_%06zu.msr", k);
      emit(run, name, measure_text(traj.states[k].empirical()));
    }
  }

  nlohmann::json summary;
  summary["population"] = n;
  summary["reference"] = to_string(cfg.reference);
  const auto ga_moments = moment_bound_check(mq, cfg.moment_q, fc, cfg.sigma, cfg.tau, cfg.dim);
  MomentSummary ga_ms;
  ga_ms.add(ga_moments);
  summary["ga_moments"] = to_json(ga_ms);

  std::string bl = "step,bl\n";
  MomentSummary ref_ms;
  if (cfg.reference == ReferenceKind::kGrid) {
    const auto ref = reference_grid(cfg, cfg.grid_cells);
    for (std::size_t k = 0; k < ref.size(); ++k)
      bl += std::to_string(k) + "," + format_real(bl_distance(traj.states[k].empirical(), ref[k].to_measure())) + "\n";
    emit(run, "grid_final.csv", grid_csv(ref.back()));
    std::vector<double> rq;
    for (const auto& f : ref) rq.push_back(f.moment(cfg.moment_q));
    ref_ms.add(moment_bound_check(rq, cfg.moment_q, fc, cfg.sigma, cfg.tau, 1));
    summary["retained_mass"] = ref.back().total_mass();
  } else {
    const std::size_t m = cfg.ensemble_factor * n;
    const auto ref = gachaos::run(cfg.sim_params(m), cfg.fitness, cfg.initial, kSimulateEnsembleStream, false);
    std::vector<GaSummaryRow> ref_rows;
    std::vector<double> rq;
    for (std::size_t k = 0; k < ref.states.size(); ++k) {
      bl += std::to_string(k) + "," + format_real(bl_distance(traj.states[k].empirical(), ref.states[k].empirical())) + "\n";
      ref_rows.push_back(summarize(ref.states[k], cfg.fitness, cfg.moment_q));
      rq.push_back(ref_rows.back().mq);
    }
    emit(run, "reference_summary.csv", ga_summary_csv(ref_rows, cfg.dim));
    ref_ms.add(moment_bound_check(rq, cfg.moment_q, fc, cfg.sigma, cfg.tau, cfg.dim));
    summary["ensemble_size"] = m;
  }
  emit(run, "reference_bl.csv", bl);
  summary["reference_moments"] = to_json(ref_ms);

  const auto trace = coupled_error_trace(cfg);
  emit(run, "trace.csv", trace_csv(trace));
  summary["trace"] = to_json(trace);
  finish(run, "simulate", summary);
  std::cout << "simulate: " << traj.states.size() - 1 << " steps, N = " << n << ", outputs in " << run.out.string()
            << "\n";
  return kExitOk;
}

int cmd_rate(const Globals& g, bool in_n) {
  auto run = prepare(g, true);
  open_out(run);
  const auto table = in_n ? rate_in_n_experiment(run.config()) : rate_in_tau_experiment(run.config());
  for (const auto& f : emit_rate_table(run.out, table)) run.files.push_back(f.filename());
  finish(run, in_n ? "rate-n" : "rate-tau", to_json(table));
  std::printf("%s slope %.6f (band [%.2f, %.2f]) %s\n", table.name.c_str(), table.fit.slope, table.band_lo,
              table.band_hi, table.slope_in_band() ? "pass" : "FAIL");
  return kExitOk;
}

int cmd_dist(const Globals& g, const std::string& a, const std::string& b, const std::string& cost_name,
             const std::string& plan_path) {
  auto run = prepare(g, false);
  CostKind cost;
  try {
    cost = parse_cost_kind(cost_name);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  const auto mu = load_or_fail(a);
  const auto nu = load_or_fail(b);
  if (mu.dim() != nu.dim()) throw ValidationError("dist: measures have different dimensions");
  const auto plan = solve_ot(mu, nu, cost);
  if (!plan_path.empty()) write_file_atomic(plan_path, plan_csv(plan));
  std::printf("%.17g\n", plan.cost_value);
  return kExitOk;
}

int cmd_couple_test(const Globals& g, const std::string& ref_path, const std::string& pop_path,
                    const std::string& cost_name, std::size_t draws) {
  auto run = prepare(g, false);
  CostKind cost;
  try {
    cost = parse_cost_kind(cost_name);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  if (draws < 1) throw ValidationError("couple-test: --draws must be >= 1");
  const auto ref = load_or_fail(ref_path);
  const auto pop = load_or_fail(pop_path);
  if (ref.dim() != pop.dim()) throw ValidationError("couple-test: measures have different dimensions");
  if ((pop.weights().array() <= 0.0).any()) throw ValidationError("couple-test: population weights must be > 0");
  open_out(run);
  const auto sampler = CouplingSampler::build(ref, pop.support(), pop.weights(), cost);
  const auto joint = empirical_joint(sampler, draws, run.seed);
  const double tv = total_variation(joint, sampler.plan().mass);
  const auto estimate = coupling_cost_check(sampler, draws, run.seed, 1);
  emit(run, "plan.csv", plan_csv(sampler.plan()));
  TransportPlan empirical;
  empirical.mass = joint;
  emit(run, "joint.csv", plan_csv(empirical));
  nlohmann::json summary{{"plan_cost", sampler.plan().cost_value},
                         {"mc_cost", estimate.mean},
                         {"mc_stderr", estimate.stderr_},
                         {"draws", draws},
                         {"tv", tv}};
  finish(run, "couple-test", summary);
  std::printf("plan cost %.17g\nmc cost %.17g +- %.3g\ntv %.17g\n", sampler.plan().cost_value, estimate.mean,
              estimate.stderr_, tv);
  return kExitOk;
}

int cmd_suite(const Globals& g, std::size_t cases, int dim) {
  auto run = prepare(g, false);
  if (run.loaded) dim = run.config().dim;
  if (dim < 1) throw ValidationError("suite: --dim must be >= 1");
  open_out(run);
  std::vector<FitnessSpec> specs{FitnessSpec::constant(1.0), FitnessSpec::gaussian_bump(1.0, 2.0, 1.0),
                                 FitnessSpec::reciprocal_rastrigin(0.5, dim)};
  if (run.loaded) specs.push_back(run.config().fitness);
  nlohmann::json summary;
  bool all = true;
  for (const auto& spec : specs) {
    const auto r = selection_stability_suite(spec, dim, cases, run.seed);
    summary["selection"].push_back(to_json(r));
    all = all && r.passed();
    std::printf("%s: %zu cases, %zu violations, max ratio %.6f <= C_F %.6f\n", r.name.c_str(), r.cases, r.violations,
                r.max_ratio, r.bound);
  }
  const auto x = crossover_lipschitz_suite({1, 2, 5}, cases, run.seed);
  summary["crossover"] = to_json(x);
  all = all && x.passed();
  std::printf("%s: %zu cases, %zu violations, max ratio %.6f\n", x.name.c_str(), x.cases, x.violations, x.max_ratio);
  summary["pass"] = all;
  finish(run, "suite", summary);
  return all ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Genetic-algorithm particle system, coupled reference system and chaos-rate experiments"};
  app.set_version_flag("--version", kArtifactVersion);
  Globals g;
  app.add_option("--config", g.config_path, "experiment config (INI)");
  app.add_option("--seed", g.seed, "overrides the config seed");
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads (default: machine parallelism)");
  app.require_subcommand(1);

  std::string reference;
  std::size_t snapshot_stride = 0;
  auto* simulate = app.add_subcommand("simulate", "GA run with reference solution and coupled trace");
  simulate->add_option("--reference", reference, "grid or ensemble")->check(CLI::IsMember({"grid", "ensemble"}));
  simulate->add_option("--snapshot-stride", snapshot_stride, "write population snapshots every k steps (0: none)");

  auto* rate_n = app.add_subcommand("rate-n", "rate of the BL error in N");
  auto* rate_tau = app.add_subcommand("rate-tau", "rate of the BL error in tau");

  std::string a, b, cost = "truncated", plan_path;
  auto* dist = app.add_subcommand("dist", "optimal transport cost between two measure files");
  dist->add_option("a", a, "first measure")->required();
  dist->add_option("b", b, "second measure")->required();
  dist->add_option("--cost", cost, "euclidean, truncated or indicator")->capture_default_str();
  dist->add_option("--plan", plan_path, "write the plan as CSV i,j,mass");

  std::string ref_path, pop_path;
  std::size_t draws = 100000;
  auto* couple = app.add_subcommand("couple-test", "coupling sampler check on a reference and a population file");
  couple->add_option("reference", ref_path, "reference measure")->required();
  couple->add_option("population", pop_path, "population measure (weights are the selection weights)")->required();
  couple->add_option("--cost", cost, "euclidean, truncated or indicator")->capture_default_str();
  couple->add_option("--draws", draws, "number of alpha draws")->capture_default_str();

  std::size_t cases = 1000;
  int dim = 1;
  auto* suite = app.add_subcommand("suite", "selection and crossover stability suites");
  suite->add_option("--cases", cases, "cases per suite and dimension")->capture_default_str();
  suite->add_option("--dim", dim, "dimension for the selection suite")->capture_default_str();

  for (auto* sub : {simulate, rate_n, rate_tau, dist, couple, suite}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const bool unknown_command =
        app.get_subcommands().empty() &&
        (dynamic_cast<const CLI::ExtrasError*>(&e) || dynamic_cast<const CLI::RequiredError*>(&e));
    if (unknown_command) {
      std::cerr << e.what() << "\n" << app.help();
      return kExitUsage;
    }
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(g, reference, snapshot_stride);
    if (rate_n->parsed()) return cmd_rate(g, true);
    if (rate_tau->parsed()) return cmd_rate(g, false);
    if (dist->parsed()) return cmd_dist(g, a, b, cost, plan_path);
    if (couple->parsed()) return cmd_couple_test(g, ref_path, pop_path, cost, draws);
    if (suite->parsed()) return cmd_suite(g, cases, dim);
  } catch (const std::invalid_argument& e) {
    // ConfigError, ValidationError and library precondition failures
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  std::cerr << app.help();
  return kExitUsage;
}
