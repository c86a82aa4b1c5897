// knapq command line: generate instances, run single solves, sweep benchmark
// grids, estimate on-device runtimes, and re-aggregate dumped runs.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "knapq/bench.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitPartialFailure = 2;

std::string default_out_dir() {
  const char* env = std::getenv("KNAPQ_OUT_DIR");
  return env && *env ? env : ".";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
}

struct GenerateArgs {
  int items = 4, knapsacks = 2;
  std::vector<long long> weights{1, 5}, values{1, 10}, capacities{4, 7};
  std::uint64_t seed = 1;
  int scenario = 0;
  bool device = false;
  std::string name;
  std::string out;
};

int run_generate(const GenerateArgs& a) {
  if (a.device) {
    knapq::save_device(knapq::heavy_hex_65(), a.out);
    std::cout << "wrote device model to " << a.out << "\n";
    return kExitOk;
  }
  knapq::KnapsackInstance inst;
  if (a.scenario > 0) {
    inst = knapq::scenario_instance(a.scenario);
  } else {
    auto range = [](const std::vector<long long>& v, const char* what) {
      if (v.size() != 2)
        throw std::invalid_argument(std::string(what) + " range must be lo,hi");
      return knapq::IntRange{v[0], v[1]};
    };
    inst = knapq::generate_instance(a.items, a.knapsacks, range(a.weights, "weight"),
                                    range(a.values, "value"),
                                    range(a.capacities, "capacity"), a.seed);
  }
  if (!a.name.empty()) inst.name = a.name;
  knapq::save_instance(inst, a.out);
  const knapq::QubitLayout lay = knapq::make_layout(inst);
  std::cout << "wrote " << inst.name << " (" << inst.num_items << " items, "
            << inst.num_knapsacks << " knapsacks, " << lay.total_qubits << " qubits) to "
            << a.out << "\n";
  return kExitOk;
}

struct SolveArgs {
  std::string instance_path;
  int scenario = 0;
  std::string solver = "qaoa";
  int layers = 1;
  long long shots = 10000;
  std::uint64_t seed = 1;
  std::string optimizer;
  std::string out;
};

int run_solve(const SolveArgs& a) {
  nlohmann::json cfg_json{
      {"instances", nlohmann::json::array()},
      {"solvers", nlohmann::json::array()},
      {"repeats", 1},
      {"seed", a.seed},
      {"dump_runs", true},
  };
  if (a.scenario > 0)
    cfg_json["instances"].push_back({{"scenario", a.scenario}});
  else
    cfg_json["instances"].push_back({{"path", a.instance_path}});
  nlohmann::json solver{{"kind", a.solver}, {"layers", a.layers}, {"shots", a.shots}};
  if (!a.optimizer.empty()) solver["optimizer"] = {{"method", a.optimizer}};
  cfg_json["solvers"].push_back(solver);

  const knapq::BenchConfig cfg = knapq::bench_config_from_json(cfg_json);
  const knapq::BenchOutcome outcome = knapq::run_bench(cfg);
  const std::string text = outcome.run_dump.dump(2) + "\n";
  if (a.out.empty())
    std::cout << text;
  else
    write_text(a.out, text);
  return outcome.partial_failure ? kExitPartialFailure : kExitOk;
}

struct BenchArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<int> repeats;
  std::optional<long long> shots;
  std::optional<int> layers;
  std::string solver_filter;
  std::string out_dir;
  std::vector<std::string> series;
  bool timings = false;
};

int run_bench_verb(const BenchArgs& a) {
  knapq::BenchConfig cfg = knapq::load_bench_config(a.config_path);
  if (a.seed) cfg.master_seed = *a.seed;
  if (a.workers) cfg.workers = *a.workers;
  if (a.repeats) cfg.repeats = *a.repeats;
  if (!a.out_dir.empty()) cfg.out_dir = a.out_dir;
  if (a.timings) cfg.timings = true;
  for (auto& s : cfg.solvers) {
    if (a.shots) s.shots = *a.shots;
    if (a.layers) s.layers = *a.layers;
  }
  if (!a.solver_filter.empty()) {
    std::vector<knapq::SolverSpec> kept;
    for (const auto& s : cfg.solvers)
      if (s.id == a.solver_filter || knapq::to_string(s.kind) == a.solver_filter)
        kept.push_back(s);
    if (kept.empty())
      throw std::invalid_argument("--solver '" + a.solver_filter +
                                  "' matches nothing in the config");
    cfg.solvers = std::move(kept);
  }

  std::filesystem::create_directories(cfg.out_dir);
  const knapq::BenchOutcome outcome = knapq::run_bench(cfg);
  const std::string csv_path =
      (std::filesystem::path(cfg.out_dir) / "results.csv").string();
  knapq::write_results_csv(outcome.table, csv_path, cfg.timings);
  std::cout << "wrote " << csv_path << " (" << outcome.table.rows.size() << " rows)\n";
  if (cfg.dump_runs) {
    const std::string dump_path =
        (std::filesystem::path(cfg.out_dir) / "runs.json").string();
    write_text(dump_path, outcome.run_dump.dump(2) + "\n");
    std::cout << "wrote " << dump_path << "\n";
  }
  for (const std::string& kind : a.series) {
    knapq::emit_plot_series(outcome.table, kind, cfg.out_dir);
    std::cout << "wrote series_" << kind << "_*.dat\n";
  }
  for (const auto& row : outcome.table.rows)
    if (!row.error.empty())
      std::cerr << "cell " << row.scenario << "/" << row.solver_id
                << " failed: " << row.error << "\n";
  return outcome.partial_failure ? kExitPartialFailure : kExitOk;
}

struct EstimateArgs {
  std::string instance_path;
  int scenario = 0;
  std::string solver = "qaoa";
  int layers = 1;
  long long shots = 10000;
  long long n_iter = 80;
  double t_meas_ns = 1000.0, t_opt_ns = 1e6, t_comm_ns = 0.0;
  std::string device_path;
  std::uint64_t seed = 1;
  bool jitter = false;
  std::string schedule_csv;
};

int run_estimate(const EstimateArgs& a) {
  const knapq::KnapsackInstance inst = a.scenario > 0
                                           ? knapq::scenario_instance(a.scenario)
                                           : knapq::load_instance(a.instance_path);
  const knapq::QuboModel model = knapq::compile(inst);
  knapq::DeviceModel device = a.device_path.empty() ? knapq::heavy_hex_65()
                                                    : knapq::load_device(a.device_path);
  if (a.jitter) knapq::apply_cx_jitter(device, knapq::derive_seed(a.seed, 0x0e));

  knapq::AnsatzSpec spec;
  spec.num_qubits = model.num_vars;
  spec.layers = a.layers;
  knapq::Circuit circuit;
  if (a.solver == "vqe") {
    spec.kind = knapq::AnsatzKind::Vqe;
    const std::vector<double> thetas(
        static_cast<std::size_t>(knapq::parameter_count(spec)), 0.1);
    circuit = knapq::vqe_circuit(spec, thetas);
  } else if (a.solver == "qaoa" || a.solver == "ws_qaoa" || a.solver == "ws_init_qaoa") {
    spec.kind = knapq::AnsatzKind::Qaoa;
    const std::vector<double> angles(static_cast<std::size_t>(a.layers), 0.1);
    circuit = knapq::qaoa_circuit(model, spec, angles, angles);
  } else {
    throw std::invalid_argument("estimate-runtime supports the circuit-based solvers");
  }

  const knapq::RoutedCircuit routed =
      knapq::route(knapq::decompose(circuit), device, a.seed);
  const knapq::ScheduledCircuit sched = knapq::schedule(routed, device);
  const double total = knapq::total_runtime_seconds(a.n_iter, a.shots, sched.t_circ_ns,
                                                    a.t_meas_ns, a.t_opt_ns, a.t_comm_ns);

  nlohmann::json out{{"instance", inst.name},
                     {"qubits", model.num_vars},
                     {"solver", a.solver},
                     {"layers", a.layers},
                     {"native_gates", sched.gates.size()},
                     {"depth", sched.depth},
                     {"swaps", routed.swap_count},
                     {"t_circ_ns", sched.t_circ_ns},
                     {"n_iter", a.n_iter},
                     {"shots", a.shots},
                     {"total_runtime_s", total}};
  std::cout << out.dump(2) << "\n";
  if (!a.schedule_csv.empty()) {
    std::ofstream csv(a.schedule_csv, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot open for writing: " + a.schedule_csv);
    knapq::write_schedule_csv(sched, csv);
  }
  return kExitOk;
}

struct ReportArgs {
  std::string runs_path;
  std::string out_dir;
  double c_lim = 0.90;
  std::vector<std::string> series;
};

int run_report(const ReportArgs& a) {
  std::ifstream in(a.runs_path);
  if (!in) throw std::invalid_argument("cannot open runs dump: " + a.runs_path);
  nlohmann::json dump;
  in >> dump;
  const knapq::BenchTable table = knapq::table_from_run_dump(dump, a.c_lim);
  std::filesystem::create_directories(a.out_dir);
  const std::string csv_path = (std::filesystem::path(a.out_dir) / "results.csv").string();
  knapq::write_results_csv(table, csv_path);
  std::cout << "wrote " << csv_path << " (" << table.rows.size() << " rows)\n";
  for (const std::string& kind : a.series) knapq::emit_plot_series(table, kind, a.out_dir);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-knapsack QUBO benchmark suite"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "write an instance (or device) file");
  generate->add_option("--items", gen.items, "number of items");
  generate->add_option("--knapsacks", gen.knapsacks, "number of knapsacks");
  generate->add_option("--weights", gen.weights, "weight range lo,hi")->delimiter(',');
  generate->add_option("--values", gen.values, "value range lo,hi")->delimiter(',');
  generate->add_option("--capacities", gen.capacities, "capacity range lo,hi")->delimiter(',');
  generate->add_option("--seed", gen.seed, "generator seed");
  generate->add_option("--scenario", gen.scenario, "bundled scenario shape 1..4");
  generate->add_flag("--device", gen.device, "write the built-in 65-qubit device model instead");
  generate->add_option("--name", gen.name, "override the instance name");
  generate->add_option("--out", gen.out, "output path")->required();

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "run one solver on one instance");
  solve_cmd->add_option("--instance", solve.instance_path, "instance file");
  solve_cmd->add_option("--scenario", solve.scenario, "bundled scenario shape 1..4");
  solve_cmd->add_option("--solver", solve.solver,
                        "qaoa | ws_qaoa | ws_init_qaoa | vqe | sa | ihs");
  solve_cmd->add_option("--layers", solve.layers, "circuit layers p");
  solve_cmd->add_option("--shots", solve.shots, "samples per run");
  solve_cmd->add_option("--seed", solve.seed, "run seed");
  solve_cmd->add_option("--optimizer", solve.optimizer, "nelder_mead | cobyla");
  solve_cmd->add_option("--out", solve.out, "write the run report here instead of stdout");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "run a (instances x solvers x repeats) grid");
  bench_cmd->add_option("--config", bench.config_path, "bench config file")->required();
  bench_cmd->add_option("--seed", bench.seed, "master seed override");
  bench_cmd->add_option("--workers", bench.workers, "concurrent runs");
  bench_cmd->add_option("--repeats", bench.repeats, "runs per cell override");
  bench_cmd->add_option("--shots", bench.shots, "shots override for all solvers");
  bench_cmd->add_option("--layers", bench.layers, "layer override for all solvers");
  bench_cmd->add_option("--solver", bench.solver_filter, "keep only this solver id or kind");
  bench_cmd->add_option("--out", bench.out_dir, "output directory")
      ->envname("KNAPQ_OUT_DIR");
  bench_cmd->add_option("--series", bench.series,
                        "also emit plot series (o90, copt, niter, tcirc, runtime)")
      ->delimiter(',');
  bench_cmd->add_flag("--timings", bench.timings,
                      "append wall-clock columns (output no longer rerun-identical)");

  EstimateArgs est;
  auto* est_cmd = app.add_subcommand("estimate-runtime",
                                     "route + schedule a circuit and apply the runtime model");
  est_cmd->add_option("--instance", est.instance_path, "instance file");
  est_cmd->add_option("--scenario", est.scenario, "bundled scenario shape 1..4");
  est_cmd->add_option("--solver", est.solver, "qaoa | ws_qaoa | ws_init_qaoa | vqe");
  est_cmd->add_option("--layers", est.layers, "circuit layers p");
  est_cmd->add_option("--shots", est.shots, "samples per iteration");
  est_cmd->add_option("--n-iter", est.n_iter, "optimizer iterations");
  est_cmd->add_option("--t-meas", est.t_meas_ns, "measurement time per shot (ns)");
  est_cmd->add_option("--t-opt", est.t_opt_ns, "classical optimization time per iteration (ns)");
  est_cmd->add_option("--t-comm", est.t_comm_ns, "communication time per iteration (ns)");
  est_cmd->add_option("--device", est.device_path, "device model file");
  est_cmd->add_option("--seed", est.seed, "routing tie-break seed");
  est_cmd->add_flag("--jitter", est.jitter, "draw per-edge CX durations from mean +- spread");
  est_cmd->add_option("--schedule-csv", est.schedule_csv, "also write the gate schedule");

  ReportArgs rep;
  auto* rep_cmd = app.add_subcommand("report", "re-aggregate a runs.json dump");
  rep_cmd->add_option("--runs", rep.runs_path, "runs.json from a bench with dump_runs")
      ->required();
  rep_cmd->add_option("--out", rep.out_dir, "output directory")->envname("KNAPQ_OUT_DIR");
  rep_cmd->add_option("--c-lim", rep.c_lim, "near-optimality threshold");
  rep_cmd->add_option("--series", rep.series, "emit plot series")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) return run_generate(gen);
    if (*solve_cmd) {
      if (solve.instance_path.empty() && solve.scenario == 0)
        throw std::invalid_argument("solve needs --instance or --scenario");
      return run_solve(solve);
    }
    if (*bench_cmd) return run_bench_verb(bench);
    if (*est_cmd) {
      if (est.instance_path.empty() && est.scenario == 0)
        throw std::invalid_argument("estimate-runtime needs --instance or --scenario");
      return run_estimate(est);
    }
    if (*rep_cmd) {
      if (rep.out_dir.empty()) rep.out_dir = default_out_dir();
      return run_report(rep);
    }
  } catch (const std::invalid_argument& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitConfigError;
  }
  return kExitOk;
}
