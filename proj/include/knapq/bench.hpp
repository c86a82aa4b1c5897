#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"
#include "knapq/annealing.hpp"
#include "knapq/circuits.hpp"
#include "knapq/exact.hpp"
#include "knapq/hwmodel.hpp"
#include "knapq/instance.hpp"
#include "knapq/metrics.hpp"
#include "knapq/qubo.hpp"
#include "knapq/variational.hpp"

namespace knapq {

enum class SolverKind { Qaoa, WsQaoa, WsInitQaoa, Vqe, Sa, Ihs };

inline const char* to_string(SolverKind k) {
  switch (k) {
    case SolverKind::Qaoa: return "qaoa";
    case SolverKind::WsQaoa: return "ws_qaoa";
    case SolverKind::WsInitQaoa: return "ws_init_qaoa";
    case SolverKind::Vqe: return "vqe";
    case SolverKind::Sa: return "sa";
    case SolverKind::Ihs: return "ihs";
  }
  return "?";
}

inline SolverKind solver_kind_from_string(const std::string& s) {
  if (s == "qaoa") return SolverKind::Qaoa;
  if (s == "ws_qaoa") return SolverKind::WsQaoa;
  if (s == "ws_init_qaoa") return SolverKind::WsInitQaoa;
  if (s == "vqe") return SolverKind::Vqe;
  if (s == "sa") return SolverKind::Sa;
  if (s == "ihs") return SolverKind::Ihs;
  throw std::invalid_argument("unknown solver kind '" + s + "'");
}

inline bool is_variational(SolverKind k) {
  return k == SolverKind::Qaoa || k == SolverKind::WsQaoa || k == SolverKind::WsInitQaoa ||
         k == SolverKind::Vqe;
}

struct SolverSpec {
  std::string id;  // row key; defaults to kind (+ "_p<layers>" for variational)
  SolverKind kind = SolverKind::Qaoa;
  int layers = 1;
  long long shots = 10000;
  OptimizerConfig optimizer;
  int relaxation_restarts = 16;
  AnnealConfig anneal;
  IhsConfig ihs;
};

struct InstanceEntry {
  // exactly one of these is active
  std::string path;
  int scenario = 0;  // 1..4
  std::optional<KnapsackInstance> inline_instance;
};

struct BenchConfig {
  std::vector<InstanceEntry> instances;
  std::vector<SolverSpec> solvers;
  int repeats = 20;  // N_run
  std::uint64_t master_seed = 1;
  std::string out_dir = ".";
  int workers = 1;
  double c_lim = 0.90;
  bool dump_runs = false;
  bool dump_distributions = false;
  bool timings = false;  // add wall-clock columns to the CSV (breaks rerun identity)
  // runtime-estimate knobs shared by all variational cells
  std::string device_path;  // empty = built-in 65-qubit heavy-hex model
  double t_meas_ns = 1000.0;
  double t_opt_ns = 1e6;
  double t_comm_ns = 0.0;
};

struct ResultRow {
  std::string scenario;
  int qubits = 0;
  std::string solver_id;
  int layers = 0;
  int n_run = 0;
  int valid_runs = 0;
  std::optional<double> c_opt_mean, c_opt_std;
  std::optional<double> o90_mean, o90_std;
  double n_iter_mean = 0.0;
  std::optional<double> t_circ_ns;
  std::optional<double> total_runtime_s;
  double wall_seconds = 0.0;
  std::string error;  // non-empty marks a failed cell

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct BenchTable {
  std::vector<ResultRow> rows;

  friend bool operator==(const BenchTable&, const BenchTable&) = default;
};

// ---- config parsing -------------------------------------------------------

inline SolverSpec solver_spec_from_json(const nlohmann::json& j) {
  SolverSpec s;
  if (!j.contains("kind")) throw std::invalid_argument("solver entry needs a 'kind'");
  s.kind = solver_kind_from_string(j.at("kind").get<std::string>());
  s.layers = j.value("layers", 1);
  s.shots = j.value("shots", 10000LL);
  s.optimizer.method.clear();  // re-defaulted per solver kind below
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    s.optimizer.method = o.value("method", std::string());
    s.optimizer.max_iter = o.value("max_iter", 10000);
    s.optimizer.tolerance = o.value("tolerance", 1e-6);
    s.optimizer.initial_step = o.value("initial_step", 0.5);
    s.optimizer.shots = o.value("shots", 0LL);
  }
  if (s.optimizer.method.empty())
    s.optimizer.method = s.kind == SolverKind::Vqe ? "cobyla" : "nelder_mead";
  s.relaxation_restarts = j.value("relaxation_restarts", 16);
  s.anneal.num_reads = j.value("reads", 1000);
  s.anneal.sweeps_per_read = j.value("sweeps", 1000);
  s.anneal.beta_min = j.value("beta_min", 0.0);
  s.anneal.beta_max = j.value("beta_max", 0.0);
  s.ihs.subproblem_size = j.value("subproblem_size", 12);
  s.ihs.max_iterations = j.value("max_iterations", 50);
  s.ihs.stall_limit = j.value("stall_limit", 10);
  s.ihs.inner_reads = j.value("inner_reads", 100);
  s.ihs.inner_sweeps = j.value("inner_sweeps", 256);
  if (j.contains("inner")) {
    const std::string inner = j.at("inner").get<std::string>();
    if (inner == "sa")
      s.ihs.inner_solver = IhsConfig::Inner::Sa;
    else if (inner == "brute_force")
      s.ihs.inner_solver = IhsConfig::Inner::BruteForce;
    else
      throw std::invalid_argument("unknown inner solver '" + inner + "'");
  }
  s.id = j.value("id", std::string());
  if (s.id.empty()) {
    s.id = to_string(s.kind);
    if (is_variational(s.kind)) s.id += "_p" + std::to_string(s.layers);
  }
  return s;
}

inline BenchConfig bench_config_from_json(const nlohmann::json& j) {
  BenchConfig cfg;
  if (!j.contains("instances") || !j.at("instances").is_array() || j.at("instances").empty())
    throw std::invalid_argument("config needs a non-empty 'instances' array");
  for (const auto& e : j.at("instances")) {
    InstanceEntry entry;
    if (e.is_string()) {
      entry.path = e.get<std::string>();
    } else if (e.contains("path")) {
      entry.path = e.at("path").get<std::string>();
    } else if (e.contains("scenario")) {
      entry.scenario = e.at("scenario").get<int>();
    } else if (e.contains("generate")) {
      const auto& g = e.at("generate");
      auto range = [&](const char* field) {
        const auto v = g.at(field).get<std::vector<long long>>();
        if (v.size() != 2) throw std::invalid_argument(std::string("generator ") + field + " must be [lo, hi]");
        return IntRange{v[0], v[1]};
      };
      entry.inline_instance = generate_instance(
          g.at("items").get<int>(), g.at("knapsacks").get<int>(), range("weights"),
          range("values"), range("capacities"), g.value("seed", 1ULL));
      if (g.contains("name")) entry.inline_instance->name = g.at("name").get<std::string>();
    } else {
      throw std::invalid_argument("instance entry needs 'path', 'scenario' or 'generate'");
    }
    cfg.instances.push_back(std::move(entry));
  }
  if (!j.contains("solvers") || !j.at("solvers").is_array() || j.at("solvers").empty())
    throw std::invalid_argument("config needs a non-empty 'solvers' array");
  for (const auto& s : j.at("solvers")) cfg.solvers.push_back(solver_spec_from_json(s));
  cfg.repeats = j.value("repeats", 20);
  if (cfg.repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  cfg.master_seed = j.value("seed", 1ULL);
  cfg.out_dir = j.value("out_dir", std::string("."));
  cfg.workers = j.value("workers", 1);
  cfg.c_lim = j.value("c_lim", 0.90);
  cfg.dump_runs = j.value("dump_runs", false);
  cfg.dump_distributions = j.value("dump_distributions", false);
  cfg.timings = j.value("timings", false);
  cfg.device_path = j.value("device", std::string());
  cfg.t_meas_ns = j.value("t_meas_ns", 1000.0);
  cfg.t_opt_ns = j.value("t_opt_ns", 1e6);
  cfg.t_comm_ns = j.value("t_comm_ns", 0.0);
  return cfg;
}

inline BenchConfig load_bench_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config file " + path + ": " + e.what());
  }
  try {
    return bench_config_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config file " + path + ": " + e.what());
  }
}

// ---- execution -------------------------------------------------------------

namespace detail {

struct CellContext {
  const KnapsackInstance* instance = nullptr;
  const QuboModel* model = nullptr;
  long long v_opt = 0;
};

inline RunReport execute_run(const CellContext& ctx, const SolverSpec& solver,
                             std::uint64_t run_seed, double c_lim,
                             bool keep_distribution = false) {
  const auto t0 = std::chrono::steady_clock::now();
  const QuboModel& model = *ctx.model;
  RunReport report;
  report.solver_id = solver.id;

  if (is_variational(solver.kind)) {
    AnsatzSpec spec;
    spec.layers = solver.layers;
    spec.num_qubits = model.num_vars;
    switch (solver.kind) {
      case SolverKind::Qaoa: spec.kind = AnsatzKind::Qaoa; break;
      case SolverKind::WsQaoa: spec.kind = AnsatzKind::WsQaoa; break;
      case SolverKind::WsInitQaoa: spec.kind = AnsatzKind::WsInitQaoa; break;
      default: spec.kind = AnsatzKind::Vqe; break;
    }
    if (is_warm_start(spec.kind))
      spec.c_star = solve_relaxation(model, solver.relaxation_restarts,
                                     derive_seed(run_seed, 0x0c5));
    auto [dist, trace] = run_variational(model, spec, solver.optimizer, solver.shots,
                                         derive_seed(run_seed, 0x0a1));
    const BestSample best = best_sample(dist, model);
    report.best_bitstring = best.bitstring;
    report.best_energy = best.energy;
    report.valid = best.valid;
    report.best_value = best.value;
    report.c_opt = closeness(dist, model, ctx.v_opt);
    report.o90 = overlap_90(dist, model, ctx.v_opt, c_lim);
    report.n_iter = trace.iterations;
    report.evaluations = trace.evaluations;
    if (keep_distribution) report.distribution = std::move(dist);
  } else if (solver.kind == SolverKind::Sa) {
    AnnealConfig anneal = solver.anneal;
    anneal.seed = run_seed;
    const SampleDistribution dist = simulated_annealing(model, anneal);
    const BestSample best = best_sample(dist, model);
    report.best_bitstring = best.bitstring;
    report.best_energy = best.energy;
    report.valid = best.valid;
    report.best_value = best.value;
    report.c_opt = closeness(dist, model, ctx.v_opt);
    report.o90 = overlap_90(dist, model, ctx.v_opt, c_lim);
    report.n_iter = anneal.num_reads;
    if (keep_distribution) report.distribution = dist;
  } else {
    report = ihs(model, solver.ihs, run_seed);
    report.solver_id = solver.id;
    if (report.valid)
      report.c_opt = 100.0 * static_cast<double>(report.best_value) /
                     static_cast<double>(ctx.v_opt);
    // a single end-state carries no meaningful overlap statistic
    report.o90 = std::nullopt;
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

// Structure-only circuit for the timing estimate; nominal angles, since the
// gate count does not depend on them.
inline std::pair<double, double> estimate_cell_runtime(const QuboModel& model,
                                                       const SolverSpec& solver,
                                                       const DeviceModel& device,
                                                       double mean_n_iter,
                                                       const BenchConfig& cfg,
                                                       std::uint64_t seed) {
  AnsatzSpec spec;
  spec.layers = solver.layers;
  spec.num_qubits = model.num_vars;
  Circuit abstract;
  if (solver.kind == SolverKind::Vqe) {
    spec.kind = AnsatzKind::Vqe;
    const std::vector<double> thetas(static_cast<std::size_t>(parameter_count(spec)), 0.1);
    abstract = vqe_circuit(spec, thetas);
  } else {
    spec.kind = AnsatzKind::Qaoa;  // WS variants share the phase-separator structure
    const std::vector<double> angles(static_cast<std::size_t>(solver.layers), 0.1);
    abstract = qaoa_circuit(model, spec, angles, angles);
  }
  const RoutedCircuit routed = route(decompose(abstract), device, seed);
  const ScheduledCircuit sched = schedule(routed, device);
  const double total = total_runtime_seconds(
      static_cast<long long>(mean_n_iter + 0.5), solver.shots, sched.t_circ_ns,
      cfg.t_meas_ns, cfg.t_opt_ns, cfg.t_comm_ns);
  return {sched.t_circ_ns, total};
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// CSV fields are comma-delimited and unquoted; scrub delimiters out of
// free-form text so emitted tables parse back to the same rows.
inline std::string sanitize_csv_field(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

}  // namespace detail

struct BenchOutcome {
  BenchTable table;
  bool partial_failure = false;
  nlohmann::json run_dump;  // populated when cfg.dump_runs
};

inline BenchOutcome run_bench(const BenchConfig& cfg) {
  // resolve instances up front; a bad entry is a config error, not a cell error
  std::vector<KnapsackInstance> instances;
  for (const InstanceEntry& e : cfg.instances) {
    if (e.inline_instance)
      instances.push_back(*e.inline_instance);
    else if (e.scenario > 0)
      instances.push_back(scenario_instance(e.scenario));
    else
      instances.push_back(load_instance(e.path));
  }
  DeviceModel device = cfg.device_path.empty() ? heavy_hex_65() : load_device(cfg.device_path);

  struct Cell {
    std::size_t instance_index;
    std::size_t solver_index;
    std::string error;
    std::vector<RunReport> runs;
  };
  std::vector<Cell> cells;
  for (std::size_t ii = 0; ii < instances.size(); ++ii)
    for (std::size_t si = 0; si < cfg.solvers.size(); ++si)
      cells.push_back({ii, si, "", std::vector<RunReport>(static_cast<std::size_t>(cfg.repeats))});

  // per-instance artifacts shared by every run in a column
  std::vector<QuboModel> models(instances.size());
  std::vector<long long> v_opts(instances.size(), 0);
  std::vector<std::string> instance_errors(instances.size());
  for (std::size_t ii = 0; ii < instances.size(); ++ii) {
    try {
      models[ii] = compile(instances[ii]);
      v_opts[ii] = branch_and_bound(instances[ii]).optimal_value;
      if (v_opts[ii] <= 0)
        throw std::runtime_error("instance '" + instances[ii].name +
                                 "' has optimal value 0; quality metrics are undefined");
    } catch (const std::exception& ex) {
      instance_errors[ii] = ex.what();
    }
  }

  struct Task {
    std::size_t cell;
    int run;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < cells.size(); ++c)
    if (instance_errors[cells[c].instance_index].empty())
      for (int r = 0; r < cfg.repeats; ++r) tasks.push_back({c, r});

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) break;
      const Task task = tasks[t];
      Cell& cell = cells[task.cell];
      const std::uint64_t run_seed =
          derive_seed(cfg.master_seed, task.cell, static_cast<std::uint64_t>(task.run));
      detail::CellContext ctx{&instances[cell.instance_index], &models[cell.instance_index],
                              v_opts[cell.instance_index]};
      RunReport& slot = cell.runs[static_cast<std::size_t>(task.run)];
      try {
        slot = detail::execute_run(ctx, cfg.solvers[cell.solver_index], run_seed, cfg.c_lim,
                                   cfg.dump_runs && cfg.dump_distributions);
      } catch (const std::exception& ex) {
        slot.solver_id = cfg.solvers[cell.solver_index].id;
        slot.error = ex.what();
      }
    }
  };
  const int nworkers = std::max(1, cfg.workers);
  if (nworkers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nworkers));
    for (int w = 0; w < nworkers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  BenchOutcome outcome;
  for (Cell& cell : cells) {
    const KnapsackInstance& inst = instances[cell.instance_index];
    const SolverSpec& solver = cfg.solvers[cell.solver_index];
    ResultRow row;
    row.scenario = detail::sanitize_csv_field(inst.name);
    row.solver_id = detail::sanitize_csv_field(solver.id);
    row.layers = is_variational(solver.kind) ? solver.layers : 0;
    row.n_run = cfg.repeats;

    const std::string& inst_err = instance_errors[cell.instance_index];
    if (!inst_err.empty()) {
      row.error = detail::sanitize_csv_field(inst_err);
    } else {
      row.qubits = models[cell.instance_index].num_vars;
      for (const RunReport& r : cell.runs)
        if (!r.error.empty()) {
          row.error = detail::sanitize_csv_field("run failed: " + r.error);
          break;
        }
    }
    if (row.error.empty()) {
      const QualityReport q = aggregate(cell.runs, cfg.c_lim);
      row.valid_runs = q.valid_runs;
      row.c_opt_mean = q.c_opt_mean;
      row.c_opt_std = q.c_opt_std;
      row.o90_mean = q.o90_mean;
      row.o90_std = q.o90_std;
      row.n_iter_mean = q.n_iter_mean;
      for (const RunReport& r : cell.runs) row.wall_seconds += r.wall_seconds;
      if (is_variational(solver.kind)) {
        try {
          const auto [t_circ, total] = detail::estimate_cell_runtime(
              models[cell.instance_index], solver, device, q.n_iter_mean, cfg,
              derive_seed(cfg.master_seed, 0xc117, cell.solver_index, cell.instance_index));
          row.t_circ_ns = t_circ;
          row.total_runtime_s = total;
        } catch (const std::exception& ex) {
          row.error =
              detail::sanitize_csv_field(std::string("runtime estimate failed: ") + ex.what());
        }
      }
    }
    if (!row.error.empty()) outcome.partial_failure = true;
    outcome.table.rows.push_back(std::move(row));

    if (cfg.dump_runs) {
      nlohmann::json cell_json{{"scenario", inst.name},
                               {"solver", solver.id},
                               {"qubits", inst_err.empty() ? models[cell.instance_index].num_vars : 0},
                               {"layers", is_variational(solver.kind) ? solver.layers : 0},
                               {"v_opt", inst_err.empty() ? v_opts[cell.instance_index] : 0},
                               {"runs", nlohmann::json::array()}};
      for (const RunReport& r : cell.runs) {
        nlohmann::json rj{{"best_bitstring", r.best_bitstring},
                          {"best_energy", r.best_energy},
                          {"valid", r.valid},
                          {"best_value", r.best_value},
                          {"n_iter", r.n_iter},
                          {"evaluations", r.evaluations},
                          {"wall_seconds", r.wall_seconds}};
        if (r.c_opt) rj["c_opt"] = *r.c_opt;
        if (r.o90) rj["o90"] = *r.o90;
        if (!r.error.empty()) rj["error"] = r.error;
        if (r.distribution) {
          nlohmann::json counts = nlohmann::json::object();
          for (const auto& [key, count] : r.distribution->counts) counts[key] = count;
          rj["counts"] = std::move(counts);
        }
        cell_json["runs"].push_back(std::move(rj));
      }
      outcome.run_dump.push_back(std::move(cell_json));
    }
  }

  std::sort(outcome.table.rows.begin(), outcome.table.rows.end(),
            [](const ResultRow& a, const ResultRow& b) {
              return std::tie(a.scenario, a.solver_id, a.layers) <
                     std::tie(b.scenario, b.solver_id, b.layers);
            });
  return outcome;
}

// ---- emission ---------------------------------------------------------------

inline void write_results_csv(const BenchTable& table, std::ostream& out,
                              bool timings = false) {
  out << "scenario,qubits,solver,layers,n_run,valid_runs,c_opt_mean,c_opt_std,"
         "o90_mean,o90_std,n_iter_mean,t_circ_ns,total_runtime_s";
  if (timings) out << ",wall_seconds";
  out << ",error\n";
  auto opt = [&](const std::optional<double>& v) {
    return v ? detail::format_double(*v) : std::string();
  };
  for (const ResultRow& r : table.rows) {
    out << r.scenario << "," << r.qubits << "," << r.solver_id << "," << r.layers << ","
        << r.n_run << "," << r.valid_runs << "," << opt(r.c_opt_mean) << ","
        << opt(r.c_opt_std) << "," << opt(r.o90_mean) << "," << opt(r.o90_std) << ","
        << detail::format_double(r.n_iter_mean) << "," << opt(r.t_circ_ns) << ","
        << opt(r.total_runtime_s);
    if (timings) out << "," << detail::format_double(r.wall_seconds);
    out << "," << r.error << "\n";
  }
}

inline void write_results_csv(const BenchTable& table, const std::string& path,
                              bool timings = false) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_results_csv(table, out, timings);
}

inline BenchTable parse_results_csv(std::istream& in) {
  BenchTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("results CSV is empty");
  const bool timings = line.find(",wall_seconds") != std::string::npos;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    fields.resize(timings ? 15 : 14);  // trailing empty error field
    ResultRow r;
    std::size_t i = 0;
    auto next = [&]() { return fields[i++]; };
    auto opt = [](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      return std::stod(s);
    };
    r.scenario = next();
    r.qubits = std::stoi(next());
    r.solver_id = next();
    r.layers = std::stoi(next());
    r.n_run = std::stoi(next());
    r.valid_runs = std::stoi(next());
    r.c_opt_mean = opt(next());
    r.c_opt_std = opt(next());
    r.o90_mean = opt(next());
    r.o90_std = opt(next());
    r.n_iter_mean = std::stod(next());
    r.t_circ_ns = opt(next());
    r.total_runtime_s = opt(next());
    if (timings) r.wall_seconds = std::stod(next());
    r.error = next();
    table.rows.push_back(std::move(r));
  }
  return table;
}

inline BenchTable parse_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open results file: " + path);
  return parse_results_csv(in);
}

// One whitespace-delimited series file per solver id: columns are qubit
// count, metric value, metric std. Cells without the metric become comment
// lines rather than zeros.
inline void emit_plot_series(const BenchTable& table, const std::string& figure_kind,
                             const std::string& out_dir) {
  struct Projection {
    std::optional<double> value, err;
  };
  auto project = [&](const ResultRow& r) -> Projection {
    if (figure_kind == "o90") return {r.o90_mean, r.o90_std};
    if (figure_kind == "copt") return {r.c_opt_mean, r.c_opt_std};
    if (figure_kind == "niter")
      return {r.n_iter_mean, 0.0};
    if (figure_kind == "tcirc") return {r.t_circ_ns, 0.0};
    if (figure_kind == "runtime") return {r.total_runtime_s, 0.0};
    throw std::invalid_argument("unknown series kind '" + figure_kind +
                                "' (expected o90, copt, niter, tcirc or runtime)");
  };

  std::map<std::string, std::vector<const ResultRow*>> by_solver;
  for (const ResultRow& r : table.rows) by_solver[r.solver_id].push_back(&r);

  std::filesystem::create_directories(out_dir);
  for (const auto& [solver, rows] : by_solver) {
    const std::string path =
        (std::filesystem::path(out_dir) / ("series_" + figure_kind + "_" + solver + ".dat"))
            .string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "# " << figure_kind << " vs qubit count for solver " << solver << "\n";
    out << "# qubits value err\n";
    std::vector<const ResultRow*> sorted = rows;
    std::sort(sorted.begin(), sorted.end(), [](const ResultRow* a, const ResultRow* b) {
      return std::tie(a->qubits, a->scenario) < std::tie(b->qubits, b->scenario);
    });
    for (const ResultRow* r : sorted) {
      if (!r->error.empty()) {
        out << "# " << r->scenario << ": cell failed: " << r->error << "\n";
        continue;
      }
      const Projection p = project(*r);
      if (!p.value) {
        out << "# " << r->scenario << ": metric not available for this solver\n";
        continue;
      }
      out << r->qubits << " " << detail::format_double(*p.value) << " "
          << detail::format_double(p.err.value_or(0.0)) << "\n";
    }
  }
}

// Rebuild aggregate rows from a runs.json dump (the `report` verb).
inline BenchTable table_from_run_dump(const nlohmann::json& dump, double c_lim = 0.90) {
  BenchTable table;
  for (const auto& cell : dump) {
    ResultRow row;
    row.scenario = cell.at("scenario").get<std::string>();
    row.solver_id = cell.at("solver").get<std::string>();
    row.qubits = cell.value("qubits", 0);
    row.layers = cell.value("layers", 0);
    std::vector<RunReport> runs;
    for (const auto& rj : cell.at("runs")) {
      RunReport r;
      r.best_bitstring = rj.value("best_bitstring", std::string());
      r.best_energy = rj.value("best_energy", 0.0);
      r.valid = rj.value("valid", false);
      r.best_value = rj.value("best_value", 0LL);
      r.n_iter = rj.value("n_iter", 0LL);
      r.evaluations = rj.value("evaluations", 0LL);
      r.wall_seconds = rj.value("wall_seconds", 0.0);
      if (rj.contains("c_opt")) r.c_opt = rj.at("c_opt").get<double>();
      if (rj.contains("o90")) r.o90 = rj.at("o90").get<double>();
      if (rj.contains("error")) r.error = rj.at("error").get<std::string>();
      runs.push_back(std::move(r));
    }
    row.n_run = static_cast<int>(runs.size());
    bool failed = false;
    for (const RunReport& r : runs)
      if (!r.error.empty()) {
        row.error = "run failed: " + r.error;
        failed = true;
        break;
      }
    if (!failed && !runs.empty()) {
      const QualityReport q = aggregate(runs, c_lim);
      row.valid_runs = q.valid_runs;
      row.c_opt_mean = q.c_opt_mean;
      row.c_opt_std = q.c_opt_std;
      row.o90_mean = q.o90_mean;
      row.o90_std = q.o90_std;
      row.n_iter_mean = q.n_iter_mean;
      for (const RunReport& r : runs) row.wall_seconds += r.wall_seconds;
    }
    table.rows.push_back(std::move(row));
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.scenario, a.solver_id, a.layers) <
           std::tie(b.scenario, b.solver_id, b.layers);
  });
  return table;
}

}  // namespace knapq
