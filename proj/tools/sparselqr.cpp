// Command-line front end: plant generation, dense synthesis, EA runs,
// baselines, analysis reports, repair demos, and experiment reproduction.
// Exit codes: 0 success, 2 usage error, 3 numerical or degenerate failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "codesign/codesign.hpp"
#include "codesign/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace codesign;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

int threads_from_env() {
  const char* env = std::getenv("CODESIGN_THREADS");
  if (!env || !*env) return 0;  // uncapped: engine picks hardware concurrency
  const long v = std::strtol(env, nullptr, 10);
  if (v <= 0) return 0;
  return static_cast<int>(v);
}

void write_json(const fs::path& path, const json& j) {
  io::write_text_atomic(path.string(), j.dump(2) + "\n");
}

json load_json(const fs::path& path) { return json::parse(io::read_text(path.string())); }

struct Stats {
  double mean = 0.0;
  double std = 0.0;
};

Stats stats_of(const std::vector<double>& xs) {
  Stats s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double acc = 0.0;
    for (double x : xs) acc += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(acc / static_cast<double>(xs.size() - 1));
  }
  return s;
}

json stats_json(const Stats& s) { return {{"mean", s.mean}, {"std", s.std}}; }

Gene dense_gene(const Plant& p, const Mat& K_d) {
  Gene g;
  g.ell = count_nonzero(K_d);
  g.actuator_mask.assign(static_cast<std::size_t>(p.nu()), 1);
  g.sensor_mask.assign(static_cast<std::size_t>(p.nx()), 1);
  return g;
}

// Dense gain with every cross-subsystem block zeroed; unstable loops and the
// link count zero are both part of the contract.
EvaluatedController baseline_diagonal(const Plant& p, const Mat& K_d, const Weights& w,
                                      double J_dense) {
  const Mat K = diagonal_truncation(K_d, p);
  EvaluatedController out;
  out.gene = dense_gene(p, K_d);
  out.K_s = K;
  out.counts = structural_counts(K, p);
  const Mat Q = Mat::Identity(p.nx(), p.nx());
  const Mat R = Mat::Identity(p.nu(), p.nu());
  const double j = lqr_cost(p.A, p.B, Q, R, K);
  out.stable = std::isfinite(j);
  out.j_ratio = out.stable ? j / J_dense : kInf;
  out.j_ea = out.stable ? out.j_ratio + structural_cost(out.counts, w) : kInf;
  return out;
}

struct PlantSpec {
  std::string kind = "grid";
  int rows = 5;
  int cols = 5;
  std::int64_t seed = 1;
  std::optional<double> target_radius;
};

Plant build_plant(const PlantSpec& spec) {
  if (spec.kind == "grid") {
    if (spec.rows < 1 || spec.cols < 1)
      throw std::invalid_argument("grid dimensions must be at least 1x1");
    if (spec.target_radius)
      return make_grid_swing(spec.rows, spec.cols, spec.seed, *spec.target_radius);
    return make_grid_swing(spec.rows, spec.cols, spec.seed);
  }
  if (spec.kind == "ieee13")
    return make_ieee13(spec.seed, spec.target_radius ? *spec.target_radius : 1.0);
  throw std::invalid_argument("unknown plant kind '" + spec.kind + "'");
}

json ea_config_json(const EaConfig& cfg, const RepairConfig& rc) {
  return {{"n_p", cfg.n_p},
          {"g_max", cfg.g_max},
          {"p_c", cfg.p_c},
          {"p_m", cfg.p_m},
          {"n_e", cfg.n_e},
          {"tau", cfg.tau},
          {"d", cfg.d},
          {"weights", {{"w_a", cfg.weights.w_a}, {"w_s", cfg.weights.w_s}, {"w_c", cfg.weights.w_c}}},
          {"seed", cfg.seed},
          {"repair_enabled", cfg.repair_enabled},
          {"repair", {{"rho_star", rc.rho_star}, {"max_iter", rc.max_iter}}}};
}

std::uint64_t run_config_hash(const Plant& p, const EaConfig& cfg, const RepairConfig& rc) {
  json j;
  j["plant"] = {{"kind", p.kind},
                {"seed", p.seed},
                {"target_radius", p.target_radius},
                {"n_x", p.nx()},
                {"n_u", p.nu()}};
  j["ea"] = ea_config_json(cfg, rc);
  return io::hash_of_json(j);
}

struct SingleRun {
  EaRunResult result;
  EvaluatedController dense_eval;
  EvaluatedController diagonal_eval;
  std::vector<double> normalized;  // best_cost / J_EA(dense gene), per generation
  double wall_seconds = 0.0;
  std::uint64_t config_hash = 0;
};

SingleRun run_once(const Plant& plant, const EaConfig& cfg, const RepairConfig& rc,
                   int threads) {
  SingleRun run;
  run.config_hash = run_config_hash(plant, cfg, rc);
  const auto t0 = std::chrono::steady_clock::now();
  EaEngine engine(plant, cfg, rc, threads);
  run.result = engine.run();
  run.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const Mat& K_d = run.result.dense.K_dense;
  const double J_dense = run.result.dense.J_dense;
  run.dense_eval = evaluate(dense_gene(plant, K_d), plant, K_d, cfg.weights, J_dense);
  run.diagonal_eval = baseline_diagonal(plant, K_d, cfg.weights, J_dense);
  run.normalized.reserve(run.result.trace.size());
  for (const auto& row : run.result.trace)
    run.normalized.push_back(row.best_cost / run.dense_eval.j_ea);
  return run;
}

json run_report_json(const Plant& plant, const EaConfig& cfg, const RepairConfig& rc,
                     const SingleRun& run, const std::vector<json>& extra_baselines) {
  json rep;
  rep["final"] = io::controller_to_json(run.result.best, run.config_hash, cfg.seed);
  rep["baselines"] = {
      {"dense",
       {{"j_ea", io::num_or_inf(run.dense_eval.j_ea)}, {"normalized", 1.0}}},
      {"diagonal",
       {{"j_ea", io::num_or_inf(run.diagonal_eval.j_ea)},
        {"normalized", io::num_or_inf(run.diagonal_eval.j_ea / run.dense_eval.j_ea)},
        {"n_comm", run.diagonal_eval.counts.n_comm},
        {"stable", run.diagonal_eval.stable}}}};
  if (!extra_baselines.empty()) rep["extra_baselines"] = extra_baselines;
  json traj = json::array();
  for (double v : run.normalized) traj.push_back(io::num_or_inf(v));
  rep["normalized_trajectory"] = traj;
  rep["analysis"] = "analysis.json";
  rep["wall_clock_seconds"] = run.wall_seconds;
  rep["config"] = ea_config_json(cfg, rc);
  rep["config_hash"] = io::hash_string(run.config_hash);
  rep["seed"] = cfg.seed;
  return rep;
}

// Magnitude-truncation sweeps kept behind a flag and out of default reports.
std::vector<json> extra_truncation_baselines(const Plant& plant, const SingleRun& run,
                                             const Weights& w) {
  std::vector<json> out;
  const Mat& K_d = run.result.dense.K_dense;
  const double J_dense = run.result.dense.J_dense;
  const int ell_max = plant.nu() * plant.nx();
  const Mat Q = Mat::Identity(plant.nx(), plant.nx());
  const Mat R = Mat::Identity(plant.nu(), plant.nu());
  for (int decile = 1; decile <= 9; ++decile) {
    const int ell = std::max(1, ell_max * decile / 10);
    const Mat K = prune_by_magnitude(K_d, ell);
    const double j = lqr_cost(plant.A, plant.B, Q, R, K);
    const StructuralCounts counts = structural_counts(K, plant);
    const double j_ea =
        std::isfinite(j) ? j / J_dense + structural_cost(counts, w) : kInf;
    out.push_back({{"ell", ell},
                   {"j_ea", io::num_or_inf(j_ea)},
                   {"normalized", io::num_or_inf(j_ea / run.dense_eval.j_ea)},
                   {"stable", std::isfinite(j)}});
  }
  return out;
}

void write_run_artifacts(const fs::path& dir, const Plant& plant, const EaConfig& cfg,
                         const RepairConfig& rc, const SingleRun& run,
                         const std::vector<json>& extra_baselines) {
  fs::create_directories(dir);
  json plant_j = io::plant_to_json(plant);
  plant_j["metadata"]["config_hash"] = io::hash_string(run.config_hash);
  write_json(dir / "plant.json", plant_j);
  io::write_text_atomic((dir / "trace.csv").string(),
                        io::trace_to_csv(run.result.trace, run.config_hash, cfg.seed));
  write_json(dir / "controller.json",
             io::controller_to_json(run.result.best, run.config_hash, cfg.seed));
  write_json(dir / "report.json",
             run_report_json(plant, cfg, rc, run, extra_baselines));
}

double pct_improvement(double candidate, double baseline) {
  return (1.0 - candidate / baseline) * 100.0;
}

// ---------------------------------------------------------------------------
// gen-plant

struct GenPlantArgs {
  PlantSpec spec;
  double target = 0.0;
  bool target_set = false;
  std::string out;
};

int cmd_gen_plant(GenPlantArgs& a) {
  if (a.target_set) a.spec.target_radius = a.target;
  const Plant p = build_plant(a.spec);
  json cfg = {{"cmd", "gen-plant"},
              {"kind", a.spec.kind},
              {"rows", a.spec.rows},
              {"cols", a.spec.cols},
              {"seed", a.spec.seed},
              {"target_radius", p.target_radius}};
  json j = io::plant_to_json(p);
  j["metadata"]["config_hash"] = io::hash_string(io::hash_of_json(cfg));
  write_json(a.out, j);
  std::printf("wrote %s: kind=%s N_x=%d N_u=%d subsystems=%d\n", a.out.c_str(),
              p.kind.c_str(), p.nx(), p.nu(), p.n_subsystems);
  return 0;
}

// ---------------------------------------------------------------------------
// solve-lqr

int cmd_solve_lqr(const std::string& plant_path, const std::string& out) {
  const Plant p = io::plant_from_json(load_json(plant_path));
  const LqrSolution sol = solve_lqr(p);
  json cfg = {{"cmd", "solve-lqr"}, {"plant", plant_path}, {"seed", p.seed}};
  json j;
  j["rows"] = p.nu();
  j["cols"] = p.nx();
  j["K_dense"] = io::mat_to_json(sol.K_dense);
  j["J_dense"] = sol.J_dense;
  j["closed_loop_radius"] = spectral_radius(p.A + p.B * sol.K_dense);
  j["config_hash"] = io::hash_string(io::hash_of_json(cfg));
  j["seed"] = p.seed;
  write_json(out, j);
  std::printf("wrote %s: J_dense=%.6g radius=%.6g\n", out.c_str(), sol.J_dense,
              j["closed_loop_radius"].get<double>());
  return 0;
}

// ---------------------------------------------------------------------------
// run-ea

struct RunEaArgs {
  std::string plant_path;
  std::string config_path;
  std::string out;
  EaConfig cfg;
  RepairConfig repair_cfg;
  int n_seeds = 1;
  bool baselines = false;
  bool extra_baselines = false;
};

void apply_config_file(const json& file, EaConfig& cfg, RepairConfig& rc,
                       std::optional<PlantSpec>& plant_spec) {
  if (file.contains("plant")) {
    const auto& p = file.at("plant");
    PlantSpec s;
    s.kind = p.value("kind", s.kind);
    s.rows = p.value("rows", s.rows);
    s.cols = p.value("cols", s.cols);
    s.seed = p.value("seed", s.seed);
    if (p.contains("target_radius")) s.target_radius = p.at("target_radius").get<double>();
    plant_spec = s;
  }
  cfg.n_p = file.value("n_p", cfg.n_p);
  cfg.g_max = file.value("g_max", cfg.g_max);
  cfg.p_c = file.value("p_c", cfg.p_c);
  cfg.p_m = file.value("p_m", cfg.p_m);
  cfg.n_e = file.value("n_e", cfg.n_e);
  cfg.tau = file.value("tau", cfg.tau);
  cfg.d = file.value("d", cfg.d);
  cfg.seed = file.value("seed", cfg.seed);
  cfg.repair_enabled = file.value("repair_enabled", cfg.repair_enabled);
  if (file.contains("weights")) {
    const auto& w = file.at("weights");
    cfg.weights.w_a = w.value("w_a", cfg.weights.w_a);
    cfg.weights.w_s = w.value("w_s", cfg.weights.w_s);
    cfg.weights.w_c = w.value("w_c", cfg.weights.w_c);
  }
  if (file.contains("repair")) {
    const auto& r = file.at("repair");
    rc.rho_star = r.value("rho_star", rc.rho_star);
    rc.max_iter = r.value("max_iter", rc.max_iter);
  }
}

int cmd_run_ea(RunEaArgs& a) {
  if (a.plant_path.empty()) {
    std::fprintf(stderr, "run-ea: no plant given (use --plant or a config file)\n");
    return kExitUsage;
  }
  const Plant plant = io::plant_from_json(load_json(a.plant_path));
  const int threads = threads_from_env();
  const fs::path out(a.out);

  if (a.n_seeds <= 1) {
    SingleRun run = run_once(plant, a.cfg, a.repair_cfg, threads);
    std::vector<json> extras;
    if (a.extra_baselines) extras = extra_truncation_baselines(plant, run, a.cfg.weights);
    write_run_artifacts(out, plant, a.cfg, a.repair_cfg, run, extras);
    std::printf("final j_ea=%s normalized=%.6g wall=%.2fs\n",
                io::fmt_double(run.result.best.j_ea).c_str(),
                run.result.best.j_ea / run.dense_eval.j_ea, run.wall_seconds);
    if (a.baselines) {
      std::printf("baseline dense   j_ea=%s\n", io::fmt_double(run.dense_eval.j_ea).c_str());
      std::printf("baseline diagonal j_ea=%s\n",
                  io::fmt_double(run.diagonal_eval.j_ea).c_str());
    }
    return 0;
  }

  std::vector<double> finals, final_norm;
  std::vector<std::vector<double>> per_gen;
  json seed_rows = json::array();
  std::uint64_t hash = 0;
  int g_max = a.cfg.g_max;
  for (int k = 0; k < a.n_seeds; ++k) {
    EaConfig cfg = a.cfg;
    cfg.seed = a.cfg.seed + static_cast<std::uint64_t>(k);
    const fs::path sub = out / ("seed_" + std::to_string(cfg.seed));
    try {
      SingleRun run = run_once(plant, cfg, a.repair_cfg, threads);
      std::vector<json> extras;
      if (a.extra_baselines) extras = extra_truncation_baselines(plant, run, cfg.weights);
      write_run_artifacts(sub, plant, cfg, a.repair_cfg, run, extras);
      hash = run.config_hash;
      finals.push_back(run.result.best.j_ea);
      final_norm.push_back(run.result.best.j_ea / run.dense_eval.j_ea);
      per_gen.push_back(run.normalized);
      seed_rows.push_back({{"seed", cfg.seed},
                           {"j_ea", io::num_or_inf(run.result.best.j_ea)},
                           {"normalized", io::num_or_inf(final_norm.back())}});
    } catch (const std::exception& e) {
      seed_rows.push_back({{"seed", cfg.seed}, {"error", e.what()}});
      std::fprintf(stderr, "seed %llu failed: %s\n",
                   static_cast<unsigned long long>(cfg.seed), e.what());
    }
  }
  if (finals.empty()) {
    std::fprintf(stderr, "run-ea: every seed failed\n");
    return kExitNumerical;
  }
  json mean_curve = json::array(), std_curve = json::array();
  for (int t = 0; t < g_max; ++t) {
    std::vector<double> col;
    for (const auto& curve : per_gen)
      if (t < static_cast<int>(curve.size()) && std::isfinite(curve[t]))
        col.push_back(curve[t]);
    const Stats s = stats_of(col);
    mean_curve.push_back(s.mean);
    std_curve.push_back(s.std);
  }
  json summary;
  summary["n_seeds"] = a.n_seeds;
  summary["seeds"] = seed_rows;
  summary["final_j_ea"] = stats_json(stats_of(finals));
  summary["final_normalized"] = stats_json(stats_of(final_norm));
  summary["per_generation_normalized"] = {{"mean", mean_curve}, {"std", std_curve}};
  summary["config_hash"] = io::hash_string(hash);
  summary["seed"] = a.cfg.seed;
  fs::create_directories(out);
  write_json(out / "summary.json", summary);
  std::printf("%d/%d seeds finished: final normalized %.4g +/- %.4g\n",
              static_cast<int>(finals.size()), a.n_seeds,
              summary["final_normalized"]["mean"].get<double>(),
              summary["final_normalized"]["std"].get<double>());
  return 0;
}

// ---------------------------------------------------------------------------
// analyze

int cmd_analyze(const std::string& run_dir, const std::string& out_dir) {
  const fs::path run(run_dir);
  const fs::path out = out_dir.empty() ? run : fs::path(out_dir);
  const Plant plant = io::plant_from_json(load_json(run / "plant.json"));
  const json report = load_json(run / "report.json");
  const auto rows = io::trace_from_csv(io::read_text((run / "trace.csv").string()));
  if (rows.empty()) throw std::runtime_error("trace.csv has no generations");

  const auto& cfg_j = report.at("config");
  const std::uint64_t seed = cfg_j.at("seed").get<std::uint64_t>();
  Weights w;
  w.w_a = cfg_j.at("weights").at("w_a").get<double>();
  w.w_s = cfg_j.at("weights").at("w_s").get<double>();
  w.w_c = cfg_j.at("weights").at("w_c").get<double>();
  const int n_p = cfg_j.at("n_p").get<int>();
  const int d = cfg_j.at("d").get<int>();
  const int n_e = cfg_j.at("n_e").get<int>();
  const double p_m = cfg_j.at("p_m").get<double>();

  json cfg_hash_src = {{"cmd", "analyze"}, {"run_config", cfg_j}};
  const std::uint64_t hash = io::hash_of_json(cfg_hash_src);

  const SystemGraph graph = build_graph(plant);
  const LqrSolution sol = solve_lqr(plant);
  fs::create_directories(out);

  AnalysisReport rep;
  try {
    rep = build_analysis_report(plant, graph, sol.K_dense, sol.J_dense, w, n_p, d, n_e,
                                40, seed);
  } catch (const std::exception& e) {
    json err = {{"error", e.what()},
                {"config_hash", io::hash_string(hash)},
                {"seed", seed}};
    write_json(out / "analysis_error.json", err);
    std::fprintf(stderr, "analyze: %s\n", e.what());
    return kExitNumerical;
  }

  json rep_j = io::analysis_report_to_json(rep, hash, seed);

  // diagnostic constants the predicted curve intentionally omits
  const double stab_mult = std::pow(1.0 - p_m, plant.nu() + plant.nx());
  json diag;
  diag["prop2_stability_multiplier"] = stab_mult;
  diag["prop2_pimp_per_offspring"] =
      stab_mult / (static_cast<double>(n_p) * (2 * d + 1));
  const Mat K_s = io::mat_from_json(report.at("final").at("K_s"), plant.nu(), plant.nx());
  const double sigma = (K_s - sol.K_dense).norm();
  const double j_final = lqr_cost(plant.A, plant.B, Mat::Identity(plant.nx(), plant.nx()),
                                  Mat::Identity(plant.nu(), plant.nu()), K_s);
  if (std::isfinite(j_final) && sigma > 0.0) {
    const double denom = sigma / (1.0 - rep.margin.beta * rep.margin.beta);
    diag["remark2_suboptimality_ratio"] = (j_final - sol.J_dense) / denom;
  } else {
    diag["remark2_suboptimality_ratio"] = nullptr;
  }
  rep_j["diagnostics"] = diag;
  write_json(out / "analysis.json", rep_j);
  io::write_text_atomic((out / "phi.csv").string(), io::phi_table_csv(rep.phi, hash, seed));

  std::vector<int> h_seq;
  h_seq.reserve(rows.size());
  for (const auto& r : rows) h_seq.push_back(r.h_t);
  const auto curve = predicted_curve(h_seq, rows.front().best_cost, rep.fit, rep.L_J,
                                     rep.J_dense, w.w_c, n_p, d, n_e, plant.nu(),
                                     plant.nx());
  io::write_text_atomic((out / "predicted.csv").string(),
                        io::predicted_curve_csv(curve, hash, seed));
  std::printf("analysis: h*=%d sigma_crit=%.4g h_stab=%d ell_stab=%d L_J=%.4g\n",
              rep.h_star, rep.margin.sigma_crit, rep.depth.h_stab, rep.depth.ell_stab,
              rep.L_J);
  return 0;
}

// ---------------------------------------------------------------------------
// repair-demo

struct RepairDemoArgs {
  std::string plant_path;
  int ell = 0;
  RepairConfig cfg;
  std::string out = "repair_demo.json";
};

int cmd_repair_demo(const RepairDemoArgs& a) {
  Mat A, B, K;
  std::vector<std::uint8_t> support;
  std::int64_t seed = 0;
  json cfg_src = {{"cmd", "repair-demo"},
                  {"rho_star", a.cfg.rho_star},
                  {"max_iter", a.cfg.max_iter}};
  if (a.plant_path.empty()) {
    // scalar walkthrough: one unstable mode, one input, start from K = 0
    A = Mat::Constant(1, 1, 1.2);
    B = Mat::Constant(1, 1, 1.0);
    K = Mat::Zero(1, 1);
    support.assign(1, 1);
    cfg_src["demo"] = "scalar";
  } else {
    const Plant p = io::plant_from_json(load_json(a.plant_path));
    const LqrSolution sol = solve_lqr(p);
    const int ell_max = p.nu() * p.nx();
    const int ell = a.ell > 0 ? std::min(a.ell, ell_max) : std::max(1, ell_max / 4);
    Gene g = dense_gene(p, sol.K_dense);
    g.ell = ell;
    A = p.A;
    B = p.B;
    K = realize(g, sol.K_dense);
    support.clear();
    for (int u = 0; u < K.rows(); ++u)
      for (int c = 0; c < K.cols(); ++c)
        support.push_back(K(u, c) != 0.0 ? 1 : 0);
    seed = p.seed;
    cfg_src["demo"] = "plant";
    cfg_src["ell"] = ell;
    cfg_src["plant_seed"] = seed;
  }
  const double initial = gershgorin_rowsums(A + B * K).maxCoeff();
  const RepairResult r = repair_controller(A, B, K, support, a.cfg);
  const std::uint64_t hash = io::hash_of_json(cfg_src);
  write_json(a.out, io::repair_to_json(initial, r, hash, static_cast<std::uint64_t>(seed)));
  std::printf("repair: rowsum %.6g -> %.6g in %d steps, succeeded=%s, schur_stable=%s\n",
              initial, r.row_sum, r.iterations, r.succeeded ? "true" : "false",
              r.schur_stable ? "true" : "false");
  return 0;
}

// ---------------------------------------------------------------------------
// repro

struct ReproArgs {
  std::string experiment;
  std::string out;
  int n_seeds = 10;
  int generations = 150;
  std::uint64_t seed = 1;
};

struct ArmOutcome {
  std::vector<double> improvement_dense;
  std::vector<double> improvement_diag;
  std::vector<double> final_norm;
  std::vector<std::vector<double>> unstable_curves;
  json errors = json::array();
  std::vector<SingleRun> runs;
};

ArmOutcome run_arm(const Plant& plant, EaConfig base, const RepairConfig& rc,
                   const fs::path& dir, int n_seeds, int threads) {
  ArmOutcome arm;
  for (int k = 0; k < n_seeds; ++k) {
    EaConfig cfg = base;
    cfg.seed = base.seed + static_cast<std::uint64_t>(k);
    try {
      SingleRun run = run_once(plant, cfg, rc, threads);
      write_run_artifacts(dir / ("seed_" + std::to_string(cfg.seed)), plant, cfg, rc, run,
                          {});
      arm.improvement_dense.push_back(
          pct_improvement(run.result.best.j_ea, run.dense_eval.j_ea));
      if (run.diagonal_eval.stable)
        arm.improvement_diag.push_back(
            pct_improvement(run.result.best.j_ea, run.diagonal_eval.j_ea));
      arm.final_norm.push_back(run.result.best.j_ea / run.dense_eval.j_ea);
      std::vector<double> unstable;
      for (const auto& row : run.result.trace)
        unstable.push_back(static_cast<double>(row.n_unstable));
      arm.unstable_curves.push_back(std::move(unstable));
      arm.runs.push_back(std::move(run));
    } catch (const std::exception& e) {
      arm.errors.push_back({{"seed", cfg.seed}, {"error", e.what()}});
      std::fprintf(stderr, "seed %llu failed: %s\n",
                   static_cast<unsigned long long>(cfg.seed), e.what());
    }
  }
  return arm;
}

json arm_summary(const ArmOutcome& arm, int early_window) {
  json j;
  j["n_completed"] = arm.final_norm.size();
  j["improvement_vs_dense_pct"] = stats_json(stats_of(arm.improvement_dense));
  if (!arm.improvement_diag.empty())
    j["improvement_vs_diagonal_pct"] = stats_json(stats_of(arm.improvement_diag));
  else
    j["improvement_vs_diagonal_pct"] = nullptr;
  j["final_normalized"] = stats_json(stats_of(arm.final_norm));
  std::vector<double> early;
  std::size_t max_len = 0;
  for (const auto& c : arm.unstable_curves) max_len = std::max(max_len, c.size());
  json mean_unstable = json::array();
  for (std::size_t t = 0; t < max_len; ++t) {
    std::vector<double> col;
    for (const auto& c : arm.unstable_curves)
      if (t < c.size()) col.push_back(c[t]);
    mean_unstable.push_back(stats_of(col).mean);
    if (t < static_cast<std::size_t>(early_window))
      for (const auto& c : arm.unstable_curves)
        if (t < c.size()) early.push_back(c[t]);
  }
  j["mean_unstable_per_generation"] = mean_unstable;
  j["early_unstable_mean"] = stats_of(early).mean;
  j["errors"] = arm.errors;
  return j;
}

int cmd_repro(const ReproArgs& a) {
  const int threads = threads_from_env();
  const fs::path out(a.out);
  fs::create_directories(out);

  EaConfig cfg;  // paper defaults
  cfg.g_max = a.generations;
  cfg.seed = a.seed;
  RepairConfig rc;

  json summary;
  summary["experiment"] = a.experiment;
  summary["n_seeds"] = a.n_seeds;
  json cfg_src = {{"cmd", "repro"},
                  {"experiment", a.experiment},
                  {"n_seeds", a.n_seeds},
                  {"generations", a.generations},
                  {"seed", a.seed}};
  summary["config_hash"] = io::hash_string(io::hash_of_json(cfg_src));
  summary["seed"] = a.seed;

  if (a.experiment == "unstable") {
    const Plant plant = make_grid_swing(5, 5, 1, 1.1);
    write_json(out / "plant.json", io::plant_to_json(plant));
    EaConfig no_repair = cfg;
    EaConfig with_repair = cfg;
    with_repair.repair_enabled = true;
    std::printf("running EA without repairs (%d seeds)...\n", a.n_seeds);
    const ArmOutcome plain = run_arm(plant, no_repair, rc, out / "without_repair",
                                     a.n_seeds, threads);
    std::printf("running EA with repairs (%d seeds)...\n", a.n_seeds);
    const ArmOutcome repaired = run_arm(plant, with_repair, rc, out / "with_repair",
                                        a.n_seeds, threads);
    summary["without_repair"] = arm_summary(plain, 10);
    summary["with_repair"] = arm_summary(repaired, 10);
    write_json(out / "summary.json", summary);
    auto show = [](const char* name, const json& s) {
      std::printf("%-16s improvement vs dense: %.1f%% +/- %.1f%%  early unstable/gen: %.2f\n",
                  name, s["improvement_vs_dense_pct"]["mean"].get<double>(),
                  s["improvement_vs_dense_pct"]["std"].get<double>(),
                  s["early_unstable_mean"].get<double>());
    };
    show("without repair", summary["without_repair"]);
    show("with repair", summary["with_repair"]);
    return 0;
  }

  Plant plant;
  if (a.experiment == "grid5")
    plant = make_grid_swing(5, 5, 1);
  else if (a.experiment == "grid7")
    plant = make_grid_swing(7, 7, 1);
  else if (a.experiment == "ieee13")
    plant = make_ieee13(1, 1.0);
  else
    throw std::invalid_argument("unknown experiment '" + a.experiment + "'");
  write_json(out / "plant.json", io::plant_to_json(plant));

  std::printf("running %s (%d seeds, %d generations)...\n", a.experiment.c_str(),
              a.n_seeds, a.generations);
  const ArmOutcome arm = run_arm(plant, cfg, rc, out, a.n_seeds, threads);
  if (arm.final_norm.empty()) {
    std::fprintf(stderr, "repro: every seed failed\n");
    return kExitNumerical;
  }
  json s = arm_summary(arm, 10);
  // sparsity of the best completed run
  const SingleRun* best = nullptr;
  for (const auto& run : arm.runs)
    if (!best || run.result.best.j_ea < best->result.best.j_ea) best = &run;
  s["final_sparsity"] = {{"n_act", best->result.best.counts.n_act},
                         {"n_sens", best->result.best.counts.n_sens},
                         {"n_comm", best->result.best.counts.n_comm}};
  summary["results"] = s;
  write_json(out / "summary.json", summary);
  std::printf("improvement vs dense: %.1f%% +/- %.1f%%\n",
              s["improvement_vs_dense_pct"]["mean"].get<double>(),
              s["improvement_vs_dense_pct"]["std"].get<double>());
  if (!s["improvement_vs_diagonal_pct"].is_null())
    std::printf("improvement vs diagonal: %.1f%% +/- %.1f%%\n",
                s["improvement_vs_diagonal_pct"]["mean"].get<double>(),
                s["improvement_vs_diagonal_pct"]["std"].get<double>());
  else
    std::printf("improvement vs diagonal: baseline unstable, omitted\n");
  std::printf("final sparsity: %d actuators, %d sensors, %d links\n",
              s["final_sparsity"]["n_act"].get<int>(),
              s["final_sparsity"]["n_sens"].get<int>(),
              s["final_sparsity"]["n_comm"].get<int>());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse LQR co-design toolkit"};
  app.require_subcommand(1);

  // gen-plant
  GenPlantArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-plant", "generate a plant model file");
  gen_cmd->add_option("--kind", gen.spec.kind, "plant family: grid or ieee13")
      ->required()
      ->check(CLI::IsMember({"grid", "ieee13"}));
  gen_cmd->add_option("--rows", gen.spec.rows, "grid rows")->check(CLI::Range(1, 1000));
  gen_cmd->add_option("--cols", gen.spec.cols, "grid cols")->check(CLI::Range(1, 1000));
  gen_cmd->add_option("--seed", gen.spec.seed, "parameter seed");
  auto* gen_target = gen_cmd->add_option("--target-radius", gen.target,
                                         "open-loop spectral radius");
  gen_cmd->add_option("--out", gen.out, "output JSON path")->required();

  // solve-lqr
  std::string lqr_plant, lqr_out;
  auto* lqr_cmd = app.add_subcommand("solve-lqr", "dense LQR synthesis for a plant file");
  lqr_cmd->add_option("--plant", lqr_plant, "plant JSON")->required()
      ->check(CLI::ExistingFile);
  lqr_cmd->add_option("--out", lqr_out, "output JSON path")->required();

  // run-ea
  RunEaArgs ea;
  auto* ea_cmd = app.add_subcommand("run-ea", "evolutionary co-design run");
  ea_cmd->add_option("--plant", ea.plant_path, "plant JSON")->check(CLI::ExistingFile);
  ea_cmd->add_option("--config", ea.config_path, "run config JSON; flags override")
      ->check(CLI::ExistingFile);
  ea_cmd->add_option("--out", ea.out, "output directory")->required();
  auto* pop_opt = ea_cmd->add_option("--pop", ea.cfg.n_p, "population size");
  auto* gen_opt = ea_cmd->add_option("--generations", ea.cfg.g_max, "generation count");
  auto* pc_opt = ea_cmd->add_option("--pc", ea.cfg.p_c, "crossover probability");
  auto* pm_opt = ea_cmd->add_option("--pm", ea.cfg.p_m, "mutation probability");
  auto* el_opt = ea_cmd->add_option("--elites", ea.cfg.n_e, "elite count");
  auto* tau_opt = ea_cmd->add_option("--tau", ea.cfg.tau, "selection temperature");
  auto* d_opt = ea_cmd->add_option("--d", ea.cfg.d, "link mutation range");
  auto* wa_opt = ea_cmd->add_option("--wa", ea.cfg.weights.w_a, "actuator weight");
  auto* ws_opt = ea_cmd->add_option("--ws", ea.cfg.weights.w_s, "sensor weight");
  auto* wc_opt = ea_cmd->add_option("--wc", ea.cfg.weights.w_c, "link weight");
  auto* seed_opt = ea_cmd->add_option("--seed", ea.cfg.seed, "EA seed");
  auto* rep_opt = ea_cmd->add_flag("--repair", ea.cfg.repair_enabled,
                                   "repair unstable offspring");
  auto* rho_opt = ea_cmd->add_option("--rho-star", ea.repair_cfg.rho_star,
                                     "repair row-sum target");
  auto* ri_opt = ea_cmd->add_option("--repair-iters", ea.repair_cfg.max_iter,
                                    "repair iteration cap");
  ea_cmd->add_option("--seeds", ea.n_seeds, "number of sub-runs")->check(CLI::Range(1, 10000));
  ea_cmd->add_flag("--baselines", ea.baselines, "print dense and diagonal baselines");
  ea_cmd->add_flag("--extra-baselines", ea.extra_baselines,
                   "record intermediate magnitude truncations");

  // analyze
  std::string an_run, an_out;
  auto* an_cmd = app.add_subcommand("analyze", "certificates and convergence prediction");
  an_cmd->add_option("--run", an_run, "completed run directory")->required()
      ->check(CLI::ExistingDirectory);
  an_cmd->add_option("--out", an_out, "output directory (default: run directory)");

  // repair-demo
  RepairDemoArgs rd;
  auto* rd_cmd = app.add_subcommand("repair-demo", "Gershgorin repair walkthrough");
  rd_cmd->add_option("--plant", rd.plant_path, "plant JSON (default: scalar demo)")
      ->check(CLI::ExistingFile);
  rd_cmd->add_option("--ell", rd.ell, "kept links for the plant demo");
  rd_cmd->add_option("--rho-star", rd.cfg.rho_star, "row-sum target");
  rd_cmd->add_option("--max-iter", rd.cfg.max_iter, "iteration cap");
  rd_cmd->add_option("--out", rd.out, "output JSON path");

  // repro
  ReproArgs rp;
  auto* rp_cmd = app.add_subcommand("repro", "reproduce a named experiment");
  rp_cmd->add_option("experiment", rp.experiment, "grid5, grid7, ieee13, or unstable")
      ->required()
      ->check(CLI::IsMember({"grid5", "grid7", "ieee13", "unstable"}));
  rp_cmd->add_option("--out", rp.out, "output directory")->required();
  rp_cmd->add_option("--seeds", rp.n_seeds, "seed count")->check(CLI::Range(1, 10000));
  rp_cmd->add_option("--generations", rp.generations, "generation count")
      ->check(CLI::Range(1, 100000));
  rp_cmd->add_option("--seed", rp.seed, "base seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) {
      gen.target_set = gen_target->count() > 0;
      return cmd_gen_plant(gen);
    }
    if (lqr_cmd->parsed()) return cmd_solve_lqr(lqr_plant, lqr_out);
    if (ea_cmd->parsed()) {
      // resolution order: defaults, then config file, then explicit flags
      if (!ea.config_path.empty()) {
        EaConfig file_cfg = ea.cfg;
        RepairConfig file_rc = ea.repair_cfg;
        std::optional<PlantSpec> spec;
        apply_config_file(load_json(ea.config_path), file_cfg, file_rc, spec);
        if (pop_opt->count() == 0) ea.cfg.n_p = file_cfg.n_p;
        if (gen_opt->count() == 0) ea.cfg.g_max = file_cfg.g_max;
        if (pc_opt->count() == 0) ea.cfg.p_c = file_cfg.p_c;
        if (pm_opt->count() == 0) ea.cfg.p_m = file_cfg.p_m;
        if (el_opt->count() == 0) ea.cfg.n_e = file_cfg.n_e;
        if (tau_opt->count() == 0) ea.cfg.tau = file_cfg.tau;
        if (d_opt->count() == 0) ea.cfg.d = file_cfg.d;
        if (wa_opt->count() == 0) ea.cfg.weights.w_a = file_cfg.weights.w_a;
        if (ws_opt->count() == 0) ea.cfg.weights.w_s = file_cfg.weights.w_s;
        if (wc_opt->count() == 0) ea.cfg.weights.w_c = file_cfg.weights.w_c;
        if (seed_opt->count() == 0) ea.cfg.seed = file_cfg.seed;
        if (rep_opt->count() == 0) ea.cfg.repair_enabled = file_cfg.repair_enabled;
        if (rho_opt->count() == 0) ea.repair_cfg.rho_star = file_rc.rho_star;
        if (ri_opt->count() == 0) ea.repair_cfg.max_iter = file_rc.max_iter;
        if (ea.plant_path.empty() && spec) {
          const Plant p = build_plant(*spec);
          const fs::path tmp = fs::path(ea.out) / "plant.json";
          fs::create_directories(ea.out);
          write_json(tmp, io::plant_to_json(p));
          ea.plant_path = tmp.string();
        }
      }
      return cmd_run_ea(ea);
    }
    if (an_cmd->parsed()) return cmd_analyze(an_run, an_out);
    if (rd_cmd->parsed()) return cmd_repair_demo(rd);
    if (rp_cmd->parsed()) return cmd_repro(rp);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
  return 0;
}
