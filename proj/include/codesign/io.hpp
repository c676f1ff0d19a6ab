#ifndef CODESIGN_IO_HPP
#define CODESIGN_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "codesign/analysis.hpp"
#include "codesign/ea.hpp"
#include "codesign/repair.hpp"

namespace codesign::io {

using nlohmann::json;

// shortest exact decimal; infinities spelled out since JSON and CSV lack them
inline std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json num_or_inf(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

inline double num_from(const json& j) {
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw std::runtime_error("expected number, got string '" + s + "'");
  }
  return j.get<double>();
}

// write-temp-then-rename so readers never observe a partial file
inline void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out.flush()) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::uint64_t hash_of_json(const json& j) {
  const std::string s = j.dump();
  return fnv1a(s.data(), s.size());
}

inline std::string hash_string(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline json mat_to_json(const Mat& M) {
  json arr = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r)
    for (Eigen::Index c = 0; c < M.cols(); ++c) arr.push_back(M(r, c));
  return arr;
}

inline Mat mat_from_json(const json& arr, Eigen::Index rows, Eigen::Index cols) {
  if (static_cast<Eigen::Index>(arr.size()) != rows * cols)
    throw std::runtime_error("matrix payload has wrong length");
  Mat M(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = arr[k++].get<double>();
  return M;
}

inline json plant_to_json(const Plant& p) {
  json j;
  j["n_subsystems"] = p.n_subsystems;
  j["state_partition"] = p.state_partition;
  j["input_partition"] = p.input_partition;
  j["A"] = mat_to_json(p.A);
  j["B"] = mat_to_json(p.B);
  j["metadata"] = {{"kind", p.kind}, {"seed", p.seed}, {"target_radius", p.target_radius}};
  return j;
}

inline Plant plant_from_json(const json& j) {
  Plant p;
  p.n_subsystems = j.at("n_subsystems").get<int>();
  p.state_partition = j.at("state_partition").get<std::vector<std::vector<int>>>();
  p.input_partition = j.at("input_partition").get<std::vector<std::vector<int>>>();
  int nx = 0, nu = 0;
  for (const auto& part : p.state_partition) nx += static_cast<int>(part.size());
  for (const auto& part : p.input_partition) nu += static_cast<int>(part.size());
  p.A = mat_from_json(j.at("A"), nx, nx);
  p.B = mat_from_json(j.at("B"), nx, nu);
  const auto& meta = j.at("metadata");
  p.kind = meta.at("kind").get<std::string>();
  p.seed = meta.at("seed").get<std::int64_t>();
  p.target_radius = meta.at("target_radius").get<double>();
  return p;
}

inline json gene_to_json(const Gene& g) {
  return {{"ell", g.ell},
          {"actuator_mask", std::vector<int>(g.actuator_mask.begin(), g.actuator_mask.end())},
          {"sensor_mask", std::vector<int>(g.sensor_mask.begin(), g.sensor_mask.end())}};
}

inline Gene gene_from_json(const json& j) {
  Gene g;
  g.ell = j.at("ell").get<int>();
  const auto a = j.at("actuator_mask").get<std::vector<int>>();
  const auto s = j.at("sensor_mask").get<std::vector<int>>();
  g.actuator_mask.assign(a.begin(), a.end());
  g.sensor_mask.assign(s.begin(), s.end());
  return g;
}

inline json controller_to_json(const EvaluatedController& e, std::uint64_t config_hash,
                               std::uint64_t seed) {
  json j;
  j["gene"] = gene_to_json(e.gene);
  j["K_s"] = mat_to_json(e.K_s);
  j["rows"] = e.K_s.rows();
  j["cols"] = e.K_s.cols();
  j["cost"] = {{"j_ea", num_or_inf(e.j_ea)},
               {"j_ratio", num_or_inf(e.j_ratio)},
               {"n_act", e.counts.n_act},
               {"n_sens", e.counts.n_sens},
               {"n_comm", e.counts.n_comm}};
  j["stable"] = e.stable;
  j["repaired"] = e.repaired;
  j["config_hash"] = hash_string(config_hash);
  j["seed"] = seed;
  return j;
}

inline std::string trace_to_csv(const std::vector<GenerationTrace>& trace,
                                std::uint64_t config_hash, std::uint64_t seed) {
  std::ostringstream out;
  out << "# config_hash=" << hash_string(config_hash) << " seed=" << seed << "\n";
  out << "generation,best_cost,mean_cost,n_unstable,n_repaired,best_ell,best_na,best_ns,"
         "best_nc,h_t\n";
  for (const auto& row : trace) {
    out << row.generation << ',' << fmt_double(row.best_cost) << ','
        << fmt_double(row.mean_cost) << ',' << row.n_unstable << ',' << row.n_repaired
        << ',' << row.best_ell << ',' << row.best_na << ',' << row.best_ns << ','
        << row.best_nc << ',' << row.h_t << "\n";
  }
  return out.str();
}

struct TraceRow {
  int generation;
  double best_cost;
  double mean_cost;
  int n_unstable;
  int n_repaired;
  int best_ell;
  int best_na;
  int best_ns;
  int best_nc;
  int h_t;
};

inline std::vector<TraceRow> trace_from_csv(const std::string& text) {
  std::vector<TraceRow> rows;
  std::istringstream in(text);
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      saw_header = true;  // column header
      continue;
    }
    TraceRow r{};
    std::istringstream ls(line);
    std::string field;
    auto next = [&]() {
      if (!std::getline(ls, field, ',')) throw std::runtime_error("short trace row");
      return field;
    };
    r.generation = std::stoi(next());
    r.best_cost = std::stod(next());
    r.mean_cost = std::stod(next());
    r.n_unstable = std::stoi(next());
    r.n_repaired = std::stoi(next());
    r.best_ell = std::stoi(next());
    r.best_na = std::stoi(next());
    r.best_ns = std::stoi(next());
    r.best_nc = std::stoi(next());
    r.h_t = std::stoi(next());
    rows.push_back(r);
  }
  return rows;
}

inline json repair_to_json(double initial_radius, const RepairResult& r,
                           std::uint64_t config_hash, std::uint64_t seed) {
  json j;
  j["initial_radius"] = num_or_inf(initial_radius);
  j["final_radius"] = num_or_inf(r.row_sum);
  j["iterations"] = r.iterations;
  j["succeeded"] = r.succeeded;
  j["schur_stable"] = r.schur_stable;
  j["config_hash"] = hash_string(config_hash);
  j["seed"] = seed;
  return j;
}

inline json analysis_report_to_json(const AnalysisReport& rep, std::uint64_t config_hash,
                                    std::uint64_t seed) {
  json j;
  j["fit"] = {{"upsilon", rep.fit.upsilon},
              {"rho", rep.fit.rho},
              {"level_max", rep.fit.level_max}};
  j["L_J"] = rep.L_J;
  j["J_dense"] = rep.J_dense;
  j["n_u"] = rep.n_u;
  j["n_x"] = rep.n_x;
  j["h_star"] = rep.h_star;
  j["phi"] = rep.phi;
  j["margin"] = {{"L", rep.margin.L},
                 {"sigma_crit", rep.margin.sigma_crit},
                 {"omega", rep.margin.omega},
                 {"beta", rep.margin.beta}};
  j["depth"] = {{"h_stab", rep.depth.h_stab},
                {"vacuous", rep.depth.vacuous},
                {"ell_stab", rep.depth.ell_stab}};
  j["n_delta"] = rep.n_delta;
  j["ell_inverse_h_star"] = rep.ell_inverse_h_star;
  j["alpha"] = rep.alpha;
  j["gamma"] = rep.gamma;
  j["lipschitz_method"] = rep.lipschitz_method;
  j["config_hash"] = hash_string(config_hash);
  j["seed"] = seed;
  return j;
}

inline std::string phi_table_csv(const std::vector<double>& phi, std::uint64_t config_hash,
                                 std::uint64_t seed) {
  std::ostringstream out;
  out << "# config_hash=" << hash_string(config_hash) << " seed=" << seed << "\n";
  out << "h,phi\n";
  for (std::size_t h = 0; h < phi.size(); ++h)
    out << h << ',' << fmt_double(phi[h]) << "\n";
  return out.str();
}

inline std::string predicted_curve_csv(const std::vector<double>& curve,
                                       std::uint64_t config_hash, std::uint64_t seed) {
  std::ostringstream out;
  out << "# config_hash=" << hash_string(config_hash) << " seed=" << seed << "\n";
  out << "generation,predicted_cost\n";
  for (std::size_t t = 0; t < curve.size(); ++t)
    out << (t + 1) << ',' << fmt_double(curve[t]) << "\n";
  return out.str();
}

}  // namespace codesign::io

#endif  // CODESIGN_IO_HPP
