#ifndef CODESIGN_EA_HPP
#define CODESIGN_EA_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "codesign/analysis.hpp"
#include "codesign/repair.hpp"

namespace codesign {

struct EaConfig {
  int n_p = 20;
  int g_max = 150;
  double p_c = 0.8;
  double p_m = 0.05;
  int n_e = 10;
  double tau = 0.0;
  int d = 5;
  Weights weights;
  std::uint64_t seed = 0;
  bool repair_enabled = false;
};

inline void validate(const EaConfig& c) {
  if (c.n_e < 1 || c.n_e >= c.n_p) throw std::invalid_argument("EaConfig: need 1 <= n_e < N_p");
  if (c.d < 1) throw std::invalid_argument("EaConfig: need d >= 1");
  if (c.g_max < 1) throw std::invalid_argument("EaConfig: need G_max >= 1");
  if (c.p_c < 0 || c.p_c > 1 || c.p_m < 0 || c.p_m > 1)
    throw std::invalid_argument("EaConfig: probabilities must lie in [0,1]");
  if (c.tau < 0) throw std::invalid_argument("EaConfig: temperature must be >= 0");
}

struct GenerationTrace {
  int generation = 0;
  Gene best_gene;
  double best_cost = kInf;
  double mean_cost = kInf;  // over finite costs only
  int n_unstable = 0;
  int n_repaired = 0;
  int best_ell = 0;
  int best_na = 0;
  int best_ns = 0;
  int best_nc = 0;
  int h_t = 0;
};

// Two parent indices. tau at or below 1e-12 is rank selection: the two
// lowest-cost individuals, ties by index (the softmax zero-temperature limit).
// Above that, softmax weights exp(-J/tau) with infinite costs weighted zero,
// sampled without replacement.
inline std::pair<int, int> select_parents(const std::vector<double>& costs, double tau,
                                          Rng& rng) {
  const int n = static_cast<int>(costs.size());
  bool any_finite = false;
  for (double c : costs)
    if (std::isfinite(c)) any_finite = true;
  if (!any_finite) throw std::runtime_error("population degenerate");

  auto lowest_except = [&](int skip) {
    int best = -1;
    for (int i = 0; i < n; ++i) {
      if (i == skip) continue;
      if (best < 0 || costs[i] < costs[best]) best = i;
    }
    return best;
  };

  if (tau <= 1e-12) {
    const int first = lowest_except(-1);
    return {first, lowest_except(first)};
  }

  double jmin = kInf;
  for (double c : costs)
    if (std::isfinite(c) && c < jmin) jmin = c;
  std::vector<double> w(costs.size(), 0.0);
  for (int i = 0; i < n; ++i)
    if (std::isfinite(costs[i])) w[static_cast<std::size_t>(i)] = std::exp(-(costs[i] - jmin) / tau);

  auto draw = [&]() {
    double total = 0.0;
    for (double wi : w) total += wi;
    if (total <= 0.0) return -1;
    const double u = rng.real01() * total;
    double acc = 0.0;
    int last_positive = -1;
    for (int i = 0; i < n; ++i) {
      if (w[static_cast<std::size_t>(i)] <= 0.0) continue;
      last_positive = i;
      acc += w[static_cast<std::size_t>(i)];
      if (u < acc) return i;
    }
    return last_positive;  // float round-off on the final bin
  };

  const int first = draw();
  w[static_cast<std::size_t>(first)] = 0.0;
  int second = draw();
  if (second < 0) second = lowest_except(first);  // lone finite individual
  return {first, second};
}

// Single-point splice over the flattened vector [ell, a, s] of length
// 1 + N_u + N_x. The split k >= 1, so ell always comes from parent1.
inline Gene crossover(const Gene& p1, const Gene& p2, double p_c, Rng& rng) {
  if (!rng.bernoulli(p_c)) return p1;
  const int n_u = static_cast<int>(p1.actuator_mask.size());
  const int n_x = static_cast<int>(p1.sensor_mask.size());
  const int n_theta = 1 + n_u + n_x;
  const int k = static_cast<int>(rng.uniform_int(1, n_theta - 1));
  Gene child = p1;
  for (int pos = k + 1; pos <= n_theta; ++pos) {
    if (pos <= 1 + n_u)
      child.actuator_mask[static_cast<std::size_t>(pos - 2)] =
          p2.actuator_mask[static_cast<std::size_t>(pos - 2)];
    else
      child.sensor_mask[static_cast<std::size_t>(pos - 2 - n_u)] =
          p2.sensor_mask[static_cast<std::size_t>(pos - 2 - n_u)];
  }
  return child;
}

// delta ~ Unif{-d..d} with saturation into [1, N_u N_x]; every mask bit flips
// independently with probability p_m. The delta draw happens unconditionally
// so the stream position never depends on gene content.
inline Gene mutate(const Gene& g, double p_m, int d, int ell_max, Rng& rng) {
  Gene out = g;
  const int delta = static_cast<int>(rng.uniform_int(-d, d));
  out.ell = std::clamp(out.ell + delta, 1, ell_max);
  for (auto&& bit : out.actuator_mask)
    if (rng.bernoulli(p_m)) bit = bit ? 0 : 1;
  for (auto&& bit : out.sensor_mask)
    if (rng.bernoulli(p_m)) bit = bit ? 0 : 1;
  return out;
}

struct EaRunResult {
  EvaluatedController best;
  std::vector<GenerationTrace> trace;
  LqrSolution dense;
};

class EaEngine {
 public:
  EaEngine(const Plant& plant, const EaConfig& cfg, RepairConfig repair_cfg = {},
           int n_threads = 1)
      : plant_(plant),
        cfg_(cfg),
        repair_cfg_(repair_cfg),
        n_threads_(n_threads < 1 ? static_cast<int>(std::thread::hardware_concurrency())
                                 : n_threads),
        graph_(build_graph(plant)),
        rng_(cfg.seed) {
    validate(cfg_);
    if (n_threads_ < 1) n_threads_ = 1;
    const Mat Q = Mat::Identity(plant_.nx(), plant_.nx());
    const Mat R = Mat::Identity(plant_.nu(), plant_.nu());
    dense_ = solve_lqr(plant_.A, plant_.B, Q, R);
  }

  const LqrSolution& dense() const { return dense_; }

  std::vector<EvaluatedController> evaluate_all(const std::vector<Gene>& genes) {
    return evaluate_batch(genes);
  }

  std::vector<Gene> init_population() {
    const int ell0 = count_nonzero(dense_.K_dense);
    std::vector<Gene> pop;
    pop.reserve(static_cast<std::size_t>(cfg_.n_p));
    for (int i = 0; i < cfg_.n_p; ++i) {
      Gene g;
      g.ell = ell0;
      g.actuator_mask.resize(static_cast<std::size_t>(plant_.nu()));
      g.sensor_mask.resize(static_cast<std::size_t>(plant_.nx()));
      for (auto&& b : g.actuator_mask) b = rng_.bernoulli(0.5) ? 1 : 0;
      for (auto&& b : g.sensor_mask) b = rng_.bernoulli(0.5) ? 1 : 0;
      pop.push_back(std::move(g));
    }
    return pop;
  }

  EaRunResult run() {
    auto genes = init_population();
    std::vector<EvaluatedController> pop = evaluate_batch(genes);
    EaRunResult result;
    result.dense = dense_;
    result.trace.reserve(static_cast<std::size_t>(cfg_.g_max));
    for (int t = 1; t <= cfg_.g_max; ++t) {
      pop = step_generation(pop, t, result.trace);
    }
    result.best = pop[static_cast<std::size_t>(best_index(pop))];
    return result;
  }

  // One breeding step: elites (sorted by cost then index) plus N_p - n_e
  // offspring from select -> crossover -> mutate, then a trace row over the
  // new population.
  std::vector<EvaluatedController> step_generation(const std::vector<EvaluatedController>& pop,
                                                   int t,
                                                   std::vector<GenerationTrace>& trace) {
    std::vector<double> costs;
    costs.reserve(pop.size());
    for (const auto& e : pop) costs.push_back(e.j_ea);
    bool any_finite = false;
    for (double c : costs)
      if (std::isfinite(c)) any_finite = true;
    if (!any_finite) throw std::runtime_error("population degenerate");

    std::vector<int> order(pop.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return costs[static_cast<std::size_t>(a)] <
                                                costs[static_cast<std::size_t>(b)]; });

    std::vector<EvaluatedController> next;
    next.reserve(pop.size());
    for (int e = 0; e < cfg_.n_e; ++e)
      next.push_back(pop[static_cast<std::size_t>(order[static_cast<std::size_t>(e)])]);

    const int ell_max = plant_.nu() * plant_.nx();
    std::vector<Gene> offspring;
    offspring.reserve(static_cast<std::size_t>(cfg_.n_p - cfg_.n_e));
    for (int o = 0; o < cfg_.n_p - cfg_.n_e; ++o) {
      const auto [i1, i2] = select_parents(costs, cfg_.tau, rng_);
      Gene child = crossover(pop[static_cast<std::size_t>(i1)].gene,
                             pop[static_cast<std::size_t>(i2)].gene, cfg_.p_c, rng_);
      offspring.push_back(mutate(child, cfg_.p_m, cfg_.d, ell_max, rng_));
    }
    auto evaluated = evaluate_batch(offspring);
    for (auto& e : evaluated) next.push_back(std::move(e));

    trace.push_back(make_trace(next, t));
    return next;
  }

  int effective_distance_of(int ell) {
    auto it = h_memo_.find(ell);
    if (it != h_memo_.end()) return it->second;
    const int h = effective_truncation_distance(ell, dense_.K_dense, plant_, graph_);
    h_memo_.emplace(ell, h);
    return h;
  }

 private:
  static int best_index(const std::vector<EvaluatedController>& pop) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(pop.size()); ++i)
      if (pop[static_cast<std::size_t>(i)].j_ea < pop[static_cast<std::size_t>(best)].j_ea)
        best = i;
    return best;
  }

  EvaluatedController evaluate_gene(const Gene& g) const {
    if (cfg_.repair_enabled)
      return evaluate_with_repair(g, plant_, dense_.K_dense, cfg_.weights, dense_.J_dense,
                                  repair_cfg_);
    return evaluate(g, plant_, dense_.K_dense, cfg_.weights, dense_.J_dense);
  }

  // Cache-aware evaluation. Uncached genes are pure-function work and may run
  // on worker threads; results land in gene order, so the outcome matches the
  // sequential pass exactly.
  std::vector<EvaluatedController> evaluate_batch(const std::vector<Gene>& genes) {
    std::vector<EvaluatedController> out(genes.size());
    std::vector<int> missing;
    for (std::size_t i = 0; i < genes.size(); ++i) {
      auto it = cache_.find(genes[i]);
      if (it != cache_.end())
        out[i] = it->second;
      else
        missing.push_back(static_cast<int>(i));
    }
    // dedupe so identical uncached genes are evaluated once
    std::vector<int> work;
    std::unordered_map<Gene, int, GeneHash> first_of;
    for (int idx : missing) {
      auto [it, fresh] = first_of.try_emplace(genes[static_cast<std::size_t>(idx)],
                                              static_cast<int>(work.size()));
      if (fresh) work.push_back(idx);
    }
    std::vector<EvaluatedController> fresh_results(work.size());
    const int nw = std::min<int>(n_threads_, static_cast<int>(work.size()));
    if (nw > 1) {
      std::atomic<std::size_t> cursor{0};
      std::vector<std::exception_ptr> errors(static_cast<std::size_t>(nw));
      std::vector<std::thread> workers;
      for (int w = 0; w < nw; ++w) {
        workers.emplace_back([&, w] {
          try {
            for (;;) {
              const std::size_t k = cursor.fetch_add(1);
              if (k >= work.size()) break;
              fresh_results[k] = evaluate_gene(genes[static_cast<std::size_t>(work[k])]);
            }
          } catch (...) {
            errors[static_cast<std::size_t>(w)] = std::current_exception();
          }
        });
      }
      for (auto& th : workers) th.join();
      for (auto& err : errors)
        if (err) std::rethrow_exception(err);
    } else {
      for (std::size_t k = 0; k < work.size(); ++k)
        fresh_results[k] = evaluate_gene(genes[static_cast<std::size_t>(work[k])]);
    }
    for (std::size_t k = 0; k < work.size(); ++k)
      cache_.emplace(genes[static_cast<std::size_t>(work[k])], fresh_results[k]);
    for (int idx : missing)
      out[static_cast<std::size_t>(idx)] =
          cache_.at(genes[static_cast<std::size_t>(idx)]);
    return out;
  }

  GenerationTrace make_trace(const std::vector<EvaluatedController>& pop, int t) {
    GenerationTrace row;
    row.generation = t;
    const auto& best = pop[static_cast<std::size_t>(best_index(pop))];
    row.best_gene = best.gene;
    row.best_cost = best.j_ea;
    double sum = 0.0;
    int n_finite = 0;
    for (const auto& e : pop) {
      if (std::isfinite(e.j_ea)) {
        sum += e.j_ea;
        ++n_finite;
      }
      if (!e.stable) ++row.n_unstable;
      if (e.repaired) ++row.n_repaired;
    }
    row.mean_cost = n_finite > 0 ? sum / n_finite : kInf;
    row.best_ell = best.gene.ell;
    row.best_na = best.counts.n_act;
    row.best_ns = best.counts.n_sens;
    row.best_nc = best.counts.n_comm;
    row.h_t = effective_distance_of(best.gene.ell);
    return row;
  }

  Plant plant_;
  EaConfig cfg_;
  RepairConfig repair_cfg_;
  int n_threads_;
  SystemGraph graph_;
  Rng rng_;
  LqrSolution dense_;
  std::unordered_map<Gene, EvaluatedController, GeneHash> cache_;
  std::unordered_map<int, int> h_memo_;
};

inline EaRunResult run_ea(const Plant& plant, const EaConfig& cfg,
                          RepairConfig repair_cfg = {}, int n_threads = 1) {
  EaEngine engine(plant, cfg, repair_cfg, n_threads);
  return engine.run();
}

}  // namespace codesign

#endif  // CODESIGN_EA_HPP
