// Minimal end-to-end run: build a small swing grid, synthesize the dense LQR
// baseline, evolve a sparse controller, and print the trade-off it found.

#include <cstdio>

#include "codesign/codesign.hpp"

using namespace codesign;

int main() {
  const Plant plant = make_grid_swing(3, 3, 42);
  std::printf("plant: %d subsystems, %d states, %d inputs, open-loop radius %.4f\n",
              plant.n_subsystems, plant.nx(), plant.nu(), spectral_radius(plant.A));

  EaConfig cfg;
  cfg.n_p = 12;
  cfg.g_max = 40;
  cfg.n_e = 4;
  cfg.seed = 7;
  EaEngine engine(plant, cfg);
  const EaRunResult run = engine.run();

  std::printf("dense LQR cost %.4f, closed-loop radius %.4f\n", run.dense.J_dense,
              spectral_radius(plant.A + plant.B * run.dense.K_dense));
  for (const auto& row : run.trace)
    if (row.generation % 10 == 0 || row.generation == cfg.g_max)
      std::printf("gen %3d  best %.4f  mean %.4f  unstable %d\n", row.generation,
                  row.best_cost, row.mean_cost, row.n_unstable);

  const auto& best = run.best;
  std::printf("best controller: j=%.4f (LQ ratio %.3f), %d/%d actuators, "
              "%d/%d sensors, %d links, kept %d of %d entries\n",
              best.j_ea, best.j_ratio, best.counts.n_act, plant.nu(),
              best.counts.n_sens, plant.nx(), best.counts.n_comm, best.gene.ell,
              plant.nu() * plant.nx());
  return 0;
}
