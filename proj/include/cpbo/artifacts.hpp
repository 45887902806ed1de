#pragma once

#include <filesystem>

#include "cpbo/harness.hpp"

namespace cpbo {

// Writes the tabular outputs of a finished experiment into `dir`:
//   manifest.json            config echo, seeds, versions, pairing check
//   identification.tsv       per-seed fit and held-out MAE
//   models/seed<k>.arx       fitted models
//   days/<method>_seed<k>.tsv   per-day θ, z, c, d, J, q, R^sum, R^ave
//   metrics.tsv              final R^sum and R^ave per cell
//   improvement.tsv          relative improvement per (PBO method, seed)
//   improvement_summary.tsv  median and quartiles per PBO method
//   theta2_curves.tsv        θ₂*(z) per PBO cell
// Per-day trajectories and checkpoints are written while the run progresses.
void emit_artifacts(const ExperimentResult& r, const std::filesystem::path& dir);

// Reads back what emit_artifacts wrote; θ₂* curves are recomputed from the
// stored comparisons.
ExperimentResult load_run(const std::filesystem::path& dir);

}  // namespace cpbo
