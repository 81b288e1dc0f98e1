#pragma once

#include "pico/config.hpp"
#include "pico/recon.hpp"

#include <string>
#include <vector>

namespace pico {

// File names (relative to the configured output directory) written by the
// run, in write order; the manifest is always last and always present.
struct ExperimentResult {
  std::vector<std::string> files;
};

// The system an experiment runs on, exposed so tools and tests can rebuild
// exactly what run_experiment used.
ReconSpec build_recon_spec(const ExperimentConfig& config);

// Execute one configured experiment and persist every deliverable into
// config.out (created if missing): maps (variance/sigma, plus oracle,
// analytical, and g-factor maps where defined), per-checkpoint snapshot
// maps, convergence CSVs, report files for the check kinds, and a manifest
// that reproduces the run byte-for-byte when fed back to run_experiment.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace pico
