#pragma once

#include <string>
#include <vector>

#include "pairsim/config.hpp"
#include "pairsim/rates.hpp"
#include "pairsim/sim.hpp"

namespace pairsim::pipeline {

struct PointResult {
  double mu_configured = 0.0;
  double mu_measured = 0.0;
  double singles_a_hz = 0.0;
  double singles_b_hz = 0.0;
  double coincidences_hz = 0.0;  // all bin pairs at the fringe maximum
  double visibility_raw = 0.0;       // percent
  double visibility_raw_err = 0.0;   // percent
  double visibility_corrected = 0.0; // percent, accidental-subtracted
  double log_negativity = 0.0;
  double coherent_info = 0.0;
  rates::RateMetrics metrics;
  bool completed = false;
  std::string failure;
};

struct PipelineResult {
  std::vector<PointResult> points;
  std::string out_dir;
  bool ok = false;
};

// Scenario and detector assembled from the flat config (shared with the
// simulate/coinc/tomo subcommands).
sim::SourceScenario scenario_from_config(const cfg::RunConfig& cfg);
sim::DetectorModel detector_from_config(const cfg::RunConfig& cfg);

// Full chain per mu point: simulate the three phase settings, optionally
// calibrate and apply the time-walk correction, count coincidences,
// reconstruct the state and derive the rate metrics. Writes one CSV per
// metric plus summary and MANIFEST files into out_dir.
PipelineResult run_pipeline(const cfg::RunConfig& cfg);

// Measurement of one prepared scenario (used by run_pipeline and tests):
struct MeasuredPoint {
  double singles_a_hz = 0.0;
  double singles_b_hz = 0.0;
  double c_total_max_hz = 0.0;   // all-cell coincidence rate at theta = 0
  double mm_max_counts = 0.0;    // middle-middle counts at theta = 0
  double mm_min_counts = 0.0;    // at theta = pi
  double duration_s = 0.0;
  std::array<std::array<std::uint64_t, 3>, 3> cells_a{};  // theta = pi
  std::array<std::array<std::uint64_t, 3>, 3> cells_b{};  // theta = pi/2
  std::array<std::array<std::uint64_t, 3>, 3> cells_c{};  // theta = 0
};

MeasuredPoint measure_point(const sim::SourceScenario& base,
                            const sim::DetectorModel& det_a,
                            const sim::DetectorModel& det_b, double window_ps,
                            double guard_ps, bool walk_correction);

}  // namespace pairsim::pipeline
