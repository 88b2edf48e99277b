#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pairsim/constants.hpp"
#include "pairsim/parallel.hpp"
#include "pairsim/timetags.hpp"

namespace pairsim::walk {

struct WalkError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 2D histogram: x = arrival time folded modulo the clock period, y = the
// inter-arrival time t' preceding each tag.
struct Hist2D {
  double period_ps = kClockPeriodPs;
  double x_bin_ps = 1.0;
  std::vector<double> y_edges_ps;       // size rows+1
  std::vector<std::vector<std::uint32_t>> counts;  // [row][xbin]

  std::size_t rows() const { return counts.size(); }
  std::size_t x_bins() const { return counts.empty() ? 0 : counts.front().size(); }
  double y_center(std::size_t row) const {
    return std::sqrt(y_edges_ps[row] * y_edges_ps[row + 1]);
  }
};

struct YBinSpec {
  double lo_ps = 10e3;   // 10 ns
  double hi_ps = 1e6;    // 1 us
  int rows = 256;
  bool logarithmic = true;
};

Hist2D build_hist2d(const tags::Stream& stream, double period_ps = kClockPeriodPs,
                    double x_bin_ps = 1.0, const YBinSpec& y = YBinSpec{},
                    Exec mode = exec_mode());

// Lookup table from inter-arrival time t' to the timing correction d~.
struct WalkTable {
  std::vector<double> t_prime_ps;     // row centers, increasing
  std::vector<double> correction_ps;  // may exceed one clock period
  double valid_below_ps = 0.0;        // corrections vanish above this gap
  std::vector<std::uint8_t> flagged;  // rows with ambiguous SAD minima

  // linear interpolation; zero above valid_below and outside the table
  double correction(double t_prime) const;
};

struct CalibrationConfig {
  // template built from rows with t' in [lo, hi]; defaults anchor it in the
  // distortion-free region near the top of the histogram
  double template_lo_ps = 300e3;
  double template_hi_ps = 1e6;
  std::uint64_t min_row_counts = 1000;
  double tie_tolerance = 0.02;  // relative SAD gap that counts as a tie
};

// Template matching per histogram row: circular sum-of-absolute-differences
// against the large-t' template, parabolic sub-bin refinement, rollover
// unwrapping from large t' downward.
WalkTable calibrate(const Hist2D& hist,
                    const CalibrationConfig& config = CalibrationConfig{});

// Subtracts the interpolated correction d~(t') from every tag (gaps taken
// from the input stream); the first tag is left unchanged. Mergeable over
// chunks since each tag only needs its predecessor.
tags::Stream apply_correction(const tags::Stream& stream, const WalkTable& table,
                              Exec mode = exec_mode());

// Baseline comparison: drop any tag closer than dead_ps to the previously
// kept tag.
tags::Stream dead_time_filter(const tags::Stream& stream, double dead_ps);

// Two-column CSV (t_prime_ps, correction_ps) with a comment header
// recording period and bin settings.
void save_walk_table(const WalkTable& table, const std::string& path,
                     double period_ps = kClockPeriodPs, double x_bin_ps = 1.0);
WalkTable load_walk_table(const std::string& path);

}  // namespace pairsim::walk
