// Serial-vs-OpenMP benchmark for the data-parallel kernels: JSI grid build,
// filtered integrals, 2D histogram accumulation and stream correction.

#include <chrono>
#include <cstdio>

#include "pairsim/optics.hpp"
#include "pairsim/rng.hpp"
#include "pairsim/timetags.hpp"
#include "pairsim/walk.hpp"

using namespace pairsim;
using Clock = std::chrono::steady_clock;

namespace {

template <typename F>
double time_ms(F&& fn, int reps = 3) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    fn();
    const auto t1 = Clock::now();
    best = std::min(best,
                    std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double serial_ms, double omp_ms) {
  std::printf("%-28s serial %9.2f ms   openmp %9.2f ms   speedup %5.2fx\n", name,
              serial_ms, omp_ms, serial_ms / omp_ms);
}

}  // namespace

int main() {
  const optics::CrystalSpec crystal = optics::default_crystal();
  const optics::PumpSpec pump;
  const optics::FilterSpec fs = optics::dwdm_filter(59);
  const optics::FilterSpec fi = optics::energy_matched_partner(fs, pump);

  const double grid_serial = time_ms([&] {
    optics::build_channel_pair_grid(crystal, pump, fs, fi, 1024, 3.0, 1.0,
                                    Exec::Serial);
  });
  const double grid_omp = time_ms([&] {
    optics::build_channel_pair_grid(crystal, pump, fs, fi, 1024, 3.0, 1.0,
                                    Exec::OpenMP);
  });
  report("jsi grid 1024x1024", grid_serial, grid_omp);

  const optics::JsiGrid grid =
      optics::build_channel_pair_grid(crystal, pump, fs, fi, 1024);
  const double int_serial = time_ms(
      [&] { optics::coincidence_integral(fs, fi, grid, Exec::Serial); }, 10);
  const double int_omp = time_ms(
      [&] { optics::coincidence_integral(fs, fi, grid, Exec::OpenMP); }, 10);
  report("coincidence integral", int_serial, int_omp);

  // synthetic Poisson stream for the histogram and correction kernels
  Rng rng(7, "bench-stream");
  tags::Stream stream;
  const double rate = 5e6;
  double t = 0.0;
  while (stream.size() < 4'000'000) {
    t += -std::log(1.0 - rng.uniform()) / rate * 1e12;
    stream.push_back({0, static_cast<std::uint64_t>(t)});
  }
  const double hist_serial =
      time_ms([&] { walk::build_hist2d(stream, kClockPeriodPs, 1.0, {}, Exec::Serial); });
  const double hist_omp =
      time_ms([&] { walk::build_hist2d(stream, kClockPeriodPs, 1.0, {}, Exec::OpenMP); });
  report("hist2d 4M tags", hist_serial, hist_omp);

  walk::WalkTable table;
  for (int i = 0; i < 256; ++i) {
    const double tp = 10e3 * std::pow(100.0, i / 255.0);
    table.t_prime_ps.push_back(tp);
    table.correction_ps.push_back(30.0 * std::exp(-tp / 50e3));
    table.flagged.push_back(0);
  }
  table.valid_below_ps = 9e5;
  const double corr_serial =
      time_ms([&] { walk::apply_correction(stream, table, Exec::Serial); });
  const double corr_omp =
      time_ms([&] { walk::apply_correction(stream, table, Exec::OpenMP); });
  report("apply_correction 4M tags", corr_serial, corr_omp);

  return 0;
}
