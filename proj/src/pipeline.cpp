#include "pairsim/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "pairsim/coincidence.hpp"
#include "pairsim/rng.hpp"
#include "pairsim/tomography.hpp"
#include "pairsim/walk.hpp"

namespace pairsim::pipeline {

namespace fs = std::filesystem;

sim::SourceScenario scenario_from_config(const cfg::RunConfig& cfg) {
  sim::SourceScenario s = sim::default_scenario();
  s.repetition_rate_hz = cfg.number("repetition_rate_hz", kRepetitionRateHz);
  s.mu_per_cycle = cfg.number("mu", s.mu_per_cycle);
  s.delta = cfg.number("delta", s.delta);
  s.eta_a = cfg.number("eta_a", s.eta_a);
  s.eta_b = cfg.number("eta_b", s.eta_b);
  s.phase_visibility_v = cfg.number("phase_visibility", s.phase_visibility_v);
  s.duration_s = cfg.number("duration_s", s.duration_s);
  s.seed = static_cast<std::uint64_t>(cfg.integer("seed", 42));
  s.source_ifo.path_eff_beta = 1.0 / cfg.number("source_imbalance", 1.13);
  s.alice_ifo.path_eff_beta = 1.0 / cfg.number("alice_imbalance", 1.24);
  s.bob_ifo.path_eff_beta = 1.0 / cfg.number("bob_imbalance", 1.15);
  s.alice_ifo.phase_rad = cfg.number("alice_phase", 0.0);
  s.bob_ifo.phase_rad = cfg.number("bob_phase", 0.0);
  return s;
}

sim::DetectorModel detector_from_config(const cfg::RunConfig& cfg) {
  sim::DetectorModel d;
  d.jitter_fwhm_ps = cfg.number("jitter_fwhm_ps", 13.0);
  const double amp = cfg.number("walk_amplitude_ps", 0.0);
  const double tau_ns = cfg.number("walk_tau_ns", 50.0);
  if (amp != 0.0) d.walk_curve = sim::exponential_walk(amp, tau_ns * 1e3);
  d.hard_dead_time_ps = cfg.number("dead_time_ps", 0.0);
  d.saturation.rate_3db_hz = cfg.number("rate_3db_hz", 1e18);
  return d;
}

namespace {

struct SettingRun {
  coinc::CoincidenceResult coincidences;
  double singles_a_hz = 0.0;
  double singles_b_hz = 0.0;
};

SettingRun run_setting(const sim::SourceScenario& base, double theta_a,
                       double theta_b, const sim::DetectorModel& det_a,
                       const sim::DetectorModel& det_b, double window_ps,
                       const coinc::BinConfig& bins, bool walk_correction,
                       const char* label) {
  sim::SourceScenario s = base;
  s.alice_ifo.phase_rad = theta_a;
  s.bob_ifo.phase_rad = theta_b;
  s.seed = splitmix64(base.seed ^ fnv1a64(label));
  auto r = sim::generate_stream(s, det_a, det_b);

  tags::Stream a = std::move(r.stream_a);
  tags::Stream b = std::move(r.stream_b);
  if (walk_correction) {
    const walk::Hist2D ha = walk::build_hist2d(a);
    const walk::Hist2D hb = walk::build_hist2d(b);
    a = walk::apply_correction(a, walk::calibrate(ha));
    b = walk::apply_correction(b, walk::calibrate(hb));
  }
  SettingRun out;
  out.coincidences = coinc::find_coincidences(a, b, window_ps, bins);
  out.singles_a_hz = a.size() / s.duration_s;
  out.singles_b_hz = b.size() / s.duration_s;
  return out;
}

}  // namespace

MeasuredPoint measure_point(const sim::SourceScenario& base,
                            const sim::DetectorModel& det_a,
                            const sim::DetectorModel& det_b, double window_ps,
                            double guard_ps, bool walk_correction) {
  coinc::BinConfig bins;
  bins.period_ps = 1e12 / base.repetition_rate_hz;
  bins.guard_width_ps = guard_ps;

  const tomo::PhaseSettings phases;
  const SettingRun run_a =
      run_setting(base, phases.setting_a[0], phases.setting_a[1], det_a, det_b,
                  window_ps, bins, walk_correction, "setting-a");
  const SettingRun run_b =
      run_setting(base, phases.setting_b[0], phases.setting_b[1], det_a, det_b,
                  window_ps, bins, walk_correction, "setting-b");
  const SettingRun run_c =
      run_setting(base, phases.setting_c[0], phases.setting_c[1], det_a, det_b,
                  window_ps, bins, walk_correction, "setting-c");

  MeasuredPoint p;
  p.duration_s = base.duration_s;
  p.singles_a_hz = (run_a.singles_a_hz + run_b.singles_a_hz + run_c.singles_a_hz) / 3.0;
  p.singles_b_hz = (run_a.singles_b_hz + run_b.singles_b_hz + run_c.singles_b_hz) / 3.0;
  p.c_total_max_hz = run_c.coincidences.total_coincidences() / base.duration_s;
  p.mm_max_counts = static_cast<double>(run_c.coincidences.cells[1][1]);
  p.mm_min_counts = static_cast<double>(run_a.coincidences.cells[1][1]);
  p.cells_a = run_a.coincidences.cells;
  p.cells_b = run_b.coincidences.cells;
  p.cells_c = run_c.coincidences.cells;
  return p;
}

namespace {

tomo::StationAmplitudes station_amps(const rates::InterferometerSpec& ifo) {
  const double t2 = ifo.transmittance_t * ifo.transmittance_t;
  const double r2 = 1.0 - t2;
  tomo::StationAmplitudes amp;
  amp.short_amp = std::sqrt(r2 * t2 * ifo.path_eff_alpha);
  amp.long_amp = std::sqrt(r2 * t2 * ifo.path_eff_beta);
  return amp;
}

void write_metric_csv(const std::string& path, const char* metric,
                      const std::vector<PointResult>& points,
                      double (*get)(const PointResult&), std::uint64_t cfg_hash,
                      std::uint64_t seed) {
  std::ofstream out(path);
  out.precision(12);
  out << "# pairsim " << kToolVersion << " config_hash=" << std::hex << cfg_hash
      << std::dec << " seed=" << seed << "\n";
  out << "mu," << metric << "\n";
  for (const auto& p : points) {
    if (!p.completed) continue;
    out << p.mu_configured << "," << get(p) << "\n";
  }
}

}  // namespace

PipelineResult run_pipeline(const cfg::RunConfig& cfg) {
  PipelineResult result;
  result.out_dir = cfg.text("out_dir");

  // sweep values: `mu_sweep = a,b,c` or a single `mu`
  std::vector<double> mus;
  if (cfg.has("mu_sweep")) {
    std::stringstream ss(cfg.text("mu_sweep"));
    std::string cell;
    while (std::getline(ss, cell, ',')) mus.push_back(std::stod(cell));
  } else {
    mus.push_back(cfg.number("mu"));
  }
  if (mus.empty()) throw cfg::ConfigError("empty mu sweep");

  const sim::SourceScenario base = scenario_from_config(cfg);
  const sim::DetectorModel det_a = detector_from_config(cfg);
  const sim::DetectorModel det_b = det_a;
  const double window_ps = cfg.number("window_ps", 100.0);
  const double guard_ps = cfg.number("guard_ps", kDefaultGuardWidthPs);
  const bool twc = cfg.integer("twc_enabled", 0) != 0;
  int jobs = static_cast<int>(cfg.integer("jobs", 0));
  if (jobs <= 0) {
    const char* env = std::getenv("PAIRSIM_JOBS");
    jobs = env ? std::max(1, std::atoi(env)) : 1;
  }
  cfg.reject_unknown_keys();

  fs::create_directories(result.out_dir);
  result.points.resize(mus.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= mus.size()) return;
      PointResult& pr = result.points[k];
      pr.mu_configured = mus[k];
      try {
        sim::SourceScenario s = base;
        s.mu_per_cycle = mus[k];
        s.seed = splitmix64(base.seed ^ fnv1a64("mu-point") ^ (0x9e37ull * k));
        const MeasuredPoint m =
            measure_point(s, det_a, det_b, window_ps, guard_ps, twc);

        pr.singles_a_hz = m.singles_a_hz;
        pr.singles_b_hz = m.singles_b_hz;
        pr.coincidences_hz = m.c_total_max_hz;
        pr.mu_measured = rates::mu_from_rates(
            {m.singles_a_hz, m.singles_b_hz, m.c_total_max_hz,
             s.repetition_rate_hz},
            s.delta);

        const auto vis = coinc::visibility(m.mm_max_counts, m.mm_min_counts,
                                           m.duration_s, m.duration_s);
        pr.visibility_raw = vis.percent;
        pr.visibility_raw_err = vis.error_percent;
        const auto acc =
            rates::accidental_rate(m.singles_a_hz, m.singles_b_hz,
                                   s.repetition_rate_hz, s.delta, s.eta_a, s.eta_b);
        // guard-trimmed middle-middle share of the accidental load
        const sim::RoutingModel rm = sim::routing_model(s);
        const double mm_share = (rm.p_bin_a[1] / rm.cap_a) * (rm.p_bin_b[1] / rm.cap_b);
        pr.visibility_corrected = rates::visibility_corrected(
            m.mm_max_counts / m.duration_s, m.mm_min_counts / m.duration_s,
            acc.total * mm_share);

        const tomo::TomoCounts counts = tomo::assemble_counts(
            m.cells_a, m.cells_b, m.cells_c, m.duration_s, m.duration_s,
            m.duration_s, tomo::PhaseSettings{}, station_amps(s.alice_ifo),
            station_amps(s.bob_ifo));
        const tomo::MleResult mle = tomo::mle_reconstruct(counts);
        pr.log_negativity = tomo::log_negativity(mle.rho);
        pr.coherent_info = tomo::coherent_information(mle.rho);
        pr.metrics = tomo::entangled_rates(mle.rho, pr.coincidences_hz,
                                           pr.visibility_raw / 100.0,
                                           pr.mu_measured);
        pr.completed = true;
      } catch (const std::exception& e) {
        pr.failure = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const int nthreads = std::min<std::size_t>(jobs, mus.size());
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  // outputs in sweep order regardless of worker scheduling
  const std::uint64_t h = cfg.hash();
  const std::uint64_t seed = base.seed;
  const std::string d = result.out_dir + "/";
  write_metric_csv(d + "visibility_raw.csv", "visibility_raw_percent",
                   result.points,
                   [](const PointResult& p) { return p.visibility_raw; }, h, seed);
  write_metric_csv(d + "visibility_corrected.csv", "visibility_corrected_percent",
                   result.points,
                   [](const PointResult& p) { return p.visibility_corrected; }, h,
                   seed);
  write_metric_csv(d + "c_ab.csv", "coincidences_hz", result.points,
                   [](const PointResult& p) { return p.coincidences_hz; }, h, seed);
  write_metric_csv(d + "c_n.csv", "log_negativity_rate_hz", result.points,
                   [](const PointResult& p) { return p.metrics.log_negativity_rate; },
                   h, seed);
  write_metric_csv(d + "c_i.csv", "coherent_info_rate_hz", result.points,
                   [](const PointResult& p) { return p.metrics.coherent_info_rate; },
                   h, seed);
  write_metric_csv(d + "skr.csv", "secret_key_rate_hz", result.points,
                   [](const PointResult& p) { return p.metrics.secret_key_rate; },
                   h, seed);

  std::ofstream summary(d + "summary.txt");
  summary.precision(12);
  summary << "# pairsim " << kToolVersion << " config_hash=" << std::hex << h
          << std::dec << " seed=" << seed << "\n";
  for (const auto& p : result.points) {
    summary << "mu=" << p.mu_configured << " completed=" << p.completed;
    if (p.completed) {
      summary << " mu_measured=" << p.mu_measured << " V_raw=" << p.visibility_raw
              << " V_corrected=" << p.visibility_corrected
              << " C_AB=" << p.coincidences_hz << " E_N=" << p.log_negativity
              << " E_I=" << p.coherent_info
              << " C_N=" << p.metrics.log_negativity_rate
              << " C_I=" << p.metrics.coherent_info_rate
              << " SKR=" << p.metrics.secret_key_rate;
    } else {
      summary << " error=" << p.failure;
    }
    summary << "\n";
  }

  std::ofstream manifest(d + "MANIFEST");
  bool all_ok = true;
  for (std::size_t k = 0; k < result.points.size(); ++k) {
    manifest << "point " << k << " mu=" << result.points[k].mu_configured
             << (result.points[k].completed ? " complete" : " FAILED: " +
                                                  result.points[k].failure)
             << "\n";
    all_ok = all_ok && result.points[k].completed;
  }
  manifest << (all_ok ? "status complete\n" : "status partial\n");
  result.ok = all_ok;
  return result;
}

}  // namespace pairsim::pipeline
