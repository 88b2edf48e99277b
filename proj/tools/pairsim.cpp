// pairsim: frequency-multiplexed time-bin entanglement source toolkit.
// Subcommands map one-to-one onto the library modules; `pairsim <cmd> --help`
// lists every flag. Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pairsim/coincidence.hpp"
#include "pairsim/config.hpp"
#include "pairsim/constants.hpp"
#include "pairsim/optics.hpp"
#include "pairsim/pipeline.hpp"
#include "pairsim/rates.hpp"
#include "pairsim/rng.hpp"
#include "pairsim/sim.hpp"
#include "pairsim/tomography.hpp"
#include "pairsim/walk.hpp"

using namespace pairsim;

namespace {

int run_jsi(const std::string& out, double t_c, double pump_nm, double pump_fwhm_ghz,
            int channel, double fwhm_ghz, int resolution) {
  optics::CrystalSpec crystal = optics::default_crystal();
  crystal.temperature_c = t_c;
  const optics::PumpSpec pump =
      optics::PumpSpec::from_fwhm(pump_nm, pump_fwhm_ghz * 1e9);
  const optics::FilterSpec fs = optics::dwdm_filter(channel, 1.0, fwhm_ghz * 1e9);
  const optics::FilterSpec fi = optics::energy_matched_partner(fs, pump);
  const optics::JsiGrid grid =
      optics::build_channel_pair_grid(crystal, pump, fs, fi, resolution);
  optics::save_jsi_csv(grid, out);
  const optics::DeltaResult d = optics::delta_model(fs, fi, grid);
  std::printf("grid %dx%d written to %s\n", resolution, resolution, out.c_str());
  std::printf("delta = %.6f (given idler %.6f, given signal %.6f)\n", d.mean,
              d.delta_given_idler, d.delta_given_signal);
  const double mu = optics::mu_integral(fs, fi, grid, kRepetitionRateHz);
  std::printf("mu per cycle at unit brightness = %.6e\n", mu);
  return 0;
}

int run_schmidt(double t_c, double pump_nm, double pump_fwhm_ghz, int channel,
                double fwhm_ghz, int resolution, bool amplitude_mode) {
  optics::CrystalSpec crystal = optics::default_crystal();
  crystal.temperature_c = t_c;
  const optics::PumpSpec pump =
      optics::PumpSpec::from_fwhm(pump_nm, pump_fwhm_ghz * 1e9);
  const auto mode =
      amplitude_mode ? optics::SchmidtMode::Amplitude : optics::SchmidtMode::Intensity;
  const optics::SchmidtResult r =
      optics::schmidt_for_channel(crystal, pump, channel, fwhm_ghz * 1e9,
                                  resolution, mode);
  std::printf("1/K = %.6f\n", r.inverse_k);
  std::printf("K = %.6f\n", r.schmidt_number_k);
  for (std::size_t i = 0; i < std::min<std::size_t>(r.coefficients.size(), 6); ++i)
    std::printf("lambda_%zu = %.6e\n", i, r.coefficients[i]);
  return 0;
}

tags::Stream load_or_die(const std::string& path) { return tags::load_stream(path); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pairsim: time-bin entangled pair source simulation and analysis"};
  app.require_subcommand(1);
  argv = app.ensure_utf8(argv);

  // ---- jsi ----
  auto* jsi = app.add_subcommand("jsi", "export a JSI grid for one channel pair");
  std::string jsi_out = "jsi.csv";
  double jsi_t = 225.94, jsi_pump_nm = 769.78, jsi_pump_fwhm = 243.0;
  double jsi_fwhm = 82.0;
  int jsi_channel = 59, jsi_res = 512;
  jsi->add_option("--out", jsi_out, "output CSV path");
  jsi->add_option("--temperature-c", jsi_t, "effective crystal temperature");
  jsi->add_option("--pump-nm", jsi_pump_nm, "pump center wavelength (nm)");
  jsi->add_option("--pump-fwhm-ghz", jsi_pump_fwhm, "pump intensity FWHM (GHz)");
  jsi->add_option("--channel", jsi_channel, "signal-arm ITU channel");
  jsi->add_option("--fwhm-ghz", jsi_fwhm, "filter FWHM (GHz)");
  jsi->add_option("--resolution", jsi_res, "grid points per axis");

  // ---- schmidt ----
  auto* schmidt = app.add_subcommand("schmidt", "inverse Schmidt number of a filtered channel pair");
  double sc_t = 225.94, sc_pump_nm = 769.78, sc_pump_fwhm = 243.0, sc_fwhm = 82.0;
  int sc_channel = 59, sc_res = 512;
  bool sc_amplitude = false;
  schmidt->add_option("--temperature-c", sc_t, "effective crystal temperature");
  schmidt->add_option("--pump-nm", sc_pump_nm, "pump center wavelength (nm)");
  schmidt->add_option("--pump-fwhm-ghz", sc_pump_fwhm, "pump intensity FWHM (GHz)");
  schmidt->add_option("--channel", sc_channel, "signal-arm ITU channel");
  schmidt->add_option("--fwhm-ghz", sc_fwhm, "filter FWHM (GHz)");
  schmidt->add_option("--resolution", sc_res, "grid points per axis");
  schmidt->add_flag("--amplitude", sc_amplitude,
                    "decompose the amplitude (sqrt of the JSI) instead of the JSI");

  // ---- fit ----
  auto* fit = app.add_subcommand("fit", "fit the JSI model to measured rates");
  std::string fit_singles, fit_coinc, fit_out = "fit_report.txt";
  double fit_fwhm = 82.0;
  int fit_res = 256;
  fit->add_option("--singles", fit_singles,
                  "CSV of singles: arm (s/i), channel, Hz")->required();
  fit->add_option("--coincidences", fit_coinc,
                  "CSV rate matrix: header row idler channels, header column "
                  "signal channels, body Hz")->required();
  fit->add_option("--out", fit_out, "report path");
  fit->add_option("--fwhm-ghz", fit_fwhm, "filter FWHM (GHz)");
  fit->add_option("--resolution", fit_res, "fit grid resolution");

  // ---- simulate ----
  auto* simulate = app.add_subcommand("simulate", "generate synthetic time-tag streams");
  std::string sim_config, sim_out_a = "alice.ttg", sim_out_b = "bob.ttg";
  simulate->add_option("--config", sim_config, "flat key=value config")->required();
  simulate->add_option("--out-a", sim_out_a, "Alice stream path (.ttg or .csv)");
  simulate->add_option("--out-b", sim_out_b, "Bob stream path (.ttg or .csv)");

  // ---- twc ----
  auto* twc = app.add_subcommand("twc", "time-walk calibration and correction");
  twc->require_subcommand(1);
  auto* twc_cal = twc->add_subcommand("calibrate", "build a walk table from a stream");
  std::string twc_in, twc_out = "walk.csv";
  double twc_period = kClockPeriodPs;
  twc_cal->add_option("--in", twc_in, "input stream")->required();
  twc_cal->add_option("--out", twc_out, "walk table CSV");
  twc_cal->add_option("--period-ps", twc_period, "clock period (ps)");
  auto* twc_apply = twc->add_subcommand("apply", "apply a walk table to a stream");
  std::string twa_in, twa_table, twa_out;
  twc_apply->add_option("--in", twa_in, "input stream")->required();
  twc_apply->add_option("--table", twa_table, "walk table CSV")->required();
  twc_apply->add_option("--out", twa_out, "corrected stream path")->required();

  // ---- coinc ----
  auto* coincide = app.add_subcommand("coinc", "coincidence counting and visibility");
  std::string co_a, co_b, co_out;
  double co_window = 100.0, co_guard = kDefaultGuardWidthPs;
  double co_period = kClockPeriodPs;
  coincide->add_option("--a", co_a, "Alice stream")->required();
  coincide->add_option("--b", co_b, "Bob stream")->required();
  coincide->add_option("--window-ps", co_window, "coincidence window (ps)");
  coincide->add_option("--guard-ps", co_guard, "guard width (ps)");
  coincide->add_option("--period-ps", co_period, "clock period (ps)");
  coincide->add_option("--out", co_out, "optional CSV for the 9-cell matrix");

  // ---- tomo ----
  auto* tomo_cmd = app.add_subcommand("tomo", "quantum state tomography");
  tomo_cmd->require_subcommand(1);
  auto* tomo_rec = tomo_cmd->add_subcommand(
      "reconstruct", "MLE density matrix from assembled counts");
  std::string tr_counts, tr_out = "rho.csv";
  tomo_rec->add_option("--counts", tr_counts,
                       "counts file: lines of `label count`; labels must match "
                       "the canonical projector set")->required();
  tomo_rec->add_option("--out", tr_out, "density matrix CSV");
  auto* tomo_meas = tomo_cmd->add_subcommand("measures", "entanglement measures of a density matrix");
  std::string tm_rho;
  double tm_cab = 1.0, tm_vis = 1.0;
  tomo_meas->add_option("--rho", tm_rho, "density matrix CSV")->required();
  tomo_meas->add_option("--c-ab", tm_cab, "coincidence rate (Hz)");
  tomo_meas->add_option("--visibility", tm_vis, "fringe visibility fraction");

  // ---- calc ----
  auto* calc = app.add_subcommand("calc", "closed-form rate and visibility formulas");
  calc->require_subcommand(1);
  struct CalcArgs {
    double s_a = 1e6, s_b = 1e6, c_ab = 1e4, rep = kRepetitionRateHz;
    double delta = 0.393, eta = 0.2, eta_b = 0.2;
    double c_max = 0, c_min = 0, c_acc = 0;
    double mu = 1e-3, v0 = 1.0, visibility = 1.0;
    double mu_e = 1e-3, mu_l = 1e-3, tau_a = 0.70710678118654752, tau_b = 0.70710678118654752;
    double phase = 0.0;
    int n_max = 4;
    double x = 1.0, kappa_a = 1.0, kappa_b = 1.0, eps_a = 1.0, eps_b = 1.0;
    int port = 1;
    double t = 0.70710678118654752, alpha = 1.0, beta = 1.0;
    double p = 0.5, q = 0.81, f_ec = 1.1;
    double r_a = 0.99, r_b = 1.04;
    double rate = 0.0, rate_3db = 15.5e6, eta0 = 1.0;
    bool from_min = false;
  } ca;

  auto* c_mu = calc->add_subcommand("mu", "mu from measured rates");
  c_mu->add_option("--s-a", ca.s_a, "singles at Alice (Hz)");
  c_mu->add_option("--s-b", ca.s_b, "singles at Bob (Hz)");
  c_mu->add_option("--c-ab", ca.c_ab, "coincidences (Hz)");
  c_mu->add_option("--rep-rate", ca.rep, "repetition rate (Hz)");
  c_mu->add_option("--delta", ca.delta, "geometric factor");

  auto* c_delta = calc->add_subcommand("delta-empirical", "delta from C/(eta S)");
  c_delta->add_option("--c-ab", ca.c_ab, "coincidences (Hz)");
  c_delta->add_option("--eta", ca.eta, "arm efficiency");
  c_delta->add_option("--s-other", ca.s_a, "other-arm singles (Hz)");

  auto* c_acc = calc->add_subcommand("accidentals", "incompatible-mode accidental rate");
  c_acc->add_option("--s-a", ca.s_a, "singles at Alice (Hz)");
  c_acc->add_option("--s-b", ca.s_b, "singles at Bob (Hz)");
  c_acc->add_option("--rep-rate", ca.rep, "repetition rate (Hz)");
  c_acc->add_option("--delta", ca.delta, "geometric factor");
  c_acc->add_option("--eta-a", ca.eta, "Alice efficiency");
  c_acc->add_option("--eta-b", ca.eta_b, "Bob efficiency");

  auto* c_vc = calc->add_subcommand("visibility-corrected", "accidental-subtracted visibility");
  c_vc->add_option("--c-max", ca.c_max, "max coincidence rate")->required();
  c_vc->add_option("--c-min", ca.c_min, "min coincidence rate")->required();
  c_vc->add_option("--c-acc", ca.c_acc, "accidental rate");

  auto* c_fov = calc->add_subcommand("first-order-visibility", "V0/(1+mu)");
  c_fov->add_option("--mu", ca.mu, "mean pair number");
  c_fov->add_option("--v0", ca.v0, "nominal visibility");

  auto* c_pv = calc->add_subcommand("port-visibilities", "four-port visibilities vs x");
  c_pv->add_option("--x", ca.x, "mu_E/mu_L");
  c_pv->add_option("--kappa-a", ca.kappa_a, "Alice path ratio");
  c_pv->add_option("--kappa-b", ca.kappa_b, "Bob path ratio");
  c_pv->add_option("--eps-a", ca.eps_a, "Alice splitting ratio");
  c_pv->add_option("--eps-b", ca.eps_b, "Bob splitting ratio");

  auto* c_pr = calc->add_subcommand("port-mu-ratio", "mu_E/mu_L of a source port");
  c_pr->add_option("--port", ca.port, "output port (1 or 2)");
  c_pr->add_option("--t", ca.t, "beamsplitter |t|");
  c_pr->add_option("--alpha2", ca.alpha, "short-arm efficiency |alpha|^2");
  c_pr->add_option("--beta2", ca.beta, "long-arm efficiency |beta|^2");

  auto* c_mv = calc->add_subcommand("multiphoton-visibility", "all-order visibility");
  c_mv->add_option("--mu-e", ca.mu_e, "early mean photon number");
  c_mv->add_option("--mu-l", ca.mu_l, "late mean photon number");

  auto* c_mc = calc->add_subcommand("multiphoton-coincidence", "coincidence probability C(phi)");
  c_mc->add_option("--mu-e", ca.mu_e, "early mean photon number");
  c_mc->add_option("--mu-l", ca.mu_l, "late mean photon number");
  c_mc->add_option("--tau-a", ca.tau_a, "mixer transmittance A");
  c_mc->add_option("--tau-b", ca.tau_b, "mixer transmittance B");
  c_mc->add_option("--phase", ca.phase, "relative phase (rad)");

  auto* c_fo = calc->add_subcommand("fock-oracle", "truncated Fock-space coincidence probability");
  c_fo->add_option("--mu-e", ca.mu_e, "early mean photon number");
  c_fo->add_option("--mu-l", ca.mu_l, "late mean photon number");
  c_fo->add_option("--tau-a", ca.tau_a, "mixer transmittance A");
  c_fo->add_option("--tau-b", ca.tau_b, "mixer transmittance B");
  c_fo->add_option("--phase", ca.phase, "relative phase (rad)");
  c_fo->add_option("--n-max", ca.n_max, "photons per mode (2-6)");

  auto* c_g2 = calc->add_subcommand("g2", "heralded g2(0)");
  c_g2->add_option("--s-i", ca.s_a, "idler singles (Hz)");
  c_g2->add_option("--eta-i", ca.eta, "idler efficiency");
  c_g2->add_option("--rep-rate", ca.rep, "repetition rate (Hz)");
  c_g2->add_option("--mu", ca.mu, "optional mu for the slope");

  auto* c_h2 = calc->add_subcommand("entropy", "binary entropy H2(p)");
  c_h2->add_option("--p", ca.p, "probability")->required();

  auto* c_skr = calc->add_subcommand("skr", "secret key rate");
  c_skr->add_option("--c-ab", ca.c_ab, "coincidence rate (Hz)");
  c_skr->add_option("--visibility", ca.visibility, "visibility fraction");
  c_skr->add_option("--q", ca.q, "basis reconciliation factor");
  c_skr->add_option("--f-ec", ca.f_ec, "error correction efficiency");

  auto* c_sp = calc->add_subcommand("scale-ports", "full-wavefunction rate scaling");
  c_sp->add_option("--c", ca.c_ab, "measured coincidence rate (Hz)");
  c_sp->add_option("--r-a", ca.r_a, "port ratio R_A");
  c_sp->add_option("--r-b", ca.r_b, "port ratio R_B");
  c_sp->add_flag("--from-min", ca.from_min, "phase-minimum two-branch scaling");

  auto* c_de = calc->add_subcommand("detector-efficiency", "saturation model");
  c_de->add_option("--rate", ca.rate, "count rate (Hz)")->required();
  c_de->add_option("--rate-3db", ca.rate_3db, "3 dB rate (Hz)");
  c_de->add_option("--eta0", ca.eta0, "nominal efficiency");

  // ---- extrapolate ----
  auto* extrap = app.add_subcommand("extrapolate", "rate metrics vs mu under saturation");
  double ex_mu0 = 5e-3, ex_cab = 1e6, ex_en = 0.9, ex_ei = 0.7, ex_skr = 0.6;
  double ex_sen = -20.0, ex_sei = -40.0, ex_ses = -35.0;
  double ex_singles = 3.84e6, ex_r3db = 15.5e6;
  double ex_lo = 1e-4, ex_hi = 0.05;
  int ex_channels = 1, ex_samples = 400;
  std::string ex_out = "extrapolation.csv";
  extrap->add_option("--mu0", ex_mu0, "baseline mu");
  extrap->add_option("--c-ab0", ex_cab, "baseline coincidence rate (Hz)");
  extrap->add_option("--e-n0", ex_en, "baseline E_N");
  extrap->add_option("--e-i0", ex_ei, "baseline E_I");
  extrap->add_option("--e-s0", ex_skr, "baseline secret fraction");
  extrap->add_option("--slope-e-n", ex_sen, "dE_N/dmu");
  extrap->add_option("--slope-e-i", ex_sei, "dE_I/dmu");
  extrap->add_option("--slope-e-s", ex_ses, "dE_S/dmu");
  extrap->add_option("--singles0", ex_singles, "baseline singles load (Hz)");
  extrap->add_option("--rate-3db", ex_r3db, "detector 3 dB rate (Hz)");
  extrap->add_option("--mu-lo", ex_lo, "sweep start");
  extrap->add_option("--mu-hi", ex_hi, "sweep end");
  extrap->add_option("--channels", ex_channels, "channel count multiplier");
  extrap->add_option("--samples", ex_samples, "sweep samples");
  extrap->add_option("--out", ex_out, "output CSV");

  // ---- pipeline ----
  auto* pipe = app.add_subcommand("pipeline", "full simulate-analyze chain over a mu sweep");
  std::string pipe_config;
  pipe->add_option("--config", pipe_config, "flat key=value config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (jsi->parsed())
      return run_jsi(jsi_out, jsi_t, jsi_pump_nm, jsi_pump_fwhm, jsi_channel,
                     jsi_fwhm, jsi_res);
    if (schmidt->parsed())
      return run_schmidt(sc_t, sc_pump_nm, sc_pump_fwhm, sc_channel, sc_fwhm,
                         sc_res, sc_amplitude);

    if (fit->parsed()) {
      optics::RateData data;
      {
        std::ifstream in(fit_singles);
        if (!in) throw cfg::ConfigError("cannot open " + fit_singles);
        std::string line;
        while (std::getline(in, line)) {
          if (line.empty() || line[0] == '#' || line[0] == 'a') continue;
          std::stringstream ss(line);
          std::string arm, ch, hz;
          std::getline(ss, arm, ',');
          std::getline(ss, ch, ',');
          std::getline(ss, hz, ',');
          if (arm == "s")
            data.singles_signal[std::stoi(ch)] = std::stod(hz);
          else
            data.singles_idler[std::stoi(ch)] = std::stod(hz);
        }
      }
      {
        std::ifstream in(fit_coinc);
        if (!in) throw cfg::ConfigError("cannot open " + fit_coinc);
        std::string line;
        std::vector<int> idler_channels;
        bool header = true;
        while (std::getline(in, line)) {
          if (line.empty() || line[0] == '#') continue;
          std::stringstream ss(line);
          std::string cell;
          if (header) {
            bool first = true;
            while (std::getline(ss, cell, ',')) {
              if (first) { first = false; continue; }
              idler_channels.push_back(std::stoi(cell));
            }
            header = false;
            continue;
          }
          std::getline(ss, cell, ',');
          const int sc_ch = std::stoi(cell);
          for (int ic : idler_channels) {
            if (!std::getline(ss, cell, ',')) break;
            data.coincidences[{sc_ch, ic}] = std::stod(cell);
          }
        }
      }
      optics::FitParams init;
      for (const auto& [ch, v] : data.singles_signal) init.path_efficiencies[ch] = 0.15;
      for (const auto& [ch, v] : data.singles_idler) init.path_efficiencies[ch] = 0.15;
      const optics::FitReport rep = optics::fit_jsi(
          data, init, optics::default_crystal(), fit_fwhm * 1e9, fit_res);
      std::ofstream out(fit_out);
      out.precision(10);
      out << "converged " << rep.converged << "\n";
      out << "objective " << rep.objective << "\n";
      out << "temperature_c " << rep.best.crystal_temperature_c << "\n";
      out << "pump_center_nm " << rep.best.pump_center_nm << "\n";
      out << "pump_sigma_hz " << rep.best.pump_sigma_hz << "\n";
      out << "brightness " << rep.best.global_brightness << "\n";
      for (const auto& [ch, eta] : rep.best.path_efficiencies)
        out << "eta_" << ch << " " << eta << "\n";
      std::printf("fit %s, objective %.4e, report in %s\n",
                  rep.converged ? "converged" : "did not converge", rep.objective,
                  fit_out.c_str());
      return rep.converged ? 0 : 1;
    }

    if (simulate->parsed()) {
      const cfg::RunConfig c = cfg::RunConfig::parse_file(sim_config);
      const sim::SourceScenario s = pipeline::scenario_from_config(c);
      const sim::DetectorModel d = pipeline::detector_from_config(c);
      c.reject_unknown_keys();
      const auto r = sim::generate_stream(s, d, d);
      tags::save_stream(r.stream_a, sim_out_a);
      tags::save_stream(r.stream_b, sim_out_b);
      std::printf("alice: %zu tags -> %s\n", r.stream_a.size(), sim_out_a.c_str());
      std::printf("bob:   %zu tags -> %s\n", r.stream_b.size(), sim_out_b.c_str());
      std::printf("emitted pairs %llu, detected both %llu\n",
                  static_cast<unsigned long long>(r.truth.emitted_pairs),
                  static_cast<unsigned long long>(r.truth.detected_both));
      return 0;
    }

    if (twc_cal->parsed()) {
      const tags::Stream s = load_or_die(twc_in);
      const walk::Hist2D h = walk::build_hist2d(s, twc_period);
      const walk::WalkTable t = walk::calibrate(h);
      walk::save_walk_table(t, twc_out, twc_period);
      std::printf("walk table (%zu rows) -> %s\n", t.t_prime_ps.size(),
                  twc_out.c_str());
      return 0;
    }
    if (twc_apply->parsed()) {
      const tags::Stream s = load_or_die(twa_in);
      const walk::WalkTable t = walk::load_walk_table(twa_table);
      tags::save_stream(walk::apply_correction(s, t), twa_out);
      std::printf("corrected %zu tags -> %s\n", s.size(), twa_out.c_str());
      return 0;
    }

    if (coincide->parsed()) {
      coinc::BinConfig bins;
      bins.period_ps = co_period;
      bins.guard_width_ps = co_guard;
      const auto res = coinc::find_coincidences(load_or_die(co_a), load_or_die(co_b),
                                                co_window, bins);
      const char* names = "EML";
      std::printf("coincidences %llu (guard-excluded A %llu, B %llu)\n",
                  static_cast<unsigned long long>(res.total_coincidences()),
                  static_cast<unsigned long long>(res.guard_excluded_a),
                  static_cast<unsigned long long>(res.guard_excluded_b));
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          std::printf("%c%c %llu%s", names[i], names[j],
                      static_cast<unsigned long long>(res.cells[i][j]),
                      j == 2 ? "\n" : " ");
      if (!co_out.empty()) {
        std::ofstream out(co_out);
        out << ",E,M,L\n";
        for (int i = 0; i < 3; ++i) {
          out << names[i];
          for (int j = 0; j < 3; ++j) out << "," << res.cells[i][j];
          out << "\n";
        }
      }
      return 0;
    }

    if (tomo_rec->parsed()) {
      std::ifstream in(tr_counts);
      if (!in) throw cfg::ConfigError("cannot open " + tr_counts);
      tomo::TomoCounts counts;
      const auto canon = tomo::canonical_projectors();
      std::string label;
      double value;
      while (in >> label >> value) {
        bool found = false;
        for (const auto& p : canon) {
          if (p.label == label) {
            counts.projectors.push_back(p);
            counts.counts.push_back(value);
            found = true;
            break;
          }
        }
        if (!found) throw cfg::ConfigError("unknown projector label: " + label);
      }
      const auto mle = tomo::mle_reconstruct(counts);
      tomo::save_density_csv(mle.rho, tr_out);
      std::printf("reconstructed in %d iterations (%s), rho -> %s\n",
                  mle.iterations, mle.converged ? "converged" : "iteration cap",
                  tr_out.c_str());
      std::printf("E_N = %.6f, E_I = %.6f\n", tomo::log_negativity(mle.rho),
                  tomo::coherent_information(mle.rho));
      return 0;
    }
    if (tomo_meas->parsed()) {
      const tomo::Matrix4 rho = tomo::load_density_csv(tm_rho);
      const auto m = tomo::entangled_rates(rho, tm_cab, tm_vis);
      std::printf("E_N = %.6f\nE_I = %.6f\n", tomo::log_negativity(rho),
                  tomo::coherent_information(rho));
      std::printf("C_N = %.6e ebit/s\nC_I = %.6e ebit/s\nSKR = %.6e bit/s\n",
                  m.log_negativity_rate, m.coherent_info_rate, m.secret_key_rate);
      return 0;
    }

    if (c_mu->parsed()) {
      std::printf("mu = %.6e\n", rates::mu_from_rates(
                                     {ca.s_a, ca.s_b, ca.c_ab, ca.rep}, ca.delta));
      return 0;
    }
    if (c_delta->parsed()) {
      std::printf("delta = %.6f\n", rates::delta_empirical(ca.c_ab, ca.eta, ca.s_a));
      return 0;
    }
    if (c_acc->parsed()) {
      const auto acc = rates::accidental_rate(ca.s_a, ca.s_b, ca.rep, ca.delta,
                                              ca.eta, ca.eta_b);
      std::printf("C_acc = %.6f Hz (ee %.6f, em %.6f, me %.6f)\n", acc.total,
                  acc.ee, acc.em, acc.me);
      return 0;
    }
    if (c_vc->parsed()) {
      std::printf("V_C = %.4f %%\n",
                  rates::visibility_corrected(ca.c_max, ca.c_min, ca.c_acc));
      return 0;
    }
    if (c_fov->parsed()) {
      std::printf("V = %.6f\n", rates::first_order_visibility(ca.mu, ca.v0));
      return 0;
    }
    if (c_pv->parsed()) {
      const auto v = rates::port_visibilities(ca.x, ca.kappa_a, ca.kappa_b,
                                              ca.eps_a, ca.eps_b);
      std::printf("V_A1B1 = %.6f\nV_A1B2 = %.6f\nV_A2B1 = %.6f\nV_A2B2 = %.6f\n",
                  v.a1b1, v.a1b2, v.a2b1, v.a2b2);
      return 0;
    }
    if (c_pr->parsed()) {
      rates::InterferometerSpec src;
      src.transmittance_t = ca.t;
      src.path_eff_alpha = ca.alpha;
      src.path_eff_beta = ca.beta;
      std::printf("mu_E/mu_L = %.6f\n", rates::source_port_mu_ratio(ca.port, src));
      return 0;
    }
    if (c_mv->parsed()) {
      std::printf("V = %.8f\n", rates::multiphoton_visibility(ca.mu_e, ca.mu_l));
      return 0;
    }
    if (c_mc->parsed()) {
      std::printf("C = %.8e\n", rates::multiphoton_coincidence(
                                    ca.mu_e, ca.mu_l, ca.tau_a, ca.tau_b, ca.phase));
      return 0;
    }
    if (c_fo->parsed()) {
      const auto r = rates::fock_coincidence_oracle(ca.mu_e, ca.mu_l, ca.tau_a,
                                                    ca.tau_b, ca.phase, ca.n_max);
      std::printf("C = %.8e (truncation loss %.2e%s)\n", r.probability,
                  r.truncation_loss, r.truncation_warning ? ", WARNING" : "");
      return 0;
    }
    if (c_g2->parsed()) {
      const auto g = rates::heralded_g2(ca.s_a, ca.eta, ca.rep, ca.mu);
      std::printf("g2(0) = %.6e (prefactor %.4f", g.g2, g.prefactor);
      if (g.slope_vs_mu > 0.0) std::printf(", slope vs mu %.4f", g.slope_vs_mu);
      std::printf(")\n");
      return 0;
    }
    if (c_h2->parsed()) {
      std::printf("H2 = %.8f\n", rates::binary_entropy(ca.p));
      return 0;
    }
    if (c_skr->parsed()) {
      std::printf("SKR = %.6e bit/s\n", rates::secret_key_rate(
                                            ca.c_ab, ca.visibility, ca.q, ca.f_ec));
      return 0;
    }
    if (c_sp->parsed()) {
      std::printf("C_full = %.6e Hz\n",
                  rates::full_wavefunction_scaling(
                      ca.c_ab, {ca.r_a, ca.r_b},
                      ca.from_min ? rates::PortScaling::TwoBranchesFromMin
                                  : rates::PortScaling::AllPorts));
      return 0;
    }
    if (c_de->parsed()) {
      std::printf("eta = %.6f\n", rates::detector_efficiency(
                                      ca.rate, {ca.eta0, ca.rate_3db}));
      return 0;
    }

    if (extrap->parsed()) {
      rates::RateMetrics base;
      base.mu = ex_mu0;
      base.coincidences_hz = ex_cab;
      base.log_negativity_rate = ex_cab * ex_en;
      base.coherent_info_rate = ex_cab * ex_ei;
      base.secret_key_rate = ex_cab * ex_skr;
      const auto r = rates::extrapolate_metrics(
          base, ex_singles, {ex_sen, ex_sei, ex_ses}, {1.0, ex_r3db}, ex_channels,
          ex_lo, ex_hi, ex_samples);
      std::ofstream out(ex_out);
      out.precision(12);
      out << "# pairsim " << kToolVersion << "\n";
      out << "mu,c_ab_hz,c_n_hz,c_i_hz,skr_hz\n";
      for (const auto& p : r.curve)
        out << p.mu << "," << p.metrics.coincidences_hz << ","
            << p.metrics.log_negativity_rate << "," << p.metrics.coherent_info_rate
            << "," << p.metrics.secret_key_rate << "\n";
      std::printf("mu* C_AB=%.4f C_N=%.4f C_I=%.4f SKR=%.4f -> %s\n",
                  r.mu_max_coincidences, r.mu_max_log_negativity,
                  r.mu_max_coherent_info, r.mu_max_skr, ex_out.c_str());
      return 0;
    }

    if (pipe->parsed()) {
      const cfg::RunConfig c = cfg::RunConfig::parse_file(pipe_config);
      const auto r = pipeline::run_pipeline(c);
      std::printf("pipeline %s, outputs in %s\n", r.ok ? "complete" : "partial",
                  r.out_dir.c_str());
      return r.ok ? 0 : 1;
    }
  } catch (const cfg::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const optics::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
