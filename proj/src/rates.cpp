#include "pairsim/rates.hpp"

#include <algorithm>
#include <cmath>

namespace pairsim::rates {

double mu_from_rates(const MeasuredRates& r, double delta) {
  if (r.coincidences_hz <= 0.0)
    throw RateError("mu_from_rates: zero coincidence rate");
  return delta * r.singles_a_hz * r.singles_b_hz /
         (r.repetition_rate_hz * r.coincidences_hz);
}

double delta_empirical(double coincidences_hz, double eta, double singles_other_hz) {
  if (eta <= 0.0 || singles_other_hz <= 0.0)
    throw RateError("delta_empirical: zero denominator");
  return coincidences_hz / (eta * singles_other_hz);
}

AccidentalRates accidental_rate(double singles_a_hz, double singles_b_hz,
                                double repetition_rate_hz, double delta,
                                double eta_a, double eta_b) {
  AccidentalRates acc;
  const double load = singles_a_hz * singles_b_hz / repetition_rate_hz;
  acc.ee = (1.0 - delta) * (1.0 - delta) * load;
  acc.em = (1.0 - delta) * delta * (1.0 - eta_a) * load;
  acc.me = (1.0 - delta) * delta * (1.0 - eta_b) * load;
  acc.total = acc.ee + acc.em + acc.me;
  return acc;
}

double visibility_corrected(double c_max_hz, double c_min_hz, double c_acc_hz) {
  const double hi = std::max(0.0, c_max_hz - c_acc_hz);
  const double lo = std::max(0.0, c_min_hz - c_acc_hz);
  if (hi + lo <= 0.0)
    throw RateError("visibility undefined: corrected rates sum to zero");
  return 100.0 * (hi - lo) / (hi + lo);
}

double first_order_visibility(double mu, double v0) { return v0 / (1.0 + mu); }

PortVisibilities port_visibilities(double x, double kappa_a, double kappa_b,
                                   double eps_a, double eps_b) {
  const double ba = std::sqrt(kappa_b / kappa_a);
  const double ab = std::sqrt(kappa_a / kappa_b);
  const double sx = 2.0 * std::sqrt(x);
  PortVisibilities v;
  v.a1b1 = sx / (ba + ab * x);
  v.a1b2 = sx / (ba / eps_b + ab * eps_b * x);
  v.a2b1 = sx / (ba / eps_a + ab * eps_a * x);
  v.a2b2 = sx / (ba / (eps_a * eps_b) + ab * eps_a * eps_b * x);
  return v;
}

double source_port_mu_ratio(int port, const InterferometerSpec& src) {
  const double a2 = src.path_eff_alpha;
  const double b2 = src.path_eff_beta;
  const double t2 = src.transmittance_t * src.transmittance_t;
  const double r2 = 1.0 - t2;
  if (port == 1) return (a2 * a2) / (b2 * b2);
  if (port == 2) return (r2 * r2 * r2 * r2 * a2 * a2) / (t2 * t2 * t2 * t2 * b2 * b2);
  throw RateError("source_port_mu_ratio: port must be 1 or 2");
}

double multiphoton_coincidence(double mu_e, double mu_l, double tau_a,
                               double tau_b, double phase_rad) {
  const double f = 1.0 + mu_l + tau_a * (mu_e - mu_l);
  const double g = 1.0 + mu_e + tau_b * (mu_l - mu_e);
  const double h =
      1.0 + mu_e + mu_l * (1.0 + mu_e) * (1.0 - tau_a) -
      mu_e * tau_b * (1.0 + mu_l) + tau_a * tau_b * (mu_e + mu_l + 2.0 * mu_e * mu_l) -
      2.0 * std::sqrt(mu_e * mu_l * tau_a * (1.0 + mu_e) * (1.0 + mu_l) *
                      (1.0 - tau_a)) *
          std::sqrt(tau_b * (1.0 - tau_b)) * std::cos(phase_rad);
  return 1.0 - 1.0 / std::abs(f) - 1.0 / std::abs(g) + 1.0 / std::abs(h);
}

double multiphoton_visibility(double mu_e, double mu_l) {
  if (mu_e <= 0.0 && mu_l <= 0.0)
    throw RateError("multiphoton_visibility undefined at mu_E = mu_L = 0");
  const double s = std::sqrt(mu_e * mu_l * (1.0 + mu_e) * (1.0 + mu_l));
  const auto G = [&](double sign) {
    return mu_e * mu_e * (9.0 + 8.0 * mu_l * (2.0 + mu_l)) +
           (4.0 + 3.0 * mu_l) * (sign * 4.0 + sign * 3.0 * mu_l + 4.0 * s) * sign +
           2.0 * mu_e * (12.0 + sign * 6.0 * s) +
           2.0 * mu_e * mu_l * (19.0 + 8.0 * mu_l + sign * 4.0 * s);
  };
  const double gp = G(+1.0);
  const double gm = G(-1.0);
  const double num = 2.0 / std::sqrt(gm) - 2.0 / std::sqrt(gp);
  const double den = 1.0 - 4.0 / (2.0 + mu_e + mu_l) + 2.0 / std::sqrt(gm) +
                     2.0 / std::sqrt(gp);
  return num / den;
}

HeraldedG2 heralded_g2(double singles_i_hz, double eta_i, double repetition_rate_hz,
                       double mu_mapping) {
  if (eta_i <= 0.0) throw RateError("heralded_g2: eta_i must be positive");
  HeraldedG2 out;
  out.prefactor = 2.0 * (2.0 - eta_i);
  out.g2 = out.prefactor * singles_i_hz / (repetition_rate_hz * eta_i);
  if (mu_mapping > 0.0) out.slope_vs_mu = out.g2 / mu_mapping;
  return out;
}

double binary_entropy(double p) {
  if (p < 0.0 || p > 1.0) throw RateError("binary_entropy: p outside [0, 1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double secret_key_rate(double coincidences_hz, double visibility, double q,
                       double f_ec) {
  if (visibility < 0.0 || visibility > 1.0)
    throw RateError("secret_key_rate: visibility outside [0, 1]");
  const double qber = (1.0 - visibility) / 2.0;
  const double h = binary_entropy(qber);
  return std::max(0.0, q * coincidences_hz * (1.0 - f_ec * h - h));
}

double full_wavefunction_scaling(double c_measured_hz, const PortRatios& ratios,
                                 PortScaling mode) {
  if (mode == PortScaling::AllPorts)
    return c_measured_hz * (1.0 + ratios.r_a + ratios.r_b + ratios.r_a * ratios.r_b);
  return c_measured_hz * (4.0 / 3.0) * (1.0 + ratios.r_a * ratios.r_b);
}

double detector_efficiency(double rate_hz, const SaturationSpec& sat) {
  if (rate_hz < 0.0) throw RateError("detector_efficiency: negative rate");
  return sat.nominal_efficiency / (1.0 + rate_hz / sat.rate_3db_hz);
}

ExtrapolationResult extrapolate_metrics(const RateMetrics& baseline,
                                        double baseline_singles_hz,
                                        const QualitySlopes& slopes,
                                        const SaturationSpec& sat,
                                        int channel_count, double mu_lo,
                                        double mu_hi, int samples, Exec mode) {
  if (!(mu_hi > mu_lo) || samples < 2)
    throw RateError("extrapolate_metrics: empty mu range");
  if (baseline.mu < mu_lo || baseline.mu > mu_hi)
    throw RateError("extrapolate_metrics: baseline mu outside range");
  if (baseline.coincidences_hz <= 0.0)
    throw RateError("extrapolate_metrics: baseline coincidence rate must be > 0");

  // Baseline qualities (per coincidence) and the saturation reference.
  const double en0 = baseline.log_negativity_rate / baseline.coincidences_hz;
  const double ei0 = baseline.coherent_info_rate / baseline.coincidences_hz;
  const double es0 = baseline.secret_key_rate / baseline.coincidences_hz;

  // The detector load grows with the unsaturated singles rate. Invert the
  // measured baseline singles through the saturation law to get the incident
  // load, then scale it linearly with mu.
  const double sat_factor0 = 1.0 / (1.0 + baseline_singles_hz / sat.rate_3db_hz);
  double incident0 = baseline_singles_hz;
  if (baseline_singles_hz < sat.rate_3db_hz)
    incident0 = baseline_singles_hz / (1.0 - baseline_singles_hz / sat.rate_3db_hz);
  (void)sat_factor0;
  const double eff0 = 1.0 / (1.0 + incident0 / sat.rate_3db_hz);

  ExtrapolationResult out;
  out.curve.resize(samples);
  parallel_for(
      static_cast<std::size_t>(samples),
      [&](std::size_t k) {
        const double mu =
            mu_lo + (mu_hi - mu_lo) * static_cast<double>(k) / (samples - 1);
        const double incident = incident0 * mu / baseline.mu;
        const double eff = 1.0 / (1.0 + incident / sat.rate_3db_hz);
        const double arm_penalty = (eff / eff0) * (eff / eff0);
        RateMetrics m;
        m.mu = mu;
        m.coincidences_hz = channel_count * baseline.coincidences_hz *
                            (mu / baseline.mu) * arm_penalty;
        const double en = std::max(0.0, en0 + slopes.d_log_negativity * (mu - baseline.mu));
        const double ei = std::max(0.0, ei0 + slopes.d_coherent_info * (mu - baseline.mu));
        const double es = std::max(0.0, es0 + slopes.d_secret_fraction * (mu - baseline.mu));
        m.log_negativity_rate = m.coincidences_hz * en;
        m.coherent_info_rate = m.coincidences_hz * ei;
        m.secret_key_rate = m.coincidences_hz * es;
        out.curve[k] = {mu, m};
      },
      mode);

  auto argmax = [&](auto field) {
    double best_mu = out.curve.front().mu;
    double best = field(out.curve.front().metrics);
    for (const auto& p : out.curve) {
      const double v = field(p.metrics);
      if (v > best) {
        best = v;
        best_mu = p.mu;
      }
    }
    return best_mu;
  };
  out.mu_max_coincidences =
      argmax([](const RateMetrics& m) { return m.coincidences_hz; });
  out.mu_max_log_negativity =
      argmax([](const RateMetrics& m) { return m.log_negativity_rate; });
  out.mu_max_coherent_info =
      argmax([](const RateMetrics& m) { return m.coherent_info_rate; });
  out.mu_max_skr = argmax([](const RateMetrics& m) { return m.secret_key_rate; });
  return out;
}

}  // namespace pairsim::rates
