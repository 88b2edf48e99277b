#pragma once

#include <stdexcept>
#include <vector>

#include "pairsim/constants.hpp"
#include "pairsim/parallel.hpp"

namespace pairsim::rates {

struct RateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MeasuredRates {
  double singles_a_hz = 0.0;
  double singles_b_hz = 0.0;
  double coincidences_hz = 0.0;
  double repetition_rate_hz = kRepetitionRateHz;
};

struct InterferometerSpec {
  double transmittance_t = 0.70710678118654752;  // |t|, balanced
  double path_eff_alpha = 1.0;                   // short-arm mirror, |alpha|^2
  double path_eff_beta = 1.0;                    // long-arm mirror, |beta|^2
  double phase_rad = 0.0;
  double delay_ps = 80.0;
};

struct PortRatios {
  double r_a = 0.99;
  double r_b = 1.04;
};

struct SaturationSpec {
  double nominal_efficiency = 1.0;
  double rate_3db_hz = 15.5e6;
};

struct RateMetrics {
  double mu = 0.0;
  double coincidences_hz = 0.0;   // C_AB
  double log_negativity_rate = 0.0;   // C_N, ebits/s
  double coherent_info_rate = 0.0;    // C_I, ebits/s
  double secret_key_rate = 0.0;       // bits/s
};

// mu = delta S_A S_B / (R C_AB)
double mu_from_rates(const MeasuredRates& rates, double delta);

// delta = C / (eta * S_other)
double delta_empirical(double coincidences_hz, double eta, double singles_other_hz);

struct AccidentalRates {
  double ee = 0.0;  // both photons from incompatible spectral regions
  double em = 0.0;  // compatible at A, incompatible at B
  double me = 0.0;
  double total = 0.0;
};

// C_Acc = (1/R) (1-delta) S_A S_B (delta(1-eta_A) + delta(1-eta_B) + 1-delta)
AccidentalRates accidental_rate(double singles_a_hz, double singles_b_hz,
                                double repetition_rate_hz, double delta,
                                double eta_a, double eta_b);

// percent; accidental-subtracted with negatives clamped to zero
double visibility_corrected(double c_max_hz, double c_min_hz, double c_acc_hz);

// V0 / (1 + mu)
double first_order_visibility(double mu, double v0);

struct PortVisibilities {
  double a1b1 = 0.0;
  double a1b2 = 0.0;
  double a2b1 = 0.0;
  double a2b2 = 0.0;
};

// Entanglement visibilities of the four output-port pairings as a function
// of x = mu_E/mu_L and the interferometer ratios kappa = |beta|^2/|alpha|^2,
// epsilon = |t|^2/|r|^2.
PortVisibilities port_visibilities(double x, double kappa_a, double kappa_b,
                                   double eps_a, double eps_b);

// mu_E/mu_L from the source interferometer: port 1 |alpha|^4/|beta|^4,
// port 2 |r|^8 |alpha|^4 / (|t|^8 |beta|^4)
double source_port_mu_ratio(int port, const InterferometerSpec& src);

// Middle-bin coincidence probability of the two-TMSV model with temporal
// mixers of transmittance tau_a, tau_b (detectors: A output 1, B output 2).
double multiphoton_coincidence(double mu_e, double mu_l, double tau_a,
                               double tau_b, double phase_rad);

// Balanced-mixer entanglement visibility including all multiphoton orders.
double multiphoton_visibility(double mu_e, double mu_l);

struct FockOracleResult {
  double probability = 0.0;
  double truncation_loss = 0.0;
  bool truncation_warning = false;  // loss > 1e-8
};

// Truncated Fock-space evaluation of the same coincidence probability:
// TMSV(mu_E) x TMSV(mu_L) through the two temporal-mode beamsplitters,
// threshold detection on A output 1 and B output 2.
FockOracleResult fock_coincidence_oracle(double mu_e, double mu_l, double tau_a,
                                         double tau_b, double phase_rad,
                                         int n_max = 4);

struct HeraldedG2 {
  double g2 = 0.0;         // 2 (2 - eta_i) S_i / (R eta_i)
  double prefactor = 0.0;  // 2 (2 - eta_i)
  double slope_vs_mu = 0.0;  // g2 / mu for a caller-supplied mu mapping (0 if none)
};

HeraldedG2 heralded_g2(double singles_i_hz, double eta_i, double repetition_rate_hz,
                       double mu_mapping = 0.0);

// H2(p) = -p log2 p - (1-p) log2(1-p), H2(0) = H2(1) = 0
double binary_entropy(double p);

// max(0, q C [1 - f_ec H2(E) - H2(E)]) with E = (1 - V)/2
double secret_key_rate(double coincidences_hz, double visibility, double q = 0.81,
                       double f_ec = 1.1);

enum class PortScaling { AllPorts, TwoBranchesFromMin };

// Supp.-note-2 scaling from a single measured port pair to the full
// wavefunction: all ports C (1 + R_A + R_B + R_A R_B); from a phase-min
// measurement C (4/3)(1 + R_A R_B).
double full_wavefunction_scaling(double c_measured_hz, const PortRatios& ratios,
                                 PortScaling mode);

// eta0 / (1 + rate / rate_3dB)
double detector_efficiency(double rate_hz, const SaturationSpec& sat);

struct QualitySlopes {
  double d_log_negativity = 0.0;  // dE_N/dmu, negative
  double d_coherent_info = 0.0;   // dE_I/dmu
  double d_secret_fraction = 0.0; // dE_S/dmu
};

struct ExtrapolationPoint {
  double mu = 0.0;
  RateMetrics metrics;  // per channel_count channels
};

struct ExtrapolationResult {
  std::vector<ExtrapolationPoint> curve;
  double mu_max_coincidences = 0.0;
  double mu_max_log_negativity = 0.0;
  double mu_max_coherent_info = 0.0;
  double mu_max_skr = 0.0;
};

// Scales the baseline through the saturation model (singles load grows
// proportionally to mu, the efficiency penalty applies on both arms) and the
// linear quality laws, clamped at zero.
ExtrapolationResult extrapolate_metrics(const RateMetrics& baseline,
                                        double baseline_singles_hz,
                                        const QualitySlopes& slopes,
                                        const SaturationSpec& sat,
                                        int channel_count, double mu_lo,
                                        double mu_hi, int samples = 400,
                                        Exec mode = exec_mode());

}  // namespace pairsim::rates
