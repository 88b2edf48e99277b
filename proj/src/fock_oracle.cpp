#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include "pairsim/rates.hpp"

namespace pairsim::rates {

namespace {

using cd = std::complex<double>;

double binom(int n, int k) {
  double v = 1.0;
  for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
  return v;
}

double factorial(int n) {
  double v = 1.0;
  for (int i = 2; i <= n; ++i) v *= i;
  return v;
}

// (cE . a^+)^n (cL . a^+)^m |0> over two modes; returns amplitudes keyed by
// the occupation (k1, k2), including the Fock normalization sqrt(k1! k2!).
std::map<std::pair<int, int>, cd> expand_side(int n, int m, const cd cE[2],
                                              const cd cL[2]) {
  std::map<std::pair<int, int>, cd> out;
  for (int j = 0; j <= n; ++j) {
    for (int l = 0; l <= m; ++l) {
      const int k1 = j + l;
      const int k2 = (n - j) + (m - l);
      cd amp = binom(n, j) * binom(m, l);
      amp *= std::pow(cE[0], j) * std::pow(cE[1], n - j);
      amp *= std::pow(cL[0], l) * std::pow(cL[1], m - l);
      out[{k1, k2}] += amp;
    }
  }
  for (auto& [key, amp] : out)
    amp *= std::sqrt(factorial(key.first) * factorial(key.second));
  return out;
}

}  // namespace

FockOracleResult fock_coincidence_oracle(double mu_e, double mu_l, double tau_a,
                                         double tau_b, double phase_rad,
                                         int n_max) {
  if (n_max < 2 || n_max > 6)
    throw RateError("fock_coincidence_oracle: n_max must be in [2, 6]");
  if (tau_a < 0.0 || tau_a > 1.0 || tau_b < 0.0 || tau_b > 1.0)
    throw RateError("fock_coincidence_oracle: tau outside [0, 1]");

  // Symmetric temporal beamsplitters; creation operators carry the
  // conjugated coefficients of a -> sqrt(tau) a1 + i sqrt(1-tau) a2.
  const cd I(0.0, 1.0);
  const cd aE[2] = {std::sqrt(tau_a), -I * std::sqrt(1.0 - tau_a)};
  const cd aL[2] = {-I * std::sqrt(1.0 - tau_a), std::sqrt(tau_a)};
  const cd bE[2] = {std::sqrt(tau_b), -I * std::sqrt(1.0 - tau_b)};
  const cd bL[2] = {-I * std::sqrt(1.0 - tau_b), std::sqrt(tau_b)};

  const auto tmsv = [](double mu, int n) {
    return (n % 2 == 0 ? 1.0 : -1.0) *
           std::sqrt(std::pow(mu, n) / std::pow(1.0 + mu, n + 1));
  };

  // joint state over (k1, k2, k3, k4)
  std::map<std::array<int, 4>, cd> state;
  for (int n = 0; n <= n_max; ++n) {
    for (int m = 0; m <= n_max; ++m) {
      const cd c = tmsv(mu_e, n) * tmsv(mu_l, m) *
                   std::exp(I * (phase_rad * m)) /
                   (factorial(n) * factorial(m));
      const auto A = expand_side(n, m, aE, aL);
      const auto B = expand_side(n, m, bE, bL);
      for (const auto& [ka, va] : A) {
        for (const auto& [kb, vb] : B) {
          state[{ka.first, ka.second, kb.first, kb.second}] += c * va * vb;
        }
      }
    }
  }

  double norm = 0.0, p0_1 = 0.0, p0_4 = 0.0, p0_14 = 0.0;
  for (const auto& [k, amp] : state) {
    const double w = std::norm(amp);
    norm += w;
    if (k[0] == 0) p0_1 += w;
    if (k[3] == 0) p0_4 += w;
    if (k[0] == 0 && k[3] == 0) p0_14 += w;
  }

  FockOracleResult res;
  res.probability = norm - p0_1 - p0_4 + p0_14;
  res.truncation_loss = 1.0 - norm;
  res.truncation_warning = res.truncation_loss > 1e-8;
  return res;
}

}  // namespace pairsim::rates
