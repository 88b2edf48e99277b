#pragma once

#include <cstdint>

namespace pairsim {

inline constexpr double kSpeedOfLight = 299792458.0;        // m/s
inline constexpr double kSpeedOfLightNmHz = 2.99792458e17;  // nm * Hz

// System clock of the source: 4.09 GHz mode-locked laser.
inline constexpr double kRepetitionRateHz = 4.09e9;
inline constexpr double kClockPeriodPs = 1e12 / kRepetitionRateHz;  // 244.4988 ps

// Nominal time-bin centers inside one clock period (ps) and the guard
// boundaries between them.
inline constexpr double kEarlyBinPs = 40.0;
inline constexpr double kMiddleBinPs = 120.0;
inline constexpr double kLateBinPs = 200.0;
inline constexpr double kGuardCenter1Ps = 80.0;
inline constexpr double kGuardCenter2Ps = 160.0;
inline constexpr double kDefaultGuardWidthPs = 10.0;

// 100 GHz ITU grid: channel n sits at 190.0 THz + n * 100 GHz.
inline constexpr double ituChannelFrequencyHz(int channel) {
  return 190.0e12 + channel * 100.0e9;
}

inline constexpr double frequencyToWavelengthNm(double hz) {
  return kSpeedOfLightNmHz / hz;
}

inline constexpr double wavelengthToFrequencyHz(double nm) {
  return kSpeedOfLightNmHz / nm;
}

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace pairsim
