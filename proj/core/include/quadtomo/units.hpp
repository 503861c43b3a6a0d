#pragma once

// Internal unit system: lengths in micrometres, times in milliseconds,
// temperatures in nanokelvin, and energies as angular frequencies in rad/ms
// (hbar = 1). Every conversion into that system goes through this header.

#include <numbers>

namespace quadtomo::units {

inline constexpr double kPi = std::numbers::pi;

// CODATA 2018 exact SI values.
inline constexpr double kBoltzmannJPerK = 1.380649e-23;
inline constexpr double kHbarJs = 1.054571817e-34;
inline constexpr double kAtomicMassUnitKg = 1.66053906660e-27;

// k_B / hbar expressed in (rad/ms)/nK, 12 significant digits.
inline constexpr double kBoltzmannOverHbar = 0.130920339207;

inline constexpr double kRubidium87MassU = 86.909180527;
inline constexpr double kRubidium87ScatteringLengthNm = 5.24;

// hbar / m in um^2/ms for an atom of the given mass in unified atomic mass units.
double hbarOverMass(double massU);

// Frequency in Hz to angular frequency in rad/ms.
constexpr double hzToRadPerMs(double hz) { return 2.0 * kPi * hz * 1e-3; }
constexpr double radPerMsToHz(double w) { return w * 1e3 / (2.0 * kPi); }

constexpr double nmToUm(double nm) { return nm * 1e-3; }

// Thermal energy k_B T in rad/ms.
constexpr double thermalEnergy(double temperatureNk) { return kBoltzmannOverHbar * temperatureNk; }

}  // namespace quadtomo::units
