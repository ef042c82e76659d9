#pragma once

// Regression bounds frozen from first measurements (tcflow_calibrate prints the raw numbers; the
// README lists how each was taken). Each is the measured extreme with about 2x headroom; none is
// a constant from the analysis.

namespace tcflow::regression {

/// Lower bound for Psi / ((nu k^2)^{1/3} |B|^{2/3} R^{-2}) over the default sweep (measured 1.193).
inline constexpr double kPsiRatioFloor = 0.6;
/// Largest allowed max/min spread of that ratio across a sweep (measured 1.385).
inline constexpr double kPsiRatioSpread = 10.0;
/// Bracket for the same ratio at nu = 1e-4, B = 1, R = 2, k = 1, N = 96 (measured 1.3733).
inline constexpr double kPsiSinglePointLow = 1.30;
inline constexpr double kPsiSinglePointHigh = 1.45;

/// Forced response, h2 = 0, h1 = e^{-t} bump, LHS / RHS (measured 0.212).
inline constexpr double kForcedResponseRatio = 0.45;

/// |kB||k|(log R)^2 integral / ||r^2 w0||^2 for the phase-mixed evolution (measured 1.059, R = 4, k = 2).
inline constexpr double kIntegratedDamping = 2.2;

/// Viscous damping check LHS / RHS (measured 0.0183).
inline constexpr double kViscousDamping = 0.04;

/// ||mean(t)|| <= 2 ||mean(0)|| + kMeanGrowth * E(0) for amplitudes up to nu^{1/2}|B|^{1/2}R^{-2}
/// (measured 5.1e-4 from a zero-mean start).
inline constexpr double kMeanGrowth = 1e-3;

/// Nonlinear energy transfer relative to sum ||N_k|| ||w_k||, random profile, N = 96 (measured 1.7e-16).
inline constexpr double kTransferNeutrality = 1e-12;

/// ||w - mean||(t) <= kDecayPrefactor e^{-kDecayRate mu_1 t} ||w - mean||(0) (measured prefactor 1.021).
inline constexpr double kDecayPrefactor = 2.05;
inline constexpr double kDecayRate = 0.5;

}  // namespace tcflow::regression
