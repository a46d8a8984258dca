#pragma once

// Desk-scale fixture constants.  The staged-pipeline guarantees are
// asymptotic, so the finite-size multipliers below were pinned by one-time
// sweeps (tools/gtsim sweep) and are version-controlled here; tests and the
// acceptance suite read them from this header only.

namespace gt::fixtures {

// Two-stage pipeline, threshold-decoder stage 1 (small instances only).
inline constexpr double kAlg1ThresholdC1 = 8.0;
inline constexpr double kAlg1ThresholdC2a = 8.0;
inline constexpr double kAlg1ThresholdAlpha1 = 0.25;

// Two-stage pipeline, separate-decoding stage 1.  c1 absorbs the 1/log 2
// penalty of the per-item decoder.
inline constexpr double kAlg1SeparateC1 = 2.2;
inline constexpr double kAlg1SeparateC2a = 10.0;
inline constexpr double kAlg1SeparateAlpha1 = 0.9;

// Three-stage pipeline (separate-decoding stage 1 at desk scale).
inline constexpr double kAlg2C1 = 0.8;
inline constexpr double kAlg2C2a = 14.0;
inline constexpr double kAlg2Gamma = 0.5;
inline constexpr double kAlg2Delta2 = 0.3;
inline constexpr double kAlg2Alpha2 = 0.3;
inline constexpr double kAlg2Delta3 = 0.01;

// Noiseless two-stage.
inline constexpr double kNoiselessC1 = 3.2;
inline constexpr double kNoiselessC2a = 5.0;
inline constexpr double kNoiselessAlpha1 = 0.25;

// Z-channel three-stage.
inline constexpr double kZChannelC1 = 1.4;
inline constexpr double kZChannelC2a = 30.0;
inline constexpr double kZChannelAlpha1 = 0.9;
inline constexpr double kZChannelC3 = 2.0;

// Common slacks.
inline constexpr double kEta = 0.5;
inline constexpr double kDelta1 = 0.1;  // threshold-table slack

// Standalone NCOMP exact recovery, n = ceil(c k log p); found by sweep.
inline constexpr double kNcompTestScale = 24.0;

// Z-channel NCOMP wants a hotter design and more tests at rho = 0.3.
inline constexpr double kNcompZTestScale = 30.0;
inline constexpr double kNcompZNu = 1.5;

// Separate decoding partial recovery, n = ceil((mult/log 2) k log(p/k)).
inline constexpr double kSeparatePartialMult = 4.0;

}  // namespace gt::fixtures
