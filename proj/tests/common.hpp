#pragma once

#include <complex>

#include "hhvix/hhvix.hpp"

namespace hhvix::testing {

// The reference parameter set used throughout the tests.
inline ModelParams test_params() { return ModelParams{}; }
inline JumpLaw test_jump() { return JumpLaw::exponential(20.0); }

inline RiccatiModel test_model(double a = 0.0) {
  const auto p = test_params();
  return RiccatiModel::from(p, MeasureShift::from(p, a), test_jump());
}

inline SimModel sim_model(const ModelParams& p, const JumpLaw& jump, double a = 0.0) {
  return {p, MeasureShift::from(p, a), jump};
}

// |x - y| <= n * se.
inline bool within_se(double x, double y, double se, double n = 3.0) { return std::abs(x - y) <= n * se; }

}  // namespace hhvix::testing
