#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "ranla/reward.hpp"
#include "ranla/rng.hpp"

namespace ranla {

/**
 * Preference vector over the two reward objectives (bits, resource).
 * Components are non-negative and sum to 1; omega[0] weighs delivered
 * throughput, omega[1] weighs resource thrift / reliability.
 */
using PreferenceVector = Eigen::Vector2d;

// Scalar intent in [0,1] -> (w, 1-w). 1.0 is pure-throughput, 0.0 is
// pure-resource.
inline PreferenceVector preference_from_scalar(double w) {
  if (!(w >= 0.0 && w <= 1.0))
    throw std::invalid_argument("preference_from_scalar: scalar outside [0,1]");
  return PreferenceVector(w, 1.0 - w);
}

// Uniform sample from the (m-1)-simplex via normalized exponential draws.
inline Eigen::VectorXd sample_preference_dim(Rng& rng, int m) {
  if (m < 1) throw std::invalid_argument("sample_preference_dim: m must be >= 1");
  Eigen::VectorXd w(m);
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    double u = rng.uniform();
    // uniform() is in [0,1); flip so the log argument is in (0,1].
    w[i] = -std::log(1.0 - u);
    total += w[i];
  }
  if (total <= 0.0) {
    w.setConstant(1.0 / m);
    return w;
  }
  w /= total;
  return w;
}

inline PreferenceVector sample_preference(Rng& rng) {
  Eigen::VectorXd w = sample_preference_dim(rng, kNumObjectives);
  return PreferenceVector(w[0], w[1]);
}

}  // namespace ranla
