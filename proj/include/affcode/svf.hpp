#pragma once

// The singular value function Φ^s(T) = σ1⋯σ_m σ_{m+1}^{s-m}, m = ⌊s⌋ (capped
// so that the last factor is σ_d for s ≥ d), in plain and log domain.

#include <utility>

#include "affcode/linalg.hpp"

namespace affcode {

// Numerical slack shared by the library and its tests.
struct Tolerances {
  // Relative error allowed in exact identities (spectrum product = |det|).
  static constexpr double kIdentityRel = 1e-12;
  // Additive slack on log-domain inequalities.
  static constexpr double kInequalitySlack = 1e-10;
  // |det| below this makes a map singular for family validation.
  static constexpr double kSingularDet = 1e-14;
  // Slack on the (★) bound check.
  static constexpr double kStarSlack = 1e-9;
  // Probability vectors must sum to one within this.
  static constexpr double kWeightSum = 1e-12;
};

// Throws DomainError for s < 0 or non-finite s.
double log_phi(const LogSpectrum& spectrum, double s);
double log_phi(const SingularSpectrum& spectrum, double s);
double log_phi(const Matrix& t, double s);
double phi(const Matrix& t, double s);

// (sigma_lo^s, sigma_hi^s); requires 0 < sigma_lo <= sigma_hi < 1.
std::pair<double, double> phi_bounds(double s, double sigma_lo, double sigma_hi);

}  // namespace affcode
