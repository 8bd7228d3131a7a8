#include "affcode/svf.hpp"

#include <cmath>

#include "affcode/errors.hpp"

namespace affcode {

namespace {

void check_exponent(double s) {
  if (!(s >= 0.0) || !std::isfinite(s)) {
    throw DomainError("singular value exponent must be a finite s >= 0");
  }
}

template <typename LogValue>
double log_phi_impl(int d, double s, LogValue log_value) {
  check_exponent(s);
  const int full = std::min(static_cast<int>(std::floor(s)), d - 1);
  double sum = 0.0;
  for (int i = 0; i < full; ++i) sum += log_value(i);
  const double frac = s - static_cast<double>(full);
  if (frac != 0.0) sum += frac * log_value(full);
  return sum;
}

}  // namespace

double log_phi(const LogSpectrum& spectrum, double s) {
  return log_phi_impl(spectrum.dim, s, [&](int i) {
    return spectrum.values[static_cast<std::size_t>(i)];
  });
}

double log_phi(const SingularSpectrum& spectrum, double s) {
  return log_phi_impl(spectrum.dim(), s,
                      [&](int i) { return std::log(spectrum[i]); });
}

double log_phi(const Matrix& t, double s) {
  check_exponent(s);
  return log_phi(log_singular_values(t), s);
}

double phi(const Matrix& t, double s) {
  check_exponent(s);
  if (s == 0.0) {
    singular_values(t);  // still rejects singular input
    return 1.0;
  }
  return std::exp(log_phi(t, s));
}

std::pair<double, double> phi_bounds(double s, double sigma_lo, double sigma_hi) {
  check_exponent(s);
  if (!(sigma_lo > 0.0 && sigma_lo <= sigma_hi && sigma_hi < 1.0)) {
    throw DomainError("spectral bounds must satisfy 0 < lo <= hi < 1");
  }
  return {std::pow(sigma_lo, s), std::pow(sigma_hi, s)};
}

}  // namespace affcode
