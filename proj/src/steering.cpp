#include "cfisac/scenario.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cfisac {

Eigen::VectorXcd steering_vector(double theta, int n_antennas) {
  if (n_antennas < 1) throw std::invalid_argument("steering_vector: N must be >= 1");
  if (!std::isfinite(theta)) throw std::invalid_argument("steering_vector: theta must be finite");
  Eigen::VectorXcd a(n_antennas);
  const double ps = std::numbers::pi * std::sin(theta);
  for (int n = 0; n < n_antennas; ++n) {
    a(n) = std::polar(1.0, ps * n);
  }
  return a;
}

Eigen::VectorXcd steering_derivative(double theta, int n_antennas) {
  if (n_antennas < 1) throw std::invalid_argument("steering_derivative: N must be >= 1");
  if (!std::isfinite(theta)) throw std::invalid_argument("steering_derivative: theta must be finite");
  Eigen::VectorXcd da(n_antennas);
  const double ps = std::numbers::pi * std::sin(theta);
  const double pc = std::numbers::pi * std::cos(theta);
  for (int n = 0; n < n_antennas; ++n) {
    // j * pi * n * cos(theta) * e^{j pi n sin(theta)}; exactly 0 at n = 0.
    da(n) = cplx(0.0, pc * n) * std::polar(1.0, ps * n);
  }
  return da;
}

double broadside_angle(const Eigen::Vector2d& ap, const Eigen::Vector2d& target) {
  const Eigen::Vector2d d = target - ap;
  if (d.squaredNorm() == 0.0) {
    throw std::invalid_argument("broadside_angle: target coincides with the AP");
  }
  return std::atan2(d.x(), d.y());
}

}  // namespace cfisac
