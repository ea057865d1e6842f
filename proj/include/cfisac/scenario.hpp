// Network geometry, deterministic channel generation, and ULA steering
// vectors for the secure cell-free ISAC waveform designer.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace cfisac {

using cplx = std::complex<double>;

/// Half-wavelength ULA response toward angle theta (radians from broadside,
/// array axis parallel to x): a_n = exp(j*pi*n*sin(theta)), n = 0..N-1.
Eigen::VectorXcd steering_vector(double theta, int n_antennas);

/// Analytic derivative of steering_vector in theta:
/// entry n = j*pi*n*cos(theta)*exp(j*pi*n*sin(theta)); entry 0 is exactly 0.
Eigen::VectorXcd steering_derivative(double theta, int n_antennas);

/// Angle of `target` as seen from an AP at `ap`, measured from array
/// broadside (+y), ULA axis parallel to x: theta = atan2(dx, dy).
double broadside_angle(const Eigen::Vector2d& ap, const Eigen::Vector2d& target);

/**
 * @brief Full description of one network instance.
 *
 * Positions in meters. delta2(rx, tx) is the Swerling-I gain variance
 * (delta_tx^rx)^2 for the echo transmitted by AP `tx` and received by AP
 * `rx`. gamma holds the per-UE SINR floors (linear), psi the Eve SNR ceiling
 * (linear). S = K + 1 streams always: one per UE plus one sensing stream.
 */
struct ScenarioConfig {
  std::vector<Eigen::Vector2d> ap_positions;
  std::vector<Eigen::Vector2d> ue_positions;
  Eigen::Vector2d eve_position{0.0, 0.0};
  int N = 0;                      ///< antennas per AP array
  int M = 0;                      ///< number of APs (= |ap_positions|)
  int K = 0;                      ///< number of UEs (= |ue_positions|)
  std::vector<double> P_m;        ///< per-AP power budget, watts
  double sigma2_c = 1.0;          ///< communication noise variance
  double sigma2_s = 1.0;          ///< sensing noise variance
  Eigen::MatrixXd delta2;         ///< M x M Swerling-I variances, (rx, tx)
  std::vector<double> gamma;      ///< per-UE SINR floor, linear
  double psi = 1.0;               ///< Eve SNR ceiling, linear
  std::uint64_t rng_seed = 1;

  int num_streams() const { return K + 1; }
  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

/**
 * @brief Deterministically generated instance: target angles, Swerling-I
 *        gain realization, and stacked UE channel vectors.
 *
 * theta[m] is the Eve angle from AP m's broadside. alpha(rx, tx) is the
 * drawn complex gain alpha_tx^rx ~ CN(0, delta2(rx, tx)); the realization
 * doubles as the nominal value the information matrix is evaluated at.
 * h[k] stacks the per-AP blocks h_{m,k} (length N each) into one N*M vector.
 */
struct Scenario {
  ScenarioConfig config;
  Eigen::VectorXd theta;            ///< M target angles, radians
  Eigen::MatrixXcd alpha;           ///< M x M, (rx, tx)
  std::vector<Eigen::VectorXcd> h;  ///< K stacked channel vectors, length N*M

  /// Per-AP block h_{m,k} of UE k's stacked channel.
  Eigen::VectorXcd h_block(int k, int m) const {
    return h.at(k).segment(m * config.N, config.N);
  }
  /// Cached steering vector a(theta_m) for AP m.
  const Eigen::VectorXcd& a_target(int m) const { return a_target_.at(m); }
  /// Cached steering derivative for AP m.
  const Eigen::VectorXcd& a_target_dot(int m) const { return a_target_dot_.at(m); }

  std::vector<Eigen::VectorXcd> a_target_;
  std::vector<Eigen::VectorXcd> a_target_dot_;
};

/// Reference distance (m) of the normalized line-of-sight pathloss
/// beta = (kReferenceDistance / d)^2 used for the UE channels.
inline constexpr double kReferenceDistance = 30.0;

/**
 * @brief Builds a Scenario from a validated config.
 *
 * Pure function of the config (including rng_seed): same config twice gives
 * a bitwise-identical Scenario. Channels follow the documented LoS model
 * h_{m,k} = sqrt(beta_{m,k}) * a(theta_{m,k}^UE) with the reference-distance
 * pathloss above. Throws std::invalid_argument if the Eve coincides with an
 * AP position (aspect angle undefined) or the config is invalid.
 */
Scenario build_scenario(const ScenarioConfig& config);

/// Reads a ScenarioConfig from a JSON file; schema documented in README.md.
ScenarioConfig load_scenario_config(const std::string& path);
ScenarioConfig parse_scenario_config(const std::string& json_text);

}  // namespace cfisac
