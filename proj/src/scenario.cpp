#include "cfisac/scenario.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace cfisac {

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("ScenarioConfig: " + what); };
  if (M != static_cast<int>(ap_positions.size())) fail("M must equal |ap_positions|");
  if (K != static_cast<int>(ue_positions.size())) fail("K must equal |ue_positions|");
  if (M < 1) fail("at least one AP required");
  if (N < 2) fail("N must be >= 2");
  for (const auto& p : ap_positions)
    if (!p.allFinite()) fail("AP positions must be finite");
  for (const auto& p : ue_positions)
    if (!p.allFinite()) fail("UE positions must be finite");
  if (!eve_position.allFinite()) fail("Eve position must be finite");
  if (static_cast<int>(P_m.size()) != M) fail("P_m must have one entry per AP");
  for (double p : P_m)
    if (!(p > 0.0)) fail("P_m entries must be positive");
  if (!(sigma2_c > 0.0)) fail("sigma2_c must be positive");
  if (!(sigma2_s > 0.0)) fail("sigma2_s must be positive");
  if (delta2.rows() != M || delta2.cols() != M) fail("delta2 must be M x M");
  if (!(delta2.array() > 0.0).all()) fail("delta2 entries must be positive");
  if (static_cast<int>(gamma.size()) != K) fail("gamma must have one entry per UE");
  for (double g : gamma)
    if (!(g >= 0.0) || !std::isfinite(g)) fail("gamma entries must be finite and >= 0");
  if (!(psi > 0.0)) fail("psi must be positive");
}

Scenario build_scenario(const ScenarioConfig& config) {
  config.validate();
  Scenario scn;
  scn.config = config;

  scn.theta.resize(config.M);
  for (int m = 0; m < config.M; ++m) {
    const Eigen::Vector2d d = config.eve_position - config.ap_positions[m];
    if (d.squaredNorm() == 0.0) {
      std::ostringstream oss;
      oss << "build_scenario: Eve coincides with AP " << m << " (aspect angle undefined)";
      throw std::invalid_argument(oss.str());
    }
    scn.theta(m) = broadside_angle(config.ap_positions[m], config.eve_position);
  }

  // Swerling-I gain realization, one CN(0, delta2(rx, tx)) draw per AP pair
  // in fixed rx-major order so the seed fully determines the matrix.
  std::mt19937_64 rng(config.rng_seed);
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  scn.alpha.resize(config.M, config.M);
  for (int rx = 0; rx < config.M; ++rx) {
    for (int tx = 0; tx < config.M; ++tx) {
      const double sd = std::sqrt(config.delta2(rx, tx) / 2.0);
      const double re = sd * unit_normal(rng);
      const double im = sd * unit_normal(rng);
      scn.alpha(rx, tx) = cplx(re, im);
    }
  }

  // Line-of-sight channels with reference-distance pathloss.
  scn.h.reserve(config.K);
  for (int k = 0; k < config.K; ++k) {
    Eigen::VectorXcd hk(config.N * config.M);
    for (int m = 0; m < config.M; ++m) {
      const Eigen::Vector2d d = config.ue_positions[k] - config.ap_positions[m];
      const double dist = d.norm();
      if (dist == 0.0) {
        std::ostringstream oss;
        oss << "build_scenario: UE " << k << " coincides with AP " << m;
        throw std::invalid_argument(oss.str());
      }
      const double beta = (kReferenceDistance / dist) * (kReferenceDistance / dist);
      const double theta_ue = broadside_angle(config.ap_positions[m], config.ue_positions[k]);
      hk.segment(m * config.N, config.N) =
          std::sqrt(beta) * steering_vector(theta_ue, config.N);
    }
    scn.h.push_back(std::move(hk));
  }

  scn.a_target_.reserve(config.M);
  scn.a_target_dot_.reserve(config.M);
  for (int m = 0; m < config.M; ++m) {
    scn.a_target_.push_back(steering_vector(scn.theta(m), config.N));
    scn.a_target_dot_.push_back(steering_derivative(scn.theta(m), config.N));
  }
  return scn;
}

}  // namespace cfisac
