// JSON scenario-config loading; schema documented in README.md.
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "cfisac/metrics.hpp"
#include "cfisac/scenario.hpp"

namespace cfisac {

namespace {

using nlohmann::json;

Eigen::Vector2d parse_position(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2) {
    throw std::invalid_argument("config: " + what + " must be a [x, y] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

ScenarioConfig parse_scenario_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }

  ScenarioConfig cfg;
  for (const auto& p : j.at("ap_positions")) cfg.ap_positions.push_back(parse_position(p, "ap_positions"));
  for (const auto& p : j.at("ue_positions")) cfg.ue_positions.push_back(parse_position(p, "ue_positions"));
  cfg.eve_position = parse_position(j.at("eve_position"), "eve_position");
  cfg.M = static_cast<int>(cfg.ap_positions.size());
  cfg.K = static_cast<int>(cfg.ue_positions.size());
  cfg.N = j.at("antennas_per_ap").get<int>();

  // Per-AP budget: scalar broadcast or one entry per AP.
  const auto& power = j.at("power_budget_w");
  if (power.is_number()) {
    cfg.P_m.assign(cfg.M, power.get<double>());
  } else {
    cfg.P_m = power.get<std::vector<double>>();
  }

  cfg.sigma2_c = j.value("sigma2_c", 1.0);
  cfg.sigma2_s = j.value("sigma2_s", 1.0);

  // Swerling-I variances: scalar broadcast or full (rx, tx) table.
  const auto& d2 = j.at("delta2");
  cfg.delta2.resize(cfg.M, cfg.M);
  if (d2.is_number()) {
    cfg.delta2.setConstant(d2.get<double>());
  } else {
    if (static_cast<int>(d2.size()) != cfg.M) throw std::invalid_argument("config: delta2 must be scalar or M x M");
    for (int rx = 0; rx < cfg.M; ++rx) {
      if (static_cast<int>(d2[rx].size()) != cfg.M) throw std::invalid_argument("config: delta2 must be scalar or M x M");
      for (int tx = 0; tx < cfg.M; ++tx) cfg.delta2(rx, tx) = d2[rx][tx].get<double>();
    }
  }

  // SINR floor: linear ("gamma") or dB ("gamma_db"); scalar broadcast or
  // one entry per UE. Exactly one of the two keys may appear.
  if (j.contains("gamma") && j.contains("gamma_db")) {
    throw std::invalid_argument("config: give gamma or gamma_db, not both");
  }
  auto read_floors = [&](const json& g, bool db) {
    std::vector<double> out;
    if (g.is_number()) {
      out.assign(cfg.K, db ? from_db(g.get<double>()) : g.get<double>());
    } else {
      for (const auto& v : g) out.push_back(db ? from_db(v.get<double>()) : v.get<double>());
    }
    return out;
  };
  if (j.contains("gamma_db")) {
    cfg.gamma = read_floors(j.at("gamma_db"), true);
  } else {
    cfg.gamma = read_floors(j.at("gamma"), false);
  }

  if (j.contains("psi") && j.contains("psi_db")) {
    throw std::invalid_argument("config: give psi or psi_db, not both");
  }
  if (j.contains("psi_db")) {
    cfg.psi = from_db(j.at("psi_db").get<double>());
  } else {
    cfg.psi = j.at("psi").get<double>();
  }

  cfg.rng_seed = j.value("rng_seed", std::uint64_t{1});
  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_config(buf.str());
}

}  // namespace cfisac
