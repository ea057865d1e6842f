// Sweep runner, CSV/plot-description outputs, and the oracle-backed
// validation suite.

#include "cfisac/experiments.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "cfisac/extract.hpp"
#include "cfisac/fim.hpp"
#include "cfisac/metrics.hpp"

namespace cfisac {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Per-trial stream seed; trial streams never collide across nearby seeds.
std::uint64_t trial_seed(std::uint64_t seed, int trial) {
  return splitmix64(seed ^ splitmix64(0x5EEDULL + static_cast<std::uint64_t>(trial)));
}

const char* status_name(SolveStatus st) {
  switch (st) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Infeasible:
      return "infeasible";
    default:
      return "numerical-failure";
  }
}

const char* param_name(SweptParam p) {
  switch (p) {
    case SweptParam::Gamma:
      return "gamma";
    case SweptParam::Psi:
      return "psi";
    case SweptParam::Proximity:
      return "proximity";
    case SweptParam::Antennas:
      return "N";
    default:
      return "seed";
  }
}

/// Builds the config for one sweep cell. UE draws depend only on
/// (seed, trial), never on the swept value, so points are paired.
ScenarioConfig cell_config(const SweepSpec& spec, int point, int trial) {
  ScenarioConfig cfg = spec.base;
  std::uint64_t seed = spec.base.rng_seed;
  const double v = spec.values.at(point);
  bool close = false;
  switch (spec.param) {
    case SweptParam::Gamma:
      for (double& g : cfg.gamma) g = v;
      break;
    case SweptParam::Psi:
      cfg.psi = from_db(v);
      break;
    case SweptParam::Proximity:
      close = v != 0.0;
      break;
    case SweptParam::Antennas:
      cfg.N = static_cast<int>(std::lround(v));
      break;
    case SweptParam::Seed:
      seed = static_cast<std::uint64_t>(std::llround(v));
      break;
  }
  std::vector<Eigen::Vector2d> pos = draw_ue_positions(spec, seed, trial);
  if (close) {
    if (pos.size() < 2)
      throw std::invalid_argument("proximity sweep needs at least two UEs");
    pos[0] = cfg.eve_position + Eigen::Vector2d(-0.5, 0.0);
    pos[1] = cfg.eve_position + Eigen::Vector2d(0.5, 0.0);
  }
  cfg.ue_positions = std::move(pos);
  cfg.rng_seed = trial_seed(seed, trial);  // gain realization, paired too
  return cfg;
}

SweepRow run_cell(const SweepSpec& spec, int point, int trial) {
  SweepRow row;
  row.point_index = point;
  row.trial = trial;
  try {
    const ScenarioConfig cfg = cell_config(spec, point, trial);
    row.gamma = cfg.gamma.empty() ? 0.0 : cfg.gamma.front();
    row.psi_db = to_db(cfg.psi);
    row.seed = cfg.rng_seed;
    const Scenario scn = build_scenario(cfg);
    const FimOperator op = assemble_fim_operator(scn);
    const DesignProblem dp = build_problem(scn, op);
    const double tol = spec.tol > 0.0 ? spec.tol : default_tolerance(cfg.N);
    const DesignSolutionVars sol = solve(dp, tol);
    row.status = sol.report.status;
    row.objective = sol.report.objective;
    row.wall_time_s = sol.report.wall_time_s;
    if (row.status != SolveStatus::Optimal) return row;

    const DesignSolution ds = verify_tightness(sol.vars, scn, op);
    row.tight = ds.tightness.tight;
    row.sinr_ue = ds.achieved.sinr_ue;
    row.snr_eve_db = to_db(ds.achieved.snr_eve);
    row.ap_power = ds.achieved.ap_power;
    row.crb_theta_deg.assign(ds.achieved.crb_theta_deg.data(),
                             ds.achieved.crb_theta_deg.data() +
                                 ds.achieved.crb_theta_deg.size());
    for (int m = 0; m < cfg.M; ++m) {
      const AnCharacterization ch = characterize_an(sol.vars.R[m], scn, m);
      row.an_peak_db.push_back(ch.degenerate ? -kInf : ch.peak_level_db);
      row.an_peak_angle_deg.push_back(ch.degenerate ? kNan : ch.peak_angle_deg);
    }
  } catch (const std::exception&) {
    row.status = SolveStatus::NumericalFailure;
  }
  return row;
}

double field(const std::vector<double>& v, int i) {
  return i < static_cast<int>(v.size()) ? v[i] : kNan;
}

void write_rows_csv(const SweepResult& result, const std::vector<SweepRow>& rows,
                    std::ostream& os, bool timing) {
  const int M = result.spec.base.M;
  const int K = result.spec.base.K;
  os << "point_index,trial,gamma,psi_db,seed,status,tight,objective_tr_jinv";
  if (timing) os << ",wall_time_s";
  for (int m = 0; m < M; ++m) os << ",crb_theta_deg_" << m;
  for (int k = 0; k < K; ++k) os << ",sinr_" << k;
  os << ",snr_eve_db";
  for (int m = 0; m < M; ++m) os << ",power_" << m;
  for (int m = 0; m < M; ++m) os << ",an_peak_db_" << m;
  for (int m = 0; m < M; ++m) os << ",an_peak_angle_deg_" << m;
  os << "\n";
  os << std::setprecision(12);
  for (const SweepRow& r : rows) {
    os << r.point_index << ',' << r.trial << ',' << r.gamma << ',' << r.psi_db
       << ',' << r.seed << ',' << status_name(r.status) << ','
       << (r.tight ? 1 : 0) << ',' << r.objective;
    if (timing) os << ',' << r.wall_time_s;
    for (int m = 0; m < M; ++m) os << ',' << field(r.crb_theta_deg, m);
    for (int k = 0; k < K; ++k) os << ',' << field(r.sinr_ue, k);
    os << ',' << (r.status == SolveStatus::Optimal ? r.snr_eve_db : kNan);
    for (int m = 0; m < M; ++m) os << ',' << field(r.ap_power, m);
    for (int m = 0; m < M; ++m) os << ',' << field(r.an_peak_db, m);
    for (int m = 0; m < M; ++m) os << ',' << field(r.an_peak_angle_deg, m);
    os << "\n";
  }
}

/// Reference trend data at the full-scale configuration (M=2, N=30, K=4,
/// unit budgets): CRB on theta_1 and achieved Eve SNR across the canonical
/// gamma grid for ceilings of 0, -3 and -5 dB.
nlohmann::json reference_curves() {
  nlohmann::json ref;
  ref["gamma"] = {0.1, 1.0, 2.0, 4.0, 5.0};
  ref["crb_theta1_deg"]["psi_0db"] = {0.389312, 0.395035, 0.402433, 0.419427,
                                      0.428925};
  ref["crb_theta1_deg"]["psi_-3db"] = {0.389674, 0.395139, 0.402759, 0.419998,
                                       0.429634};
  ref["crb_theta1_deg"]["psi_-5db"] = {0.389273, 0.395735, 0.403189, 0.420410,
                                       0.430121};
  ref["eve_snr_db"]["psi_0db"] = {-0.0291, -0.0036, -0.0011, -0.0013, -0.0004};
  ref["eve_snr_db"]["psi_-3db"] = {-3.0317, -3.0137, -3.0108, -3.0119,
                                   -3.0112};
  ref["eve_snr_db"]["psi_-5db"] = {-5.2333, -5.2296, -5.2315, -5.2296,
                                   -5.2293};
  ref["proximity_close_crb_theta1_deg"] = {0.389090, 0.400580, 0.437243,
                                           0.597804, 0.823797};
  ref["proximity_close_crb_theta2_deg"] = {0.151099, 0.155871, 0.173429,
                                           0.253261, 0.331987};
  return ref;
}

void write_plot_description(const SweepResult& result, std::ostream& os) {
  const SweepSpec& spec = result.spec;
  const int M = spec.base.M;
  nlohmann::json j;
  j["parameter"] = param_name(spec.param);
  j["values"] = spec.values;
  j["trials"] = spec.trials;
  j["x_axis"] = spec.param == SweptParam::Gamma ? "UE SINR floor (linear)"
                : spec.param == SweptParam::Psi ? "Eve SNR ceiling (dB)"
                : spec.param == SweptParam::Proximity
                    ? "UE placement (0 = drawn in box, 1 = flanking the Eve)"
                : spec.param == SweptParam::Antennas ? "antennas per AP"
                                                     : "seed";
  nlohmann::json series;
  auto column = [&](auto&& get) {
    std::vector<double> col;
    for (const SweepRow& r : result.summary) col.push_back(get(r));
    return col;
  };
  for (int m = 0; m < M; ++m)
    series["crb_theta_deg_" + std::to_string(m)] =
        column([m](const SweepRow& r) { return field(r.crb_theta_deg, m); });
  series["snr_eve_db"] =
      column([](const SweepRow& r) { return r.snr_eve_db; });
  for (int m = 0; m < M; ++m)
    series["an_peak_db_" + std::to_string(m)] =
        column([m](const SweepRow& r) { return field(r.an_peak_db, m); });
  series["objective_tr_jinv"] =
      column([](const SweepRow& r) { return r.objective; });
  j["series"] = series;
  j["figures"] = nlohmann::json::array(
      {{{"name", "crb_vs_parameter"},
        {"x", "values"},
        {"y", "crb_theta_deg_*"},
        {"y_label", "root CRB on target angle (deg)"},
        {"style", "line with markers, one curve per AP"}},
       {{"name", "eve_snr_vs_parameter"},
        {"x", "values"},
        {"y", "snr_eve_db"},
        {"y_label", "achieved Eve SNR (dB)"},
        {"style", "line with markers; horizontal line at the ceiling"}},
       {{"name", "an_peak_vs_parameter"},
        {"x", "values"},
        {"y", "an_peak_db_*"},
        {"y_label", "unnormalized AN beampattern peak (dB)"},
        {"style", "line with markers, one curve per AP"}}});
  j["expected_trends"] = {
      "CRB is nondecreasing in the SINR floor and in the severity of the "
      "Eve ceiling",
      "achieved Eve SNR sits at the ceiling when the ceiling binds",
      "AN peak magnitude is nonincreasing as the SINR floor grows",
      "close UE placement (flanking the Eve) costs sensing accuracy versus "
      "distant placement, and the gap widens with the floor"};
  j["reference"] = reference_curves();
  os << j.dump(2) << "\n";
}

}  // namespace

std::vector<Eigen::Vector2d> draw_ue_positions(const SweepSpec& spec,
                                               std::uint64_t seed, int trial) {
  std::mt19937_64 rng(splitmix64(trial_seed(seed, trial) ^ 0x9E37ULL));
  std::uniform_real_distribution<double> ux(spec.box_x0, spec.box_x1);
  std::uniform_real_distribution<double> uy(spec.box_y0, spec.box_y1);
  std::vector<Eigen::Vector2d> pos;
  pos.reserve(spec.base.K);
  for (int k = 0; k < spec.base.K; ++k) {
    const double x = ux(rng);
    const double y = uy(rng);
    pos.emplace_back(x, y);
  }
  return pos;
}

SweepResult run_sweep(const SweepSpec& spec) {
  if (spec.values.empty())
    throw std::invalid_argument("sweep needs a nonempty value list");
  if (spec.trials < 1) throw std::invalid_argument("sweep needs trials >= 1");
  const int P = static_cast<int>(spec.values.size());
  const int T = spec.trials;
  const int cells = P * T;

  SweepResult result;
  result.spec = spec;
  result.rows.resize(cells);
  const int workers = std::clamp(spec.workers, 1, cells);
  if (workers == 1) {
    for (int c = 0; c < cells; ++c)
      result.rows[c] = run_cell(spec, c / T, c % T);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int c = w; c < cells; c += workers)
          result.rows[c] = run_cell(spec, c / T, c % T);
      });
    }
    for (std::thread& th : pool) th.join();
  }

  // Trial means per point over the feasible rows.
  const int M = spec.base.M;
  const int K = spec.base.K;
  for (int p = 0; p < P; ++p) {
    SweepRow mean;
    mean.point_index = p;
    mean.gamma = result.rows[p * T].gamma;
    mean.psi_db = result.rows[p * T].psi_db;
    mean.seed = result.rows[p * T].seed;
    mean.crb_theta_deg.assign(M, 0.0);
    mean.sinr_ue.assign(K, 0.0);
    mean.ap_power.assign(M, 0.0);
    mean.an_peak_db.assign(M, 0.0);
    mean.an_peak_angle_deg.assign(M, 0.0);
    int n = 0;
    bool any_infeasible = false;
    bool all_tight = true;
    for (int t = 0; t < T; ++t) {
      const SweepRow& r = result.rows[p * T + t];
      if (r.status == SolveStatus::Infeasible) any_infeasible = true;
      if (r.status != SolveStatus::Optimal) continue;
      ++n;
      all_tight = all_tight && r.tight;
      for (int m = 0; m < M; ++m) mean.crb_theta_deg[m] += field(r.crb_theta_deg, m);
      for (int k = 0; k < K; ++k) mean.sinr_ue[k] += field(r.sinr_ue, k);
      mean.snr_eve_db += r.snr_eve_db;
      for (int m = 0; m < M; ++m) mean.ap_power[m] += field(r.ap_power, m);
      for (int m = 0; m < M; ++m) mean.an_peak_db[m] += field(r.an_peak_db, m);
      for (int m = 0; m < M; ++m)
        mean.an_peak_angle_deg[m] += field(r.an_peak_angle_deg, m);
      mean.objective += r.objective;
      mean.wall_time_s += r.wall_time_s;
    }
    mean.trial = n;  // number of feasible trials averaged
    if (n > 0) {
      const double inv = 1.0 / n;
      for (double& x : mean.crb_theta_deg) x *= inv;
      for (double& x : mean.sinr_ue) x *= inv;
      mean.snr_eve_db *= inv;
      for (double& x : mean.ap_power) x *= inv;
      for (double& x : mean.an_peak_db) x *= inv;
      for (double& x : mean.an_peak_angle_deg) x *= inv;
      mean.objective *= inv;
      mean.wall_time_s *= inv;
      mean.status = SolveStatus::Optimal;
      mean.tight = all_tight;
    } else {
      mean.status = any_infeasible ? SolveStatus::Infeasible
                                   : SolveStatus::NumericalFailure;
    }
    result.summary.push_back(std::move(mean));
  }

  if (!spec.output_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(spec.output_dir);
    {
      std::ofstream os(fs::path(spec.output_dir) / "rows.csv");
      write_rows_csv(result, result.rows, os, /*timing=*/true);
    }
    {
      std::ofstream os(fs::path(spec.output_dir) / "summary.csv");
      write_rows_csv(result, result.summary, os, /*timing=*/true);
    }
    {
      std::ofstream os(fs::path(spec.output_dir) / "plot_description.json");
      write_plot_description(result, os);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Validation suite.

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Noise-free stacked sensing mean as a matrix acting on the stacked
/// transmit block-vector: block (rx, tx) = alpha(rx,tx) a(theta_rx) a(theta_tx)^H.
MatrixXcd stacked_mean(const VectorXd& eta, const EtaLayout& layout, int N) {
  const int M = layout.M;
  MatrixXcd B = MatrixXcd::Zero(N * M, N * M);
  for (int rx = 0; rx < M; ++rx) {
    const VectorXcd a_rx = steering_vector(eta[layout.theta(rx)], N);
    for (int tx = 0; tx < M; ++tx) {
      const VectorXcd a_tx = steering_vector(eta[layout.theta(tx)], N);
      const cplx alpha(eta[layout.re_alpha(rx, tx)],
                       eta[layout.im_alpha(rx, tx)]);
      B.block(rx * N, tx * N, N, N) = alpha * (a_rx * a_tx.adjoint());
    }
  }
  return B;
}

/// Central-difference information matrix straight from the observation
/// model; the production operator must reproduce it.
MatrixXd fd_fim(const Scenario& scn, const LiftedVariables& vars,
                double h = 1e-6) {
  const int M = scn.config.M;
  const int N = scn.config.N;
  const EtaLayout layout(M);
  const int d = layout.dim();
  VectorXd eta0(d);
  for (int rx = 0; rx < M; ++rx) {
    for (int tx = 0; tx < M; ++tx) {
      eta0[layout.re_alpha(rx, tx)] = scn.alpha(rx, tx).real();
      eta0[layout.im_alpha(rx, tx)] = scn.alpha(rx, tx).imag();
    }
  }
  for (int m = 0; m < M; ++m) eta0[layout.theta(m)] = scn.theta[m];

  MatrixXcd phi = MatrixXcd::Zero(N * M, N * M);
  for (int q = 0; q < M; ++q) {
    MatrixXcd T = vars.R.at(q);
    for (const MatrixXcd& w : vars.W) T += w.block(q * N, q * N, N, N);
    phi.block(q * N, q * N, N, N) = T;
  }

  std::vector<MatrixXcd> dB(d);
  for (int i = 0; i < d; ++i) {
    VectorXd ep = eta0, em = eta0;
    ep[i] += h;
    em[i] -= h;
    dB[i] = (stacked_mean(ep, layout, N) - stacked_mean(em, layout, N)) /
            (2.0 * h);
  }
  MatrixXd J(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      const double v = (2.0 / scn.config.sigma2_s) *
                       (dB[i].adjoint() * dB[j] * phi).trace().real();
      J(i, j) = v;
      J(j, i) = v;
    }
  }
  return J;
}

MatrixXcd random_psd(std::mt19937_64& rng, int n, int rank, double scale) {
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXcd A(n, rank);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < rank; ++c) A(r, c) = cplx(g(rng), g(rng));
  MatrixXcd W = scale * (A * A.adjoint()) / static_cast<double>(n * rank);
  return 0.5 * (W + W.adjoint());
}

VectorXcd random_cvec(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> g(0.0, 1.0);
  VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * cplx(g(rng), g(rng));
  return v;
}

ScenarioConfig random_config(std::mt19937_64& rng, int N, int K) {
  ScenarioConfig cfg;
  cfg.ap_positions = {{10.0, 0.0}, {80.0, 0.0}};
  cfg.M = 2;
  cfg.N = N;
  cfg.K = K;
  std::uniform_real_distribution<double> ux(25.0, 65.0), uy(10.0, 50.0);
  for (int k = 0; k < K; ++k) cfg.ue_positions.push_back({ux(rng), uy(rng)});
  cfg.eve_position = {45.0, 50.0};
  cfg.P_m.assign(cfg.M, 1.0);
  cfg.delta2 = Eigen::MatrixXd::Constant(cfg.M, cfg.M, 0.1);
  cfg.gamma.assign(K, 1.0);
  cfg.psi = 1.0;
  cfg.rng_seed = rng();
  return cfg;
}

}  // namespace

bool ValidationReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ValidationCheck& c) { return c.pass; });
}

ValidationReport run_validation(std::uint64_t seed, bool verbose) {
  ValidationReport report;
  std::mt19937_64 rng(splitmix64(seed));
  auto add = [&](std::string name, double measured, double limit,
                 std::string note) {
    ValidationCheck c;
    c.name = std::move(name);
    c.measured = measured;
    c.limit = limit;
    c.pass = std::isfinite(measured) && measured <= limit;
    c.note = std::move(note);
    if (verbose)
      std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << "  measured "
                << c.measured << "  limit " << c.limit << "\n";
    report.checks.push_back(std::move(c));
  };

  // Steering derivative against central differences.
  {
    std::uniform_real_distribution<double> uth(-1.4, 1.4);
    std::uniform_int_distribution<int> un(2, 8);
    const double h = 1e-6;
    double worst = 0.0;
    for (int it = 0; it < 50; ++it) {
      const double th = uth(rng);
      const int n = un(rng);
      const VectorXcd fd =
          (steering_vector(th + h, n) - steering_vector(th - h, n)) / (2.0 * h);
      const VectorXcd an = steering_derivative(th, n);
      worst = std::max(worst, (an - fd).norm() / std::max(1.0, fd.norm()));
    }
    add("steering_derivative_fd", worst, 1e-5,
        "max relative l2 error, 50 random draws");
  }

  // Information matrix against the finite-difference oracle.
  {
    double worst = 0.0;
    for (int it = 0; it < 4; ++it) {
      std::uniform_int_distribution<int> un(3, 4), uk(1, 2);
      const ScenarioConfig cfg = random_config(rng, un(rng), uk(rng));
      const Scenario scn = build_scenario(cfg);
      const int S = cfg.num_streams();
      LiftedVariables vars = LiftedVariables::zeros(cfg.N, cfg.M, S);
      for (int s = 0; s < S; ++s)
        vars.W[s] = random_psd(rng, cfg.N * cfg.M, 2, 1.0);
      for (int m = 0; m < cfg.M; ++m)
        vars.R[m] = random_psd(rng, cfg.N, 2, 0.5);
      const FimOperator op = assemble_fim_operator(scn);
      const MatrixXd J = evaluate_fim(op, vars);
      const MatrixXd Jfd = fd_fim(scn, vars);
      worst = std::max(worst, (J - Jfd).norm() / Jfd.norm());
    }
    add("fim_fd_agreement", worst, 1e-6,
        "relative Frobenius error, 4 random instances");
  }

  // Lifted metrics equal beamformer metrics on rank-1 instances.
  {
    double worst = 0.0;
    for (int it = 0; it < 100; ++it) {
      std::uniform_int_distribution<int> un(2, 4), uk(1, 3);
      const ScenarioConfig cfg = random_config(rng, un(rng), uk(rng));
      const Scenario scn = build_scenario(cfg);
      const int S = cfg.num_streams();
      BeamformerSet bf;
      bf.n_antennas = cfg.N;
      for (int s = 0; s < S; ++s)
        bf.f.push_back(random_cvec(rng, cfg.N * cfg.M, 0.5));
      LiftedVariables vars = LiftedVariables::zeros(cfg.N, cfg.M, S);
      vars.W = bf.lift();
      for (int m = 0; m < cfg.M; ++m)
        vars.R[m] = random_psd(rng, cfg.N, 2, 0.3);
      for (int k = 0; k < cfg.K; ++k)
        worst = std::max(worst, std::abs(sinr_ue(scn, vars, k) -
                                         sinr_ue(scn, bf, vars.R, k)) /
                                    std::max(1.0, sinr_ue(scn, vars, k)));
      worst = std::max(worst, std::abs(snr_eve(scn, vars) -
                                       snr_eve(scn, bf, vars.R)) /
                                  std::max(1.0, snr_eve(scn, vars)));
      for (int m = 0; m < cfg.M; ++m)
        worst = std::max(worst, std::abs(ap_power(vars, m, cfg.N) -
                                         ap_power(bf, vars.R, m)) /
                                    std::max(1.0, ap_power(vars, m, cfg.N)));
    }
    add("lifted_beamformer_equivalence", worst, 1e-10,
        "max relative metric delta, 100 random rank-1 instances");
  }

  // One desk-scale solve: exactness, rank structure, constraint respect.
  {
    ScenarioConfig cfg = random_config(rng, 8, 2);
    cfg.gamma.assign(cfg.K, 1.0);
    cfg.psi = 1.0;
    cfg.rng_seed = splitmix64(seed ^ 0xD35C);
    const Scenario scn = build_scenario(cfg);
    const FimOperator op = assemble_fim_operator(scn);
    const DesignProblem dp = build_problem(scn, op);
    const DesignSolutionVars sol = solve(dp, default_tolerance(cfg.N));
    if (sol.report.status != SolveStatus::Optimal) {
      add("desk_solve_status", 1.0, 0.0, "solver did not reach optimal: " +
                                             sol.report.detail);
    } else {
      add("desk_solve_status", 0.0, 0.0, "solved to tolerance");
      add("epigraph_exactness", sol.report.epigraph_gap_rel, 1e-4,
          "relative gap between epigraph total and Tr(J^-1)");
      const DesignSolution ds = verify_tightness(sol.vars, scn, op);
      double sinr_gap = 0.0;
      for (int k = 0; k < cfg.K; ++k)
        sinr_gap = std::max(sinr_gap,
                            (cfg.gamma[k] - ds.achieved.sinr_ue[k]) /
                                cfg.gamma[k]);
      add("sinr_floor_respected", sinr_gap, 1e-5,
          "max relative SINR shortfall vs floor");
      add("eve_ceiling_respected",
          (ds.achieved.snr_eve - cfg.psi) / cfg.psi, 1e-5,
          "relative Eve SNR excess over ceiling");
      double pover = 0.0;
      for (int m = 0; m < cfg.M; ++m)
        pover = std::max(pover,
                         (ds.achieved.ap_power[m] - cfg.P_m[m]) / cfg.P_m[m]);
      add("power_budget_respected", pover, 1e-5,
          "max relative per-AP power excess");
    }
  }

  // One full-scale solve: rank structure and extraction fidelity. These
  // properties rely on the angular resolution of the full array; small desk
  // arrays can land on a degenerate optimal face where several lifted blocks
  // share a subspace and no rank-1 decomposition is forced, so the rank
  // checks run here on the reference geometry rather than on the desk
  // instance above.
  {
    ScenarioConfig cfg;
    cfg.ap_positions = {{10.0, 0.0}, {80.0, 0.0}};
    cfg.M = 2;
    cfg.N = 30;
    cfg.K = 4;
    cfg.ue_positions = {
        {30.0, 20.0}, {40.0, 35.0}, {50.0, 15.0}, {60.0, 40.0}};
    cfg.eve_position = {45.0, 50.0};
    cfg.P_m.assign(cfg.M, 1.0);
    cfg.delta2 = Eigen::MatrixXd::Constant(cfg.M, cfg.M, 0.1);
    cfg.gamma.assign(cfg.K, 1.0);
    cfg.psi = 1.0;
    cfg.rng_seed = seed;
    const Scenario scn = build_scenario(cfg);
    const FimOperator op = assemble_fim_operator(scn);
    const DesignProblem dp = build_problem(scn, op);
    const DesignSolutionVars sol = solve(dp, default_tolerance(cfg.N));
    if (sol.report.status != SolveStatus::Optimal) {
      add("full_scale_solve_status", 1.0, 0.0,
          "solver did not reach optimal: " + sol.report.detail);
    } else {
      add("full_scale_solve_status", 0.0, 0.0, "solved to tolerance");
      const DesignSolution ds = verify_tightness(sol.vars, scn, op);
      double comm_ratio = 0.0;
      for (int s = 0; s < cfg.K; ++s)
        comm_ratio = std::max(comm_ratio, ds.rank_report[s].rank1_ratio);
      add("rank_structure_comm", comm_ratio, 1e-3,
          "max lambda2/lambda1 over communication streams");
      double pmax = 0.0;
      for (double p : cfg.P_m) pmax = std::max(pmax, p);
      add("rank_structure_sensing",
          ds.tightness.sensing_max_eigenvalue / pmax, 1e-4,
          "sensing-stream top eigenvalue / max P_m");
      double an_ratio = 0.0;
      for (int m = 0; m < cfg.M; ++m)
        an_ratio =
            std::max(an_ratio, ds.rank_report[cfg.K + 1 + m].rank1_ratio);
      add("rank_structure_an", an_ratio, 1e-3,
          "max lambda2/lambda1 over AN covariances");
      add("extraction_metric_delta", ds.tightness.max_metric_delta_rel, 1e-3,
          "max relative metric delta, lifted vs extracted beamformers");
      add("rank_structure_tight", ds.tightness.tight ? 0.0 : 1.0, 0.0,
          "tightness verdict");
    }
  }
  return report;
}

void write_validation_csv(const ValidationReport& report, std::ostream& os) {
  os << "name,pass,measured,limit,note\n" << std::setprecision(12);
  for (const ValidationCheck& c : report.checks)
    os << c.name << ',' << (c.pass ? 1 : 0) << ',' << c.measured << ','
       << c.limit << ",\"" << c.note << "\"\n";
}

}  // namespace cfisac
