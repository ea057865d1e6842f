// End-to-end acceptance gate: one pass/fail line per shipped guarantee.
// Runs the full-scale trade-off sweeps (CRB vs SINR floor at three Eve-SNR
// ceilings, UE-Eve proximity), the desk-scale grid, and the property oracles,
// then prints [PASS]/[FAIL] verdicts. Exit code 0 iff everything passes.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "cfisac/experiments.hpp"
#include "cfisac/extract.hpp"
#include "cfisac/fim.hpp"
#include "cfisac/metrics.hpp"
#include "cfisac/sdp.hpp"
#include "oracles.hpp"

using namespace cfisac;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kDeg = 180.0 / 3.14159265358979323846;
constexpr std::uint64_t kSeed = 1;
const std::vector<double> kGammas = {0.1, 1.0, 2.0, 4.0, 5.0};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

ScenarioConfig paper_base() {
  ScenarioConfig cfg;
  cfg.ap_positions = {Eigen::Vector2d(10.0, 0.0), Eigen::Vector2d(80.0, 0.0)};
  cfg.eve_position = Eigen::Vector2d(45.0, 50.0);
  cfg.N = 30;
  cfg.M = 2;
  cfg.K = 4;
  cfg.P_m = {1.0, 1.0};
  cfg.delta2 = Eigen::MatrixXd::Constant(2, 2, 0.1);
  cfg.gamma = {1.0, 1.0, 1.0, 1.0};
  cfg.psi = 1.0;
  cfg.rng_seed = kSeed;
  return cfg;
}

/// Everything the criteria need from one solve, matrices dropped.
struct SolveRecord {
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = 0.0;
  double epi_gap = 0.0;
  double snr_db = 0.0;
  Eigen::VectorXd crb_deg;
  bool tight = false;
  double worst_comm_ratio = 0.0;
  double sensing_max = 0.0;
  double worst_an_ratio = 0.0;
  double max_delta = 0.0;
  std::vector<AnCharacterization> an;
  double secs = 0.0;
};

SolveRecord run_one(const ScenarioConfig& cfg, const char* tag) {
  const auto t0 = Clock::now();
  SolveRecord rec;
  const Scenario scn = build_scenario(cfg);
  const FimOperator op = assemble_fim_operator(scn);
  const DesignProblem prob = build_problem(scn, op);
  const DesignSolutionVars out = solve(prob, default_tolerance(cfg.N));
  rec.status = out.report.status;
  rec.objective = out.report.objective;
  rec.epi_gap = out.report.epigraph_gap_rel;
  if (rec.status == SolveStatus::Optimal) {
    const DesignSolution sol = verify_tightness(out.vars, scn, op);
    rec.tight = sol.tightness.tight;
    rec.sensing_max = sol.tightness.sensing_max_eigenvalue;
    rec.max_delta = sol.tightness.max_metric_delta_rel;
    const int S = cfg.num_streams();
    for (int s = 0; s < cfg.K; ++s)
      rec.worst_comm_ratio = std::max(
          rec.worst_comm_ratio, sol.tightness.spectra[s].rank1_ratio);
    for (int m = 0; m < cfg.M; ++m)
      rec.worst_an_ratio = std::max(
          rec.worst_an_ratio, sol.tightness.spectra[S + m].rank1_ratio);
    rec.snr_db = to_db(sol.achieved.snr_eve);
    rec.crb_deg = sol.achieved.crb_theta_deg;
    for (int m = 0; m < cfg.M; ++m)
      rec.an.push_back(characterize_an(out.vars.R[m], scn, m));
  }
  rec.secs = seconds_since(t0);
  std::printf("  solve %-28s status=%d obj=%.6g eve=%.3f dB tight=%d %.1fs\n",
              tag, static_cast<int>(rec.status), rec.objective,
              rec.status == SolveStatus::Optimal ? rec.snr_db : 0.0,
              rec.tight ? 1 : 0, rec.secs);
  std::fflush(stdout);
  return rec;
}

/// One sweep arm: fixed psi, gamma grid x trials, paired UE/gain draws.
struct Arm {
  double psi_db = 0.0;
  int trials = 1;
  bool close = false;  ///< pin UEs 0 and 1 half a meter from the Eve
  int n_antennas = 30;
  int n_ues = 4;  ///< the reduced grid serves 2 (8 antennas cannot carry 4)
  std::vector<std::vector<SolveRecord>> rec;  ///< [gamma][trial]
};

void run_arm(Arm& arm, const char* name) {
  SweepSpec draw_spec;  // box defaults; only base.K and the box are used
  draw_spec.base = paper_base();
  draw_spec.base.K = arm.n_ues;
  arm.rec.assign(kGammas.size(), {});
  for (size_t gi = 0; gi < kGammas.size(); ++gi) {
    for (int t = 0; t < arm.trials; ++t) {
      ScenarioConfig cfg = paper_base();
      cfg.N = arm.n_antennas;
      cfg.K = arm.n_ues;
      cfg.gamma.assign(cfg.K, kGammas[gi]);
      cfg.psi = from_db(arm.psi_db);
      cfg.ue_positions = draw_ue_positions(draw_spec, kSeed, t);
      if (arm.close) {
        cfg.ue_positions[0] = cfg.eve_position + Eigen::Vector2d(-0.5, 0.0);
        cfg.ue_positions[1] = cfg.eve_position + Eigen::Vector2d(0.5, 0.0);
      }
      cfg.rng_seed = kSeed * 1000003ULL + static_cast<std::uint64_t>(t);
      char tag[96];
      std::snprintf(tag, sizeof(tag), "%s g=%.1f trial=%d", name, kGammas[gi], t);
      arm.rec[gi].push_back(run_one(cfg, tag));
    }
  }
}

/// Trial mean of one per-solve quantity at each gamma (optimal rows only).
std::vector<double> arm_mean(const Arm& arm,
                             double (*get)(const SolveRecord&)) {
  std::vector<double> out(kGammas.size(),
                          std::numeric_limits<double>::quiet_NaN());
  for (size_t gi = 0; gi < kGammas.size(); ++gi) {
    double sum = 0.0;
    int n = 0;
    for (const SolveRecord& r : arm.rec[gi])
      if (r.status == SolveStatus::Optimal) {
        sum += get(r);
        ++n;
      }
    if (n > 0) out[gi] = sum / n;
  }
  return out;
}

double get_crb0(const SolveRecord& r) { return r.crb_deg(0); }
double get_crb1(const SolveRecord& r) { return r.crb_deg(1); }

struct Gate {
  bool all_pass = true;
  void verdict(int criterion, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) all_pass = false;
  }
};

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

bool monotone_nondecreasing(const std::vector<double>& v, double slack) {
  for (size_t i = 1; i < v.size(); ++i)
    if (!(v[i] >= v[i - 1] - slack)) return false;
  return true;
}

bool monotone_nonincreasing(const std::vector<double>& v, double slack) {
  for (size_t i = 1; i < v.size(); ++i)
    if (!(v[i] <= v[i - 1] + slack)) return false;
  return true;
}

}  // namespace

int main() {
  Gate gate;
  std::vector<double> epi_gaps;      // criterion 2, every solved instance
  int rank_fail = 0, rank_total = 0; // criterion 6 bookkeeping
  double worst_comm = 0.0, worst_sens = 0.0, worst_an = 0.0, worst_delta = 0.0;
  auto book_rank = [&](const SolveRecord& r) {
    if (r.status != SolveStatus::Optimal) return;
    epi_gaps.push_back(r.epi_gap);
    ++rank_total;
    if (!r.tight) ++rank_fail;
    worst_comm = std::max(worst_comm, r.worst_comm_ratio);
    worst_sens = std::max(worst_sens, r.sensing_max);
    worst_an = std::max(worst_an, r.worst_an_ratio);
    worst_delta = std::max(worst_delta, r.max_delta);
  };

  // ---- Criterion 1: assembled information matrix vs finite differences.
  {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(kSeed);
    double worst = 0.0;
    for (int it = 0; it < 20; ++it) {
      const int N = 3 + it % 3;
      const int K = 1 + it % 2;
      const ScenarioConfig cfg = oracles::random_config(rng, 2, N, K);
      const Scenario scn = build_scenario(cfg);
      const FimOperator op = assemble_fim_operator(scn);
      const LiftedVariables vars =
          oracles::random_lifted(rng, N, 2, K + 1, 2, 1.0);
      const Eigen::MatrixXd J = evaluate_fim(op, vars);
      const Eigen::MatrixXd Jfd = oracles::fd_fim(scn, vars);
      worst = std::max(worst, (J - Jfd).norm() / Jfd.norm());
    }
    const double secs = seconds_since(t0);
    gate.verdict(1, worst < 1e-6 && secs < 30.0,
                 fmt("information matrix vs finite differences, 20 instances: "
                     "max rel error %.3g (< 1e-6), %.1fs (< 30s)",
                     worst, secs));
  }

  // ---- Criterion 9: lifted vs beamformer metric equivalence.
  {
    std::mt19937_64 rng(kSeed + 9);
    double worst = 0.0;
    for (int it = 0; it < 100; ++it) {
      const int N = 3 + it % 3;
      const int K = 1 + it % 2;
      const ScenarioConfig cfg = oracles::random_config(rng, 2, N, K);
      const Scenario scn = build_scenario(cfg);
      BeamformerSet bf;
      bf.n_antennas = N;
      for (int s = 0; s < K + 1; ++s)
        bf.f.push_back(oracles::random_cvec(rng, 2 * N, 1.0));
      LiftedVariables vars;
      vars.W = bf.lift();
      for (int m = 0; m < 2; ++m)
        vars.R.push_back(oracles::random_psd(rng, N, 2, 0.5));
      for (int k = 0; k < K; ++k) {
        const double a = sinr_ue(scn, vars, k);
        const double b = sinr_ue(scn, bf, vars.R, k);
        worst = std::max(worst, std::abs(a - b) / std::abs(a));
      }
      const double a = snr_eve(scn, vars);
      const double b = snr_eve(scn, bf, vars.R);
      worst = std::max(worst, std::abs(a - b) / std::abs(a));
    }
    gate.verdict(9, worst < 1e-10,
                 fmt("lifted vs beamformer SINR/SNR on 100 rank-1 instances: "
                     "max rel error %.3g (< 1e-10)",
                     worst));
  }

  // ---- Criterion 10: brute-force oracle on the tiny instance.
  {
    const auto t0 = Clock::now();
    const ScenarioConfig cfg = oracles::tiny_config();
    const Scenario scn = build_scenario(cfg);
    const FimOperator op = assemble_fim_operator(scn);
    const DesignProblem prob = build_problem(scn, op);
    const DesignSolutionVars out = solve(prob, 1e-9);
    bool pass = out.report.status == SolveStatus::Optimal;
    double rel = 1.0;
    if (pass) {
      epi_gaps.push_back(out.report.epigraph_gap_rel);
      const auto oracle = oracles::brute_force_tiny(scn, op);
      rel = std::abs(out.report.objective - oracle.objective) /
            oracle.objective;
      pass = rel <= 0.01;
    }
    const double secs = seconds_since(t0);
    pass = pass && secs < 60.0;
    gate.verdict(10, pass,
                 fmt("relaxation vs rank-1 grid search on the tiny scenario: "
                     "rel gap %.3g (<= 0.01), %.1fs (< 60s)",
                     rel, secs));
  }

  // ---- Desk-scale grid (criterion 3's desk clause; feeds 2 too).
  double desk_worst_dev = 0.0;
  bool desk_all_optimal = true;
  for (double psi_db : {0.0, -3.0, -5.0}) {
    Arm arm;
    arm.psi_db = psi_db;
    arm.trials = 1;
    arm.n_antennas = 8;
    arm.n_ues = 2;
    char name[32];
    std::snprintf(name, sizeof(name), "desk psi=%gdB", psi_db);
    run_arm(arm, name);
    for (const auto& point : arm.rec)
      for (const SolveRecord& r : point) {
        // Desk points feed the epigraph check (a solver identity at any
        // scale) but not the rank bookkeeping: the rank-1 structure is a
        // property of the full-scale geometry, and an 8-antenna array can
        // land on a degenerate optimal face where it simply does not hold.
        if (r.status != SolveStatus::Optimal) {
          desk_all_optimal = false;
        } else {
          epi_gaps.push_back(r.epi_gap);
          desk_worst_dev =
              std::max(desk_worst_dev, std::abs(r.snr_db - psi_db));
        }
      }
  }

  // ---- Full-scale arms.
  Arm psi0, psim3, psim5, close_arm;
  psi0.psi_db = 0.0;
  psi0.trials = 10;
  psim5.psi_db = -5.0;
  psim5.trials = 10;
  psim3.psi_db = -3.0;
  psim3.trials = 1;
  close_arm.psi_db = 0.0;
  close_arm.trials = 5;
  close_arm.close = true;
  run_arm(psi0, "psi=0dB");
  run_arm(psim5, "psi=-5dB");
  run_arm(psim3, "psi=-3dB");
  run_arm(close_arm, "close");

  bool paper_all_optimal = true;
  double paper_worst_dev = 0.0;
  for (const Arm* arm : {&psi0, &psim5, &psim3, &close_arm})
    for (const auto& point : arm->rec)
      for (const SolveRecord& r : point) {
        book_rank(r);
        if (r.status != SolveStatus::Optimal) paper_all_optimal = false;
      }
  for (const Arm* arm : {&psi0, &psim5, &psim3})  // Fig-4 arms only
    for (const auto& point : arm->rec)
      for (const SolveRecord& r : point)
        if (r.status == SolveStatus::Optimal)
          paper_worst_dev =
              std::max(paper_worst_dev, std::abs(r.snr_db - arm->psi_db));

  // ---- Criterion 2: epigraph exactness everywhere.
  {
    double worst = 0.0;
    for (double g : epi_gaps) worst = std::max(worst, g);
    gate.verdict(2, !epi_gaps.empty() && worst < 1e-4,
                 fmt("epigraph total vs direct trace inverse on %zu solved "
                     "instances: max rel gap %.3g (< 1e-4)",
                     epi_gaps.size(), worst));
  }

  // ---- Criterion 3: Eve SNR pinned to the ceiling.
  gate.verdict(3,
               paper_all_optimal && desk_all_optimal &&
                   paper_worst_dev <= 0.25 && desk_worst_dev <= 0.5,
               fmt("achieved Eve SNR vs ceiling: full scale worst |dev| "
                   "%.3f dB (<= 0.25), desk worst %.3f dB (<= 0.5)%s",
                   paper_worst_dev, desk_worst_dev,
                   paper_all_optimal && desk_all_optimal
                       ? ""
                       : "; some solves not optimal"));

  // ---- Criterion 4: CRB trend vs the SINR floor.
  {
    const auto m0_1 = arm_mean(psi0, get_crb0);
    const auto m0_2 = arm_mean(psi0, get_crb1);
    const auto m3_1 = arm_mean(psim3, get_crb0);
    const auto m3_2 = arm_mean(psim3, get_crb1);
    const auto m5_1 = arm_mean(psim5, get_crb0);
    const auto m5_2 = arm_mean(psim5, get_crb1);
    const double slack = 1e-6;
    const bool mono = monotone_nondecreasing(m0_1, slack) &&
                      monotone_nondecreasing(m0_2, slack) &&
                      monotone_nondecreasing(m3_1, slack) &&
                      monotone_nondecreasing(m3_2, slack) &&
                      monotone_nondecreasing(m5_1, slack) &&
                      monotone_nondecreasing(m5_2, slack);
    const double base = m0_1.front();
    const double ratio = m0_1.back() / m0_1.front();
    const bool band = base >= 0.19 && base <= 0.78;
    const bool ratio_ok = ratio >= 1.02 && ratio <= 1.4;
    gate.verdict(4, mono && band && ratio_ok,
                 fmt("CRB vs SINR floor: monotone %s; mean CRB_theta1(0.1, "
                     "0dB) = %.4f deg (in [0.19, 0.78]); ratio gamma 5/0.1 = "
                     "%.3f (in [1.02, 1.4])",
                     mono ? "yes" : "NO", base, ratio));
  }

  // ---- Criterion 5: tighter Eve ceiling never helps the CRB (means).
  {
    const auto m0 = arm_mean(psi0, get_crb0);
    const auto m5 = arm_mean(psim5, get_crb0);
    bool ok = true;
    double worst = 0.0;
    for (size_t gi = 0; gi < kGammas.size(); ++gi) {
      const double margin = m5[gi] - m0[gi];  // >= -1e-3 required
      worst = std::min(worst, margin);
      if (!(margin >= -1e-3)) ok = false;
    }
    gate.verdict(5, ok,
                 fmt("mean CRB_theta1(psi=-5dB) vs (psi=0dB) at each gamma: "
                     "worst margin %.2e deg (>= -1e-3)",
                     worst));
  }

  // ---- Criterion 6: rank structure and tightness verdict everywhere.
  gate.verdict(
      6, rank_total > 0 && rank_fail == 0,
      fmt("rank structure on %d solved full-scale points: %d not tight; worst comm "
          "ratio %.3g (< 1e-3), sensing max eig %.3g (< 1e-4), AN ratio "
          "%.3g (< 1e-3), metric delta %.3g (< 1e-3)",
          rank_total, rank_fail, worst_comm, worst_sens, worst_an,
          worst_delta));

  // ---- Criterion 7: AN directionality on the psi = 0 dB full-scale arm.
  {
    const Scenario geom = build_scenario(paper_base());
    bool peaks_ok = true, lobes_ok = true;
    double worst_offset = 0.0, worst_lobe = -300.0;
    for (const auto& point : psi0.rec)
      for (const SolveRecord& r : point) {
        if (r.status != SolveStatus::Optimal) continue;
        for (int m = 0; m < 2; ++m) {
          const AnCharacterization& an = r.an[m];
          if (an.degenerate) {
            peaks_ok = false;
            continue;
          }
          const double off = std::abs(an.peak_angle_deg - geom.theta(m) * kDeg);
          worst_offset = std::max(worst_offset, off);
          if (off > 1.0) peaks_ok = false;
          worst_lobe = std::max(worst_lobe, an.max_outside_mainlobe_db);
          if (!(an.max_outside_mainlobe_db < -15.0)) lobes_ok = false;
        }
      }
    bool mono = true;
    for (int m = 0; m < 2; ++m) {
      std::vector<double> peak_mean(kGammas.size(), 0.0);
      for (size_t gi = 0; gi < kGammas.size(); ++gi) {
        int n = 0;
        for (const SolveRecord& r : psi0.rec[gi])
          if (r.status == SolveStatus::Optimal && !r.an[m].degenerate) {
            peak_mean[gi] += r.an[m].peak_level_db;
            ++n;
          }
        peak_mean[gi] = n > 0 ? peak_mean[gi] / n
                              : std::numeric_limits<double>::quiet_NaN();
      }
      if (!monotone_nonincreasing(peak_mean, 1e-6)) mono = false;
    }
    gate.verdict(7, peaks_ok && lobes_ok && mono,
                 fmt("AN directionality: worst peak offset %.3f deg (<= 1), "
                     "worst outside-mainlobe level %.2f dB (< -15), mean peak "
                     "nonincreasing in gamma: %s",
                     worst_offset, worst_lobe, mono ? "yes" : "NO"));
  }

  // ---- Criterion 8: UE-Eve proximity degrades the sensing bound.
  {
    Arm distant;  // first five trials of the psi = 0 dB arm, paired draws
    distant.rec.assign(kGammas.size(), {});
    for (size_t gi = 0; gi < kGammas.size(); ++gi)
      for (int t = 0; t < close_arm.trials; ++t)
        distant.rec[gi].push_back(psi0.rec[gi][t]);
    const auto mc = arm_mean(close_arm, get_crb0);
    const auto md = arm_mean(distant, get_crb0);
    bool ordered = true;
    for (size_t gi = 0; gi < kGammas.size(); ++gi)
      if (!(mc[gi] >= md[gi] - 1e-3)) ordered = false;
    const double gap_lo = mc.front() - md.front();
    const double gap_hi = mc.back() - md.back();
    const bool widening = gap_hi > gap_lo;
    const double rel_gap = gap_hi / md.back();
    gate.verdict(8, ordered && widening && rel_gap > 0.3,
                 fmt("proximity: close >= distant at every gamma (1e-3 "
                     "margin): %s; gap %.4f -> %.4f deg widening: %s; "
                     "gap/CRB_distant at gamma=5: %.3f (> 0.3)",
                     ordered ? "yes" : "NO", gap_lo, gap_hi,
                     widening ? "yes" : "NO", rel_gap));
  }

  std::printf("acceptance: %s\n", gate.all_pass ? "ALL PASS" : "FAILURES");
  return gate.all_pass ? 0 : 1;
}
