// Acceptance runner: one PASS/FAIL line per criterion, with wall time against
// its budget. Exit status is nonzero if any criterion fails.

#include "helpers.hpp"
#include "oracles.hpp"

#include "spbench/io.hpp"
#include "spbench/solvers.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>

using namespace spbench;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

// Byte image of the result file the CLI would write for this campaign.
std::string result_bytes(const Problem& problem, const SolverConfig& cfg, const MultistartResult& res) {
  ResultFile rf;
  rf.instance_label = problem.label();
  rf.family = problem.family();
  rf.dimension = problem.dimension();
  rf.solver = cfg;
  rf.solutions = res.solutions;
  rf.stats = res.stats;
  return dump(result_to_json(rf));
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------
// Campaign definitions shared with the determinism check.

struct Campaign {
  ProblemPtr problem;
  SolverConfig cfg;
};

Campaign phi4_grid_campaign() {
  Campaign c{std::make_shared<Phi4Problem>(phi4_new(2, 0.6, 2.0, 0.0)), {}};
  c.cfg.grid_starts = true;
  return c;
}

Campaign thomson_campaign(int electrons, std::uint64_t seed) {
  Campaign c{std::make_shared<ThomsonProblem>(electrons), {}};
  c.cfg.starts = 200;
  c.cfg.seed = seed;
  return c;
}

ProblemPtr xy_ring() { return std::make_shared<XYProblem>(xy_new(1, 4, Boundary::Periodic, ConstantCoupling{1.0}, 0, true)); }

Campaign xy_ring_campaign(SolverKind method) {
  Campaign c{xy_ring(), {}};
  c.cfg.method = method;
  c.cfg.starts = 1000;
  c.cfg.seed = 6;
  return c;
}

Campaign gradsq_campaign() {
  Campaign c{std::make_shared<XYProblem>(xy_new(2, 3, Boundary::Periodic, UniformSignedCoupling{}, 11, true)), {}};
  c.cfg.method = SolverKind::GradSq;
  c.cfg.max_iters = 20000;
  c.cfg.starts = 500;
  c.cfg.seed = 5;
  return c;
}

MultistartResult run(const Campaign& c, unsigned threads = 0) {
  SolverConfig cfg = c.cfg;
  cfg.threads = threads;
  return multistart(*c.problem, cfg);
}

// ---------------------------------------------------------------------------

Verdict c1_phi4_completeness() {
  Verdict v;
  auto c = phi4_grid_campaign();
  const auto& p = static_cast<const Phi4Problem&>(*c.problem);
  auto res = run(c);
  auto truth = phi4_enumerate_decoupled(p);
  std::map<int, int> hist;
  double worst = 0.0;
  if (res.solutions.size() != truth.size()) v.pass = false;
  for (std::size_t k = 0; k < std::min(res.solutions.size(), truth.size()); ++k) {
    worst = std::max(worst, (res.solutions.points[k].point - truth.points[k].point).cwiseAbs().maxCoeff());
    ++hist[res.solutions.points[k].index];
  }
  const bool hist_ok = hist == std::map<int, int>{{0, 16}, {1, 32}, {2, 24}, {3, 8}, {4, 1}};
  const bool bezout_ok = phi4_bezout(p) == BigInt(res.solutions.size());
  v.pass = v.pass && worst <= 1e-8 && hist_ok && bezout_ok;
  std::ostringstream os;
  os << res.solutions.size() << " SPs (oracle " << truth.size() << "), max dev " << fmt("%.1e", worst)
     << ", histogram " << (hist_ok ? "{16,32,24,8,1}" : "mismatch") << ", bezout " << phi4_bezout(p);
  v.detail = os.str();
  return v;
}

Verdict c2_uniform_survive() {
  Verdict v;
  double worst = 0.0;
  for (double J : {0.1, 0.5, 1.0}) {
    auto p = phi4_new(3, 0.6, 2.0, J);
    for (double x : {0.0, std::sqrt(20.0), -std::sqrt(20.0)}) {
      worst = std::max(worst, p.gradient(Vec::Constant(9, x)).norm());
    }
  }
  v.pass = worst <= 1e-12;
  v.detail = "max residual " + fmt("%.1e", worst);
  return v;
}

Verdict c3_gradients() {
  Verdict v;
  double worst = 0.0;
  std::string worst_label;
  auto zoo = spbench::testing::family_zoo();
  for (const auto& prob : zoo) {
    for (std::uint64_t i = 0; i < 100; ++i) {
      Rng rng(31337, i);
      Vec x = prob->sample_start(rng);
      const double e = spbench::testing::rel_error(prob->gradient(x), fd_gradient(*prob, x, 1e-5));
      if (e > worst) {
        worst = e;
        worst_label = prob->label();
      }
    }
  }
  v.pass = worst < 1e-6;
  v.detail = std::to_string(zoo.size()) + " instances x 100 points, worst rel err " + fmt("%.1e", worst) + " (" +
             worst_label + ")";
  return v;
}

Verdict c4_cluster_closed_forms() {
  Verdict v;
  ClusterProblem lj(2, LennardJones{});
  ClusterProblem morse(2, Morse{});
  SolverConfig cfg;
  Vec r(1);
  r << 1.0;
  auto a = newton_solve(lj, r, cfg);
  r << 0.95;
  auto b = newton_solve(morse, r, cfg);
  const double lj_sep_err = std::abs(a.point[0] - std::pow(2.0, 1.0 / 6.0));
  const double lj_e_err = std::abs(lj.energy(a.point) + 1.0);
  const double m_sep_err = std::abs(b.point[0] - 1.0);
  const double m_e_err = std::abs(morse.energy(b.point) + 1.0);
  const bool curv = pair_curvature(LennardJones{}) == 72.0 && pair_curvature(Morse{}) == 72.0;
  v.pass = a.converged() && b.converged() && lj_sep_err < 1e-10 && lj_e_err <= 1e-10 && m_sep_err < 1e-10 &&
           m_e_err <= 1e-12 && curv;
  v.detail = "LJ sep err " + fmt("%.1e", lj_sep_err) + " E err " + fmt("%.1e", lj_e_err) + "; Morse sep err " +
             fmt("%.1e", m_sep_err) + " E err " + fmt("%.1e", m_e_err) + "; curvatures " +
             fmt("%g", pair_curvature(LennardJones{})) + "/" + fmt("%g", pair_curvature(Morse{}));
  return v;
}

Verdict c5_thomson() {
  Verdict v;
  std::ostringstream os;
  const double exact[] = {0.5, std::sqrt(3.0), 6.0 / std::sqrt(8.0 / 3.0)};
  for (int n = 2; n <= 4; ++n) {
    auto res = run(thomson_campaign(n, 1));
    const double best = res.solutions.size() ? res.solutions.points[0].energy : INFINITY;
    const double err = std::abs(best - exact[n - 2]);
    v.pass = v.pass && err <= 1e-8;
    os << "N=" << n << " err " << fmt("%.1e", err) << "; ";
  }
  for (int n = 5; n <= 6; ++n) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::uint64_t seed : {1, 2, 3}) {
      auto res = run(thomson_campaign(n, seed));
      const double best = res.solutions.size() ? res.solutions.points[0].energy : INFINITY;
      lo = std::min(lo, best);
      hi = std::max(hi, best);
    }
    v.pass = v.pass && hi - lo <= 1e-8;
    os << "N=" << n << " best " << fmt("%.10f", lo) << " spread " << fmt("%.1e", hi - lo) << "; ";
  }
  v.detail = os.str();
  return v;
}

Verdict c6_xy_bruteforce() {
  Verdict v;
  auto ring = xy_ring();
  const auto& p = static_cast<const XYProblem&>(*ring);
  auto oracle = oracle::xy_grid_oracle(p);
  const std::size_t entries = oracle.isolated.size() + oracle.degenerate_levels.size();
  std::vector<bool> covered(entries, false);
  std::ostringstream os;
  os << "oracle: " << oracle.isolated.size() << " isolated + " << oracle.degenerate_levels.size()
     << " degenerate level(s); ";
  for (SolverKind method : {SolverKind::Newton, SolverKind::NewtonHomotopy}) {
    auto res = run(xy_ring_campaign(method));
    std::size_t unmatched = 0;
    std::vector<bool> mine(entries, false);
    for (const auto& sp : res.solutions.points) {
      const int m = oracle::xy_oracle_match(oracle, sp);
      if (m < 0) {
        ++unmatched;
      } else {
        mine[static_cast<std::size_t>(m)] = covered[static_cast<std::size_t>(m)] = true;
      }
    }
    v.pass = v.pass && unmatched == 0;
    os << solver_name(method) << " " << res.stats.converged << " conv, " << std::count(mine.begin(), mine.end(), true)
       << "/" << entries << " entries, " << unmatched << " unmatched; ";
  }
  const bool all = std::all_of(covered.begin(), covered.end(), [](bool b) { return b; });
  // Global minimum: the all-zero configuration, energy 0, lowest oracle energy.
  const auto& lowest = oracle.points.front();
  const bool zero_min = !oracle.points.empty() && lowest.point.norm() < 1e-9 && std::abs(lowest.energy) < 1e-15 &&
                        lowest.index == 0 && p.energy(Vec::Zero(3)) == 0.0;
  v.pass = v.pass && all && zero_min;
  os << "jointly complete: " << (all ? "yes" : "no") << "; zero is global min: " << (zero_min ? "yes" : "no");
  v.detail = os.str();
  return v;
}

Verdict c7_gradsq_spurious() {
  Verdict v;
  auto c = gradsq_campaign();
  auto res = run(c);
  double worst = 0.0;
  for (const auto& sp : res.solutions.points) worst = std::max(worst, c.problem->gradient(sp.point).norm());
  v.pass = res.stats.spurious >= 1 && worst <= 1e-10;
  v.detail = std::to_string(res.stats.spurious) + " spurious minima, " + std::to_string(res.stats.converged) +
             " converged (max |grad H| " + fmt("%.1e", worst) + ")";
  return v;
}

Verdict c8_nash() {
  Verdict v;
  std::ostringstream os;
  SolverConfig cfg;
  cfg.starts = 100;
  cfg.seed = 12;
  for (const auto& [name, game] : {std::pair{"matching pennies", matching_pennies()},
                                   std::pair{"prisoner's dilemma", prisoners_dilemma()}}) {
    NashProblem prob(game);
    auto res = multistart(prob, cfg);
    auto truth = oracle::support_enumeration(game);
    int feasible = 0;
    bool consistent = true;
    for (const auto& sp : res.solutions.points) {
      const bool eq = sp.feasible.value_or(false);
      feasible += eq;
      if (eq != oracle::best_response_check(game, sp.point, 1e-8)) consistent = false;
    }
    bool all_found = true;
    for (const Vec& t : truth) {
      const bool hit = std::any_of(res.solutions.points.begin(), res.solutions.points.end(), [&](const auto& sp) {
        return sp.feasible.value_or(false) && (sp.point - t).norm() < 1e-8;
      });
      all_found = all_found && hit;
    }
    v.pass = v.pass && feasible >= 1 && consistent && all_found;
    os << name << ": " << feasible << " equilibria (oracle " << truth.size() << ")" << (consistent ? "" : " MISMATCH")
       << "; ";
  }
  cfg.starts = 40;
  int checked = 0, bad = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto game = random_game({2, 2}, 1000 + seed);
    NashProblem prob(game);
    auto res = multistart(prob, cfg);
    for (const auto& sp : res.solutions.points) {
      if (!sp.feasible.value_or(false)) continue;
      ++checked;
      if (!oracle::best_response_check(game, sp.point, 1e-8)) ++bad;
    }
    for (const Vec& t : oracle::support_enumeration(game)) {
      worst = std::max(worst, nash_residual(game, StrategyProfile::from_flat(game, t)).cwiseAbs().maxCoeff());
    }
  }
  v.pass = v.pass && bad == 0 && worst < 1e-9 && checked >= 100;
  os << "random 2x2: " << checked << " solver equilibria, " << bad << " rejected by oracle, oracle residual "
     << fmt("%.1e", worst);
  v.detail = os.str();
  return v;
}

Verdict c9_puzzles() {
  Verdict v;
  const std::pair<int, int> shapes[] = {{1, 2}, {2, 1}, {1, 3}, {2, 2}, {1, 4}};
  double worst_lin = 0.0, worst_exp = 0.0;
  int verified = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto [rows, cols] = shapes[seed % 5];
    auto g = generate_grid_puzzle(rows, cols, 1 + static_cast<int>(seed % 3), seed);
    if (!verify_geometric(g.puzzle, g.solution)) continue;
    ++verified;
    worst_lin = std::max(worst_lin, linear_residual(g.puzzle, g.solution).cwiseAbs().maxCoeff());
    worst_exp = std::max(worst_exp, exponential_residual(g.puzzle, g.solution, default_k_set()).cwiseAbs().maxCoeff());
  }
  // Converse failure: identical middle pieces of a one-color strip pushed apart.
  auto strip = generate_grid_puzzle(1, 4, 1, 2);
  std::size_t a = 0, b = 0;
  for (std::size_t i = 0; i < strip.puzzle.piece_count(); ++i) {
    for (std::size_t j = i + 1; j < strip.puzzle.piece_count(); ++j) {
      const auto& ei = strip.puzzle.pieces()[i].edges;
      const auto& ej = strip.puzzle.pieces()[j].edges;
      bool same = ei.size() == ej.size();
      for (std::size_t k = 0; same && k < ei.size(); ++k) same = ei[k].color == ej[k].color;
      if (same) std::tie(a, b) = std::pair{i, j};
    }
  }
  Placement broken = strip.solution;
  broken.translations[a] += Vec2(0.3, 0.2);
  broken.translations[b] -= Vec2(0.3, 0.2);
  const double lin = linear_residual(strip.puzzle, broken).cwiseAbs().maxCoeff();
  const double ex = exponential_residual(strip.puzzle, broken, default_k_set()).cwiseAbs().maxCoeff();
  const bool geo = verify_geometric(strip.puzzle, broken);
  v.pass = verified == 50 && worst_lin < 1e-9 && worst_exp < 1e-9 && a != b && lin < 1e-9 && !geo && ex > 1e-6;
  v.detail = std::to_string(verified) + "/50 solved, max lin " + fmt("%.1e", worst_lin) + ", max exp " +
             fmt("%.1e", worst_exp) + "; converse instance: lin " + fmt("%.1e", lin) + ", geometric " +
             (geo ? "true" : "false") + ", exp " + fmt("%.2e", ex);
  return v;
}

Verdict c10_determinism() {
  Verdict v;
  std::vector<Campaign> campaigns = {phi4_grid_campaign(),
                                     thomson_campaign(2, 1),
                                     thomson_campaign(3, 1),
                                     thomson_campaign(4, 1),
                                     thomson_campaign(5, 1),
                                     thomson_campaign(6, 1),
                                     xy_ring_campaign(SolverKind::Newton),
                                     xy_ring_campaign(SolverKind::NewtonHomotopy),
                                     gradsq_campaign()};
  int identical = 0;
  for (const auto& c : campaigns) {
    SolverConfig one = c.cfg, eight = c.cfg;
    one.threads = 1;
    eight.threads = 8;
    const std::string a = result_bytes(*c.problem, one, run(c, 1));
    const std::string b = result_bytes(*c.problem, one, run(c, 8));
    identical += a == b;
  }
  v.pass = identical == static_cast<int>(campaigns.size());
  v.detail = std::to_string(identical) + "/" + std::to_string(campaigns.size()) +
             " result files byte-identical at 1 and 8 threads";
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget;
    std::function<Verdict()> fn;
  };
  const Criterion criteria[] = {
      {"1 phi4 decoupled completeness", 5, c1_phi4_completeness},
      {"2 phi4 uniform SPs survive coupling", 1, c2_uniform_survive},
      {"3 gradient correctness", 30, c3_gradients},
      {"4 cluster closed forms", 1, c4_cluster_closed_forms},
      {"5 Thomson small-N optima", 60, c5_thomson},
      {"6 XY brute-force equivalence", 120, c6_xy_bruteforce},
      {"7 gradient-square spurious minima", 60, c7_gradsq_spurious},
      {"8 Nash oracle equivalence", 30, c8_nash},
      {"9 puzzle encodings", 30, c9_puzzles},
      {"10 determinism across thread counts", 0, c10_determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget <= 0 || secs < c.budget;
    const bool pass = v.pass && in_time;
    failed += !pass;
    std::printf("[%s] %-38s %7.2fs", pass ? "PASS" : "FAIL", c.name, secs);
    if (c.budget > 0) std::printf(" (< %gs%s)", c.budget, in_time ? "" : " EXCEEDED");
    std::printf("  %s\n", v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
