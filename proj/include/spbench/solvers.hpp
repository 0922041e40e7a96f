#pragma once

#include "spbench/core.hpp"

namespace spbench {

struct DampingConfig {
  double initial_step = 1.0;
  double backtrack = 0.5;
  double min_step = 1e-12;
};

struct HomotopyConfig {
  double initial_dt = 0.05;
  double min_dt = 1e-8;
  double max_dt = 0.25;
  double growth = 1.5;
  int corrector_iters = 5;
  int max_steps = 20000;
};

struct SolverConfig {
  /// Inner method; multistart() runs it once per start.
  SolverKind method = SolverKind::Newton;
  double accept_tol = 1e-10;
  int max_iters = 100;
  DampingConfig damping;
  HomotopyConfig homotopy;
  /// Linear solves whose condition estimate exceeds this report SingularStep.
  double singular_cond = 1e12;
  /// Gradient-square termination on |grad W|.
  double gradsq_grad_tol = 1e-12;

  int starts = 100;
  /// Use Problem::start_grid() instead of random draws.
  bool grid_starts = false;
  std::uint64_t seed = 0;
  double dedup_tol = 1e-6;
  double feasibility_tol = 1e-8;
  /// Worker threads for multistart; 0 picks the hardware concurrency.
  unsigned threads = 0;
  bool keep_trace = false;
};

enum class SolveStatus { Converged, Diverged, MaxIters, SpuriousMinimum, EvalError, SingularStep };

std::string_view status_name(SolveStatus s);

struct SolveOutcome {
  SolveStatus status = SolveStatus::Diverged;
  Vec point;
  double residual_norm = 0.0;
  /// W = |f|^2 at the terminal point (gradient-square runs).
  double w_value = 0.0;
  int iterations = 0;
  /// Residual norm per iterate when SolverConfig::keep_trace is set.
  std::vector<double> trace;

  bool converged() const { return status == SolveStatus::Converged; }
};

/// Damped Newton on the residual map with backtracking on |f|.
SolveOutcome newton_solve(const Problem& problem, const Vec& start, const SolverConfig& cfg = {});

/// Steepest descent with backtracking on W(x) = |f(x)|^2.
SolveOutcome gradsq_solve(const Problem& problem, const Vec& start, const SolverConfig& cfg = {});

/// Predictor-corrector tracking of H(x, t) = f(x) - (1 - t) f(start) from
/// t = 0 to t = 1.
SolveOutcome homotopy_track(const Problem& problem, const Vec& start, const SolverConfig& cfg = {});

SolveOutcome solve(const Problem& problem, const Vec& start, const SolverConfig& cfg);

struct CampaignStats {
  std::size_t starts = 0;
  std::size_t converged = 0;
  std::size_t diverged = 0;
  std::size_t spurious = 0;
  std::size_t eval_errors = 0;
  std::size_t max_iters = 0;
  std::size_t singular_steps = 0;
  double wall_time = 0.0;
};

struct MultistartResult {
  SolutionSet solutions;
  CampaignStats stats;
};

/// Start points for a campaign: the family grid, or cfg.starts draws with one
/// generator stream per start id.
std::vector<Vec> campaign_starts(const Problem& problem, const SolverConfig& cfg);

/// Runs the inner method from every start, classifies converged points and
/// deduplicates them. The result does not depend on the thread count.
MultistartResult multistart(const Problem& problem, const SolverConfig& cfg);

/// Same, over caller-supplied starts (start ids are positions in `starts`).
MultistartResult multistart(const Problem& problem, const SolverConfig& cfg, const std::vector<Vec>& starts);

}  // namespace spbench
