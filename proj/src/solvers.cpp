#include "spbench/solvers.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace spbench {

std::string_view status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged:
      return "converged";
    case SolveStatus::Diverged:
      return "diverged";
    case SolveStatus::MaxIters:
      return "max_iters";
    case SolveStatus::SpuriousMinimum:
      return "spurious_minimum";
    case SolveStatus::EvalError:
      return "eval_error";
    case SolveStatus::SingularStep:
      return "singular_step";
  }
  return "unknown";
}

namespace {

constexpr double kDivergenceNorm = 1e8;

/// Factorization of one Jacobian: LU with partial pivoting when square,
/// column-pivoted QR (least squares) otherwise. Kept so the natural
/// monotonicity test can reuse it for simplified Newton corrections.
class Factorized {
 public:
  Factorized(const Mat& jac, double max_cond) {
    if (!jac.allFinite()) throw EvalError("non-finite Jacobian entries");
    if (jac.cols() == 0) return;
    if (jac.rows() == jac.cols()) {
      lu_.compute(jac);
      square_ = true;
      singular_ = !(lu_.rcond() * max_cond >= 1.0);
    } else {
      qr_.compute(jac);
      const auto r = qr_.matrixQR().diagonal().cwiseAbs();
      const Eigen::Index k = std::min(jac.rows(), jac.cols());
      const double hi = r.head(k).maxCoeff();
      const double lo = r.head(k).minCoeff();
      singular_ = k < jac.cols() || !(lo * max_cond >= hi) || hi == 0.0;
    }
    cols_ = jac.cols();
  }

  bool singular() const { return singular_; }

  /// Solution of J d = rhs (least squares when rectangular).
  Vec solve(const Vec& rhs) const {
    if (cols_ == 0) return Vec(0);
    return square_ ? Vec(lu_.solve(rhs)) : Vec(qr_.solve(rhs));
  }

 private:
  Eigen::PartialPivLU<Mat> lu_;
  Eigen::ColPivHouseholderQR<Mat> qr_;
  Eigen::Index cols_ = 0;
  bool square_ = false;
  bool singular_ = false;
};

struct LinearStep {
  Vec delta;
  bool singular = false;
};

LinearStep solve_linear(const Mat& jac, const Vec& rhs, double max_cond) {
  const Factorized f(jac, max_cond);
  LinearStep out;
  out.singular = f.singular();
  if (!out.singular) out.delta = f.solve(rhs);
  if (!out.delta.allFinite()) out.singular = true;
  return out;
}

std::optional<Vec> try_residual(const Problem& problem, const Vec& x) {
  try {
    Vec f = problem.residual(x);
    if (!f.allFinite()) return std::nullopt;
    return f;
  } catch (const EvalError&) {
    return std::nullopt;
  }
}

SolveOutcome finish(SolveStatus status, Vec x, double norm, int iters, std::vector<double> trace) {
  SolveOutcome o;
  o.status = status;
  o.point = std::move(x);
  o.residual_norm = norm;
  o.w_value = norm * norm;
  o.iterations = iters;
  o.trace = std::move(trace);
  return o;
}

void check_config(const SolverConfig& cfg) {
  if (!(cfg.accept_tol > 0.0)) throw std::invalid_argument("accept_tol must be positive");
  if (cfg.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  const auto& d = cfg.damping;
  if (!(d.initial_step > 0.0) || !(d.backtrack > 0.0 && d.backtrack < 1.0) || !(d.min_step > 0.0)) {
    throw std::invalid_argument("damping: need initial_step > 0, 0 < backtrack < 1, min_step > 0");
  }
}

void check_start(const Problem& problem, const Vec& start, const SolverConfig& cfg) {
  check_config(cfg);
  if (static_cast<std::size_t>(start.size()) != problem.dimension()) {
    throw std::invalid_argument("start point has wrong dimension");
  }
  if (!start.allFinite()) throw std::invalid_argument("start point must be finite");
}

}  // namespace

SolveOutcome newton_solve(const Problem& problem, const Vec& start, const SolverConfig& cfg) {
  check_start(problem, start, cfg);
  std::vector<double> trace;
  Vec x = start;
  auto f0 = try_residual(problem, x);
  if (!f0) return finish(SolveStatus::EvalError, x, std::numeric_limits<double>::infinity(), 0, {});
  Vec f = std::move(*f0);
  double norm = f.norm();
  if (cfg.keep_trace) trace.push_back(norm);

  for (int it = 0;; ++it) {
    if (norm <= cfg.accept_tol) return finish(SolveStatus::Converged, x, norm, it, std::move(trace));
    if (it >= cfg.max_iters) return finish(SolveStatus::MaxIters, x, norm, it, std::move(trace));

    std::optional<Factorized> jac;
    Vec delta;
    try {
      jac.emplace(problem.jacobian(x), cfg.singular_cond);
      if (!jac->singular()) delta = jac->solve(-f);
    } catch (const EvalError&) {
      return finish(SolveStatus::EvalError, x, norm, it, std::move(trace));
    }
    if (jac->singular() || !delta.allFinite()) return finish(SolveStatus::SingularStep, x, norm, it, std::move(trace));

    // Natural monotonicity test: the simplified correction J(x)^-1 f(trial)
    // must shrink relative to the Newton step. Unlike a test on |f| it weights
    // each equation by the inverse Jacobian, so one component cannot jump to a
    // far basin on the strength of the others' decrease. The test is a
    // relative decrease, so scaling f leaves the iterates unchanged.
    const double dnorm = delta.norm();
    const bool at_noise_floor = dnorm <= 1e-14 * (1.0 + x.norm());
    bool accepted = false;
    for (double alpha = cfg.damping.initial_step; alpha >= cfg.damping.min_step; alpha *= cfg.damping.backtrack) {
      Vec trial = x + alpha * delta;
      auto ft = try_residual(problem, trial);
      if (!ft) continue;
      const double tn = ft->norm();
      const Vec simplified = jac->solve(-*ft);
      if (at_noise_floor || simplified.norm() <= (1.0 - alpha / 4.0) * dnorm) {
        x = std::move(trial);
        f = std::move(*ft);
        norm = tn;
        accepted = true;
        break;
      }
    }
    if (!accepted) return finish(SolveStatus::Diverged, x, norm, it, std::move(trace));
    if (cfg.keep_trace) trace.push_back(norm);
    if (x.norm() > kDivergenceNorm) return finish(SolveStatus::Diverged, x, norm, it + 1, std::move(trace));
  }
}

SolveOutcome gradsq_solve(const Problem& problem, const Vec& start, const SolverConfig& cfg) {
  check_start(problem, start, cfg);
  std::vector<double> trace;
  Vec x = start;
  const double w_tol = cfg.accept_tol * cfg.accept_tol;

  auto eval = [&](const Vec& p, Vec& f, Vec& g) -> bool {
    auto fr = try_residual(problem, p);
    if (!fr) return false;
    try {
      const Mat jac = problem.jacobian(p);
      if (!jac.allFinite()) return false;
      g = 2.0 * jac.transpose() * *fr;
    } catch (const EvalError&) {
      return false;
    }
    f = std::move(*fr);
    return true;
  };

  Vec f;
  Vec g;
  if (!eval(x, f, g)) return finish(SolveStatus::EvalError, x, std::numeric_limits<double>::infinity(), 0, {});
  double w = f.squaredNorm();
  if (cfg.keep_trace) trace.push_back(std::sqrt(w));

  double step = cfg.damping.initial_step;
  bool stalled = false;
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    if (w <= w_tol) break;
    const double gnorm2 = g.squaredNorm();
    if (std::sqrt(gnorm2) <= cfg.gradsq_grad_tol) {
      stalled = true;
      break;
    }
    bool accepted = false;
    for (double alpha = step; alpha * std::sqrt(gnorm2) > 1e-15 * (1.0 + x.norm()); alpha *= cfg.damping.backtrack) {
      Vec trial = x - alpha * g;
      Vec ft;
      Vec gt;
      if (!eval(trial, ft, gt)) continue;
      const double wt = ft.squaredNorm();
      // Strict decrease as well: near a positive minimum W stops changing in
      // floating point and the Armijo bound alone would accept forever.
      if (wt <= w - 1e-4 * alpha * gnorm2 && wt < w) {
        x = std::move(trial);
        f = std::move(ft);
        g = std::move(gt);
        w = wt;
        step = alpha * 2.0;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      stalled = true;
      break;
    }
    if (cfg.keep_trace) trace.push_back(std::sqrt(w));
    if (x.norm() > kDivergenceNorm) return finish(SolveStatus::Diverged, x, std::sqrt(w), it + 1, std::move(trace));
  }

  const double norm = std::sqrt(w);
  SolveStatus status = SolveStatus::MaxIters;
  if (w <= w_tol) {
    status = SolveStatus::Converged;
  } else if (stalled) {
    status = SolveStatus::SpuriousMinimum;
  }
  auto out = finish(status, x, norm, it, std::move(trace));
  out.w_value = w;
  return out;
}

SolveOutcome homotopy_track(const Problem& problem, const Vec& start, const SolverConfig& cfg) {
  check_start(problem, start, cfg);
  const HomotopyConfig& hc = cfg.homotopy;
  auto f_start = try_residual(problem, start);
  if (!f_start) return finish(SolveStatus::EvalError, start, std::numeric_limits<double>::infinity(), 0, {});
  const Vec f0 = std::move(*f_start);
  const double path_tol = std::max(cfg.accept_tol, 1e-10 * (1.0 + f0.norm()));

  std::vector<double> trace;
  Vec x = start;
  double t = 0.0;
  double dt = hc.initial_dt;
  int steps = 0;

  while (t < 1.0) {
    if (steps >= hc.max_steps) {
      const auto fx = try_residual(problem, x);
      return finish(SolveStatus::MaxIters, x, fx ? fx->norm() : 0.0, steps, std::move(trace));
    }
    dt = std::min(dt, 1.0 - t);

    LinearStep tangent;
    try {
      tangent = solve_linear(problem.jacobian(x), -f0, cfg.singular_cond);
    } catch (const EvalError&) {
      return finish(SolveStatus::EvalError, x, 0.0, steps, std::move(trace));
    }
    if (tangent.singular) {
      const auto fx = try_residual(problem, x);
      return finish(SolveStatus::SingularStep, x, fx ? fx->norm() : 0.0, steps, std::move(trace));
    }

    const double t_next = (1.0 - t - dt <= 0.0) ? 1.0 : t + dt;
    Vec y = x + (t_next - t) * tangent.delta;
    bool ok = false;
    int used = 0;
    double prev = std::numeric_limits<double>::infinity();
    for (int c = 0; c <= hc.corrector_iters; ++c) {
      auto fy = try_residual(problem, y);
      if (!fy) break;
      const Vec h = *fy - (1.0 - t_next) * f0;
      const double hn = h.norm();
      if (hn <= path_tol) {
        ok = true;
        used = c;
        break;
      }
      if (c == hc.corrector_iters || hn >= prev) break;
      prev = hn;
      LinearStep corr;
      try {
        corr = solve_linear(problem.jacobian(y), -h, cfg.singular_cond);
      } catch (const EvalError&) {
        break;
      }
      if (corr.singular) break;
      y += corr.delta;
    }

    if (ok) {
      x = std::move(y);
      t = t_next;
      ++steps;
      if (cfg.keep_trace) trace.push_back(t);
      if (used <= 2) dt = std::min(dt * hc.growth, hc.max_dt);
    } else {
      dt *= 0.5;
      if (dt < hc.min_dt) {
        const auto fx = try_residual(problem, x);
        return finish(SolveStatus::Diverged, x, fx ? fx->norm() : 0.0, steps, std::move(trace));
      }
    }
  }

  // Endgame at t = 1: undamped Newton down to the acceptance tolerance.
  auto fx = try_residual(problem, x);
  if (!fx) return finish(SolveStatus::EvalError, x, 0.0, steps, std::move(trace));
  double norm = fx->norm();
  for (int it = 0; norm > cfg.accept_tol && it < cfg.max_iters; ++it) {
    LinearStep step;
    try {
      step = solve_linear(problem.jacobian(x), -*fx, cfg.singular_cond);
    } catch (const EvalError&) {
      return finish(SolveStatus::EvalError, x, norm, steps, std::move(trace));
    }
    if (step.singular) return finish(SolveStatus::SingularStep, x, norm, steps, std::move(trace));
    Vec trial = x + step.delta;
    auto ft = try_residual(problem, trial);
    if (!ft || !(ft->norm() < norm)) break;
    x = std::move(trial);
    fx = std::move(ft);
    norm = fx->norm();
  }
  const auto status = norm <= cfg.accept_tol ? SolveStatus::Converged : SolveStatus::Diverged;
  return finish(status, x, norm, steps, std::move(trace));
}

SolveOutcome solve(const Problem& problem, const Vec& start, const SolverConfig& cfg) {
  switch (cfg.method) {
    case SolverKind::Newton:
      return newton_solve(problem, start, cfg);
    case SolverKind::GradSq:
      return gradsq_solve(problem, start, cfg);
    case SolverKind::NewtonHomotopy:
      return homotopy_track(problem, start, cfg);
    default:
      throw std::invalid_argument("solver kind is not an iterative method");
  }
}

// ---------------------------------------------------------------------------
// Multistart

std::vector<Vec> campaign_starts(const Problem& problem, const SolverConfig& cfg) {
  if (cfg.grid_starts) {
    auto grid = problem.start_grid();
    if (!grid) throw std::invalid_argument("family '" + std::string(family_name(problem.family())) +
                                           "' defines no start grid");
    return std::move(*grid);
  }
  if (cfg.starts < 1) throw std::invalid_argument("multistart needs at least one start");
  std::vector<Vec> starts;
  starts.reserve(static_cast<std::size_t>(cfg.starts));
  for (int id = 0; id < cfg.starts; ++id) {
    Rng rng(cfg.seed, static_cast<std::uint64_t>(id));
    starts.push_back(problem.sample_start(rng));
  }
  return starts;
}

MultistartResult multistart(const Problem& problem, const SolverConfig& cfg) {
  return multistart(problem, cfg, campaign_starts(problem, cfg));
}

MultistartResult multistart(const Problem& problem, const SolverConfig& cfg, const std::vector<Vec>& starts) {
  check_config(cfg);
  const auto t0 = std::chrono::steady_clock::now();

  struct Slot {
    SolveStatus status = SolveStatus::Diverged;
    std::optional<StationaryPoint> point;
  };
  std::vector<Slot> slots(starts.size());

  auto work = [&](std::size_t id) {
    Slot& slot = slots[id];
    const SolveOutcome out = solve(problem, starts[id], cfg);
    slot.status = out.status;
    if (!out.converged()) return;
    try {
      StationaryPoint sp = classify(problem, out.point);
      sp.provenance = {cfg.method, cfg.seed, static_cast<std::int64_t>(id)};
      sp.feasible = problem.feasible(out.point, cfg.feasibility_tol);
      slot.point = std::move(sp);
    } catch (const EvalError&) {
      slot.status = SolveStatus::EvalError;
    }
  };

  unsigned threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(starts.size(), 1)));
  if (threads <= 1) {
    for (std::size_t id = 0; id < starts.size(); ++id) work(id);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t id = next++; id < starts.size(); id = next++) work(id);
      });
    }
  }

  MultistartResult result;
  CampaignStats& st = result.stats;
  st.starts = starts.size();
  std::vector<StationaryPoint> found;
  for (auto& slot : slots) {
    switch (slot.status) {
      case SolveStatus::Converged:
        ++st.converged;
        found.push_back(std::move(*slot.point));
        break;
      case SolveStatus::SpuriousMinimum:
        ++st.spurious;
        break;
      case SolveStatus::EvalError:
        ++st.eval_errors;
        break;
      case SolveStatus::MaxIters:
        ++st.max_iters;
        break;
      case SolveStatus::SingularStep:
        ++st.singular_steps;
        break;
      case SolveStatus::Diverged:
        ++st.diverged;
        break;
    }
  }
  result.solutions = dedup(std::move(found), cfg.dedup_tol, problem.metric(), problem.label());
  st.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace spbench
