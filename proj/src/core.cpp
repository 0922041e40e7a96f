#include "spbench/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace spbench {

namespace {

constexpr std::pair<Family, std::string_view> kFamilyNames[] = {
    {Family::Phi4, "phi4"},   {Family::XY, "xy"},     {Family::Thomson, "thomson"}, {Family::LJ, "lj"},
    {Family::Morse, "morse"}, {Family::Nash, "nash"}, {Family::Puzzle, "puzzle"},   {Family::Custom, "custom"},
};

constexpr std::pair<SolverKind, std::string_view> kSolverNames[] = {
    {SolverKind::Newton, "newton"},
    {SolverKind::GradSq, "gradsq"},
    {SolverKind::NewtonHomotopy, "homotopy"},
    {SolverKind::Enumeration, "enumeration"},
    {SolverKind::Oracle, "oracle"},
};

}  // namespace

std::string_view family_name(Family f) {
  for (auto [k, v] : kFamilyNames) {
    if (k == f) return v;
  }
  return "unknown";
}

Family family_from_name(std::string_view name) {
  for (auto [k, v] : kFamilyNames) {
    if (v == name) return k;
  }
  throw std::invalid_argument("unknown family: " + std::string(name));
}

std::string_view solver_name(SolverKind s) {
  for (auto [k, v] : kSolverNames) {
    if (k == s) return v;
  }
  return "unknown";
}

SolverKind solver_from_name(std::string_view name) {
  for (auto [k, v] : kSolverNames) {
    if (v == name) return k;
  }
  throw std::invalid_argument("unknown solver: " + std::string(name));
}

// ---------------------------------------------------------------------------
// Rng

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : state_(splitmix64(seed) ^ splitmix64(~stream)) {}

std::uint64_t Rng::next_u64() {
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::exponential() { return -std::log1p(-uniform()); }

// ---------------------------------------------------------------------------
// Problem

void Problem::check_dimension(const Vec& x) const {
  if (static_cast<std::size_t>(x.size()) != dimension()) {
    throw std::invalid_argument("point has length " + std::to_string(x.size()) + ", expected " +
                                std::to_string(dimension()));
  }
}

Mat Problem::hessian(const Vec& x) const { return fd_hessian(*this, x, 1e-5); }

FunctionSystem::FunctionSystem(std::string label, std::size_t n, std::size_t m, ResidualFn f, JacobianFn jac,
                               double start_lo, double start_hi)
    : label_(std::move(label)), n_(n), m_(m), f_(std::move(f)), jac_(std::move(jac)), lo_(start_lo), hi_(start_hi) {}

Vec FunctionSystem::residual(const Vec& x) const {
  check_dimension(x);
  return f_(x);
}

Mat FunctionSystem::jacobian(const Vec& x) const {
  check_dimension(x);
  return jac_ ? jac_(x) : fd_jacobian(*this, x);
}

double FunctionSystem::energy(const Vec& x) const { return residual(x).squaredNorm(); }

Vec FunctionSystem::gradient(const Vec& x) const { return 2.0 * jacobian(x).transpose() * residual(x); }

Vec FunctionSystem::sample_start(Rng& rng) const {
  Vec x(n_);
  for (auto& v : x) v = rng.uniform(lo_, hi_);
  return x;
}

// ---------------------------------------------------------------------------
// Finite differences

Vec fd_gradient(const Problem& problem, const Vec& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("fd step must be positive");
  if (!x.allFinite()) throw std::invalid_argument("fd_gradient: non-finite point");
  Vec g(x.size());
  Vec probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double fp = problem.energy(probe);
    probe[i] = x[i] - h;
    const double fm = problem.energy(probe);
    probe[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm)) throw EvalError("fd_gradient: non-finite energy in stencil");
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Mat fd_hessian(const Problem& problem, const Vec& x, double h) {
  const Eigen::Index n = x.size();
  Mat hess(n, n);
  Vec probe = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    probe[i] = x[i] + h;
    const Vec gp = problem.gradient(probe);
    probe[i] = x[i] - h;
    const Vec gm = problem.gradient(probe);
    probe[i] = x[i];
    hess.col(i) = (gp - gm) / (2.0 * h);
  }
  return 0.5 * (hess + hess.transpose());
}

Mat fd_jacobian(const Problem& problem, const Vec& x, double h) {
  const Eigen::Index n = x.size();
  Mat jac(static_cast<Eigen::Index>(problem.residual_size()), n);
  Vec probe = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    probe[i] = x[i] + h;
    const Vec fp = problem.residual(probe);
    probe[i] = x[i] - h;
    const Vec fm = problem.residual(probe);
    probe[i] = x[i];
    jac.col(i) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

// ---------------------------------------------------------------------------
// Classification

EigenCounts count_eigenvalues(const Mat& h, std::optional<double> zero_tol) {
  if (h.rows() != h.cols()) throw std::invalid_argument("Hessian must be square");
  if (!h.allFinite()) throw EvalError("non-finite Hessian entries");
  EigenCounts out;
  if (h.rows() == 0) {
    out.zero_tol = zero_tol.value_or(1e-6);
    return out;
  }
  const Mat sym = 0.5 * (h + h.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw EvalError("eigendecomposition failed");
  const Vec& ev = es.eigenvalues();
  out.zero_tol = zero_tol ? *zero_tol : 1e-6 * (1.0 + ev.cwiseAbs().maxCoeff());
  for (double lambda : ev) {
    if (lambda < -out.zero_tol) {
      ++out.negative;
    } else if (std::abs(lambda) <= out.zero_tol) {
      ++out.zero;
    }
  }
  return out;
}

StationaryPoint classify(const Problem& problem, const Vec& x, const ClassifyConfig& cfg) {
  if (static_cast<std::size_t>(x.size()) != problem.dimension()) {
    throw std::invalid_argument("classify: dimension mismatch");
  }
  if (cfg.zero_tol && !(*cfg.zero_tol > 0.0)) throw std::invalid_argument("zero_tol must be positive");
  if (!(cfg.fd_step > 0.0)) throw std::invalid_argument("fd_step must be positive");

  const Mat h = cfg.hessian_mode == HessianMode::Analytic ? problem.hessian(x) : fd_hessian(problem, x, cfg.fd_step);
  const EigenCounts counts = count_eigenvalues(h, cfg.zero_tol);

  StationaryPoint sp;
  sp.point = x;
  sp.energy = problem.energy(x);
  sp.residual_norm = problem.residual(x).norm();
  sp.index = counts.negative;
  sp.zero_eigs = counts.zero;
  sp.singular = counts.zero > 0;
  return sp;
}

// ---------------------------------------------------------------------------
// Deduplication

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(a, two_pi);  // [-pi, pi]
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

double distance(const Vec& a, const Vec& b, DedupMetric metric) {
  if (a.size() != b.size()) throw std::invalid_argument("distance: dimension mismatch");
  if (metric == DedupMetric::Euclidean) return (a - b).norm();
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double d = wrap_angle(a[i] - b[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

bool canonical_less(const StationaryPoint& a, const StationaryPoint& b) {
  if (a.energy != b.energy) return a.energy < b.energy;
  return std::lexicographical_compare(a.point.begin(), a.point.end(), b.point.begin(), b.point.end());
}

SolutionSet dedup(std::vector<StationaryPoint> points, double tol, DedupMetric metric, std::string instance_label) {
  if (!(tol > 0.0)) throw std::invalid_argument("dedup tolerance must be positive");
  std::stable_sort(points.begin(), points.end(), canonical_less);

  SolutionSet out;
  out.instance_label = std::move(instance_label);
  out.tolerance = tol;
  for (auto& p : points) {
    const bool seen = std::any_of(out.points.begin(), out.points.end(), [&](const StationaryPoint& rep) {
      return distance(rep.point, p.point, metric) < tol;
    });
    if (!seen) out.points.push_back(std::move(p));
  }
  return out;
}

SolutionSet dedup_labeled(const std::vector<std::pair<std::string, StationaryPoint>>& points, double tol,
                          DedupMetric metric) {
  std::vector<StationaryPoint> flat;
  flat.reserve(points.size());
  std::string label;
  for (const auto& [l, p] : points) {
    if (flat.empty()) {
      label = l;
    } else if (l != label) {
      throw std::invalid_argument("dedup: mixed instance labels '" + label + "' and '" + l + "'");
    }
    flat.push_back(p);
  }
  return dedup(std::move(flat), tol, metric, label);
}

}  // namespace spbench
