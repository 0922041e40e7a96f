#pragma once

// Problem-family-agnostic pieces: the problem interface, stationary-point
// classification, finite-difference validation and solution deduplication.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spbench {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Raised when a problem cannot be evaluated at a point (coincident atoms,
/// non-finite values, exponent overflow). Solvers treat it as a failed step.
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Family { Phi4, XY, Thomson, LJ, Morse, Nash, Puzzle, Custom };

std::string_view family_name(Family f);
Family family_from_name(std::string_view name);

enum class DedupMetric { Euclidean, AngularMod2Pi };

/// Counter-based generator; one independent stream per (seed, stream id).
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard exponential variate.
  double exponential();

 private:
  std::uint64_t state_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// A concrete, sized member of one problem family.
///
/// For gradient systems the residual map is the gradient of energy() and the
/// Jacobian is the Hessian. Systems that are not gradients of a scalar (Nash,
/// puzzles) expose energy() = W(x) = |f(x)|^2, so gradient() = 2 J^T f and
/// hessian() is the Hessian of the merit function.
///
/// All evaluation methods are const and pure.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual Family family() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::size_t residual_size() const { return dimension(); }
  virtual std::string label() const = 0;

  virtual double energy(const Vec& x) const = 0;
  virtual Vec gradient(const Vec& x) const = 0;
  /// Default: central differences of gradient() with step 1e-5, symmetrized.
  virtual Mat hessian(const Vec& x) const;
  virtual bool analytic_hessian() const { return false; }

  virtual bool gradient_system() const { return true; }
  virtual Vec residual(const Vec& x) const { return gradient(x); }
  virtual Mat jacobian(const Vec& x) const { return hessian(x); }

  virtual DedupMetric metric() const { return DedupMetric::Euclidean; }
  /// Draws one start point from the family's sampling region.
  virtual Vec sample_start(Rng& rng) const = 0;
  /// Structured start grid when the family defines one (e.g. phi4 {-5,0,5}^n).
  virtual std::optional<std::vector<Vec>> start_grid() const { return std::nullopt; }
  /// Family-specific feasibility (Nash equilibrium check, geometric puzzle
  /// match). nullopt when the family has no such notion.
  virtual std::optional<bool> feasible(const Vec& /*x*/, double /*tol*/) const { return std::nullopt; }

 protected:
  void check_dimension(const Vec& x) const;
};

using ProblemPtr = std::shared_ptr<const Problem>;

/// A residual system given by callables; energy is W = |f|^2.
class FunctionSystem final : public Problem {
 public:
  using ResidualFn = std::function<Vec(const Vec&)>;
  using JacobianFn = std::function<Mat(const Vec&)>;

  FunctionSystem(std::string label, std::size_t n, std::size_t m, ResidualFn f, JacobianFn jac,
                 double start_lo = -1.0, double start_hi = 1.0);

  Family family() const override { return Family::Custom; }
  std::size_t dimension() const override { return n_; }
  std::size_t residual_size() const override { return m_; }
  std::string label() const override { return label_; }
  double energy(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  bool gradient_system() const override { return false; }
  Vec residual(const Vec& x) const override;
  Mat jacobian(const Vec& x) const override;
  Vec sample_start(Rng& rng) const override;

 private:
  std::string label_;
  std::size_t n_;
  std::size_t m_;
  ResidualFn f_;
  JacobianFn jac_;
  double lo_;
  double hi_;
};

enum class SolverKind { Newton, GradSq, NewtonHomotopy, Enumeration, Oracle };

std::string_view solver_name(SolverKind s);
SolverKind solver_from_name(std::string_view name);

struct Provenance {
  SolverKind solver = SolverKind::Newton;
  std::uint64_t seed = 0;
  std::int64_t start_id = -1;

  bool operator==(const Provenance&) const = default;
};

struct StationaryPoint {
  Vec point;
  double energy = 0.0;
  double residual_norm = 0.0;
  int index = 0;
  int zero_eigs = 0;
  bool singular = false;
  std::optional<bool> feasible;
  Provenance provenance;
};

struct SolutionSet {
  std::string instance_label;
  double tolerance = 1e-6;
  std::vector<StationaryPoint> points;

  std::size_t size() const { return points.size(); }
};

enum class HessianMode { Analytic, FiniteDifference };

struct ClassifyConfig {
  /// Absolute eigenvalue threshold; unset means 1e-6 * (1 + max|lambda|).
  std::optional<double> zero_tol;
  /// Analytic uses Problem::hessian() (itself finite-differenced for some
  /// families); FiniteDifference always differences the gradient.
  HessianMode hessian_mode = HessianMode::Analytic;
  double fd_step = 1e-5;
};

struct EigenCounts {
  int negative = 0;
  int zero = 0;
  double zero_tol = 0.0;
};

/// Counts negative and near-zero eigenvalues of the symmetric part of h.
EigenCounts count_eigenvalues(const Mat& h, std::optional<double> zero_tol);

StationaryPoint classify(const Problem& problem, const Vec& x, const ClassifyConfig& cfg = {});

/// Central-difference gradient of Problem::energy.
Vec fd_gradient(const Problem& problem, const Vec& x, double h = 1e-5);

/// Central differences of Problem::gradient, symmetrized.
Mat fd_hessian(const Problem& problem, const Vec& x, double h = 1e-5);

/// Central differences of Problem::residual (m x n).
Mat fd_jacobian(const Problem& problem, const Vec& x, double h = 1e-5);

double distance(const Vec& a, const Vec& b, DedupMetric metric);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// Ascending energy, then lexicographic coordinates.
bool canonical_less(const StationaryPoint& a, const StationaryPoint& b);

/// Greedy clustering in canonical order. Every input must carry the same
/// instance label (passed separately since StationaryPoint does not store it).
SolutionSet dedup(std::vector<StationaryPoint> points, double tol, DedupMetric metric,
                  std::string instance_label = {});

/// Variant that checks a label per point.
SolutionSet dedup_labeled(const std::vector<std::pair<std::string, StationaryPoint>>& points, double tol,
                          DedupMetric metric);

}  // namespace spbench
