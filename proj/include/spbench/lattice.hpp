#pragma once

#include "spbench/core.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <array>
#include <variant>

namespace spbench {

using BigInt = boost::multiprecision::cpp_int;

/// Nearest-neighbour phi^4 model on an N x N periodic square lattice.
///
/// Sites are stored row-major, x[i*N + j]. Each site keeps the multiset of
/// its four wrapped neighbours, so for N = 2 the two wrap neighbours in each
/// direction coincide and for N = 1 every neighbour is the site itself.
class Phi4Problem final : public Problem {
 public:
  struct Params {
    int N = 2;
    double lambda = 3.0 / 5.0;
    double mu2 = 2.0;
    double J = 0.0;
  };

  explicit Phi4Problem(Params p, std::string label = {});

  const Params& params() const { return p_; }
  int side() const { return p_.N; }
  const std::array<std::size_t, 4>& neighbours(std::size_t site) const { return nbrs_[site]; }

  Family family() const override { return Family::Phi4; }
  std::size_t dimension() const override { return static_cast<std::size_t>(p_.N) * p_.N; }
  std::string label() const override { return label_; }

  double energy(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  bool analytic_hessian() const override { return true; }

  /// Uniform in [-6, 6] per site.
  Vec sample_start(Rng& rng) const override;
  /// {-5, 0, 5}^(N^2).
  std::optional<std::vector<Vec>> start_grid() const override;

  /// Nonzero real root of the decoupled site cubic, sqrt(6 mu^2 / lambda).
  double uniform_root() const;

 private:
  Params p_;
  std::string label_;
  std::vector<std::array<std::size_t, 4>> nbrs_;
};

Phi4Problem phi4_new(int N, double lambda = 3.0 / 5.0, double mu2 = 2.0, double J = 0.0);

/// Total degree 3^(N^2) of the stationary equations.
BigInt phi4_bezout(const Phi4Problem& p);

/// Exhaustive real stationary points of the J = 0 model (Cartesian product of
/// per-site roots). Throws unless J == 0 and 3^(N^2) <= cap.
SolutionSet phi4_enumerate_decoupled(const Phi4Problem& p, std::uint64_t cap = 19683);

// ---------------------------------------------------------------------------

enum class Boundary { Periodic, AntiPeriodic };

struct ConstantCoupling {
  double value = 1.0;
};
struct UniformSignedCoupling {};
struct UniformCoupling {
  double lo = 0.0;
  double hi = 1.0;
};
using CouplingDistribution = std::variant<ConstantCoupling, UniformSignedCoupling, UniformCoupling>;

std::string describe(const CouplingDistribution& d);
CouplingDistribution parse_distribution(std::string_view text);

/// One lattice bond: site a and its forward neighbour b along one axis.
struct XYEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  double J = 1.0;
  bool wraps = false;
};

/// XY model on a d-dimensional periodic or anti-periodic hypercubic lattice
/// of side L with quenched couplings, one per (site, axis) bond.
class XYProblem final : public Problem {
 public:
  struct Params {
    int d = 1;
    int L = 4;
    Boundary bc = Boundary::Periodic;
    bool gauge_fixed = true;
    std::uint64_t seed = 0;
    CouplingDistribution distribution = UniformSignedCoupling{};
  };

  /// Draws couplings from params.distribution with params.seed.
  explicit XYProblem(Params p, std::string label = {});
  /// Uses the given couplings (length d * L^d, ordered by site then axis).
  XYProblem(Params p, std::vector<double> couplings, std::string label = {});

  const Params& params() const { return p_; }
  std::size_t sites() const { return sites_; }
  const std::vector<XYEdge>& edges() const { return edges_; }
  std::vector<double> couplings() const;
  bool pins_origin() const { return p_.gauge_fixed && p_.bc == Boundary::Periodic; }

  /// Full site angles from the free variable vector (site 0 is 0 when pinned).
  Vec angles(const Vec& x) const;

  Family family() const override { return Family::XY; }
  std::size_t dimension() const override { return sites_ - (pins_origin() ? 1 : 0); }
  std::string label() const override { return label_; }

  double energy(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  bool analytic_hessian() const override { return true; }

  DedupMetric metric() const override { return DedupMetric::AngularMod2Pi; }
  /// Uniform in (-pi, pi].
  Vec sample_start(Rng& rng) const override;

 private:
  void build_edges(const std::vector<double>& couplings);
  /// Effective coupling including the anti-periodic sign flip.
  double effective(const XYEdge& e) const;
  /// Variable index of a site, or -1 for the pinned origin.
  std::ptrdiff_t var(std::size_t site) const;

  Params p_;
  std::string label_;
  std::size_t sites_ = 0;
  std::vector<XYEdge> edges_;
};

XYProblem xy_new(int d, int L, Boundary bc, CouplingDistribution dist, std::uint64_t seed, bool gauge_fixed);

}  // namespace spbench
