#pragma once

#include "spbench/core.hpp"

#include <variant>

namespace spbench {

using Vec3 = Eigen::Vector3d;

/// Minimum pair distance below which cluster and Thomson evaluations fail.
inline constexpr double kCoincidenceTol = 1e-12;

/// N unit charges on the unit sphere, parameterized by spherical angles.
///
/// Electron 1 sits at the north pole, electron 2 moves on the xz meridian
/// (one polar angle), electrons 3..N carry (polar, azimuth). The variable
/// vector is [theta_2, theta_3, phi_3, ..., theta_N, phi_N], length 2N - 3.
class ThomsonProblem final : public Problem {
 public:
  explicit ThomsonProblem(int electrons, std::string label = {});

  int electrons() const { return n_electrons_; }
  std::vector<Vec3> embed(const Vec& x) const;

  Family family() const override { return Family::Thomson; }
  std::size_t dimension() const override { return static_cast<std::size_t>(2 * n_electrons_ - 3); }
  std::string label() const override { return label_; }

  double energy(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;

  /// Polar angles in [0.1, pi - 0.1], azimuths in (-pi, pi].
  Vec sample_start(Rng& rng) const override;

 private:
  int n_electrons_;
  std::string label_;
};

struct LennardJones {
  double epsilon = 1.0;
  double sigma = 1.0;
};

struct Morse {
  double epsilon = 1.0;
  double r_e = 1.0;
  double rho = 6.0;
};

using PairKind = std::variant<LennardJones, Morse>;

double pair_energy(const PairKind& kind, double r);
double pair_derivative(const PairKind& kind, double r);
/// Distance of the pair-potential minimum.
double pair_minimum(const PairKind& kind);

/// Dimensionless well curvature r_min^2 v''(r_min) / epsilon, in closed form.
double pair_curvature(const PairKind& kind);

/// Lennard-Jones or Morse cluster with rigid-motion coordinates removed.
///
/// Atom 1 is at the origin, atom 2 at (x2, 0, 0), atom 3 at (x3, y3, 0), atoms
/// 4..N are free. Variables [x2, x3, y3, x4, y4, z4, ...]; n = 3N - 6 for
/// N >= 3 and n = 1 for the dimer.
class ClusterProblem final : public Problem {
 public:
  ClusterProblem(int atoms, PairKind kind, std::string label = {});

  int atoms() const { return n_atoms_; }
  const PairKind& kind() const { return kind_; }
  std::vector<Vec3> embed(const Vec& x) const;

  Family family() const override;
  std::size_t dimension() const override;
  std::string label() const override { return label_; }

  double energy(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;

  /// Random geometries with every pair distance >= 0.5 (rejection sampling).
  Vec sample_start(Rng& rng) const override;

 private:
  int n_atoms_;
  PairKind kind_;
  std::string label_;
};

}  // namespace spbench
