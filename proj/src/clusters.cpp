#include "spbench/clusters.hpp"

#include <cmath>
#include <numbers>

namespace spbench {

namespace {

void require_finite(const Vec& x) {
  if (!x.allFinite()) throw EvalError("non-finite input coordinates");
}

double checked_distance(const Vec3& a, const Vec3& b) {
  const double r = (a - b).norm();
  if (!(r >= kCoincidenceTol)) throw EvalError("coincident particles (pair distance below 1e-12)");
  return r;
}

/// dE/dP_i for a radial pair energy, accumulated over all pairs.
template <typename DV>
std::vector<Vec3> pair_forces(const std::vector<Vec3>& pos, DV&& dv) {
  std::vector<Vec3> grad(pos.size(), Vec3::Zero());
  for (std::size_t i = 0; i < pos.size(); ++i) {
    for (std::size_t j = i + 1; j < pos.size(); ++j) {
      const Vec3 d = pos[i] - pos[j];
      const double r = checked_distance(pos[i], pos[j]);
      const Vec3 g = (dv(r) / r) * d;
      grad[i] += g;
      grad[j] -= g;
    }
  }
  return grad;
}

}  // namespace

// ---------------------------------------------------------------------------
// Thomson

ThomsonProblem::ThomsonProblem(int electrons, std::string label) : n_electrons_(electrons), label_(std::move(label)) {
  if (electrons < 2) throw std::invalid_argument("thomson: need at least 2 electrons");
  if (label_.empty()) label_ = "thomson-N" + std::to_string(electrons);
}

std::vector<Vec3> ThomsonProblem::embed(const Vec& x) const {
  check_dimension(x);
  require_finite(x);
  std::vector<Vec3> pos;
  pos.reserve(static_cast<std::size_t>(n_electrons_));
  pos.emplace_back(0.0, 0.0, 1.0);
  pos.emplace_back(std::sin(x[0]), 0.0, std::cos(x[0]));
  for (int k = 2; k < n_electrons_; ++k) {
    const double th = x[2 * k - 3];
    const double ph = x[2 * k - 2];
    pos.emplace_back(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
  }
  return pos;
}

double ThomsonProblem::energy(const Vec& x) const {
  const auto pos = embed(x);
  double e = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    for (std::size_t j = i + 1; j < pos.size(); ++j) e += 1.0 / checked_distance(pos[i], pos[j]);
  }
  return e;
}

Vec ThomsonProblem::gradient(const Vec& x) const {
  const auto pos = embed(x);
  const auto dp = pair_forces(pos, [](double r) { return -1.0 / (r * r); });

  Vec g(x.size());
  g[0] = dp[1].dot(Vec3(std::cos(x[0]), 0.0, -std::sin(x[0])));
  for (int k = 2; k < n_electrons_; ++k) {
    const double th = x[2 * k - 3];
    const double ph = x[2 * k - 2];
    const Vec3 d_th(std::cos(th) * std::cos(ph), std::cos(th) * std::sin(ph), -std::sin(th));
    const Vec3 d_ph(-std::sin(th) * std::sin(ph), std::sin(th) * std::cos(ph), 0.0);
    g[2 * k - 3] = dp[static_cast<std::size_t>(k)].dot(d_th);
    g[2 * k - 2] = dp[static_cast<std::size_t>(k)].dot(d_ph);
  }
  return g;
}

Vec ThomsonProblem::sample_start(Rng& rng) const {
  Vec x(dimension());
  constexpr double pi = std::numbers::pi;
  x[0] = rng.uniform(0.1, pi - 0.1);
  for (int k = 2; k < n_electrons_; ++k) {
    x[2 * k - 3] = rng.uniform(0.1, pi - 0.1);
    x[2 * k - 2] = pi - 2.0 * pi * rng.uniform();
  }
  return x;
}

// ---------------------------------------------------------------------------
// Pair potentials

double pair_energy(const PairKind& kind, double r) {
  if (const auto* lj = std::get_if<LennardJones>(&kind)) {
    const double s6 = std::pow(lj->sigma / r, 6);
    return 4.0 * lj->epsilon * (s6 * s6 - s6);
  }
  const auto& m = std::get<Morse>(kind);
  const double e = std::exp(m.rho * (1.0 - r / m.r_e));
  return m.epsilon * e * (e - 2.0);
}

double pair_derivative(const PairKind& kind, double r) {
  if (const auto* lj = std::get_if<LennardJones>(&kind)) {
    const double s6 = std::pow(lj->sigma / r, 6);
    return 4.0 * lj->epsilon * (-12.0 * s6 * s6 + 6.0 * s6) / r;
  }
  const auto& m = std::get<Morse>(kind);
  const double e = std::exp(m.rho * (1.0 - r / m.r_e));
  return -2.0 * m.epsilon * m.rho / m.r_e * e * (e - 1.0);
}

double pair_minimum(const PairKind& kind) {
  if (const auto* lj = std::get_if<LennardJones>(&kind)) return std::pow(2.0, 1.0 / 6.0) * lj->sigma;
  return std::get<Morse>(kind).r_e;
}

double pair_curvature(const PairKind& kind) {
  // LJ: v'' = 4 eps (156 s^12 / r^14 - 42 s^6 / r^8) with (s / r_min)^6 = 1/2,
  // so r_min^2 v'' / eps = 4 (156 / 4 - 42 / 2). Morse: v''(r_e) = 2 rho^2 eps / r_e^2.
  if (std::holds_alternative<LennardJones>(kind)) return 4.0 * (156.0 / 4.0 - 42.0 / 2.0);
  const double rho = std::get<Morse>(kind).rho;
  return 2.0 * rho * rho;
}

// ---------------------------------------------------------------------------
// Clusters

ClusterProblem::ClusterProblem(int atoms, PairKind kind, std::string label)
    : n_atoms_(atoms), kind_(kind), label_(std::move(label)) {
  if (atoms < 2) throw std::invalid_argument("cluster: need at least 2 atoms");
  if (const auto* lj = std::get_if<LennardJones>(&kind_)) {
    if (!(lj->epsilon > 0.0 && lj->sigma > 0.0)) throw std::invalid_argument("lj: epsilon, sigma must be positive");
  } else {
    const auto& m = std::get<Morse>(kind_);
    if (!(m.epsilon > 0.0 && m.r_e > 0.0 && m.rho > 0.0)) {
      throw std::invalid_argument("morse: epsilon, r_e, rho must be positive");
    }
  }
  if (label_.empty()) {
    if (std::holds_alternative<LennardJones>(kind_)) {
      label_ = "lj-N" + std::to_string(atoms);
    } else {
      std::string rho = std::to_string(std::get<Morse>(kind_).rho);
      rho.erase(rho.find_last_not_of('0') + 1);
      if (rho.back() == '.') rho.pop_back();
      label_ = "morse-N" + std::to_string(atoms) + "-rho" + rho;
    }
  }
}

Family ClusterProblem::family() const {
  return std::holds_alternative<LennardJones>(kind_) ? Family::LJ : Family::Morse;
}

std::size_t ClusterProblem::dimension() const {
  return n_atoms_ == 2 ? 1 : static_cast<std::size_t>(3 * n_atoms_ - 6);
}

std::vector<Vec3> ClusterProblem::embed(const Vec& x) const {
  check_dimension(x);
  require_finite(x);
  std::vector<Vec3> pos;
  pos.reserve(static_cast<std::size_t>(n_atoms_));
  pos.emplace_back(0.0, 0.0, 0.0);
  pos.emplace_back(x[0], 0.0, 0.0);
  if (n_atoms_ >= 3) pos.emplace_back(x[1], x[2], 0.0);
  for (int a = 3; a < n_atoms_; ++a) {
    const auto o = static_cast<Eigen::Index>(3 * a - 6);
    pos.emplace_back(x[o], x[o + 1], x[o + 2]);
  }
  return pos;
}

double ClusterProblem::energy(const Vec& x) const {
  const auto pos = embed(x);
  double e = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    for (std::size_t j = i + 1; j < pos.size(); ++j) e += pair_energy(kind_, checked_distance(pos[i], pos[j]));
  }
  return e;
}

Vec ClusterProblem::gradient(const Vec& x) const {
  const auto pos = embed(x);
  const auto dp = pair_forces(pos, [this](double r) { return pair_derivative(kind_, r); });
  Vec g(x.size());
  g[0] = dp[1].x();
  if (n_atoms_ >= 3) {
    g[1] = dp[2].x();
    g[2] = dp[2].y();
  }
  for (int a = 3; a < n_atoms_; ++a) g.segment<3>(3 * a - 6) = dp[static_cast<std::size_t>(a)];
  return g;
}

Vec ClusterProblem::sample_start(Rng& rng) const {
  const double half = 0.5 + 0.75 * std::cbrt(static_cast<double>(n_atoms_));
  constexpr double min_pair = 0.5;
  for (;;) {
    std::vector<Vec3> pos = {Vec3::Zero()};
    bool ok = true;
    for (int a = 1; a < n_atoms_ && ok; ++a) {
      ok = false;
      for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
        Vec3 p(rng.uniform(-half, half), a >= 2 ? rng.uniform(-half, half) : 0.0,
               a >= 3 ? rng.uniform(-half, half) : 0.0);
        ok = true;
        for (const auto& q : pos) ok = ok && (p - q).norm() >= min_pair;
        if (ok) pos.push_back(p);
      }
    }
    if (!ok) continue;
    Vec x(dimension());
    x[0] = pos[1].x();
    if (n_atoms_ >= 3) {
      x[1] = pos[2].x();
      x[2] = pos[2].y();
    }
    for (int a = 3; a < n_atoms_; ++a) x.segment<3>(3 * a - 6) = pos[static_cast<std::size_t>(a)];
    return x;
  }
}

}  // namespace spbench
