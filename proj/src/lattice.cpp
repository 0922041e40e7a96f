#include "spbench/lattice.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace spbench {

namespace {

void require_finite(const Vec& x) {
  if (!x.allFinite()) throw EvalError("non-finite input coordinates");
}

std::string default_phi4_label(const Phi4Problem::Params& p) {
  std::ostringstream os;
  os << "phi4-N" << p.N << "-J" << p.J;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// phi^4

Phi4Problem::Phi4Problem(Params p, std::string label) : p_(p), label_(std::move(label)) {
  if (p_.N < 1) throw std::invalid_argument("phi4: lattice side N must be >= 1");
  if (!(p_.lambda > 0.0)) throw std::invalid_argument("phi4: lambda must be positive");
  if (label_.empty()) label_ = default_phi4_label(p_);

  const auto N = static_cast<std::size_t>(p_.N);
  nbrs_.resize(N * N);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      nbrs_[i * N + j] = {((i + 1) % N) * N + j, ((i + N - 1) % N) * N + j, i * N + (j + 1) % N,
                          i * N + (j + N - 1) % N};
    }
  }
}

double Phi4Problem::energy(const Vec& x) const {
  check_dimension(x);
  require_finite(x);
  double e = 0.0;
  for (std::size_t s = 0; s < nbrs_.size(); ++s) {
    const double xs = x[s];
    const double x2 = xs * xs;
    double coupling = 0.0;
    for (std::size_t t : nbrs_[s]) coupling += (xs - x[t]) * (xs - x[t]);
    e += p_.lambda / 24.0 * x2 * x2 - 0.5 * p_.mu2 * x2 + 0.25 * p_.J * coupling;
  }
  return e;
}

Vec Phi4Problem::gradient(const Vec& x) const {
  check_dimension(x);
  require_finite(x);
  Vec g(x.size());
  for (std::size_t s = 0; s < nbrs_.size(); ++s) {
    const double xs = x[s];
    double sum = 0.0;
    for (std::size_t t : nbrs_[s]) sum += x[t];
    g[s] = p_.lambda / 6.0 * xs * xs * xs + (4.0 * p_.J - p_.mu2) * xs - p_.J * sum;
  }
  return g;
}

Mat Phi4Problem::hessian(const Vec& x) const {
  check_dimension(x);
  require_finite(x);
  const auto n = static_cast<Eigen::Index>(x.size());
  Mat h = Mat::Zero(n, n);
  for (std::size_t s = 0; s < nbrs_.size(); ++s) {
    h(s, s) += 0.5 * p_.lambda * x[s] * x[s] + 4.0 * p_.J - p_.mu2;
    for (std::size_t t : nbrs_[s]) h(s, t) -= p_.J;
  }
  return h;
}

Vec Phi4Problem::sample_start(Rng& rng) const {
  Vec x(dimension());
  for (auto& v : x) v = rng.uniform(-6.0, 6.0);
  return x;
}

std::optional<std::vector<Vec>> Phi4Problem::start_grid() const {
  const std::size_t n = dimension();
  if (n > 12) return std::nullopt;
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= 3;
  std::vector<Vec> grid;
  grid.reserve(total);
  for (std::size_t code = 0; code < total; ++code) {
    Vec x(n);
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i, c /= 3) x[i] = 5.0 * (static_cast<double>(c % 3) - 1.0);
    grid.push_back(std::move(x));
  }
  return grid;
}

double Phi4Problem::uniform_root() const { return std::sqrt(6.0 * p_.mu2 / p_.lambda); }

Phi4Problem phi4_new(int N, double lambda, double mu2, double J) {
  if (N == 0) throw std::invalid_argument("phi4: N must be >= 1");
  return Phi4Problem({N, lambda, mu2, J});
}

BigInt phi4_bezout(const Phi4Problem& p) {
  BigInt out = 1;
  const std::size_t n = p.dimension();
  for (std::size_t i = 0; i < n; ++i) out *= 3;
  return out;
}

SolutionSet phi4_enumerate_decoupled(const Phi4Problem& p, std::uint64_t cap) {
  if (p.params().J != 0.0) throw std::invalid_argument("phi4_enumerate_decoupled requires J = 0");
  if (!(p.params().mu2 > 0.0)) throw std::invalid_argument("phi4_enumerate_decoupled requires mu2 > 0");
  const BigInt total = phi4_bezout(p);
  if (total > cap) throw std::invalid_argument("phi4_enumerate_decoupled: 3^(N^2) exceeds enumeration cap");

  const double r = p.uniform_root();
  const std::array<double, 3> roots = {-r, 0.0, r};
  const std::size_t n = p.dimension();
  const auto count = static_cast<std::uint64_t>(total);

  std::vector<StationaryPoint> pts;
  pts.reserve(count);
  for (std::uint64_t code = 0; code < count; ++code) {
    Vec x(n);
    std::uint64_t c = code;
    for (std::size_t i = 0; i < n; ++i, c /= 3) x[i] = roots[c % 3];
    StationaryPoint sp = classify(p, x);
    sp.provenance = {SolverKind::Enumeration, 0, static_cast<std::int64_t>(code)};
    pts.push_back(std::move(sp));
  }
  return dedup(std::move(pts), 1e-6, DedupMetric::Euclidean, p.label());
}

// ---------------------------------------------------------------------------
// XY

std::string describe(const CouplingDistribution& d) {
  std::ostringstream os;
  os.precision(17);
  if (const auto* c = std::get_if<ConstantCoupling>(&d)) {
    os << "constant:" << c->value;
  } else if (std::holds_alternative<UniformSignedCoupling>(d)) {
    os << "uniform-signed";
  } else {
    const auto& u = std::get<UniformCoupling>(d);
    os << "uniform:" << u.lo << ':' << u.hi;
  }
  return os.str();
}

CouplingDistribution parse_distribution(std::string_view text) {
  const std::string s(text);
  if (s == "uniform-signed") return UniformSignedCoupling{};
  if (s.rfind("constant", 0) == 0) {
    if (s == "constant") return ConstantCoupling{1.0};
    if (s.size() > 9 && s[8] == ':') return ConstantCoupling{std::stod(s.substr(9))};
  }
  if (s.rfind("uniform:", 0) == 0) {
    const auto rest = s.substr(8);
    const auto colon = rest.find(':');
    if (colon != std::string::npos) {
      UniformCoupling u{std::stod(rest.substr(0, colon)), std::stod(rest.substr(colon + 1))};
      if (!(u.lo < u.hi)) throw std::invalid_argument("uniform disorder requires lo < hi");
      return u;
    }
  }
  throw std::invalid_argument("unknown disorder distribution: " + s);
}

namespace {

std::vector<double> draw_couplings(const CouplingDistribution& dist, std::uint64_t seed, std::size_t count) {
  Rng rng(seed, 0);
  std::vector<double> out(count);
  for (auto& j : out) {
    if (const auto* c = std::get_if<ConstantCoupling>(&dist)) {
      j = c->value;
    } else if (std::holds_alternative<UniformSignedCoupling>(dist)) {
      j = rng.uniform() < 0.5 ? -1.0 : 1.0;
    } else {
      const auto& u = std::get<UniformCoupling>(dist);
      j = rng.uniform(u.lo, u.hi);
    }
  }
  return out;
}

std::string default_xy_label(const XYProblem::Params& p) {
  std::ostringstream os;
  os << "xy-d" << p.d << "-L" << p.L << (p.bc == Boundary::Periodic ? "-pbc" : "-apbc") << "-"
     << describe(p.distribution) << "-s" << p.seed;
  return os.str();
}

std::size_t site_count(const XYProblem::Params& p) {
  if (p.d < 1 || p.d > 3) throw std::invalid_argument("xy: lattice dimension must be 1, 2 or 3");
  if (p.L < 2) throw std::invalid_argument("xy: side length L must be >= 2");
  std::size_t n = 1;
  for (int k = 0; k < p.d; ++k) n *= static_cast<std::size_t>(p.L);
  return n;
}

}  // namespace

XYProblem::XYProblem(Params p, std::string label)
    : XYProblem(p, draw_couplings(p.distribution, p.seed, site_count(p) * static_cast<std::size_t>(p.d)),
                std::move(label)) {}

XYProblem::XYProblem(Params p, std::vector<double> couplings, std::string label)
    : p_(std::move(p)), label_(std::move(label)) {
  sites_ = site_count(p_);
  if (couplings.size() != sites_ * static_cast<std::size_t>(p_.d)) {
    throw std::invalid_argument("xy: expected one coupling per (site, axis) bond");
  }
  if (label_.empty()) label_ = default_xy_label(p_);
  build_edges(couplings);
}

void XYProblem::build_edges(const std::vector<double>& couplings) {
  const auto L = static_cast<std::size_t>(p_.L);
  edges_.clear();
  edges_.reserve(couplings.size());
  std::size_t k = 0;
  for (std::size_t s = 0; s < sites_; ++s) {
    std::size_t stride = 1;
    for (int axis = 0; axis < p_.d; ++axis, stride *= L) {
      const std::size_t coord = (s / stride) % L;
      const bool wraps = coord == L - 1;
      const std::size_t b = wraps ? s - coord * stride : s + stride;
      edges_.push_back({s, b, couplings[k++], wraps});
    }
  }
}

std::vector<double> XYProblem::couplings() const {
  std::vector<double> out;
  out.reserve(edges_.size());
  for (const auto& e : edges_) out.push_back(e.J);
  return out;
}

double XYProblem::effective(const XYEdge& e) const {
  return (p_.bc == Boundary::AntiPeriodic && e.wraps) ? -e.J : e.J;
}

std::ptrdiff_t XYProblem::var(std::size_t site) const {
  if (!pins_origin()) return static_cast<std::ptrdiff_t>(site);
  return static_cast<std::ptrdiff_t>(site) - 1;
}

Vec XYProblem::angles(const Vec& x) const {
  check_dimension(x);
  if (!pins_origin()) return x;
  Vec th(sites_);
  th[0] = 0.0;
  th.tail(sites_ - 1) = x;
  return th;
}

double XYProblem::energy(const Vec& x) const {
  const Vec th = angles(x);
  require_finite(th);
  double h = 0.0;
  for (const auto& e : edges_) h += 1.0 - effective(e) * std::cos(th[e.a] - th[e.b]);
  return h;
}

Vec XYProblem::gradient(const Vec& x) const {
  const Vec th = angles(x);
  require_finite(th);
  Vec g = Vec::Zero(x.size());
  for (const auto& e : edges_) {
    const double s = effective(e) * std::sin(th[e.a] - th[e.b]);
    if (const auto ia = var(e.a); ia >= 0) g[ia] += s;
    if (const auto ib = var(e.b); ib >= 0) g[ib] -= s;
  }
  return g;
}

Mat XYProblem::hessian(const Vec& x) const {
  const Vec th = angles(x);
  require_finite(th);
  const auto n = static_cast<Eigen::Index>(x.size());
  Mat h = Mat::Zero(n, n);
  for (const auto& e : edges_) {
    const double c = effective(e) * std::cos(th[e.a] - th[e.b]);
    const auto ia = var(e.a);
    const auto ib = var(e.b);
    if (ia >= 0) h(ia, ia) += c;
    if (ib >= 0) h(ib, ib) += c;
    if (ia >= 0 && ib >= 0) {
      h(ia, ib) -= c;
      h(ib, ia) -= c;
    }
  }
  return h;
}

Vec XYProblem::sample_start(Rng& rng) const {
  Vec x(dimension());
  // (-pi, pi]
  for (auto& v : x) v = std::numbers::pi - 2.0 * std::numbers::pi * rng.uniform();
  return x;
}

XYProblem xy_new(int d, int L, Boundary bc, CouplingDistribution dist, std::uint64_t seed, bool gauge_fixed) {
  return XYProblem({d, L, bc, gauge_fixed, seed, std::move(dist)});
}

}  // namespace spbench
