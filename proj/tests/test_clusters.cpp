#include "spbench/clusters.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace spbench;

namespace {

constexpr double kPi = std::numbers::pi;

// Brute-force Coulomb energy of an embedding, independent of the parameterization.
double coulomb(const std::vector<Vec3>& pos) {
  double e = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    for (std::size_t j = i + 1; j < pos.size(); ++j) e += 1.0 / (pos[i] - pos[j]).norm();
  }
  return e;
}

}  // namespace

TEST_SUITE("clusters") {

TEST_CASE("thomson closed forms") {
  ThomsonProblem two(2);
  Vec x2(1);
  x2 << kPi;
  CHECK(two.energy(x2) == doctest::Approx(0.5).epsilon(1e-14));

  ThomsonProblem three(3);
  Vec x3(3);
  x3 << 2.0 * kPi / 3.0, 2.0 * kPi / 3.0, kPi;
  CHECK(three.energy(x3) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
  CHECK(three.gradient(x3).norm() <= 1e-12);

  ThomsonProblem four(4);
  const double t = std::acos(-1.0 / 3.0);
  Vec x4(5);
  x4 << t, t, 2.0 * kPi / 3.0, t, -2.0 * kPi / 3.0;
  CHECK(four.energy(x4) == doctest::Approx(6.0 / std::sqrt(8.0 / 3.0)).epsilon(1e-14));
  CHECK(four.gradient(x4).norm() <= 1e-12);
  CHECK(classify(four, x4).index == 0);
}

TEST_CASE("thomson embedding stays on the sphere") {
  ThomsonProblem p(7);
  CHECK(p.dimension() == 11);
  Rng rng(3, 0);
  for (int i = 0; i < 20; ++i) {
    Vec x = p.sample_start(rng);
    auto pos = p.embed(x);
    REQUIRE(pos.size() == 7);
    CHECK(pos[0].isApprox(Vec3(0, 0, 1)));
    CHECK(pos[1].y() == 0.0);
    for (const auto& r : pos) CHECK(r.norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p.energy(x) == doctest::Approx(coulomb(pos)).epsilon(1e-13));
  }
}

TEST_CASE("thomson starts avoid the poles") {
  ThomsonProblem p(5);
  Rng rng(8, 1);
  for (int i = 0; i < 200; ++i) {
    Vec x = p.sample_start(rng);
    CHECK(x[0] >= 0.1);
    CHECK(x[0] <= kPi - 0.1);
    for (int e = 0; e < 3; ++e) {
      CHECK(x[1 + 2 * e] >= 0.1);
      CHECK(x[1 + 2 * e] <= kPi - 0.1);
      CHECK(std::abs(x[2 + 2 * e]) <= kPi);
    }
  }
}

TEST_CASE("thomson mirror reflection preserves energy") {
  ThomsonProblem p(6);
  for (std::uint64_t i = 0; i < 50; ++i) {
    Rng rng(12, i);
    Vec x = p.sample_start(rng);
    Vec mirrored = x;
    for (Eigen::Index k = 2; k < x.size(); k += 2) mirrored[k] = -x[k];
    CHECK(p.energy(mirrored) == doctest::Approx(p.energy(x)).epsilon(1e-12));
  }
}

TEST_CASE("thomson coincident electrons raise") {
  ThomsonProblem p(3);
  Vec x(3);
  x << 1.0, 1.0, 0.0;  // electrons 2 and 3 coincide
  CHECK_THROWS_AS(p.energy(x), EvalError);
  CHECK_THROWS_AS(p.gradient(x), EvalError);
}

TEST_CASE("pair potentials in closed form") {
  LennardJones lj;
  Morse morse;
  CHECK(pair_minimum(lj) == doctest::Approx(std::pow(2.0, 1.0 / 6.0)).epsilon(1e-15));
  CHECK(pair_energy(lj, pair_minimum(lj)) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(pair_energy(lj, 1.0) == 0.0);
  CHECK(std::abs(pair_derivative(lj, pair_minimum(lj))) <= 1e-12);
  CHECK(pair_energy(morse, 1.0) == -1.0);
  CHECK(pair_derivative(morse, 1.0) == 0.0);

  CHECK(pair_curvature(lj) == 72.0);
  CHECK(pair_curvature(morse) == 72.0);
  CHECK(pair_curvature(Morse{1.0, 1.0, 3.0}) == 18.0);

  // Numerical curvature as an independent check of the closed forms.
  auto numeric = [](const PairKind& k) {
    const double r = pair_minimum(k), h = 1e-5;
    return r * r * (pair_derivative(k, r + h) - pair_derivative(k, r - h)) / (2.0 * h);
  };
  CHECK(numeric(lj) == doctest::Approx(72.0).epsilon(1e-8));
  CHECK(numeric(morse) == doctest::Approx(72.0).epsilon(1e-8));
  CHECK(numeric(PairKind{Morse{2.0, 1.5, 4.0}}) / 2.0 == doctest::Approx(32.0).epsilon(1e-8));
}

TEST_CASE("cluster dimers") {
  ClusterProblem lj(2, LennardJones{});
  REQUIRE(lj.dimension() == 1);
  Vec r(1);
  r << std::pow(2.0, 1.0 / 6.0);
  CHECK(lj.energy(r) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(lj.gradient(r).norm() <= 1e-10);
  r << 1.0;
  CHECK(lj.energy(r) == 0.0);
  r << -1.0;  // signed separation
  CHECK(lj.energy(r) == 0.0);

  ClusterProblem morse(2, Morse{});
  r << 1.0;
  CHECK(morse.energy(r) == -1.0);
  r << 0.0;
  CHECK_THROWS_AS(morse.energy(r), EvalError);
}

TEST_CASE("cluster dimensions and labels") {
  CHECK(ClusterProblem(3, Morse{}).dimension() == 3);
  CHECK(ClusterProblem(13, LennardJones{}).dimension() == 33);
  CHECK(ClusterProblem(4, LennardJones{}).family() == Family::LJ);
  CHECK(ClusterProblem(4, Morse{}).family() == Family::Morse);
  CHECK_THROWS(ClusterProblem(1, LennardJones{}));
}

TEST_CASE("cluster energy matches a brute-force pair sum") {
  ClusterProblem p(6, LennardJones{});
  Rng rng(21, 0);
  for (int i = 0; i < 20; ++i) {
    Vec x = p.sample_start(rng);
    auto pos = p.embed(x);
    CHECK(pos[0].norm() == 0.0);
    CHECK(pos[1].y() == 0.0);
    CHECK(pos[1].z() == 0.0);
    CHECK(pos[2].z() == 0.0);
    double e = 0.0, dmin = 1e9;
    for (std::size_t a = 0; a < pos.size(); ++a) {
      for (std::size_t b = a + 1; b < pos.size(); ++b) {
        const double d = (pos[a] - pos[b]).norm();
        dmin = std::min(dmin, d);
        e += 4.0 * (std::pow(d, -12) - std::pow(d, -6));
      }
    }
    CHECK(dmin >= 0.5);
    CHECK(p.energy(x) == doctest::Approx(e).epsilon(1e-12));
  }
}

TEST_CASE("LJ energy is linear in epsilon") {
  ClusterProblem one(5, LennardJones{1.0, 1.0});
  ClusterProblem two(5, LennardJones{2.0, 1.0});
  for (std::uint64_t i = 0; i < 30; ++i) {
    Rng rng(2, i);
    Vec x = one.sample_start(rng);
    CHECK(two.energy(x) == doctest::Approx(2.0 * one.energy(x)).epsilon(1e-14));
    CHECK((two.gradient(x) - 2.0 * one.gradient(x)).norm() <= 1e-12 * (1.0 + two.gradient(x).norm()));
  }
}

}  // TEST_SUITE
