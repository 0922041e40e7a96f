#pragma once

#include "spbench/clusters.hpp"
#include "spbench/games.hpp"
#include "spbench/lattice.hpp"
#include "spbench/puzzles.hpp"

#include <memory>
#include <vector>

namespace spbench::testing {

// One small instance per family, for the properties that must hold everywhere.
inline std::vector<ProblemPtr> family_zoo() {
  std::vector<ProblemPtr> zoo;
  zoo.push_back(std::make_shared<Phi4Problem>(Phi4Problem::Params{3, 0.6, 2.0, 0.5}));
  zoo.push_back(std::make_shared<XYProblem>(xy_new(2, 3, Boundary::Periodic, UniformSignedCoupling{}, 7, true)));
  zoo.push_back(std::make_shared<XYProblem>(xy_new(1, 5, Boundary::AntiPeriodic, UniformCoupling{-1, 2}, 3, false)));
  zoo.push_back(std::make_shared<ThomsonProblem>(6));
  zoo.push_back(std::make_shared<ClusterProblem>(5, LennardJones{}));
  zoo.push_back(std::make_shared<ClusterProblem>(4, Morse{1.0, 1.0, 6.0}));
  zoo.push_back(std::make_shared<NashProblem>(random_game({2, 3}, 5)));
  zoo.push_back(std::make_shared<NashProblem>(random_game({2, 2, 2}, 9)));
  auto grid = generate_grid_puzzle(2, 2, 3, 4);
  zoo.push_back(std::make_shared<PuzzleProblem>(grid.puzzle));
  zoo.push_back(std::make_shared<PuzzleProblem>(grid.puzzle, PuzzleEncoding::Exponential, default_k_set()));
  return zoo;
}

inline double rel_error(const Vec& a, const Vec& b) { return (a - b).norm() / (1.0 + a.norm()); }

}  // namespace spbench::testing
