#pragma once

#include "spbench/core.hpp"

namespace spbench {

/// Upper bound on the number of pure profiles (product of strategy counts).
inline constexpr std::size_t kMaxPureProfiles = 10000;

/// n-player normal-form game. Payoff tensor i is stored flat in row-major
/// order over (j_1, ..., j_n), j_1 most significant.
class NashGame {
 public:
  NashGame(std::vector<int> strategy_counts, std::vector<std::vector<double>> payoffs);

  int players() const { return static_cast<int>(counts_.size()); }
  const std::vector<int>& strategy_counts() const { return counts_; }
  int strategies(int player) const { return counts_[static_cast<std::size_t>(player)]; }
  const std::vector<double>& payoff_tensor(int player) const { return payoffs_[static_cast<std::size_t>(player)]; }
  std::size_t profiles() const { return profiles_; }

  double payoff(int player, const std::vector<int>& pure) const;
  /// Length of the flat (p, pi) vector: sum d_i + n.
  std::size_t system_size() const;
  /// Offset of player i's probability block in the flat vector.
  std::size_t block_offset(int player) const { return offsets_[static_cast<std::size_t>(player)]; }

  /// Multilinear contraction of tensor `player` against `probs`, with any
  /// player m for which fixed[m] >= 0 replaced by the pure strategy fixed[m].
  double contract(int player, const std::vector<Vec>& probs, const std::vector<int>& fixed) const;

 private:
  std::vector<int> counts_;
  std::vector<std::vector<double>> payoffs_;
  std::vector<std::size_t> strides_;
  std::vector<std::size_t> offsets_;
  std::size_t profiles_ = 1;
};

struct StrategyProfile {
  std::vector<Vec> probs;
  Vec payoffs;

  static StrategyProfile from_flat(const NashGame& game, const Vec& x);
  Vec flat() const;
};

void check_profile(const NashGame& game, const StrategyProfile& profile);

double expected_payoff(const NashGame& game, const StrategyProfile& profile, int player);

/// Payoff to `player` for pure strategy k against the others' mixed strategies.
double deviation_payoff(const NashGame& game, const StrategyProfile& profile, int player, int k);

/// Sum d_i multilinear residuals p_k^(i) (pi_i - deviation payoff), in player
/// then strategy order, followed by n simplex residuals sum_j p_j^(i) - 1.
Vec nash_residual(const NashGame& game, const StrategyProfile& profile);

struct EquilibriumReport {
  bool equilibrium = false;
  double max_residual = 0.0;
  std::vector<std::string> violations;
};

EquilibriumReport is_equilibrium(const NashGame& game, const StrategyProfile& profile, double tol);

NashGame matching_pennies();
NashGame prisoners_dilemma();
/// Payoffs i.i.d. uniform in [-1, 1].
NashGame random_game(std::vector<int> strategy_counts, std::uint64_t seed);

/// The square equilibrium system (complementarity products plus simplex sums)
/// over the flat vector [p^(1), ..., p^(n), pi].
class NashProblem final : public Problem {
 public:
  explicit NashProblem(NashGame game, std::string label = "nash");

  const NashGame& game() const { return game_; }

  Family family() const override { return Family::Nash; }
  std::size_t dimension() const override { return game_.system_size(); }
  std::string label() const override { return label_; }

  double energy(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  bool gradient_system() const override { return false; }
  Vec residual(const Vec& x) const override;
  Mat jacobian(const Vec& x) const override;

  /// Dirichlet(1) samples per block, pi_i uniform over player i's payoff range.
  Vec sample_start(Rng& rng) const override;
  std::optional<bool> feasible(const Vec& x, double tol) const override;

 private:
  NashGame game_;
  std::string label_;
};

}  // namespace spbench
