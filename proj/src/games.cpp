#include "spbench/games.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace spbench {

NashGame::NashGame(std::vector<int> strategy_counts, std::vector<std::vector<double>> payoffs)
    : counts_(std::move(strategy_counts)), payoffs_(std::move(payoffs)) {
  if (counts_.size() < 2) throw std::invalid_argument("nash: need at least 2 players");
  for (int d : counts_) {
    if (d < 1) throw std::invalid_argument("nash: every player needs at least one strategy");
    profiles_ *= static_cast<std::size_t>(d);
    if (profiles_ > kMaxPureProfiles) throw std::invalid_argument("nash: game exceeds 10^4 pure profiles");
  }
  if (payoffs_.size() != counts_.size()) throw std::invalid_argument("nash: need one payoff tensor per player");
  for (const auto& t : payoffs_) {
    if (t.size() != profiles_) throw std::invalid_argument("nash: payoff tensor has wrong number of entries");
  }
  strides_.assign(counts_.size(), 1);
  for (std::size_t m = counts_.size() - 1; m-- > 0;) strides_[m] = strides_[m + 1] * static_cast<std::size_t>(counts_[m + 1]);
  std::size_t off = 0;
  for (int d : counts_) {
    offsets_.push_back(off);
    off += static_cast<std::size_t>(d);
  }
}

double NashGame::payoff(int player, const std::vector<int>& pure) const {
  if (pure.size() != counts_.size()) throw std::invalid_argument("nash: pure profile has wrong length");
  std::size_t idx = 0;
  for (std::size_t m = 0; m < pure.size(); ++m) {
    if (pure[m] < 0 || pure[m] >= counts_[m]) throw std::invalid_argument("nash: strategy index out of range");
    idx += static_cast<std::size_t>(pure[m]) * strides_[m];
  }
  return payoff_tensor(player)[idx];
}

std::size_t NashGame::system_size() const { return offsets_.back() + static_cast<std::size_t>(counts_.back()) + counts_.size(); }

double NashGame::contract(int player, const std::vector<Vec>& probs, const std::vector<int>& fixed) const {
  const std::size_t n = counts_.size();
  const auto& tensor = payoff_tensor(player);
  std::vector<int> idx(n, 0);
  double total = 0.0;
  for (std::size_t flat = 0; flat < profiles_; ++flat) {
    // idx is the mixed-radix decomposition of flat (last player fastest).
    double w = tensor[flat];
    for (std::size_t m = 0; m < n && w != 0.0; ++m) {
      if (fixed[m] >= 0) {
        if (idx[m] != fixed[m]) w = 0.0;
      } else {
        w *= probs[m][idx[m]];
      }
    }
    total += w;
    for (std::size_t m = n; m-- > 0;) {
      if (++idx[m] < counts_[m]) break;
      idx[m] = 0;
    }
  }
  return total;
}

StrategyProfile StrategyProfile::from_flat(const NashGame& game, const Vec& x) {
  if (static_cast<std::size_t>(x.size()) != game.system_size()) {
    throw std::invalid_argument("nash: flat vector has wrong length");
  }
  StrategyProfile p;
  for (int i = 0; i < game.players(); ++i) {
    p.probs.push_back(x.segment(static_cast<Eigen::Index>(game.block_offset(i)), game.strategies(i)));
  }
  p.payoffs = x.tail(game.players());
  return p;
}

Vec StrategyProfile::flat() const {
  Eigen::Index size = payoffs.size();
  for (const auto& b : probs) size += b.size();
  Vec x(size);
  Eigen::Index off = 0;
  for (const auto& b : probs) {
    x.segment(off, b.size()) = b;
    off += b.size();
  }
  x.tail(payoffs.size()) = payoffs;
  return x;
}

void check_profile(const NashGame& game, const StrategyProfile& profile) {
  if (profile.probs.size() != static_cast<std::size_t>(game.players()) ||
      profile.payoffs.size() != game.players()) {
    throw std::invalid_argument("nash: profile has wrong number of players");
  }
  for (int i = 0; i < game.players(); ++i) {
    if (profile.probs[static_cast<std::size_t>(i)].size() != game.strategies(i)) {
      throw std::invalid_argument("nash: probability block " + std::to_string(i) + " has wrong length");
    }
  }
}

double expected_payoff(const NashGame& game, const StrategyProfile& profile, int player) {
  check_profile(game, profile);
  if (player < 0 || player >= game.players()) throw std::invalid_argument("nash: player out of range");
  return game.contract(player, profile.probs, std::vector<int>(static_cast<std::size_t>(game.players()), -1));
}

double deviation_payoff(const NashGame& game, const StrategyProfile& profile, int player, int k) {
  std::vector<int> fixed(static_cast<std::size_t>(game.players()), -1);
  fixed[static_cast<std::size_t>(player)] = k;
  return game.contract(player, profile.probs, fixed);
}

Vec nash_residual(const NashGame& game, const StrategyProfile& profile) {
  check_profile(game, profile);
  Vec r(static_cast<Eigen::Index>(game.system_size()));
  Eigen::Index row = 0;
  for (int i = 0; i < game.players(); ++i) {
    const Vec& p = profile.probs[static_cast<std::size_t>(i)];
    for (int k = 0; k < game.strategies(i); ++k) {
      // An exact zero probability yields an exact zero residual.
      r[row++] = p[k] == 0.0 ? 0.0 : p[k] * (profile.payoffs[i] - deviation_payoff(game, profile, i, k));
    }
  }
  for (int i = 0; i < game.players(); ++i) r[row++] = profile.probs[static_cast<std::size_t>(i)].sum() - 1.0;
  return r;
}

EquilibriumReport is_equilibrium(const NashGame& game, const StrategyProfile& profile, double tol) {
  EquilibriumReport rep;
  const Vec r = nash_residual(game, profile);
  rep.max_residual = r.cwiseAbs().maxCoeff();
  auto flag = [&](const std::string& msg) { rep.violations.push_back(msg); };

  std::ostringstream os;
  if (rep.max_residual > tol) {
    os << "residual " << rep.max_residual << " exceeds tolerance";
    flag(os.str());
  }
  for (int i = 0; i < game.players(); ++i) {
    const Vec& p = profile.probs[static_cast<std::size_t>(i)];
    for (int k = 0; k < game.strategies(i); ++k) {
      if (p[k] < -tol) flag("player " + std::to_string(i) + " strategy " + std::to_string(k) + ": negative probability");
      const double gap = profile.payoffs[i] - deviation_payoff(game, profile, i, k);
      if (gap < -tol) {
        std::ostringstream g;
        g << "player " << i << " strategy " << k << ": negative parenthesis " << gap << " (profitable deviation)";
        flag(g.str());
      }
    }
    if (std::abs(p.sum() - 1.0) > tol) flag("player " + std::to_string(i) + ": probabilities do not sum to 1");
  }
  rep.equilibrium = rep.violations.empty();
  return rep;
}

NashGame matching_pennies() { return NashGame({2, 2}, {{1, -1, -1, 1}, {-1, 1, 1, -1}}); }

NashGame prisoners_dilemma() {
  // X2 = transpose(X1).
  return NashGame({2, 2}, {{-1, -3, 0, -2}, {-1, 0, -3, -2}});
}

NashGame random_game(std::vector<int> strategy_counts, std::uint64_t seed) {
  std::size_t profiles = 1;
  for (int d : strategy_counts) profiles *= static_cast<std::size_t>(std::max(d, 1));
  Rng rng(seed, 0);
  std::vector<std::vector<double>> payoffs(strategy_counts.size(), std::vector<double>(profiles));
  for (auto& t : payoffs) {
    for (auto& v : t) v = rng.uniform(-1.0, 1.0);
  }
  return NashGame(std::move(strategy_counts), std::move(payoffs));
}

// ---------------------------------------------------------------------------

NashProblem::NashProblem(NashGame game, std::string label) : game_(std::move(game)), label_(std::move(label)) {}

Vec NashProblem::residual(const Vec& x) const {
  check_dimension(x);
  if (!x.allFinite()) throw EvalError("non-finite input coordinates");
  return nash_residual(game_, StrategyProfile::from_flat(game_, x));
}

Mat NashProblem::jacobian(const Vec& x) const {
  check_dimension(x);
  if (!x.allFinite()) throw EvalError("non-finite input coordinates");
  const auto prof = StrategyProfile::from_flat(game_, x);
  const int n = game_.players();
  const auto size = static_cast<Eigen::Index>(game_.system_size());
  const Eigen::Index pi_off = size - n;
  Mat jac = Mat::Zero(size, size);

  std::vector<int> fixed(static_cast<std::size_t>(n), -1);
  Eigen::Index row = 0;
  for (int i = 0; i < n; ++i) {
    const Vec& p = prof.probs[static_cast<std::size_t>(i)];
    const auto col_i = static_cast<Eigen::Index>(game_.block_offset(i));
    for (int k = 0; k < game_.strategies(i); ++k, ++row) {
      fixed[static_cast<std::size_t>(i)] = k;
      jac(row, pi_off + i) = p[k];
      jac(row, col_i + k) = prof.payoffs[i] - game_.contract(i, prof.probs, fixed);
      for (int m = 0; m < n; ++m) {
        if (m == i) continue;
        const auto col_m = static_cast<Eigen::Index>(game_.block_offset(m));
        for (int l = 0; l < game_.strategies(m); ++l) {
          fixed[static_cast<std::size_t>(m)] = l;
          jac(row, col_m + l) = -p[k] * game_.contract(i, prof.probs, fixed);
        }
        fixed[static_cast<std::size_t>(m)] = -1;
      }
      fixed[static_cast<std::size_t>(i)] = -1;
    }
  }
  for (int i = 0; i < n; ++i, ++row) {
    jac.block(row, static_cast<Eigen::Index>(game_.block_offset(i)), 1, game_.strategies(i)).setOnes();
  }
  return jac;
}

double NashProblem::energy(const Vec& x) const { return residual(x).squaredNorm(); }

Vec NashProblem::gradient(const Vec& x) const { return 2.0 * jacobian(x).transpose() * residual(x); }

Vec NashProblem::sample_start(Rng& rng) const {
  Vec x(static_cast<Eigen::Index>(game_.system_size()));
  for (int i = 0; i < game_.players(); ++i) {
    auto block = x.segment(static_cast<Eigen::Index>(game_.block_offset(i)), game_.strategies(i));
    for (auto& v : block) v = rng.exponential();
    block /= block.sum();
  }
  for (int i = 0; i < game_.players(); ++i) {
    const auto& t = game_.payoff_tensor(i);
    const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
    x[x.size() - game_.players() + i] = rng.uniform(*lo, *hi);
  }
  return x;
}

std::optional<bool> NashProblem::feasible(const Vec& x, double tol) const {
  return is_equilibrium(game_, StrategyProfile::from_flat(game_, x), tol).equilibrium;
}

}  // namespace spbench
