#include "spbench/puzzles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace spbench {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool class_less(const EdgeClass& a, const EdgeClass& b) {
  if (a.color != b.color) return a.color < b.color;
  return a.theta < b.theta - kAngleTol;
}

}  // namespace

double canonical_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi - kAngleTol) t = 0.0;
  return t;
}

bool same_angle(double a, double b) {
  const double d = std::abs(canonical_angle(a) - canonical_angle(b));
  return std::min(d, kTwoPi - d) <= kAngleTol;
}

// ---------------------------------------------------------------------------

Puzzle::Puzzle(PieceDesc frame, std::vector<PieceDesc> pieces, std::vector<std::string> colors)
    : frame_(std::move(frame)), pieces_(std::move(pieces)), colors_(std::move(colors)) {
  auto check = [&](EdgeDesc& e) {
    if (!e.b.allFinite() || !std::isfinite(e.theta)) throw std::invalid_argument("puzzle: non-finite edge data");
    if (e.color < 0 || static_cast<std::size_t>(e.color) >= colors_.size()) {
      throw std::invalid_argument("puzzle: edge color out of range");
    }
    e.theta = canonical_angle(e.theta);
  };
  for (auto& e : frame_.edges) check(e);
  for (auto& p : pieces_) {
    for (auto& e : p.edges) check(e);
  }
  for_each_edge([&](std::size_t, const EdgeDesc& e) {
    const EdgeClass c{e.color, e.theta};
    const bool known = std::any_of(classes_.begin(), classes_.end(), [&](const EdgeClass& k) {
      return k.color == c.color && same_angle(k.theta, c.theta);
    });
    if (!known) classes_.push_back(c);
  });
  std::sort(classes_.begin(), classes_.end(), class_less);
}

bool Puzzle::balanced() const {
  for (const auto& c : classes_) {
    int plus = 0;
    int minus = 0;
    for_each_edge([&](std::size_t, const EdgeDesc& e) {
      const int s = signed_indicator(e, c.color, c.theta);
      plus += s > 0;
      minus += s < 0;
    });
    if (plus != minus) return false;
  }
  return true;
}

Placement Placement::from_flat(const Vec& x) {
  if (x.size() % 2 != 0) throw std::invalid_argument("placement: flat vector must have even length");
  Placement p;
  for (Eigen::Index i = 0; i < x.size(); i += 2) p.translations.emplace_back(x[i], x[i + 1]);
  return p;
}

Vec Placement::flat() const {
  Vec x(2 * static_cast<Eigen::Index>(translations.size()));
  for (std::size_t i = 0; i < translations.size(); ++i) x.segment<2>(2 * static_cast<Eigen::Index>(i)) = translations[i];
  return x;
}

int signed_indicator(const EdgeDesc& edge, int color, double theta) {
  if (edge.color != color) return 0;
  if (same_angle(edge.theta, theta)) return 1;
  if (same_angle(edge.theta, theta + std::numbers::pi)) return -1;
  return 0;
}

namespace {

void check_placement(const Puzzle& puzzle, const Placement& placement) {
  if (placement.translations.size() != puzzle.piece_count()) {
    throw std::invalid_argument("placement has " + std::to_string(placement.translations.size()) +
                                " translations, puzzle has " + std::to_string(puzzle.piece_count()) + " pieces");
  }
}

Vec2 translation_of(const Placement& placement, std::size_t piece) {
  return piece == 0 ? Vec2::Zero() : placement.translations[piece - 1];
}

}  // namespace

Vec linear_residual(const Puzzle& puzzle, const Placement& placement) {
  check_placement(puzzle, placement);
  const auto& classes = puzzle.classes();
  Vec r = Vec::Zero(2 * static_cast<Eigen::Index>(classes.size()));
  for (std::size_t c = 0; c < classes.size(); ++c) {
    Vec2 sum = Vec2::Zero();
    puzzle.for_each_edge([&](std::size_t piece, const EdgeDesc& e) {
      if (const int s = signed_indicator(e, classes[c].color, classes[c].theta)) {
        sum += s * (translation_of(placement, piece) + e.b);
      }
    });
    r.segment<2>(2 * static_cast<Eigen::Index>(c)) = sum;
  }
  return r;
}

std::vector<Vec2> default_k_set() {
  std::vector<Vec2> ks;
  for (int a = -2; a <= 2; ++a) {
    for (int b = -2; b <= 2; ++b) {
      if (a != 0 || b != 0) ks.emplace_back(a, b);
    }
  }
  return ks;
}

Vec exponential_residual(const Puzzle& puzzle, const Placement& placement, const std::vector<Vec2>& k_set) {
  check_placement(puzzle, placement);
  if (k_set.empty()) throw std::invalid_argument("exponential_residual: empty k set");
  for (const auto& k : k_set) {
    if (!k.allFinite()) throw std::invalid_argument("exponential_residual: non-finite k");
  }
  const auto& classes = puzzle.classes();
  Vec r = Vec::Zero(static_cast<Eigen::Index>(classes.size() * k_set.size()));
  std::vector<std::pair<int, double>> terms;
  Eigen::Index row = 0;
  for (const auto& cls : classes) {
    for (const auto& k : k_set) {
      terms.clear();
      puzzle.for_each_edge([&](std::size_t piece, const EdgeDesc& e) {
        if (const int s = signed_indicator(e, cls.color, cls.theta)) {
          terms.emplace_back(s, k.dot(translation_of(placement, piece) + e.b));
        }
      });
      double value = 0.0;
      if (!terms.empty()) {
        double shift = terms.front().second;
        for (const auto& t : terms) shift = std::max(shift, t.second);
        for (const auto& [s, a] : terms) value += s * std::exp(a - shift);
      }
      if (!std::isfinite(value)) throw EvalError("exponential_residual: exponent overflow");
      r[row++] = value;
    }
  }
  return r;
}

Vec2 exp_translation(const Vec2& t) { return t.array().exp().matrix(); }

double exp_moment(const Vec2& T, const Vec2& k) { return std::pow(T.x(), k.x()) * std::pow(T.y(), k.y()); }

bool verify_geometric(const Puzzle& puzzle, const Placement& placement, double tol) {
  check_placement(puzzle, placement);
  struct Placed {
    Vec2 pos;
    int color;
    double theta;
  };
  std::vector<Placed> all;
  puzzle.for_each_edge([&](std::size_t piece, const EdgeDesc& e) {
    all.push_back({translation_of(placement, piece) + e.b, e.color, e.theta});
  });
  for (std::size_t i = 0; i < all.size(); ++i) {
    int partners = 0;
    for (std::size_t j = 0; j < all.size(); ++j) {
      if (i == j) continue;
      if (all[j].color == all[i].color && same_angle(all[j].theta, all[i].theta + std::numbers::pi) &&
          (all[j].pos - all[i].pos).norm() <= tol) {
        ++partners;
      }
    }
    if (partners != 1) return false;
  }
  return true;
}

GridPuzzle generate_grid_puzzle(int rows, int cols, int palette, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("puzzle grid must be at least 1x1");
  if (palette < 1) throw std::invalid_argument("puzzle palette must have at least one color");
  constexpr double pi = std::numbers::pi;
  Rng rng(seed, 0);

  std::vector<std::string> colors = {"frame"};
  for (int c = 1; c <= palette; ++c) colors.push_back("c" + std::to_string(c));
  auto draw = [&] { return 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(palette)); };

  // Colors of vertical interior edges (between (x, y) and (x + 1, y)) and
  // horizontal interior edges (between (x, y) and (x, y + 1)).
  std::vector<int> vcol(static_cast<std::size_t>(rows * cols), 0);
  std::vector<int> hcol(static_cast<std::size_t>(rows * cols), 0);
  for (auto& c : vcol) c = draw();
  for (auto& c : hcol) c = draw();
  auto cell = [cols](int x, int y) { return static_cast<std::size_t>(y * cols + x); };

  PieceDesc frame;
  for (int y = 0; y < rows; ++y) {
    frame.edges.push_back({Vec2(0.0, y + 0.5), 0, 0.0});
    frame.edges.push_back({Vec2(cols, y + 0.5), 0, pi});
  }
  for (int x = 0; x < cols; ++x) {
    frame.edges.push_back({Vec2(x + 0.5, 0.0), 0, pi / 2});
    frame.edges.push_back({Vec2(x + 0.5, rows), 0, 3 * pi / 2});
  }

  std::vector<PieceDesc> cells;
  std::vector<Vec2> centers;
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      PieceDesc p;
      p.edges.push_back({Vec2(0.5, 0.0), x + 1 < cols ? vcol[cell(x, y)] : 0, 0.0});
      p.edges.push_back({Vec2(0.0, 0.5), y + 1 < rows ? hcol[cell(x, y)] : 0, pi / 2});
      p.edges.push_back({Vec2(-0.5, 0.0), x > 0 ? vcol[cell(x - 1, y)] : 0, pi});
      p.edges.push_back({Vec2(0.0, -0.5), y > 0 ? hcol[cell(x, y - 1)] : 0, 3 * pi / 2});
      cells.push_back(std::move(p));
      centers.emplace_back(x + 0.5, y + 0.5);
    }
  }

  std::vector<std::size_t> order(cells.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.next_u64() % i]);

  std::vector<PieceDesc> pieces;
  Placement solution;
  for (std::size_t i : order) {
    pieces.push_back(cells[i]);
    solution.translations.push_back(centers[i]);
  }
  return {Puzzle(std::move(frame), std::move(pieces), std::move(colors)), std::move(solution)};
}

// ---------------------------------------------------------------------------

PuzzleProblem::PuzzleProblem(Puzzle puzzle, PuzzleEncoding encoding, std::vector<Vec2> k_set, std::string label)
    : puzzle_(std::move(puzzle)), encoding_(encoding), k_set_(std::move(k_set)), label_(std::move(label)) {
  if (encoding_ == PuzzleEncoding::Exponential && k_set_.empty()) k_set_ = default_k_set();
  lo_ = Vec2::Constant(std::numeric_limits<double>::infinity());
  hi_ = -lo_;
  for (const auto& e : puzzle_.frame().edges) {
    lo_ = lo_.cwiseMin(e.b);
    hi_ = hi_.cwiseMax(e.b);
  }
  if (puzzle_.frame().edges.empty()) {
    lo_ = Vec2::Zero();
    hi_ = Vec2::Ones();
  }
}

std::size_t PuzzleProblem::residual_size() const {
  const std::size_t classes = puzzle_.classes().size();
  return encoding_ == PuzzleEncoding::Linear ? 2 * classes : classes * k_set_.size();
}

Vec PuzzleProblem::residual(const Vec& x) const {
  check_dimension(x);
  if (!x.allFinite()) throw EvalError("non-finite input coordinates");
  const Placement placement = Placement::from_flat(x);
  if (encoding_ == PuzzleEncoding::Linear) return linear_residual(puzzle_, placement);

  Vec r = Vec::Zero(static_cast<Eigen::Index>(residual_size()));
  Eigen::Index row = 0;
  for (const auto& cls : puzzle_.classes()) {
    for (const auto& k : k_set_) {
      double value = 0.0;
      puzzle_.for_each_edge([&](std::size_t piece, const EdgeDesc& e) {
        if (const int s = signed_indicator(e, cls.color, cls.theta)) {
          value += s * std::exp(k.dot(translation_of(placement, piece) + e.b));
        }
      });
      if (!std::isfinite(value)) throw EvalError("puzzle: exponent overflow");
      r[row++] = value;
    }
  }
  return r;
}

Mat PuzzleProblem::jacobian(const Vec& x) const {
  check_dimension(x);
  if (!x.allFinite()) throw EvalError("non-finite input coordinates");
  const Placement placement = Placement::from_flat(x);
  Mat jac = Mat::Zero(static_cast<Eigen::Index>(residual_size()), x.size());
  Eigen::Index row = 0;
  for (const auto& cls : puzzle_.classes()) {
    if (encoding_ == PuzzleEncoding::Linear) {
      puzzle_.for_each_edge([&](std::size_t piece, const EdgeDesc& e) {
        const int s = signed_indicator(e, cls.color, cls.theta);
        if (s == 0 || piece == 0) return;
        const auto col = 2 * static_cast<Eigen::Index>(piece - 1);
        jac(row, col) += s;
        jac(row + 1, col + 1) += s;
      });
      row += 2;
      continue;
    }
    for (const auto& k : k_set_) {
      puzzle_.for_each_edge([&](std::size_t piece, const EdgeDesc& e) {
        const int s = signed_indicator(e, cls.color, cls.theta);
        if (s == 0 || piece == 0) return;
        const double w = s * std::exp(k.dot(translation_of(placement, piece) + e.b));
        const auto col = 2 * static_cast<Eigen::Index>(piece - 1);
        jac(row, col) += w * k.x();
        jac(row, col + 1) += w * k.y();
      });
      ++row;
    }
  }
  if (!jac.allFinite()) throw EvalError("puzzle: exponent overflow");
  return jac;
}

double PuzzleProblem::energy(const Vec& x) const { return residual(x).squaredNorm(); }

Vec PuzzleProblem::gradient(const Vec& x) const { return 2.0 * jacobian(x).transpose() * residual(x); }

Vec PuzzleProblem::sample_start(Rng& rng) const {
  Vec x(static_cast<Eigen::Index>(dimension()));
  for (Eigen::Index i = 0; i < x.size(); i += 2) {
    x[i] = rng.uniform(lo_.x(), hi_.x());
    x[i + 1] = rng.uniform(lo_.y(), hi_.y());
  }
  return x;
}

std::optional<bool> PuzzleProblem::feasible(const Vec& x, double tol) const {
  return verify_geometric(puzzle_, Placement::from_flat(x), tol);
}

}  // namespace spbench
