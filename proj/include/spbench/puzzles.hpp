#pragma once

#include "spbench/core.hpp"

#include <Eigen/Dense>

namespace spbench {

using Vec2 = Eigen::Vector2d;

/// Angle-equality tolerance for edge orientations.
inline constexpr double kAngleTol = 1e-9;

/// Maps an angle into [0, 2 pi).
double canonical_angle(double theta);
bool same_angle(double a, double b);

struct EdgeDesc {
  Vec2 b = Vec2::Zero();  ///< edge center relative to the piece center
  int color = 0;
  double theta = 0.0;  ///< orientation (outward normal), in [0, 2 pi)
};

struct PieceDesc {
  std::vector<EdgeDesc> edges;
};

/// One (color, orientation) class of the signed indicator.
struct EdgeClass {
  int color = 0;
  double theta = 0.0;

  bool operator==(const EdgeClass&) const = default;
};

/// Edge-matching puzzle: a frame (piece 0, fixed at the origin) plus N
/// translatable pieces.
class Puzzle {
 public:
  Puzzle(PieceDesc frame, std::vector<PieceDesc> pieces, std::vector<std::string> colors);

  const PieceDesc& frame() const { return frame_; }
  const std::vector<PieceDesc>& pieces() const { return pieces_; }
  std::size_t piece_count() const { return pieces_.size(); }
  const std::vector<std::string>& colors() const { return colors_; }

  /// Every distinct (color, orientation) pair carried by some edge, sorted.
  const std::vector<EdgeClass>& classes() const { return classes_; }

  /// True when each (c, theta) class has as many edges as its (c, theta + pi) partner.
  bool balanced() const;

  /// Calls fn(piece_index, edge) for the frame (index 0) and pieces 1..N.
  template <typename Fn>
  void for_each_edge(Fn&& fn) const {
    for (const auto& e : frame_.edges) fn(std::size_t{0}, e);
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      for (const auto& e : pieces_[i].edges) fn(i + 1, e);
    }
  }

 private:
  PieceDesc frame_;
  std::vector<PieceDesc> pieces_;
  std::vector<std::string> colors_;
  std::vector<EdgeClass> classes_;
};

/// Translations t_1..t_N; the frame is implicitly at (0, 0).
struct Placement {
  std::vector<Vec2> translations;

  static Placement from_flat(const Vec& x);
  Vec flat() const;
};

/// +1 if the edge is exactly (c, theta), -1 if it has color c and orientation
/// theta + pi, 0 otherwise.
int signed_indicator(const EdgeDesc& edge, int color, double theta);

/// For every class (c, theta) the planar sum of s(c, theta) (t_i + b_ij); two
/// entries per class, stacked in class order.
Vec linear_residual(const Puzzle& puzzle, const Placement& placement);

/// Default moment set: integer k in {-2..2}^2 without the origin.
std::vector<Vec2> default_k_set();

/// For every class and every k, sum s(c, theta) exp(k . (t_i + b_ij)), scaled
/// by exp(-max exponent) of that sum. Entries ordered class-major.
Vec exponential_residual(const Puzzle& puzzle, const Placement& placement, const std::vector<Vec2>& k_set);

/// Componentwise exponential change of variables T_i = exp(t_i).
Vec2 exp_translation(const Vec2& t);
/// T_i^k = prod_c T_c^(k_c) = exp(k . t).
double exp_moment(const Vec2& T, const Vec2& k);

/// Every edge element (frame included) coincides within tol with exactly one
/// edge of equal color and opposite orientation.
bool verify_geometric(const Puzzle& puzzle, const Placement& placement, double tol = 1e-9);

struct GridPuzzle {
  Puzzle puzzle;
  Placement solution;
};

/// Cuts an rows x cols frame into unit squares with random interior colors
/// (palette of `palette` colors) and frame-colored boundary edges. Pieces are
/// listed in shuffled order; `solution` places each at its cell center.
GridPuzzle generate_grid_puzzle(int rows, int cols, int palette, std::uint64_t seed);

enum class PuzzleEncoding { Linear, Exponential };

/// Solver view of a puzzle: unknowns are the 2N translation components.
class PuzzleProblem final : public Problem {
 public:
  PuzzleProblem(Puzzle puzzle, PuzzleEncoding encoding = PuzzleEncoding::Linear, std::vector<Vec2> k_set = {},
                std::string label = "puzzle");

  const Puzzle& puzzle() const { return puzzle_; }
  PuzzleEncoding encoding() const { return encoding_; }
  const std::vector<Vec2>& k_set() const { return k_set_; }

  Family family() const override { return Family::Puzzle; }
  std::size_t dimension() const override { return 2 * puzzle_.piece_count(); }
  std::size_t residual_size() const override;
  std::string label() const override { return label_; }

  double energy(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  bool gradient_system() const override { return false; }
  /// Linear encoding, or the unscaled exponential moments.
  Vec residual(const Vec& x) const override;
  Mat jacobian(const Vec& x) const override;

  /// Uniform over the frame's bounding box.
  Vec sample_start(Rng& rng) const override;
  std::optional<bool> feasible(const Vec& x, double tol) const override;

 private:
  Puzzle puzzle_;
  PuzzleEncoding encoding_;
  std::vector<Vec2> k_set_;
  std::string label_;
  Vec2 lo_;
  Vec2 hi_;
};

}  // namespace spbench
