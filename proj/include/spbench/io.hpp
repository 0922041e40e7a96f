#pragma once

// JSON instance and result files.

#include "spbench/core.hpp"
#include "spbench/games.hpp"
#include "spbench/puzzles.hpp"
#include "spbench/solvers.hpp"

#include <json.hpp>

#include <filesystem>

namespace spbench {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Raised for malformed or inconsistent files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json game_to_json(const NashGame& game);
NashGame game_from_json(const Json& j);

Json puzzle_to_json(const Puzzle& puzzle);
Puzzle puzzle_from_json(const Json& j);

/// {schema_version, family, label, params}. Disorder, payoffs and puzzle
/// pieces are stored inline so the file alone reproduces the instance.
Json instance_to_json(const Problem& problem);
ProblemPtr instance_from_json(const Json& j);

struct ResultFile {
  std::string instance_label;
  Family family = Family::Custom;
  std::size_t dimension = 0;
  SolverConfig solver;
  SolutionSet solutions;
  CampaignStats stats;
  /// wall_time is the only non-reproducible field and is written only on request.
  bool include_wall_time = false;
};

Json result_to_json(const ResultFile& r);
ResultFile result_from_json(const Json& j);

Json point_to_json(const StationaryPoint& sp);
StationaryPoint point_from_json(const Json& j);

/// Two-space indented JSON with a trailing newline.
std::string dump(const Json& j);

Json read_json(const std::filesystem::path& path);
/// Writes to a temporary sibling and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

struct RevalidationIssue {
  std::size_t solution = 0;
  std::string message;
};

/// Recomputes residual and classification of every stored solution against
/// the instance. Empty result means every solution checks out.
std::vector<RevalidationIssue> revalidate(const Problem& problem, const ResultFile& result);

}  // namespace spbench
