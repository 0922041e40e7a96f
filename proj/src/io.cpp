#include "spbench/io.hpp"

#include "spbench/clusters.hpp"
#include "spbench/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace spbench {

namespace {

template <typename T>
T get(const Json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("field '") + key + "': " + e.what());
  }
}

Json vec_to_json(const Vec& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Vec vec_from_json(const Json& j) {
  if (!j.is_array()) throw FormatError("expected a number array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw FormatError("expected a number array");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Json nest(const std::vector<double>& flat, const std::vector<int>& counts, std::size_t level, std::size_t& pos) {
  Json a = Json::array();
  for (int k = 0; k < counts[level]; ++k) {
    if (level + 1 == counts.size()) {
      a.push_back(flat[pos++]);
    } else {
      a.push_back(nest(flat, counts, level + 1, pos));
    }
  }
  return a;
}

void flatten(const Json& j, const std::vector<int>& counts, std::size_t level, std::vector<double>& out) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(counts[level])) {
    throw FormatError("payoff tensor shape does not match strategy_counts");
  }
  for (const auto& e : j) {
    if (level + 1 == counts.size()) {
      if (!e.is_number()) throw FormatError("payoff entries must be numbers");
      out.push_back(e.get<double>());
    } else {
      flatten(e, counts, level + 1, out);
    }
  }
}

Json piece_to_json(const PieceDesc& p, const std::vector<std::string>& colors) {
  Json edges = Json::array();
  for (const auto& e : p.edges) {
    edges.push_back({{"b", {e.b.x(), e.b.y()}}, {"c", colors[static_cast<std::size_t>(e.color)]}, {"theta", e.theta}});
  }
  return {{"edges", edges}};
}

PieceDesc piece_from_json(const Json& j, const std::vector<std::string>& colors) {
  PieceDesc p;
  for (const auto& e : get<Json>(j, "edges")) {
    EdgeDesc d;
    const Vec b = vec_from_json(get<Json>(e, "b"));
    if (b.size() != 2) throw FormatError("edge center must have 2 components");
    d.b = Vec2(b[0], b[1]);
    const auto name = get<std::string>(e, "c");
    const auto it = std::find(colors.begin(), colors.end(), name);
    if (it == colors.end()) throw FormatError("edge color '" + name + "' not listed in colors");
    d.color = static_cast<int>(it - colors.begin());
    d.theta = get<double>(e, "theta");
    p.edges.push_back(d);
  }
  return p;
}

std::string bc_name(Boundary b) { return b == Boundary::Periodic ? "periodic" : "antiperiodic"; }

Boundary bc_from_name(const std::string& s) {
  if (s == "periodic") return Boundary::Periodic;
  if (s == "antiperiodic") return Boundary::AntiPeriodic;
  throw FormatError("unknown boundary condition '" + s + "'");
}

}  // namespace

Json game_to_json(const NashGame& game) {
  Json payoffs = Json::array();
  for (int i = 0; i < game.players(); ++i) {
    std::size_t pos = 0;
    payoffs.push_back(nest(game.payoff_tensor(i), game.strategy_counts(), 0, pos));
  }
  return {{"players", game.players()}, {"strategy_counts", game.strategy_counts()}, {"payoffs", payoffs}};
}

NashGame game_from_json(const Json& j) {
  const auto players = get<int>(j, "players");
  const auto counts = get<std::vector<int>>(j, "strategy_counts");
  if (players < 2 || counts.size() != static_cast<std::size_t>(players)) {
    throw FormatError("strategy_counts must list one count per player");
  }
  for (int d : counts) {
    if (d < 1) throw FormatError("strategy counts must be positive");
  }
  const auto& pj = get<Json>(j, "payoffs");
  if (!pj.is_array() || pj.size() != static_cast<std::size_t>(players)) {
    throw FormatError("need one payoff tensor per player");
  }
  std::vector<std::vector<double>> payoffs;
  for (const auto& t : pj) {
    std::vector<double> flat;
    flatten(t, counts, 0, flat);
    payoffs.push_back(std::move(flat));
  }
  try {
    return NashGame(counts, std::move(payoffs));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

Json puzzle_to_json(const Puzzle& puzzle) {
  Json pieces = Json::array();
  for (const auto& p : puzzle.pieces()) pieces.push_back(piece_to_json(p, puzzle.colors()));
  return {{"frame", piece_to_json(puzzle.frame(), puzzle.colors())}, {"pieces", pieces}, {"colors", puzzle.colors()}};
}

Puzzle puzzle_from_json(const Json& j) {
  const auto colors = get<std::vector<std::string>>(j, "colors");
  PieceDesc frame = piece_from_json(get<Json>(j, "frame"), colors);
  std::vector<PieceDesc> pieces;
  for (const auto& p : get<Json>(j, "pieces")) pieces.push_back(piece_from_json(p, colors));
  try {
    return Puzzle(std::move(frame), std::move(pieces), colors);
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

Json instance_to_json(const Problem& problem) {
  Json params;
  if (const auto* p = dynamic_cast<const Phi4Problem*>(&problem)) {
    const auto& q = p->params();
    params = {{"N", q.N}, {"lambda", q.lambda}, {"mu2", q.mu2}, {"J", q.J}};
  } else if (const auto* x = dynamic_cast<const XYProblem*>(&problem)) {
    const auto& q = x->params();
    params = {{"d", q.d},
              {"L", q.L},
              {"bc", bc_name(q.bc)},
              {"gauge_fixed", q.gauge_fixed},
              {"seed", q.seed},
              {"disorder", describe(q.distribution)},
              {"couplings", x->couplings()}};
  } else if (const auto* t = dynamic_cast<const ThomsonProblem*>(&problem)) {
    params = {{"electrons", t->electrons()}};
  } else if (const auto* c = dynamic_cast<const ClusterProblem*>(&problem)) {
    if (const auto* lj = std::get_if<LennardJones>(&c->kind())) {
      params = {{"atoms", c->atoms()}, {"epsilon", lj->epsilon}, {"sigma", lj->sigma}};
    } else {
      const auto& m = std::get<Morse>(c->kind());
      params = {{"atoms", c->atoms()}, {"epsilon", m.epsilon}, {"r_e", m.r_e}, {"rho", m.rho}};
    }
  } else if (const auto* n = dynamic_cast<const NashProblem*>(&problem)) {
    params = game_to_json(n->game());
  } else if (const auto* z = dynamic_cast<const PuzzleProblem*>(&problem)) {
    params = puzzle_to_json(z->puzzle());
    params["encoding"] = z->encoding() == PuzzleEncoding::Linear ? "linear" : "exponential";
    if (z->encoding() == PuzzleEncoding::Exponential) {
      Json ks = Json::array();
      for (const auto& k : z->k_set()) ks.push_back({k.x(), k.y()});
      params["k_set"] = ks;
    }
  } else {
    throw std::invalid_argument("instance_to_json: unsupported problem type");
  }
  return {{"schema_version", kSchemaVersion},
          {"family", std::string(family_name(problem.family()))},
          {"label", problem.label()},
          {"params", params}};
}

ProblemPtr instance_from_json(const Json& j) {
  if (!j.is_object()) throw FormatError("instance file must be a JSON object");
  if (get<int>(j, "schema_version") != kSchemaVersion) throw FormatError("unsupported schema_version");
  const auto label = get<std::string>(j, "label");
  const auto& p = get<Json>(j, "params");
  Family family;
  try {
    family = family_from_name(get<std::string>(j, "family"));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }

  try {
    switch (family) {
      case Family::Phi4:
        return std::make_shared<Phi4Problem>(
            Phi4Problem::Params{get<int>(p, "N"), get<double>(p, "lambda"), get<double>(p, "mu2"), get<double>(p, "J")},
            label);
      case Family::XY: {
        XYProblem::Params q;
        q.d = get<int>(p, "d");
        q.L = get<int>(p, "L");
        q.bc = bc_from_name(get<std::string>(p, "bc"));
        q.gauge_fixed = get<bool>(p, "gauge_fixed");
        q.seed = get<std::uint64_t>(p, "seed");
        q.distribution = parse_distribution(get<std::string>(p, "disorder"));
        return std::make_shared<XYProblem>(q, get<std::vector<double>>(p, "couplings"), label);
      }
      case Family::Thomson:
        return std::make_shared<ThomsonProblem>(get<int>(p, "electrons"), label);
      case Family::LJ:
        return std::make_shared<ClusterProblem>(get<int>(p, "atoms"),
                                                LennardJones{get<double>(p, "epsilon"), get<double>(p, "sigma")}, label);
      case Family::Morse:
        return std::make_shared<ClusterProblem>(
            get<int>(p, "atoms"), Morse{get<double>(p, "epsilon"), get<double>(p, "r_e"), get<double>(p, "rho")}, label);
      case Family::Nash:
        return std::make_shared<NashProblem>(game_from_json(p), label);
      case Family::Puzzle: {
        const auto enc = p.value("encoding", std::string("linear"));
        std::vector<Vec2> ks;
        if (p.contains("k_set")) {
          for (const auto& k : p.at("k_set")) {
            const Vec v = vec_from_json(k);
            if (v.size() != 2) throw FormatError("k vectors must have 2 components");
            ks.emplace_back(v[0], v[1]);
          }
        }
        if (enc != "linear" && enc != "exponential") throw FormatError("unknown puzzle encoding '" + enc + "'");
        return std::make_shared<PuzzleProblem>(
            puzzle_from_json(p), enc == "linear" ? PuzzleEncoding::Linear : PuzzleEncoding::Exponential, ks, label);
      }
      case Family::Custom:
        break;
    }
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  throw FormatError("custom problems cannot be loaded from files");
}

Json point_to_json(const StationaryPoint& sp) {
  Json j = {{"coords", vec_to_json(sp.point)},
            {"energy", sp.energy},
            {"residual_norm", sp.residual_norm},
            {"index", sp.index},
            {"zero_eigs", sp.zero_eigs},
            {"singular", sp.singular},
            {"provenance",
             {{"solver", std::string(solver_name(sp.provenance.solver))},
              {"seed", sp.provenance.seed},
              {"start_id", sp.provenance.start_id}}}};
  if (sp.feasible) j["feasible"] = *sp.feasible;
  return j;
}

StationaryPoint point_from_json(const Json& j) {
  StationaryPoint sp;
  sp.point = vec_from_json(get<Json>(j, "coords"));
  sp.energy = get<double>(j, "energy");
  sp.residual_norm = get<double>(j, "residual_norm");
  sp.index = get<int>(j, "index");
  sp.zero_eigs = get<int>(j, "zero_eigs");
  sp.singular = get<bool>(j, "singular");
  if (j.contains("feasible")) sp.feasible = get<bool>(j, "feasible");
  const auto& pv = get<Json>(j, "provenance");
  try {
    sp.provenance.solver = solver_from_name(get<std::string>(pv, "solver"));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  sp.provenance.seed = get<std::uint64_t>(pv, "seed");
  sp.provenance.start_id = get<std::int64_t>(pv, "start_id");
  if (sp.index < 0 || sp.zero_eigs < 0 || sp.index + sp.zero_eigs > sp.point.size()) {
    throw FormatError("solution index/zero_eigs inconsistent with dimension");
  }
  if (sp.singular != (sp.zero_eigs > 0)) throw FormatError("singular flag disagrees with zero_eigs");
  return sp;
}

Json result_to_json(const ResultFile& r) {
  Json sols = Json::array();
  for (const auto& sp : r.solutions.points) sols.push_back(point_to_json(sp));
  Json stats = {{"starts", r.stats.starts},         {"converged", r.stats.converged},
                {"diverged", r.stats.diverged},     {"spurious", r.stats.spurious},
                {"eval_errors", r.stats.eval_errors}, {"max_iters", r.stats.max_iters},
                {"singular_steps", r.stats.singular_steps}};
  if (r.include_wall_time) stats["wall_time"] = r.stats.wall_time;
  const SolverConfig& s = r.solver;
  Json solver = {{"method", std::string(solver_name(s.method))},
                 {"accept_tol", s.accept_tol},
                 {"max_iters", s.max_iters},
                 {"starts", s.grid_starts ? Json("grid3") : Json(s.starts)},
                 {"seed", s.seed},
                 {"dedup_tol", s.dedup_tol}};
  return {{"schema_version", kSchemaVersion},
          {"instance_label", r.instance_label},
          {"family", std::string(family_name(r.family))},
          {"n", r.dimension},
          {"solver", solver},
          {"tolerance", r.solutions.tolerance},
          {"solutions", sols},
          {"campaign_stats", stats}};
}

ResultFile result_from_json(const Json& j) {
  if (!j.is_object()) throw FormatError("result file must be a JSON object");
  if (get<int>(j, "schema_version") != kSchemaVersion) throw FormatError("unsupported schema_version");
  ResultFile r;
  r.instance_label = get<std::string>(j, "instance_label");
  try {
    r.family = family_from_name(get<std::string>(j, "family"));
    const auto& s = get<Json>(j, "solver");
    r.solver.method = solver_from_name(get<std::string>(s, "method"));
    r.solver.accept_tol = get<double>(s, "accept_tol");
    r.solver.max_iters = get<int>(s, "max_iters");
    const auto& starts = get<Json>(s, "starts");
    if (starts.is_string()) {
      r.solver.grid_starts = true;
    } else {
      r.solver.starts = starts.get<int>();
    }
    r.solver.seed = get<std::uint64_t>(s, "seed");
    r.solver.dedup_tol = get<double>(s, "dedup_tol");
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(e.what());
  }
  r.dimension = get<std::size_t>(j, "n");
  r.solutions.instance_label = r.instance_label;
  r.solutions.tolerance = get<double>(j, "tolerance");
  for (const auto& sp : get<Json>(j, "solutions")) {
    r.solutions.points.push_back(point_from_json(sp));
    if (static_cast<std::size_t>(r.solutions.points.back().point.size()) != r.dimension) {
      throw FormatError("solution coordinates do not match n");
    }
  }
  const auto& st = get<Json>(j, "campaign_stats");
  r.stats.starts = get<std::size_t>(st, "starts");
  r.stats.converged = get<std::size_t>(st, "converged");
  r.stats.diverged = get<std::size_t>(st, "diverged");
  r.stats.spurious = get<std::size_t>(st, "spurious");
  r.stats.eval_errors = get<std::size_t>(st, "eval_errors");
  r.stats.max_iters = st.value("max_iters", std::size_t{0});
  r.stats.singular_steps = st.value("singular_steps", std::size_t{0});
  if (st.contains("wall_time")) {
    r.include_wall_time = true;
    r.stats.wall_time = get<double>(st, "wall_time");
  }
  return r;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

std::vector<RevalidationIssue> revalidate(const Problem& problem, const ResultFile& result) {
  std::vector<RevalidationIssue> issues;
  if (result.instance_label != problem.label()) {
    issues.push_back({0, "instance label '" + result.instance_label + "' does not match '" + problem.label() + "'"});
    return issues;
  }
  for (std::size_t i = 0; i < result.solutions.points.size(); ++i) {
    const auto& sp = result.solutions.points[i];
    auto issue = [&](const std::string& m) { issues.push_back({i, m}); };
    if (static_cast<std::size_t>(sp.point.size()) != problem.dimension()) {
      issue("coordinate count does not match instance dimension");
      continue;
    }
    try {
      const StationaryPoint fresh = classify(problem, sp.point);
      std::ostringstream os;
      os.precision(17);
      if (!(fresh.residual_norm <= result.solver.accept_tol)) {
        os << "residual " << fresh.residual_norm << " exceeds accept_tol " << result.solver.accept_tol;
      } else if (fresh.index != sp.index || fresh.zero_eigs != sp.zero_eigs) {
        os << "classification (index " << fresh.index << ", zero_eigs " << fresh.zero_eigs << ") differs from stored ("
           << sp.index << ", " << sp.zero_eigs << ")";
      } else if (std::abs(fresh.energy - sp.energy) > 1e-9 * (1.0 + std::abs(sp.energy))) {
        os << "energy " << fresh.energy << " differs from stored " << sp.energy;
      }
      if (!os.str().empty()) issue(os.str());
    } catch (const std::exception& e) {
      issue(std::string("evaluation failed: ") + e.what());
    }
  }
  return issues;
}

}  // namespace spbench
