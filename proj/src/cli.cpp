#include "spbench/cli.hpp"

#include "spbench/clusters.hpp"
#include "spbench/games.hpp"
#include "spbench/io.hpp"
#include "spbench/lattice.hpp"
#include "spbench/puzzles.hpp"
#include "spbench/solvers.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <map>
#include <sstream>

namespace spbench {

namespace {

struct GenerateArgs {
  std::string family;
  std::string out;
  std::string label;
  std::optional<std::uint64_t> seed;
  int N = 2;
  double J = 0.0;
  double lambda = 3.0 / 5.0;
  double mu2 = 2.0;
  int d = 2;
  int L = 3;
  std::string bc = "periodic";
  std::string disorder = "uniform-signed";
  bool no_gauge = false;
  int atoms = 3;
  double rho = 6.0;
  double epsilon = 1.0;
  double sigma = 1.0;
  double r_e = 1.0;
  std::string game;
  std::string preset;
  std::vector<int> strategies = {2, 2};
  std::string grid = "2x2";
  int palette = 3;
  std::string encoding = "linear";
};

struct SolveArgs {
  std::string instance;
  std::string out;
  std::string method = "newton";
  std::string starts = "100";
  std::optional<std::uint64_t> seed;
  double tol = 1e-10;
  std::optional<int> max_iters;
  double dedup_tol = 1e-6;
  std::optional<unsigned> threads;
  bool timing = false;
};

struct ReportArgs {
  std::string result;
  std::string format = "csv";
};

struct VerifyArgs {
  std::string instance;
  std::string result;
};

/// Thrown for invalid flag combinations detected after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t need_seed(const std::optional<std::uint64_t>& seed, const std::string& what) {
  if (!seed) throw UsageError("--seed is required for " + what);
  return *seed;
}

ProblemPtr build_instance(const GenerateArgs& a) {
  const Family family = [&] {
    try {
      return family_from_name(a.family);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }();
  switch (family) {
    case Family::Phi4:
      return std::make_shared<Phi4Problem>(Phi4Problem::Params{a.N, a.lambda, a.mu2, a.J}, a.label);
    case Family::XY: {
      XYProblem::Params p;
      p.d = a.d;
      p.L = a.L;
      p.bc = a.bc == "periodic" ? Boundary::Periodic
             : a.bc == "antiperiodic" ? Boundary::AntiPeriodic
                                      : throw UsageError("--bc must be periodic or antiperiodic");
      p.gauge_fixed = !a.no_gauge;
      p.distribution = parse_distribution(a.disorder);
      p.seed = std::holds_alternative<ConstantCoupling>(p.distribution) ? a.seed.value_or(0)
                                                                        : need_seed(a.seed, "random disorder");
      return std::make_shared<XYProblem>(p, a.label);
    }
    case Family::Thomson:
      return std::make_shared<ThomsonProblem>(a.N, a.label);
    case Family::LJ:
      return std::make_shared<ClusterProblem>(a.atoms, LennardJones{a.epsilon, a.sigma}, a.label);
    case Family::Morse:
      return std::make_shared<ClusterProblem>(a.atoms, Morse{a.epsilon, a.r_e, a.rho}, a.label);
    case Family::Nash: {
      if (!a.game.empty()) {
        const Json j = read_json(a.game);
        auto label = a.label.empty() ? std::filesystem::path(a.game).stem().string() : a.label;
        return std::make_shared<NashProblem>(game_from_json(j), "nash-" + label);
      }
      const std::string preset = a.preset.empty() ? "matching-pennies" : a.preset;
      auto lbl = [&](const std::string& dflt) { return a.label.empty() ? dflt : a.label; };
      if (preset == "matching-pennies") return std::make_shared<NashProblem>(matching_pennies(), lbl("nash-matching-pennies"));
      if (preset == "prisoners-dilemma") {
        return std::make_shared<NashProblem>(prisoners_dilemma(), lbl("nash-prisoners-dilemma"));
      }
      if (preset == "random") {
        const auto seed = need_seed(a.seed, "random games");
        std::ostringstream os;
        os << "nash-random";
        for (int d : a.strategies) os << '-' << d;
        os << "-s" << seed;
        return std::make_shared<NashProblem>(random_game(a.strategies, seed), lbl(os.str()));
      }
      throw UsageError("unknown --preset '" + preset + "'");
    }
    case Family::Puzzle: {
      int rows = 0;
      int cols = 0;
      char x = 0;
      std::istringstream is(a.grid);
      if (!(is >> rows >> x >> cols) || x != 'x') throw UsageError("--grid must look like 2x2");
      const auto seed = need_seed(a.seed, "puzzle generation");
      auto gp = generate_grid_puzzle(rows, cols, a.palette, seed);
      PuzzleEncoding enc = a.encoding == "linear"        ? PuzzleEncoding::Linear
                           : a.encoding == "exponential" ? PuzzleEncoding::Exponential
                                                         : throw UsageError("--encoding must be linear or exponential");
      std::string label = a.label.empty() ? "puzzle-" + a.grid + "-s" + std::to_string(seed) : a.label;
      return std::make_shared<PuzzleProblem>(std::move(gp.puzzle), enc, std::vector<Vec2>{}, label);
    }
    case Family::Custom:
      break;
  }
  throw UsageError("family '" + a.family + "' cannot be generated");
}

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  const ProblemPtr problem = build_instance(a);
  write_atomic(a.out, dump(instance_to_json(*problem)));
  out << "label=" << problem->label() << "\n";
  out << "n=" << problem->dimension() << "\n";
  if (const auto* p = dynamic_cast<const Phi4Problem*>(problem.get())) out << "bezout=" << phi4_bezout(*p) << "\n";
  return kExitOk;
}

unsigned threads_from_env() {
  if (const char* env = std::getenv("SPBENCH_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return 0;
}

int default_max_iters(SolverKind method) { return method == SolverKind::GradSq ? 20000 : 100; }

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  const ProblemPtr problem = instance_from_json(read_json(a.instance));

  SolverConfig cfg;
  try {
    cfg.method = solver_from_name(a.method);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (cfg.method != SolverKind::Newton && cfg.method != SolverKind::GradSq && cfg.method != SolverKind::NewtonHomotopy) {
    throw UsageError("--method must be newton, gradsq or homotopy");
  }
  if (!(a.tol > 0.0)) throw UsageError("--tol must be positive");
  if (!(a.dedup_tol > 0.0)) throw UsageError("--dedup-tol must be positive");
  cfg.accept_tol = a.tol;
  cfg.dedup_tol = a.dedup_tol;
  cfg.max_iters = a.max_iters.value_or(default_max_iters(cfg.method));
  if (cfg.max_iters < 1) throw UsageError("--max-iters must be >= 1");
  if (a.starts == "grid3") {
    cfg.grid_starts = true;
    cfg.seed = a.seed.value_or(0);
  } else {
    try {
      std::size_t used = 0;
      cfg.starts = std::stoi(a.starts, &used);
      if (used != a.starts.size() || cfg.starts < 1) throw std::invalid_argument("bad");
    } catch (const std::exception&) {
      throw UsageError("--starts must be a positive integer or grid3");
    }
    cfg.seed = need_seed(a.seed, "random starts");
  }
  cfg.threads = a.threads.value_or(threads_from_env());

  const MultistartResult res = multistart(*problem, cfg);

  ResultFile rf;
  rf.instance_label = problem->label();
  rf.family = problem->family();
  rf.dimension = problem->dimension();
  rf.solver = cfg;
  rf.solutions = res.solutions;
  rf.stats = res.stats;
  rf.include_wall_time = a.timing;
  write_atomic(a.out, dump(result_to_json(rf)));

  out << "starts=" << res.stats.starts << " converged=" << res.stats.converged
      << " distinct=" << res.solutions.size() << " spurious=" << res.stats.spurious
      << " diverged=" << res.stats.diverged << " singular_steps=" << res.stats.singular_steps
      << " eval_errors=" << res.stats.eval_errors << "\n";
  return res.stats.converged > 0 ? kExitOk : kExitNoSolutions;
}

int cmd_report(const ReportArgs& a, std::ostream& out) {
  if (a.format != "csv" && a.format != "json") throw UsageError("--format must be csv or json");
  const ResultFile rf = result_from_json(read_json(a.result));

  std::vector<std::size_t> histogram(rf.dimension + 1, 0);
  std::size_t singular = 0;
  std::size_t feasible = 0;
  std::size_t feasibility_known = 0;
  double emin = std::numeric_limits<double>::infinity();
  double emax = -emin;
  for (const auto& sp : rf.solutions.points) {
    ++histogram[static_cast<std::size_t>(sp.index)];
    singular += sp.singular;
    if (sp.feasible) {
      ++feasibility_known;
      feasible += *sp.feasible;
    }
    emin = std::min(emin, sp.energy);
    emax = std::max(emax, sp.energy);
  }
  const bool any = !rf.solutions.points.empty();

  if (a.format == "json") {
    Json hist = Json::object();
    for (std::size_t i = 0; i < histogram.size(); ++i) hist[std::to_string(i)] = histogram[i];
    Json j = {{"instance", rf.instance_label},
              {"solver", std::string(solver_name(rf.solver.method))},
              {"solutions", rf.solutions.size()},
              {"histogram", hist},
              {"singular", singular},
              {"spurious_minima", rf.stats.spurious},
              {"energy_min", any ? Json(emin) : Json(nullptr)},
              {"energy_max", any ? Json(emax) : Json(nullptr)}};
    if (feasibility_known > 0) j["feasible"] = feasible;
    out << dump(j);
    return kExitOk;
  }

  std::ostringstream os;
  os.precision(17);
  os << "kind,key,value\n";
  os << "summary,instance," << rf.instance_label << "\n";
  os << "summary,solver," << solver_name(rf.solver.method) << "\n";
  os << "summary,solutions," << rf.solutions.size() << "\n";
  os << "summary,singular," << singular << "\n";
  os << "summary,spurious_minima," << rf.stats.spurious << "\n";
  if (any) {
    os << "summary,energy_min," << emin << "\n";
    os << "summary,energy_max," << emax << "\n";
  }
  if (feasibility_known > 0) os << "summary,feasible," << feasible << "\n";
  for (std::size_t i = 0; i < histogram.size(); ++i) os << "histogram," << i << "," << histogram[i] << "\n";
  out << os.str();
  return kExitOk;
}

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  const ProblemPtr problem = instance_from_json(read_json(a.instance));
  const ResultFile rf = result_from_json(read_json(a.result));
  const auto issues = revalidate(*problem, rf);
  if (issues.empty()) {
    out << "verified " << rf.solutions.size() << " solutions\n";
    return kExitOk;
  }
  for (const auto& is : issues) err << "solution " << is.solution << ": " << is.message << "\n";
  return kExitVerifyFailed;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stationary-point benchmark suite: instance generation, solver campaigns, reports"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write an instance file");
  g->add_option("family", gen.family, "phi4 | xy | thomson | lj | morse | nash | puzzle")->required();
  g->add_option("--out", gen.out, "Output instance path")->required();
  g->add_option("--label", gen.label, "Instance label (default derived from parameters)");
  g->add_option("--seed", gen.seed, "Seed for disorder, random games and puzzles");
  g->add_option("--N", gen.N, "phi4 lattice side / thomson electron count");
  g->add_option("--J", gen.J, "phi4 coupling");
  g->add_option("--lambda", gen.lambda, "phi4 quartic coupling");
  g->add_option("--mu2", gen.mu2, "phi4 mass term");
  g->add_option("--d", gen.d, "xy lattice dimension");
  g->add_option("--L", gen.L, "xy lattice side");
  g->add_option("--bc", gen.bc, "xy boundary: periodic | antiperiodic");
  g->add_option("--disorder", gen.disorder, "uniform-signed | constant[:c] | uniform:a:b");
  g->add_flag("--no-gauge", gen.no_gauge, "Keep the global rotation (do not pin site 0)");
  g->add_option("--atoms", gen.atoms, "Cluster size for lj / morse");
  g->add_option("--rho", gen.rho, "Morse range parameter");
  g->add_option("--epsilon", gen.epsilon, "Pair well depth");
  g->add_option("--sigma", gen.sigma, "LJ length scale");
  g->add_option("--re", gen.r_e, "Morse equilibrium distance");
  g->add_option("--game", gen.game, "Nash game JSON file");
  g->add_option("--preset", gen.preset, "matching-pennies | prisoners-dilemma | random");
  g->add_option("--strategies", gen.strategies, "Strategy counts for random games")->delimiter(',');
  g->add_option("--grid", gen.grid, "Puzzle grid, e.g. 2x2");
  g->add_option("--palette", gen.palette, "Number of interior puzzle colors");
  g->add_option("--encoding", gen.encoding, "Puzzle system: linear | exponential");

  SolveArgs sol;
  auto* s = app.add_subcommand("solve", "Run a multistart campaign");
  s->add_option("instance", sol.instance, "Instance file")->required();
  s->add_option("--out", sol.out, "Output result path")->required();
  s->add_option("--method", sol.method, "newton | gradsq | homotopy");
  s->add_option("--starts", sol.starts, "Number of random starts, or grid3");
  s->add_option("--seed", sol.seed, "Campaign seed");
  s->add_option("--tol", sol.tol, "Acceptance tolerance on the residual norm");
  s->add_option("--max-iters", sol.max_iters, "Iteration cap per start");
  s->add_option("--dedup-tol", sol.dedup_tol, "Distance below which solutions merge");
  s->add_option("--threads", sol.threads, "Worker threads (default: SPBENCH_THREADS or all cores)");
  s->add_flag("--timing", sol.timing, "Record wall_time in the result file");

  ReportArgs rep;
  auto* r = app.add_subcommand("report", "Summarize a result file");
  r->add_option("result", rep.result, "Result file")->required();
  r->add_option("--format", rep.format, "csv | json");

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "Re-check every stored solution against its instance");
  v->add_option("instance", ver.instance, "Instance file")->required();
  v->add_option("result", ver.result, "Result file")->required();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitParse;
  }

  try {
    if (*g) return cmd_generate(gen, out);
    if (*s) return cmd_solve(sol, out);
    if (*r) return cmd_report(rep, out);
    if (*v) return cmd_verify(ver, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitParse;
  }
  return kExitParse;
}

}  // namespace spbench
