#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spbench/cli.hpp"
#include "spbench/clusters.hpp"
#include "spbench/games.hpp"
#include "spbench/io.hpp"
#include "spbench/lattice.hpp"
#include "spbench/puzzles.hpp"
#include "spbench/solvers.hpp"

#include <sstream>

namespace py = pybind11;
using namespace spbench;

namespace {

py::dict stats_dict(const CampaignStats& s) {
  py::dict d;
  d["starts"] = s.starts;
  d["converged"] = s.converged;
  d["diverged"] = s.diverged;
  d["spurious"] = s.spurious;
  d["eval_errors"] = s.eval_errors;
  d["max_iters"] = s.max_iters;
  d["singular_steps"] = s.singular_steps;
  d["wall_time"] = s.wall_time;
  return d;
}

StrategyProfile profile_of(const NashGame& g, const Vec& x) { return StrategyProfile::from_flat(g, x); }

}  // namespace

PYBIND11_MODULE(_spbench, m) {
  m.doc() = "Stationary points of model potentials and polynomial systems";
  m.attr("__version__") = "0.1.0";

  py::register_exception<EvalError>(m, "EvalError", PyExc_ArithmeticError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  py::enum_<Family>(m, "Family")
      .value("Phi4", Family::Phi4)
      .value("XY", Family::XY)
      .value("Thomson", Family::Thomson)
      .value("LJ", Family::LJ)
      .value("Morse", Family::Morse)
      .value("Nash", Family::Nash)
      .value("Puzzle", Family::Puzzle)
      .value("Custom", Family::Custom);

  py::enum_<SolverKind>(m, "Method")
      .value("Newton", SolverKind::Newton)
      .value("GradSq", SolverKind::GradSq)
      .value("Homotopy", SolverKind::NewtonHomotopy);

  py::enum_<SolveStatus>(m, "SolveStatus")
      .value("Converged", SolveStatus::Converged)
      .value("Diverged", SolveStatus::Diverged)
      .value("MaxIters", SolveStatus::MaxIters)
      .value("SpuriousMinimum", SolveStatus::SpuriousMinimum)
      .value("EvalError", SolveStatus::EvalError)
      .value("SingularStep", SolveStatus::SingularStep);

  py::enum_<Boundary>(m, "Boundary").value("Periodic", Boundary::Periodic).value("AntiPeriodic", Boundary::AntiPeriodic);

  // -- problems --------------------------------------------------------------
  py::class_<Problem, std::shared_ptr<Problem>>(m, "Problem")
      .def_property_readonly("family", &Problem::family)
      .def_property_readonly("dimension", &Problem::dimension)
      .def_property_readonly("residual_size", &Problem::residual_size)
      .def_property_readonly("label", &Problem::label)
      .def_property_readonly("gradient_system", &Problem::gradient_system)
      .def("energy", &Problem::energy, py::arg("x"))
      .def("gradient", &Problem::gradient, py::arg("x"))
      .def("hessian", &Problem::hessian, py::arg("x"))
      .def("residual", &Problem::residual, py::arg("x"))
      .def("jacobian", &Problem::jacobian, py::arg("x"))
      .def("feasible", &Problem::feasible, py::arg("x"), py::arg("tol") = 1e-8)
      .def("sample_start", [](const Problem& p, std::uint64_t seed, std::uint64_t stream) {
        Rng rng(seed, stream);
        return p.sample_start(rng);
      }, py::arg("seed"), py::arg("stream") = 0)
      .def("to_json", [](const Problem& p) { return instance_to_json(p).dump(); })
      .def("__repr__", [](const Problem& p) { return "<spbench.Problem " + p.label() + ">"; });

  py::class_<Phi4Problem, Problem, std::shared_ptr<Phi4Problem>>(m, "Phi4Problem")
      .def_property_readonly("uniform_root", &Phi4Problem::uniform_root);
  py::class_<XYProblem, Problem, std::shared_ptr<XYProblem>>(m, "XYProblem")
      .def_property_readonly("couplings", &XYProblem::couplings);
  py::class_<ThomsonProblem, Problem, std::shared_ptr<ThomsonProblem>>(m, "ThomsonProblem");
  py::class_<ClusterProblem, Problem, std::shared_ptr<ClusterProblem>>(m, "ClusterProblem")
      .def("positions", [](const ClusterProblem& c, const Vec& x) {
        Mat out(c.atoms(), 3);
        auto pos = c.embed(x);
        for (int i = 0; i < c.atoms(); ++i) out.row(i) = pos[static_cast<std::size_t>(i)].transpose();
        return out;
      });
  py::class_<NashProblem, Problem, std::shared_ptr<NashProblem>>(m, "NashProblem")
      .def("is_equilibrium", [](const NashProblem& p, const Vec& x, double tol) {
        auto rep = is_equilibrium(p.game(), profile_of(p.game(), x), tol);
        return py::make_tuple(rep.equilibrium, rep.violations);
      }, py::arg("x"), py::arg("tol") = 1e-9)
      .def("expected_payoffs", [](const NashProblem& p, const Vec& x) {
        auto prof = profile_of(p.game(), x);
        std::vector<double> out;
        for (int i = 0; i < p.game().players(); ++i) out.push_back(expected_payoff(p.game(), prof, i));
        return out;
      });
  py::class_<PuzzleProblem, Problem, std::shared_ptr<PuzzleProblem>>(m, "PuzzleProblem")
      .def("linear_residual", [](const PuzzleProblem& p, const Vec& x) {
        return linear_residual(p.puzzle(), Placement::from_flat(x));
      })
      .def("exponential_residual", [](const PuzzleProblem& p, const Vec& x) {
        return exponential_residual(p.puzzle(), Placement::from_flat(x), default_k_set());
      })
      .def("verify_geometric", [](const PuzzleProblem& p, const Vec& x, double tol) {
        return verify_geometric(p.puzzle(), Placement::from_flat(x), tol);
      }, py::arg("x"), py::arg("tol") = 1e-9);

  m.def("phi4", [](int N, double lambda, double mu2, double J) {
    return std::make_shared<Phi4Problem>(Phi4Problem::Params{N, lambda, mu2, J});
  }, py::arg("N"), py::arg("lam") = 0.6, py::arg("mu2") = 2.0, py::arg("J") = 0.0);

  m.def("xy", [](int d, int L, const std::string& disorder, std::uint64_t seed, Boundary bc, bool gauge_fixed) {
    return std::make_shared<XYProblem>(XYProblem::Params{d, L, bc, gauge_fixed, seed, parse_distribution(disorder)});
  }, py::arg("d"), py::arg("L"), py::arg("disorder") = "uniform-signed", py::arg("seed") = 0,
        py::arg("bc") = Boundary::Periodic, py::arg("gauge_fixed") = true);

  m.def("thomson", [](int n) { return std::make_shared<ThomsonProblem>(n); }, py::arg("electrons"));
  m.def("lennard_jones", [](int atoms, double eps, double sigma) {
    return std::make_shared<ClusterProblem>(atoms, LennardJones{eps, sigma});
  }, py::arg("atoms"), py::arg("epsilon") = 1.0, py::arg("sigma") = 1.0);
  m.def("morse", [](int atoms, double rho, double eps, double r_e) {
    return std::make_shared<ClusterProblem>(atoms, Morse{eps, r_e, rho});
  }, py::arg("atoms"), py::arg("rho") = 6.0, py::arg("epsilon") = 1.0, py::arg("r_e") = 1.0);

  m.def("nash", [](std::vector<int> counts, std::vector<std::vector<double>> payoffs, std::string label) {
    return std::make_shared<NashProblem>(NashGame(std::move(counts), std::move(payoffs)), std::move(label));
  }, py::arg("strategy_counts"), py::arg("payoffs"), py::arg("label") = "nash");
  m.def("matching_pennies", [] { return std::make_shared<NashProblem>(matching_pennies(), "nash-matching-pennies"); });
  m.def("prisoners_dilemma", [] { return std::make_shared<NashProblem>(prisoners_dilemma(), "nash-prisoners-dilemma"); });

  m.def("grid_puzzle", [](int rows, int cols, int palette, std::uint64_t seed, const std::string& encoding) {
    auto g = generate_grid_puzzle(rows, cols, palette, seed);
    std::shared_ptr<PuzzleProblem> p;
    if (encoding == "linear") {
      p = std::make_shared<PuzzleProblem>(g.puzzle);
    } else if (encoding == "exponential") {
      p = std::make_shared<PuzzleProblem>(g.puzzle, PuzzleEncoding::Exponential, default_k_set());
    } else {
      throw py::value_error("encoding must be 'linear' or 'exponential'");
    }
    return py::make_tuple(p, g.solution.flat());
  }, py::arg("rows"), py::arg("cols"), py::arg("palette") = 2, py::arg("seed") = 0, py::arg("encoding") = "linear");

  m.def("load_instance", [](const std::string& text) {
    return std::const_pointer_cast<Problem>(instance_from_json(Json::parse(text)));
  }, py::arg("json_text"));

  // -- analysis ---------------------------------------------------------------
  py::class_<StationaryPoint>(m, "StationaryPoint")
      .def_readonly("point", &StationaryPoint::point)
      .def_readonly("energy", &StationaryPoint::energy)
      .def_readonly("residual_norm", &StationaryPoint::residual_norm)
      .def_readonly("index", &StationaryPoint::index)
      .def_readonly("zero_eigs", &StationaryPoint::zero_eigs)
      .def_readonly("singular", &StationaryPoint::singular)
      .def_readonly("feasible", &StationaryPoint::feasible)
      .def("__repr__", [](const StationaryPoint& sp) {
        std::ostringstream os;
        os << "<StationaryPoint E=" << sp.energy << " index=" << sp.index << (sp.singular ? " singular" : "") << ">";
        return os.str();
      });

  m.def("classify", [](const Problem& p, const Vec& x, std::optional<double> zero_tol) {
    ClassifyConfig cfg;
    cfg.zero_tol = zero_tol;
    return classify(p, x, cfg);
  }, py::arg("problem"), py::arg("x"), py::arg("zero_tol") = py::none());
  m.def("fd_gradient", &fd_gradient, py::arg("problem"), py::arg("x"), py::arg("h") = 1e-5);
  m.def("phi4_bezout", [](const Phi4Problem& p) { return py::int_(py::str(phi4_bezout(p).str())); });
  m.def("phi4_enumerate_decoupled", [](const Phi4Problem& p) { return phi4_enumerate_decoupled(p).points; });
  m.def("pair_curvature", [](const std::string& kind, double rho) {
    if (kind == "lj") return pair_curvature(LennardJones{});
    if (kind == "morse") return pair_curvature(Morse{1.0, 1.0, rho});
    throw py::value_error("kind must be 'lj' or 'morse'");
  }, py::arg("kind"), py::arg("rho") = 6.0);

  // -- solvers ----------------------------------------------------------------
  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("method", &SolverConfig::method)
      .def_readwrite("accept_tol", &SolverConfig::accept_tol)
      .def_readwrite("max_iters", &SolverConfig::max_iters)
      .def_readwrite("starts", &SolverConfig::starts)
      .def_readwrite("grid_starts", &SolverConfig::grid_starts)
      .def_readwrite("seed", &SolverConfig::seed)
      .def_readwrite("dedup_tol", &SolverConfig::dedup_tol)
      .def_readwrite("threads", &SolverConfig::threads);

  py::class_<SolveOutcome>(m, "SolveOutcome")
      .def_readonly("status", &SolveOutcome::status)
      .def_readonly("point", &SolveOutcome::point)
      .def_readonly("residual_norm", &SolveOutcome::residual_norm)
      .def_readonly("w_value", &SolveOutcome::w_value)
      .def_readonly("iterations", &SolveOutcome::iterations)
      .def_property_readonly("converged", &SolveOutcome::converged);

  const auto cfg_default = SolverConfig{};
  m.def("newton_solve", &newton_solve, py::arg("problem"), py::arg("start"), py::arg("cfg") = cfg_default);
  m.def("gradsq_solve", &gradsq_solve, py::arg("problem"), py::arg("start"), py::arg("cfg") = cfg_default);
  m.def("homotopy_track", &homotopy_track, py::arg("problem"), py::arg("start"), py::arg("cfg") = cfg_default);
  m.def("multistart", [](const Problem& p, const SolverConfig& cfg) {
    MultistartResult res;
    {
      py::gil_scoped_release release;
      res = multistart(p, cfg);
    }
    return py::make_tuple(res.solutions.points, stats_dict(res.stats));
  }, py::arg("problem"), py::arg("cfg"));

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Runs one spbench command; returns (exit_code, stdout, stderr).");
}
