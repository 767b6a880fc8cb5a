// posgain: certified upper/lower bounds on the positive l2-induced norm of
// discrete-time LTI systems, and small-gain stability certification of ReLU
// recurrences.
//
// Reports (CSV) go to --out or stdout; one-line summaries go to stderr so
// stdout stays machine-readable. Exit codes: 0 success/feasible, 2 unreadable
// input (file or command line), 3 unstable system, 4 certification
// infeasible, 5 solver failure.

#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "posgain/errors.hpp"
#include "posgain/io.hpp"
#include "posgain/lti.hpp"
#include "posgain/posnorm.hpp"
#include "posgain/rnn.hpp"

namespace {

using namespace posgain;

constexpr int kExitParse = 2;
constexpr int kExitUnstable = 3;
constexpr int kExitInfeasible = 4;
constexpr int kExitSolver = 5;

struct GlobalOpts {
  double tol = 1e-4;
  uint64_t seed = 0;
  std::string out;
  bool quiet = false;
};

void emit_report(const GlobalOpts& g, const std::string& text) {
  if (!g.out.empty())
    write_text_file(g.out, text);
  else
    std::cout << text;
}

void summarize(const GlobalOpts& g, const std::string& line) {
  if (!g.quiet) std::cerr << line << "\n";
}

const char* feas_str(FeasStatus s) {
  switch (s) {
    case FeasStatus::Feasible:
      return "feasible";
    case FeasStatus::Infeasible:
      return "infeasible";
    default:
      return "indeterminate";
  }
}

const StateSpace& want_statespace(const SystemFileContent& sf, const char* cmd) {
  if (!sf.statespace)
    throw InvalidInput(std::string(cmd) + ": expected a statespace file, got type '" + sf.type +
                       "'");
  return *sf.statespace;
}

const RnnModel& want_rnn(const SystemFileContent& sf, const char* cmd) {
  if (!sf.rnn)
    throw InvalidInput(std::string(cmd) + ": expected an rnn file, got type '" + sf.type + "'");
  return *sf.rnn;
}

int cmd_norm(const std::string& file, const GlobalOpts& g) {
  SystemFileContent sf = read_system_file(file);
  const StateSpace& sys = want_statespace(sf, "norm");
  double h = hinf_norm(sys, g.tol);
  std::string line = format_sig(h) + "\n";
  std::cout << line;
  if (!g.out.empty()) write_text_file(g.out, line);
  summarize(g, "l2-induced norm: " + format_sig(h));
  return 0;
}

int cmd_bounds(const std::string& file, int nmax, const GlobalOpts& g) {
  SystemFileContent sf = read_system_file(file);
  const StateSpace& sys = want_statespace(sf, "bounds");
  BoundReport rep = bound_sweep(sys, nmax, g.tol);
  emit_report(g, bounds_csv(rep));
  std::ostringstream s;
  s << "hinf = " << format_sig(rep.hinf);
  if (rep.best_upper) s << ", best upper = " << format_sig(*rep.best_upper);
  if (rep.best_lower) s << ", best lower = " << format_sig(*rep.best_lower);
  if (!rep.warnings.empty()) s << ", " << rep.warnings.size() << " warning(s)";
  summarize(g, s.str());
  return 0;
}

int cmd_rnn_check(const std::string& file, int lift, const GlobalOpts& g) {
  SystemFileContent sf = read_system_file(file);
  const RnnModel& rnn = want_rnn(sf, "rnn-check");
  CertifyOptions opts;
  opts.lift_order = lift;
  opts.tol = g.tol;
  StabilityVerdict v = certify(rnn, opts);

  std::cout << "ssg: " << feas_str(v.ssg) << "\n";
  std::cout << "ssg+cop: " << feas_str(v.ssg_cop) << "\n";
  if (v.gamma0_pos) std::cout << "gamma0+ <= " << format_sig(*v.gamma0_pos) << "\n";
  if (v.gamma1) std::cout << "gamma1 = " << format_sig(*v.gamma1) << "\n";
  if (v.certified_gain) std::cout << "certified gain <= " << format_sig(*v.certified_gain) << "\n";
  for (const std::string& n : v.notes) summarize(g, "note: " + n);

  if (!g.out.empty()) {
    if (v.ssg_cop_witness)
      write_text_file(g.out, witness_csv(*v.ssg_cop_witness));
    else if (v.ssg_witness)
      write_text_file(g.out, witness_csv(*v.ssg_witness));
  }

  if (v.ssg_cop == FeasStatus::Feasible) return 0;
  return v.ssg_cop == FeasStatus::Infeasible ? kExitInfeasible : kExitSolver;
}

AxisRange parse_axis(const std::string& spec, const char* flag) {
  AxisRange r;
  char colon1 = 0, colon2 = 0;
  std::istringstream in(spec);
  if (!(in >> r.lo >> colon1 >> r.hi >> colon2 >> r.steps) || colon1 != ':' || colon2 != ':' ||
      !in.eof() || r.steps < 1)
    throw InvalidInput(std::string("sweep: ") + flag + " expects lo:hi:steps, got '" + spec + "'");
  return r;
}

int cmd_sweep(const std::string& file, const std::string& aspec, const std::string& bspec,
              const GlobalOpts& g) {
  SystemFileContent sf = read_system_file(file);
  const RnnModel& rnn = want_rnn(sf, "sweep");
  AxisRange ar = parse_axis(aspec, "--a");
  AxisRange br = parse_axis(bspec, "--b");
  std::vector<SweepCell> cells = region_sweep(rnn, ar, br);
  emit_report(g, sweep_csv(cells));
  int both = 0, cop = 0, neither = 0, indet = 0;
  for (const SweepCell& c : cells) {
    switch (c.cls) {
      case CellClass::Both:
        ++both;
        break;
      case CellClass::CopOnly:
        ++cop;
        break;
      case CellClass::Neither:
        ++neither;
        break;
      default:
        ++indet;
        break;
    }
  }
  std::ostringstream s;
  s << cells.size() << " cells: " << both << " both, " << cop << " cop_only, " << neither
    << " neither, " << indet << " indeterminate";
  summarize(g, s.str());
  return 0;
}

Signal make_input(const std::string& kind, int channels, int steps, uint64_t seed) {
  if (kind == "impulse") return Signal::impulse(channels, steps);
  if (kind == "step") return Signal::step(channels, steps);
  if (kind == "random") return Signal::random_nonneg(channels, steps, seed);
  throw InvalidInput("simulate: unknown input '" + kind +
                     "' (expected impulse, step, or random)");
}

int cmd_simulate(const std::string& file, const std::string& kind, int steps,
                 const GlobalOpts& g) {
  if (steps < 1) throw InvalidInput("simulate: --steps must be >= 1");
  SystemFileContent sf = read_system_file(file);
  if (sf.statespace) {
    const StateSpace& sys = *sf.statespace;
    Signal w = make_input(kind, sys.nw(), steps, g.seed);
    SimResult sim = simulate(sys, w, steps);
    emit_report(g, trajectory_csv(w, sim));
    summarize(g, "output l2 norm = " + format_sig(sim.z.l2_norm()));
  } else {
    const RnnModel& rnn = *sf.rnn;
    Signal s = make_input(kind, rnn.channel_dim(), steps, g.seed);
    Signal v = make_input(kind, rnn.state_dim(), steps, g.seed + 1);
    RnnTrajectory traj = simulate_rnn(rnn, s, v, steps);
    emit_report(g, trajectory_csv_rnn(s, v, traj));
    summarize(g, "output l2 norm = " + format_sig(traj.z.l2_norm()));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certified bounds on the positive l2-induced norm of discrete-time systems"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--tol", g.tol, "bisection / relaxation tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--seed", g.seed, "seed for randomized inputs")->capture_default_str();
  app.add_option("--out", g.out, "write the report to this path (atomic)");
  app.add_flag("--quiet,-q", g.quiet, "suppress the stderr summary");

  std::string file, input_kind = "impulse";
  std::string aspec = "-8:8:17", bspec = "-8:8:17";
  int nmax = 8, lift = 4, steps = 50;

  CLI::App* norm = app.add_subcommand("norm", "l2-induced norm of a statespace file");
  norm->add_option("file", file, "system file")->required();

  CLI::App* bounds =
      app.add_subcommand("bounds", "positive-norm bounds over lifting orders 1..nmax");
  bounds->add_option("file", file, "system file")->required();
  bounds->add_option("--nmax", nmax, "largest lifting order")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  CLI::App* rnncheck = app.add_subcommand("rnn-check", "small-gain stability certification");
  rnncheck->add_option("file", file, "rnn file")->required();
  rnncheck->add_option("--lift", lift, "lifting order for the gamma0+ estimate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  CLI::App* sweep = app.add_subcommand("sweep", "classify feasibility over an (a, b) grid");
  sweep->add_option("file", file, "rnn template file")->required();
  sweep->add_option("--a", aspec, "a-axis as lo:hi:steps")->capture_default_str();
  sweep->add_option("--b", bspec, "b-axis as lo:hi:steps")->capture_default_str();

  CLI::App* sim = app.add_subcommand("simulate", "per-step trajectory of a system file");
  sim->add_option("file", file, "system file")->required();
  sim->add_option("--input", input_kind, "impulse | step | random")->capture_default_str();
  sim->add_option("--steps", steps, "horizon length")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  for (CLI::App* sub : {norm, bounds, rnncheck, sweep, sim}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  }

  try {
    if (norm->parsed()) return cmd_norm(file, g);
    if (bounds->parsed()) return cmd_bounds(file, nmax, g);
    if (rnncheck->parsed()) return cmd_rnn_check(file, lift, g);
    if (sweep->parsed()) return cmd_sweep(file, aspec, bspec, g);
    if (sim->parsed()) return cmd_simulate(file, input_kind, steps, g);
  } catch (const UnstableSystem& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUnstable;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const InvalidOrder& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const NotNonnegative& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const ColumnCountExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return 0;
}
