#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "kcycle/extremal.hpp"
#include "kcycle/io_export.hpp"
#include "kcycle/kinematics.hpp"
#include "kcycle/observables.hpp"

namespace {

using namespace kcycle;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitMath = 2;
constexpr int kExitIo = 3;

ClosureMode parse_mode(const std::string& s) {
  if (s == "oriented") return ClosureMode::Oriented;
  if (s == "nonoriented") return ClosureMode::NonOriented;
  throw CLI::ValidationError("--mode", "must be 'oriented' or 'nonoriented'");
}

struct GlobalOpts {
  uint64_t seed = 0;
  std::string profile = "strict";
  double tol_c = 1e-6;

  SolverSettings solver() const {
    SolverSettings s;
    s.seed = seed;
    if (profile == "quick") {
      s.tol_residual = 1e-10;
      s.num_restarts = 12;
    }
    return s;
  }
  double extremal_tol() const { return profile == "quick" ? 1e-5 : tol_c; }
};

nlohmann::json provenance(const GlobalOpts& g, const std::string& command) {
  SolverSettings s = g.solver();
  return {{"command", command},
          {"seed", g.seed},
          {"profile", g.profile},
          {"tol_residual", s.tol_residual},
          {"num_restarts", s.num_restarts}};
}

LoadReport load_or_exit(const std::string& path) {
  if (!std::filesystem::exists(path))
    throw IoError("input file not found: " + path);
  return load_state(path);
}

void print_report(const SolveReport& rep) {
  std::cout << (rep.converged ? "converged" : "not converged")
            << "  residual=" << rep.residual_norm
            << "  iterations=" << rep.iterations
            << "  restarts=" << rep.restarts_used << "\n";
}

std::string observables_text(const ObservableSet& o) {
  std::ostringstream out;
  out << "e_bend      " << o.e_bend << "\n";
  out << "e_clmb      " << o.e_clmb << "  (alpha=" << o.alpha << ")\n";
  if (o.e_dipl)
    out << "e_dipl      " << *o.e_dipl << "\n";
  else
    out << "e_dipl      NA\n";
  out << "tw          " << o.tw << "\n";
  out << "wr          " << o.wr << "\n";
  out << "half_twists " << o.half_twists << "  (defect " << o.half_twist_defect
      << ")\n";
  out << "gauss_area  " << o.gauss_area << "\n";
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kaleidocycle linkage solver and analysis toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "config file (key=value)");

  GlobalOpts gopt;
  app.add_option("--seed", gopt.seed, "global RNG seed");
  app.add_option("--profile", gopt.profile, "quick|strict")
      ->check(CLI::IsMember({"quick", "strict"}));

  std::string full_command;
  for (int i = 0; i < argc; ++i) full_command += std::string(i ? " " : "") + argv[i];

  // --- solve ---
  auto* solve_cmd = app.add_subcommand("solve", "solve one (n, mode, c) slice");
  int s_n = 6;
  std::string s_mode = "nonoriented";
  double s_c = 0.0;
  std::string s_out;
  solve_cmd->add_option("--n", s_n, "hinge count (>= 6)")->required();
  solve_cmd->add_option("--mode", s_mode, "oriented|nonoriented");
  solve_cmd->add_option("--c", s_c, "twist-parameter cosine, |c| < 1")->required();
  solve_cmd->add_option("--out", s_out, "output state file");

  // --- extreme ---
  auto* ext_cmd = app.add_subcommand("extreme", "locate the extremal parameter c_n");
  int e_n = 7;
  std::string e_mode = "nonoriented", e_side = "upper", e_out;
  ext_cmd->add_option("--n", e_n)->required();
  ext_cmd->add_option("--mode", e_mode, "oriented|nonoriented");
  ext_cmd->add_option("--side", e_side)->check(CLI::IsMember({"upper", "lower"}));
  ext_cmd->add_option("--tol-c", gopt.tol_c, "bisection tolerance on c");
  ext_cmd->add_option("--out", e_out, "output witness state file");

  // --- trace ---
  auto* tr_cmd = app.add_subcommand("trace", "trace the rotating motion");
  std::string t_in, t_out, t_states_dir;
  int t_steps = 2000;
  double t_step = 0.02, t_alpha = 1.0;
  tr_cmd->add_option("--input", t_in, "input state file")->required();
  tr_cmd->add_option("--steps", t_steps, "maximum number of steps");
  tr_cmd->add_option("--step", t_step, "chord-length step in gauged coordinates");
  tr_cmd->add_option("--alpha", t_alpha, "Coulomb exponent");
  tr_cmd->add_option("--out", t_out, "trace CSV path")->required();
  tr_cmd->add_option("--states-dir", t_states_dir, "emit per-step state files here");

  // --- observables ---
  auto* ob_cmd = app.add_subcommand("observables", "print observables of a state");
  std::string o_in;
  double o_alpha = 1.0;
  bool o_dipole = false;
  ob_cmd->add_option("--input", o_in)->required();
  ob_cmd->add_option("--alpha", o_alpha, "Coulomb exponent");
  ob_cmd->add_flag("--dipole", o_dipole, "require the dipole energy");

  // --- scan ---
  auto* sc_cmd = app.add_subcommand("scan", "feasibility profile over a c grid");
  int sn = 6, spoints = 11;
  std::string smode = "nonoriented", sout;
  double sfrom = -0.5, sto = 0.5;
  sc_cmd->add_option("--n", sn)->required();
  sc_cmd->add_option("--mode", smode);
  sc_cmd->add_option("--from", sfrom)->required();
  sc_cmd->add_option("--to", sto)->required();
  sc_cmd->add_option("--points", spoints)->required();
  sc_cmd->add_option("--out", sout, "profile CSV path");

  // --- export ---
  auto* ex_cmd = app.add_subcommand("export", "mesh / papercraft net export");
  std::string x_in, x_mesh, x_net;
  double x_half = 0.5, x_margin = 0.3;
  ex_cmd->add_option("--input", x_in)->required();
  ex_cmd->add_option("--mesh", x_mesh, "OBJ output path");
  ex_cmd->add_option("--net", x_net, "SVG net output path");
  ex_cmd->add_option("--half-length", x_half, "hinge half length");
  ex_cmd->add_option("--margin", x_margin, "glue margin width");

  // --- reproduce-table1 ---
  auto* rt_cmd = app.add_subcommand(
      "reproduce-table1", "extremal values, twist and energies for the tabulated n");
  std::string r_out = "table1.csv";
  rt_cmd->add_option("--out", r_out, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // collapse CLI11's per-error exit codes into the usage code (help stays 0)
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    SolverSettings settings = gopt.solver();

    if (*solve_cmd) {
      if (s_n < 6 || std::abs(s_c) >= 1.0) {
        std::cerr << "error: require n >= 6 and |c| < 1\n";
        return kExitUsage;
      }
      Gauge g{s_n, parse_mode(s_mode), s_c};
      SolveReport rep = solve_slice(g, settings);
      print_report(rep);
      if (!rep.converged) return kExitMath;
      if (!s_out.empty())
        save_state({kStateSchemaVersion, *rep.state, provenance(gopt, full_command)},
                   s_out);
      return kExitOk;
    }

    if (*ext_cmd) {
      if (e_n < 6) {
        std::cerr << "error: require n >= 6\n";
        return kExitUsage;
      }
      ExtremalResult res;
      try {
        res = find_extreme_c(e_n, parse_mode(e_mode),
                             e_side == "upper" ? BoundarySide::Upper
                                               : BoundarySide::Lower,
                             gopt.extremal_tol(), settings);
      } catch (const NoFeasibleAnchorError& e) {
        std::cerr << "NoFeasibleAnchor: " << e.what() << "\n";
        return kExitMath;
      }
      std::cout << "c_" << e_n << " = " << std::setprecision(8) << res.c_n
                << "  bracket [" << res.bracket_lo << ", " << res.bracket_hi
                << "]  tests=" << res.feasibility_tests
                << (res.trivial_end ? "  (feasible up to the trivial end)" : "")
                << "\n";
      if (!e_out.empty())
        save_state({kStateSchemaVersion, res.witness, provenance(gopt, full_command)},
                   e_out);
      return kExitOk;
    }

    if (*tr_cmd) {
      LoadReport in = load_or_exit(t_in);
      const KaleidocycleState& start = in.doc.state;
      TangentBasis tb = tangent_basis(start);
      if (tb.nullity() > 1)
        std::cerr << "warning: local DOF appears to be " << tb.nullity()
                  << " > 1; tracing one direction (lowest-index tangent)\n";
      MotionTrace trace = trace_rotation(start, t_step, t_steps, settings);
      std::vector<ObservableSet> obs;
      obs.reserve(trace.states.size());
      EnergyParams params;
      params.alpha = t_alpha;
      for (const auto& st : trace.states) obs.push_back(compute_observables(st, params));
      export_trace_csv(trace, obs, t_out);
      if (!t_states_dir.empty()) {
        std::filesystem::create_directories(t_states_dir);
        for (size_t k = 0; k < trace.states.size(); ++k) {
          std::ostringstream name;
          name << "state_" << std::setw(6) << std::setfill('0') << k << ".json";
          save_state({kStateSchemaVersion, trace.states[k],
                      provenance(gopt, full_command)},
                     std::filesystem::path(t_states_dir) / name.str());
        }
      }
      std::cout << "traced " << trace.states.size() << " states, closed="
                << (trace.closed ? "true" : "false") << "\n";
      return kExitOk;
    }

    if (*ob_cmd) {
      LoadReport in = load_or_exit(o_in);
      EnergyParams params;
      params.alpha = o_alpha;
      params.dipole = o_dipole;
      ObservableSet o = compute_observables(in.doc.state, params);
      std::cout << observables_text(o);
      return kExitOk;
    }

    if (*sc_cmd) {
      if (sn < 6 || spoints < 1) {
        std::cerr << "error: require n >= 6 and a nonempty grid\n";
        return kExitUsage;
      }
      std::vector<double> grid;
      for (int i = 0; i < spoints; ++i)
        grid.push_back(spoints == 1 ? sfrom
                                    : sfrom + (sto - sfrom) * i / (spoints - 1));
      for (double c : grid)
        if (std::abs(c) >= 1.0) {
          std::cerr << "error: grid values must satisfy |c| < 1\n";
          return kExitUsage;
        }
      auto profile = scan_feasibility(sn, parse_mode(smode), grid, settings);
      std::ostringstream csv;
      csv << "c,feasible,min_residual\n";
      for (const auto& p : profile) {
        csv << std::setprecision(17) << p.c << ',' << (p.feasible ? 1 : 0) << ','
            << p.min_residual << '\n';
        std::cout << "c=" << std::setprecision(6) << p.c << "  "
                  << (p.feasible ? "feasible" : "infeasible") << "\n";
      }
      if (!sout.empty()) {
        std::ofstream f(sout);
        if (!f) return kExitIo;
        f << csv.str();
      }
      return kExitOk;
    }

    if (*ex_cmd) {
      LoadReport in = load_or_exit(x_in);
      if (x_mesh.empty() && x_net.empty()) {
        std::cerr << "error: nothing to export (need --mesh and/or --net)\n";
        return kExitUsage;
      }
      if (!x_mesh.empty()) export_mesh(in.doc.state, x_half, x_mesh);
      if (!x_net.empty()) {
        NetResult net = export_net_svg(in.doc.state, x_half, x_margin, x_net);
        if (net.overlap_warning)
          std::cerr << "warning: unfolded band self-overlaps\n";
      }
      return kExitOk;
    }

    if (*rt_cmd) {
      std::ostringstream csv;
      csv << "n,c_n,tw,e_bend,e_dipl\n";
      for (int n : {6, 7, 8, 9, 15, 38}) {
        double cn;
        KaleidocycleState witness;
        if (n == 6) {
          cn = 0.0;
          Gauge g{6, ClosureMode::NonOriented, 0.0};
          SolveReport rep = solve_slice(g, settings);
          if (!rep.converged) return kExitMath;
          witness = *rep.state;
        } else {
          ExtremalResult res =
              find_extreme_c(n, ClosureMode::NonOriented, BoundarySide::Upper,
                             gopt.extremal_tol(), settings);
          cn = res.c_n;
          witness = res.witness;
        }
        double tw = twist(witness);
        std::string ebend = (n == 6) ? "varies" : std::to_string(bend_energy(witness));
        std::string edipl = "NA";
        if (n == 7 || n == 9 || n == 15) {
          ExtremalResult lower =
              find_extreme_c(n, ClosureMode::Oriented, BoundarySide::Lower,
                             gopt.extremal_tol(), settings);
          edipl = std::to_string(dipole_energy(lower.witness));
        }
        csv << n << ',' << std::setprecision(6) << cn << ',' << tw << ','
            << ebend << ',' << edipl << '\n';
        std::cout << "n=" << n << "  c_n=" << cn << "  Tw=" << tw << "\n";
      }
      std::ofstream f(r_out);
      if (!f) return kExitIo;
      f << csv.str();
      return kExitOk;
    }
  } catch (const ModeError& e) {
    std::cerr << "ModeError: " << e.what() << "\n";
    return kExitMath;
  } catch (const ParseError& e) {
    std::cerr << "ParseError: " << e.what() << "\n";
    return kExitIo;
  } catch (const SchemaVersionError& e) {
    std::cerr << "SchemaVersionError: " << e.what() << "\n";
    return kExitIo;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const StallError& e) {
    std::cerr << "StallError: " << e.what() << "\n";
    return kExitMath;
  } catch (const BranchAmbiguity& e) {
    std::cerr << "BranchAmbiguity: " << e.what() << "\n";
    return kExitMath;
  } catch (const DegenerateError& e) {
    std::cerr << "Degenerate: " << e.what() << "\n";
    return kExitMath;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}
