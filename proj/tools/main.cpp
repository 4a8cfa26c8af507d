// coagprof: command-line front end for the coagulation profile library.
//
// One subcommand per task: solve (compute a self-similar profile), verify
// (run the property checks on a stored profile), evolve (time-dependent
// solver with the self-similar change of variables), frac (fractional
// integrals and derivatives of sampled functions).
//
// Exit codes: 0 success, 1 unusable configuration or input, 2 numerical
// failure, 3 verification failure. Reports and trajectories go to stdout,
// diagnostics to stderr, everything else to the files named by the options.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "coagprof/analyzer.hpp"
#include "coagprof/dynamics.hpp"
#include "coagprof/errors.hpp"
#include "coagprof/fracalc.hpp"
#include "coagprof/grid.hpp"
#include "coagprof/io.hpp"
#include "coagprof/kernel.hpp"
#include "coagprof/profiles.hpp"

namespace {

using namespace coagprof;

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string trimmed(const std::string& s) {
    const std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) {
        return "";
    }
    return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

// key=value lines turned into --key=value tokens; # starts a comment.
std::vector<std::string> config_tokens(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw FormatError("cannot read config file " + path);
    }
    std::vector<std::string> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) {
            line.resize(hash);
        }
        line = trimmed(line);
        if (line.empty()) {
            continue;
        }
        const std::size_t eq = line.find('=');
        const std::string key =
            eq == std::string::npos ? "" : trimmed(line.substr(0, eq));
        if (key.empty()) {
            throw FormatError(path + ":" + std::to_string(lineno) +
                              ": expected key=value");
        }
        out.push_back("--" + key + "=" + trimmed(line.substr(eq + 1)));
    }
    return out;
}

// Splices the --config file's tokens in right after the subcommand name, so
// every option the command line itself carries comes later and wins.
std::vector<std::string> with_config_expanded(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty() || args.front().empty() || args.front()[0] == '-') {
        return args;
    }
    std::string cfg;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            cfg = args[i + 1];
        } else if (args[i].rfind("--config=", 0) == 0) {
            cfg = args[i].substr(9);
        }
    }
    if (cfg.empty()) {
        return args;
    }
    const std::vector<std::string> toks = config_tokens(cfg);
    args.insert(args.begin() + 1, toks.begin(), toks.end());
    return args;
}

std::string csv_sibling(const std::string& json_path) {
    if (ends_with(json_path, ".json")) {
        return json_path.substr(0, json_path.size() - 5) + ".csv";
    }
    return json_path + ".csv";
}

struct SolveArgs {
    double alpha = 0.0;
    double beta = 0.0;
    double weight = 1.0;
    double mass = 1.0;
    double ymin = 1e-4;
    double ymax = 50.0;
    std::size_t n = 512;
    double tol = 1e-8;
    double residual_tol = 1e-2;
    std::size_t max_iter = 300;
    double damping = 0.5;
    std::string out;
    std::string csv;
    std::string config;
};

int cmd_solve(const SolveArgs& a) {
    const KernelSpec k = make_kernel(a.alpha, a.beta, a.weight);
    SolverOptions opts;
    opts.grid = make_geometric_grid(a.ymin, a.ymax, a.n);
    opts.tol = a.tol;
    opts.residual_tol = a.residual_tol;
    opts.max_iter = a.max_iter;
    opts.damping = a.damping;
    const std::string csv = a.csv.empty() ? csv_sibling(a.out) : a.csv;
    try {
        ProfileSolution sol;
        switch (k.cls) {
            case KernelClass::alpha_zero:
                sol = solve_alpha_zero(k, a.mass, opts);
                break;
            case KernelClass::alpha_neg:
                sol = solve_alpha_neg(k, a.mass, opts);
                break;
            case KernelClass::alpha_pos:
                throw ClassMismatchError(
                    "no solver covers alpha > 0; lower --alpha to at most 0");
        }
        save_profile(a.out, sol, true);
        save_function_csv(csv, sol.g);
        std::cerr << "converged in " << sol.iterations << " sweeps, residual "
                  << sol.residual << "; wrote " << a.out << " and " << csv << "\n";
        return 0;
    } catch (const SolverStallError& e) {
        save_profile(a.out, e.partial, false);
        save_function_csv(csv, e.partial.g);
        std::cerr << "no convergence: " << e.what()
                  << "; last iterate written to " << a.out << " and " << csv
                  << "\n";
        return 2;
    }
}

struct VerifyArgs {
    std::string profile;
    std::string out;
};

int cmd_verify(const VerifyArgs& a) {
    const StoredProfile sp = load_profile(a.profile);
    if (!sp.converged) {
        std::cerr << "note: " << a.profile
                  << " was stored by a run that did not converge\n";
    }
    const VerificationReport rep = verify_profile(sp.solution, a.profile);
    const std::string text = report_to_json(rep);
    if (a.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream o(a.out, std::ios::binary | std::ios::trunc);
        o << text;
        if (!o) {
            throw FormatError("cannot write file " + a.out);
        }
    }
    if (!rep.all_pass()) {
        std::cerr << "verification failed:";
        for (const Check& c : rep.checks) {
            if (!c.pass) {
                std::cerr << " " << c.name;
            }
        }
        std::cerr << "\n";
        return 3;
    }
    return 0;
}

struct EvolveArgs {
    double alpha = 0.0;
    double beta = 0.0;
    double weight = 1.0;
    double ymin = 1e-3;
    double ymax = 5000.0;
    std::size_t n = 256;
    double t0 = 1.0;
    double t_ratio = 100.0;
    double dt = 0.0;
    bool auto_dt = false;
    double dt_factor = 0.05;
    std::size_t print_every = 1;
    std::string seed_csv;
    std::string reference;
    std::string out;
    std::string config;
};

int cmd_evolve(const EvolveArgs& a) {
    const KernelSpec k = make_kernel(a.alpha, a.beta, a.weight);
    const GridPtr grid = make_geometric_grid(a.ymin, a.ymax, a.n);
    GridFunction f0 = a.seed_csv.empty()
                          ? sample(grid, [](double y) { return std::exp(-y); })
                          : resample(load_function_csv(a.seed_csv), grid);
    EvolutionState st = make_evolution_state(std::move(f0), a.t0);

    std::optional<GridFunction> ref;
    if (!a.reference.empty()) {
        GridFunction raw = ends_with(a.reference, ".json")
                               ? load_profile(a.reference).solution.g
                               : load_function_csv(a.reference);
        ref = raw.grid->same_nodes_as(*grid) ? std::move(raw)
                                             : resample(raw, grid);
    }

    const bool autodt = a.auto_dt || !(a.dt > 0.0);
    const double t_end = a.t0 * (a.t_ratio - 1.0);
    const double t_stop = t_end * (1.0 - 1e-12);

    const auto row = [&](const EvolutionState& s) {
        char buf[192];
        const double m0 = moment(s.f, 0.0);
        const double m1 = moment(s.f, 1.0);
        if (ref) {
            const GridFunction r = rescale_to_profile_frame(s, k.lambda);
            double d = 0.0;
            for (std::size_t i = 0; i < r.size(); ++i) {
                d += grid->weight(i) * grid->node(i) *
                     std::abs(r.values[i] - ref->values[i]);
            }
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", s.t, m0,
                          m1, d);
        } else {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", s.t, m0, m1);
        }
        std::cout << buf;
    };

    std::cout << (ref ? "t,M0,M1,dist\n" : "t,M0,M1\n");
    row(st);
    std::size_t steps = 0;
    while (st.t < t_stop) {
        double dt = autodt ? a.dt_factor * stable_dt(st, k) : a.dt;
        if (!(dt > 0.0) || !std::isfinite(dt) || st.t + dt > t_end) {
            dt = t_end - st.t;
        }
        st = step(st, dt, k);
        ++steps;
        if (steps % a.print_every == 0 || !(st.t < t_stop)) {
            row(st);
        }
    }

    ProfileSolution fin;
    fin.g = rescale_to_profile_frame(st, k.lambda);
    fin.kernel = k;
    fin.iterations = steps;
    detail::finalize_solution(fin);
    save_profile(a.out, fin, true);
    std::cerr << steps << " steps to t = " << st.t << "; final state in the"
              << " self-similar frame written to " << a.out << "\n";
    return 0;
}

struct FracArgs {
    std::string in;
    std::string out;
    double order = 0.0;
    std::string side = "left";
    std::string op = "integral";
};

int cmd_frac(const FracArgs& a) {
    const GridFunction f = load_function_csv(a.in);
    if (f.grid->kind() != GridKind::uniform) {
        throw GridKindError(a.in +
                            ": fractional operators need uniformly spaced nodes");
    }
    const bool left = a.side == "left";
    const bool integral = a.op == "integral";
    const GridFunction g = left ? (integral ? left_integral(f, a.order)
                                            : left_derivative(f, a.order))
                                : (integral ? right_integral(f, a.order)
                                            : right_derivative(f, a.order));
    if (a.out.empty()) {
        std::cout << function_to_csv(g);
    } else {
        save_function_csv(a.out, g);
    }
    return 0;
}

void add_kernel_options(CLI::App* cmd, double& alpha, double& beta,
                        double& weight) {
    cmd->add_option("--alpha", alpha, "Smaller kernel exponent")->required();
    cmd->add_option("--beta", beta, "Larger kernel exponent")->required();
    cmd->add_option("--weight", weight, "Kernel term weight")->capture_default_str();
}

void add_grid_options(CLI::App* cmd, double& ymin, double& ymax,
                      std::size_t& n) {
    cmd->add_option("--ymin", ymin, "Smallest grid node")->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--ymax", ymax, "Largest grid node")->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--n", n, "Number of grid nodes")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Self-similar profiles of the coagulation equation: solve, verify, "
        "evolve, and fractional-calculus utilities"};
    app.require_subcommand(1);

    SolveArgs sa;
    CLI::App* solve = app.add_subcommand(
        "solve", "Compute a self-similar profile; write it as JSON and CSV");
    solve->add_option("--config", sa.config,
                      "Key=value file of these options; command-line flags "
                      "win on conflict");
    add_kernel_options(solve, sa.alpha, sa.beta, sa.weight);
    add_grid_options(solve, sa.ymin, sa.ymax, sa.n);
    solve->add_option("--mass", sa.mass, "Target mass of the profile")->capture_default_str()
        ->check(CLI::PositiveNumber);
    solve->add_option("--tol", sa.tol, "Per-sweep relative change bar")->capture_default_str()
        ->check(CLI::PositiveNumber);
    solve->add_option("--residual-tol", sa.residual_tol,
                      "Bar for the relative equation defect")->capture_default_str()
        ->check(CLI::PositiveNumber);
    solve->add_option("--max-iter", sa.max_iter, "Sweep budget")->capture_default_str();
    solve->add_option("--damping", sa.damping,
                      "Fraction of the update mixed in per sweep")->capture_default_str();
    solve->add_option("-o,--output", sa.out, "Profile JSON path")->required();
    solve->add_option("--csv", sa.csv,
                      "Profile CSV path (default: output path with .csv)");

    VerifyArgs va;
    CLI::App* verify = app.add_subcommand(
        "verify", "Run the property checks on a stored profile");
    verify->add_option("profile", va.profile, "Profile JSON file")->required();
    verify->add_option("-o,--output", va.out,
                       "Report JSON path (default: stdout)");

    EvolveArgs ea;
    CLI::App* evolve = app.add_subcommand(
        "evolve", "Run the time-dependent equation and report the approach "
                  "to self-similar form");
    evolve->add_option("--config", ea.config,
                       "Key=value file of these options; command-line flags "
                       "win on conflict");
    add_kernel_options(evolve, ea.alpha, ea.beta, ea.weight);
    add_grid_options(evolve, ea.ymin, ea.ymax, ea.n);
    evolve->add_option("--t0", ea.t0, "Time offset of the scaling frame")->capture_default_str()
        ->check(CLI::PositiveNumber);
    evolve->add_option("--t-ratio", ea.t_ratio,
                       "Run until (t0 + t)/t0 reaches this")->capture_default_str()
        ->check(CLI::PositiveNumber);
    CLI::Option* dt_opt =
        evolve->add_option("--dt", ea.dt, "Fixed time step")
            ->check(CLI::PositiveNumber);
    evolve->add_flag("--auto-dt", ea.auto_dt,
                     "Choose the step from the stability bound each step "
                     "(default when --dt is absent)")
        ->excludes(dt_opt);
    evolve->add_option("--dt-factor", ea.dt_factor,
                       "Fraction of the stable step used by --auto-dt")->capture_default_str()
        ->check(CLI::PositiveNumber);
    evolve->add_option("--print-every", ea.print_every,
                       "Emit every k-th trajectory row")->capture_default_str()
        ->check(CLI::PositiveNumber);
    evolve->add_option("--seed-csv", ea.seed_csv,
                       "Initial density as CSV (default: exp(-y))");
    evolve->add_option("--reference", ea.reference,
                       "Profile JSON or CSV; adds a rescaled-distance column");
    evolve->add_option("-o,--output", ea.out, "Final-state JSON path")
        ->required();

    FracArgs fa;
    CLI::App* frac = app.add_subcommand(
        "frac", "Fractional integral or derivative of a sampled function");
    frac->add_option("input", fa.in, "Input CSV on a uniform grid")->required();
    frac->add_option("--order", fa.order, "Operator order k >= 0")
        ->required()
        ->check(CLI::NonNegativeNumber);
    frac->add_option("--side", fa.side, "left or right operator")->capture_default_str()
        ->check(CLI::IsMember({"left", "right"}));
    frac->add_option("--op", fa.op, "integral or derivative")->capture_default_str()
        ->check(CLI::IsMember({"integral", "derivative"}));
    frac->add_option("-o,--output", fa.out, "Output CSV path (default: stdout)");

    // A value both in the config file and on the command line resolves to
    // the command-line one: the file's tokens are spliced in first and every
    // option keeps its last occurrence.
    for (CLI::App* cmd : {solve, verify, evolve, frac}) {
        for (CLI::Option* o : cmd->get_options()) {
            if (o->nonpositional()) {
                o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
            }
        }
    }

    std::vector<std::string> args;
    try {
        args = with_config_expanded(argc, argv);
    } catch (const FormatError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    std::reverse(args.begin(), args.end());

    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    std::function<int()> body;
    if (*solve) {
        body = [&] { return cmd_solve(sa); };
    } else if (*verify) {
        body = [&] { return cmd_verify(va); };
    } else if (*evolve) {
        body = [&] { return cmd_evolve(ea); };
    } else {
        body = [&] { return cmd_frac(fa); };
    }

    try {
        return body();
    } catch (const FormatError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::out_of_range& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
}
