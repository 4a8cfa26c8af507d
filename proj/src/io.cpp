#include "coagprof/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include "json.hpp"

namespace coagprof {

namespace {

using nlohmann::json;

// On-grid value of a headline moment, from the solution's own table when the
// exponent is there, recomputed otherwise.
double stored_moment(const ProfileSolution& sol, double e) {
    const auto it = sol.moments.find(e);
    if (it != sol.moments.end()) {
        return it->second.first;
    }
    return moment(sol.g, e);
}

std::string read_whole_file(const std::string& path, const char* what_for) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError(std::string("cannot read ") + what_for + " file " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_whole_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) {
        throw FormatError("cannot write file " + path);
    }
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string profile_to_json(const ProfileSolution& sol, bool converged) {
    const KernelSpec& k = sol.kernel;
    const Grid& gr = *sol.g.grid;

    json terms = json::array();
    for (const KernelTerm& t : k.terms) {
        terms.push_back({{"alpha", t.alpha}, {"beta", t.beta}, {"weight", t.weight}});
    }

    json j;
    j["spec_version"] = 1;
    j["kernel"] = {{"terms", terms}};
    j["grid"] = {
        {"kind", gr.kind() == GridKind::geometric ? "geometric" : "uniform"},
        {"ymin", gr.y_min()},
        {"ymax", gr.y_max()},
        {"n", gr.size()},
    };
    j["values"] = sol.g.values;
    // The headline moments under role names; exponents of the leading kernel
    // term for "alpha" and "beta".
    j["moments"] = {
        {"1", stored_moment(sol, 1.0)},
        {"lambda", stored_moment(sol, k.lambda)},
        {"alpha", stored_moment(sol, k.terms.front().alpha)},
        {"beta", stored_moment(sol, k.terms.front().beta)},
    };
    if (k.cls == KernelClass::alpha_zero) {
        j["tau"] = sol.tau;
        j["K0"] = sol.K0;
    } else if (k.cls == KernelClass::alpha_neg) {
        j["K0"] = sol.K0;
    }
    j["residual"] = sol.residual;
    j["converged"] = converged;
    j["iterations"] = sol.iterations;
    return j.dump(2) + "\n";
}

StoredProfile profile_from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        if (!j.contains("spec_version") || j.at("spec_version").get<int>() != 1) {
            throw FormatError("profile JSON has no supported spec_version");
        }

        std::vector<KernelTerm> terms;
        for (const json& t : j.at("kernel").at("terms")) {
            terms.push_back({t.at("alpha").get<double>(), t.at("beta").get<double>(),
                             t.at("weight").get<double>()});
        }
        KernelSpec kernel = make_kernel(std::move(terms));

        const json& jg = j.at("grid");
        const std::string kind = jg.at("kind").get<std::string>();
        const double ymin = jg.at("ymin").get<double>();
        const double ymax = jg.at("ymax").get<double>();
        const std::size_t n = jg.at("n").get<std::size_t>();
        GridPtr grid;
        if (kind == "geometric") {
            grid = make_geometric_grid(ymin, ymax, n);
        } else if (kind == "uniform") {
            grid = make_uniform_grid(ymax, n);
            if (!(std::abs(grid->y_min() - ymin) <= 1e-9 * ymax)) {
                throw FormatError("uniform grid parameters are inconsistent");
            }
        } else {
            throw FormatError("unknown grid kind \"" + kind + "\"");
        }

        std::vector<double> values = j.at("values").get<std::vector<double>>();
        if (values.size() != n) {
            throw FormatError("profile stores " + std::to_string(values.size()) +
                              " values on a grid of " + std::to_string(n) + " nodes");
        }
        for (double v : values) {
            if (!std::isfinite(v)) {
                throw FormatError("profile values contain a non-finite entry");
            }
        }

        StoredProfile out;
        out.solution.g = GridFunction(grid, std::move(values));
        out.solution.kernel = std::move(kernel);
        out.solution.iterations = j.at("iterations").get<std::size_t>();
        out.converged = j.at("converged").get<bool>();
        // Diagnostics come from the samples, not from the file, so a stale
        // or edited summary field cannot survive a round trip.
        detail::finalize_solution(out.solution);
        return out;
    } catch (const json::exception& e) {
        throw FormatError(std::string("profile JSON malformed: ") + e.what());
    }
}

void save_profile(const std::string& path, const ProfileSolution& sol,
                  bool converged) {
    write_whole_file(path, profile_to_json(sol, converged));
}

StoredProfile load_profile(const std::string& path) {
    return profile_from_json(read_whole_file(path, "profile"));
}

std::string function_to_csv(const GridFunction& f) {
    std::string out = "y,g\n";
    for (std::size_t i = 0; i < f.size(); ++i) {
        out += fmt17(f.grid->node(i));
        out += ',';
        out += fmt17(f.values[i]);
        out += '\n';
    }
    return out;
}

void save_function_csv(const std::string& path, const GridFunction& f) {
    write_whole_file(path, function_to_csv(f));
}

GridFunction load_function_csv(const std::string& path) {
    const std::string text = read_whole_file(path, "CSV");
    std::istringstream in(text);
    std::string line;
    std::vector<double> ys, vs;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        double y = 0.0, v = 0.0;
        if (std::sscanf(line.c_str(), "%lf,%lf", &y, &v) != 2) {
            if (lineno == 1) {
                continue;  // header
            }
            throw FormatError(path + ":" + std::to_string(lineno) +
                              ": expected two comma-separated numbers");
        }
        ys.push_back(y);
        vs.push_back(v);
    }
    if (ys.size() < 2) {
        throw FormatError(path + ": a sampled function needs at least two rows");
    }
    for (std::size_t i = 0; i < ys.size(); ++i) {
        if (!std::isfinite(ys[i]) || !std::isfinite(vs[i]) || !(ys[i] > 0.0)) {
            throw FormatError(path + ": nodes must be positive and finite");
        }
        if (i > 0 && !(ys[i] > ys[i - 1])) {
            throw FormatError(path + ": nodes must increase");
        }
    }

    const std::size_t n = ys.size();
    const double tol = 1e-9 * ys.back();
    bool uniform = true;
    const double h = ys.front();
    for (std::size_t i = 0; i < n && uniform; ++i) {
        uniform = std::abs(ys[i] - static_cast<double>(i + 1) * h) <= tol;
    }
    if (uniform) {
        return GridFunction(make_uniform_grid(ys.back(), n), std::move(vs));
    }
    bool geometric = true;
    const double lnr = std::log(ys[1] / ys[0]);
    for (std::size_t i = 0; i < n && geometric; ++i) {
        const double yi = ys.front() * std::exp(lnr * static_cast<double>(i));
        geometric = std::abs(ys[i] - yi) <= tol + 1e-12 * yi;
    }
    if (geometric) {
        return GridFunction(make_geometric_grid(ys.front(), ys.back(), n),
                            std::move(vs));
    }
    throw GridKindError(path + ": nodes are neither uniformly nor geometrically spaced");
}

std::string report_to_json(const VerificationReport& report) {
    json checks = json::array();
    for (const Check& c : report.checks) {
        checks.push_back({
            {"name", c.name},
            {"measured", c.measured},
            {"expected", c.expected},
            {"tolerance", c.tolerance},
            {"pass", c.pass},
            {"note", c.note},
        });
    }
    json j;
    j["profile_id"] = report.profile_id;
    j["checks"] = checks;
    j["all_pass"] = report.all_pass();
    return j.dump(2) + "\n";
}

}  // namespace coagprof
