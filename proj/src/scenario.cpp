#include "hjm/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace hjm {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

const json& require(const json& doc, const char* key) {
    if (!doc.is_object() || !doc.contains(key))
        fail(std::string("scenario needs \"") + key + "\"");
    return doc.at(key);
}

double as_number(const json& j, const char* what) {
    if (!j.is_number()) fail(std::string(what) + " must be a number");
    return j.get<double>();
}

int as_int(const json& j, const char* what) {
    if (!j.is_number_integer()) fail(std::string(what) + " must be an integer");
    return j.get<int>();
}

std::string as_string(const json& j, const char* what) {
    if (!j.is_string()) fail(std::string(what) + " must be a string");
    return j.get<std::string>();
}

// "name(1,0.5)" -> {"name", {1.0, 0.5}}; bare "name" has no arguments.
struct CatalogSpec {
    std::string head;
    std::vector<double> args;
};

CatalogSpec parse_spec(const std::string& text) {
    CatalogSpec out;
    const auto open = text.find('(');
    if (open == std::string::npos) {
        out.head = text;
        return out;
    }
    if (text.empty() || text.back() != ')')
        fail("malformed catalog name \"" + text + "\"");
    out.head = text.substr(0, open);
    std::string body = text.substr(open + 1, text.size() - open - 2);
    std::stringstream ss(body);
    std::string piece;
    while (std::getline(ss, piece, ',')) {
        try {
            size_t used = 0;
            out.args.push_back(std::stod(piece, &used));
            while (used < piece.size() && std::isspace(static_cast<unsigned char>(piece[used])))
                ++used;
            if (used != piece.size()) throw std::invalid_argument(piece);
        } catch (const std::exception&) {
            fail("bad argument \"" + piece + "\" in catalog name \"" + text + "\"");
        }
    }
    if (!body.empty() && body.back() == ',') fail("trailing comma in \"" + text + "\"");
    return out;
}

void need_args(const CatalogSpec& s, size_t n) {
    if (s.args.size() != n)
        fail("\"" + s.head + "\" takes " + std::to_string(n) + " argument(s), got " +
             std::to_string(s.args.size()));
}

GridAxis axis_from_json(const json& j) {
    if (!j.is_object()) fail("grid axis must be an object");
    const int n = as_int(require(j, "n"), "axis n");
    if (j.contains("period")) {
        const double period = as_number(j.at("period"), "axis period");
        if (!(period > 0)) fail("axis period must be positive");
        if (n < 3) fail("axis needs at least three nodes");
        return make_axis(0.0, period - period / n, n, true);
    }
    const double min = as_number(require(j, "min"), "axis min");
    const double max = as_number(require(j, "max"), "axis max");
    const bool periodic = j.value("periodic", false);
    return make_axis(min, max, n, periodic);
}

Grid grid_from_json(const json& j, const char* what) {
    if (!j.is_object() || !j.contains("axes") || !j.at("axes").is_array() ||
        j.at("axes").empty())
        fail(std::string(what) + " needs a non-empty \"axes\" array");
    Grid g;
    for (const auto& a : j.at("axes")) g.axes.push_back(axis_from_json(a));
    return g;
}

std::shared_ptr<const Submanifold> manifold_from_json(const json& j) {
    if (!j.is_object()) fail("\"manifold\" must be an object");
    std::optional<double> theta;
    if (j.contains("theta")) theta = as_number(j.at("theta"), "manifold theta");
    if (j.contains("catalog"))
        return make_catalog_manifold(as_string(j.at("catalog"), "manifold catalog"), theta);
    if (j.contains("constraint")) {
        const int d = as_int(require(j, "ambient_dim"), "ambient_dim");
        if (d < 1) fail("ambient_dim must be positive");
        std::vector<std::string> rows;
        const json& c = j.at("constraint");
        if (c.is_string())
            rows.push_back(c.get<std::string>());
        else if (c.is_array())
            for (const auto& r : c) rows.push_back(as_string(r, "constraint row"));
        else
            fail("\"constraint\" must be a string or an array of strings");
        if (rows.empty() || static_cast<int>(rows.size()) >= d)
            fail("constraint count must be between 1 and ambient_dim - 1");
        std::vector<std::function<double(const Vec&)>> fns;
        for (const auto& r : rows) fns.push_back(make_expression_scalar_field(r, d));
        ImplicitRep rep;
        rep.constraint = [fns](const Vec& x) {
            Vec out(static_cast<int>(fns.size()));
            for (size_t i = 0; i < fns.size(); ++i) out[static_cast<int>(i)] = fns[i](x);
            return out;
        };
        const int m = d - static_cast<int>(rows.size());
        auto M = std::make_shared<Submanifold>(
            d, m, theta.value_or(std::numeric_limits<double>::infinity()), rep);
        if (j.contains("sample_box")) {
            const json& b = j.at("sample_box");
            if (!b.is_array() || b.size() != 2) fail("sample_box must be [lo, hi]");
            Vec lo(d), hi(d);
            for (int i = 0; i < d; ++i) {
                lo[i] = as_number(b.at(0).at(i), "sample_box lo");
                hi[i] = as_number(b.at(1).at(i), "sample_box hi");
            }
            M->set_sample_box(lo, hi);
        }
        M->name = "constraint";
        return M;
    }
    fail("\"manifold\" needs \"catalog\" or \"constraint\"");
}

HamiltonianField hamiltonian_from_json(const json& j,
                                       const std::shared_ptr<const Submanifold>& M) {
    if (!j.is_object()) fail("\"hamiltonian\" must be an object");
    if (j.contains("catalog"))
        return make_catalog_hamiltonian(as_string(j.at("catalog"), "hamiltonian catalog"), M);
    if (j.contains("expression")) {
        const int d = as_int(require(j, "dim"), "hamiltonian dim");
        if (d < 1) fail("hamiltonian dim must be positive");
        return make_expression_hamiltonian(as_string(j.at("expression"), "hamiltonian"), d);
    }
    fail("\"hamiltonian\" needs \"catalog\" or \"expression\"");
}

}  // namespace

double Scenario::tol(const std::string& key, double fallback) const {
    auto it = tolerances.find(key);
    return it == tolerances.end() ? fallback : it->second;
}

std::shared_ptr<const Submanifold> make_catalog_manifold(const std::string& spec,
                                                         std::optional<double> theta) {
    const CatalogSpec s = parse_spec(spec);
    const double th = theta.value_or(std::numeric_limits<double>::infinity());
    if (s.head == "circle") {
        need_args(s, 1);
        return std::make_shared<const Submanifold>(make_circle(s.args[0], th));
    }
    if (s.head == "circle_parametric") {
        need_args(s, 1);
        return std::make_shared<const Submanifold>(make_circle_parametric(s.args[0], th));
    }
    if (s.head == "sphere") {
        need_args(s, 2);
        return std::make_shared<const Submanifold>(
            make_sphere(s.args[0], static_cast<int>(s.args[1]), th));
    }
    if (s.head == "torus") {
        need_args(s, 2);
        return std::make_shared<const Submanifold>(make_torus(s.args[0], s.args[1], th));
    }
    if (s.head == "flat") {
        need_args(s, 2);
        return std::make_shared<const Submanifold>(
            make_flat(static_cast<int>(s.args[0]), static_cast<int>(s.args[1]), th));
    }
    fail("unknown manifold \"" + spec + "\"");
}

HamiltonianField make_catalog_hamiltonian(
    const std::string& spec, const std::shared_ptr<const Submanifold>& manifold) {
    const CatalogSpec s = parse_spec(spec);
    if (s.head == "free") {
        need_args(s, 1);
        return make_free(static_cast<int>(s.args[0]));
    }
    if (s.head == "rotation") {
        need_args(s, 0);
        return make_rotation();
    }
    if (s.head == "abs") {
        need_args(s, 1);
        return make_abs(static_cast<int>(s.args[0]));
    }
    if (s.head == "transport") {
        if (s.args.empty()) fail("\"transport\" needs the velocity components");
        Vec c(static_cast<int>(s.args.size()));
        for (size_t i = 0; i < s.args.size(); ++i) c[static_cast<int>(i)] = s.args[i];
        return make_transport(c);
    }
    if (s.head == "tangent_kinetic") {
        need_args(s, 0);
        if (!manifold) fail("\"tangent_kinetic\" needs a manifold in the scenario");
        return make_tangent_kinetic(manifold);
    }
    fail("unknown hamiltonian \"" + spec + "\"");
}

Chart make_catalog_chart(const std::string& spec) {
    const CatalogSpec s = parse_spec(spec);
    if (s.head == "identity") {
        need_args(s, 1);
        return make_identity_chart(static_cast<int>(s.args[0]));
    }
    if (s.head == "rotation") {
        need_args(s, 1);
        return make_rotation_chart(s.args[0]);
    }
    fail("unknown chart \"" + spec + "\"");
}

std::vector<std::string> catalog_listing() {
    return {
        "manifold circle(r)",
        "manifold circle_parametric(r)",
        "manifold sphere(r, d)",
        "manifold torus(R, r)",
        "manifold flat(m, d)",
        "hamiltonian free(d)",
        "hamiltonian rotation",
        "hamiltonian abs(d)",
        "hamiltonian transport(c0, c1, ...)",
        "hamiltonian tangent_kinetic",
        "chart identity(d)",
        "chart rotation(angle)",
    };
}

Grid refine_grid(const Grid& g, int k) {
    if (k < 1) fail("refinement factor must be at least 1");
    if (k == 1) return g;
    Grid out;
    for (const auto& a : g.axes) {
        if (a.periodic) {
            const int n = a.n * k;
            const double period = a.period();
            out.axes.push_back(make_axis(a.min, a.min + period - period / n, n, true));
        } else {
            out.axes.push_back(make_axis(a.min, a.max, (a.n - 1) * k + 1, false));
        }
    }
    return out;
}

Scenario parse_scenario(const nlohmann::json& doc) {
    if (!doc.is_object()) fail("scenario must be a JSON object");
    Scenario s;
    s.raw = doc;
    s.name = as_string(require(doc, "name"), "name");
    s.experiment = as_string(require(doc, "experiment"), "experiment");
    static const std::vector<std::string> kinds = {
        "restrict_check", "extend_check", "invariance_report", "chart_equivalence",
        "convergence"};
    if (std::find(kinds.begin(), kinds.end(), s.experiment) == kinds.end())
        fail("unknown experiment \"" + s.experiment + "\"");

    const bool needs_manifold = s.experiment == "restrict_check" ||
                                s.experiment == "extend_check" ||
                                s.experiment == "invariance_report";
    if (needs_manifold) s.manifold = manifold_from_json(require(doc, "manifold"));
    else if (doc.contains("manifold")) s.manifold = manifold_from_json(doc.at("manifold"));

    s.hamiltonian = hamiltonian_from_json(require(doc, "hamiltonian"), s.manifold);
    if (s.manifold && s.hamiltonian->dim() != s.manifold->ambient_dim())
        fail("hamiltonian dimension does not match the manifold's ambient space");

    const bool needs_initial = s.experiment == "restrict_check" ||
                               s.experiment == "chart_equivalence" ||
                               s.experiment == "convergence";
    if (doc.contains("initial")) {
        const json& j = doc.at("initial");
        s.initial = make_expression_scalar_field(
            as_string(require(j, "expression"), "initial expression"),
            s.hamiltonian->dim());
    } else if (needs_initial) {
        fail("scenario needs \"initial\"");
    }

    if (doc.contains("reference")) {
        const json& j = doc.at("reference");
        if (j.contains("expression")) {
            s.reference_kind = "expression";
            s.reference = Expression::parse(as_string(j.at("expression"), "reference"));
        } else if (j.contains("kind")) {
            s.reference_kind = as_string(j.at("kind"), "reference kind");
            if (s.reference_kind != "shift" && s.reference_kind != "ball_min")
                fail("unknown reference kind \"" + s.reference_kind + "\"");
        } else {
            fail("\"reference\" needs \"expression\" or \"kind\"");
        }
    }

    if (doc.contains("ambient_grid"))
        s.ambient_grid = grid_from_json(doc.at("ambient_grid"), "ambient_grid");
    if (doc.contains("chart_grid"))
        s.chart_grid = grid_from_json(doc.at("chart_grid"), "chart_grid");

    if (doc.contains("chart"))
        s.chart = make_catalog_chart(
            as_string(require(doc.at("chart"), "catalog"), "chart catalog"));

    const bool needs_time = s.experiment != "invariance_report";
    if (doc.contains("time")) {
        s.t_end = as_number(require(doc.at("time"), "t_end"), "t_end");
        if (!(s.t_end > 0)) fail("t_end must be positive");
    } else if (needs_time) {
        fail("scenario needs \"time\"");
    }

    if (doc.contains("solver")) {
        const json& j = doc.at("solver");
        if (j.contains("cfl")) {
            s.solver.cfl = as_number(j.at("cfl"), "cfl");
            if (!(s.solver.cfl > 0 && s.solver.cfl <= 1)) fail("cfl must lie in (0, 1]");
        }
        if (j.contains("dt")) s.solver.dt_override = as_number(j.at("dt"), "dt");
        if (j.contains("alpha")) {
            if (!j.at("alpha").is_array()) fail("solver alpha must be an array");
            std::vector<double> a;
            for (const auto& v : j.at("alpha")) a.push_back(as_number(v, "alpha"));
            s.solver.alpha_override = a;
        }
        if (j.contains("alpha_inflation"))
            s.solver.alpha_inflation = as_number(j.at("alpha_inflation"), "alpha_inflation");
    }

    if (doc.contains("samples")) {
        const json& j = doc.at("samples");
        if (j.contains("count")) {
            s.plan.count = as_int(j.at("count"), "sample count");
            if (s.plan.count < 1) fail("sample count must be positive");
        }
        if (j.contains("seed")) s.plan.seed = static_cast<std::uint64_t>(
            as_int(j.at("seed"), "seed"));
        if (j.contains("momentum_radius"))
            s.plan.momentum_radius = as_number(j.at("momentum_radius"), "momentum_radius");
        if (j.contains("tube_radius")) {
            s.tube_radius = as_number(j.at("tube_radius"), "tube_radius");
            if (!(s.tube_radius > 0)) fail("tube_radius must be positive");
        }
        if (j.contains("times")) {
            s.time_samples = as_int(j.at("times"), "time sample count");
            if (s.time_samples < 1) fail("time sample count must be positive");
        }
    }

    if (doc.contains("extension")) {
        const json& j = doc.at("extension");
        if (j.contains("a")) {
            if (!j.at("a").is_array() || j.at("a").empty())
                fail("extension a must be a non-empty array");
            s.extension_a.clear();
            for (const auto& v : j.at("a")) s.extension_a.push_back(as_number(v, "a"));
        }
        if (j.contains("mode")) {
            s.extension_mode = as_string(j.at("mode"), "extension mode");
            if (s.extension_mode != "closure" && s.extension_mode != "grid")
                fail("extension mode must be \"closure\" or \"grid\"");
        }
    }

    if (doc.contains("tm")) {
        if (!doc.at("tm").is_boolean()) fail("\"tm\" must be a boolean");
        s.check_tm = doc.at("tm").get<bool>();
    }

    if (doc.contains("flow_drift")) {
        s.flow_drift_t_end = as_number(require(doc.at("flow_drift"), "t_end"),
                                       "flow_drift t_end");
        if (!(*s.flow_drift_t_end > 0)) fail("flow_drift t_end must be positive");
    }

    if (doc.contains("levels")) {
        s.levels = as_int(doc.at("levels"), "levels");
        if (s.levels < 2) fail("a convergence study needs at least two levels");
    }

    if (doc.contains("tolerances")) {
        const json& j = doc.at("tolerances");
        if (!j.is_object()) fail("\"tolerances\" must be an object");
        for (auto it = j.begin(); it != j.end(); ++it)
            s.tolerances[it.key()] = as_number(it.value(), "tolerance");
    }

    if (doc.contains("output")) {
        const json& j = doc.at("output");
        if (j.contains("format")) {
            s.output_format = as_string(j.at("format"), "output format");
            if (s.output_format != "json" && s.output_format != "csv")
                fail("output format must be \"json\" or \"csv\"");
        }
        if (j.contains("save_solution")) {
            if (!j.at("save_solution").is_boolean())
                fail("save_solution must be a boolean");
            s.save_solution = j.at("save_solution").get<bool>();
        }
    }

    // Per-experiment completeness, so validation catches holes before a run.
    auto need = [&](bool ok, const char* what) {
        if (!ok) fail(std::string("experiment ") + s.experiment + " needs " + what);
    };
    if (s.experiment == "restrict_check") {
        need(s.ambient_grid.has_value(), "\"ambient_grid\"");
        need(s.chart_grid.has_value(), "\"chart_grid\"");
        need(s.ambient_grid->dim() == s.hamiltonian->dim(),
             "an ambient grid matching the hamiltonian dimension");
        need(s.chart_grid->dim() == s.manifold->dim(),
             "a chart grid matching the manifold dimension");
        need(s.manifold->has_charts() || s.manifold->dim() == s.manifold->ambient_dim(),
             "a manifold with an adapted chart");
    } else if (s.experiment == "extend_check") {
        if (s.extension_mode == "closure")
            need(s.reference_kind == "expression",
                 "a closed-form \"reference\" in closure mode");
        else {
            need(s.chart_grid.has_value(), "\"chart_grid\" in grid mode");
            need(static_cast<bool>(s.initial), "\"initial\" in grid mode");
        }
    } else if (s.experiment == "chart_equivalence") {
        need(s.chart.has_value(), "\"chart\"");
        need(s.ambient_grid.has_value(), "\"ambient_grid\"");
        need(s.chart->ambient_dim == s.hamiltonian->dim(),
             "a chart matching the hamiltonian dimension");
        need(s.ambient_grid->dim() == s.hamiltonian->dim(),
             "an ambient grid matching the hamiltonian dimension");
    } else if (s.experiment == "convergence") {
        need(s.ambient_grid.has_value(), "\"ambient_grid\"");
        need(s.ambient_grid->dim() == s.hamiltonian->dim(),
             "a grid matching the hamiltonian dimension");
        need(!s.reference_kind.empty(), "a \"reference\"");
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open scenario file " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        fail("scenario file " + path + " is not valid JSON: " + e.what());
    }
    return parse_scenario(doc);
}

}  // namespace hjm
