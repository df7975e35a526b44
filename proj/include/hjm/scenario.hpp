#pragma once

#include "hjm/catalog.hpp"
#include "hjm/expression.hpp"
#include "hjm/grid.hpp"
#include "hjm/solver.hpp"

#include "json.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hjm {

// A fully materialized experiment description.  parse_scenario checks the
// document shape, resolves catalog names, and compiles expressions, so a
// scenario that parses is ready to run.  The raw document is kept verbatim
// for echoing into reports.
struct Scenario {
    std::string name;
    std::string experiment;
    nlohmann::json raw;

    std::shared_ptr<const Submanifold> manifold;  // null when not required
    std::optional<HamiltonianField> hamiltonian;
    std::function<double(const Vec&)> initial;    // empty when not required
    std::optional<Chart> chart;                   // chart_equivalence only

    // Reference solution: an expression in t and q, or a named construction
    // used by the convergence study ("shift", "ball_min").
    std::string reference_kind;
    std::optional<Expression> reference;

    std::optional<Grid> ambient_grid;
    std::optional<Grid> chart_grid;

    double t_end = 0;
    SolveOptions solver;
    SamplingPlan plan;

    double tube_radius = 0.5;
    int time_samples = 20;
    std::vector<double> extension_a = {0.0};
    std::string extension_mode = "closure";
    bool check_tm = false;
    int levels = 3;
    std::optional<double> flow_drift_t_end;  // enables the drift check when set

    std::map<std::string, double> tolerances;
    std::string output_format = "json";
    bool save_solution = false;

    double tol(const std::string& key, double fallback) const;
};

Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::string& path);

// Refinement by an integer factor: bounded axes keep both endpoints, periodic
// axes keep the period.  k = 1 returns the grid unchanged.
Grid refine_grid(const Grid& g, int k);

// Catalog name resolution, e.g. "circle(1)", "transport(1,0)", "rotation(0.5)".
// Unknown names and wrong arity raise ConfigError.
std::shared_ptr<const Submanifold> make_catalog_manifold(const std::string& spec,
                                                         std::optional<double> theta);
HamiltonianField make_catalog_hamiltonian(
    const std::string& spec, const std::shared_ptr<const Submanifold>& manifold);
Chart make_catalog_chart(const std::string& spec);

// Names and signatures of everything the three resolvers accept.
std::vector<std::string> catalog_listing();

}  // namespace hjm
