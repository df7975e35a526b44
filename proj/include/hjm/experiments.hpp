#pragma once

#include "hjm/scenario.hpp"

#include <string>
#include <vector>

namespace hjm {

// One measured quantity compared against its tolerance.  The report stores
// both numbers and the comparator, so a verdict can be re-derived from the
// serialized form alone.
struct CheckResult {
    std::string name;
    double measured = 0;
    double tolerance = 0;
    std::string comparator = "<=";
    bool pass = false;
};

struct Report {
    std::string experiment;
    std::string status;  // "pass", "fail", or "hypothesis_violated"
    nlohmann::json scenario_echo;
    nlohmann::json diagnostics;
    std::vector<CheckResult> checks;
    double seconds = 0;

    bool passed() const { return status == "pass"; }
    nlohmann::json to_json() const;
};

// Dispatch on scenario.experiment.  A violated standing hypothesis comes back
// as a report with status "hypothesis_violated", not as an exception: it is a
// legitimate outcome of an experiment.
Report run_scenario(const Scenario& s);

Report run_restrict_check(const Scenario& s);
Report run_extend_check(const Scenario& s);
Report run_invariance_report(const Scenario& s);
Report run_chart_equivalence(const Scenario& s);
Report run_convergence(const Scenario& s);

// 0 = all checks pass, 1 = some check failed, 2 = hypothesis violated.
int exit_code_for(const Report& r);

}  // namespace hjm
