#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace vfem {

struct VerifyOptions {
    std::uint64_t seed = 20240607;
    bool quick = false;   ///< smaller meshes and horizons; same tolerances
};

/// One measured quantity against its pinned bound.
struct CheckResult {
    std::string name;
    double value = 0.0;
    std::string bound;    ///< human-readable, e.g. "<= 1e-12" or "in [0.85, 1.25]"
    bool passed = false;
};

struct SuiteReport {
    std::string id;       ///< AC1 .. AC8
    std::string name;
    bool passed = false;
    double seconds = 0.0;
    std::vector<CheckResult> checks;
    std::string error;    ///< exception text when the suite threw
};

struct Suite {
    std::string id;
    std::string name;
    std::function<void(const VerifyOptions&, SuiteReport&)> run;
};

/// AC1 oracle equivalence, AC2 analytic element matrices, AC3 tensor
/// contraction oracle, AC4 Jacobian vs finite differences, AC5 slab heating
/// at desk scale, AC6 convergence rates, AC7 scaling shape, AC8 invariants.
const std::vector<Suite>& acceptance_suites();

/// Runs one suite; exceptions become a failed report.
SuiteReport run_suite(const Suite& suite, const VerifyOptions& opts);

/// One line per suite, then one indented line per check.
void print_report(const SuiteReport& report, std::ostream& os, bool details = true);

/// Runs the suites whose id is in `only` (all when empty).
std::vector<SuiteReport> run_verify(const VerifyOptions& opts, std::ostream& os,
                                    const std::vector<std::string>& only = {}, bool details = true);

} // namespace vfem
