#pragma once

#include <functional>
#include <string>
#include <vector>

namespace qbl {

// quick caps Monte Carlo sizes at 1e5 samples / 50 replicates; full runs the
// acceptance-criteria sizes.
enum class VerifyLevel { quick, full };

struct CheckResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct Check {
    std::string name;
    bool acceptance = false;  // acceptance criteria vs supporting invariants
    std::function<CheckResult(VerifyLevel)> run;
};

const std::vector<Check>& verification_checks();

// Runs checks in registry order; a check that throws is reported as FAIL
// with the exception text.
std::vector<CheckResult> run_verification(VerifyLevel level, bool acceptance_only = false);

// "PASS|FAIL name measured threshold"
std::string format_check_line(const CheckResult& result);

}  // namespace qbl
