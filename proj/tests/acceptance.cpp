// Acceptance suite: runs every acceptance criterion at full size and prints
// one PASS/FAIL line per criterion. Exits nonzero if any criterion fails.

#include <cstdio>

#include "qbl/verify.hpp"

int main() {
    const auto results = qbl::run_verification(qbl::VerifyLevel::full, /*acceptance_only=*/true);
    int failures = 0;
    for (const qbl::CheckResult& result : results) {
        std::printf("%s\n", qbl::format_check_line(result).c_str());
        if (!result.pass) {
            if (!result.detail.empty()) std::printf("#   %s\n", result.detail.c_str());
            ++failures;
        }
    }
    if (failures > 0) {
        std::printf("acceptance: %d of %zu criteria failed\n", failures, results.size());
        return 1;
    }
    std::printf("acceptance: all %zu criteria passed\n", results.size());
    return 0;
}
