#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace smpcfl {

struct SuiteResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Release-gate suites: exhaustive FSS comparison at k=8, Beaver identity
// sweep, share round-trips, aggregation exactness. When randomness files are
// given their triples and keys are validated instead of fresh ones.
std::vector<SuiteResult> run_selftest(const std::string& randomness_p0 = "",
                                      const std::string& randomness_p1 = "");

// Prints one line per suite; returns true when everything passed.
bool report_selftest(const std::vector<SuiteResult>& results, std::ostream& os);

} // namespace smpcfl
