#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace supou {

/// One line of the verification report. `expected` and `observed` hold a
/// number or a label.
struct CheckResult {
    std::string check_id;
    std::string description;
    nlohmann::ordered_json expected;
    nlohmann::ordered_json observed;
    double tolerance = 0.0;
    bool pass = false;
};

struct VerifyOptions {
    double slope_tolerance = 0.05;
    double ratio_tolerance = 0.02;
    // Added to alpha when forming the expected scaling exponents.
    double alpha_perturbation = 0.0;
    std::uint64_t seed = 20240101;
    unsigned threads = 1;
    std::size_t replicas = 10000;
};

/// Runs the end-to-end checks: exact anchors, closed-form correlation,
/// cumulant and moment scaling, negative controls, formula equivalence and
/// the Monte Carlo cross-check.
std::vector<CheckResult> run_verification(const VerifyOptions& opts);

nlohmann::ordered_json to_json(const CheckResult& r);
nlohmann::ordered_json to_json(const std::vector<CheckResult>& results);
void write_report(std::ostream& os, const std::vector<CheckResult>& results);

}  // namespace supou
