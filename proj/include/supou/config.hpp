#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "supou/cumulant_engine.hpp"
#include "supou/marginal.hpp"
#include "supou/mixing.hpp"
#include "supou/scaling.hpp"
#include "supou/simulate.hpp"

namespace supou {

/// One recognised configuration key.
struct ConfigKey {
    std::string key;
    nlohmann::ordered_json default_value;  // null when the key has no default
    std::string description;
};

/// Every key the configuration format accepts, in display order.
const std::vector<ConfigKey>& config_schema();

/// Flat dotted-key view of a configuration. Values are JSON scalars or arrays.
using FlatConfig = std::map<std::string, nlohmann::ordered_json>;

/// Parses either a JSON document (nested objects are flattened to dotted
/// keys) or "key = value" lines with '#' comments, where each value is read
/// as JSON when possible and as a bare string otherwise.
FlatConfig parse_config_text(const std::string& text);
FlatConfig load_config_file(const std::string& path);

/// Schema defaults overlaid with `overrides`. Unknown keys raise ConfigError.
FlatConfig effective_config(const FlatConfig& overrides);

void write_flat_config(std::ostream& os, const FlatConfig& cfg);
nlohmann::ordered_json nested_config(const FlatConfig& cfg);

/// Fully validated settings for every subcommand.
struct RunConfig {
    MixingMeasure mixing = MixingMeasure::gamma(0.6);
    MarginalLaw marginal = MarginalLaw::inverse_gaussian(1.0, 1.0, true);
    AggregateKind kind = AggregateKind::Integrated;
    std::vector<unsigned> orders;
    std::vector<unsigned> exponents;  // even q for the moment route; empty = {q*, q*+2}
    std::vector<double> grid;
    FitWindow window;
    std::vector<double> taus;
    bool cross_form = false;
    double slope_tolerance = kDefaultSlopeTolerance;
    double ratio_tolerance = kDefaultRatioTolerance;
    SimConfig sim;
    std::vector<double> sim_times;
    std::vector<unsigned> sim_orders;
    bool raw_paths = false;
    double sim_lag = 1.0;
    double verify_alpha_perturbation = 0.0;
    unsigned threads = 1;
};

/// Builds and validates a RunConfig; every problem is reported as ConfigError.
RunConfig build_run_config(const FlatConfig& effective);

MixingMeasure build_mixing(const FlatConfig& effective);
MarginalLaw build_marginal(const FlatConfig& effective);

}  // namespace supou
