#include "supou/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "supou/errors.hpp"
#include "supou/format.hpp"

namespace supou {

using ojson = nlohmann::ordered_json;

const std::vector<ConfigKey>& config_schema() {
    static const std::vector<ConfigKey> schema = {
        {"mixing.kind", "gamma", "degenerate | discrete | power_law | gamma | mittag_leffler"},
        {"mixing.alpha", 0.6, "gamma, mittag_leffler: r(tau) = (1+tau)^-alpha or 1/(1+tau^alpha)"},
        {"mixing.rate", 1.0, "degenerate: the single OU rate"},
        {"mixing.rates", nullptr, "discrete: list of atom rates"},
        {"mixing.weights", nullptr, "discrete: list of atom probabilities summing to 1"},
        {"mixing.lambda", 1.0, "power_law: atoms at lambda/k"},
        {"mixing.exponent", 0.6, "power_law: weights proportional to k^-(1+exponent)"},
        {"mixing.max_atoms", 1000, "power_law: largest number of atoms kept"},
        {"marginal.kind", "inverse_gaussian",
         "gaussian | gamma | inverse_gaussian | nig | cp_exponential | cp_deterministic"},
        {"marginal.centered", true, "subtract the mean from the marginal law (gaussian is always centered)"},
        {"marginal.variance", 1.0, "gaussian"},
        {"marginal.shape", 1.0, "gamma"},
        {"marginal.rate", 1.0, "gamma"},
        {"marginal.delta", 1.0, "inverse_gaussian, nig"},
        {"marginal.gamma", 1.0, "inverse_gaussian"},
        {"marginal.alpha", 2.0, "nig: tail parameter, |beta| < alpha"},
        {"marginal.beta", 0.0, "nig: skewness"},
        {"marginal.mu", 0.0, "nig: location"},
        {"marginal.intensity", 1.0, "cp_exponential, cp_deterministic: BDLP jump intensity"},
        {"marginal.jump_rate", 1.0, "cp_exponential: Exp(jump_rate) jumps"},
        {"marginal.jump_size", 1.0, "cp_deterministic: jump size"},
        {"aggregate.kind", "integrated", "integrated | partial_sum"},
        {"orders", ojson::array({1, 2, 3, 4, 5}), "cumulant orders m"},
        {"exponents", ojson::array(), "even moment exponents q; empty means {q*, q*+2}"},
        {"grid.t_min", 1e3, "smallest t of the log-spaced grid"},
        {"grid.t_max", 1e6, "largest t of the log-spaced grid"},
        {"grid.count", 25, "number of grid points"},
        {"window.t_min", 1e3, "lower end of the scaling fit window"},
        {"window.t_max", 1e6, "upper end of the scaling fit window"},
        {"correlation.tau_min", 1e-2, "smallest positive lag"},
        {"correlation.tau_max", 1e3, "largest lag"},
        {"correlation.count", 50, "number of log-spaced positive lags"},
        {"correlation.include_zero", true, "prepend the lag 0 row"},
        {"cross_form", false, "recompute factors with the alternate formula and report the discrepancy"},
        {"tolerance.slope", kDefaultSlopeTolerance, "allowed |fitted - theoretical| exponent difference"},
        {"tolerance.ratio", kDefaultRatioTolerance, "tolerance on tau(q)/q in the intermittency test"},
        {"sim.horizon", 50.0, "simulated horizon T"},
        {"sim.step", 0.1, "skeleton step; 1/step must be an integer for partial sums"},
        {"sim.replicas", 10000, "number of independent replicas"},
        {"sim.truncation", 0, "mixing atoms kept; 0 drops at most 0.1% of the weight"},
        {"sim.times", ojson::array({10, 50}), "aggregate times at which cumulants are estimated"},
        {"sim.orders", ojson::array({1, 2, 3, 4}), "k-statistic orders (1..4)"},
        {"sim.raw_paths", false, "also write every simulated path (replicas x steps rows)"},
        {"sim.lag", 1.0, "lag of the reported autocorrelation"},
        {"seed", 20240101, "base seed of the replica streams"},
        {"threads", 1, "worker threads"},
        {"verify.alpha_perturbation", 0.0, "added to alpha in the expected scaling exponents (negative control)"},
    };
    return schema;
}

namespace {

const ConfigKey* find_key(const std::string& key) {
    for (const auto& k : config_schema())
        if (k.key == key) return &k;
    return nullptr;
}

void flatten(const ojson& j, const std::string& prefix, FlatConfig& out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
        return;
    }
    out[prefix] = j;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

const std::map<std::string, std::set<std::string>>& mixing_params() {
    static const std::map<std::string, std::set<std::string>> m = {
        {"degenerate", {"rate"}},
        {"discrete", {"rates", "weights"}},
        {"power_law", {"lambda", "exponent", "max_atoms"}},
        {"gamma", {"alpha"}},
        {"mittag_leffler", {"alpha"}},
    };
    return m;
}

const std::map<std::string, std::set<std::string>>& marginal_params() {
    static const std::map<std::string, std::set<std::string>> m = {
        {"gaussian", {"variance", "centered"}},
        {"gamma", {"shape", "rate", "centered"}},
        {"inverse_gaussian", {"delta", "gamma", "centered"}},
        {"nig", {"alpha", "beta", "delta", "mu", "centered"}},
        {"cp_exponential", {"intensity", "jump_rate", "centered"}},
        {"cp_deterministic", {"intensity", "jump_size", "centered"}},
    };
    return m;
}

[[noreturn]] void reject_student() {
    throw ConfigError(
        "marginal kind 'student' is not supported: the cumulant function of a supOU marginal must be analytic "
        "in a neighbourhood of the origin, and the Student t law has only finitely many moments");
}

double get_double(const FlatConfig& c, const std::string& key) {
    const auto it = c.find(key);
    if (it == c.end() || it->second.is_null()) throw ConfigError("missing value for '" + key + "'");
    if (!it->second.is_number()) throw ConfigError("'" + key + "' must be a number");
    const double v = it->second.get<double>();
    if (!std::isfinite(v)) throw ConfigError("'" + key + "' must be finite");
    return v;
}

long long get_integer(const FlatConfig& c, const std::string& key) {
    const double v = get_double(c, key);
    if (v != std::floor(v)) throw ConfigError("'" + key + "' must be an integer");
    return static_cast<long long>(v);
}

std::size_t get_count(const FlatConfig& c, const std::string& key) {
    const long long v = get_integer(c, key);
    if (v < 0) throw ConfigError("'" + key + "' must be nonnegative");
    return static_cast<std::size_t>(v);
}

bool get_bool(const FlatConfig& c, const std::string& key) {
    const auto& v = c.at(key);
    if (!v.is_boolean()) throw ConfigError("'" + key + "' must be true or false");
    return v.get<bool>();
}

std::string get_string(const FlatConfig& c, const std::string& key) {
    const auto& v = c.at(key);
    if (!v.is_string()) throw ConfigError("'" + key + "' must be a string");
    return v.get<std::string>();
}

std::vector<double> get_doubles(const FlatConfig& c, const std::string& key) {
    const auto it = c.find(key);
    if (it == c.end() || it->second.is_null()) throw ConfigError("missing value for '" + key + "'");
    const auto& v = it->second;
    std::vector<double> out;
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ConfigError("'" + key + "' must be a list of numbers");
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError("'" + key + "' must be a list of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

std::vector<unsigned> get_naturals(const FlatConfig& c, const std::string& key) {
    std::vector<unsigned> out;
    for (double d : get_doubles(c, key)) {
        if (!(d >= 1.0) || d != std::floor(d) || d > 1000.0)
            throw ConfigError("'" + key + "' must list positive integers");
        out.push_back(static_cast<unsigned>(d));
    }
    return out;
}

template <class F>
auto wrap(const std::string& what, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

}  // namespace

FlatConfig parse_config_text(const std::string& text) {
    FlatConfig out;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        ojson j;
        try {
            j = ojson::parse(text);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("malformed JSON configuration: ") + e.what());
        }
        flatten(j, "", out);
        return out;
    }
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("configuration line " + std::to_string(number) + " is not 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string raw = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("configuration line " + std::to_string(number) + " has an empty key");
        if (out.count(key)) throw ConfigError("duplicate configuration key '" + key + "'");
        ojson value = ojson::parse(raw, nullptr, false);
        if (value.is_discarded()) value = raw;
        out[key] = value;
    }
    return out;
}

FlatConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read configuration file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

FlatConfig effective_config(const FlatConfig& overrides) {
    for (const auto& [key, value] : overrides) {
        if (!find_key(key)) throw ConfigError("unknown configuration key '" + key + "'");
    }
    // kind-specific parameters must match the selected kind
    auto check_params = [&overrides](const std::string& section,
                                     const std::map<std::string, std::set<std::string>>& table,
                                     const std::string& kind) {
        const auto it = table.find(kind);
        if (it == table.end()) return;
        for (const auto& [key, value] : overrides) {
            if (key.rfind(section + ".", 0) != 0 || key == section + ".kind") continue;
            const std::string param = key.substr(section.size() + 1);
            if (!it->second.count(param))
                throw ConfigError("'" + key + "' does not apply to " + section + " kind '" + kind + "'");
        }
    };
    FlatConfig eff;
    for (const auto& k : config_schema()) eff[k.key] = k.default_value;
    for (const auto& [key, value] : overrides) eff[key] = value;
    // drop the defaults of parameters that belong to other kinds, so the
    // effective view lists only what is in force
    auto prune = [&eff](const std::string& section, const std::map<std::string, std::set<std::string>>& table,
                        const std::string& kind) {
        const auto it = table.find(kind);
        if (it == table.end()) return;
        for (auto e = eff.begin(); e != eff.end();) {
            const bool in_section = e->first.rfind(section + ".", 0) == 0 && e->first != section + ".kind";
            if (in_section && !it->second.count(e->first.substr(section.size() + 1)))
                e = eff.erase(e);
            else
                ++e;
        }
    };
    if (eff["mixing.kind"].is_string()) {
        const auto kind = eff["mixing.kind"].get<std::string>();
        check_params("mixing", mixing_params(), kind);
        prune("mixing", mixing_params(), kind);
    }
    if (eff["marginal.kind"].is_string()) {
        const auto kind = eff["marginal.kind"].get<std::string>();
        if (kind == "student" || kind == "student_t") reject_student();
        check_params("marginal", marginal_params(), kind);
        prune("marginal", marginal_params(), kind);
    }
    return eff;
}

void write_flat_config(std::ostream& os, const FlatConfig& cfg) {
    for (const auto& k : config_schema()) {
        const auto it = cfg.find(k.key);
        if (it == cfg.end()) continue;
        os << k.key << " = " << it->second.dump() << "  # " << k.description << '\n';
    }
}

ojson nested_config(const FlatConfig& cfg) {
    ojson out = ojson::object();
    for (const auto& k : config_schema()) {
        const auto it = cfg.find(k.key);
        if (it == cfg.end()) continue;
        ojson* node = &out;
        std::string rest = k.key;
        for (auto dot = rest.find('.'); dot != std::string::npos; dot = rest.find('.')) {
            node = &(*node)[rest.substr(0, dot)];
            rest = rest.substr(dot + 1);
        }
        (*node)[rest] = it->second;
    }
    return out;
}

MixingMeasure build_mixing(const FlatConfig& c) {
    const std::string kind = get_string(c, "mixing.kind");
    return wrap("mixing", [&]() -> MixingMeasure {
        if (kind == "degenerate") return MixingMeasure::degenerate(get_double(c, "mixing.rate"));
        if (kind == "discrete")
            return MixingMeasure::discrete(get_doubles(c, "mixing.rates"), get_doubles(c, "mixing.weights"));
        if (kind == "power_law")
            return MixingMeasure::discrete_power_law(get_double(c, "mixing.lambda"), get_double(c, "mixing.exponent"),
                                                     get_count(c, "mixing.max_atoms"));
        if (kind == "gamma") return MixingMeasure::gamma(get_double(c, "mixing.alpha"));
        if (kind == "mittag_leffler") return MixingMeasure::mittag_leffler(get_double(c, "mixing.alpha"));
        throw ConfigError("unknown mixing kind '" + kind +
                          "' (expected degenerate, discrete, power_law, gamma or mittag_leffler)");
    });
}

MarginalLaw build_marginal(const FlatConfig& c) {
    const std::string kind = get_string(c, "marginal.kind");
    if (kind == "student" || kind == "student_t") reject_student();
    const bool centered = get_bool(c, "marginal.centered");
    return wrap("marginal", [&]() -> MarginalLaw {
        if (kind == "gaussian") return MarginalLaw::gaussian(get_double(c, "marginal.variance"));
        if (kind == "gamma")
            return MarginalLaw::gamma(get_double(c, "marginal.shape"), get_double(c, "marginal.rate"), centered);
        if (kind == "inverse_gaussian")
            return MarginalLaw::inverse_gaussian(get_double(c, "marginal.delta"), get_double(c, "marginal.gamma"),
                                                 centered);
        if (kind == "nig")
            return MarginalLaw::nig(get_double(c, "marginal.alpha"), get_double(c, "marginal.beta"),
                                    get_double(c, "marginal.delta"), get_double(c, "marginal.mu"), centered);
        if (kind == "cp_exponential")
            return MarginalLaw::compound_poisson_exponential(get_double(c, "marginal.intensity"),
                                                             get_double(c, "marginal.jump_rate"), centered);
        if (kind == "cp_deterministic")
            return MarginalLaw::compound_poisson_deterministic(get_double(c, "marginal.intensity"),
                                                               get_double(c, "marginal.jump_size"), centered);
        throw ConfigError("unknown marginal kind '" + kind +
                          "' (expected gaussian, gamma, inverse_gaussian, nig, cp_exponential or cp_deterministic)");
    });
}

RunConfig build_run_config(const FlatConfig& c) {
    RunConfig rc;
    rc.mixing = build_mixing(c);
    rc.marginal = build_marginal(c);
    rc.kind = parse_aggregate_kind(get_string(c, "aggregate.kind"));
    rc.orders = get_naturals(c, "orders");
    if (rc.orders.empty()) throw ConfigError("'orders' must not be empty");
    for (unsigned m : rc.orders)
        if (m > 40) throw ConfigError("cumulant orders above 40 are not supported");
    for (double q : get_doubles(c, "exponents")) {
        if (!(q >= 2.0) || q != std::floor(q) || static_cast<long long>(q) % 2 != 0 || q > 40.0)
            throw ConfigError("'exponents' must list even integers between 2 and 40");
        rc.exponents.push_back(static_cast<unsigned>(q));
    }
    rc.grid = wrap("grid", [&] {
        return log_spaced(get_double(c, "grid.t_min"), get_double(c, "grid.t_max"), get_count(c, "grid.count"));
    });
    if (rc.kind == AggregateKind::PartialSum && rc.grid.front() < 1.0)
        throw ConfigError("partial sums need grid.t_min >= 1");
    rc.window.t_min = get_double(c, "window.t_min");
    rc.window.t_max = get_double(c, "window.t_max");
    if (!(rc.window.t_min > 0.0) || !(rc.window.t_max > rc.window.t_min))
        throw ConfigError("window needs 0 < t_min < t_max");
    rc.taus = wrap("correlation", [&] {
        return log_spaced(get_double(c, "correlation.tau_min"), get_double(c, "correlation.tau_max"),
                          get_count(c, "correlation.count"));
    });
    if (get_bool(c, "correlation.include_zero")) rc.taus.insert(rc.taus.begin(), 0.0);
    rc.cross_form = get_bool(c, "cross_form");
    rc.slope_tolerance = get_double(c, "tolerance.slope");
    rc.ratio_tolerance = get_double(c, "tolerance.ratio");
    if (!(rc.slope_tolerance > 0.0) || !(rc.ratio_tolerance > 0.0))
        throw ConfigError("tolerances must be positive");

    rc.sim.mixing = rc.mixing;
    rc.sim.marginal = rc.marginal;
    rc.sim.horizon = get_double(c, "sim.horizon");
    rc.sim.step = get_double(c, "sim.step");
    rc.sim.replicas = get_count(c, "sim.replicas");
    rc.sim.truncation = get_count(c, "sim.truncation");
    const long long seed = get_integer(c, "seed");
    if (seed < 0) throw ConfigError("'seed' must be nonnegative");
    rc.sim.seed = static_cast<std::uint64_t>(seed);
    rc.sim_times = get_doubles(c, "sim.times");
    rc.sim_orders = get_naturals(c, "sim.orders");
    rc.raw_paths = get_bool(c, "sim.raw_paths");
    rc.sim_lag = get_double(c, "sim.lag");
    const long long threads = get_integer(c, "threads");
    if (threads < 1) throw ConfigError("'threads' must be at least 1");
    rc.threads = static_cast<unsigned>(threads);
    rc.sim.threads = rc.threads;
    rc.verify_alpha_perturbation = get_double(c, "verify.alpha_perturbation");
    return rc;
}

}  // namespace supou
