#include "supou/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "supou/config.hpp"
#include "supou/errors.hpp"
#include "supou/format.hpp"
#include "supou/verify.hpp"

namespace supou {
namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

enum class Format { Csv, Json };

struct Globals {
    std::string config_path;
    std::string out_dir;
    std::optional<long long> seed;
    std::optional<int> threads;
    std::string format = "csv";
};

// Writes named artifacts either into the output directory or, one after the
// other, onto stdout.
class Sink {
public:
    Sink(std::string dir, std::ostream& out) : dir_(std::move(dir)), out_(out) {
        if (!dir_.empty()) fs::create_directories(dir_);
    }
    bool to_files() const { return !dir_.empty(); }
    const std::string& dir() const { return dir_; }

    void emit(const std::string& name, const std::function<void(std::ostream&)>& write) {
        if (to_files()) {
            const auto path = fs::path(dir_) / name;
            std::ofstream f(path);
            if (!f) throw ComputationError("cannot write " + path.string());
            write(f);
            if (!f) throw ComputationError("failed writing " + path.string());
            return;
        }
        if (count_++ > 0) out_ << '\n';
        write(out_);
    }

private:
    std::string dir_;
    std::ostream& out_;
    int count_ = 0;
};

std::string num(double v) { return format_double(v); }

ojson json_number(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

FlatConfig load_overrides(const Globals& g) {
    FlatConfig overrides = g.config_path.empty() ? FlatConfig{} : load_config_file(g.config_path);
    if (g.seed) overrides["seed"] = *g.seed;
    if (g.threads) {
        overrides["threads"] = *g.threads;
    } else if (!overrides.count("threads")) {
        if (const char* env = std::getenv("SUPOU_THREADS")) {
            try {
                std::size_t pos = 0;
                const int t = std::stoi(env, &pos);
                if (pos != std::string(env).size()) throw std::invalid_argument("trailing characters");
                overrides["threads"] = t;
            } catch (const std::exception&) {
                throw ConfigError(std::string("SUPOU_THREADS must be a positive integer, got '") + env + "'");
            }
        }
    }
    return overrides;
}

Format parse_format(const std::string& s) {
    if (s == "csv") return Format::Csv;
    if (s == "json") return Format::Json;
    throw ConfigError("--format must be csv or json");
}

// ---------------------------------------------------------------- correlation

void cmd_correlation(const RunConfig& rc, Format fmt, Sink& sink) {
    const bool closed = has_closed_form_correlation(rc.mixing);
    struct Row {
        double tau, quad, closed;
    };
    std::vector<Row> rows;
    for (double tau : rc.taus) {
        double q = std::numeric_limits<double>::quiet_NaN();
        try {
            if (tau == 0.0)
                q = 1.0;
            else if (rc.mixing.has_density())
                q = correlation_quadrature(rc.mixing, tau);
            else
                q = rc.mixing.expect([tau](double xi) { return std::exp(-tau * xi); });
        } catch (const UnsupportedOperation&) {
        }
        const double c = closed ? correlation_closed_form(rc.mixing, tau) : std::numeric_limits<double>::quiet_NaN();
        rows.push_back({tau, q, c});
    }
    if (fmt == Format::Json) {
        sink.emit("correlation.json", [&](std::ostream& os) {
            ojson arr = ojson::array();
            for (const auto& r : rows)
                arr.push_back({{"tau", r.tau}, {"r", json_number(r.quad)}, {"closed_form", json_number(r.closed)}});
            os << ojson{{"mixing", rc.mixing.kind()}, {"rows", arr}}.dump(2) << '\n';
        });
        return;
    }
    sink.emit("correlation.csv", [&](std::ostream& os) {
        os << "tau,r,closed_form\n";
        for (const auto& r : rows)
            os << num(r.tau) << ',' << (std::isnan(r.quad) ? "" : num(r.quad)) << ','
               << (std::isnan(r.closed) ? "" : num(r.closed)) << '\n';
    });
}

// ---------------------------------------------------------------- cumulants

ojson table_json(const CumulantTable& t) {
    ojson rows = ojson::array();
    for (std::size_t i = 0; i < t.orders.size(); ++i)
        for (std::size_t j = 0; j < t.times.size(); ++j) {
            ojson r{{"kind", to_string(t.kind)},
                    {"m", t.orders[i]},
                    {"t", t.times[j]},
                    {"factor", json_number(t.factors[i][j])},
                    {"cumulant", json_number(t.values[i][j])},
                    {"method", to_string(t.method)}};
            if (!t.std_errors.empty()) r["stderr"] = json_number(t.std_errors[i][j]);
            rows.push_back(r);
        }
    return rows;
}

void cmd_cumulants(const RunConfig& rc, Format fmt, Sink& sink) {
    const auto table = cumulant_table(rc.mixing, rc.marginal, rc.kind, rc.orders, rc.grid, rc.threads);
    std::optional<CrossFormReport> report;
    if (rc.cross_form) report = cross_form_discrepancy(rc.mixing, table);
    if (fmt == Format::Json) {
        sink.emit("cumulants.json", [&](std::ostream& os) {
            ojson j{{"rows", table_json(table)}};
            if (report)
                j["cross_form"] = {{"max_relative", report->max_relative},
                                   {"compared", report->compared},
                                   {"skipped", report->skipped}};
            os << j.dump(2) << '\n';
        });
        return;
    }
    sink.emit("cumulants.csv", [&](std::ostream& os) {
        write_csv(os, table);
        if (report)
            os << "# cross_form max_relative=" << num(report->max_relative) << " compared=" << report->compared
               << " skipped=" << report->skipped << '\n';
    });
}

// ---------------------------------------------------------------- scaling

std::optional<double> mixing_alpha(const MixingMeasure& mix) {
    const double a = mix.tail_index();
    if (std::isfinite(a) && a > 0.0) return a;
    return std::nullopt;
}

ojson fit_json(const ScalingFit& fit) {
    ojson arr = ojson::array();
    for (const auto& r : fit.rows)
        arr.push_back({{"q", r.exponent},
                       {"estimate", r.estimate},
                       {"stderr", r.std_error},
                       {"r2", r.r2},
                       {"t_min", r.t_min},
                       {"t_max", r.t_max},
                       {"n_points", r.n_points},
                       {"within_guarantee", r.within_guarantee}});
    return arr;
}

int cmd_scaling(const RunConfig& rc, Format fmt, Sink& sink, std::ostream& out) {
    const auto alpha = mixing_alpha(rc.mixing);
    std::vector<unsigned> qs = rc.exponents;
    if (qs.empty()) {
        const unsigned qs0 = alpha ? q_star(*alpha) : 2u;
        qs = {qs0, qs0 + 2};
    }
    unsigned max_order = 0;
    for (unsigned m : rc.orders) max_order = std::max(max_order, m);
    for (unsigned q : qs) max_order = std::max(max_order, q);
    std::vector<unsigned> all_orders;
    for (unsigned m = 1; m <= max_order; ++m) all_orders.push_back(m);
    const auto table = cumulant_table(rc.mixing, rc.marginal, rc.kind, all_orders, rc.grid, rc.threads);

    std::vector<std::string> notes;
    ScalingFit sigma;
    sigma.quantity = FitQuantity::Sigma;
    for (unsigned m : rc.orders) {
        if (rc.marginal.cumulant(m) == 0.0) {
            notes.push_back("m=" + std::to_string(m) + ": marginal cumulant is identically zero; no exponent");
            continue;
        }
        auto row = fit_sigma(table, m, rc.window);
        if (alpha) row.within_guarantee = theoretical_sigma(m, *alpha).has_value();
        if (!row.within_guarantee)
            notes.push_back("sigma(" + std::to_string(m) + "): outside theoretical guarantee (needs m > alpha + 1)");
        sigma.rows.push_back(std::move(row));
    }
    const auto moments = moments_from_cumulant_table(table, qs);
    ScalingFit tau;
    tau.quantity = FitQuantity::Tau;
    for (unsigned q : qs) {
        auto row = fit_tau(moments, q, rc.window);
        if (alpha) row.within_guarantee = theoretical_tau(q, *alpha).has_value();
        if (!row.within_guarantee)
            notes.push_back("tau(" + std::to_string(q) + "): outside theoretical guarantee (q < q*)");
        tau.rows.push_back(std::move(row));
    }
    const Verdict verdict = intermittency_test(tau, rc.ratio_tolerance);

    if (fmt == Format::Json) {
        sink.emit("scaling.json", [&](std::ostream& os) {
            ojson j{{"sigma", fit_json(sigma)}, {"tau", fit_json(tau)}, {"verdict", to_string(verdict)}};
            j["notes"] = notes;
            os << j.dump(2) << '\n';
        });
    } else {
        sink.emit("sigma.csv", [&](std::ostream& os) { write_csv(os, sigma, verdict); });
        sink.emit("tau.csv", [&](std::ostream& os) { write_csv(os, tau, verdict); });
    }
    if (sink.to_files()) {
        write_plot_data(fs::path(sink.dir()) / "plots", "sigma", sigma);
        write_plot_data(fs::path(sink.dir()) / "plots", "tau", tau);
    }
    if (fmt == Format::Csv || sink.to_files()) {
        for (const auto& n : notes) out << "# " << n << '\n';
        out << "verdict: " << to_string(verdict) << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------- simulate

void check_sim_grid(const RunConfig& rc) {
    rc.sim.validate();
    const double per_unit = 1.0 / rc.sim.step;
    if (rc.kind == AggregateKind::PartialSum && std::abs(per_unit - std::round(per_unit)) > 1e-9 * per_unit)
        throw ConfigError("partial sums need 1/sim.step to be an integer; sim.step=" + num(rc.sim.step));
    for (unsigned m : rc.sim_orders)
        if (m > 4) throw ConfigError("sim.orders must lie in 1..4 (k-statistics)");
    for (unsigned m : rc.sim_orders)
        if (m >= 3 && rc.sim.replicas < kMinReplicasHigherCumulants)
            throw ConfigError("k-statistics of order 3 and 4 need sim.replicas >= 30");
    for (double t : rc.sim_times) {
        if (!(t > 0.0) || t > rc.sim.horizon * (1.0 + 1e-12))
            throw ConfigError("sim.times must lie in (0, sim.horizon]");
        const double grid = rc.kind == AggregateKind::PartialSum ? 1.0 : rc.sim.step;
        const double k = t / grid;
        if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k))
            throw ConfigError("sim.time " + num(t) + " is not on the aggregate grid");
    }
}

void cmd_simulate(const RunConfig& rc, Format fmt, Sink& sink, std::ostream& err) {
    check_sim_grid(rc);
    const auto ens = superposition_path(rc.sim);
    for (const auto& w : ens.warnings) err << "warning: " << w << '\n';
    const auto agg = aggregate_path(ens, rc.kind);
    const auto table = empirical_cumulants(agg, rc.sim_orders, rc.sim_times);
    const auto acf = lag_autocorrelation(ens, rc.sim_lag);
    const double r_theory = correlation(rc.mixing, rc.sim_lag);

    struct Row {
        unsigned m;
        double t, value, se, analytic;
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < table.orders.size(); ++i)
        for (std::size_t j = 0; j < table.times.size(); ++j) {
            const double t = table.times[j];
            const bool analytic_ok = rc.kind == AggregateKind::Integrated || t >= 1.0;
            const double an = analytic_ok
                                  ? aggregate_cumulant(rc.mixing, rc.marginal, rc.kind, table.orders[i], t)
                                  : std::numeric_limits<double>::quiet_NaN();
            rows.push_back({table.orders[i], t, table.values[i][j], table.std_errors[i][j], an});
        }

    if (fmt == Format::Json) {
        sink.emit("simulate.json", [&](std::ostream& os) {
            ojson arr = ojson::array();
            for (const auto& r : rows)
                arr.push_back({{"kind", to_string(rc.kind)},
                               {"m", r.m},
                               {"t", r.t},
                               {"empirical", r.value},
                               {"stderr", r.se},
                               {"analytic", json_number(r.analytic)}});
            ojson j{{"replicas", ens.replicas()},
                    {"step", ens.step},
                    {"base_seed", rc.sim.seed},
                    {"components", ens.rates.size()},
                    {"truncated_mass", ens.truncated_mass},
                    {"cumulants", arr},
                    {"autocorrelation",
                     {{"lag", rc.sim_lag}, {"empirical", acf.value}, {"stderr", acf.std_error}, {"theory", r_theory}}}};
            os << j.dump(2) << '\n';
        });
    } else {
        sink.emit("simulate.csv", [&](std::ostream& os) {
            os << "kind,m,t,empirical,stderr,analytic,method\n";
            for (const auto& r : rows)
                os << to_string(rc.kind) << ',' << r.m << ',' << num(r.t) << ',' << num(r.value) << ',' << num(r.se)
                   << ',' << (std::isnan(r.analytic) ? "" : num(r.analytic)) << ",empirical\n";
            os << "# autocorrelation lag=" << num(rc.sim_lag) << " empirical=" << num(acf.value)
               << " stderr=" << num(acf.std_error) << " theory=" << num(r_theory) << '\n';
        });
    }
    if (sink.to_files()) {
        sink.emit("path_summary.csv", [&](std::ostream& os) { write_path_summary(os, ens); });
        sink.emit("seeds.csv", [&](std::ostream& os) {
            os << "# base_seed=" << rc.sim.seed << '\n';
            write_seed_ledger(os, ens);
        });
        if (rc.raw_paths) {
            err << "note: writing " << ens.replicas() * ens.length() << " raw path rows\n";
            sink.emit("raw_paths.csv", [&](std::ostream& os) { write_raw_paths(os, ens); });
        }
    } else if (rc.raw_paths) {
        throw ConfigError("sim.raw_paths needs --out");
    }
}

// ---------------------------------------------------------------- verify

int cmd_verify(const RunConfig& rc, Format fmt, Sink& sink, std::ostream& out) {
    VerifyOptions o;
    o.slope_tolerance = rc.slope_tolerance;
    o.ratio_tolerance = rc.ratio_tolerance;
    o.alpha_perturbation = rc.verify_alpha_perturbation;
    o.seed = rc.sim.seed;
    o.threads = rc.threads;
    o.replicas = rc.sim.replicas;
    const auto results = run_verification(o);
    const ojson j = to_json(results);
    if (fmt == Format::Json && !sink.to_files()) {
        out << j.dump(2) << '\n';
    } else {
        write_report(out, results);
        if (sink.to_files()) sink.emit("verify.json", [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    }
    for (const auto& r : results)
        if (!r.pass) return kExitComputation;
    return kExitOk;
}

std::string schema_help() {
    std::ostringstream os;
    os << "\nConfiguration keys (JSON or 'key = value' lines; unknown keys are rejected):\n";
    for (const auto& k : config_schema())
        os << "  " << k.key << " = " << k.default_value.dump() << "\n      " << k.description << '\n';
    os << "\nExit codes: 0 success, 1 computation failure or failed check, 2 configuration error.\n"
          "SUPOU_THREADS is used when --threads is absent.\n";
    return os.str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"supOU cumulant scaling and intermittency toolkit", "supou"};
    app.require_subcommand(1);
    app.footer(schema_help());
    Globals g;
    auto add_globals = [&g](CLI::App* sub) {
        sub->add_option("--config", g.config_path, "configuration file (JSON or key = value)");
        sub->add_option("--out", g.out_dir, "output directory; stdout when absent");
        sub->add_option("--seed", g.seed, "base seed (overrides 'seed')");
        sub->add_option("--threads", g.threads, "worker threads (overrides 'threads' and SUPOU_THREADS)");
        sub->add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    };
    std::string chosen;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"correlation", "correlation function r(tau) by quadrature and in closed form"},
        {"cumulants", "cumulant table of the integrated or partial-sum process"},
        {"scaling", "fitted sigma(m) and tau(q) exponents and the intermittency verdict"},
        {"simulate", "Monte Carlo ensemble with empirical cumulants and seed ledger"},
        {"verify", "end-to-end checks with a JSON verdict"},
        {"print-config", "effective configuration with every default"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        add_globals(sub);
        sub->callback([&chosen, n = name] { chosen = n; });
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        const Format fmt = parse_format(g.format);
        const FlatConfig eff = effective_config(load_overrides(g));
        if (chosen == "print-config") {
            if (fmt == Format::Json)
                out << nested_config(eff).dump(2) << '\n';
            else
                write_flat_config(out, eff);
            return kExitOk;
        }
        const RunConfig rc = build_run_config(eff);
        Sink sink(g.out_dir, out);
        if (chosen == "correlation") cmd_correlation(rc, fmt, sink);
        if (chosen == "cumulants") cmd_cumulants(rc, fmt, sink);
        if (chosen == "scaling") return cmd_scaling(rc, fmt, sink, out);
        if (chosen == "simulate") cmd_simulate(rc, fmt, sink, err);
        if (chosen == "verify") return cmd_verify(rc, fmt, sink, out);
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitComputation;
    }
}

}  // namespace supou
