#include "supou/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "supou/errors.hpp"
#include "supou/format.hpp"

namespace supou {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Beyond BDLP time 40 the discounted contribution of a unit jump is e^-40.
constexpr double kStationaryHorizon = 40.0;

double draw_jump(const std::variant<ExponentialJumps, DeterministicJumps>& jumps, std::mt19937_64& rng) {
    return std::visit(Overloaded{[&rng](const ExponentialJumps& e) {
                                     return std::exponential_distribution<double>(e.rate)(rng);
                                 },
                                 [](const DeterministicJumps& d) { return d.size; }},
                      jumps);
}

std::uint64_t poisson_count(double mean, std::mt19937_64& rng) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<std::uint64_t>(mean)(rng);
}

bool matches(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

}  // namespace

double stationary_draw(const BdlpModel& bdlp, std::mt19937_64& rng) {
    const auto* cp = std::get_if<CompoundPoissonBdlp>(&bdlp);
    if (!cp) return 0.0;
    if (const auto* e = std::get_if<ExponentialJumps>(&cp->jumps))
        return std::gamma_distribution<double>(cp->intensity, 1.0 / e->rate)(rng);
    // X = sum_i J_i e^{-s_i} over the BDLP jump times s_i > 0.
    std::uniform_real_distribution<double> unif(0.0, kStationaryHorizon);
    const auto n = poisson_count(cp->intensity * kStationaryHorizon, rng);
    double x = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) x += draw_jump(cp->jumps, rng) * std::exp(-unif(rng));
    return x;
}

std::vector<double> ou_component_path(double lambda, const BdlpModel& bdlp, double dt, std::size_t n_steps,
                                      double x0, std::mt19937_64& rng) {
    if (!(lambda > 0.0)) throw ConfigError("OU rate must be positive");
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    std::vector<double> path(n_steps + 1);
    path[0] = x0;
    const double decay = std::exp(-lambda * dt);
    const auto* cp = std::get_if<CompoundPoissonBdlp>(&bdlp);
    const double jump_mean = cp ? lambda * cp->intensity * dt : 0.0;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 1; i <= n_steps; ++i) {
        double x = decay * path[i - 1];
        if (cp) {
            const auto n = poisson_count(jump_mean, rng);
            for (std::uint64_t j = 0; j < n; ++j) {
                // time remaining until the end of the step
                const double remaining = dt * unif(rng);
                x += draw_jump(cp->jumps, rng) * std::exp(-lambda * remaining);
            }
        }
        path[i] = x;
    }
    return path;
}

std::vector<double> ou_component_path(double lambda, const BdlpModel& bdlp, double dt, std::size_t n_steps,
                                      std::mt19937_64& rng) {
    const double x0 = stationary_draw(bdlp, rng);
    return ou_component_path(lambda, bdlp, dt, n_steps, x0, rng);
}

BdlpModel component_bdlp(const MarginalLaw& law, double weight) {
    if (!(weight > 0.0)) throw ConfigError("component weight must be positive");
    if (const auto* g = std::get_if<GammaLaw>(&law.variant()))
        return CompoundPoissonBdlp{weight * g->shape, ExponentialJumps{g->rate}};
    if (const auto* c = std::get_if<CompoundPoissonDriven>(&law.variant()))
        return CompoundPoissonBdlp{weight * c->intensity, c->jumps};
    throw UnsupportedOperation("simulation supports gamma and compound-Poisson-driven marginals only; got " +
                               law.kind());
}

void SimConfig::validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("simulation step must be positive");
    if (!(horizon >= step) || !std::isfinite(horizon)) throw ConfigError("simulation horizon must be >= step");
    if (replicas < 1) throw ConfigError("simulation needs at least one replica");
    const auto& v = mixing.variant();
    if (!std::holds_alternative<Degenerate>(v) && !std::holds_alternative<Discrete>(v))
        throw ConfigError("simulation supports degenerate or discrete mixing only; got " + mixing.kind());
    const auto& m = marginal.variant();
    if (!std::holds_alternative<GammaLaw>(m) && !std::holds_alternative<CompoundPoissonDriven>(m))
        throw ConfigError("simulation supports gamma and compound-Poisson-driven marginals only; got " +
                          marginal.kind());
}

std::size_t SimConfig::n_steps() const {
    return static_cast<std::size_t>(std::floor(horizon / step * (1.0 + 1e-12)));
}

std::uint64_t replica_seed(std::uint64_t base, std::uint64_t r) {
    // splitmix64 applied to a counter offset from the base seed
    std::uint64_t z = base + (r + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

PathEnsemble superposition_path(const SimConfig& cfg) {
    cfg.validate();
    PathEnsemble ens;
    ens.step = cfg.step;
    if (const auto* d = std::get_if<Degenerate>(&cfg.mixing.variant())) {
        ens.rates = {d->rate};
        ens.weights = {1.0};
    } else {
        const auto& disc = std::get<Discrete>(cfg.mixing.variant());
        std::size_t keep = cfg.truncation;
        if (keep == 0) {
            // smallest K with neglected weight below 0.1%
            double tail = 1.0;
            keep = disc.rates.size();
            for (std::size_t k = 0; k < disc.rates.size(); ++k) {
                tail -= disc.weights[k];
                if (tail < 1e-3) {
                    keep = k + 1;
                    break;
                }
            }
        }
        keep = std::min(keep, disc.rates.size());
        double kept = 0.0;
        for (std::size_t k = 0; k < keep; ++k) kept += disc.weights[k];
        ens.rates.assign(disc.rates.begin(), disc.rates.begin() + static_cast<long>(keep));
        ens.weights.assign(disc.weights.begin(), disc.weights.begin() + static_cast<long>(keep));
        for (double& w : ens.weights) w /= kept;
        ens.truncated_mass = disc.truncated_mass + (1.0 - disc.truncated_mass) * (1.0 - kept);
        if (ens.truncated_mass > 1e-10) {
            std::ostringstream os;
            os << "discrete mixing truncated to " << keep << " components; dropped mass "
               << format_double(ens.truncated_mass) << " exceeds 1e-10 before renormalization";
            ens.warnings.push_back(os.str());
        }
    }
    std::vector<BdlpModel> bdlps;
    for (double w : ens.weights) bdlps.push_back(component_bdlp(cfg.marginal, w));
    ens.mean_shift = cfg.marginal.centered() ? cfg.marginal.raw_mean() : 0.0;

    const std::size_t n_steps = cfg.n_steps();
    ens.seeds.resize(cfg.replicas);
    ens.paths.assign(cfg.replicas, {});
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t r = next++; r < cfg.replicas; r = next++) {
            try {
                const std::uint64_t seed = replica_seed(cfg.seed, r);
                std::mt19937_64 rng(seed);
                std::vector<double> sum(n_steps + 1, -ens.mean_shift);
                for (std::size_t k = 0; k < ens.rates.size(); ++k) {
                    const auto comp = ou_component_path(ens.rates[k], bdlps[k], cfg.step, n_steps, rng);
                    for (std::size_t i = 0; i <= n_steps; ++i) sum[i] += comp[i];
                }
                ens.seeds[r] = seed;
                ens.paths[r] = std::move(sum);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(cfg.replicas)));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
    return ens;
}

std::size_t AggregateEnsemble::time_index(double t) const {
    for (std::size_t j = 0; j < times.size(); ++j)
        if (matches(times[j], t)) return j;
    throw DomainError("time " + format_double(t) + " is not on the aggregate grid");
}

AggregateEnsemble aggregate_path(const PathEnsemble& ens, AggregateKind kind) {
    AggregateEnsemble agg;
    agg.kind = kind;
    const std::size_t n = ens.length();
    if (n == 0) throw DomainError("empty ensemble");
    if (kind == AggregateKind::Integrated) {
        agg.times.resize(n);
        for (std::size_t i = 0; i < n; ++i) agg.times[i] = static_cast<double>(i) * ens.step;
        agg.values.reserve(ens.replicas());
        for (const auto& p : ens.paths) {
            std::vector<double> y(n, 0.0);
            for (std::size_t i = 1; i < n; ++i) y[i] = y[i - 1] + 0.5 * ens.step * (p[i - 1] + p[i]);
            agg.values.push_back(std::move(y));
        }
        return agg;
    }
    const double per_unit = 1.0 / ens.step;
    const double rounded = std::round(per_unit);
    if (rounded < 1.0 || std::abs(per_unit - rounded) > 1e-9 * rounded) {
        std::ostringstream os;
        os << "partial sums need 1/step to be a positive integer; step=" << ens.step;
        throw ConfigError(os.str());
    }
    const auto stride = static_cast<std::size_t>(rounded);
    const std::size_t units = (n - 1) / stride;
    if (units == 0) throw ConfigError("horizon shorter than one time unit; no partial sums");
    for (std::size_t k = 1; k <= units; ++k) agg.times.push_back(static_cast<double>(k));
    agg.values.reserve(ens.replicas());
    for (const auto& p : ens.paths) {
        std::vector<double> y(units);
        double acc = 0.0;
        for (std::size_t k = 1; k <= units; ++k) {
            acc += p[k * stride];
            y[k - 1] = acc;
        }
        agg.values.push_back(std::move(y));
    }
    return agg;
}

namespace {

// k-statistic from power sums of a (shifted) sample of size n.
double k_from_sums(unsigned order, double n, double s1, double s2, double s3, double s4) {
    switch (order) {
        case 1: return s1 / n;
        case 2: return (n * s2 - s1 * s1) / (n * (n - 1.0));
        case 3: return (2.0 * s1 * s1 * s1 - 3.0 * n * s1 * s2 + n * n * s3) / (n * (n - 1.0) * (n - 2.0));
        case 4:
            return (-6.0 * std::pow(s1, 4) + 12.0 * n * s1 * s1 * s2 - 3.0 * n * (n - 1.0) * s2 * s2 -
                    4.0 * n * (n + 1.0) * s1 * s3 + n * n * (n + 1.0) * s4) /
                   (n * (n - 1.0) * (n - 2.0) * (n - 3.0));
        default: break;
    }
    throw DomainError("k-statistics are available for orders 1..4");
}

void check_replicas(std::size_t r, unsigned order) {
    const std::size_t need = order >= 3 ? kMinReplicasHigherCumulants : order + 1;
    if (r < need) {
        std::ostringstream os;
        os << "order " << order << " k-statistic needs at least " << need << " replicas, got " << r;
        throw DomainError(os.str());
    }
}

struct KStat {
    double value;
    double std_error;
};

KStat k_statistic_jackknife(const std::vector<double>& x, unsigned order) {
    const double n = static_cast<double>(x.size());
    double c = 0.0;
    for (double v : x) c += v;
    c /= n;
    double s[5] = {0, 0, 0, 0, 0};
    for (double v : x) {
        const double d = v - c;
        s[1] += d;
        s[2] += d * d;
        s[3] += d * d * d;
        s[4] += d * d * d * d;
    }
    const double shift = order == 1 ? c : 0.0;
    KStat out{k_from_sums(order, n, s[1], s[2], s[3], s[4]) + shift, 0.0};
    std::vector<double> loo(x.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - c;
        loo[i] = k_from_sums(order, n - 1.0, s[1] - d, s[2] - d * d, s[3] - d * d * d, s[4] - d * d * d * d);
        mean += loo[i];
    }
    mean /= n;
    double ss = 0.0;
    for (double v : loo) ss += (v - mean) * (v - mean);
    out.std_error = std::sqrt((n - 1.0) / n * ss);
    return out;
}

std::vector<double> column(const AggregateEnsemble& agg, std::size_t j) {
    std::vector<double> x;
    x.reserve(agg.values.size());
    for (const auto& row : agg.values) x.push_back(row[j]);
    return x;
}

}  // namespace

double k_statistic(const std::vector<double>& sample, unsigned order) {
    if (order < 1 || order > 4) throw DomainError("k-statistics are available for orders 1..4");
    check_replicas(sample.size(), order);
    return k_statistic_jackknife(sample, order).value;
}

MomentTable empirical_moments(const AggregateEnsemble& agg, const std::vector<double>& q,
                              const std::vector<double>& times) {
    const std::size_t r = agg.values.size();
    if (r < 2) throw DomainError("empirical moments need at least two replicas");
    MomentTable out;
    out.kind = agg.kind;
    out.method = Method::Empirical;
    out.exponents = q;
    out.times = times;
    out.values.assign(q.size(), std::vector<double>(times.size()));
    out.std_errors = out.values;
    for (double e : q) {
        if (!(e > 0.0)) throw ConfigError("moment exponents must be positive");
        out.mc_unreliable.push_back(e > 4.0);
    }
    const double n = static_cast<double>(r);
    for (std::size_t j = 0; j < times.size(); ++j) {
        const auto col = column(agg, agg.time_index(times[j]));
        for (std::size_t i = 0; i < q.size(); ++i) {
            std::vector<double> p(r);
            double sum = 0.0;
            for (std::size_t k = 0; k < r; ++k) {
                p[k] = std::pow(std::abs(col[k]), q[i]);
                sum += p[k];
            }
            const double mean = sum / n;
            // jackknife of the mean: leave-one-out values (sum - p_k)/(n-1)
            double ss = 0.0;
            for (double v : p) {
                const double loo = (sum - v) / (n - 1.0);
                ss += (loo - mean) * (loo - mean);
            }
            out.values[i][j] = mean;
            out.std_errors[i][j] = std::sqrt((n - 1.0) / n * ss);
        }
    }
    return out;
}

CumulantTable empirical_cumulants(const AggregateEnsemble& agg, const std::vector<unsigned>& orders,
                                  const std::vector<double>& times) {
    if (orders.empty()) throw ConfigError("empirical cumulants need at least one order");
    if (times.empty()) throw ConfigError("empirical cumulants need at least one time");
    for (unsigned m : orders) {
        if (m < 1 || m > 4) throw ConfigError("empirical cumulants are available for orders 1..4");
        check_replicas(agg.values.size(), m);
    }
    CumulantTable table;
    table.kind = agg.kind;
    table.method = Method::Empirical;
    table.orders = orders;
    table.times = times;
    table.values.assign(orders.size(), std::vector<double>(times.size()));
    table.std_errors = table.values;
    table.factors.assign(orders.size(), std::vector<double>(times.size(), std::nan("")));
    for (std::size_t j = 0; j < times.size(); ++j) {
        const auto col = column(agg, agg.time_index(times[j]));
        for (std::size_t i = 0; i < orders.size(); ++i) {
            const KStat k = k_statistic_jackknife(col, orders[i]);
            table.values[i][j] = k.value;
            table.std_errors[i][j] = k.std_error;
        }
    }
    return table;
}

Estimate lag_autocorrelation(const PathEnsemble& ens, double lag) {
    const double steps = lag / ens.step;
    const double rounded = std::round(steps);
    if (rounded < 1.0 || std::abs(steps - rounded) > 1e-9 * rounded)
        throw ConfigError("lag must be a positive multiple of the step");
    const auto h = static_cast<std::size_t>(rounded);
    if (h >= ens.length()) throw ConfigError("lag exceeds the horizon");
    const std::size_t r = ens.replicas();
    if (r < 2) throw DomainError("autocorrelation needs at least two replicas");

    struct Sums {
        double n = 0, x = 0, y = 0, xx = 0, yy = 0, xy = 0;
    };
    auto corr = [](const Sums& s) {
        const double mx = s.x / s.n, my = s.y / s.n;
        const double cxy = s.xy / s.n - mx * my;
        const double vx = s.xx / s.n - mx * mx;
        const double vy = s.yy / s.n - my * my;
        return cxy / std::sqrt(vx * vy);
    };
    // shift by a global location for numerical stability
    double c = 0.0;
    for (const auto& p : ens.paths) c += p[0];
    c /= static_cast<double>(r);
    std::vector<Sums> per(r);
    Sums total;
    for (std::size_t k = 0; k < r; ++k) {
        const auto& p = ens.paths[k];
        Sums s;
        for (std::size_t i = 0; i + h < p.size(); ++i) {
            const double a = p[i] - c, b = p[i + h] - c;
            s.n += 1;
            s.x += a;
            s.y += b;
            s.xx += a * a;
            s.yy += b * b;
            s.xy += a * b;
        }
        per[k] = s;
        total.n += s.n;
        total.x += s.x;
        total.y += s.y;
        total.xx += s.xx;
        total.yy += s.yy;
        total.xy += s.xy;
    }
    Estimate est;
    est.value = corr(total);
    std::vector<double> loo(r);
    double mean = 0.0;
    for (std::size_t k = 0; k < r; ++k) {
        Sums s = total;
        s.n -= per[k].n;
        s.x -= per[k].x;
        s.y -= per[k].y;
        s.xx -= per[k].xx;
        s.yy -= per[k].yy;
        s.xy -= per[k].xy;
        loo[k] = corr(s);
        mean += loo[k];
    }
    mean /= static_cast<double>(r);
    double ss = 0.0;
    for (double v : loo) ss += (v - mean) * (v - mean);
    est.std_error = std::sqrt((static_cast<double>(r) - 1.0) / static_cast<double>(r) * ss);
    return est;
}

void write_path_summary(std::ostream& os, const PathEnsemble& ens) {
    os << "t,mean,variance\n";
    const double n = static_cast<double>(ens.replicas());
    for (std::size_t i = 0; i < ens.length(); ++i) {
        double s = 0.0, ss = 0.0;
        for (const auto& p : ens.paths) s += p[i];
        const double mean = s / n;
        for (const auto& p : ens.paths) ss += (p[i] - mean) * (p[i] - mean);
        const double var = n > 1 ? ss / (n - 1.0) : 0.0;
        os << format_double(static_cast<double>(i) * ens.step) << ',' << format_double(mean) << ','
           << format_double(var) << '\n';
    }
}

void write_seed_ledger(std::ostream& os, const PathEnsemble& ens) {
    os << "replica,seed\n";
    for (std::size_t r = 0; r < ens.seeds.size(); ++r) os << r << ',' << ens.seeds[r] << '\n';
}

void write_raw_paths(std::ostream& os, const PathEnsemble& ens) {
    os << "replica,i,t,x\n";
    for (std::size_t r = 0; r < ens.replicas(); ++r)
        for (std::size_t i = 0; i < ens.length(); ++i)
            os << r << ',' << i << ',' << format_double(static_cast<double>(i) * ens.step) << ','
               << format_double(ens.paths[r][i]) << '\n';
}

}  // namespace supou
