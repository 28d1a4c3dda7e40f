#include "supou/cumulant_engine.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <mutex>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include <boost/math/special_functions/bernoulli.hpp>

#include "supou/errors.hpp"
#include "supou/format.hpp"

namespace supou {
namespace {

// Relative error budget of the closed-form brackets: fall back to the
// positive expansions once the bracket loses more than ~4 digits.
constexpr double kMaxCondition = 1e4;
constexpr unsigned kMaxOrder = 40;

void check_order(unsigned m) {
    if (m == 0) throw DomainError("cumulant order must be >= 1");
    if (m > kMaxOrder) {
        std::ostringstream os;
        os << "cumulant order " << m << " exceeds the supported maximum " << kMaxOrder;
        throw DomainError(os.str());
    }
}

double binomial(unsigned n, unsigned k) {
    double b = 1.0;
    for (unsigned i = 1; i <= k; ++i) b = b * static_cast<double>(n - k + i) / static_cast<double>(i);
    return b;
}

// 1 - e^-x
double one_minus_exp(double x) { return -std::expm1(-x); }

// K_m(x) / x^m for the integrated kernel K_m(x) = int_0^x (1-e^-w)^(m-1) dw.
class IntegratedKernel {
public:
    explicit IntegratedKernel(unsigned m) : m_(m), a_(static_cast<double>(a_coeff(m))) {
        for (unsigned k = 1; k < m; ++k) coef_.push_back(binomial(m - 1, k) / k);
    }

    unsigned order() const { return m_; }

    // Bracket of the direct form; the caller divides by x^m.
    double direct_scaled(double x) const {
        if (m_ == 1) return 1.0;
        double bracket = a_ + x;
        double magnitude = std::abs(a_) + x;
        for (unsigned k = 1; k < m_; ++k) {
            const double term = coef_[k - 1] * std::exp(-static_cast<double>(k) * x);
            bracket += (k % 2 == 1) ? term : -term;
            magnitude += term;
        }
        if (bracket > 0.0 && magnitude <= kMaxCondition * bracket) {
            const double xm = std::pow(x, static_cast<double>(m_));
            if (xm > 0.0 && std::isfinite(xm)) return bracket / xm;
        }
        return series_scaled(x);
    }

    // K_m(x) = sum_{j>=m} y^j / j with y = 1 - e^-x; every term is positive.
    double series_scaled(double x) const {
        const double y = one_minus_exp(x);
        if (y >= 0.999) {
            // Slow geometric convergence; x is large enough that x - sum_{j<m} y^j/j
            // is well conditioned.
            double head = 0.0;
            double yj = 1.0;
            for (unsigned j = 1; j < m_; ++j) {
                yj *= y;
                head += yj / j;
            }
            return (x - head) / std::pow(x, static_cast<double>(m_));
        }
        double sum = 0.0;
        double yj = 1.0;  // y^(j-m)
        for (unsigned j = m_; j < m_ + 50000; ++j) {
            const double term = yj / j;
            sum += term;
            if (term < 1e-18 * sum) break;
            yj *= y;
        }
        return std::pow(y / x, static_cast<double>(m_)) * sum;
    }

    // Inner integral by quadrature. For x <= kSaturation the substitution
    // w = x v keeps the integrand O(1) however small x is.
    double quadrature_scaled(double x) const {
        if (m_ == 1) return 1.0;
        const double p = static_cast<double>(m_ - 1);
        if (x <= kSaturation) {
            auto f = [x, p](double v) { return std::pow(one_minus_exp(x * v) / x, p); };
            return quad::integrate(f, 0.0, 1.0, inner_options());
        }
        // (1 - e^-w)^(m-1) == 1 in double precision beyond kSaturation.
        return (saturated_integral() + (x - kSaturation)) / std::pow(x, static_cast<double>(m_));
    }

private:
    static constexpr double kSaturation = 60.0;

    static quad::Options inner_options() {
        quad::Options o;
        o.abs_tol = 0.0;
        o.rel_tol = 1e-13;
        o.max_intervals = 200;
        return o;
    }

    double saturated_integral() const {
        if (saturated_ < 0.0) {
            const double p = static_cast<double>(m_ - 1);
            saturated_ = quad::integrate([p](double w) { return std::pow(one_minus_exp(w), p); }, 0.0, kSaturation,
                                         inner_options());
        }
        return saturated_;
    }

    unsigned m_;
    double a_;
    std::vector<double> coef_;
    mutable double saturated_ = -1.0;
};

// Inner sum of the partial-sum factor scaled by (1 - e^-xi)^m:
//   S(xi) / d^m,  S = sum_{k=1}^{N} (1 - e^{-k xi})^m,  d = 1 - e^-xi.
class PartialSumKernel {
public:
    PartialSumKernel(unsigned m, long long terms) : m_(m), n_(terms) {
        for (unsigned j = 0; j <= m; ++j) binom_.push_back(binomial(m, j));
        build_taylor();
    }

    double expanded_scaled(double xi) const {
        if (n_ == 0) return 0.0;
        const double d = one_minus_exp(xi);
        const double nd = static_cast<double>(n_);
        double raw = nd;
        double magnitude = nd;
        for (unsigned j = 1; j <= m_; ++j) {
            const double jx = j * xi;
            const double g = std::exp(-jx) * one_minus_exp(jx * nd) / one_minus_exp(jx);
            const double term = binom_[j] * g;
            raw += (j % 2 == 1) ? -term : term;
            magnitude += term;
        }
        const double dm = std::pow(d, static_cast<double>(m_));
        const bool well_conditioned = raw > 0.0 && magnitude <= kMaxCondition * raw && dm > 0.0;
        if (well_conditioned) return raw / dm;
        double taylor_condition = 0.0;
        const double t = taylor_scaled(xi, &taylor_condition);
        if (taylor_condition <= kMaxCondition || !(raw > 0.0 && dm > 0.0)) return t;
        // Both routes lose digits; keep the better conditioned one.
        const double expanded_condition = magnitude / raw;
        return taylor_condition < expanded_condition ? t : raw / dm;
    }

    double summed_scaled(double xi) const {
        const double d = one_minus_exp(xi);
        const double p = static_cast<double>(m_);
        double sum = 0.0;
        for (long long k = 1; k <= n_; ++k) {
            const double y = one_minus_exp(static_cast<double>(k) * xi);
            if (y == 1.0) {
                sum += static_cast<double>(n_ - k + 1) * std::pow(1.0 / d, p);
                break;
            }
            sum += std::pow(y / d, p);
        }
        return sum;
    }

    // (xi/d)^m N^{m+1} sum_{p>=m} c_p (N xi)^{p-m} Q_p, where
    // (1-e^-x)^m = sum_p c_p x^p and Q_p = N^{-(p+1)} sum_{k=1}^N k^p.
    double taylor_scaled(double xi, double* condition) const {
        const double x = static_cast<double>(n_) * xi;
        long double sum = 0.0L;
        long double abs_sum = 0.0L;
        long double xp = 1.0L;
        for (std::size_t i = 0; i < coeff_.size(); ++i) {
            const long double term = coeff_[i] * xp * q_[i];
            sum += term;
            abs_sum += std::abs(term);
            if (i > 2 && std::abs(term) < 1e-19L * std::abs(sum)) break;
            xp *= x;
        }
        if (condition) *condition = sum > 0 ? static_cast<double>(abs_sum / sum) : std::numeric_limits<double>::infinity();
        const double d = one_minus_exp(xi);
        const double scale = std::pow(xi / d, static_cast<double>(m_)) *
                             std::pow(static_cast<double>(n_), static_cast<double>(m_ + 1));
        return scale * static_cast<double>(sum);
    }

private:
    static constexpr unsigned kTaylorTerms = 90;

    void build_taylor() {
        // T[p][k] = k! S(p,k) / p!, Stirling numbers of the second kind;
        // T[p][k] = (k/p)(T[p-1][k] + T[p-1][k-1]).
        const unsigned pmax = m_ + kTaylorTerms;
        std::vector<long double> prev(m_ + 1, 0.0L), cur(m_ + 1, 0.0L);
        prev[0] = 1.0L;
        for (unsigned p = 1; p <= pmax; ++p) {
            std::fill(cur.begin(), cur.end(), 0.0L);
            for (unsigned k = 1; k <= std::min(p, m_); ++k)
                cur[k] = static_cast<long double>(k) / p * (prev[k] + prev[k - 1]);
            std::swap(prev, cur);
            if (p >= m_) coeff_.push_back(((p - m_) % 2 == 0 ? 1.0L : -1.0L) * prev[m_]);
        }
        // Normalized power sums Q_p for p = m .. pmax.
        q_.assign(coeff_.size(), 0.0L);
        const long double n = static_cast<long double>(n_);
        if (n_ <= 4000) {
            for (long long k = 1; k <= n_; ++k) {
                const long double r = static_cast<long double>(k) / n;
                long double rp = std::pow(r, static_cast<long double>(m_));
                for (std::size_t i = 0; i < q_.size(); ++i) {
                    q_[i] += rp;
                    rp *= r;
                }
            }
            for (auto& q : q_) q /= n;
        } else {
            // Faulhaber: sum_{k<=N} k^p = (1/(p+1)) sum_j C(p+1,j) B_j^+ N^{p+1-j}
            for (std::size_t i = 0; i < q_.size(); ++i) {
                const unsigned p = m_ + static_cast<unsigned>(i);
                long double acc = 1.0L + (p + 1.0L) / (2.0L * n);  // j = 0, 1
                long double binom = (p + 1.0L);
                long double npow = 1.0L / n;
                for (unsigned j = 2; j <= p; ++j) {
                    binom = binom * static_cast<long double>(p + 2 - j) / static_cast<long double>(j);
                    npow /= n;
                    if (j % 2 == 1) continue;
                    const long double term = binom * boost::math::bernoulli_b2n<long double>(j / 2) * npow;
                    acc += term;
                    if (std::abs(term) < 1e-22L) break;
                }
                q_[i] = acc / (p + 1.0L);
            }
        }
    }

    unsigned m_;
    long long n_;
    std::vector<double> binom_;
    std::vector<long double> coeff_;
    std::vector<long double> q_;
};

// The factor integrands vary on the scale xi ~ 1/t while the mixing density
// varies on its own scale; splitting there keeps the adaptive rule from
// stepping over the region that carries the mass for large t.
std::vector<double> factor_breakpoints(double t) {
    return {1e-2 / t, 1.0 / t, 1e2 / t, 1.0};
}

void throw_with_context(const std::string& what, const std::string& detail) {
    throw ComputationError(what + ": " + detail);
}

}  // namespace

std::string to_string(AggregateKind kind) {
    return kind == AggregateKind::Integrated ? "integrated" : "partial_sum";
}

std::string to_string(Method method) { return method == Method::Analytic ? "analytic" : "empirical"; }

AggregateKind parse_aggregate_kind(const std::string& s) {
    if (s == "integrated") return AggregateKind::Integrated;
    if (s == "partial_sum" || s == "partialsum" || s == "partial-sum") return AggregateKind::PartialSum;
    throw ConfigError("unknown aggregate kind '" + s + "' (expected integrated or partial_sum)");
}

Rational a_coeff(unsigned m) {
    if (m == 0) throw DomainError("a_coeff needs m >= 1");
    Rational sum = 0;
    boost::multiprecision::cpp_int binom = 1;
    for (unsigned k = 1; k < m; ++k) {
        binom = binom * (m - k) / k;  // C(m-1, k)
        Rational term(binom, k);
        sum += (k % 2 == 1) ? Rational(-term) : term;
    }
    return sum;
}

namespace kernel {

double integrated_direct(unsigned m, double x) {
    check_order(m);
    if (!(x >= 0.0)) throw DomainError("kernel argument must be nonnegative");
    if (x == 0.0) return 0.0;
    return IntegratedKernel(m).direct_scaled(x) * std::pow(x, static_cast<double>(m));
}

double integrated_quadrature(unsigned m, double x) {
    check_order(m);
    if (!(x >= 0.0)) throw DomainError("kernel argument must be nonnegative");
    if (x == 0.0) return 0.0;
    return IntegratedKernel(m).quadrature_scaled(x) * std::pow(x, static_cast<double>(m));
}

double partial_inner_expanded(unsigned m, long long n, double xi) {
    check_order(m);
    if (n < 1) throw DomainError("partial sums need floor(t) >= 1");
    if (!(xi > 0.0)) throw DomainError("rate must be positive");
    return PartialSumKernel(m, n - 1).expanded_scaled(xi) * std::pow(one_minus_exp(xi), static_cast<double>(m));
}

double partial_inner_summed(unsigned m, long long n, double xi) {
    check_order(m);
    if (n < 1) throw DomainError("partial sums need floor(t) >= 1");
    if (!(xi > 0.0)) throw DomainError("rate must be positive");
    return PartialSumKernel(m, n - 1).summed_scaled(xi) * std::pow(one_minus_exp(xi), static_cast<double>(m));
}

double epsilon(double a, double b) {
    if (b == 0.0) return a;
    return -std::expm1(-a * b) / b;
}

double eta(double a, double b) {
    if (b == 0.0) return a;
    return std::exp(-b) * std::expm1(-a * b) / std::expm1(-b);
}

}  // namespace kernel

quad::Options default_factor_options() {
    quad::Options o;
    o.abs_tol = 1e-10;
    o.rel_tol = 1e-8;
    o.max_intervals = 200;
    return o;
}

double integrated_factor(const MixingMeasure& mix, unsigned m, double t, IntegratedForm form,
                         const quad::Options& opts) {
    check_order(m);
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("integrated factor needs t > 0");
    // I_0(t) = t pi((0, inf)) = t
    if (m == 1) return t;
    const IntegratedKernel kern(m);
    const double tm = std::pow(t, static_cast<double>(m));
    std::function<double(double)> f;
    if (form == IntegratedForm::Direct)
        f = [&kern, t](double xi) { return kern.direct_scaled(xi * t); };
    else
        f = [&kern, t](double xi) { return kern.quadrature_scaled(xi * t); };
    try {
        // the absolute tolerance refers to I itself, not to the scaled expectation
        quad::Options scaled = opts;
        scaled.abs_tol = opts.abs_tol / tm;
        const double v = tm * mix.expect(f, scaled, factor_breakpoints(t));
        if (!std::isfinite(v)) throw ComputationError("integrated factor overflowed");
        return v;
    } catch (const ComputationError& e) {
        std::ostringstream os;
        os << "I_" << (m - 1) << "(" << t << ")";
        throw_with_context(os.str(), e.what());
    }
    return 0.0;
}

double partial_sum_factor(const MixingMeasure& mix, unsigned m, double t, PartialSumForm form,
                          const quad::Options& opts) {
    check_order(m);
    if (!(t >= 1.0) || !std::isfinite(t)) throw DomainError("partial-sum factor needs floor(t) >= 1");
    const auto n = static_cast<long long>(std::floor(t));
    // J_0(t) = floor(t)
    if (m == 1) return static_cast<double>(n);
    if (form == PartialSumForm::Summed && n > kMaxSummedTerms) {
        std::ostringstream os;
        os << "summed partial-sum form needs O(floor(t)) work per node; floor(t)=" << n << " exceeds "
           << kMaxSummedTerms;
        throw SizeError(os.str());
    }
    const PartialSumKernel kern(m, n - 1);
    const double p = static_cast<double>(m);
    const double nd = static_cast<double>(n);
    auto phi = [&kern, &form, p, nd, m](double xi) {
        const double d = one_minus_exp(xi);
        const double inner =
            form == PartialSumForm::Expanded ? kern.expanded_scaled(xi) : kern.summed_scaled(xi);
        const double last = one_minus_exp(nd * xi) / d;
        return one_minus_exp(static_cast<double>(m) * xi) * inner + std::pow(last, p);
    };
    try {
        const double v = mix.expect(phi, opts, factor_breakpoints(nd));
        if (!std::isfinite(v)) throw ComputationError("partial-sum factor overflowed");
        return v;
    } catch (const ComputationError& e) {
        std::ostringstream os;
        os << "J_" << (m - 1) << "(" << t << ")";
        throw_with_context(os.str(), e.what());
    }
    return 0.0;
}

double aggregate_cumulant(const MixingMeasure& mix, const MarginalLaw& law, AggregateKind kind, unsigned m, double t) {
    const double k = law.cumulant(m);
    if (kind == AggregateKind::Integrated) return k * m * integrated_factor(mix, m, t);
    return k * partial_sum_factor(mix, m, t);
}

std::size_t CumulantTable::order_index(unsigned m) const {
    const auto it = std::find(orders.begin(), orders.end(), m);
    if (it == orders.end()) throw DomainError("order " + std::to_string(m) + " is not in the table");
    return static_cast<std::size_t>(it - orders.begin());
}

CumulantTable cumulant_table(const MixingMeasure& mix, const MarginalLaw& law, AggregateKind kind,
                             const std::vector<unsigned>& orders, const std::vector<double>& times, unsigned threads) {
    if (orders.empty()) throw ConfigError("cumulant table needs at least one order");
    if (times.empty()) throw ConfigError("cumulant table needs at least one time");
    if (!std::is_sorted(times.begin(), times.end())) throw ConfigError("cumulant table times must be sorted");
    for (unsigned m : orders) check_order(m);
    for (double t : times) {
        if (kind == AggregateKind::Integrated && !(t > 0.0)) throw ConfigError("integrated times must be positive");
        if (kind == AggregateKind::PartialSum && !(t >= 1.0)) throw ConfigError("partial-sum times must be >= 1");
    }

    CumulantTable table;
    table.kind = kind;
    table.method = Method::Analytic;
    table.orders = orders;
    table.times = times;
    table.values.assign(orders.size(), std::vector<double>(times.size(), 0.0));
    table.factors = table.values;

    const unsigned max_order = *std::max_element(orders.begin(), orders.end());
    const std::vector<double> kappa = law.cumulants(max_order);
    const std::size_t cells = orders.size() * times.size();
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto work = [&] {
        for (std::size_t c = next++; c < cells; c = next++) {
            const std::size_t i = c / times.size();
            const std::size_t j = c % times.size();
            const unsigned m = orders[i];
            try {
                const double factor = kind == AggregateKind::Integrated ? integrated_factor(mix, m, times[j])
                                                                        : partial_sum_factor(mix, m, times[j]);
                table.factors[i][j] = factor;
                table.values[i][j] =
                    kind == AggregateKind::Integrated ? kappa[m - 1] * m * factor : kappa[m - 1] * factor;
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cells)));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
    return table;
}

CrossFormReport cross_form_discrepancy(const MixingMeasure& mix, const CumulantTable& table) {
    CrossFormReport report;
    for (std::size_t i = 0; i < table.orders.size(); ++i) {
        for (std::size_t j = 0; j < table.times.size(); ++j) {
            const unsigned m = table.orders[i];
            const double t = table.times[j];
            double alt = 0.0;
            if (table.kind == AggregateKind::Integrated) {
                alt = integrated_factor(mix, m, t, IntegratedForm::Kernel);
            } else {
                if (std::floor(t) > static_cast<double>(kMaxSummedTerms)) {
                    ++report.skipped;
                    continue;
                }
                alt = partial_sum_factor(mix, m, t, PartialSumForm::Summed);
            }
            const double ref = table.factors[i][j];
            const double rel = std::abs(alt - ref) / std::max(std::abs(ref), std::numeric_limits<double>::min());
            report.max_relative = std::max(report.max_relative, rel);
            ++report.compared;
        }
    }
    return report;
}

void write_csv(std::ostream& os, const CumulantTable& table) {
    os << "kind,m,t,factor,cumulant,method\n";
    for (std::size_t i = 0; i < table.orders.size(); ++i)
        for (std::size_t j = 0; j < table.times.size(); ++j)
            os << to_string(table.kind) << ',' << table.orders[i] << ',' << format_double(table.times[j]) << ','
               << format_double(table.factors[i][j]) << ',' << format_double(table.values[i][j]) << ','
               << to_string(table.method) << '\n';
}

}  // namespace supou
