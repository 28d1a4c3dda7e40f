#include "supou/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "supou/errors.hpp"

namespace supou {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        std::ostringstream os;
        os << what << " must be a positive finite number, got " << v;
        throw ConfigError(os.str());
    }
}

double gamma_density(double alpha, double x) {
    if (x <= 0.0) return 0.0;
    return std::exp((alpha - 1.0) * std::log(x) - x - std::lgamma(alpha));
}

// Spectral weight of the Mittag-Leffler relaxation,
// E_alpha(-x^alpha) = int_0^inf exp(-r x) K(r) dr for 0 < alpha < 1.
double ml_spectral(double alpha, double r) {
    if (r <= 0.0) return 0.0;
    const double ra = std::pow(r, alpha);
    const double den = ra * ra + 2.0 * ra * std::cos(alpha * std::numbers::pi) + 1.0;
    return std::sin(alpha * std::numbers::pi) / std::numbers::pi * (ra / r) / den;
}

quad::Options inner_options() {
    quad::Options o;
    o.abs_tol = 1e-15;
    o.rel_tol = 1e-11;
    o.max_intervals = 400;
    return o;
}

// After r = s/x the spectral weight turns over at s = x, and exp(-s) confines
// the mass to s below a few dozen.
std::vector<double> spectral_breakpoints(double x) {
    std::vector<double> cuts = {1.0, 8.0, 40.0};
    for (double c : {1e-2 * x, x, 1e2 * x})
        if (c < 40.0) cuts.push_back(c);
    return cuts;
}

double ml_density(double alpha, double x) {
    if (x <= 0.0) return 0.0;
    if (alpha == 1.0) return std::exp(-x);
    const double y = std::pow(x, alpha);
    if (y <= 1.0) {
        // x^(alpha-1) E_{alpha,alpha}(-x^alpha)
        double sum = 0.0;
        double power = 1.0;
        for (int k = 0; k < 200; ++k) {
            const double term = power / std::tgamma(alpha * (k + 1));
            sum += term;
            if (k > 2 && std::abs(term) < 1e-18 * std::abs(sum)) break;
            power *= -y;
        }
        return sum * y / x;
    }
    // r = s/x puts the exponential decay at unit scale.
    auto f = [alpha, x](double s) { return s * std::exp(-s) * ml_spectral(alpha, s / x); };
    return quad::integrate_half_line(f, spectral_breakpoints(x), inner_options()) / (x * x);
}

// E_alpha(-y), y >= 0.
double ml_relaxation(double alpha, double y) {
    if (y == 0.0) return 1.0;
    if (alpha == 1.0) return std::exp(-y);
    if (y <= 1.0) {
        double sum = 0.0;
        double power = 1.0;
        for (int k = 0; k < 200; ++k) {
            const double term = power / std::tgamma(alpha * k + 1.0);
            sum += term;
            if (k > 2 && std::abs(term) < 1e-18 * std::abs(sum)) break;
            power *= -y;
        }
        return sum;
    }
    const double x = std::pow(y, 1.0 / alpha);
    auto f = [alpha, x](double s) { return std::exp(-s) * ml_spectral(alpha, s / x); };
    return quad::integrate_half_line(f, spectral_breakpoints(x), inner_options()) / x;
}

// 1 - E_alpha(-y) without cancellation for small y.
double ml_cdf_from_y(double alpha, double y) {
    if (y <= 1.0) {
        double sum = 0.0;
        double power = y;
        for (int k = 1; k < 200; ++k) {
            const double term = power / std::tgamma(alpha * k + 1.0);
            sum += term;
            if (k > 2 && std::abs(term) < 1e-18 * std::abs(sum)) break;
            power *= -y;
        }
        return sum;
    }
    return 1.0 - ml_relaxation(alpha, y);
}

void require_ml_probability(const MittagLefflerMixing& ml, const char* op) {
    if (ml.alpha > 1.0) {
        std::ostringstream os;
        os << op << ": 1/(1+tau^alpha) is not completely monotone for alpha=" << ml.alpha
           << " > 1, so no mixing distribution is available; only the correlation is defined";
        throw UnsupportedOperation(os.str());
    }
}

}  // namespace

// ---------------------------------------------------------------- factories

MixingMeasure MixingMeasure::degenerate(double rate) {
    require_positive(rate, "degenerate rate");
    return MixingMeasure(Degenerate{rate});
}

MixingMeasure MixingMeasure::discrete(std::vector<double> rates, std::vector<double> weights) {
    if (rates.empty() || rates.size() != weights.size())
        throw ConfigError("discrete mixing needs equally many (>0) rates and weights");
    for (double r : rates) require_positive(r, "discrete rate");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("discrete weights must be nonnegative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream os;
        os.precision(17);
        os << "discrete weights must sum to 1 within 1e-12, got " << total;
        throw ConfigError(os.str());
    }
    return MixingMeasure(Discrete{std::move(rates), std::move(weights), 0.0, 0.0, 0.0});
}

MixingMeasure MixingMeasure::discrete_power_law(double lambda, double exponent, std::size_t max_atoms,
                                                double mass_tol) {
    require_positive(lambda, "power-law lambda");
    require_positive(exponent, "power-law exponent");
    if (max_atoms == 0) throw ConfigError("power-law rule needs at least one atom");
    const double s = 1.0 + exponent;
    const double zeta = std::riemann_zeta(s);
    Discrete d;
    double kept = 0.0;
    for (std::size_t k = 1; k <= max_atoms; ++k) {
        const double p = std::pow(static_cast<double>(k), -s) / zeta;
        d.rates.push_back(lambda / static_cast<double>(k));
        d.weights.push_back(p);
        kept += p;
        // sum_{j>k} j^-s <= k^(1-s)/(s-1)
        const double tail_bound = std::pow(static_cast<double>(k), 1.0 - s) / (s - 1.0) / zeta;
        if (tail_bound < mass_tol) break;
    }
    d.truncated_mass = std::max(0.0, 1.0 - kept);
    for (double& w : d.weights) w /= kept;
    d.rule_tail_index = exponent;
    d.rule_tail_scale = std::pow(lambda, -exponent) / (exponent * zeta);
    return MixingMeasure(std::move(d));
}

MixingMeasure MixingMeasure::gamma(double alpha) {
    require_positive(alpha, "gamma mixing alpha");
    return MixingMeasure(GammaMixing{alpha});
}

MixingMeasure MixingMeasure::mittag_leffler(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw ConfigError("Mittag-Leffler mixing alpha must lie in (0, 2)");
    return MixingMeasure(MittagLefflerMixing{alpha});
}

MixingMeasure MixingMeasure::density(std::function<double(double)> density, double tail_index,
                                     double tail_scale) {
    if (!density) throw ConfigError("density mixing needs a density function");
    require_positive(tail_index, "density tail_index");
    require_positive(tail_scale, "density tail_scale");
    quad::Options o;
    o.abs_tol = 1e-11;
    o.rel_tol = 1e-11;
    o.max_intervals = 400;
    const double mass = quad::integrate_half_line(density, o);
    if (std::abs(mass - 1.0) > 1e-8) {
        std::ostringstream os;
        os.precision(12);
        os << "density mixing must integrate to 1 within 1e-8, got " << mass;
        throw ConfigError(os.str());
    }
    return MixingMeasure(DensityMixing{std::move(density), tail_index, tail_scale});
}

// ---------------------------------------------------------------- queries

std::string MixingMeasure::kind() const {
    return std::visit(Overloaded{[](const Degenerate&) { return std::string("degenerate"); },
                                 [](const Discrete&) { return std::string("discrete"); },
                                 [](const GammaMixing&) { return std::string("gamma"); },
                                 [](const MittagLefflerMixing&) { return std::string("mittag_leffler"); },
                                 [](const DensityMixing&) { return std::string("density"); }},
                      v_);
}

double MixingMeasure::tail_index() const {
    return std::visit(Overloaded{[](const Degenerate&) { return kInf; },
                                 [](const Discrete& d) { return d.rule_tail_index > 0.0 ? d.rule_tail_index : kInf; },
                                 [](const GammaMixing& g) { return g.alpha; },
                                 [](const MittagLefflerMixing& m) { return m.alpha; },
                                 [](const DensityMixing& d) { return d.tail_index; }},
                      v_);
}

double MixingMeasure::tail_scale() const {
    return std::visit(Overloaded{[](const Degenerate&) { return 0.0; },
                                 [](const Discrete& d) { return d.rule_tail_scale; },
                                 [](const GammaMixing& g) { return 1.0 / std::tgamma(g.alpha + 1.0); },
                                 [](const MittagLefflerMixing& m) { return 1.0 / std::tgamma(m.alpha + 1.0); },
                                 [](const DensityMixing& d) { return d.tail_scale; }},
                      v_);
}

bool MixingMeasure::has_density() const {
    return std::holds_alternative<GammaMixing>(v_) || std::holds_alternative<MittagLefflerMixing>(v_) ||
           std::holds_alternative<DensityMixing>(v_);
}

double MixingMeasure::pdf(double x) const {
    return std::visit(Overloaded{[](const Degenerate&) -> double {
                                     throw UnsupportedOperation("degenerate mixing has no density");
                                 },
                                 [](const Discrete&) -> double {
                                     throw UnsupportedOperation("discrete mixing has no density");
                                 },
                                 [x](const GammaMixing& g) { return gamma_density(g.alpha, x); },
                                 [x](const MittagLefflerMixing& m) {
                                     require_ml_probability(m, "density");
                                     return ml_density(m.alpha, x);
                                 },
                                 [x](const DensityMixing& d) { return x > 0.0 ? d.density(x) : 0.0; }},
                      v_);
}

double MixingMeasure::expect(const std::function<double(double)>& f, const quad::Options& opts,
                             const std::vector<double>& breakpoints) const {
    if (const auto* d = std::get_if<Degenerate>(&v_)) return f(d->rate);
    if (const auto* d = std::get_if<Discrete>(&v_)) {
        double sum = 0.0;
        for (std::size_t k = 0; k < d->rates.size(); ++k) sum += d->weights[k] * f(d->rates[k]);
        return sum;
    }
    auto integrand = [this, &f](double x) {
        const double p = pdf(x);
        return p == 0.0 ? 0.0 : f(x) * p;
    };
    return quad::integrate_half_line(integrand, breakpoints, opts);
}

// ---------------------------------------------------------------- operations

bool has_closed_form_correlation(const MixingMeasure& m) {
    return !std::holds_alternative<DensityMixing>(m.variant());
}

double correlation_closed_form(const MixingMeasure& m, double tau) {
    if (!(tau >= 0.0)) throw DomainError("correlation lag must be nonnegative");
    return std::visit(Overloaded{[tau](const Degenerate& d) { return std::exp(-d.rate * tau); },
                                 [tau](const Discrete& d) {
                                     double r = 0.0;
                                     for (std::size_t k = 0; k < d.rates.size(); ++k)
                                         r += d.weights[k] * std::exp(-d.rates[k] * tau);
                                     return r;
                                 },
                                 [tau](const GammaMixing& g) { return std::pow(1.0 + tau, -g.alpha); },
                                 [tau](const MittagLefflerMixing& ml) { return 1.0 / (1.0 + std::pow(tau, ml.alpha)); },
                                 [](const DensityMixing&) -> double {
                                     throw UnsupportedOperation("density mixing has no closed-form correlation");
                                 }},
                      m.variant());
}

double correlation_quadrature(const MixingMeasure& m, double tau) {
    if (!(tau >= 0.0)) throw DomainError("correlation lag must be nonnegative");
    if (!m.has_density()) throw UnsupportedOperation("quadrature correlation needs a density measure");
    if (tau == 0.0) return 1.0;
    quad::Options o;
    o.abs_tol = 1e-14;
    o.rel_tol = 1e-11;
    o.max_intervals = 400;
    return m.expect([tau](double xi) { return std::exp(-tau * xi); }, o);
}

double correlation(const MixingMeasure& m, double tau) {
    if (!(tau >= 0.0)) throw DomainError("correlation lag must be nonnegative");
    if (tau == 0.0) return 1.0;
    if (has_closed_form_correlation(m)) return correlation_closed_form(m, tau);
    return correlation_quadrature(m, tau);
}

double cdf_near_zero(const MixingMeasure& m, double x) {
    if (!(x > 0.0)) throw DomainError("cdf_near_zero needs x > 0");
    return std::visit(Overloaded{[x](const Degenerate& d) { return d.rate <= x ? 1.0 : 0.0; },
                                 [x](const Discrete& d) {
                                     double p = 0.0;
                                     for (std::size_t k = 0; k < d.rates.size(); ++k)
                                         if (d.rates[k] <= x) p += d.weights[k];
                                     return p;
                                 },
                                 [x](const GammaMixing& g) { return boost::math::gamma_p(g.alpha, x); },
                                 [x](const MittagLefflerMixing& ml) {
                                     require_ml_probability(ml, "cdf");
                                     return ml_cdf_from_y(ml.alpha, std::pow(x, ml.alpha));
                                 },
                                 [x](const DensityMixing& d) {
                                     quad::Options o;
                                     o.abs_tol = 1e-14;
                                     o.rel_tol = 1e-10;
                                     o.max_intervals = 400;
                                     return quad::integrate(d.density, 0.0, x, o);
                                 }},
                      m.variant());
}

ExtendedValue inverse_moment_integral(const MixingMeasure& m, unsigned power, double lower) {
    if (!(lower >= 0.0)) throw DomainError("inverse_moment_integral needs lower >= 0");
    if (power == 0) throw DomainError("inverse_moment_integral needs power >= 1");
    const double p = static_cast<double>(power);
    if (const auto* d = std::get_if<Degenerate>(&m.variant()))
        return {d->rate >= lower ? std::pow(d->rate, -p) : 0.0, false};
    if (const auto* d = std::get_if<Discrete>(&m.variant())) {
        double sum = 0.0;
        for (std::size_t k = 0; k < d->rates.size(); ++k)
            if (d->rates[k] >= lower) sum += d->weights[k] * std::pow(d->rates[k], -p);
        return {sum, false};
    }
    if (lower == 0.0) {
        if (p >= m.tail_index()) return {kInf, true};
        if (const auto* g = std::get_if<GammaMixing>(&m.variant()))
            return {std::exp(std::lgamma(g->alpha - p) - std::lgamma(g->alpha)), false};
    }
    quad::Options o;
    o.abs_tol = 0.0;
    o.rel_tol = 1e-10;
    o.max_intervals = 400;
    auto f = [&m, p, lower](double x) {
        const double xi = lower + x;
        const double dens = m.pdf(xi);
        return dens == 0.0 ? 0.0 : std::pow(xi, -p) * dens;
    };
    return {quad::integrate_half_line(f, o), false};
}

double sample(const MixingMeasure& m, std::mt19937_64& rng) {
    return std::visit(Overloaded{[](const Degenerate& d) { return d.rate; },
                                 [&rng](const Discrete& d) {
                                     std::discrete_distribution<std::size_t> pick(d.weights.begin(), d.weights.end());
                                     return d.rates[pick(rng)];
                                 },
                                 [&rng](const GammaMixing& g) {
                                     std::gamma_distribution<double> dist(g.alpha, 1.0);
                                     return dist(rng);
                                 },
                                 [](const MittagLefflerMixing&) -> double {
                                     throw UnsupportedOperation(
                                         "sampling from Mittag-Leffler mixing is not supported; it is available "
                                         "for correlation and cumulant factors only");
                                 },
                                 [](const DensityMixing&) -> double {
                                     throw UnsupportedOperation("sampling from a generic density is not supported");
                                 }},
                      m.variant());
}

double mittag_leffler_function(double alpha, double x) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("Mittag-Leffler function needs alpha in (0, 1]");
    if (x > 0.0) throw DomainError("Mittag-Leffler function is evaluated for x <= 0 only");
    return ml_relaxation(alpha, -x);
}

double mittag_leffler_reference_correlation(double alpha, double gamma, double tau) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("reference correlation needs gamma in (0, 1)");
    if (!(tau >= 0.0)) throw DomainError("correlation lag must be nonnegative");
    return mittag_leffler_function(alpha, -std::pow(tau, gamma));
}

}  // namespace supou
