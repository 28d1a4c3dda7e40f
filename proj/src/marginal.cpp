#include "supou/marginal.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/expint.hpp>

#include "supou/errors.hpp"
#include "supou/quadrature.hpp"

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

// Ein(z) = int_0^z (e^v - 1)/v dv, entire.
double ein(double z) {
    if (z == 0.0) return 0.0;
    if (z > -20.0) {
        double sum = 0.0;
        double term = 1.0;
        for (int k = 1; k < 500; ++k) {
            term *= z / k;
            const double add = term / k;
            sum += add;
            if (std::abs(add) < 1e-17 * std::abs(sum)) break;
        }
        return sum;
    }
    return boost::math::expint(1, -z) + std::log(-z) + std::numbers::egamma;
}

// Taylor coefficients h^(n)(0), n = 0..max, of h = sqrt(q) for a quadratic q
// given by q(0), q'(0), q''(0). Differentiating h*h = q n times gives
//   2 h h^(n) + sum_{k=1}^{n-1} C(n,k) h^(k) h^(n-k) = q^(n).
std::vector<long double> sqrt_quadratic_derivatives(long double q0, long double q1, long double q2,
                                                    unsigned max) {
    std::vector<long double> h(max + 1, 0.0L);
    h[0] = std::sqrt(q0);
    for (unsigned n = 1; n <= max; ++n) {
        long double qn = n == 1 ? q1 : (n == 2 ? q2 : 0.0L);
        long double cross = 0.0L;
        long double binom = 1.0L;  // C(n, k)
        for (unsigned k = 1; k < n; ++k) {
            binom = binom * static_cast<long double>(n - k + 1) / static_cast<long double>(k);
            cross += binom * h[k] * h[n - k];
        }
        h[n] = (qn - cross) / (2.0L * h[0]);
    }
    return h;
}

}  // namespace

MarginalLaw::MarginalLaw(Variant v, bool centered) : v_(std::move(v)), centered_(centered) {
    radius_ = std::visit(
        Overloaded{[](const Gaussian&) { return kInf; },
                   [](const GammaLaw& g) { return g.rate; },
                   [](const InverseGaussian& ig) { return ig.gamma * ig.gamma / 2.0; },
                   [](const NormalInverseGaussian& n) { return n.alpha - std::abs(n.beta); },
                   [](const CompoundPoissonDriven& cp) {
                       return std::visit(Overloaded{[](const ExponentialJumps& e) { return e.rate; },
                                                    [](const DeterministicJumps&) { return kInf; }},
                                         cp.jumps);
                   }},
        v_);
}

MarginalLaw MarginalLaw::gaussian(double variance) {
    require_positive(variance, "gaussian variance");
    return MarginalLaw(Gaussian{variance}, true);
}

MarginalLaw MarginalLaw::gamma(double shape, double rate, bool centered) {
    require_positive(shape, "gamma shape");
    require_positive(rate, "gamma rate");
    return MarginalLaw(GammaLaw{shape, rate}, centered);
}

MarginalLaw MarginalLaw::inverse_gaussian(double delta, double gamma, bool centered) {
    require_positive(delta, "inverse gaussian delta");
    require_positive(gamma, "inverse gaussian gamma");
    return MarginalLaw(InverseGaussian{delta, gamma}, centered);
}

MarginalLaw MarginalLaw::nig(double alpha, double beta, double delta, double mu, bool centered) {
    require_positive(alpha, "nig alpha");
    require_positive(delta, "nig delta");
    if (!std::isfinite(beta) || !std::isfinite(mu)) throw ConfigError("nig beta and mu must be finite");
    if (!(std::abs(beta) < alpha))
        throw ConfigError("nig needs |beta| < alpha; at |beta| = alpha the CGF is not analytic at 0");
    return MarginalLaw(NormalInverseGaussian{alpha, beta, delta, mu}, centered);
}

MarginalLaw MarginalLaw::compound_poisson_exponential(double intensity, double jump_rate, bool centered) {
    require_positive(intensity, "compound Poisson intensity");
    require_positive(jump_rate, "exponential jump rate");
    return MarginalLaw(CompoundPoissonDriven{ExponentialJumps{jump_rate}, intensity}, centered);
}

MarginalLaw MarginalLaw::compound_poisson_deterministic(double intensity, double jump_size, bool centered) {
    require_positive(intensity, "compound Poisson intensity");
    require_positive(jump_size, "deterministic jump size");
    return MarginalLaw(CompoundPoissonDriven{DeterministicJumps{jump_size}, intensity}, centered);
}

std::string MarginalLaw::kind() const {
    return std::visit(Overloaded{[](const Gaussian&) { return std::string("gaussian"); },
                                 [](const GammaLaw&) { return std::string("gamma"); },
                                 [](const InverseGaussian&) { return std::string("inverse_gaussian"); },
                                 [](const NormalInverseGaussian&) { return std::string("nig"); },
                                 [](const CompoundPoissonDriven&) { return std::string("compound_poisson"); }},
                      v_);
}

double MarginalLaw::raw_mean() const {
    return std::visit(
        Overloaded{[](const Gaussian&) { return 0.0; },
                   [](const GammaLaw& g) { return g.shape / g.rate; },
                   [](const InverseGaussian& ig) { return ig.delta / ig.gamma; },
                   [](const NormalInverseGaussian& n) {
                       return n.mu + n.delta * n.beta / std::sqrt(n.alpha * n.alpha - n.beta * n.beta);
                   },
                   [](const CompoundPoissonDriven& cp) {
                       // kappa_X^(1) = kappa_L^(1) / 1
                       return std::visit(Overloaded{[&](const ExponentialJumps& e) { return cp.intensity / e.rate; },
                                                    [&](const DeterministicJumps& d) { return cp.intensity * d.size; }},
                                         cp.jumps);
                   }},
        v_);
}

void MarginalLaw::check_domain(double u) const {
    if (!(std::abs(u) < radius_)) {
        std::ostringstream os;
        os << kind() << " CGF evaluated at u=" << u << " outside its radius of analyticity " << radius_;
        throw DomainError(os.str());
    }
}

double MarginalLaw::cgf(double u) const {
    check_domain(u);
    const double k = std::visit(
        Overloaded{[u](const Gaussian& g) { return 0.5 * g.variance * u * u; },
                   [u](const GammaLaw& g) { return -g.shape * std::log1p(-u / g.rate); },
                   [u](const InverseGaussian& ig) {
                       return ig.delta * (ig.gamma - std::sqrt(ig.gamma * ig.gamma - 2.0 * u));
                   },
                   [u](const NormalInverseGaussian& n) {
                       const double a2 = n.alpha * n.alpha;
                       return n.mu * u + n.delta * (std::sqrt(a2 - n.beta * n.beta) -
                                                    std::sqrt(a2 - (n.beta + u) * (n.beta + u)));
                   },
                   [u](const CompoundPoissonDriven& cp) {
                       return std::visit(
                           Overloaded{[&](const ExponentialJumps& e) { return -cp.intensity * std::log1p(-u / e.rate); },
                                      [&](const DeterministicJumps& d) { return cp.intensity * ein(d.size * u); }},
                           cp.jumps);
                   }},
        v_);
    return centered_ ? k - raw_mean() * u : k;
}

double MarginalLaw::bdlp_cgf(double u) const {
    check_domain(u);
    const double k = std::visit(
        Overloaded{[u](const Gaussian& g) { return g.variance * u * u; },
                   [u](const GammaLaw& g) { return g.shape * u / (g.rate - u); },
                   [u](const InverseGaussian& ig) { return ig.delta * u / std::sqrt(ig.gamma * ig.gamma - 2.0 * u); },
                   [u](const NormalInverseGaussian& n) {
                       const double b = n.beta + u;
                       return n.mu * u + n.delta * u * b / std::sqrt(n.alpha * n.alpha - b * b);
                   },
                   [u](const CompoundPoissonDriven& cp) {
                       return std::visit(
                           Overloaded{[&](const ExponentialJumps& e) { return cp.intensity * u / (e.rate - u); },
                                      [&](const DeterministicJumps& d) { return cp.intensity * std::expm1(d.size * u); }},
                           cp.jumps);
                   }},
        v_);
    return centered_ ? k - raw_mean() * u : k;
}

std::vector<double> MarginalLaw::cumulants(unsigned max_order) const {
    std::vector<double> out(max_order, 0.0);
    if (max_order == 0) return out;
    std::visit(
        Overloaded{[&](const Gaussian& g) {
                       if (max_order >= 2) out[1] = g.variance;
                   },
                   [&](const GammaLaw& g) {
                       // (m-1)! shape / rate^m
                       double fact = 1.0;
                       for (unsigned m = 1; m <= max_order; ++m) {
                           if (m > 1) fact *= static_cast<double>(m - 1);
                           out[m - 1] = fact * g.shape / std::pow(g.rate, static_cast<double>(m));
                       }
                   },
                   [&](const InverseGaussian& ig) {
                       const auto h = sqrt_quadratic_derivatives(static_cast<long double>(ig.gamma) * ig.gamma, -2.0L,
                                                                 0.0L, max_order);
                       for (unsigned m = 1; m <= max_order; ++m)
                           out[m - 1] = static_cast<double>(-static_cast<long double>(ig.delta) * h[m]);
                   },
                   [&](const NormalInverseGaussian& n) {
                       const long double a = n.alpha, b = n.beta;
                       // q(u) = alpha^2 - (beta + u)^2
                       const auto h = sqrt_quadratic_derivatives(a * a - b * b, -2.0L * b, -2.0L, max_order);
                       for (unsigned m = 1; m <= max_order; ++m)
                           out[m - 1] = static_cast<double>(-static_cast<long double>(n.delta) * h[m]);
                       out[0] += n.mu;
                   },
                   [&](const CompoundPoissonDriven& cp) {
                       // kappa_X^(m) = intensity * E[J^m] / m
                       for (unsigned m = 1; m <= max_order; ++m) {
                           const double moment = std::visit(
                               Overloaded{[m](const ExponentialJumps& e) {
                                              return std::tgamma(m + 1.0) / std::pow(e.rate, static_cast<double>(m));
                                          },
                                          [m](const DeterministicJumps& d) {
                                              return std::pow(d.size, static_cast<double>(m));
                                          }},
                               cp.jumps);
                           out[m - 1] = cp.intensity * moment / m;
                       }
                   }},
        v_);
    if (centered_) out[0] = 0.0;
    return out;
}

double MarginalLaw::cumulant(unsigned m) const {
    if (m == 0) throw DomainError("cumulant order must be >= 1");
    return cumulants(m)[m - 1];
}

double cgf(const MarginalLaw& law, double u) { return law.cgf(u); }
double cumulant(const MarginalLaw& law, unsigned m) { return law.cumulant(m); }
double bdlp_cgf(const MarginalLaw& law, double u) { return law.bdlp_cgf(u); }

BdlpCheck bdlp_integral_check(const MarginalLaw& law, double u, double tol) {
    if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
    BdlpCheck out;
    out.cgf_value = law.cgf(u);
    // kappa_L(v) = O(v) near 0, so the tail integral over [S, inf) is at most
    // about |kappa_L(u e^-S)| / (order of vanishing); doubling S bounds it.
    double s_max = 1.0;
    auto tail = [&](double s) { return 2.0 * std::abs(law.bdlp_cgf(u * std::exp(-s))); };
    while (tail(s_max) >= tol / 2.0 && s_max < 2000.0) s_max *= 2.0;
    out.truncation = s_max;
    out.tail_bound = tail(s_max);
    quad::Options o;
    o.abs_tol = tol / 8.0;
    o.rel_tol = 0.0;
    o.max_intervals = 400;
    const quad::Result r = quad::gauss_kronrod([&](double s) { return law.bdlp_cgf(u * std::exp(-s)); }, 0.0, s_max, o);
    if (!r.converged) throw ComputationError(r.describe());
    out.integral = r.value;
    out.agree = std::abs(out.integral - out.cgf_value) <= tol;
    return out;
}

bool verify_bdlp_integral(const MarginalLaw& law, double u, double tol) {
    return bdlp_integral_check(law, u, tol).agree;
}

}  // namespace supou
