#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "supou/quadrature.hpp"

namespace supou {

/// Point mass at `rate`.
struct Degenerate {
    double rate;
};

/// Finite (or truncated countable) set of atoms. `truncated_mass` is the
/// probability discarded before renormalization; zero for finite inputs.
struct Discrete {
    std::vector<double> rates;
    std::vector<double> weights;
    double truncated_mass = 0.0;
    // Regular-variation index of the generating rule at 0, when one applies.
    double rule_tail_index = 0.0;
    double rule_tail_scale = 0.0;
};

/// Gamma(alpha, 1) mixing; r(tau) = (1+tau)^-alpha.
struct GammaMixing {
    double alpha;
};

/// Mittag-Leffler distribution; r(tau) = 1/(1+tau^alpha).
struct MittagLefflerMixing {
    double alpha;
};

/// Arbitrary density on (0, inf) with pi((0,x]) ~ tail_scale * x^tail_index.
struct DensityMixing {
    std::function<double(double)> density;
    double tail_index;
    double tail_scale;
};

/// The probability measure pi on (0, inf) that randomizes the OU rate.
/// Immutable once built; every factory validates its parameters.
class MixingMeasure {
public:
    using Variant = std::variant<Degenerate, Discrete, GammaMixing, MittagLefflerMixing, DensityMixing>;

    static MixingMeasure degenerate(double rate);
    static MixingMeasure discrete(std::vector<double> rates, std::vector<double> weights);
    /// lambda_k = lambda / k with p_k proportional to k^-(1+exponent), k >= 1.
    /// Atoms are added until the remaining mass drops below mass_tol or
    /// max_atoms is reached; the kept weights are renormalized.
    static MixingMeasure discrete_power_law(double lambda, double exponent, std::size_t max_atoms,
                                            double mass_tol = 1e-10);
    static MixingMeasure gamma(double alpha);
    static MixingMeasure mittag_leffler(double alpha);
    static MixingMeasure density(std::function<double(double)> density, double tail_index,
                                 double tail_scale);

    const Variant& variant() const { return v_; }
    std::string kind() const;

    /// alpha in pi((0,x]) ~ c x^alpha. Infinite for finitely many atoms.
    double tail_index() const;
    /// The constant c above (the slowly varying factor is taken constant).
    double tail_scale() const;

    /// Integral of f against pi. Atom measures sum exactly; density measures
    /// use half-line Gauss-Kronrod, split at `breakpoints` when given.
    double expect(const std::function<double(double)>& f, const quad::Options& opts = {},
                  const std::vector<double>& breakpoints = {}) const;

    /// Density of the absolutely continuous variants; throws otherwise.
    double pdf(double x) const;
    bool has_density() const;

private:
    explicit MixingMeasure(Variant v) : v_(std::move(v)) {}
    Variant v_;
};

/// r(tau) = integral of exp(-tau xi) pi(d xi). Uses the closed form when one
/// exists, otherwise quadrature.
double correlation(const MixingMeasure& m, double tau);
/// Quadrature route for density variants; throws UnsupportedOperation on atoms.
double correlation_quadrature(const MixingMeasure& m, double tau);
/// Closed form when the variant has one.
bool has_closed_form_correlation(const MixingMeasure& m);
double correlation_closed_form(const MixingMeasure& m, double tau);

/// pi((0, x]).
double cdf_near_zero(const MixingMeasure& m, double x);

struct ExtendedValue {
    double value = 0.0;
    bool divergent = false;
};

/// Integral of xi^-power over [lower, inf) against pi. Divergence at
/// lower = 0 is reported through the flag.
ExtendedValue inverse_moment_integral(const MixingMeasure& m, unsigned power, double lower);

/// A draw from pi. Mittag-Leffler and generic densities are not sampled.
double sample(const MixingMeasure& m, std::mt19937_64& rng);

/// E_alpha(x) for x <= 0, alpha in (0, 1].
double mittag_leffler_function(double alpha, double x);

/// Reference long-memory correlation E_alpha(-tau^gamma); the mixing measure
/// behind it is not constructed.
double mittag_leffler_reference_correlation(double alpha, double gamma, double tau);

}  // namespace supou
