#pragma once

#include <string>
#include <variant>
#include <vector>

namespace supou {

struct Gaussian {
    double variance;
};

struct GammaLaw {
    double shape;
    double rate;
};

struct InverseGaussian {
    double delta;
    double gamma;
};

struct NormalInverseGaussian {
    double alpha;
    double beta;
    double delta;
    double mu;
};

struct ExponentialJumps {
    double rate;
};

struct DeterministicJumps {
    double size;
};

/// Stationary law whose BDLP is compound Poisson: L(1) has `intensity`
/// jumps per unit time drawn from `jumps`.
struct CompoundPoissonDriven {
    std::variant<ExponentialJumps, DeterministicJumps> jumps;
    double intensity;
};

/// Selfdecomposable marginal of a supOU process with a CGF analytic at 0.
///
/// All evaluations use the real-argument CGF K(u) = log E exp(uX). When
/// `centered` is set the law is shifted so that its first cumulant is 0.
class MarginalLaw {
public:
    using Variant = std::variant<Gaussian, GammaLaw, InverseGaussian, NormalInverseGaussian, CompoundPoissonDriven>;

    static MarginalLaw gaussian(double variance);
    static MarginalLaw gamma(double shape, double rate, bool centered = false);
    static MarginalLaw inverse_gaussian(double delta, double gamma, bool centered = false);
    static MarginalLaw nig(double alpha, double beta, double delta, double mu, bool centered = false);
    static MarginalLaw compound_poisson_exponential(double intensity, double jump_rate, bool centered = false);
    static MarginalLaw compound_poisson_deterministic(double intensity, double jump_size, bool centered = false);

    const Variant& variant() const { return v_; }
    bool centered() const { return centered_; }
    std::string kind() const;
    /// Largest r such that K is analytic on (-r, r).
    double radius_of_analyticity() const { return radius_; }
    bool is_gaussian() const { return std::holds_alternative<Gaussian>(v_); }

    /// First cumulant before any centering.
    double raw_mean() const;

    double cgf(double u) const;
    /// u K'(u), the CGF of the background driving Levy process at time 1.
    double bdlp_cgf(double u) const;
    double cumulant(unsigned m) const;
    /// Cumulants 1..max_order in one pass.
    std::vector<double> cumulants(unsigned max_order) const;

private:
    MarginalLaw(Variant v, bool centered);
    void check_domain(double u) const;
    Variant v_;
    bool centered_;
    double radius_;
};

double cgf(const MarginalLaw& law, double u);
double cumulant(const MarginalLaw& law, unsigned m);
double bdlp_cgf(const MarginalLaw& law, double u);

struct BdlpCheck {
    double cgf_value = 0.0;
    double integral = 0.0;
    double truncation = 0.0;
    double tail_bound = 0.0;
    bool agree = false;
};

/// Integrates s -> bdlp_cgf(law, e^-s u) over [0, S], with S chosen so the
/// neglected tail is below tol/2, and compares with cgf(law, u).
BdlpCheck bdlp_integral_check(const MarginalLaw& law, double u, double tol);
bool verify_bdlp_integral(const MarginalLaw& law, double u, double tol);

}  // namespace supou
