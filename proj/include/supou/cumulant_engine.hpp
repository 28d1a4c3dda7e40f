#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "supou/marginal.hpp"
#include "supou/mixing.hpp"
#include "supou/quadrature.hpp"

namespace supou {

enum class AggregateKind { Integrated, PartialSum };

enum class IntegratedForm {
    Direct,  // closed-form bracket a_{m-1} + t xi + sum ..., times xi^-m
    Kernel,  // inner integral of (1 - e^-w)^(m-1) over [0, xi t] by quadrature
};

enum class PartialSumForm {
    Expanded,  // geometric sums over j = 1..m
    Summed,    // explicit loop over k = 1..floor(t)-1
};

enum class Method { Analytic, Empirical };

std::string to_string(AggregateKind kind);
std::string to_string(Method method);
AggregateKind parse_aggregate_kind(const std::string& s);

using Rational = boost::multiprecision::cpp_rational;

/// a_{m-1} = sum_{k=1}^{m-1} (-1)^k C(m-1,k) / k, exact. a_0 = 0.
Rational a_coeff(unsigned m);

namespace kernel {
/// K_m(x) = int_0^x (1 - e^-w)^(m-1) dw through the closed bracket of the
/// direct form, switching to a positive series where the bracket cancels.
double integrated_direct(unsigned m, double x);
/// Same quantity by adaptive quadrature of the inner integral.
double integrated_quadrature(unsigned m, double x);
/// sum_{k=1}^{n-1} (1 - e^{-k xi})^m through the geometric expansion, with a
/// cancellation-free fallback when the expansion is ill conditioned.
double partial_inner_expanded(unsigned m, long long n, double xi);
/// The same sum by explicit summation.
double partial_inner_summed(unsigned m, long long n, double xi);
/// eps(a, b) = (1 - e^{-ab}) / b
double epsilon(double a, double b);
/// eta(a, b) = e^{-b} (1 - e^{-ab}) / (1 - e^{-b})
double eta(double a, double b);
}  // namespace kernel

/// Summed form is refused above this many terms.
inline constexpr long long kMaxSummedTerms = 100000;

quad::Options default_factor_options();

/// I_{m-1}(t). I_0(t) = t exactly.
double integrated_factor(const MixingMeasure& mix, unsigned m, double t, IntegratedForm form = IntegratedForm::Direct,
                         const quad::Options& opts = default_factor_options());

/// J_{m-1}(t); depends on t through floor(t) only. J_0(t) = floor(t) exactly.
double partial_sum_factor(const MixingMeasure& mix, unsigned m, double t,
                          PartialSumForm form = PartialSumForm::Expanded,
                          const quad::Options& opts = default_factor_options());

/// kappa_X^(m) m I_{m-1}(t) or kappa_X^(m) J_{m-1}(t).
double aggregate_cumulant(const MixingMeasure& mix, const MarginalLaw& law, AggregateKind kind, unsigned m, double t);

struct CumulantTable {
    AggregateKind kind = AggregateKind::Integrated;
    Method method = Method::Analytic;
    std::vector<unsigned> orders;
    std::vector<double> times;
    // values[i][j] and factors[i][j] belong to orders[i], times[j].
    std::vector<std::vector<double>> values;
    std::vector<std::vector<double>> factors;
    // Empirical tables carry standard errors; empty for analytic ones.
    std::vector<std::vector<double>> std_errors;

    std::size_t order_index(unsigned m) const;
    const std::vector<double>& row(unsigned m) const { return values.at(order_index(m)); }
};

/// Evaluates aggregate_cumulant on the orders x times grid. Cells are spread
/// over `threads` workers; the result does not depend on the worker count.
CumulantTable cumulant_table(const MixingMeasure& mix, const MarginalLaw& law, AggregateKind kind,
                             const std::vector<unsigned>& orders, const std::vector<double>& times,
                             unsigned threads = 1);

struct CrossFormReport {
    double max_relative = 0.0;
    std::size_t compared = 0;
    // Partial-sum cells beyond kMaxSummedTerms have no summed counterpart.
    std::size_t skipped = 0;
};

/// Recomputes every factor with the alternate form (kernel for integrated,
/// summed for partial sums) and reports the largest relative discrepancy.
CrossFormReport cross_form_discrepancy(const MixingMeasure& mix, const CumulantTable& table);

/// CSV with header kind,m,t,factor,cumulant,method.
void write_csv(std::ostream& os, const CumulantTable& table);

}  // namespace supou
