#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "supou/cumulant_engine.hpp"

namespace supou {

/// Smallest even integer strictly greater than 2 alpha.
unsigned q_star(double alpha);

/// tau(q) = q - alpha where it is established (q >= q_star); std::nullopt
/// ("unknown") below q_star.
std::optional<double> theoretical_tau(double q, double alpha);

/// sigma(m) = m - alpha for m > alpha + 1, std::nullopt otherwise
/// (including the boundary m = alpha + 1).
std::optional<double> theoretical_sigma(unsigned m, double alpha);

inline constexpr double kDefaultSlopeTolerance = 0.05;
inline constexpr double kDefaultRatioTolerance = 0.02;

struct FitWindow {
    double t_min = 1e3;
    double t_max = 1e6;
};

/// 25 log-spaced points covering the default window.
std::vector<double> default_time_grid();
std::vector<double> log_spaced(double lo, double hi, std::size_t count);

/// One fitted exponent: OLS slope of log|value| on log t.
struct ExponentFit {
    double exponent = 0.0;  // q or m
    double estimate = 0.0;
    double std_error = 0.0;
    double r2 = 0.0;
    double t_min = 0.0;
    double t_max = 0.0;
    std::size_t n_points = 0;
    // False where no asymptotic value is established for this exponent.
    bool within_guarantee = true;
    std::vector<double> log_t;
    std::vector<double> log_value;
};

enum class FitQuantity { Sigma, Tau };

struct ScalingFit {
    FitQuantity quantity = FitQuantity::Sigma;
    std::vector<ExponentFit> rows;

    std::vector<double> exponents() const;
    std::vector<double> estimates() const;
};

/// Selects the grid points inside the window and fits log|value| on log t.
/// The window must hold at least 5 points spanning at least two decades
/// (ConfigError otherwise); a zero value raises DomainError naming its t.
ExponentFit fit_power_law(const std::vector<double>& times, const std::vector<double>& values, double exponent,
                          const FitWindow& window = {});

ExponentFit fit_sigma(const CumulantTable& table, unsigned m, const FitWindow& window = {});

/// E|Y(t)|^q on a time grid, analytic or empirical.
struct MomentTable {
    AggregateKind kind = AggregateKind::Integrated;
    Method method = Method::Analytic;
    std::vector<double> exponents;  // q values
    std::vector<double> times;
    std::vector<std::vector<double>> values;      // [q index][t index]
    std::vector<std::vector<double>> std_errors;  // empty for analytic tables
    std::vector<bool> mc_unreliable;              // per q, empirical tables only

    std::size_t exponent_index(double q) const;
};

/// Even absolute moments E Y(t)^q obtained from a cumulant table through the
/// cumulant-to-moment conversion. The table must hold every order 1..max(q).
MomentTable moments_from_cumulant_table(const CumulantTable& table, const std::vector<unsigned>& even_q);

/// Fits tau(q); a nonpositive moment raises DomainError.
ExponentFit fit_tau(const std::vector<double>& times, const std::vector<double>& moments, double q,
                    const FitWindow& window = {});
ExponentFit fit_tau(const MomentTable& table, double q, const FitWindow& window = {});

enum class Verdict { Intermittent, NotIntermittent, Inconclusive };
std::string to_string(Verdict v);

/// Intermittent if some p < r has est(p)/p + tol < est(r)/r; not intermittent
/// if every ratio est/q agrees within tol; inconclusive otherwise or with
/// fewer than two exponents.
Verdict intermittency_test(const ScalingFit& fit, double tol = kDefaultRatioTolerance);

/// Second differences of the estimates (over possibly uneven q) >= -tol and
/// est(q)/q nondecreasing within tol. Needs three exponents.
bool convexity_check(const ScalingFit& fit, double tol);

/// CSV columns q,estimate,stderr,r2,t_min,t_max,n_points,verdict.
void write_csv(std::ostream& os, const ScalingFit& fit, Verdict verdict);

/// One "log_t log_value" file per exponent, named <prefix>_<q>.dat.
/// Returns the written paths.
std::vector<std::filesystem::path> write_plot_data(const std::filesystem::path& dir, const std::string& prefix,
                                                   const ScalingFit& fit);

}  // namespace supou
