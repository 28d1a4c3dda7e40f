#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "supou/cumulant_engine.hpp"
#include "supou/marginal.hpp"
#include "supou/mixing.hpp"
#include "supou/scaling.hpp"

namespace supou {

/// Background driving process that is identically zero.
struct NullBdlp {};

/// Compound Poisson BDLP: `intensity` jumps per unit of BDLP time, each drawn
/// from `jumps`.
struct CompoundPoissonBdlp {
    double intensity;
    std::variant<ExponentialJumps, DeterministicJumps> jumps;
};

using BdlpModel = std::variant<NullBdlp, CompoundPoissonBdlp>;

/// Exact skeleton X(0), X(dt), ..., X(n_steps dt) of the OU process
/// dX = -lambda X dt + dL(lambda t), started at x0. Jumps inside each step are
/// placed uniformly and discounted by exp(-lambda (t + dt - s)).
std::vector<double> ou_component_path(double lambda, const BdlpModel& bdlp, double dt, std::size_t n_steps,
                                      double x0, std::mt19937_64& rng);

/// Draw from the stationary law of the OU process with the given BDLP.
double stationary_draw(const BdlpModel& bdlp, std::mt19937_64& rng);

/// Convenience overload with a stationary start.
std::vector<double> ou_component_path(double lambda, const BdlpModel& bdlp, double dt, std::size_t n_steps,
                                      std::mt19937_64& rng);

/// BDLP of the component carrying weight p of the marginal's cumulant function.
/// Only Gamma and compound-Poisson-driven marginals qualify.
BdlpModel component_bdlp(const MarginalLaw& law, double weight);

struct SimConfig {
    MixingMeasure mixing = MixingMeasure::degenerate(1.0);
    MarginalLaw marginal = MarginalLaw::gamma(1.0, 1.0);
    double horizon = 50.0;
    double step = 0.1;
    std::size_t replicas = 1000;
    std::uint64_t seed = 20240101;
    // Number of mixing atoms kept; 0 keeps the smallest count whose neglected
    // weight (hence neglected variance share) is below 1e-3.
    std::size_t truncation = 0;
    unsigned threads = 1;

    /// Throws ConfigError on invalid settings.
    void validate() const;
    std::size_t n_steps() const;
};

/// Seed of replica r's stream; depends only on (base, r).
std::uint64_t replica_seed(std::uint64_t base, std::uint64_t r);

struct PathEnsemble {
    double step = 0.0;
    std::vector<double> rates;    // lambda_k
    std::vector<double> weights;  // p_k after renormalization
    double truncated_mass = 0.0;  // mixing mass dropped before renormalization
    double mean_shift = 0.0;      // subtracted from every path when the law is centered
    std::vector<std::uint64_t> seeds;
    std::vector<std::vector<double>> paths;  // [replica][i] = X(i step)
    std::vector<std::string> warnings;

    std::size_t replicas() const { return paths.size(); }
    std::size_t length() const { return paths.empty() ? 0 : paths.front().size(); }
};

PathEnsemble superposition_path(const SimConfig& cfg);

/// Y(t_j) for every replica.
struct AggregateEnsemble {
    AggregateKind kind = AggregateKind::Integrated;
    std::vector<double> times;
    std::vector<std::vector<double>> values;  // [replica][j]

    std::size_t time_index(double t) const;
};

/// Integrated: trapezoid rule on the skeleton, times i*step.
/// PartialSum: X(1) + ... + X(k) at integer k; needs 1/step to be an integer.
AggregateEnsemble aggregate_path(const PathEnsemble& ens, AggregateKind kind);

inline constexpr std::size_t kMinReplicasHigherCumulants = 30;

/// E|Y(t)|^q with jackknife standard errors. Exponents q > 4 are flagged
/// mc_unreliable.
MomentTable empirical_moments(const AggregateEnsemble& agg, const std::vector<double>& q,
                              const std::vector<double>& times);

/// k-statistics k_1..k_4 with jackknife standard errors; method = empirical.
CumulantTable empirical_cumulants(const AggregateEnsemble& agg, const std::vector<unsigned>& orders,
                                  const std::vector<double>& times);

/// Unbiased k-statistic of order 1..4 of a sample.
double k_statistic(const std::vector<double>& sample, unsigned order);

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Correlation of X(s) and X(s + lag) pooled over replicas and all s, with a
/// leave-one-replica-out jackknife standard error.
Estimate lag_autocorrelation(const PathEnsemble& ens, double lag);

/// CSV "t,mean,variance" of the skeleton at each grid time.
void write_path_summary(std::ostream& os, const PathEnsemble& ens);
/// CSV "replica,seed".
void write_seed_ledger(std::ostream& os, const PathEnsemble& ens);
/// CSV "replica,i,t,x"; size grows as replicas * steps.
void write_raw_paths(std::ostream& os, const PathEnsemble& ens);

}  // namespace supou
