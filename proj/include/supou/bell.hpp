#pragma once

#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace supou {

using BigInt = boost::multiprecision::cpp_int;

/// Partial Bell polynomial B_{m,k}(x_1, ..., x_{m-k+1}).
/// Requires 1 <= k <= m and x.size() == m - k + 1; throws SizeError otherwise.
double partial_bell(unsigned m, unsigned k, const std::vector<double>& x);

/// Exact integer evaluation of the same polynomial.
BigInt partial_bell(unsigned m, unsigned k, const std::vector<BigInt>& x);

/// Raw moments mu'_1..mu'_n from cumulants kappa_1..kappa_n.
std::vector<double> moments_from_cumulants(const std::vector<double>& kappa);

/// Inverse of moments_from_cumulants.
std::vector<double> cumulants_from_moments(const std::vector<double>& moments);

}  // namespace supou
