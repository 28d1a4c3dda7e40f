#include "supou/bell.hpp"

#include <sstream>

#include "supou/errors.hpp"

namespace supou {
namespace {

void check_args(unsigned m, unsigned k, std::size_t n) {
    if (k < 1 || k > m) {
        std::ostringstream os;
        os << "partial Bell polynomial needs 1 <= k <= m, got m=" << m << ", k=" << k;
        throw SizeError(os.str());
    }
    if (n != m - k + 1) {
        std::ostringstream os;
        os << "B_{" << m << "," << k << "} takes " << (m - k + 1) << " arguments, got " << n;
        throw SizeError(os.str());
    }
}

// B_{n,j} for n <= m, j <= k, by B_{n,j} = sum_i C(n-1, i-1) x_i B_{n-i, j-1}.
template <class T>
T bell_table(unsigned m, unsigned k, const std::vector<T>& x) {
    std::vector<std::vector<T>> b(m + 1, std::vector<T>(k + 1, T(0)));
    b[0][0] = T(1);
    // C(n-1, i-1) row by row
    std::vector<std::vector<T>> binom(m + 1);
    for (unsigned n = 0; n <= m; ++n) {
        binom[n].assign(n + 1, T(1));
        for (unsigned i = 1; i < n; ++i) binom[n][i] = binom[n - 1][i - 1] + binom[n - 1][i];
    }
    for (unsigned j = 1; j <= k; ++j) {
        for (unsigned n = j; n <= m; ++n) {
            T sum(0);
            // block containing element 1 has size i; the rest forms j-1 blocks
            for (unsigned i = 1; i + (j - 1) <= n && i <= x.size(); ++i) {
                const T& rest = b[n - i][j - 1];
                if (rest == T(0)) continue;
                sum += binom[n - 1][i - 1] * x[i - 1] * rest;
            }
            b[n][j] = sum;
        }
    }
    return b[m][k];
}

}  // namespace

double partial_bell(unsigned m, unsigned k, const std::vector<double>& x) {
    check_args(m, k, x.size());
    return bell_table<double>(m, k, x);
}

BigInt partial_bell(unsigned m, unsigned k, const std::vector<BigInt>& x) {
    check_args(m, k, x.size());
    return bell_table<BigInt>(m, k, x);
}

// Both conversions accumulate in extended precision; the cancellation between
// terms of alternating sign grows quickly with the order.
std::vector<double> moments_from_cumulants(const std::vector<double>& kappa) {
    const std::size_t n = kappa.size();
    const std::vector<long double> wide(kappa.begin(), kappa.end());
    std::vector<double> mu(n, 0.0);
    for (std::size_t order = 1; order <= n; ++order) {
        long double s = 0.0L;
        for (std::size_t k = 1; k <= order; ++k) {
            const std::vector<long double> args(wide.begin(), wide.begin() + static_cast<long>(order - k + 1));
            s += bell_table<long double>(static_cast<unsigned>(order), static_cast<unsigned>(k), args);
        }
        mu[order - 1] = static_cast<double>(s);
    }
    return mu;
}

std::vector<double> cumulants_from_moments(const std::vector<double>& moments) {
    const std::size_t n = moments.size();
    std::vector<long double> kappa(n, 0.0L);
    for (std::size_t order = 1; order <= n; ++order) {
        // kappa_n = mu'_n - sum_{k=1}^{n-1} C(n-1, k-1) kappa_k mu'_{n-k}
        long double s = moments[order - 1];
        long double c = 1.0L;  // C(n-1, k-1)
        for (std::size_t k = 1; k < order; ++k) {
            s -= c * kappa[k - 1] * static_cast<long double>(moments[order - k - 1]);
            c = c * static_cast<long double>(order - k) / static_cast<long double>(k);
        }
        kappa[order - 1] = s;
    }
    return std::vector<double>(kappa.begin(), kappa.end());
}

}  // namespace supou
