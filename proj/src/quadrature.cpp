#include "supou/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "supou/errors.hpp"

namespace supou::quad {
namespace {

// Kronrod abscissae (descending) and weights for the 21-point rule; the odd
// indices are the embedded 10-point Gauss nodes.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525578757, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
    double lo;
    double hi;
    double value;
    double error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

// Error estimate as in QUADPACK's qk21: the raw Gauss/Kronrod difference is
// rescaled by the variation of f over the interval, which keeps it honest on
// intervals where the rule has not yet resolved a singularity.
Segment apply_rule(const Integrand& f, double lo, double hi) {
    const double centre = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double fc = f(centre);
    std::array<double, 10> f1{}, f2{};
    double kronrod = fc * kWgk[10];
    double gauss = 0.0;
    double resabs = std::abs(kronrod);
    for (std::size_t j = 0; j < 10; ++j) {
        const double dx = half * kXgk[j];
        f1[j] = f(centre - dx);
        f2[j] = f(centre + dx);
        const double pair = f1[j] + f2[j];
        kronrod += kWgk[j] * pair;
        resabs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) gauss += kWg[j / 2] * pair;
    }
    const double mean = 0.5 * kronrod;
    double resasc = kWgk[10] * std::abs(fc - mean);
    for (std::size_t j = 0; j < 10; ++j) resasc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
    const double scale = std::abs(half);
    kronrod *= half;
    gauss *= half;
    resabs *= scale;
    resasc *= scale;
    double err = std::abs(kronrod - gauss);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
    if (!std::isfinite(kronrod)) err = std::numeric_limits<double>::infinity();
    return {lo, hi, kronrod, err};
}

}  // namespace

std::string Result::describe() const {
    std::ostringstream os;
    os.precision(6);
    os << "quadrature did not converge: value=" << value << " error=" << error
       << " after " << intervals << " subintervals; worst subinterval [" << worst_lo << ", "
       << worst_hi << "] error " << worst_error;
    return os.str();
}

Result gauss_kronrod(const Integrand& f, double lo, double hi, const Options& opts) {
    Result res;
    if (lo == hi) {
        res.converged = true;
        return res;
    }
    std::priority_queue<Segment> heap;
    Segment first = apply_rule(f, lo, hi);
    heap.push(first);
    double total = first.value;
    double total_err = first.error;
    std::size_t count = 1;

    auto done = [&] {
        return std::isfinite(total) &&
               total_err <= std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
    };
    while (!done() && count < opts.max_intervals) {
        Segment worst = heap.top();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (mid <= worst.lo || mid >= worst.hi) break;  // interval exhausted in double
        heap.pop();
        Segment left = apply_rule(f, worst.lo, mid);
        Segment right = apply_rule(f, mid, worst.hi);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++count;
    }
    // Re-sum to shed the drift of the running updates.
    total = 0.0;
    total_err = 0.0;
    std::vector<Segment> segs;
    segs.reserve(heap.size());
    while (!heap.empty()) {
        segs.push_back(heap.top());
        heap.pop();
    }
    std::sort(segs.begin(), segs.end(),
              [](const Segment& a, const Segment& b) { return std::abs(a.value) < std::abs(b.value); });
    for (const auto& s : segs) {
        total += s.value;
        total_err += s.error;
    }
    const auto worst = std::max_element(segs.begin(), segs.end());
    res.value = total;
    res.error = total_err;
    res.intervals = count;
    res.worst_lo = worst->lo;
    res.worst_hi = worst->hi;
    res.worst_error = worst->error;
    res.converged = done();
    return res;
}

Result half_line(const Integrand& f, const Options& opts) {
    auto mapped = [&f](double u) {
        if (u <= 0.0 || u >= 1.0) return 0.0;
        const double v = 1.0 - u;
        const double x = u / v;
        const double y = f(x);
        return y == 0.0 ? 0.0 : y / (v * v);
    };
    Result r = gauss_kronrod(mapped, 0.0, 1.0, opts);
    auto to_x = [](double u) { return u >= 1.0 ? std::numeric_limits<double>::infinity() : u / (1.0 - u); };
    r.worst_lo = to_x(r.worst_lo);
    r.worst_hi = to_x(r.worst_hi);
    return r;
}

Result half_line(const Integrand& f, const std::vector<double>& breakpoints, const Options& opts) {
    std::vector<double> cuts;
    for (double b : breakpoints)
        if (b > 0.0 && std::isfinite(b)) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    if (cuts.empty()) return half_line(f, opts);

    Options piece = opts;
    piece.abs_tol = opts.abs_tol / static_cast<double>(cuts.size() + 1);
    Result total;
    total.converged = true;
    total.worst_error = -1.0;
    auto absorb = [&total](const Result& r) {
        total.value += r.value;
        total.error += r.error;
        total.intervals += r.intervals;
        total.converged = total.converged && r.converged;
        if (r.worst_error > total.worst_error) {
            total.worst_error = r.worst_error;
            total.worst_lo = r.worst_lo;
            total.worst_hi = r.worst_hi;
        }
    };
    double lo = 0.0;
    for (double b : cuts) {
        absorb(gauss_kronrod(f, lo, b, piece));
        lo = b;
    }
    const double shift = lo;
    Result tail = half_line([&f, shift](double x) { return f(shift + x); }, piece);
    tail.worst_lo += shift;
    tail.worst_hi += shift;
    absorb(tail);
    return total;
}

double integrate(const Integrand& f, double lo, double hi, const Options& opts) {
    const Result r = gauss_kronrod(f, lo, hi, opts);
    if (!r.converged) throw ComputationError(r.describe());
    return r.value;
}

double integrate_half_line(const Integrand& f, const std::vector<double>& breakpoints, const Options& opts) {
    const Result r = half_line(f, breakpoints, opts);
    if (!r.converged) throw ComputationError(r.describe());
    return r.value;
}

double integrate_half_line(const Integrand& f, const Options& opts) {
    const Result r = half_line(f, opts);
    if (!r.converged) throw ComputationError(r.describe());
    return r.value;
}

}  // namespace supou::quad
