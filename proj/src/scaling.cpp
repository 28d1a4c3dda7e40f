#include "supou/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "supou/bell.hpp"
#include "supou/errors.hpp"
#include "supou/format.hpp"

namespace supou {

unsigned q_star(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("q_star needs alpha > 0");
    unsigned q = 2;
    while (!(static_cast<double>(q) > 2.0 * alpha)) q += 2;
    return q;
}

std::optional<double> theoretical_tau(double q, double alpha) {
    if (!(q > 0.0)) throw DomainError("theoretical_tau needs q > 0");
    if (q < static_cast<double>(q_star(alpha))) return std::nullopt;
    return q - alpha;
}

std::optional<double> theoretical_sigma(unsigned m, double alpha) {
    if (!(alpha > 0.0)) throw DomainError("theoretical_sigma needs alpha > 0");
    if (static_cast<double>(m) > alpha + 1.0) return static_cast<double>(m) - alpha;
    return std::nullopt;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi >= lo)) throw ConfigError("log-spaced grid needs 0 < min <= max");
    if (count == 0) throw ConfigError("log-spaced grid needs at least one point");
    if (count == 1) return {lo};
    std::vector<double> out(count);
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<double> default_time_grid() {
    const FitWindow w;
    return log_spaced(w.t_min, w.t_max, 25);
}

std::vector<double> ScalingFit::exponents() const {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r.exponent);
    return v;
}

std::vector<double> ScalingFit::estimates() const {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r.estimate);
    return v;
}

ExponentFit fit_power_law(const std::vector<double>& times, const std::vector<double>& values, double exponent,
                          const FitWindow& window) {
    if (times.size() != values.size()) throw SizeError("times and values differ in length");
    if (!(window.t_min > 0.0) || !(window.t_max > window.t_min))
        throw ConfigError("fit window needs 0 < t_min < t_max");
    const double slack = 1e-9;
    ExponentFit fit;
    fit.exponent = exponent;
    std::vector<double> used;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        if (t < window.t_min * (1.0 - slack) || t > window.t_max * (1.0 + slack)) continue;
        if (values[i] == 0.0 || !std::isfinite(values[i])) {
            std::ostringstream os;
            os << "value at t=" << format_double(t) << " is " << values[i] << "; log-log fit impossible";
            throw DomainError(os.str());
        }
        used.push_back(t);
        fit.log_t.push_back(std::log(t));
        fit.log_value.push_back(std::log(std::abs(values[i])));
    }
    const std::size_t n = fit.log_t.size();
    if (n < 5) {
        std::ostringstream os;
        os << "fit window [" << window.t_min << ", " << window.t_max << "] holds " << n
           << " grid points; at least 5 are required";
        throw ConfigError(os.str());
    }
    const double decades = (fit.log_t.back() - fit.log_t.front()) / std::log(10.0);
    if (decades < 2.0 - 1e-9) {
        std::ostringstream os;
        os << "fit window points span " << decades << " decades; at least 2 are required";
        throw ConfigError(os.str());
    }
    fit.t_min = used.front();
    fit.t_max = used.back();
    fit.n_points = n;

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += fit.log_t[i];
        my += fit.log_value[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = fit.log_t[i] - mx;
        const double dy = fit.log_value[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = fit.log_value[i] - (intercept + slope * fit.log_t[i]);
        ssr += r * r;
    }
    fit.estimate = slope;
    fit.std_error = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
    // a residual at rounding level is a perfect fit even when syy is itself rounding noise
    const double noise = 1e-24 * static_cast<double>(n) * std::max(1.0, my * my);
    fit.r2 = (ssr <= noise || syy <= 0.0) ? 1.0 : std::max(0.0, 1.0 - ssr / syy);
    return fit;
}

ExponentFit fit_sigma(const CumulantTable& table, unsigned m, const FitWindow& window) {
    const auto i = table.order_index(m);
    ExponentFit fit = fit_power_law(table.times, table.values[i], static_cast<double>(m), window);
    return fit;
}

std::size_t MomentTable::exponent_index(double q) const {
    for (std::size_t i = 0; i < exponents.size(); ++i)
        if (exponents[i] == q) return i;
    throw DomainError("exponent " + std::to_string(q) + " is not in the moment table");
}

MomentTable moments_from_cumulant_table(const CumulantTable& table, const std::vector<unsigned>& even_q) {
    if (even_q.empty()) throw ConfigError("moment conversion needs at least one exponent");
    const unsigned qmax = *std::max_element(even_q.begin(), even_q.end());
    for (unsigned q : even_q)
        if (q == 0 || q % 2 != 0)
            throw ConfigError("cumulant-to-moment conversion gives E|Y|^q only for even q; got " + std::to_string(q));
    for (unsigned m = 1; m <= qmax; ++m) (void)table.order_index(m);

    MomentTable out;
    out.kind = table.kind;
    out.method = table.method;
    out.times = table.times;
    for (unsigned q : even_q) out.exponents.push_back(static_cast<double>(q));
    out.values.assign(even_q.size(), std::vector<double>(table.times.size(), 0.0));
    for (std::size_t j = 0; j < table.times.size(); ++j) {
        std::vector<double> kappa(qmax);
        for (unsigned m = 1; m <= qmax; ++m) kappa[m - 1] = table.values[table.order_index(m)][j];
        const auto mu = moments_from_cumulants(kappa);
        for (std::size_t i = 0; i < even_q.size(); ++i) out.values[i][j] = mu[even_q[i] - 1];
    }
    return out;
}

ExponentFit fit_tau(const std::vector<double>& times, const std::vector<double>& moments, double q,
                    const FitWindow& window) {
    for (std::size_t i = 0; i < moments.size(); ++i) {
        if (!(moments[i] > 0.0)) {
            std::ostringstream os;
            os << "moment of order " << q << " at t=" << format_double(times.at(i)) << " is not positive";
            throw DomainError(os.str());
        }
    }
    return fit_power_law(times, moments, q, window);
}

ExponentFit fit_tau(const MomentTable& table, double q, const FitWindow& window) {
    return fit_tau(table.times, table.values[table.exponent_index(q)], q, window);
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Intermittent: return "intermittent";
        case Verdict::NotIntermittent: return "not-intermittent";
        case Verdict::Inconclusive: break;
    }
    return "inconclusive";
}

namespace {

std::vector<std::pair<double, double>> sorted_points(const ScalingFit& fit) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : fit.rows) pts.emplace_back(r.exponent, r.estimate);
    std::sort(pts.begin(), pts.end());
    return pts;
}

}  // namespace

Verdict intermittency_test(const ScalingFit& fit, double tol) {
    const auto pts = sorted_points(fit);
    if (pts.size() < 2) return Verdict::Inconclusive;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    bool strict_increase = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double ri = pts[i].second / pts[i].first;
        lo = std::min(lo, ri);
        hi = std::max(hi, ri);
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double rj = pts[j].second / pts[j].first;
            if (pts[i].first < pts[j].first && ri + tol < rj) strict_increase = true;
        }
    }
    if (strict_increase) return Verdict::Intermittent;
    if (hi - lo <= tol) return Verdict::NotIntermittent;
    return Verdict::Inconclusive;
}

bool convexity_check(const ScalingFit& fit, double tol) {
    const auto pts = sorted_points(fit);
    if (pts.size() < 3) throw DomainError("convexity check needs at least three exponents");
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        const double left = (pts[i].second - pts[i - 1].second) / (pts[i].first - pts[i - 1].first);
        const double right = (pts[i + 1].second - pts[i].second) / (pts[i + 1].first - pts[i].first);
        if (right - left < -tol) return false;
    }
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i].second / pts[i].first < pts[i - 1].second / pts[i - 1].first - tol) return false;
    return true;
}

void write_csv(std::ostream& os, const ScalingFit& fit, Verdict verdict) {
    os << "q,estimate,stderr,r2,t_min,t_max,n_points,verdict\n";
    for (const auto& r : fit.rows)
        os << format_double(r.exponent) << ',' << format_double(r.estimate) << ',' << format_double(r.std_error)
           << ',' << format_double(r.r2) << ',' << format_double(r.t_min) << ',' << format_double(r.t_max) << ','
           << r.n_points << ',' << to_string(verdict) << '\n';
}

std::vector<std::filesystem::path> write_plot_data(const std::filesystem::path& dir, const std::string& prefix,
                                                   const ScalingFit& fit) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    for (const auto& r : fit.rows) {
        std::ostringstream name;
        name << prefix << '_' << r.exponent << ".dat";
        const auto path = dir / name.str();
        std::ofstream out(path);
        if (!out) throw ComputationError("cannot write " + path.string());
        out << "# log_t log_value  exponent=" << r.exponent << " slope=" << format_double(r.estimate) << '\n';
        for (std::size_t i = 0; i < r.log_t.size(); ++i)
            out << format_double(r.log_t[i]) << ' ' << format_double(r.log_value[i]) << '\n';
        written.push_back(path);
    }
    return written;
}

}  // namespace supou
