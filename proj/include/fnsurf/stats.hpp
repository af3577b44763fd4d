#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "errors.hpp"
#include "random.hpp"

namespace fnsurf::stats {

inline double mean(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// Sample standard deviation (n - 1 denominator).
inline double stddev(const std::vector<double>& x) {
    if (x.size() < 2) return 0.0;
    double m = mean(x), s = 0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size() - 1));
}

inline double std_error(const std::vector<double>& x) {
    return x.size() < 2 ? 0.0 : stddev(x) / std::sqrt(static_cast<double>(x.size()));
}

inline double chi2_sf(double stat, double dof) {
    if (stat <= 0) return 1.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), stat));
}

// Goodness of fit of observed counts against expected counts.
inline double chi2_gof_pvalue(const std::vector<double>& observed, const std::vector<double>& expected) {
    double s = 0;
    for (std::size_t i = 0; i < observed.size(); ++i)
        s += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
    return chi2_sf(s, static_cast<double>(observed.size() - 1));
}

// Pearson independence test on an r x c contingency table (row-major).
inline double chi2_independence_pvalue(const std::vector<double>& table, int rows, int cols) {
    std::vector<double> rs(rows, 0), cs(cols, 0);
    double n = 0;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            rs[i] += table[i * cols + j];
            cs[j] += table[i * cols + j];
            n += table[i * cols + j];
        }
    double s = 0;
    int r_eff = 0, c_eff = 0;
    for (double v : rs) r_eff += v > 0;
    for (double v : cs) c_eff += v > 0;
    if (r_eff < 2 || c_eff < 2) return 1.0;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            double e = rs[i] * cs[j] / n;
            if (e > 0) s += (table[i * cols + j] - e) * (table[i * cols + j] - e) / e;
        }
    return chi2_sf(s, static_cast<double>((r_eff - 1) * (c_eff - 1)));
}

// Survival function of the Kolmogorov distribution.
inline double kolmogorov_sf(double lambda) {
    if (lambda < 0.2) return 1.0;
    double s = 0;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(s, 0.0, 1.0);
}

inline double ks_pvalue_from_d(double d, double n_eff) {
    double sn = std::sqrt(n_eff);
    return kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
}

// One-sample test against a continuous CDF.
template <class Cdf>
double ks_one_sample_pvalue(std::vector<double> x, Cdf cdf) {
    std::sort(x.begin(), x.end());
    double n = static_cast<double>(x.size()), d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double f = cdf(x[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return ks_pvalue_from_d(d, n);
}

inline double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0;
    while (i < a.size() && j < b.size()) {
        double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return ks_pvalue_from_d(d, na * nb / (na + nb));
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = mean(x), my = mean(y), sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return (sxx > 0 && syy > 0) ? sxy / std::sqrt(sxx * syy) : 0.0;
}

struct LineFit {
    double slope, intercept;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = mean(x), my = mean(y), sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0) throw ArgumentError("least squares needs two distinct abscissae");
    double s = sxy / sxx;
    return {s, my - s * mx};
}

inline double quantile(std::vector<double> x, double q) {
    if (x.empty()) return 0.0;
    std::sort(x.begin(), x.end());
    double pos = q * static_cast<double>(x.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

// Percentile bootstrap of a statistic of resampled rows.
template <class Stat>
std::pair<double, double> bootstrap_ci(std::size_t n, Stat stat, int reps, std::uint64_t seed, double level = 0.95) {
    Rng rng = make_rng(seed);
    std::vector<double> vals;
    std::vector<std::size_t> idx(n);
    for (int r = 0; r < reps; ++r) {
        for (auto& i : idx) i = static_cast<std::size_t>(uniform_below(rng, n));
        vals.push_back(stat(idx));
    }
    double a = 0.5 * (1.0 - level);
    return {quantile(vals, a), quantile(vals, 1.0 - a)};
}

}  // namespace fnsurf::stats
