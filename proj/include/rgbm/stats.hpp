#pragma once
// Small numerical toolbox: fixed-order pairwise summation, least squares,
// and the classical test statistics used by the mixing diagnostics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace rgbm {

// Pairwise (cascade) summation. Fixed association for a given length, so the
// result is identical no matter how the caller produced the buffer.
inline double pairwise_sum(const double* p, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += p[i];
        return s;
    }
    std::size_t half = n / 2;
    return pairwise_sum(p, half) + pairwise_sum(p + half, n - half);
}

inline double pairwise_sum(std::span<const double> v) { return pairwise_sum(v.data(), v.size()); }

inline double mean(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("mean: empty input");
    return pairwise_sum(v) / static_cast<double>(v.size());
}

// Unbiased sample variance, two-pass.
inline double variance(std::span<const double> v) {
    if (v.size() < 2) throw std::invalid_argument("variance: need at least 2 values");
    double m = mean(v);
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m) * (v[i] - m);
    return pairwise_sum(sq) / static_cast<double>(v.size() - 1);
}

struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double r_squared = 0.0;
    std::size_t n = 0;
};

inline OlsFit ols_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("ols_fit: length mismatch");
    std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("ols_fit: need at least 2 points");
    double mx = mean(x), my = mean(y);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("ols_fit: regressor has zero variance");
    OlsFit fit;
    fit.n = n;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += r * r;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    if (n > 2) fit.slope_se = std::sqrt(ss_res / static_cast<double>(n - 2) / sxx);
    return fit;
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("pearson: need two equal vectors of length >= 2");
    double ma = mean(a), mb = mean(b);
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
        sab += (a[i] - ma) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0)
        throw std::invalid_argument("pearson: undefined for a constant vector");
    return sab / std::sqrt(saa * sbb);
}

// Regularized incomplete gamma functions P and Q.
inline double gamma_p(double a, double x) { return boost::math::gamma_p(a, x); }
inline double gamma_q(double a, double x) { return boost::math::gamma_q(a, x); }

// Two-sided Student-t critical value, e.g. confidence 0.95.
inline double t_critical(double confidence, std::size_t dof) {
    boost::math::students_t dist(static_cast<double>(dof));
    return boost::math::quantile(dist, 0.5 + confidence / 2.0);
}

// Kolmogorov tail Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
inline double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double s = 0.0;
    for (int j = 1; j <= 100; ++j) {
        double term = 2.0 * std::exp(-2.0 * j * j * lambda * lambda);
        s += (j % 2 == 1) ? term : -term;
        if (term < 1e-16) break;
    }
    return std::clamp(s, 0.0, 1.0);
}

// One-sample KS statistic against a cdf. Sorts a copy of the sample.
template <typename Cdf>
double ks_statistic(std::vector<double> sample, Cdf&& cdf) {
    if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(sample.begin(), sample.end());
    double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        double f = cdf(sample[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

// Asymptotic KS critical value at level alpha for sample size n.
inline double ks_critical(double alpha, std::size_t n) {
    return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

// Upper tail of the chi-squared distribution.
inline double chi_squared_pvalue(double stat, std::size_t dof) {
    if (dof == 0) throw std::invalid_argument("chi_squared_pvalue: zero degrees of freedom");
    return gamma_q(static_cast<double>(dof) / 2.0, stat / 2.0);
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median: empty input");
    std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    double lo = *std::max_element(v.begin(), v.begin() + mid);
    return 0.5 * (lo + hi);
}

} // namespace rgbm
