#pragma once
// Gumbel copula: closed-form cdf, Archimedean frailty sampling, and fitting
// by Kendall's-tau inversion. Dependence is rank-only, which is what makes
// the copula a clean summary of the transition matrices.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rgbm/mobility.hpp"
#include "rgbm/rng.hpp"

namespace rgbm {

struct GumbelParam {
    double theta = 1.0;

    explicit GumbelParam(double t) : theta(t) {
        if (!(t >= 1.0)) throw std::invalid_argument("GumbelParam: theta must be >= 1");
    }
};

inline double gumbel_cdf(double u, double v, const GumbelParam& p) {
    if (!(u > 0.0 && u <= 1.0 && v > 0.0 && v <= 1.0))
        throw std::invalid_argument("gumbel_cdf: u, v must lie in (0, 1]");
    double a = std::pow(-std::log(u), p.theta) + std::pow(-std::log(v), p.theta);
    return std::exp(-std::pow(a, 1.0 / p.theta));
}

// Positive-stable frailty construction: S is alpha-stable with alpha = 1/theta
// (Chambers-Mallows-Stuck trigonometric form), then u_i = exp(-(E_i/S)^alpha)
// have uniform margins with Gumbel dependence.
inline std::vector<std::pair<double, double>> gumbel_sample(std::size_t n, const GumbelParam& p,
                                                            CounterStream& rng) {
    const double alpha = 1.0 / p.theta;
    std::vector<std::pair<double, double>> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double vangle = M_PI * rng.next_unit();
        double w = -std::log(rng.next_unit());
        double s = std::sin(alpha * vangle) / std::pow(std::sin(vangle), p.theta) *
                   std::pow(std::sin((1.0 - alpha) * vangle) / w, (1.0 - alpha) / alpha);
        double e1 = -std::log(rng.next_unit());
        double e2 = -std::log(rng.next_unit());
        out.emplace_back(std::exp(-std::pow(e1 / s, alpha)), std::exp(-std::pow(e2 / s, alpha)));
    }
    return out;
}

namespace detail {

// Merge sort counting strict inversions, ascending order.
inline uint64_t merge_count(std::vector<double>& v, std::vector<double>& tmp, std::size_t lo,
                            std::size_t hi) {
    if (hi - lo < 2) return 0;
    std::size_t mid = lo + (hi - lo) / 2;
    uint64_t inv = merge_count(v, tmp, lo, mid) + merge_count(v, tmp, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            inv += mid - i;
            tmp[k++] = v[j++];
        } else {
            tmp[k++] = v[i++];
        }
    }
    while (i < mid) tmp[k++] = v[i++];
    while (j < hi) tmp[k++] = v[j++];
    std::copy(tmp.begin() + lo, tmp.begin() + hi, v.begin() + lo);
    return inv;
}

inline uint64_t tie_pairs(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    uint64_t total = 0;
    std::size_t i = 0;
    while (i < v.size()) {
        std::size_t j = i;
        while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
        uint64_t t = j - i + 1;
        total += t * (t - 1) / 2;
        i = j + 1;
    }
    return total;
}

} // namespace detail

// Kendall's tau-b via Knight's O(n log n) inversion count.
inline double kendall_tau(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("kendall_tau: need two equal vectors of length >= 2");
    std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];

    uint64_t n0 = static_cast<uint64_t>(n) * (n - 1) / 2;
    uint64_t n1 = detail::tie_pairs({x.begin(), x.end()});
    uint64_t n2 = detail::tie_pairs({y.begin(), y.end()});
    uint64_t n3 = 0; // pairs tied in both
    {
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
            if (j > i) n3 += detail::tie_pairs({ys.begin() + i, ys.begin() + j + 1});
            i = j + 1;
        }
    }
    std::vector<double> tmp(n);
    uint64_t inv = detail::merge_count(ys, tmp, 0, n);

    double num = static_cast<double>(n0) - static_cast<double>(n1) - static_cast<double>(n2) +
                 static_cast<double>(n3) - 2.0 * static_cast<double>(inv);
    double den = std::sqrt((static_cast<double>(n0) - static_cast<double>(n1)) *
                           (static_cast<double>(n0) - static_cast<double>(n2)));
    if (den == 0.0) throw std::invalid_argument("kendall_tau: degenerate ranks");
    return num / den;
}

struct GumbelFit {
    double theta = 1.0;
    bool comonotone = false; // tau within 1e-9 of 1; theta has no finite value
    double tau_kendall = 0.0;
};

inline GumbelFit fit_theta(const CrossSectionPair& pair) {
    pair.validate();
    if (pair.x_early.size() < 10) throw std::invalid_argument("fit_theta: need N >= 10");
    GumbelFit fit;
    fit.tau_kendall = kendall_tau(pair.x_early, pair.x_late);
    if (fit.tau_kendall >= 1.0 - 1e-9) {
        fit.comonotone = true;
        fit.theta = std::numeric_limits<double>::infinity();
    } else if (fit.tau_kendall <= 0.0) {
        fit.theta = 1.0;
    } else {
        fit.theta = 1.0 / (1.0 - fit.tau_kendall);
    }
    return fit;
}

inline TransitionMatrix copula_transition_matrix(const GumbelParam& p, std::size_t q,
                                                 std::size_t n, CounterStream& rng) {
    if (n < 10 * q * q)
        throw std::invalid_argument("copula_transition_matrix: need n >= 10 q^2");
    auto pairs = gumbel_sample(n, p, rng);
    CrossSectionPair cs;
    cs.x_early.reserve(n);
    cs.x_late.reserve(n);
    for (auto& [u, v] : pairs) {
        cs.x_early.push_back(u);
        cs.x_late.push_back(v);
    }
    cs.delta = 1.0; // placeholder; the matrix only uses ranks
    return transition_matrix(cs, q);
}

} // namespace rgbm
