#pragma once
// Mobility measures on a pair of wealth cross-sections: Spearman rank
// correlation, intragenerational earnings elasticity, and quantile
// transition matrices.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "rgbm/io.hpp"
#include "rgbm/stats.hpp"

namespace rgbm {

struct CrossSectionPair {
    std::vector<double> x_early;
    std::vector<double> x_late;
    double delta = 0.0; // years between the two cross-sections

    void validate() const {
        if (x_early.size() != x_late.size())
            throw std::invalid_argument("CrossSectionPair: length mismatch");
        if (x_early.empty()) throw std::invalid_argument("CrossSectionPair: empty");
        if (!(delta > 0.0)) throw std::invalid_argument("CrossSectionPair: delta must be > 0");
    }
};

// Ascending ranks 1..N; ties share the average of the ranks they span.
inline std::vector<double> rank_transform(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("rank_transform: empty input");
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

// Ordinal ranks 1..N, ties broken by lower index first.
inline std::vector<std::size_t> ordinal_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<std::size_t> ranks(v.size());
    for (std::size_t r = 0; r < order.size(); ++r) ranks[order[r]] = r + 1;
    return ranks;
}

// Pearson correlation of average ranks; identical to the classical
// 1 - 6 sum d^2 / N(N^2-1) formula when there are no ties.
inline double spearman(const CrossSectionPair& pair) {
    pair.validate();
    if (pair.x_early.size() < 2) throw std::invalid_argument("spearman: need N >= 2");
    auto ra = rank_transform(pair.x_early);
    auto rb = rank_transform(pair.x_late);
    return pearson(ra, rb);
}

struct IgeResult {
    double slope = 0.0;
    double retained_fraction = 0.0; // share of agents positive at both times
    std::size_t n_effective = 0;
};

// OLS slope of log x_late on log x_early over agents positive at both times.
inline IgeResult ige(const CrossSectionPair& pair) {
    pair.validate();
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < pair.x_early.size(); ++i) {
        if (pair.x_early[i] > 0.0 && pair.x_late[i] > 0.0) {
            lx.push_back(std::log(pair.x_early[i]));
            ly.push_back(std::log(pair.x_late[i]));
        }
    }
    if (lx.size() < 2) throw std::invalid_argument("ige: fewer than 2 positive-positive agents");
    IgeResult res;
    res.n_effective = lx.size();
    res.retained_fraction = static_cast<double>(lx.size()) / pair.x_early.size();
    try {
        res.slope = ols_fit(lx, ly).slope;
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("ige: zero variance of log early wealth");
    }
    return res;
}

// Quantile holding ordinal rank r of n, i.e. ceil(r q / n); uneven bucket
// sizes land on the trailing quantiles.
inline std::size_t quantile_of_rank(std::size_t r, std::size_t n, std::size_t q) {
    return (r * q + n - 1) / n;
}

struct TransitionMatrix {
    std::size_t q = 0;
    std::vector<std::vector<uint64_t>> counts;
    std::vector<std::vector<double>> a;

    std::string to_csv() const {
        std::string out;
        for (std::size_t l = 0; l < q; ++l) {
            out += (l ? "," : "") + ("to_q" + std::to_string(l + 1));
        }
        out += '\n';
        for (std::size_t k = 0; k < q; ++k) {
            for (std::size_t l = 0; l < q; ++l) {
                out += (l ? "," : "") + format_double(a[k][l]);
            }
            out += '\n';
        }
        return out;
    }

    nlohmann::json to_json() const {
        return {{"q", q}, {"a", a}, {"counts", counts}};
    }
};

inline TransitionMatrix transition_matrix(const CrossSectionPair& pair, std::size_t q) {
    pair.validate();
    std::size_t n = pair.x_early.size();
    if (q < 2) throw std::invalid_argument("transition_matrix: q must be >= 2");
    if (n < q) throw std::invalid_argument("transition_matrix: need N >= q");
    auto ra = ordinal_ranks(pair.x_early);
    auto rb = ordinal_ranks(pair.x_late);
    TransitionMatrix m;
    m.q = q;
    m.counts.assign(q, std::vector<uint64_t>(q, 0));
    m.a.assign(q, std::vector<double>(q, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t k = quantile_of_rank(ra[i], n, q);
        std::size_t l = quantile_of_rank(rb[i], n, q);
        m.counts[k - 1][l - 1] += 1;
    }
    for (std::size_t k = 0; k < q; ++k) {
        uint64_t row = 0;
        for (auto c : m.counts[k]) row += c;
        if (row == 0) continue;
        for (std::size_t l = 0; l < q; ++l)
            m.a[k][l] = static_cast<double>(m.counts[k][l]) / static_cast<double>(row);
    }
    return m;
}

} // namespace rgbm
