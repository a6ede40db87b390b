#pragma once
// Physical mixing diagnostics: total variational distance of a tracked
// subsample against the analytic steady state, relaxation-rate fitting on
// the resulting curve, and the chi-square significance-onset bound.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rgbm/core.hpp"
#include "rgbm/stationary.hpp"
#include "rgbm/stats.hpp"

namespace rgbm {

struct HistogramSpec {
    // Strictly increasing positive edges; mass below the first and above the
    // last edge goes to two open-ended buckets.
    std::vector<double> edges;

    void validate() const {
        if (edges.size() < 2) throw std::invalid_argument("HistogramSpec: need >= 2 edges");
        for (std::size_t i = 0; i < edges.size(); ++i) {
            if (!(edges[i] > 0.0)) throw std::invalid_argument("HistogramSpec: edges must be > 0");
            if (i > 0 && !(edges[i] > edges[i - 1]))
                throw std::invalid_argument("HistogramSpec: edges must be strictly increasing");
        }
    }

    std::size_t n_buckets() const { return edges.size() + 1; }

    // Bucket 0 is (0, e0); bucket i is [e_{i-1}, e_i); the last is [e_max, inf).
    std::size_t bucket_of(double y) const {
        auto it = std::upper_bound(edges.begin(), edges.end(), y);
        return static_cast<std::size_t>(it - edges.begin());
    }
};

// 50 logarithmic bins spanning [1e-3, 1e3] plus the two unbounded buckets:
// wide enough for every tail parameter the sweeps use.
inline HistogramSpec default_histogram() {
    HistogramSpec spec;
    spec.edges.resize(51);
    for (int i = 0; i <= 50; ++i) spec.edges[i] = std::pow(10.0, -3.0 + 6.0 * i / 50.0);
    return spec;
}

inline std::vector<double> bucket_masses(const StationaryDistribution& target,
                                         const HistogramSpec& spec) {
    spec.validate();
    std::vector<double> masses(spec.n_buckets());
    double prev = 0.0;
    for (std::size_t i = 0; i < spec.edges.size(); ++i) {
        double c = target.cdf(spec.edges[i]);
        masses[i] = c - prev;
        prev = c;
    }
    masses.back() = 1.0 - prev;
    return masses;
}

inline std::vector<uint64_t> bucket_counts(std::span<const double> sample,
                                           const HistogramSpec& spec) {
    std::vector<uint64_t> counts(spec.n_buckets(), 0);
    for (double y : sample) counts[spec.bucket_of(y)] += 1;
    return counts;
}

// L1 distance between the binned sample law and the binned target; in [0, 2].
inline double tvd(std::span<const double> sample, const StationaryDistribution& target,
                  const HistogramSpec& spec) {
    if (sample.empty()) throw std::invalid_argument("tvd: empty sample");
    auto masses = bucket_masses(target, spec);
    auto counts = bucket_counts(sample, spec);
    double n = static_cast<double>(sample.size());
    double b = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i)
        b += std::abs(static_cast<double>(counts[i]) / n - masses[i]);
    return b;
}

struct BetaCurve {
    std::vector<double> times;
    std::vector<double> beta;
    std::size_t k = 0; // subsample size

    std::string to_csv() const {
        std::string out = "t,beta,k\n";
        for (std::size_t i = 0; i < times.size(); ++i) {
            out += format_double(times[i]);
            out += ',';
            out += format_double(beta[i]);
            out += ',';
            out += std::to_string(k);
            out += '\n';
        }
        return out;
    }
};

// The k agents whose wealth is closest to the population mean, ties broken
// by lower index.
inline std::vector<std::size_t> select_typical_subsample(std::span<const double> record,
                                                         std::size_t k) {
    if (k == 0) throw std::invalid_argument("select_typical_subsample: k must be positive");
    if (k > record.size())
        throw std::invalid_argument("select_typical_subsample: k exceeds population");
    double m = mean(record);
    std::vector<std::size_t> idx(record.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(record[a] - m) < std::abs(record[b] - m);
    });
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

// TVD of the tracked subsample at every recorded time. Rescaling always uses
// the full-population mean: the subsample lives inside the economy.
inline BetaCurve beta_curve(const WealthPanel& panel, const StationaryDistribution& target,
                            const HistogramSpec& spec,
                            std::span<const std::size_t> subsample = {}) {
    if (panel.times.empty()) throw std::invalid_argument("beta_curve: empty panel");
    for (std::size_t i : subsample)
        if (i >= panel.records.front().size())
            throw std::invalid_argument("beta_curve: subsample index out of range");
    BetaCurve curve;
    curve.times = panel.times;
    curve.k = subsample.empty() ? panel.records.front().size() : subsample.size();
    curve.beta.reserve(panel.times.size());
    for (const auto& record : panel.records) {
        auto y = rescale(record);
        if (subsample.empty()) {
            curve.beta.push_back(tvd(y, target, spec));
        } else {
            std::vector<double> sub;
            sub.reserve(subsample.size());
            for (std::size_t i : subsample) sub.push_back(y[i]);
            curve.beta.push_back(tvd(sub, target, spec));
        }
    }
    return curve;
}

enum class FitStatus {
    ok,        // rate and plateau both fitted
    refused,   // plateau found but too few pre-plateau points for a rate
    no_mixing, // curve does not decrease; relaxation time is infinite
};

struct RelaxationFit {
    FitStatus status = FitStatus::refused;
    double rate = std::numeric_limits<double>::quiet_NaN();
    double rate_se = std::numeric_limits<double>::quiet_NaN();
    double relaxation_time = std::numeric_limits<double>::quiet_NaN();
    double fit_t0 = std::numeric_limits<double>::quiet_NaN();
    double fit_t1 = std::numeric_limits<double>::quiet_NaN();
    std::size_t n_fit = 0;
    double r_squared = std::numeric_limits<double>::quiet_NaN();
    double plateau_level = std::numeric_limits<double>::quiet_NaN();
    double plateau_onset = std::numeric_limits<double>::quiet_NaN();
    bool plateau_found = false;

    // Two-sided confidence interval for the fitted rate.
    std::pair<double, double> rate_interval(double confidence = 0.95) const {
        if (status != FitStatus::ok || n_fit < 3) return {rate, rate};
        double half = t_critical(confidence, n_fit - 2) * rate_se;
        return {rate - half, rate + half};
    }
};

namespace detail {

// True when the 95% interval of the log-beta slope over [w, w + width)
// contains zero.
inline bool window_is_flat(std::span<const double> t, std::span<const double> logb,
                           std::size_t w, std::size_t width) {
    auto fit = ols_fit(t.subspan(w, width), logb.subspan(w, width));
    double half = t_critical(0.95, width - 2) * fit.slope_se;
    return fit.slope - half <= 0.0 && 0.0 <= fit.slope + half;
}

} // namespace detail

// Two-state fit of a beta curve: locate the plateau (three consecutive flat
// windows of `window` points), take its median as beta*, then fit
// log(beta - beta*) over the contiguous prefix where beta > 2 beta*.
// Subtracting the plateau keeps the finite-sample floor from biasing the
// rate; the prefix rule keeps the fit out of the noise-dominated elbow.
inline RelaxationFit fit_relaxation(const BetaCurve& curve, std::size_t window = 10) {
    std::size_t n = curve.times.size();
    if (n < 10) throw std::invalid_argument("fit_relaxation: need >= 10 points");
    if (window < 3) throw std::invalid_argument("fit_relaxation: window must be >= 3");

    std::vector<double> logb(n);
    for (std::size_t i = 0; i < n; ++i)
        logb[i] = std::log(std::max(curve.beta[i], 1e-300));

    RelaxationFit fit;

    auto whole = ols_fit(curve.times, logb);
    if (whole.slope >= 0.0) {
        fit.status = FitStatus::no_mixing;
        fit.relaxation_time = std::numeric_limits<double>::infinity();
        return fit;
    }

    // Plateau onset: first of three consecutive flat windows.
    std::size_t onset = n;
    if (n >= window) {
        std::size_t last_start = n - window;
        for (std::size_t w = 0; w + 2 <= last_start; ++w) {
            if (detail::window_is_flat(curve.times, logb, w, window) &&
                detail::window_is_flat(curve.times, logb, w + 1, window) &&
                detail::window_is_flat(curve.times, logb, w + 2, window)) {
                onset = w;
                break;
            }
        }
    }

    std::size_t fit_end = n;
    if (onset < n) {
        fit.plateau_found = true;
        fit.plateau_onset = curve.times[onset];
        fit.plateau_level =
            median({curve.beta.begin() + static_cast<std::ptrdiff_t>(onset), curve.beta.end()});
        fit_end = 0;
        while (fit_end < n && curve.beta[fit_end] > 2.0 * fit.plateau_level) ++fit_end;
        if (fit_end < 10) {
            fit.status = FitStatus::refused;
            return fit;
        }
    }

    std::vector<double> yfit(fit_end);
    double floor = fit.plateau_found ? fit.plateau_level : 0.0;
    for (std::size_t i = 0; i < fit_end; ++i)
        yfit[i] = std::log(std::max(curve.beta[i] - floor, 1e-300));
    auto ols = ols_fit({curve.times.data(), fit_end}, {yfit.data(), fit_end});
    if (ols.slope >= 0.0) {
        fit.status = FitStatus::no_mixing;
        fit.relaxation_time = std::numeric_limits<double>::infinity();
        return fit;
    }
    fit.status = FitStatus::ok;
    fit.rate = -ols.slope;
    fit.rate_se = ols.slope_se;
    fit.relaxation_time = 1.0 / fit.rate;
    fit.fit_t0 = curve.times.front();
    fit.fit_t1 = curve.times[fit_end - 1];
    fit.n_fit = fit_end;
    fit.r_squared = ols.r_squared;
    return fit;
}

inline double theoretical_relaxation_time(double tau) {
    if (tau > 0.0) return 1.0 / tau;
    return std::numeric_limits<double>::infinity();
}

// Normalized mobility index w = exp(-relaxation_time) in [0, 1].
inline double mixing_index(double relaxation_time) {
    if (std::isinf(relaxation_time)) return 0.0;
    if (!(relaxation_time > 0.0))
        throw std::invalid_argument("mixing_index: relaxation time must be positive or infinite");
    return std::exp(-relaxation_time);
}

struct OnsetResult {
    bool attained = false;
    double t = std::numeric_limits<double>::infinity();
};

namespace detail {

// Chi-square goodness of fit of bucket counts against expected masses, with
// buckets merged left to right until every expected count is >= 5.
inline double gof_pvalue(const std::vector<uint64_t>& counts, const std::vector<double>& masses,
                         double k) {
    std::vector<double> obs, exp;
    double o_acc = 0.0, e_acc = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        o_acc += static_cast<double>(counts[i]);
        e_acc += k * masses[i];
        if (e_acc >= 5.0) {
            obs.push_back(o_acc);
            exp.push_back(e_acc);
            o_acc = e_acc = 0.0;
        }
    }
    if (e_acc > 0.0 && !exp.empty()) {
        obs.back() += o_acc;
        exp.back() += e_acc;
    }
    if (exp.size() < 2) return 1.0;
    double stat = 0.0;
    for (std::size_t i = 0; i < exp.size(); ++i)
        stat += (obs[i] - exp[i]) * (obs[i] - exp[i]) / exp[i];
    return chi_squared_pvalue(stat, exp.size() - 1);
}

} // namespace detail

// First time from which the tracked sample is statistically compatible with
// the target for 5 consecutive observations; an upper bound for the
// relaxation time when it exists. Takes already-rescaled per-time samples.
inline OnsetResult significance_onset_samples(std::span<const double> times,
                                              const std::vector<std::vector<double>>& samples,
                                              const StationaryDistribution& target,
                                              const HistogramSpec& spec, double alpha = 0.05) {
    if (times.empty() || times.size() != samples.size())
        throw std::invalid_argument("significance_onset: times/samples mismatch");
    auto masses = bucket_masses(target, spec);
    std::size_t n = times.size();
    std::vector<bool> compatible(n);
    for (std::size_t r = 0; r < n; ++r) {
        auto counts = bucket_counts(samples[r], spec);
        compatible[r] =
            detail::gof_pvalue(counts, masses, static_cast<double>(samples[r].size())) >= alpha;
    }
    const std::size_t run = 5;
    for (std::size_t i = 0; i + run <= n; ++i) {
        bool all = true;
        for (std::size_t j = i; j < i + run; ++j) all = all && compatible[j];
        if (all) return {true, times[i]};
    }
    return {};
}

inline OnsetResult significance_onset(const WealthPanel& panel,
                                      const StationaryDistribution& target,
                                      const HistogramSpec& spec,
                                      std::span<const std::size_t> subsample, double alpha = 0.05) {
    if (panel.times.empty()) throw std::invalid_argument("significance_onset: empty panel");
    std::vector<std::vector<double>> samples;
    samples.reserve(panel.times.size());
    for (const auto& record : panel.records) {
        auto y = rescale(record);
        if (subsample.empty()) {
            samples.push_back(std::move(y));
        } else {
            std::vector<double> sub;
            sub.reserve(subsample.size());
            for (std::size_t i : subsample) sub.push_back(y.at(i));
            samples.push_back(std::move(sub));
        }
    }
    return significance_onset_samples(panel.times, samples, target, spec, alpha);
}

} // namespace rgbm
