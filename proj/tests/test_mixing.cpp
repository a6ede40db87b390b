#include <catch2/catch_amalgamated.hpp>

#include <rgbm/mixing.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace rgbm;
using Catch::Approx;

namespace {

WealthPanel dirac_panel(std::size_t n) {
    WealthPanel panel;
    panel.times = {0.0};
    panel.records = {std::vector<double>(n, 1.0)};
    panel.params.n_agents = n;
    return panel;
}

BetaCurve synthetic_curve(double rate, double amp, double floor, double noise, uint64_t seed) {
    double obs = 1.0 / (20.0 * rate);
    std::size_t n = 161; // horizon 8 / rate at that cadence
    CounterStream rng(seed, 0);
    BetaCurve c;
    c.k = 1000;
    for (std::size_t i = 0; i < n; ++i) {
        double t = double(i) * obs;
        c.times.push_back(t);
        c.beta.push_back((amp * std::exp(-rate * t) + floor) *
                         (1.0 + noise * rng.next_normal()));
    }
    return c;
}

} // namespace

TEST_CASE("histogram spec validation and bucket boundaries") {
    HistogramSpec bad;
    bad.edges = {1.0};
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.edges = {1.0, 1.0};
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.edges = {-1.0, 1.0};
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);

    HistogramSpec s;
    s.edges = {1.0, 2.0, 4.0};
    s.validate();
    REQUIRE(s.n_buckets() == 4);
    REQUIRE(s.bucket_of(0.5) == 0);
    REQUIRE(s.bucket_of(1.0) == 1); // left-closed interior bins
    REQUIRE(s.bucket_of(3.9) == 2);
    REQUIRE(s.bucket_of(4.0) == 3);
    REQUIRE(s.bucket_of(100.0) == 3);
}

TEST_CASE("default histogram spans six decades") {
    auto spec = default_histogram();
    spec.validate();
    REQUIRE(spec.edges.size() == 51);
    REQUIRE(spec.edges.front() == Approx(1e-3).epsilon(1e-12));
    REQUIRE(spec.edges.back() == Approx(1e3).epsilon(1e-12));
    REQUIRE(spec.edges[25] == 1.0);
    REQUIRE(spec.n_buckets() == 52);
}

TEST_CASE("bucket masses form a probability vector") {
    StationaryDistribution d(5.0);
    auto m = bucket_masses(d, default_histogram());
    double total = 0.0;
    for (double v : m) {
        REQUIRE(v >= 0.0);
        total += v;
    }
    REQUIRE(total == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tvd of a point mass at the mean") {
    StationaryDistribution d(5.0);
    auto spec = default_histogram();
    auto masses = bucket_masses(d, spec);
    std::vector<double> sample(2000, 1.0);
    double expect = 2.0 * (1.0 - masses[26]);
    REQUIRE(tvd(sample, d, spec) == Approx(expect).epsilon(1e-12));
}

TEST_CASE("tvd of far-away mass approaches two") {
    StationaryDistribution d(5.0);
    std::vector<double> sample(100, 1e9);
    double b = tvd(sample, d, default_histogram());
    REQUIRE(b > 1.999);
    REQUIRE(b <= 2.0);
}

TEST_CASE("tvd stays within its bounds on arbitrary samples") {
    StationaryDistribution d(5.0);
    auto spec = default_histogram();
    CounterStream rng(2, 0);
    std::vector<double> sample(500);
    for (auto& v : sample) v = std::exp(3.0 * rng.next_normal());
    double b = tvd(sample, d, spec);
    REQUIRE(b >= 0.0);
    REQUIRE(b <= 2.0);
    REQUIRE_THROWS_AS(tvd(std::vector<double>{}, d, spec), std::invalid_argument);
}

TEST_CASE("tvd of exact draws matches the multinomial expectation") {
    // Independent oracle: multinomial counts drawn straight from the bucket
    // masses with the standard library generator.
    StationaryDistribution d(5.0);
    auto spec = default_histogram();
    auto masses = bucket_masses(d, spec);
    const std::size_t k = 1000, reps = 400;

    std::vector<double> impl;
    CounterStream rng(1000, 0);
    for (std::size_t r = 0; r < reps; ++r)
        impl.push_back(tvd(stationary_sample(k, d, rng), d, spec));

    std::mt19937_64 gen(7);
    std::discrete_distribution<std::size_t> pick(masses.begin(), masses.end());
    std::vector<double> oracle;
    for (std::size_t r = 0; r < reps; ++r) {
        std::vector<uint64_t> counts(masses.size(), 0);
        for (std::size_t i = 0; i < k; ++i) counts[pick(gen)] += 1;
        double b = 0.0;
        for (std::size_t i = 0; i < masses.size(); ++i)
            b += std::fabs(double(counts[i]) / double(k) - masses[i]);
        oracle.push_back(b);
    }

    double se = std::sqrt(variance(impl) / double(reps) + variance(oracle) / double(reps));
    REQUIRE(std::fabs(mean(impl) - mean(oracle)) < 3.0 * se);
}

TEST_CASE("finite-sample floor shrinks with subsample size") {
    StationaryDistribution d(5.0);
    auto spec = default_histogram();
    CounterStream rng(7, 0);
    std::vector<double> b100, b1000;
    for (int r = 0; r < 30; ++r) {
        b100.push_back(tvd(stationary_sample(100, d, rng), d, spec));
        b1000.push_back(tvd(stationary_sample(1000, d, rng), d, spec));
    }
    REQUIRE(median(b100) > median(b1000));
}

TEST_CASE("select_typical_subsample hand cases") {
    REQUIRE(select_typical_subsample(std::vector<double>{1, 5, 9}, 1) ==
            std::vector<std::size_t>{1});
    REQUIRE(select_typical_subsample(std::vector<double>{0, 2, 3, 7}, 2) ==
            std::vector<std::size_t>{1, 2});
    // Equidistant pair: the lower index wins.
    REQUIRE(select_typical_subsample(std::vector<double>{1, 3}, 1) ==
            std::vector<std::size_t>{0});
    REQUIRE(select_typical_subsample(std::vector<double>{4, 2, 6}, 3) ==
            std::vector<std::size_t>{0, 1, 2});
    REQUIRE_THROWS_AS(select_typical_subsample(std::vector<double>{1, 2}, 0),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(select_typical_subsample(std::vector<double>{1, 2}, 3),
                      std::invalid_argument);
}

TEST_CASE("beta_curve on a point-mass panel") {
    StationaryDistribution d(5.0);
    auto spec = default_histogram();
    auto masses = bucket_masses(d, spec);
    auto panel = dirac_panel(500);
    auto curve = beta_curve(panel, d, spec);
    REQUIRE(curve.times == std::vector<double>{0.0});
    REQUIRE(curve.k == 500);
    REQUIRE(curve.beta[0] == Approx(2.0 * (1.0 - masses[26])).epsilon(1e-12));

    std::vector<std::size_t> sub{0, 3, 7};
    auto c2 = beta_curve(panel, d, spec, sub);
    REQUIRE(c2.k == 3);
    REQUIRE(c2.beta[0] == curve.beta[0]); // same point mass either way

    std::vector<std::size_t> bad{1000};
    REQUIRE_THROWS_AS(beta_curve(panel, d, spec, bad), std::invalid_argument);
}

TEST_CASE("beta curve csv layout") {
    BetaCurve c;
    c.times = {0.0, 1.5};
    c.beta = {1.25, 0.5};
    c.k = 42;
    REQUIRE(c.to_csv() == "t,beta,k\n0,1.25,42\n1.5,0.5,42\n");
}

TEST_CASE("fit_relaxation recovers synthetic decay rates") {
    for (double rate : {0.005, 0.02, 0.05, 0.2}) {
        auto c = synthetic_curve(rate, 2.0, 0.01, 0.02, 17);
        auto fit = fit_relaxation(c);
        INFO("rate " << rate);
        REQUIRE(fit.status == FitStatus::ok);
        REQUIRE(fit.rate == Approx(rate).epsilon(0.10));
        REQUIRE(fit.relaxation_time == Approx(1.0 / rate).epsilon(0.10));
        REQUIRE(fit.plateau_found);
        REQUIRE(fit.plateau_level == Approx(0.01).epsilon(0.25));
        auto [lo, hi] = fit.rate_interval();
        REQUIRE(lo < fit.rate);
        REQUIRE(hi > fit.rate);
    }
}

TEST_CASE("fit_relaxation works without a plateau in view") {
    // Pure exponential, no floor: the whole curve is the decay.
    auto c = synthetic_curve(0.05, 2.0, 0.0, 0.0, 0);
    c.times.resize(40);
    c.beta.resize(40);
    auto fit = fit_relaxation(c);
    REQUIRE(fit.status == FitStatus::ok);
    REQUIRE(fit.rate == Approx(0.05).epsilon(0.02));
}

TEST_CASE("fit_relaxation flags non-decreasing curves") {
    BetaCurve c;
    for (int i = 0; i < 40; ++i) {
        c.times.push_back(double(i));
        c.beta.push_back(0.5 + 0.001 * double(i));
    }
    auto fit = fit_relaxation(c);
    REQUIRE(fit.status == FitStatus::no_mixing);
    REQUIRE(std::isinf(fit.relaxation_time));
    REQUIRE(mixing_index(fit.relaxation_time) == 0.0);
}

TEST_CASE("fit_relaxation refuses a curve that is already relaxed") {
    BetaCurve c;
    std::vector<double> head{0.9, 0.8, 0.7};
    for (int i = 0; i < 43; ++i) {
        c.times.push_back(double(i));
        double base = i < 3 ? head[i] : 0.2;
        c.beta.push_back(base * (1.0 + 0.01 * std::cos(2.7 * double(i))));
    }
    auto fit = fit_relaxation(c);
    REQUIRE(fit.status == FitStatus::refused);
    REQUIRE(fit.plateau_found);
    REQUIRE(fit.plateau_level == Approx(0.2).epsilon(0.05));
    REQUIRE(std::isnan(fit.rate));
}

TEST_CASE("fit_relaxation input validation") {
    BetaCurve tiny;
    for (int i = 0; i < 9; ++i) {
        tiny.times.push_back(double(i));
        tiny.beta.push_back(1.0 / double(i + 1));
    }
    REQUIRE_THROWS_AS(fit_relaxation(tiny), std::invalid_argument);
    tiny.times.push_back(9.0);
    tiny.beta.push_back(0.1);
    REQUIRE_THROWS_AS(fit_relaxation(tiny, 2), std::invalid_argument);
}

TEST_CASE("theoretical relaxation time") {
    REQUIRE(theoretical_relaxation_time(0.02) == Approx(50.0).epsilon(1e-14));
    REQUIRE(std::isinf(theoretical_relaxation_time(0.0)));
    REQUIRE(std::isinf(theoretical_relaxation_time(-0.02)));
}

TEST_CASE("mixing index") {
    REQUIRE(mixing_index(std::numeric_limits<double>::infinity()) == 0.0);
    REQUIRE(mixing_index(1.0) == Approx(std::exp(-1.0)).epsilon(1e-14));
    REQUIRE(mixing_index(0.5) == Approx(std::exp(-0.5)).epsilon(1e-14));
    REQUIRE(mixing_index(1e-9) == Approx(1.0).margin(1e-8));
    REQUIRE_THROWS_AS(mixing_index(-1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(mixing_index(0.0), std::invalid_argument);
}

TEST_CASE("significance onset fires immediately for exact draws") {
    StationaryDistribution d(5.0);
    auto spec = default_histogram();
    std::vector<double> times;
    std::vector<std::vector<double>> samples;
    CounterStream rng(21, 0);
    for (int i = 0; i < 12; ++i) {
        times.push_back(double(i));
        samples.push_back(stationary_sample(800, d, rng));
    }
    auto onset = significance_onset_samples(times, samples, d, spec);
    REQUIRE(onset.attained);
    REQUIRE(onset.t == 0.0);
}

TEST_CASE("significance onset never fires for a wrong law") {
    StationaryDistribution d(5.0);
    auto spec = default_histogram();
    std::vector<double> times;
    std::vector<std::vector<double>> samples;
    CounterStream rng(29, 0);
    for (int i = 0; i < 8; ++i) {
        times.push_back(double(i));
        std::vector<double> s(500);
        for (auto& v : s) v = 0.9 + 0.2 * rng.next_unit();
        samples.push_back(std::move(s));
    }
    auto onset = significance_onset_samples(times, samples, d, spec);
    REQUIRE_FALSE(onset.attained);
    REQUIRE(std::isinf(onset.t));
}

TEST_CASE("an off-mean subsample relaxes at the reallocation rate") {
    // The richest slice starts far from the steady state, so its tracked
    // distance decays at the true rate; a clean positive control for the
    // curve-plus-fit pipeline.
    ModelParams p;
    p.mu = 0.02;
    p.sigma = 0.1;
    p.tau = 0.05;
    p.n_agents = 4000;
    p.dt = 0.1;
    p.seed = 2718;
    const double warm = 100.0, obs = 1.0;
    std::vector<double> times;
    for (int j = 0; j <= 160; ++j) times.push_back(warm + obs * double(j));
    auto panel = simulate(p, warm + 160.0, times);

    const auto& first = panel.records.front();
    std::vector<std::size_t> idx(first.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return first[a] > first[b]; });
    idx.resize(1200);
    std::sort(idx.begin(), idx.end());

    StationaryDistribution d(zeta_of(p.tau, p.sigma_sq()));
    auto curve = beta_curve(panel, d, default_histogram(), idx);
    for (auto& t : curve.times) t -= warm;
    auto fit = fit_relaxation(curve);
    REQUIRE(fit.status == FitStatus::ok);
    REQUIRE(fit.rate == Approx(p.tau).epsilon(0.30));
}
