#include <catch2/catch_amalgamated.hpp>

#include <rgbm/mobility.hpp>
#include <rgbm/rng.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace rgbm;
using Catch::Approx;

namespace {

CrossSectionPair make_pair(std::vector<double> a, std::vector<double> b, double delta = 1.0) {
    CrossSectionPair p;
    p.x_early = std::move(a);
    p.x_late = std::move(b);
    p.delta = delta;
    return p;
}

std::vector<double> lognormal_sample(std::size_t n, uint64_t seed, uint32_t stream) {
    CounterStream rng(seed, stream);
    std::vector<double> x(n);
    for (auto& v : x) v = std::exp(rng.next_normal());
    return x;
}

} // namespace

TEST_CASE("rank_transform hand cases") {
    REQUIRE(rank_transform(std::vector<double>{10, 30, 20}) == std::vector<double>{1, 3, 2});
    REQUIRE(rank_transform(std::vector<double>{5, 5}) == std::vector<double>{1.5, 1.5});
    REQUIRE(rank_transform(std::vector<double>{1, 2, 2, 3}) ==
            std::vector<double>{1, 2.5, 2.5, 4});
    REQUIRE(rank_transform(std::vector<double>{4}) == std::vector<double>{1});
    REQUIRE_THROWS_AS(rank_transform(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("ordinal_ranks breaks ties by index") {
    REQUIRE(ordinal_ranks(std::vector<double>{5, 5, 1}) ==
            std::vector<std::size_t>{2, 3, 1});
}

TEST_CASE("spearman hand cases") {
    REQUIRE(spearman(make_pair({1, 2, 3}, {10, 20, 30})) == Approx(1.0).epsilon(1e-12));
    REQUIRE(spearman(make_pair({1, 2, 3}, {30, 20, 10})) == Approx(-1.0).epsilon(1e-12));
    // Late ranks (2, 1, 3) against early ranks (1, 2, 3).
    REQUIRE(spearman(make_pair({1, 2, 3}, {20, 10, 30})) == Approx(0.5).epsilon(1e-12));
}

TEST_CASE("spearman rejects degenerate inputs") {
    REQUIRE_THROWS_AS(spearman(make_pair({1, 2, 3}, {5, 5, 5})), std::invalid_argument);
    REQUIRE_THROWS_AS(spearman(make_pair({2, 2, 2}, {1, 2, 3})), std::invalid_argument);
    REQUIRE_THROWS_AS(spearman(make_pair({1}, {2})), std::invalid_argument);
    REQUIRE_THROWS_AS(spearman(make_pair({1, 2}, {1})), std::invalid_argument);
}

TEST_CASE("spearman matches the classical formula without ties") {
    auto x = lognormal_sample(101, 21, 0);
    auto y = lognormal_sample(101, 21, 1);
    auto ra = rank_transform(x);
    auto rb = rank_transform(y);
    double d2 = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
    double n = double(ra.size());
    double classical = 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
    REQUIRE(spearman(make_pair(x, y)) == Approx(classical).epsilon(1e-12));
}

TEST_CASE("spearman is invariant under monotone transforms") {
    auto x = lognormal_sample(200, 8, 0);
    auto y = lognormal_sample(200, 8, 1);
    double base = spearman(make_pair(x, y));
    std::vector<double> xe(x), yl(y);
    for (auto& v : xe) v = std::exp(v);
    for (auto& v : yl) v = std::log(v);
    REQUIRE(spearman(make_pair(xe, yl)) == base);
}

TEST_CASE("ige hand cases") {
    auto x = lognormal_sample(300, 13, 0);
    // Proportional growth: elasticity exactly one, intercept absorbs the factor.
    for (double c : {0.5, 3.0}) {
        std::vector<double> y(x);
        for (auto& v : y) v *= c;
        auto r = ige(make_pair(x, y));
        REQUIRE(r.slope == Approx(1.0).epsilon(1e-10));
        REQUIRE(r.retained_fraction == 1.0);
        REQUIRE(r.n_effective == x.size());
    }
    // Squaring doubles every log wealth.
    {
        std::vector<double> y(x);
        for (auto& v : y) v *= v;
        REQUIRE(ige(make_pair(x, y)).slope == Approx(2.0).epsilon(1e-10));
    }
}

TEST_CASE("ige of independent cross-sections is near zero") {
    auto x = lognormal_sample(2000, 5, 0);
    std::vector<double> y(x);
    // Fisher-Yates shuffle driven by the counter stream.
    CounterStream rng(5, 9);
    for (std::size_t i = y.size() - 1; i > 0; --i) {
        auto j = static_cast<std::size_t>(rng.next_unit() * double(i + 1));
        if (j > i) j = i;
        std::swap(y[i], y[j]);
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    auto f = ols_fit(lx, ly);
    auto r = ige(make_pair(x, y));
    REQUIRE(r.slope == Approx(f.slope).epsilon(1e-12));
    REQUIRE(std::fabs(r.slope) < 3.0 * f.slope_se);
}

TEST_CASE("ige drops non-positive wealths and reports the retained share") {
    CrossSectionPair p = make_pair({1.0, 2.0, -1.0, 3.0}, {2.0, 4.0, 5.0, 0.0});
    auto r = ige(p);
    REQUIRE(r.n_effective == 2);
    REQUIRE(r.retained_fraction == Approx(0.5).epsilon(1e-14));
}

TEST_CASE("ige error cases") {
    REQUIRE_THROWS_AS(ige(make_pair({-1, -2, 3}, {1, 2, 0})), std::invalid_argument);
    REQUIRE_THROWS_WITH(ige(make_pair({2, 2, 2}, {1, 2, 3})),
                        Catch::Matchers::ContainsSubstring("zero variance"));
}

TEST_CASE("quantile_of_rank hand cases") {
    // N=4, q=2: ranks 1,2 -> first half; 3,4 -> second.
    REQUIRE(quantile_of_rank(1, 4, 2) == 1);
    REQUIRE(quantile_of_rank(2, 4, 2) == 1);
    REQUIRE(quantile_of_rank(3, 4, 2) == 2);
    REQUIRE(quantile_of_rank(4, 4, 2) == 2);
    // N=5, q=2: the remainder lands on the trailing quantile.
    REQUIRE(quantile_of_rank(2, 5, 2) == 1);
    REQUIRE(quantile_of_rank(3, 5, 2) == 2);
    // N=10, q=3 -> sizes 3, 3, 4.
    std::vector<std::size_t> sizes(3, 0);
    for (std::size_t r = 1; r <= 10; ++r) sizes[quantile_of_rank(r, 10, 3) - 1] += 1;
    REQUIRE(sizes == std::vector<std::size_t>{3, 3, 4});
}

TEST_CASE("transition matrix of an unchanged population is the identity") {
    auto x = lognormal_sample(40, 2, 0);
    auto m = transition_matrix(make_pair(x, x), 4);
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t l = 0; l < 4; ++l)
            REQUIRE(m.a[k][l] == (k == l ? 1.0 : 0.0));
}

TEST_CASE("transition matrix hand case N=4 q=2") {
    // Early order: 1,2,3,4. Late swaps within each half: identity again.
    auto m = transition_matrix(make_pair({1, 2, 3, 4}, {20, 10, 40, 30}), 2);
    REQUIRE(m.a[0][0] == 1.0);
    REQUIRE(m.a[1][1] == 1.0);
    REQUIRE(m.counts[0][0] == 2);
    // A single cross-half swap moves one agent each way.
    auto m2 = transition_matrix(make_pair({1, 2, 3, 4}, {10, 30, 20, 40}), 2);
    REQUIRE(m2.a[0][0] == Approx(0.5));
    REQUIRE(m2.a[0][1] == Approx(0.5));
    REQUIRE(m2.a[1][0] == Approx(0.5));
}

TEST_CASE("transition matrix of an independent shuffle is near uniform") {
    const std::size_t n = 4000, q = 4;
    auto x = lognormal_sample(n, 17, 0);
    auto y = lognormal_sample(n, 17, 1);
    auto m = transition_matrix(make_pair(x, y), q);
    double se = std::sqrt(0.25 * 0.75 / double(n / q));
    for (std::size_t k = 0; k < q; ++k)
        for (std::size_t l = 0; l < q; ++l)
            REQUIRE(m.a[k][l] == Approx(0.25).margin(4.0 * se));
}

TEST_CASE("transition matrix rows are stochastic") {
    auto x = lognormal_sample(103, 3, 0);
    auto y = lognormal_sample(103, 3, 1);
    auto m = transition_matrix(make_pair(x, y), 10);
    for (std::size_t k = 0; k < 10; ++k) {
        double row = 0.0;
        uint64_t cnt = 0;
        for (std::size_t l = 0; l < 10; ++l) {
            row += m.a[k][l];
            cnt += m.counts[k][l];
        }
        REQUIRE(row == Approx(1.0).epsilon(1e-12));
        // 103 ordinal ranks over 10 quantiles: sizes 10 with the remainder trailing.
        REQUIRE(cnt >= 10);
        REQUIRE(cnt <= 11);
    }
}

TEST_CASE("transition matrix validation") {
    auto x = lognormal_sample(5, 1, 0);
    REQUIRE_THROWS_AS(transition_matrix(make_pair(x, x), 1), std::invalid_argument);
    REQUIRE_THROWS_AS(transition_matrix(make_pair(x, x), 6), std::invalid_argument);
}

TEST_CASE("transition matrix serialization") {
    auto m = transition_matrix(make_pair({1, 2, 3, 4}, {20, 10, 40, 30}), 2);
    auto csv = m.to_csv();
    REQUIRE(csv.substr(0, csv.find('\n')) == "to_q1,to_q2");
    auto j = m.to_json();
    REQUIRE(j["q"] == 2);
    REQUIRE(j["a"][0][0] == 1.0);
    REQUIRE(j["counts"][1][1] == 2);
}
