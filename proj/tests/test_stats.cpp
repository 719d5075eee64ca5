#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semchain/rng.hpp"
#include "semchain/stats.hpp"
#include "test_support.hpp"

using namespace semchain;
using semchain::testing::close_rel;

namespace {

const std::vector<double> a = {2.1, 3.4, 1.9, 5.6, 4.2};
const std::vector<double> b = {3.3, 6.1, 5.8, 7.2, 4.9};

// Direct formulas, written out long-hand.
struct Hand {
    double ma, mb, va, vb;
    Hand() {
        ma = (2.1 + 3.4 + 1.9 + 5.6 + 4.2) / 5.0;
        mb = (3.3 + 6.1 + 5.8 + 7.2 + 4.9) / 5.0;
        va = 0, vb = 0;
        for (const double x : a) va += (x - ma) * (x - ma);
        for (const double x : b) vb += (x - mb) * (x - mb);
        va /= 4.0;
        vb /= 4.0;
    }
};

}  // namespace

TEST_CASE("mean, variance, standard error, interval") {
    const Hand h;
    CHECK(close_rel(mean(a), h.ma, 1e-12));
    CHECK(close_rel(sample_variance(a), h.va, 1e-12));
    CHECK(close_rel(standard_error(a), std::sqrt(h.va / 5.0), 1e-12));
    const auto e = estimate(a);
    CHECK(e.n == 5);
    CHECK(close_rel(e.ci_low, h.ma - 1.96 * std::sqrt(h.va / 5.0), 1e-12));
    CHECK(close_rel(e.ci_high, h.ma + 1.96 * std::sqrt(h.va / 5.0), 1e-12));
    CHECK_THROWS_AS(mean(std::vector<double>{}), StatsError);
    CHECK_THROWS_AS(sample_variance(std::vector<double>{1.0}), StatsError);
    CHECK(std::isnan(standard_error(std::vector<double>{1.0})));
}

TEST_CASE("Welch t on fixed samples") {
    const Hand h;
    const double se2a = h.va / 5.0, se2b = h.vb / 5.0;
    const double t = (h.ma - h.mb) / std::sqrt(se2a + se2b);
    const double df = (se2a + se2b) * (se2a + se2b) / (se2a * se2a / 4.0 + se2b * se2b / 4.0);
    const auto w = welch_t(a, b);
    CHECK(close_rel(w.t, t, 1e-9));
    CHECK(close_rel(w.df, df, 1e-9));
    // Reference: scipy.stats.ttest_ind(a, b, equal_var=False).
    CHECK(close_rel(w.t, -2.132586899434108, 1e-9));
    CHECK(close_rel(w.p, 0.06561027879197087, 1e-9));
    // Swapping the samples flips the sign only.
    const auto s = welch_t(b, a);
    CHECK(close_rel(s.t, -w.t, 1e-12));
    CHECK(close_rel(s.p, w.p, 1e-12));
    CHECK_THROWS_AS(welch_t(std::vector<double>{1.0}, b), StatsError);
}

TEST_CASE("Welch t with constant samples") {
    const std::vector<double> c1 = {2, 2, 2}, c2 = {3, 3, 3};
    const auto same = welch_t(c1, c1);
    CHECK(same.t == 0.0);
    CHECK(same.p == 1.0);
    const auto diff = welch_t(c1, c2);
    CHECK(std::isinf(diff.t));
    CHECK(diff.t < 0);
    CHECK(diff.p == 0.0);
}

TEST_CASE("t distribution tail") {
    // Reference: 2 * scipy.stats.t.sf(2.0, 7.3).
    CHECK(close_rel(t_two_sided_p(2.0, 7.3), 0.08394103933410305, 1e-9));
    CHECK(close_rel(t_two_sided_p(-2.0, 7.3), 0.08394103933410305, 1e-9));
    CHECK(t_two_sided_p(0.0, 3.0) == doctest::Approx(1.0));
}

TEST_CASE("Cohen's d with the pooled standard deviation") {
    const Hand h;
    const double pooled = std::sqrt((4.0 * h.va + 4.0 * h.vb) / 8.0);
    CHECK(close_rel(cohen_d(a, b), (h.ma - h.mb) / pooled, 1e-9));
    const std::vector<double> c = {1, 1, 1};
    CHECK_THROWS_AS(cohen_d(c, c), StatsError);
}

TEST_CASE("Pearson r") {
    const std::vector<double> x = {1.0, 2.0, 3.5, 4.0, 6.5};
    const std::vector<double> y = {2.2, 2.9, 4.1, 3.8, 7.0};
    const double mx = 17.0 / 5.0, my = 20.0 / 5.0;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < 5; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    const auto r = pearson_r(x, y);
    REQUIRE(r);
    CHECK(close_rel(r->r, sxy / std::sqrt(sxx * syy), 1e-9));
    CHECK(r->n == 5);
    // Reference: scipy.stats.pearsonr(x, y).
    CHECK(close_rel(r->r, 0.9736054190645231, 1e-9));
    CHECK(close_rel(r->p, 0.005127185836194022, 1e-8));

    CHECK(!pearson_r(x, std::vector<double>{1, 1, 1, 1, 1}));
    CHECK_THROWS_AS(pearson_r(x, std::vector<double>{1, 2}), StatsError);
    const auto two = pearson_r(std::vector<double>{1, 2}, std::vector<double>{3, 5});
    REQUIRE(two);
    CHECK(two->r == doctest::Approx(1.0));
    CHECK(std::isnan(two->p));
    const auto perfect = pearson_r(x, x);
    CHECK(perfect->p == 0.0);
}

TEST_CASE("Benjamini-Hochberg") {
    const std::vector<double> two = {0.01, 0.04};
    const auto r = bh_fdr(two, 0.05);
    CHECK(r.reject == std::vector<bool>{true, true});
    CHECK(close_rel(r.adjusted[0], 0.02, 1e-12));
    CHECK(close_rel(r.adjusted[1], 0.04, 1e-12));

    // Reference: statsmodels multipletests(method="fdr_bh").
    const std::vector<double> p = {0.01, 0.04, 0.03, 0.2, 0.005, 0.5};
    const auto six = bh_fdr(p, 0.05);
    CHECK(six.reject == std::vector<bool>{true, false, false, false, true, false});
    const std::vector<double> adj = {0.03, 0.06, 0.06, 0.24, 0.03, 0.5};
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(close_rel(six.adjusted[i], adj[i], 1e-12));

    CHECK(bh_fdr(std::vector<double>{}, 0.05).reject.empty());
    CHECK_THROWS_AS(bh_fdr(std::vector<double>{1.2}, 0.05), StatsError);
    CHECK_THROWS_AS(bh_fdr(two, 0.0), StatsError);
}

TEST_CASE("BH properties over random p-vectors") {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = 1 + uniform_index(rng, 30);
        std::vector<double> p(n);
        for (auto& x : p) x = bernoulli(rng, 0.3) ? uniform_unit(rng) * 0.01 : uniform_unit(rng);

        // Brute force: the largest k with p_(k) <= k q / n.
        const double q = 0.05;
        std::vector<double> sorted = p;
        std::sort(sorted.begin(), sorted.end());
        std::size_t k = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (sorted[i] <= static_cast<double>(i + 1) * q / static_cast<double>(n)) k = i + 1;
        }
        const auto r = bh_fdr(p, q);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(r.reject[i] == (k > 0 && p[i] <= sorted[k - 1]));
            CHECK(r.adjusted[i] >= p[i]);
            CHECK(r.adjusted[i] <= 1.0);
            CHECK(r.reject[i] == (r.adjusted[i] <= q));
        }
        // Rejections only grow with q.
        const auto looser = bh_fdr(p, 0.2);
        for (std::size_t i = 0; i < n; ++i) CHECK((!r.reject[i] || looser.reject[i]));
    }
}
