#include "semchain/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

namespace semchain {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void need(std::span<const double> xs, std::size_t n, const char* what) {
    if (xs.size() < n) throw StatsError(fmt::format("{} needs at least {} values, got {}", what, n, xs.size()));
}

}  // namespace

double mean(std::span<const double> xs) {
    need(xs, 1, "mean");
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
    need(xs, 2, "variance");
    const double m = mean(xs);
    double ss = 0.0;
    for (const double x : xs) ss += (x - m) * (x - m);
    return ss / static_cast<double>(xs.size() - 1);
}

double standard_error(std::span<const double> xs) {
    if (xs.size() < 2) return kNaN;
    return std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
}

Estimate estimate(std::span<const double> xs) {
    Estimate e;
    e.n = xs.size();
    e.mean = mean(xs);
    e.se = standard_error(xs);
    e.ci_low = e.mean - 1.96 * e.se;
    e.ci_high = e.mean + 1.96 * e.se;
    return e;
}

double t_two_sided_p(double t, double df) {
    if (std::isnan(t) || !(df > 0.0)) return kNaN;
    if (std::isinf(t)) return 0.0;
    const boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

WelchResult welch_t(std::span<const double> a, std::span<const double> b) {
    need(a, 2, "welch_t");
    need(b, 2, "welch_t");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double va = sample_variance(a) / na;
    const double vb = sample_variance(b) / nb;
    const double diff = mean(a) - mean(b);
    WelchResult r;
    if (va + vb == 0.0) {
        // Two constant samples: identical means give t = 0, otherwise the
        // difference is infinitely significant.
        r.df = na + nb - 2.0;
        r.t = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
        r.p = diff == 0.0 ? 1.0 : 0.0;
        return r;
    }
    r.t = diff / std::sqrt(va + vb);
    r.df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    r.p = t_two_sided_p(r.t, r.df);
    return r;
}

double cohen_d(std::span<const double> a, std::span<const double> b) {
    need(a, 2, "cohen_d");
    need(b, 2, "cohen_d");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double pooled = ((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) / (na + nb - 2.0);
    if (pooled == 0.0) throw StatsError("cohen_d: pooled variance is zero");
    return (mean(a) - mean(b)) / std::sqrt(pooled);
}

std::optional<PearsonResult> pearson_r(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw StatsError("pearson_r: series differ in length");
    need(x, 2, "pearson_r");
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    PearsonResult r;
    r.n = x.size();
    r.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    const double df = static_cast<double>(r.n) - 2.0;
    if (df <= 0.0) {
        r.p = kNaN;
    } else if (std::fabs(r.r) == 1.0) {
        r.p = 0.0;
    } else {
        r.p = t_two_sided_p(r.r * std::sqrt(df / (1.0 - r.r * r.r)), df);
    }
    return r;
}

BhResult bh_fdr(std::span<const double> p_values, double q) {
    const std::size_t m = p_values.size();
    BhResult out{std::vector<bool>(m, false), std::vector<double>(m, 1.0)};
    if (!(q > 0.0 && q <= 1.0)) throw StatsError(fmt::format("bh_fdr: q {} outside (0, 1]", q));
    if (m == 0) return out;
    for (const double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0)) throw StatsError(fmt::format("bh_fdr: p-value {} outside [0, 1]", p));
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return p_values[i] < p_values[j]; });

    // Largest rank k with p_(k) <= k q / m; every rank up to k is rejected.
    std::size_t cutoff = 0;
    for (std::size_t k = 1; k <= m; ++k) {
        if (p_values[order[k - 1]] <= static_cast<double>(k) * q / static_cast<double>(m)) cutoff = k;
    }
    for (std::size_t k = 1; k <= cutoff; ++k) out.reject[order[k - 1]] = true;

    double running = 1.0;
    for (std::size_t k = m; k >= 1; --k) {
        const auto i = order[k - 1];
        // m / k >= 1, so the max only undoes rounding when k == m.
        const double scaled = std::max(p_values[i], p_values[i] * static_cast<double>(m) / static_cast<double>(k));
        running = std::min(running, scaled);
        out.adjusted[i] = std::min(running, 1.0);
    }
    return out;
}

}  // namespace semchain
