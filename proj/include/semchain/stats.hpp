#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace semchain {

class StatsError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

double mean(std::span<const double> xs);                // throws on empty
double sample_variance(std::span<const double> xs);     // n - 1 denominator; throws when n < 2
double standard_error(std::span<const double> xs);      // NaN when n < 2

// Mean with a 95% normal-approximation interval (mean +/- 1.96 SE).
struct Estimate {
    double mean = 0.0;
    double se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t n = 0;
};
Estimate estimate(std::span<const double> xs);

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;  // two-sided
};

// Unequal-variance t test of mean(a) - mean(b). Both samples need n >= 2.
WelchResult welch_t(std::span<const double> a, std::span<const double> b);

// (mean(a) - mean(b)) / pooled SD. Throws when the pooled variance is zero.
double cohen_d(std::span<const double> a, std::span<const double> b);

struct PearsonResult {
    double r = 0.0;
    double p = 1.0;  // two-sided, t with n - 2 df; NaN when n == 2
    std::size_t n = 0;
};

// Absent when either series is constant.
std::optional<PearsonResult> pearson_r(std::span<const double> x, std::span<const double> y);

struct BhResult {
    std::vector<bool> reject;
    std::vector<double> adjusted;  // step-up adjusted p, capped at 1
};

// Benjamini-Hochberg step-up at false discovery rate q, in input order.
BhResult bh_fdr(std::span<const double> p_values, double q);

// Two-sided p for a t statistic.
double t_two_sided_p(double t, double df);

}  // namespace semchain
