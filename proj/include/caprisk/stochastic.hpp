#pragma once

#include <span>
#include <vector>

#include "caprisk/core.hpp"
#include "caprisk/error.hpp"

namespace caprisk {

// Estimated Brownian-motion-with-drift parameters, per-day units.
struct IncrementStats {
    double mu = 0.0;     // drift, capacity fraction per day
    double sigma2 = 0.0; // variance, fraction^2 per day
    int n = 0;           // number of increments used
};

struct NormalityReport {
    double statistic = 0.0;
    double p_value = 1.0;
    bool passed = true; // p_value >= 0.05
};

struct RiskEstimate {
    Horizon horizon;
    Headroom headroom;
    double probability = 0.0; // P(utilization gains headroom within horizon)
    IncrementStats stats;
};

// Raised when a series fails the normality gate; carries the report so
// batch callers can surface the system instead of dropping it.
class NormalityGateError : public Error {
public:
    NormalityGateError(const std::string& msg, NormalityReport report)
        : Error(msg), report(report) {}
    NormalityReport report;
};

// Per-day utilization differences; day gaps divide the difference so the
// result is always in fraction-per-day units. Needs >= 2 observations.
std::vector<double> increments(const CapacitySeries& series);

// Sample mean of per-day increments.
double estimate_drift(std::span<const double> d);

// Unbiased sample variance of per-day increments; needs >= 2 of them.
double estimate_variance(std::span<const double> d);

IncrementStats estimate_stats(const CapacitySeries& series);

// Skewness/kurtosis normality statistic with a chi-square(2) p-value;
// gates risk scoring at alpha = 0.05. Needs >= 8 increments.
NormalityReport normality_check(std::span<const double> d);

// Complementary standard normal CDF, P(Z > x).
double norm_cdf_complement(double x);

// log P(Z > x), finite for all finite x (asymptotic expansion far right).
double log_norm_cdf_complement(double x);

// Probability that a Brownian motion with drift `stats.mu` and variance
// `stats.sigma2` climbs by at least `y` within `t` days:
//
//   P(M(t) >= y) = exp(2*y*mu/sigma2) * Phibar((y + mu t)/(sigma sqrt(t)))
//                + Phibar((y - mu t)/(sigma sqrt(t)))
//
// Overflow-guarded and clamped to [0, 1]. sigma2 == 0 degenerates to the
// deterministic indicator.
RiskEstimate hitting_probability(Headroom y, Horizon t, const IncrementStats& stats);

// One RiskEstimate per horizon for a series that passes the normality
// gate; throws NormalityGateError otherwise.
std::vector<RiskEstimate> risk_profile(const CapacitySeries& series,
                                       std::span<const Horizon> horizons);

} // namespace caprisk
