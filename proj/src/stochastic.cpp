#include "caprisk/stochastic.hpp"

#include <algorithm>
#include <cmath>

namespace caprisk {
namespace {

constexpr double kAlpha = 0.05;
constexpr double kHalfLog2Pi = 0.91893853320467274178; // log(2*pi)/2

double clamp01(double p) {
    return std::min(1.0, std::max(0.0, p));
}

// P(M(t) >= y) for sigma2 == 0: the path is the line mu*z.
double degenerate_probability(double y, double mu, double t) {
    if (mu > 0.0 && mu * t >= y) return 1.0;
    if (y == 0.0) return 1.0;
    return 0.0;
}

} // namespace

std::vector<double> increments(const CapacitySeries& series) {
    const auto& obs = series.observations;
    if (obs.size() < 2) {
        throw InsufficientDataError("system " + series.system_id +
                                    ": need at least 2 observations for increments");
    }
    std::vector<double> d;
    d.reserve(obs.size() - 1);
    for (std::size_t i = 1; i < obs.size(); ++i) {
        const double gap = static_cast<double>(obs[i].day - obs[i - 1].day);
        d.push_back((obs[i].used - obs[i - 1].used) / gap);
    }
    return d;
}

double estimate_drift(std::span<const double> d) {
    if (d.empty()) {
        throw InsufficientDataError("estimate_drift: no increments");
    }
    double sum = 0.0;
    for (double v : d) sum += v;
    return sum / static_cast<double>(d.size());
}

double estimate_variance(std::span<const double> d) {
    if (d.size() < 2) {
        throw InsufficientDataError("estimate_variance: need at least 2 increments");
    }
    const double mean = estimate_drift(d);
    double ss = 0.0;
    for (double v : d) {
        const double c = v - mean;
        ss += c * c;
    }
    return ss / static_cast<double>(d.size() - 1);
}

IncrementStats estimate_stats(const CapacitySeries& series) {
    const std::vector<double> d = increments(series);
    if (d.size() < 2) {
        throw InsufficientDataError("system " + series.system_id +
                                    ": need at least 3 observations for drift/variance");
    }
    return IncrementStats{estimate_drift(d), estimate_variance(d), static_cast<int>(d.size())};
}

NormalityReport normality_check(std::span<const double> d) {
    const std::size_t n = d.size();
    if (n < 8) {
        throw InsufficientDataError("normality_check: need at least 8 increments");
    }
    double mean = 0.0;
    for (double v : d) mean += v;
    mean /= static_cast<double>(n);

    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : d) {
        const double c = v - mean;
        const double c2 = c * c;
        m2 += c2;
        m3 += c2 * c;
        m4 += c2 * c2;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);

    NormalityReport report;
    if (m2 == 0.0) {
        // Exactly constant increments: treated as degenerate-normal so the
        // sigma2 == 0 branch downstream can report the deterministic case.
        report.statistic = 0.0;
        report.p_value = 1.0;
        report.passed = true;
        return report;
    }
    const double skew = m3 / std::pow(m2, 1.5);
    const double excess_kurtosis = m4 / (m2 * m2) - 3.0;
    report.statistic = static_cast<double>(n) / 6.0 *
                       (skew * skew + excess_kurtosis * excess_kurtosis / 4.0);
    report.p_value = std::exp(-0.5 * report.statistic); // chi-square(2) tail
    report.passed = report.p_value >= kAlpha;
    return report;
}

double norm_cdf_complement(double x) {
    return 0.5 * std::erfc(x * 0.70710678118654752440);
}

double log_norm_cdf_complement(double x) {
    if (x < 30.0) {
        return std::log(norm_cdf_complement(x));
    }
    // Asymptotic expansion: Phibar(x) ~ phi(x)/x * (1 - 1/x^2 + 3/x^4 - ...).
    const double inv2 = 1.0 / (x * x);
    double term = 1.0;
    double series = 1.0;
    double coeff = 1.0;
    for (int k = 1; k <= 7; ++k) {
        coeff *= static_cast<double>(2 * k - 1);
        term *= -inv2;
        series += coeff * term;
    }
    return -0.5 * x * x - kHalfLog2Pi - std::log(x) + std::log(series);
}

RiskEstimate hitting_probability(Headroom y, Horizon t, const IncrementStats& stats) {
    if (!(t.days > 0.0)) {
        throw ValidationError("hitting_probability: horizon must be > 0 days");
    }
    if (y.y < 0.0) {
        throw ValidationError("hitting_probability: headroom must be >= 0");
    }
    if (stats.sigma2 < 0.0 || !std::isfinite(stats.sigma2) || !std::isfinite(stats.mu)) {
        throw ValidationError("hitting_probability: invalid increment stats");
    }

    RiskEstimate estimate{t, y, 0.0, stats};
    if (stats.sigma2 == 0.0) {
        estimate.probability = degenerate_probability(y.y, stats.mu, t.days);
        return estimate;
    }

    const double sigma_sqrt_t = std::sqrt(stats.sigma2 * t.days);
    const double x1 = (y.y + stats.mu * t.days) / sigma_sqrt_t;
    const double x2 = (y.y - stats.mu * t.days) / sigma_sqrt_t;
    const double exponent = 2.0 * y.y * stats.mu / stats.sigma2;

    // exp(exponent) overflows past ~709; the product stays <= 1, so fold
    // the factor into log space there.
    double first;
    if (exponent > 700.0) {
        first = std::exp(exponent + log_norm_cdf_complement(x1));
    } else {
        first = std::exp(exponent) * norm_cdf_complement(x1);
    }
    estimate.probability = clamp01(first + norm_cdf_complement(x2));
    return estimate;
}

std::vector<RiskEstimate> risk_profile(const CapacitySeries& series,
                                       std::span<const Horizon> horizons) {
    const std::vector<double> d = increments(series);
    const NormalityReport report = normality_check(d);
    if (!report.passed) {
        throw NormalityGateError("system " + series.system_id +
                                     ": increments failed the normality gate (p = " +
                                     format_double(report.p_value) + ")",
                                 report);
    }
    const IncrementStats stats{estimate_drift(d), estimate_variance(d),
                               static_cast<int>(d.size())};
    const Headroom y = headroom(series);
    std::vector<RiskEstimate> profile;
    profile.reserve(horizons.size());
    for (const Horizon& t : horizons) {
        profile.push_back(hitting_probability(y, t, stats));
    }
    return profile;
}

} // namespace caprisk
