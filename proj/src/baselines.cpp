#include "caprisk/baselines.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace caprisk {
namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Two-pass centred OLS of used on day. Constant `used` values get r2 = 0
// by convention so suffix selection never divides by zero.
LineFit ols(std::span<const Observation> points) {
    const auto n = static_cast<double>(points.size());
    double sx = 0.0, sy = 0.0;
    for (const Observation& o : points) {
        sx += static_cast<double>(o.day);
        sy += o.used;
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const Observation& o : points) {
        const double dx = static_cast<double>(o.day) - mx;
        const double dy = o.used - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy == 0.0 ? 0.0 : fit.slope * sxy / syy;
    return fit;
}

std::vector<Observation> line_forecast(const LineFit& fit, std::int64_t last_day,
                                       int horizon_days) {
    std::vector<Observation> out;
    out.reserve(static_cast<std::size_t>(horizon_days));
    for (int h = 1; h <= horizon_days; ++h) {
        const std::int64_t day = last_day + h;
        out.push_back({day, fit.intercept + fit.slope * static_cast<double>(day)});
    }
    return out;
}

std::vector<Observation> flat_forecast(double level, std::int64_t last_day, int horizon_days) {
    std::vector<Observation> out;
    out.reserve(static_cast<std::size_t>(horizon_days));
    for (int h = 1; h <= horizon_days; ++h) {
        out.push_back({last_day + h, level});
    }
    return out;
}

double ses_level(std::span<const Observation> points, double alpha) {
    double level = points.front().used;
    for (std::size_t i = 1; i < points.size(); ++i) {
        level = alpha * points[i].used + (1.0 - alpha) * level;
    }
    return level;
}

constexpr std::array<double, 9> kAlphaGrid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

// Classic theta decomposition: the theta(2) line keeps twice the deviation
// from the linear trend; its SES level (alpha by in-sample one-step SSE)
// is averaged with the extrapolated trend.
std::vector<Observation> theta_forecast(std::span<const Observation> points,
                                        int horizon_days) {
    const LineFit trend = ols(points);
    std::vector<double> theta_line;
    theta_line.reserve(points.size());
    for (const Observation& o : points) {
        theta_line.push_back(2.0 * o.used -
                             (trend.intercept + trend.slope * static_cast<double>(o.day)));
    }
    double best_alpha = kAlphaGrid.front();
    double best_sse = std::numeric_limits<double>::infinity();
    for (double alpha : kAlphaGrid) {
        double level = theta_line.front();
        double sse = 0.0;
        for (std::size_t i = 1; i < theta_line.size(); ++i) {
            const double err = theta_line[i] - level;
            sse += err * err;
            level = alpha * theta_line[i] + (1.0 - alpha) * level;
        }
        if (sse < best_sse) {
            best_sse = sse;
            best_alpha = alpha;
        }
    }
    double level = theta_line.front();
    for (std::size_t i = 1; i < theta_line.size(); ++i) {
        level = best_alpha * theta_line[i] + (1.0 - best_alpha) * level;
    }
    const std::int64_t last_day = points.back().day;
    std::vector<Observation> out;
    out.reserve(static_cast<std::size_t>(horizon_days));
    for (int h = 1; h <= horizon_days; ++h) {
        const std::int64_t day = last_day + h;
        out.push_back({day, 0.5 * (level + trend.intercept +
                                   trend.slope * static_cast<double>(day))});
    }
    return out;
}

std::vector<Observation> drift_forecast(std::span<const Observation> points,
                                        int horizon_days) {
    const Observation& first = points.front();
    const Observation& last = points.back();
    const double slope =
        (last.used - first.used) / static_cast<double>(last.day - first.day);
    std::vector<Observation> out;
    out.reserve(static_cast<std::size_t>(horizon_days));
    for (int h = 1; h <= horizon_days; ++h) {
        out.push_back({last.day + h, last.used + slope * static_cast<double>(h)});
    }
    return out;
}

} // namespace

std::string_view to_string(ModelId id) {
    switch (id) {
    case ModelId::naive: return "naive";
    case ModelId::plr: return "plr";
    case ModelId::ensemble: return "ensemble";
    case ModelId::member_linear: return "member:linear";
    case ModelId::member_theta: return "member:theta";
    case ModelId::member_ses: return "member:ses";
    case ModelId::member_drift: return "member:drift";
    }
    return "unknown";
}

std::string_view to_string(RejectReason reason) {
    switch (reason) {
    case RejectReason::low_r2: return "low_r2";
    case RejectReason::nonpositive_slope: return "nonpositive_slope";
    case RejectReason::insufficient_data: return "insufficient_data";
    }
    return "unknown";
}

ForecastResult naive_forecast(const CapacitySeries& series, int horizon_days) {
    if (series.observations.empty()) {
        throw InsufficientDataError("system " + series.system_id +
                                    ": naive forecast needs an observation");
    }
    if (horizon_days < 1) {
        throw ValidationError("naive_forecast: horizon must be >= 1 day");
    }
    ForecastResult result;
    result.model_id = ModelId::naive;
    result.fitted = true;
    result.forecasts = flat_forecast(series.observations.back().used,
                                     series.observations.back().day, horizon_days);
    return result;
}

double r_squared(std::span<const double> actuals, std::span<const double> fitted_values) {
    if (actuals.size() != fitted_values.size() || actuals.size() < 2) {
        throw ValidationError("r_squared: needs two equal-length samples of size >= 2");
    }
    double mean = 0.0;
    for (double a : actuals) mean += a;
    mean /= static_cast<double>(actuals.size());
    double ss_tot = 0.0, ss_res = 0.0;
    for (std::size_t i = 0; i < actuals.size(); ++i) {
        const double dt = actuals[i] - mean;
        const double dr = actuals[i] - fitted_values[i];
        ss_tot += dt * dt;
        ss_res += dr * dr;
    }
    if (ss_tot == 0.0) {
        throw UndefinedResultError("r_squared: actuals are constant");
    }
    return 1.0 - ss_res / ss_tot;
}

ForecastResult plr_fit(const CapacitySeries& series, int horizon_days) {
    ForecastResult result;
    result.model_id = ModelId::plr;
    const auto& obs = series.observations;
    if (obs.size() < static_cast<std::size_t>(kPlrMinObservations)) {
        result.reject_reason = RejectReason::insufficient_data;
        return result;
    }

    const std::span<const Observation> all(obs);
    const std::size_t last_start = obs.size() - kPlrMinObservations;

    double best_r2 = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s <= last_start; ++s) {
        best_r2 = std::max(best_r2, ols(all.subspan(s)).r2);
    }
    // Longest suffix within tolerance of the best.
    std::size_t chosen = 0;
    LineFit chosen_fit;
    for (std::size_t s = 0; s <= last_start; ++s) {
        const LineFit fit = ols(all.subspan(s));
        if (fit.r2 >= best_r2 - kPlrTieTolerance) {
            chosen = s;
            chosen_fit = fit;
            break;
        }
    }

    if (chosen_fit.r2 < kPlrMinR2) {
        result.reject_reason = RejectReason::low_r2;
        return result;
    }
    if (chosen_fit.slope <= 0.0) {
        result.reject_reason = RejectReason::nonpositive_slope;
        return result;
    }
    result.fitted = true;
    result.plr = PlrFit{chosen, chosen_fit.slope, chosen_fit.intercept, chosen_fit.r2};
    if (horizon_days > 0) {
        result.forecasts = line_forecast(chosen_fit, obs.back().day, horizon_days);
    }
    return result;
}

double days_to_threshold(const PlrFit& fit, double c_n, double delta, DeltaMode mode) {
    if (!(fit.slope > 0.0)) {
        throw ValidationError("days_to_threshold: fit has nonpositive slope");
    }
    if (!(delta > 0.0)) {
        throw ValidationError("days_to_threshold: delta must be > 0");
    }
    const double target = mode == DeltaMode::absolute ? delta : delta * c_n;
    return target / fit.slope;
}

std::pair<double, double> ensemble_weights(double e1, double e2) {
    const double total = e1 + e2;
    if (total == 0.0) {
        return {0.5, 0.5};
    }
    return {e2 / total, e1 / total};
}

ForecastResult ensemble_forecast(const CapacitySeries& series, int horizon_days) {
    ForecastResult result;
    result.model_id = ModelId::ensemble;
    const auto& obs = series.observations;
    if (obs.size() < static_cast<std::size_t>(kEnsembleMinObservations)) {
        result.reject_reason = RejectReason::insufficient_data;
        return result;
    }
    if (horizon_days < 1) {
        throw ValidationError("ensemble_forecast: horizon must be >= 1 day");
    }

    const std::span<const Observation> all(obs);
    const std::size_t n_train = obs.size() - kValidationDays;
    const auto train = all.first(n_train);
    const auto validation = all.subspan(n_train);

    // Validation actuals of zero make MAPE undefined for every member.
    for (const Observation& o : validation) {
        if (o.used == 0.0) {
            result.reject_reason = RejectReason::insufficient_data;
            return result;
        }
    }

    struct Member {
        ModelId id;
        double tuned_alpha = 0.0; // ses only
        double mape = 0.0;
    };

    auto member_mape = [&](std::span<const Observation> forecast) {
        double sum = 0.0;
        for (std::size_t i = 0; i < validation.size(); ++i) {
            sum += std::fabs(validation[i].used - forecast[i].used) / validation[i].used;
        }
        return sum / static_cast<double>(validation.size());
    };

    std::vector<Member> members;
    {
        Member m{ModelId::member_linear};
        m.mape = member_mape(line_forecast(ols(train), train.back().day, kValidationDays));
        members.push_back(m);
    }
    {
        Member m{ModelId::member_theta};
        m.mape = member_mape(theta_forecast(train, kValidationDays));
        members.push_back(m);
    }
    {
        Member m{ModelId::member_ses};
        double best = std::numeric_limits<double>::infinity();
        for (double alpha : kAlphaGrid) {
            const double err = member_mape(
                flat_forecast(ses_level(train, alpha), train.back().day, kValidationDays));
            if (err < best) {
                best = err;
                m.tuned_alpha = alpha;
            }
        }
        m.mape = best;
        members.push_back(m);
    }
    {
        Member m{ModelId::member_drift};
        m.mape = member_mape(drift_forecast(train, kValidationDays));
        members.push_back(m);
    }

    // Stable sort keeps declaration order on exact ties.
    std::stable_sort(members.begin(), members.end(),
                     [](const Member& a, const Member& b) { return a.mape < b.mape; });

    const Member& winner = members[0];
    const Member& runner_up = members[1];
    const auto [w1, w2] = ensemble_weights(winner.mape, runner_up.mape);

    auto full_forecast = [&](const Member& m) -> std::vector<Observation> {
        switch (m.id) {
        case ModelId::member_linear:
            return line_forecast(ols(all), all.back().day, horizon_days);
        case ModelId::member_theta:
            return theta_forecast(all, horizon_days);
        case ModelId::member_ses:
            return flat_forecast(ses_level(all, m.tuned_alpha), all.back().day, horizon_days);
        case ModelId::member_drift:
            return drift_forecast(all, horizon_days);
        default:
            throw Error("ensemble_forecast: not a member model");
        }
    };

    const std::vector<Observation> f1 = full_forecast(winner);
    const std::vector<Observation> f2 = full_forecast(runner_up);
    result.forecasts.reserve(f1.size());
    for (std::size_t i = 0; i < f1.size(); ++i) {
        result.forecasts.push_back({f1[i].day, w1 * f1[i].used + w2 * f2[i].used});
    }
    result.fitted = true;

    EnsembleInfo info;
    info.first = winner.id;
    info.second = runner_up.id;
    info.w1 = w1;
    info.w2 = w2;
    for (const Member& m : members) {
        info.tournament.push_back({m.id, m.mape});
    }
    result.ensemble = std::move(info);
    return result;
}

} // namespace caprisk
