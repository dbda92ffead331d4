#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "caprisk/core.hpp"

namespace caprisk {

enum class ModelId {
    naive,
    plr,
    ensemble,
    member_linear,
    member_theta,
    member_ses,
    member_drift,
};

std::string_view to_string(ModelId id);

enum class RejectReason { low_r2, nonpositive_slope, insufficient_data };

std::string_view to_string(RejectReason reason);

// Interpretation of the "delta" growth target: an absolute utilization
// increase, or one relative to current utilization.
enum class DeltaMode { absolute, relative };

inline constexpr int kPlrMinObservations = 15;
inline constexpr double kPlrMinR2 = 0.70;
inline constexpr double kPlrTieTolerance = 1e-9;
inline constexpr int kValidationDays = 7;
inline constexpr int kEnsembleMinObservations = kPlrMinObservations + kValidationDays;

// Accepted piecewise-linear fit over the suffix observations[start_index..].
struct PlrFit {
    std::size_t start_index = 0;
    double slope = 0.0;     // fraction per day
    double intercept = 0.0; // fraction at day 0
    double r2 = 0.0;

    double predict(std::int64_t day) const {
        return intercept + slope * static_cast<double>(day);
    }
};

struct TournamentEntry {
    ModelId member;
    double validation_mape = 0.0;
};

struct EnsembleInfo {
    std::vector<TournamentEntry> tournament; // ranked, best first
    ModelId first;
    ModelId second;
    double w1 = 0.0;
    double w2 = 0.0;
};

struct ForecastResult {
    ModelId model_id = ModelId::naive;
    std::vector<Observation> forecasts; // (day, predicted used fraction)
    bool fitted = false;
    std::optional<RejectReason> reject_reason;
    std::optional<PlrFit> plr;
    std::optional<EnsembleInfo> ensemble;
};

// Flat forecast at the last observed value (martingale premise).
ForecastResult naive_forecast(const CapacitySeries& series, int horizon_days);

// Coefficient of determination, 1 - SS_res/SS_tot. Throws
// UndefinedResultError when the actuals are all identical.
double r_squared(std::span<const double> actuals, std::span<const double> fitted_values);

// Best-suffix OLS: every suffix with >= kPlrMinObservations points is a
// candidate; the highest R^2 wins, ties within kPlrTieTolerance going to
// the longest suffix. Rejections come back as unfitted results, not
// exceptions.
ForecastResult plr_fit(const CapacitySeries& series, int horizon_days = kValidationDays);

// Days until utilization grows by delta at the fitted slope.
double days_to_threshold(const PlrFit& fit, double c_n, double delta,
                         DeltaMode mode = DeltaMode::absolute);

// Tournament of {linear, theta, ses, drift} members: each is fit with the
// last kValidationDays held out and scored by MAPE there; the top two are
// refit on the full series and blended with error-ratio weights.
ForecastResult ensemble_forecast(const CapacitySeries& series, int horizon_days);

// w1 = e2/(e1+e2), w2 = e1/(e1+e2); equal errors split evenly.
std::pair<double, double> ensemble_weights(double e1, double e2);

} // namespace caprisk
