#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "caprisk/baselines.hpp"
#include "caprisk/core.hpp"

namespace caprisk {

struct ConfusionMatrix {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    std::int64_t fn = 0;

    std::int64_t total() const { return tp + fp + tn + fn; }
    double accuracy() const;
    double precision() const;
};

struct WelchResult {
    double mean_a = 0.0;
    double mean_b = 0.0;
    double t_statistic = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
    std::pair<double, double> ci95{0.0, 0.0}; // on mean_a - mean_b
};

struct SystemScore {
    std::string system_id;
    ModelId model_id;
    double mape = 0.0;
};

struct BacktestReport {
    std::vector<SystemScore> per_system; // common systems only, sorted by id
    std::map<ModelId, double> per_model_mean_mape;
    int n_common = 0;
};

// One sampling iteration of the comparison experiment.
struct BacktestRun {
    BacktestReport report;
    std::map<ModelId, WelchResult> welch_vs_naive;
};

struct BacktestOptions {
    int holdout_days = 7;
    int iterations = 1;
    int sample_size = 0; // 0 = whole population
    std::uint64_t seed = 0;
    int workers = 1;
};

struct EligibilityRule {
    double min_utilization = 0.10;
    double min_variance = 1e-4; // of the used fraction, last `window` days
    int window = 10;
};

// Screens out idle systems: requires utilization above the floor and real
// movement over the most recent daily window. Short or gappy tails are
// simply ineligible.
bool eligible(const CapacitySeries& series, const EligibilityRule& rule = {});

// Cohort preset used by the accuracy experiment: enough history to split
// and utilization in the band where 30-day changes are visible.
struct CohortFilter {
    int min_observations = 60;
    double min_used = 0.50;
    double max_used = 0.70;
};

bool in_cohort(const CapacitySeries& series, const CohortFilter& filter = {});

// Mean absolute percentage error; undefined when any actual is zero.
double mape(std::span<const double> actual, std::span<const double> forecast);

WelchResult welch_t_test(std::span<const double> sample_a, std::span<const double> sample_b);

// Scores every model once per system (train = all but the last
// holdout_days observations, MAPE on the holdout), then repeatedly samples
// systems without replacement and Welch-tests naive against each other
// model over the common subset. Bit-identical for a fixed seed no matter
// the worker count.
std::vector<BacktestRun> run_backtest(std::span<const CapacitySeries> systems,
                                      const BacktestOptions& options);

// Ground-truth label: did utilization rise by >= delta at any point in the
// trailing window (relative to the last pre-window observation)?
int label_actual(const CapacitySeries& series, int window_days = 30, double delta = 0.02);

// Decision rule d(x) for the probability model: strict threshold exceedance.
int classify_ser(double probability, double threshold = 0.60);

// Decision rule for the regression model: accepted fit reaching the delta
// within the window. Rejected fits classify as not-at-risk.
int classify_plr(const ForecastResult& plr_result, double c_n, double delta, int window_days,
                 DeltaMode mode = DeltaMode::absolute);

ConfusionMatrix confusion(std::span<const int> labels, std::span<const int> predictions);

struct SweepPoint {
    double threshold = 0.0;
    ConfusionMatrix matrix;
    std::optional<double> tpr; // missing when no actual positives
    std::optional<double> fpr; // missing when no actual negatives
};

std::vector<SweepPoint> threshold_sweep(std::span<const double> probabilities,
                                        std::span<const int> labels,
                                        std::span<const double> grid);

} // namespace caprisk
