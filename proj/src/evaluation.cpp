#include "caprisk/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "caprisk/rng.hpp"
#include "caprisk/tdist.hpp"

namespace caprisk {
namespace {

struct SampleMoments {
    double mean = 0.0;
    double variance = 0.0; // unbiased
};

SampleMoments moments(std::span<const double> xs) {
    const auto n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : xs) {
        const double c = x - mean;
        ss += c * c;
    }
    return {mean, ss / (n - 1.0)};
}

// Per-system holdout MAPE for each model, or nothing when the model
// produced no forecast for that system.
struct SystemOutcome {
    std::optional<double> naive;
    std::optional<double> plr;
    std::optional<double> ensemble;

    bool common() const { return naive && plr && ensemble; }
};

SystemOutcome score_system(const CapacitySeries& series, int holdout_days) {
    SystemOutcome outcome;
    const auto& obs = series.observations;
    if (obs.size() < static_cast<std::size_t>(holdout_days) + 2) {
        return outcome;
    }
    const std::size_t n_train = obs.size() - static_cast<std::size_t>(holdout_days);

    CapacitySeries train = series;
    train.observations.assign(obs.begin(), obs.begin() + static_cast<std::ptrdiff_t>(n_train));

    std::vector<double> actual;
    actual.reserve(static_cast<std::size_t>(holdout_days));
    for (std::size_t i = n_train; i < obs.size(); ++i) {
        if (obs[i].used == 0.0) return outcome; // MAPE undefined for everyone
        actual.push_back(obs[i].used);
    }

    auto holdout_mape = [&](const ForecastResult& f) -> std::optional<double> {
        if (!f.fitted) return std::nullopt;
        std::vector<double> predicted;
        predicted.reserve(actual.size());
        for (std::size_t i = 0; i < actual.size(); ++i) {
            predicted.push_back(f.forecasts[i].used);
        }
        return mape(actual, predicted);
    };

    outcome.naive = holdout_mape(naive_forecast(train, holdout_days));
    outcome.plr = holdout_mape(plr_fit(train, holdout_days));
    outcome.ensemble = holdout_mape(ensemble_forecast(train, holdout_days));
    return outcome;
}

void for_each_parallel(std::size_t count, int workers, auto&& body) {
    const int n_workers =
        std::max(1, std::min<int>(workers, static_cast<int>(count)));
    if (n_workers == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = static_cast<std::size_t>(w); i < count;
                 i += static_cast<std::size_t>(n_workers)) {
                body(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace

double ConfusionMatrix::accuracy() const {
    if (total() == 0) {
        throw UndefinedResultError("confusion matrix is empty");
    }
    return static_cast<double>(tp + tn) / static_cast<double>(total());
}

double ConfusionMatrix::precision() const {
    if (tp + fp == 0) {
        throw UndefinedResultError("precision undefined: no positive predictions");
    }
    return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

bool eligible(const CapacitySeries& series, const EligibilityRule& rule) {
    if (series.observations.empty()) return false;
    if (!(series.observations.back().used > rule.min_utilization)) return false;
    const auto run = latest_daily_run(series);
    if (run.size() < static_cast<std::size_t>(rule.window)) return false;
    const auto tail = run.subspan(run.size() - static_cast<std::size_t>(rule.window));
    std::vector<double> used;
    used.reserve(tail.size());
    for (const Observation& o : tail) used.push_back(o.used);
    return moments(used).variance > rule.min_variance;
}

bool in_cohort(const CapacitySeries& series, const CohortFilter& filter) {
    if (series.observations.size() < static_cast<std::size_t>(filter.min_observations)) {
        return false;
    }
    const double used = series.observations.back().used;
    return used >= filter.min_used && used <= filter.max_used;
}

double mape(std::span<const double> actual, std::span<const double> forecast) {
    if (actual.empty() || actual.size() != forecast.size()) {
        throw ValidationError("mape: needs two equal-length non-empty samples");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual[i] == 0.0) {
            throw UndefinedResultError("mape: actual value of zero at position " +
                                       std::to_string(i));
        }
        sum += std::fabs(actual[i] - forecast[i]) / actual[i];
    }
    return sum / static_cast<double>(actual.size());
}

WelchResult welch_t_test(std::span<const double> sample_a, std::span<const double> sample_b) {
    if (sample_a.size() < 2 || sample_b.size() < 2) {
        throw ValidationError("welch_t_test: both samples need size >= 2");
    }
    const SampleMoments a = moments(sample_a);
    const SampleMoments b = moments(sample_b);
    if (a.variance <= 0.0 || b.variance <= 0.0) {
        throw ValidationError("welch_t_test: degenerate zero-variance sample");
    }
    const double na = static_cast<double>(sample_a.size());
    const double nb = static_cast<double>(sample_b.size());
    const double va = a.variance / na;
    const double vb = b.variance / nb;
    const double se = std::sqrt(va + vb);

    WelchResult result;
    result.mean_a = a.mean;
    result.mean_b = b.mean;
    result.t_statistic = (a.mean - b.mean) / se;
    result.dof = (va + vb) * (va + vb) /
                 (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    result.p_value = 2.0 * student_t_cdf(-std::fabs(result.t_statistic), result.dof);
    const double t_crit = student_t_quantile(0.975, result.dof);
    result.ci95 = {a.mean - b.mean - t_crit * se, a.mean - b.mean + t_crit * se};
    return result;
}

std::vector<BacktestRun> run_backtest(std::span<const CapacitySeries> systems,
                                      const BacktestOptions& options) {
    if (systems.empty()) {
        throw InsufficientDataError("run_backtest: no systems");
    }
    if (options.holdout_days < 1 || options.iterations < 1) {
        throw ValidationError("run_backtest: holdout_days and iterations must be >= 1");
    }
    const std::size_t population = systems.size();
    const std::size_t sample_size =
        options.sample_size == 0 ? population : static_cast<std::size_t>(options.sample_size);
    if (sample_size > population) {
        throw ValidationError("run_backtest: sample_size exceeds population");
    }

    // Model scores do not depend on the sampling, so compute them once.
    std::vector<SystemOutcome> outcomes(population);
    for_each_parallel(population, options.workers, [&](std::size_t i) {
        outcomes[i] = score_system(systems[i], options.holdout_days);
    });

    std::vector<BacktestRun> runs;
    runs.reserve(static_cast<std::size_t>(options.iterations));
    for (int iteration = 0; iteration < options.iterations; ++iteration) {
        SequentialRng rng(options.seed, static_cast<std::uint64_t>(iteration));
        std::vector<std::size_t> indices(population);
        std::iota(indices.begin(), indices.end(), std::size_t{0});
        for (std::size_t i = 0; i < sample_size; ++i) {
            const std::size_t j = i + rng.uniform_index(population - i);
            std::swap(indices[i], indices[j]);
        }
        indices.resize(sample_size);
        std::sort(indices.begin(), indices.end());

        BacktestRun run;
        std::vector<double> naive_mapes, plr_mapes, ensemble_mapes;
        for (std::size_t idx : indices) {
            const SystemOutcome& o = outcomes[idx];
            if (!o.common()) continue;
            const std::string& id = systems[idx].system_id;
            run.report.per_system.push_back({id, ModelId::naive, *o.naive});
            run.report.per_system.push_back({id, ModelId::plr, *o.plr});
            run.report.per_system.push_back({id, ModelId::ensemble, *o.ensemble});
            naive_mapes.push_back(*o.naive);
            plr_mapes.push_back(*o.plr);
            ensemble_mapes.push_back(*o.ensemble);
        }
        run.report.n_common = static_cast<int>(naive_mapes.size());
        if (run.report.n_common == 0) {
            throw InsufficientDataError(
                "run_backtest: no systems produced forecasts from every model");
        }
        auto mean_of = [](std::span<const double> xs) {
            return std::accumulate(xs.begin(), xs.end(), 0.0) /
                   static_cast<double>(xs.size());
        };
        run.report.per_model_mean_mape[ModelId::naive] = mean_of(naive_mapes);
        run.report.per_model_mean_mape[ModelId::plr] = mean_of(plr_mapes);
        run.report.per_model_mean_mape[ModelId::ensemble] = mean_of(ensemble_mapes);
        run.welch_vs_naive[ModelId::plr] = welch_t_test(naive_mapes, plr_mapes);
        run.welch_vs_naive[ModelId::ensemble] = welch_t_test(naive_mapes, ensemble_mapes);
        runs.push_back(std::move(run));
    }
    return runs;
}

int label_actual(const CapacitySeries& series, int window_days, double delta) {
    if (window_days < 1) {
        throw ValidationError("label_actual: window must be >= 1 day");
    }
    const auto& obs = series.observations;
    if (obs.empty()) {
        throw InsufficientDataError("label_actual: empty series");
    }
    const std::int64_t cutoff_day = obs.back().day - window_days;
    std::size_t first_test = obs.size();
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (obs[i].day > cutoff_day) {
            first_test = i;
            break;
        }
    }
    if (first_test == 0) {
        throw InsufficientDataError("system " + series.system_id +
                                    ": no observations before the test window");
    }
    if (obs.size() - first_test < static_cast<std::size_t>(window_days)) {
        throw InsufficientDataError("system " + series.system_id +
                                    ": test window shorter than " +
                                    std::to_string(window_days) + " days");
    }
    const double at_cutoff = obs[first_test - 1].used;
    double window_max = 0.0;
    for (std::size_t i = first_test; i < obs.size(); ++i) {
        window_max = std::max(window_max, obs[i].used);
    }
    return window_max - at_cutoff >= delta ? 1 : 0;
}

int classify_ser(double probability, double threshold) {
    if (!(probability >= 0.0 && probability <= 1.0) ||
        !(threshold >= 0.0 && threshold <= 1.0)) {
        throw ValidationError("classify_ser: probability and threshold must be in [0,1]");
    }
    return probability > threshold ? 1 : 0;
}

int classify_plr(const ForecastResult& plr_result, double c_n, double delta, int window_days,
                 DeltaMode mode) {
    if (!plr_result.fitted || !plr_result.plr) {
        return 0;
    }
    return days_to_threshold(*plr_result.plr, c_n, delta, mode) <=
                   static_cast<double>(window_days)
               ? 1
               : 0;
}

ConfusionMatrix confusion(std::span<const int> labels, std::span<const int> predictions) {
    if (labels.empty() || labels.size() != predictions.size()) {
        throw ValidationError("confusion: needs two equal-length non-empty vectors");
    }
    ConfusionMatrix m;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if ((labels[i] != 0 && labels[i] != 1) || (predictions[i] != 0 && predictions[i] != 1)) {
            throw ValidationError("confusion: labels and predictions must be 0 or 1");
        }
        if (labels[i] == 1) {
            predictions[i] == 1 ? ++m.tp : ++m.fn;
        } else {
            predictions[i] == 1 ? ++m.fp : ++m.tn;
        }
    }
    return m;
}

std::vector<SweepPoint> threshold_sweep(std::span<const double> probabilities,
                                        std::span<const int> labels,
                                        std::span<const double> grid) {
    if (probabilities.empty() || probabilities.size() != labels.size() || grid.empty()) {
        throw ValidationError("threshold_sweep: empty input");
    }
    std::vector<SweepPoint> sweep;
    sweep.reserve(grid.size());
    std::vector<int> predictions(labels.size());
    for (double threshold : grid) {
        for (std::size_t i = 0; i < probabilities.size(); ++i) {
            predictions[i] = classify_ser(probabilities[i], threshold);
        }
        SweepPoint point;
        point.threshold = threshold;
        point.matrix = confusion(labels, predictions);
        if (point.matrix.tp + point.matrix.fn > 0) {
            point.tpr = static_cast<double>(point.matrix.tp) /
                        static_cast<double>(point.matrix.tp + point.matrix.fn);
        }
        if (point.matrix.fp + point.matrix.tn > 0) {
            point.fpr = static_cast<double>(point.matrix.fp) /
                        static_cast<double>(point.matrix.fp + point.matrix.tn);
        }
        sweep.push_back(point);
    }
    return sweep;
}

} // namespace caprisk
