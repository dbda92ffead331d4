#include "caprisk/decision.hpp"

#include <cmath>

namespace caprisk {

CostOutcome expected_cost(const ConfusionMatrix& m, const CostModel& cost) {
    if (cost.c_call < 0.0 || cost.c_case < 0.0 || !std::isfinite(cost.c_call) ||
        !std::isfinite(cost.c_case)) {
        throw ValidationError("expected_cost: costs must be finite and >= 0");
    }
    CostOutcome outcome;
    outcome.n_calls = m.tp + m.fp;
    outcome.n_cases = m.fn;
    outcome.total_cost = static_cast<double>(outcome.n_calls) * cost.c_call +
                         static_cast<double>(outcome.n_cases) * cost.c_case;
    return outcome;
}

ThresholdChoice optimal_threshold(std::span<const double> probabilities,
                                  std::span<const int> labels, const CostModel& cost,
                                  std::span<const double> grid) {
    const std::vector<SweepPoint> sweep = threshold_sweep(probabilities, labels, grid);
    ThresholdChoice choice;
    choice.curve.reserve(sweep.size());
    bool have_best = false;
    for (const SweepPoint& point : sweep) {
        const CostOutcome outcome = expected_cost(point.matrix, cost);
        choice.curve.push_back({point.threshold, outcome});
        const bool better =
            !have_best || outcome.total_cost < choice.outcome.total_cost ||
            (outcome.total_cost == choice.outcome.total_cost && point.threshold > choice.threshold);
        if (better) {
            choice.threshold = point.threshold;
            choice.outcome = outcome;
            have_best = true;
        }
    }
    return choice;
}

double cost_comparison(const ConfusionMatrix& a, const ConfusionMatrix& b,
                       const CostModel& cost) {
    const double cost_a = expected_cost(a, cost).total_cost;
    const double cost_b = expected_cost(b, cost).total_cost;
    if (cost_b == 0.0) {
        throw UndefinedResultError("cost_comparison: baseline cost is zero");
    }
    return (cost_b - cost_a) / cost_b;
}

std::vector<double> default_threshold_grid() {
    std::vector<double> grid;
    grid.reserve(101);
    for (int i = 0; i <= 100; ++i) {
        grid.push_back(static_cast<double>(i) / 100.0);
    }
    return grid;
}

} // namespace caprisk
