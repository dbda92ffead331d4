#pragma once

#include <span>
#include <vector>

#include "caprisk/evaluation.hpp"

namespace caprisk {

struct CostModel {
    double c_call = 0.0; // per proactive call (every positive prediction)
    double c_case = 0.0; // per reactive support case (every missed positive)
};

struct CostOutcome {
    std::int64_t n_calls = 0; // tp + fp
    std::int64_t n_cases = 0; // fn
    double total_cost = 0.0;  // n_calls * c_call + n_cases * c_case
};

CostOutcome expected_cost(const ConfusionMatrix& m, const CostModel& cost);

struct CostCurvePoint {
    double threshold = 0.0;
    CostOutcome outcome;
};

struct ThresholdChoice {
    double threshold = 0.0;
    CostOutcome outcome;
    std::vector<CostCurvePoint> curve;
};

// Evaluates the cost at every grid threshold and returns the argmin; ties
// go to the highest threshold (fewest calls). The curve comes along for
// plotting.
ThresholdChoice optimal_threshold(std::span<const double> probabilities,
                                  std::span<const int> labels, const CostModel& cost,
                                  std::span<const double> grid);

// Relative saving of a over b: (cost_b - cost_a) / cost_b.
double cost_comparison(const ConfusionMatrix& a, const ConfusionMatrix& b,
                       const CostModel& cost);

// 0.00, 0.01, ..., 1.00
std::vector<double> default_threshold_grid();

} // namespace caprisk
