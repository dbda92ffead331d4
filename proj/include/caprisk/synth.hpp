#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "caprisk/core.hpp"

namespace caprisk {

enum class WorkloadKind { brownian, linear, stratified, discontinuous };

std::string_view to_string(WorkloadKind kind);
WorkloadKind workload_kind_from_string(std::string_view name);

struct WorkloadSpec {
    WorkloadKind kind = WorkloadKind::brownian;
    std::string system_id = "synthetic";
    int n_days = 120;
    std::uint64_t seed = 0;
    double start = 0.3;          // initial used fraction
    double total_capacity = 1.0;
    double mu = 0.0;             // brownian: drift per day
    double sigma2 = 1e-4;        // brownian: variance per day
    double slope = 0.001;        // linear / discontinuous base trend
    double step_size = 0.05;     // stratified: plateau jump
    int step_every = 20;         // stratified: days per plateau
    double jump = -0.2;          // discontinuous: one-off level change
    int jump_day = 30;
};

struct Generated {
    CapacitySeries series;
    int clamp_events = 0; // days the raw value left [0,1] and was clamped
};

// Deterministic series for a spec; same seed, same bytes, regardless of
// how many systems are generated in parallel.
Generated generate(const WorkloadSpec& spec);

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0; // sqrt(p(1-p)/n_paths)
};

// First-passage oracle: simulates n_paths discretized drift+diffusion
// paths (increments N(mu*dt, sigma2*dt), dt = t/n_steps) and counts those
// whose running maximum reaches y. Discretization makes the estimate a
// slight underestimate of the continuous-time probability. workers = 0
// uses hardware concurrency; results do not depend on the worker count.
McEstimate mc_hitting_probability(double mu, double sigma2, double y, double t,
                                  std::int64_t n_paths, std::int64_t n_steps,
                                  std::uint64_t seed, int workers = 0);

} // namespace caprisk
