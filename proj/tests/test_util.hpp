#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "caprisk/core.hpp"
#include "caprisk/rng.hpp"

namespace caprisk::test {

inline CapacitySeries make_series(std::string id, const std::vector<double>& used,
                                  std::int64_t first_day = 0, double total = 1000.0) {
    CapacitySeries s;
    s.system_id = std::move(id);
    s.total_capacity = total;
    for (std::size_t i = 0; i < used.size(); ++i) {
        s.observations.push_back({first_day + static_cast<std::int64_t>(i), used[i]});
    }
    return s;
}

inline CapacitySeries make_series_at(std::string id, const std::vector<std::int64_t>& days,
                                     const std::vector<double>& used, double total = 1000.0) {
    CapacitySeries s;
    s.system_id = std::move(id);
    s.total_capacity = total;
    for (std::size_t i = 0; i < used.size(); ++i) {
        s.observations.push_back({days[i], used[i]});
    }
    return s;
}

// Unclamped daily random walk; may leave [0,1], which the estimator
// operations do not mind. Useful for consistency checks against the
// generating parameters.
inline CapacitySeries raw_walk(std::uint64_t seed, int n_days, double mu, double sigma,
                               double start = 0.0) {
    CapacitySeries s;
    s.system_id = "walk";
    s.total_capacity = 1.0;
    const CounterRng rng(seed, 0);
    double level = start;
    for (int day = 0; day < n_days; ++day) {
        if (day > 0) level += mu + sigma * rng.normal(static_cast<std::uint64_t>(day));
        s.observations.push_back({day, level});
    }
    return s;
}

} // namespace caprisk::test
