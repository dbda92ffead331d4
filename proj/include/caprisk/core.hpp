#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "caprisk/error.hpp"

namespace caprisk {

struct Observation {
    std::int64_t day = 0; // abstract day index
    double used = 0.0;    // fraction of total capacity, in [0, 1]

    friend bool operator==(const Observation&, const Observation&) = default;
};

// One system's utilization history. Immutable after ingestion/validation
// and safe to share across concurrent workers.
struct CapacitySeries {
    std::string system_id;
    std::vector<Observation> observations; // strictly increasing day index
    double total_capacity = 0.0;           // > 0; `used` is a fraction of it

    friend bool operator==(const CapacitySeries&, const CapacitySeries&) = default;
};

struct Headroom {
    double y = 0.0; // remaining fraction, 1 - most recent used
};

struct Horizon {
    double days = 0.0; // > 0
};

// Throws ValidationError when an invariant is broken.
void validate_series(const CapacitySeries& series);

Headroom headroom(const CapacitySeries& series);

// CSV schema: header `system_id,day_index,used_fraction,total_capacity`,
// one row per observation. Systems come back sorted by system_id with
// observations sorted by day index.
std::vector<CapacitySeries> parse_csv(std::istream& in);
std::vector<CapacitySeries> ingest_csv(const std::string& path);
void emit_csv(std::ostream& out, std::span<const CapacitySeries> fleet);
void write_csv(const std::string& path, std::span<const CapacitySeries> fleet);

// Most recent run of observations with day gaps of exactly 1. Used by
// operations defined over "the last n days"; gaps cut the run short.
std::span<const Observation> latest_daily_run(const CapacitySeries& series);

// Shortest decimal representation that round-trips the exact double.
std::string format_double(double v);

} // namespace caprisk
