#include "caprisk/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace caprisk {
namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string::size_type start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(trim(std::string_view(line).substr(start)));
            break;
        }
        out.push_back(trim(std::string_view(line).substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

double parse_fraction(const std::string& field, std::size_t row, const char* name) {
    double v = 0.0;
    const auto* end = field.data() + field.size();
    const auto res = std::from_chars(field.data(), end, v);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw ParseError("row " + std::to_string(row) + ": cannot parse " + name +
                         " from '" + field + "'");
    }
    if (!std::isfinite(v)) {
        throw ParseError("row " + std::to_string(row) + ": non-finite " + name);
    }
    return v;
}

std::int64_t parse_day(const std::string& field, std::size_t row) {
    std::int64_t v = 0;
    const auto* end = field.data() + field.size();
    const auto res = std::from_chars(field.data(), end, v);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw ParseError("row " + std::to_string(row) + ": cannot parse day_index from '" +
                         field + "'");
    }
    return v;
}

} // namespace

void validate_series(const CapacitySeries& series) {
    if (series.system_id.empty()) {
        throw ValidationError("series has empty system_id");
    }
    if (!(series.total_capacity > 0.0) || !std::isfinite(series.total_capacity)) {
        throw ValidationError("system " + series.system_id + ": total_capacity must be > 0");
    }
    for (std::size_t i = 0; i < series.observations.size(); ++i) {
        const Observation& o = series.observations[i];
        if (!(o.used >= 0.0 && o.used <= 1.0)) {
            throw ValidationError("system " + series.system_id + ", day " +
                                  std::to_string(o.day) + ": used fraction " +
                                  format_double(o.used) + " outside [0,1]");
        }
        if (i > 0 && o.day <= series.observations[i - 1].day) {
            throw ValidationError("system " + series.system_id +
                                  ": day indices not strictly increasing at day " +
                                  std::to_string(o.day));
        }
    }
}

Headroom headroom(const CapacitySeries& series) {
    if (series.observations.empty()) {
        throw InsufficientDataError("system " + series.system_id + ": empty series");
    }
    return Headroom{1.0 - series.observations.back().used};
}

std::vector<CapacitySeries> parse_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("empty input: missing CSV header");
    }
    const auto header = split_fields(line);
    const std::vector<std::string> expected = {"system_id", "day_index", "used_fraction",
                                               "total_capacity"};
    if (std::vector<std::string>(header.begin(), header.end()) != expected) {
        throw ParseError("bad CSV header: expected system_id,day_index,used_fraction,total_capacity");
    }

    std::map<std::string, CapacitySeries> by_id;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 4) {
            throw ParseError("row " + std::to_string(row) + ": expected 4 fields, got " +
                             std::to_string(fields.size()));
        }
        if (fields[0].empty()) {
            throw ParseError("row " + std::to_string(row) + ": empty system_id");
        }
        const std::int64_t day = parse_day(fields[1], row);
        const double used = parse_fraction(fields[2], row, "used_fraction");
        const double total = parse_fraction(fields[3], row, "total_capacity");
        if (!(used >= 0.0 && used <= 1.0)) {
            throw ValidationError("row " + std::to_string(row) + ": used_fraction " +
                                  fields[2] + " outside [0,1]");
        }
        if (!(total > 0.0)) {
            throw ValidationError("row " + std::to_string(row) + ": total_capacity must be > 0");
        }
        auto [it, inserted] = by_id.try_emplace(fields[0]);
        CapacitySeries& s = it->second;
        if (inserted) {
            s.system_id = fields[0];
            s.total_capacity = total;
        } else if (s.total_capacity != total) {
            throw ValidationError("row " + std::to_string(row) + ": system " + fields[0] +
                                  " changes total_capacity");
        }
        s.observations.push_back(Observation{day, used});
    }

    std::vector<CapacitySeries> fleet;
    fleet.reserve(by_id.size());
    for (auto& [id, s] : by_id) {
        std::sort(s.observations.begin(), s.observations.end(),
                  [](const Observation& a, const Observation& b) { return a.day < b.day; });
        for (std::size_t i = 1; i < s.observations.size(); ++i) {
            if (s.observations[i].day == s.observations[i - 1].day) {
                throw ValidationError("system " + id + ": duplicate day_index " +
                                      std::to_string(s.observations[i].day));
            }
        }
        validate_series(s);
        fleet.push_back(std::move(s));
    }
    return fleet;
}

std::vector<CapacitySeries> ingest_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open input file: " + path);
    }
    return parse_csv(in);
}

void emit_csv(std::ostream& out, std::span<const CapacitySeries> fleet) {
    out << "system_id,day_index,used_fraction,total_capacity\n";
    for (const CapacitySeries& s : fleet) {
        for (const Observation& o : s.observations) {
            out << s.system_id << ',' << o.day << ',' << format_double(o.used) << ','
                << format_double(s.total_capacity) << '\n';
        }
    }
}

void write_csv(const std::string& path, std::span<const CapacitySeries> fleet) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot open output file: " + path);
    }
    emit_csv(out, fleet);
}

std::span<const Observation> latest_daily_run(const CapacitySeries& series) {
    const auto& obs = series.observations;
    if (obs.empty()) return {};
    std::size_t start = obs.size() - 1;
    while (start > 0 && obs[start].day - obs[start - 1].day == 1) {
        --start;
    }
    return std::span<const Observation>(obs).subspan(start);
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace caprisk
