#include "caprisk/synth.hpp"

#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "caprisk/rng.hpp"

namespace caprisk {
namespace {

double clamp_used(double v, int& clamp_events) {
    if (v < 0.0) {
        ++clamp_events;
        return 0.0;
    }
    if (v > 1.0) {
        ++clamp_events;
        return 1.0;
    }
    return v;
}

} // namespace

std::string_view to_string(WorkloadKind kind) {
    switch (kind) {
    case WorkloadKind::brownian: return "brownian";
    case WorkloadKind::linear: return "linear";
    case WorkloadKind::stratified: return "stratified";
    case WorkloadKind::discontinuous: return "discontinuous";
    }
    return "unknown";
}

WorkloadKind workload_kind_from_string(std::string_view name) {
    if (name == "brownian") return WorkloadKind::brownian;
    if (name == "linear") return WorkloadKind::linear;
    if (name == "stratified") return WorkloadKind::stratified;
    if (name == "discontinuous") return WorkloadKind::discontinuous;
    throw ValidationError("unknown workload kind: " + std::string(name));
}

Generated generate(const WorkloadSpec& spec) {
    if (spec.n_days < 1) {
        throw ValidationError("workload spec: n_days must be >= 1");
    }
    if (!(spec.total_capacity > 0.0)) {
        throw ValidationError("workload spec: total_capacity must be > 0");
    }
    if (spec.sigma2 < 0.0) {
        throw ValidationError("workload spec: sigma2 must be >= 0");
    }
    if (!(spec.start >= 0.0 && spec.start <= 1.0)) {
        throw ValidationError("workload spec: start must be in [0,1]");
    }
    if (spec.kind == WorkloadKind::stratified && spec.step_every < 1) {
        throw ValidationError("workload spec: step_every must be >= 1");
    }

    Generated out;
    out.series.system_id = spec.system_id;
    out.series.total_capacity = spec.total_capacity;
    out.series.observations.reserve(static_cast<std::size_t>(spec.n_days));

    const CounterRng rng(spec.seed, 0);
    const double sigma = std::sqrt(spec.sigma2);
    double walk = spec.start; // brownian only; other kinds are closed-form
    for (int day = 0; day < spec.n_days; ++day) {
        double level = 0.0;
        switch (spec.kind) {
        case WorkloadKind::brownian:
            if (day > 0) {
                walk += spec.mu + sigma * rng.normal(static_cast<std::uint64_t>(day));
            }
            level = walk;
            break;
        case WorkloadKind::linear:
            level = spec.start + spec.slope * static_cast<double>(day);
            break;
        case WorkloadKind::stratified:
            level = spec.start + spec.step_size * static_cast<double>(day / spec.step_every);
            break;
        case WorkloadKind::discontinuous:
            level = spec.start + spec.slope * static_cast<double>(day) +
                    (day >= spec.jump_day ? spec.jump : 0.0);
            break;
        }
        level = clamp_used(level, out.clamp_events);
        walk = level; // saturated utilization keeps walking from the boundary
        out.series.observations.push_back({day, level});
    }
    return out;
}

McEstimate mc_hitting_probability(double mu, double sigma2, double y, double t,
                                  std::int64_t n_paths, std::int64_t n_steps,
                                  std::uint64_t seed, int workers) {
    if (!(sigma2 > 0.0) || !(t > 0.0)) {
        throw ValidationError("mc_hitting_probability: sigma2 and t must be > 0");
    }
    if (y < 0.0) {
        throw ValidationError("mc_hitting_probability: y must be >= 0");
    }
    if (n_paths < 10'000 || n_steps < 1'000) {
        throw ValidationError(
            "mc_hitting_probability: needs n_paths >= 1e4 and n_steps >= 1e3");
    }

    McEstimate result;
    if (y == 0.0) {
        // Paths start at 0, so the running maximum is already >= y.
        result.estimate = 1.0;
        result.std_error = 0.0;
        return result;
    }

    const double dt = t / static_cast<double>(n_steps);
    const double drift_step = mu * dt;
    const double sigma_step = std::sqrt(sigma2 * dt);

    int n_workers = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
    if (n_workers < 1) n_workers = 1;

    // Hit-or-not per path depends only on (seed, path index), and the
    // reduction is an integer sum, so any thread layout gives the same count.
    std::atomic<std::int64_t> hits{0};
    auto simulate_range = [&](std::int64_t begin, std::int64_t end) {
        std::int64_t local_hits = 0;
        for (std::int64_t path = begin; path < end; ++path) {
            const CounterRng rng(seed, static_cast<std::uint64_t>(path) + 1);
            double x = 0.0;
            for (std::int64_t step = 0; step < n_steps; ++step) {
                x += drift_step + sigma_step * rng.normal(static_cast<std::uint64_t>(step));
                if (x >= y) {
                    ++local_hits;
                    break;
                }
            }
        }
        hits.fetch_add(local_hits, std::memory_order_relaxed);
    };

    if (n_workers == 1) {
        simulate_range(0, n_paths);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        const std::int64_t chunk = (n_paths + n_workers - 1) / n_workers;
        for (int w = 0; w < n_workers; ++w) {
            const std::int64_t begin = w * chunk;
            const std::int64_t end = std::min(n_paths, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(simulate_range, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    const double p = static_cast<double>(hits.load()) / static_cast<double>(n_paths);
    result.estimate = p;
    result.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(n_paths));
    return result;
}

} // namespace caprisk
