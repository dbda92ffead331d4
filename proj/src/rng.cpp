#include "caprisk/rng.hpp"

#include <cmath>

namespace caprisk {
namespace {

// 128-layer ziggurat for the standard normal (Doornik's ZIGNOR layout).
constexpr int kLayers = 128;
constexpr double kTailX = 3.442619855899;       // right edge of layer 1
constexpr double kBoxArea = 9.91256303526217e-3;

struct ZigguratTables {
    double x[kLayers + 1];
    double ratio[kLayers]; // x[i+1]/x[i], the fast-accept bound on |u|
    ZigguratTables() {
        const double f = std::exp(-0.5 * kTailX * kTailX);
        x[0] = kBoxArea / f; // base strip, area matched with the tail
        x[1] = kTailX;
        x[kLayers] = 0.0;
        for (int i = 2; i < kLayers; ++i) {
            x[i] = std::sqrt(-2.0 * std::log(kBoxArea / x[i - 1] +
                                             std::exp(-0.5 * x[i - 1] * x[i - 1])));
        }
        for (int i = 0; i < kLayers; ++i) {
            ratio[i] = x[i + 1] / x[i];
        }
    }
};

const ZigguratTables& tables() {
    static const ZigguratTables t;
    return t;
}

double u01_from_bits(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

} // namespace

double CounterRng::normal(std::uint64_t index) const noexcept {
    const ZigguratTables& t = tables();
    std::uint64_t ctr = index * 64;
    for (;;) {
        const std::uint64_t b = bits(ctr++);
        const double u = 2.0 * u01_from_bits(b) - 1.0;
        const unsigned layer = static_cast<unsigned>(b & 0x7F);
        if (std::fabs(u) < t.ratio[layer]) {
            return u * t.x[layer];
        }
        if (layer == 0) {
            // Tail sample beyond kTailX (Marsaglia's method).
            double xr, yr;
            do {
                xr = std::log(u01(ctr++)) / kTailX;
                yr = std::log(u01(ctr++));
            } while (-2.0 * yr < xr * xr);
            return u < 0.0 ? xr - kTailX : kTailX - xr;
        }
        const double xv = u * t.x[layer];
        const double f0 = std::exp(-0.5 * (t.x[layer] * t.x[layer] - xv * xv));
        const double f1 = std::exp(-0.5 * (t.x[layer + 1] * t.x[layer + 1] - xv * xv));
        if (f1 + u01(ctr++) * (f0 - f1) < 1.0) {
            return xv;
        }
    }
}

std::size_t SequentialRng::uniform_index(std::size_t bound) noexcept {
    if (bound <= 1) return 0;
    const std::uint64_t span = bound;
    const std::uint64_t limit = (UINT64_MAX / span) * span;
    std::uint64_t r;
    do {
        r = next_bits();
    } while (r >= limit);
    return static_cast<std::size_t>(r % span);
}

} // namespace caprisk
