#pragma once

// Hand-rolled generators shared by the property tests.

#include "evosig/evaluator.hpp"
#include "evosig/rng.hpp"
#include "evosig/timing.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace testsupport {

inline double uniform(evosig::Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform01(); }

/// Mix of light, heavy and degenerate demands. Some volumes are exact zeros
/// and some are whole numbers so ties between opposing approaches occur.
inline evosig::DemandMatrix random_demand(evosig::Rng& rng) {
    evosig::DemandMatrix d;
    const double scale = rng.index(4) == 0 ? 0.15 : 1.0;
    for (auto& a : d.approaches) {
        auto draw = [&](double hi) {
            switch (rng.index(6)) {
            case 0: return 0.0;
            case 1: return std::floor(uniform(rng, 0.0, hi) / 50.0) * 50.0 * scale;
            default: return uniform(rng, 0.0, hi) * scale;
            }
        };
        a.through = draw(2800.0);
        a.left = draw(450.0);
        a.right = draw(200.0);
    }
    return d;
}

/// Varies only the inputs a program can read.
inline evosig::IntersectionConfig random_config(evosig::Rng& rng) {
    evosig::IntersectionConfig c;
    c.lanes_through_exclusive = 1 + static_cast<int>(rng.index(3));
    c.lanes_left = 1 + static_cast<int>(rng.index(2));
    c.lanes_shared_through_right = 1 + static_cast<int>(rng.index(2));
    c.saturation_flow_per_lane = 1500.0 + 50.0 * static_cast<double>(rng.index(9));
    c.yellow = 3.0 + static_cast<double>(rng.index(3));
    c.all_red = static_cast<double>(rng.index(3));
    c.min_green_through = 10.0 + 5.0 * static_cast<double>(rng.index(5));
    c.min_green_left = 8.0 + 3.5 * static_cast<double>(rng.index(4));
    return c;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace testsupport
