#pragma once

#include <cstdint>
#include <random>

#include "lbctl/fields.hpp"

namespace lbctl::testing {

inline double uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

inline ScalarField random_scalar(const GridSpec& g, std::mt19937_64& rng) {
    ScalarField f(g);
    for (double& x : f.values()) x = uniform(rng);
    return f;
}

// Random velocity with zero boundary-normal faces.
inline VelocityField random_velocity(const GridSpec& g, std::mt19937_64& rng) {
    VelocityField w(g);
    for (double& x : w.u_values()) x = uniform(rng);
    for (double& x : w.v_values()) x = uniform(rng);
    w.clear_boundary();
    return w;
}

}  // namespace lbctl::testing
