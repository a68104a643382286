#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lbctl/control.hpp"
#include "lbctl/forward.hpp"
#include "lbctl/weights.hpp"

namespace lbctl {

/// Outcome of one invariant check. value is the measured quantity, compared
/// against threshold as described in detail.
struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

/// Largest relative duality defect over random (x, z) pairs drawn from seed.
CheckResult check_duality(const Problem& pb, std::size_t trials, std::uint64_t seed, double tol);

/// Largest relative error of <grad J, d> against central differences of J
/// along random directions d, at a random control and random data.
CheckResult check_gradient(const Problem& pb, const TimeWeights& w, const PenaltySpec& pen, std::size_t directions,
                           double h, std::uint64_t seed, double tol);

/// heating(w) >= -1e-12 for random w, and exactly 0 for a rigid rotation on
/// the cells whose stencil stays off the walls.
CheckResult check_heating(const GridSpec& g, std::size_t trials, std::uint64_t seed);

/// Spatial order of the full solver on a time-dependent manufactured
/// solution, with dt = h^2 on every grid. Grids run on up to jobs threads.
CheckResult check_mms(const SystemSpec& spec, const std::vector<std::size_t>& grids, double horizon, double order_lo,
                      double order_hi, unsigned jobs = 1);

/// m* = find_min_m, its gap margin, and finiteness of the weight chain on a
/// unit horizon with chain_nt steps (s and lambda taken from base).
CheckResult check_weight_geometry(const WeightParams& base, const GridSpec& g, const ControlPatch& patch,
                                  std::size_t chain_nt);

/// Runs f(0..n-1) on up to jobs threads; exceptions are rethrown in index order.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& f);

}  // namespace lbctl
