#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wireforge/geometry.hpp"

namespace wireforge {

struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::int64_t step = 0;
    std::vector<double> m;  // 3 entries per control point
    std::vector<double> v;

    AdamState() = default;
    AdamState(std::size_t point_count, double b1, double b2, double eps)
        : beta1(b1), beta2(b2), epsilon(eps), m(3 * point_count, 0.0), v(3 * point_count, 0.0) {}
};

/// One bias-corrected Adam step in place. Throws ContractError on length mismatch.
void adam_update(AdamState& state, std::span<Point3> points, std::span<const Point3> grads, double lr);

}  // namespace wireforge
