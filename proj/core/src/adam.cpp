#include "wireforge/adam.hpp"

#include <cmath>

#include "wireforge/errors.hpp"

namespace wireforge {

void adam_update(AdamState& state, std::span<Point3> points, std::span<const Point3> grads, double lr) {
    if (points.size() != grads.size() || state.m.size() != 3 * points.size() || state.v.size() != state.m.size())
        throw ContractError("adam_update: buffers are not aligned with the control points");
    ++state.step;
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (int c = 0; c < 3; ++c) {
            const std::size_t k = 3 * i + c;
            const double g = grads[i][c];
            state.m[k] = state.beta1 * state.m[k] + (1.0 - state.beta1) * g;
            state.v[k] = state.beta2 * state.v[k] + (1.0 - state.beta2) * g * g;
            const double m_hat = state.m[k] / c1;
            const double v_hat = state.v[k] / c2;
            points[i][c] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

}  // namespace wireforge
