#pragma once

// Independent fixed-step oracle for the adaptive solver: classical RK4 with
// a constant step in u = log(s), Richardson-extrapolated from steps h and
// h/2. Lives in test code only; shares nothing with the adaptive
// integration path except the algebraic second-derivative relation.

#include <cmath>
#include <cstddef>
#include <vector>

#include "pharmonic/geometry.hpp"
#include "pharmonic/operators.hpp"

namespace testsupport {

struct OracleValue {
    double s = 0.0;
    double f = 0.0;
    double f1 = 0.0;
    double pair_difference = 0.0;  // |f_h - f_h/2|, for convergence inspection
};

namespace detail {

struct Y {
    double f;
    double f1;
};

inline Y rk4_log_segment(const pharmonic::ModelParameters& params,
                         const pharmonic::WarpingFunction& g, const pharmonic::WarpingFunction& j,
                         Y y, double u0, double u1, std::size_t steps) {
    auto deriv = [&](double u, const Y& state) {
        const double s = std::exp(u);
        const double f2 = pharmonic::solve_second_derivative(s, state.f, state.f1, g, j, params);
        return Y{s * state.f1, s * f2};
    };
    const double h = (u1 - u0) / static_cast<double>(steps);
    double u = u0;
    for (std::size_t i = 0; i < steps; ++i) {
        const Y k1 = deriv(u, y);
        const Y k2 = deriv(u + 0.5 * h, {y.f + 0.5 * h * k1.f, y.f1 + 0.5 * h * k1.f1});
        const Y k3 = deriv(u + 0.5 * h, {y.f + 0.5 * h * k2.f, y.f1 + 0.5 * h * k2.f1});
        const Y k4 = deriv(u + h, {y.f + h * k3.f, y.f1 + h * k3.f1});
        y.f += h / 6.0 * (k1.f + 2.0 * k2.f + 2.0 * k3.f + k4.f);
        y.f1 += h / 6.0 * (k1.f1 + 2.0 * k2.f1 + 2.0 * k3.f1 + k4.f1);
        u += h;
    }
    return y;
}

}  // namespace detail

/// Integrates from first-order data at s_start to each target radius (which
/// must be increasing) and returns Richardson-extrapolated values
/// (16 y_{h/2} - y_h)/15 per component.
inline std::vector<OracleValue> rk4_log_oracle(const pharmonic::ModelParameters& params,
                                               const pharmonic::WarpingFunction& g,
                                               const pharmonic::WarpingFunction& j,
                                               double s_start,
                                               const std::vector<double>& targets,
                                               std::size_t steps_per_decade) {
    using detail::Y;
    std::vector<OracleValue> out;
    Y coarse{params.alpha * s_start, params.alpha};
    Y fine = coarse;
    double u = std::log(s_start);
    for (double target : targets) {
        const double u_next = std::log(target);
        const double decades = (u_next - u) / std::log(10.0);
        const std::size_t steps =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(decades * steps_per_decade)));
        coarse = detail::rk4_log_segment(params, g, j, coarse, u, u_next, steps);
        fine = detail::rk4_log_segment(params, g, j, fine, u, u_next, 2 * steps);
        OracleValue value;
        value.s = target;
        value.f = (16.0 * fine.f - coarse.f) / 15.0;
        value.f1 = (16.0 * fine.f1 - coarse.f1) / 15.0;
        value.pair_difference = std::abs(fine.f - coarse.f);
        out.push_back(value);
        u = u_next;
    }
    return out;
}

}  // namespace testsupport
