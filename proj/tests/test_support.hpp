#pragma once

// Shared fixtures for the test binaries: the canonical parameter point, its
// warps, and cached solver runs so each binary integrates at most once per
// configuration.

#include <cmath>
#include <random>

#include "pharmonic/geometry.hpp"
#include "pharmonic/operators.hpp"
#include "pharmonic/profile_ode.hpp"

namespace testsupport {

inline const pharmonic::ModelParameters& canonical_params() {
    static const pharmonic::ModelParameters params{2, 2.5, 3.0, 0.5, 1.0};
    return params;
}

inline const pharmonic::WarpingFunction& family_g() {
    static const pharmonic::WarpingFunction g = pharmonic::make_domain_warp(3.0);
    return g;
}

inline const pharmonic::WarpingFunction& family_j() {
    static const pharmonic::WarpingFunction j = pharmonic::make_target_warp(0.5);
    return j;
}

inline const pharmonic::WarpingFunction& flat_warp() {
    static const pharmonic::WarpingFunction e = pharmonic::make_euclidean_warp();
    return e;
}

inline const pharmonic::ProfileSolution& canonical_run_1e4() {
    static const pharmonic::ProfileSolution sol = [] {
        pharmonic::SolverConfig config;  // s_max = 1e4 defaults
        return pharmonic::integrate(canonical_params(), family_g(), family_j(), config);
    }();
    return sol;
}

inline const pharmonic::ProfileSolution& canonical_run_1e5() {
    static const pharmonic::ProfileSolution sol = [] {
        pharmonic::SolverConfig config;
        config.s_max = 1e5;
        return pharmonic::integrate(canonical_params(), family_g(), family_j(), config);
    }();
    return sol;
}

inline const pharmonic::ProfileSolution& flat_run() {
    static const pharmonic::ProfileSolution sol = [] {
        pharmonic::SolverConfig config;
        config.s_start = 1e-6;
        config.s_max = 100.0;
        return pharmonic::integrate(canonical_params(), flat_warp(), flat_warp(), config);
    }();
    return sol;
}

inline const pharmonic::ProfileSolution& harmonic_control_run() {
    static const pharmonic::ProfileSolution sol = [] {
        pharmonic::ModelParameters params = canonical_params();
        params.p = 2.0;  // inadmissible on purpose: the p=2 control
        pharmonic::SolverConfig config;
        config.allow_inadmissible = true;
        return pharmonic::integrate(params, family_g(), family_j(), config);
    }();
    return sol;
}

/// Convexity-certified copy of a built-in profile over [1e-6, 10].
inline pharmonic::ConvexProfile certified(pharmonic::ConvexProfile profile) {
    static const std::vector<double> grid = [] {
        std::vector<double> out(200);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = 1e-6 * std::pow(1e7, static_cast<double>(i) / (out.size() - 1));
        return out;
    }();
    pharmonic::hessian_convexity_check(profile, family_j(), grid, 1e-12);
    return profile;
}

inline double rel_err(double value, double reference) {
    return std::abs(value - reference) / std::abs(reference);
}

/// log-uniform draw
inline double draw_log(std::mt19937& rng, double lo, double hi) {
    std::uniform_real_distribution<double> uni(std::log(lo), std::log(hi));
    return std::exp(uni(rng));
}

inline double draw(std::mt19937& rng, double lo, double hi) {
    std::uniform_real_distribution<double> uni(lo, hi);
    return uni(rng);
}

}  // namespace testsupport
