#pragma once

#include <cstddef>
#include <span>

#include "pharmonic/profile_ode.hpp"

namespace pharmonic {

/// Ordinary least squares of log y against log x. Requires strictly positive
/// data; prefactor is exp(intercept), max_residual the largest |log y - fit|.
struct PowerLawFit {
    double slope = 0.0;
    double prefactor = 0.0;
    double max_residual = 0.0;
    std::size_t count = 0;
};

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y);

/// Limits extracted from the far end of a solution: c_hat = f(s_max) with
/// uncertainty |f(s_max) - f(s_max/10)|, and P = Q(s_max) likewise. A limit
/// counts as converged when its uncertainty is at most 1% of its value.
struct LimitEstimates {
    double c_hat = 0.0;
    double c_hat_uncertainty = 0.0;
    bool c_hat_converged = false;
    double P = 0.0;
    double P_uncertainty = 0.0;
    bool P_converged = false;
};

/// Requires the solution to extend to radius >= 1e3. With require_converged
/// (the default) throws std::runtime_error if either uncertainty exceeds 1%
/// of the value; pass false to obtain the raw estimates regardless.
LimitEstimates estimate_limits(const ProfileSolution& sol, bool require_converged = true);

/// D = P * C1^(-n) * (C1^2 / (n j(c_hat)^2))^((p-2)/2), the predicted
/// prefactor of the derivative decay law f' ~ D s^(-delta(n-(p-2))).
/// Throws std::domain_error if j(c_hat) degenerates.
double theoretical_D(double P, double c_hat, const ModelParameters& params,
                     const WarpingFunction& j, double C1 = 1.0);

/// Log-log fit of f' over stored nodes inside [lo, hi]. The window must span
/// at least two decades and contain at least 50 nodes.
PowerLawFit fit_decay_exponent(const ProfileSolution& sol, double lo, double hi);

/// Deviation of |dF|^2 g^2 / (n j(f)^2) from 1 over a window, plus the
/// fitted decay slope of (ratio - 1); the slope is reported, not asserted.
struct EnergyRatioCheck {
    double max_deviation = 0.0;
    double decay_slope = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
};

EnergyRatioCheck check_energy_ratio(const ProfileSolution& sol, double lo, double hi);

/// Everything the asymptotic analysis produces for one solution, against the
/// theoretical decay law.
struct AsymptoticsReport {
    LimitEstimates limits;
    double C1 = 1.0;
    bool C1_estimated = false;  // true when inferred as g(s_max)/s_max^delta
    double D_theory = 0.0;
    double exponent_theory = 0.0;
    double exponent_fitted = 0.0;
    double prefactor_fitted = 0.0;
    double exponent_rel_dev = 0.0;
    double prefactor_rel_dev = 0.0;
    double fit_max_residual = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
    EnergyRatioCheck energy;
};

/// Assembles the full report using the outer two-decade window
/// [s_max/100, s_max] (fit) and [s_max/10, s_max] (energy ratio) unless a
/// window is supplied. C1 is 1 for the built-in power-law domain warp and is
/// otherwise estimated from g(s_max)/s_max^delta; pass C1 > 0 to override.
AsymptoticsReport build_asymptotics_report(const ProfileSolution& sol, double window_lo = 0.0,
                                           double window_hi = 0.0, double C1_override = 0.0,
                                           bool require_converged = true);

}  // namespace pharmonic
