#include "pharmonic/asymptotics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace pharmonic {

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("fit_power_law: size mismatch");
    if (x.size() < 2) throw std::invalid_argument("fit_power_law: need at least two points");

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(x.size());
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw std::invalid_argument("fit_power_law: data must be strictly positive");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double denom = n * sxx - sx * sx;
    if (!(std::abs(denom) > 0.0)) throw std::invalid_argument("fit_power_law: degenerate abscissae");

    PowerLawFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - fit.slope * sx) / n;
    fit.prefactor = std::exp(intercept);
    fit.count = x.size();
    for (std::size_t i = 0; i < x.size(); ++i) {
        fit.max_residual =
            std::max(fit.max_residual, std::abs(ly[i] - (intercept + fit.slope * lx[i])));
    }
    return fit;
}

LimitEstimates estimate_limits(const ProfileSolution& sol, bool require_converged) {
    if (!(sol.s_back() >= 1e3)) {
        throw std::invalid_argument("estimate_limits: solution must extend to s >= 1e3");
    }
    const double s_max = sol.s_back();
    const PointState far = sol.node(sol.size() - 1);
    const PointState mid = sol.evaluate(s_max / 10.0);

    auto q_of = [&](const PointState& st) {
        const double gv = sol.domain_warp().value(st.s);
        const double jv = sol.target_warp().value(st.f);
        const double jg = jv / gv;
        const double dF2 = st.f1 * st.f1 + sol.params().n * jg * jg;
        return std::pow(gv, static_cast<double>(sol.params().n)) *
               std::pow(dF2, 0.5 * (sol.params().p - 2.0)) * st.f1;
    };

    LimitEstimates est;
    est.c_hat = far.f;
    est.c_hat_uncertainty = std::abs(far.f - mid.f);
    est.c_hat_converged = est.c_hat_uncertainty <= 0.01 * std::abs(est.c_hat);
    est.P = q_of(far);
    est.P_uncertainty = std::abs(est.P - q_of(mid));
    est.P_converged = est.P_uncertainty <= 0.01 * std::abs(est.P);

    if (require_converged && (!est.c_hat_converged || !est.P_converged)) {
        std::ostringstream msg;
        msg << "estimate_limits: plateau not converged at s_max=" << s_max
            << " (c_hat uncertainty " << est.c_hat_uncertainty / std::abs(est.c_hat)
            << ", P uncertainty " << est.P_uncertainty / std::abs(est.P)
            << " relative; allowed 0.01). Extend s_max.";
        throw std::runtime_error(msg.str());
    }
    return est;
}

double theoretical_D(double P, double c_hat, const ModelParameters& params,
                     const WarpingFunction& j, double C1) {
    if (!(P > 0.0) || !(c_hat > 0.0) || !(C1 > 0.0)) {
        throw std::domain_error("theoretical_D: requires P, c_hat, C1 > 0");
    }
    const double jc = j.value(c_hat);
    if (!(jc > 0.0)) throw std::domain_error("theoretical_D: j(c_hat) degenerates");
    const double energy_limit = C1 * C1 / (params.n * jc * jc);
    return P * std::pow(C1, -static_cast<double>(params.n)) *
           std::pow(energy_limit, 0.5 * (params.p - 2.0));
}

namespace {

// Indices of stored nodes inside [lo, hi], checking the window spans enough
// decades and holds enough nodes.
std::pair<std::size_t, std::size_t> window_indices(const ProfileSolution& sol, double lo,
                                                   double hi, double min_decades,
                                                   std::size_t min_nodes, const char* where) {
    if (!(lo > 0.0) || !(hi > lo)) {
        throw std::invalid_argument(std::string(where) + ": invalid window");
    }
    if (hi / lo < std::pow(10.0, min_decades) * (1.0 - 1e-12)) {
        std::ostringstream msg;
        msg << where << ": window [" << lo << ", " << hi << "] spans less than " << min_decades
            << " decades";
        throw std::invalid_argument(msg.str());
    }
    const auto& s = sol.s();
    std::size_t first = 0;
    while (first < s.size() && s[first] < lo) ++first;
    std::size_t last = first;
    while (last < s.size() && s[last] <= hi) ++last;
    if (last - first < min_nodes) {
        std::ostringstream msg;
        msg << where << ": window [" << lo << ", " << hi << "] contains " << (last - first)
            << " nodes; need >= " << min_nodes;
        throw std::invalid_argument(msg.str());
    }
    return {first, last};
}

}  // namespace

PowerLawFit fit_decay_exponent(const ProfileSolution& sol, double lo, double hi) {
    const auto [first, last] = window_indices(sol, lo, hi, 2.0, 50, "fit_decay_exponent");
    return fit_power_law(std::span(sol.s()).subspan(first, last - first),
                         std::span(sol.f1()).subspan(first, last - first));
}

EnergyRatioCheck check_energy_ratio(const ProfileSolution& sol, double lo, double hi) {
    const auto [first, last] = window_indices(sol, lo, hi, 1.0, 20, "check_energy_ratio");
    EnergyRatioCheck check;
    check.window_lo = lo;
    check.window_hi = hi;

    std::vector<double> s_vals, excess;
    s_vals.reserve(last - first);
    excess.reserve(last - first);
    for (std::size_t i = first; i < last; ++i) {
        const PointState st = sol.node(i);
        const double gv = sol.domain_warp().value(st.s);
        const double jv = sol.target_warp().value(st.f);
        // ratio = |dF|^2 g^2 / (n j^2) = 1 + f'^2 g^2 / (n j^2)
        const double dev = st.f1 * st.f1 * gv * gv / (sol.params().n * jv * jv);
        check.max_deviation = std::max(check.max_deviation, dev);
        if (dev > 0.0) {
            s_vals.push_back(st.s);
            excess.push_back(dev);
        }
    }
    if (s_vals.size() >= 2) {
        check.decay_slope = fit_power_law(s_vals, excess).slope;
    }
    return check;
}

AsymptoticsReport build_asymptotics_report(const ProfileSolution& sol, double window_lo,
                                           double window_hi, double C1_override,
                                           bool require_converged) {
    AsymptoticsReport report;
    report.limits = estimate_limits(sol, require_converged);

    const ModelParameters& params = sol.params();
    if (C1_override > 0.0) {
        report.C1 = C1_override;
    } else if (sol.domain_warp().name().rfind("power_domain", 0) == 0) {
        report.C1 = 1.0;  // exact for the built-in family
    } else {
        report.C1 =
            sol.domain_warp().value(sol.s_back()) / std::pow(sol.s_back(), params.delta);
        report.C1_estimated = true;
    }

    report.D_theory =
        theoretical_D(report.limits.P, report.limits.c_hat, params, sol.target_warp(), report.C1);
    report.exponent_theory = validate_parameters(params).exponent_fprime;

    report.window_hi = window_hi > 0.0 ? window_hi : sol.s_back();
    report.window_lo = window_lo > 0.0 ? window_lo : report.window_hi / 100.0;
    const PowerLawFit fit = fit_decay_exponent(sol, report.window_lo, report.window_hi);
    report.exponent_fitted = fit.slope;
    report.prefactor_fitted = fit.prefactor;
    report.fit_max_residual = fit.max_residual;
    report.exponent_rel_dev =
        std::abs(report.exponent_fitted - report.exponent_theory) / std::abs(report.exponent_theory);
    report.prefactor_rel_dev =
        std::abs(report.prefactor_fitted - report.D_theory) / std::abs(report.D_theory);

    report.energy = check_energy_ratio(sol, sol.s_back() / 10.0, sol.s_back());
    return report;
}

}  // namespace pharmonic
