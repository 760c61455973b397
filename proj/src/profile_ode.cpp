#include "pharmonic/profile_ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pharmonic {

void SolverConfig::validate() const {
    if (!(s_start > 0.0)) throw std::invalid_argument("SolverConfig: s_start must be > 0");
    if (!(s_max > s_start)) throw std::invalid_argument("SolverConfig: s_max must exceed s_start");
    if (!(rel_tol > 0.0 && rel_tol < 1e-2))
        throw std::invalid_argument("SolverConfig: rel_tol must lie in (0, 1e-2)");
    if (!(abs_tol > 0.0 && abs_tol < 1e-2))
        throw std::invalid_argument("SolverConfig: abs_tol must lie in (0, 1e-2)");
    if (max_steps == 0) throw std::invalid_argument("SolverConfig: max_steps must be positive");
    if (store_stride == 0) throw std::invalid_argument("SolverConfig: store_stride must be >= 1");
    if (!(max_step_fraction > 0.0 && max_step_fraction <= 0.5))
        throw std::invalid_argument("SolverConfig: max_step_fraction must lie in (0, 0.5]");
}

std::string_view to_string(SolverStatus status) {
    switch (status) {
        case SolverStatus::success: return "success";
        case SolverStatus::fprime_vanished: return "fprime_vanished";
        case SolverStatus::degenerate_coefficient: return "degenerate_coefficient";
        case SolverStatus::step_budget_exhausted: return "step_budget_exhausted";
        case SolverStatus::step_underflow: return "step_underflow";
    }
    return "unknown";
}

std::pair<double, double> series_start(const ModelParameters& params, const WarpingFunction&,
                                       const WarpingFunction&, double s_start) {
    return {params.alpha * s_start, params.alpha};
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

// PI step controller constants (dopri5 defaults).
constexpr double safety = 0.9;
constexpr double beta = 0.04;
constexpr double expo1 = 0.2 - beta * 0.75;
constexpr double fac_min = 0.2;   // largest allowed shrink per step
constexpr double fac_max = 10.0;  // largest allowed growth per step

struct State {
    double f;
    double f1;
};

// Non-throwing variant of solve_second_derivative for the integration loop.
bool second_derivative(const ModelParameters& params, const WarpingFunction& g,
                       const WarpingFunction& j, double s, const State& y, double& out) {
    const WarpJet gj = g.jet(s);
    const WarpJet jj = j.jet(y.f);
    const double g2 = gj.value * gj.value;
    const double jg = jj.value / gj.value;
    const double dF2 = y.f1 * y.f1 + params.n * jg * jg;
    const double cleared = dF2 + (params.p - 2.0) * y.f1 * y.f1;
    if (!(dF2 > 0.0) || !(cleared > 1e-300)) return false;
    const double tension_part = params.n / g2 * (gj.value * gj.d1 * y.f1 - jj.value * jj.d1);
    const double angular =
        params.n * jj.value / (g2 * gj.value) * (jj.d1 * y.f1 * gj.value - jj.value * gj.d1);
    out = -(tension_part + (params.p - 2.0) * y.f1 / dF2 * angular) /
          (1.0 + (params.p - 2.0) * y.f1 * y.f1 / dF2);
    return std::isfinite(out);
}

}  // namespace

ProfileSolution integrate(const ModelParameters& params, const WarpingFunction& g,
                          const WarpingFunction& j, const SolverConfig& config) {
    config.validate();
    if (!config.allow_inadmissible) {
        const ValidationReport report = validate_parameters(params);
        if (!report.all_passed) {
            std::ostringstream msg;
            msg << "integrate: parameters fail validation:";
            for (const auto& check : report.checks) {
                if (!check.passed) msg << " [" << check.name << "]";
            }
            msg << "; set allow_inadmissible for exploratory runs";
            throw std::invalid_argument(msg.str());
        }
    }

    ProfileSolution sol;
    sol.params_ = params;
    sol.g_ = g;
    sol.j_ = j;
    sol.config_ = config;

    auto rhs = [&](double s, const State& y, State& dydx) {
        ++sol.stats.rhs_evals;
        double f2;
        if (!second_derivative(params, g, j, s, y, f2)) return false;
        dydx = {y.f1, f2};
        return true;
    };

    auto store_node = [&](double s, const State& y, double f2) {
        sol.s_.push_back(s);
        sol.f_.push_back(y.f);
        sol.f1_.push_back(y.f1);
        sol.f2_.push_back(f2);
        const double residual =
            p_tension_residual({s, y.f, y.f1, f2}, g, j, params);
        sol.stats.max_residual = std::max(sol.stats.max_residual, std::abs(residual));
    };

    auto finish = [&](SolverStatus status, const std::string& message) {
        sol.status = status;
        sol.message = message;
        return sol;
    };

    double s = config.s_start;
    State y;
    std::tie(y.f, y.f1) = series_start(params, g, j, config.s_start);

    State k1;
    if (!rhs(s, y, k1)) {
        return finish(SolverStatus::degenerate_coefficient,
                      "second-derivative solve degenerate at the start radius");
    }
    store_node(s, y, k1.f1);

    const double deriv_floor = std::numeric_limits<double>::min();
    double h = std::min(1e-3 * config.s_start, config.s_max - config.s_start);
    double fac_old = 1e-4;
    bool last_rejected = false;
    std::size_t stride_counter = 0;

    for (std::size_t step = 0; step < config.max_steps; ++step) {
        const bool final_step = s + h >= config.s_max * (1.0 - 1e-14);
        if (final_step) h = config.s_max - s;
        const double h_floor = 8.0 * std::numeric_limits<double>::epsilon() * s;
        if (!final_step && h < h_floor) {
            std::ostringstream msg;
            msg << "step size underflow at s=" << s;
            return finish(SolverStatus::step_underflow, msg.str());
        }

        State k2, k3, k4, k5, k6, k7, yn;
        bool ok = true;
        State t;
        t = {y.f + h * a21 * k1.f, y.f1 + h * a21 * k1.f1};
        ok = ok && rhs(s + c2 * h, t, k2);
        if (ok) {
            t = {y.f + h * (a31 * k1.f + a32 * k2.f), y.f1 + h * (a31 * k1.f1 + a32 * k2.f1)};
            ok = rhs(s + c3 * h, t, k3);
        }
        if (ok) {
            t = {y.f + h * (a41 * k1.f + a42 * k2.f + a43 * k3.f),
                 y.f1 + h * (a41 * k1.f1 + a42 * k2.f1 + a43 * k3.f1)};
            ok = rhs(s + c4 * h, t, k4);
        }
        if (ok) {
            t = {y.f + h * (a51 * k1.f + a52 * k2.f + a53 * k3.f + a54 * k4.f),
                 y.f1 + h * (a51 * k1.f1 + a52 * k2.f1 + a53 * k3.f1 + a54 * k4.f1)};
            ok = rhs(s + c5 * h, t, k5);
        }
        if (ok) {
            t = {y.f + h * (a61 * k1.f + a62 * k2.f + a63 * k3.f + a64 * k4.f + a65 * k5.f),
                 y.f1 + h * (a61 * k1.f1 + a62 * k2.f1 + a63 * k3.f1 + a64 * k4.f1 + a65 * k5.f1)};
            ok = rhs(s + h, t, k6);
        }
        double f2_new = 0.0;
        if (ok) {
            yn = {y.f + h * (b1 * k1.f + b3 * k3.f + b4 * k4.f + b5 * k5.f + b6 * k6.f),
                  y.f1 + h * (b1 * k1.f1 + b3 * k3.f1 + b4 * k4.f1 + b5 * k5.f1 + b6 * k6.f1)};
            ok = std::isfinite(yn.f) && std::isfinite(yn.f1) && rhs(s + h, yn, k7);
            f2_new = k7.f1;
        }

        if (!ok) {
            // Degenerate or non-finite stage: shrink hard and retry.
            sol.stats.rejected += 1;
            h *= fac_min;
            if (h < h_floor) {
                std::ostringstream msg;
                msg << "second-derivative solve degenerate near s=" << s;
                return finish(SolverStatus::degenerate_coefficient, msg.str());
            }
            last_rejected = true;
            continue;
        }

        const double err_f = h * (e1 * k1.f + e3 * k3.f + e4 * k4.f + e5 * k5.f + e6 * k6.f +
                                  e7 * k7.f);
        const double err_f1 = h * (e1 * k1.f1 + e3 * k3.f1 + e4 * k4.f1 + e5 * k5.f1 +
                                   e6 * k6.f1 + e7 * k7.f1);
        const double w_f =
            config.abs_tol + config.rel_tol * std::max(std::abs(y.f), std::abs(yn.f));
        const double w_f1 =
            deriv_floor + config.rel_tol * std::max(std::abs(y.f1), std::abs(yn.f1));
        const double rf = err_f / w_f;
        const double rf1 = err_f1 / w_f1;
        const double err = std::sqrt(0.5 * (rf * rf + rf1 * rf1));

        const double fac11 = std::pow(std::max(err, 1e-30), expo1);
        if (err <= 1.0) {
            // accept; land exactly on s_max at the end
            const double s_new = final_step ? config.s_max : s + h;
            if (!(yn.f1 > 0.0)) {
                std::ostringstream msg;
                msg << "profile derivative reached zero at s=" << s_new
                    << " (monotonicity lost; parameters likely inadmissible)";
                return finish(SolverStatus::fprime_vanished, msg.str());
            }
            sol.stats.accepted += 1;
            sol.stats.last_step = h;
            s = s_new;
            y = yn;
            k1 = k7;  // FSAL

            if (++stride_counter >= config.store_stride || s >= config.s_max * (1.0 - 1e-14)) {
                stride_counter = 0;
                if (sol.s_.back() < s) store_node(s, y, f2_new);
            }
            if (s >= config.s_max * (1.0 - 1e-14)) {
                return finish(SolverStatus::success, "");
            }

            double fac = fac11 / std::pow(fac_old, beta);
            fac = std::max(1.0 / fac_max, std::min(1.0 / fac_min, fac / safety));
            double h_new = h / fac;
            if (last_rejected) h_new = std::min(h_new, h);
            fac_old = std::max(err, 1e-4);
            last_rejected = false;
            h = std::min(h_new, config.max_step_fraction * s);
        } else {
            sol.stats.rejected += 1;
            h = h / std::min(1.0 / fac_min, fac11 / safety);
            last_rejected = true;
        }
    }

    std::ostringstream msg;
    msg << "step budget (" << config.max_steps << ") exhausted at s=" << s;
    return finish(SolverStatus::step_budget_exhausted, msg.str());
}

std::size_t ProfileSolution::locate(double s) const {
    if (s < s_.front() || s > s_.back()) {
        std::ostringstream msg;
        msg << "evaluate: s=" << s << " outside [" << s_.front() << ", " << s_.back() << "]";
        throw std::out_of_range(msg.str());
    }
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    std::size_t hi = static_cast<std::size_t>(it - s_.begin());
    if (hi == s_.size()) --hi;
    return hi - 1;
}

PointState ProfileSolution::evaluate(double s) const {
    const std::size_t i = locate(s);
    if (s == s_[i]) return node(i);
    if (s == s_[i + 1]) return node(i + 1);

    const double dx = s_[i + 1] - s_[i];
    const double t = (s - s_[i]) / dx;
    const double u = 1.0 - t;
    const double h00 = (1.0 + 2.0 * t) * u * u;
    const double h10 = t * u * u;
    const double h01 = t * t * (3.0 - 2.0 * t);
    const double h11 = t * t * (t - 1.0);

    PointState state;
    state.s = s;
    state.f = h00 * f_[i] + h10 * dx * f1_[i] + h01 * f_[i + 1] + h11 * dx * f1_[i + 1];
    state.f1 = h00 * f1_[i] + h10 * dx * f2_[i] + h01 * f1_[i + 1] + h11 * dx * f2_[i + 1];
    state.f2 = solve_second_derivative(s, state.f, state.f1, g_, j_, params_);
    return state;
}

std::vector<double> ProfileSolution::monotone_quantity() const {
    std::vector<double> q(size());
    for (std::size_t i = 0; i < size(); ++i) q[i] = monotone_quantity_at(i);
    return q;
}

double ProfileSolution::monotone_quantity_at(std::size_t i) const {
    const double gv = g_.value(s_[i]);
    const double jv = j_.value(f_[i]);
    const double jg = jv / gv;
    const double dF2 = f1_[i] * f1_[i] + params_.n * jg * jg;
    return std::pow(gv, static_cast<double>(params_.n)) *
           std::pow(dF2, 0.5 * (params_.p - 2.0)) * f1_[i];
}

ProfileSolution ProfileSolution::assemble(ModelParameters params, WarpingFunction g,
                                          WarpingFunction j, SolverConfig config,
                                          std::vector<double> s, std::vector<double> f,
                                          std::vector<double> f1, std::vector<double> f2,
                                          SolverStatus status, std::string message,
                                          SolverStats stats) {
    if (s.size() != f.size() || s.size() != f1.size() || s.size() != f2.size() || s.empty()) {
        throw std::invalid_argument("ProfileSolution::assemble: inconsistent arrays");
    }
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (!(s[i] > s[i - 1]))
            throw std::invalid_argument("ProfileSolution::assemble: radii must increase");
    }
    ProfileSolution sol;
    sol.params_ = params;
    sol.g_ = std::move(g);
    sol.j_ = std::move(j);
    sol.config_ = config;
    sol.s_ = std::move(s);
    sol.f_ = std::move(f);
    sol.f1_ = std::move(f1);
    sol.f2_ = std::move(f2);
    sol.status = status;
    sol.message = std::move(message);
    sol.stats = stats;
    return sol;
}

StartConsistency start_consistency_check(const ModelParameters& params, const WarpingFunction& g,
                                         const WarpingFunction& j, const SolverConfig& config) {
    StartConsistency result;
    result.s_check = std::min(1.0, config.s_max);
    result.bound = 10.0 * config.rel_tol;

    SolverConfig coarse = config;
    coarse.s_max = result.s_check;
    SolverConfig fine = coarse;
    fine.s_start = 0.5 * config.s_start;

    const ProfileSolution a = integrate(params, g, j, coarse);
    const ProfileSolution b = integrate(params, g, j, fine);
    if (a.status != SolverStatus::success || b.status != SolverStatus::success) {
        throw std::runtime_error("start_consistency_check: integration failed");
    }
    result.difference = std::abs(a.f().back() - b.f().back());
    result.passed = result.difference <= result.bound;
    return result;
}

}  // namespace pharmonic
