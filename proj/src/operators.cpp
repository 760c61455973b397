#include "pharmonic/operators.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pharmonic {

namespace {

void require_positive_radius(double s, const char* where) {
    if (!(s > 0.0)) {
        std::ostringstream msg;
        msg << where << ": requires s > 0, got s=" << s;
        throw std::domain_error(msg.str());
    }
}

}  // namespace

ConvexProfile ConvexProfile::linear() {
    return ConvexProfile("linear", [](double t) { return WarpJet{t, 1.0, 0.0}; });
}

ConvexProfile ConvexProfile::quadratic() {
    return ConvexProfile("quadratic", [](double t) { return WarpJet{t * t, 2.0 * t, 2.0}; });
}

ConvexProfile ConvexProfile::linquad() {
    return ConvexProfile("linquad",
                         [](double t) { return WarpJet{t + t * t, 1.0 + 2.0 * t, 2.0}; });
}

ConvexProfile ConvexProfile::polynomial(std::vector<double> coeffs) {
    std::ostringstream name;
    name << "poly(";
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        if (k > 0) name << ",";
        name << coeffs[k];
    }
    name << ")";
    return ConvexProfile(name.str(), [coeffs = std::move(coeffs)](double t) {
        // Horner evaluation of value, first and second derivative.
        double v = 0.0, d1 = 0.0, d2 = 0.0;
        for (std::size_t i = coeffs.size(); i-- > 0;) {
            d2 = d2 * t + 2.0 * d1;
            d1 = d1 * t + v;
            v = v * t + coeffs[i];
        }
        return WarpJet{v, d1, d2};
    });
}

ConvexProfile ConvexProfile::scaled(const ConvexProfile& h, double lambda) {
    std::ostringstream name;
    name << lambda << "*" << h.name();
    ConvexProfile out(name.str(), [base = h.eval_, lambda](double t) {
        WarpJet jet = base(t);
        return WarpJet{lambda * jet.value, lambda * jet.d1, lambda * jet.d2};
    });
    out.certified_ = h.certified_ && lambda > 0.0;
    return out;
}

ConvexityReport hessian_convexity_check(ConvexProfile& h, const WarpingFunction& j,
                                        std::span<const double> grid, double tol) {
    if (grid.empty()) throw std::invalid_argument("hessian_convexity_check: empty grid");
    ConvexityReport report;
    report.tol = tol;
    report.grid_size = grid.size();
    bool ok = true;
    for (double t : grid) {
        if (!(t > 0.0)) throw std::invalid_argument("hessian_convexity_check: grid radii must be > 0");
        if (!(j.value(t) > 0.0)) {
            throw std::invalid_argument("hessian_convexity_check: target warp not positive at t=" +
                                        std::to_string(t));
        }
        const WarpJet jet = h.jet(t);
        const bool point_ok = jet.d2 >= -tol && jet.d1 >= -tol && jet.d1 > 0.0;
        if (!point_ok) {
            ok = false;
            if (report.violations.size() < 8) report.violations.push_back({t, jet.d1, jet.d2});
        }
    }
    report.convex = ok;
    if (ok) h.certified_ = true;
    return report;
}

double energy_density_sq(const PointState& state, const WarpingFunction& g,
                         const WarpingFunction& j, int n) {
    require_positive_radius(state.s, "energy_density_sq");
    const double gv = g.value(state.s);
    const double jv = j.value(state.f);
    const double ratio = jv / gv;
    return state.f1 * state.f1 + n * ratio * ratio;
}

double tension(const PointState& state, const WarpingFunction& g, const WarpingFunction& j,
               int n) {
    require_positive_radius(state.s, "tension");
    const WarpJet gj = g.jet(state.s);
    const WarpJet jj = j.jet(state.f);
    return state.f2 +
           n / (gj.value * gj.value) * (gj.value * gj.d1 * state.f1 - jj.value * jj.d1);
}

double p_tension_residual(const PointState& state, const WarpingFunction& g,
                          const WarpingFunction& j, const ModelParameters& params) {
    require_positive_radius(state.s, "p_tension_residual");
    const WarpJet gj = g.jet(state.s);
    const WarpJet jj = j.jet(state.f);
    const double g2 = gj.value * gj.value;
    const double jg = jj.value / gj.value;
    const double dF2 = state.f1 * state.f1 + params.n * jg * jg;
    if (!(dF2 > 0.0)) {
        throw std::domain_error("p_tension_residual: degenerate state with |dF|^2 = 0");
    }
    const double base = state.f2 + params.n / g2 * (gj.value * gj.d1 * state.f1 - jj.value * jj.d1);
    const double angular =
        params.n * jj.value / (g2 * gj.value) * (jj.d1 * state.f1 * gj.value - jj.value * gj.d1);
    const double correction =
        (params.p - 2.0) / dF2 * state.f1 * (state.f1 * state.f2 + angular);
    return base + correction;
}

double p_tension(const PointState& state, const WarpingFunction& g, const WarpingFunction& j,
                 const ModelParameters& params) {
    const double dF2 = energy_density_sq(state, g, j, params.n);
    return std::pow(dF2, 0.5 * (params.p - 2.0)) * p_tension_residual(state, g, j, params);
}

double solve_second_derivative(double s, double f, double f1, const WarpingFunction& g,
                               const WarpingFunction& j, const ModelParameters& params) {
    require_positive_radius(s, "solve_second_derivative");
    const WarpJet gj = g.jet(s);
    const WarpJet jj = j.jet(f);
    const double g2 = gj.value * gj.value;
    const double jg = jj.value / gj.value;
    const double dF2 = f1 * f1 + params.n * jg * jg;
    const double cleared = dF2 + (params.p - 2.0) * f1 * f1;
    if (!(dF2 > 0.0) || !(cleared > 1e-300)) {
        throw std::domain_error("solve_second_derivative: degenerate coefficient |dF|^2 + (p-2) f'^2");
    }
    const double tension_part = params.n / g2 * (gj.value * gj.d1 * f1 - jj.value * jj.d1);
    const double angular =
        params.n * jj.value / (g2 * gj.value) * (jj.d1 * f1 * gj.value - jj.value * gj.d1);
    const double numerator = tension_part + (params.p - 2.0) * f1 / dF2 * angular;
    const double denominator = 1.0 + (params.p - 2.0) * f1 * f1 / dF2;
    return -numerator / denominator;
}

namespace {

struct CompositionTerms {
    double K;
    double principal;  // (p-1)[h' f'' + h'' f'^2]
    double angular;    // n (g'/g) f' h'
};

CompositionTerms composition_terms(const PointState& state, const ConvexProfile& h,
                                   const WarpingFunction& g, const ModelParameters& params,
                                   const char* where) {
    require_positive_radius(state.s, where);
    const WarpJet hj = h.jet(state.f);
    if (!(hj.d1 * state.f1 > 0.0)) {
        std::ostringstream msg;
        msg << where << ": outside M+ (h'(f) f' = " << hj.d1 * state.f1 << " at s=" << state.s
            << ")";
        throw std::domain_error(msg.str());
    }
    const WarpJet gj = g.jet(state.s);
    CompositionTerms terms;
    terms.K = std::pow(std::abs(hj.d1 * state.f1), params.p - 2.0);
    terms.principal =
        (params.p - 1.0) * (hj.d1 * state.f2 + hj.d2 * state.f1 * state.f1);
    terms.angular = params.n * gj.d1 / gj.value * state.f1 * hj.d1;
    return terms;
}

}  // namespace

double p_laplacian_composition(const PointState& state, const ConvexProfile& h,
                               const WarpingFunction& g, const WarpingFunction& j,
                               const ModelParameters& params) {
    (void)j;
    const CompositionTerms terms =
        composition_terms(state, h, g, params, "p_laplacian_composition");
    return terms.K * (terms.principal + terms.angular);
}

double p_laplacian_term_scale(const PointState& state, const ConvexProfile& h,
                              const WarpingFunction& g, const WarpingFunction& j,
                              const ModelParameters& params) {
    (void)j;
    const CompositionTerms terms =
        composition_terms(state, h, g, params, "p_laplacian_term_scale");
    return terms.K * (std::abs(terms.principal) + std::abs(terms.angular));
}

Decomposition decompose(const PointState& state, const ConvexProfile& h,
                        const WarpingFunction& g, const WarpingFunction& j,
                        const ModelParameters& params) {
    require_positive_radius(state.s, "decompose");
    const WarpJet gj = g.jet(state.s);
    const WarpJet jj = j.jet(state.f);
    const WarpJet hj = h.jet(state.f);
    if (!(state.f > 0.0) || !(jj.value > 0.0)) {
        throw std::domain_error("decompose: requires f > 0 with j(f) > 0, got f=" +
                                std::to_string(state.f));
    }
    if (!(hj.d1 > 0.0)) {
        throw std::domain_error("decompose: requires h'(f) > 0, got h'(f)=" +
                                std::to_string(hj.d1));
    }
    const double g2 = gj.value * gj.value;
    const double jg = jj.value / gj.value;
    const double dF2 = state.f1 * state.f1 + params.n * jg * jg;

    Decomposition dec;
    dec.K = std::pow(std::abs(hj.d1 * state.f1), params.p - 2.0);
    dec.Ktilde = params.n * jj.value * hj.d1 / (dF2 * g2);
    dec.A1 = jj.d1 * ((3.0 - params.p) * state.f1 * state.f1 + params.n * jg * jg);
    dec.A2 = (params.p - 2.0) * jj.value * (gj.d1 * state.f1 / gj.value + state.f2);
    dec.A3 = (params.p - 1.0) * state.f1 * state.f1 * hj.d2 * dF2 * g2 /
             (params.n * jj.value * hj.d1);
    return dec;
}

}  // namespace pharmonic
