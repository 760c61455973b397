#include "pharmonic/geometry.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pharmonic {

WarpingFunction make_domain_warp(double delta) {
    if (!(delta > 1.0)) {
        throw std::invalid_argument("make_domain_warp: requires delta > 1, got delta=" +
                                    std::to_string(delta));
    }
    const double shift = std::pow(delta, -1.0 / (delta - 1.0));
    const double offset = std::pow(delta, -delta / (delta - 1.0));
    std::ostringstream name;
    name << "power_domain(delta=" << delta << ")";
    return WarpingFunction(name.str(), [delta, shift, offset](double s) {
        const double b = s + shift;
        const double pb = std::pow(b, delta - 2.0);  // b^(delta-2), b > 0
        WarpJet jet;
        // (s+c)^delta - c^delta as c^delta * expm1(delta*log1p(s/c)): the
        // direct difference cancels catastrophically for s << c.
        jet.value = offset * std::expm1(delta * std::log1p(s / shift));
        jet.d1 = delta * pb * b;
        jet.d2 = delta * (delta - 1.0) * pb;
        return jet;
    });
}

WarpingFunction make_target_warp(double sigma) {
    if (!(sigma > 0.0) || !(sigma < 1.0)) {
        throw std::invalid_argument("make_target_warp: requires 0 < sigma < 1, got sigma=" +
                                    std::to_string(sigma));
    }
    const double shift = std::pow(sigma, 1.0 / (1.0 - sigma));
    const double offset = std::pow(sigma, sigma / (1.0 - sigma));
    std::ostringstream name;
    name << "power_target(sigma=" << sigma << ")";
    return WarpingFunction(name.str(), [sigma, shift, offset](double t) {
        const double b = t + shift;
        const double pb = std::pow(b, sigma - 2.0);
        WarpJet jet;
        jet.value = offset * std::expm1(sigma * std::log1p(t / shift));
        jet.d1 = sigma * pb * b;
        jet.d2 = sigma * (sigma - 1.0) * pb;
        return jet;
    });
}

WarpingFunction make_euclidean_warp() {
    return WarpingFunction("euclidean", [](double r) { return WarpJet{r, 1.0, 0.0}; });
}

const HypothesisCheck* ValidationReport::find(std::string_view name) const {
    for (const auto& check : checks) {
        if (check.name == name) return &check;
    }
    return nullptr;
}

bool ValidationReport::passed(std::string_view name) const {
    const HypothesisCheck* check = find(name);
    return check != nullptr && check->passed;
}

std::string ValidationReport::summary() const {
    std::ostringstream out;
    for (const auto& check : checks) {
        out << (check.passed ? "[ok]   " : "[FAIL] ") << check.name;
        if (!check.message.empty()) out << "  (" << check.message << ")";
        out << '\n';
    }
    return out.str();
}

namespace {

void add_check(ValidationReport& report, std::string_view name, bool passed,
               const std::string& message_on_failure) {
    report.checks.push_back({std::string(name), passed, passed ? "" : message_on_failure});
    report.all_passed = report.all_passed && passed;
}

std::string num(double x) {
    std::ostringstream out;
    out.precision(12);
    out << x;
    return out.str();
}

}  // namespace

ValidationReport validate_parameters(const ModelParameters& params) {
    ValidationReport report;
    report.all_passed = true;

    const int n = params.n;
    const double p = params.p;
    const double delta = params.delta;
    const double sigma = params.sigma;
    const double alpha = params.alpha;

    add_check(report, hypothesis::n_ge_2, n >= 2, "n=" + std::to_string(n) + " < 2");
    add_check(report, hypothesis::p_below_dimension, p < n + 1.0,
              "p=" + num(p) + " >= n+1=" + num(n + 1.0));
    const double lower = std::max(2.0, static_cast<double>(n));
    add_check(report, hypothesis::p_above_max, p > lower,
              "p=" + num(p) + " <= max{2,n}=" + num(lower));

    const double gap = p - n;
    add_check(report, hypothesis::p_minus_n_unit, gap > 0.0 && gap < 1.0,
              "p-n=" + num(gap) + " outside (0,1)");
    if (gap > 0.0) {
        add_check(report, hypothesis::delta_vs_gap, delta > 1.0 / gap,
                  "delta=" + num(delta) + " <= 1/(p-n)=" + num(1.0 / gap));
    } else {
        add_check(report, hypothesis::delta_vs_gap, false,
                  "1/(p-n) undefined: requires p > n");
    }

    add_check(report, hypothesis::sigma_range, sigma > 0.0 && sigma < 1.0,
              "sigma=" + num(sigma) + " outside (0,1)");
    add_check(report, hypothesis::alpha_positive, alpha > 0.0,
              "alpha=" + num(alpha) + " <= 0");

    // Derived exponents; finite for any finite inputs.
    const double m = n - (p - 2.0);  // n-(p-2), in (1,2) when admissible
    report.exponent_fprime = -delta * m;
    report.exponent_a1 = -2.0 * delta;
    report.exponent_a2 = -1.0 - delta * m;
    report.exponent_a3 = -2.0 * delta * m;
    report.epsilon_bound = (n + 1.0 - p) / (n + 3.0 - p);

    add_check(report, hypothesis::a3_faster_than_a2, report.exponent_a3 < report.exponent_a2,
              num(report.exponent_a3) + " >= " + num(report.exponent_a2));
    add_check(report, hypothesis::a1_faster_than_a2, report.exponent_a1 < report.exponent_a2,
              num(report.exponent_a1) + " >= " + num(report.exponent_a2));
    add_check(report, hypothesis::epsilon_in_unit,
              report.epsilon_bound > 0.0 && report.epsilon_bound < 1.0,
              "epsilon bound " + num(report.epsilon_bound) + " outside (0,1)");

    return report;
}

}  // namespace pharmonic
