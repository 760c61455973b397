#include "pharmonic/certify.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pharmonic/operators.hpp"

namespace pharmonic {

double epsilon_bound(const ModelParameters& params) {
    return (params.n + 1.0 - params.p) / (params.n + 3.0 - params.p);
}

bool a2_sign_condition(const ModelParameters& params) {
    return 1.0 - (params.n - (params.p - 2.0)) < 0.0;
}

double Certificate::first_certified() const {
    if (points.empty()) throw std::logic_error("Certificate: no certified points");
    return points.front().s;
}

const CertifiedPoint* Certificate::most_negative() const {
    const CertifiedPoint* best = nullptr;
    for (const auto& pt : points) {
        if (best == nullptr || pt.value_direct < best->value_direct) best = &pt;
    }
    return best;
}

namespace {

constexpr double kMarginFactor = 1e-12;     // certification margin vs. term scale
constexpr double kConsistencyRel = 1e-8;    // dual-formula agreement requirement

struct SignSample {
    double value_direct;
    double value_decomp;
    double term_scale;
    bool negative;  // certified negative
};

SignSample sample_sign(const ProfileSolution& sol, const ConvexProfile& h, double s,
                       std::size_t& inconsistent) {
    const PointState state = sol.evaluate(s);
    const ModelParameters& params = sol.params();
    SignSample out{};
    out.value_direct =
        p_laplacian_composition(state, h, sol.domain_warp(), sol.target_warp(), params);
    const Decomposition dec =
        decompose(state, h, sol.domain_warp(), sol.target_warp(), params);
    out.value_decomp = dec.product();
    out.term_scale = std::max(
        p_laplacian_term_scale(state, h, sol.domain_warp(), sol.target_warp(), params),
        dec.term_scale());

    const double margin = kMarginFactor * out.term_scale;
    const bool both_negative = out.value_direct < -margin && out.value_decomp < -margin;
    const bool consistent =
        std::abs(out.value_direct - out.value_decomp) <=
        kConsistencyRel * std::max(std::abs(out.value_direct), std::abs(out.value_decomp));
    if (both_negative && !consistent) ++inconsistent;
    out.negative = both_negative && consistent;
    return out;
}

}  // namespace

Certificate scan_sign(const ProfileSolution& sol, const ConvexProfile& h, double s_lo,
                      double s_hi, int samples_per_decade) {
    if (!h.valid() || !h.certified()) {
        throw std::invalid_argument(
            "scan_sign: convex profile not certified; run hessian_convexity_check first");
    }
    if (!(s_lo > 0.0) || !(s_hi > s_lo)) throw std::invalid_argument("scan_sign: bad range");
    if (samples_per_decade < 1) throw std::invalid_argument("scan_sign: bad sample density");
    if (s_lo < sol.s_front() || s_hi > sol.s_back() * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "scan_sign: range [" << s_lo << ", " << s_hi << "] not covered by solution ["
            << sol.s_front() << ", " << sol.s_back() << "]";
        throw std::invalid_argument(msg.str());
    }

    Certificate cert;
    cert.params = sol.params();
    cert.profile_name = h.name();
    cert.scan_lo = s_lo;
    cert.scan_hi = s_hi;
    cert.samples_per_decade = samples_per_decade;

    const double spd = samples_per_decade;
    const long k_lo = static_cast<long>(std::ceil(spd * std::log10(s_lo) - 1e-9));
    const long k_hi = static_cast<long>(std::floor(spd * std::log10(s_hi) + 1e-9));

    std::size_t negatives = 0;
    std::vector<std::pair<double, SignSample>> samples;
    samples.reserve(static_cast<std::size_t>(std::max(0L, k_hi - k_lo + 1)));
    for (long k = k_lo; k <= k_hi; ++k) {
        double s = std::pow(10.0, static_cast<double>(k) / spd);
        s = std::min(std::max(s, s_lo), std::min(s_hi, sol.s_back()));
        const SignSample sample = sample_sign(sol, h, s, cert.consistency_violations);
        samples.emplace_back(s, sample);
        if (sample.negative) {
            ++negatives;
            cert.points.push_back({s, sample.value_direct, sample.value_decomp, 0, 0, 0, 0, 0});
            const Decomposition dec = decompose(sol.evaluate(s), h, sol.domain_warp(),
                                                sol.target_warp(), sol.params());
            auto& pt = cert.points.back();
            pt.K = dec.K;
            pt.Ktilde = dec.Ktilde;
            pt.A1 = dec.A1;
            pt.A2 = dec.A2;
            pt.A3 = dec.A3;
        }
    }
    cert.scanned_points = samples.size();
    cert.negative_fraction =
        samples.empty() ? 0.0 : static_cast<double>(negatives) / samples.size();

    // Refinement pass: bracket each sign change at 8x density within its cell.
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        if (samples[i].second.negative == samples[i + 1].second.negative) continue;
        double lo = samples[i].first;
        double hi = samples[i + 1].first;
        bool lo_negative = samples[i].second.negative;
        const double ratio = hi / lo;
        double prev = lo;
        bool prev_negative = lo_negative;
        for (int sub = 1; sub <= 8; ++sub) {
            const double s = lo * std::pow(ratio, sub / 8.0);
            const bool negative =
                sub == 8 ? samples[i + 1].second.negative
                         : sample_sign(sol, h, s, cert.consistency_violations).negative;
            if (negative != prev_negative) {
                cert.brackets.push_back({prev, s, negative});
                break;
            }
            prev = s;
            prev_negative = negative;
        }
    }
    return cert;
}

TermDiagnostics analyze_terms(const ProfileSolution& sol, const ConvexProfile& h, double lo,
                              double hi) {
    if (!(lo > 0.0) || !(hi / lo >= 100.0 * (1.0 - 1e-12))) {
        throw std::invalid_argument("analyze_terms: window must span at least two decades");
    }
    const ModelParameters& params = sol.params();
    const ValidationReport validation = validate_parameters(params);

    TermDiagnostics diag;
    diag.window_lo = lo;
    diag.window_hi = hi;

    const LimitEstimates limits = estimate_limits(sol, /*require_converged=*/false);
    diag.c_hat = limits.c_hat;
    diag.D = theoretical_D(limits.P, limits.c_hat, params, sol.target_warp());

    std::vector<double> s_vals, a1, a2_abs, a3, gf;
    for (std::size_t i = 0; i < sol.size(); ++i) {
        const double s = sol.s()[i];
        if (s < lo || s > hi) continue;
        const PointState state = sol.node(i);
        const Decomposition dec =
            decompose(state, h, sol.domain_warp(), sol.target_warp(), params);
        const WarpJet gj = sol.domain_warp().jet(s);
        s_vals.push_back(s);
        a1.push_back(dec.A1);
        a2_abs.push_back(std::abs(dec.A2));
        a3.push_back(dec.A3);
        gf.push_back(gj.d1 * state.f1 / gj.value);
    }
    if (s_vals.size() < 50) {
        throw std::invalid_argument("analyze_terms: fewer than 50 nodes in window");
    }

    const WarpJet jc = sol.target_warp().jet(diag.c_hat);
    const WarpJet hc = h.jet(diag.c_hat);

    auto add_term = [&](const std::string& name, const std::vector<double>& values,
                        double exponent_theory, std::optional<double> prefactor_theory) {
        TermFit term;
        term.name = name;
        term.fit = fit_power_law(s_vals, values);
        term.exponent_theory = exponent_theory;
        term.prefactor_theory = prefactor_theory;
        term.value_at_window_end = term.fit.prefactor * std::pow(hi, term.fit.slope);
        diag.terms.push_back(std::move(term));
    };

    add_term("A1", a1, validation.exponent_a1,
             params.n * jc.d1 * jc.value * jc.value);
    add_term("|A2|", a2_abs, validation.exponent_a2, std::nullopt);
    const bool has_a3 = hc.d2 > 0.0;
    if (has_a3) {
        add_term("A3", a3, validation.exponent_a3,
                 (params.p - 1.0) * diag.D * diag.D * hc.d2 * jc.value / hc.d1);
    }
    add_term("g'f'/g", gf, validation.exponent_a2, params.delta * diag.D);

    // Verdict: the fitted |A2| exceeds the other fitted terms at the far end.
    double a2_end = 0.0, a1_end = 0.0, a3_end = 0.0;
    for (const auto& term : diag.terms) {
        if (term.name == "|A2|") a2_end = term.value_at_window_end;
        if (term.name == "A1") a1_end = term.value_at_window_end;
        if (term.name == "A3") a3_end = term.value_at_window_end;
    }
    diag.a2_dominates = a2_end > a1_end && (!has_a3 || a2_end > a3_end);
    return diag;
}

}  // namespace pharmonic
