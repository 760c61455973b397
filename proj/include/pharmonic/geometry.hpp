#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace pharmonic {

/// Parameter tuple (n, p, delta, sigma, alpha) of the rotationally symmetric
/// model. The domain and target are (n+1)-dimensional warped products over
/// the n-sphere; p is the energy exponent and alpha the initial profile slope.
struct ModelParameters {
    int n = 2;
    double p = 2.5;
    double delta = 3.0;
    double sigma = 0.5;
    double alpha = 1.0;

    bool operator==(const ModelParameters&) const = default;
};

/// Value and first two derivatives of a radial function at one point.
struct WarpJet {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

/// Radial warping function r -> (value, d1, d2) with exact analytic
/// derivatives. Admissible warps vanish at 0 with unit slope and are
/// positive for r > 0. Evaluators are pure; instances are immutable and
/// safe to share across threads.
class WarpingFunction {
public:
    using Evaluator = std::function<WarpJet(double)>;

    WarpingFunction() = default;
    WarpingFunction(std::string name, Evaluator eval)
        : name_(std::move(name)), eval_(std::move(eval)) {}

    WarpJet jet(double r) const { return eval_(r); }
    double value(double r) const { return eval_(r).value; }
    double d1(double r) const { return eval_(r).d1; }
    double d2(double r) const { return eval_(r).d2; }

    const std::string& name() const { return name_; }
    bool valid() const { return static_cast<bool>(eval_); }

private:
    std::string name_;
    Evaluator eval_;
};

/// Domain warp g(s) = (s + delta^(-1/(delta-1)))^delta - delta^(-delta/(delta-1)).
/// Satisfies g(0)=0, g'(0)=1, g>0 on (0,inf) and g(s)/s^delta -> 1, so the
/// asymptotic constant C1 equals 1 for this family. Throws
/// std::invalid_argument unless delta > 1.
WarpingFunction make_domain_warp(double delta);

/// Target warp j(t) = (t + sigma^(1/(1-sigma)))^sigma - sigma^(sigma/(1-sigma)).
/// Satisfies j(0)=0, j'(0)=1, j>0 on (0,inf); j' is strictly positive and
/// non-increasing with supremum j'(0)=1. Throws std::invalid_argument unless
/// 0 < sigma < 1.
WarpingFunction make_target_warp(double sigma);

/// Identity warp r -> (r, 1, 0): the flat model, for which the identity
/// profile f(s)=s solves the profile equation exactly at every exponent.
WarpingFunction make_euclidean_warp();

struct HypothesisCheck {
    std::string name;
    bool passed = false;
    std::string message;
};

/// Result of checking every standing hypothesis on a parameter tuple, plus
/// the derived exponents consumed by the asymptotics and certification
/// modules. Produced deterministically; checking never throws.
struct ValidationReport {
    std::vector<HypothesisCheck> checks;
    bool all_passed = false;

    double epsilon_bound = 0.0;    // (n+1-p)/(n+3-p)
    double exponent_fprime = 0.0;  // -delta*(n-(p-2))
    double exponent_a1 = 0.0;      // -2*delta
    double exponent_a2 = 0.0;      // -1-delta*(n-(p-2))
    double exponent_a3 = 0.0;      // -2*delta*(n-(p-2))

    const HypothesisCheck* find(std::string_view name) const;
    bool passed(std::string_view name) const;
    std::string summary() const;
};

// Stable hypothesis identifiers, usable from tests and the CLI.
namespace hypothesis {
inline constexpr std::string_view n_ge_2 = "n >= 2";
inline constexpr std::string_view p_below_dimension = "p < n+1";
inline constexpr std::string_view p_above_max = "p > max{2,n}";
inline constexpr std::string_view p_minus_n_unit = "0 < p-n < 1";
inline constexpr std::string_view delta_vs_gap = "delta > 1/(p-n)";
inline constexpr std::string_view sigma_range = "0 < sigma < 1";
inline constexpr std::string_view alpha_positive = "alpha > 0";
inline constexpr std::string_view a3_faster_than_a2 = "-2*delta*(n-(p-2)) < -1-delta*(n-(p-2))";
inline constexpr std::string_view a1_faster_than_a2 = "-2*delta < -1-delta*(n-(p-2))";
inline constexpr std::string_view epsilon_in_unit = "0 < (n+1-p)/(n+3-p) < 1";
}  // namespace hypothesis

/// Checks n >= 2, n+1 > p > max{2,n}, 0 < p-n < 1, delta > 1/(p-n),
/// 0 < sigma < 1, alpha > 0, the two exponent-domination inequalities and
/// the epsilon bound. Failures are reported, never thrown, so parameter
/// sweeps can record infeasible points.
ValidationReport validate_parameters(const ModelParameters& params);

}  // namespace pharmonic
