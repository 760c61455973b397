#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pharmonic/geometry.hpp"

namespace pharmonic {

/// Profile data at one radius: f(s), f'(s), f''(s). States produced by the
/// ODE module are on-shell (f'' solves the profile equation); hand-built
/// states may be off-shell.
struct PointState {
    double s = 0.0;
    double f = 0.0;
    double f1 = 0.0;
    double f2 = 0.0;
};

class ConvexProfile;
struct ConvexityReport;
ConvexityReport hessian_convexity_check(ConvexProfile& h, const WarpingFunction& j,
                                        std::span<const double> grid, double tol);

/// Radial factor h of a rotationally symmetric function on the target, with
/// exact derivatives and a convexity-certification flag. The lifted function
/// is convex iff h'' >= 0 and h' >= 0, since the target warp is positive and
/// increasing; hessian_convexity_check verifies this on a grid and sets the
/// flag.
class ConvexProfile {
public:
    using Evaluator = std::function<WarpJet(double)>;

    ConvexProfile() = default;
    ConvexProfile(std::string name, Evaluator eval)
        : name_(std::move(name)), eval_(std::move(eval)) {}

    WarpJet jet(double t) const { return eval_(t); }
    const std::string& name() const { return name_; }
    bool certified() const { return certified_; }
    bool valid() const { return static_cast<bool>(eval_); }

    static ConvexProfile linear();     // h(t) = t
    static ConvexProfile quadratic();  // h(t) = t^2
    static ConvexProfile linquad();    // h(t) = t + t^2
    static ConvexProfile polynomial(std::vector<double> coeffs);  // sum_k c_k t^k

    /// lambda * h, keeping the certification flag when lambda > 0.
    static ConvexProfile scaled(const ConvexProfile& h, double lambda);

private:
    friend ConvexityReport hessian_convexity_check(ConvexProfile& h, const WarpingFunction& j,
                                                   std::span<const double> grid, double tol);
    std::string name_;
    Evaluator eval_;
    bool certified_ = false;
};

struct ConvexityViolation {
    double t;
    double h1;
    double h2;
};

struct ConvexityReport {
    bool convex = false;
    double tol = 0.0;
    std::size_t grid_size = 0;
    std::vector<ConvexityViolation> violations;  // first few offending points
};

/// Grid certification of h'' >= -tol and h' >= -tol (with h' > 0 at positive
/// radii). On success the profile's certification flag is set. The target
/// warp is consulted only to reject inadmissible (non positive) j on the grid.
ConvexityReport hessian_convexity_check(ConvexProfile& h, const WarpingFunction& j,
                                        std::span<const double> grid, double tol = 1e-12);

/// |dF|^2 = (f')^2 + n j(f)^2 / g(s)^2. Nonnegative; zero only at fully
/// degenerate points. Throws std::domain_error for s <= 0.
double energy_density_sq(const PointState& state, const WarpingFunction& g,
                         const WarpingFunction& j, int n);

/// Radial coefficient of the tension field:
///   f'' + (n/g^2) [g g' f' - j(f) j'(f)].
double tension(const PointState& state, const WarpingFunction& g, const WarpingFunction& j,
               int n);

/// Radial p-tension with the positive prefactor |dF|^(p-2) removed:
///   tension + (p-2)|dF|^-2 f' [ f' f'' + n (j(f)/g^3)(j'(f) f' g - j(f) g') ].
/// Vanishes exactly where the profile is p-harmonic. Throws std::domain_error
/// for s <= 0 and for degenerate states with |dF|^2 = 0.
double p_tension_residual(const PointState& state, const WarpingFunction& g,
                          const WarpingFunction& j, const ModelParameters& params);

/// Full radial p-tension |dF|^(p-2) * p_tension_residual (diagnostic).
double p_tension(const PointState& state, const WarpingFunction& g, const WarpingFunction& j,
                 const ModelParameters& params);

/// The unique f'' making p_tension_residual vanish at (s, f, f'):
///   f'' = -[ (n/g^2)(g g' f' - j j') + (p-2)(f'/|dF|^2) n (j/g^3)(j' f' g - j g') ]
///         / [ 1 + (p-2) f'^2/|dF|^2 ].
/// Throws std::domain_error when the cleared coefficient |dF|^2 + (p-2) f'^2
/// degenerates.
double solve_second_derivative(double s, double f, double f1, const WarpingFunction& g,
                               const WarpingFunction& j, const ModelParameters& params);

/// p-laplacian of the composed radial function, grouped as
///   K(s) { (p-1)[h'(f) f'' + h''(f)(f')^2] + n (g'/g) f' h'(f) },
/// with K = |h'(f) f'|^(p-2). Defined on M+ = {h'(f(s)) f'(s) > 0}; throws
/// std::domain_error outside.
double p_laplacian_composition(const PointState& state, const ConvexProfile& h,
                               const WarpingFunction& g, const WarpingFunction& j,
                               const ModelParameters& params);

/// Terms of the on-shell factorization Delta_p(H o F) = K * Ktilde * (A1+A2+A3):
///   K      = |h'(f) f'|^(p-2)
///   Ktilde = n j(f) h'(f) / (|dF|^2 g^2)
///   A1     = j'(f) [ (3-p)(f')^2 + n j(f)^2/g^2 ]
///   A2     = (p-2) j(f) [ g' f'/g + f'' ]
///   A3     = (p-1)(f')^2 h''(f) |dF|^2 g^2 / (n j(f) h'(f))
/// The product equals p_laplacian_composition exactly when the state is
/// on-shell (p_tension_residual = 0); the identity substitutes the profile
/// equation, so off-shell states need not satisfy it.
struct Decomposition {
    double K = 0.0;
    double Ktilde = 0.0;
    double A1 = 0.0;
    double A2 = 0.0;
    double A3 = 0.0;

    double sum() const { return A1 + A2 + A3; }
    double product() const { return K * Ktilde * sum(); }
    /// Magnitude of the constituent terms, for margin/consistency scales.
    double term_scale() const { return std::abs(K * Ktilde) * (std::abs(A1) + std::abs(A2) + std::abs(A3)); }
};

/// Requires s > 0, f > 0 (so j(f) > 0) and h'(f) > 0; throws
/// std::domain_error otherwise.
Decomposition decompose(const PointState& state, const ConvexProfile& h,
                        const WarpingFunction& g, const WarpingFunction& j,
                        const ModelParameters& params);

/// Sum of absolute values of the grouped terms of p_laplacian_composition;
/// the natural scale against which a computed value of Delta_p(H o F) is
/// judged nonzero.
double p_laplacian_term_scale(const PointState& state, const ConvexProfile& h,
                              const WarpingFunction& g, const WarpingFunction& j,
                              const ModelParameters& params);

}  // namespace pharmonic
