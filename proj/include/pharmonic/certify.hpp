#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pharmonic/asymptotics.hpp"
#include "pharmonic/profile_ode.hpp"

namespace pharmonic {

/// Threshold (n+1-p)/(n+3-p) below which the slack epsilon of the
/// subsequence estimate keeps A2 negative; lies in (0,1) for admissible
/// parameters.
double epsilon_bound(const ModelParameters& params);

/// Whether 1 - (n-(p-2)) < 0, i.e. p < n+1: the sign condition that makes
/// the A2 coefficient negative. True on the whole admissible range; exposed
/// so exploratory sweeps can see where the mechanism breaks.
bool a2_sign_condition(const ModelParameters& params);

/// One radius where Delta_p(H o F) is certified negative by both formulas.
struct CertifiedPoint {
    double s = 0.0;
    double value_direct = 0.0;  // grouped formula
    double value_decomp = 0.0;  // K * Ktilde * (A1+A2+A3)
    double K = 0.0;
    double Ktilde = 0.0;
    double A1 = 0.0;
    double A2 = 0.0;
    double A3 = 0.0;
};

/// Log-interval bracketing a sign change of Delta_p(H o F), found by the
/// refinement pass at 8x the scan density.
struct SignChangeBracket {
    double lo = 0.0;
    double hi = 0.0;
    bool to_negative = false;  // sign across the bracket: positive -> negative
};

struct Certificate {
    ModelParameters params;
    std::string profile_name;
    double scan_lo = 0.0;
    double scan_hi = 0.0;
    int samples_per_decade = 0;
    std::size_t scanned_points = 0;
    std::vector<CertifiedPoint> points;
    std::vector<SignChangeBracket> brackets;
    double negative_fraction = 0.0;
    std::size_t consistency_violations = 0;

    bool any() const { return !points.empty(); }
    double first_certified() const;               // throws if empty
    const CertifiedPoint* most_negative() const;  // by value_direct; null if empty
};

/// Evaluates Delta_p(H o F) on a log-uniform grid s_k = 10^(k/samples_per_decade)
/// covering [s_lo, s_hi], certifying each negative point by recomputing it
/// through both the direct grouping and the K*Ktilde*(A1+A2+A3) factorization:
/// a point is certified when both values fall below -1e-12 times the local
/// term scale and agree to 1e-8 relative. Sign changes between neighboring
/// grid points are bracketed by a refinement pass at 8x density. Requires a
/// convexity-certified profile with h' > 0 and a solution covering the range.
Certificate scan_sign(const ProfileSolution& sol, const ConvexProfile& h, double s_lo,
                      double s_hi, int samples_per_decade = 64);

/// Fitted decay of one certification term against its theoretical rate.
struct TermFit {
    std::string name;
    PowerLawFit fit;
    double exponent_theory = 0.0;
    std::optional<double> prefactor_theory;
    double value_at_window_end = 0.0;  // fitted power law evaluated at the far end
};

struct TermDiagnostics {
    std::vector<TermFit> terms;  // A1, |A2|, A3 (when h'' != 0), g'f'/g
    bool a2_dominates = false;   // |A2| exceeds A1 and A3 at the window's far end
    double window_lo = 0.0;
    double window_hi = 0.0;
    double c_hat = 0.0;
    double D = 0.0;
};

/// Fits log-log decay rates of A1, |A2|, A3 and g'f'/g over stored nodes in
/// [lo, hi] and compares them with the theoretical exponents -2*delta,
/// -1-delta*(n-(p-2)), -2*delta*(n-(p-2)) and -1-delta*(n-(p-2)). Prefactor
/// predictions use c_hat and D estimated from the same solution. The window
/// must span at least two decades.
TermDiagnostics analyze_terms(const ProfileSolution& sol, const ConvexProfile& h, double lo,
                              double hi);

}  // namespace pharmonic
