#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pharmonic/asymptotics.hpp"
#include "pharmonic/certify.hpp"
#include "pharmonic/geometry.hpp"
#include "pharmonic/operators.hpp"
#include "pharmonic/profile_ode.hpp"

namespace pharmonic {

enum class WarpKind { family, euclidean };
enum class ProfileKind { linear, quadratic, linquad, poly };
enum class OutputFormat { csv, json };

std::string_view to_string(WarpKind kind);
std::string_view to_string(ProfileKind kind);
std::string_view to_string(OutputFormat format);

/// Reproducible description of one run: model parameters, solver settings,
/// warp and convex-profile selection, scan range, fit windows and output
/// options. Round-trips losslessly through both the text and JSON formats.
struct RunConfig {
    ModelParameters model;
    SolverConfig solver;
    WarpKind domain_warp = WarpKind::family;
    WarpKind target_warp = WarpKind::family;
    ProfileKind profile = ProfileKind::linear;
    std::vector<double> profile_coeffs;  // for ProfileKind::poly
    double scan_lo = 1.0;
    double scan_hi = 1.0e4;
    int samples_per_decade = 64;
    double window_lo = 0.0;  // 0 = auto ([s_max/100, s_max])
    double window_hi = 0.0;
    double c1_override = 0.0;  // 0 = auto
    std::string out_dir = "out";
    OutputFormat format = OutputFormat::csv;
    bool quiet = false;

    WarpingFunction make_domain() const;
    WarpingFunction make_target() const;
    ConvexProfile make_profile() const;  // not yet convexity-certified

    bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config_text(const std::string& text);
std::string render_config_text(const RunConfig& config);
RunConfig parse_config_json(const std::string& text);
std::string render_config_json(const RunConfig& config);

/// Loads a config file, accepting either the key-value text format or JSON
/// (detected from the leading non-space character).
RunConfig load_config_file(const std::string& path);

/// Fixed diagnostics schema: one row per stored node.
inline constexpr std::string_view kDiagnosticsHeader =
    "s,f,fp,fpp,dF2,residual,Q,DeltapHF,K,Ktilde,A1,A2,A3";

/// Full-precision CSV of the diagnostics table for a solution, evaluated
/// with the given convex profile. Deterministic: identical inputs render
/// byte-identical text.
std::string render_diagnostics_csv(const ProfileSolution& sol, const ConvexProfile& h);

/// Solution dump (JSON) with enough information to reload and re-analyze.
std::string render_solution_json(const ProfileSolution& sol, WarpKind domain, WarpKind target);
ProfileSolution load_solution_json(const std::string& text);

std::string render_validation_json(const ModelParameters& params, const ValidationReport& report);
std::string render_asymptotics_json(const AsymptoticsReport& report);
std::string render_certificate_json(const Certificate& cert);
std::string render_certified_points_csv(const Certificate& cert);
std::string render_term_diagnostics_json(const TermDiagnostics& diag);

/// Full-precision decimal rendering (17 significant digits) used by every
/// CSV writer, so downstream regression reproduces in-process values.
std::string format_full(double x);

}  // namespace pharmonic
