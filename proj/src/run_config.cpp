#include "pharmonic/run_config.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace pharmonic {

using nlohmann::json;

std::string_view to_string(WarpKind kind) {
    return kind == WarpKind::family ? "family" : "euclidean";
}

std::string_view to_string(ProfileKind kind) {
    switch (kind) {
        case ProfileKind::linear: return "linear";
        case ProfileKind::quadratic: return "quadratic";
        case ProfileKind::linquad: return "linquad";
        case ProfileKind::poly: return "poly";
    }
    return "linear";
}

std::string_view to_string(OutputFormat format) {
    return format == OutputFormat::csv ? "csv" : "json";
}

namespace {

WarpKind parse_warp_kind(const std::string& text) {
    if (text == "family") return WarpKind::family;
    if (text == "euclidean") return WarpKind::euclidean;
    throw std::invalid_argument("unknown warp kind: " + text);
}

ProfileKind parse_profile_kind(const std::string& text) {
    if (text == "linear") return ProfileKind::linear;
    if (text == "quadratic") return ProfileKind::quadratic;
    if (text == "linquad") return ProfileKind::linquad;
    if (text == "poly") return ProfileKind::poly;
    throw std::invalid_argument("unknown profile kind: " + text);
}

OutputFormat parse_format(const std::string& text) {
    if (text == "csv") return OutputFormat::csv;
    if (text == "json") return OutputFormat::json;
    throw std::invalid_argument("unknown output format: " + text);
}

bool parse_bool(const std::string& text) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw std::invalid_argument("expected boolean, got: " + text);
}

std::vector<double> parse_coeffs(const std::string& text) {
    std::vector<double> out;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        out.push_back(std::stod(item));
    }
    return out;
}

std::string render_coeffs(const std::vector<double>& coeffs) {
    std::string out;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (i > 0) out += ",";
        out += format_full(coeffs[i]);
    }
    return out;
}

std::string trim(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

}  // namespace

std::string format_full(double x) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", x);
    return buffer;
}

WarpingFunction RunConfig::make_domain() const {
    return domain_warp == WarpKind::family ? make_domain_warp(model.delta)
                                           : make_euclidean_warp();
}

WarpingFunction RunConfig::make_target() const {
    return target_warp == WarpKind::family ? make_target_warp(model.sigma)
                                           : make_euclidean_warp();
}

ConvexProfile RunConfig::make_profile() const {
    switch (profile) {
        case ProfileKind::linear: return ConvexProfile::linear();
        case ProfileKind::quadratic: return ConvexProfile::quadratic();
        case ProfileKind::linquad: return ConvexProfile::linquad();
        case ProfileKind::poly: return ConvexProfile::polynomial(profile_coeffs);
    }
    return ConvexProfile::linear();
}

std::string render_config_text(const RunConfig& c) {
    std::ostringstream out;
    out << "[model]\n"
        << "n = " << c.model.n << "\n"
        << "p = " << format_full(c.model.p) << "\n"
        << "delta = " << format_full(c.model.delta) << "\n"
        << "sigma = " << format_full(c.model.sigma) << "\n"
        << "alpha = " << format_full(c.model.alpha) << "\n\n"
        << "[warps]\n"
        << "domain = " << to_string(c.domain_warp) << "\n"
        << "target = " << to_string(c.target_warp) << "\n\n"
        << "[solver]\n"
        << "s_max = " << format_full(c.solver.s_max) << "\n"
        << "rel_tol = " << format_full(c.solver.rel_tol) << "\n"
        << "abs_tol = " << format_full(c.solver.abs_tol) << "\n"
        << "s_start = " << format_full(c.solver.s_start) << "\n"
        << "max_steps = " << c.solver.max_steps << "\n"
        << "store_stride = " << c.solver.store_stride << "\n"
        << "max_step_fraction = " << format_full(c.solver.max_step_fraction) << "\n"
        << "allow_inadmissible = " << (c.solver.allow_inadmissible ? "true" : "false") << "\n\n"
        << "[profile]\n"
        << "kind = " << to_string(c.profile) << "\n";
    if (c.profile == ProfileKind::poly) out << "coeffs = " << render_coeffs(c.profile_coeffs) << "\n";
    out << "\n[scan]\n"
        << "lo = " << format_full(c.scan_lo) << "\n"
        << "hi = " << format_full(c.scan_hi) << "\n"
        << "samples_per_decade = " << c.samples_per_decade << "\n\n"
        << "[asymptotics]\n"
        << "window_lo = " << format_full(c.window_lo) << "\n"
        << "window_hi = " << format_full(c.window_hi) << "\n"
        << "c1 = " << format_full(c.c1_override) << "\n\n"
        << "[output]\n"
        << "dir = " << c.out_dir << "\n"
        << "format = " << to_string(c.format) << "\n"
        << "quiet = " << (c.quiet ? "true" : "false") << "\n";
    return out.str();
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig config;
    std::istringstream stream(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(stream, line)) {
        ++lineno;
        const std::string stripped = trim(line.substr(0, line.find('#')));
        if (stripped.empty()) continue;
        if (stripped.front() == '[') {
            if (stripped.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": malformed section header");
            section = stripped.substr(1, stripped.size() - 2);
            continue;
        }
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        const std::string qualified = section + "." + key;

        if (qualified == "model.n") config.model.n = std::stoi(value);
        else if (qualified == "model.p") config.model.p = std::stod(value);
        else if (qualified == "model.delta") config.model.delta = std::stod(value);
        else if (qualified == "model.sigma") config.model.sigma = std::stod(value);
        else if (qualified == "model.alpha") config.model.alpha = std::stod(value);
        else if (qualified == "warps.domain") config.domain_warp = parse_warp_kind(value);
        else if (qualified == "warps.target") config.target_warp = parse_warp_kind(value);
        else if (qualified == "solver.s_max") config.solver.s_max = std::stod(value);
        else if (qualified == "solver.rel_tol") config.solver.rel_tol = std::stod(value);
        else if (qualified == "solver.abs_tol") config.solver.abs_tol = std::stod(value);
        else if (qualified == "solver.s_start") config.solver.s_start = std::stod(value);
        else if (qualified == "solver.max_steps") config.solver.max_steps = std::stoul(value);
        else if (qualified == "solver.store_stride") config.solver.store_stride = std::stoul(value);
        else if (qualified == "solver.max_step_fraction")
            config.solver.max_step_fraction = std::stod(value);
        else if (qualified == "solver.allow_inadmissible")
            config.solver.allow_inadmissible = parse_bool(value);
        else if (qualified == "profile.kind") config.profile = parse_profile_kind(value);
        else if (qualified == "profile.coeffs") config.profile_coeffs = parse_coeffs(value);
        else if (qualified == "scan.lo") config.scan_lo = std::stod(value);
        else if (qualified == "scan.hi") config.scan_hi = std::stod(value);
        else if (qualified == "scan.samples_per_decade")
            config.samples_per_decade = std::stoi(value);
        else if (qualified == "asymptotics.window_lo") config.window_lo = std::stod(value);
        else if (qualified == "asymptotics.window_hi") config.window_hi = std::stod(value);
        else if (qualified == "asymptotics.c1") config.c1_override = std::stod(value);
        else if (qualified == "output.dir") config.out_dir = value;
        else if (qualified == "output.format") config.format = parse_format(value);
        else if (qualified == "output.quiet") config.quiet = parse_bool(value);
        else
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": unknown key '" + qualified + "'");
    }
    return config;
}

namespace {

json config_to_json(const RunConfig& c) {
    json out;
    out["model"] = {{"n", c.model.n},       {"p", c.model.p},         {"delta", c.model.delta},
                    {"sigma", c.model.sigma}, {"alpha", c.model.alpha}};
    out["warps"] = {{"domain", std::string(to_string(c.domain_warp))},
                    {"target", std::string(to_string(c.target_warp))}};
    out["solver"] = {{"s_max", c.solver.s_max},
                     {"rel_tol", c.solver.rel_tol},
                     {"abs_tol", c.solver.abs_tol},
                     {"s_start", c.solver.s_start},
                     {"max_steps", c.solver.max_steps},
                     {"store_stride", c.solver.store_stride},
                     {"max_step_fraction", c.solver.max_step_fraction},
                     {"allow_inadmissible", c.solver.allow_inadmissible}};
    out["profile"] = {{"kind", std::string(to_string(c.profile))},
                      {"coeffs", c.profile_coeffs}};
    out["scan"] = {{"lo", c.scan_lo}, {"hi", c.scan_hi},
                   {"samples_per_decade", c.samples_per_decade}};
    out["asymptotics"] = {{"window_lo", c.window_lo},
                          {"window_hi", c.window_hi},
                          {"c1", c.c1_override}};
    out["output"] = {{"dir", c.out_dir},
                     {"format", std::string(to_string(c.format))},
                     {"quiet", c.quiet}};
    return out;
}

RunConfig config_from_json(const json& in) {
    RunConfig c;
    const json& model = in.at("model");
    c.model.n = model.at("n").get<int>();
    c.model.p = model.at("p").get<double>();
    c.model.delta = model.at("delta").get<double>();
    c.model.sigma = model.at("sigma").get<double>();
    c.model.alpha = model.at("alpha").get<double>();
    if (in.contains("warps")) {
        c.domain_warp = parse_warp_kind(in.at("warps").at("domain").get<std::string>());
        c.target_warp = parse_warp_kind(in.at("warps").at("target").get<std::string>());
    }
    if (in.contains("solver")) {
        const json& solver = in.at("solver");
        c.solver.s_max = solver.at("s_max").get<double>();
        c.solver.rel_tol = solver.at("rel_tol").get<double>();
        c.solver.abs_tol = solver.at("abs_tol").get<double>();
        c.solver.s_start = solver.at("s_start").get<double>();
        c.solver.max_steps = solver.at("max_steps").get<std::size_t>();
        c.solver.store_stride = solver.at("store_stride").get<std::size_t>();
        c.solver.max_step_fraction = solver.at("max_step_fraction").get<double>();
        c.solver.allow_inadmissible = solver.at("allow_inadmissible").get<bool>();
    }
    if (in.contains("profile")) {
        c.profile = parse_profile_kind(in.at("profile").at("kind").get<std::string>());
        c.profile_coeffs = in.at("profile").at("coeffs").get<std::vector<double>>();
    }
    if (in.contains("scan")) {
        c.scan_lo = in.at("scan").at("lo").get<double>();
        c.scan_hi = in.at("scan").at("hi").get<double>();
        c.samples_per_decade = in.at("scan").at("samples_per_decade").get<int>();
    }
    if (in.contains("asymptotics")) {
        c.window_lo = in.at("asymptotics").at("window_lo").get<double>();
        c.window_hi = in.at("asymptotics").at("window_hi").get<double>();
        c.c1_override = in.at("asymptotics").at("c1").get<double>();
    }
    if (in.contains("output")) {
        c.out_dir = in.at("output").at("dir").get<std::string>();
        c.format = parse_format(in.at("output").at("format").get<std::string>());
        c.quiet = in.at("output").at("quiet").get<bool>();
    }
    return c;
}

}  // namespace

std::string render_config_json(const RunConfig& config) {
    return config_to_json(config).dump(2) + "\n";
}

RunConfig parse_config_json(const std::string& text) {
    return config_from_json(json::parse(text));
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') return parse_config_json(text);
    return parse_config_text(text);
}

std::string render_diagnostics_csv(const ProfileSolution& sol, const ConvexProfile& h) {
    std::string out(kDiagnosticsHeader);
    out += "\n";
    const ModelParameters& params = sol.params();
    for (std::size_t i = 0; i < sol.size(); ++i) {
        const PointState state = sol.node(i);
        const double dF2 =
            energy_density_sq(state, sol.domain_warp(), sol.target_warp(), params.n);
        const double residual =
            p_tension_residual(state, sol.domain_warp(), sol.target_warp(), params);
        const double q = sol.monotone_quantity_at(i);
        const double delta_phf =
            p_laplacian_composition(state, h, sol.domain_warp(), sol.target_warp(), params);
        const Decomposition dec =
            decompose(state, h, sol.domain_warp(), sol.target_warp(), params);
        const double row[13] = {state.s, state.f, state.f1, state.f2, dF2,   residual, q,
                                delta_phf, dec.K, dec.Ktilde, dec.A1, dec.A2, dec.A3};
        for (int c = 0; c < 13; ++c) {
            if (c > 0) out += ",";
            out += format_full(row[c]);
        }
        out += "\n";
    }
    return out;
}

std::string render_solution_json(const ProfileSolution& sol, WarpKind domain, WarpKind target) {
    json out;
    out["model"] = {{"n", sol.params().n},
                    {"p", sol.params().p},
                    {"delta", sol.params().delta},
                    {"sigma", sol.params().sigma},
                    {"alpha", sol.params().alpha}};
    out["warps"] = {{"domain", std::string(to_string(domain))},
                    {"target", std::string(to_string(target))}};
    const SolverConfig& config = sol.config();
    out["solver"] = {{"s_max", config.s_max},
                     {"rel_tol", config.rel_tol},
                     {"abs_tol", config.abs_tol},
                     {"s_start", config.s_start},
                     {"max_steps", config.max_steps},
                     {"store_stride", config.store_stride},
                     {"max_step_fraction", config.max_step_fraction},
                     {"allow_inadmissible", config.allow_inadmissible}};
    out["status"] = std::string(to_string(sol.status));
    out["message"] = sol.message;
    out["stats"] = {{"accepted", sol.stats.accepted},
                    {"rejected", sol.stats.rejected},
                    {"rhs_evals", sol.stats.rhs_evals},
                    {"last_step", sol.stats.last_step},
                    {"max_residual", sol.stats.max_residual}};
    out["nodes"] = {{"s", sol.s()}, {"f", sol.f()}, {"fp", sol.f1()}, {"fpp", sol.f2()}};
    return out.dump() + "\n";
}

ProfileSolution load_solution_json(const std::string& text) {
    const json in = json::parse(text);
    ModelParameters params;
    params.n = in.at("model").at("n").get<int>();
    params.p = in.at("model").at("p").get<double>();
    params.delta = in.at("model").at("delta").get<double>();
    params.sigma = in.at("model").at("sigma").get<double>();
    params.alpha = in.at("model").at("alpha").get<double>();

    const WarpKind domain = parse_warp_kind(in.at("warps").at("domain").get<std::string>());
    const WarpKind target = parse_warp_kind(in.at("warps").at("target").get<std::string>());
    const WarpingFunction g =
        domain == WarpKind::family ? make_domain_warp(params.delta) : make_euclidean_warp();
    const WarpingFunction j =
        target == WarpKind::family ? make_target_warp(params.sigma) : make_euclidean_warp();

    SolverConfig config;
    const json& solver = in.at("solver");
    config.s_max = solver.at("s_max").get<double>();
    config.rel_tol = solver.at("rel_tol").get<double>();
    config.abs_tol = solver.at("abs_tol").get<double>();
    config.s_start = solver.at("s_start").get<double>();
    config.max_steps = solver.at("max_steps").get<std::size_t>();
    config.store_stride = solver.at("store_stride").get<std::size_t>();
    config.max_step_fraction = solver.at("max_step_fraction").get<double>();
    config.allow_inadmissible = solver.at("allow_inadmissible").get<bool>();

    SolverStatus status = SolverStatus::success;
    const std::string status_text = in.at("status").get<std::string>();
    for (SolverStatus candidate :
         {SolverStatus::success, SolverStatus::fprime_vanished,
          SolverStatus::degenerate_coefficient, SolverStatus::step_budget_exhausted,
          SolverStatus::step_underflow}) {
        if (to_string(candidate) == status_text) status = candidate;
    }

    SolverStats stats;
    stats.accepted = in.at("stats").at("accepted").get<std::size_t>();
    stats.rejected = in.at("stats").at("rejected").get<std::size_t>();
    stats.rhs_evals = in.at("stats").at("rhs_evals").get<std::size_t>();
    stats.last_step = in.at("stats").at("last_step").get<double>();
    stats.max_residual = in.at("stats").at("max_residual").get<double>();

    return ProfileSolution::assemble(
        params, g, j, config, in.at("nodes").at("s").get<std::vector<double>>(),
        in.at("nodes").at("f").get<std::vector<double>>(),
        in.at("nodes").at("fp").get<std::vector<double>>(),
        in.at("nodes").at("fpp").get<std::vector<double>>(), status,
        in.at("message").get<std::string>(), stats);
}

std::string render_validation_json(const ModelParameters& params, const ValidationReport& report) {
    json out;
    out["model"] = {{"n", params.n},
                    {"p", params.p},
                    {"delta", params.delta},
                    {"sigma", params.sigma},
                    {"alpha", params.alpha}};
    out["all_passed"] = report.all_passed;
    out["epsilon_bound"] = report.epsilon_bound;
    out["exponent_fprime"] = report.exponent_fprime;
    out["exponent_a1"] = report.exponent_a1;
    out["exponent_a2"] = report.exponent_a2;
    out["exponent_a3"] = report.exponent_a3;
    json checks = json::array();
    for (const auto& check : report.checks) {
        checks.push_back(
            {{"name", check.name}, {"passed", check.passed}, {"message", check.message}});
    }
    out["checks"] = checks;
    return out.dump(2) + "\n";
}

std::string render_asymptotics_json(const AsymptoticsReport& report) {
    json out;
    out["c_hat"] = {{"value", report.limits.c_hat},
                    {"uncertainty", report.limits.c_hat_uncertainty},
                    {"converged", report.limits.c_hat_converged}};
    out["P"] = {{"value", report.limits.P},
                {"uncertainty", report.limits.P_uncertainty},
                {"converged", report.limits.P_converged}};
    out["C1"] = report.C1;
    out["C1_estimated"] = report.C1_estimated;
    out["D_theory"] = report.D_theory;
    out["exponent_theory"] = report.exponent_theory;
    out["exponent_fitted"] = report.exponent_fitted;
    out["exponent_rel_dev"] = report.exponent_rel_dev;
    out["prefactor_fitted"] = report.prefactor_fitted;
    out["prefactor_rel_dev"] = report.prefactor_rel_dev;
    out["fit_max_residual"] = report.fit_max_residual;
    out["fit_window"] = {report.window_lo, report.window_hi};
    out["energy_ratio"] = {{"max_deviation", report.energy.max_deviation},
                           {"decay_slope", report.energy.decay_slope},
                           {"window", {report.energy.window_lo, report.energy.window_hi}}};
    return out.dump(2) + "\n";
}

std::string render_certificate_json(const Certificate& cert) {
    json out;
    out["model"] = {{"n", cert.params.n},
                    {"p", cert.params.p},
                    {"delta", cert.params.delta},
                    {"sigma", cert.params.sigma},
                    {"alpha", cert.params.alpha}};
    out["profile"] = cert.profile_name;
    out["scan"] = {{"lo", cert.scan_lo},
                   {"hi", cert.scan_hi},
                   {"samples_per_decade", cert.samples_per_decade},
                   {"scanned_points", cert.scanned_points}};
    out["certified_count"] = cert.points.size();
    out["negative_fraction"] = cert.negative_fraction;
    out["consistency_violations"] = cert.consistency_violations;
    if (cert.any()) {
        out["first_certified"] = cert.first_certified();
        const CertifiedPoint* worst = cert.most_negative();
        out["most_negative"] = {{"s", worst->s}, {"value", worst->value_direct}};
    }
    json brackets = json::array();
    for (const auto& bracket : cert.brackets) {
        brackets.push_back(
            {{"lo", bracket.lo}, {"hi", bracket.hi}, {"to_negative", bracket.to_negative}});
    }
    out["sign_change_brackets"] = brackets;
    json points = json::array();
    for (const auto& pt : cert.points) {
        points.push_back({{"s", pt.s},
                          {"value_direct", pt.value_direct},
                          {"value_decomp", pt.value_decomp},
                          {"K", pt.K},
                          {"Ktilde", pt.Ktilde},
                          {"A1", pt.A1},
                          {"A2", pt.A2},
                          {"A3", pt.A3}});
    }
    out["points"] = points;
    return out.dump(2) + "\n";
}

std::string render_certified_points_csv(const Certificate& cert) {
    std::string out = "s,DeltapHF,DeltapHF_decomp,K,Ktilde,A1,A2,A3\n";
    for (const auto& pt : cert.points) {
        const double row[8] = {pt.s, pt.value_direct, pt.value_decomp, pt.K,
                               pt.Ktilde, pt.A1, pt.A2, pt.A3};
        for (int c = 0; c < 8; ++c) {
            if (c > 0) out += ",";
            out += format_full(row[c]);
        }
        out += "\n";
    }
    return out;
}

std::string render_term_diagnostics_json(const TermDiagnostics& diag) {
    json out;
    out["window"] = {diag.window_lo, diag.window_hi};
    out["c_hat"] = diag.c_hat;
    out["D"] = diag.D;
    out["a2_dominates"] = diag.a2_dominates;
    json terms = json::array();
    for (const auto& term : diag.terms) {
        json entry = {{"name", term.name},
                      {"slope_fitted", term.fit.slope},
                      {"slope_theory", term.exponent_theory},
                      {"prefactor_fitted", term.fit.prefactor},
                      {"fit_max_residual", term.fit.max_residual},
                      {"value_at_window_end", term.value_at_window_end}};
        if (term.prefactor_theory) entry["prefactor_theory"] = *term.prefactor_theory;
        terms.push_back(entry);
    }
    out["terms"] = terms;
    return out.dump(2) + "\n";
}

}  // namespace pharmonic
