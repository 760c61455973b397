// Command-line interface: validation, solving, asymptotics, certification,
// parameter sweeps and plot-data extraction, driven by a reproducible config
// file. Exit codes: 0 success, 2 validation failure, 3 solver/analysis
// failure, 4 I/O failure.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "pharmonic/asymptotics.hpp"
#include "pharmonic/certify.hpp"
#include "pharmonic/geometry.hpp"
#include "pharmonic/operators.hpp"
#include "pharmonic/profile_ode.hpp"
#include "pharmonic/run_config.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

struct Options {
    std::string config_path;
    std::string out_dir;  // overrides config when nonempty
    std::string format;   // overrides config when nonempty
    bool quiet = false;
    std::string solution_path;           // asymptotics / certify / plot-data
    std::string columns = "f";           // plot-data
    std::vector<std::string> vary;       // sweep
    std::size_t workers = 0;             // sweep; 0 = hardware
    bool analyze_terms_flag = false;     // certify
};

pharmonic::RunConfig effective_config(const Options& opt) {
    pharmonic::RunConfig config;
    if (!opt.config_path.empty()) config = pharmonic::load_config_file(opt.config_path);
    if (!opt.out_dir.empty()) config.out_dir = opt.out_dir;
    if (!opt.format.empty())
        config.format = opt.format == "json" ? pharmonic::OutputFormat::json
                                             : pharmonic::OutputFormat::csv;
    if (opt.quiet) config.quiet = true;
    return config;
}

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
    std::filesystem::create_directories(dir);
    const std::string path = dir + "/" + name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open " + path + " for writing");
    out << content;
    if (!out) throw std::ios_base::failure("write failed: " + path);
}

struct SolvedRun {
    pharmonic::ProfileSolution solution;
    pharmonic::ConvexProfile profile;  // convexity-certified on the visited range
};

pharmonic::ConvexProfile certify_profile_for(const pharmonic::ProfileSolution& sol,
                                             const pharmonic::RunConfig& config) {
    pharmonic::ConvexProfile profile = config.make_profile();
    const double f_lo = std::max(sol.f().front(), 1e-12);
    const double f_hi = std::max(sol.f().back(), f_lo * (1.0 + 1e-9));
    std::vector<double> grid(256);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = static_cast<double>(i) / (grid.size() - 1);
        grid[i] = f_lo * std::pow(f_hi / f_lo, t);
    }
    const pharmonic::ConvexityReport report =
        pharmonic::hessian_convexity_check(profile, sol.target_warp(), grid);
    if (!report.convex) {
        std::ostringstream msg;
        msg << "convex profile '" << profile.name() << "' failed convexity certification on ["
            << f_lo << ", " << f_hi << "]";
        throw std::runtime_error(msg.str());
    }
    return profile;
}

SolvedRun solve_from_config(const pharmonic::RunConfig& config) {
    const pharmonic::WarpingFunction g = config.make_domain();
    const pharmonic::WarpingFunction j = config.make_target();
    pharmonic::ProfileSolution sol = pharmonic::integrate(config.model, g, j, config.solver);
    if (sol.status != pharmonic::SolverStatus::success) {
        std::ostringstream msg;
        msg << "solver stopped: " << pharmonic::to_string(sol.status) << " (" << sol.message
            << ")";
        throw std::runtime_error(msg.str());
    }
    pharmonic::ConvexProfile profile = certify_profile_for(sol, config);
    return {std::move(sol), std::move(profile)};
}

pharmonic::ProfileSolution load_solution(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open solution file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return pharmonic::load_solution_json(buffer.str());
}

std::string monotonicity_verdict(const pharmonic::ProfileSolution& sol) {
    const std::vector<double> q = sol.monotone_quantity();
    std::size_t violations = 0;
    for (std::size_t i = 0; i + 1 < q.size(); ++i) {
        if (q[i + 1] < q[i] - 1e-8 * (1.0 + std::abs(q[i]))) ++violations;
    }
    if (violations == 0) return "non-decreasing (within 1e-8 relative slack)";
    return std::to_string(violations) + " violations of monotonicity";
}

int cmd_validate(const Options& opt) {
    const pharmonic::RunConfig config = effective_config(opt);
    const pharmonic::ValidationReport report = pharmonic::validate_parameters(config.model);
    if (!config.quiet) {
        std::cout << report.summary();
        std::cout << "epsilon_bound = " << report.epsilon_bound << "\n"
                  << "exponent f'   = " << report.exponent_fprime << "\n"
                  << "exponent A1   = " << report.exponent_a1 << "\n"
                  << "exponent A2   = " << report.exponent_a2 << "\n"
                  << "exponent A3   = " << report.exponent_a3 << "\n";
    }
    if (!opt.out_dir.empty() || !opt.config_path.empty()) {
        write_file(config.out_dir, "validation.json",
                   pharmonic::render_validation_json(config.model, report));
    }
    return report.all_passed ? kExitOk : kExitValidation;
}

int cmd_solve(const Options& opt) {
    const pharmonic::RunConfig config = effective_config(opt);
    const pharmonic::ValidationReport report = pharmonic::validate_parameters(config.model);
    if (!report.all_passed && !config.solver.allow_inadmissible) {
        std::cerr << "parameters fail validation:\n" << report.summary();
        return kExitValidation;
    }

    const pharmonic::WarpingFunction g = config.make_domain();
    const pharmonic::WarpingFunction j = config.make_target();
    pharmonic::ProfileSolution sol = pharmonic::integrate(config.model, g, j, config.solver);
    const bool partial = sol.status != pharmonic::SolverStatus::success;
    if (partial) {
        std::cerr << "solver stopped early: " << pharmonic::to_string(sol.status) << " ("
                  << sol.message << "); writing partial output\n";
    }

    write_file(config.out_dir, "solution.json",
               pharmonic::render_solution_json(sol, config.domain_warp, config.target_warp));
    pharmonic::ConvexProfile profile = certify_profile_for(sol, config);
    write_file(config.out_dir, "diagnostics.csv",
               pharmonic::render_diagnostics_csv(sol, profile));

    if (!config.quiet) {
        std::cout << "nodes: " << sol.size() << "  accepted: " << sol.stats.accepted
                  << "  rejected: " << sol.stats.rejected << "\n"
                  << "c_hat estimate: " << pharmonic::format_full(sol.f().back())
                  << "  (f at s_max)\n"
                  << "max |p-tension residual| at nodes: "
                  << pharmonic::format_full(sol.stats.max_residual) << "\n"
                  << "monotone quantity Q: " << monotonicity_verdict(sol) << "\n";
    }
    return partial ? kExitSolver : kExitOk;
}

int cmd_asymptotics(const Options& opt) {
    const pharmonic::RunConfig config = effective_config(opt);
    pharmonic::ProfileSolution sol = opt.solution_path.empty()
                                         ? solve_from_config(config).solution
                                         : load_solution(opt.solution_path);
    const pharmonic::AsymptoticsReport report = pharmonic::build_asymptotics_report(
        sol, config.window_lo, config.window_hi, config.c1_override);
    write_file(config.out_dir, "asymptotics.json", pharmonic::render_asymptotics_json(report));
    if (!config.quiet) {
        std::cout << "c_hat = " << report.limits.c_hat << " +- "
                  << report.limits.c_hat_uncertainty << "\n"
                  << "P     = " << report.limits.P << " +- " << report.limits.P_uncertainty
                  << "\n"
                  << "D (theory)        = " << report.D_theory << "\n"
                  << "exponent theory   = " << report.exponent_theory << "\n"
                  << "exponent fitted   = " << report.exponent_fitted << "  (rel dev "
                  << report.exponent_rel_dev << ")\n"
                  << "prefactor fitted  = " << report.prefactor_fitted << "  (rel dev "
                  << report.prefactor_rel_dev << ")\n"
                  << "fit window        = [" << report.window_lo << ", " << report.window_hi
                  << "]\n"
                  << "energy ratio dev  = " << report.energy.max_deviation << " over ["
                  << report.energy.window_lo << ", " << report.energy.window_hi << "]\n";
    }
    return kExitOk;
}

int cmd_certify(const Options& opt) {
    const pharmonic::RunConfig config = effective_config(opt);
    SolvedRun run = opt.solution_path.empty()
                        ? solve_from_config(config)
                        : SolvedRun{load_solution(opt.solution_path), {}};
    if (!run.profile.valid()) run.profile = certify_profile_for(run.solution, config);

    const double hi = std::min(config.scan_hi, run.solution.s_back());
    const pharmonic::Certificate cert = pharmonic::scan_sign(
        run.solution, run.profile, config.scan_lo, hi, config.samples_per_decade);

    write_file(config.out_dir, "certificate.json", pharmonic::render_certificate_json(cert));
    write_file(config.out_dir, "certified_points.csv",
               pharmonic::render_certified_points_csv(cert));
    if (opt.analyze_terms_flag) {
        const double window_hi = run.solution.s_back();
        const pharmonic::TermDiagnostics diag =
            pharmonic::analyze_terms(run.solution, run.profile, window_hi / 100.0, window_hi);
        write_file(config.out_dir, "terms.json", pharmonic::render_term_diagnostics_json(diag));
    }

    if (!config.quiet) {
        std::cout << "scanned " << cert.scanned_points << " points in [" << cert.scan_lo << ", "
                  << cert.scan_hi << "] at " << cert.samples_per_decade << "/decade\n"
                  << "certified negative: " << cert.points.size() << "  (fraction "
                  << cert.negative_fraction << ")\n";
        if (cert.any()) {
            const pharmonic::CertifiedPoint* worst = cert.most_negative();
            std::cout << "first certified radius: "
                      << pharmonic::format_full(cert.first_certified()) << "\n"
                      << "most negative: " << pharmonic::format_full(worst->value_direct)
                      << " at s=" << pharmonic::format_full(worst->s) << "\n";
        } else {
            std::cout << "no certified sign violations in the scanned range\n";
        }
    }
    return kExitOk;
}

struct VarySpec {
    std::string name;
    std::vector<double> values;
};

VarySpec parse_vary(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--vary expects name=lo:hi:count");
    VarySpec spec;
    spec.name = text.substr(0, eq);
    const std::string rest = text.substr(eq + 1);
    std::vector<std::string> parts;
    std::stringstream stream(rest);
    std::string item;
    while (std::getline(stream, item, ':')) parts.push_back(item);
    if (parts.size() == 1) {
        spec.values.push_back(std::stod(parts[0]));
    } else if (parts.size() == 3) {
        const double lo = std::stod(parts[0]);
        const double hi = std::stod(parts[1]);
        const int count = std::stoi(parts[2]);
        if (count < 1) throw std::invalid_argument("--vary count must be >= 1");
        for (int i = 0; i < count; ++i) {
            spec.values.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
        }
    } else {
        throw std::invalid_argument("--vary expects name=lo:hi:count");
    }
    return spec;
}

std::string sanitize_cell(std::string text) {
    std::replace(text.begin(), text.end(), ',', ';');
    std::replace(text.begin(), text.end(), '\n', ' ');
    return text;
}

int cmd_sweep(const Options& opt) {
    const pharmonic::RunConfig base = effective_config(opt);
    std::vector<VarySpec> specs;
    for (const auto& text : opt.vary) specs.push_back(parse_vary(text));
    if (specs.empty()) {
        std::cerr << "sweep: no --vary specs given\n";
        return kExitValidation;
    }

    // Cartesian product in the order the specs were given.
    std::vector<pharmonic::RunConfig> grid;
    grid.push_back(base);
    for (const auto& spec : specs) {
        std::vector<pharmonic::RunConfig> next;
        for (const auto& config : grid) {
            for (double value : spec.values) {
                pharmonic::RunConfig point = config;
                if (spec.name == "n") point.model.n = static_cast<int>(std::lround(value));
                else if (spec.name == "p") point.model.p = value;
                else if (spec.name == "delta") point.model.delta = value;
                else if (spec.name == "sigma") point.model.sigma = value;
                else if (spec.name == "alpha") point.model.alpha = value;
                else throw std::invalid_argument("--vary: unknown parameter " + spec.name);
                next.push_back(point);
            }
        }
        grid = std::move(next);
    }

    std::vector<std::string> rows(grid.size());
    std::atomic<std::size_t> cursor{0};
    const std::size_t worker_count =
        opt.workers > 0 ? opt.workers
                        : std::max(1u, std::thread::hardware_concurrency());

    auto work = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= grid.size()) return;
            const pharmonic::RunConfig& config = grid[i];
            std::ostringstream row;
            row << config.model.n << "," << pharmonic::format_full(config.model.p) << ","
                << pharmonic::format_full(config.model.delta) << ","
                << pharmonic::format_full(config.model.sigma) << ","
                << pharmonic::format_full(config.model.alpha) << ",";
            const pharmonic::ValidationReport report =
                pharmonic::validate_parameters(config.model);
            if (!report.all_passed) {
                row << "0,infeasible,,,";
                rows[i] = row.str();
                continue;
            }
            row << "1,";
            try {
                SolvedRun run = solve_from_config(config);
                row << pharmonic::to_string(run.solution.status) << ","
                    << pharmonic::format_full(run.solution.f().back()) << ",";
                const double hi = std::min(config.scan_hi, run.solution.s_back());
                const pharmonic::Certificate cert =
                    pharmonic::scan_sign(run.solution, run.profile,
                                         std::max(config.scan_lo, run.solution.s_front()), hi,
                                         config.samples_per_decade);
                if (cert.any())
                    row << pharmonic::format_full(cert.first_certified());
                row << ",";
                try {
                    const pharmonic::PowerLawFit fit = pharmonic::fit_decay_exponent(
                        run.solution, run.solution.s_back() / 100.0, run.solution.s_back());
                    row << pharmonic::format_full(fit.slope);
                } catch (const std::exception&) {
                    // window too small; leave the cell empty
                }
            } catch (const std::exception& e) {
                row << "error: " << sanitize_cell(e.what()) << ",,,";
            }
            rows[i] = row.str();
        }
    };

    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < worker_count; ++w) workers.emplace_back(work);
    for (auto& worker : workers) worker.join();

    std::string csv = "n,p,delta,sigma,alpha,feasible,status,c_hat,first_certified,fitted_exponent\n";
    for (const auto& row : rows) csv += row + "\n";
    write_file(base.out_dir, "sweep.csv", csv);
    if (!base.quiet) {
        std::cout << "swept " << grid.size() << " parameter points -> " << base.out_dir
                  << "/sweep.csv\n";
    }
    return kExitOk;
}

int cmd_plot_data(const Options& opt) {
    if (opt.solution_path.empty()) {
        std::cerr << "plot-data: --solution FILE is required\n";
        return kExitValidation;
    }
    const pharmonic::RunConfig config = effective_config(opt);
    const pharmonic::ProfileSolution sol = load_solution(opt.solution_path);
    const pharmonic::ConvexProfile profile = certify_profile_for(sol, config);

    const std::string header(pharmonic::kDiagnosticsHeader);
    std::vector<std::string> names;
    {
        std::stringstream stream(header);
        std::string item;
        while (std::getline(stream, item, ',')) names.push_back(item);
    }
    const std::string csv = pharmonic::render_diagnostics_csv(sol, profile);

    // Column-indexed rows of the diagnostics table.
    std::vector<std::vector<std::string>> table;
    {
        std::stringstream stream(csv);
        std::string line;
        std::getline(stream, line);  // header
        while (std::getline(stream, line)) {
            std::vector<std::string> cells;
            std::stringstream row(line);
            std::string cell;
            while (std::getline(row, cell, ',')) cells.push_back(cell);
            table.push_back(std::move(cells));
        }
    }

    std::stringstream requested(opt.columns);
    std::string column;
    bool first_stream = true;
    while (std::getline(requested, column, ',')) {
        if (column == "s") continue;
        const auto it = std::find(names.begin(), names.end(), column);
        if (it == names.end()) {
            std::cerr << "plot-data: unknown column '" << column << "' (available: " << header
                      << ")\n";
            return kExitValidation;
        }
        const std::size_t index = static_cast<std::size_t>(it - names.begin());
        if (!first_stream) std::cout << "\n";
        first_stream = false;
        std::cout << "# s " << column << "\n";
        for (const auto& row : table) std::cout << row[0] << " " << row[index] << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rotationally symmetric p-harmonic maps: profile solver, asymptotics and "
                 "convex-composition sign certification"};
    app.require_subcommand(1);

    Options opt;
    app.add_option("--config", opt.config_path, "config file (key-value text or JSON)");
    app.add_option("--out", opt.out_dir, "output directory (overrides config)");
    app.add_option("--format", opt.format, "output format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--quiet", opt.quiet, "suppress normal output");

    CLI::App* validate = app.add_subcommand("validate", "check parameter admissibility");
    CLI::App* solve = app.add_subcommand("solve", "integrate the profile equation");
    CLI::App* asymptotics =
        app.add_subcommand("asymptotics", "limits, decay exponent and energy ratio");
    CLI::App* certify =
        app.add_subcommand("certify", "scan for certified negative values of Delta_p(H o F)");
    CLI::App* sweep = app.add_subcommand("sweep", "grid sweep over model parameters");
    CLI::App* plot = app.add_subcommand("plot-data", "emit two-column data streams");

    asymptotics->add_option("--solution", opt.solution_path, "solution.json from a prior solve");
    certify->add_option("--solution", opt.solution_path, "solution.json from a prior solve");
    certify->add_flag("--analyze-terms", opt.analyze_terms_flag,
                      "also fit decay rates of the certification terms");
    plot->add_option("--solution", opt.solution_path, "solution.json from a prior solve");
    plot->add_option("--columns", opt.columns, "comma list of diagnostics columns");
    sweep->add_option("--vary", opt.vary, "parameter grid spec name=lo:hi:count (repeatable)");
    sweep->add_option("--workers", opt.workers, "worker threads (default: hardware)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return cmd_validate(opt);
        if (solve->parsed()) return cmd_solve(opt);
        if (asymptotics->parsed()) return cmd_asymptotics(opt);
        if (certify->parsed()) return cmd_certify(opt);
        if (sweep->parsed()) return cmd_sweep(opt);
        if (plot->parsed()) return cmd_plot_data(opt);
    } catch (const std::ios_base::failure& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    }
    return kExitOk;
}
