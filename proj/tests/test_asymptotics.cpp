#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pharmonic/asymptotics.hpp"
#include "test_support.hpp"

using namespace pharmonic;
using testsupport::canonical_params;
using testsupport::canonical_run_1e4;
using testsupport::canonical_run_1e5;
using testsupport::family_j;
using testsupport::flat_warp;

TEST_CASE("power-law fit recovers an exact law to machine precision") {
    std::vector<double> x, y;
    for (int i = 0; i < 200; ++i) {
        const double s = std::pow(10.0, 1.0 + 3.0 * i / 199.0);
        x.push_back(s);
        y.push_back(2.0 * std::pow(s, -4.5));
    }
    const PowerLawFit fit = fit_power_law(x, y);
    CHECK(fit.slope == doctest::Approx(-4.5).epsilon(1e-12));
    CHECK(fit.prefactor == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.max_residual <= 1e-12);
    CHECK(fit.count == 200);
}

TEST_CASE("power-law fit rejects bad input") {
    std::vector<double> x{1.0, 2.0}, y{1.0, -1.0};
    CHECK_THROWS_AS(fit_power_law(x, y), std::invalid_argument);
    std::vector<double> one{1.0};
    CHECK_THROWS_AS(fit_power_law(one, one), std::invalid_argument);
}

TEST_CASE("flat identity run: slope of f' is zero") {
    // f' is identically 1; fit over two decades of the flat run
    SolverConfig config;
    config.s_start = 1e-6;
    config.s_max = 1e3;
    const ProfileSolution sol =
        integrate(canonical_params(), flat_warp(), flat_warp(), config);
    const PowerLawFit fit = fit_decay_exponent(sol, 10.0, 1e3);
    CHECK(std::abs(fit.slope) <= 1e-9);
    CHECK(fit.prefactor == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("estimate_limits requires a long enough run") {
    SolverConfig config;
    config.s_max = 500.0;
    const ProfileSolution sol = integrate(canonical_params(), testsupport::family_g(),
                                          testsupport::family_j(), config);
    CHECK_THROWS_AS(estimate_limits(sol), std::invalid_argument);
}

TEST_CASE("estimate_limits on the canonical run: c_hat converged at 1e4, P only at 1e5") {
    const LimitEstimates at4 = estimate_limits(canonical_run_1e4(), false);
    CHECK(at4.c_hat > 0.0);
    CHECK(at4.c_hat_converged);
    CHECK(at4.c_hat_uncertainty <= 1e-2 * at4.c_hat);
    CHECK_FALSE(at4.P_converged);  // Q still climbing like -s^(-1/2) toward P
    CHECK_THROWS_AS(estimate_limits(canonical_run_1e4()), std::runtime_error);

    const LimitEstimates at5 = estimate_limits(canonical_run_1e5());
    CHECK(at5.P_converged);
    CHECK(at5.P == doctest::Approx(0.3318407909).epsilon(1e-7));
    CHECK(at5.c_hat == doctest::Approx(0.2247271253).epsilon(1e-7));
}

TEST_CASE("doubling s_max moves c_hat by less than its uncertainty") {
    const LimitEstimates at4 = estimate_limits(canonical_run_1e4(), false);
    const LimitEstimates at5 = estimate_limits(canonical_run_1e5(), false);
    CHECK(std::abs(at5.c_hat - at4.c_hat) <= std::max(at4.c_hat_uncertainty, 1e-15));
}

TEST_CASE("theoretical_D: algebraic special cases") {
    const ModelParameters& params = canonical_params();

    SUBCASE("C1=1 reduces to P (n j(c_hat)^2)^(-(p-2)/2)") {
        const double D = theoretical_D(0.33, 0.22, params, family_j());
        const double jc = family_j().value(0.22);
        CHECK(D == doctest::Approx(0.33 * std::pow(params.n * jc * jc, -0.25)).epsilon(1e-14));
    }
    SUBCASE("p=2 kills the energy factor") {
        ModelParameters p2 = params;
        p2.p = 2.0;
        const double D = theoretical_D(0.33, 0.22, p2, family_j(), 2.0);
        CHECK(D == doctest::Approx(0.33 * std::pow(2.0, -2.0)).epsilon(1e-14));
    }
    SUBCASE("degenerate j(c_hat) rejected") {
        CHECK_THROWS_AS(theoretical_D(0.33, 0.22, params, flat_warp(), 0.0), std::domain_error);
        // flat warp: j(c)=c>0 is fine, but c_hat=0 is not
        CHECK_THROWS_AS(theoretical_D(0.33, 0.0, params, family_j()), std::domain_error);
    }
}

TEST_CASE("theorem family: D from the run matches the fitted prefactor at 1e5") {
    const ProfileSolution& sol = canonical_run_1e5();
    const LimitEstimates limits = estimate_limits(sol);
    const double D = theoretical_D(limits.P, limits.c_hat, canonical_params(), family_j());
    CHECK(D == doctest::Approx(0.6418540).epsilon(1e-6));

    const PowerLawFit fit = fit_decay_exponent(sol, 1e3, 1e5);
    CHECK(testsupport::rel_err(fit.slope, -4.5) <= 0.10);
    CHECK(testsupport::rel_err(fit.prefactor, D) <= 0.10);
}

TEST_CASE("fit window moves outward: deviation shrinks") {
    const ProfileSolution& sol = canonical_run_1e5();
    const PowerLawFit inner = fit_decay_exponent(sol, 1e1, 1e3);
    const PowerLawFit outer = fit_decay_exponent(sol, 1e3, 1e5);
    CHECK(std::abs(outer.slope - (-4.5)) <= std::abs(inner.slope - (-4.5)));
}

TEST_CASE("fit_decay_exponent rejects insufficient windows") {
    const ProfileSolution& sol = canonical_run_1e4();
    CHECK_THROWS_AS(fit_decay_exponent(sol, 1e2, 1e3), std::invalid_argument);   // one decade
    CHECK_THROWS_AS(fit_decay_exponent(sol, 1e5, 1e7), std::invalid_argument);   // empty
}

TEST_CASE("P dominates Q along the run") {
    const ProfileSolution& sol = canonical_run_1e4();
    const LimitEstimates limits = estimate_limits(sol, false);
    for (double q : sol.monotone_quantity()) {
        CHECK(limits.P >= q - 1e-8 * (1.0 + std::abs(q)));
    }
}

TEST_CASE("energy ratio: theorem run is close to 1, flat run deviates by 1/n") {
    const EnergyRatioCheck theorem = check_energy_ratio(canonical_run_1e4(), 1e3, 1e4);
    CHECK(theorem.max_deviation <= 0.02);

    SolverConfig config;
    config.s_start = 1e-6;
    config.s_max = 1e3;
    const ProfileSolution flat =
        integrate(canonical_params(), flat_warp(), flat_warp(), config);
    const EnergyRatioCheck ratio = check_energy_ratio(flat, 10.0, 1e3);
    // f'^2 g^2/(n j^2) = 1/n exactly for the identity profile
    CHECK(ratio.max_deviation == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("full asymptotics report on the 1e5 run") {
    const AsymptoticsReport report = build_asymptotics_report(canonical_run_1e5());
    CHECK(report.C1 == 1.0);  // exact for the built-in family
    CHECK_FALSE(report.C1_estimated);
    CHECK(report.exponent_theory == doctest::Approx(-4.5));
    CHECK(report.window_lo == doctest::Approx(1e3));
    CHECK(report.window_hi == doctest::Approx(1e5));
    CHECK(report.exponent_rel_dev <= 0.10);
    CHECK(report.prefactor_rel_dev <= 0.10);
    CHECK(report.energy.max_deviation <= 0.02);
    CHECK(report.limits.P_converged);
}

TEST_CASE("asymptotics report estimates C1 for generic warps") {
    // flat domain warp with delta declared as 1 is outside the family; the
    // report should then estimate C1 = g(s_max)/s_max^delta
    SolverConfig config;
    config.s_start = 1e-6;
    config.s_max = 2e3;
    config.allow_inadmissible = true;
    ModelParameters params = canonical_params();
    params.delta = 1.0;  // matches g(s) = s so that C1 = 1 is the right answer
    const ProfileSolution sol = integrate(params, flat_warp(), family_j(), config);
    const AsymptoticsReport report =
        build_asymptotics_report(sol, 20.0, 2e3, 0.0, /*require_converged=*/false);
    CHECK(report.C1_estimated);
    CHECK(report.C1 == doctest::Approx(1.0).epsilon(1e-12));
}
