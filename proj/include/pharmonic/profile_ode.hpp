#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pharmonic/geometry.hpp"
#include "pharmonic/operators.hpp"

namespace pharmonic {

/// Integration settings for the radial profile equation.
///
/// The equation is singular at s = 0 (the domain warp vanishes there), so
/// integration starts from first-order series data at s_start > 0. abs_tol
/// is the absolute error floor for the profile value f; the derivative
/// component is controlled in relative terms only, since f' decays through
/// many orders of magnitude and any fixed absolute floor would erase the
/// decay tail. max_step_fraction caps the step at a fixed fraction of the
/// current radius, which keeps node spacing fine enough for the
/// finite-difference diagnostics on f''.
struct SolverConfig {
    double s_max = 1.0e4;
    double rel_tol = 1.0e-9;
    double abs_tol = 1.0e-12;
    double s_start = 1.0e-10;
    std::size_t max_steps = 2000000;
    std::size_t store_stride = 1;
    double max_step_fraction = 0.01;
    bool allow_inadmissible = false;  // run even if validate_parameters fails

    void validate() const;  // throws std::invalid_argument

    bool operator==(const SolverConfig&) const = default;
};

enum class SolverStatus {
    success,
    fprime_vanished,         // f' reached 0: theorem guarantees f' > 0, so this
                             // flags numerical failure or inadmissible data
    degenerate_coefficient,  // second-derivative solve degenerated
    step_budget_exhausted,
    step_underflow,
};

std::string_view to_string(SolverStatus status);

struct SolverStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
    double last_step = 0.0;
    double max_residual = 0.0;  // max |p_tension_residual| over stored nodes
};

/// Dense radial profile produced by integrate(). Nodes are strictly
/// increasing with s.front() == s_start; f'' at nodes is recomputed from the
/// algebraic relation, so stored states are exactly on-shell. Immutable
/// after construction and safe to share across threads.
class ProfileSolution {
public:
    SolverStatus status = SolverStatus::success;
    std::string message;
    SolverStats stats;

    const ModelParameters& params() const { return params_; }
    const WarpingFunction& domain_warp() const { return g_; }
    const WarpingFunction& target_warp() const { return j_; }
    const SolverConfig& config() const { return config_; }

    std::size_t size() const { return s_.size(); }
    const std::vector<double>& s() const { return s_; }
    const std::vector<double>& f() const { return f_; }
    const std::vector<double>& f1() const { return f1_; }
    const std::vector<double>& f2() const { return f2_; }

    double s_front() const { return s_.front(); }
    double s_back() const { return s_.back(); }

    PointState node(std::size_t i) const { return {s_[i], f_[i], f1_[i], f2_[i]}; }

    /// Cubic Hermite interpolation of (f, f') on the bracketing interval;
    /// f'' is recomputed from the algebraic relation at the interpolated
    /// state rather than interpolated, so returned states are on-shell.
    /// Throws std::out_of_range outside [s_front, s_back].
    PointState evaluate(double s) const;

    /// Q(s_i) = g(s_i)^n |dF|^(p-2)(s_i) f'(s_i), non-decreasing along any
    /// positive solution; approaches a finite limit when the warps satisfy
    /// the decay hypotheses.
    std::vector<double> monotone_quantity() const;
    double monotone_quantity_at(std::size_t i) const;

    /// Reassembles a solution from stored arrays (file loader, synthetic tests).
    static ProfileSolution assemble(ModelParameters params, WarpingFunction g, WarpingFunction j,
                                    SolverConfig config, std::vector<double> s,
                                    std::vector<double> f, std::vector<double> f1,
                                    std::vector<double> f2, SolverStatus status,
                                    std::string message, SolverStats stats);

private:
    friend ProfileSolution integrate(const ModelParameters&, const WarpingFunction&,
                                     const WarpingFunction&, const SolverConfig&);
    ModelParameters params_;
    WarpingFunction g_, j_;
    SolverConfig config_;
    std::vector<double> s_, f_, f1_, f2_;

    std::size_t locate(double s) const;
};

/// First-order series data at the start radius: (alpha * s_start, alpha).
/// The induced global error is validated by start_consistency_check.
std::pair<double, double> series_start(const ModelParameters& params, const WarpingFunction& g,
                                       const WarpingFunction& j, double s_start);

/// Adaptive embedded Runge-Kutta (Dormand-Prince 5(4)) integration of the
/// first-order system (f, f') from series data at s_start up to s_max, with
/// PI step-size control. Terminates early with a diagnostic status if f'
/// reaches zero, the second-derivative solve degenerates, the step budget is
/// exhausted, or the step size underflows. Throws std::invalid_argument if
/// the parameters fail validation and config.allow_inadmissible is not set.
ProfileSolution integrate(const ModelParameters& params, const WarpingFunction& g,
                          const WarpingFunction& j, const SolverConfig& config);

/// Richardson-style start validation: integrates with s_start and s_start/2
/// and compares f at s_check = min(1, s_max). The series truncation at the
/// singular origin leaves a persistent relative error proportional to
/// s_start, so the difference bounds the start-induced error.
struct StartConsistency {
    double s_check = 0.0;
    double difference = 0.0;
    double bound = 0.0;  // 10 * rel_tol
    bool passed = false;
};

StartConsistency start_consistency_check(const ModelParameters& params, const WarpingFunction& g,
                                         const WarpingFunction& j, const SolverConfig& config);

}  // namespace pharmonic
