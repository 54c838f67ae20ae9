#pragma once

/**
 * \file experiment.hpp
 * \brief Monte-Carlo orchestration, sweep records and CSV persistence.
 *
 * Realization r uses channel seed base_seed + r. Work items run on a pool of threads and
 * results are stored by item index, so every output is independent of the thread count.
 * Wall-clock timing is kept in memory only and never written to CSV.
 */

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "isapt/baseline.hpp"
#include "isapt/config.hpp"
#include "isapt/sca_optimizer.hpp"

namespace isapt {

/// Runs fn(0..count-1) on up to `parallel` threads. Exceptions are rethrown in index order.
void run_indexed(std::size_t count, int parallel, const std::function<void(std::size_t)>& fn);

/// One realization at one sweep point.
struct SeedSample {
    std::uint64_t seed = 0;
    double objective = 0.0;  ///< [W]; NaN when no feasible design exists
    double tau = 0.0;        ///< pulse duration used [s]; NaN when infeasible
    int iterations = 0;
    double rank_ratio = 0.0;
    double mixing_rho = 0.0;  ///< baseline only; NaN for the proposed scheme
    std::string status;
};

struct SweepPoint {
    std::vector<double> axis_values;
    std::string scheme;
    std::vector<SeedSample> samples;

    int feasible_count() const;
    double feasible_fraction() const;
    /// Mean over feasible samples; NaN if there are none.
    double mean() const;
    /// Standard error of the mean over feasible samples; NaN below two samples.
    double standard_error() const;
    double mean_iterations() const;
    double max_rank_ratio() const;
};

struct SweepRecord {
    std::string kind;
    std::string config_hash;
    std::vector<std::string> axis_names;
    std::vector<SweepPoint> points;
    double seconds = 0.0;  ///< wall-clock, not persisted
};

/// Long format: one row per (point, scheme, seed), with '#' header lines.
void write_sweep_samples(std::ostream& out, const SweepRecord& record);
SweepRecord read_sweep_samples(std::istream& in);

/// One row per (point, scheme) with mean, standard error and feasible fraction.
void write_sweep_summary(std::ostream& out, const SweepRecord& record);

/// Concatenates the samples of matching points.
/// \throws ConfigError if the records differ in config hash, kind or axes.
SweepRecord aggregate(const std::vector<SweepRecord>& records);

/// Worst-case solver health over a set of runs.
struct RunDiagnostics {
    long fixed_tau_solves = 0;
    long failed_solves = 0;
    long rank_exceptions = 0;       ///< status=optimal solves above the rank tolerance
    double max_rank_ratio = 0.0;    ///< over status=optimal solves
    double max_kkt_residual = 0.0;
    double worst_ascent = 0.0;      ///< most negative SCA step
    double worst_slack = 0.0;       ///< most negative relative constraint slack at the design
    int designs = 0;

    void add(const DesignSolution& d, double rank_tolerance);
    void merge(const RunDiagnostics& other);
};

struct Fig2Curve {
    double p_avg = 0.0;
    std::vector<double> taus;
    std::vector<double> mean;
    std::vector<double> standard_error;
    std::vector<double> feasible_fraction;
    double tau_star = 0.0;  ///< argmax of the mean curve, smallest tau on ties
    double peak = 0.0;
    double duty_cycle = 0.0;
};

struct Fig2Result {
    SweepRecord record;
    std::vector<Fig2Curve> curves;
    RunDiagnostics diagnostics;
};

/// Seed-averaged harvested power over the pulse-duration grid for each average-power budget.
Fig2Result run_fig2(const ExperimentConfig& config);

struct Fig3Result {
    SweepRecord record;  ///< axes r_min_m, p_p_w, r_hat_max_m; schemes proposed and baseline
    RunDiagnostics diagnostics;
    long dominance_violations = 0;  ///< realizations where the baseline beats the proposed design
    double worst_dominance_gap = 0.0;
};

/// Range-accuracy trade-off for each (r_min, p_p) case, both schemes at their own best tau.
Fig3Result run_fig3(const ExperimentConfig& config);

struct GenericSweepResult {
    SweepRecord record;
    RunDiagnostics diagnostics;
};

/// Cartesian product of config.sweep_axes, schemes per config.scheme.
GenericSweepResult run_sweep(const ExperimentConfig& config);

/// Writes the files of a run into config.out_dir and returns their paths.
std::vector<std::string> write_fig2(const ExperimentConfig& config, const Fig2Result& result);
std::vector<std::string> write_fig3(const ExperimentConfig& config, const Fig3Result& result);
std::vector<std::string> write_sweep(const ExperimentConfig& config, const GenericSweepResult& result);

struct SolveOutcome {
    IsaptInstance instance;
    DesignSolution design;
    bool has_baseline = false;
    BaselineDesign baseline;
};

/// One realization (seed) through the full grid search.
/// \throws InfeasibleError or NumericalError as grid_search.
SolveOutcome run_solve(const ExperimentConfig& config, std::uint64_t seed);

void write_solve_report(std::ostream& out, const ExperimentConfig& config, const SolveOutcome& outcome);
void write_solve_curve(std::ostream& out, const ExperimentConfig& config, const SolveOutcome& outcome);
void write_channels(std::ostream& out, const ExperimentConfig& config, const ChannelSet& channels);
void write_beam(std::ostream& out, const ExperimentConfig& config, const SolveOutcome& outcome);

/// "%.17g" formatting; "nan" and "inf" for non-finite values.
std::string format_number(double value);

}  // namespace isapt
