#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "loewner_lab/loewner.hpp"

namespace ll {

struct SleSpec {
    double kappa = 2.0;
    double T = 1.0;
    double dt = 1e-3;
    std::uint64_t seed = 0;
};

void validate_sle(const SleSpec& s);

// W(k dt) = sqrt(kappa) * B(k dt) with B built from the seed alone, so one
// seed couples every kappa.
DrivingFunction sample_sle_driving(const SleSpec& s);

struct ContinuityRow {
    double delta = 0.0;
    double mean = 0.0, sd = 0.0;
    double diameter = 0.0;  // mean diameter of the kappa traces
    int seeds = 0;
};

struct ContinuityTable {
    double kappa = 0.0, T = 0.0, dt = 0.0;
    std::uint64_t seed = 0;
    std::vector<ContinuityRow> rows;
    bool decreasing = false;  // mean strictly decreasing as |delta| shrinks
};

// Mean Frechet distance between coupled traces of kappa and kappa + delta,
// both cut at capacity time 0.9 T.
ContinuityTable kappa_continuity_experiment(double kappa, const std::vector<double>& deltas, double T,
                                            double dt, int seeds, std::uint64_t seed = 1,
                                            int workers = 1);

struct KappaEstimate {
    double kappa = 0.0, ci_lo = 0.0, ci_hi = 0.0;
    double ac1 = 0.0;  // lag-1 autocorrelation of increments
    int samples = 0;
    std::vector<double> times, var;  // variance profile used by the fit
};

// Variance-vs-time slope through the origin with a percentile bootstrap CI.
KappaEstimate estimate_kappa(const std::vector<DrivingFunction>& w, int bootstrap = 1000,
                             std::uint64_t seed = 1);

// Resamples onto the grid k*dt up to the shortest horizon.
std::vector<DrivingFunction> common_grid(const std::vector<DrivingFunction>& w, double dt);

struct ExceedanceRow {
    double x = 0.0;  // L/u
    long count = 0, total = 0;
    double freq = 0.0;
};

struct HolderRow {
    double alpha = 0.0;
    int level = 0;
    double within = 0.0;        // fraction of drivings with every oscillation <= (2^-n)^alpha
    double median_ratio = 0.0;  // median of max oscillation / (2^-n)^alpha
};

struct DrivingStats {
    std::vector<double> times, var, ac1;
    std::vector<ExceedanceRow> exceedance;
    double decay_c = 0.0, decay_K = 0.0, decay_residual = 0.0;
    bool decay_fitted = false;
    std::vector<HolderRow> holder;
    double exp_moment = 0.0, exp_eps = 1.0;  // E exp(eps |W_t| / sqrt t) at the horizon
    int samples = 0;
};

// Drivings must share a time grid.  Dyadic levels split the common horizon T
// and oscillations are measured in units of sqrt(T).
DrivingStats driving_tail_report(const std::vector<DrivingFunction>& w,
                                 const std::vector<double>& x_grid = {0.25, 0.5, 0.75, 1.0, 1.25, 1.5},
                                 double eps = 1.0);

void write_stats_csv(std::ostream& out, const DrivingStats& s);
std::string stats_json(const DrivingStats& s, const KappaEstimate* k = nullptr);

// The part of a lattice curve before it first leaves the disk of the given
// radius around its start, moved so that it starts at 0 and `inward` points
// up, then unzipped.
DrivingFunction initial_driving(const Curve& c, Point inward, double radius);

}  // namespace ll
