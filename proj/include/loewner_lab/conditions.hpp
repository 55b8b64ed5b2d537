#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "loewner_lab/geometry.hpp"
#include "loewner_lab/lattice.hpp"
#include "loewner_lab/models.hpp"

namespace ll {

// --- unforced crossings -----------------------------------------------------

// Site-level picture of a slit domain: unexplored interior sites are free,
// every other site is blocked and labelled with the boundary side it belongs
// to (1: arc1 / open / wired side, 2: arc2 / closed / free side).
struct DomainState {
    const DiscreteDomain* domain = nullptr;
    std::vector<std::int8_t> label;  // 0 free, 1 or 2 blocked

    bool free(int s) const { return label[s] == 0; }
};

DomainState time_zero_state(const DiscreteDomain& d);
// State of a hexagonal exploration after point index `tau` of its curve.
DomainState exploration_state(const HexExploration& ex, std::size_t tau);

struct AvoidableSet {
    bool empty = true;                       // A^u is empty
    bool inner_meets_boundary = false;
    std::vector<std::vector<int>> components;  // free sites of U_tau cap A
    std::vector<std::uint8_t> avoidable;       // per component
    std::vector<int> component_of;             // per site, -1 outside
    Point tip, target;
};

// Components of the free sites strictly inside the annulus.  A component is
// forced when it touches blocked sites of both labels (it then separates the
// tip from the target); the others are avoidable.  When the inner circle stays
// clear of the blocked sites A^u is empty.
AvoidableSet avoidable_components(const DomainState& st, const Annulus& a, Point tip, Point target);

// Rewinds a finished exploration to point index `tau`.
HexExploration rewind_exploration(const HexExploration& full, std::size_t tau);

// Reference check by flood fill: does removing component k disconnect the free
// sites next to the tip from the free sites next to the target?
bool component_disconnects(const DomainState& st, const AvoidableSet& s, int k);

// Does `future` (the curve from the stopping time on) contain a minimal
// crossing of the annulus that runs inside avoidable components only?
bool unforced_crossing(const std::vector<Point>& future, const Annulus& a, const DomainState& st,
                       const AvoidableSet& s);

// --- reports ----------------------------------------------------------------

struct Interval {
    double lo = 0.0, hi = 1.0;
};

// Wilson score interval at 95%; zero hits use the rule-of-three bound 3/n.
Interval wilson_interval(long trials, long hits, double z = 1.96);

struct ReportRow {
    std::string model, shape;
    double z0x = 0.0, z0y = 0.0, r = 0.0, R = 0.0;
    std::string tau_rule;
    long trials = 0, hits = 0;
    double ci_lo = 0.0, ci_hi = 1.0;

    void refresh_ci() {
        Interval iv = wilson_interval(trials, hits);
        ci_lo = iv.lo;
        ci_hi = iv.hi;
    }
    double rate() const { return trials > 0 ? double(hits) / double(trials) : 0.0; }
};

struct PowerLawFit {
    double K = 0.0, Delta = 0.0;
    double se = 0.0;  // standard error of Delta
    double ci_lo = 0.0, ci_hi = 0.0;
    std::vector<double> residuals;
    bool degenerate = false;  // every cell had zero hits: Delta = +inf
};

struct CrossingReport {
    std::vector<ReportRow> rows;
    std::string verdict;  // PASS | FAIL
    double C = 0.0;
    long min_trials = 30;
    long base_seed = 0;
    long samples = 0;
    int conclusive = 0, inconclusive = 0, failing = 0;
    std::optional<PowerLawFit> fit;
    std::map<std::string, std::string> notes;
};

// Sets verdict and cell tallies: PASS iff every conclusive cell with R >= C r
// has its upper bound below 1/2.  Cells with fewer than min_trials trials are
// inconclusive and never count towards PASS or FAIL.
void assign_verdict(CrossingReport& rep);

// Count-additive merge; CIs are recomputed from the merged counts.
CrossingReport merge_reports(const CrossingReport& a, const CrossingReport& b);

void write_report_csv(std::ostream& out, const CrossingReport& rep);
CrossingReport read_report_csv(std::istream& in);
std::string report_summary_json(const CrossingReport& rep);

// --- condition tests ----------------------------------------------------------

struct G2Options {
    double C = 8.0;
    std::vector<double> inner_radii{1.5};
    std::string tau_rule = "hit";   // "hit" or "t0"
    std::string estimator = "auto";  // auto | restart | continuation
    int samples = 100;
    std::uint64_t seed = 1;
    long min_trials = 30;
    double center_spacing = 0.5;  // in units of R
    int workers = 1;
    std::string shape = "domain";
};

// Annulus centres on a grid of spacing center_spacing*R over the bounding box
// of the domain; annuli wider than the domain are dropped.
std::vector<Annulus> annulus_grid(const DiscreteDomain& d, const std::vector<double>& inner,
                                  const std::vector<double>& outer, double center_spacing);

CrossingReport test_condition_G2(const ModelSpec& base, const G2Options& opt);
CrossingReport test_condition_G2_serial(const ModelSpec& base, const G2Options& opt);

// --- power laws and constants -----------------------------------------------

struct PowerLawRow {
    double ratio = 0.0;  // r/R
    long trials = 0;     // 0: `p` is taken as exact with unit weight
    long hits = 0;
    double p = 0.0;
};

// Weighted least squares of log p on log(r/R): p = K (r/R)^Delta.  Counted
// rows use delta-method weights n p/(1-p); zero-hit rows are clipped to 3/n.
PowerLawFit fit_power_law(const std::vector<PowerLawRow>& rows);
// Sums the report rows that share a ratio r/R.
std::vector<PowerLawRow> pool_by_ratio(const std::vector<ReportRow>& rows);

struct G3Constants {
    double K, Delta;
};
G3Constants g2_to_g3(double C);
double g2_to_c2(double C);
double c3_to_g2(double K, double eps);
double g3_to_g2(double K, double Delta);

// Named entry point: "G2->G3" {C}, "G2->C2" {C}, "C3->G2" {K, eps}, "G3->G2" {K, Delta}.
std::map<std::string, double> convert_constants(const std::string& direction,
                                                const std::map<std::string, double>& in);

// --- multiple crossings -------------------------------------------------------

ReportRow count_multiple_crossings(const std::vector<Curve>& ensemble, const Annulus& a, int n);

// --- quadrilaterals -----------------------------------------------------------

// Polygonal topological quadrilateral: boundary vertices counterclockwise and
// the indices of the four corners; arc S_k runs from corner k to corner k+1.
struct TopQuad {
    std::vector<Point> boundary;
    std::array<int, 4> corner{0, 0, 0, 0};
    double h0 = 0.0;  // base mesh size; 0 picks a quarter of the shortest arc
    mutable std::map<int, double> cache;
};

void validate_quad(const TopQuad& q);
TopQuad rectangle_quad(double L, double H);
TopQuad cut_annulus_quad(double r, double R, int segments = 512);
TopQuad l_shaped_quad();
TopQuad scaled_quad(const TopQuad& q, double s);

// Discrete extremal length of the curves joining S0 and S2: the reciprocal of
// the Dirichlet energy of the potential that is 0 on S0, 1 on S2 and
// insulated on S1, S3, on a square grid of spacing h0/refinement.
double modulus_quad(const TopQuad& q, int refinement);

// --- six-arm event --------------------------------------------------------------

struct SixArmWitness {
    std::size_t s = 0, t = 0;  // fjord run gamma[s, t]
    Point c0, c1;              // crosscut endpoints
    bool boundary_mouth = false;
};

// Looks for a crosscut of diameter <= r of the slit domain at time s, at
// distance > rho from b, that cuts off a later sub-curve of diameter >= R.
std::optional<SixArmWitness> detect_six_arm(const Curve& c, const std::vector<Point>& boundary,
                                            Point b, double r, double R, double rho);

}  // namespace ll
