#pragma once

#include <cmath>
#include <iosfwd>
#include <string>
#include <vector>

#include "loewner_lab/common.hpp"
#include "loewner_lab/geometry.hpp"

namespace ll {

// Capacity time uses the normalization g_t(z) = z + 2t/z + O(1/z^2).
struct DrivingFunction {
    std::vector<double> times;
    std::vector<double> values;

    double at(double t) const;  // piecewise-linear interpolation
    double horizon() const { return times.empty() ? 0.0 : times.back(); }
};

void validate_driving(const DrivingFunction& w);

enum class CapacityMethod { Zipper, HarmonicOracle };

struct CapacityReport {
    double hcap = 0.0;
    CapacityMethod method = CapacityMethod::Zipper;
    double error = 0.0;
};

const char* to_string(CapacityMethod m);

struct GeodesicField {
    std::vector<double> ts;
    std::vector<double> ys;
    std::vector<std::vector<Point>> values;  // values[i][j] = F(ts[i], ys[j])
};

// Maps of the upper half-plane minus the vertical slit [x, x + i*y] onto
// the half-plane: phi(z) = x + sqrt((z-x)^2 + y^2), and its inverse.
Point slit_map(Point z, double x, double y);
Point slit_map_inverse(Point w, double x, double y);

// Trace on the driving function's own time grid.
Curve solve_trace_on_grid(const DrivingFunction& w, double eps);
// Trace on the uniform grid 0, dt, 2dt, ... (driving interpolated).
Curve solve_trace(const DrivingFunction& w, double dt, double eps);
inline Curve solve_trace(const DrivingFunction& w, double dt) { return solve_trace(w, dt, std::sqrt(dt)); }

// Self-convergence error bound: sup distance at common times between the
// traces at steps dt and dt/2.
double trace_error_estimate(const DrivingFunction& w, double dt, double eps);

DrivingFunction resample_driving(const DrivingFunction& w, double dt);

DrivingFunction extract_driving(const Curve& c);

// Zipper capacity of a curve; hull polygon capacity by the harmonic oracle.
// A hull polygon lists the boundary path in the closed half-plane from a
// point on the real line back to the real line.
CapacityReport hcap_curve(const Curve& c);
struct HarmonicCapacityOptions {
    double box_factor = 20.0;  // truncation box half-width over hull size
    int fine_cells = 120;      // fine cells across the hull size
    double growth = 1.08;      // geometric grading outside the fine region
};
CapacityReport hcap_polygon(const std::vector<Point>& hull, const HarmonicCapacityOptions& opt = {});

GeodesicField geodesic_to_tip(const DrivingFunction& w, double T, double Y, int nt, int ny,
                              double dt);

DrivingFunction read_driving_csv(std::istream& in);
void write_driving_csv(std::ostream& out, const DrivingFunction& w);

}  // namespace ll
