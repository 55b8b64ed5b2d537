#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "loewner_lab/common.hpp"

namespace ll {

struct CurveMeta {
    std::string model;
    std::uint64_t seed = 0;
    double spacing = 1.0;
    bool simple = false;
};

struct Curve {
    std::vector<Point> points;
    CurveMeta meta;
};

struct Annulus {
    Point z0;
    double r = 0.0;
    double R = 0.0;
};

struct Crossing {
    // point-index range [first, last] of the polyline carrying the crossing
    std::size_t first = 0;
    std::size_t last = 0;
    bool minimal = true;
    bool outward = false;
};

struct CrossingCount {
    int total = 0;
    std::vector<Crossing> crossings;
};

// Throws InvalidInput unless there are >= 2 points and no repeated
// consecutive points; when meta.simple is set the polyline is also checked.
void validate_curve(const Curve& c);
void validate_annulus(const Annulus& a);

bool segments_intersect(Point a, Point b, Point c, Point d);
bool is_simple_polyline(const std::vector<Point>& pts);

double diameter(const std::vector<Point>& pts);
double polyline_length(const std::vector<Point>& pts);

// Each segment is split into ceil(len / spacing) equal pieces.
std::vector<Point> resample(const std::vector<Point>& pts, double spacing);

// Discrete Frechet distance between point sequences.
double discrete_frechet(const std::vector<Point>& a, const std::vector<Point>& b);

double curve_distance(const Curve& c1, const Curve& c2, double refine);

int tortuosity(const Curve& c, double l);

CrossingCount count_crossings(const Curve& c, const Annulus& a);

constexpr double kCrossingTol = 1e-9;

// NDJSON line <-> Curve
std::string curve_to_ndjson(const Curve& c);
Curve curve_from_ndjson(const std::string& line);
std::vector<Curve> read_curves(std::istream& in);
void write_curves(std::ostream& out, const std::vector<Curve>& curves);

}  // namespace ll
