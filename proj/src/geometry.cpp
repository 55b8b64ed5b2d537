#include "loewner_lab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

namespace ll {

void validate_curve(const Curve& c) {
    if (c.points.size() < 2) throw InvalidInput("curve needs at least 2 points");
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        const Point& p = c.points[i];
        if (!std::isfinite(p.real()) || !std::isfinite(p.imag()))
            throw InvalidInput("curve point " + std::to_string(i) + " is not finite");
        if (i > 0 && p == c.points[i - 1])
            throw InvalidInput("repeated consecutive point at index " + std::to_string(i));
    }
    if (c.meta.simple && !is_simple_polyline(c.points))
        throw InvalidInput("curve marked simple but self-intersects");
}

void validate_annulus(const Annulus& a) {
    if (!(a.r > 0.0) || !(a.R > a.r)) throw InvalidInput("annulus needs 0 < r < R");
}

namespace {

double cross(Point a, Point b) { return a.real() * b.imag() - a.imag() * b.real(); }

int orient(Point a, Point b, Point c) {
    double v = cross(b - a, c - a);
    double scale = std::abs(b - a) * std::abs(c - a);
    if (std::abs(v) <= 1e-14 * scale) return 0;
    return v > 0 ? 1 : -1;
}

bool on_segment(Point a, Point b, Point p) {
    return std::min(a.real(), b.real()) - 1e-14 <= p.real() &&
           p.real() <= std::max(a.real(), b.real()) + 1e-14 &&
           std::min(a.imag(), b.imag()) - 1e-14 <= p.imag() &&
           p.imag() <= std::max(a.imag(), b.imag()) + 1e-14;
}

}  // namespace

bool segments_intersect(Point a, Point b, Point c, Point d) {
    int o1 = orient(a, b, c), o2 = orient(a, b, d);
    int o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (o1 != o2 && o3 != o4 && o1 * o2 <= 0 && o3 * o4 <= 0) {
        if (o1 != 0 || o2 != 0) return true;
    }
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

bool is_simple_polyline(const std::vector<Point>& pts) {
    const std::size_t n = pts.size();
    if (n < 3) return true;
    // bucket segments on a uniform grid sized to the mean segment length
    double mean = polyline_length(pts) / double(n - 1);
    double cell = std::max(mean, 1e-12);
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> grid;
    auto key = [](long long x, long long y) {
        return (std::uint64_t(std::uint32_t(x)) << 32) | std::uint32_t(y);
    };
    for (std::size_t i = 0; i + 1 < n; ++i) {
        Point a = pts[i], b = pts[i + 1];
        long long x0 = (long long)std::floor(std::min(a.real(), b.real()) / cell);
        long long x1 = (long long)std::floor(std::max(a.real(), b.real()) / cell);
        long long y0 = (long long)std::floor(std::min(a.imag(), b.imag()) / cell);
        long long y1 = (long long)std::floor(std::max(a.imag(), b.imag()) / cell);
        for (long long x = x0; x <= x1; ++x)
            for (long long y = y0; y <= y1; ++y) {
                auto& bucket = grid[key(x, y)];
                for (std::size_t j : bucket) {
                    if (j + 1 == i) {
                        // adjacent segments may only share their joint
                        Point c = pts[j];
                        if (orient(c, a, b) == 0 && std::real((c - a) * std::conj(b - a)) > 0)
                            return false;
                        continue;
                    }
                    if (segments_intersect(pts[j], pts[j + 1], a, b)) return false;
                }
                bucket.push_back(i);
            }
    }
    return true;
}

double diameter(const std::vector<Point>& pts) {
    double d = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, std::abs(pts[i] - pts[j]));
    return d;
}

double polyline_length(const std::vector<Point>& pts) {
    double s = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) s += std::abs(pts[i] - pts[i - 1]);
    return s;
}

std::vector<Point> resample(const std::vector<Point>& pts, double spacing) {
    if (!(spacing > 0.0)) throw InvalidInput("resample spacing must be positive");
    std::vector<Point> out;
    if (pts.empty()) return out;
    out.push_back(pts[0]);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        Point a = pts[i - 1], b = pts[i];
        double len = std::abs(b - a);
        auto k = std::max<long>(1, (long)std::ceil(len / spacing - 1e-12));
        for (long j = 1; j <= k; ++j) out.push_back(a + (b - a) * (double(j) / double(k)));
    }
    return out;
}

double discrete_frechet(const std::vector<Point>& a, const std::vector<Point>& b) {
    if (a.empty() || b.empty()) throw InvalidInput("discrete_frechet on empty sequence");
    const std::size_t m = b.size();
    std::vector<double> prev(m), cur(m);
    for (std::size_t j = 0; j < m; ++j) {
        double d = std::abs(a[0] - b[j]);
        prev[j] = j == 0 ? d : std::max(prev[j - 1], d);
    }
    for (std::size_t i = 1; i < a.size(); ++i) {
        cur[0] = std::max(prev[0], std::abs(a[i] - b[0]));
        for (std::size_t j = 1; j < m; ++j) {
            double best = std::min({prev[j], prev[j - 1], cur[j - 1]});
            cur[j] = std::max(best, std::abs(a[i] - b[j]));
        }
        std::swap(prev, cur);
    }
    return prev[m - 1];
}

double curve_distance(const Curve& c1, const Curve& c2, double refine) {
    if (c1.points.empty() || c2.points.empty()) throw InvalidInput("curve_distance on empty curve");
    if (!(refine > 0.0)) throw InvalidInput("refine must be positive");
    return discrete_frechet(resample(c1.points, refine), resample(c2.points, refine));
}

int tortuosity(const Curve& c, double l) {
    if (!(l > 0.0)) throw InvalidInput("tortuosity needs l > 0");
    if (c.points.empty()) throw InvalidInput("tortuosity on empty curve");
    // Breakpoints are taken at vertices after splitting every segment
    // longer than l, so each piece is a run of consecutive vertices.
    std::vector<Point> v = resample(c.points, l);
    const double lim = l * (1.0 + 1e-12);
    int pieces = 1;
    std::size_t start = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        bool fits = true;
        for (std::size_t j = start; j < i; ++j)
            if (std::abs(v[i] - v[j]) > lim) {
                fits = false;
                break;
            }
        if (!fits) {
            ++pieces;
            start = i - 1;
        }
    }
    return pieces;
}

namespace {

enum class Region { Inner, Ring, Outer };

Region classify(Point p, const Annulus& a) {
    double d = std::abs(p - a.z0);
    if (d <= a.r + kCrossingTol) return Region::Inner;
    if (d >= a.R - kCrossingTol) return Region::Outer;
    return Region::Ring;
}

void circle_hits(Point p, Point v, double rho, std::vector<double>& out) {
    double A = std::norm(v);
    double B = 2.0 * std::real(std::conj(v) * p);
    double C = std::norm(p) - rho * rho;
    double disc = B * B - 4 * A * C;
    if (disc < 0 || A == 0) return;
    double sq = std::sqrt(disc);
    for (double s : {(-B - sq) / (2 * A), (-B + sq) / (2 * A)})
        if (s > 0.0 && s < 1.0) out.push_back(s);
}

}  // namespace

CrossingCount count_crossings(const Curve& c, const Annulus& a) {
    validate_annulus(a);
    CrossingCount out;
    const auto& pts = c.points;
    if (pts.empty()) return out;

    // Walk the polyline, recording every visit to one of the two
    // complementary components; a crossing is a switch between them.
    bool have = false;
    Region last = Region::Ring;
    std::size_t last_idx = 0;
    auto visit = [&](Region r, std::size_t before, std::size_t after) {
        if (r == Region::Ring) return;
        if (have && r != last) {
            out.crossings.push_back({last_idx, after, true, r == Region::Outer});
        }
        have = true;
        last = r;
        last_idx = before;
    };
    visit(classify(pts[0], a), 0, 0);
    std::vector<double> ss;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        Point p = pts[i] - a.z0, v = pts[i + 1] - pts[i];
        ss.clear();
        circle_hits(p, v, a.r + kCrossingTol, ss);
        circle_hits(p, v, a.R - kCrossingTol, ss);
        std::sort(ss.begin(), ss.end());
        double prev = 0.0;
        for (double s : ss) {
            visit(classify(pts[i] + v * (0.5 * (prev + s)), a), i, i + 1);
            visit(classify(pts[i] + v * s, a), i, i + 1);
            prev = s;
        }
        visit(classify(pts[i] + v * (0.5 * (prev + 1.0)), a), i, i + 1);
        visit(classify(pts[i + 1], a), i + 1, i + 1);
    }
    out.total = int(out.crossings.size());
    return out;
}

std::string curve_to_ndjson(const Curve& c) {
    nlohmann::json j;
    j["model"] = c.meta.model;
    j["seed"] = c.meta.seed;
    j["spacing"] = c.meta.spacing;
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : c.points) pts.push_back({p.real(), p.imag()});
    j["points"] = std::move(pts);
    if (c.meta.simple) j["simple"] = true;
    return j.dump();
}

Curve curve_from_ndjson(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("bad curve record: ") + e.what());
    }
    Curve c;
    c.meta.model = j.value("model", std::string());
    c.meta.seed = j.value("seed", std::uint64_t{0});
    c.meta.spacing = j.value("spacing", 1.0);
    c.meta.simple = j.value("simple", false);
    if (!j.contains("points") || !j["points"].is_array()) throw InvalidInput("curve record lacks points");
    for (const auto& p : j["points"]) {
        if (!p.is_array() || p.size() != 2) throw InvalidInput("curve point must be [x,y]");
        c.points.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    return c;
}

std::vector<Curve> read_curves(std::istream& in) {
    std::vector<Curve> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(curve_from_ndjson(line));
    }
    return out;
}

void write_curves(std::ostream& out, const std::vector<Curve>& curves) {
    for (const auto& c : curves) out << curve_to_ndjson(c) << '\n';
}

}  // namespace ll
