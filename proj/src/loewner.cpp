#include "loewner_lab/loewner.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "loewner_lab/cg.hpp"

namespace ll {

double DrivingFunction::at(double t) const {
    if (times.empty()) throw InvalidInput("empty driving function");
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t k = std::size_t(it - times.begin());
    double t0 = times[k - 1], t1 = times[k];
    double s = (t - t0) / (t1 - t0);
    return values[k - 1] + s * (values[k] - values[k - 1]);
}

void validate_driving(const DrivingFunction& w) {
    if (w.times.empty() || w.times.size() != w.values.size())
        throw InvalidInput("driving function needs matching nonempty times/values");
    if (w.times.front() != 0.0) throw InvalidInput("driving times must start at 0");
    for (std::size_t i = 0; i < w.times.size(); ++i) {
        if (!std::isfinite(w.values[i]) || !std::isfinite(w.times[i]))
            throw InvalidInput("driving function has non-finite entry at " + std::to_string(i));
        if (i > 0 && !(w.times[i] > w.times[i - 1]))
            throw InvalidInput("driving times not strictly increasing at " + std::to_string(i));
    }
}

const char* to_string(CapacityMethod m) {
    return m == CapacityMethod::Zipper ? "zipper" : "harmonic-oracle";
}

namespace {

// square root with the branch in the closed upper half-plane; on the real
// axis the sign follows `hint`
Point upper_sqrt(Point v, double hint) {
    Point s = std::sqrt(v);
    if (s.imag() < 0.0 || (s.imag() == 0.0 && s.real() * hint < 0.0)) s = -s;
    return s;
}

}  // namespace

Point slit_map(Point z, double x, double y) {
    Point d = z - x;
    return x + upper_sqrt(d * d + y * y, d.real());
}

Point slit_map_inverse(Point w, double x, double y) {
    Point d = w - x;
    return x + upper_sqrt(d * d - y * y, d.real());
}

Curve solve_trace_on_grid(const DrivingFunction& w, double eps) {
    validate_driving(w);
    if (!(eps >= 1e-12)) throw ResolutionError("tip offset eps below 1e-12 is degenerate");
    const std::size_t n = w.times.size();
    Curve c;
    c.meta.model = "loewner";
    c.points.reserve(n);
    c.points.emplace_back(w.values[0], 0.0);
    // Step k uses the constant value W(t_k) on (t_{k-1}, t_k]; that map is
    // the vertical slit of height 2*sqrt(t_k - t_{k-1}).
    std::vector<double> height(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) height[k] = 2.0 * std::sqrt(w.times[k] - w.times[k - 1]);
    for (std::size_t k = 1; k < n; ++k) {
        Point z(w.values[k], eps);
        for (std::size_t j = k; j >= 1; --j) z = slit_map_inverse(z, w.values[j], height[j]);
        c.points.push_back(z);
    }
    return c;
}

DrivingFunction resample_driving(const DrivingFunction& w, double dt) {
    validate_driving(w);
    if (!(dt > 0.0)) throw InvalidInput("dt must be positive");
    DrivingFunction out;
    const double T = w.horizon();
    auto steps = (long)std::floor(T / dt * (1.0 + 1e-12));
    for (long k = 0; k <= steps; ++k) {
        double t = double(k) * dt;
        out.times.push_back(t);
        out.values.push_back(w.at(t));
    }
    return out;
}

Curve solve_trace(const DrivingFunction& w, double dt, double eps) {
    validate_driving(w);
    if (!(eps >= 1e-12)) throw ResolutionError("tip offset eps below 1e-12 is degenerate");
    return solve_trace_on_grid(resample_driving(w, dt), eps);
}

double trace_error_estimate(const DrivingFunction& w, double dt, double eps) {
    Curve a = solve_trace(w, dt, eps);
    Curve b = solve_trace(w, dt / 2, eps);
    double e = 0.0;
    for (std::size_t k = 0; k < a.points.size() && 2 * k < b.points.size(); ++k)
        e = std::max(e, std::abs(a.points[k] - b.points[2 * k]));
    return e;
}

DrivingFunction extract_driving(const Curve& c) {
    if (c.points.size() < 2) throw InvalidInput("extract_driving needs at least 2 points");
    const auto& pts = c.points;
    const double scale = std::max(1.0, std::abs(pts.back() - pts.front()));
    if (std::abs(pts[0].imag()) > 1e-12 * scale)
        throw InvalidInput("curve must start on the real axis");
    for (std::size_t k = 1; k < pts.size(); ++k)
        if (!(pts[k].imag() > 0.0))
            throw InvalidInput("curve meets the closed lower half-plane at index " +
                               std::to_string(k));

    std::vector<Point> z(pts.begin(), pts.end());
    DrivingFunction w;
    w.times.push_back(0.0);
    w.values.push_back(pts[0].real());
    double t = 0.0;
    for (std::size_t k = 1; k < z.size(); ++k) {
        Point tip = z[k];
        if (!std::isfinite(tip.real()) || !std::isfinite(tip.imag()) || !(tip.imag() > 0.0))
            throw ResolutionError("zipper image left the open half-plane at index " +
                                      std::to_string(k),
                                  long(k));
        double x = tip.real(), y = tip.imag();
        t += 0.25 * y * y;
        if (!(t > w.times.back()))
            throw ResolutionError("capacity increment underflow at index " + std::to_string(k),
                                  long(k));
        w.times.push_back(t);
        w.values.push_back(x);
        for (std::size_t j = k + 1; j < z.size(); ++j) z[j] = slit_map(z[j], x, y);
    }
    return w;
}

CapacityReport hcap_curve(const Curve& c) {
    DrivingFunction w = extract_driving(c);
    CapacityReport rep;
    rep.method = CapacityMethod::Zipper;
    rep.hcap = 2.0 * w.horizon();
    if (c.points.size() >= 5) {
        Curve coarse;
        for (std::size_t i = 0; i < c.points.size(); i += 2) coarse.points.push_back(c.points[i]);
        if (coarse.points.back() != c.points.back()) coarse.points.push_back(c.points.back());
        rep.error = std::abs(2.0 * extract_driving(coarse).horizon() - rep.hcap);
    }
    return rep;
}

namespace {

std::vector<double> graded_lines(double lo, double hi, std::vector<double> features, double hmin,
                                 double hin, double in_lo, double in_hi, double growth) {
    std::sort(features.begin(), features.end());
    auto spacing = [&](double s) {
        double d = 1e300;
        for (double f : features) d = std::min(d, std::abs(s - f));
        double h = hmin + (growth - 1.0) * d;
        if (s >= in_lo && s <= in_hi) h = std::min(h, hin);
        return h;
    };
    std::vector<double> lines{lo};
    double s = lo;
    while (s < hi) {
        double h = spacing(s);
        // look ahead so the step never jumps over a finer region
        while (spacing(s + h) < 0.7 * h) h *= 0.7;
        s = std::min(hi, s + h);
        lines.push_back(s);
    }
    for (double f : features) {
        if (f <= lo || f >= hi) continue;
        auto it = std::lower_bound(lines.begin(), lines.end(), f);
        double hloc = spacing(f);
        lines.erase(std::remove_if(lines.begin(), lines.end(),
                                   [&](double v) { return std::abs(v - f) < 0.3 * hloc; }),
                    lines.end());
        it = std::lower_bound(lines.begin(), lines.end(), f);
        lines.insert(it, f);
    }
    if (lines.front() != lo) lines.insert(lines.begin(), lo);
    if (lines.back() != hi) lines.push_back(hi);
    return lines;
}

bool in_polygon(const std::vector<Point>& poly, Point p, double tol) {
    const std::size_t n = poly.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        Point a = poly[j], b = poly[i];
        // on-edge test
        Point ab = b - a, ap = p - a;
        double len2 = std::norm(ab);
        if (len2 > 0) {
            double s = std::real(ap * std::conj(ab)) / len2;
            if (s >= -1e-12 && s <= 1 + 1e-12 && std::abs(ap - s * ab) <= tol) return true;
        } else if (std::abs(ap) <= tol) {
            return true;
        }
        if ((a.imag() > p.imag()) != (b.imag() > p.imag())) {
            double xc = a.real() + (p.imag() - a.imag()) / (b.imag() - a.imag()) * (b.real() - a.real());
            if (p.real() < xc) inside = !inside;
        }
    }
    return inside;
}

double bilinear(const std::vector<double>& xs, const std::vector<double>& ys,
                const std::vector<double>& u, Point z) {
    const std::size_t nx = xs.size();
    auto ix = std::size_t(std::upper_bound(xs.begin(), xs.end(), z.real()) - xs.begin());
    auto iy = std::size_t(std::upper_bound(ys.begin(), ys.end(), z.imag()) - ys.begin());
    ix = std::clamp<std::size_t>(ix, 1, nx - 1);
    iy = std::clamp<std::size_t>(iy, 1, ys.size() - 1);
    double x0 = xs[ix - 1], x1 = xs[ix], y0 = ys[iy - 1], y1 = ys[iy];
    double sx = (z.real() - x0) / (x1 - x0), sy = (z.imag() - y0) / (y1 - y0);
    auto at = [&](std::size_t i, std::size_t j) { return u[j * nx + i]; };
    return (1 - sx) * (1 - sy) * at(ix - 1, iy - 1) + sx * (1 - sy) * at(ix, iy - 1) +
           (1 - sx) * sy * at(ix - 1, iy) + sx * sy * at(ix, iy);
}

// E_z[Im B_tau] on a graded tensor grid, then the first sine coefficient of
// its expansion on a semicircle enclosing the hull.
double harmonic_hcap_once(const std::vector<Point>& hull, double box_factor, int fine_cells,
                          double growth) {
    double xmin = 1e300, xmax = -1e300, ymax = 0;
    std::vector<double> fx, fy{0.0};
    for (Point p : hull) {
        xmin = std::min(xmin, p.real());
        xmax = std::max(xmax, p.real());
        ymax = std::max(ymax, p.imag());
        fx.push_back(p.real());
        fy.push_back(p.imag());
    }
    const double c = 0.5 * (xmin + xmax);
    const double S = std::max(0.5 * (xmax - xmin), ymax);
    auto uniq = [&](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end(),
                            [&](double a, double b) { return std::abs(a - b) <= 1e-12 * S; }),
                v.end());
    };
    uniq(fx);
    uniq(fy);
    double gap = S;
    for (auto* v : {&fx, &fy})
        for (std::size_t i = 1; i < v->size(); ++i) gap = std::min(gap, (*v)[i] - (*v)[i - 1]);
    const double hin = 2.0 * S / fine_cells;
    // near-coincident vertex coordinates would otherwise shrink the mesh without bound
    const double hmin = std::max(std::min(hin, gap / 10.0), hin / 16.0);
    const double L = box_factor * S;
    auto xs = graded_lines(c - L, c + L, fx, hmin, hin, xmin, xmax, growth);
    auto ys = graded_lines(0.0, L, fy, hmin, hin, 0.0, ymax, growth);
    const int nx = int(xs.size()), ny = int(ys.size());

    std::vector<double> u(std::size_t(nx) * ny, 0.0);
    std::vector<int> id(std::size_t(nx) * ny, -1);
    const double tol = 1e-9 * S;
    int n = 0;
    for (int j = 1; j + 1 < ny; ++j)
        for (int i = 1; i + 1 < nx; ++i) {
            Point p(xs[i], ys[j]);
            if (ys[j] <= ymax + tol && in_polygon(hull, p, tol)) {
                u[std::size_t(j) * nx + i] = ys[j];
            } else {
                id[std::size_t(j) * nx + i] = n++;
            }
        }
    LaplaceSystem A;
    std::vector<double> b;
    b.reserve(n);
    std::vector<std::pair<int, double>> row;
    for (int j = 1; j + 1 < ny; ++j)
        for (int i = 1; i + 1 < nx; ++i) {
            std::size_t k = std::size_t(j) * nx + i;
            if (id[k] < 0) continue;
            double hw = xs[i] - xs[i - 1], he = xs[i + 1] - xs[i];
            double hs = ys[j] - ys[j - 1], hn = ys[j + 1] - ys[j];
            double cw = 0.5 * (hs + hn) / hw, ce = 0.5 * (hs + hn) / he;
            double cs = 0.5 * (hw + he) / hs, cn = 0.5 * (hw + he) / hn;
            row.clear();
            double rhs = 0.0;
            auto link = [&](std::size_t kk, double cf) {
                if (id[kk] >= 0)
                    row.emplace_back(id[kk], cf);
                else
                    rhs += cf * u[kk];
            };
            link(k - 1, cw);
            link(k + 1, ce);
            link(k - nx, cs);
            link(k + nx, cn);
            A.add_row(row, cw + ce + cs + cn);
            b.push_back(rhs);
        }
    std::vector<double> x;
    CgResult res = cg_solve(A, b, x, 1e-12, 200000);
    if (!res.converged) throw ResolutionError("harmonic capacity solve did not converge");
    for (std::size_t k = 0; k < id.size(); ++k)
        if (id[k] >= 0) u[k] = x[id[k]];

    const double rho = 1.6 * S;
    const int m = 4000;
    double acc = 0.0;
    for (int q = 0; q < m; ++q) {
        double th = M_PI * (q + 0.5) / m;
        Point z = Point(c, 0.0) + std::polar(rho, th);
        acc += bilinear(xs, ys, u, z) * std::sin(th);
    }
    acc *= M_PI / m;
    return 2.0 * rho / M_PI * acc;
}

}  // namespace

CapacityReport hcap_polygon(const std::vector<Point>& hull, const HarmonicCapacityOptions& opt) {
    if (hull.size() < 3) throw InvalidInput("hull polygon needs at least 3 vertices");
    for (Point p : hull)
        if (!std::isfinite(p.real()) || !std::isfinite(p.imag()))
            throw InvalidInput("hull polygon is unbounded");
    double ymax = 0;
    for (Point p : hull) {
        if (p.imag() < 0) throw InvalidInput("hull polygon leaves the closed half-plane");
        ymax = std::max(ymax, p.imag());
    }
    double span = std::abs(hull.back() - hull.front()) + ymax;
    if (std::abs(hull.front().imag()) > 1e-12 * span || std::abs(hull.back().imag()) > 1e-12 * span)
        throw InvalidInput("hull polygon must start and end on the real axis");
    if (!(ymax > 0)) throw InvalidInput("hull polygon has no height");

    double v1 = harmonic_hcap_once(hull, opt.box_factor, opt.fine_cells, opt.growth);
    double v2 = harmonic_hcap_once(hull, 2 * opt.box_factor, opt.fine_cells, opt.growth);
    double vf = harmonic_hcap_once(hull, 2 * opt.box_factor, 2 * opt.fine_cells, opt.growth);
    // box truncation error decays like (size/box)^2
    double extrap = (4.0 * v2 - v1) / 3.0;
    CapacityReport rep;
    rep.method = CapacityMethod::HarmonicOracle;
    rep.hcap = extrap + (vf - v2);
    rep.error = std::abs(v2 - v1) / 3.0 + std::abs(vf - v2);
    return rep;
}

GeodesicField geodesic_to_tip(const DrivingFunction& w, double T, double Y, int nt, int ny,
                              double dt) {
    validate_driving(w);
    if (!(T > 0.0) || T > w.horizon() * (1 + 1e-12))
        throw InvalidInput("T must lie within the driving horizon");
    if (!(Y > 0.0)) throw InvalidInput("Y must be positive");
    if (nt < 2 || ny < 2) throw InvalidInput("geodesic grid needs at least 2x2 nodes");
    DrivingFunction g = resample_driving(w, dt);
    std::vector<double> height(g.times.size(), 0.0);
    for (std::size_t k = 1; k < g.times.size(); ++k)
        height[k] = 2.0 * std::sqrt(g.times[k] - g.times[k - 1]);
    GeodesicField f;
    for (int i = 0; i < nt; ++i) f.ts.push_back(T * i / (nt - 1));
    for (int j = 0; j < ny; ++j) f.ys.push_back(Y * j / (ny - 1));
    f.values.assign(nt, std::vector<Point>(ny));
    for (int i = 0; i < nt; ++i) {
        auto m = std::size_t(std::llround(f.ts[i] / dt));
        m = std::min(m, g.times.size() - 1);
        for (int j = 0; j < ny; ++j) {
            Point z(g.values[m], f.ys[j]);
            for (std::size_t k = m; k >= 1; --k) z = slit_map_inverse(z, g.values[k], height[k]);
            f.values[i][j] = z;
        }
    }
    return f;
}

DrivingFunction read_driving_csv(std::istream& in) {
    DrivingFunction w;
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("driving CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,w") throw InvalidInput("driving CSV header must be 't,w'");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ss(line);
        double t, v;
        char comma;
        if (!(ss >> t >> comma >> v) || comma != ',')
            throw InvalidInput("bad driving CSV line " + std::to_string(lineno));
        w.times.push_back(t);
        w.values.push_back(v);
    }
    validate_driving(w);
    return w;
}

void write_driving_csv(std::ostream& out, const DrivingFunction& w) {
    out << "t,w\n";
    char buf[64];
    for (std::size_t i = 0; i < w.times.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", w.times[i], w.values[i]);
        out << buf;
    }
}

}  // namespace ll
