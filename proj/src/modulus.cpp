#include <algorithm>
#include <cmath>

#include "loewner_lab/cg.hpp"
#include "loewner_lab/conditions.hpp"

namespace ll {

namespace {

double arc_length(const TopQuad& q, int k) {
    const int n = int(q.boundary.size());
    int from = q.corner[k], to = q.corner[(k + 1) % 4];
    double len = 0.0;
    for (int i = from; i != to; i = (i + 1) % n) len += std::abs(q.boundary[(i + 1) % n] - q.boundary[i]);
    return len;
}

int arc_of_edge(const TopQuad& q, int e) {
    for (int k = 0; k < 3; ++k)
        if (e >= q.corner[k] && e < q.corner[k + 1]) return k;
    return 3;
}

bool inside(const std::vector<Point>& poly, Point p) {
    bool in = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        Point a = poly[i], b = poly[j];
        if ((a.imag() > p.imag()) != (b.imag() > p.imag())) {
            double x = a.real() + (p.imag() - a.imag()) / (b.imag() - a.imag()) * (b.real() - a.real());
            if (p.real() < x) in = !in;
        }
    }
    return in;
}

// parameter t in [0,1] along p->p+d where it meets segment [a,b], or -1
double hit_param(Point p, Point d, Point a, Point b) {
    Point e = b - a;
    double den = d.real() * e.imag() - d.imag() * e.real();
    if (std::abs(den) < 1e-300) return -1.0;
    Point w = a - p;
    double t = (w.real() * e.imag() - w.imag() * e.real()) / den;
    double u = (w.real() * d.imag() - w.imag() * d.real()) / den;
    if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return -1.0;
    return t;
}

}  // namespace

void validate_quad(const TopQuad& q) {
    const int n = int(q.boundary.size());
    if (n < 4) throw InvalidInput("quadrilateral needs at least 4 boundary vertices");
    for (Point p : q.boundary)
        if (!std::isfinite(p.real()) || !std::isfinite(p.imag()))
            throw InvalidInput("quadrilateral vertex is not finite");
    for (int k = 0; k < 4; ++k) {
        if (q.corner[k] < 0 || q.corner[k] >= n) throw InvalidInput("corner index out of range");
        if (k > 0 && q.corner[k] <= q.corner[k - 1])
            throw InvalidInput("corners must be in counterclockwise order");
    }
    for (int k = 0; k < 4; ++k)
        if (!(arc_length(q, k) > 0.0)) throw InvalidInput("degenerate arc S" + std::to_string(k));
    if (q.h0 < 0.0) throw InvalidInput("mesh size must be nonnegative");
}

TopQuad rectangle_quad(double L, double H) {
    if (!(L > 0.0 && H > 0.0)) throw InvalidInput("rectangle sides must be positive");
    TopQuad q;
    q.boundary = {Point(0, H), Point(0, 0), Point(L, 0), Point(L, H)};
    q.corner = {0, 1, 2, 3};
    return q;
}

TopQuad cut_annulus_quad(double r, double R, int segments) {
    if (!(r > 0.0 && R > r)) throw InvalidInput("annulus needs 0 < r < R");
    if (segments < 8) throw InvalidInput("too few segments");
    TopQuad q;
    for (int k = 0; k <= segments; ++k) q.boundary.push_back(std::polar(r, 2 * M_PI * (segments - k) / segments));
    q.boundary.front() = Point(r, 0.0);
    q.boundary.back() = Point(r, 0.0);
    for (int k = 0; k <= segments; ++k) q.boundary.push_back(std::polar(R, 2 * M_PI * k / segments));
    q.boundary[segments + 1] = Point(R, 0.0);
    q.boundary.back() = Point(R, 0.0);
    q.corner = {0, segments, segments + 1, 2 * segments + 1};
    return q;
}

TopQuad l_shaped_quad() {
    TopQuad q;
    q.boundary = {Point(0, 2), Point(0, 0), Point(2, 0), Point(2, 1), Point(1, 1), Point(1, 2)};
    q.corner = {0, 1, 2, 4};
    return q;
}

TopQuad scaled_quad(const TopQuad& q, double s) {
    if (!(s > 0.0)) throw InvalidInput("scale must be positive");
    TopQuad out = q;
    out.cache.clear();
    for (auto& p : out.boundary) p *= s;
    out.h0 = q.h0 * s;
    return out;
}

double modulus_quad(const TopQuad& q, int refinement) {
    validate_quad(q);
    if (refinement < 1) throw InvalidInput("refinement must be >= 1");
    if (auto it = q.cache.find(refinement); it != q.cache.end()) return it->second;
    double h0 = q.h0;
    if (h0 == 0.0) {
        h0 = 1e300;
        for (int k = 0; k < 4; ++k) h0 = std::min(h0, arc_length(q, k));
        h0 /= 4.0;
    }
    const double h = h0 / refinement;
    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
    for (Point p : q.boundary) {
        x0 = std::min(x0, p.real());
        y0 = std::min(y0, p.imag());
        x1 = std::max(x1, p.real());
        y1 = std::max(y1, p.imag());
    }
    const int nx = int(std::ceil((x1 - x0) / h - 1e-9)), ny = int(std::ceil((y1 - y0) / h - 1e-9));
    if (double(nx) * ny > 2.5e7) throw InvalidInput("refinement too fine for the quadrilateral");
    auto centre = [&](int i, int j) { return Point(x0 + (i + 0.5) * h, y0 + (j + 0.5) * h); };

    // polygon edges bucketed by the cells their bounding boxes cover
    const int ne = int(q.boundary.size());
    std::vector<std::vector<int>> bucket(std::size_t(nx) * ny);
    auto cell_of = [&](double v, double o, int m) {
        return std::clamp(int(std::floor((v - o) / h)), 0, m - 1);
    };
    for (int e = 0; e < ne; ++e) {
        Point a = q.boundary[e], b = q.boundary[(e + 1) % ne];
        int i0 = cell_of(std::min(a.real(), b.real()), x0, nx), i1 = cell_of(std::max(a.real(), b.real()), x0, nx);
        int j0 = cell_of(std::min(a.imag(), b.imag()), y0, ny), j1 = cell_of(std::max(a.imag(), b.imag()), y0, ny);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) bucket[std::size_t(j) * nx + i].push_back(e);
    }

    std::vector<int> id(std::size_t(nx) * ny, -1);
    int n = 0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            if (inside(q.boundary, centre(i, j))) id[std::size_t(j) * nx + i] = n++;
    if (n == 0) throw InvalidInput("quadrilateral is thinner than the grid");

    struct Link {
        int a, b;      // b < 0: Dirichlet link
        double c, g;   // conductance, boundary value
    };
    std::vector<Link> links;
    bool touch0 = false, touch2 = false;
    const int di[2] = {1, 0}, dj[2] = {0, 1};
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            int u = id[std::size_t(j) * nx + i];
            for (int dir = 0; dir < 4; ++dir) {
                int sgn = dir < 2 ? 1 : -1;
                int ii = i + sgn * di[dir % 2], jj = j + sgn * dj[dir % 2];
                bool in_grid = ii >= 0 && jj >= 0 && ii < nx && jj < ny;
                int v = in_grid ? id[std::size_t(jj) * nx + ii] : -1;
                if (u < 0) continue;  // links are built from the inside cell
                Point p = centre(i, j), d = centre(ii, jj) - p;
                double best = 2.0;
                int best_e = -1;
                auto scan = [&](int ci, int cj) {
                    if (ci < 0 || cj < 0 || ci >= nx || cj >= ny) return;
                    for (int e : bucket[std::size_t(cj) * nx + ci]) {
                        double t = hit_param(p, d, q.boundary[e], q.boundary[(e + 1) % ne]);
                        if (t >= 0.0 && t < best) {
                            best = t;
                            best_e = e;
                        }
                    }
                };
                scan(i, j);
                scan(ii, jj);
                if (best_e < 0) {
                    if (v >= 0 && (dir < 2)) links.push_back({u, v, 1.0, 0.0});
                    continue;
                }
                int arc = arc_of_edge(q, best_e);
                if (arc == 1 || arc == 3) continue;
                double t = std::max(best, 0.01);
                links.push_back({u, -1, 1.0 / t, arc == 2 ? 1.0 : 0.0});
                (arc == 0 ? touch0 : touch2) = true;
            }
        }
    if (!touch0 || !touch2) throw InvalidInput("arcs S0 and S2 are not resolved by the grid");

    std::vector<std::vector<std::pair<int, double>>> rows(n);
    std::vector<double> diag(n, 0.0), rhs(n, 0.0);
    for (const auto& l : links) {
        diag[l.a] += l.c;
        if (l.b >= 0) {
            diag[l.b] += l.c;
            rows[l.a].emplace_back(l.b, l.c);
            rows[l.b].emplace_back(l.a, l.c);
        } else {
            rhs[l.a] += l.c * l.g;
        }
    }
    LaplaceSystem A;
    for (int k = 0; k < n; ++k) A.add_row(rows[k], diag[k]);
    std::vector<double> u(n, 0.5);
    CgResult res = cg_solve(A, rhs, u, 1e-12, 200000);
    if (!res.converged) throw ResolutionError("modulus solve did not converge");
    double energy = 0.0;
    for (const auto& l : links) {
        double du = u[l.a] - (l.b >= 0 ? u[l.b] : l.g);
        energy += l.c * du * du;
    }
    double m = 1.0 / energy;
    q.cache[refinement] = m;
    return m;
}

}  // namespace ll
