#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "loewner_lab/conditions.hpp"

namespace ll {

namespace {

double cross(Point a, Point b) { return a.real() * b.imag() - a.imag() * b.real(); }

double point_segment_distance(Point p, Point a, Point b) {
    Point d = b - a;
    double len2 = std::norm(d);
    double t = len2 > 0 ? std::clamp(((p - a) * std::conj(d)).real() / len2, 0.0, 1.0) : 0.0;
    return std::abs(p - (a + t * d));
}

struct Hash {
    double cell;
    std::unordered_map<std::uint64_t, std::vector<int>> map;

    std::uint64_t key(int x, int y) const {
        return (std::uint64_t(std::uint32_t(x)) << 32) | std::uint32_t(y);
    }
    int ix(double v) const { return int(std::floor(v / cell)); }

    void add_box(Point a, Point b, int id) {
        for (int x = ix(std::min(a.real(), b.real())); x <= ix(std::max(a.real(), b.real())); ++x)
            for (int y = ix(std::min(a.imag(), b.imag())); y <= ix(std::max(a.imag(), b.imag())); ++y)
                map[key(x, y)].push_back(id);
    }
    // ids registered in cells overlapping the box, deduplicated and sorted
    std::vector<int> query(Point a, Point b, double pad = 0.0) const {
        std::vector<int> out;
        for (int x = ix(std::min(a.real(), b.real()) - pad); x <= ix(std::max(a.real(), b.real()) + pad); ++x)
            for (int y = ix(std::min(a.imag(), b.imag()) - pad); y <= ix(std::max(a.imag(), b.imag()) + pad); ++y) {
                auto it = map.find(key(x, y));
                if (it != map.end()) out.insert(out.end(), it->second.begin(), it->second.end());
            }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }
};

// range bounding boxes in O(1) after O(n log n) preprocessing
struct RangeBox {
    std::vector<std::vector<double>> lox, hix, loy, hiy;

    explicit RangeBox(const std::vector<Point>& p) {
        const std::size_t n = p.size();
        lox.emplace_back(n);
        hix.emplace_back(n);
        loy.emplace_back(n);
        hiy.emplace_back(n);
        for (std::size_t i = 0; i < n; ++i) lox[0][i] = hix[0][i] = p[i].real(), loy[0][i] = hiy[0][i] = p[i].imag();
        for (std::size_t k = 1; (std::size_t(1) << k) <= n; ++k) {
            std::size_t len = n - (std::size_t(1) << k) + 1, half = std::size_t(1) << (k - 1);
            lox.emplace_back(len);
            hix.emplace_back(len);
            loy.emplace_back(len);
            hiy.emplace_back(len);
            for (std::size_t i = 0; i < len; ++i) {
                lox[k][i] = std::min(lox[k - 1][i], lox[k - 1][i + half]);
                hix[k][i] = std::max(hix[k - 1][i], hix[k - 1][i + half]);
                loy[k][i] = std::min(loy[k - 1][i], loy[k - 1][i + half]);
                hiy[k][i] = std::max(hiy[k - 1][i], hiy[k - 1][i + half]);
            }
        }
    }
    // width and height of the box of p[i..j]
    std::pair<double, double> extent(std::size_t i, std::size_t j) const {
        std::size_t k = 0;
        while ((std::size_t(2) << k) <= j - i + 1) ++k;
        std::size_t j2 = j + 1 - (std::size_t(1) << k);
        double w = std::max(hix[k][i], hix[k][j2]) - std::min(lox[k][i], lox[k][j2]);
        double h = std::max(hiy[k][i], hiy[k][j2]) - std::min(loy[k][i], loy[k][j2]);
        return {w, h};
    }
};

bool diameter_at_least(const std::vector<Point>& p, const RangeBox& box, std::size_t i, std::size_t j,
                       double R) {
    auto [w, h] = box.extent(i, j);
    if (std::max(w, h) >= R) return true;
    if (std::hypot(w, h) < R) return false;
    std::vector<Point> sub(p.begin() + i, p.begin() + j + 1);
    return diameter(sub) >= R;
}

}  // namespace

std::optional<SixArmWitness> detect_six_arm(const Curve& c, const std::vector<Point>& boundary,
                                            Point b, double r, double R, double rho) {
    if (!(r > 0.0 && R > 0.0 && rho > 0.0)) throw InvalidInput("r, R and rho must be positive");
    if (r > 0.5 * std::min(rho, R)) throw InvalidInput("six-arm test needs r <= min(rho, R)/2");
    const auto& p = c.points;
    const std::size_t n = p.size();
    if (n < 3) return std::nullopt;
    RangeBox box(p);
    Hash seg{std::max(r, 1e-9), {}}, pts{std::max(r, 1e-9), {}}, bnd{std::max(r, 1e-9), {}};
    for (std::size_t k = 0; k + 1 < n; ++k) seg.add_box(p[k], p[k + 1], int(k));
    for (std::size_t k = 0; k < n; ++k) pts.add_box(p[k], p[k], int(k));
    for (std::size_t k = 0; k < boundary.size(); ++k) bnd.add_box(boundary[k], boundary[k], int(k));

    // does the crosscut [q0, q1] meet gamma[0, j] away from its own endpoints?
    auto blocked = [&](Point q0, Point q1, long i, std::size_t j) {
        for (int k : seg.query(q0, q1)) {
            if (std::size_t(k) >= j) break;
            if (k == i - 1 || k == i || std::size_t(k) + 1 == j) continue;
            if (segments_intersect(q0, q1, p[k], p[k + 1])) return true;
        }
        return false;
    };
    // runs of gamma[j, n) between crossings of [q0, q1]; the last run is on b's side
    auto fjord = [&](Point q0, Point q1, std::size_t j, SixArmWitness& w) {
        Point dir = q1 - q0;
        auto side = [&](Point z) { return cross(dir, z - q0) >= 0.0 ? 1 : -1; };
        std::vector<std::size_t> cuts;
        for (int k : seg.query(q0, q1)) {
            if (std::size_t(k) <= j) continue;
            Point a = p[k], e = p[k + 1];
            int sa = side(a), se = side(e);
            if (sa == se) continue;
            double ca = cross(dir, a - q0), ce = cross(dir, e - q0);
            double t = ca / (ca - ce);
            Point z = a + t * (e - a);
            double u = ((z - q0) * std::conj(dir)).real() / std::norm(dir);
            if (u >= 0.0 && u <= 1.0) cuts.push_back(std::size_t(k));
        }
        std::sort(cuts.begin(), cuts.end());
        const std::size_t m = cuts.size();
        for (std::size_t l = 0; l < m; ++l) {
            if ((m - l) % 2 == 0) continue;
            std::size_t from = l == 0 ? j : cuts[l - 1] + 1, to = cuts[l];
            if (to > from && diameter_at_least(p, box, from, to, R)) {
                w.s = j;
                w.t = to;
                return true;
            }
        }
        return false;
    };

    SixArmWitness w;
    for (std::size_t j = 2; j < n; ++j) {
        for (int i : pts.query(p[j], p[j], r)) {
            if (std::size_t(i) + 2 > j) break;
            Point q0 = p[i], q1 = p[j];
            double len = std::abs(q1 - q0);
            if (len > r || len == 0.0) continue;
            auto [bw, bh] = box.extent(std::size_t(i), j);
            if (std::hypot(bw, bh) < R) continue;
            if (point_segment_distance(b, q0, q1) <= rho) continue;
            if (blocked(q0, q1, i, j)) continue;
            if (fjord(q0, q1, j, w)) {
                w.c0 = q0;
                w.c1 = q1;
                w.boundary_mouth = false;
                return w;
            }
        }
        for (int k : bnd.query(p[j], p[j], r)) {
            Point q0 = boundary[k], q1 = p[j];
            double len = std::abs(q1 - q0);
            if (len > r || len == 0.0) continue;
            if (point_segment_distance(b, q0, q1) <= rho) continue;
            if (blocked(q0, q1, -10, j)) continue;
            if (fjord(q0, q1, j, w)) {
                w.c0 = q0;
                w.c1 = q1;
                w.boundary_mouth = true;
                return w;
            }
        }
    }
    return std::nullopt;
}

}  // namespace ll
