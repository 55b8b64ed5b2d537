#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "loewner_lab/geometry.hpp"
#include "loewner_lab/rng.hpp"

using namespace ll;

namespace {

Curve poly(std::vector<Point> p) {
    Curve c;
    c.points = std::move(p);
    return c;
}

// top-down memoised recursion over monotone couplings, written independently
// of the library's rolling-array version
double frechet_oracle(const std::vector<Point>& a, const std::vector<Point>& b) {
    std::vector<double> memo(a.size() * b.size(), -1.0);
    std::function<double(std::size_t, std::size_t)> f = [&](std::size_t i, std::size_t j) -> double {
        double& m = memo[i * b.size() + j];
        if (m >= 0.0) return m;
        double d = std::abs(a[i] - b[j]);
        if (i == 0 && j == 0) return m = d;
        double best = 1e300;
        if (i > 0) best = std::min(best, f(i - 1, j));
        if (j > 0) best = std::min(best, f(i, j - 1));
        if (i > 0 && j > 0) best = std::min(best, f(i - 1, j - 1));
        return m = std::max(best, d);
    };
    return f(a.size() - 1, b.size() - 1);
}

int partition_oracle(const std::vector<Point>& v, double l) {
    const int n = int(v.size());
    int best = n;
    // bit k set: vertex k+1 is a breakpoint
    for (unsigned mask = 0; mask < (1u << (n - 2)); ++mask) {
        int start = 0, pieces = 0;
        bool ok = true;
        for (int k = 1; k < n && ok; ++k) {
            bool cut = k == n - 1 || ((mask >> (k - 1)) & 1u);
            if (!cut) continue;
            for (int i = start; i <= k && ok; ++i)
                for (int j = i + 1; j <= k; ++j)
                    if (std::abs(v[i] - v[j]) > l * (1 + 1e-12)) ok = false;
            ++pieces;
            start = k;
        }
        if (ok) best = std::min(best, pieces);
    }
    return best;
}

int crossing_oracle(const std::vector<Point>& p, const Annulus& a) {
    int last = 0, count = 0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i)
        for (int k = 0; k <= 20000; ++k) {
            Point z = p[i] + (p[i + 1] - p[i]) * (k / 20000.0);
            double d = std::abs(z - a.z0);
            int r = d <= a.r ? 1 : d >= a.R ? 2 : 0;
            if (r && last && r != last) ++count;
            if (r) last = r;
        }
    return count;
}

}  // namespace

TEST_CASE("curve_distance basics") {
    Curve a = poly({{0, 0}, {1, 0}});
    CHECK(curve_distance(a, a, 0.1) == 0.0);
    Curve b = poly({{0, 0.3}, {1, 0.3}});
    CHECK(curve_distance(a, b, 0.05) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK_THROWS_AS(curve_distance(Curve{}, a, 0.1), InvalidInput);
    CHECK_THROWS_AS(curve_distance(a, b, 0.0), InvalidInput);
}

TEST_CASE("curve_distance matches the coupling recursion on zigzags") {
    Curve z1 = poly({{0, 0}, {1, 1}, {2, 0}, {3, 1}, {4, 0}});
    Curve z2 = poly({{0, 0.2}, {1.2, 0.8}, {2.1, -0.3}, {2.9, 1.4}, {4.2, 0.1}});
    for (int k = 1; k <= 6; ++k) {
        double h = std::ldexp(1.0, -k);
        double lib = curve_distance(z1, z2, h);
        double ref = frechet_oracle(resample(z1.points, h), resample(z2.points, h));
        CHECK(lib == doctest::Approx(ref).epsilon(1e-14));
        CHECK(curve_distance(z2, z1, h) == doctest::Approx(lib).epsilon(1e-14));
    }
}

TEST_CASE("curve_distance triangle inequality on a small corpus") {
    std::vector<Curve> cs;
    Rng rng(3);
    for (int k = 0; k < 5; ++k) {
        std::vector<Point> p{{0, 0}};
        for (int i = 0; i < 6; ++i) p.push_back(p.back() + Point(1.0, rng.normal()));
        cs.push_back(poly(p));
    }
    const double h = 0.05;
    for (auto& x : cs)
        for (auto& y : cs)
            for (auto& z : cs)
                CHECK(curve_distance(x, z, h) <= curve_distance(x, y, h) + curve_distance(y, z, h) + 2 * h);
}

TEST_CASE("tortuosity") {
    Curve seg = poly({{0, 0}, {1, 0}});
    CHECK(tortuosity(seg, 0.25) == 4);
    CHECK(tortuosity(seg, 2.0) == 1);

    Rng rng(11);
    std::vector<Point> walk{{0, 0}};
    const Point steps[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    while (walk.size() < 20) {
        Point nxt = walk.back() + steps[rng.below(4)];
        if (nxt != walk.back()) walk.push_back(nxt);
    }
    Curve w = poly(walk);
    CHECK(tortuosity(w, 2.0) == partition_oracle(walk, 2.0));
    CHECK(tortuosity(w, 1e9) == 1);
    int prev = 1 << 30;
    for (double l : {0.5, 1.0, 1.5, 2.0, 3.0, 5.0}) {
        int m = tortuosity(w, l);
        CHECK(m <= prev);
        prev = m;
    }
}

TEST_CASE("count_crossings") {
    Annulus a{{0, 0}, 1.0, 2.0};
    // a chord through the hole goes in and comes out again
    Curve chord = poly({{-3, 0}, {3, 0}});
    CHECK(count_crossings(chord, a).total == 2);
    Curve retreat = poly({{-3, 0}, {-1.5, 0}, {-3, 0.1}});
    CHECK(count_crossings(retreat, a).total == 0);
    std::vector<Point> zig{{0, 0}, {2.5, 0}, {0.5, 0.2}, {0.2, 0.1}, {3, 1}, {2.6, 0.4}, {2.2, 0.6}};
    Curve z = poly(zig);
    auto cc = count_crossings(z, a);
    CHECK(cc.total == 3);
    CHECK(cc.total == crossing_oracle(zig, a));
    std::reverse(zig.begin(), zig.end());
    CHECK(count_crossings(poly(zig), a).total == 3);
    CHECK_THROWS_AS(count_crossings(chord, Annulus{{0, 0}, 2.0, 1.0}), InvalidInput);
}

TEST_CASE("count_crossings agrees with its reversal on random walks") {
    Rng rng(5);
    for (int k = 0; k < 20; ++k) {
        std::vector<Point> p{{0, 0}};
        for (int i = 0; i < 60; ++i) p.push_back(p.back() + Point(rng.normal(), rng.normal()));
        Annulus a{{0.5, 0.25}, 1.5, 4.5};
        int fwd = count_crossings(poly(p), a).total;
        CHECK(fwd == crossing_oracle(p, a));
        std::reverse(p.begin(), p.end());
        CHECK(count_crossings(poly(p), a).total == fwd);
    }
}

TEST_CASE("segment predicates") {
    CHECK(segments_intersect({0, 0}, {1, 1}, {0, 1}, {1, 0}));
    CHECK_FALSE(segments_intersect({0, 0}, {1, 0}, {0, 1}, {1, 1}));
    CHECK(is_simple_polyline({{0, 0}, {1, 0}, {1, 1}, {0, 1}}));
    CHECK_FALSE(is_simple_polyline({{0, 0}, {2, 0}, {2, 1}, {1, -1}}));
    CHECK(diameter({{0, 0}, {3, 4}, {1, 1}}) == doctest::Approx(5.0));
}

TEST_CASE("validate_curve") {
    CHECK_THROWS_AS(validate_curve(poly({{0, 0}})), InvalidInput);
    CHECK_THROWS_AS(validate_curve(poly({{0, 0}, {0, 0}, {1, 0}})), InvalidInput);
    Curve bad = poly({{0, 0}, {2, 0}, {2, 1}, {1, -1}});
    bad.meta.simple = true;
    CHECK_THROWS_AS(validate_curve(bad), InvalidInput);
}

TEST_CASE("NDJSON round trip") {
    Curve c = poly({{0, 0}, {0.1, 0.7}, {1.0 / 3.0, 2.5}});
    c.meta.model = "percolation";
    c.meta.seed = 123456789012345ULL;
    c.meta.spacing = 0.5;
    Curve d = curve_from_ndjson(curve_to_ndjson(c));
    CHECK(d.points == c.points);
    CHECK(d.meta.seed == c.meta.seed);
    CHECK(d.meta.model == c.meta.model);
    std::stringstream ss;
    write_curves(ss, {c, c});
    CHECK(read_curves(ss).size() == 2);
    CHECK_THROWS_AS(curve_from_ndjson("{\"model\": 1"), InvalidInput);
}
