#include <doctest.h>

#include <cmath>
#include <sstream>

#include "loewner_lab/loewner.hpp"
#include "loewner_lab/rng.hpp"

using namespace ll;

namespace {

DrivingFunction uniform(double T, double dt, double (*f)(double)) {
    DrivingFunction w;
    const long n = std::lround(T / dt);
    for (long k = 0; k <= n; ++k) {
        w.times.push_back(k * dt);
        w.values.push_back(f(k * dt));
    }
    return w;
}

DrivingFunction brownian(double kappa, double T, double dt, std::uint64_t seed) {
    Rng rng(seed);
    DrivingFunction w;
    double b = 0.0;
    const long n = std::lround(T / dt);
    for (long k = 0; k <= n; ++k) {
        if (k > 0) b += std::sqrt(kappa * dt) * rng.normal();
        w.times.push_back(k * dt);
        w.values.push_back(b);
    }
    return w;
}

}  // namespace

TEST_CASE("slit maps invert each other") {
    for (Point z : {Point(0.3, 0.2), Point(-2.0, 1e-3), Point(5.0, 7.0)}) {
        Point w = slit_map(z, 0.1, 0.8);
        CHECK(std::abs(slit_map_inverse(w, 0.1, 0.8) - z) < 1e-12);
        CHECK(w.imag() > 0.0);
    }
    // the tip goes to the base point
    CHECK(std::abs(slit_map(Point(0.1, 0.8), 0.1, 0.8) - Point(0.1, 0.0)) < 1e-7);
}

TEST_CASE("zero driving traces the vertical slit 2i sqrt(t)") {
    const double dt = 1e-3, eps = 1e-4;
    DrivingFunction w = uniform(1.0, dt, [](double) { return 0.0; });
    Curve c = solve_trace(w, dt, eps);
    double err = 0.0;
    for (std::size_t k = 0; k < c.points.size(); ++k)
        err = std::max(err, std::abs(c.points[k] - Point(0.0, 2.0 * std::sqrt(k * dt))));
    CHECK(err <= 5 * eps + dt);

    DrivingFunction shifted = w;
    for (auto& v : shifted.values) v += 0.75;
    Curve s = solve_trace(shifted, dt, eps);
    for (std::size_t k = 0; k < c.points.size(); ++k)
        CHECK(s.points[k] == c.points[k] + Point(0.75, 0.0));
}

TEST_CASE("trace of W(t) = t self-converges") {
    DrivingFunction w = uniform(1.0, 1e-3, [](double t) { return t; });
    double e1 = trace_error_estimate(w, 4e-3, 1e-6);
    double e2 = trace_error_estimate(w, 2e-3, 1e-6);
    CHECK(std::isfinite(e1));
    CHECK(e2 < e1);
    CHECK(curve_distance(solve_trace(w, 2e-3, 1e-6), solve_trace(w, 1e-3, 1e-6), 1e-3) <= e2 + 1e-3);
}

TEST_CASE("solve_trace rejects bad input") {
    DrivingFunction w;
    w.times = {0.0, 0.2, 0.1};
    w.values = {0.0, 0.0, 0.0};
    CHECK_THROWS_AS(solve_trace(w, 0.01, 0.1), InvalidInput);
    DrivingFunction ok = uniform(0.1, 0.01, [](double) { return 0.0; });
    CHECK_THROWS_AS(solve_trace(ok, 0.01, 1e-13), ResolutionError);
}

TEST_CASE("vertical segment unzips to a constant driving") {
    const double x0 = 0.4, h = 1.5;
    Curve c;
    for (int k = 0; k <= 200; ++k) c.points.emplace_back(x0, h * k / 200.0);
    DrivingFunction w = extract_driving(c);
    for (double v : w.values) CHECK(std::abs(v - x0) < 1e-6);
    CHECK(w.horizon() == doctest::Approx(h * h / 4).epsilon(1e-9));
}

TEST_CASE("extraction scales covariantly") {
    Curve c;
    c.points = {{0, 0}, {0.1, 0.3}, {0.4, 0.5}, {0.2, 0.9}, {-0.3, 1.0}};
    DrivingFunction w = extract_driving(c);
    for (double s : {0.5, 2.0, 3.0}) {
        Curve cs = c;
        for (auto& p : cs.points) p *= s;
        DrivingFunction ws = extract_driving(cs);
        for (std::size_t k = 0; k < w.times.size(); ++k) {
            CHECK(ws.values[k] == doctest::Approx(s * w.values[k]).epsilon(1e-12));
            CHECK(ws.times[k] == doctest::Approx(s * s * w.times[k]).epsilon(1e-12));
        }
    }
}

TEST_CASE("Brownian driving survives a round trip") {
    const double T = 0.25, dt = 1e-3;
    DrivingFunction w = brownian(2.0, T, dt, 42);
    Curve c = solve_trace_on_grid(w, 1e-10);
    DrivingFunction back = extract_driving(c);
    double err = 0.0;
    for (double t = 0.0; t <= 0.9 * T; t += dt) err = std::max(err, std::abs(back.at(t) - w.at(t)));
    CHECK(err < 1e-2);
}

TEST_CASE("extraction rejects curves touching the real axis") {
    Curve c;
    c.points = {{0, 0}, {0, 1}, {1, 0}};
    CHECK_THROWS_AS(extract_driving(c), InvalidInput);
    c.points = {{0, 0.5}, {0, 1}};
    CHECK_THROWS_AS(extract_driving(c), InvalidInput);
}

TEST_CASE("capacity: slits, lower bound, scaling, monotonicity") {
    Curve slit;
    slit.points = {{0, 0}, {0, 1}};
    CHECK(hcap_curve(slit).hcap == doctest::Approx(0.5).epsilon(1e-12));

    CapacityReport r = hcap_polygon({{0, 0}, {0, 1}, {1e-3, 1}, {1e-3, 0}});
    CHECK(r.method == CapacityMethod::HarmonicOracle);
    CHECK(std::abs(r.hcap - 0.5) < 0.02);

    std::vector<std::vector<Point>> hulls = {
        {{0, 0}, {0, 2}, {1, 2}, {1, 0}},
        {{0, 0}, {0.5, 1.0}, {1, 0}},
        {{-1, 0}, {-1, 0.5}, {2, 0.5}, {2, 0}},
    };
    for (const auto& h : hulls) {
        double height = 0.0;
        for (Point p : h) height = std::max(height, p.imag());
        CapacityReport c = hcap_polygon(h);
        CHECK(c.hcap >= height * height / 4);
        std::vector<Point> big = h;
        for (auto& p : big) p *= 2.0;
        CapacityReport c2 = hcap_polygon(big);
        CHECK(std::abs(c2.hcap - 4 * c.hcap) <= 4 * c.error + c2.error + 1e-9);
    }

    Curve bent;
    bent.points = {{0, 0}, {0.1, 0.3}, {0.4, 0.5}, {0.2, 0.9}, {-0.3, 1.0}};
    double prev = 0.0;
    for (std::size_t n = 2; n <= bent.points.size(); ++n) {
        Curve pre;
        pre.points.assign(bent.points.begin(), bent.points.begin() + n);
        double cap = hcap_curve(pre).hcap;
        CHECK(cap > prev);
        prev = cap;
    }
}

TEST_CASE("capacity is additive under mapping out a prefix") {
    Curve c;
    c.points = {{0, 0}, {0.1, 0.3}, {0.4, 0.5}, {0.2, 0.9}, {-0.3, 1.0}, {-0.2, 1.4}};
    const double total = extract_driving(c).horizon();
    const std::size_t cut = 3;
    Curve head;
    head.points.assign(c.points.begin(), c.points.begin() + cut + 1);
    DrivingFunction wh = extract_driving(head);
    Curve tail;
    for (std::size_t k = cut; k < c.points.size(); ++k) {
        Point z = c.points[k];
        for (std::size_t j = 1; j < wh.times.size(); ++j)
            z = slit_map(z, wh.values[j], 2.0 * std::sqrt(wh.times[j] - wh.times[j - 1]));
        tail.points.push_back(z);
    }
    tail.points.front() = Point(tail.points.front().real(), 0.0);
    CHECK(wh.horizon() + extract_driving(tail).horizon() == doctest::Approx(total).epsilon(1e-6));
}

TEST_CASE("geodesic to the tip") {
    DrivingFunction zero = uniform(1.0, 1e-3, [](double) { return 0.0; });
    GeodesicField f = geodesic_to_tip(zero, 1.0, 2.0, 5, 5, 1e-3);
    for (std::size_t i = 0; i < f.ts.size(); ++i)
        for (std::size_t j = 0; j < f.ys.size(); ++j) {
            Point want(0.0, std::sqrt(f.ys[j] * f.ys[j] + 4 * f.ts[i]));
            CHECK(std::abs(f.values[i][j] - want) < 1e-6);
        }

    DrivingFunction w = brownian(8.0 / 3.0, 0.5, 1e-3, 9);
    double prev = 1e300;
    for (double Y : {2.0, 4.0, 8.0, 16.0}) {
        GeodesicField g = geodesic_to_tip(w, 0.5, Y, 2, 2, 1e-3);
        double dev = std::abs(g.values[1][1] - Point(w.at(0.5), Y));
        CHECK(dev < prev);
        prev = dev;
    }

    // modulus of continuity in y shrinks with the y-spacing
    GeodesicField h = geodesic_to_tip(w, 0.5, 0.5, 11, 65, 1e-3);
    auto modulus = [&](int stride) {
        double m = 0.0;
        for (std::size_t i = 0; i < h.ts.size(); ++i)
            for (std::size_t j = 0; j + stride < h.ys.size(); ++j)
                m = std::max(m, std::abs(h.values[i][j + stride] - h.values[i][j]));
        return m;
    };
    CHECK(modulus(8) > modulus(4));
    CHECK(modulus(4) > modulus(2));
    CHECK(modulus(2) > modulus(1));
}

TEST_CASE("driving CSV round trip") {
    DrivingFunction w = brownian(2.0, 0.1, 0.01, 1);
    std::stringstream ss;
    write_driving_csv(ss, w);
    DrivingFunction r = read_driving_csv(ss);
    CHECK(r.times == w.times);
    CHECK(r.values == w.values);
    std::stringstream bad("time,value\n0,0\n");
    CHECK_THROWS_AS(read_driving_csv(bad), InvalidInput);
}
