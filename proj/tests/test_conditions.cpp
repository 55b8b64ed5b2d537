#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "loewner_lab/conditions.hpp"

using namespace ll;

namespace {

Curve poly(std::vector<Point> p) {
    Curve c;
    c.points = std::move(p);
    return c;
}

ReportRow row(double x, double y, double r, double R, long trials, long hits) {
    ReportRow w;
    w.model = "percolation";
    w.shape = "annulus";
    w.z0x = x;
    w.z0y = y;
    w.r = r;
    w.R = R;
    w.tau_rule = "hit";
    w.trials = trials;
    w.hits = hits;
    w.refresh_ci();
    return w;
}

// brute-force minimiser of the weighted squared error, zooming in on a grid
double grid_search_delta(const std::vector<double>& x, const std::vector<double>& y,
                         const std::vector<double>& w) {
    double bk = 0.0, bd = 0.0, span = 10.0;
    for (int level = 0; level < 40; ++level) {
        double best = 1e300, nk = bk, nd = bd;
        for (int i = -10; i <= 10; ++i)
            for (int j = -10; j <= 10; ++j) {
                double k = bk + span * i / 10, d = bd + span * j / 10, s = 0.0;
                for (std::size_t m = 0; m < x.size(); ++m) s += w[m] * std::pow(y[m] - k - d * x[m], 2);
                if (s < best) best = s, nk = k, nd = d;
            }
        bk = nk, bd = nd, span *= 0.5;
    }
    return bd;
}

}  // namespace

TEST_CASE("Wilson interval") {
    Interval iv = wilson_interval(100, 50);
    CHECK(iv.lo == doctest::Approx(0.4038).epsilon(1e-3));
    CHECK(iv.hi == doctest::Approx(0.5962).epsilon(1e-3));
    CHECK(wilson_interval(200, 0).hi == doctest::Approx(3.0 / 200));
    CHECK(wilson_interval(0, 0).hi == 1.0);
    CHECK_THROWS_AS(wilson_interval(10, 11), InvalidInput);
}

TEST_CASE("verdicts") {
    CrossingReport rep;
    rep.C = 4.0;
    assign_verdict(rep);
    CHECK(rep.verdict == "PASS");  // nothing to refute

    rep.rows = {row(0, 0, 1, 4, 100, 2), row(5, 0, 1, 4, 10, 10), row(9, 0, 1, 2, 100, 100)};
    assign_verdict(rep);
    CHECK(rep.verdict == "PASS");
    CHECK(rep.conclusive == 1);
    CHECK(rep.inconclusive == 1);  // too few trials
    rep.rows.push_back(row(3, 3, 1, 8, 100, 45));
    assign_verdict(rep);
    CHECK(rep.verdict == "FAIL");
    CHECK(rep.failing == 1);
}

TEST_CASE("merging reports adds counts") {
    CrossingReport a, b;
    a.C = b.C = 4.0;
    a.rows = {row(0, 0, 1, 4, 60, 3), row(2, 0, 1, 4, 60, 0)};
    b.rows = {row(0, 0, 1, 4, 40, 1), row(4, 0, 1, 4, 40, 5)};
    a.samples = 60;
    b.samples = 40;
    assign_verdict(a);
    assign_verdict(b);
    CrossingReport m = merge_reports(a, b);
    REQUIRE(m.rows.size() == 3);
    long trials = 0, hits = 0;
    for (auto& r : m.rows) {
        trials += r.trials;
        hits += r.hits;
        Interval iv = wilson_interval(r.trials, r.hits);
        CHECK(r.ci_hi == doctest::Approx(iv.hi));
    }
    CHECK(trials == 200);
    CHECK(hits == 9);
    CrossingReport m2 = merge_reports(b, a);
    std::ostringstream s1, s2;
    write_report_csv(s1, m);
    write_report_csv(s2, m2);
    // same rows, possibly in another order
    auto lines = [](const std::string& t) {
        std::vector<std::string> v;
        std::istringstream is(t);
        for (std::string l; std::getline(is, l);) v.push_back(l);
        std::sort(v.begin(), v.end());
        return v;
    };
    CHECK(lines(s1.str()) == lines(s2.str()));

    CrossingReport empty;
    empty.C = 4.0;
    std::ostringstream s3;
    write_report_csv(s3, merge_reports(a, empty));
    std::ostringstream s4;
    write_report_csv(s4, a);
    CHECK(s3.str() == s4.str());
}

TEST_CASE("report CSV round trip") {
    CrossingReport a;
    a.C = 8.0;
    a.rows = {row(0.5, 1.0 / 3, 1.5, 12, 77, 4), row(2, 0, 1.5, 12, 77, 0)};
    assign_verdict(a);
    std::stringstream ss;
    write_report_csv(ss, a);
    CrossingReport b = read_report_csv(ss);
    REQUIRE(b.rows.size() == 2);
    CHECK(b.rows[0].z0y == doctest::Approx(a.rows[0].z0y).epsilon(1e-11));
    CHECK(b.rows[1].hits == 0);
    std::stringstream bad("model,shape\npercolation,annulus\n");
    CHECK_THROWS_AS(read_report_csv(bad), InvalidInput);
}

TEST_CASE("power-law fit") {
    std::vector<PowerLawRow> exact;
    for (double q : {0.25, 0.125, 0.0625}) exact.push_back({q, 0, 0, 0.7 * std::pow(q, 0.4)});
    PowerLawFit f = fit_power_law(exact);
    CHECK(f.Delta == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(f.K == doctest::Approx(0.7).epsilon(1e-12));

    std::vector<PowerLawRow> counted{{0.25, 400, 60, 0}, {0.125, 400, 31, 0}, {0.0625, 400, 12, 0}, {0.03125, 400, 0, 0}};
    PowerLawFit g = fit_power_law(counted);
    std::vector<double> x, y, w;
    for (auto& r : counted) {
        double n = double(r.trials);
        double p = r.hits > 0 ? r.hits / n : 3.0 / n;
        x.push_back(std::log(r.ratio));
        y.push_back(std::log(p));
        w.push_back(n * p / (1 - p));
    }
    CHECK(g.Delta == doctest::Approx(grid_search_delta(x, y, w)).epsilon(1e-6));
    CHECK(g.ci_lo < g.Delta);
    CHECK(g.Delta < g.ci_hi);

    std::vector<PowerLawRow> zeros{{0.25, 100, 0, 0}, {0.125, 100, 0, 0}, {0.0625, 100, 0, 0}};
    CHECK(fit_power_law(zeros).degenerate);
    CHECK_THROWS_AS(fit_power_law({{0.25, 10, 1, 0}, {0.125, 10, 1, 0}}), InvalidInput);
}

TEST_CASE("constant converters") {
    G3Constants g = g2_to_g3(2.0);
    CHECK(g.K == 2.0);
    CHECK(g.Delta == 1.0);
    CHECK(g2_to_c2(2.0) == 36.0);
    CHECK(c3_to_g2(2.0, 2 * M_PI) == doctest::Approx(4 * std::exp(2.0)).epsilon(1e-15));
    for (double C : {1.5, 3.0, 10.0}) {
        G3Constants h = g2_to_g3(C);
        CHECK(g3_to_g2(h.K, h.Delta) == doctest::Approx(C * C).epsilon(1e-12));
    }
    CHECK(convert_constants("G2->C2", {{"C", 2.0}}).at("M") == 36.0);
    CHECK_THROWS_AS(convert_constants("G2->C2", {}), InvalidInput);
    CHECK_THROWS_AS(g2_to_g3(1.0), InvalidInput);
}

TEST_CASE("multiple crossings") {
    Annulus a{{0, 0}, 1.0, 3.0};
    std::vector<Curve> ens{poly({{-4, 0}, {4, 0}}), poly({{-4, 0}, {-2, 0}}), poly({{-4, 0}, {0, 0.5}, {-4, 1}, {4, 1}})};
    CHECK(count_multiple_crossings(ens, a, 1).hits == 2);
    CHECK(count_multiple_crossings(ens, a, 2).hits == 2);
    CHECK(count_multiple_crossings(ens, a, 3).hits == 1);
    CHECK(count_multiple_crossings(ens, a, 5).hits == 0);
}

TEST_CASE("avoidable components at time zero") {
    DiscreteDomain d = make_triangular_rhombus(16);
    DomainState st = time_zero_state(d);
    Point centre = 0.5 * (d.a + d.b);
    AvoidableSet far = avoidable_components(st, Annulus{centre, 1.5, 3.0}, d.a, d.b);
    CHECK(far.empty);
    CHECK_FALSE(far.inner_meets_boundary);

    // an annulus around b: the component next to b separates, so it is forced
    AvoidableSet at_b = avoidable_components(st, Annulus{d.b, 1.5, 6.0}, d.a, d.b);
    CHECK(at_b.inner_meets_boundary);
    for (std::size_t k = 0; k < at_b.components.size(); ++k)
        CHECK(bool(at_b.avoidable[k]) == !component_disconnects(st, at_b, int(k)));

    // annuli centred on the boundary away from a and b
    for (int v : d.arc1) {
        AvoidableSet s = avoidable_components(st, Annulus{d.pos[v], 1.5, 6.0}, d.a, d.b);
        for (std::size_t k = 0; k < s.components.size(); ++k)
            CHECK(bool(s.avoidable[k]) == !component_disconnects(st, s, int(k)));
    }
}

TEST_CASE("avoidable components along an exploration") {
    ModelSpec s;
    s.model = Model::Percolation;
    s.domain = make_triangular_rhombus(16);
    HexExploration ex = start_hex_exploration(s.domain);
    Rng rng(4);
    continue_percolation(ex, 0.5, rng);
    for (std::size_t tau = 5; tau < ex.points.size(); tau += 7) {
        DomainState st = exploration_state(ex, tau);
        // the flood-fill reference starts from free sites touching the tip
        bool tip_free = false;
        for (int v : s.domain.sites_near(ex.points[tau], 1.01 * s.domain.spacing)) tip_free |= st.free(v);
        if (!tip_free) continue;
        // tip and target stay outside the annulus, as in the condition itself
        for (Point z0 : {ex.points[tau] + Point(7, 3), ex.points[tau / 2]}) {
            if (std::abs(z0 - ex.points[tau]) < 6.0 || std::abs(z0 - s.domain.b) < 6.0) continue;
            AvoidableSet set = avoidable_components(st, Annulus{z0, 1.5, 5.0}, ex.points[tau], s.domain.b);
            for (std::size_t k = 0; k < set.components.size(); ++k)
                CHECK(bool(set.avoidable[k]) == !component_disconnects(st, set, int(k)));
        }
    }
}

TEST_CASE("quadrilateral modulus") {
    for (double L : {1.0, 2.0, 4.0}) CHECK(modulus_quad(rectangle_quad(L, 1.0), 2) == doctest::Approx(L).epsilon(1e-8));
    TopQuad l = l_shaped_quad();
    CHECK(modulus_quad(scaled_quad(l, 3.0), 2) == doctest::Approx(modulus_quad(l, 2)).epsilon(1e-6));
    TopQuad ann = cut_annulus_quad(1.0, 4.0);
    CHECK(modulus_quad(ann, 4) >= std::log(4.0) / (2 * M_PI));
    TopQuad bad;
    bad.boundary = {{0, 0}, {1, 0}, {0.5, 1}};
    CHECK_THROWS_AS(modulus_quad(bad, 1), InvalidInput);
}

TEST_CASE("six-arm detection") {
    Curve straight = poly({{0, 0}, {0, 10}, {0, 20}, {0, 30}});
    CHECK_FALSE(detect_six_arm(straight, {}, {0, 30}, 3, 15, 6).has_value());

    Curve comb = poly({{0, 0}, {0, 2}, {0, 20}, {3, 20}, {3, 2}, {2.5, 3}, {2.5, 18}, {1, 18}, {1, -5}, {30, -5}});
    auto w = detect_six_arm(comb, {}, {30, -5}, 3, 15, 6);
    REQUIRE(w.has_value());
    CHECK(w->s == 4);
    CHECK(w->t == 7);
    CHECK(std::abs(w->c0 - Point(0, 2)) < 1e-12);
    CHECK(std::abs(w->c1 - Point(3, 2)) < 1e-12);
    CHECK_FALSE(detect_six_arm(comb, {}, {30, -5}, 3, 25, 6).has_value());
    CHECK_THROWS_AS(detect_six_arm(comb, {}, {30, -5}, 10, 15, 6), InvalidInput);
}
