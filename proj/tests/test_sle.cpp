#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "loewner_lab/rng.hpp"
#include "loewner_lab/sle.hpp"

using namespace ll;

namespace {

std::vector<DrivingFunction> ensemble(double kappa, int n, double T, double dt, std::uint64_t base) {
    std::vector<DrivingFunction> w;
    for (int s = 0; s < n; ++s) w.push_back(sample_sle_driving({kappa, T, dt, job_seed(base, std::uint64_t(s))}));
    return w;
}

}  // namespace

TEST_CASE("SLE driving functions") {
    DrivingFunction z = sample_sle_driving({0.0, 1.0, 0.01, 3});
    for (double v : z.values) CHECK(v == 0.0);
    CHECK(z.times.size() == 101);

    // one seed couples all kappa
    DrivingFunction w2 = sample_sle_driving({2.0, 1.0, 0.01, 3});
    DrivingFunction w8 = sample_sle_driving({8.0, 1.0, 0.01, 3});
    for (std::size_t k = 0; k < w2.values.size(); ++k) CHECK(w8.values[k] == 2.0 * w2.values[k]);

    CHECK_THROWS_AS(sample_sle_driving({-1.0, 1.0, 0.01, 0}), InvalidInput);
    CHECK_THROWS_AS(sample_sle_driving({2.0, 1e-3, 0.01, 0}), InvalidInput);
}

TEST_CASE("variance of W(1) is kappa") {
    const int n = 2000;
    auto w = ensemble(2.0, n, 1.0, 0.01, 77);
    double s = 0.0, s2 = 0.0;
    for (auto& x : w) {
        s += x.values.back();
        s2 += x.values.back() * x.values.back();
    }
    double var = (s2 - s * s / n) / (n - 1);
    // sd of the sample variance of a Gaussian: kappa sqrt(2/(n-1))
    CHECK(std::abs(var - 2.0) < 3 * 2.0 * std::sqrt(2.0 / (n - 1)));
}

TEST_CASE("estimate_kappa") {
    auto w = ensemble(4.0, 300, 1.0, 1e-3, 5);
    KappaEstimate a = estimate_kappa(w, 200, 1);
    CHECK(a.ci_lo <= a.kappa);
    CHECK(a.kappa <= a.ci_hi);
    CHECK(std::abs(a.kappa - 4.0) < 0.6);
    CHECK(std::abs(a.ac1) < 0.05);

    // coarser grid, same paths
    KappaEstimate b = estimate_kappa(common_grid(w, 2e-3), 200, 1);
    CHECK(std::abs(b.kappa - a.kappa) < 0.01 * a.kappa);

    auto zero = ensemble(0.0, 30, 1.0, 0.01, 1);
    CHECK(estimate_kappa(zero, 10, 1).kappa == 0.0);

    CHECK_THROWS_AS(estimate_kappa(ensemble(2.0, 29, 1.0, 0.01, 1), 10, 1), InvalidInput);
    auto mixed = ensemble(2.0, 30, 1.0, 0.01, 1);
    mixed[3] = sample_sle_driving({2.0, 1.0, 0.02, 9});
    CHECK_THROWS_AS(estimate_kappa(mixed, 10, 1), InvalidInput);
}

TEST_CASE("common grid truncates to the shortest horizon") {
    std::vector<DrivingFunction> w{sample_sle_driving({2.0, 1.0, 0.01, 1}), sample_sle_driving({2.0, 0.5, 0.01, 2})};
    auto g = common_grid(w, 0.05);
    CHECK(g[0].horizon() == doctest::Approx(0.5));
    CHECK(g[0].times == g[1].times);
    CHECK(g[0].at(0.25) == doctest::Approx(w[0].at(0.25)));
}

TEST_CASE("tail report") {
    auto zero = ensemble(0.0, 40, 1.0, 0.01, 1);
    DrivingStats z = driving_tail_report(zero);
    for (auto& r : z.exceedance) CHECK(r.count == 0);
    CHECK(z.exp_moment == doctest::Approx(1.0));

    auto w = ensemble(2.0, 200, 1.0, 0.01, 3);
    DrivingStats s = driving_tail_report(w);
    CHECK(s.samples == 200);
    // exceedance frequencies fall as the threshold grows
    for (std::size_t k = 1; k < s.exceedance.size(); ++k)
        if (s.exceedance[k].x > s.exceedance[k - 1].x && s.exceedance[k].total == s.exceedance[k - 1].total)
            CHECK(s.exceedance[k].count <= s.exceedance[k - 1].count);
    for (auto& h : s.holder) {
        CHECK(h.within >= 0.0);
        CHECK(h.within <= 1.0);
    }
    std::ostringstream csv;
    write_stats_csv(csv, s);
    CHECK(csv.str().rfind("t,var,ac1\n", 0) == 0);
    auto j = nlohmann::json::parse(stats_json(s));
    CHECK(j.at("schema") == "loewner-lab/driving-stats@1");
}

TEST_CASE("initial driving of a lattice curve") {
    // a horizontal walk entering from the left
    Curve c;
    for (int k = 0; k <= 20; ++k) c.points.emplace_back(5.0 + k, 2.0);
    DrivingFunction w = initial_driving(c, {1.0, 0.0}, 6.0);
    for (double v : w.values) CHECK(std::abs(v) < 1e-9);
    // stops at the first point beyond the radius
    CHECK(w.horizon() == doctest::Approx(49.0 / 4).epsilon(1e-9));
    CHECK_THROWS_AS(initial_driving(c, {0.0, 0.0}, 6.0), InvalidInput);
}

TEST_CASE("coupled traces move together as delta shrinks") {
    ContinuityTable t = kappa_continuity_experiment(2.0, {0.5, 0.25}, 0.5, 2e-3, 6, 1);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0].mean > 0.0);
    CHECK(t.rows[0].seeds == 6);
    ContinuityTable z = kappa_continuity_experiment(0.0, {0.25}, 1.0, 1e-2, 4, 1);
    CHECK(z.rows[0].mean < 0.5 * z.rows[0].diameter);
    CHECK_THROWS_AS(kappa_continuity_experiment(7.9, {0.5}, 1.0, 1e-2, 2, 1), InvalidInput);
}

TEST_CASE("SLE(2) traces are simple") {
    int simple = 0;
    const int n = 40;
    for (int s = 0; s < n; ++s) {
        DrivingFunction w = sample_sle_driving({2.0, 0.5, 1e-3, job_seed(21, std::uint64_t(s))});
        simple += is_simple_polyline(solve_trace(w, 1e-3).points);
    }
    CHECK(simple >= 0.95 * n);
}
