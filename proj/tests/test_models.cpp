#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "loewner_lab/models.hpp"

using namespace ll;

namespace {

std::string key_of(const Curve& c) {
    std::ostringstream os;
    os.precision(6);
    for (Point p : c.points) os << p.real() << ',' << p.imag() << ';';
    return os.str();
}

DiscreteDomain three_hexagons() {
    return make_triangular_domain({{0, 0}, {1, 0}, {0, 1}},
                                  {{0, -1}, {1, -1}, {2, -1}, {2, 0}},
                                  {{-1, 0}, {-1, 1}, {-1, 2}, {0, 2}, {1, 1}});
}

double tv(const std::map<std::string, double>& exact, const std::map<std::string, long>& counts, long n) {
    std::set<std::string> keys;
    for (auto& [k, v] : exact) keys.insert(k);
    for (auto& [k, v] : counts) keys.insert(k);
    double s = 0.0;
    for (const auto& k : keys) {
        double p = exact.count(k) ? exact.at(k) : 0.0;
        double q = counts.count(k) ? double(counts.at(k)) / n : 0.0;
        s += std::abs(p - q);
    }
    return 0.5 * s;
}

}  // namespace

TEST_CASE("percolation on three hexagons matches enumeration") {
    DiscreteDomain d = three_hexagons();
    std::vector<int> inner;
    for (int v = 0; v < d.size(); ++v)
        if (d.role[v] == Interior) inner.push_back(v);
    REQUIRE(inner.size() == 3);

    std::map<std::string, double> exact;
    for (int mask = 0; mask < 8; ++mask) {
        std::vector<std::int8_t> col(d.size());
        for (int v = 0; v < d.size(); ++v) col[v] = d.role[v] == Arc1 ? 1 : 0;
        for (int k = 0; k < 3; ++k) col[inner[k]] = (mask >> k) & 1;
        exact[key_of(hex_interface(d, col))] += 1.0 / 8;
    }
    CHECK(exact.size() > 1);

    ModelSpec s;
    s.model = Model::Percolation;
    s.domain = d;
    std::map<std::string, long> counts;
    const long n = 20000;
    for (long k = 0; k < n; ++k) {
        s.seed = std::uint64_t(k);
        counts[key_of(sample(s))]++;
    }
    // chi-square against the exact law
    double chi2 = 0.0;
    for (auto& [key, p] : exact) {
        double e = p * n;
        double o = counts.count(key) ? double(counts[key]) : 0.0;
        chi2 += (o - e) * (o - e) / e;
    }
    CHECK(counts.size() == exact.size());
    CHECK(chi2 < 3.0 * double(exact.size()) + 10.0);
    CHECK(tv(exact, counts, n) < 0.02);
}

TEST_CASE("a corridor forces the interface") {
    ModelSpec s;
    s.domain = make_triangular_corridor(6);
    for (Model m : {Model::Percolation, Model::HarmonicExplorer}) {
        s.model = m;
        s.seed = 1;
        Curve a = sample(s);
        s.seed = 99;
        Curve b = sample(s);
        CHECK(a.points == b.points);
        CHECK(a.points.size() >= 7);
    }
}

TEST_CASE("harmonic explorer first step follows the discrete harmonic function") {
    DiscreteDomain d = make_triangular_rhombus(6);
    HexExploration ex0 = start_hex_exploration(d);
    REQUIRE_FALSE(ex0.ahead_known());
    const int first = ex0.ahead;
    double p = harmonic_explorer_probability(ex0);
    HarmonicField h = harmonic_solve(d);
    CHECK(p == doctest::Approx(h.value[first]).epsilon(1e-8));

    const int n = 3000;
    int open = 0;
    for (int k = 0; k < n; ++k) {
        HexExploration ex = ex0;
        Rng rng(std::uint64_t(k) + 1000);
        continue_harmonic_explorer(ex, rng);
        open += ex.color[first] == 1;
    }
    CHECK(std::abs(open / double(n) - p) < 4 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("percolation samples are simple curves from a to b") {
    ModelSpec s;
    s.model = Model::Percolation;
    s.domain = make_triangular_rhombus(10);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        s.seed = seed;
        Curve c = sample(s);
        CHECK(is_simple_polyline(c.points));
        CHECK(std::abs(c.points.front() - s.domain.a) < 1.0);
        CHECK(std::abs(c.points.back() - s.domain.b) < 1.0);
        CHECK(key_of(sample(s)) == key_of(c));
    }
}

TEST_CASE("FK heat bath on a single edge") {
    Graph g;
    g.n = 2;
    g.edges = {{0, 1}};
    const double p = 0.6, q = 3.0;
    FkChain chain(g, {}, {-1, -1}, p, q, 7);
    const double want = p / (p + (1 - p) * q);
    CHECK(chain.open_probability(0) == doctest::Approx(want));
    long open = 0;
    const long n = 100000;
    for (long k = 0; k < n; ++k) {
        chain.step();
        open += chain.config().open[0];
    }
    CHECK(std::abs(open / double(n) - want) < 4 * std::sqrt(want * (1 - want) / n));
}

TEST_CASE("FK heat bath on a wired square with a diagonal") {
    // 4-cycle plus a chord; vertices 0 and 2 wired together
    Graph g;
    g.n = 4;
    g.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {1, 3}};
    std::vector<int> wiring{0, -1, 0, -1};
    const double p = p_self_dual(2.0), q = 2.0;
    const int m = int(g.edges.size());
    std::map<std::string, double> exact;
    double Z = 0.0;
    std::vector<double> weight(1 << m);
    for (int mask = 0; mask < (1 << m); ++mask) {
        EdgeConfig cfg;
        cfg.open.resize(m);
        int o = 0;
        for (int e = 0; e < m; ++e) o += cfg.open[e] = (mask >> e) & 1;
        weight[mask] = std::pow(p, o) * std::pow(1 - p, m - o) * std::pow(q, component_count(g, cfg, wiring));
        Z += weight[mask];
    }
    for (int mask = 0; mask < (1 << m); ++mask) exact[std::to_string(mask)] = weight[mask] / Z;

    FkChain chain(g, {}, wiring, p, q, 11);
    std::map<std::string, long> counts;
    const long n = 200000;
    for (long k = 0; k < n; ++k) {
        chain.step();
        int mask = 0;
        for (int e = 0; e < m; ++e) mask |= chain.config().open[e] << e;
        counts[std::to_string(mask)]++;
    }
    CHECK(tv(exact, counts, n) < 0.02);
}

TEST_CASE("loop erasure") {
    CHECK(loop_erase({0, 1, 2, 1, 3}) == std::vector<int>{0, 1, 3});
    CHECK(loop_erase({0, 1, 2, 3, 1, 4, 0, 5}) == std::vector<int>{0, 5});
    CHECK(loop_erase({4, 5, 6}) == std::vector<int>{4, 5, 6});
}

TEST_CASE("LERW samples are simple and end at b") {
    ModelSpec s;
    s.model = Model::Lerw;
    s.domain = make_square_box(8, 8, {4, -1}, {4, 8});
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        s.seed = seed;
        Curve c = sample(s);
        CHECK(is_simple_polyline(c.points));
        CHECK(c.points.front() == s.domain.pos[s.domain.a_site]);
        CHECK(c.points.back() == s.domain.pos[s.domain.b_site]);
    }
}

TEST_CASE("Wilson's algorithm samples spanning trees of K4 uniformly") {
    Graph g;
    g.n = 4;
    g.edges = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    std::vector<std::uint8_t> root{1, 0, 0, 0};
    Rng rng(5);
    std::map<int, long> counts;
    const long n = 32000;
    for (long k = 0; k < n; ++k) {
        auto t = wilson_tree(g, root, rng);
        int mask = 0, edges = 0;
        for (int e = 0; e < 6; ++e) mask |= t[e] << e, edges += t[e];
        CHECK(edges == 3);
        counts[mask]++;
    }
    CHECK(counts.size() == 16);  // Cayley: 4^(4-2)
    double chi2 = 0.0;
    for (auto& [m, c] : counts) chi2 += (c - n / 16.0) * (c - n / 16.0) / (n / 16.0);
    CHECK(chi2 < 37.7);  // 15 dof, p = 0.001
}

TEST_CASE("UST Peano curve") {
    ModelSpec s;
    s.model = Model::UstPeano;
    s.domain = make_square_rect(6, 5, 5, 10);
    RectGraph rg = rect_graph(s.domain);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        s.seed = seed;
        auto tree = sample_ust_tree(s);
        int edges = 0;
        for (auto t : tree) edges += t;
        int wired_vertices = 0;
        for (auto w : rg.on_wired_arc) wired_vertices += w;
        // spanning tree once the wired arc is contracted, plus the arc's own path
        CHECK(edges == (rg.g.n - wired_vertices) + int(rg.wired_edges.size()));
        Curve c = sample(s);
        CHECK(is_simple_polyline(c.points));
        CHECK(int(c.points.size()) <= 4 * rg.g.n);
        // a and b sit on the ring outside the rectangle, the fine lattice a quarter step inside
        CHECK(std::abs(c.points.front() - s.domain.a) < 1.5);
        CHECK(std::abs(c.points.back() - s.domain.b) < 1.5);
    }
}

TEST_CASE("FK-Ising interface and spec validation") {
    ModelSpec s;
    s.model = Model::FkIsing;
    s.domain = make_square_rect(6, 6, 7, 13, LatticeKind::ModifiedMedial);
    s.sweeps = 20;
    s.seed = 3;
    Curve c = sample(s);
    CHECK(c.points.size() > 2);
    CHECK(key_of(sample(s)) == key_of(c));

    s.p = 1.5;
    CHECK_THROWS_AS(sample(s), InvalidInput);
    s.p = -1.0;
    s.model = Model::Lerw;
    CHECK_THROWS_AS(sample(s), InvalidInput);
    CHECK(p_self_dual(2.0) == doctest::Approx(std::sqrt(2.0) / (1 + std::sqrt(2.0))));
    CHECK_THROWS_AS(model_from_string("ising"), InvalidInput);
}
