#include "loewner_lab/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace ll {

const char* to_string(Model m) {
    switch (m) {
        case Model::Percolation: return "percolation";
        case Model::Lerw: return "lerw";
        case Model::HarmonicExplorer: return "harmonic-explorer";
        case Model::FkIsing: return "fk-ising";
        case Model::UstPeano: return "ust-peano";
    }
    return "?";
}

Model model_from_string(const std::string& s) {
    for (Model m : {Model::Percolation, Model::Lerw, Model::HarmonicExplorer, Model::FkIsing,
                    Model::UstPeano})
        if (s == to_string(m)) return m;
    throw InvalidInput("unknown model '" + s + "'");
}

double p_self_dual(double q) { return std::sqrt(q) / (1.0 + std::sqrt(q)); }

double effective_p(const ModelSpec& s) {
    if (s.p >= 0.0) return s.p;
    return s.model == Model::FkIsing ? p_self_dual(s.q) : 0.5;
}

void validate_spec(const ModelSpec& s) {
    const DiscreteDomain& d = s.domain;
    double p = effective_p(s);
    if (!(p > 0.0 && p < 1.0)) throw InvalidInput("p must lie in (0,1)");
    if (!(s.q > 0.0)) throw InvalidInput("q must be positive");
    bool tri = d.kind == LatticeKind::Triangular || d.kind == LatticeKind::HexagonalDual;
    switch (s.model) {
        case Model::Percolation:
        case Model::HarmonicExplorer:
            if (!tri) throw InvalidInput(std::string(to_string(s.model)) + " needs a triangular domain");
            break;
        case Model::Lerw:
            if (d.kind != LatticeKind::Square || d.a_site < 0 || d.b_site < 0)
                throw InvalidInput("lerw needs a square box domain with marked sites");
            break;
        case Model::FkIsing:
            if (s.sweeps < 1) throw InvalidInput("sweeps must be >= 1");
            if (d.rect_nx < 2 || d.rect_ny < 2 || tri || d.wired_hi < d.wired_lo)
                throw InvalidInput("fk-ising needs a rectangle domain with a wired arc");
            break;
        case Model::UstPeano:
            if (d.rect_nx < 1 || d.rect_ny < 1 || tri || d.wired_hi < d.wired_lo)
                throw InvalidInput("ust-peano needs a rectangle domain with a wired arc");
            break;
    }
}

namespace {

Curve make_curve(std::vector<Point> pts, const ModelSpec& s) {
    Curve c;
    c.points = std::move(pts);
    c.meta.model = to_string(s.model);
    c.meta.seed = s.seed;
    c.meta.spacing = s.domain.spacing;
    c.meta.simple = true;
    return c;
}

std::array<int, 2> rot60(std::array<int, 2> d) { return {-d[1], d[0] + d[1]}; }
std::array<int, 2> rotm60(std::array<int, 2> d) { return {d[0] + d[1], -d[0]}; }

// the two sites adjacent to both s and t
std::array<int, 2> common_neighbours(const DiscreteDomain& d, int s, int t) {
    std::array<int, 2> cs = d.coord[s], dir = {d.coord[t][0] - cs[0], d.coord[t][1] - cs[1]};
    auto u = rot60(dir), v = rotm60(dir);
    return {d.find(cs[0] + u[0], cs[1] + u[1]), d.find(cs[0] + v[0], cs[1] + v[1])};
}

}  // namespace

bool HexExploration::done() const {
    return open == domain->arc1.back() && closed == domain->arc2.back();
}

void HexExploration::step(int c) {
    const DiscreteDomain& d = *domain;
    const int x = ahead;
    if (color[x] < 0) {
        color[x] = std::int8_t(c ? 1 : 0);
        revealed.push_back(x);
        revealed_at[x] = int(points.size());
    }
    points.push_back((d.pos[open] + d.pos[closed] + d.pos[x]) / 3.0);
    int replaced;
    if (color[x] == 1) {
        replaced = open;
        open = x;
    } else {
        replaced = closed;
        closed = x;
    }
    if (done()) {
        points.push_back(0.5 * (d.pos[open] + d.pos[closed]));
        ahead = -1;
        return;
    }
    auto cn = common_neighbours(d, open, closed);
    ahead = cn[0] == replaced ? cn[1] : cn[0];
    if (ahead < 0) throw InvalidInput("exploration left the domain: domain is not admissible");
}

HexExploration start_hex_exploration_unchecked(const DiscreteDomain& d) {
    HexExploration ex;
    ex.domain = &d;
    ex.color.assign(d.size(), -1);
    ex.revealed_at.assign(d.size(), -1);
    for (int s = 0; s < d.size(); ++s)
        if (d.role[s] != Interior) ex.color[s] = d.role[s] == Arc1 ? 1 : 0;
    ex.open = d.arc1.front();
    ex.closed = d.arc2.front();
    auto cn = common_neighbours(d, ex.open, ex.closed);
    if ((cn[0] >= 0) == (cn[1] >= 0))
        throw InvalidInput("start edge at a must have exactly one triangle inside the domain");
    ex.ahead = cn[0] >= 0 ? cn[0] : cn[1];
    ex.points.push_back(d.a);
    return ex;
}

void check_hex_admissible(const DiscreteDomain& d) {
    for (int c : {0, 1}) {
        HexExploration ex = start_hex_exploration_unchecked(d);
        const int limit = 2 * d.size() + 8;
        for (int k = 0; !ex.done(); ++k) {
            if (k > limit) throw InvalidInput("exploration does not reach b: domain is not admissible");
            ex.step(c);
        }
    }
}

HexExploration start_hex_exploration(const DiscreteDomain& d) {
    check_hex_admissible(d);
    return start_hex_exploration_unchecked(d);
}

Curve hex_interface(const DiscreteDomain& d, const std::vector<std::int8_t>& colors) {
    if (int(colors.size()) != d.size()) throw InvalidInput("colouring size mismatch");
    HexExploration ex = start_hex_exploration_unchecked(d);
    const int limit = 2 * d.size() + 8;
    for (int k = 0; !ex.done(); ++k) {
        if (k > limit) throw InvalidInput("exploration does not reach b: domain is not admissible");
        ex.step(colors[ex.ahead]);
    }
    Curve c;
    c.points = std::move(ex.points);
    c.meta.model = "percolation";
    c.meta.simple = true;
    return c;
}

double harmonic_explorer_probability(const HexExploration& ex, std::vector<double>* warm) {
    if (ex.ahead_known()) return ex.color[ex.ahead];
    const DiscreteDomain& d = *ex.domain;
    std::vector<std::uint8_t> fr(d.size());
    std::vector<double> data(d.size(), 0.0);
    for (int s = 0; s < d.size(); ++s) {
        fr[s] = ex.color[s] < 0;
        if (!fr[s]) data[s] = ex.color[s];
    }
    HarmonicField h = harmonic_solve_masked(d.nbr, fr, data, 1e-10, warm);
    if (warm) *warm = h.value;
    return std::clamp(h.value[ex.ahead], 0.0, 1.0);
}

void continue_percolation(HexExploration& ex, double p, Rng& rng) {
    while (!ex.done()) ex.step(ex.ahead_known() ? 0 : rng.bernoulli(p));
}

void continue_harmonic_explorer(HexExploration& ex, Rng& rng, std::vector<double>* warm) {
    std::vector<double> local;
    if (!warm) warm = &local;
    if (warm->size() != ex.color.size()) warm->assign(ex.color.size(), 0.5);
    while (!ex.done()) {
        if (ex.ahead_known()) {
            ex.step(0);
            continue;
        }
        double p = harmonic_explorer_probability(ex, warm);
        ex.step(rng.bernoulli(p));
    }
}

Curve sample_percolation(const ModelSpec& s) {
    validate_spec(s);
    HexExploration ex = start_hex_exploration(s.domain);
    Rng rng(s.seed);
    continue_percolation(ex, effective_p(s), rng);
    return make_curve(std::move(ex.points), s);
}

Curve sample_harmonic_explorer(const ModelSpec& s) {
    validate_spec(s);
    HexExploration ex = start_hex_exploration(s.domain);
    Rng rng(s.seed);
    continue_harmonic_explorer(ex, rng);
    return make_curve(std::move(ex.points), s);
}

std::vector<int> loop_erase(const std::vector<int>& path) {
    std::vector<int> out;
    std::unordered_map<int, std::size_t> where;
    for (int v : path) {
        auto it = where.find(v);
        if (it != where.end()) {
            for (std::size_t k = it->second + 1; k < out.size(); ++k) where.erase(out[k]);
            out.resize(it->second + 1);
        } else {
            where[v] = out.size();
            out.push_back(v);
        }
    }
    return out;
}

Curve sample_lerw(const ModelSpec& s) {
    validate_spec(s);
    const DiscreteDomain& d = s.domain;
    HarmonicField h = harmonic_measure_of(d, d.b_site);
    Rng rng(s.seed);
    auto walk = random_walk(d, d.a_site, &h, rng);
    if (walk.back() != d.b_site) throw ConditioningImpossible("conditioned walk missed b");
    std::vector<Point> pts;
    for (int v : loop_erase(walk)) pts.push_back(d.pos[v]);
    return make_curve(std::move(pts), s);
}

// ---------------------------------------------------------------------------

FkChain::FkChain(Graph g, std::vector<int> wired_edges, std::vector<int> wiring, double p, double q,
                 std::uint64_t seed)
    : g_(std::move(g)), wiring_(std::move(wiring)), p_(p), q_(q), rng_(seed) {
    if (!(p > 0.0 && p < 1.0) || !(q > 0.0)) throw InvalidInput("fk parameters out of range");
    const int m = int(g_.edges.size());
    cfg_.open.assign(m, 0);
    cfg_.wired = std::move(wired_edges);
    std::vector<char> is_wired(m, 0);
    for (int e : cfg_.wired) {
        if (e < 0 || e >= m) throw InvalidInput("wired edge index out of range");
        is_wired[e] = 1;
        cfg_.open[e] = 1;
    }
    for (int e = 0; e < m; ++e)
        if (!is_wired[e]) free_.push_back(e);
    inc_.assign(g_.n, {});
    for (int e = 0; e < m; ++e) {
        inc_[g_.edges[e][0]].emplace_back(e, g_.edges[e][1]);
        inc_[g_.edges[e][1]].emplace_back(e, g_.edges[e][0]);
    }
    wiring_.resize(g_.n, -1);
    std::map<int, int> group_of;
    for (int v = 0; v < g_.n; ++v) {
        if (wiring_[v] < 0) continue;
        auto [it, fresh] = group_of.emplace(wiring_[v], int(wired_groups_.size()));
        if (fresh) wired_groups_.emplace_back();
        wired_groups_[it->second].push_back(v);
        wiring_[v] = it->second;
    }
    mark_.assign(g_.n, 0);
}

bool FkChain::connected_without(int e) const {
    const int u = g_.edges[e][0], v = g_.edges[e][1];
    if (u == v) return true;
    ++stamp_;
    std::vector<int> group_done(wired_groups_.size(), 0);
    stack_.assign(1, u);
    mark_[u] = stamp_;
    auto visit = [&](int y) {
        if (mark_[y] == stamp_) return;
        mark_[y] = stamp_;
        stack_.push_back(y);
    };
    while (!stack_.empty()) {
        int x = stack_.back();
        stack_.pop_back();
        if (x == v) return true;
        if (wiring_[x] >= 0 && !group_done[wiring_[x]]) {
            group_done[wiring_[x]] = 1;
            for (int y : wired_groups_[wiring_[x]]) visit(y);
        }
        for (auto [f, y] : inc_[x])
            if (f != e && cfg_.open[f]) visit(y);
    }
    return false;
}

double FkChain::open_probability(int e) const {
    // odds of open vs closed are (p/(1-p)) q^{dk}, dk = -1 when e joins two clusters
    return connected_without(e) ? p_ : p_ / (p_ + (1.0 - p_) * q_);
}

void FkChain::step() {
    if (free_.empty()) return;
    int e = free_[rng_.below(free_.size())];
    cfg_.open[e] = rng_.bernoulli(open_probability(e));
}

void FkChain::sweep() {
    for (std::size_t k = 0; k < free_.size(); ++k) step();
}

namespace {

int nhoriz(const DiscreteDomain& d) { return (d.rect_nx - 1) * d.rect_ny; }

bool in_rect(const DiscreteDomain& d, int x, int y) {
    return x >= 0 && y >= 0 && x < d.rect_nx && y < d.rect_ny;
}

}  // namespace

int rect_edge_id(const DiscreteDomain& d, std::array<int, 2> u, std::array<int, 2> v) {
    if (!in_rect(d, u[0], u[1]) || !in_rect(d, v[0], v[1])) return -1;
    if (u > v) std::swap(u, v);
    if (u[1] == v[1] && v[0] == u[0] + 1) return u[1] * (d.rect_nx - 1) + u[0];
    if (u[0] == v[0] && v[1] == u[1] + 1) return nhoriz(d) + u[1] * d.rect_nx + u[0];
    return -1;
}

RectGraph rect_graph(const DiscreteDomain& d) {
    const int nx = d.rect_nx, ny = d.rect_ny;
    if (nx < 1 || ny < 1) throw InvalidInput("domain is not a rectangle");
    RectGraph rg;
    rg.g.n = nx * ny;
    for (int y = 0; y < ny; ++y)
        for (int x = 0; x + 1 < nx; ++x) rg.g.edges.push_back({y * nx + x, y * nx + x + 1});
    for (int y = 0; y + 1 < ny; ++y)
        for (int x = 0; x < nx; ++x) rg.g.edges.push_back({y * nx + x, (y + 1) * nx + x});
    rg.wiring.assign(rg.g.n, -1);
    rg.on_wired_arc.assign(rg.g.n, 0);
    auto bnd = rect_boundary(nx, ny);
    const int nb = int(bnd.size());
    for (int k = d.wired_lo; k <= d.wired_hi; ++k) {
        auto v = bnd[k % nb];
        if (!rg.wired_path.empty()) {
            int e = rect_edge_id(d, rg.wired_path.back(), v);
            if (e < 0) throw InvalidInput("wired arc is not a lattice path");
            rg.wired_edges.push_back(e);
        }
        rg.wired_path.push_back(v);
        rg.wiring[v[1] * nx + v[0]] = 0;
        rg.on_wired_arc[v[1] * nx + v[0]] = 1;
    }
    return rg;
}

namespace {

// Tiles of the modified medial lattice in doubled coordinates: primal vertex
// v -> 2v, dual face f -> 2f, edge e -> twice its midpoint.
using Tile = std::array<int, 2>;
enum TileType { Primal, Dual, Square };

TileType type_of(Tile t) {
    bool ox = t[0] & 1, oy = t[1] & 1;
    if (!ox && !oy) return Primal;
    if (ox && oy) return Dual;
    return Square;
}

// a vertex of the tiling: one primal octagon, one dual octagon, one square
struct MVertex {
    Tile P, D, S;
    bool operator==(const MVertex& o) const { return P == o.P && D == o.D && S == o.S; }
};

Point medial_position(const MVertex& m) {
    Point mid(m.S[0] * 0.5, m.S[1] * 0.5);
    Point dv((m.P[0] - m.S[0]) * 0.5, (m.P[1] - m.S[1]) * 0.5);
    Point df((m.D[0] - m.S[0]) * 0.5, (m.D[1] - m.S[1]) * 0.5);
    return mid + 0.2 * (dv / std::abs(dv) + df / std::abs(df));
}

struct Bathroom {
    const DiscreteDomain& d;
    const EdgeConfig& cfg;
    std::vector<std::uint8_t> on_arc;

    int colour(Tile t) const {
        switch (type_of(t)) {
            case Primal:
                if (!in_rect(d, t[0] / 2, t[1] / 2))
                    throw InvalidInput("interface left the domain");
                return 1;
            case Dual: return 0;
            case Square: break;
        }
        std::array<int, 2> u, v;
        if (t[0] & 1) {
            u = {(t[0] - 1) / 2, t[1] / 2};
            v = {(t[0] + 1) / 2, t[1] / 2};
        } else {
            u = {t[0] / 2, (t[1] - 1) / 2};
            v = {t[0] / 2, (t[1] + 1) / 2};
        }
        bool iu = in_rect(d, u[0], u[1]), iv = in_rect(d, v[0], v[1]);
        if (iu && iv) return cfg.open[rect_edge_id(d, u, v)];
        if (!iu && !iv) throw InvalidInput("interface left the domain");
        auto w = iu ? u : v;
        return on_arc[w[1] * d.rect_nx + w[0]];
    }
};

// vertex at the far end of the edge shared by tiles a and b, seen from `head`
MVertex other_end(Tile a, Tile b, const MVertex& head) {
    if (type_of(a) > type_of(b)) std::swap(a, b);
    MVertex m = head;
    TileType ta = type_of(a), tb = type_of(b);
    if (ta == Primal && tb == Dual) {
        Tile h = {a[0] + (b[0] - a[0]), a[1]}, v = {a[0], a[1] + (b[1] - a[1])};
        m.S = head.S == h ? v : h;
    } else if (ta == Primal && tb == Square) {
        Tile d1, d2;
        if (b[0] & 1) {
            d1 = {b[0], b[1] - 1};
            d2 = {b[0], b[1] + 1};
        } else {
            d1 = {b[0] - 1, b[1]};
            d2 = {b[0] + 1, b[1]};
        }
        m.D = head.D == d1 ? d2 : d1;
    } else {
        Tile p1, p2;
        if (b[0] & 1) {
            p1 = {b[0] - 1, b[1]};
            p2 = {b[0] + 1, b[1]};
        } else {
            p1 = {b[0], b[1] - 1};
            p2 = {b[0], b[1] + 1};
        }
        m.P = head.P == p1 ? p2 : p1;
    }
    return m;
}

Tile third_tile(const MVertex& m, Tile a, Tile b) {
    for (Tile t : {m.P, m.D, m.S})
        if (t != a && t != b) return t;
    throw InvalidInput("degenerate tiling vertex");
}

// dual face outside the boundary edge (u -> v, counterclockwise), doubled
Tile outer_face(std::array<int, 2> u, std::array<int, 2> v) {
    int dx = v[0] - u[0], dy = v[1] - u[1];
    return {u[0] + v[0] + dy, u[1] + v[1] - dx};
}

}  // namespace

Curve fk_interface(const DiscreteDomain& d, const EdgeConfig& cfg) {
    const int nx = d.rect_nx, ny = d.rect_ny;
    if (nx < 2 || ny < 2) throw InvalidInput("fk interface needs a rectangle of at least 2 x 2");
    RectGraph rg = rect_graph(d);
    if (cfg.open.size() != rg.g.edges.size()) throw InvalidInput("edge configuration size mismatch");
    Bathroom bath{d, cfg, rg.on_wired_arc};
    auto bnd = rect_boundary(nx, ny);
    const int nb = int(bnd.size());
    auto va = bnd[d.wired_lo % nb], vb = bnd[d.wired_hi % nb];
    auto ua = bnd[(d.wired_lo + nb - 1) % nb], wb = bnd[(d.wired_hi + 1) % nb];
    Tile Pa = {2 * va[0], 2 * va[1]}, Da = outer_face(ua, va);
    Tile Pb = {2 * vb[0], 2 * vb[1]}, Db = outer_face(vb, wb);
    // the start edge joins the outward square of va to the boundary square (ua, va)
    Tile s_bnd = {ua[0] + va[0], ua[1] + va[1]};
    MVertex head{Pa, Da, s_bnd};
    Tile s_out = (Da[0] - Pa[0] == s_bnd[0] - Pa[0]) ? Tile{Pa[0], Da[1]} : Tile{Da[0], Pa[1]};
    MVertex tail{Pa, Da, s_out};
    Tile one = Pa, zero = Da;
    std::vector<Point> pts{medial_position(tail), medial_position(head)};
    const long limit = 8L * (nx + 2) * (ny + 2);
    for (long k = 0; !(one == Pb && zero == Db); ++k) {
        if (k > limit) throw InvalidInput("fk exploration does not reach b");
        Tile x = third_tile(head, one, zero);
        if (bath.colour(x))
            one = x;
        else
            zero = x;
        head = other_end(one, zero, head);
        pts.push_back(medial_position(head));
    }
    Curve c;
    c.points = std::move(pts);
    c.meta.model = "fk-ising";
    c.meta.simple = true;
    return c;
}

Curve sample_fk_ising(const ModelSpec& s) {
    validate_spec(s);
    RectGraph rg = rect_graph(s.domain);
    FkChain chain(rg.g, rg.wired_edges, rg.wiring, effective_p(s), s.q, s.seed);
    for (int k = 0; k < s.sweeps; ++k) chain.sweep();
    Curve c = fk_interface(s.domain, chain.config());
    c.meta = make_curve({}, s).meta;
    return c;
}

// ---------------------------------------------------------------------------

std::vector<std::uint8_t> wilson_tree(const Graph& g, const std::vector<std::uint8_t>& root, Rng& rng) {
    if (int(root.size()) != g.n) throw InvalidInput("root mask size mismatch");
    if (std::none_of(root.begin(), root.end(), [](std::uint8_t r) { return r != 0; }))
        throw InvalidInput("wilson's algorithm needs at least one root vertex");
    std::vector<std::vector<std::pair<int, int>>> inc(g.n);
    for (int e = 0; e < int(g.edges.size()); ++e) {
        inc[g.edges[e][0]].emplace_back(e, g.edges[e][1]);
        inc[g.edges[e][1]].emplace_back(e, g.edges[e][0]);
    }
    std::vector<std::uint8_t> in(root.begin(), root.end()), tree(g.edges.size(), 0);
    std::vector<int> next_edge(g.n, -1), next(g.n, -1);
    for (int v = 0; v < g.n; ++v) {
        if (in[v]) continue;
        for (int u = v; !in[u];) {
            if (inc[u].empty()) throw InvalidInput("graph is not connected to the roots");
            auto [e, w] = inc[u][rng.below(inc[u].size())];
            next_edge[u] = e;
            next[u] = w;
            u = w;
        }
        for (int u = v; !in[u]; u = next[u]) {
            in[u] = 1;
            tree[next_edge[u]] = 1;
        }
    }
    return tree;
}

Curve peano_curve(const DiscreteDomain& d, const std::vector<std::uint8_t>& in_tree) {
    const int nx = d.rect_nx, ny = d.rect_ny;
    RectGraph rg = rect_graph(d);
    if (in_tree.size() != rg.g.edges.size()) throw InvalidInput("tree size mismatch");
    // fine vertex v + (sx, sy)/4 stored in quarter units
    auto key = [&](int fx, int fy) { return std::pair<int, int>(fx, fy); };
    std::map<std::pair<int, int>, int> idx;
    std::vector<std::array<int, 2>> fine;
    std::vector<std::uint8_t> cut;
    for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x)
            for (auto [sx, sy] : {std::pair{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}) {
                idx[key(4 * x + sx, 4 * y + sy)] = int(fine.size());
                fine.push_back({4 * x + sx, 4 * y + sy});
                bool outside = !in_rect(d, x + sx, y) || !in_rect(d, x, y + sy);
                cut.push_back(rg.on_wired_arc[y * nx + x] && outside);
            }
    auto floor4 = [](int q) { return q >= 0 ? q / 4 : -((-q + 3) / 4); };
    auto tree_edge = [&](std::array<int, 2> u, std::array<int, 2> v) {
        int e = rect_edge_id(d, u, v);
        return e >= 0 && in_tree[e];
    };
    const int n = int(fine.size());
    std::vector<std::array<int, 2>> adj(n, {-1, -1});
    for (int i = 0; i < n; ++i) {
        int deg = 0;
        auto [fx, fy] = fine[i];
        for (auto [mx, my] : {std::pair{2, 0}, {-2, 0}, {0, 2}, {0, -2}}) {
            int cx = fx + mx / 2, cy = fy + my / 2;  // crossing point
            bool allowed;
            if (mx != 0) {
                if (cx % 4 == 0) {  // primal vertical edge
                    int X = cx / 4, Y = floor4(fy);
                    allowed = !tree_edge({X, Y}, {X, Y + 1});
                } else {  // dual of a horizontal edge
                    int X = floor4(cx), Y = floor4(fy + 1);
                    allowed = tree_edge({X, Y}, {X + 1, Y});
                }
            } else {
                if (cy % 4 == 0) {
                    int Y = cy / 4, X = floor4(fx);
                    allowed = !tree_edge({X, Y}, {X + 1, Y});
                } else {
                    int Y = floor4(cy), X = floor4(fx + 1);
                    allowed = tree_edge({X, Y}, {X, Y + 1});
                }
            }
            if (!allowed) continue;
            auto it = idx.find(key(fx + mx, fy + my));
            if (it == idx.end() || deg == 2) throw ResolutionError("peano construction failed");
            adj[i][deg++] = it->second;
        }
        if (deg != 2) throw ResolutionError("peano construction failed: fine vertex of degree " +
                                            std::to_string(deg));
    }
    std::vector<int> cycle{0};
    for (int prev = -1, cur = 0;;) {
        int nxt = adj[cur][0] == prev ? adj[cur][1] : adj[cur][0];
        prev = cur;
        cur = nxt;
        if (cur == 0) break;
        cycle.push_back(cur);
        if (int(cycle.size()) > n) break;
    }
    if (int(cycle.size()) != n) throw ResolutionError("tree contour is not a single cycle");
    // rotate so the cut stretch sits at the end
    int first_kept = -1;
    for (int k = 0; k < n; ++k)
        if (!cut[cycle[k]] && cut[cycle[(k + n - 1) % n]]) {
            if (first_kept >= 0) throw ResolutionError("fine vertices outside the wired arc are not contiguous");
            first_kept = k;
        }
    if (first_kept < 0) throw ResolutionError("no fine vertices to cut at the wired arc");
    std::vector<Point> pts;
    for (int k = 0; k < n; ++k) {
        int i = cycle[(first_kept + k) % n];
        if (cut[i]) break;
        pts.emplace_back(fine[i][0] * 0.25, fine[i][1] * 0.25);
    }
    if (std::abs(pts.back() - d.a) < std::abs(pts.front() - d.a)) std::reverse(pts.begin(), pts.end());
    Curve c;
    c.points = std::move(pts);
    c.meta.model = "ust-peano";
    c.meta.simple = true;
    return c;
}

std::vector<std::uint8_t> sample_ust_tree(const ModelSpec& s) {
    validate_spec(s);
    RectGraph rg = rect_graph(s.domain);
    Rng rng(s.seed);
    auto tree = wilson_tree(rg.g, rg.on_wired_arc, rng);
    for (int e : rg.wired_edges) tree[e] = 1;
    return tree;
}

Curve sample_ust_peano(const ModelSpec& s) {
    Curve c = peano_curve(s.domain, sample_ust_tree(s));
    c.meta = make_curve({}, s).meta;
    return c;
}

Curve sample(const ModelSpec& s) {
    switch (s.model) {
        case Model::Percolation: return sample_percolation(s);
        case Model::Lerw: return sample_lerw(s);
        case Model::HarmonicExplorer: return sample_harmonic_explorer(s);
        case Model::FkIsing: return sample_fk_ising(s);
        case Model::UstPeano: return sample_ust_peano(s);
    }
    throw InvalidInput("unknown model");
}

}  // namespace ll
