#include "loewner_lab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "loewner_lab/cg.hpp"

namespace ll {

const char* to_string(LatticeKind k) {
    switch (k) {
        case LatticeKind::Square: return "square";
        case LatticeKind::Triangular: return "triangular";
        case LatticeKind::HexagonalDual: return "hexagonal-dual";
        case LatticeKind::ModifiedMedial: return "modified-medial";
    }
    return "?";
}

LatticeKind lattice_kind_from_string(const std::string& s) {
    if (s == "square") return LatticeKind::Square;
    if (s == "triangular") return LatticeKind::Triangular;
    if (s == "hexagonal-dual") return LatticeKind::HexagonalDual;
    if (s == "modified-medial") return LatticeKind::ModifiedMedial;
    throw InvalidInput("unknown lattice kind '" + s + "'");
}

namespace {

std::uint64_t pack(int i, int j) {
    return (std::uint64_t(std::uint32_t(i)) << 32) | std::uint32_t(j);
}

}  // namespace

void DiscreteDomain::index() {
    lookup_.clear();
    buckets_.clear();
    for (int s = 0; s < size(); ++s) {
        lookup_[pack(coord[s][0], coord[s][1])] = s;
        auto bx = (int)std::floor(pos[s].real() / spacing), by = (int)std::floor(pos[s].imag() / spacing);
        buckets_[pack(bx, by)].push_back(s);
    }
}

int DiscreteDomain::find(int i, int j) const {
    auto it = lookup_.find(pack(i, j));
    return it == lookup_.end() ? -1 : it->second;
}

int DiscreteDomain::interior_count() const {
    return int(std::count(role.begin(), role.end(), Interior));
}

std::vector<int> DiscreteDomain::sites_near(Point p, double radius) const {
    std::vector<int> out;
    int x0 = (int)std::floor((p.real() - radius) / spacing), x1 = (int)std::floor((p.real() + radius) / spacing);
    int y0 = (int)std::floor((p.imag() - radius) / spacing), y1 = (int)std::floor((p.imag() + radius) / spacing);
    for (int x = x0; x <= x1; ++x)
        for (int y = y0; y <= y1; ++y) {
            auto it = buckets_.find(pack(x, y));
            if (it == buckets_.end()) continue;
            for (int s : it->second)
                if (std::abs(pos[s] - p) <= radius) out.push_back(s);
        }
    std::sort(out.begin(), out.end());
    return out;
}

const std::array<std::array<int, 2>, 6> kTriDirs = {
    {{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}}};

Point triangular_position(int i, int j) {
    return Point(i + 0.5 * j, 0.5 * std::sqrt(3.0) * j);
}

namespace {

void add_sites(DiscreteDomain& d, const std::vector<std::array<int, 2>>& cs, SiteRole role,
               std::vector<int>* ids) {
    for (const auto& c : cs) {
        int id = d.size();
        d.coord.push_back(c);
        d.role.push_back(role);
        d.pos.push_back(d.kind == LatticeKind::Triangular || d.kind == LatticeKind::HexagonalDual
                            ? triangular_position(c[0], c[1])
                            : Point(c[0], c[1]));
        if (ids) ids->push_back(id);
    }
}

void finish_sites(DiscreteDomain& d) {
    d.index();
    for (int s = 0; s < d.size(); ++s)
        if (d.find(d.coord[s][0], d.coord[s][1]) != s)
            throw InvalidInput("site (" + std::to_string(d.coord[s][0]) + "," +
                               std::to_string(d.coord[s][1]) + ") listed twice");
}

void link_neighbours(DiscreteDomain& d, const std::vector<std::array<int, 2>>& dirs) {
    d.nbr.assign(d.size(), {});
    for (int s = 0; s < d.size(); ++s)
        for (const auto& dir : dirs) {
            int t = d.find(d.coord[s][0] + dir[0], d.coord[s][1] + dir[1]);
            if (t >= 0) d.nbr[s].push_back(t);
        }
}

void require_closed_ring(const DiscreteDomain& d, const std::vector<std::array<int, 2>>& dirs) {
    for (int s = 0; s < d.size(); ++s) {
        if (d.role[s] != Interior) continue;
        for (const auto& dir : dirs)
            if (d.find(d.coord[s][0] + dir[0], d.coord[s][1] + dir[1]) < 0)
                throw InvalidInput("interior site (" + std::to_string(d.coord[s][0]) + "," +
                                   std::to_string(d.coord[s][1]) +
                                   ") has a neighbour outside the domain");
    }
}

bool adjacent(const DiscreteDomain& d, int s, int t) {
    return std::find(d.nbr[s].begin(), d.nbr[s].end(), t) != d.nbr[s].end();
}

const std::vector<std::array<int, 2>> kSquareDirs = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

}  // namespace

DiscreteDomain make_triangular_domain(const std::vector<std::array<int, 2>>& interior,
                                      const std::vector<std::array<int, 2>>& arc1,
                                      const std::vector<std::array<int, 2>>& arc2,
                                      LatticeKind kind) {
    if (kind != LatticeKind::Triangular && kind != LatticeKind::HexagonalDual)
        throw InvalidInput("triangular domain needs a triangular or hexagonal-dual kind");
    if (arc1.empty() || arc2.empty()) throw InvalidInput("both boundary arcs must be nonempty");
    DiscreteDomain d;
    d.kind = kind;
    d.spacing = 1.0;
    add_sites(d, interior, Interior, nullptr);
    add_sites(d, arc1, Arc1, &d.arc1);
    add_sites(d, arc2, Arc2, &d.arc2);
    finish_sites(d);
    std::vector<std::array<int, 2>> dirs(kTriDirs.begin(), kTriDirs.end());
    link_neighbours(d, dirs);
    require_closed_ring(d, dirs);
    if (!adjacent(d, d.arc1.front(), d.arc2.front()))
        throw InvalidInput("arcs must meet at a: first sites are not adjacent");
    if (!adjacent(d, d.arc1.back(), d.arc2.back()))
        throw InvalidInput("arcs must meet at b: last sites are not adjacent");
    d.a = 0.5 * (d.pos[d.arc1.front()] + d.pos[d.arc2.front()]);
    d.b = 0.5 * (d.pos[d.arc1.back()] + d.pos[d.arc2.back()]);
    return d;
}

DiscreteDomain make_triangular_rhombus(int n) {
    if (n < 1) throw InvalidInput("rhombus size must be >= 1");
    std::vector<std::array<int, 2>> in, a1, a2;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) in.push_back({i, j});
    for (int i = 0; i <= n; ++i) a1.push_back({i, -1});
    for (int j = 0; j < n; ++j) a1.push_back({n, j});
    for (int j = 0; j <= n; ++j) a2.push_back({-1, j});
    for (int i = 0; i < n; ++i) a2.push_back({i, n});
    return make_triangular_domain(in, a1, a2);
}

DiscreteDomain make_triangular_corridor(int k) {
    if (k < 1) throw InvalidInput("corridor length must be >= 1");
    std::vector<std::array<int, 2>> a1, a2;
    for (int i = 0; i <= k; ++i) a1.push_back({i, 0});
    for (int i = 0; i <= k; ++i) a2.push_back({i, 1});
    return make_triangular_domain({}, a1, a2);
}

namespace {

// ring of outer 4-neighbours of [0,nx) x [0,ny), counterclockwise from (0,-1)
std::vector<std::array<int, 2>> box_ring(int nx, int ny) {
    std::vector<std::array<int, 2>> r;
    for (int x = 0; x < nx; ++x) r.push_back({x, -1});
    for (int y = 0; y < ny; ++y) r.push_back({nx, y});
    for (int x = nx - 1; x >= 0; --x) r.push_back({x, ny});
    for (int y = ny - 1; y >= 0; --y) r.push_back({-1, y});
    return r;
}

}  // namespace

std::vector<std::array<int, 2>> rect_boundary(int nx, int ny) {
    std::vector<std::array<int, 2>> r;
    if (nx == 1 || ny == 1) {  // a path, not a cycle
        for (int x = 0; x < nx; ++x)
            for (int y = 0; y < ny; ++y) r.push_back({x, y});
        return r;
    }
    for (int x = 0; x < nx; ++x) r.push_back({x, 0});
    for (int y = 1; y < ny; ++y) r.push_back({nx - 1, y});
    for (int x = nx - 2; x >= 0; --x) r.push_back({x, ny - 1});
    for (int y = ny - 2; y >= 1; --y) r.push_back({0, y});
    return r;
}

DiscreteDomain make_square_box(int nx, int ny, std::array<int, 2> a, std::array<int, 2> b) {
    if (nx < 1 || ny < 1) throw InvalidInput("box dimensions must be positive");
    auto ring = box_ring(nx, ny);
    auto ia = std::find(ring.begin(), ring.end(), a), ib = std::find(ring.begin(), ring.end(), b);
    if (ia == ring.end() || ib == ring.end())
        throw InvalidInput("marked points of a box must be outer-ring sites");
    if (ia == ib) throw InvalidInput("marked points a and b must differ");
    const std::size_t n = ring.size(), pa = std::size_t(ia - ring.begin()),
                      pb = std::size_t(ib - ring.begin());
    std::vector<std::array<int, 2>> in, a1, a2;
    for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x) in.push_back({x, y});
    for (std::size_t k = pa; k != pb; k = (k + 1) % n) a1.push_back(ring[k]);
    for (std::size_t k = (pa + n - 1) % n;; k = (k + n - 1) % n) {
        a2.push_back(ring[k]);
        if (k == pb) break;
    }
    DiscreteDomain d;
    d.kind = LatticeKind::Square;
    add_sites(d, in, Interior, nullptr);
    add_sites(d, a1, Arc1, &d.arc1);
    add_sites(d, a2, Arc2, &d.arc2);
    finish_sites(d);
    link_neighbours(d, kSquareDirs);
    d.a_site = d.arc1.front();
    d.b_site = d.arc2.back();
    d.a = d.pos[d.a_site];
    d.b = d.pos[d.b_site];
    d.rect_nx = nx;
    d.rect_ny = ny;
    return d;
}

DiscreteDomain make_square_rect(int nx, int ny, int wired_lo, int wired_hi, LatticeKind kind) {
    if (nx < 1 || ny < 1 || nx * ny < 2) throw InvalidInput("rectangle needs at least 2 vertices");
    auto bnd = rect_boundary(nx, ny);
    const int nb = int(bnd.size());
    if (wired_lo < 0 || wired_hi < wired_lo) throw InvalidInput("wired arc indices out of order");
    if (wired_hi - wired_lo + 1 >= nb)
        throw InvalidInput("wired arc may not be the entire boundary");
    // wired arc: boundary vertices with counterclockwise index in [lo, hi] (mod nb)
    std::set<std::array<int, 2>> wired;
    for (int k = wired_lo; k <= wired_hi; ++k) wired.insert(bnd[k % nb]);
    auto ring = box_ring(nx, ny);
    const int nr = int(ring.size());
    auto inner = [&](const std::array<int, 2>& r) -> std::array<int, 2> {
        return {std::clamp(r[0], 0, nx - 1), std::clamp(r[1], 0, ny - 1)};
    };
    std::vector<char> is_w(nr);
    for (int k = 0; k < nr; ++k) is_w[k] = wired.count(inner(ring[k])) > 0;
    // rotate so that the wired stretch starts at index 0
    int start = -1;
    for (int k = 0; k < nr; ++k)
        if (is_w[k] && !is_w[(k + nr - 1) % nr]) start = k;
    if (start < 0) throw InvalidInput("wired arc has no outer ring sites");
    std::vector<std::array<int, 2>> a1, a2, in;
    int k = start;
    while (is_w[k]) {
        a1.push_back(ring[k]);
        k = (k + 1) % nr;
    }
    for (int q = (start + nr - 1) % nr; !is_w[q]; q = (q + nr - 1) % nr) a2.push_back(ring[q]);
    for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x) in.push_back({x, y});
    DiscreteDomain d;
    d.kind = kind;
    add_sites(d, in, Interior, nullptr);
    add_sites(d, a1, Arc1, &d.arc1);
    add_sites(d, a2, Arc2, &d.arc2);
    finish_sites(d);
    link_neighbours(d, kSquareDirs);
    d.rect_nx = nx;
    d.rect_ny = ny;
    d.wired_lo = wired_lo;
    d.wired_hi = wired_hi;
    d.a = 0.5 * (d.pos[d.arc1.front()] + d.pos[d.arc2.front()]);
    d.b = 0.5 * (d.pos[d.arc1.back()] + d.pos[d.arc2.back()]);
    return d;
}

namespace {

std::vector<std::array<int, 2>> coords_of(const nlohmann::json& j, const char* key) {
    std::vector<std::array<int, 2>> out;
    if (!j.contains(key)) return out;
    for (const auto& p : j.at(key)) out.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
    return out;
}

}  // namespace

DiscreteDomain load_domain_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("domain spec: ") + e.what());
    }
    try {
        LatticeKind kind = lattice_kind_from_string(j.at("lattice").get<std::string>());
        std::string shape = j.value("shape", std::string("explicit"));
        if (kind == LatticeKind::Triangular || kind == LatticeKind::HexagonalDual) {
            if (shape == "rhombus") {
                auto d = make_triangular_rhombus(j.at("n").get<int>());
                d.kind = kind;
                return d;
            }
            if (shape == "corridor") return make_triangular_corridor(j.at("n").get<int>());
            if (shape == "explicit")
                return make_triangular_domain(coords_of(j, "sites"), coords_of(j, "arc1"),
                                              coords_of(j, "arc2"), kind);
        } else if (kind == LatticeKind::Square) {
            if (shape == "box") {
                auto a = j.at("a"), b = j.at("b");
                return make_square_box(j.at("nx").get<int>(), j.at("ny").get<int>(),
                                       {a.at(0).get<int>(), a.at(1).get<int>()},
                                       {b.at(0).get<int>(), b.at(1).get<int>()});
            }
            if (shape == "rect") {
                auto w = j.at("wired");
                return make_square_rect(j.at("nx").get<int>(), j.at("ny").get<int>(),
                                        w.at(0).get<int>(), w.at(1).get<int>(), kind);
            }
        } else if (kind == LatticeKind::ModifiedMedial) {
            if (shape == "rect") {
                auto w = j.at("wired");
                return make_square_rect(j.at("nx").get<int>(), j.at("ny").get<int>(),
                                        w.at(0).get<int>(), w.at(1).get<int>(), kind);
            }
        }
        throw InvalidInput("unsupported shape '" + shape + "' for lattice " + to_string(kind));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("domain spec field error: ") + e.what());
    }
}

DiscreteDomain load_domain_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open domain file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_domain_json(ss.str());
}

HarmonicField harmonic_solve_masked(const std::vector<std::vector<int>>& nbr,
                                    const std::vector<std::uint8_t>& free_site,
                                    const std::vector<double>& data, double tol,
                                    const std::vector<double>* warm) {
    const int n = int(nbr.size());
    HarmonicField h;
    h.value = data;
    std::vector<int> comp(n, -1);
    int ncomp = 0;
    std::vector<int> stack;
    for (int s = 0; s < n; ++s) {
        if (!free_site[s] || comp[s] >= 0) continue;
        stack.assign(1, s);
        comp[s] = ncomp;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v : nbr[u])
                if (free_site[v] && comp[v] < 0) {
                    comp[v] = ncomp;
                    stack.push_back(v);
                }
        }
        ++ncomp;
    }
    if (ncomp > 1)
        h.warnings.push_back("interior splits into " + std::to_string(ncomp) +
                             " components; solved separately");
    std::vector<std::vector<int>> members(ncomp);
    for (int s = 0; s < n; ++s)
        if (comp[s] >= 0) members[comp[s]].push_back(s);
    std::vector<int> local(n, -1);
    for (int c = 0; c < ncomp; ++c) {
        const auto& mem = members[c];
        for (int k = 0; k < int(mem.size()); ++k) local[mem[k]] = k;
        LaplaceSystem A;
        std::vector<double> b;
        bool anchored = false;
        std::vector<std::pair<int, double>> row;
        for (int s : mem) {
            row.clear();
            double rhs = 0.0;
            for (int v : nbr[s]) {
                if (free_site[v])
                    row.emplace_back(local[v], 1.0);
                else {
                    rhs += data[v];
                    anchored = true;
                }
            }
            A.add_row(row, double(nbr[s].size()));
            b.push_back(rhs);
        }
        if (!anchored) {
            h.warnings.push_back("component without boundary contact left at 0");
            for (int s : mem) h.value[s] = 0.0;
            continue;
        }
        std::vector<double> x(mem.size(), 0.0);
        if (warm)
            for (std::size_t k = 0; k < mem.size(); ++k) x[k] = (*warm)[mem[k]];
        CgResult res = cg_solve(A, b, x, tol, 100000);
        if (!res.converged) throw ResolutionError("harmonic solve did not converge");
        h.iterations += res.iterations;
        h.residual = std::max(h.residual, res.residual);
        for (std::size_t k = 0; k < mem.size(); ++k) h.value[mem[k]] = x[k];
    }
    return h;
}

HarmonicField harmonic_solve(const DiscreteDomain& d, const std::vector<double>& boundary) {
    if (int(boundary.size()) != d.size()) throw InvalidInput("boundary data size mismatch");
    std::vector<std::uint8_t> fr(d.size());
    for (int s = 0; s < d.size(); ++s) {
        fr[s] = d.role[s] == Interior;
        if (!fr[s] && !std::isfinite(boundary[s]))
            throw InvalidInput("boundary partition leaves a boundary site without a value");
    }
    return harmonic_solve_masked(d.nbr, fr, boundary);
}

HarmonicField harmonic_solve(const DiscreteDomain& d) {
    std::vector<double> data(d.size(), 0.0);
    for (int s = 0; s < d.size(); ++s) data[s] = d.role[s] == Arc1 ? 1.0 : 0.0;
    return harmonic_solve(d, data);
}

HarmonicField harmonic_measure_of(const DiscreteDomain& d, int target) {
    if (target < 0 || target >= d.size() || d.role[target] == Interior)
        throw InvalidInput("harmonic measure target must be a boundary site");
    std::vector<double> data(d.size(), 0.0);
    data[target] = 1.0;
    return harmonic_solve(d, data);
}

UnionFind::UnionFind(int n) { reset(n); }

void UnionFind::reset(int n) {
    parent_.resize(n);
    std::iota(parent_.begin(), parent_.end(), 0);
    rank_.assign(n, 0);
    comps_ = n;
}

int UnionFind::find(int x) {
    while (parent_[x] != x) {
        parent_[x] = parent_[parent_[x]];
        x = parent_[x];
    }
    return x;
}

bool UnionFind::unite(int x, int y) {
    x = find(x);
    y = find(y);
    if (x == y) return false;
    if (rank_[x] < rank_[y]) std::swap(x, y);
    parent_[y] = x;
    if (rank_[x] == rank_[y]) ++rank_[x];
    --comps_;
    return true;
}

int component_count(const Graph& g, const EdgeConfig& cfg, const std::vector<int>& wiring) {
    if (cfg.open.size() != g.edges.size()) throw InvalidInput("edge configuration size mismatch");
    for (int e : cfg.wired)
        if (!cfg.open[e]) throw InvalidInput("wired edge " + std::to_string(e) + " is closed");
    UnionFind uf(g.n);
    for (std::size_t e = 0; e < g.edges.size(); ++e)
        if (cfg.open[e]) uf.unite(g.edges[e][0], g.edges[e][1]);
    std::unordered_map<int, int> first;
    for (int v = 0; v < int(wiring.size()) && v < g.n; ++v) {
        if (wiring[v] < 0) continue;
        auto [it, fresh] = first.emplace(wiring[v], v);
        if (!fresh) uf.unite(it->second, v);
    }
    return uf.components();
}

std::vector<int> random_walk(const DiscreteDomain& d, int start, const HarmonicField* h, Rng& rng,
                             std::size_t max_steps) {
    if (start < 0 || start >= d.size()) throw InvalidInput("walk start outside the domain");
    std::vector<int> path{start};
    int cur = start;
    std::vector<double> w;
    for (std::size_t step = 0; step < max_steps; ++step) {
        const auto& nb = d.nbr[cur];
        // from a boundary start only interior neighbours are allowed
        w.assign(nb.size(), 0.0);
        double tot = 0.0;
        for (std::size_t k = 0; k < nb.size(); ++k) {
            if (step == 0 && d.role[cur] != Interior && d.role[nb[k]] != Interior) continue;
            w[k] = h ? h->value[nb[k]] : 1.0;
            tot += w[k];
        }
        if (!(tot > 0.0)) throw ConditioningImpossible("walk weights vanish at every neighbour");
        double u = rng.uniform() * tot;
        std::size_t pick = nb.size() - 1;
        for (std::size_t k = 0; k < nb.size(); ++k) {
            if (u < w[k]) {
                pick = k;
                break;
            }
            u -= w[k];
        }
        while (w[pick] == 0.0) --pick;
        cur = nb[pick];
        path.push_back(cur);
        if (d.role[cur] != Interior) return path;
    }
    throw ResolutionError("random walk exceeded the step budget");
}

double lattice_eta(const DiscreteDomain& d) {
    double m = 1e300;
    for (int s = 0; s < d.size(); ++s)
        for (int t : d.nbr[s]) m = std::min(m, std::abs(d.pos[s] - d.pos[t]));
    return 0.5 * m;
}

}  // namespace ll
