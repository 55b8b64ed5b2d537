#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "loewner_lab/common.hpp"
#include "loewner_lab/rng.hpp"

namespace ll {

enum class LatticeKind { Square, Triangular, HexagonalDual, ModifiedMedial };

const char* to_string(LatticeKind k);
LatticeKind lattice_kind_from_string(const std::string& s);

enum SiteRole : std::int8_t { Interior = 0, Arc1 = 1, Arc2 = 2 };

// Sites of a lattice domain: interior sites plus the ring of boundary sites
// split into two arcs.  Arc1 is the V1 side (open / wired), Arc2 the V2 side.
// Both arcs are listed from the a-end to the b-end.
struct DiscreteDomain {
    LatticeKind kind = LatticeKind::Square;
    double spacing = 1.0;
    std::vector<std::array<int, 2>> coord;
    std::vector<Point> pos;
    std::vector<std::vector<int>> nbr;
    std::vector<SiteRole> role;
    std::vector<int> arc1, arc2;
    Point a, b;               // marked boundary points
    int a_site = -1;          // marked boundary sites (square-lattice walks)
    int b_site = -1;
    int rect_nx = 0, rect_ny = 0;  // rectangle shapes (ust-peano, fk-ising)
    int wired_lo = 0, wired_hi = -1;

    int find(int i, int j) const;
    int size() const { return int(pos.size()); }
    int interior_count() const;
    // sites whose position lies within `radius` of p
    std::vector<int> sites_near(Point p, double radius) const;
    void index();

private:
    std::unordered_map<std::uint64_t, int> lookup_;
    std::unordered_map<std::uint64_t, std::vector<int>> buckets_;
};

// Triangular lattice in axial coordinates: site (i,j) sits at i + j*e^{i*pi/3}.
Point triangular_position(int i, int j);
extern const std::array<std::array<int, 2>, 6> kTriDirs;

DiscreteDomain make_triangular_domain(const std::vector<std::array<int, 2>>& interior,
                                      const std::vector<std::array<int, 2>>& arc1,
                                      const std::vector<std::array<int, 2>>& arc2,
                                      LatticeKind kind = LatticeKind::Triangular);
// n x n rhombus; a and b at the two acute corners, reflection (i,j)->(j,i)
// swaps the arcs.
DiscreteDomain make_triangular_rhombus(int n);
// Two parallel arcs of k+1 sites with no interior: the interface is forced.
DiscreteDomain make_triangular_corridor(int k);

// Square box [0,nx) x [0,ny) with the ring of outer 4-neighbours as boundary.
// a and b are ring sites; arc1 runs counterclockwise from a to b.
DiscreteDomain make_square_box(int nx, int ny, std::array<int, 2> a, std::array<int, 2> b);
// Rectangle of primal vertices [0,nx) x [0,ny).  The wired arc is the run of
// boundary vertices with counterclockwise index in [wired_lo, wired_hi], index
// 0 being (0,0) and indices taken mod the boundary length.  Ring sites next to
// the wired arc form arc1 (ust-peano and fk-ising shapes).
DiscreteDomain make_square_rect(int nx, int ny, int wired_lo, int wired_hi,
                                LatticeKind kind = LatticeKind::Square);
// Boundary vertices of [0,nx) x [0,ny) counterclockwise from (0,0); for a
// single row or column, the vertices in order.
std::vector<std::array<int, 2>> rect_boundary(int nx, int ny);

// Domain spec files: {"lattice": ..., "shape": "rhombus"|"box"|"rect"|"explicit", ...}
DiscreteDomain load_domain_json(const std::string& text);
DiscreteDomain load_domain_file(const std::string& path);

struct HarmonicField {
    std::vector<double> value;  // per site; boundary sites carry their data
    std::vector<std::string> warnings;
    int iterations = 0;
    double residual = 0.0;
};

// Dirichlet problem on the sites marked free; every other site keeps the
// value given in `data`.  Disconnected free components are solved one by one.
HarmonicField harmonic_solve_masked(const std::vector<std::vector<int>>& nbr,
                                    const std::vector<std::uint8_t>& free_site,
                                    const std::vector<double>& data, double tol = 1e-10,
                                    const std::vector<double>* warm = nullptr);
// Interior sites free; arc1 -> 1, arc2 -> 0.
HarmonicField harmonic_solve(const DiscreteDomain& d);
// Interior sites free; boundary values per site.
HarmonicField harmonic_solve(const DiscreteDomain& d, const std::vector<double>& boundary);
// Harmonic measure of the marked site b seen from the interior.
HarmonicField harmonic_measure_of(const DiscreteDomain& d, int target);

class UnionFind {
public:
    explicit UnionFind(int n = 0);
    void reset(int n);
    int find(int x);
    bool unite(int x, int y);
    int components() const { return comps_; }

private:
    std::vector<int> parent_, rank_;
    int comps_ = 0;
};

struct Graph {
    int n = 0;
    std::vector<std::array<int, 2>> edges;
};

struct EdgeConfig {
    std::vector<std::uint8_t> open;
    std::vector<int> wired;  // edges forced open
};

// Number of clusters of (V, open edges) after merging every vertex carrying
// the same nonnegative wiring label.
int component_count(const Graph& g, const EdgeConfig& cfg, const std::vector<int>& wiring);

// Simple random walk (h == nullptr) or Doob h-transform, run until it steps
// onto a boundary site.  Returns the site path including start and exit.
std::vector<int> random_walk(const DiscreteDomain& d, int start, const HarmonicField* h, Rng& rng,
                             std::size_t max_steps = 100000000);

// Half the smallest nearest-neighbour distance, measured on the domain.
double lattice_eta(const DiscreteDomain& d);

}  // namespace ll
