#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "loewner_lab/geometry.hpp"
#include "loewner_lab/lattice.hpp"
#include "loewner_lab/rng.hpp"

namespace ll {

enum class Model { Percolation, Lerw, HarmonicExplorer, FkIsing, UstPeano };

const char* to_string(Model m);
Model model_from_string(const std::string& s);

struct ModelSpec {
    Model model = Model::Percolation;
    DiscreteDomain domain;
    double p = -1.0;  // < 0: model default (1/2, or the self-dual value for fk-ising)
    double q = 2.0;
    int sweeps = 200;
    std::uint64_t seed = 0;
};

double p_self_dual(double q);
double effective_p(const ModelSpec& s);
void validate_spec(const ModelSpec& s);

// --- exploration on the hexagonal dual of a triangular domain -------------

// Interface between the open cluster of arc1 and the closed cluster of arc2.
// `open` is the open site of the current edge, `closed` the closed one, and
// `ahead` the third site of the triangle in front of the tip.
struct HexExploration {
    const DiscreteDomain* domain = nullptr;
    std::vector<std::int8_t> color;    // -1 unrevealed
    std::vector<int> revealed_at;      // point index at which the site was reached, -1 if never
    std::vector<int> revealed;         // ahead sites in exploration order
    int open = -1, closed = -1, ahead = -1;
    std::vector<Point> points;

    bool done() const;
    // Reveal `ahead` with colour c (ignored when it is already coloured).
    void step(int c);
    bool ahead_known() const { return color[ahead] >= 0; }
};

// Throws InvalidInput if the domain is not admissible (the all-open or the
// all-closed exploration leaves the domain or fails to reach b).
HexExploration start_hex_exploration(const DiscreteDomain& d);
HexExploration start_hex_exploration_unchecked(const DiscreteDomain& d);
void check_hex_admissible(const DiscreteDomain& d);

// Interface of a complete colouring (1 open, 0 closed, per site).
Curve hex_interface(const DiscreteDomain& d, const std::vector<std::int8_t>& colors);

// Probability that the harmonic explorer opens `ahead`: the value at `ahead`
// of the function harmonic off the coloured sites with the colours as data.
double harmonic_explorer_probability(const HexExploration& ex, std::vector<double>* warm = nullptr);

void continue_percolation(HexExploration& ex, double p, Rng& rng);
void continue_harmonic_explorer(HexExploration& ex, Rng& rng, std::vector<double>* warm = nullptr);

Curve sample_percolation(const ModelSpec& s);
Curve sample_harmonic_explorer(const ModelSpec& s);

// --- loop-erased random walk ------------------------------------------------

std::vector<int> loop_erase(const std::vector<int>& path);
Curve sample_lerw(const ModelSpec& s);

// --- FK random cluster model ------------------------------------------------

class FkChain {
public:
    // wired edges start and stay open; all other edges start closed.
    FkChain(Graph g, std::vector<int> wired_edges, std::vector<int> wiring, double p, double q,
            std::uint64_t seed);

    void step();
    void sweep();
    // Heat-bath probability of opening e given the rest of the configuration.
    double open_probability(int e) const;
    const EdgeConfig& config() const { return cfg_; }
    const Graph& graph() const { return g_; }
    const std::vector<int>& free_edges() const { return free_; }

private:
    bool connected_without(int e) const;

    Graph g_;
    EdgeConfig cfg_;
    std::vector<int> wiring_;
    std::vector<int> free_;
    std::vector<std::vector<std::pair<int, int>>> inc_;  // (edge, other end)
    std::vector<std::vector<int>> wired_groups_;
    double p_, q_;
    Rng rng_;
    mutable std::vector<int> mark_, stack_;
    mutable int stamp_ = 0;
};

// Graph of a rectangle domain: vertex y*nx+x, horizontal edges then vertical.
struct RectGraph {
    Graph g;
    std::vector<int> wired_edges;
    std::vector<int> wiring;  // 0 on the wired arc, -1 elsewhere
    std::vector<std::uint8_t> on_wired_arc;
    std::vector<std::array<int, 2>> wired_path;  // boundary vertices of the wired arc, a-end first
};
RectGraph rect_graph(const DiscreteDomain& d);
int rect_edge_id(const DiscreteDomain& d, std::array<int, 2> u, std::array<int, 2> v);

// Interface on the modified medial lattice (octagons for primal vertices and
// dual faces, squares for edges) between the primal cluster of the wired arc
// and the dual cluster of the free arc.
Curve fk_interface(const DiscreteDomain& d, const EdgeConfig& cfg);
Curve sample_fk_ising(const ModelSpec& s);

// --- uniform spanning tree and its Peano curve --------------------------------

// Wilson's algorithm rooted at the vertices with root[v] set (treated as one
// vertex).  Returns an in-tree flag per edge; edges among roots are left out.
std::vector<std::uint8_t> wilson_tree(const Graph& g, const std::vector<std::uint8_t>& root, Rng& rng);
// Peano curve of a spanning tree on the quarter-shifted fine lattice.
Curve peano_curve(const DiscreteDomain& d, const std::vector<std::uint8_t>& in_tree);
// Edge flags (rect_edge_id numbering) of the tree conditioned to contain the wired arc.
std::vector<std::uint8_t> sample_ust_tree(const ModelSpec& s);
Curve sample_ust_peano(const ModelSpec& s);

Curve sample(const ModelSpec& s);

}  // namespace ll
