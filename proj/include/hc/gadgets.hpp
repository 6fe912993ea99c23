#pragma once

#include <cstdint>
#include <vector>

#include "hc/graph.hpp"

namespace hc {

struct GadgetSpec {
    int n = 0;
    double theta = 0, psi = 0;
    int d = 3;
    std::uint64_t seed = 0;
    int m = 1;           // tree roots per side
    int tree_depth = 0;  // even

    long m_prime() const;  // leaves per side, m (d-1)^tree_depth
    void validate() const;

    // m = (d-1)^floor(theta log_{d-1} n), tree_depth = 2 floor((psi/2) log_{d-1} n)
    static GadgetSpec from_exponents(int n, double theta, double psi, int d, std::uint64_t seed);
    // Desk-scale override: the exponent formulas give m = 1, depth 0 for small n.
    static GadgetSpec explicit_sizes(int n, int m, int tree_depth, int d, std::uint64_t seed);
};

// Vertex layout: W+ [0,n), U+ [n, n+m'), W- [n+m', 2n+m'), U- [2n+m', 2n+2m').
Graph sample_gtilde(const GadgetSpec& spec);
Graph append_trees(const Graph& gt, const GadgetSpec& spec);
Graph build_gadget(const GadgetSpec& spec);  // sample_gtilde + append_trees

// Disjoint copies of gadget per vertex of h; k cross-edges per H-edge in each sign class.
Graph build_hg(const Graph& h, const Graph& gadget, int k);

long default_cross_edges(int n, double theta);  // max(1, floor(n^{3 theta/4}))

struct CycleStats {
    int length = 0;
    long observed = 0;        // simple graph
    long observed_multi = 0;  // multigraph, parallel edges counted with multiplicity
    double lambda_i = 0;      // r(d,i)/i
    double delta_i = 0;       // (alpha beta / ((1-alpha)(1-beta)))^{i/2}
};

long long cycle_colorings(int d, int i);  // r(d,i) = (d-1)^i + (-1)^i (d-1)

// Cycles with all vertices in W, even lengths 2..i_max (i_max <= 12).
std::vector<CycleStats> count_short_cycles(const Graph& g, int i_max, double alpha, double beta);

}  // namespace hc
