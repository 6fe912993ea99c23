#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "hc/gadgets.hpp"
#include "hc/graph.hpp"
#include "hc/treegibbs.hpp"

namespace hc {

using Configuration = std::vector<std::uint8_t>;

bool is_independent(const Graph& g, const Configuration& sigma);

// +1 iff sum over W+ >= sum over W- (ties to plus)
int phase_of(const Graph& g, const Configuration& sigma);

struct PartitionValue {
    mpq_class value = 0;
    bool consistent = true;
};

// Deletion recursion Z(G) = Z(G - v) + lambda Z(G - N[v]) with component
// splitting and memoisation. Throws ResourceError above max_vertices.
mpq_class exact_partition(const Graph& g, const mpq_class& lambda, int max_vertices = 128);

// Exhaustive enumeration over all subsets (oracle; n <= 24).
mpq_class brute_force_partition(const Graph& g, const mpq_class& lambda);

// Leaf-to-root dynamic programming on forests.
mpq_class tree_partition(const Graph& g, const mpq_class& lambda);

// Frontier (transfer-matrix) dynamic programming over a vertex order.
enum class Track { None, Difference, Counts };

struct DPOptions {
    mpq_class lambda = 1;
    Track track = Track::None;
    std::vector<std::int8_t> forced;  // per vertex: -1 free, 0 vacant, 1 occupied; empty = all free
    std::vector<int> keep;            // vertices whose state is kept in the result key
};

struct DPResult {
    std::vector<int> keep;  // bit k of a mask refers to keep[k]
    // (mask over keep, tracked value) -> weight
    std::map<std::pair<std::uint64_t, int>, mpq_class> table;
    int max_frontier = 0;

    mpq_class total() const;
};

// Tracked values: Difference is #W+ - #W- occupied; Counts encodes a * kCountBase + b.
constexpr int kCountBase = 4096;

DPResult transfer_dp(const Graph& g, const DPOptions& opt);

// eta is indexed by the U vertices (U+ then U-, increasing id)
std::vector<int> boundary_vertices(const Graph& g);

PartitionValue conditional_partition(const Graph& g, const mpq_class& lambda, const std::vector<std::uint8_t>& eta,
                                     int phase = 0, const std::pair<int, int>* counts = nullptr);

struct MomentInstance {
    int n = 0;
    long m_prime = 0;
    int d = 3;
    int a = 0, b = 0;  // alpha n, beta n
    int eta_plus = 0, eta_minus = 0;
    mpq_class lambda = 1;
};

MomentInstance moment_instance(const GadgetSpec& spec, const mpq_class& alpha, const mpq_class& beta,
                               std::pair<int, int> eta_counts, const mpq_class& lambda);

mpq_class expected_Z_formula(const MomentInstance& in);
mpq_class expected_Z_mww(const MomentInstance& in);
mpq_class expected_Z2_formula(const MomentInstance& in);
mpq_class expected_Z2_mww(const MomentInstance& in);
// C* (lambda ((1-a-b)/(1-b))^{d-1})^{eta-} (lambda ((1-a-b)/(1-a))^{d-1})^{eta+}
// with C* = ((1-a)(1-b)/(1-a-b))^{m'(d-1)}, the limit of the exact first moment ratio.
double first_moment_ratio_shape(const MomentInstance& in);

// Number of independent sets counted by Z^{alpha,beta}(eta) on a sampled G~, with eta
// occupying the first eta+ / eta- U vertices; Z = lambda^{a+b+eta+ +eta-} times this count.
long long sampled_count_alpha_beta(const Graph& gt, const MomentInstance& in);

struct BinomialPerturbation {
    mpq_class exact;
    double approx = 0;
    double rel_error = 0;
};
BinomialPerturbation binomial_perturb_check(long a, long b, long x, long y);

enum class PhaseSign { Plus = 1, Minus = -1 };

// Q_V^{+-}(sigma_V): V+ with density q^{+-}, V- with density q^{-+}
double product_measure_q(const TreeFixedPoints& fp, PhaseSign phase, const std::vector<std::uint8_t>& sigma_vplus,
                         const std::vector<std::uint8_t>& sigma_vminus);

struct PhaseStatistics {
    mpq_class z_plus, z_minus;
    double p_plus = 0, p_minus = 0;
    std::vector<int> v_plus, v_minus;        // vertex ids
    std::vector<double> marg_plus, marg_minus;  // P(sigma_v = 1 | Y = +) per V vertex (V+ then V-)
    std::vector<double> marg_plus_given_minus;  // same under Y = -
    double max_ratio_plus = 0, max_ratio_minus = 0;  // max |P(sigma_V|Y)/Q_V - 1|
};

PhaseStatistics phase_statistics(const Graph& g, const mpq_class& lambda, const TreeFixedPoints& fp);

struct GlauberSummary {
    std::vector<long> wplus, wminus;  // per sweep
    std::vector<int> phase;
    std::vector<long> occupancy_counts;  // per vertex, summed over sweeps
    Configuration final_state;
};

enum class GlauberInit { Empty, Plus, Minus };
Configuration initial_configuration(const Graph& g, GlauberInit init);

GlauberSummary glauber_run(const Graph& g, double lambda, long sweeps, const Configuration& init, std::uint64_t seed);

// Root marginal of the (d-1)-ary tree of the given depth with all vertices at that depth occupied.
double boundary_tree_marginal(const ModelParams& params, int depth);

// Same quantity by exact elimination on the explicit tree (small depth only).
mpq_class boundary_tree_marginal_exact(int d, const mpq_class& lambda, int depth);

}  // namespace hc
