#pragma once

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <vector>

#include "hc/treegibbs.hpp"

namespace hc {

// Alternating broadcast kernels on the (d-1)-ary tree. Row i is the parent
// spin, column j the child spin.
struct BroadcastKernel {
    double q_plus = 0, q_minus = 0;

    static BroadcastKernel from(const TreeFixedPoints& fp) { return {fp.q_plus, fp.q_minus}; }
    std::array<std::array<double, 2>, 2> matrix(int sign) const {
        double q = sign > 0 ? q_plus : q_minus;
        return {{{1 - q, q}, {1.0, 0.0}}};
    }
};

enum class RootPrior { P, Q };

// Spins of a complete (d-1)-ary tree in level order. Vertex v has children
// (d-1)v + 1, ..., (d-1)v + (d-1).
struct TreeSample {
    int d = 3, depth = 0, sign = 1;
    std::vector<std::uint8_t> spin;

    long level_begin(int level) const;
    long level_size(int level) const;
    std::vector<std::uint8_t> leaves() const;
};

// Vertex at depth k has class sign * (-1)^k and, given a vacant parent, is
// occupied with probability q^{class}. The root is occupied with probability
// p^sign (P) or q^sign (Q).
TreeSample broadcast_sample(const TreeFixedPoints& fp, int d, int depth, int sign, RootPrior prior, std::uint64_t seed);

// Bottom-up X = lambda prod(1 - X_i) / (1 + lambda prod(1 - X_i)) from values
// at the deepest level; leaves.size() must be (d-1)^depth. The double version
// works in log-odds.
double posterior_root(const std::vector<double>& leaves, int d, double lambda);
mpq_class posterior_root_exact(const std::vector<mpq_class>& leaves, int d, const mpq_class& lambda);

// Posterior of the root spin in the p-prior model given observed leaf spins
// at the given depth (likelihood-ratio form of the recursion).
double posterior_root_tilde(const std::vector<std::uint8_t>& leaves, int depth, int d, int sign,
                            const TreeFixedPoints& fp);

struct LevelStats {
    int level = 0;
    // p-prior model
    double x = 0, x_se = 0;                  // Var(X)/p
    double x_cond = 0, x_cond_se = 0;        // E[X | sigma = 1] - p
    double x_square = 0, x_square_se = 0;    // E(X - p)^2 / p
    double identity_diff = 0, identity_se = 0;  // (E[X | sigma = 1] - p) - E(X - p)^2 / p
    double child_cond = 0, child_cond_se = 0;   // E[X_u | sigma_u = 0] - p' for the opposite class
    double child_cond_pred = 0;                 // -p' x' / (1 - p')
    // q-prior model
    double mean_q = 0, mean_q_se = 0;        // E X, should equal q^sign
    double abs_dev = 0, abs_dev_se = 0;      // E|X - q^sign|
    double tail = 0, tail_se = 0;            // P(|X - q^sign| >= threshold)
    double threshold = 0;
};

struct DecayOptions {
    int sign = 1;
    int level_min = 1, level_max = 10;
    int fit_min = 4, fit_max = 10;
    long samples = 100000;
    int replicates = 10;
    double zeta1 = 0.3;
    double tail_threshold = -1;  // fixed threshold; negative means exp(-zeta1 level)
    std::uint64_t seed = 1;
    int threads = 1;
};

struct DecayEstimate {
    DecayOptions options;
    int d = 0;
    double lambda = 0;
    std::vector<LevelStats> levels;
    double fitted_rate = 0, fitted_rate_se = 0;
    double predicted_rate = 0;
    double zeta2_fit = 0;  // descriptive: slope of log(-log tail) in level where defined
    bool degenerate = false;

    const LevelStats& at(int level) const;
};

// Population dynamics: each level's population of (spin, posterior) pairs is
// built from the previous level of the opposite class, which matches
// independent subtrees in distribution. Replicates give standard errors.
DecayEstimate estimate_decay(const TreeFixedPoints& fp, int d, double lambda, const DecayOptions& opt);

// Empirical P(|X - q^sign| >= exp(-zeta1 level)) in the q-prior model.
double concentration_tail(const TreeFixedPoints& fp, int d, double lambda, int level, double zeta1, long samples,
                          std::uint64_t seed, int sign = 1);

}  // namespace hc
