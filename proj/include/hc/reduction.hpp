#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <vector>

#include "hc/gadgets.hpp"
#include "hc/graph.hpp"
#include "hc/treegibbs.hpp"

namespace hc {

using PhaseVector = std::vector<int>;  // +1 / -1 per vertex of H

int cut_value(const Graph& h, const PhaseVector& y);

struct MaxCut {
    int value = 0;
    std::vector<PhaseVector> maximizers;  // both members of each mirror pair, lexicographically decreasing
};

MaxCut brute_maxcut(const Graph& h);  // |H| <= 24

struct CutResult {
    PhaseVector phase;
    int cut = 0;
    mpq_class exact;         // exact mode only
    double probability = 0;  // exact value as double, or the empirical frequency
    double stderr_ = 0;      // glauber mode
    int rank = 0;            // 0 = most probable; ties share a rank
};

enum class ReductionMode { Exact, Glauber };

struct GlauberPhaseOptions {
    long sweeps = 2000;
    long burn_in = 200;
    int chains_per_basin = 1;
    std::uint64_t seed = 1;
    int threads = 1;
};

// Phase of each gadget copy of H^G (gadget index = vertex of H): sign of the
// W+ minus W- occupation inside that copy, ties to +.
PhaseVector phase_vector(const Graph& hg, int h_size, const std::vector<std::uint8_t>& sigma);

// Probabilities of every phase vector, sorted by decreasing probability.
// Exact mode runs the transfer DP per gadget copy, keeping the cross-edge
// endpoints, then sums over joint endpoint states. Glauber mode starts chains
// from every basin (each gadget filled on its W side of the given sign).
std::vector<CutResult> phase_vector_distribution(const Graph& hg, const Graph& h, const mpq_class& lambda,
                                                 ReductionMode mode, const GlauberPhaseOptions& gopt = {});

// rho^{k delta_cut} with rho = (1 - q+ q-)^2 / ((1 - q+^2)(1 - q-^2))
double cut_ratio(const TreeFixedPoints& fp);
double cut_ratio_prediction(const TreeFixedPoints& fp, int k, int delta_cut);

struct ReductionReport {
    GadgetSpec spec;
    int k = 0;
    ReductionMode mode = ReductionMode::Exact;
    double lambda = 0;
    int hg_vertices = 0, hg_max_degree = 0;
    MaxCut maxcut;
    std::vector<CutResult> distribution;
    std::vector<PhaseVector> argmax;
    bool argmax_in_maxcut = false;  // every top-probability vector is a maximizer
    bool separated = false;         // the top |maximizers| ranks are exactly the maximizers
    double maxcut_mass = 0;         // total probability of the maximizers
    double log_ratio_per_cut_edge = 0;  // least-squares slope of log P against Cut
    double predicted_log_ratio = 0;     // k log rho
    bool asymptotic_preconditions_violated = true;
    std::string note;

    std::string serialize() const;
};

ReductionReport run_reduction(const Graph& h, const GadgetSpec& spec, const mpq_class& lambda, int k,
                              ReductionMode mode, const GlauberPhaseOptions& gopt = {});

struct SweepResult {
    std::vector<ReductionReport> reports;
    int smallest_n = -1;  // first n at which the separation property holds
};

// Tries n = n_min, ..., n_max with the given m, tree depth and seed; stops at
// the first n where the top-ranked phase vectors are exactly the maximizers.
SweepResult reduction_sweep(const Graph& h, int n_min, int n_max, int m, int tree_depth, int d,
                            const mpq_class& lambda, int k, std::uint64_t seed);

}  // namespace hc
