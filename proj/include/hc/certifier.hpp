#pragma once

#include <string>
#include <vector>

#include "hc/interval.hpp"
#include "hc/treegibbs.hpp"

namespace hc {

enum class RoundingMode { Nudge, Hardware };

struct CertificationOptions {
    int d = 6;
    double lambda = 1.0;
    double nbhd = 1e-9;
    int grid_i = 100;
    int grid_j = 32;
    int refine_depth = 4;
    bool mean_value = true;
    RoundingMode rounding = RoundingMode::Nudge;
    int threads = 1;
};

struct FixedPointEnclosure {
    Interval q_plus, q_minus, p_plus, p_minus;
    bool verified = false;  // Krawczyk inclusion succeeded
};

// Rigorous enclosure of the q+ root of F(F(q)) = q near q_guess, then of q-, p+, p-.
FixedPointEnclosure enclose_fixed_points(int d, double lambda, double q_guess, double radius = 1e-10);

struct CellBound {
    double h1_upper = 0;
    double phi_lower = 0;
    int depth = 0;      // refinement depth actually used
    int leaves = 1;     // number of boxes evaluated at the finest level
    bool pass = false;
    std::string error;  // interval-domain diagnostics, if any
};

struct CertCell {
    int i = 0, j = 0;
    Interval gamma, delta;
    CellBound bound;
};

struct CertificationReport {
    CertificationOptions options;
    Interval alpha, beta;
    FixedPointEnclosure enclosure;
    bool enclosure_inside_box = false;
    std::vector<CertCell> cells;
    double max_h1_upper = 0;
    double min_phi_lower = 0;
    int max_depth_used = 0;
    std::vector<int> failing;  // indices into cells
    bool verdict = false;
    double wall_seconds = 0;

    std::string serialize(bool include_timing = true) const;
};

CertificationReport certify_condition1(const TreeFixedPoints& fp, const CertificationOptions& opt = {});

// Bounds of one (gamma, delta) box with adaptive refinement.
CellBound certify_box(const Interval& alpha, const Interval& beta, const Interval& gamma, const Interval& delta,
                      const CertificationOptions& opt);

struct Check {
    std::string name;
    Interval value;
    std::string relation;  // "<", ">", "<="
    double bound = 0;
    bool pass = false;
    double margin = 0;
};

struct PreliminaryReport {
    Interval alpha, beta;
    std::vector<Check> checks;  // (a) .. (f) in order
    bool verdict = false;
    std::string serialize() const;
};

PreliminaryReport certify_preliminaries(const TreeFixedPoints& fp, double nbhd = 1e-9, int d = 6, double lambda = 1.0);

// Interval evaluations used by the sweep, exposed for enclosure tests.
Interval h1_interval(const Interval& a, const Interval& b, const Interval& g, const Interval& dl, int d);
Interval psi_interval(const Interval& a, const Interval& b, const Interval& g, const Interval& dl, int d);
Interval phi_interval(const Interval& a, const Interval& b, const Interval& g, const Interval& dl, int d);
HwInterval h1_interval_hw(const HwInterval& a, const HwInterval& b, const HwInterval& g, const HwInterval& dl, int d);
HwInterval phi_interval_hw(const HwInterval& a, const HwInterval& b, const HwInterval& g, const HwInterval& dl, int d);
HwInterval psi_interval_hw(const HwInterval& a, const HwInterval& b, const HwInterval& g, const HwInterval& dl, int d);

// Largest nbhd among the candidates (ascending) for which the sweep still passes; 0 if none.
double largest_passing_nbhd(const TreeFixedPoints& fp, const CertificationOptions& opt,
                            const std::vector<double>& candidates);

}  // namespace hc
