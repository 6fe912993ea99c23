#pragma once

#include <gmpxx.h>

namespace hc {

struct ModelParams {
    int d = 6;
    double lambda = 1.0;

    void validate() const;
};

struct TreeFixedPoints {
    double p_plus = 0, p_minus = 0, p_star = 0;
    double q_plus = 0, q_minus = 0, q_star = 0;
    double lambda_c = 0;
    // two-step residual |F(F(q+)) - q+| at the returned point
    double residual = 0;
    long iterations = 0;
    bool unique = false;
};

struct SolverOptions {
    double tol = 1e-12;
    long max_iter = 1000000;
    bool polish = true;
};

mpq_class critical_fugacity_exact(int d);
double critical_fugacity(int d);

// q -> lambda (1-q)^{d-1} / (1 + lambda (1-q)^{d-1})
double tree_map(double q, const ModelParams& params);
double tree_map_derivative(double q, const ModelParams& params);

double h_map(double x, const ModelParams& params);

struct AlternatingResult {
    double q_even = 0, q_odd = 0;
    double residual = 0;
    long iterations = 0;
    bool converged = false;
};

// Raw alternating iteration from a given boundary value, no shortcuts.
AlternatingResult alternating_iteration(const ModelParams& params, double q0, long max_iter, double tol);

TreeFixedPoints solve_fixed_points(const ModelParams& params, const SolverOptions& opt = {});

struct ExtraConditions {
    bool product_ok = false;  // (d-1) q+ q- < 1
    double product_margin = 0;
    bool qplus_ok = false;  // q+ < 3/5
    double qplus_margin = 0;
};

ExtraConditions check_extra_conditions(const TreeFixedPoints& fp, int d);

}  // namespace hc
