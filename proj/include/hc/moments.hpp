#pragma once

#include "hc/treegibbs.hpp"

namespace hc {

struct OccupancyPair {
    double alpha = 0, beta = 0;
};

struct OverlapPoint {
    double gamma = 0, delta = 0, epsilon = 0;
};

OverlapPoint star_overlap(const OccupancyPair& pt);

// H1(x,y) = -x(log x - log y) + (x-y)(log(y-x) - log y), with 0 log 0 = 0.
double entropy_h1(double x, double y);
double binary_entropy(double x);

double phi1(const OccupancyPair& pt, const ModelParams& params);

double second_moment_f(const OccupancyPair& pt, const OverlapPoint& ov, const ModelParams& params);

double epsilon_hat(const OccupancyPair& pt, double gamma, double delta);

double ghat(const OccupancyPair& pt, double gamma, double delta, const ModelParams& params);

struct FStarSplit {
    double f1 = 0, f2 = 0;
};
FStarSplit fstar_split(const OccupancyPair& pt, double gamma, double delta);

double tau(const OccupancyPair& pt, int d);

struct SecondPartials {
    double f_gg = 0, f_ge = 0, f_dd = 0, f_de = 0, f_gd = 0;
    double eps_g = 0, eps_d = 0;
};

SecondPartials partials_f(const OccupancyPair& pt, const OverlapPoint& ov, int d);

// Entries of the reduced Hessian of ghat at eps = eps_hat.
struct ReducedHessian {
    double gg = 0, gd = 0, dd = 0;
    double det() const { return gg * dd - gd * gd; }
};
ReducedHessian reduced_hessian(const OccupancyPair& pt, double gamma, double delta, int d);

double hessian_det_ghat(const OccupancyPair& pt, double gamma, double delta, int d);
double h1_bound(const OccupancyPair& pt, double gamma, double delta, int d);

constexpr double kPsiClamp = 1.0 / 10000.0;

double psi_upper(const OccupancyPair& pt, double gamma, double delta, int d);
double phi_cert(const OccupancyPair& pt, double gamma, double delta, int d);

}  // namespace hc
