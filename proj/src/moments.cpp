#include "hc/moments.hpp"

#include <algorithm>
#include <cmath>

#include "hc/errors.hpp"

namespace hc {

namespace {

// x log(x/y) with the continuity convention at x = 0
double xlogxy(double x, double y) { return x > 0 ? x * std::log(x / y) : 0.0; }

void require_pair(const OccupancyPair& pt) {
    if (pt.alpha < 0 || pt.beta < 0 || pt.alpha + pt.beta > 1)
        throw DomainError("(alpha, beta) outside the simplex T");
}

struct Terms {
    double A, B, C, D, S;
};

Terms terms_at(const OccupancyPair& pt, double g, double dl, double e) {
    double a = pt.alpha, b = pt.beta;
    Terms t;
    t.A = 1 - 2 * b + dl - g - e;
    t.B = a - g - e;
    t.C = b - dl - t.B;
    t.D = 1 - b - g - e;
    t.S = std::sqrt((1 - a - b) * (1 - a - b) + 4 * (a - g) * (b - dl));
    return t;
}

}  // namespace

OverlapPoint star_overlap(const OccupancyPair& pt) {
    return {pt.alpha * pt.alpha, pt.beta * pt.beta, pt.alpha * (1 - pt.alpha - pt.beta)};
}

double entropy_h1(double x, double y) {
    if (!(x >= 0) || !(x <= y)) throw DomainError("entropy_h1 requires 0 <= x <= y");
    if (y == 0) return 0.0;
    return -xlogxy(x, y) - xlogxy(y - x, y);
}

double binary_entropy(double x) { return entropy_h1(x, 1.0); }

double phi1(const OccupancyPair& pt, const ModelParams& params) {
    require_pair(pt);
    double a = pt.alpha, b = pt.beta, r = 1 - a - b;
    int d = params.d;
    return (a + b) * std::log(params.lambda) - xlogxy(a, 1) - xlogxy(b, 1) - d * xlogxy(r, 1) +
           (d - 1) * (xlogxy(1 - a, 1) + xlogxy(1 - b, 1));
}

double second_moment_f(const OccupancyPair& pt, const OverlapPoint& ov, const ModelParams& params) {
    require_pair(pt);
    double a = pt.alpha, b = pt.beta, g = ov.gamma, dl = ov.delta, e = ov.epsilon;
    if (a - g - e < 0 || b - dl < 0 || 1 - 2 * b + dl - g - e < 0 || g < 0 || e < 0 || dl < 0)
        throw DomainError("overlap point outside the feasible region");
    auto H1 = entropy_h1;
    double bracket = H1(g, 1 - 2 * b + dl) - binary_entropy(g) + H1(e, 1 - 2 * b + dl - g) +
                     H1(a - g - e, b - dl) - H1(a - g, 1 - g) + H1(a - g, 1 - b - g - e) -
                     H1(a - g, 1 - a);
    return 2 * (a + b) * std::log(params.lambda) + binary_entropy(a) + H1(g, a) + H1(a - g, 1 - a) +
           binary_entropy(b) + H1(dl, b) + H1(b - dl, 1 - b) + params.d * bracket;
}

double epsilon_hat(const OccupancyPair& pt, double gamma, double delta) {
    double a = pt.alpha, b = pt.beta;
    double rad = (1 - a - b) * (1 - a - b) + 4 * (a - gamma) * (b - delta);
    if (rad < 0) throw DomainError("epsilon_hat: negative radicand");
    return 0.5 * (1 + a - b - 2 * gamma - std::sqrt(rad));
}

double ghat(const OccupancyPair& pt, double gamma, double delta, const ModelParams& params) {
    return second_moment_f(pt, {gamma, delta, epsilon_hat(pt, gamma, delta)}, params);
}

FStarSplit fstar_split(const OccupancyPair& pt, double gamma, double delta) {
    double a = pt.alpha, b = pt.beta;
    if (gamma < 0 || gamma > a || delta < 0 || delta > b)
        throw DomainError("fstar_split requires 0 <= gamma <= alpha, 0 <= delta <= beta");
    FStarSplit s;
    s.f1 = binary_entropy(a) + entropy_h1(gamma, a) + entropy_h1(a - gamma, 1 - a);
    s.f2 = binary_entropy(b) + entropy_h1(delta, b) + entropy_h1(b - delta, 1 - b);
    return s;
}

double tau(const OccupancyPair& pt, int d) {
    double a = pt.alpha, b = pt.beta, r = 1 - a - b, ab = a * b;
    double f0 = r - ab, f1 = (r + 2 * ab) * r, f2 = (r + d * ab) * (r - (d - 2) * ab);
    if (!(f0 > 0 && f1 > 0 && f2 > 0)) throw DomainError("tau: nonpositive factor");
    return std::pow(f0, d) / (std::pow(f1, 0.5 * (d - 1)) * std::sqrt(f2));
}

SecondPartials partials_f(const OccupancyPair& pt, const OverlapPoint& ov, int d) {
    double a = pt.alpha, b = pt.beta, g = ov.gamma, dl = ov.delta;
    Terms t = terms_at(pt, g, dl, ov.epsilon);
    if (!(t.A > 0 && t.B > 0 && t.C > 0 && t.D > 0 && g > 0 && dl > 0 && a - g > 0 && b - dl > 0 &&
          1 - 2 * a + g > 0 && 1 - 2 * b + dl > 0))
        throw DomainError("partials_f: point not in the strict interior");
    SecondPartials p;
    p.f_ge = -d / t.A - d / t.B - d / t.C + d / t.D;
    p.f_gg = p.f_ge + (d - 1) / (1 - 2 * a + g) + (d - 2) / (a - g) - 1 / g;
    p.f_de = d / t.A + d / t.C;
    p.f_gd = p.f_de;
    p.f_dd = -d / t.A + (d - 1) / (1 - 2 * b + dl) - d / t.C + (d - 2) / (b - dl) - 1 / dl;
    p.eps_g = -1 + (b - dl) / t.S;
    p.eps_d = (a - g) / t.S;
    return p;
}

ReducedHessian reduced_hessian(const OccupancyPair& pt, double gamma, double delta, int d) {
    SecondPartials p = partials_f(pt, {gamma, delta, epsilon_hat(pt, gamma, delta)}, d);
    ReducedHessian h;
    h.gg = p.f_gg + p.eps_g * p.f_ge;
    h.dd = p.f_dd + p.eps_d * p.f_de;
    h.gd = p.f_gd + p.eps_g * p.f_de;
    return h;
}

double hessian_det_ghat(const OccupancyPair& pt, double gamma, double delta, int d) {
    return reduced_hessian(pt, gamma, delta, d).det();
}

namespace {

// h1 and the mixed entry only involve A, C and delta, so they stay finite on gamma in {0, alpha}.
ReducedHessian delta_entries(const OccupancyPair& pt, double gamma, double delta, int d) {
    double a = pt.alpha, b = pt.beta;
    Terms t = terms_at(pt, gamma, delta, epsilon_hat(pt, gamma, delta));
    if (!(t.A > 0 && t.C > 0 && delta > 0 && b - delta > 0 && 1 - 2 * b + delta > 0 && t.S > 0))
        throw DomainError("h1: point outside the certification region");
    double f_de = d / t.A + d / t.C;
    double f_dd = -d / t.A + (d - 1) / (1 - 2 * b + delta) - d / t.C + (d - 2) / (b - delta) - 1 / delta;
    ReducedHessian h;
    h.dd = f_dd + (a - gamma) / t.S * f_de;
    h.gd = f_de + (-1 + (b - delta) / t.S) * f_de;
    return h;
}

}  // namespace

double h1_bound(const OccupancyPair& pt, double gamma, double delta, int d) {
    return delta_entries(pt, gamma, delta, d).dd;
}

double psi_upper(const OccupancyPair& pt, double gamma, double delta, int d) {
    double a = pt.alpha, b = pt.beta;
    double e = epsilon_hat(pt, gamma, delta);
    Terms t = terms_at(pt, gamma, delta, e);
    double eps_g = -1 + (b - delta) / t.S;
    // (d-2)/(a-g) - (b-dl)/S * d/(a-g-eps) <= (d-12)/6 * 1/(a-g) once 4ab/(1-a-b)^2 <= 5/4;
    // for d = 6 the coefficient is -1.
    double c = (d - 12) / 6.0;
    return -d / t.A + (d - 1) / (1 - 2 * a + gamma) - d / t.C + d / t.D +
           c / std::max(kPsiClamp, a - gamma) - 1 / std::max(kPsiClamp, gamma) +
           eps_g * (-d / t.A - d / t.C + d / t.D);
}

double phi_cert(const OccupancyPair& pt, double gamma, double delta, int d) {
    ReducedHessian h = delta_entries(pt, gamma, delta, d);
    return psi_upper(pt, gamma, delta, d) * h.dd - h.gd * h.gd;
}

}  // namespace hc
