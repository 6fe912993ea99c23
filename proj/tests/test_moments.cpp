#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <random>

#include "hc/errors.hpp"
#include "hc/moments.hpp"
#include "hc/treegibbs.hpp"

using namespace hc;

namespace {

const ModelParams kParams{6, 1.0};

const TreeFixedPoints& fixed() {
    static TreeFixedPoints fp = solve_fixed_points(kParams);
    return fp;
}

OccupancyPair random_pair(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.02, 0.96);
    for (;;) {
        double a = u(rng), b = u(rng);
        if (a + b < 0.96) return {a, b};
    }
}

// interior (gamma, delta) for which every f term is strictly positive
bool interior(const OccupancyPair& pt, double g, double dl) {
    double a = pt.alpha, b = pt.beta;
    double S2 = (1 - a - b) * (1 - a - b) + 4 * (a - g) * (b - dl);
    if (S2 <= 0) return false;
    double e = epsilon_hat(pt, g, dl);
    double A = 1 - 2 * b + dl - g - e, B = a - g - e, C = b - dl - B, D = 1 - b - g - e;
    return g > 1e-3 && dl > 1e-3 && a - g > 1e-3 && b - dl > 1e-3 && A > 1e-3 && B > 1e-3 && C > 1e-3 &&
           D > 1e-3 && e > 1e-3 && 1 - 2 * a + g > 1e-3 && 1 - 2 * b + dl > 1e-3;
}

struct Sample {
    OccupancyPair pt;
    double g, dl;
};

Sample random_interior(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0, 1);
    for (;;) {
        OccupancyPair pt = random_pair(rng);
        double g = u(rng) * pt.alpha, dl = u(rng) * pt.beta;
        if (interior(pt, g, dl)) return {pt, g, dl};
    }
}

double rel(double a, double b) { return std::fabs(a - b) / std::max(1.0, std::fabs(b)); }

}  // namespace

TEST_CASE("entropy helpers") {
    using Big = boost::multiprecision::cpp_bin_float_50;
    CHECK(binary_entropy(0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(entropy_h1(0.0, 0.5) == 0.0);
    CHECK(entropy_h1(0.5, 0.5) == 0.0);
    CHECK(entropy_h1(0.0, 0.0) == 0.0);
    Big x("0.2"), y("0.5");
    Big expect = -x * (log(x) - log(y)) + (x - y) * (log(y - x) - log(y));
    CHECK(entropy_h1(0.2, 0.5) == doctest::Approx(expect.convert_to<double>()).epsilon(1e-14));
    CHECK_THROWS_AS(entropy_h1(-0.1, 0.5), DomainError);
    CHECK_THROWS_AS(entropy_h1(0.6, 0.5), DomainError);
}

TEST_CASE("star identity and epsilon_hat identity") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 100; ++k) {
        OccupancyPair pt = random_pair(rng);
        CAPTURE(pt.alpha);
        CAPTURE(pt.beta);
        double f = second_moment_f(pt, star_overlap(pt), kParams);
        CHECK(std::fabs(f - 2 * phi1(pt, kParams)) < 1e-10);
        double e = epsilon_hat(pt, pt.alpha * pt.alpha, pt.beta * pt.beta);
        CHECK(std::fabs(e - pt.alpha * (1 - pt.alpha - pt.beta)) < 1e-12);
        ModelParams other{4, 2.5};
        CHECK(std::fabs(second_moment_f(pt, star_overlap(pt), other) - 2 * phi1(pt, other)) < 1e-10);
    }
}

TEST_CASE("epsilon_hat special values and domain") {
    OccupancyPair pt{0.3, 0.2};
    CHECK(epsilon_hat(pt, 0.3, 0.05) == doctest::Approx(0.0).epsilon(1e-15));
    // gamma = alpha: the radicand is (1-a-b)^2, so eps = 0
    CHECK(std::fabs(epsilon_hat(pt, 0.3, 0.1)) < 1e-15);
    CHECK_THROWS_AS(epsilon_hat({0.3, 0.3}, 0.9, 0.0), DomainError);
    CHECK_THROWS_AS(second_moment_f({0.7, 0.5}, {0, 0, 0}, kParams), DomainError);
}

TEST_CASE("phi1 symmetry and maximizer") {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 50; ++k) {
        OccupancyPair pt = random_pair(rng);
        CHECK(phi1(pt, kParams) == doctest::Approx(phi1({pt.beta, pt.alpha}, kParams)).epsilon(1e-14));
    }
    double best = -1e300, ba = 0, bb = 0;
    const int N = 1000;
    for (int i = 0; i <= N; ++i)
        for (int j = 0; j <= i && i + j <= N; ++j) {
            double v = phi1({i / double(N), j / double(N)}, kParams);
            if (v > best) best = v, ba = i / double(N), bb = j / double(N);
        }
    CHECK(std::fabs(ba - fixed().p_plus) <= 1.5e-3);
    CHECK(std::fabs(bb - fixed().p_minus) <= 1.5e-3);
}

TEST_CASE("ghat at the star point and the f1 + f2 bounds") {
    const TreeFixedPoints& fp = fixed();
    OccupancyPair pt{fp.p_minus, fp.p_plus};
    double star = ghat(pt, pt.alpha * pt.alpha, pt.beta * pt.beta, kParams);
    CHECK(star == doctest::Approx(2 * phi1(pt, kParams)).epsilon(1e-12));
    CHECK(star > 1.430);
    FStarSplit s1 = fstar_split(pt, pt.alpha * pt.alpha, 0.015);
    FStarSplit s2 = fstar_split(pt, pt.alpha * pt.alpha, 0.330);
    CHECK(s1.f1 + s1.f2 < 1.425);
    CHECK(s2.f1 + s2.f2 < 1.414);
    // f2 peaks at delta = beta^2
    double peak = fstar_split(pt, 0, pt.beta * pt.beta).f2;
    for (int j = 0; j <= 400; ++j) {
        double dl = pt.beta * j / 400.0;
        CHECK(fstar_split(pt, 0, dl).f2 <= peak + 1e-14);
    }
    CHECK(4 * pt.alpha * pt.beta / ((1 - pt.alpha - pt.beta) * (1 - pt.alpha - pt.beta)) < 0.19);
}

TEST_CASE("f is bounded by f1 + f2 plus the fugacity term") {
    std::mt19937_64 rng(5);
    for (double lambda : {1.0, 1.7, 0.4}) {
        ModelParams mp{6, lambda};
        for (int k = 0; k < 100; ++k) {
            Sample s = random_interior(rng);
            double f = ghat(s.pt, s.g, s.dl, mp);
            FStarSplit sp = fstar_split(s.pt, s.g, s.dl);
            double bound = sp.f1 + sp.f2 + 2 * (s.pt.alpha + s.pt.beta) * std::log(lambda);
            CHECK(f <= bound + 1e-12);
        }
    }
}

TEST_CASE("tau") {
    CHECK(tau({0, 0}, 6) == doctest::Approx(1.0));
    const TreeFixedPoints& fp = fixed();
    double t = tau({fp.p_minus, fp.p_plus}, 6);
    CHECK(std::isfinite(t));
    CHECK(t > 0);
    CHECK(t == doctest::Approx(tau({fp.p_plus, fp.p_minus}, 6)).epsilon(1e-14));
    CHECK_THROWS_AS(tau({0.5, 0.5}, 6), DomainError);
}

TEST_CASE("second partials match finite differences") {
    std::mt19937_64 rng(7);
    const double h = 1e-5;
    int tested = 0;
    while (tested < 50) {
        Sample s = random_interior(rng);
        double e = epsilon_hat(s.pt, s.g, s.dl);
        if (!interior(s.pt, s.g + 2 * h, s.dl + 2 * h) || !interior(s.pt, s.g - 2 * h, s.dl - 2 * h)) continue;
        OverlapPoint o{s.g, s.dl, e};
        if (o.epsilon < 3 * h) continue;
        ++tested;
        auto f = [&](double g, double dl, double ep) { return second_moment_f(s.pt, {g, dl, ep}, kParams); };
        SecondPartials p = partials_f(s.pt, o, 6);
        double fgg = (f(s.g + h, s.dl, e) - 2 * f(s.g, s.dl, e) + f(s.g - h, s.dl, e)) / (h * h);
        double fdd = (f(s.g, s.dl + h, e) - 2 * f(s.g, s.dl, e) + f(s.g, s.dl - h, e)) / (h * h);
        double fge = (f(s.g + h, s.dl, e + h) - f(s.g + h, s.dl, e - h) - f(s.g - h, s.dl, e + h) +
                      f(s.g - h, s.dl, e - h)) / (4 * h * h);
        double fde = (f(s.g, s.dl + h, e + h) - f(s.g, s.dl + h, e - h) - f(s.g, s.dl - h, e + h) +
                      f(s.g, s.dl - h, e - h)) / (4 * h * h);
        double fgd = (f(s.g + h, s.dl + h, e) - f(s.g + h, s.dl - h, e) - f(s.g - h, s.dl + h, e) +
                      f(s.g - h, s.dl - h, e)) / (4 * h * h);
        CAPTURE(s.pt.alpha);
        CAPTURE(s.pt.beta);
        CAPTURE(s.g);
        CAPTURE(s.dl);
        CHECK(rel(p.f_gg, fgg) < 1e-4);
        CHECK(rel(p.f_dd, fdd) < 1e-4);
        CHECK(rel(p.f_ge, fge) < 1e-4);
        CHECK(rel(p.f_de, fde) < 1e-4);
        CHECK(rel(p.f_gd, fgd) < 1e-4);
        double eg = (epsilon_hat(s.pt, s.g + h, s.dl) - epsilon_hat(s.pt, s.g - h, s.dl)) / (2 * h);
        double ed = (epsilon_hat(s.pt, s.g, s.dl + h) - epsilon_hat(s.pt, s.g, s.dl - h)) / (2 * h);
        CHECK(rel(p.eps_g, eg) < 1e-6);
        CHECK(rel(p.eps_d, ed) < 1e-6);
    }
}

TEST_CASE("reduced Hessian matches finite differences of ghat") {
    std::mt19937_64 rng(9);
    const double h = 1e-4;
    int tested = 0;
    while (tested < 30) {
        Sample s = random_interior(rng);
        if (!interior(s.pt, s.g + 2 * h, s.dl + 2 * h) || !interior(s.pt, s.g - 2 * h, s.dl - 2 * h)) continue;
        ++tested;
        auto G = [&](double g, double dl) { return ghat(s.pt, g, dl, kParams); };
        double gg = (G(s.g + h, s.dl) - 2 * G(s.g, s.dl) + G(s.g - h, s.dl)) / (h * h);
        double dd = (G(s.g, s.dl + h) - 2 * G(s.g, s.dl) + G(s.g, s.dl - h)) / (h * h);
        double gd = (G(s.g + h, s.dl + h) - G(s.g + h, s.dl - h) - G(s.g - h, s.dl + h) + G(s.g - h, s.dl - h)) /
                    (4 * h * h);
        ReducedHessian rh = reduced_hessian(s.pt, s.g, s.dl, 6);
        CHECK(rel(rh.gg, gg) < 1e-3);
        CHECK(rel(rh.dd, dd) < 1e-3);
        CHECK(rel(rh.gd, gd) < 1e-3);
        CHECK(rel(rh.det(), gg * dd - gd * gd) < 1e-2 * std::max(1.0, std::fabs(gg * dd)));
        CHECK(h1_bound(s.pt, s.g, s.dl, 6) == doctest::Approx(rh.dd).epsilon(1e-10));
    }
    ReducedHessian diag{-3.0, 0.0, -5.0};
    CHECK(diag.det() == 15.0);
}

TEST_CASE("Hessian at the star point is negative definite") {
    const TreeFixedPoints& fp = fixed();
    OccupancyPair pt{fp.p_minus, fp.p_plus};
    ReducedHessian rh = reduced_hessian(pt, pt.alpha * pt.alpha, pt.beta * pt.beta, 6);
    CHECK(rh.gg < 0);
    CHECK(rh.det() > 0);
}

TEST_CASE("h1 and Phi on the certification grid") {
    const TreeFixedPoints& fp = fixed();
    OccupancyPair pt{fp.p_minus, fp.p_plus};
    double max_h1 = -1e300, min_phi = 1e300;
    for (int j = 1; j <= 32; ++j)
        for (int i = 0; i < 100; ++i) {
            double g = pt.alpha * (i + 0.5) / 100, dl = (j + 0.5) / 100;
            max_h1 = std::max(max_h1, h1_bound(pt, g, dl, 6));
            min_phi = std::min(min_phi, phi_cert(pt, g, dl, 6));
        }
    CHECK(max_h1 < -17);
    CHECK(min_phi > 1500);
}

TEST_CASE("Psi bounds the exact gamma entry") {
    const TreeFixedPoints& fp = fixed();
    OccupancyPair pt{fp.p_minus, fp.p_plus};
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0, 1);
    int tested = 0;
    while (tested < 200) {
        double g = u(rng) * pt.alpha, dl = 0.01 + u(rng) * 0.33;
        if (!interior(pt, g, dl)) continue;
        ++tested;
        double exact = reduced_hessian(pt, g, dl, 6).gg;
        CHECK(psi_upper(pt, g, dl, 6) >= exact - 1e-9 * std::fabs(exact));
        // the chain inequality used to build Psi
        double a = pt.alpha, b = pt.beta;
        double S = std::sqrt((1 - a - b) * (1 - a - b) + 4 * (a - g) * (b - dl));
        double e = epsilon_hat(pt, g, dl);
        CHECK(4 / (a - g) - (b - dl) / S * 6 / (a - g - e) <= -1 / (a - g) + 1e-9 / (a - g));
    }
    // finite on the gamma = alpha face thanks to the clamp
    CHECK(std::isfinite(psi_upper(pt, pt.alpha, 0.1, 6)));
    CHECK(std::isfinite(phi_cert(pt, pt.alpha, 0.1, 6)));
}

TEST_CASE("Phi is a lower bound for the Hessian determinant") {
    const TreeFixedPoints& fp = fixed();
    OccupancyPair pt{fp.p_minus, fp.p_plus};
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0, 1);
    int tested = 0;
    while (tested < 200) {
        double g = u(rng) * pt.alpha, dl = 0.01 + u(rng) * 0.33;
        if (!interior(pt, g, dl) || pt.alpha - g < kPsiClamp || g < kPsiClamp) continue;
        if (h1_bound(pt, g, dl, 6) >= 0) continue;
        ++tested;
        CHECK(phi_cert(pt, g, dl, 6) <= hessian_det_ghat(pt, g, dl, 6) * (1 + 1e-9));
    }
}

TEST_CASE("(1 + 2y/5)^2 <= 1 + y on [0, 5/4]") {
    for (int k = 0; k <= 10000; ++k) {
        double y = 1.25 * k / 10000;
        CHECK((1 + 2 * y / 5) * (1 + 2 * y / 5) <= 1 + y + 1e-15);
    }
}
