#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <vector>

#include "hc/errors.hpp"
#include "hc/treegibbs.hpp"

using namespace hc;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

Big big_tree_map(const Big& q, int d, const Big& lambda) {
    Big t = lambda * pow(1 - q, d - 1);
    return t / (1 + t);
}

// Newton on G(q) = F(F(q)) - q with a numerical derivative at 50 digits.
Big big_q_plus(int d, const Big& lambda, Big q) {
    Big h("1e-30");
    for (int it = 0; it < 100; ++it) {
        auto G = [&](const Big& x) { return big_tree_map(big_tree_map(x, d, lambda), d, lambda) - x; };
        Big g = G(q);
        Big dg = (G(q + h) - G(q - h)) / (2 * h);
        Big step = g / dg;
        q -= step;
        if (abs(step) < Big("1e-45")) break;
    }
    return q;
}

}  // namespace

TEST_CASE("critical fugacity") {
    CHECK(critical_fugacity_exact(3) == mpq_class(4));
    CHECK(critical_fugacity_exact(4) == mpq_class(27, 16));
    CHECK(critical_fugacity_exact(6) == mpq_class(3125, 4096));
    for (int d = 3; d <= 20; ++d) {
        mpz_class num, den;
        mpz_ui_pow_ui(num.get_mpz_t(), static_cast<unsigned long>(d - 1), static_cast<unsigned long>(d - 1));
        mpz_ui_pow_ui(den.get_mpz_t(), static_cast<unsigned long>(d - 2), static_cast<unsigned long>(d));
        mpq_class expect(num, den);
        expect.canonicalize();
        CHECK(critical_fugacity_exact(d) == expect);
        CHECK(critical_fugacity(d) == doctest::Approx(expect.get_d()).epsilon(1e-15));
    }
    CHECK_THROWS_AS(critical_fugacity_exact(2), DomainError);
}

TEST_CASE("h_map against a 50 digit evaluation") {
    ModelParams mp{6, 1.0};
    for (const char* xs : {"0.3", "0.5", "0.05", "0.9"}) {
        Big x(xs);
        Big expect = (1 - x) * (1 - pow(x / (1 - x), Big(1) / 6));
        CHECK(h_map(x.convert_to<double>(), mp) == doctest::Approx(expect.convert_to<double>()).epsilon(1e-14));
    }
    CHECK(h_map(0.5, mp) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK_THROWS_AS(h_map(0.0, mp), DomainError);
    CHECK_THROWS_AS(h_map(1.0, mp), DomainError);
}

TEST_CASE("fixed points for d=6, lambda=1") {
    TreeFixedPoints fp = solve_fixed_points({6, 1.0});
    Big qp = big_q_plus(6, Big(1), Big("0.42"));
    Big qm = big_tree_map(qp, 6, Big(1));
    Big pp = qp * (1 - qm) / (1 - qp * qm);
    Big pm = qm * (1 - qp) / (1 - qp * qm);
    CHECK(std::fabs(fp.q_plus - qp.convert_to<double>()) < 1e-12);
    CHECK(std::fabs(fp.q_minus - qm.convert_to<double>()) < 1e-12);
    CHECK(std::fabs(fp.p_plus - pp.convert_to<double>()) < 1e-12);
    CHECK(std::fabs(fp.p_minus - pm.convert_to<double>()) < 1e-12);
    CHECK_FALSE(fp.unique);

    ModelParams mp{6, 1.0};
    CHECK(std::fabs(h_map(fp.p_plus, mp) - fp.p_minus) < 1e-10);
    CHECK(std::fabs(h_map(fp.p_minus, mp) - fp.p_plus) < 1e-10);
    CHECK(fp.p_minus < fp.p_star);
    CHECK(fp.p_star < fp.p_plus);
    CHECK(fp.q_minus < fp.q_star);
    CHECK(fp.q_star < fp.q_plus);

    // published values: q+ to three digits, p+ and p- to eight
    CHECK(std::fabs(fp.q_plus - 0.423) <= 1e-3);
    CHECK(std::fabs(fp.p_plus - 0.40831988) <= 1e-6);
    CHECK(std::fabs(fp.p_minus - 0.03546955) <= 1e-8);
}

TEST_CASE("fixed point invariants over d and lambda") {
    for (int d = 3; d <= 12; ++d) {
        double lc = critical_fugacity(d);
        for (double mult : {1.05, 1.5, 2.0, 5.0, 20.0}) {
            ModelParams mp{d, lc * mult};
            TreeFixedPoints fp = solve_fixed_points(mp);
            CAPTURE(d);
            CAPTURE(mult);
            CHECK_FALSE(fp.unique);
            CHECK(fp.q_minus < fp.q_star);
            CHECK(fp.q_star < fp.q_plus);
            CHECK(fp.p_minus < fp.p_star);
            CHECK(fp.p_star < fp.p_plus);
            CHECK(std::fabs(tree_map(fp.q_plus, mp) - fp.q_minus) < 1e-10);
            CHECK(std::fabs(tree_map(fp.q_minus, mp) - fp.q_plus) < 1e-10);
            CHECK(std::fabs(h_map(fp.p_plus, mp) - fp.p_minus) < 1e-10);
            // q/(1-q) = lambda (1 - q')^{d-1}
            for (auto [a, b] : {std::pair{fp.q_plus, fp.q_minus}, std::pair{fp.q_minus, fp.q_plus}}) {
                double lhs = a / (1 - a), rhs = mp.lambda * std::pow(1 - b, d - 1);
                CHECK(std::fabs(lhs - rhs) <= 1e-10 * std::max(1.0, rhs));
            }
            // p+ = q+ (1 - p-), p- = q- (1 - p+)
            CHECK(std::fabs(fp.p_plus - fp.q_plus * (1 - fp.p_minus)) < 1e-12);
            CHECK(std::fabs(fp.p_minus - fp.q_minus * (1 - fp.p_plus)) < 1e-12);
        }
    }
}

TEST_CASE("uniqueness regime") {
    for (int d = 3; d <= 12; ++d) {
        double lc = critical_fugacity(d);
        for (double mult : {0.1, 0.5, 0.9}) {
            ModelParams mp{d, lc * mult};
            TreeFixedPoints fp = solve_fixed_points(mp);
            CHECK(fp.unique);
            CHECK(fp.q_plus == fp.q_minus);
            CHECK(std::fabs(tree_map(fp.q_star, mp) - fp.q_star) < 1e-12);
            AlternatingResult it = alternating_iteration(mp, 1.0, 1000000, 1e-13);
            CHECK(it.converged);
            CHECK(std::fabs(it.q_even - it.q_odd) < 1e-9);
        }
    }
}

TEST_CASE("at the critical fugacity q = 1/(d-1)") {
    TreeFixedPoints fp = solve_fixed_points({6, 3125.0 / 4096.0});
    CHECK(fp.unique);
    CHECK(std::fabs(fp.q_plus - 0.2) < 1e-12);
    CHECK(std::fabs(fp.q_minus - 0.2) < 1e-12);
    CHECK(std::fabs(tree_map_derivative(0.2, {6, 3125.0 / 4096.0}) + 1.0) < 1e-12);
}

TEST_CASE("bifurcation point matches the closed form") {
    // The alternating iteration loses stability at q* exactly when |F'(q*)| crosses 1.
    for (int d = 3; d <= 10; ++d) {
        auto unstable = [&](double lambda) {
            ModelParams mp{d, lambda};
            TreeFixedPoints fp = solve_fixed_points(mp);
            return std::fabs(tree_map_derivative(fp.q_star, mp)) > 1.0;
        };
        double lo = 0.01, hi = 100.0;
        for (int i = 0; i < 80; ++i) {
            double mid = std::sqrt(lo * hi);
            (unstable(mid) ? hi : lo) = mid;
        }
        CHECK(hi == doctest::Approx(critical_fugacity(d)).epsilon(1e-9));

        double lc = critical_fugacity(d);
        AlternatingResult below = alternating_iteration({d, lc * 0.95}, 1.0, 2000000, 1e-14);
        AlternatingResult above = alternating_iteration({d, lc * 1.05}, 1.0, 2000000, 1e-14);
        CHECK(std::fabs(below.q_even - below.q_odd) < 1e-6);
        CHECK(std::fabs(above.q_even - above.q_odd) > 1e-2);
    }
}

TEST_CASE("extra conditions") {
    TreeFixedPoints fp = solve_fixed_points({6, 1.0});
    ExtraConditions c = check_extra_conditions(fp, 6);
    CHECK(c.product_ok);
    CHECK(c.qplus_ok);
    CHECK(c.product_margin == doctest::Approx(1 - 5 * fp.q_plus * fp.q_minus));
    CHECK(c.qplus_margin == doctest::Approx(0.6 - fp.q_plus));

    TreeFixedPoints big = solve_fixed_points({6, 100.0});
    CHECK_FALSE(check_extra_conditions(big, 6).qplus_ok);
}

TEST_CASE("errors") {
    CHECK_THROWS_AS(solve_fixed_points({2, 1.0}), DomainError);
    CHECK_THROWS_AS(solve_fixed_points({6, 0.0}), DomainError);
    CHECK_THROWS_AS(solve_fixed_points({6, -1.0}), DomainError);
    SolverOptions opt;
    opt.polish = false;
    opt.max_iter = 3;
    CHECK_THROWS_AS(solve_fixed_points({6, 0.8}, opt), ConvergenceError);
    opt.tol = 0;
    CHECK_THROWS_AS(solve_fixed_points({6, 1.0}, opt), DomainError);
}
