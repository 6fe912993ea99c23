#include "hc/treegibbs.hpp"

#include <cmath>
#include <string>

#include "hc/errors.hpp"

namespace hc {

void ModelParams::validate() const {
    if (d < 3) throw DomainError("d must be >= 3, got " + std::to_string(d));
    if (!(lambda > 0) || !std::isfinite(lambda)) throw DomainError("lambda must be positive");
}

mpq_class critical_fugacity_exact(int d) {
    if (d < 3) throw DomainError("critical_fugacity: d must be >= 3");
    mpz_class num, den;
    mpz_ui_pow_ui(num.get_mpz_t(), d - 1, d - 1);
    mpz_ui_pow_ui(den.get_mpz_t(), d - 2, d);
    mpq_class r(num, den);
    r.canonicalize();
    return r;
}

double critical_fugacity(int d) { return critical_fugacity_exact(d).get_d(); }

double tree_map(double q, const ModelParams& params) {
    double u = params.lambda * std::pow(1.0 - q, params.d - 1);
    return u / (1.0 + u);
}

double tree_map_derivative(double q, const ModelParams& params) {
    double out = tree_map(q, params);
    return -(params.d - 1) * out * (1.0 - out) / (1.0 - q);
}

double h_map(double x, const ModelParams& params) {
    if (!(x > 0 && x < 1)) throw DomainError("h_map: x must lie in (0,1)");
    return (1.0 - x) * (1.0 - std::pow(x / (params.lambda * (1.0 - x)), 1.0 / params.d));
}

AlternatingResult alternating_iteration(const ModelParams& params, double q0, long max_iter, double tol) {
    AlternatingResult r;
    double q = q0;
    for (long k = 1; k <= max_iter; ++k) {
        double odd = tree_map(q, params);
        double even = tree_map(odd, params);
        r.residual = std::fabs(even - q);
        r.iterations = k;
        r.q_even = even;
        r.q_odd = odd;
        q = even;
        if (r.residual < tol) {
            r.converged = true;
            break;
        }
    }
    return r;
}

namespace {

template <class F>
double bisect(F f, double lo, double hi, int steps = 200) {
    // f(lo) > 0 >= f(hi)
    for (int i = 0; i < steps; ++i) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f(mid) > 0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TreeFixedPoints solve_fixed_points(const ModelParams& params, const SolverOptions& opt) {
    params.validate();
    if (!(opt.tol > 0)) throw DomainError("tol must be positive");

    TreeFixedPoints fp;
    fp.lambda_c = critical_fugacity(params.d);

    fp.q_star = bisect([&](double q) { return tree_map(q, params) - q; }, 0.0, 1.0);
    fp.p_star = bisect(
        [&](double x) { return x < 1e-300 ? 1.0 : h_map(x, params) - x; }, 0.0, 1.0);

    auto G = [&](double q) { return tree_map(tree_map(q, params), params); };

    fp.unique = mpq_class(params.lambda) <= critical_fugacity_exact(params.d);
    if (fp.unique) {
        fp.q_plus = fp.q_minus = fp.q_star;
        fp.residual = std::fabs(G(fp.q_star) - fp.q_star);
    } else {
        // From the occupied boundary the even iterates decrease monotonically to q+.
        AlternatingResult it = alternating_iteration(params, 1.0, opt.max_iter, opt.tol);
        fp.iterations = it.iterations;
        double q = it.q_even;
        if (opt.polish) {
            double hi = q;
            q = bisect([&](double x) { return G(x) - x; }, fp.q_star, hi);
        } else if (!it.converged) {
            throw ConvergenceError("alternating iteration did not converge after " +
                                       std::to_string(it.iterations) + " steps",
                                   it.residual);
        }
        fp.q_plus = q;
        fp.q_minus = tree_map(q, params);
        fp.residual = std::fabs(G(q) - q);
        if (!(fp.residual < opt.tol))
            throw ConvergenceError("fixed point residual above tolerance", fp.residual);
    }

    double den = 1.0 - fp.q_plus * fp.q_minus;
    fp.p_plus = fp.q_plus * (1.0 - fp.q_minus) / den;
    fp.p_minus = fp.q_minus * (1.0 - fp.q_plus) / den;
    return fp;
}

ExtraConditions check_extra_conditions(const TreeFixedPoints& fp, int d) {
    ExtraConditions c;
    c.product_margin = 1.0 - (d - 1) * fp.q_plus * fp.q_minus;
    c.product_ok = c.product_margin > 0;
    c.qplus_margin = 0.6 - fp.q_plus;
    c.qplus_ok = c.qplus_margin > 0;
    return c;
}

}  // namespace hc
