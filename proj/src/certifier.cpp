#include "hc/certifier.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>
#include <thread>

namespace hc {

namespace {

template <class T>
struct Quantities {
    T h1, psi, cross;
    T phi() const { return psi * h1 - cross * cross; }
};

// The h1 / Psi / cross-term expressions over any interval-like scalar. a and b
// are the (alpha, beta) boxes; g and dl carry the cell. Uses the closed forms
//   a - g - eps = (S - r)/2,  1 - 2b + dl - g - eps = (1 - 3b + 2dl - a + S)/2,
//   1 - b - g - eps = (r + S)/2,  1 + d eps/d gamma = (b - dl)/S
// which avoid cancellation in the interval evaluation.
template <class T, class I>
Quantities<T> kernel(const I& ai, const I& bi, const T& g, const T& dl, int d) {
    T a(ai), b(bi);
    T one(1.0), two(2.0), four(4.0);
    T D(static_cast<double>(d)), D1(static_cast<double>(d - 1)), D2(static_cast<double>(d - 2));
    I clamp = I(1.0) / I(10000.0);
    I coef = I(static_cast<double>(d - 12)) / I(6.0);

    T r = one - a - b;
    T S = sqrt(r * r + four * (a - g) * (b - dl));
    T A = (one - T(3.0) * b + two * dl - a + S) / two;
    T B = (S - r) / two;
    T C = b - dl - B;
    T Dm = (r + S) / two;
    T onep_eg = (b - dl) / S;
    T eg = onep_eg - one;
    T ed = (a - g) / S;

    T fdd = -(D / A) + D1 / (one - two * b + dl) - D / C + D2 / (b - dl) - one / dl;
    T fde = D / A + D / C;

    Quantities<T> q;
    q.h1 = fdd + ed * fde;
    q.cross = fde * onep_eg;
    q.psi = onep_eg * (-(D / A) - D / C + D / Dm) + D1 / (one - two * a + g) + T(coef) / max_with(clamp, a - g) -
            one / max_with(clamp, g);
    (void)eg;
    return q;
}

template <class I>
struct BoxBounds {
    I h1, phi;
};

template <class I>
BoxBounds<I> eval_box(const I& a, const I& b, const I& g, const I& dl, int d, bool mean_value) {
    using Dl = DualI<I>;
    Dl gd(g, I(1.0), I(0.0)), dd(dl, I(0.0), I(1.0));
    Quantities<Dl> q = kernel<Dl, I>(a, b, gd, dd, d);
    Dl phi = q.phi();
    BoxBounds<I> out{q.h1.v, phi.v};
    if (mean_value) {
        I gc(g.mid()), dc(dl.mid());
        Quantities<I> c = kernel<I, I>(a, b, gc, dc, d);
        I h1_mv = c.h1 + q.h1.dg * (g - gc) + q.h1.dd * (dl - dc);
        I phi_mv = c.phi() + phi.dg * (g - gc) + phi.dd * (dl - dc);
        out.h1 = intersect(out.h1, h1_mv);
        out.phi = intersect(out.phi, phi_mv);
    }
    return out;
}

constexpr double kH1Bound = -17.0;
constexpr double kPhiBound = 1500.0;

template <class I>
CellBound refine_box(const I& a, const I& b, const I& g, const I& dl, const CertificationOptions& opt, int left) {
    CellBound cb;
    bool evaluated = false;
    try {
        BoxBounds<I> bb = eval_box(a, b, g, dl, opt.d, opt.mean_value);
        cb.h1_upper = bb.h1.hi();
        cb.phi_lower = bb.phi.lo();
        evaluated = true;
    } catch (const IntervalDomainError& e) {
        cb.h1_upper = std::numeric_limits<double>::infinity();
        cb.phi_lower = -std::numeric_limits<double>::infinity();
        cb.error = e.what();
    }
    cb.pass = evaluated && cb.h1_upper < kH1Bound && cb.phi_lower > kPhiBound;
    if (cb.pass || left == 0) return cb;

    double gm = g.mid(), dm = dl.mid();
    I gs[2] = {I(g.lo(), gm), I(gm, g.hi())};
    I ds[2] = {I(dl.lo(), dm), I(dm, dl.hi())};
    double h1 = -std::numeric_limits<double>::infinity();
    double phi = std::numeric_limits<double>::infinity();
    int depth = 0, leaves = 0;
    std::string err;
    for (const I& gg : gs)
        for (const I& dd : ds) {
            CellBound c = refine_box(a, b, gg, dd, opt, left - 1);
            h1 = std::max(h1, c.h1_upper);
            phi = std::min(phi, c.phi_lower);
            depth = std::max(depth, c.depth);
            leaves += c.leaves;
            if (err.empty()) err = c.error;
        }
    // children never loosen the parent's enclosure
    cb.h1_upper = std::min(cb.h1_upper, h1);
    cb.phi_lower = std::max(cb.phi_lower, phi);
    cb.depth = depth + 1;
    cb.leaves = leaves;
    cb.pass = cb.h1_upper < kH1Bound && cb.phi_lower > kPhiBound;
    cb.error = cb.pass ? std::string() : err;
    return cb;
}

template <class I>
I to(const Interval& x) {
    return I(x.lo(), x.hi());
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt(const Interval& x) { return "[" + fmt(x.lo()) + ", " + fmt(x.hi()) + "]"; }

// F(q) = 1 / (1 + 1/(lambda (1-q)^{d-1})), written with a single occurrence of q.
Interval F_int(const Interval& q, int d, const Interval& lam) {
    Interval one(1.0);
    return one / (one + one / (lam * pow(one - q, d - 1)));
}

Interval Fprime_int(const Interval& q, int d, const Interval& lam) {
    Interval f = F_int(q, d, lam);
    return -Interval(static_cast<double>(d - 1)) * f * (Interval(1.0) - f) / (Interval(1.0) - q);
}

}  // namespace

Interval h1_interval(const Interval& a, const Interval& b, const Interval& g, const Interval& dl, int d) {
    return kernel<Interval, Interval>(a, b, g, dl, d).h1;
}
Interval psi_interval(const Interval& a, const Interval& b, const Interval& g, const Interval& dl, int d) {
    return kernel<Interval, Interval>(a, b, g, dl, d).psi;
}
Interval phi_interval(const Interval& a, const Interval& b, const Interval& g, const Interval& dl, int d) {
    return kernel<Interval, Interval>(a, b, g, dl, d).phi();
}
HwInterval h1_interval_hw(const HwInterval& a, const HwInterval& b, const HwInterval& g, const HwInterval& dl, int d) {
    return kernel<HwInterval, HwInterval>(a, b, g, dl, d).h1;
}
HwInterval psi_interval_hw(const HwInterval& a, const HwInterval& b, const HwInterval& g, const HwInterval& dl,
                           int d) {
    return kernel<HwInterval, HwInterval>(a, b, g, dl, d).psi;
}
HwInterval phi_interval_hw(const HwInterval& a, const HwInterval& b, const HwInterval& g, const HwInterval& dl,
                           int d) {
    return kernel<HwInterval, HwInterval>(a, b, g, dl, d).phi();
}

FixedPointEnclosure enclose_fixed_points(int d, double lambda, double q_guess, double radius) {
    FixedPointEnclosure e;
    Interval lam(lambda);
    Interval X = Interval(q_guess) + Interval(-radius, radius);
    auto phi = [&](const Interval& q) { return F_int(F_int(q, d, lam), d, lam) - q; };
    auto dphi = [&](const Interval& q) {
        return Fprime_int(F_int(q, d, lam), d, lam) * Fprime_int(q, d, lam) - Interval(1.0);
    };
    for (int it = 0; it < 8; ++it) {
        Interval C(X.mid());
        Interval Y(1.0 / dphi(C).mid());
        Interval K = C - Y * phi(C) + (Interval(1.0) - Y * dphi(X)) * (X - C);
        if (!X.interior_contains(K)) break;
        e.verified = true;
        X = K;
    }
    e.q_plus = X;
    e.q_minus = F_int(X, d, lam);
    Interval one(1.0);
    // p+ = q+(1-q-)/(1-q+q-), p- = q-(1-q+)/(1-q+q-)
    e.p_plus = X * (one - e.q_minus) / (one - X * e.q_minus);
    e.p_minus = e.q_minus * (one - X) / (one - X * e.q_minus);
    return e;
}

CellBound certify_box(const Interval& alpha, const Interval& beta, const Interval& gamma, const Interval& delta,
                      const CertificationOptions& opt) {
    if (opt.rounding == RoundingMode::Hardware)
        return refine_box<HwInterval>(to<HwInterval>(alpha), to<HwInterval>(beta), to<HwInterval>(gamma),
                                      to<HwInterval>(delta), opt, opt.refine_depth);
    return refine_box<Interval>(alpha, beta, gamma, delta, opt, opt.refine_depth);
}

CertificationReport certify_condition1(const TreeFixedPoints& fp, const CertificationOptions& opt) {
    auto t0 = std::chrono::steady_clock::now();
    CertificationReport rep;
    rep.options = opt;

    // (alpha, beta) centred on (p-, p+) recomputed from the supplied q values
    double den = 1.0 - fp.q_plus * fp.q_minus;
    double pp = fp.q_plus * (1.0 - fp.q_minus) / den;
    double pm = fp.q_minus * (1.0 - fp.q_plus) / den;
    Interval r(-opt.nbhd, opt.nbhd);
    rep.alpha = Interval(pm) + r;
    rep.beta = Interval(pp) + r;

    rep.enclosure = enclose_fixed_points(opt.d, opt.lambda, fp.q_plus);
    rep.enclosure_inside_box = rep.enclosure.verified && rep.alpha.contains(rep.enclosure.p_minus) &&
                               rep.beta.contains(rep.enclosure.p_plus);

    Interval hundred(100.0);
    for (int j = 1; j <= opt.grid_j; ++j)
        for (int i = 0; i < opt.grid_i; ++i) {
            CertCell c;
            c.i = i;
            c.j = j;
            Interval glo = rep.alpha * Interval(static_cast<double>(i)) / Interval(static_cast<double>(opt.grid_i));
            Interval ghi =
                rep.alpha * Interval(static_cast<double>(i + 1)) / Interval(static_cast<double>(opt.grid_i));
            c.gamma = Interval(glo.lo(), ghi.hi());
            c.delta = Interval((Interval(static_cast<double>(j)) / hundred).lo(),
                               (Interval(static_cast<double>(j + 1)) / hundred).hi());
            rep.cells.push_back(c);
        }

    auto work = [&](size_t begin, size_t step) {
        for (size_t k = begin; k < rep.cells.size(); k += step)
            rep.cells[k].bound = certify_box(rep.alpha, rep.beta, rep.cells[k].gamma, rep.cells[k].delta, opt);
    };
    int nt = std::max(1, opt.threads);
    if (nt == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nt; ++t) pool.emplace_back(work, static_cast<size_t>(t), static_cast<size_t>(nt));
        for (auto& th : pool) th.join();
    }

    rep.max_h1_upper = -std::numeric_limits<double>::infinity();
    rep.min_phi_lower = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < rep.cells.size(); ++k) {
        const CellBound& b = rep.cells[k].bound;
        rep.max_h1_upper = std::max(rep.max_h1_upper, b.h1_upper);
        rep.min_phi_lower = std::min(rep.min_phi_lower, b.phi_lower);
        rep.max_depth_used = std::max(rep.max_depth_used, b.depth);
        if (!b.pass) rep.failing.push_back(static_cast<int>(k));
    }
    rep.verdict = rep.failing.empty() && rep.enclosure_inside_box;
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

std::string CertificationReport::serialize(bool include_timing) const {
    std::ostringstream os;
    os << "report certify\n";
    os << "d " << options.d << "\n";
    os << "lambda " << fmt(options.lambda) << "\n";
    os << "nbhd " << fmt(options.nbhd) << "\n";
    os << "grid " << options.grid_i << "x" << options.grid_j << "\n";
    os << "refine_depth " << options.refine_depth << "\n";
    os << "form " << (options.mean_value ? "mean-value" : "plain") << "\n";
    os << "rounding " << (options.rounding == RoundingMode::Hardware ? "hardware" : "nudge") << "\n";
    os << "alpha " << fmt(alpha) << "\n";
    os << "beta " << fmt(beta) << "\n";
    os << "krawczyk_verified " << (enclosure.verified ? "yes" : "no") << "\n";
    os << "q_plus_enclosure " << fmt(enclosure.q_plus) << "\n";
    os << "q_minus_enclosure " << fmt(enclosure.q_minus) << "\n";
    os << "p_plus_enclosure " << fmt(enclosure.p_plus) << "\n";
    os << "p_minus_enclosure " << fmt(enclosure.p_minus) << "\n";
    os << "fixed_points_inside_box " << (enclosure_inside_box ? "yes" : "no") << "\n";
    os << "cells " << cells.size() << "\n";
    os << "max_h1_upper " << fmt(max_h1_upper) << "\n";
    os << "min_phi_lower " << fmt(min_phi_lower) << "\n";
    os << "max_refine_depth_used " << max_depth_used << "\n";
    os << "failing_cells " << failing.size() << "\n";
    for (int k : failing) {
        const CertCell& c = cells[static_cast<size_t>(k)];
        os << "fail i=" << c.i << " j=" << c.j << " h1_upper=" << fmt(c.bound.h1_upper)
           << " phi_lower=" << fmt(c.bound.phi_lower);
        if (!c.bound.error.empty()) os << " error=\"" << c.bound.error << "\"";
        os << "\n";
    }
    // worst offenders by each bound
    int wh = -1, wp = -1;
    for (size_t k = 0; k < cells.size(); ++k) {
        if (wh < 0 || cells[k].bound.h1_upper > cells[static_cast<size_t>(wh)].bound.h1_upper) wh = static_cast<int>(k);
        if (wp < 0 || cells[k].bound.phi_lower < cells[static_cast<size_t>(wp)].bound.phi_lower) wp = static_cast<int>(k);
    }
    if (wh >= 0) {
        const CertCell& c = cells[static_cast<size_t>(wh)];
        os << "worst_h1 i=" << c.i << " j=" << c.j << " h1_upper=" << fmt(c.bound.h1_upper) << "\n";
    }
    if (wp >= 0) {
        const CertCell& c = cells[static_cast<size_t>(wp)];
        os << "worst_phi i=" << c.i << " j=" << c.j << " phi_lower=" << fmt(c.bound.phi_lower) << "\n";
    }
    os << "verdict " << (verdict ? "pass" : "fail") << "\n";
    if (include_timing) os << "wall_seconds " << fmt(wall_seconds) << "\n";
    os << "# i,j,gamma_lo,gamma_hi,delta_lo,delta_hi,h1_upper,phi_lower,depth,pass\n";
    for (const CertCell& c : cells)
        os << "cell " << c.i << "," << c.j << "," << fmt(c.gamma.lo()) << "," << fmt(c.gamma.hi()) << ","
           << fmt(c.delta.lo()) << "," << fmt(c.delta.hi()) << "," << fmt(c.bound.h1_upper) << ","
           << fmt(c.bound.phi_lower) << "," << c.bound.depth << "," << (c.bound.pass ? 1 : 0) << "\n";
    return os.str();
}

namespace {

// x log(x/y) over intervals; requires x, y > 0
Interval xlog(const Interval& x, const Interval& y) { return x * (log(x) - log(y)); }

Interval H1i(const Interval& x, const Interval& y) { return -xlog(x, y) - xlog(y - x, y); }

Interval f_interval(const Interval& a, const Interval& b, const Interval& g, const Interval& dl, const Interval& e,
                    int d, double lambda) {
    Interval one(1.0), two(2.0);
    Interval bracket = H1i(g, one - two * b + dl) - H1i(g, one) + H1i(e, one - two * b + dl - g) +
                       H1i(a - g - e, b - dl) - H1i(a - g, one - g) + H1i(a - g, one - b - g - e) -
                       H1i(a - g, one - a);
    return two * (a + b) * log(Interval(lambda)) + H1i(a, one) + H1i(g, a) + H1i(a - g, one - a) + H1i(b, one) +
           H1i(dl, b) + H1i(b - dl, one - b) + Interval(static_cast<double>(d)) * bracket;
}

Interval f1_interval(const Interval& a, const Interval& g) {
    Interval one(1.0);
    return H1i(a, one) + H1i(g, a) + H1i(a - g, one - a);
}

Interval f2_interval(const Interval& b, const Interval& dl) {
    Interval one(1.0);
    return H1i(b, one) + H1i(dl, b) + H1i(b - dl, one - b);
}

Check make_check(const std::string& name, const Interval& v, const std::string& rel, double bound) {
    Check c;
    c.name = name;
    c.value = v;
    c.relation = rel;
    c.bound = bound;
    if (rel == "<") {
        c.pass = v.hi() < bound;
        c.margin = bound - v.hi();
    } else if (rel == "<=") {
        c.pass = v.hi() <= bound;
        c.margin = bound - v.hi();
    } else {
        c.pass = v.lo() > bound;
        c.margin = v.lo() - bound;
    }
    return c;
}

PreliminaryReport preliminaries_impl(const TreeFixedPoints& fp, double nbhd, int d, double lambda) {
    PreliminaryReport rep;
    double den = 1.0 - fp.q_plus * fp.q_minus;
    double pp = fp.q_plus * (1.0 - fp.q_minus) / den;
    double pm = fp.q_minus * (1.0 - fp.q_plus) / den;
    Interval r(-nbhd, nbhd);
    Interval a = Interval(pm) + r, b = Interval(pp) + r;
    rep.alpha = a;
    rep.beta = b;
    Interval one(1.0), two(2.0), four(4.0);

    Interval g_star = square(a), d_star = square(b);
    Interval rr = one - a - b;
    Interval S_star = sqrt(rr * rr + four * (a - g_star) * (b - d_star));
    Interval e_star = (one + a - b - two * g_star - S_star) / two;
    Interval ghat_star = f_interval(a, b, g_star, d_star, e_star, d, lambda);
    Interval f1s = f1_interval(a, g_star);
    Interval c015 = Interval::ratio(15, 1000), c330 = Interval::ratio(330, 1000);
    Interval b1 = f1s + f2_interval(b, c015);
    Interval b2 = f1s + f2_interval(b, c330);
    Interval c1430 = Interval::ratio(1430, 1000), c1425 = Interval::ratio(1425, 1000),
             c1414 = Interval::ratio(1414, 1000), c019 = Interval::ratio(19, 100);

    rep.checks.push_back(make_check("a_ghat_star", ghat_star, ">", c1430.hi()));
    rep.checks.push_back(make_check("b_f1_plus_f2_0.015", b1, "<", c1425.lo()));
    rep.checks.push_back(make_check("c_f1_plus_f2_0.330", b2, "<", c1414.lo()));
    Interval ratio = four * a * b / square(rr);
    rep.checks.push_back(make_check("d_4ab_over_(1-a-b)^2", ratio, "<", c019.lo()));

    // (e) exact reduced Hessian at the star point
    Interval D(static_cast<double>(d)), D1(static_cast<double>(d - 1)), D2(static_cast<double>(d - 2));
    Interval A = (one - Interval(3.0) * b + two * d_star - a + S_star) / two;
    Interval B = (S_star - rr) / two;
    Interval C = b - d_star - B;
    Interval Dm = (rr + S_star) / two;
    Interval fge = -(D / A) - D / B - D / C + D / Dm;
    Interval fgg = fge + D1 / (one - two * a + g_star) + D2 / (a - g_star) - one / g_star;
    Interval fde = D / A + D / C;
    Interval fdd = -(D / A) + D1 / (one - two * b + d_star) - D / C + D2 / (b - d_star) - one / d_star;
    Interval eg = (b - d_star) / S_star - one, ed = (a - g_star) / S_star;
    Interval hgg = fgg + eg * fge;
    Interval hdd = fdd + ed * fde;
    Interval hgd = fde + eg * fde;
    Interval det = hgg * hdd - hgd * hgd;
    rep.checks.push_back(make_check("e_ghat_gg_at_star", hgg, "<", 0.0));
    rep.checks.push_back(make_check("e_det_hessian_at_star", det, ">", 0.0));

    // (f) f2 is unimodal in delta with its peak at beta^2, f1 peaks at alpha^2; the
    // bounds (a)-(c) then exclude delta outside [0.015, 0.33] once beta^2 lies inside.
    bool abc = rep.checks[0].pass && rep.checks[1].pass && rep.checks[2].pass;
    Check f;
    f.name = "f_region_reduction";
    f.value = d_star;
    f.relation = "in";
    f.pass = abc && d_star.lo() > c015.hi() && d_star.hi() < c330.lo();
    f.margin = std::min(d_star.lo() - c015.hi(), c330.lo() - d_star.hi());
    rep.checks.push_back(f);

    rep.verdict = true;
    for (const Check& c : rep.checks) rep.verdict = rep.verdict && c.pass;
    return rep;
}

}  // namespace

PreliminaryReport certify_preliminaries(const TreeFixedPoints& fp, double nbhd, int d, double lambda) {
    try {
        return preliminaries_impl(fp, nbhd, d, lambda);
    } catch (const IntervalDomainError& e) {
        PreliminaryReport rep;
        Check c;
        c.name = std::string("interval_domain_error: ") + e.what();
        c.relation = "ok";
        c.value = Interval(0.0);
        c.margin = -std::numeric_limits<double>::infinity();
        rep.checks.push_back(c);
        rep.verdict = false;
        return rep;
    }
}

std::string PreliminaryReport::serialize() const {
    std::ostringstream os;
    os << "report preliminaries\n";
    os << "alpha " << fmt(alpha) << "\n";
    os << "beta " << fmt(beta) << "\n";
    for (const Check& c : checks)
        os << "check " << c.name << " value=" << fmt(c.value) << " " << c.relation << " " << fmt(c.bound)
           << " margin=" << fmt(c.margin) << " " << (c.pass ? "pass" : "fail") << "\n";
    os << "verdict " << (verdict ? "pass" : "fail") << "\n";
    return os.str();
}

double largest_passing_nbhd(const TreeFixedPoints& fp, const CertificationOptions& opt,
                            const std::vector<double>& candidates) {
    double best = 0;
    for (double nb : candidates) {
        CertificationOptions o = opt;
        o.nbhd = nb;
        if (!certify_condition1(fp, o).verdict) break;
        best = nb;
    }
    return best;
}

}  // namespace hc
