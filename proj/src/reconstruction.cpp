#include "hc/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "hc/errors.hpp"
#include "hc/rng.hpp"

namespace hc {

namespace {

long ipow(long b, int e) {
    long r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

int class_at(int sign, int depth) { return (depth % 2 == 0) ? sign : -sign; }

double p_of(const TreeFixedPoints& fp, int c) { return c > 0 ? fp.p_plus : fp.p_minus; }
double q_of(const TreeFixedPoints& fp, int c) { return c > 0 ? fp.q_plus : fp.q_minus; }

void check_leaves(size_t n, int d, int* depth_out) {
    if (d < 3) throw DomainError("tree recursion needs d >= 3");
    long b = d - 1, size = 1;
    int depth = 0;
    while (size < static_cast<long>(n)) {
        size *= b;
        ++depth;
    }
    if (size != static_cast<long>(n)) throw DomainError("leaf count is not a power of d-1");
    *depth_out = depth;
}

}  // namespace

long TreeSample::level_begin(int level) const {
    long begin = 0;
    for (int k = 0; k < level; ++k) begin += ipow(d - 1, k);
    return begin;
}

long TreeSample::level_size(int level) const { return ipow(d - 1, level); }

std::vector<std::uint8_t> TreeSample::leaves() const {
    long b = level_begin(depth);
    return {spin.begin() + b, spin.end()};
}

TreeSample broadcast_sample(const TreeFixedPoints& fp, int d, int depth, int sign, RootPrior prior,
                            std::uint64_t seed) {
    if (d < 3) throw DomainError("broadcast_sample: d must be >= 3");
    if (depth < 0) throw DomainError("broadcast_sample: depth must be >= 0");
    if (sign != 1 && sign != -1) throw DomainError("broadcast_sample: sign must be +1 or -1");
    TreeSample t;
    t.d = d;
    t.depth = depth;
    t.sign = sign;
    long total = t.level_begin(depth + 1);
    t.spin.assign(static_cast<size_t>(total), 0);
    Rng rng(seed);
    double root_p = prior == RootPrior::P ? p_of(fp, sign) : q_of(fp, sign);
    t.spin[0] = rng.bernoulli(root_p);
    long b = d - 1;
    for (int k = 1; k <= depth; ++k) {
        double q = q_of(fp, class_at(sign, k));
        long begin = t.level_begin(k), size = t.level_size(k);
        for (long i = 0; i < size; ++i) {
            long v = begin + i, parent = (v - 1) / b;
            t.spin[static_cast<size_t>(v)] = t.spin[static_cast<size_t>(parent)] ? 0 : rng.bernoulli(q);
        }
    }
    return t;
}

double posterior_root(const std::vector<double>& leaves, int d, double lambda) {
    int depth;
    check_leaves(leaves.size(), d, &depth);
    const double inf = std::numeric_limits<double>::infinity();
    // log(1 - X) at the current level
    std::vector<double> l1m(leaves.size());
    for (size_t i = 0; i < leaves.size(); ++i) {
        if (leaves[i] < 0 || leaves[i] > 1) throw DomainError("posterior_root: leaf value outside [0,1]");
        l1m[i] = std::log1p(-leaves[i]);
    }
    if (depth == 0) return leaves[0];
    double loglam = std::log(lambda);
    size_t b = static_cast<size_t>(d - 1);
    double root_logodds = 0;
    for (int k = depth; k > 0; --k) {
        std::vector<double> up(l1m.size() / b);
        for (size_t v = 0; v < up.size(); ++v) {
            double s = 0;
            for (size_t c = 0; c < b; ++c) s += l1m[v * b + c];
            double L = s == -inf ? -inf : loglam + s;
            if (k == 1) root_logodds = L;
            // log(1 - X) = -log(1 + e^L)
            up[v] = L == -inf ? 0.0 : (L > 0 ? -(L + std::log1p(std::exp(-L))) : -std::log1p(std::exp(L)));
        }
        l1m.swap(up);
    }
    if (root_logodds == -inf) return 0.0;
    return 1.0 / (1.0 + std::exp(-root_logodds));
}

mpq_class posterior_root_exact(const std::vector<mpq_class>& leaves, int d, const mpq_class& lambda) {
    int depth;
    check_leaves(leaves.size(), d, &depth);
    std::vector<mpq_class> x = leaves;
    size_t b = static_cast<size_t>(d - 1);
    for (int k = depth; k > 0; --k) {
        std::vector<mpq_class> up(x.size() / b);
        for (size_t v = 0; v < up.size(); ++v) {
            mpq_class prod = lambda;
            for (size_t c = 0; c < b; ++c) prod *= 1 - x[v * b + c];
            up[v] = prod / (1 + prod);
        }
        x.swap(up);
    }
    return x[0];
}

double posterior_root_tilde(const std::vector<std::uint8_t>& leaves, int depth, int d, int sign,
                            const TreeFixedPoints& fp) {
    int dep;
    check_leaves(leaves.size(), d, &dep);
    if (dep != depth) throw DomainError("posterior_root_tilde: leaf count does not match depth");
    std::vector<double> x(leaves.begin(), leaves.end());
    size_t b = static_cast<size_t>(d - 1);
    for (int k = depth - 1; k >= 0; --k) {
        int r = class_at(sign, k);
        double p = p_of(fp, r), pc = p_of(fp, -r), qc = q_of(fp, -r);
        std::vector<double> up(x.size() / b);
        for (size_t v = 0; v < up.size(); ++v) {
            double A = 1, B = 1;
            for (size_t c = 0; c < b; ++c) {
                double xc = x[v * b + c];
                A *= (1 - xc) / (1 - pc);
                B *= qc * xc / pc + (1 - qc) * (1 - xc) / (1 - pc);
            }
            up[v] = p * A / (p * A + (1 - p) * B);
        }
        x.swap(up);
    }
    return x[0];
}

// ---------------------------------------------------------------- population dynamics

namespace {

struct Population {
    std::vector<std::uint8_t> s;
    std::vector<double> x;
    std::vector<std::uint32_t> idx0, idx1;

    void index() {
        idx0.clear();
        idx1.clear();
        for (size_t i = 0; i < s.size(); ++i) (s[i] ? idx1 : idx0).push_back(static_cast<std::uint32_t>(i));
    }
};

struct ReplicateLevel {
    double x, x_cond, x_square, identity, child_diff, child_cond, child_pred;
    double mean_q, abs_dev, tail;
};

// One replicate: the p-prior and q-prior populations for both classes, levels
// 0..level_max. Returns per-level statistics for the root class opt.sign.
std::vector<ReplicateLevel> run_replicate(const TreeFixedPoints& fp, int d, double lambda, const DecayOptions& opt,
                                          long n, std::uint64_t seed, bool* degenerate) {
    Rng rng(seed);
    std::vector<ReplicateLevel> out(static_cast<size_t>(opt.level_max + 1));
    // index 0: class +, 1: class -
    auto cls = [](int r) { return r > 0 ? 0 : 1; };
    Population P[2], Q[2];
    for (int r : {1, -1}) {
        for (RootPrior prior : {RootPrior::P, RootPrior::Q}) {
            Population& pop = prior == RootPrior::P ? P[cls(r)] : Q[cls(r)];
            double dens = prior == RootPrior::P ? p_of(fp, r) : q_of(fp, r);
            pop.s.resize(static_cast<size_t>(n));
            pop.x.resize(static_cast<size_t>(n));
            for (long i = 0; i < n; ++i) {
                pop.s[static_cast<size_t>(i)] = rng.bernoulli(dens);
                pop.x[static_cast<size_t>(i)] = pop.s[static_cast<size_t>(i)];
            }
            pop.index();
        }
    }
    auto pick = [&](const Population& pop, std::uint8_t spin) -> double {
        const auto& idx = spin ? pop.idx1 : pop.idx0;
        if (idx.empty()) {
            *degenerate = true;
            return spin;
        }
        return pop.x[idx[rng.below(idx.size())]];
    };
    int b = d - 1;
    for (int level = 1; level <= opt.level_max; ++level) {
        Population nP[2], nQ[2];
        for (int r : {1, -1}) {
            int c = -r;
            double p = p_of(fp, r), pc = p_of(fp, c), qc = q_of(fp, c);
            for (RootPrior prior : {RootPrior::P, RootPrior::Q}) {
                const Population& child = prior == RootPrior::P ? P[cls(c)] : Q[cls(c)];
                Population& pop = prior == RootPrior::P ? nP[cls(r)] : nQ[cls(r)];
                double dens = prior == RootPrior::P ? p : q_of(fp, r);
                pop.s.resize(static_cast<size_t>(n));
                pop.x.resize(static_cast<size_t>(n));
                for (long i = 0; i < n; ++i) {
                    std::uint8_t s = rng.bernoulli(dens);
                    double A = 1, B = 1, prod = 1;
                    for (int k = 0; k < b; ++k) {
                        std::uint8_t cs = s ? 0 : rng.bernoulli(qc);
                        double xc = pick(child, cs);
                        if (prior == RootPrior::P) {
                            A *= (1 - xc) / (1 - pc);
                            B *= qc * xc / pc + (1 - qc) * (1 - xc) / (1 - pc);
                        } else {
                            prod *= 1 - xc;
                        }
                    }
                    pop.s[static_cast<size_t>(i)] = s;
                    pop.x[static_cast<size_t>(i)] =
                        prior == RootPrior::P ? p * A / (p * A + (1 - p) * B) : lambda * prod / (1 + lambda * prod);
                }
                pop.index();
            }
        }
        for (int k = 0; k < 2; ++k) {
            P[k] = std::move(nP[k]);
            Q[k] = std::move(nQ[k]);
        }

        ReplicateLevel& st = out[static_cast<size_t>(level)];
        const Population& pp = P[cls(opt.sign)];
        const Population& pc = P[cls(-opt.sign)];
        const Population& qq = Q[cls(opt.sign)];
        double p = p_of(fp, opt.sign), pcd = p_of(fp, -opt.sign), q = q_of(fp, opt.sign);
        double dn = static_cast<double>(n);

        double mean = 0, sq = 0, ident = 0, occ_sum = 0;
        long occ = 0;
        for (long i = 0; i < n; ++i) {
            double x = pp.x[static_cast<size_t>(i)];
            mean += x;
            sq += (x - p) * (x - p);
            ident += (pp.s[static_cast<size_t>(i)] - x) * (x - p);
            if (pp.s[static_cast<size_t>(i)]) {
                occ_sum += x;
                ++occ;
            }
        }
        mean /= dn;
        double var = 0;
        for (long i = 0; i < n; ++i) var += (pp.x[static_cast<size_t>(i)] - mean) * (pp.x[static_cast<size_t>(i)] - mean);
        var /= dn - 1;
        st.x = var / p;
        st.x_cond = occ ? occ_sum / static_cast<double>(occ) - p : 0;
        st.x_square = sq / dn / p;
        st.identity = ident / dn / p;

        double cmean = 0, cvac = 0;
        long nvac = 0;
        for (long i = 0; i < n; ++i) {
            cmean += pc.x[static_cast<size_t>(i)];
            if (!pc.s[static_cast<size_t>(i)]) {
                cvac += pc.x[static_cast<size_t>(i)];
                ++nvac;
            }
        }
        cmean /= dn;
        double cvar = 0;
        for (long i = 0; i < n; ++i) cvar += (pc.x[static_cast<size_t>(i)] - cmean) * (pc.x[static_cast<size_t>(i)] - cmean);
        cvar /= dn - 1;
        st.child_cond = nvac ? cvac / static_cast<double>(nvac) - pcd : 0;
        st.child_pred = -pcd / (1 - pcd) * (cvar / pcd);
        st.child_diff = st.child_cond - st.child_pred;

        double threshold = opt.tail_threshold >= 0 ? opt.tail_threshold : std::exp(-opt.zeta1 * level);
        double qm = 0, ad = 0;
        long tail = 0;
        for (long i = 0; i < n; ++i) {
            double x = qq.x[static_cast<size_t>(i)];
            qm += x;
            ad += std::fabs(x - q);
            if (std::fabs(x - q) >= threshold) ++tail;
        }
        st.mean_q = qm / dn;
        st.abs_dev = ad / dn;
        st.tail = static_cast<double>(tail) / dn;
    }
    return out;
}

void mean_se(const std::vector<double>& v, double* mean, double* se) {
    double m = 0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    *mean = m;
    *se = v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size())) : 0;
}

}  // namespace

const LevelStats& DecayEstimate::at(int level) const {
    for (const auto& l : levels)
        if (l.level == level) return l;
    throw DomainError("DecayEstimate: level not estimated");
}

DecayEstimate estimate_decay(const TreeFixedPoints& fp, int d, double lambda, const DecayOptions& opt) {
    if (opt.samples < 1000) throw DomainError("estimate_decay: samples must be >= 1000");
    if (opt.replicates < 2) throw DomainError("estimate_decay: replicates must be >= 2");
    if (opt.level_min < 1 || opt.level_max < opt.level_min) throw DomainError("estimate_decay: bad level range");
    if (opt.sign != 1 && opt.sign != -1) throw DomainError("estimate_decay: sign must be +1 or -1");
    if (d < 3) throw DomainError("estimate_decay: d must be >= 3");
    long per = opt.samples / opt.replicates;
    int R = opt.replicates;

    std::vector<std::vector<ReplicateLevel>> reps(static_cast<size_t>(R));
    std::vector<char> degen(static_cast<size_t>(R), 0);
    int threads = std::max(1, std::min(opt.threads, R));
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (int r = t; r < R; r += threads) {
                bool dg = false;
                reps[static_cast<size_t>(r)] = run_replicate(fp, d, lambda, opt, per, derive_seed(opt.seed, static_cast<std::uint64_t>(r)), &dg);
                degen[static_cast<size_t>(r)] = dg;
            }
        });
    for (auto& th : pool) th.join();

    DecayEstimate est;
    est.options = opt;
    est.d = d;
    est.lambda = lambda;
    est.degenerate = std::any_of(degen.begin(), degen.end(), [](char c) { return c != 0; });
    est.predicted_rate = std::pow((d - 1) * fp.q_plus * fp.q_minus, 2);

    for (int level = opt.level_min; level <= opt.level_max; ++level) {
        LevelStats ls;
        ls.level = level;
        ls.threshold = opt.tail_threshold >= 0 ? opt.tail_threshold : std::exp(-opt.zeta1 * level);
        auto gather = [&](double ReplicateLevel::*f, double* m, double* se) {
            std::vector<double> v;
            for (const auto& rep : reps) v.push_back(rep[static_cast<size_t>(level)].*f);
            mean_se(v, m, se);
        };
        gather(&ReplicateLevel::x, &ls.x, &ls.x_se);
        gather(&ReplicateLevel::x_cond, &ls.x_cond, &ls.x_cond_se);
        gather(&ReplicateLevel::x_square, &ls.x_square, &ls.x_square_se);
        gather(&ReplicateLevel::identity, &ls.identity_diff, &ls.identity_se);
        double unused;
        gather(&ReplicateLevel::child_cond, &ls.child_cond, &unused);
        gather(&ReplicateLevel::child_pred, &ls.child_cond_pred, &unused);
        gather(&ReplicateLevel::child_diff, &unused, &ls.child_cond_se);
        gather(&ReplicateLevel::mean_q, &ls.mean_q, &ls.mean_q_se);
        gather(&ReplicateLevel::abs_dev, &ls.abs_dev, &ls.abs_dev_se);
        gather(&ReplicateLevel::tail, &ls.tail, &ls.tail_se);
        est.levels.push_back(ls);
    }

    // geometric mean of two-level ratios x_l / x_{l-2}, per replicate
    int lo = std::max(opt.fit_min, opt.level_min), hi = std::min(opt.fit_max, opt.level_max);
    if (hi - lo >= 2) {
        std::vector<double> rates;
        for (const auto& rep : reps) {
            double s = 0;
            int cnt = 0;
            for (int l = lo + 2; l <= hi; ++l) {
                double a = rep[static_cast<size_t>(l)].x, b = rep[static_cast<size_t>(l - 2)].x;
                if (a <= 0 || b <= 0) {
                    est.degenerate = true;
                    continue;
                }
                s += std::log(a / b);
                ++cnt;
            }
            if (cnt) rates.push_back(std::exp(s / cnt));
        }
        if (!rates.empty()) mean_se(rates, &est.fitted_rate, &est.fitted_rate_se);
    } else {
        est.degenerate = true;
    }

    // descriptive zeta2: least squares slope of log(-log tail) against level
    std::vector<std::pair<double, double>> pts;
    for (const auto& l : est.levels)
        if (l.tail > 0 && l.tail < 1) pts.emplace_back(l.level, std::log(-std::log(l.tail)));
    if (pts.size() >= 2) {
        double mx = 0, my = 0;
        for (auto [x, y] : pts) {
            mx += x;
            my += y;
        }
        mx /= static_cast<double>(pts.size());
        my /= static_cast<double>(pts.size());
        double sxy = 0, sxx = 0;
        for (auto [x, y] : pts) {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
        }
        est.zeta2_fit = sxx > 0 ? sxy / sxx : 0;
    }
    return est;
}

double concentration_tail(const TreeFixedPoints& fp, int d, double lambda, int level, double zeta1, long samples,
                          std::uint64_t seed, int sign) {
    if (level < 1) throw DomainError("concentration_tail: level must be >= 1");
    if (samples < 1) throw DomainError("concentration_tail: samples must be positive");
    DecayOptions opt;
    opt.sign = sign;
    opt.level_min = level;
    opt.level_max = level;
    opt.zeta1 = zeta1;
    opt.seed = seed;
    bool dg = false;
    auto rep = run_replicate(fp, d, lambda, opt, samples, seed, &dg);
    return rep[static_cast<size_t>(level)].tail;
}

}  // namespace hc
