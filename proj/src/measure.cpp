#include "hc/measure.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <string>
#include <unordered_map>

#include "hc/errors.hpp"
#include "hc/rng.hpp"

namespace hc {

bool is_independent(const Graph& g, const Configuration& sigma) {
    if (static_cast<int>(sigma.size()) != g.size()) return false;
    for (auto [u, v] : g.edges())
        if (sigma[static_cast<size_t>(u)] && sigma[static_cast<size_t>(v)]) return false;
    return true;
}

int phase_of(const Graph& g, const Configuration& sigma) {
    long plus = 0, minus = 0;
    for (int v = 0; v < g.size(); ++v) {
        if (!sigma[static_cast<size_t>(v)]) continue;
        if (g.label[static_cast<size_t>(v)] == Label::WPlus) ++plus;
        if (g.label[static_cast<size_t>(v)] == Label::WMinus) ++minus;
    }
    return plus >= minus ? 1 : -1;
}

// ---------------------------------------------------------------- elimination

namespace {

struct Bits {
    std::uint64_t w[2] = {0, 0};
    bool empty() const { return (w[0] | w[1]) == 0; }
    bool test(int i) const { return (w[i >> 6] >> (i & 63)) & 1; }
    void set(int i) { w[i >> 6] |= std::uint64_t{1} << (i & 63); }
    void reset(int i) { w[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
    int count() const { return std::popcount(w[0]) + std::popcount(w[1]); }
    int lowest() const { return w[0] ? std::countr_zero(w[0]) : 64 + std::countr_zero(w[1]); }
    Bits operator&(const Bits& o) const { return {{w[0] & o.w[0], w[1] & o.w[1]}}; }
    Bits operator|(const Bits& o) const { return {{w[0] | o.w[0], w[1] | o.w[1]}}; }
    Bits operator~() const { return {{~w[0], ~w[1]}}; }
    bool operator==(const Bits& o) const { return w[0] == o.w[0] && w[1] == o.w[1]; }
    template <class F>
    void each(F f) const {
        for (int k = 0; k < 2; ++k)
            for (std::uint64_t x = w[k]; x; x &= x - 1) f(64 * k + std::countr_zero(x));
    }
};

struct BitsHash {
    size_t operator()(const Bits& b) const { return std::hash<std::uint64_t>()(b.w[0] * 0x9E3779B97F4A7C15ULL ^ b.w[1]); }
};

class Eliminator {
public:
    Eliminator(const Graph& g, const mpq_class& lambda) : lambda_(lambda) {
        nbr_.resize(static_cast<size_t>(g.size()));
        for (int v = 0; v < g.size(); ++v)
            for (int u : g.adj[static_cast<size_t>(v)]) nbr_[static_cast<size_t>(v)].set(u);
    }

    mpq_class run(Bits s) { return Z(s); }

private:
    static constexpr size_t kMemoCap = size_t{1} << 24;

    Bits component_of(int v, const Bits& s) const {
        Bits comp, frontier;
        comp.set(v);
        frontier.set(v);
        while (!frontier.empty()) {
            Bits next;
            frontier.each([&](int u) { next = next | nbr_[static_cast<size_t>(u)]; });
            next = next & s & ~comp;
            comp = comp | next;
            frontier = next;
        }
        return comp;
    }

    mpq_class Z(const Bits& s) {
        if (s.empty()) return 1;
        auto it = memo_.find(s);
        if (it != memo_.end()) return it->second;
        mpq_class r;
        Bits comp = component_of(s.lowest(), s);
        if (!(comp == s)) {
            r = Z(comp) * Z(s & ~comp);
        } else {
            int best = -1, bestdeg = -1;
            s.each([&](int v) {
                int dg = (nbr_[static_cast<size_t>(v)] & s).count();
                if (dg > bestdeg) {
                    bestdeg = dg;
                    best = v;
                }
            });
            if (bestdeg == 0) {
                r = 1 + lambda_;
            } else {
                Bits without = s;
                without.reset(best);
                Bits closed = without & ~nbr_[static_cast<size_t>(best)];
                r = Z(without) + lambda_ * Z(closed);
            }
        }
        if (memo_.size() < kMemoCap) memo_.emplace(s, r);
        return r;
    }

    mpq_class lambda_;
    std::vector<Bits> nbr_;
    std::unordered_map<Bits, mpq_class, BitsHash> memo_;
};

}  // namespace

mpq_class exact_partition(const Graph& g, const mpq_class& lambda, int max_vertices) {
    if (g.size() > std::min(max_vertices, 128))
        throw ResourceError("exact_partition: " + std::to_string(g.size()) + " vertices exceeds the elimination cap");
    Eliminator e(g, lambda);
    Bits all;
    for (int v = 0; v < g.size(); ++v) all.set(v);
    return e.run(all);
}

mpq_class brute_force_partition(const Graph& g, const mpq_class& lambda) {
    int n = g.size();
    if (n > 24) throw ResourceError("brute_force_partition: n > 24");
    std::vector<std::uint32_t> nb(static_cast<size_t>(n), 0);
    for (auto [u, v] : g.edges()) {
        nb[static_cast<size_t>(u)] |= 1u << v;
        nb[static_cast<size_t>(v)] |= 1u << u;
    }
    std::vector<mpz_class> by_size(static_cast<size_t>(n + 1), 0);
    // every subset, kept only if independent
    std::function<void(int, std::uint32_t, int)> rec = [&](int v, std::uint32_t chosen, int k) {
        if (v == n) {
            by_size[static_cast<size_t>(k)] += 1;
            return;
        }
        rec(v + 1, chosen, k);
        if (!(nb[static_cast<size_t>(v)] & chosen)) rec(v + 1, chosen | (1u << v), k + 1);
    };
    rec(0, 0, 0);
    mpq_class z = 0, p = 1;
    for (int k = 0; k <= n; ++k, p *= lambda) z += p * mpq_class(by_size[static_cast<size_t>(k)]);
    return z;
}

mpq_class tree_partition(const Graph& g, const mpq_class& lambda) {
    int n = g.size();
    std::vector<int> parent(static_cast<size_t>(n), -2), order;
    long comps = 0;
    for (int r = 0; r < n; ++r) {
        if (parent[static_cast<size_t>(r)] != -2) continue;
        ++comps;
        parent[static_cast<size_t>(r)] = -1;
        std::vector<int> stack{r};
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            order.push_back(u);
            for (int v : g.adj[static_cast<size_t>(u)])
                if (parent[static_cast<size_t>(v)] == -2) {
                    parent[static_cast<size_t>(v)] = u;
                    stack.push_back(v);
                }
        }
    }
    if (g.num_edges() != n - comps) throw DomainError("tree_partition: graph is not a forest");
    std::vector<mpq_class> z0(static_cast<size_t>(n), 1), z1(static_cast<size_t>(n), lambda);
    mpq_class total = 1;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int u = *it, p = parent[static_cast<size_t>(u)];
        if (p < 0) {
            total *= z0[static_cast<size_t>(u)] + z1[static_cast<size_t>(u)];
        } else {
            z0[static_cast<size_t>(p)] *= z0[static_cast<size_t>(u)] + z1[static_cast<size_t>(u)];
            z1[static_cast<size_t>(p)] *= z0[static_cast<size_t>(u)];
        }
    }
    return total;
}

// ---------------------------------------------------------------- transfer DP

mpq_class DPResult::total() const {
    mpq_class t = 0;
    for (const auto& [k, w] : table) t += w;
    return t;
}

namespace {

struct KeyHash {
    size_t operator()(const std::pair<std::uint64_t, int>& k) const {
        return std::hash<std::uint64_t>()(k.first * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(k.second));
    }
};

std::vector<int> greedy_order(const Graph& g, const std::vector<char>& keep) {
    int n = g.size();
    std::vector<int> done_nb(static_cast<size_t>(n), 0), order;
    std::vector<char> done(static_cast<size_t>(n), 0);
    for (int step = 0; step < n; ++step) {
        int best = -1;
        for (int v = 0; v < n; ++v) {
            if (done[static_cast<size_t>(v)]) continue;
            if (best < 0) {
                best = v;
                continue;
            }
            auto key = [&](int x) {
                int open = g.degree(x) - done_nb[static_cast<size_t>(x)];
                return std::make_tuple(keep[static_cast<size_t>(x)] ? 0 : 1, done_nb[static_cast<size_t>(x)], -open);
            };
            if (key(v) > key(best)) best = v;
        }
        done[static_cast<size_t>(best)] = 1;
        order.push_back(best);
        for (int u : g.adj[static_cast<size_t>(best)]) ++done_nb[static_cast<size_t>(u)];
    }
    return order;
}

std::uint64_t drop_bits(std::uint64_t mask, const std::vector<int>& positions_desc) {
    for (int p : positions_desc) {
        std::uint64_t low = mask & ((std::uint64_t{1} << p) - 1);
        std::uint64_t high = p >= 63 ? 0 : (mask >> (p + 1)) << p;
        mask = low | high;
    }
    return mask;
}

}  // namespace

DPResult transfer_dp(const Graph& g, const DPOptions& opt) {
    int n = g.size();
    mpz_class num = opt.lambda.get_num(), den = opt.lambda.get_den();
    std::vector<std::int8_t> forced = opt.forced;
    if (forced.empty()) forced.assign(static_cast<size_t>(n), -1);
    if (static_cast<int>(forced.size()) != n) throw DomainError("transfer_dp: forced vector has wrong length");
    std::vector<char> keep(static_cast<size_t>(n), 0);
    for (int v : opt.keep) keep[static_cast<size_t>(v)] = 1;

    std::vector<int> order = greedy_order(g, keep);
    std::vector<int> remaining(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) remaining[static_cast<size_t>(v)] = g.degree(v);

    using Key = std::pair<std::uint64_t, int>;
    std::unordered_map<Key, mpz_class, KeyHash> cur, next;
    cur[{0, 0}] = 1;
    std::vector<int> active;
    DPResult res;

    for (int v : order) {
        std::uint64_t nmask = 0;
        for (size_t p = 0; p < active.size(); ++p)
            if (g.has_edge(active[p], v)) nmask |= std::uint64_t{1} << p;
        size_t pos = active.size();
        if (pos >= 64) throw ResourceError("transfer_dp: frontier exceeds 64 vertices");
        active.push_back(v);
        res.max_frontier = std::max(res.max_frontier, static_cast<int>(active.size()));
        int dt = 0;
        Label l = g.label[static_cast<size_t>(v)];
        if (opt.track == Track::Difference) dt = l == Label::WPlus ? 1 : (l == Label::WMinus ? -1 : 0);
        if (opt.track == Track::Counts) dt = l == Label::WPlus ? kCountBase : (l == Label::WMinus ? 1 : 0);
        std::int8_t f = forced[static_cast<size_t>(v)];

        next.clear();
        next.reserve(cur.size() * 2);
        for (auto& [k, w] : cur) {
            if (f != 1) next[k] += w * den;
            if (f != 0 && !(k.first & nmask)) next[{k.first | (std::uint64_t{1} << pos), k.second + dt}] += w * num;
        }
        std::swap(cur, next);

        for (int u : g.adj[static_cast<size_t>(v)]) --remaining[static_cast<size_t>(u)];
        std::vector<int> drop;
        for (int p = static_cast<int>(active.size()) - 1; p >= 0; --p) {
            int u = active[static_cast<size_t>(p)];
            if (remaining[static_cast<size_t>(u)] == 0 && !keep[static_cast<size_t>(u)]) drop.push_back(p);
        }
        if (!drop.empty()) {
            next.clear();
            for (auto& [k, w] : cur) next[{drop_bits(k.first, drop), k.second}] += w;
            std::swap(cur, next);
            for (int p : drop) active.erase(active.begin() + p);
        }
    }

    mpz_class scale;
    mpz_pow_ui(scale.get_mpz_t(), den.get_mpz_t(), static_cast<unsigned long>(n));
    res.keep = active;
    for (auto& [k, w] : cur) {
        mpq_class q(w, scale);
        q.canonicalize();
        res.table.emplace(k, q);
    }
    return res;
}

std::vector<int> boundary_vertices(const Graph& g) {
    std::vector<int> u = g.vertices_with(Label::UPlus), um = g.vertices_with(Label::UMinus);
    u.insert(u.end(), um.begin(), um.end());
    return u;
}

PartitionValue conditional_partition(const Graph& g, const mpq_class& lambda, const std::vector<std::uint8_t>& eta,
                                     int phase, const std::pair<int, int>* counts) {
    std::vector<int> U = boundary_vertices(g);
    if (eta.size() != U.size()) throw DomainError("conditional_partition: eta length differs from |U|");
    PartitionValue out;
    for (size_t i = 0; i < U.size(); ++i)
        for (size_t j = i + 1; j < U.size(); ++j)
            if (eta[i] && eta[j] && g.has_edge(U[i], U[j])) {
                out.value = 0;
                out.consistent = false;
                return out;
            }
    DPOptions opt;
    opt.lambda = lambda;
    opt.forced.assign(static_cast<size_t>(g.size()), -1);
    for (size_t i = 0; i < U.size(); ++i) opt.forced[static_cast<size_t>(U[i])] = eta[i] ? 1 : 0;
    if (counts)
        opt.track = Track::Counts;
    else if (phase != 0)
        opt.track = Track::Difference;
    DPResult r = transfer_dp(g, opt);
    for (const auto& [k, w] : r.table) {
        if (counts && k.second != counts->first * kCountBase + counts->second) continue;
        if (!counts && phase > 0 && k.second < 0) continue;
        if (!counts && phase < 0 && k.second >= 0) continue;
        out.value += w;
    }
    return out;
}

// ---------------------------------------------------------------- moment formulas

namespace {

mpz_class binom(long n, long k) {
    if (n < 0 || k < 0 || k > n) return 0;
    mpz_class r;
    mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    return r;
}

mpq_class ratio(const mpz_class& a, const mpz_class& b) {
    if (b == 0) return 0;
    mpq_class q(a, b);
    q.canonicalize();
    return q;
}

mpq_class qpow(const mpq_class& x, long e) {
    mpq_class r = 1;
    for (long i = 0; i < e; ++i) r *= x;
    return r;
}

// Probability that a uniform perfect matching on M + M vertices keeps both
// members of a configuration pair independent: plus sets of size a + ep with
// overlap g + ep, minus sets of size b + em with overlap dl + em.
mpq_class pair_matching_factor(long M, long a, long b, long g, long dl, long ep, long em) {
    long comp = M - (2 * b - dl + em);
    mpq_class first = ratio(binom(comp, g + ep), binom(M, g + ep));
    if (first == 0) return 0;
    mpq_class s = 0;
    for (long e = 0; e <= a - g; ++e) {
        mpq_class t1 = ratio(binom(comp - g - ep, e) * binom(b - dl, a - g - e), binom(M - g - ep, a - g));
        if (t1 == 0) continue;
        mpq_class t2 = ratio(binom((b - dl) + (comp - g - ep - e), a - g), binom(M - g - ep - (a - g), a - g));
        s += t1 * t2;
    }
    return first * s;
}

}  // namespace

MomentInstance moment_instance(const GadgetSpec& spec, const mpq_class& alpha, const mpq_class& beta,
                               std::pair<int, int> eta_counts, const mpq_class& lambda) {
    mpq_class an = alpha * spec.n, bn = beta * spec.n;
    an.canonicalize();
    bn.canonicalize();
    if (an.get_den() != 1 || bn.get_den() != 1) throw DomainError("alpha n and beta n must be integers");
    MomentInstance in;
    in.n = spec.n;
    in.m_prime = spec.m_prime();
    in.d = spec.d;
    in.a = static_cast<int>(an.get_num().get_si());
    in.b = static_cast<int>(bn.get_num().get_si());
    in.eta_plus = eta_counts.first;
    in.eta_minus = eta_counts.second;
    in.lambda = lambda;
    if (in.a < 0 || in.b < 0 || in.a > in.n || in.b > in.n || in.eta_plus < 0 || in.eta_minus < 0 ||
        in.eta_plus > in.m_prime || in.eta_minus > in.m_prime)
        throw DomainError("moment instance outside the admissible range");
    return in;
}

mpq_class expected_Z_formula(const MomentInstance& in) {
    long N = in.n + in.m_prime;
    mpq_class lam = qpow(in.lambda, in.a + in.b + in.eta_plus + in.eta_minus);
    mpq_class full = ratio(binom(N - in.b - in.eta_minus, in.a + in.eta_plus), binom(N, in.a + in.eta_plus));
    mpq_class w = ratio(binom(in.n - in.b, in.a), binom(in.n, in.a));
    return lam * mpq_class(binom(in.n, in.a) * binom(in.n, in.b)) * qpow(full, in.d - 1) * w;
}

mpq_class expected_Z_mww(const MomentInstance& in) {
    mpq_class lam = qpow(in.lambda, in.a + in.b);
    mpq_class w = ratio(binom(in.n - in.b, in.a), binom(in.n, in.a));
    return lam * mpq_class(binom(in.n, in.a) * binom(in.n, in.b)) * qpow(w, in.d);
}

mpq_class expected_Z2_formula(const MomentInstance& in) {
    long n = in.n, N = in.n + in.m_prime, a = in.a, b = in.b;
    mpq_class tot = 0;
    for (long g = 0; g <= a; ++g)
        for (long dl = 0; dl <= b; ++dl) {
            mpz_class cnt = binom(a, g) * binom(n - a, a - g) * binom(b, dl) * binom(n - b, b - dl);
            if (cnt == 0) continue;
            mpq_class full = pair_matching_factor(N, a, b, g, dl, in.eta_plus, in.eta_minus);
            if (full == 0) continue;
            tot += mpq_class(cnt) * qpow(full, in.d - 1) * pair_matching_factor(n, a, b, g, dl, 0, 0);
        }
    return qpow(in.lambda, 2 * (a + b + in.eta_plus + in.eta_minus)) * mpq_class(binom(n, a) * binom(n, b)) * tot;
}

mpq_class expected_Z2_mww(const MomentInstance& in) {
    long n = in.n, a = in.a, b = in.b;
    mpq_class tot = 0;
    for (long g = 0; g <= a; ++g)
        for (long dl = 0; dl <= b; ++dl) {
            mpz_class cnt = binom(a, g) * binom(n - a, a - g) * binom(b, dl) * binom(n - b, b - dl);
            if (cnt == 0) continue;
            tot += mpq_class(cnt) * qpow(pair_matching_factor(n, a, b, g, dl, 0, 0), in.d);
        }
    return qpow(in.lambda, 2 * (a + b)) * mpq_class(binom(n, a) * binom(n, b)) * tot;
}

double first_moment_ratio_shape(const MomentInstance& in) {
    double al = static_cast<double>(in.a) / in.n, be = static_cast<double>(in.b) / in.n;
    double lam = in.lambda.get_d();
    double r = 1 - al - be;
    // exponent m'(d-1): one factor per U vertex in each of the d-1 matchings that reach U
    double cstar = std::pow((1 - al) * (1 - be) / r, static_cast<double>(in.m_prime * (in.d - 1)));
    return cstar * std::pow(lam * std::pow(r / (1 - be), in.d - 1), in.eta_minus) *
           std::pow(lam * std::pow(r / (1 - al), in.d - 1), in.eta_plus);
}

long long sampled_count_alpha_beta(const Graph& gt, const MomentInstance& in) {
    std::vector<int> wp = gt.vertices_with(Label::WPlus), wm = gt.vertices_with(Label::WMinus);
    std::vector<int> up = gt.vertices_with(Label::UPlus), um = gt.vertices_with(Label::UMinus);
    if (static_cast<int>(wp.size()) != in.n) throw DomainError("sampled_count: graph does not match n");
    int n = gt.size();
    std::vector<char> blocked_base(static_cast<size_t>(n), 0);
    for (int i = 0; i < in.eta_plus; ++i)
        for (int v : gt.adj[static_cast<size_t>(up[static_cast<size_t>(i)])]) blocked_base[static_cast<size_t>(v)] = 1;
    for (int i = 0; i < in.eta_minus; ++i)
        if (blocked_base[static_cast<size_t>(um[static_cast<size_t>(i)])]) return 0;

    long long total = 0;
    std::vector<int> pick(static_cast<size_t>(in.a));
    std::vector<int> cnt(static_cast<size_t>(n), 0);
    // enumerate a-subsets of W+ in lexicographic order
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == in.a) {
            for (int i = 0; i < in.eta_minus; ++i)
                if (cnt[static_cast<size_t>(um[static_cast<size_t>(i)])]) return;
            long free = 0;
            for (int v : wm)
                if (!blocked_base[static_cast<size_t>(v)] && !cnt[static_cast<size_t>(v)]) ++free;
            total += binom(free, in.b).get_si();
            return;
        }
        for (int i = start; i < in.n; ++i) {
            int w = wp[static_cast<size_t>(i)];
            for (int v : gt.adj[static_cast<size_t>(w)]) ++cnt[static_cast<size_t>(v)];
            rec(i + 1, depth + 1);
            for (int v : gt.adj[static_cast<size_t>(w)]) --cnt[static_cast<size_t>(v)];
        }
    };
    rec(0, 0);
    return total;
}

BinomialPerturbation binomial_perturb_check(long a, long b, long x, long y) {
    if (!(0 < b && b < a)) throw DomainError("binomial_perturb_check requires 0 < b < a");
    if (x * x + y * y > std::min(b, a - b)) throw DomainError("binomial_perturb_check requires x^2 + y^2 <= min(b, a-b)");
    BinomialPerturbation r;
    r.exact = ratio(binom(a + x, b + y), binom(a, b));
    r.approx = std::pow(static_cast<double>(a) / (a - b), static_cast<double>(x)) *
               std::pow(static_cast<double>(a - b) / b, static_cast<double>(y));
    r.rel_error = std::fabs(r.exact.get_d() / r.approx - 1.0);
    return r;
}

double product_measure_q(const TreeFixedPoints& fp, PhaseSign phase, const std::vector<std::uint8_t>& sp,
                         const std::vector<std::uint8_t>& sm) {
    double qa = phase == PhaseSign::Plus ? fp.q_plus : fp.q_minus;
    double qb = phase == PhaseSign::Plus ? fp.q_minus : fp.q_plus;
    double p = 1;
    for (auto s : sp) p *= s ? qa : 1 - qa;
    for (auto s : sm) p *= s ? qb : 1 - qb;
    return p;
}

PhaseStatistics phase_statistics(const Graph& g, const mpq_class& lambda, const TreeFixedPoints& fp) {
    PhaseStatistics st;
    st.v_plus = g.vertices_with(Label::VPlus);
    st.v_minus = g.vertices_with(Label::VMinus);
    DPOptions opt;
    opt.lambda = lambda;
    opt.track = Track::Difference;
    opt.keep = st.v_plus;
    opt.keep.insert(opt.keep.end(), st.v_minus.begin(), st.v_minus.end());
    if (opt.keep.size() > 20) throw ResourceError("phase_statistics: too many V vertices for the exact diagnostic");
    DPResult r = transfer_dp(g, opt);

    size_t kv = r.keep.size();
    std::vector<mpq_class> by_mask_plus(size_t{1} << kv, 0), by_mask_minus(size_t{1} << kv, 0);
    for (const auto& [k, w] : r.table) {
        if (k.second >= 0)
            by_mask_plus[k.first] += w;
        else
            by_mask_minus[k.first] += w;
    }
    st.z_plus = 0;
    st.z_minus = 0;
    for (size_t m = 0; m < by_mask_plus.size(); ++m) {
        st.z_plus += by_mask_plus[m];
        st.z_minus += by_mask_minus[m];
    }
    mpq_class z = st.z_plus + st.z_minus;
    st.p_plus = mpq_class(st.z_plus / z).get_d();
    st.p_minus = mpq_class(st.z_minus / z).get_d();

    // map result bit order back to (V+ list, V- list) order
    std::vector<int> bit_of(static_cast<size_t>(g.size()), -1);
    for (size_t b = 0; b < kv; ++b) bit_of[static_cast<size_t>(r.keep[b])] = static_cast<int>(b);
    std::vector<int> vorder = st.v_plus;
    vorder.insert(vorder.end(), st.v_minus.begin(), st.v_minus.end());
    st.marg_plus.assign(vorder.size(), 0);
    st.marg_plus_given_minus.assign(vorder.size(), 0);
    for (size_t m = 0; m < by_mask_plus.size(); ++m) {
        double pp = st.z_plus > 0 ? mpq_class(by_mask_plus[m] / st.z_plus).get_d() : 0;
        double pm = st.z_minus > 0 ? mpq_class(by_mask_minus[m] / st.z_minus).get_d() : 0;
        std::vector<std::uint8_t> sp, sm;
        for (size_t i = 0; i < vorder.size(); ++i) {
            std::uint8_t bit = (m >> bit_of[static_cast<size_t>(vorder[i])]) & 1;
            (i < st.v_plus.size() ? sp : sm).push_back(bit);
            if (bit) {
                st.marg_plus[i] += pp;
                st.marg_plus_given_minus[i] += pm;
            }
        }
        if (st.z_plus > 0)
            st.max_ratio_plus = std::max(st.max_ratio_plus, std::fabs(pp / product_measure_q(fp, PhaseSign::Plus, sp, sm) - 1));
        if (st.z_minus > 0)
            st.max_ratio_minus =
                std::max(st.max_ratio_minus, std::fabs(pm / product_measure_q(fp, PhaseSign::Minus, sp, sm) - 1));
    }
    st.marg_minus = st.marg_plus_given_minus;
    return st;
}

// ---------------------------------------------------------------- Glauber

Configuration initial_configuration(const Graph& g, GlauberInit init) {
    Configuration s(static_cast<size_t>(g.size()), 0);
    if (init == GlauberInit::Empty) return s;
    Label want = init == GlauberInit::Plus ? Label::WPlus : Label::WMinus;
    for (int v = 0; v < g.size(); ++v)
        if (g.label[static_cast<size_t>(v)] == want) s[static_cast<size_t>(v)] = 1;
    if (!is_independent(g, s)) throw DomainError("initial configuration is not independent");
    return s;
}

GlauberSummary glauber_run(const Graph& g, double lambda, long sweeps, const Configuration& init, std::uint64_t seed) {
    if (!is_independent(g, init)) throw DomainError("glauber_run: init is not an independent set");
    if (lambda < 0) throw DomainError("glauber_run: lambda must be >= 0");
    GlauberSummary out;
    Configuration s = init;
    int n = g.size();
    std::vector<int> occ_nb(static_cast<size_t>(n), 0);
    for (int v = 0; v < n; ++v)
        if (s[static_cast<size_t>(v)])
            for (int u : g.adj[static_cast<size_t>(v)]) ++occ_nb[static_cast<size_t>(u)];
    long wp = 0, wm = 0;
    for (int v = 0; v < n; ++v) {
        if (!s[static_cast<size_t>(v)]) continue;
        wp += g.label[static_cast<size_t>(v)] == Label::WPlus;
        wm += g.label[static_cast<size_t>(v)] == Label::WMinus;
    }
    out.occupancy_counts.assign(static_cast<size_t>(n), 0);
    Rng rng(seed);
    double p_occ = lambda / (1 + lambda);
    for (long sw = 0; sw < sweeps; ++sw) {
        for (int step = 0; step < n; ++step) {
            int v = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
            std::uint8_t nv = (occ_nb[static_cast<size_t>(v)] == 0 && rng.uniform() < p_occ) ? 1 : 0;
            if (nv == s[static_cast<size_t>(v)]) continue;
            s[static_cast<size_t>(v)] = nv;
            int delta = nv ? 1 : -1;
            for (int u : g.adj[static_cast<size_t>(v)]) occ_nb[static_cast<size_t>(u)] += delta;
            if (g.label[static_cast<size_t>(v)] == Label::WPlus) wp += delta;
            if (g.label[static_cast<size_t>(v)] == Label::WMinus) wm += delta;
        }
        out.wplus.push_back(wp);
        out.wminus.push_back(wm);
        out.phase.push_back(wp >= wm ? 1 : -1);
        for (int v = 0; v < n; ++v) out.occupancy_counts[static_cast<size_t>(v)] += s[static_cast<size_t>(v)];
    }
    out.final_state = s;
    return out;
}

double boundary_tree_marginal(const ModelParams& params, int depth) {
    double x = 1.0;
    for (int k = 0; k < depth; ++k) x = tree_map(x, params);
    return x;
}

mpq_class boundary_tree_marginal_exact(int d, const mpq_class& lambda, int depth) {
    Graph t;
    t.d = d;
    std::vector<int> level{t.add_vertex()};
    int root = level[0];
    for (int k = 0; k < depth; ++k) {
        std::vector<int> next;
        for (int p : level)
            for (int c = 0; c < d - 1; ++c) {
                int v = t.add_vertex();
                t.add_edge(p, v);
                next.push_back(v);
            }
        level = std::move(next);
    }
    DPOptions opt;
    opt.lambda = lambda;
    opt.forced.assign(static_cast<size_t>(t.size()), -1);
    for (int v : level) opt.forced[static_cast<size_t>(v)] = 1;
    opt.keep = {root};
    DPResult r = transfer_dp(t, opt);
    mpq_class occ = 0;
    for (const auto& [k, w] : r.table)
        if (k.first & 1) occ += w;
    return occ / r.total();
}

}  // namespace hc
