#include "hc/gadgets.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "hc/errors.hpp"
#include "hc/rng.hpp"

namespace hc {

long GadgetSpec::m_prime() const {
    long r = m;
    for (int i = 0; i < tree_depth; ++i) r *= (d - 1);
    return r;
}

void GadgetSpec::validate() const {
    if (d < 3) throw DomainError("gadget: d must be >= 3");
    if (n < 0 || m < 0) throw DomainError("gadget: sizes must be nonnegative");
    if (tree_depth < 0 || tree_depth % 2 != 0) throw DomainError("gadget: tree_depth must be even and >= 0");
    if (n + m_prime() < 1) throw DomainError("gadget: n + m' must be >= 1");
}

namespace {

int floor_log_power(double x, int base) {
    // largest k with base^k <= x, robust to rounding at exact powers
    int k = static_cast<int>(std::floor(std::log(x) / std::log(static_cast<double>(base)) + 1e-12));
    return std::max(k, 0);
}

}  // namespace

GadgetSpec GadgetSpec::from_exponents(int n, double theta, double psi, int d, std::uint64_t seed) {
    if (!(theta > 0 && theta < 0.125) || !(psi > 0 && psi < 0.125))
        throw DomainError("gadget: theta and psi must lie in (0, 1/8)");
    if (n < 1) throw DomainError("gadget: n must be >= 1");
    GadgetSpec s;
    s.n = n;
    s.theta = theta;
    s.psi = psi;
    s.d = d;
    s.seed = seed;
    int km = floor_log_power(std::pow(static_cast<double>(n), theta), d - 1);
    s.m = static_cast<int>(std::lround(std::pow(static_cast<double>(d - 1), km)));
    s.tree_depth = 2 * floor_log_power(std::pow(static_cast<double>(n), psi / 2), d - 1);
    s.validate();
    return s;
}

GadgetSpec GadgetSpec::explicit_sizes(int n, int m, int tree_depth, int d, std::uint64_t seed) {
    GadgetSpec s;
    s.n = n;
    s.m = m;
    s.tree_depth = tree_depth;
    s.d = d;
    s.seed = seed;
    s.validate();
    return s;
}

Graph sample_gtilde(const GadgetSpec& spec) {
    spec.validate();
    int n = spec.n;
    int mp = static_cast<int>(spec.m_prime());
    int N = n + mp;
    Graph g;
    g.d = spec.d;
    for (int i = 0; i < n; ++i) g.add_vertex(Label::WPlus);
    for (int i = 0; i < mp; ++i) g.add_vertex(Label::UPlus);
    for (int i = 0; i < n; ++i) g.add_vertex(Label::WMinus);
    for (int i = 0; i < mp; ++i) g.add_vertex(Label::UMinus);

    Rng rng(spec.seed);
    std::vector<int> perm(static_cast<size_t>(N));
    for (int k = 0; k < spec.d - 1; ++k) {
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm.begin(), perm.end());
        for (int i = 0; i < N; ++i) g.add_edge(i, N + perm[static_cast<size_t>(i)]);
    }
    std::vector<int> wp(static_cast<size_t>(n));
    std::iota(wp.begin(), wp.end(), 0);
    rng.shuffle(wp.begin(), wp.end());
    for (int i = 0; i < n; ++i) g.add_edge(i, N + wp[static_cast<size_t>(i)]);
    return g;
}

Graph append_trees(const Graph& gt, const GadgetSpec& spec) {
    Graph g = gt;
    long leaves = static_cast<long>(spec.m) * 1;
    for (int i = 0; i < spec.tree_depth; ++i) leaves *= (spec.d - 1);
    for (int side = 0; side < 2; ++side) {
        Label ul = side == 0 ? Label::UPlus : Label::UMinus;
        Label tl = side == 0 ? Label::TreePlus : Label::TreeMinus;
        Label vl = side == 0 ? Label::VPlus : Label::VMinus;
        std::vector<int> level = g.vertices_with(ul);
        if (static_cast<long>(level.size()) != leaves)
            throw DomainError("append_trees: |U| = " + std::to_string(level.size()) + " but m (d-1)^depth = " +
                              std::to_string(leaves));
        if (spec.tree_depth == 0) {
            for (int v : level) g.label[static_cast<size_t>(v)] = vl;
            continue;
        }
        for (int depth = spec.tree_depth; depth > 0; --depth) {
            std::vector<int> up;
            bool root_level = depth == 1;
            for (size_t i = 0; i < level.size(); i += static_cast<size_t>(spec.d - 1)) {
                int p = g.add_vertex(root_level ? vl : tl, 0);
                for (size_t c = i; c < i + static_cast<size_t>(spec.d - 1); ++c) g.add_edge(p, level[c]);
                up.push_back(p);
            }
            level = std::move(up);
        }
    }
    return g;
}

Graph build_gadget(const GadgetSpec& spec) { return append_trees(sample_gtilde(spec), spec); }

Graph build_hg(const Graph& h, const Graph& gadget, int k) {
    if (k < 0) throw DomainError("build_hg: k must be >= 0");
    Graph out;
    out.d = gadget.d;
    int gs = gadget.size();
    for (int x = 0; x < h.size(); ++x) {
        for (int v = 0; v < gs; ++v) out.add_vertex(gadget.label[static_cast<size_t>(v)], x);
        for (auto [u, v] : gadget.multi_edges) out.add_edge(x * gs + u, x * gs + v);
    }
    std::vector<int> vp = gadget.vertices_with(Label::VPlus), vm = gadget.vertices_with(Label::VMinus);
    std::vector<size_t> cur_p(static_cast<size_t>(h.size()), 0), cur_m(static_cast<size_t>(h.size()), 0);
    auto take = [&](std::vector<size_t>& cur, const std::vector<int>& pool, int x) {
        if (cur[static_cast<size_t>(x)] >= pool.size())
            throw ResourceError("build_hg: gadget " + std::to_string(x) + " has no spare V vertex (capacity " +
                                std::to_string(pool.size()) + ")");
        int v = x * gs + pool[cur[static_cast<size_t>(x)]++];
        out.cross[static_cast<size_t>(v)] = 1;
        return v;
    };
    for (auto [x, y] : h.edges())
        for (int c = 0; c < k; ++c) {
            out.add_edge(take(cur_p, vp, x), take(cur_p, vp, y));
            out.add_edge(take(cur_m, vm, x), take(cur_m, vm, y));
        }
    return out;
}

long default_cross_edges(int n, double theta) {
    return std::max(1L, static_cast<long>(std::floor(std::pow(static_cast<double>(n), 0.75 * theta))));
}

long long cycle_colorings(int d, int i) {
    long long p = 1;
    for (int k = 0; k < i; ++k) p *= (d - 1);
    return p + (i % 2 == 0 ? 1 : -1) * (d - 1);
}

namespace {

struct CycleCounter {
    const Graph& g;
    std::vector<std::vector<std::pair<int, int>>> nb;  // (neighbour, multiplicity) within W
    int i_max;
    std::vector<long> simple, multi;
    std::vector<char> on_path;
    int start = 0;

    CycleCounter(const Graph& graph, int imax) : g(graph), i_max(imax) {
        int n = g.size();
        nb.resize(static_cast<size_t>(n));
        std::map<std::pair<int, int>, int> mult;
        for (auto e : g.multi_edges) ++mult[e];
        for (auto [e, c] : mult) {
            auto [u, v] = e;
            if (!is_W(g.label[static_cast<size_t>(u)]) || !is_W(g.label[static_cast<size_t>(v)])) continue;
            nb[static_cast<size_t>(u)].emplace_back(v, c);
            nb[static_cast<size_t>(v)].emplace_back(u, c);
        }
        simple.assign(static_cast<size_t>(i_max + 1), 0);
        multi.assign(static_cast<size_t>(i_max + 1), 0);
        on_path.assign(static_cast<size_t>(n), 0);
        for (auto [e, c] : mult)
            if (is_W(g.label[static_cast<size_t>(e.first)]) && is_W(g.label[static_cast<size_t>(e.second)]) && i_max >= 2)
                multi[2] += static_cast<long>(c) * (c - 1) / 2;
    }

    // Paths from start through vertices > start; each cycle is found once per direction.
    void dfs(int u, int len, long weight) {
        for (auto [v, c] : nb[static_cast<size_t>(u)]) {
            if (v == start && len >= 3) {
                simple[static_cast<size_t>(len)] += 1;
                multi[static_cast<size_t>(len)] += weight * c;
                continue;
            }
            if (v <= start || on_path[static_cast<size_t>(v)] || len == i_max) continue;
            on_path[static_cast<size_t>(v)] = 1;
            dfs(v, len + 1, weight * c);
            on_path[static_cast<size_t>(v)] = 0;
        }
    }

    void run() {
        for (start = 0; start < g.size(); ++start) {
            if (!is_W(g.label[static_cast<size_t>(start)])) continue;
            on_path[static_cast<size_t>(start)] = 1;
            dfs(start, 1, 1);
            on_path[static_cast<size_t>(start)] = 0;
        }
        for (int i = 3; i <= i_max; ++i) {
            simple[static_cast<size_t>(i)] /= 2;
            multi[static_cast<size_t>(i)] /= 2;
        }
    }
};

}  // namespace

std::vector<CycleStats> count_short_cycles(const Graph& g, int i_max, double alpha, double beta) {
    if (i_max > 12) throw DomainError("count_short_cycles: i_max is capped at 12");
    CycleCounter cc(g, std::max(i_max, 2));
    cc.run();
    std::vector<CycleStats> out;
    int d = g.d;
    double ratio = alpha * beta / ((1 - alpha) * (1 - beta));
    for (int i = 2; i <= i_max; i += 2) {
        CycleStats s;
        s.length = i;
        s.observed = i == 2 ? 0 : cc.simple[static_cast<size_t>(i)];
        s.observed_multi = cc.multi[static_cast<size_t>(i)];
        s.lambda_i = static_cast<double>(cycle_colorings(d, i)) / i;
        s.delta_i = std::pow(ratio, i / 2.0);
        out.push_back(s);
    }
    return out;
}

}  // namespace hc
