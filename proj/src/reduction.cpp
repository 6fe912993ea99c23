#include "hc/reduction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "hc/errors.hpp"
#include "hc/measure.hpp"
#include "hc/rng.hpp"

namespace hc {

int cut_value(const Graph& h, const PhaseVector& y) {
    if (static_cast<int>(y.size()) != h.size()) throw DomainError("phase vector length differs from |H|");
    int c = 0;
    for (auto [u, v] : h.edges()) c += y[static_cast<size_t>(u)] != y[static_cast<size_t>(v)];
    return c;
}

namespace {

PhaseVector decode(std::uint32_t bits, int n) {
    PhaseVector y(static_cast<size_t>(n));
    for (int x = 0; x < n; ++x) y[static_cast<size_t>(x)] = (bits >> x) & 1 ? -1 : 1;
    return y;
}

std::uint32_t encode(const PhaseVector& y) {
    std::uint32_t b = 0;
    for (size_t x = 0; x < y.size(); ++x)
        if (y[x] < 0) b |= 1u << x;
    return b;
}

}  // namespace

MaxCut brute_maxcut(const Graph& h) {
    int n = h.size();
    if (n > 24) throw ResourceError("brute_maxcut: |H| > 24");
    MaxCut mc;
    if (n == 0) {
        mc.maximizers.push_back({});
        return mc;
    }
    auto edges = h.edges();
    std::vector<std::uint32_t> best;
    // vertex n-1 fixed to +; mirrors added afterwards
    for (std::uint32_t b = 0; b < (1u << (n - 1)); ++b) {
        int c = 0;
        for (auto [u, v] : edges) c += ((b >> u) & 1) != ((b >> v) & 1);
        if (c > mc.value) {
            mc.value = c;
            best.clear();
        }
        if (c == mc.value) best.push_back(b);
    }
    std::uint32_t full = (n == 32) ? ~0u : ((1u << n) - 1);
    std::vector<std::uint32_t> all = best;
    for (auto b : best) all.push_back(b ^ full);
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    for (auto b : all) mc.maximizers.push_back(decode(b, n));
    std::sort(mc.maximizers.begin(), mc.maximizers.end(), std::greater<>());
    return mc;
}

PhaseVector phase_vector(const Graph& hg, int h_size, const std::vector<std::uint8_t>& sigma) {
    std::vector<long> diff(static_cast<size_t>(h_size), 0);
    for (int v = 0; v < hg.size(); ++v) {
        if (!sigma[static_cast<size_t>(v)]) continue;
        int x = hg.gadget[static_cast<size_t>(v)];
        if (hg.label[static_cast<size_t>(v)] == Label::WPlus) ++diff[static_cast<size_t>(x)];
        if (hg.label[static_cast<size_t>(v)] == Label::WMinus) --diff[static_cast<size_t>(x)];
    }
    PhaseVector y(static_cast<size_t>(h_size));
    for (int x = 0; x < h_size; ++x) y[static_cast<size_t>(x)] = diff[static_cast<size_t>(x)] >= 0 ? 1 : -1;
    return y;
}

namespace {

struct CopyTable {
    std::vector<int> keep;                      // global vertex ids, bit order
    std::vector<std::array<mpq_class, 2>> t;    // [mask][0: Y=+, 1: Y=-]
};

CopyTable copy_table(const Graph& hg, int x, const mpq_class& lambda) {
    std::vector<int> local(static_cast<size_t>(hg.size()), -1), global;
    Graph sub;
    sub.d = hg.d;
    for (int v = 0; v < hg.size(); ++v)
        if (hg.gadget[static_cast<size_t>(v)] == x) {
            local[static_cast<size_t>(v)] = sub.add_vertex(hg.label[static_cast<size_t>(v)], 0);
            global.push_back(v);
        }
    for (auto [u, v] : hg.multi_edges)
        if (hg.gadget[static_cast<size_t>(u)] == x && hg.gadget[static_cast<size_t>(v)] == x)
            sub.add_edge(local[static_cast<size_t>(u)], local[static_cast<size_t>(v)]);
    DPOptions opt;
    opt.lambda = lambda;
    opt.track = Track::Difference;
    for (int v : global)
        if (hg.cross[static_cast<size_t>(v)]) opt.keep.push_back(local[static_cast<size_t>(v)]);
    if (opt.keep.size() > 20) throw ResourceError("exact phase distribution: more than 20 cross endpoints in one copy");
    DPResult r = transfer_dp(sub, opt);
    CopyTable ct;
    for (int v : r.keep) ct.keep.push_back(global[static_cast<size_t>(v)]);
    ct.t.assign(size_t{1} << ct.keep.size(), {mpq_class(0), mpq_class(0)});
    for (const auto& [k, w] : r.table) ct.t[k.first][k.second >= 0 ? 0 : 1] += w;
    return ct;
}

std::vector<mpq_class> exact_phase_weights(const Graph& hg, int hn, const mpq_class& lambda) {
    if (hn > 16) throw ResourceError("exact phase distribution: |H| > 16");
    if (hn == 0) return {exact_partition(hg, lambda)};
    std::vector<CopyTable> tabs;
    for (int x = 0; x < hn; ++x) tabs.push_back(copy_table(hg, x, lambda));

    // bit position of each cross endpoint within its copy
    std::vector<int> bit(static_cast<size_t>(hg.size()), -1);
    for (const auto& ct : tabs)
        for (size_t b = 0; b < ct.keep.size(); ++b) bit[static_cast<size_t>(ct.keep[b])] = static_cast<int>(b);
    // forbidden bits of copy x given the mask of an earlier copy y: list of (y, bit_y, bit_x)
    std::vector<std::vector<std::array<int, 3>>> links(static_cast<size_t>(hn));
    for (auto [u, v] : hg.edges()) {
        int gu = hg.gadget[static_cast<size_t>(u)], gv = hg.gadget[static_cast<size_t>(v)];
        if (gu == gv) continue;
        if (gu > gv) {
            std::swap(u, v);
            std::swap(gu, gv);
        }
        links[static_cast<size_t>(gv)].push_back({gu, bit[static_cast<size_t>(u)], bit[static_cast<size_t>(v)]});
    }

    // last copy: subset sums over allowed masks
    const CopyTable& last = tabs.back();
    size_t lb = last.keep.size();
    std::vector<std::array<mpq_class, 2>> zeta = last.t;
    for (size_t i = 0; i < lb; ++i)
        for (size_t m = 0; m < zeta.size(); ++m)
            if (m >> i & 1) {
                zeta[m][0] += zeta[m ^ (size_t{1} << i)][0];
                zeta[m][1] += zeta[m ^ (size_t{1} << i)][1];
            }

    std::vector<mpq_class> result(size_t{1} << hn, 0);
    std::vector<size_t> masks(static_cast<size_t>(hn), 0);

    auto forbidden = [&](int x) {
        size_t f = 0;
        for (auto [y, by, bx] : links[static_cast<size_t>(x)])
            if (masks[static_cast<size_t>(y)] >> by & 1) f |= size_t{1} << bx;
        return f;
    };

    std::function<void(int, const std::vector<mpq_class>&)> rec = [&](int x, const std::vector<mpq_class>& w) {
        size_t forb = forbidden(x);
        if (x == hn - 1) {
            size_t allowed = ((size_t{1} << lb) - 1) & ~forb;
            for (size_t b = 0; b < w.size(); ++b) {
                if (w[b] == 0) continue;
                result[b] += w[b] * zeta[allowed][0];
                result[b | (size_t{1} << x)] += w[b] * zeta[allowed][1];
            }
            return;
        }
        const CopyTable& ct = tabs[static_cast<size_t>(x)];
        for (size_t m = 0; m < ct.t.size(); ++m) {
            if (m & forb) continue;
            if (ct.t[m][0] == 0 && ct.t[m][1] == 0) continue;
            masks[static_cast<size_t>(x)] = m;
            std::vector<mpq_class> nw(w.size() * 2);
            for (size_t b = 0; b < w.size(); ++b) {
                nw[b] = w[b] * ct.t[m][0];
                nw[b | (size_t{1} << x)] = w[b] * ct.t[m][1];
            }
            rec(x + 1, nw);
        }
    };
    rec(0, {mpq_class(1)});
    return result;
}

void assign_ranks(std::vector<CutResult>& rs) {
    std::stable_sort(rs.begin(), rs.end(), [](const CutResult& a, const CutResult& b) {
        if (a.probability != b.probability) return a.probability > b.probability;
        return encode(a.phase) < encode(b.phase);
    });
    for (size_t i = 0; i < rs.size(); ++i) {
        bool tie = i > 0 && (rs[i].exact != 0 || rs[i - 1].exact != 0 ? rs[i].exact == rs[i - 1].exact
                                                                         : rs[i].probability == rs[i - 1].probability);
        rs[i].rank = tie ? rs[i - 1].rank : static_cast<int>(i);
    }
}

}  // namespace

std::vector<CutResult> phase_vector_distribution(const Graph& hg, const Graph& h, const mpq_class& lambda,
                                                 ReductionMode mode, const GlauberPhaseOptions& gopt) {
    int hn = h.size();
    if (hn > 16) throw ResourceError("phase_vector_distribution: |H| > 16");
    std::vector<CutResult> rs;
    if (mode == ReductionMode::Exact) {
        std::vector<mpq_class> w = exact_phase_weights(hg, hn, lambda);
        mpq_class z = 0;
        for (const auto& x : w) z += x;
        for (std::uint32_t b = 0; b < w.size(); ++b) {
            CutResult r;
            r.phase = decode(b, hn);
            r.cut = cut_value(h, r.phase);
            r.exact = w[b] / z;
            r.probability = r.exact.get_d();
            rs.push_back(r);
        }
    } else {
        if (gopt.sweeps <= gopt.burn_in) throw DomainError("glauber mode: sweeps must exceed burn_in");
        double lam = lambda.get_d();
        std::vector<long> counts(size_t{1} << hn, 0);
        long total = 0;
        std::uint64_t chain = 0;
        for (std::uint32_t basin = 0; basin < (1u << hn); ++basin)
            for (int c = 0; c < gopt.chains_per_basin; ++c, ++chain) {
                std::vector<std::uint8_t> s(static_cast<size_t>(hg.size()), 0);
                for (int v = 0; v < hg.size(); ++v) {
                    int x = hg.gadget[static_cast<size_t>(v)];
                    Label want = (basin >> x & 1) ? Label::WMinus : Label::WPlus;
                    if (hg.label[static_cast<size_t>(v)] == want) s[static_cast<size_t>(v)] = 1;
                }
                std::uint64_t seed = derive_seed(gopt.seed, chain);
                for (long sw = 0; sw < gopt.sweeps; ++sw) {
                    GlauberSummary g = glauber_run(hg, lam, 1, s, derive_seed(seed, static_cast<std::uint64_t>(sw)));
                    s = g.final_state;
                    if (sw >= gopt.burn_in) {
                        ++counts[encode(phase_vector(hg, hn, s))];
                        ++total;
                    }
                }
            }
        for (std::uint32_t b = 0; b < counts.size(); ++b) {
            CutResult r;
            r.phase = decode(b, hn);
            r.cut = cut_value(h, r.phase);
            r.probability = static_cast<double>(counts[b]) / static_cast<double>(total);
            r.stderr_ = std::sqrt(r.probability * (1 - r.probability) / static_cast<double>(total));
            rs.push_back(r);
        }
    }
    assign_ranks(rs);
    return rs;
}

double cut_ratio(const TreeFixedPoints& fp) {
    double a = fp.q_plus, b = fp.q_minus;
    return (1 - a * b) * (1 - a * b) / ((1 - a * a) * (1 - b * b));
}

double cut_ratio_prediction(const TreeFixedPoints& fp, int k, int delta_cut) {
    return std::pow(cut_ratio(fp), static_cast<double>(k) * delta_cut);
}

std::string ReductionReport::serialize() const {
    std::ostringstream os;
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    auto vec = [](const PhaseVector& y) {
        std::string s;
        for (int v : y) s += v > 0 ? '+' : '-';
        return s;
    };
    os << "n=" << spec.n << "\nm=" << spec.m << "\ntree_depth=" << spec.tree_depth << "\nd=" << spec.d
       << "\nseed=" << spec.seed << "\nk=" << k << "\nmode=" << (mode == ReductionMode::Exact ? "exact" : "glauber")
       << "\nlambda=" << num(lambda) << "\nhg_vertices=" << hg_vertices << "\nhg_max_degree=" << hg_max_degree
       << "\nmaxcut=" << maxcut.value << "\nmaximizers=";
    for (size_t i = 0; i < maxcut.maximizers.size(); ++i) os << (i ? "," : "") << vec(maxcut.maximizers[i]);
    os << "\nargmax=";
    for (size_t i = 0; i < argmax.size(); ++i) os << (i ? "," : "") << vec(argmax[i]);
    os << "\nargmax_in_maxcut=" << (argmax_in_maxcut ? 1 : 0) << "\nseparated=" << (separated ? 1 : 0)
       << "\nmaxcut_mass=" << num(maxcut_mass) << "\nlog_ratio_per_cut_edge=" << num(log_ratio_per_cut_edge)
       << "\npredicted_log_ratio=" << num(predicted_log_ratio)
       << "\nasymptotic_preconditions_violated=" << (asymptotic_preconditions_violated ? 1 : 0);
    if (!note.empty()) os << "\nnote=" << note;
    os << "\nverdict=" << (separated ? "pass" : "fail") << "\n";
    os << "phase,cut,probability,stderr,rank\n";
    for (const auto& r : distribution)
        os << vec(r.phase) << ',' << r.cut << ',' << num(r.probability) << ',' << num(r.stderr_) << ',' << r.rank << '\n';
    return os.str();
}

ReductionReport run_reduction(const Graph& h, const GadgetSpec& spec, const mpq_class& lambda, int k,
                              ReductionMode mode, const GlauberPhaseOptions& gopt) {
    spec.validate();
    ReductionReport rep;
    rep.spec = spec;
    rep.k = k;
    rep.mode = mode;
    rep.lambda = lambda.get_d();
    Graph gadget = build_gadget(spec);
    Graph hg = build_hg(h, gadget, k);
    rep.hg_vertices = hg.size();
    rep.hg_max_degree = hg.max_degree();
    rep.maxcut = brute_maxcut(h);
    rep.distribution = phase_vector_distribution(hg, h, lambda, mode, gopt);

    const auto& dist = rep.distribution;
    auto is_max = [&](const PhaseVector& y) {
        return std::find(rep.maxcut.maximizers.begin(), rep.maxcut.maximizers.end(), y) != rep.maxcut.maximizers.end();
    };
    for (const auto& r : dist)
        if (r.rank == 0) rep.argmax.push_back(r.phase);
    rep.argmax_in_maxcut = std::all_of(rep.argmax.begin(), rep.argmax.end(), is_max);
    size_t nm = rep.maxcut.maximizers.size();
    rep.separated = dist.size() >= nm;
    for (size_t i = 0; i < dist.size(); ++i) {
        if (is_max(dist[i].phase)) rep.maxcut_mass += dist[i].probability;
        if (i < nm && !is_max(dist[i].phase)) rep.separated = false;
    }
    // the boundary between the last maximizer and the first non-maximizer must be a strict gap
    if (rep.separated && nm < dist.size() && dist[nm].rank == dist[nm - 1].rank) rep.separated = false;

    double mx = 0, my = 0;
    int cnt = 0;
    for (const auto& r : dist)
        if (r.probability > 0) {
            mx += r.cut;
            my += std::log(r.probability);
            ++cnt;
        }
    if (cnt >= 2) {
        mx /= cnt;
        my /= cnt;
        double sxy = 0, sxx = 0;
        for (const auto& r : dist)
            if (r.probability > 0) {
                sxy += (r.cut - mx) * (std::log(r.probability) - my);
                sxx += (r.cut - mx) * (r.cut - mx);
            }
        rep.log_ratio_per_cut_edge = sxx > 0 ? sxy / sxx : 0;
    }
    try {
        TreeFixedPoints fp = solve_fixed_points({spec.d, rep.lambda});
        rep.predicted_log_ratio = k * std::log(cut_ratio(fp));
    } catch (const std::exception& e) {
        rep.note = std::string("fixed points unavailable: ") + e.what();
    }
    bool k_ok = spec.theta > 0 && k == default_cross_edges(spec.n, spec.theta);
    bool h_ok = spec.theta > 0 && h.size() <= std::pow(static_cast<double>(spec.n), spec.theta / 4) / (spec.d - 1);
    rep.asymptotic_preconditions_violated = !(k_ok && h_ok);
    if (rep.asymptotic_preconditions_violated && rep.note.empty())
        rep.note = "desk-scale sizes: k and |H| do not meet the asymptotic preconditions";
    return rep;
}

SweepResult reduction_sweep(const Graph& h, int n_min, int n_max, int m, int tree_depth, int d,
                            const mpq_class& lambda, int k, std::uint64_t seed) {
    SweepResult sr;
    for (int n = n_min; n <= n_max; ++n) {
        GadgetSpec spec = GadgetSpec::explicit_sizes(n, m, tree_depth, d, seed);
        sr.reports.push_back(run_reduction(h, spec, lambda, k, ReductionMode::Exact));
        if (sr.reports.back().separated) {
            sr.smallest_n = n;
            break;
        }
    }
    return sr;
}

}  // namespace hc
