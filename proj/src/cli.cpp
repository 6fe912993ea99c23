#include "hc/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "hc/certifier.hpp"
#include "hc/errors.hpp"
#include "hc/gadgets.hpp"
#include "hc/graph.hpp"
#include "hc/measure.hpp"
#include "hc/moments.hpp"
#include "hc/reconstruction.hpp"
#include "hc/reduction.hpp"
#include "hc/rng.hpp"
#include "hc/treegibbs.hpp"

namespace hc {

namespace {

constexpr const char* kVersion = "hc 1.0";

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// "3/4", "0.75", "2" -> exact rational
mpq_class parse_rational(const std::string& s) {
    std::string t = s;
    if (t.empty()) throw DomainError("empty rational");
    auto slash = t.find('/');
    if (slash != std::string::npos) {
        mpq_class q;
        if (q.set_str(t, 10) != 0 || q.get_den() == 0) throw DomainError("malformed rational '" + s + "'");
        q.canonicalize();
        return q;
    }
    auto e = t.find_first_of("eE");
    long exp10 = 0;
    if (e != std::string::npos) {
        try {
            exp10 = std::stol(t.substr(e + 1));
        } catch (const std::exception&) {
            throw DomainError("malformed number '" + s + "'");
        }
        t = t.substr(0, e);
    }
    auto dot = t.find('.');
    std::string digits = t;
    if (dot != std::string::npos) {
        exp10 -= static_cast<long>(t.size() - dot - 1);
        digits = t.substr(0, dot) + t.substr(dot + 1);
    }
    mpz_class num;
    if (digits.empty() || digits == "-" || num.set_str(digits, 10) != 0) throw DomainError("malformed number '" + s + "'");
    mpz_class p;
    mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exp10)));
    mpq_class q = exp10 >= 0 ? mpq_class(num * p) : mpq_class(num, p);
    q.canonicalize();
    return q;
}

std::string rational_string(const mpq_class& q) { return q.get_str(); }

class Output {
public:
    Output(const std::string& path, std::ostream& fallback) {
        if (!path.empty() && path != "-") {
            file_.open(path);
            if (!file_) throw ResourceError("cannot open output file '" + path + "'");
        }
        os_ = file_.is_open() ? &file_ : &fallback;
    }
    std::ostream& os() { return *os_; }

private:
    std::ofstream file_;
    std::ostream* os_;
};

// "2..12" or "5"
std::pair<int, int> parse_range(const std::string& s) {
    auto p = s.find("..");
    try {
        if (p == std::string::npos) {
            int v = std::stoi(s);
            return {v, v};
        }
        return {std::stoi(s.substr(0, p)), std::stoi(s.substr(p + 2))};
    } catch (const std::exception&) {
        throw DomainError("malformed range '" + s + "'");
    }
}

std::vector<double> parse_point(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            v.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw DomainError("malformed point component '" + tok + "'");
        }
    }
    return v;
}

// eta file: lines "<U vertex id> <0|1>", '#' comments
std::vector<std::uint8_t> read_eta(const std::string& path, const Graph& g) {
    std::ifstream in(path);
    if (!in) throw ResourceError("cannot open eta file '" + path + "'");
    std::vector<int> U = boundary_vertices(g);
    std::vector<int> pos(static_cast<size_t>(g.size()), -1);
    for (size_t i = 0; i < U.size(); ++i) pos[static_cast<size_t>(U[i])] = static_cast<int>(i);
    std::vector<int> eta(U.size(), -1);
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        long id, val;
        if (!(ls >> id >> val) || (val != 0 && val != 1)) throw ParseError("expected '<id> <0|1>'", lineno);
        if (id < 0 || id >= g.size() || pos[static_cast<size_t>(id)] < 0)
            throw ParseError("vertex " + std::to_string(id) + " is not a U vertex", lineno);
        eta[static_cast<size_t>(pos[static_cast<size_t>(id)])] = static_cast<int>(val);
    }
    std::vector<std::uint8_t> out;
    for (size_t i = 0; i < eta.size(); ++i) {
        if (eta[i] < 0) throw DomainError("eta file misses U vertex " + std::to_string(U[i]));
        out.push_back(static_cast<std::uint8_t>(eta[i]));
    }
    return out;
}

struct Failed {};  // verdict failure, exit 1 after output is written

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hardcore model gadgets, moments, certification and reduction experiments", "hc"};
    app.set_help_flag("--help", "print help");  // -h is free for --h
    app.set_config("--config", "", "key=value file overriding defaults");
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    app.fallthrough();
    int threads = 1;
    app.add_option("--threads", threads, "worker threads")->envname("HC_THREADS")->check(CLI::PositiveNumber);

    // fixed-points
    auto* fpc = app.add_subcommand("fixed-points", "tree fixed points and critical fugacity");
    int fp_d = 6;
    std::string fp_lambda = "1";
    double fp_tol = 1e-12;
    std::string fp_out;
    fpc->add_option("--d", fp_d, "degree")->required();
    fpc->add_option("--lambda", fp_lambda, "fugacity (decimal or p/q)")->required();
    fpc->add_option("--tol", fp_tol, "solver tolerance");
    fpc->add_option("--out", fp_out, "report file");

    // moments
    auto* mom = app.add_subcommand("moments", "first and second moment exponents");
    mom->require_subcommand(1);
    auto* meval = mom->add_subcommand("eval", "evaluate one function at one point");
    auto* mgrid = mom->add_subcommand("grid", "evaluate over a (gamma, delta) grid");
    std::string m_func = "ghat", m_point, m_out, m_grange = "", m_drange = "0.01:0.33";
    int m_d = 6, m_ni = 50, m_nj = 50;
    double m_lambda = 1;
    for (auto* sc : {meval, mgrid}) {
        sc->add_option("--func", m_func, "phi1|f|ghat|tau|h1|psi|phi")
            ->check(CLI::IsMember({"phi1", "f", "ghat", "tau", "h1", "psi", "phi", "eps"}));
        sc->add_option("--d", m_d, "degree");
        sc->add_option("--lambda", m_lambda, "fugacity");
        sc->add_option("--out", m_out, "output file");
    }
    meval->add_option("--point", m_point, "alpha,beta[,gamma,delta[,epsilon]]")->required();
    mgrid->add_option("--point", m_point, "alpha,beta (default: the fixed-point pair)");
    mgrid->add_option("--gamma-range", m_grange, "lo:hi (default 0:alpha)");
    mgrid->add_option("--delta-range", m_drange, "lo:hi");
    mgrid->add_option("--ni", m_ni, "gamma steps")->check(CLI::PositiveNumber);
    mgrid->add_option("--nj", m_nj, "delta steps")->check(CLI::PositiveNumber);

    // certify
    auto* cert = app.add_subcommand("certify", "interval certification of Condition 1");
    CertificationOptions copt;
    std::string c_grid = "100x32", c_out, c_rounding = "nudge";
    bool c_plain = false, c_timing = false, c_prelim = false;
    cert->add_option("--d", copt.d, "degree");
    cert->add_option("--lambda", copt.lambda, "fugacity");
    cert->add_option("--nbhd", copt.nbhd, "neighbourhood radius around (alpha, beta)");
    cert->add_option("--grid", c_grid, "IxJ grid");
    cert->add_option("--refine", copt.refine_depth, "maximum bisection depth")->check(CLI::NonNegativeNumber);
    cert->add_option("--rounding", c_rounding, "nudge|hardware")->check(CLI::IsMember({"nudge", "hardware"}));
    cert->add_flag("--plain", c_plain, "natural interval extension instead of the mean-value form");
    cert->add_flag("--timing", c_timing, "include wall time in the report");
    cert->add_flag("--preliminaries", c_prelim, "also run the preliminary bounds");
    cert->add_option("--out", c_out, "report file");

    // gadget
    auto* gad = app.add_subcommand("gadget", "random gadget construction");
    gad->require_subcommand(1);
    int g_n = 0, g_d = 6, g_m = -1, g_depth = -1, g_k = -1, g_imax = 4;
    double g_theta = 0.1, g_psi = 0.1, g_alpha = 0, g_beta = 0;
    std::uint64_t g_seed = 1;
    std::string g_in, g_out, g_h, g_gadget;
    auto* gs = gad->add_subcommand("sample", "sample G-tilde");
    auto* ga = gad->add_subcommand("append-trees", "append the trees to G-tilde");
    auto* gb = gad->add_subcommand("build-hg", "build H^G");
    auto* gc = gad->add_subcommand("cycles", "short W-cycle counts");
    for (auto* sc : {gs, ga}) {
        sc->add_option("--n", g_n, "side size")->required();
        sc->add_option("--theta", g_theta, "root exponent");
        sc->add_option("--psi", g_psi, "depth exponent");
        sc->add_option("--d", g_d, "degree");
        sc->add_option("--seed", g_seed, "RNG seed");
        sc->add_option("--m", g_m, "explicit tree roots per side");
        sc->add_option("--tree-depth", g_depth, "explicit even tree depth");
        sc->add_option("--out", g_out, "graph file");
    }
    ga->add_option("--in", g_in, "G-tilde graph file")->required();
    gb->add_option("--h", g_h, "outer graph file")->required();
    gb->add_option("--gadget", g_gadget, "gadget graph file")->required();
    gb->add_option("--k", g_k, "cross-edges per H-edge and sign class")->required();
    gb->add_option("--out", g_out, "graph file");
    gc->add_option("--in", g_in, "graph file")->required();
    gc->add_option("--imax", g_imax, "maximum cycle length (<= 12)");
    gc->add_option("--alpha", g_alpha, "alpha for delta_i");
    gc->add_option("--beta", g_beta, "beta for delta_i");
    gc->add_option("--out", g_out, "CSV file");

    // z
    auto* zc = app.add_subcommand("z", "exact partition functions and moment formulas");
    zc->require_subcommand(1);
    std::string z_graph, z_lambda = "1", z_eta, z_out, z_alpha, z_beta;
    int z_phase = 0, z_n = 4, z_m = 1, z_depth = 0, z_d = 3, z_ep = 0, z_em = 0;
    long z_samples = 0;
    std::uint64_t z_seed = 1;
    auto* ze = zc->add_subcommand("exact", "Z of a graph file");
    auto* zcond = zc->add_subcommand("conditional", "Z(eta) with optional phase");
    auto* zf = zc->add_subcommand("formulas", "closed-form first and second moments");
    for (auto* sc : {ze, zcond}) {
        sc->add_option("--graph", z_graph, "graph file")->required();
        sc->add_option("--lambda", z_lambda, "fugacity (decimal or p/q)");
        sc->add_option("--out", z_out, "report file");
    }
    zcond->add_option("--eta", z_eta, "eta file")->required();
    zcond->add_option("--phase", z_phase, "+1, -1 or 0 (no restriction)")->check(CLI::IsMember({-1, 0, 1}));
    zf->add_option("--n", z_n, "side size");
    zf->add_option("--m", z_m, "tree roots per side");
    zf->add_option("--tree-depth", z_depth, "tree depth");
    zf->add_option("--d", z_d, "degree");
    zf->add_option("--alpha", z_alpha, "alpha (rational, alpha n integral)")->required();
    zf->add_option("--beta", z_beta, "beta (rational, beta n integral)")->required();
    zf->add_option("--eta-plus", z_ep, "occupied U+ count");
    zf->add_option("--eta-minus", z_em, "occupied U- count");
    zf->add_option("--lambda", z_lambda, "fugacity (decimal or p/q)");
    bool z_check = false;
    zf->add_flag("--check", z_check, "compare against Monte Carlo over sampled G-tilde");
    zf->add_option("--samples", z_samples, "graphs sampled for --check");
    zf->add_option("--seed", z_seed, "base seed for --check");
    zf->add_option("--out", z_out, "report file");

    // sample
    auto* sam = app.add_subcommand("sample", "Markov chain sampling");
    sam->require_subcommand(1);
    auto* sg = sam->add_subcommand("glauber", "heat-bath Glauber dynamics");
    std::string s_graph, s_init = "empty", s_out;
    double s_lambda = 1;
    long s_sweeps = 1000;
    std::uint64_t s_seed = 1;
    sg->add_option("--graph", s_graph, "graph file")->required();
    sg->add_option("--lambda", s_lambda, "fugacity");
    sg->add_option("--sweeps", s_sweeps, "sweeps")->check(CLI::PositiveNumber);
    sg->add_option("--init", s_init, "empty|plus|minus")->check(CLI::IsMember({"empty", "plus", "minus"}));
    sg->add_option("--seed", s_seed, "RNG seed");
    sg->add_option("--out", s_out, "CSV file");

    // reconstruct
    auto* rec = app.add_subcommand("reconstruct", "posterior decay on the tree");
    int r_d = 6, r_sign = 1, r_reps = 10;
    double r_lambda = 1, r_zeta = 0.3, r_thr = -1;
    std::string r_levels = "1..10", r_fit = "4..10", r_out;
    long r_samples = 100000;
    std::uint64_t r_seed = 1;
    rec->add_option("--d", r_d, "degree");
    rec->add_option("--lambda", r_lambda, "fugacity");
    rec->add_option("--levels", r_levels, "a..b");
    rec->add_option("--fit", r_fit, "levels used for the two-level rate, a..b");
    rec->add_option("--samples", r_samples, "samples per level");
    rec->add_option("--replicates", r_reps, "independent populations");
    rec->add_option("--sign", r_sign, "root class")->check(CLI::IsMember({-1, 1}));
    rec->add_option("--zeta1", r_zeta, "tail threshold exp(-zeta1 level)");
    rec->add_option("--threshold", r_thr, "fixed tail threshold instead of exp(-zeta1 level)");
    rec->add_option("--seed", r_seed, "RNG seed");
    rec->add_option("--out", r_out, "CSV file");

    // reduce
    auto* red = app.add_subcommand("reduce", "phase vectors of H^G against MAX-CUT");
    std::string rd_h, rd_mode = "exact", rd_out, rd_lambda = "10";
    int rd_n = 8, rd_k = -1, rd_d = 3, rd_m = -1, rd_depth = -1;
    double rd_theta = 0.1, rd_psi = 0.1;
    std::uint64_t rd_seed = 1;
    long rd_sweeps = 2000;
    red->add_option("--h", rd_h, "outer graph file")->required();
    red->add_option("--n", rd_n, "gadget side size");
    red->add_option("--theta", rd_theta, "root exponent");
    red->add_option("--psi", rd_psi, "depth exponent");
    red->add_option("--d", rd_d, "degree");
    red->add_option("--m", rd_m, "explicit tree roots per side");
    red->add_option("--tree-depth", rd_depth, "explicit tree depth");
    red->add_option("--k", rd_k, "cross-edges per H-edge and sign class (default max(1, n^{3 theta/4}))");
    red->add_option("--lambda", rd_lambda, "fugacity (decimal or p/q)");
    red->add_option("--mode", rd_mode, "exact|glauber")->check(CLI::IsMember({"exact", "glauber"}));
    red->add_option("--sweeps", rd_sweeps, "glauber sweeps per chain");
    red->add_option("--seed", rd_seed, "gadget and chain seed");
    red->add_option("--out", rd_out, "report file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error usage: " << e.what() << "\n";
        return 1;
    }

    // run configuration: global options plus the selected subcommand chain
    auto header = [&](std::ostream& os) {
        os << "# " << kVersion << "\n# argv:";
        for (int i = 1; i < argc; ++i) os << ' ' << argv[i];
        os << "\n";
        std::function<void(const CLI::App*, const std::string&)> dump = [&](const CLI::App* a, const std::string& prefix) {
            for (const CLI::Option* opt : a->get_options()) {
                std::string name = opt->get_single_name();
                if (name == "help" || name == "config") continue;
                std::string val;
                if (opt->count()) {
                    for (const auto& r : opt->results()) val += (val.empty() ? "" : ",") + r;
                } else {
                    val = opt->get_default_str();
                }
                os << "# " << prefix << name << "=" << val << "\n";
            }
            for (const CLI::App* sub : a->get_subcommands()) dump(sub, prefix + sub->get_name() + ".");
        };
        dump(&app, "");
    };

    try {
        if (*fpc) {
            mpq_class lam = parse_rational(fp_lambda);
            ModelParams mp{fp_d, lam.get_d()};
            mp.validate();
            SolverOptions so;
            so.tol = fp_tol;
            TreeFixedPoints fp = solve_fixed_points(mp, so);
            mpq_class lc = critical_fugacity_exact(fp_d);
            ExtraConditions ec = check_extra_conditions(fp, fp_d);
            Output o(fp_out, out);
            header(o.os());
            auto& os = o.os();
            os << "d=" << fp_d << "\nlambda=" << rational_string(lam) << "\nlambda_c=" << rational_string(lc)
               << "\nlambda_c_decimal=" << fmt(lc.get_d()) << "\nregime=" << (lam > lc ? "non-uniqueness" : "uniqueness")
               << "\np_plus=" << fmt(fp.p_plus) << "\np_minus=" << fmt(fp.p_minus) << "\np_star=" << fmt(fp.p_star)
               << "\nq_plus=" << fmt(fp.q_plus) << "\nq_minus=" << fmt(fp.q_minus) << "\nq_star=" << fmt(fp.q_star)
               << "\nresidual=" << fmt(fp.residual) << "\niterations=" << fp.iterations
               << "\nresidual_h_p_plus=" << fmt(h_map(fp.p_plus, mp) - fp.p_minus)
               << "\nresidual_h_p_minus=" << fmt(h_map(fp.p_minus, mp) - fp.p_plus)
               << "\nresidual_q_plus=" << fmt(tree_map(fp.q_minus, mp) - fp.q_plus)
               << "\nresidual_q_minus=" << fmt(tree_map(fp.q_plus, mp) - fp.q_minus)
               << "\nextra_product_ok=" << ec.product_ok << "\nextra_product_margin=" << fmt(ec.product_margin)
               << "\nextra_qplus_ok=" << ec.qplus_ok << "\nextra_qplus_margin=" << fmt(ec.qplus_margin) << "\n";
            return 0;
        }

        if (*mom) {
            ModelParams mp{m_d, m_lambda};
            mp.validate();
            auto eval = [&](const std::vector<double>& p) -> double {
                OccupancyPair pt{p.at(0), p.at(1)};
                if (m_func == "phi1") return phi1(pt, mp);
                if (m_func == "tau") return tau(pt, m_d);
                if (p.size() < 4) throw DomainError("--func " + m_func + " needs alpha,beta,gamma,delta");
                if (m_func == "f") {
                    double e = p.size() >= 5 ? p[4] : epsilon_hat(pt, p[2], p[3]);
                    return second_moment_f(pt, {p[2], p[3], e}, mp);
                }
                if (m_func == "eps") return epsilon_hat(pt, p[2], p[3]);
                if (m_func == "ghat") return ghat(pt, p[2], p[3], mp);
                if (m_func == "h1") return h1_bound(pt, p[2], p[3], m_d);
                if (m_func == "psi") return psi_upper(pt, p[2], p[3], m_d);
                return phi_cert(pt, p[2], p[3], m_d);
            };
            Output o(m_out, out);
            header(o.os());
            if (*meval) {
                std::vector<double> p = parse_point(m_point);
                if (p.size() < 2) throw DomainError("--point needs at least alpha,beta");
                o.os() << "func=" << m_func << "\nvalue=" << fmt(eval(p)) << "\n";
            } else {
                std::vector<double> ab;
                if (m_point.empty()) {
                    TreeFixedPoints fp = solve_fixed_points(mp);
                    ab = {fp.p_minus * fp.p_minus, fp.p_plus * fp.p_plus};
                } else {
                    ab = parse_point(m_point);
                    if (ab.size() != 2) throw DomainError("--point for grid is alpha,beta");
                }
                auto range = [](const std::string& s, double dlo, double dhi) {
                    if (s.empty()) return std::make_pair(dlo, dhi);
                    auto c = s.find(':');
                    if (c == std::string::npos) throw DomainError("range must be lo:hi");
                    return std::make_pair(std::stod(s.substr(0, c)), std::stod(s.substr(c + 1)));
                };
                auto gr = range(m_grange, 0.0, ab[0]);
                auto dr = range(m_drange, 0.01, 0.33);
                o.os() << "gamma,delta," << m_func << "\n";
                for (int i = 0; i <= m_ni; ++i)
                    for (int j = 0; j <= m_nj; ++j) {
                        double g = gr.first + (gr.second - gr.first) * i / m_ni;
                        double dl = dr.first + (dr.second - dr.first) * j / m_nj;
                        std::string val;
                        try {
                            val = fmt(eval({ab[0], ab[1], g, dl}));
                        } catch (const DomainError&) {
                            val = "nan";
                        }
                        o.os() << fmt(g) << ',' << fmt(dl) << ',' << val << "\n";
                    }
            }
            return 0;
        }

        if (*cert) {
            auto x = c_grid.find('x');
            if (x == std::string::npos) throw DomainError("--grid must be IxJ");
            copt.grid_i = std::stoi(c_grid.substr(0, x));
            copt.grid_j = std::stoi(c_grid.substr(x + 1));
            if (copt.grid_i < 1 || copt.grid_j < 1) throw DomainError("--grid sizes must be positive");
            copt.mean_value = !c_plain;
            copt.rounding = c_rounding == "hardware" ? RoundingMode::Hardware : RoundingMode::Nudge;
            copt.threads = threads;
            ModelParams mp{copt.d, copt.lambda};
            mp.validate();
            TreeFixedPoints fp = solve_fixed_points(mp);
            CertificationReport rep = certify_condition1(fp, copt);
            Output o(c_out, out);
            header(o.os());
            bool ok = rep.verdict;
            if (c_prelim) {
                PreliminaryReport pr = certify_preliminaries(fp, copt.nbhd, copt.d, copt.lambda);
                o.os() << pr.serialize();
                ok = ok && pr.verdict;
            }
            o.os() << rep.serialize(c_timing);
            if (!ok) throw Failed{};
            return 0;
        }

        if (*gad) {
            auto make_spec = [&] {
                if (g_m >= 0 || g_depth >= 0)
                    return GadgetSpec::explicit_sizes(g_n, g_m >= 0 ? g_m : 1, g_depth >= 0 ? g_depth : 0, g_d, g_seed);
                return GadgetSpec::from_exponents(g_n, g_theta, g_psi, g_d, g_seed);
            };
            if (*gs || *ga) {
                GadgetSpec spec = make_spec();
                Graph g = *gs ? sample_gtilde(spec) : append_trees(read_graph_file(g_in), spec);
                Output o(g_out, out);
                serialize(g, o.os());
            } else if (*gb) {
                Graph g = build_hg(read_graph_file(g_h), read_graph_file(g_gadget), g_k);
                Output o(g_out, out);
                serialize(g, o.os());
            } else {
                if (g_imax > 12) throw DomainError("--imax must be <= 12");
                auto stats = count_short_cycles(read_graph_file(g_in), g_imax, g_alpha, g_beta);
                Output o(g_out, out);
                header(o.os());
                o.os() << "length,observed,observed_multi,lambda_i,delta_i\n";
                for (const auto& c : stats)
                    o.os() << c.length << ',' << c.observed << ',' << c.observed_multi << ',' << fmt(c.lambda_i) << ','
                           << fmt(c.delta_i) << "\n";
            }
            return 0;
        }

        if (*zc) {
            mpq_class lam = parse_rational(z_lambda);
            if (lam < 0) throw DomainError("lambda must be >= 0");
            Output o(z_out, out);
            if (*ze) {
                Graph g = read_graph_file(z_graph);
                DPOptions dp;
                dp.lambda = lam;
                mpq_class z;
                try {
                    z = transfer_dp(g, dp).total();
                } catch (const ResourceError&) {
                    z = exact_partition(g, lam);
                }
                header(o.os());
                o.os() << "vertices=" << g.size() << "\nlambda=" << rational_string(lam) << "\nZ=" << rational_string(z)
                       << "\nZ_decimal=" << fmt(z.get_d()) << "\n";
            } else if (*zcond) {
                Graph g = read_graph_file(z_graph);
                auto eta = read_eta(z_eta, g);
                PartitionValue pv = conditional_partition(g, lam, eta, z_phase);
                header(o.os());
                o.os() << "vertices=" << g.size() << "\nlambda=" << rational_string(lam) << "\nphase=" << z_phase
                       << "\nconsistent=" << pv.consistent << "\nZ=" << rational_string(pv.value)
                       << "\nZ_decimal=" << fmt(pv.value.get_d()) << "\n";
            } else {
                GadgetSpec spec = GadgetSpec::explicit_sizes(z_n, z_m, z_depth, z_d, z_seed);
                MomentInstance in = moment_instance(spec, parse_rational(z_alpha), parse_rational(z_beta), {z_ep, z_em}, lam);
                mpq_class e1 = expected_Z_formula(in), e2 = expected_Z2_formula(in);
                header(o.os());
                o.os() << "n=" << in.n << "\nm_prime=" << in.m_prime << "\nd=" << in.d << "\nalpha_n=" << in.a
                       << "\nbeta_n=" << in.b << "\neta_plus=" << in.eta_plus << "\neta_minus=" << in.eta_minus
                       << "\nEZ=" << rational_string(e1) << "\nEZ_decimal=" << fmt(e1.get_d())
                       << "\nEZ2=" << rational_string(e2) << "\nEZ2_decimal=" << fmt(e2.get_d())
                       << "\nEZ_mww=" << fmt(expected_Z_mww(in).get_d()) << "\nEZ2_mww=" << fmt(expected_Z2_mww(in).get_d())
                       << "\nfirst_moment_shape=" << fmt(first_moment_ratio_shape(in)) << "\n";
                if (z_check) {
                    if (z_samples < 2) throw DomainError("--check needs --samples >= 2");
                    double w = std::pow(lam.get_d(), in.a + in.b + in.eta_plus + in.eta_minus);
                    double s1 = 0, s2 = 0, s4 = 0;
                    for (long i = 0; i < z_samples; ++i) {
                        GadgetSpec si = spec;
                        si.seed = derive_seed(z_seed, static_cast<std::uint64_t>(i));
                        double z = w * static_cast<double>(sampled_count_alpha_beta(sample_gtilde(si), in));
                        s1 += z;
                        s2 += z * z;
                        s4 += z * z * z * z;
                    }
                    double nn = static_cast<double>(z_samples);
                    double m1 = s1 / nn, m2 = s2 / nn;
                    double se1 = std::sqrt(std::max(0.0, m2 - m1 * m1) / nn);
                    double se2 = std::sqrt(std::max(0.0, s4 / nn - m2 * m2) / nn);
                    double z1 = se1 > 0 ? (m1 - e1.get_d()) / se1 : (m1 == e1.get_d() ? 0 : INFINITY);
                    double z2 = se2 > 0 ? (m2 - e2.get_d()) / se2 : (m2 == e2.get_d() ? 0 : INFINITY);
                    o.os() << "samples=" << z_samples << "\nmc_Z=" << fmt(m1) << "\nmc_Z_se=" << fmt(se1)
                           << "\nmc_Z2=" << fmt(m2) << "\nmc_Z2_se=" << fmt(se2) << "\nzscore_Z=" << fmt(z1)
                           << "\nzscore_Z2=" << fmt(z2) << "\n";
                    bool ok = std::fabs(z1) <= 3 && std::fabs(z2) <= 3;
                    o.os() << "verdict=" << (ok ? "pass" : "fail") << "\n";
                    if (!ok) throw Failed{};
                }
            }
            return 0;
        }

        if (*sam) {
            Graph g = read_graph_file(s_graph);
            GlauberInit gi = s_init == "plus" ? GlauberInit::Plus : (s_init == "minus" ? GlauberInit::Minus : GlauberInit::Empty);
            GlauberSummary sm = glauber_run(g, s_lambda, s_sweeps, initial_configuration(g, gi), s_seed);
            Output o(s_out, out);
            header(o.os());
            o.os() << "sweep,w_plus,w_minus,phase\n";
            for (size_t i = 0; i < sm.wplus.size(); ++i)
                o.os() << i + 1 << ',' << sm.wplus[i] << ',' << sm.wminus[i] << ',' << sm.phase[i] << "\n";
            return 0;
        }

        if (*rec) {
            ModelParams mp{r_d, r_lambda};
            mp.validate();
            TreeFixedPoints fp = solve_fixed_points(mp);
            DecayOptions opt;
            std::tie(opt.level_min, opt.level_max) = parse_range(r_levels);
            std::tie(opt.fit_min, opt.fit_max) = parse_range(r_fit);
            opt.samples = r_samples;
            opt.replicates = r_reps;
            opt.sign = r_sign;
            opt.zeta1 = r_zeta;
            opt.tail_threshold = r_thr;
            opt.seed = r_seed;
            opt.threads = threads;
            DecayEstimate est = estimate_decay(fp, r_d, r_lambda, opt);
            Output o(r_out, out);
            header(o.os());
            o.os() << "# fitted_rate=" << fmt(est.fitted_rate) << "\n# fitted_rate_se=" << fmt(est.fitted_rate_se)
                   << "\n# predicted_rate=" << fmt(est.predicted_rate) << "\n# zeta2_fit=" << fmt(est.zeta2_fit)
                   << "\n# degenerate=" << est.degenerate << "\n";
            o.os() << "level,x,x_se,x_cond,x_cond_se,x_square,identity_diff,identity_se,child_cond,child_cond_pred,"
                      "child_diff_se,mean_q,mean_q_se,abs_dev,abs_dev_se,threshold,tail,tail_se\n";
            for (const auto& l : est.levels)
                o.os() << l.level << ',' << fmt(l.x) << ',' << fmt(l.x_se) << ',' << fmt(l.x_cond) << ','
                       << fmt(l.x_cond_se) << ',' << fmt(l.x_square) << ',' << fmt(l.identity_diff) << ','
                       << fmt(l.identity_se) << ',' << fmt(l.child_cond) << ',' << fmt(l.child_cond_pred) << ','
                       << fmt(l.child_cond_se) << ',' << fmt(l.mean_q) << ',' << fmt(l.mean_q_se) << ','
                       << fmt(l.abs_dev) << ',' << fmt(l.abs_dev_se) << ',' << fmt(l.threshold) << ','
                       << fmt(l.tail) << ',' << fmt(l.tail_se) << "\n";
            return 0;
        }

        if (*red) {
            Graph h = read_graph_file(rd_h);
            GadgetSpec spec = (rd_m >= 0 || rd_depth >= 0)
                                  ? GadgetSpec::explicit_sizes(rd_n, rd_m >= 0 ? rd_m : 1, rd_depth >= 0 ? rd_depth : 0, rd_d, rd_seed)
                                  : GadgetSpec::from_exponents(rd_n, rd_theta, rd_psi, rd_d, rd_seed);
            if (rd_m >= 0 || rd_depth >= 0) {
                spec.theta = rd_theta;
                spec.psi = rd_psi;
            }
            int k = rd_k >= 0 ? rd_k : static_cast<int>(default_cross_edges(rd_n, rd_theta));
            GlauberPhaseOptions go;
            go.sweeps = rd_sweeps;
            go.burn_in = rd_sweeps / 10;
            go.seed = rd_seed;
            go.threads = threads;
            ReductionReport rep = run_reduction(h, spec, parse_rational(rd_lambda), k,
                                                rd_mode == "exact" ? ReductionMode::Exact : ReductionMode::Glauber, go);
            Output o(rd_out, out);
            header(o.os());
            o.os() << rep.serialize();
            if (!rep.separated) throw Failed{};
            return 0;
        }
    } catch (const Failed&) {
        err << "error verdict: check failed\n";
        return 1;
    } catch (const ParseError& e) {
        err << "error parse: " << e.what() << "\n";
        return 1;
    } catch (const ResourceError& e) {
        err << "error resource: " << e.what() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        err << "error convergence: " << e.what() << "\n";
        return 1;
    } catch (const DomainError& e) {
        err << "error domain: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "error domain: " << e.what() << "\n";
        return 1;
    } catch (const std::out_of_range& e) {
        err << "error domain: " << e.what() << "\n";
        return 1;
    } catch (const std::bad_alloc&) {
        err << "error resource: out of memory\n";
        return 2;
    }
    return 0;
}

}  // namespace hc
