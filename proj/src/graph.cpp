#include "hc/graph.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "hc/errors.hpp"

namespace hc {

namespace {

const char* const kNames[] = {"x", "W+", "W-", "U+", "U-", "V+", "V-", "T+", "T-"};

}  // namespace

const char* label_name(Label l) { return kNames[static_cast<int>(l)]; }

Label parse_label(const std::string& s) {
    for (int i = 0; i < 9; ++i)
        if (s == kNames[i]) return static_cast<Label>(i);
    throw std::invalid_argument("unknown label '" + s + "'");
}

bool is_plus_side(Label l) {
    return l == Label::WPlus || l == Label::UPlus || l == Label::VPlus || l == Label::TreePlus;
}

bool is_W(Label l) { return l == Label::WPlus || l == Label::WMinus; }

int Graph::add_vertex(Label l, int gadget_index) {
    adj.emplace_back();
    label.push_back(l);
    gadget.push_back(gadget_index);
    cross.push_back(0);
    return size() - 1;
}

void Graph::add_edge(int u, int v) {
    if (u == v || u < 0 || v < 0 || u >= size() || v >= size()) throw DomainError("invalid edge");
    if (u > v) std::swap(u, v);
    multi_edges.emplace_back(u, v);
    auto& au = adj[static_cast<size_t>(u)];
    auto it = std::lower_bound(au.begin(), au.end(), v);
    if (it != au.end() && *it == v) return;
    au.insert(it, v);
    auto& av = adj[static_cast<size_t>(v)];
    av.insert(std::lower_bound(av.begin(), av.end(), u), u);
}

bool Graph::has_edge(int u, int v) const {
    const auto& a = adj[static_cast<size_t>(u)];
    return std::binary_search(a.begin(), a.end(), v);
}

std::vector<std::pair<int, int>> Graph::edges() const {
    std::vector<std::pair<int, int>> out;
    for (int u = 0; u < size(); ++u)
        for (int v : adj[static_cast<size_t>(u)])
            if (u < v) out.emplace_back(u, v);
    return out;
}

int Graph::max_degree() const {
    int m = 0;
    for (const auto& a : adj) m = std::max(m, static_cast<int>(a.size()));
    return m;
}

int Graph::multi_degree(int v) const {
    int c = 0;
    for (auto [a, b] : multi_edges) c += (a == v) + (b == v);
    return c;
}

long Graph::num_edges() const {
    long c = 0;
    for (const auto& a : adj) c += static_cast<long>(a.size());
    return c / 2;
}

std::vector<int> Graph::vertices_with(Label l) const {
    std::vector<int> out;
    for (int v = 0; v < size(); ++v)
        if (label[static_cast<size_t>(v)] == l) out.push_back(v);
    return out;
}

std::vector<int> Graph::two_coloring() const {
    std::vector<int> col(static_cast<size_t>(size()), -1);
    for (int s = 0; s < size(); ++s) {
        if (col[static_cast<size_t>(s)] >= 0) continue;
        col[static_cast<size_t>(s)] = 0;
        std::queue<int> q;
        q.push(s);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v : adj[static_cast<size_t>(u)]) {
                if (col[static_cast<size_t>(v)] < 0) {
                    col[static_cast<size_t>(v)] = 1 - col[static_cast<size_t>(u)];
                    q.push(v);
                } else if (col[static_cast<size_t>(v)] == col[static_cast<size_t>(u)]) {
                    return {};
                }
            }
        }
    }
    return col;
}

bool Graph::operator==(const Graph& o) const {
    auto m1 = multi_edges, m2 = o.multi_edges;
    std::sort(m1.begin(), m1.end());
    std::sort(m2.begin(), m2.end());
    return d == o.d && adj == o.adj && label == o.label && gadget == o.gadget && cross == o.cross && m1 == m2;
}

void serialize(const Graph& g, std::ostream& os) {
    os << "hgg 1 " << g.size() << " " << g.d << "\n";
    for (int v = 0; v < g.size(); ++v)
        os << "v " << v << " " << label_name(g.label[static_cast<size_t>(v)])
           << (g.cross[static_cast<size_t>(v)] ? "*" : "") << " " << g.gadget[static_cast<size_t>(v)] << "\n";
    for (auto [u, v] : g.multi_edges) os << "e " << u << " " << v << "\n";
}

std::string serialize(const Graph& g) {
    std::ostringstream os;
    serialize(g, os);
    return os.str();
}

Graph deserialize(std::istream& is) {
    Graph g;
    std::string line;
    int lineno = 0;
    long expected = -1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (expected < 0) {
            int version = 0;
            if (tag != "hgg" || !(ls >> version >> expected >> g.d)) throw ParseError("expected header 'hgg <version> <n> <d>'", lineno);
            if (version != 1) throw ParseError("unsupported version", lineno);
            if (expected < 0) throw ParseError("negative vertex count", lineno);
            continue;
        }
        if (tag == "v") {
            int id, gi;
            std::string lab;
            if (!(ls >> id >> lab >> gi)) throw ParseError("malformed vertex line", lineno);
            if (id != g.size()) throw ParseError("vertex ids must be consecutive from 0", lineno);
            bool flag = !lab.empty() && lab.back() == '*';
            if (flag) lab.pop_back();
            Label l;
            try {
                l = parse_label(lab);
            } catch (const std::invalid_argument& e) {
                throw ParseError(e.what(), lineno);
            }
            g.add_vertex(l, gi);
            g.cross.back() = flag;
        } else if (tag == "e") {
            int u, v;
            if (!(ls >> u >> v)) throw ParseError("malformed edge line", lineno);
            if (u < 0 || v < 0 || u >= g.size() || v >= g.size() || u == v) throw ParseError("edge endpoint out of range", lineno);
            g.add_edge(u, v);
        } else {
            throw ParseError("unknown record '" + tag + "'", lineno);
        }
    }
    if (expected < 0) throw ParseError("missing header", lineno);
    if (g.size() != expected) throw ParseError("vertex count does not match header", lineno);
    return g;
}

Graph deserialize(const std::string& text) {
    std::istringstream is(text);
    return deserialize(is);
}

Graph read_graph_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    return deserialize(f);
}

void write_graph_file(const Graph& g, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    serialize(g, f);
}

Graph path_graph(int n) {
    Graph g;
    for (int i = 0; i < n; ++i) g.add_vertex();
    for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
    g.d = g.max_degree();
    return g;
}

Graph cycle_graph(int n) {
    Graph g = path_graph(n);
    if (n >= 3) g.add_edge(0, n - 1);
    g.d = g.max_degree();
    return g;
}

Graph complete_graph(int n) {
    Graph g;
    for (int i = 0; i < n; ++i) g.add_vertex();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) g.add_edge(i, j);
    g.d = g.max_degree();
    return g;
}

}  // namespace hc
