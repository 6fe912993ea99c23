#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace hc {

enum class Label : std::uint8_t { None, WPlus, WMinus, UPlus, UMinus, VPlus, VMinus, TreePlus, TreeMinus };

const char* label_name(Label l);
Label parse_label(const std::string& s);  // throws std::invalid_argument
bool is_plus_side(Label l);               // W+, U+, V+, T+
bool is_W(Label l);

struct Graph {
    int d = 0;
    std::vector<std::vector<int>> adj;  // simple graph, sorted
    std::vector<Label> label;
    std::vector<int> gadget;
    std::vector<std::uint8_t> cross;                    // cross-edge endpoint flag
    std::vector<std::pair<int, int>> multi_edges;       // raw edges incl. parallel copies, u < v

    int size() const { return static_cast<int>(adj.size()); }
    int add_vertex(Label l = Label::None, int gadget_index = 0);
    // Adds one raw edge; the simple adjacency collapses parallel copies.
    void add_edge(int u, int v);
    bool has_edge(int u, int v) const;
    std::vector<std::pair<int, int>> edges() const;  // simple edges, u < v, sorted
    int degree(int v) const { return static_cast<int>(adj[static_cast<size_t>(v)].size()); }
    int max_degree() const;
    int multi_degree(int v) const;
    long num_edges() const;
    std::vector<int> vertices_with(Label l) const;

    // 2-coloring (0/1 per vertex) or empty if not bipartite
    std::vector<int> two_coloring() const;
    bool is_bipartite() const { return size() == 0 || !two_coloring().empty(); }

    bool operator==(const Graph& o) const;
};

void serialize(const Graph& g, std::ostream& os);
std::string serialize(const Graph& g);
Graph deserialize(std::istream& is);  // throws ParseError with the line number
Graph deserialize(const std::string& text);
Graph read_graph_file(const std::string& path);
void write_graph_file(const Graph& g, const std::string& path);

// Small named graphs for tests and the CLI.
Graph path_graph(int n);
Graph cycle_graph(int n);
Graph complete_graph(int n);

}  // namespace hc
