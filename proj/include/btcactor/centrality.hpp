#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace btcactor::centrality {

// Kernels with a parallel path carry an Exec switch; serial is the reference
// implementation the parallel path is tested and benchmarked against.
enum class Exec { serial, parallel };

enum class Mode { in, out, all };

// Compact directed weighted multigraph over vertex ids 0..n-1. Parallel edges
// and self-loops are kept; simple (deduplicated, loop-free) adjacency views
// are precomputed for the kernels that are defined on them.
class Digraph {
public:
    struct Edge {
        int src;
        int dst;
        double weight;
    };

    Digraph(int n, std::vector<Edge> edges);

    int size() const { return n_; }
    int64_t edge_count() const { return static_cast<int64_t>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }

    // Multigraph adjacency (parallel edges kept, self-loops kept).
    const std::vector<std::pair<int, double>>& out(int v) const { return out_[v]; }
    const std::vector<std::pair<int, double>>& in(int v) const { return in_[v]; }

    // Simple views: distinct neighbors, self-loops dropped, sorted.
    const std::vector<int>& out_simple(int v) const { return out_simple_[v]; }
    const std::vector<int>& in_simple(int v) const { return in_simple_[v]; }
    const std::vector<int>& undirected_simple(int v) const { return und_simple_[v]; }

    bool has_undirected_edge(int a, int b) const;

private:
    int n_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::pair<int, double>>> out_, in_;
    std::vector<std::vector<int>> out_simple_, in_simple_, und_simple_;
};

// Closeness of one vertex with disconnected-graph scaling: with r vertices
// reachable (v excluded) at total distance S, closeness is (r/S) * (r/(n-1));
// 0 when nothing is reachable. Weighted mode treats edge weight as length.
double closeness(const Digraph& g, int v, Mode mode, bool weighted);

// Betweenness of one vertex (directed, unweighted, simple view), Brandes
// accumulation; parallel over sources.
double betweenness(const Digraph& g, int v, Exec exec = Exec::parallel);

// Weighted directed PageRank with uniform teleport; dangling mass spread
// uniformly. Converges on L1 change < tol or max_iter sweeps.
std::vector<double> pagerank(const Digraph& g, double damping = 0.85, double tol = 1e-12,
                             int max_iter = 200, Exec exec = Exec::parallel);

struct HitsScores {
    std::vector<double> hub;
    std::vector<double> authority;
};

// HITS over the directed multigraph (parallel edges count), max-normalized to
// 1; all-zero on graphs without edges.
HitsScores hits(const Digraph& g, double tol = 1e-12, int max_iter = 200,
                Exec exec = Exec::parallel);

// Core number per vertex on the simple view; Mode::in/out peel by in-/out-degree.
std::vector<int> coreness(const Digraph& g, Mode mode);

// Local clustering coefficient of v, undirected simple view; 0 when degree < 2.
double local_clustering(const Digraph& g, int v);

// Number of vertices within undirected hop distance <= order of v, v included.
int neighborhood_size(const Digraph& g, int v, int order);

} // namespace btcactor::centrality
