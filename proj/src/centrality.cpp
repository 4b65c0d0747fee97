#include "btcactor/centrality.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>

namespace btcactor::centrality {

Digraph::Digraph(int n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
    out_.resize(n_);
    in_.resize(n_);
    out_simple_.resize(n_);
    in_simple_.resize(n_);
    und_simple_.resize(n_);
    for (const auto& e : edges_) {
        out_[e.src].emplace_back(e.dst, e.weight);
        in_[e.dst].emplace_back(e.src, e.weight);
        if (e.src != e.dst) {
            out_simple_[e.src].push_back(e.dst);
            in_simple_[e.dst].push_back(e.src);
            und_simple_[e.src].push_back(e.dst);
            und_simple_[e.dst].push_back(e.src);
        }
    }
    auto dedup = [](std::vector<int>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    for (int v = 0; v < n_; ++v) {
        dedup(out_simple_[v]);
        dedup(in_simple_[v]);
        dedup(und_simple_[v]);
    }
}

bool Digraph::has_undirected_edge(int a, int b) const {
    const auto& nb = und_simple_[a];
    return std::binary_search(nb.begin(), nb.end(), b);
}

namespace {

// Unweighted hop distances from v along the chosen direction.
std::vector<int> bfs_hops(const Digraph& g, int v, Mode mode) {
    std::vector<int> dist(g.size(), -1);
    dist[v] = 0;
    std::deque<int> queue{v};
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        auto visit = [&](int w) {
            if (dist[w] < 0) {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        };
        if (mode == Mode::out || mode == Mode::all)
            for (int w : g.out_simple(u)) visit(w);
        if (mode == Mode::in || mode == Mode::all)
            for (int w : g.in_simple(u)) visit(w);
    }
    return dist;
}

// Dijkstra with edge weight as length; parallel edges legal (min wins).
std::vector<double> dijkstra(const Digraph& g, int v, Mode mode) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(g.size(), inf);
    dist[v] = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    heap.push({0.0, v});
    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        auto relax = [&](int w, double len) {
            if (d + len < dist[w]) {
                dist[w] = d + len;
                heap.push({dist[w], w});
            }
        };
        if (mode == Mode::out || mode == Mode::all)
            for (const auto& [w, len] : g.out(u))
                if (w != u) relax(w, len);
        if (mode == Mode::in || mode == Mode::all)
            for (const auto& [w, len] : g.in(u))
                if (w != u) relax(w, len);
    }
    return dist;
}

} // namespace

double closeness(const Digraph& g, int v, Mode mode, bool weighted) {
    const int n = g.size();
    if (n <= 1) return 0.0;
    int reachable = 0;
    double total = 0.0;
    if (weighted) {
        auto dist = dijkstra(g, v, mode);
        for (int u = 0; u < n; ++u) {
            if (u == v || std::isinf(dist[u])) continue;
            ++reachable;
            total += dist[u];
        }
    } else {
        auto dist = bfs_hops(g, v, mode);
        for (int u = 0; u < n; ++u) {
            if (u == v || dist[u] < 0) continue;
            ++reachable;
            total += dist[u];
        }
    }
    if (reachable == 0 || total <= 0.0) return 0.0;
    const double r = static_cast<double>(reachable);
    return (r / total) * (r / static_cast<double>(n - 1));
}

namespace {

// One Brandes source sweep; returns the dependency accumulated on `target`.
double brandes_from(const Digraph& g, int s, int target) {
    const int n = g.size();
    std::vector<int> dist(n, -1);
    std::vector<double> sigma(n, 0.0), delta(n, 0.0);
    std::vector<std::vector<int>> preds(n);
    std::vector<int> order;
    order.reserve(n);

    dist[s] = 0;
    sigma[s] = 1.0;
    std::deque<int> queue{s};
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        order.push_back(u);
        for (int w : g.out_simple(u)) {
            if (dist[w] < 0) {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
            if (dist[w] == dist[u] + 1) {
                sigma[w] += sigma[u];
                preds[w].push_back(u);
            }
        }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int w = *it;
        for (int u : preds[w]) delta[u] += sigma[u] / sigma[w] * (1.0 + delta[w]);
    }
    return target == s ? 0.0 : delta[target];
}

} // namespace

double betweenness(const Digraph& g, int v, Exec exec) {
    const int n = g.size();
    std::vector<double> contrib(n, 0.0);
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int s = 0; s < n; ++s) contrib[s] = brandes_from(g, s, v);
    } else {
        for (int s = 0; s < n; ++s) contrib[s] = brandes_from(g, s, v);
    }
    // Fixed-order reduction keeps the result independent of thread count.
    double bc = 0.0;
    for (int s = 0; s < n; ++s) bc += contrib[s];
    return bc;
}

std::vector<double> pagerank(const Digraph& g, double damping, double tol, int max_iter,
                             Exec exec) {
    const int n = g.size();
    if (n == 0) return {};
    std::vector<double> out_weight(n, 0.0);
    for (const auto& e : g.edges()) out_weight[e.src] += e.weight;

    std::vector<double> rank(n, 1.0 / n), next(n, 0.0);
    const double teleport = (1.0 - damping) / n;
    for (int iter = 0; iter < max_iter; ++iter) {
        double dangling = 0.0;
        for (int v = 0; v < n; ++v)
            if (out_weight[v] <= 0.0) dangling += rank[v];
        const double base = teleport + damping * dangling / n;

        const bool par = exec == Exec::parallel;
#pragma omp parallel for schedule(static) if (par)
        for (int v = 0; v < n; ++v) {
            double acc = 0.0;
            for (const auto& [u, w] : g.in(v))
                if (out_weight[u] > 0.0) acc += rank[u] * (w / out_weight[u]);
            next[v] = base + damping * acc;
        }

        double diff = 0.0;
        for (int v = 0; v < n; ++v) diff += std::fabs(next[v] - rank[v]);
        rank.swap(next);
        if (diff < tol) break;
    }
    return rank;
}

HitsScores hits(const Digraph& g, double tol, int max_iter, Exec exec) {
    const int n = g.size();
    HitsScores scores{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    if (n == 0 || g.edge_count() == 0) return scores;

    std::vector<double> hub(n, 1.0), auth(n, 1.0), new_hub(n), new_auth(n);
    const bool par = exec == Exec::parallel;
    for (int iter = 0; iter < max_iter; ++iter) {
#pragma omp parallel for schedule(static) if (par)
        for (int v = 0; v < n; ++v) {
            double a = 0.0;
            for (const auto& [u, w] : g.in(v)) a += hub[u];
            new_auth[v] = a;
        }
#pragma omp parallel for schedule(static) if (par)
        for (int v = 0; v < n; ++v) {
            double h = 0.0;
            for (const auto& [u, w] : g.out(v)) h += new_auth[u];
            new_hub[v] = h;
        }
        auto l2 = [](const std::vector<double>& x) {
            double s = 0.0;
            for (double v : x) s += v * v;
            return std::sqrt(s);
        };
        double hn = l2(new_hub), an = l2(new_auth);
        if (hn <= 0.0 || an <= 0.0) return scores;  // no cycle feeding scores
        double diff = 0.0;
        for (int v = 0; v < n; ++v) {
            new_hub[v] /= hn;
            new_auth[v] /= an;
            diff += std::fabs(new_hub[v] - hub[v]) + std::fabs(new_auth[v] - auth[v]);
        }
        hub.swap(new_hub);
        auth.swap(new_auth);
        if (diff < tol) break;
    }
    double hmax = *std::max_element(hub.begin(), hub.end());
    double amax = *std::max_element(auth.begin(), auth.end());
    for (int v = 0; v < n; ++v) {
        scores.hub[v] = hmax > 0.0 ? hub[v] / hmax : 0.0;
        scores.authority[v] = amax > 0.0 ? auth[v] / amax : 0.0;
    }
    return scores;
}

std::vector<int> coreness(const Digraph& g, Mode mode) {
    const int n = g.size();
    std::vector<int> degree(n, 0);
    auto deg_neighbors = [&](int v) -> const std::vector<int>& {
        // Vertices whose relevant degree drops when v is removed.
        switch (mode) {
            case Mode::in: return g.out_simple(v);   // v fed their in-degree
            case Mode::out: return g.in_simple(v);   // v consumed their out-degree
            default: return g.undirected_simple(v);
        }
    };
    for (int v = 0; v < n; ++v) {
        switch (mode) {
            case Mode::in: degree[v] = static_cast<int>(g.in_simple(v).size()); break;
            case Mode::out: degree[v] = static_cast<int>(g.out_simple(v).size()); break;
            default: degree[v] = static_cast<int>(g.undirected_simple(v).size()); break;
        }
    }

    // Batagelj-Zaversnik bucket peeling.
    int maxdeg = 0;
    for (int v = 0; v < n; ++v) maxdeg = std::max(maxdeg, degree[v]);
    std::vector<int> bin(maxdeg + 2, 0), pos(n), vert(n), core = degree;
    for (int v = 0; v < n; ++v) ++bin[degree[v]];
    int start = 0;
    for (int d = 0; d <= maxdeg; ++d) {
        int count = bin[d];
        bin[d] = start;
        start += count;
    }
    for (int v = 0; v < n; ++v) {
        pos[v] = bin[core[v]];
        vert[pos[v]] = v;
        ++bin[core[v]];
    }
    for (int d = maxdeg; d > 0; --d) bin[d] = bin[d - 1];
    bin[0] = 0;

    std::vector<char> removed(n, 0);
    for (int i = 0; i < n; ++i) {
        int v = vert[i];
        removed[v] = 1;
        for (int u : deg_neighbors(v)) {
            if (removed[u] || core[u] <= core[v]) continue;
            int du = core[u], pu = pos[u];
            int pw = bin[du], w = vert[pw];
            if (u != w) {
                std::swap(vert[pu], vert[pw]);
                pos[u] = pw;
                pos[w] = pu;
            }
            ++bin[du];
            --core[u];
        }
    }
    return core;
}

double local_clustering(const Digraph& g, int v) {
    const auto& nb = g.undirected_simple(v);
    const size_t d = nb.size();
    if (d < 2) return 0.0;
    int64_t links = 0;
    for (size_t i = 0; i < d; ++i)
        for (size_t j = i + 1; j < d; ++j)
            if (g.has_undirected_edge(nb[i], nb[j])) ++links;
    return 2.0 * static_cast<double>(links) / (static_cast<double>(d) * static_cast<double>(d - 1));
}

int neighborhood_size(const Digraph& g, int v, int order) {
    std::vector<int> dist(g.size(), -1);
    dist[v] = 0;
    std::deque<int> queue{v};
    int count = 1;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        if (dist[u] == order) continue;
        for (int w : g.undirected_simple(u)) {
            if (dist[w] < 0) {
                dist[w] = dist[u] + 1;
                ++count;
                queue.push_back(w);
            }
        }
    }
    return count;
}

} // namespace btcactor::centrality
