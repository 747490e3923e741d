#ifndef CTRW_NETWORK_HPP
#define CTRW_NETWORK_HPP

// Undirected simple graphs: construction, generation (Barabasi-Albert,
// Watts-Strogatz, deterministic families), and edge-list file IO.
//
// Invariants enforced on every Network: symmetric adjacency, no self-loops,
// no duplicate edges, no isolated vertices.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <queue>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ctrw/errors.hpp"
#include "ctrw/rng.hpp"

namespace ctrw {

class Network {
  public:
    using Edge = std::pair<int, int>;  // canonical form: first < second

    static Network from_edge_list(int vertex_count, const std::vector<Edge>& edges) {
        if (vertex_count <= 0) throw InvalidParameterError("network: vertex count must be positive");
        Network net;
        net.adjacency_.assign(static_cast<std::size_t>(vertex_count), {});
        for (const Edge& e : edges) net.add_edge_checked(e.first, e.second);
        net.finalize();
        return net;
    }

    int vertex_count() const { return static_cast<int>(adjacency_.size()); }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }

    int degree(int v) const { return static_cast<int>(adjacency_[static_cast<std::size_t>(v)].size()); }
    const std::vector<int>& neighbors(int v) const { return adjacency_[static_cast<std::size_t>(v)]; }

    std::vector<int> degrees() const {
        std::vector<int> k(adjacency_.size());
        for (std::size_t v = 0; v < adjacency_.size(); ++v) k[v] = static_cast<int>(adjacency_[v].size());
        return k;
    }

    long degree_sum() const {
        long s = 0;
        for (const auto& nb : adjacency_) s += static_cast<long>(nb.size());
        return s;
    }

    bool has_edge(int i, int j) const {
        const auto& nb = adjacency_[static_cast<std::size_t>(i)];
        return std::binary_search(nb.begin(), nb.end(), j);
    }

    bool connected() const {
        if (adjacency_.empty()) return false;
        std::vector<char> seen(adjacency_.size(), 0);
        std::queue<int> q;
        q.push(0);
        seen[0] = 1;
        std::size_t visited = 1;
        while (!q.empty()) {
            const int v = q.front();
            q.pop();
            for (int w : adjacency_[static_cast<std::size_t>(v)]) {
                if (!seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    ++visited;
                    q.push(w);
                }
            }
        }
        return visited == adjacency_.size();
    }

  private:
    void add_edge_checked(int i, int j) {
        const int n = vertex_count();
        if (i < 0 || i >= n || j < 0 || j >= n)
            throw InvalidParameterError("network: edge endpoint out of range");
        if (i == j) throw InvalidParameterError("network: self-loop rejected");
        auto& nb = adjacency_[static_cast<std::size_t>(i)];
        if (std::find(nb.begin(), nb.end(), j) != nb.end())
            throw InvalidParameterError("network: duplicate edge rejected");
        nb.push_back(j);
        adjacency_[static_cast<std::size_t>(j)].push_back(i);
    }

    void finalize() {
        edges_.clear();
        for (std::size_t v = 0; v < adjacency_.size(); ++v) {
            auto& nb = adjacency_[v];
            if (nb.empty()) throw InvalidParameterError("network: isolated vertex " + std::to_string(v));
            std::sort(nb.begin(), nb.end());
            for (int w : nb)
                if (static_cast<int>(v) < w) edges_.emplace_back(static_cast<int>(v), w);
        }
        std::sort(edges_.begin(), edges_.end());
    }

    std::vector<std::vector<int>> adjacency_;
    std::vector<Edge> edges_;

    friend Network generate_ws(int, int, double, std::uint64_t);
};

// ---------------------------------------------------------------------------
// Generators

// Barabasi-Albert preferential attachment. Seed graph is the complete graph
// on k+1 vertices; each later vertex attaches to k distinct existing vertices
// drawn with probability proportional to current degree (duplicates redrawn).
inline Network generate_ba(int vertex_count, int k, std::uint64_t rng_seed) {
    if (k < 1 || vertex_count <= k)
        throw InvalidParameterError("generate_ba: requires J > k >= 1");
    RngStream rng = RngStream::stream(rng_seed, 0);

    std::vector<Network::Edge> edges;
    // `slots` holds every vertex once per unit of degree, so a uniform draw
    // from it is a degree-proportional draw.
    std::vector<int> slots;
    const int seed_size = k + 1;
    for (int i = 0; i < seed_size; ++i)
        for (int j = i + 1; j < seed_size; ++j) {
            edges.emplace_back(i, j);
            slots.push_back(i);
            slots.push_back(j);
        }

    std::vector<int> targets;
    for (int v = seed_size; v < vertex_count; ++v) {
        targets.clear();
        while (static_cast<int>(targets.size()) < k) {
            const int pick = slots[rng.uniform_below(slots.size())];
            if (std::find(targets.begin(), targets.end(), pick) == targets.end())
                targets.push_back(pick);
        }
        for (int t : targets) {
            edges.emplace_back(t, v);
            slots.push_back(t);
            slots.push_back(v);
        }
    }
    return Network::from_edge_list(vertex_count, edges);
}

// Deterministic ring lattice used as the Watts-Strogatz substrate.
// Even k: offsets 1..k/2 on both sides. Odd k additionally pairs vertex i
// with i + floor(J/2) (a perfect matching for even J), giving exactly
// floor(J*k/2) edges and degree k everywhere whenever J*k is even.
inline std::vector<Network::Edge> ring_lattice_edges(int vertex_count, int k) {
    if (k < 1 || vertex_count <= k)
        throw InvalidParameterError("ring lattice: requires J > k >= 1");
    std::vector<Network::Edge> edges;
    for (int d = 1; d <= k / 2; ++d)
        for (int i = 0; i < vertex_count; ++i) {
            const int j = (i + d) % vertex_count;
            edges.emplace_back(std::min(i, j), std::max(i, j));
        }
    if (k % 2 == 1) {
        const int half = vertex_count / 2;
        for (int i = 0; i < half; ++i) edges.emplace_back(i, i + half);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

// Watts-Strogatz: ring lattice, then each edge independently rewired with
// probability p to a fresh endpoint (self-loops and duplicates redrawn, the
// original endpoint kept). Disconnected outcomes are regenerated with an
// advanced sub-stream, never repaired in place.
inline Network generate_ws(int vertex_count, int k, double p, std::uint64_t rng_seed) {
    if (k < 1 || vertex_count <= k)
        throw InvalidParameterError("generate_ws: requires J > k >= 1");
    if (p < 0.0 || p > 1.0) throw InvalidParameterError("generate_ws: p must lie in [0, 1]");

    const std::vector<Network::Edge> lattice = ring_lattice_edges(vertex_count, k);
    constexpr int max_attempts = 64;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        RngStream rng = RngStream::stream(rng_seed, static_cast<std::uint64_t>(attempt));
        Network net;
        net.adjacency_.assign(static_cast<std::size_t>(vertex_count), {});
        for (const auto& [a, b] : lattice) {
            net.adjacency_[static_cast<std::size_t>(a)].push_back(b);
            net.adjacency_[static_cast<std::size_t>(b)].push_back(a);
        }
        auto contains = [&](int u, int w) {
            const auto& nb = net.adjacency_[static_cast<std::size_t>(u)];
            return std::find(nb.begin(), nb.end(), w) != nb.end();
        };
        auto drop = [&](int u, int w) {
            auto& nb = net.adjacency_[static_cast<std::size_t>(u)];
            nb.erase(std::find(nb.begin(), nb.end(), w));
        };
        for (const auto& [a, b] : lattice) {
            if (rng.uniform01() >= p) continue;
            if (net.adjacency_[static_cast<std::size_t>(a)].size() >= static_cast<std::size_t>(vertex_count - 1))
                continue;  // vertex already adjacent to everyone else
            int w;
            do {
                w = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(vertex_count)));
            } while (w == a || contains(a, w));
            drop(a, b);
            drop(b, a);
            net.adjacency_[static_cast<std::size_t>(a)].push_back(w);
            net.adjacency_[static_cast<std::size_t>(w)].push_back(a);
        }
        bool isolated = false;
        for (const auto& nb : net.adjacency_)
            if (nb.empty()) isolated = true;
        if (isolated) continue;
        net.finalize();
        if (net.connected()) return net;
    }
    throw GenerationFailedError("generate_ws: no connected graph within retry bound");
}

inline Network generate_ring(int vertex_count) {
    if (vertex_count < 3) throw InvalidParameterError("generate_ring: requires J >= 3");
    std::vector<Network::Edge> edges;
    for (int i = 0; i < vertex_count; ++i)
        edges.emplace_back(std::min(i, (i + 1) % vertex_count), std::max(i, (i + 1) % vertex_count));
    return Network::from_edge_list(vertex_count, edges);
}

inline Network generate_complete(int vertex_count) {
    if (vertex_count < 2) throw InvalidParameterError("generate_complete: requires J >= 2");
    std::vector<Network::Edge> edges;
    for (int i = 0; i < vertex_count; ++i)
        for (int j = i + 1; j < vertex_count; ++j) edges.emplace_back(i, j);
    return Network::from_edge_list(vertex_count, edges);
}

// Star: hub is vertex 0.
inline Network generate_star(int vertex_count) {
    if (vertex_count < 2) throw InvalidParameterError("generate_star: requires J >= 2");
    std::vector<Network::Edge> edges;
    for (int i = 1; i < vertex_count; ++i) edges.emplace_back(0, i);
    return Network::from_edge_list(vertex_count, edges);
}

inline Network generate_path(int vertex_count) {
    if (vertex_count < 2) throw InvalidParameterError("generate_path: requires J >= 2");
    std::vector<Network::Edge> edges;
    for (int i = 0; i + 1 < vertex_count; ++i) edges.emplace_back(i, i + 1);
    return Network::from_edge_list(vertex_count, edges);
}

enum class NetworkVariant { ba, ws, ring, complete, star, path };

struct GeneratorConfig {
    NetworkVariant variant = NetworkVariant::ba;
    int vertex_count = 50;
    int k = 3;           // BA attachment count / WS lattice neighbor count
    double p = 0.1;      // WS rewiring probability
    std::uint64_t rng_seed = 0;
};

inline Network generate(const GeneratorConfig& cfg) {
    switch (cfg.variant) {
        case NetworkVariant::ba: return generate_ba(cfg.vertex_count, cfg.k, cfg.rng_seed);
        case NetworkVariant::ws: return generate_ws(cfg.vertex_count, cfg.k, cfg.p, cfg.rng_seed);
        case NetworkVariant::ring: return generate_ring(cfg.vertex_count);
        case NetworkVariant::complete: return generate_complete(cfg.vertex_count);
        case NetworkVariant::star: return generate_star(cfg.vertex_count);
        case NetworkVariant::path: return generate_path(cfg.vertex_count);
    }
    throw InvalidParameterError("generate: unknown network variant");
}

// ---------------------------------------------------------------------------
// Edge-list file format: header "# vertices J", then one "i j" pair per line.

inline void save_edge_list(const Network& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << "# vertices " << net.vertex_count() << "\n";
    for (const auto& [a, b] : net.edges()) out << a << " " << b << "\n";
    if (!out) throw ParseError("write failed: " + path);
}

inline Network load_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open: " + path);
    std::string line;
    long line_no = 0;

    // Header
    int vertex_count = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream hs(line);
        std::string hash, word;
        if (!(hs >> hash >> word) || hash != "#" || word != "vertices" || !(hs >> vertex_count))
            throw ParseError("expected header '# vertices J'", line_no);
        break;
    }
    if (vertex_count <= 0) throw ParseError("missing or invalid vertex count header", line_no);

    std::vector<Network::Edge> edges;
    std::vector<std::vector<char>> seen;  // duplicate detection without O(E^2)
    seen.assign(static_cast<std::size_t>(vertex_count), {});
    while (std::getline(in, line)) {
        ++line_no;
        std::string trimmed = line;
        const auto first = trimmed.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (trimmed[first] == '#') continue;
        std::istringstream ls(trimmed);
        long long i, j;
        std::string extra;
        if (!(ls >> i >> j)) throw ParseError("expected 'i j' edge", line_no);
        if (ls >> extra) throw ParseError("trailing content after edge", line_no);
        if (i < 0 || i >= vertex_count || j < 0 || j >= vertex_count)
            throw ParseError("vertex index out of range", line_no);
        if (i == j) throw ParseError("self-loop rejected", line_no);
        const int a = static_cast<int>(std::min(i, j));
        const int b = static_cast<int>(std::max(i, j));
        auto& row = seen[static_cast<std::size_t>(a)];
        if (row.empty()) row.assign(static_cast<std::size_t>(vertex_count), 0);
        if (row[static_cast<std::size_t>(b)]) throw ParseError("duplicate edge rejected", line_no);
        row[static_cast<std::size_t>(b)] = 1;
        edges.emplace_back(a, b);
    }
    return Network::from_edge_list(vertex_count, edges);
}

// Adjacency dump as a JSON array of arrays (debugging aid).
inline std::string adjacency_json(const Network& net) {
    std::string out = "[";
    const int n = net.vertex_count();
    for (int i = 0; i < n; ++i) {
        out += (i == 0) ? "[" : ",[";
        for (int j = 0; j < n; ++j) {
            if (j) out += ",";
            out += net.has_edge(i, j) ? "1" : "0";
        }
        out += "]";
    }
    out += "]";
    return out;
}

}  // namespace ctrw

#endif
