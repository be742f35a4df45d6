#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace distrec {

using Vertex = uint32_t;
using Dist = uint32_t;
using EdgeList = std::vector<std::pair<Vertex, Vertex>>;

// Sentinel for "no path"; strictly larger than any achievable hop count, so
// comparisons like d >= k+2 need no special-casing.
inline constexpr Dist Unreachable = std::numeric_limits<Dist>::max();

inline bool dist_finite(Dist d) { return d != Unreachable; }

// Immutable undirected simple graph, CSR adjacency with sorted rows.
// Construct through build_graph(); edge edits return fresh values.
class Graph {
  public:
    Graph() = default;

    uint32_t num_vertices() const { return n_; }
    uint64_t num_edges() const { return m_; }

    std::span<const Vertex> neighbors(Vertex v) const {
        check_vertex(v);
        return std::span<const Vertex>(targets_.data() + offsets_[v],
                                       targets_.data() + offsets_[v + 1]);
    }

    uint32_t degree(Vertex v) const {
        check_vertex(v);
        return static_cast<uint32_t>(offsets_[v + 1] - offsets_[v]);
    }

    uint32_t max_degree() const {
        uint32_t best = 0;
        for (Vertex v = 0; v < n_; ++v) best = std::max(best, degree(v));
        return best;
    }

    bool has_edge(Vertex u, Vertex v) const {
        check_vertex(u);
        check_vertex(v);
        if (u == v) return false;
        if (degree(u) > degree(v)) std::swap(u, v);
        auto row = neighbors(u);
        return std::binary_search(row.begin(), row.end(), v);
    }

    // edges as (u,v) with u < v, ascending lexicographic
    EdgeList edge_list() const {
        EdgeList out;
        out.reserve(m_);
        for (Vertex u = 0; u < n_; ++u)
            for (Vertex v : neighbors(u))
                if (u < v) out.emplace_back(u, v);
        return out;
    }

    bool operator==(const Graph& o) const {
        return n_ == o.n_ && offsets_ == o.offsets_ && targets_ == o.targets_;
    }

  private:
    void check_vertex(Vertex v) const {
        if (v >= n_)
            throw std::invalid_argument("vertex " + std::to_string(v) +
                                        " out of range [0," + std::to_string(n_) + ")");
    }

    friend Graph build_graph(uint32_t n, EdgeList edges);

    uint32_t n_ = 0;
    uint64_t m_ = 0;
    std::vector<uint64_t> offsets_{0};
    std::vector<Vertex> targets_;
};

// Validates endpoints, normalizes and deduplicates pairs, builds symmetric
// sorted adjacency. Duplicate pairs (in either orientation) collapse to one edge.
inline Graph build_graph(uint32_t n, EdgeList edges) {
    for (auto& [u, v] : edges) {
        if (u >= n || v >= n)
            throw std::invalid_argument("edge endpoint out of range [0," +
                                        std::to_string(n) + "): (" + std::to_string(u) +
                                        "," + std::to_string(v) + ")");
        if (u == v)
            throw std::invalid_argument("self-loop at vertex " + std::to_string(u));
        if (u > v) std::swap(u, v);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    Graph g;
    g.n_ = n;
    g.m_ = edges.size();
    g.offsets_.assign(static_cast<size_t>(n) + 1, 0);
    for (auto& [u, v] : edges) {
        ++g.offsets_[u + 1];
        ++g.offsets_[v + 1];
    }
    for (uint32_t i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
    g.targets_.resize(2 * g.m_);
    std::vector<uint64_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    // lexicographic pair order fills every row in ascending target order:
    // row w first receives u's from pairs (u,w) with u<w, then v's from (w,v)
    for (auto& [u, v] : edges) {
        g.targets_[cursor[u]++] = v;
        g.targets_[cursor[v]++] = u;
    }
    return g;
}

struct DistanceVector {
    Vertex source = 0;
    std::vector<Dist> dist;  // hop counts, Unreachable outside the component
};

// BFS into caller-owned buffers (no allocation when capacity suffices).
// After the call, frontier holds the visited vertices in BFS order.
inline void bfs_distances_into(const Graph& g, Vertex source, std::vector<Dist>& dist,
                               std::vector<Vertex>& frontier) {
    const uint32_t n = g.num_vertices();
    if (source >= n) throw std::invalid_argument("bfs source out of range");
    dist.assign(n, Unreachable);
    frontier.clear();
    dist[source] = 0;
    frontier.push_back(source);
    for (size_t head = 0; head < frontier.size(); ++head) {
        Vertex u = frontier[head];
        Dist nd = dist[u] + 1;
        for (Vertex w : g.neighbors(u)) {
            if (dist[w] == Unreachable) {
                dist[w] = nd;
                frontier.push_back(w);
            }
        }
    }
}

inline DistanceVector bfs_distances(const Graph& g, Vertex source) {
    DistanceVector dv;
    dv.source = source;
    std::vector<Vertex> frontier;
    bfs_distances_into(g, source, dv.dist, frontier);
    return dv;
}

// {u : d(v,u) <= r}, ascending; always contains v
inline std::vector<Vertex> ball(const Graph& g, Vertex v, Dist r) {
    const uint32_t n = g.num_vertices();
    if (v >= n) throw std::invalid_argument("ball center out of range");
    std::vector<Dist> dist(n, Unreachable);
    std::vector<Vertex> frontier;
    dist[v] = 0;
    frontier.push_back(v);
    for (size_t head = 0; head < frontier.size(); ++head) {
        Vertex u = frontier[head];
        if (dist[u] == r) break;  // BFS order: everything past here is farther
        Dist nd = dist[u] + 1;
        for (Vertex w : g.neighbors(u)) {
            if (dist[w] == Unreachable) {
                dist[w] = nd;
                frontier.push_back(w);
            }
        }
    }
    std::sort(frontier.begin(), frontier.end());
    return frontier;
}

namespace detail {

inline std::optional<Dist> diameter_bfs_all(const Graph& g) {
    const uint32_t n = g.num_vertices();
    if (n == 0) return std::nullopt;
    std::vector<Dist> dist;
    std::vector<Vertex> frontier;
    Dist best = 0;
    for (Vertex s = 0; s < n; ++s) {
        bfs_distances_into(g, s, dist, frontier);
        if (frontier.size() != n) return std::nullopt;  // disconnected
        best = std::max(best, dist[frontier.back()]);
    }
    return best;
}

// Iterated bitset closure: row v holds ball_r(v) as a bitmask; one pass ORs
// neighbor rows (ball_{r+1} = ball_r of self and neighbors). ecc(v) = first r
// with a full row; diameter = max ecc. ~(n+2m)*n/64 word ops per pass, and the
// pass count is the diameter, so this beats n BFS runs by a wide margin on
// small-diameter graphs.
inline std::optional<Dist> diameter_bitset(const Graph& g) {
    const uint64_t n = g.num_vertices();
    if (n == 0) return std::nullopt;
    if (n == 1) return 0;
    const uint64_t W = (n + 63) / 64;
    std::vector<uint64_t> cur(n * W, 0), nxt(n * W, 0);
    const uint64_t tail_mask = (n % 64) ? ((1ull << (n % 64)) - 1) : ~0ull;

    auto row_full = [&](const uint64_t* row) {
        for (uint64_t w = 0; w + 1 < W; ++w)
            if (row[w] != ~0ull) return false;
        return row[W - 1] == tail_mask;
    };

    std::vector<uint8_t> done(n, 0);
    uint64_t n_done = 0;
    Dist best = 0;

    for (uint64_t v = 0; v < n; ++v) {
        uint64_t* row = cur.data() + v * W;
        row[v / 64] |= 1ull << (v % 64);
        for (Vertex w : g.neighbors(static_cast<Vertex>(v))) row[w / 64] |= 1ull << (w % 64);
        if (row_full(row)) {
            done[v] = 1;
            ++n_done;
            best = 1;
        }
    }

    Dist r = 1;
    while (n_done < n) {
        bool changed = false;
        for (uint64_t v = 0; v < n; ++v) {
            uint64_t* dst = nxt.data() + v * W;
            const uint64_t* src = cur.data() + v * W;
            if (done[v]) {
                std::copy(src, src + W, dst);
                continue;
            }
            std::copy(src, src + W, dst);
            for (Vertex w : g.neighbors(static_cast<Vertex>(v))) {
                const uint64_t* other = cur.data() + static_cast<uint64_t>(w) * W;
                for (uint64_t i = 0; i < W; ++i) dst[i] |= other[i];
            }
            for (uint64_t i = 0; i < W; ++i)
                if (dst[i] != src[i]) {
                    changed = true;
                    break;
                }
        }
        cur.swap(nxt);
        ++r;
        for (uint64_t v = 0; v < n; ++v) {
            if (!done[v] && row_full(cur.data() + v * W)) {
                done[v] = 1;
                ++n_done;
                best = std::max(best, r);
            }
        }
        if (n_done < n && !changed) return std::nullopt;  // stalled: disconnected
    }
    return best;
}

}  // namespace detail

// Exact diameter; nullopt when the graph is disconnected (or empty).
inline std::optional<Dist> diameter(const Graph& g) {
    const uint64_t n = g.num_vertices();
    const uint64_t words = 2 * n * ((n + 63) / 64) * 8;
    if (n > 512 && words <= 3'200'000'000ull) return detail::diameter_bitset(g);
    return detail::diameter_bfs_all(g);
}

// New graph with {u,v} present; idempotent when the edge already exists.
inline Graph with_edge(const Graph& g, Vertex u, Vertex v) {
    if (u == v) throw std::invalid_argument("with_edge: endpoints equal");
    if (g.has_edge(u, v)) return g;
    EdgeList edges = g.edge_list();
    edges.emplace_back(std::min(u, v), std::max(u, v));
    return build_graph(g.num_vertices(), std::move(edges));
}

// New graph with {u,v} absent; no-op when the edge is already missing.
inline Graph without_edge(const Graph& g, Vertex u, Vertex v) {
    if (u == v) throw std::invalid_argument("without_edge: endpoints equal");
    if (!g.has_edge(u, v)) return g;
    EdgeList edges = g.edge_list();
    std::pair<Vertex, Vertex> key{std::min(u, v), std::max(u, v)};
    edges.erase(std::remove(edges.begin(), edges.end(), key), edges.end());
    return build_graph(g.num_vertices(), std::move(edges));
}

// ---- edge-list text format ----
// First line "n m", then m lines "u v" with u < v, 0-based ASCII decimal,
// LF-terminated. The parser is strict: CR rejected, u >= v rejected, duplicate
// edges rejected, line count must match m.

inline void write_edge_list(const Graph& g, std::ostream& os) {
    os << g.num_vertices() << ' ' << g.num_edges() << '\n';
    for (auto [u, v] : g.edge_list()) os << u << ' ' << v << '\n';
}

inline std::string write_edge_list_string(const Graph& g) {
    std::ostringstream os;
    write_edge_list(g, os);
    return os.str();
}

namespace detail {

inline bool parse_uint_field(const std::string& s, size_t& i, uint64_t& out) {
    if (i >= s.size() || s[i] < '0' || s[i] > '9') return false;
    out = 0;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
        if (out > (std::numeric_limits<uint64_t>::max() - 9) / 10) return false;
        out = out * 10 + static_cast<uint64_t>(s[i] - '0');
        ++i;
    }
    return true;
}

inline void parse_pair_line(const std::string& line, uint64_t lineno, uint64_t& a, uint64_t& b) {
    if (line.find('\r') != std::string::npos)
        throw std::invalid_argument("edge list line " + std::to_string(lineno) +
                                    ": CR line ending (LF required)");
    size_t i = 0;
    if (!parse_uint_field(line, i, a) || i >= line.size() || line[i] != ' ')
        throw std::invalid_argument("edge list line " + std::to_string(lineno) +
                                    ": expected \"u v\"");
    ++i;
    if (!parse_uint_field(line, i, b) || i != line.size())
        throw std::invalid_argument("edge list line " + std::to_string(lineno) +
                                    ": expected \"u v\"");
}

}  // namespace detail

inline Graph read_edge_list(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("edge list: empty input");
    uint64_t n = 0, m = 0;
    detail::parse_pair_line(line, 1, n, m);
    if (n > std::numeric_limits<uint32_t>::max())
        throw std::invalid_argument("edge list: n too large");
    if (m > n * (n - 1) / 2)
        throw std::invalid_argument("edge list: m exceeds n(n-1)/2");
    EdgeList edges;
    edges.reserve(m);
    for (uint64_t e = 0; e < m; ++e) {
        if (!std::getline(is, line))
            throw std::invalid_argument("edge list: truncated after " + std::to_string(e) +
                                        " of " + std::to_string(m) + " edges");
        uint64_t u = 0, v = 0;
        detail::parse_pair_line(line, e + 2, u, v);
        if (u >= v)
            throw std::invalid_argument("edge list line " + std::to_string(e + 2) +
                                        ": endpoints must satisfy u < v");
        if (v >= n)
            throw std::invalid_argument("edge list line " + std::to_string(e + 2) +
                                        ": endpoint out of range");
        edges.emplace_back(static_cast<Vertex>(u), static_cast<Vertex>(v));
    }
    if (std::getline(is, line))
        throw std::invalid_argument("edge list: trailing content after " + std::to_string(m) +
                                    " edges");
    EdgeList sorted = edges;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("edge list: duplicate edge");
    return build_graph(static_cast<uint32_t>(n), std::move(edges));
}

inline Graph read_edge_list_string(const std::string& s) {
    std::istringstream is(s);
    return read_edge_list(is);
}

}  // namespace distrec
