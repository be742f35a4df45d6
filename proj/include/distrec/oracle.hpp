#pragma once

#include <cstdint>
#include <istream>
#include <list>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "distrec/graph.hpp"

namespace distrec {

// The set Q of distinct queried pairs. Stored as lazily allocated per-vertex
// bitmaps (row u holds bit v for recorded pairs u<v): O(1) membership and
// exact dedup at n^2/8 bits worst case, far below a hash set of packed pairs
// at the ~10^7-pair scale the experiments reach.
class QueryLedger {
  public:
    QueryLedger() = default;
    explicit QueryLedger(uint32_t n) : n_(n), rows_(n) {}

    uint32_t num_vertices() const { return n_; }
    uint64_t count() const { return count_; }

    bool contains(Vertex u, Vertex v) const {
        if (u >= n_ || v >= n_ || u == v) return false;
        if (u > v) std::swap(u, v);
        const auto& row = rows_[u];
        if (row.empty()) return false;
        return (row[v / 64] >> (v % 64)) & 1;
    }

    // records {u,v}; returns true when the pair is new
    bool insert(Vertex u, Vertex v) {
        if (u >= n_ || v >= n_)
            throw std::invalid_argument("ledger: vertex out of range");
        if (u == v) throw std::invalid_argument("ledger: u == v");
        if (u > v) std::swap(u, v);
        auto& row = rows_[u];
        if (row.empty()) row.assign((n_ + 63) / 64, 0);
        uint64_t& word = row[v / 64];
        const uint64_t bit = 1ull << (v % 64);
        if (word & bit) return false;
        word |= bit;
        ++count_;
        return true;
    }

    // visits recorded pairs in ascending (u,v) order
    template <class F>
    void for_each(F&& f) const {
        for (Vertex u = 0; u < n_; ++u) {
            const auto& row = rows_[u];
            if (row.empty()) continue;
            for (uint32_t w = 0; w < row.size(); ++w) {
                uint64_t bits = row[w];
                while (bits) {
                    uint32_t b = static_cast<uint32_t>(__builtin_ctzll(bits));
                    bits &= bits - 1;
                    f(u, static_cast<Vertex>(w * 64 + b));
                }
            }
        }
    }

    // pairs incident to u, ascending in the other endpoint
    template <class F>
    void for_each_with(Vertex u, F&& f) const {
        for (Vertex v = 0; v < u; ++v)
            if (contains(v, u)) f(v);
        const auto& row = rows_[u];
        if (row.empty()) return;
        for (uint32_t w = 0; w < row.size(); ++w) {
            uint64_t bits = row[w];
            while (bits) {
                uint32_t b = static_cast<uint32_t>(__builtin_ctzll(bits));
                bits &= bits - 1;
                f(static_cast<Vertex>(w * 64 + b));
            }
        }
    }

  private:
    uint32_t n_ = 0;
    uint64_t count_ = 0;
    std::vector<std::vector<uint64_t>> rows_;
};

// Distance oracle over a hidden graph. Every answer is an exact BFS distance;
// per-source rows are memoized in a small LRU (one BFS serves a landmark's
// whole row of queries), and the ledger records the distinct pairs asked.
class DistanceOracle {
  public:
    explicit DistanceOracle(Graph hidden, size_t cache_capacity = 8)
        : hidden_(std::move(hidden)),
          ledger_(hidden_.num_vertices()),
          cache_cap_(cache_capacity ? cache_capacity : 1) {}

    uint32_t num_vertices() const { return hidden_.num_vertices(); }
    uint64_t count() const { return ledger_.count(); }
    const QueryLedger& ledger() const { return ledger_; }
    QueryLedger ledger_snapshot() const { return ledger_; }

    Dist query(Vertex u, Vertex v) {
        check_pair(u, v);
        ledger_.insert(u, v);
        // prefer whichever endpoint is already cached as a source
        if (cached(u)) return row(u)[v];
        if (cached(v)) return row(v)[u];
        return row(u)[v];
    }

    std::vector<Dist> query_batch(const std::vector<std::pair<Vertex, Vertex>>& pairs) {
        std::vector<Dist> out;
        out.reserve(pairs.size());
        for (auto [u, v] : pairs) out.push_back(query(u, v));
        return out;
    }

    // answers for {source} x targets with a single BFS (cache hint)
    std::vector<Dist> query_row(Vertex source, std::span<const Vertex> targets) {
        const auto& d = row(source);
        std::vector<Dist> out;
        out.reserve(targets.size());
        for (Vertex t : targets) {
            check_pair(source, t);
            ledger_.insert(source, t);
            out.push_back(d[t]);
        }
        return out;
    }

    const Graph& hidden_for_scoring() const { return hidden_; }  // harness-side only

  private:
    void check_pair(Vertex u, Vertex v) const {
        const uint32_t n = hidden_.num_vertices();
        if (u >= n || v >= n)
            throw std::invalid_argument("oracle: vertex out of range");
        if (u == v) throw std::invalid_argument("oracle: query requires u != v");
    }

    bool cached(Vertex s) const { return index_.find(s) != index_.end(); }

    const std::vector<Dist>& row(Vertex source) {
        auto it = index_.find(source);
        if (it != index_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second);
            return it->second->second;
        }
        if (lru_.size() >= cache_cap_) {
            index_.erase(lru_.back().first);
            lru_.pop_back();
        }
        lru_.emplace_front(source, bfs_distances(hidden_, source).dist);
        index_[source] = lru_.begin();
        return lru_.front().second;
    }

    Graph hidden_;
    QueryLedger ledger_;
    size_t cache_cap_;
    std::list<std::pair<Vertex, std::vector<Dist>>> lru_;
    std::unordered_map<Vertex, std::list<std::pair<Vertex, std::vector<Dist>>>::iterator> index_;
};

// ---- ledger CSV: header "u,v,d", 0-based, "INF" for unreachable ----

inline void export_ledger_csv(const Graph& hidden, const QueryLedger& ledger,
                              std::ostream& os) {
    os << "u,v,d\n";
    std::vector<Dist> dist;
    std::vector<Vertex> frontier;
    Vertex cur_src = Unreachable;
    ledger.for_each([&](Vertex u, Vertex v) {
        if (u != cur_src) {  // ascending iteration: one BFS per distinct u
            bfs_distances_into(hidden, u, dist, frontier);
            cur_src = u;
        }
        os << u << ',' << v << ',';
        if (dist_finite(dist[v]))
            os << dist[v] << '\n';
        else
            os << "INF\n";
    });
}

struct LedgerRow {
    Vertex u, v;
    Dist d;  // Unreachable encodes INF
};

inline std::vector<LedgerRow> parse_ledger_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || (line != "u,v,d" && line != "u,v,d\r"))
        throw std::invalid_argument("ledger csv: missing \"u,v,d\" header");
    std::vector<LedgerRow> rows;
    uint64_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.ends_with('\r')) line.pop_back();
        if (line.empty()) continue;
        size_t c1 = line.find(',');
        size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos)
            throw std::invalid_argument("ledger csv line " + std::to_string(lineno) +
                                        ": expected u,v,d");
        auto parse_field = [&](const std::string& s) -> uint64_t {
            size_t i = 0;
            uint64_t x = 0;
            if (!detail::parse_uint_field(s, i, x) || i != s.size())
                throw std::invalid_argument("ledger csv line " + std::to_string(lineno) +
                                            ": bad number \"" + s + "\"");
            return x;
        };
        LedgerRow r;
        r.u = static_cast<Vertex>(parse_field(line.substr(0, c1)));
        r.v = static_cast<Vertex>(parse_field(line.substr(c1 + 1, c2 - c1 - 1)));
        std::string dfield = line.substr(c2 + 1);
        r.d = dfield == "INF" ? Unreachable : static_cast<Dist>(parse_field(dfield));
        rows.push_back(r);
    }
    return rows;
}

}  // namespace distrec
