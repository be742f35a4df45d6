#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "distrec/gnp.hpp"
#include "distrec/graph.hpp"
#include "distrec/oracle.hpp"
#include "distrec/rng.hpp"

namespace distrec {

// Q as an explicit pair set with the hidden graph's answers attached. This is
// the certify-side view of a ledger: small enough to scan per candidate pair.
struct QuerySet {
    uint32_t n = 0;
    std::vector<std::pair<Vertex, Vertex>> pairs;  // normalized u < v
    std::vector<Dist> answers;                     // aligned with pairs
    std::unordered_set<uint64_t> keys;

    QuerySet() = default;
    explicit QuerySet(uint32_t n) : n(n) {}

    static uint64_t key(Vertex u, Vertex v) {
        if (u > v) std::swap(u, v);
        return (static_cast<uint64_t>(u) << 32) | v;
    }
    bool contains(Vertex u, Vertex v) const { return keys.count(key(u, v)) != 0; }
    size_t size() const { return pairs.size(); }
};

// Answers are recomputed by BFS, grouped by first endpoint so each distinct
// source costs one traversal.
inline QuerySet make_query_set(const Graph& g, std::vector<std::pair<Vertex, Vertex>> raw) {
    const uint32_t n = g.num_vertices();
    QuerySet q(n);
    for (auto& [u, v] : raw) {
        if (u >= n || v >= n) throw std::invalid_argument("query set: vertex out of range");
        if (u == v) throw std::invalid_argument("query set: u == v");
        if (u > v) std::swap(u, v);
        if (q.keys.insert(QuerySet::key(u, v)).second) q.pairs.emplace_back(u, v);
    }
    std::sort(q.pairs.begin(), q.pairs.end());
    q.answers.resize(q.pairs.size());
    std::vector<Dist> dist;
    std::vector<Vertex> frontier;
    Vertex cur = n;  // invalid
    for (size_t i = 0; i < q.pairs.size(); ++i) {
        if (q.pairs[i].first != cur) {
            cur = q.pairs[i].first;
            bfs_distances_into(g, cur, dist, frontier);
        }
        q.answers[i] = dist[q.pairs[i].second];
    }
    return q;
}

inline QuerySet make_query_set(const Graph& g, const QueryLedger& ledger) {
    std::vector<std::pair<Vertex, Vertex>> raw;
    raw.reserve(ledger.count());
    ledger.for_each([&](Vertex u, Vertex v) { raw.emplace_back(u, v); });
    return make_query_set(g, std::move(raw));
}

enum class CertNotion { Basic, Refined };

inline const char* to_string(CertNotion n) {
    return n == CertNotion::Basic ? "basic" : "refined";
}

struct UndetectableCertificate {
    Vertex u1 = 0, u2 = 0;
    CertNotion notion = CertNotion::Refined;
    std::vector<uint32_t> levels_checked;
    bool validated = false;
};

struct DiameterMismatchError : std::runtime_error {
    Dist measured;
    uint32_t expected;
    DiameterMismatchError(Dist got, uint32_t want)
        : std::runtime_error("measured diameter " +
                             (dist_finite(got) ? std::to_string(got) : std::string("inf")) +
                             " != k+2 = " + std::to_string(want)),
          measured(got),
          expected(want) {}
};

namespace detail {

inline constexpr uint64_t kInfSum = ~0ull >> 2;

inline uint64_t sat(Dist d) { return dist_finite(d) ? d : kInfSum; }

inline uint64_t sum2(Dist a, Dist b) { return sat(a) + sat(b); }

inline void require_nonedge(const Graph& g, Vertex u1, Vertex u2) {
    if (u1 == u2) throw std::invalid_argument("pair endpoints equal");
    if (g.has_edge(u1, u2)) throw std::invalid_argument("pair is an edge");
}

}  // namespace detail

// Basic notion: {u1,u2} is detectable from Q in a diameter-d graph when it is
// queried directly, or some queried pair {a,b} admits a "path" with at most
// d-2 real edges through it. Tested via distance sums over both orientations;
// this can only over-declare detectability (walks vs paths), which keeps
// undetectable verdicts safe.
inline bool is_detectable_basic(const Graph& g, const QuerySet& q, Vertex u1, Vertex u2,
                                Dist d) {
    if (d < 3 || !dist_finite(d)) throw std::invalid_argument("is_detectable_basic: need d >= 3");
    detail::require_nonedge(g, u1, u2);
    if (q.contains(u1, u2)) return true;
    auto du1 = bfs_distances(g, u1).dist;
    auto du2 = bfs_distances(g, u2).dist;
    for (auto [a, b] : q.pairs) {
        uint64_t s = std::min(detail::sum2(du1[a], du2[b]), detail::sum2(du1[b], du2[a]));
        if (s <= static_cast<uint64_t>(d) - 2) return true;
    }
    return false;
}

// Refined notion: no queried pair {a,b} at graph distance >= ell+2 with
// d(u1,a) + d(b,u2) <= ell (either orientation).
inline bool is_ell_undetectable(const Graph& g, const QuerySet& q, Vertex u1, Vertex u2,
                                uint32_t ell) {
    if (ell < 1) throw std::invalid_argument("is_ell_undetectable: need ell >= 1");
    detail::require_nonedge(g, u1, u2);
    if (q.contains(u1, u2)) throw std::invalid_argument("pair is in Q");
    auto du1 = bfs_distances(g, u1).dist;
    auto du2 = bfs_distances(g, u2).dist;
    for (size_t i = 0; i < q.pairs.size(); ++i) {
        auto [a, b] = q.pairs[i];
        if (detail::sat(q.answers[i]) < static_cast<uint64_t>(ell) + 2) continue;
        uint64_t s = std::min(detail::sum2(du1[a], du2[b]), detail::sum2(du1[b], du2[a]));
        if (s <= ell) return false;
    }
    return true;
}

namespace detail {

// d_{G+{u1,u2}}(a,b) = min(d(a,b), d(a,u1)+1+d(u2,b), d(a,u2)+1+d(u1,b)):
// the certificate holds iff no queried answer strictly drops.
inline bool validate_with_rows(const QuerySet& q, const std::vector<Dist>& du1,
                               const std::vector<Dist>& du2) {
    for (size_t i = 0; i < q.pairs.size(); ++i) {
        auto [a, b] = q.pairs[i];
        uint64_t alt = std::min(sum2(du1[a], du2[b]), sum2(du1[b], du2[a])) + 1;
        if (alt < sat(q.answers[i])) return false;
    }
    return true;
}

}  // namespace detail

// Ground truth: does adding {u1,u2} preserve every queried answer?
inline bool validate_certificate(const Graph& g, const QuerySet& q, Vertex u1, Vertex u2) {
    detail::require_nonedge(g, u1, u2);
    if (q.contains(u1, u2)) throw std::invalid_argument("pair is in Q");
    auto du1 = bfs_distances(g, u1).dist;
    auto du2 = bfs_distances(g, u2).dist;
    return detail::validate_with_rows(q, du1, du2);
}

inline bool validate_certificate(const Graph& g, const QueryLedger& ledger, Vertex u1,
                                 Vertex u2) {
    return validate_certificate(g, make_query_set(g, ledger), u1, u2);
}

namespace detail {

// BFS rows from every distinct Q endpoint: d(x, v) = rows[slot(x)][v].
struct EndpointDistances {
    std::unordered_map<Vertex, uint32_t> slot;
    std::vector<std::vector<Dist>> rows;

    EndpointDistances(const Graph& g, const QuerySet& q) {
        std::vector<Vertex> frontier;
        for (auto [a, b] : q.pairs) {
            for (Vertex e : {a, b}) {
                if (slot.count(e)) continue;
                slot.emplace(e, static_cast<uint32_t>(rows.size()));
                rows.emplace_back();
                bfs_distances_into(g, e, rows.back(), frontier);
            }
        }
    }
    const std::vector<Dist>& from(Vertex e) const { return rows[slot.at(e)]; }
};

// A queried pair {a,b} defeats "ell-undetectable for every ell in [k]" iff
// s = min-orientation d(u1,a)+d(b,u2) lands in [1,k] and d(a,b) >= s+2
// (take ell = s, the easiest level). s = 0 cannot occur for pairs not in Q.
inline bool refined_detect(const QuerySet& q, uint32_t k, const std::vector<Dist>& du1,
                           const std::vector<Dist>& du2) {
    for (size_t i = 0; i < q.pairs.size(); ++i) {
        auto [a, b] = q.pairs[i];
        uint64_t s = std::min(sum2(du1[a], du2[b]), sum2(du1[b], du2[a]));
        if (s >= 1 && s <= k && sat(q.answers[i]) >= s + 2) return true;
    }
    return false;
}

inline void require_diameter(const Graph& g, uint32_t k) {
    auto dia = diameter(g);
    if (!dia.has_value() || *dia != k + 2)
        throw DiameterMismatchError(dia.value_or(Unreachable), k + 2);
}

}  // namespace detail

// Scans non-edges outside Q in ascending (u1,u2) order; returns the first pair
// that is ell-undetectable for every ell in [k] and passes validation.
inline std::optional<UndetectableCertificate> find_undetectable_exhaustive(
    const Graph& g, const QuerySet& q, uint32_t k) {
    if (k < 1) throw std::invalid_argument("find_undetectable_exhaustive: need k >= 1");
    detail::require_diameter(g, k);
    const uint32_t n = g.num_vertices();
    detail::EndpointDistances epd(g, q);

    std::vector<Dist> du1, du2;
    std::vector<Vertex> frontier;
    std::vector<uint32_t> levels(k);
    for (uint32_t l = 0; l < k; ++l) levels[l] = l + 1;

    for (Vertex u1 = 0; u1 < n; ++u1) {
        for (Vertex u2 = u1 + 1; u2 < n; ++u2) {
            if (g.has_edge(u1, u2) || q.contains(u1, u2)) continue;
            bool detected = false;
            for (size_t i = 0; i < q.pairs.size() && !detected; ++i) {
                auto [a, b] = q.pairs[i];
                const auto& ra = epd.from(a);
                const auto& rb = epd.from(b);
                uint64_t s = std::min(detail::sum2(ra[u1], rb[u2]),
                                      detail::sum2(rb[u1], ra[u2]));
                detected = s >= 1 && s <= k && detail::sat(q.answers[i]) >= s + 2;
            }
            if (detected) continue;
            bfs_distances_into(g, u1, du1, frontier);
            bfs_distances_into(g, u2, du2, frontier);
            if (!detail::validate_with_rows(q, du1, du2)) continue;
            UndetectableCertificate cert;
            cert.u1 = u1;
            cert.u2 = u2;
            cert.notion = CertNotion::Refined;
            cert.levels_checked = levels;
            cert.validated = true;
            return cert;
        }
    }
    return std::nullopt;
}

inline std::optional<UndetectableCertificate> find_undetectable_exhaustive(
    const Graph& g, const QueryLedger& ledger, uint32_t k) {
    return find_undetectable_exhaustive(g, make_query_set(g, ledger), k);
}

struct SmallPairStats {
    uint64_t cross_count = 0;     // queried pairs with min-orientation ball hit (sum <= k)
    double M_threshold = 0.0;     // 7(k+1)(np)^k N / n^2, np taken as average degree
    uint64_t cond2_violations = 0;  // queried pairs reaching sum <= k-1
    uint64_t cond3_violations = 0;  // ball-hit pairs with the cross-membership clause
};

// Default N (when the caller passes none): the no-reconstruction budget
// floor(e^lambda ln n / (8(k+1)^2 n^{k-2} p^k)) evaluated at the graph's
// empirical density p = 2m/(n(n-1)).
inline double default_small_pair_budget(const Graph& g, uint32_t k) {
    const double n = g.num_vertices();
    const double m = static_cast<double>(g.num_edges());
    if (n < 2 || m < 1) return 1.0;
    const double p = 2.0 * m / (n * (n - 1.0));
    const double lambda = std::pow(n, static_cast<double>(k)) * std::pow(p, k + 1.0);
    const double v = std::floor(std::exp(lambda) * std::log(n) /
                                (8.0 * (k + 1.0) * (k + 1.0) * std::pow(n, k - 2.0) *
                                 std::pow(p, static_cast<double>(k))));
    return v >= 1.0 ? v : 1.0;
}

namespace detail {

inline std::pair<bool, SmallPairStats> small_pair_with_rows(const Graph& g, const QuerySet& q,
                                                            uint32_t k, double N,
                                                            const std::vector<Dist>& du1,
                                                            const std::vector<Dist>& du2) {
    const double n = g.num_vertices();
    const double avg_deg = n > 0 ? 2.0 * static_cast<double>(g.num_edges()) / n : 0.0;
    SmallPairStats st;
    st.M_threshold = 7.0 * (k + 1.0) * std::pow(avg_deg, static_cast<double>(k)) * N / (n * n);
    for (size_t i = 0; i < q.pairs.size(); ++i) {
        auto [a, b] = q.pairs[i];
        const uint64_t s1 = sum2(du1[a], du2[b]);  // orientation (v1,v2) = (a,b)
        const uint64_t s2 = sum2(du1[b], du2[a]);  // orientation (v1,v2) = (b,a)
        if (std::min(s1, s2) <= k) ++st.cross_count;
        if (k >= 1 && std::min(s1, s2) + 1 <= k) ++st.cond2_violations;
        const bool o1 = s1 <= k && (sat(du1[b]) <= k || sat(du2[a]) <= k);
        const bool o2 = s2 <= k && (sat(du1[a]) <= k || sat(du2[b]) <= k);
        if (o1 || o2) ++st.cond3_violations;
    }
    bool small = static_cast<double>(st.cross_count) <= st.M_threshold &&
                 st.cond2_violations == 0 && st.cond3_violations == 0;
    return {small, st};
}

}  // namespace detail

// N <= 0 selects default_small_pair_budget(g, k).
inline std::pair<bool, SmallPairStats> is_small_pair(const Graph& g, const QuerySet& q,
                                                     Vertex u1, Vertex u2, uint32_t k,
                                                     double N = 0.0) {
    if (k < 1) throw std::invalid_argument("is_small_pair: need k >= 1");
    if (u1 == u2) throw std::invalid_argument("is_small_pair: endpoints equal");
    if (N <= 0.0) N = default_small_pair_budget(g, k);
    auto du1 = bfs_distances(g, u1).dist;
    auto du2 = bfs_distances(g, u2).dist;
    return detail::small_pair_with_rows(g, q, k, N, du1, du2);
}

inline uint64_t default_tau(uint32_t n, uint32_t k) {
    const double t = std::floor(std::pow(static_cast<double>(n), 1.0 / (k + 1.0)) /
                                std::log(static_cast<double>(n)));
    return t >= 1.0 ? static_cast<uint64_t>(t) : 1;
}

// Randomized search: each step samples a pair uniformly from the unconsidered
// vertices, marks both k-balls considered, skips non-small or adjacent (or
// directly queried) samples, and otherwise checks the refined notion plus
// validation. tau = 0 selects floor(n^{1/(k+1)} / ln n). Stops after tau
// steps or when fewer than two unconsidered vertices remain.
inline std::optional<UndetectableCertificate> find_undetectable_randomized(
    const Graph& g, const QuerySet& q, uint32_t k, uint64_t tau, uint64_t seed) {
    if (k < 1) throw std::invalid_argument("find_undetectable_randomized: need k >= 1");
    detail::require_diameter(g, k);
    const uint32_t n = g.num_vertices();
    if (tau == 0) tau = default_tau(n, k);

    std::vector<Vertex> pool(n);
    for (uint32_t v = 0; v < n; ++v) pool[v] = v;
    SplitMix64 rng(seed);
    std::vector<Dist> du1, du2;
    std::vector<Vertex> frontier;
    std::vector<uint32_t> levels(k);
    for (uint32_t l = 0; l < k; ++l) levels[l] = l + 1;

    const double N = default_small_pair_budget(g, k);
    for (uint64_t step = 0; step < tau && pool.size() >= 2; ++step) {
        uint64_t i = rng.next_below(pool.size());
        uint64_t j = rng.next_below(pool.size() - 1);
        if (j >= i) ++j;
        const Vertex u1 = pool[i];
        const Vertex u2 = pool[j];

        bfs_distances_into(g, u1, du1, frontier);
        bfs_distances_into(g, u2, du2, frontier);

        // consider N_k(u1) and N_k(u2): drop them from the pool
        for (size_t t = 0; t < pool.size();) {
            Vertex v = pool[t];
            if (du1[v] <= k || du2[v] <= k) {
                pool[t] = pool.back();
                pool.pop_back();
            } else {
                ++t;
            }
        }

        if (g.has_edge(u1, u2) || q.contains(u1, u2)) continue;
        auto [small, st] = detail::small_pair_with_rows(g, q, k, N, du1, du2);
        if (!small) continue;
        if (detail::refined_detect(q, k, du1, du2)) continue;
        if (!detail::validate_with_rows(q, du1, du2)) continue;

        UndetectableCertificate cert;
        cert.u1 = std::min(u1, u2);
        cert.u2 = std::max(u1, u2);
        cert.notion = CertNotion::Refined;
        cert.levels_checked = levels;
        cert.validated = true;
        return cert;
    }
    return std::nullopt;
}

inline std::optional<UndetectableCertificate> find_undetectable_randomized(
    const Graph& g, const QueryLedger& ledger, uint32_t k, uint64_t tau, uint64_t seed) {
    return find_undetectable_randomized(g, make_query_set(g, ledger), k, tau, seed);
}

struct LowerBound {
    bool applicable = false;  // false: disconnected or diameter < 3
    double value = 0.0;       // ((n choose 2) - m) / ((d-1+eps) * max_deg^{d-2})
    uint64_t ceiling = 0;
};

// Query-count floor from the detectability counting argument: one query can
// detect at most (d-1+eps) * max_deg^{d-2} non-edges. eps is taken on a 1e-9
// grid so the ceiling can be computed in exact integer arithmetic.
inline LowerBound deterministic_lower_bound(const Graph& g, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("deterministic_lower_bound: need eps > 0");
    LowerBound out;
    auto dia = diameter(g);
    if (!dia.has_value() || *dia < 3) return out;
    const uint64_t n = g.num_vertices();
    const uint64_t nonedges = n * (n - 1) / 2 - g.num_edges();
    const uint64_t delta = g.max_degree();
    const uint32_t d = *dia;

    constexpr uint64_t SCALE = 1'000'000'000ull;
    const uint64_t eps_scaled = static_cast<uint64_t>(std::llround(eps * SCALE));
    const __int128 denom_front =
        static_cast<__int128>(d - 1) * SCALE + static_cast<__int128>(eps_scaled);

    // delta^{d-2} with overflow watch; long-double fallback for absurd powers
    __int128 power = 1;
    bool overflow = false;
    for (uint32_t i = 0; i + 2 < d; ++i) {
        constexpr __int128 lim = static_cast<__int128>(1) << 100;
        if (power > lim / delta) {
            overflow = true;
            break;
        }
        power *= delta;
    }
    out.applicable = true;
    if (!overflow) {
        const __int128 num = static_cast<__int128>(nonedges) * SCALE;
        const __int128 den = denom_front * power;
        out.value = static_cast<double>(static_cast<long double>(num) /
                                        static_cast<long double>(den));
        out.ceiling = static_cast<uint64_t>((num + den - 1) / den);
    } else {
        const long double v = static_cast<long double>(nonedges) /
                              ((d - 1 + static_cast<long double>(eps)) *
                               std::pow(static_cast<long double>(delta),
                                        static_cast<long double>(d) - 2.0L));
        out.value = static_cast<double>(v);
        out.ceiling = static_cast<uint64_t>(std::ceil(v));
    }
    return out;
}

enum class BruteforceKind { Unique, Ambiguous, CapExceeded };

struct BruteforceResult {
    BruteforceKind kind = BruteforceKind::CapExceeded;
    std::optional<Graph> witness;  // a differing consistent graph, when Ambiguous
};

namespace detail {

// pair {u,v} (u<v) -> bit position, row-major: (0,1)=0, (0,2)=1, ...
inline uint32_t pair_bit(uint32_t n, Vertex u, Vertex v) {
    return static_cast<uint32_t>(u) * n - u * (u + 1) / 2 + (v - u - 1);
}

// distance between a and b in the graph encoded by mask (n <= 7): mask-BFS
inline Dist mask_distance(const uint32_t* amask, Vertex a, Vertex b) {
    if (a == b) return 0;
    uint32_t reach = 1u << a;
    uint32_t frontier = reach;
    Dist d = 0;
    while (frontier) {
        uint32_t next = 0;
        uint32_t f = frontier;
        while (f) {
            uint32_t v = static_cast<uint32_t>(__builtin_ctz(f));
            f &= f - 1;
            next |= amask[v];
        }
        next &= ~reach;
        if (!next) break;
        ++d;
        if (next & (1u << b)) return d;
        reach |= next;
        frontier = next;
    }
    return Unreachable;
}

}  // namespace detail

// Enumerates all 2^{n(n-1)/2} labeled graphs (n <= 7) and compares against the
// answers. Unique iff g is the only consistent graph; otherwise returns the
// first differing consistent graph as a witness.
inline BruteforceResult bruteforce_is_reconstructible(const Graph& g, const QuerySet& q) {
    const uint32_t n = g.num_vertices();
    BruteforceResult res;
    if (n > 7) return res;  // CapExceeded
    const uint32_t nbits = n * (n - 1) / 2;

    uint32_t gmask = 0;
    for (auto [u, v] : g.edge_list()) gmask |= 1u << detail::pair_bit(n, u, v);

    // adjacency part of consistency collapses to two mask tests
    uint32_t need_set = 0, need_clear = 0;
    std::vector<std::tuple<Vertex, Vertex, Dist>> far_checks;  // answers >= 2 (or INF)
    for (size_t i = 0; i < q.pairs.size(); ++i) {
        auto [a, b] = q.pairs[i];
        const uint32_t bit = 1u << detail::pair_bit(n, a, b);
        if (q.answers[i] == 1)
            need_set |= bit;
        else {
            need_clear |= bit;
            far_checks.emplace_back(a, b, q.answers[i]);
        }
    }

    auto consistent = [&](uint32_t mask) {
        if ((mask & need_set) != need_set || (mask & need_clear) != 0) return false;
        if (far_checks.empty()) return true;
        uint32_t amask[7] = {0, 0, 0, 0, 0, 0, 0};
        uint32_t bits = mask;
        while (bits) {
            uint32_t idx = static_cast<uint32_t>(__builtin_ctz(bits));
            bits &= bits - 1;
            // invert pair_bit: find row u with cumulative range containing idx
            uint32_t u = 0, base = 0;
            while (idx >= base + (n - u - 1)) {
                base += n - u - 1;
                ++u;
            }
            uint32_t v = u + 1 + (idx - base);
            amask[u] |= 1u << v;
            amask[v] |= 1u << u;
        }
        for (auto& [a, b, ans] : far_checks)
            if (detail::mask_distance(amask, a, b) != ans) return false;
        return true;
    };

    if (!consistent(gmask))
        throw std::invalid_argument("bruteforce: answers are inconsistent with g");

    const uint32_t total = 1u << nbits;
    for (uint32_t mask = 0; mask < total; ++mask) {
        if (mask == gmask || !consistent(mask)) continue;
        EdgeList edges;
        for (Vertex u = 0; u < n; ++u)
            for (Vertex v = u + 1; v < n; ++v)
                if (mask & (1u << detail::pair_bit(n, u, v))) edges.emplace_back(u, v);
        res.kind = BruteforceKind::Ambiguous;
        res.witness = build_graph(n, std::move(edges));
        return res;
    }
    res.kind = BruteforceKind::Unique;
    return res;
}

}  // namespace distrec
