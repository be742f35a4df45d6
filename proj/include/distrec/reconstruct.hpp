#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "distrec/graph.hpp"
#include "distrec/oracle.hpp"
#include "distrec/rng.hpp"

namespace distrec {

// ---------------------------------------------------------------------------
// pair classification
// ---------------------------------------------------------------------------

enum class PairVerdict { NonAdjacent, NoEvidence };

struct PairEvidence {
    PairVerdict verdict = PairVerdict::NoEvidence;
    std::optional<Vertex> witness;  // landmark that produced the gap, when known
};

// A landmark whose two answers differ by >= 2 proves non-adjacency (adjacent
// endpoints can differ by at most 1 by the triangle inequality). A finite
// distance against an unreachable one is an infinite gap; two unreachable
// answers say nothing.
inline PairEvidence classify_pair(Dist d1, Dist d2) {
    const bool f1 = dist_finite(d1), f2 = dist_finite(d2);
    if (f1 != f2) return {PairVerdict::NonAdjacent, std::nullopt};
    if (!f1) return {PairVerdict::NoEvidence, std::nullopt};
    const uint64_t gap = d1 > d2 ? uint64_t{d1} - d2 : uint64_t{d2} - d1;
    return {gap >= 2 ? PairVerdict::NonAdjacent : PairVerdict::NoEvidence, std::nullopt};
}

// Same rule, remembering which landmark produced the evidence.
inline PairEvidence classify_pair(Dist d1, Dist d2, Vertex x) {
    PairEvidence e = classify_pair(d1, d2);
    if (e.verdict == PairVerdict::NonAdjacent) e.witness = x;
    return e;
}

// ---------------------------------------------------------------------------
// landmark schedule
// ---------------------------------------------------------------------------

enum class ScheduleStatus { Ok, ScheduleInfeasible };

// The landmark set X in sampling order, cut into consecutive parts. The first
// part is deliberately front-loaded: it is sized so that a vertex queried
// against all of it accumulates about 2(ln n + 1/4) non-adjacency witnesses
// per non-edge, which is what drives exact reconstruction. The remaining
// nu-1 parts are small top-up pools that only chase coverage stragglers.
// A balanced nu-way split of the same formula-sized X does not fit inside n
// in the regimes of interest, and querying all of X x X up front would blow
// the query budget, hence this shape.
struct LandmarkSchedule {
    ScheduleStatus status = ScheduleStatus::ScheduleInfeasible;
    uint32_t n = 0;
    double p = 0.0;
    uint32_t k = 0;
    double C = 0.0;
    uint32_t M = 0;
    uint64_t seed = 0;

    uint64_t s = 0;    // balanced part size floor(C / (2 n^{k-1} p^k)), >= 1
    uint32_t nu = 0;   // ceil(log2 n)
    double lambda = 0.0;  // n^k p^{k+1}
    double rate = 0.0;    // n^{k-1} p^k: per-landmark chance of landing a k-ball

    bool degenerate = false;             // landmarks cannot fit: query every pair
    std::vector<Vertex> X;               // sampling order; parts are consecutive slices
    std::vector<uint32_t> part_sizes;    // front part first, then top-up parts
    uint64_t budget = 0;                 // query cap floor(C / (n^{k-2} p^k))
};

inline LandmarkSchedule build_schedule(uint32_t n, double p, uint32_t k, double C,
                                       uint32_t M, uint64_t seed) {
    if (n < 2) throw std::invalid_argument("build_schedule: need n >= 2");
    if (!(p > 0.0) || !(p < 1.0)) throw std::invalid_argument("build_schedule: need 0 < p < 1");
    if (k < 1) throw std::invalid_argument("build_schedule: need k >= 1");
    if (!(C > 0.0)) throw std::invalid_argument("build_schedule: need C > 0");
    if (M < 1) throw std::invalid_argument("build_schedule: need M >= 1");

    LandmarkSchedule sch;
    sch.n = n;
    sch.p = p;
    sch.k = k;
    sch.C = C;
    sch.M = M;
    sch.seed = seed;

    // the 1e-9 snaps keep ratios that are exact in real arithmetic, like
    // 16/(2*0.005), from landing one ulp below the integer
    const double nd = n;
    sch.rate = std::pow(nd, static_cast<double>(k) - 1.0) * std::pow(p, static_cast<double>(k));
    sch.lambda = std::pow(nd, static_cast<double>(k)) * std::pow(p, k + 1.0);
    const double s_f = std::max(1.0, std::floor(C / (2.0 * sch.rate) + 1e-9));
    sch.s = s_f >= 18e18 ? ~0ull : static_cast<uint64_t>(s_f);
    sch.nu = static_cast<uint32_t>(std::ceil(std::log2(nd)));

    if (!(s_f < nd)) return sch;  // ScheduleInfeasible: even one part swallows [n]

    const double budget_f = std::floor(C * nd / sch.rate + 1e-9);
    sch.budget = budget_f >= 18e18 ? ~0ull : static_cast<uint64_t>(budget_f);
    sch.status = ScheduleStatus::Ok;

    // front part: enough landmarks for ~2(ln n + 1/4) expected witnesses per pair
    const double front_f =
        std::max(static_cast<double>(sch.s),
                 std::ceil(std::exp(sch.lambda) * (std::log(nd) + 0.25) / sch.rate - 1e-9));
    const uint64_t cap = 3ull * n / 4;
    if (!(front_f <= static_cast<double>(cap))) {
        // the witness arithmetic cannot work at this size: query every pair
        sch.degenerate = true;
        sch.X.resize(n);
        for (Vertex v = 0; v < n; ++v) sch.X[v] = v;
        sch.part_sizes = {n};
        sch.budget = static_cast<uint64_t>(n) * (n - 1) / 2;
        return sch;
    }

    const uint32_t front = static_cast<uint32_t>(front_f);
    sch.part_sizes = {front};
    if (sch.nu >= 2) {
        const uint32_t rest = sch.nu - 1;
        const uint64_t want = static_cast<uint64_t>(std::ceil(8.0 / (rest * sch.rate) - 1e-9));
        const uint64_t room = (cap - front) / rest;
        const uint32_t s2 = static_cast<uint32_t>(std::min<uint64_t>(want, room));
        if (s2 > 0) sch.part_sizes.insert(sch.part_sizes.end(), rest, s2);
    }
    uint64_t total = 0;
    for (uint32_t sz : sch.part_sizes) total += sz;
    sch.X = sample_distinct(n, static_cast<uint32_t>(total), seed);
    return sch;
}

// ---------------------------------------------------------------------------
// reconstruction reports
// ---------------------------------------------------------------------------

enum class ReconStatus { Success, CoverageFailure, QueryBudgetExceeded, Mismatch };

inline const char* to_string(ReconStatus s) {
    switch (s) {
        case ReconStatus::Success: return "success";
        case ReconStatus::CoverageFailure: return "coverage_failure";
        case ReconStatus::QueryBudgetExceeded: return "query_budget_exceeded";
        case ReconStatus::Mismatch: return "mismatch";
    }
    return "?";
}

struct ReconstructionReport {
    ReconStatus status = ReconStatus::Success;
    std::optional<Graph> graph;      // present on Success (and Mismatch, for inspection)
    uint32_t rounds_used = 0;
    uint64_t queries_used = 0;
    std::vector<uint64_t> coverage_per_round;        // |V_1|, |V_2|, ...
    std::vector<Vertex> uncovered;                   // on CoverageFailure
    uint64_t replay_mismatches = 0;                  // answers the output fails to reproduce
    std::optional<std::pair<Vertex, Vertex>> mismatch_pair;  // first offender
};

namespace detail {

// Distances are cached as one byte: 255 = unreachable, otherwise min(d, 250).
// Values >= 250 collapse, which only matters for graphs of diameter >= 250;
// the gap rule stays sound (a claimed witness is always a real one).
inline constexpr uint8_t kCapUnreachable = 255;
inline constexpr uint8_t kCapFinite = 250;

inline uint8_t cap8(Dist d) {
    if (!dist_finite(d)) return kCapUnreachable;
    return static_cast<uint8_t>(std::min<Dist>(d, kCapFinite));
}

inline bool cap8_witness(uint8_t a, uint8_t b) {
    const bool f1 = a != kCapUnreachable, f2 = b != kCapUnreachable;
    if (f1 != f2) return true;
    if (!f1) return false;
    return (a > b ? a - b : b - a) >= 2;
}

// Per-vertex landmark bitmasks, indexed by position in X. For level j,
// near_j[v] has bit x set when d(X[x], v) == j was queried, and far_j[v] when
// d >= j+2 (or unreachable) was queried. A witness for {u, v} at level j is a
// set bit in near_j[u] & far_j[v] or near_j[v] & far_j[u]; because bits exist
// only for queried pairs, the AND restricts to landmarks both endpoints saw.
struct WitnessMasks {
    uint32_t n = 0;
    uint32_t levels = 0;
    size_t words = 0;
    std::vector<uint64_t> near, far;  // [j-1][v] blocks, each `words` long

    WitnessMasks(uint32_t n_, uint32_t positions, uint32_t levels_)
        : n(n_), levels(levels_), words((positions + 63) / 64) {
        near.assign(static_cast<size_t>(levels) * n * words, 0);
        far.assign(static_cast<size_t>(levels) * n * words, 0);
    }
    size_t block(uint32_t j, Vertex v) const {
        return (static_cast<size_t>(j - 1) * n + v) * words;
    }
    void add(Vertex v, uint32_t pos, uint8_t d8) {
        const uint64_t bit = 1ull << (pos & 63);
        const size_t word = pos >> 6;
        for (uint32_t j = 1; j <= levels; ++j) {
            if (d8 == j) near[block(j, v) + word] |= bit;
            if (d8 >= j + 2) far[block(j, v) + word] |= bit;  // 255 counts as far
        }
    }
    bool has_witness(Vertex u, Vertex v) const {
        for (uint32_t j = 1; j <= levels; ++j) {
            const uint64_t* nu_ = &near[block(j, u)];
            const uint64_t* fu = &far[block(j, u)];
            const uint64_t* nv = &near[block(j, v)];
            const uint64_t* fv = &far[block(j, v)];
            for (size_t w = 0; w < words; ++w)
                if ((nu_[w] & fv[w]) | (nv[w] & fu[w])) return true;
        }
        return false;
    }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// adaptive reconstruction
// ---------------------------------------------------------------------------

// Runs the landmark procedure against a fresh oracle:
//   phase 0  queries all pairs inside the front part;
//   round 1  queries the front part against every other vertex;
//   round i>1 activates the next top-up part against the still-uncovered
//            non-landmark vertices, until every vertex has >= M activated
//            landmarks within distance k (its cover round) or parts run out.
// Adjacency: queried pairs by d == 1; everything else defaults to an edge
// unless some landmark queried against both endpoints shows a gap >= 2.
// After building the output the ledger is replayed against it; disagreements
// are counted in replay_mismatches (the status stays Success — at these sizes
// a handful of missed witnesses is the expected failure mode, and the caller
// compares against the hidden graph anyway).
inline ReconstructionReport adaptive_reconstruct(DistanceOracle& oracle,
                                                 const LandmarkSchedule& sch) {
    if (sch.status != ScheduleStatus::Ok)
        throw std::invalid_argument("adaptive_reconstruct: infeasible schedule");
    const uint32_t n = sch.n;
    if (oracle.num_vertices() != n)
        throw std::invalid_argument("adaptive_reconstruct: oracle range mismatch");
    if (oracle.count() != 0)
        throw std::invalid_argument("adaptive_reconstruct: oracle already queried");

    ReconstructionReport rep;

    if (sch.degenerate) {
        EdgeList edges;
        std::vector<Vertex> targets;
        for (Vertex u = 0; u + 1 < n; ++u) {
            targets.resize(n - 1 - u);
            for (Vertex v = u + 1; v < n; ++v) targets[v - u - 1] = v;
            auto row = oracle.query_row(u, targets);
            for (size_t i = 0; i < targets.size(); ++i)
                if (row[i] == 1) edges.emplace_back(u, targets[i]);
        }
        rep.graph = build_graph(n, std::move(edges));
        rep.queries_used = oracle.count();
        return rep;
    }

    const uint32_t xsize = static_cast<uint32_t>(sch.X.size());
    const uint32_t front = sch.part_sizes[0];

    std::vector<uint32_t> pos_in_x(n, ~0u);
    for (uint32_t i = 0; i < xsize; ++i) pos_in_x[sch.X[i]] = i;

    // one byte per (landmark, vertex); only ledger-confirmed entries are read
    std::vector<uint8_t> cache(static_cast<size_t>(xsize) * n);
    std::vector<uint8_t> cover_cnt(n, 0);
    std::vector<uint32_t> cover_round(n, 0);  // 0 = not yet; landmarks stay 0
    uint8_t maxd8 = 0;

    const QueryLedger& ledger = oracle.ledger();
    std::vector<Vertex> targets;
    targets.reserve(n);

    auto run_row = [&](uint32_t ix) -> bool {  // false: budget refused the row
        if (targets.empty()) return true;
        if (oracle.count() + targets.size() > sch.budget) return false;
        const Vertex x = sch.X[ix];
        auto row = oracle.query_row(x, targets);
        uint8_t* line = cache.data() + static_cast<size_t>(ix) * n;
        for (size_t t = 0; t < targets.size(); ++t) {
            const Vertex v = targets[t];
            const uint8_t d8 = detail::cap8(row[t]);
            line[v] = d8;
            if (d8 != detail::kCapUnreachable && d8 > maxd8) maxd8 = d8;
            const uint32_t pv = pos_in_x[v];
            if (pv != ~0u) cache[static_cast<size_t>(pv) * n + x] = d8;
            if (row[t] <= sch.k && cover_cnt[v] < 255) ++cover_cnt[v];
        }
        return true;
    };

    auto budget_exceeded = [&]() {
        rep.status = ReconStatus::QueryBudgetExceeded;
        rep.queries_used = oracle.count();
        return rep;
    };

    // phase 0 + round 1, merged per landmark: one BFS covers both target sets
    for (uint32_t i = 0; i < front; ++i) {
        targets.clear();
        for (uint32_t j = i + 1; j < front; ++j) targets.push_back(sch.X[j]);
        for (Vertex v = 0; v < n; ++v)
            if (pos_in_x[v] == ~0u || pos_in_x[v] >= front) targets.push_back(v);
        if (!run_row(i)) return budget_exceeded();
    }
    rep.rounds_used = 1;
    uint64_t covered_now = 0;
    std::vector<Vertex> uncovered;
    for (Vertex v = 0; v < n; ++v) {
        if (pos_in_x[v] != ~0u) continue;
        if (cover_cnt[v] >= sch.M) {
            cover_round[v] = 1;
            ++covered_now;
        } else {
            uncovered.push_back(v);
        }
    }
    rep.coverage_per_round.push_back(covered_now);

    // top-up rounds
    uint32_t part_base = front;
    for (size_t part = 1; part < sch.part_sizes.size() && !uncovered.empty(); ++part) {
        const uint32_t round = static_cast<uint32_t>(part) + 1;
        const uint32_t sz = sch.part_sizes[part];
        targets = uncovered;
        for (uint32_t i = 0; i < sz; ++i)
            if (!run_row(part_base + i)) return budget_exceeded();
        part_base += sz;
        rep.rounds_used = round;
        covered_now = 0;
        std::vector<Vertex> still;
        for (Vertex v : uncovered) {
            if (cover_cnt[v] >= sch.M) {
                cover_round[v] = round;
                ++covered_now;
            } else {
                still.push_back(v);
            }
        }
        rep.coverage_per_round.push_back(covered_now);
        uncovered = std::move(still);
    }
    if (!uncovered.empty()) {
        rep.status = ReconStatus::CoverageFailure;
        rep.uncovered = std::move(uncovered);
        rep.queries_used = oracle.count();
        return rep;
    }
    const uint32_t activated = part_base;

    // adjacency decisions
    const uint32_t levels =
        std::max<uint32_t>(sch.k, maxd8 >= 3 ? static_cast<uint32_t>(maxd8) - 2 : 1);
    const size_t words = (activated + 63) / 64;
    const double mask_bytes = 2.0 * levels * static_cast<double>(n) * words * 8.0;
    const bool use_masks = levels <= 12 && mask_bytes <= 1.6e9;

    EdgeList edges;
    edges.reserve(static_cast<size_t>(sch.p * n * (n - 1) / 2 * 1.1) + 64);

    if (use_masks) {
        detail::WitnessMasks masks(n, activated, levels);
        for (uint32_t ix = 0; ix < activated; ++ix) {
            const Vertex x = sch.X[ix];
            const uint8_t* line = cache.data() + static_cast<size_t>(ix) * n;
            for (Vertex v = 0; v < n; ++v)
                if (v != x && ledger.contains(x, v)) masks.add(v, ix, line[v]);
        }
        for (Vertex u = 0; u < n; ++u) {
            for (Vertex v = u + 1; v < n; ++v) {
                if (ledger.contains(u, v)) {
                    const uint32_t pu = pos_in_x[u], pv = pos_in_x[v];
                    const uint32_t p_ = std::min(pu, pv);
                    const uint8_t d8 = p_ == pu ? cache[static_cast<size_t>(pu) * n + v]
                                                : cache[static_cast<size_t>(pv) * n + u];
                    if (d8 == 1) edges.emplace_back(u, v);
                } else if (!masks.has_witness(u, v)) {
                    edges.emplace_back(u, v);
                }
            }
        }
    } else {
        // rare shape (very large diameter or landmark count): per-pair scan
        for (Vertex u = 0; u < n; ++u) {
            for (Vertex v = u + 1; v < n; ++v) {
                if (ledger.contains(u, v)) {
                    const uint32_t pu = pos_in_x[u], pv = pos_in_x[v];
                    const uint32_t p_ = std::min(pu, pv);
                    const uint8_t d8 = p_ == pu ? cache[static_cast<size_t>(pu) * n + v]
                                                : cache[static_cast<size_t>(pv) * n + u];
                    if (d8 == 1) edges.emplace_back(u, v);
                    continue;
                }
                bool witness = false;
                for (uint32_t ix = 0; ix < activated && !witness; ++ix) {
                    const Vertex x = sch.X[ix];
                    if (x == u || x == v) continue;
                    if (!ledger.contains(x, u) || !ledger.contains(x, v)) continue;
                    witness = detail::cap8_witness(cache[static_cast<size_t>(ix) * n + u],
                                                   cache[static_cast<size_t>(ix) * n + v]);
                }
                if (!witness) edges.emplace_back(u, v);
            }
        }
    }

    Graph out = build_graph(n, std::move(edges));

    // replay the ledger against the output
    std::vector<Dist> dist;
    std::vector<Vertex> frontier;
    for (uint32_t ix = 0; ix < activated; ++ix) {
        const Vertex x = sch.X[ix];
        bfs_distances_into(out, x, dist, frontier);
        const uint8_t* line = cache.data() + static_cast<size_t>(ix) * n;
        for (Vertex v = 0; v < n; ++v) {
            if (v == x || !ledger.contains(x, v)) continue;
            if (detail::cap8(dist[v]) != line[v]) {
                ++rep.replay_mismatches;
                if (!rep.mismatch_pair)
                    rep.mismatch_pair = {std::min(x, v), std::max(x, v)};
            }
        }
    }

    rep.graph = std::move(out);
    rep.queries_used = oracle.count();
    return rep;
}

// ---------------------------------------------------------------------------
// non-adaptive reconstruction
// ---------------------------------------------------------------------------

// X plus the implied query set Q = X x ([n] \ X)  union  (X choose 2);
// |Q| = |X|(n - |X|) + |X|(|X| - 1)/2.
struct NonadaptivePlan {
    uint32_t n = 0;
    uint32_t k = 0;
    double c_scale = 1.0;
    uint64_t seed = 0;
    double lambda = 0.0;
    std::vector<Vertex> X;
    bool clamped = false;  // the size formula left [1, n/2]
    uint64_t q_count = 0;
};

namespace detail {

inline uint64_t nonadaptive_q_count(uint32_t n, uint64_t xs) {
    return xs * (n - xs) + xs * (xs - 1) / 2;
}

}  // namespace detail

// |X| = floor(c_scale * 3 e^lambda ln n / (n^{k-1} p^k)), clamped to [1, n/2].
inline NonadaptivePlan nonadaptive_queryset(uint32_t n, double p, uint32_t k, double c_scale,
                                            uint64_t seed) {
    if (n < 2) throw std::invalid_argument("nonadaptive_queryset: need n >= 2");
    if (!(p > 0.0) || !(p < 1.0))
        throw std::invalid_argument("nonadaptive_queryset: need 0 < p < 1");
    if (k < 1) throw std::invalid_argument("nonadaptive_queryset: need k >= 1");
    if (!(c_scale > 0.0)) throw std::invalid_argument("nonadaptive_queryset: need c_scale > 0");

    NonadaptivePlan plan;
    plan.n = n;
    plan.k = k;
    plan.c_scale = c_scale;
    plan.seed = seed;
    const double nd = n;
    plan.lambda = std::pow(nd, static_cast<double>(k)) * std::pow(p, k + 1.0);
    const double rate =
        std::pow(nd, static_cast<double>(k) - 1.0) * std::pow(p, static_cast<double>(k));
    const double raw =
        std::floor(c_scale * 3.0 * std::exp(plan.lambda) * std::log(nd) / rate + 1e-9);

    uint64_t xs;
    const uint64_t half = n / 2;
    if (!(raw >= 1.0)) {
        xs = 1;
        plan.clamped = true;
    } else if (raw > static_cast<double>(half)) {
        xs = half;
        plan.clamped = true;
    } else {
        xs = static_cast<uint64_t>(raw);
    }
    plan.X = sample_distinct(n, static_cast<uint32_t>(xs), seed);
    plan.q_count = detail::nonadaptive_q_count(n, xs);
    return plan;
}

// The same plan around a hand-picked landmark set.
inline NonadaptivePlan plan_from_landmarks(uint32_t n, std::vector<Vertex> X, uint32_t k) {
    if (k < 1) throw std::invalid_argument("plan_from_landmarks: need k >= 1");
    if (X.empty() || X.size() > n) throw std::invalid_argument("plan_from_landmarks: bad |X|");
    std::vector<bool> seen(n, false);
    for (Vertex x : X) {
        if (x >= n) throw std::invalid_argument("plan_from_landmarks: vertex out of range");
        if (seen[x]) throw std::invalid_argument("plan_from_landmarks: duplicate landmark");
        seen[x] = true;
    }
    NonadaptivePlan plan;
    plan.n = n;
    plan.k = k;
    plan.q_count = detail::nonadaptive_q_count(n, X.size());
    plan.X = std::move(X);
    return plan;
}

// Queries exactly Q, then decides: queried pairs by d == 1; a pair outside Q
// is a non-edge iff some landmark saw one endpoint within k and the other at
// least 2 further, else it defaults to an edge. Success requires the output
// to reproduce every queried answer (re-BFS over X); the first disagreement
// flips the status to Mismatch and is reported.
inline ReconstructionReport nonadaptive_reconstruct(DistanceOracle& oracle,
                                                    const NonadaptivePlan& plan) {
    const uint32_t n = plan.n;
    if (oracle.num_vertices() != n)
        throw std::invalid_argument("nonadaptive_reconstruct: oracle range mismatch");
    if (oracle.count() != 0)
        throw std::invalid_argument("nonadaptive_reconstruct: oracle already queried");
    if (plan.k > 200) throw std::invalid_argument("nonadaptive_reconstruct: k too large");

    const uint32_t xsize = static_cast<uint32_t>(plan.X.size());
    std::vector<uint32_t> pos_in_x(n, ~0u);
    for (uint32_t i = 0; i < xsize; ++i) pos_in_x[plan.X[i]] = i;

    std::vector<uint8_t> cache(static_cast<size_t>(xsize) * n);
    const QueryLedger& ledger = oracle.ledger();

    std::vector<Vertex> targets;
    targets.reserve(n);
    for (uint32_t ix = 0; ix < xsize; ++ix) {
        const Vertex x = plan.X[ix];
        targets.clear();
        for (Vertex v = 0; v < n; ++v) {
            if (v == x) continue;
            const uint32_t pv = pos_in_x[v];
            if (pv == ~0u || pv > ix) targets.push_back(v);
        }
        if (targets.empty()) continue;
        auto row = oracle.query_row(x, targets);
        uint8_t* line = cache.data() + static_cast<size_t>(ix) * n;
        for (size_t t = 0; t < targets.size(); ++t) {
            const Vertex v = targets[t];
            const uint8_t d8 = detail::cap8(row[t]);
            line[v] = d8;
            const uint32_t pv = pos_in_x[v];
            if (pv != ~0u) cache[static_cast<size_t>(pv) * n + x] = d8;
        }
    }

    ReconstructionReport rep;
    rep.rounds_used = 1;
    rep.queries_used = oracle.count();

    // witness masks for levels 1..k (a pair is witnessed only when min(d1, d2) <= k)
    detail::WitnessMasks masks(n, xsize, plan.k);
    for (uint32_t ix = 0; ix < xsize; ++ix) {
        const Vertex x = plan.X[ix];
        const uint8_t* line = cache.data() + static_cast<size_t>(ix) * n;
        for (Vertex v = 0; v < n; ++v)
            if (v != x && ledger.contains(x, v)) masks.add(v, ix, line[v]);
    }

    EdgeList edges;
    for (Vertex u = 0; u < n; ++u) {
        for (Vertex v = u + 1; v < n; ++v) {
            if (ledger.contains(u, v)) {
                const uint32_t pu = pos_in_x[u], pv = pos_in_x[v];
                const uint8_t d8 = pu != ~0u ? cache[static_cast<size_t>(pu) * n + v]
                                             : cache[static_cast<size_t>(pv) * n + u];
                if (d8 == 1) edges.emplace_back(u, v);
            } else if (!masks.has_witness(u, v)) {
                edges.emplace_back(u, v);
            }
        }
    }
    Graph out = build_graph(n, std::move(edges));

    // self-consistency: the output must reproduce every queried answer
    std::vector<Dist> dist;
    std::vector<Vertex> frontier;
    for (uint32_t ix = 0; ix < xsize; ++ix) {
        const Vertex x = plan.X[ix];
        bfs_distances_into(out, x, dist, frontier);
        const uint8_t* line = cache.data() + static_cast<size_t>(ix) * n;
        for (Vertex v = 0; v < n; ++v) {
            if (v == x || !ledger.contains(x, v)) continue;
            if (detail::cap8(dist[v]) != line[v]) {
                ++rep.replay_mismatches;
                if (!rep.mismatch_pair)
                    rep.mismatch_pair = {std::min(x, v), std::max(x, v)};
            }
        }
    }
    if (rep.replay_mismatches > 0) rep.status = ReconStatus::Mismatch;
    rep.graph = std::move(out);
    return rep;
}

}  // namespace distrec
