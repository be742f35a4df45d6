#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "distrec/certify.hpp"
#include "distrec/gnp.hpp"
#include "distrec/graph.hpp"
#include "distrec/oracle.hpp"
#include "distrec/reconstruct.hpp"
#include "distrec/rng.hpp"

namespace distrec {

// ---------------------------------------------------------------------------
// experiment sweeps
// ---------------------------------------------------------------------------

enum class SweepMode { Adaptive, Nonadaptive, Certify, Bruteforce, Bounds };

inline const char* to_string(SweepMode m) {
    switch (m) {
        case SweepMode::Adaptive: return "adaptive";
        case SweepMode::Nonadaptive: return "nonadaptive";
        case SweepMode::Certify: return "certify";
        case SweepMode::Bruteforce: return "bruteforce";
        case SweepMode::Bounds: return "bounds";
    }
    return "?";
}

inline std::optional<SweepMode> parse_sweep_mode(const std::string& s) {
    if (s == "adaptive") return SweepMode::Adaptive;
    if (s == "nonadaptive") return SweepMode::Nonadaptive;
    if (s == "certify") return SweepMode::Certify;
    if (s == "bruteforce") return SweepMode::Bruteforce;
    if (s == "bounds") return SweepMode::Bounds;
    return std::nullopt;
}

// A grid of (n, p) points: p is either fixed or derived per point as n^-alpha.
// Exactly one of p / alpha must be set.
struct ExperimentSpec {
    SweepMode mode = SweepMode::Adaptive;
    std::vector<uint32_t> n_list;
    std::optional<double> p;
    std::optional<double> alpha;
    uint32_t trials = 1;
    uint64_t base_seed = 1;
    std::optional<uint32_t> k_override;  // skip regime detection when set

    uint32_t M = 4;
    double C = kDefaultC;
    double c_scale = 1.0;
    double eps = kDefaultEps;
    uint64_t tau = 0;  // 0 = the finder's own default
    double delta = kDefaultBoundaryDelta;
};

// One row of the output table. Numeric columns are always populated; rows for
// skipped points (dense/sparse regime, infeasible schedule) carry zeros in the
// columns that have no value, never get dropped, and name the reason in
// status. measured_diameter is 0 when nothing was sampled or the sample is
// disconnected.
struct TrialRecord {
    uint32_t n = 0;
    double p = 0.0;
    double alpha = 0.0;
    uint32_t k = 0;
    uint64_t seed = 0;
    std::string mode;
    std::string status;
    uint64_t queries_used = 0;
    double adaptive_upper = 0.0;
    double adaptive_lower = 0.0;
    double nonadaptive_upper = 0.0;
    double nonadaptive_lower = 0.0;
    uint32_t measured_diameter = 0;
    double runtime_ms = 0.0;

    bool operator==(const TrialRecord&) const = default;
};

inline constexpr char kCsvHeader[] =
    "n,p,alpha,k,seed,mode,status,queries_used,adaptive_upper,adaptive_lower,"
    "nonadaptive_upper,nonadaptive_lower,measured_diameter,runtime_ms";

// The second RNG stream of a trial: landmark/query-set sampling must not share
// a stream with edge sampling, or the landmark choice would correlate with the
// very adjacency bits it is probing.
inline constexpr uint64_t kPlanStream = 0x517cc1b727220a95ull;

namespace detail {

// Exact diameter via level-synchronous closure over row bitsets: B_r holds
// the distance-<=r balls, and one step ORs each vertex's neighbor rows. For
// the diameter-(k+2) graphs the experiments sample this is a handful of
// passes at ~2m*n/64 word-ops each, far below n full BFS runs; memory is
// 2*n^2/8 bytes, which caps the practical range around n ~ 5*10^4 (the
// sweep scales), so larger inputs fall back to BFS per vertex.
inline std::optional<uint32_t> bitset_diameter(const Graph& g) {
    const uint32_t n = g.num_vertices();
    if (n <= 1) return 0;

    const size_t words = (static_cast<size_t>(n) + 63) / 64;
    if (2.0 * static_cast<double>(n) * words * 8.0 > 2.5e9) {
        std::optional<Dist> d = diameter(g);
        if (!d) return std::nullopt;
        return static_cast<uint32_t>(*d);
    }

    std::vector<uint64_t> cur(words * n, 0), next(words * n, 0);
    std::vector<uint8_t> done(n, 0);
    uint32_t remaining = n;
    auto row_full = [&](const uint64_t* row) {
        for (size_t w = 0; w + 1 < words; ++w)
            if (row[w] != ~0ull) return false;
        const uint32_t tail = n - static_cast<uint32_t>((words - 1) * 64);
        const uint64_t mask = tail == 64 ? ~0ull : ((1ull << tail) - 1);
        return (row[words - 1] & mask) == mask;
    };

    for (Vertex u = 0; u < n; ++u) {
        uint64_t* row = cur.data() + static_cast<size_t>(u) * words;
        row[u / 64] |= 1ull << (u % 64);
        for (Vertex w : g.neighbors(u)) row[w / 64] |= 1ull << (w % 64);
        if (row_full(row)) {
            done[u] = 1;
            --remaining;
        }
    }
    if (remaining == 0) return 1;

    for (uint32_t r = 1;; ++r) {
        bool changed = false;
        for (Vertex u = 0; u < n; ++u) {
            uint64_t* dst = next.data() + static_cast<size_t>(u) * words;
            const uint64_t* src = cur.data() + static_cast<size_t>(u) * words;
            std::copy(src, src + words, dst);
            if (done[u]) continue;
            for (Vertex w : g.neighbors(u)) {
                const uint64_t* other = cur.data() + static_cast<size_t>(w) * words;
                for (size_t i = 0; i < words; ++i) dst[i] |= other[i];
            }
            for (size_t i = 0; i < words; ++i)
                if (dst[i] != src[i]) {
                    changed = true;
                    break;
                }
            if (row_full(dst)) {
                done[u] = 1;
                --remaining;
            }
        }
        if (remaining == 0) return r + 1;
        if (!changed) return std::nullopt;  // stable but not full: disconnected
        cur.swap(next);
    }
}

// idx-th pair of [n] choose 2 in ascending (u,v) order; inverse of the row
// layout u*n - u(u+1)/2 + (v-u-1).
inline std::pair<Vertex, Vertex> pair_from_index(uint32_t n, uint64_t idx) {
    const auto base = [&](uint64_t u) { return u * n - u * (u + 1) / 2; };
    const double nd = n;
    double disc = (nd - 0.5) * (nd - 0.5) - 2.0 * static_cast<double>(idx);
    if (disc < 0) disc = 0;
    uint64_t u = static_cast<uint64_t>(
        std::max(0.0, std::floor(nd - 0.5 - std::sqrt(disc))));
    if (u >= n - 1) u = n - 2;
    while (u + 1 < n - 1 && base(u + 1) <= idx) ++u;
    while (u > 0 && base(u) > idx) --u;
    const uint64_t v = u + 1 + (idx - base(u));
    return {static_cast<Vertex>(u), static_cast<Vertex>(v)};
}

// `count` distinct vertex pairs, uniform over [n] choose 2, ascending order.
inline std::vector<std::pair<Vertex, Vertex>> sample_query_pairs(uint32_t n, uint64_t count,
                                                                 uint64_t seed) {
    const uint64_t all = static_cast<uint64_t>(n) * (n - 1) / 2;
    if (count > all) count = all;
    std::vector<std::pair<Vertex, Vertex>> out;
    out.reserve(count);
    if (count == 0) return out;
    // Floyd's sampling keeps memory at O(count) for any domain size
    std::vector<uint64_t> picked;
    picked.reserve(count);
    std::unordered_set<uint64_t> seen;
    seen.reserve(count * 2);
    SplitMix64 rng(seed);
    for (uint64_t j = all - count; j < all; ++j) {
        uint64_t t = rng.next_below(j + 1);
        if (!seen.insert(t).second) {
            t = j;  // j itself cannot have been drawn yet
            seen.insert(t);
        }
        picked.push_back(t);
    }
    std::sort(picked.begin(), picked.end());
    for (uint64_t idx : picked) out.push_back(pair_from_index(n, idx));
    return out;
}

inline void validate_spec(const ExperimentSpec& spec) {
    if (spec.n_list.empty()) throw std::invalid_argument("sweep: empty n list");
    if (spec.trials < 1) throw std::invalid_argument("sweep: trials must be >= 1");
    if (spec.p.has_value() == spec.alpha.has_value())
        throw std::invalid_argument("sweep: set exactly one of p / alpha");
    if (spec.p && !(*spec.p > 0.0 && *spec.p < 1.0))
        throw std::invalid_argument("sweep: need 0 < p < 1");
    if (spec.alpha && !(*spec.alpha > 0.0))
        throw std::invalid_argument("sweep: need alpha > 0");
    if (spec.k_override && *spec.k_override < 1)
        throw std::invalid_argument("sweep: k override must be >= 1");
    if (spec.M < 1) throw std::invalid_argument("sweep: need M >= 1");
    if (!(spec.C > 0.0)) throw std::invalid_argument("sweep: need C > 0");
    if (!(spec.c_scale > 0.0)) throw std::invalid_argument("sweep: need c_scale > 0");
    if (!(spec.eps > 0.0)) throw std::invalid_argument("sweep: need eps > 0");
    if (!(spec.delta >= 0.0)) throw std::invalid_argument("sweep: need delta >= 0");
    for (uint32_t n : spec.n_list)
        if (n < 3) throw std::invalid_argument("sweep: need n >= 3");
}

inline TrialRecord run_trial(const ExperimentSpec& spec, uint32_t n, double p, double alpha,
                             size_t grid, uint32_t trial) {
    TrialRecord rec;
    rec.n = n;
    rec.p = p;
    rec.alpha = alpha;
    rec.seed = derive_seed(spec.base_seed, grid, trial);
    rec.mode = to_string(spec.mode);

    const auto t0 = std::chrono::steady_clock::now();
    const auto finish = [&]() -> TrialRecord& {
        rec.runtime_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        return rec;
    };

    try {
        if (spec.k_override) {
            rec.k = *spec.k_override;
        } else {
            RegimeResult reg = regime_from(n, p, spec.delta);
            if (reg.signal != RegimeSignal::Ok) {
                rec.status = to_string(reg.signal);
                return finish();
            }
            rec.k = reg.params.k;
        }

        const BoundsTable bounds = bounds_table(n, p, rec.k, spec.C, spec.eps);
        rec.adaptive_upper = bounds.adaptive_upper;
        rec.adaptive_lower = bounds.adaptive_lower;
        rec.nonadaptive_upper = bounds.nonadaptive_upper;
        rec.nonadaptive_lower = bounds.nonadaptive_lower;

        if (spec.mode == SweepMode::Bounds) {
            rec.status = "ok";
            return finish();
        }

        const Graph hidden = sample_gnp({n, p, rec.seed});
        rec.measured_diameter = bitset_diameter(hidden).value_or(0);
        const uint64_t plan_seed = rec.seed ^ kPlanStream;

        switch (spec.mode) {
            case SweepMode::Adaptive: {
                LandmarkSchedule sch = build_schedule(n, p, rec.k, spec.C, spec.M, plan_seed);
                if (sch.status != ScheduleStatus::Ok) {
                    rec.status = "schedule_infeasible";
                    break;
                }
                DistanceOracle oracle(hidden);
                ReconstructionReport rep = adaptive_reconstruct(oracle, sch);
                rec.queries_used = rep.queries_used;
                rec.status = rep.status == ReconStatus::Success
                                 ? (*rep.graph == hidden ? "exact" : "inexact")
                                 : to_string(rep.status);
                break;
            }
            case SweepMode::Nonadaptive: {
                NonadaptivePlan plan =
                    nonadaptive_queryset(n, p, rec.k, spec.c_scale, plan_seed);
                DistanceOracle oracle(hidden);
                ReconstructionReport rep = nonadaptive_reconstruct(oracle, plan);
                rec.queries_used = rep.queries_used;
                rec.status = rep.status == ReconStatus::Success
                                 ? (*rep.graph == hidden ? "exact" : "inexact")
                                 : to_string(rep.status);
                break;
            }
            case SweepMode::Certify:
            case SweepMode::Bruteforce: {
                // the query set: c_scale times the adaptive lower bound,
                // sampled uniformly from all pairs
                const uint64_t want = static_cast<uint64_t>(
                    std::max(1.0, std::floor(spec.c_scale * rec.adaptive_lower)));
                auto pairs = sample_query_pairs(n, want, plan_seed);
                DistanceOracle oracle(hidden);
                oracle.query_batch(pairs);
                rec.queries_used = oracle.count();
                QuerySet q = make_query_set(hidden, oracle.ledger());
                if (spec.mode == SweepMode::Bruteforce) {
                    BruteforceResult res = bruteforce_is_reconstructible(hidden, q);
                    switch (res.kind) {
                        case BruteforceKind::Unique: rec.status = "unique"; break;
                        case BruteforceKind::Ambiguous: rec.status = "ambiguous"; break;
                        case BruteforceKind::CapExceeded: rec.status = "cap_exceeded"; break;
                    }
                } else {
                    try {
                        auto cert = find_undetectable_randomized(hidden, q, rec.k, spec.tau,
                                                                 plan_seed);
                        rec.status = cert ? "certificate_found" : "no_certificate";
                    } catch (const DiameterMismatchError&) {
                        rec.status = "diameter_mismatch";
                    }
                }
                break;
            }
            case SweepMode::Bounds: break;  // handled above
        }
    } catch (const std::exception&) {
        // a trial must never take down the sweep; the row says what happened
        rec.status = "error";
    }
    return finish();
}

}  // namespace detail

// Runs the whole grid. Records appear in (grid point, trial) order; every
// point emits exactly `trials` rows, including skipped ones. Child seeds come
// from derive_seed(base_seed, grid_index, trial), so any row can be re-run in
// isolation from its (mode, n, p, seed, constants) columns alone.
inline std::vector<TrialRecord> run_sweep(const ExperimentSpec& spec) {
    detail::validate_spec(spec);
    std::vector<TrialRecord> out;
    out.reserve(spec.n_list.size() * spec.trials);
    for (size_t gi = 0; gi < spec.n_list.size(); ++gi) {
        const uint32_t n = spec.n_list[gi];
        const double p =
            spec.p ? *spec.p : std::pow(static_cast<double>(n), -*spec.alpha);
        if (!(p > 0.0 && p < 1.0))
            throw std::invalid_argument("sweep: derived p leaves (0, 1)");
        const double alpha =
            spec.alpha ? *spec.alpha
                       : -std::log(p) / std::log(static_cast<double>(n));
        for (uint32_t t = 0; t < spec.trials; ++t)
            out.push_back(detail::run_trial(spec, n, p, alpha, gi, t));
    }
    return out;
}

// ---------------------------------------------------------------------------
// scaling fits
// ---------------------------------------------------------------------------

struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;  // of ln q against ln n
    double r_squared = 0.0;
};

// Least squares in ln-ln space: q ~ e^intercept * n^slope.
inline ScalingFit fit_scaling_exponent(const std::vector<std::pair<double, double>>& points) {
    std::vector<double> xs, ys;
    for (auto [n, q] : points) {
        if (!(n > 0.0)) throw std::invalid_argument("fit: n must be positive");
        if (!(q > 0.0)) throw std::invalid_argument("fit: q must be positive");
        xs.push_back(std::log(n));
        ys.push_back(std::log(q));
    }
    std::vector<double> distinct = xs;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 2)
        throw InsufficientData("fit: need at least two distinct n values");

    const double m = static_cast<double>(xs.size());
    double sx = 0, sy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    ScalingFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (syy <= 0.0) {
        fit.r_squared = 1.0;  // all residuals are zero for a flat exact fit
    } else {
        double ssres = 0;
        for (size_t i = 0; i < xs.size(); ++i) {
            const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
            ssres += e * e;
        }
        fit.r_squared = 1.0 - ssres / syy;
    }
    return fit;
}

// ---------------------------------------------------------------------------
// record serialization
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline void write_records_csv(const std::vector<TrialRecord>& recs, std::ostream& os) {
    os << kCsvHeader << '\n';
    for (const TrialRecord& r : recs) {
        os << r.n << ',' << detail::fmt_double(r.p) << ',' << detail::fmt_double(r.alpha)
           << ',' << r.k << ',' << r.seed << ',' << r.mode << ',' << r.status << ','
           << r.queries_used << ',' << detail::fmt_double(r.adaptive_upper) << ','
           << detail::fmt_double(r.adaptive_lower) << ','
           << detail::fmt_double(r.nonadaptive_upper) << ','
           << detail::fmt_double(r.nonadaptive_lower) << ',' << r.measured_diameter << ','
           << detail::fmt_double(r.runtime_ms) << '\n';
    }
    if (!os) throw std::runtime_error("csv write failed");
}

inline std::vector<TrialRecord> read_records_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw std::runtime_error("csv: unexpected header");

    std::vector<TrialRecord> out;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        size_t start = 0;
        for (size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                f.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (f.size() != 14) throw std::runtime_error("csv: bad field count");
        TrialRecord r;
        r.n = static_cast<uint32_t>(std::stoul(f[0]));
        r.p = std::stod(f[1]);
        r.alpha = std::stod(f[2]);
        r.k = static_cast<uint32_t>(std::stoul(f[3]));
        r.seed = std::stoull(f[4]);
        r.mode = f[5];
        r.status = f[6];
        r.queries_used = std::stoull(f[7]);
        r.adaptive_upper = std::stod(f[8]);
        r.adaptive_lower = std::stod(f[9]);
        r.nonadaptive_upper = std::stod(f[10]);
        r.nonadaptive_lower = std::stod(f[11]);
        r.measured_diameter = static_cast<uint32_t>(std::stoul(f[12]));
        r.runtime_ms = std::stod(f[13]);
        out.push_back(std::move(r));
    }
    return out;
}

// Flat JSON array mirroring the CSV columns; %.17g doubles survive re-parsing.
inline void write_records_json(const std::vector<TrialRecord>& recs, std::ostream& os) {
    os << "[\n";
    for (size_t i = 0; i < recs.size(); ++i) {
        const TrialRecord& r = recs[i];
        os << "  {\"n\": " << r.n << ", \"p\": " << detail::fmt_double(r.p)
           << ", \"alpha\": " << detail::fmt_double(r.alpha) << ", \"k\": " << r.k
           << ", \"seed\": " << r.seed << ", \"mode\": \"" << r.mode << "\""
           << ", \"status\": \"" << r.status << "\""
           << ", \"queries_used\": " << r.queries_used
           << ", \"adaptive_upper\": " << detail::fmt_double(r.adaptive_upper)
           << ", \"adaptive_lower\": " << detail::fmt_double(r.adaptive_lower)
           << ", \"nonadaptive_upper\": " << detail::fmt_double(r.nonadaptive_upper)
           << ", \"nonadaptive_lower\": " << detail::fmt_double(r.nonadaptive_lower)
           << ", \"measured_diameter\": " << r.measured_diameter
           << ", \"runtime_ms\": " << detail::fmt_double(r.runtime_ms) << "}"
           << (i + 1 < recs.size() ? ",\n" : "\n");
    }
    os << "]\n";
    if (!os) throw std::runtime_error("json write failed");
}

}  // namespace distrec
