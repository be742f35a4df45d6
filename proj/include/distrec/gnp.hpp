#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "distrec/graph.hpp"
#include "distrec/rng.hpp"

namespace distrec {

struct GnpParams {
    uint32_t n = 1;
    double p = 0.0;
    uint64_t seed = 0;
};

// G(n,p) sampler. Draw t for pair #t (row-major: (0,1),(0,2),...,(1,2),...)
// is SplitMix64 stream element t of the given seed; the pair is an edge iff
// draw < floor(p * 2^64). Counter-indexed draws make the stream independently
// recomputable per pair, which the tests exploit as a cross-check.
inline Graph sample_gnp(const GnpParams& params) {
    const uint32_t n = params.n;
    const double p = params.p;
    if (n < 1) throw std::invalid_argument("sample_gnp: n must be >= 1");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("sample_gnp: p outside [0,1]");

    EdgeList edges;
    if (p > 0.0) {
        const long double scaled = static_cast<long double>(p) * 18446744073709551616.0L;
        const uint64_t threshold =
            scaled >= 18446744073709551615.0L ? ~0ull : static_cast<uint64_t>(scaled);
        const double mean = 0.5 * static_cast<double>(n) * (n - 1) * p;
        edges.reserve(static_cast<size_t>(mean + 6.0 * std::sqrt(mean + 1.0) + 16.0));
        SplitMix64 rng(params.seed);
        if (p == 1.0) {
            for (uint32_t u = 0; u < n; ++u)
                for (uint32_t v = u + 1; v < n; ++v) edges.emplace_back(u, v);
        } else {
            for (uint32_t u = 0; u < n; ++u)
                for (uint32_t v = u + 1; v < n; ++v)
                    if (rng.next() < threshold) edges.emplace_back(u, v);
        }
    }
    return build_graph(n, std::move(edges));
}

enum class RegimeSignal { Ok, DenseRegime, SparseRegime };

inline const char* to_string(RegimeSignal s) {
    switch (s) {
        case RegimeSignal::Ok: return "ok";
        case RegimeSignal::DenseRegime: return "dense_regime";
        case RegimeSignal::SparseRegime: return "sparse_regime";
    }
    return "?";
}

struct RegimeParams {
    uint32_t k = 0;                 // regime index: n^{-(k+1)/(k+2)} < p < n^{-k/(k+1)}
    double alpha = 0.0;             // ln(1/p)/ln(n)
    double lambda = 0.0;            // n^k p^{k+1}
    uint32_t expected_diameter = 0; // k+2
    bool boundary_flag = false;     // alpha within delta of some j/(j+1)
};

struct RegimeResult {
    RegimeSignal signal = RegimeSignal::Ok;
    RegimeParams params;  // fully populated only when signal == Ok (alpha always set)
};

inline constexpr double kDefaultBoundaryDelta = 0.02;

inline RegimeResult regime_from(uint32_t n, double p, double delta = kDefaultBoundaryDelta) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("regime_from: need 0 < p < 1");
    if (n < 3) throw std::invalid_argument("regime_from: need n >= 3");
    if (!(delta >= 0.0)) throw std::invalid_argument("regime_from: delta must be >= 0");

    RegimeResult res;
    const double alpha = -std::log(p) / std::log(static_cast<double>(n));
    res.params.alpha = alpha;
    if (alpha >= 1.0 - 1e-9) {  // snap: ln(1/p)/ln(n) can land 1 ulp under 1
        res.signal = RegimeSignal::SparseRegime;
        return res;
    }

    // k = floor(alpha/(1-alpha)), snapping to the integer when the ratio sits
    // on it up to fp noise (exact boundary keeps the lower k, flagged below)
    const double ratio = alpha / (1.0 - alpha);
    const double nearest = std::round(ratio);
    const double k_real = (std::abs(ratio - nearest) < 1e-9) ? nearest : std::floor(ratio);
    if (k_real < 1.0) {
        res.signal = RegimeSignal::DenseRegime;
        return res;
    }
    const uint32_t k = static_cast<uint32_t>(k_real);

    res.params.k = k;
    res.params.lambda =
        std::exp(k * std::log(static_cast<double>(n)) + (k + 1) * std::log(p));
    res.params.expected_diameter = k + 2;
    for (uint32_t j = 1; j <= 1000; ++j) {
        const double b = static_cast<double>(j) / (j + 1);
        if (std::abs(alpha - b) < delta) {
            res.params.boundary_flag = true;
            break;
        }
        if (b > alpha + delta) break;
    }
    return res;
}

struct BoundsTable {
    double adaptive_upper = 0.0;     // C / (n^{k-2} p^k)
    double adaptive_lower = 0.0;     // 1 / (2 (k+1+eps) n^{k-2} p^k)
    double nonadaptive_upper = 0.0;  // 3 e^lambda ln(n) / (n^{k-2} p^k)
    double nonadaptive_lower = 0.0;  // e^lambda ln(n) / (8 (k+1)^2 n^{k-2} p^k)
    uint64_t all_pairs = 0;          // n(n-1)/2
};

inline constexpr double kDefaultC = 16.0;
inline constexpr double kDefaultEps = 0.1;

inline BoundsTable bounds_table(uint32_t n, double p, uint32_t k, double C = kDefaultC,
                                double eps = kDefaultEps) {
    if (k < 1) throw std::invalid_argument("bounds_table: need k >= 1");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("bounds_table: need 0 < p < 1");
    if (!(C > 0.0)) throw std::invalid_argument("bounds_table: need C > 0");
    if (!(eps > 0.0)) throw std::invalid_argument("bounds_table: need eps > 0");
    if (n < 2) throw std::invalid_argument("bounds_table: need n >= 2");

    const double ln_n = std::log(static_cast<double>(n));
    const double ln_p = std::log(p);
    const double inv_base = std::exp(-((static_cast<double>(k) - 2.0) * ln_n + k * ln_p));
    const double lambda = std::exp(k * ln_n + (k + 1) * ln_p);
    const double e_lambda = std::exp(lambda);

    BoundsTable t;
    t.adaptive_upper = C * inv_base;
    t.adaptive_lower = inv_base / (2.0 * (k + 1 + eps));
    t.nonadaptive_upper = 3.0 * e_lambda * ln_n * inv_base;
    t.nonadaptive_lower = e_lambda * ln_n * inv_base / (8.0 * (k + 1.0) * (k + 1.0));
    t.all_pairs = static_cast<uint64_t>(n) * (n - 1) / 2;
    if (!std::isfinite(t.adaptive_upper) || !std::isfinite(t.nonadaptive_upper) ||
        !std::isfinite(lambda))
        throw std::overflow_error("bounds_table: values overflow double range");
    return t;
}

}  // namespace distrec
