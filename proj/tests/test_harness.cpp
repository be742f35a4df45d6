#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "distrec/gnp.hpp"
#include "distrec/graph.hpp"
#include "distrec/harness.hpp"
#include "distrec/rng.hpp"

using namespace distrec;

namespace {

Graph path(uint32_t n) {
    EdgeList e;
    for (Vertex v = 0; v + 1 < n; ++v) e.emplace_back(v, v + 1);
    return build_graph(n, e);
}

Graph cycle(uint32_t n) {
    EdgeList e;
    for (Vertex v = 0; v + 1 < n; ++v) e.emplace_back(v, v + 1);
    e.emplace_back(0, n - 1);
    return build_graph(n, e);
}

Graph complete(uint32_t n) {
    EdgeList e;
    for (Vertex u = 0; u < n; ++u)
        for (Vertex v = u + 1; v < n; ++v) e.emplace_back(u, v);
    return build_graph(n, e);
}

// everything except wall time, which can never replay exactly
bool same_outcome(const TrialRecord& a, const TrialRecord& b) {
    return a.n == b.n && a.p == b.p && a.alpha == b.alpha && a.k == b.k && a.seed == b.seed &&
           a.mode == b.mode && a.status == b.status && a.queries_used == b.queries_used &&
           a.adaptive_upper == b.adaptive_upper && a.adaptive_lower == b.adaptive_lower &&
           a.nonadaptive_upper == b.nonadaptive_upper &&
           a.nonadaptive_lower == b.nonadaptive_lower &&
           a.measured_diameter == b.measured_diameter;
}

}  // namespace

// ---------------------------------------------------------------------------
// scaling fits
// ---------------------------------------------------------------------------

TEST_CASE("exact power laws fit exactly", "[harness]") {
    std::vector<std::pair<double, double>> pts;
    for (double n : {1024.0, 4096.0, 16384.0}) pts.emplace_back(n, std::pow(n, 1.5));
    ScalingFit fit = fit_scaling_exponent(pts);
    CHECK(fit.slope == Catch::Approx(1.5).epsilon(1e-9));
    CHECK(fit.intercept == Catch::Approx(0.0).margin(1e-9));
    CHECK(fit.r_squared == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("five percent noise keeps the exponent within a tenth", "[harness]") {
    SplitMix64 rng(99);
    std::vector<std::pair<double, double>> pts;
    for (double n : {1024.0, 2048.0, 4096.0, 8192.0, 16384.0}) {
        const double noise = (rng.next_unit() - 0.5) * 0.1;  // |noise| <= 5%
        pts.emplace_back(n, 3.0 * std::pow(n, 1.55) * (1.0 + noise));
    }
    ScalingFit fit = fit_scaling_exponent(pts);
    CHECK(fit.slope >= 1.45);
    CHECK(fit.slope <= 1.65);
    CHECK(fit.r_squared > 0.99);
}

TEST_CASE("fits demand two distinct sizes and positive counts", "[harness]") {
    CHECK_THROWS_AS(fit_scaling_exponent({{1024.0, 5.0}}), InsufficientData);
    CHECK_THROWS_AS(fit_scaling_exponent({{1024.0, 5.0}, {1024.0, 7.0}}), InsufficientData);
    CHECK_THROWS_AS(fit_scaling_exponent({}), InsufficientData);
    CHECK_THROWS_AS(fit_scaling_exponent({{1024.0, 0.0}, {2048.0, 5.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(fit_scaling_exponent({{-2.0, 1.0}, {2048.0, 5.0}}),
                    std::invalid_argument);

    SECTION("flat data is a perfect slope-zero fit") {
        ScalingFit fit = fit_scaling_exponent({{16.0, 7.0}, {64.0, 7.0}, {256.0, 7.0}});
        CHECK(fit.slope == Catch::Approx(0.0).margin(1e-12));
        CHECK(fit.r_squared == Catch::Approx(1.0));
    }
}

// ---------------------------------------------------------------------------
// diameter measurement
// ---------------------------------------------------------------------------

TEST_CASE("bitset diameter agrees with per-vertex BFS", "[harness]") {
    CHECK(detail::bitset_diameter(path(4)) == 3);
    CHECK(detail::bitset_diameter(cycle(8)) == 4);
    CHECK(detail::bitset_diameter(complete(5)) == 1);
    CHECK(detail::bitset_diameter(complete(2)) == 1);
    CHECK(detail::bitset_diameter(build_graph(1, {})) == 0);
    CHECK_FALSE(detail::bitset_diameter(build_graph(2, {})).has_value());
    CHECK_FALSE(detail::bitset_diameter(build_graph(5, {{0, 1}, {2, 3}})).has_value());

    for (uint64_t seed = 1; seed <= 40; ++seed) {
        const uint32_t n = 2 + static_cast<uint32_t>(seed % 59);
        const double p = 0.05 + 0.01 * static_cast<double>(seed % 40);
        Graph g = sample_gnp({n, p, seed});
        std::optional<Dist> slow = diameter(g);
        std::optional<uint32_t> fast = detail::bitset_diameter(g);
        REQUIRE(slow.has_value() == fast.has_value());
        if (slow) REQUIRE(static_cast<uint32_t>(*slow) == *fast);
    }
}

// ---------------------------------------------------------------------------
// pair sampling
// ---------------------------------------------------------------------------

TEST_CASE("pair indexing round-trips through its inverse", "[harness]") {
    for (uint32_t n : {2u, 3u, 5u, 17u}) {
        const uint64_t all = static_cast<uint64_t>(n) * (n - 1) / 2;
        for (uint64_t idx = 0; idx < all; ++idx) {
            auto [u, v] = detail::pair_from_index(n, idx);
            REQUIRE(u < v);
            REQUIRE(v < n);
            REQUIRE(detail::pair_bit(n, u, v) == idx);
        }
    }
}

TEST_CASE("sampled query pairs are distinct, sorted, and seeded", "[harness]") {
    auto pairs = detail::sample_query_pairs(100, 300, 7);
    REQUIRE(pairs.size() == 300);
    std::set<std::pair<Vertex, Vertex>> distinct(pairs.begin(), pairs.end());
    CHECK(distinct.size() == 300);
    CHECK(std::is_sorted(pairs.begin(), pairs.end()));
    for (auto [u, v] : pairs) {
        CHECK(u < v);
        CHECK(v < 100);
    }
    CHECK(detail::sample_query_pairs(100, 300, 7) == pairs);
    CHECK(detail::sample_query_pairs(100, 300, 8) != pairs);

    SECTION("asking for everything enumerates everything") {
        auto all = detail::sample_query_pairs(9, 1000, 3);
        CHECK(all.size() == 36);
        std::set<std::pair<Vertex, Vertex>> s(all.begin(), all.end());
        CHECK(s.size() == 36);
    }
}

// ---------------------------------------------------------------------------
// sweeps
// ---------------------------------------------------------------------------

TEST_CASE("small dense-enough adaptive sweeps resolve exactly", "[harness]") {
    ExperimentSpec spec;
    spec.mode = SweepMode::Adaptive;
    spec.n_list = {128};
    spec.p = 0.07;
    spec.trials = 2;
    spec.base_seed = 5;

    auto recs = run_sweep(spec);
    REQUIRE(recs.size() == 2);
    for (uint32_t t = 0; t < 2; ++t) {
        const TrialRecord& r = recs[t];
        CHECK(r.n == 128);
        CHECK(r.p == 0.07);
        CHECK(r.k == 1);
        CHECK(r.mode == "adaptive");
        CHECK(r.seed == derive_seed(5, 0, t));
        // this point degenerates to query-all, so reconstruction is exact
        CHECK(r.status == "exact");
        CHECK(r.queries_used == 128ull * 127 / 2);
        CHECK(r.runtime_ms >= 0.0);

        BoundsTable bt = bounds_table(128, 0.07, 1, spec.C, spec.eps);
        CHECK(r.adaptive_upper == bt.adaptive_upper);
        CHECK(r.adaptive_lower == bt.adaptive_lower);
        CHECK(r.nonadaptive_upper == bt.nonadaptive_upper);
        CHECK(r.nonadaptive_lower == bt.nonadaptive_lower);
        CHECK(r.queries_used <= bt.all_pairs);

        // the documented replay recipe: the row's seed regenerates its graph
        Graph hidden = sample_gnp({128, 0.07, r.seed});
        CHECK(r.measured_diameter == detail::bitset_diameter(hidden).value_or(0));
    }

    auto again = run_sweep(spec);
    REQUIRE(again.size() == recs.size());
    for (size_t i = 0; i < recs.size(); ++i) REQUIRE(same_outcome(recs[i], again[i]));
}

TEST_CASE("out-of-regime points become labeled skip rows", "[harness]") {
    ExperimentSpec spec;
    spec.mode = SweepMode::Adaptive;
    spec.n_list = {64};
    spec.p = 0.3;  // expected diameter 2: reconstruction needs all pairs
    spec.trials = 2;

    auto recs = run_sweep(spec);
    REQUIRE(recs.size() == 2);
    for (const TrialRecord& r : recs) {
        CHECK(r.status == "dense_regime");
        CHECK(r.k == 0);
        CHECK(r.queries_used == 0);
        CHECK(r.adaptive_upper == 0.0);
        CHECK(r.measured_diameter == 0);
    }

    spec.p = 0.0001;  // far below the connectivity threshold
    auto sparse = run_sweep(spec);
    REQUIRE(sparse.size() == 2);
    for (const TrialRecord& r : sparse) {
        CHECK(r.status == "sparse_regime");
        CHECK(r.queries_used == 0);
    }
}

TEST_CASE("alpha-driven grids derive p per point", "[harness]") {
    ExperimentSpec spec;
    spec.mode = SweepMode::Adaptive;
    spec.n_list = {256, 512};
    spec.alpha = 0.55;
    spec.trials = 2;
    spec.base_seed = 3;

    auto recs = run_sweep(spec);
    REQUIRE(recs.size() == 4);
    const std::set<std::string> allowed = {"exact", "inexact", "coverage_failure",
                                           "query_budget_exceeded", "schedule_infeasible"};
    for (size_t i = 0; i < recs.size(); ++i) {
        const TrialRecord& r = recs[i];
        CHECK(r.n == (i < 2 ? 256u : 512u));
        CHECK(r.alpha == 0.55);
        CHECK(r.p == Catch::Approx(std::pow(static_cast<double>(r.n), -0.55)));
        CHECK(r.k == 1);
        CHECK(allowed.count(r.status) == 1);
        CHECK(r.seed == derive_seed(3, i / 2, i % 2));
    }
    // n=256 degenerates to query-all, so those rows are deterministically exact
    CHECK(recs[0].status == "exact");
    CHECK(recs[1].status == "exact");
}

TEST_CASE("bounds rows carry formulas and sample nothing", "[harness]") {
    ExperimentSpec spec;
    spec.mode = SweepMode::Bounds;
    spec.n_list = {16384};
    spec.p = 0.005;
    spec.trials = 1;

    auto recs = run_sweep(spec);
    REQUIRE(recs.size() == 1);
    const TrialRecord& r = recs[0];
    CHECK(r.status == "ok");
    CHECK(r.queries_used == 0);
    CHECK(r.measured_diameter == 0);
    CHECK(r.k == 1);
    CHECK(r.adaptive_upper == Catch::Approx(52428800.0));
    CHECK(r.adaptive_lower == Catch::Approx(780190.476).epsilon(1e-5));
    CHECK(r.nonadaptive_upper == Catch::Approx(1.437e8).epsilon(2e-3));
    CHECK(r.nonadaptive_lower == Catch::Approx(1.497e6).epsilon(2e-3));
}

TEST_CASE("non-adaptive sweep rows account every query", "[harness]") {
    ExperimentSpec spec;
    spec.mode = SweepMode::Nonadaptive;
    spec.n_list = {64};
    spec.p = 0.1;
    spec.trials = 2;
    spec.base_seed = 11;

    auto recs = run_sweep(spec);
    REQUIRE(recs.size() == 2);
    for (const TrialRecord& r : recs) {
        CHECK(r.mode == "nonadaptive");
        // the size formula clamps at n/2 = 32 landmarks here
        CHECK(r.queries_used == 32ull * 32 + 32ull * 31 / 2);
        const bool known = r.status == "exact" || r.status == "inexact" ||
                           r.status == "mismatch";
        CHECK(known);
    }
    auto again = run_sweep(spec);
    for (size_t i = 0; i < recs.size(); ++i) REQUIRE(same_outcome(recs[i], again[i]));
}

TEST_CASE("certify sweep rows ask for half the lower bound by default rule", "[harness]") {
    const double p = std::cbrt(2.4 * std::log(2000.0) / (2000.0 * 2000.0));
    ExperimentSpec spec;
    spec.mode = SweepMode::Certify;
    spec.n_list = {2000};
    spec.p = p;
    spec.trials = 1;
    spec.base_seed = 2;
    spec.c_scale = 0.5;

    auto recs = run_sweep(spec);
    REQUIRE(recs.size() == 1);
    const TrialRecord& r = recs[0];
    CHECK(r.k == 1);
    const BoundsTable bt = bounds_table(2000, p, 1, spec.C, spec.eps);
    CHECK(r.queries_used == static_cast<uint64_t>(std::floor(0.5 * bt.adaptive_lower)));
    const bool known = r.status == "certificate_found" || r.status == "no_certificate" ||
                       r.status == "diameter_mismatch";
    CHECK(known);

    auto again = run_sweep(spec);
    REQUIRE(same_outcome(recs[0], again[0]));
}

TEST_CASE("bruteforce sweep rows verdict tiny instances", "[harness]") {
    ExperimentSpec spec;
    spec.mode = SweepMode::Bruteforce;
    spec.n_list = {6};
    spec.p = 0.5;
    spec.k_override = 1;  // n=6, p=0.5 sits below the k=1 window
    spec.trials = 4;
    spec.base_seed = 9;

    auto recs = run_sweep(spec);
    REQUIRE(recs.size() == 4);
    for (const TrialRecord& r : recs) {
        CHECK(r.k == 1);
        CHECK(r.queries_used >= 1);
        const bool known = r.status == "unique" || r.status == "ambiguous";
        CHECK(known);
    }
    auto again = run_sweep(spec);
    for (size_t i = 0; i < recs.size(); ++i) REQUIRE(same_outcome(recs[i], again[i]));
}

TEST_CASE("sweep specs are validated", "[harness]") {
    ExperimentSpec spec;
    spec.n_list = {64};
    spec.p = 0.1;

    ExperimentSpec bad = spec;
    bad.n_list = {};
    CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);
    bad = spec;
    bad.trials = 0;
    CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);
    bad = spec;
    bad.alpha = 0.55;  // both p and alpha
    CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);
    bad = spec;
    bad.p.reset();  // neither
    CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);
    bad = spec;
    bad.p = 1.5;
    CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);
    bad = spec;
    bad.k_override = 0;
    CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);
    bad = spec;
    bad.c_scale = 0.0;
    CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);
    bad = spec;
    bad.n_list = {2};
    CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

TEST_CASE("csv output round-trips losslessly", "[harness]") {
    ExperimentSpec spec;
    spec.mode = SweepMode::Adaptive;
    spec.n_list = {64};
    spec.p = 0.1;
    spec.trials = 2;
    auto recs = run_sweep(spec);
    spec.p = 0.3;  // adds dense-regime skip rows with zero columns
    auto skips = run_sweep(spec);
    recs.insert(recs.end(), skips.begin(), skips.end());
    spec.mode = SweepMode::Bounds;
    spec.p = 0.005;
    spec.n_list = {16384};
    spec.trials = 1;
    auto bounds = run_sweep(spec);
    recs.insert(recs.end(), bounds.begin(), bounds.end());

    std::ostringstream os;
    write_records_csv(recs, os);
    const std::string text = os.str();
    CHECK(text.rfind(kCsvHeader, 0) == 0);
    CHECK(text.find("dense_regime") != std::string::npos);

    std::istringstream is(text);
    auto parsed = read_records_csv(is);
    REQUIRE(parsed.size() == recs.size());
    for (size_t i = 0; i < recs.size(); ++i) REQUIRE(parsed[i] == recs[i]);
}

TEST_CASE("csv reader rejects foreign headers and ragged rows", "[harness]") {
    std::istringstream bad_header("nope\n");
    CHECK_THROWS_AS(read_records_csv(bad_header), std::runtime_error);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_records_csv(empty), std::runtime_error);
    std::istringstream ragged(std::string(kCsvHeader) + "\n1,2,3\n");
    CHECK_THROWS_AS(read_records_csv(ragged), std::runtime_error);
}

TEST_CASE("json output lists one flat object per record", "[harness]") {
    ExperimentSpec spec;
    spec.mode = SweepMode::Bounds;
    spec.n_list = {64, 128};
    spec.p = 0.1;
    auto recs = run_sweep(spec);

    std::ostringstream os;
    write_records_json(recs, os);
    const std::string text = os.str();
    CHECK(text.front() == '[');
    CHECK(text.find("\"mode\": \"bounds\"") != std::string::npos);
    CHECK(text.find("\"queries_used\": 0") != std::string::npos);
    size_t objects = 0;
    for (size_t at = text.find('{'); at != std::string::npos; at = text.find('{', at + 1))
        ++objects;
    CHECK(objects == recs.size());

    std::ostringstream empty_os;
    write_records_json({}, empty_os);
    CHECK(empty_os.str() == "[\n]\n");
}

TEST_CASE("a recorded row replays from its own columns", "[harness]") {
    ExperimentSpec spec;
    spec.mode = SweepMode::Adaptive;
    spec.n_list = {512};
    spec.alpha = 0.55;
    spec.trials = 1;
    spec.base_seed = 21;
    auto recs = run_sweep(spec);
    REQUIRE(recs.size() == 1);
    const TrialRecord& r = recs[0];

    // external replay recipe: graph from the row seed, plan from its stream
    Graph hidden = sample_gnp({r.n, r.p, r.seed});
    LandmarkSchedule sch = build_schedule(r.n, r.p, r.k, 16.0, 4, r.seed ^ kPlanStream);
    REQUIRE(sch.status == ScheduleStatus::Ok);
    DistanceOracle oracle(hidden);
    ReconstructionReport rep = adaptive_reconstruct(oracle, sch);
    CHECK(rep.queries_used == r.queries_used);
    const std::string status = rep.status == ReconStatus::Success
                                   ? (*rep.graph == hidden ? "exact" : "inexact")
                                   : to_string(rep.status);
    CHECK(status == r.status);
}
