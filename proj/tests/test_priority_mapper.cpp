#include <doctest.h>

#include <algorithm>
#include <set>

#include "slosched/objective.hpp"
#include "slosched/priority_mapper.hpp"
#include "slosched/workload.hpp"

using namespace slosched;

namespace {

LatencyCoefficients identity_coeffs() {
    LatencyCoefficients c;
    c.gamma_p = 1.0;  // exec = input_len, batch-size independent
    return c;
}

Request req(int id, int class_id, int in_len, int out_len, double arrival = 0.0) {
    Request r;
    r.id = id;
    r.task_class_id = class_id;
    r.input_len = in_len;
    r.true_output_len = out_len;
    r.predicted_output_len = out_len;
    r.arrival_time_ms = arrival;
    return r;
}

Workload mixed_workload(int n, std::uint64_t seed) {
    auto [code, chat] = default_synth_classes();
    auto reqs = generate_mixed(n, seed, code, chat);
    for (auto& r : reqs) r.predicted_output_len = r.true_output_len;
    return validate_workload(std::move(reqs), {code, chat});
}

std::vector<int> ids_of(const Workload& w) {
    std::vector<int> out;
    for (const auto& r : w.requests) out.push_back(r.id);
    return out;
}

AnnealConfig quick_config(std::uint64_t seed) {
    AnnealConfig cfg;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("initial candidates: sort order and greedy packing") {
    TaskClass loose;
    loose.id = 0;
    loose.name = "loose";
    loose.slo = SloSpec::e2e(1e9);
    // exec(=input_len): r1 -> 3000, r2 -> 1000, r3 -> 2000
    Workload w = validate_workload(
        {req(1, 0, 3000, 1, 0.0), req(2, 0, 1000, 1, 1.0), req(3, 0, 2000, 1, 2.0)}, {loose});

    auto [sorted_s, input_s] = initial_candidates(w, ids_of(w), identity_coeffs(), 1);
    CHECK(sorted_s.flatten() == std::vector<int>{2, 3, 1});
    CHECK(input_s.flatten() == std::vector<int>{1, 2, 3});  // arrival order

    // already sorted input -> both candidates identical
    Workload w2 = validate_workload(
        {req(1, 0, 100, 1, 0.0), req(2, 0, 200, 1, 1.0), req(3, 0, 300, 1, 2.0)}, {loose});
    auto [s2, i2] = initial_candidates(w2, ids_of(w2), identity_coeffs(), 1);
    CHECK(s2.flatten() == i2.flatten());

    Workload w5 = validate_workload({req(0, 0, 10, 1), req(1, 0, 20, 1), req(2, 0, 30, 1),
                                     req(3, 0, 40, 1), req(4, 0, 50, 1)},
                                    {loose});
    auto [s5, i5] = initial_candidates(w5, ids_of(w5), identity_coeffs(), 2);
    REQUIRE(s5.batches.size() == 3);
    CHECK(s5.batches[0].size() == 2);
    CHECK(s5.batches[1].size() == 2);
    CHECK(s5.batches[2].size() == 1);
}

TEST_CASE("shortcut fires exactly when the sorted candidate meets every SLO") {
    TaskClass loose;
    loose.id = 0;
    loose.name = "loose";
    loose.slo = SloSpec::e2e(1e9);
    Workload w = validate_workload({req(0, 0, 100, 1), req(1, 0, 200, 1)}, {loose});
    auto [sorted_s, input_s] = initial_candidates(w, ids_of(w), identity_coeffs(), 1);
    auto hit = shortcut_check(sorted_s, identity_coeffs(), w);
    REQUIRE(hit.has_value());
    CHECK(hit->n == 2);

    TaskClass impossible;
    impossible.id = 0;
    impossible.name = "impossible";
    impossible.slo = SloSpec::e2e(1e-6);
    Workload w2 = validate_workload({req(0, 0, 100, 1)}, {impossible});
    CHECK_FALSE(shortcut_check(Schedule{{{0}}}, identity_coeffs(), w2).has_value());

    // vacuous truth on the empty set
    Workload w3 = validate_workload({}, {loose});
    auto empty_hit = shortcut_check(Schedule{}, identity_coeffs(), w3);
    REQUIRE(empty_hit.has_value());
    CHECK(empty_hit->schedule.batches.empty());
}

TEST_CASE("neighbor produces only valid partitions and reaches all move kinds") {
    Rng rng(31);
    Schedule two{{{0}, {1}}};
    std::set<std::vector<Batch>> seen;
    for (int i = 0; i < 300; ++i) {
        Schedule out = neighbor(two, rng, 2);
        CHECK(out.is_partition_of({0, 1}, 2));
        seen.insert(out.batches);
    }
    CHECK(seen.count({{0, 1}}) == 1);   // squeeze merged the batches
    CHECK(seen.count({{1}, {0}}) == 1); // swap

    Schedule merged{{{0, 1}}};
    std::set<std::vector<Batch>> seen2;
    for (int i = 0; i < 300; ++i) {
        Schedule out = neighbor(merged, rng, 2);
        CHECK(out.is_partition_of({0, 1}, 2));
        seen2.insert(out.batches);
    }
    CHECK(seen2.count({{0}, {1}}) == 1);  // delay split the batch
}

TEST_CASE("neighbor on a single request returns the schedule unchanged") {
    Rng rng(8);
    Schedule s{{{42}}};
    for (int i = 0; i < 50; ++i) {
        Schedule out = neighbor(s, rng, 1);
        REQUIRE(out.batches.size() == 1);
        CHECK(out.batches[0] == Batch{42});
    }
}

TEST_CASE("neighbor never violates max batch size") {
    Workload w = mixed_workload(9, 101);
    auto [sorted_s, input_s] = initial_candidates(w, ids_of(w), table_coefficients(), 3);
    Rng rng(5);
    Schedule cur = sorted_s;
    for (int i = 0; i < 2000; ++i) {
        cur = neighbor(cur, rng, 3);
        REQUIRE(cur.is_partition_of(ids_of(w), 3));
    }
}

TEST_CASE("anneal takes the shortcut on an all-loose workload") {
    TaskClass loose;
    loose.id = 0;
    loose.name = "loose";
    loose.slo = SloSpec::e2e(1e12);
    Workload w = validate_workload(
        {req(0, 0, 500, 1), req(1, 0, 100, 1), req(2, 0, 300, 1)}, {loose});
    AnnealResult res = anneal(w, ids_of(w), identity_coeffs(), quick_config(0), 1);
    CHECK(res.stats.shortcut);
    CHECK(res.stats.proposals == 0);
    CHECK(res.best.schedule.flatten() == std::vector<int>{1, 2, 0});
    CHECK(res.best.n == 3);
}

TEST_CASE("anneal result dominates both starting candidates") {
    const auto coeffs = table_coefficients();
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Workload w = mixed_workload(10, 900 + seed);
        const auto ids = ids_of(w);
        auto [sorted_s, input_s] = initial_candidates(w, ids, coeffs, 2);
        const double g_sorted = evaluate(sorted_s, coeffs, w).g;
        const double g_input = evaluate(input_s, coeffs, w).g;

        AnnealResult res = anneal(w, ids, coeffs, quick_config(seed), 2);
        CHECK(res.best.g >= g_sorted);
        CHECK(res.best.g >= g_input);
        CHECK(res.best.schedule.is_partition_of(ids, 2));
    }
}

TEST_CASE("anneal is deterministic in (workload, config, seed)") {
    Workload w = mixed_workload(12, 4);
    const auto ids = ids_of(w);
    const auto coeffs = table_coefficients();
    AnnealResult a = anneal(w, ids, coeffs, quick_config(77), 2);
    AnnealResult b = anneal(w, ids, coeffs, quick_config(77), 2);
    CHECK(a.best.schedule.batches == b.best.schedule.batches);
    CHECK(a.best.g == b.best.g);
    CHECK(a.stats.proposals == b.stats.proposals);
    CHECK(a.stats.accepted == b.stats.accepted);
}

TEST_CASE("objective_scale zero degenerates to an always-accepting walk") {
    Workload w = mixed_workload(8, 15);
    AnnealConfig cfg = quick_config(3);
    cfg.objective_scale = 0.0;
    cfg.t0 = 30.0;  // keep it short
    cfg.iter = 50;
    AnnealResult res = anneal(w, ids_of(w), table_coefficients(), cfg, 1);
    if (!res.stats.shortcut) {
        CHECK(res.stats.accepted == res.stats.proposals);
        CHECK(res.best.g >= res.stats.g_sorted_start);
    }
}

TEST_CASE("exhaustive enumerates permutations times compositions") {
    Workload w1 = mixed_workload(1, 0);
    ExhaustiveResult r1 = exhaustive(w1, ids_of(w1), table_coefficients(), 1);
    CHECK(r1.schedules_evaluated == 1);

    Workload w3 = mixed_workload(3, 1);
    ExhaustiveResult r3 = exhaustive(w3, ids_of(w3), table_coefficients(), 1);
    CHECK(r3.schedules_evaluated == 6);  // 3! x one composition

    ExhaustiveResult r3b = exhaustive(w3, ids_of(w3), table_coefficients(), 3);
    CHECK(r3b.schedules_evaluated == 24);  // 3! x {3; 2+1; 1+2; 1+1+1}
}

TEST_CASE("exhaustive breaks exact ties lexicographically") {
    // three indistinguishable requests: every order scores the same, so
    // the tie-break must pick the lexicographically first permutation
    TaskClass loose;
    loose.id = 0;
    loose.name = "loose";
    loose.slo = SloSpec::e2e(1e9);
    std::vector<Request> reqs;
    for (int i = 0; i < 3; ++i) reqs.push_back(req(i, 0, 100, 10));
    Workload w = validate_workload(reqs, {loose});
    const auto res = exhaustive(w, {0, 1, 2}, table_coefficients(), 1);
    CHECK(res.best.schedule.flatten() == std::vector<int>{0, 1, 2});
}

TEST_CASE("exhaustive refuses beyond the cap") {
    Workload w = mixed_workload(12, 2);
    CHECK_THROWS_WITH_AS(exhaustive(w, ids_of(w), table_coefficients(), 1, 10),
                         doctest::Contains("exceed"), CapacityError);
}

TEST_CASE("exhaustive is an upper bound for random schedules and for anneal") {
    const auto coeffs = table_coefficients();
    Rng rng(303);
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        Workload w = mixed_workload(6, 40 + seed);
        const auto ids = ids_of(w);
        ExhaustiveResult ex = exhaustive(w, ids, coeffs, 2);
        CHECK(ex.best.g == doctest::Approx(evaluate(ex.best.schedule, coeffs, w).g).epsilon(1e-12));

        // no random schedule beats the oracle
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<int> perm = ids;
            rng.shuffle(perm);
            Schedule s;
            std::size_t pos = 0;
            while (pos < perm.size()) {
                const std::size_t take = 1 + rng.uniform_index(2);
                const std::size_t end = std::min(pos + take, perm.size());
                s.batches.emplace_back(perm.begin() + pos, perm.begin() + end);
                pos = end;
            }
            CHECK(evaluate(s, coeffs, w).g <= ex.best.g * (1.0 + 1e-12));
        }

        AnnealResult sa = anneal(w, ids, coeffs, quick_config(seed), 2);
        CHECK(sa.best.g <= ex.best.g * (1.0 + 1e-12));
        CHECK(sa.best.g >= 0.95 * ex.best.g);  // near-parity at desk scale
    }
}

namespace {

// reference search assembled from the public neighbor() + evaluate(),
// consuming rng draws in the same order as anneal()
Schedule reference_anneal(const Workload& w, const std::vector<int>& ids,
                          const LatencyCoefficients& coeffs, const AnnealConfig& cfg,
                          int max_batch) {
    auto [sorted_s, input_s] = initial_candidates(w, ids, coeffs, max_batch);
    const auto es = evaluate(sorted_s, coeffs, w);
    if (es.n == static_cast<int>(es.per_request.size())) return sorted_s;
    const auto ei = evaluate(input_s, coeffs, w);

    Schedule current = es.g >= ei.g ? sorted_s : input_s;
    double f = es.g >= ei.g ? es.g : ei.g;
    const double scale = cfg.objective_scale ? *cfg.objective_scale
                                             : (f > 0.0 ? cfg.t0 / f : cfg.t0);
    Schedule best = current;
    double best_f = f;

    Rng rng(cfg.seed);
    for (double t = cfg.t0; t >= cfg.t_thres; t *= cfg.tau) {
        for (int k = 0; k < cfg.iter; ++k) {
            Schedule prop = neighbor(current, rng, max_batch);
            const double f_new = evaluate(prop, coeffs, w).g;
            bool accept = f_new > f;
            if (!accept) accept = rng.uniform() < std::exp(-(f - f_new) * scale / t);
            if (accept) {
                current = std::move(prop);
                f = f_new;
                if (f > best_f) {
                    best = current;
                    best_f = f;
                }
            }
        }
    }
    const auto eb = evaluate(best, coeffs, w);
    if (eb.g >= std::max(es.g, ei.g)) return best;
    return es.g >= ei.g ? sorted_s : input_s;
}

}  // namespace

TEST_CASE("anneal matches the reference walk over public neighbor and evaluate") {
    const auto coeffs = table_coefficients();
    for (std::uint64_t seed : {1, 2, 3}) {
        Workload w = mixed_workload(8, 600 + seed);
        const auto ids = ids_of(w);
        AnnealConfig cfg = quick_config(seed);
        cfg.t0 = 60.0;  // a short ladder keeps the reference affordable
        cfg.iter = 40;
        const AnnealResult fast = anneal(w, ids, coeffs, cfg, 2);
        if (fast.stats.shortcut) continue;
        const Schedule ref = reference_anneal(w, ids, coeffs, cfg, 2);
        CHECK(fast.best.schedule.batches == ref.batches);
    }
}

TEST_CASE("oracle parity at desk scale: median G ratio over 20 seeds") {
    const auto coeffs = table_coefficients();
    std::vector<double> ratios;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Workload w = mixed_workload(8, 7000 + seed);
        const auto ids = ids_of(w);
        const ExhaustiveResult ex = exhaustive(w, ids, coeffs, 2);
        const AnnealResult sa = anneal(w, ids, coeffs, quick_config(seed), 2);
        ratios.push_back(ex.best.g > 0.0 ? sa.best.g / ex.best.g : 1.0);
    }
    std::sort(ratios.begin(), ratios.end());
    const double med = 0.5 * (ratios[9] + ratios[10]);
    CHECK(med >= 0.99);
}

TEST_CASE("anneal handles the empty request set") {
    auto [code, chat] = default_slo_classes();
    Workload w = validate_workload({}, {code, chat});
    AnnealResult res = anneal(w, {}, table_coefficients(), quick_config(0), 2);
    CHECK(res.stats.shortcut);
    CHECK(res.best.schedule.batches.empty());
    CHECK(res.best.g == 0.0);
}

TEST_CASE("anneal config invariants") {
    AnnealConfig bad;
    bad.t0 = 10.0;
    bad.t_thres = 20.0;
    CHECK_THROWS_AS(bad.validate(), DataError);
    bad = AnnealConfig{};
    bad.iter = 0;
    CHECK_THROWS_AS(bad.validate(), DataError);
    bad = AnnealConfig{};
    bad.tau = 1.0;
    CHECK_THROWS_AS(bad.validate(), DataError);
    CHECK_NOTHROW(AnnealConfig{}.validate());
}
