#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "slosched/objective.hpp"
#include "slosched/simulator.hpp"
#include "slosched/workload.hpp"

using namespace slosched;

namespace {

InstanceState roomy_instance(int id, int max_batch) {
    InstanceState i;
    i.id = id;
    i.total_mem = 1ULL << 34;
    i.remaining_mem = i.total_mem;
    i.mem_utility = 0.9;
    i.bytes_per_token = 262144.0;
    i.max_batch_size = max_batch;
    return i;
}

// predicted == true output lengths, so the objective is the simulator's
// noiseless ground truth
Workload exact_workload(int n, std::uint64_t seed) {
    auto [code, chat] = default_synth_classes();
    auto reqs = generate_mixed(n, seed, code, chat);
    for (auto& r : reqs) r.predicted_output_len = r.true_output_len;
    return validate_workload(std::move(reqs), {code, chat});
}

Schedule random_schedule(const Workload& w, Rng& rng, int max_batch) {
    std::vector<int> perm;
    for (const auto& r : w.requests) perm.push_back(r.id);
    rng.shuffle(perm);
    Schedule s;
    std::size_t pos = 0;
    while (pos < perm.size()) {
        const std::size_t take = 1 + rng.uniform_index(static_cast<std::uint64_t>(max_batch));
        const std::size_t end = std::min(pos + take, perm.size());
        s.batches.emplace_back(perm.begin() + pos, perm.begin() + end);
        pos = end;
    }
    return s;
}

}  // namespace

TEST_CASE("noiseless run equals the objective prediction plus dispatch gaps") {
    Rng rng(12);
    for (int trial = 0; trial < 40; ++trial) {
        Workload w = exact_workload(2 + static_cast<int>(rng.uniform_index(11)), 100 + trial);
        Schedule s = random_schedule(w, rng, 3);
        const auto predicted = evaluate(s, table_coefficients(), w);

        SimConfig cfg;
        cfg.noise_pct = 0.0;
        cfg.dispatch_gap_ms = 0.1;
        const auto report =
            run({s}, w, {roomy_instance(0, 3)}, table_coefficients(), cfg, 0.0);

        const auto pos = s.positions();
        std::map<int, RequestMetrics> realized;
        for (const auto& m : report.per_request) realized[m.request_id] = m;
        for (const auto& m : predicted.per_request) {
            const auto& r = realized.at(m.request_id);
            const double gap_term = pos.at(m.request_id).second * cfg.dispatch_gap_ms;
            CHECK(r.wait_ms == doctest::Approx(m.wait_ms + gap_term).epsilon(1e-12));
            CHECK(r.e2e_ms == doctest::Approx(m.e2e_ms + gap_term).epsilon(1e-12));
            CHECK(r.ttft_ms == doctest::Approx(m.ttft_ms + gap_term).epsilon(1e-12));
            CHECK(r.tpot_ms == doctest::Approx(m.tpot_ms).epsilon(1e-12));
            CHECK(r.exec_ms == doctest::Approx(m.exec_ms).epsilon(1e-12));
        }
    }
}

TEST_CASE("zero gap and zero noise reproduce the objective G to 1e-12") {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        Workload w = exact_workload(8, 500 + trial);
        Schedule s = random_schedule(w, rng, 2);
        const auto predicted = evaluate(s, table_coefficients(), w);

        SimConfig cfg;
        cfg.noise_pct = 0.0;
        cfg.dispatch_gap_ms = 0.0;
        const auto report = run({s}, w, {roomy_instance(0, 2)}, table_coefficients(), cfg, 0.0);
        CHECK(std::fabs(report.g - predicted.g) <= 1e-12 * std::fabs(predicted.g));
        CHECK(report.n_met == predicted.n);
    }
}

TEST_CASE("same seed gives identical noisy reports") {
    Workload w = exact_workload(10, 3);
    Rng rng(1);
    Schedule s = random_schedule(w, rng, 2);
    SimConfig cfg;
    cfg.noise_pct = 0.1;
    cfg.seed = 42;
    const auto a = run({s}, w, {roomy_instance(0, 2)}, table_coefficients(), cfg, 0.0);
    const auto b = run({s}, w, {roomy_instance(0, 2)}, table_coefficients(), cfg, 0.0);
    REQUIRE(a.per_request.size() == b.per_request.size());
    for (std::size_t i = 0; i < a.per_request.size(); ++i) {
        CHECK(a.per_request[i].e2e_ms == b.per_request[i].e2e_ms);
        CHECK(a.per_request[i].slo_met == b.per_request[i].slo_met);
    }
    CHECK(a.g == b.g);
}

TEST_CASE("metric identity holds on noisy runs") {
    Workload w = exact_workload(12, 8);
    Rng rng(2);
    Schedule s = random_schedule(w, rng, 3);
    SimConfig cfg;
    cfg.noise_pct = 0.2;
    cfg.seed = 7;
    const auto report = run({s}, w, {roomy_instance(0, 3)}, table_coefficients(), cfg, 0.0);
    const double identity = report.slo_attainment / report.avg_latency_ms;
    CHECK(std::fabs(report.g - identity) <= 1e-12 * std::fabs(identity));
}

TEST_CASE("every request appears in exactly one completion record") {
    Workload w = exact_workload(11, 21);
    Rng rng(4);
    const Schedule s = random_schedule(w, rng, 3);
    SimConfig cfg;
    const auto report = run({s}, w, {roomy_instance(0, 3)}, table_coefficients(), cfg, 0.0);
    REQUIRE(report.per_request.size() == w.requests.size());
    std::vector<int> seen;
    for (const auto& m : report.per_request) seen.push_back(m.request_id);
    std::sort(seen.begin(), seen.end());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
}

TEST_CASE("instance clock is monotone: batch starts never decrease") {
    Workload w = exact_workload(12, 30);
    Rng rng(6);
    const Schedule s = random_schedule(w, rng, 2);
    SimConfig cfg;
    cfg.noise_pct = 0.15;
    const auto report = run({s}, w, {roomy_instance(0, 2)}, table_coefficients(), cfg, 0.0);

    // records are appended in dispatch order; waits are batch start times
    double last = -1.0;
    for (const auto& m : report.per_request) {
        CHECK(m.wait_ms >= last - 1e-12);
        last = std::max(last, m.wait_ms);
    }
}

TEST_CASE("run_fcfs on a single request equals run on its singleton schedule") {
    Workload w = exact_workload(1, 5);
    SimConfig cfg;
    const auto direct =
        run({Schedule{{{0}}}}, w, {roomy_instance(0, 2)}, table_coefficients(), cfg, 0.0);
    const auto fcfs = run_fcfs(w, {roomy_instance(0, 2)}, table_coefficients(), cfg);
    CHECK(fcfs.report.g == direct.g);
    CHECK(fcfs.report.avg_latency_ms == direct.avg_latency_ms);
    REQUIRE(fcfs.schedules[0].batches.size() == 1);
    CHECK(fcfs.schedules[0].batches[0] == Batch{0});
}

TEST_CASE("FCFS matches the sorted candidate when arrival order is already sorted") {
    TaskClass loose;
    loose.id = 0;
    loose.name = "loose";
    loose.slo = SloSpec::e2e(1e9);
    std::vector<Request> reqs;
    for (int i = 0; i < 6; ++i) {
        Request r;
        r.id = i;
        r.task_class_id = 0;
        r.input_len = 100 * (i + 1);  // ascending exec under table coefficients
        r.true_output_len = 10;
        r.predicted_output_len = 10;
        r.arrival_time_ms = i;
        reqs.push_back(r);
    }
    Workload w = validate_workload(reqs, {loose});

    SimConfig cfg;
    cfg.dispatch_gap_ms = 0.0;
    const auto fcfs = run_fcfs(w, {roomy_instance(0, 2)}, table_coefficients(), cfg);

    std::vector<int> ids{0, 1, 2, 3, 4, 5};
    Schedule sorted_packed{{{0, 1}, {2, 3}, {4, 5}}};
    const auto predicted = evaluate(sorted_packed, table_coefficients(), w);
    CHECK(fcfs.report.g == doctest::Approx(predicted.g).epsilon(1e-12));
}

TEST_CASE("adversarial arrival order: SA beats FCFS") {
    auto [code, chat] = default_synth_classes();
    auto reqs = generate_mixed(12, 71, code, chat);
    for (auto& r : reqs) r.predicted_output_len = r.true_output_len;
    arrange_longest_first(reqs, table_coefficients());
    Workload w = validate_workload(reqs, {code, chat});

    SimConfig cfg;
    const auto fcfs = run_fcfs(w, {roomy_instance(0, 2)}, table_coefficients(), cfg);

    AnnealConfig acfg;
    acfg.seed = 1;
    const auto sched = schedule_all(w, {roomy_instance(0, 2)}, table_coefficients(), acfg);
    const auto sa =
        run({sched.per_instance[0].schedule}, w, {roomy_instance(0, 2)}, table_coefficients(),
            cfg, sched.overhead_ms);

    CHECK(sa.slo_attainment > fcfs.report.slo_attainment);
    CHECK(sa.g > fcfs.report.g);
}

TEST_CASE("compare emits one row per policy per seed plus medians") {
    Workload w = exact_workload(8, 99);
    const std::vector<InstanceState> fleet{roomy_instance(0, 2)};
    AnnealConfig acfg;
    SimConfig scfg;
    const auto table = compare(w, fleet, table_coefficients(),
                               {Policy::SA, Policy::FCFS}, {0, 1, 2}, acfg, scfg);
    CHECK(table.rows.size() == 6);
    CHECK(table.medians.size() == 2);
    for (const auto& row : table.rows) {
        CHECK(row.n_requests == 8);
        CHECK(row.max_batch == 2);
        const double identity = row.attainment / row.avg_latency_ms;
        CHECK(std::fabs(row.g_req_per_ms - identity) <= 1e-12 * std::fabs(identity));
    }

    // duplicate policy entries give identical rows
    const auto dup = compare(w, fleet, table_coefficients(),
                             {Policy::FCFS, Policy::FCFS}, {5}, acfg, scfg);
    CHECK(dup.rows[0].g_req_per_ms == dup.rows[1].g_req_per_ms);
    CHECK(dup.rows[0].attainment == dup.rows[1].attainment);
}

TEST_CASE("achievable n=4 workload: SA and exhaustive both reach full attainment") {
    // four moderate requests against the stock SLOs: everything fits
    auto [code, chat] = default_slo_classes();
    std::vector<Request> reqs;
    for (int i = 0; i < 4; ++i) {
        Request r;
        r.id = i;
        r.task_class_id = i % 2;
        r.input_len = 150 + 40 * i;
        r.true_output_len = 120 + 30 * i;
        r.predicted_output_len = r.true_output_len;
        reqs.push_back(r);
    }
    Workload w = validate_workload(reqs, {code, chat});
    const auto table = compare(w, {roomy_instance(0, 1)}, table_coefficients(),
                               {Policy::SA, Policy::EXHAUSTIVE}, {0}, AnnealConfig{}, SimConfig{});
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0].attainment == 1.0);
    CHECK(table.rows[1].attainment == 1.0);
}

TEST_CASE("compare propagates the exhaustive cap") {
    Workload w = exact_workload(12, 1);
    CHECK_THROWS_AS(compare(w, {roomy_instance(0, 1)}, table_coefficients(),
                            {Policy::EXHAUSTIVE}, {0}, AnnealConfig{}, SimConfig{}),
                    CapacityError);
}

TEST_CASE("median helper") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
    CHECK(median({}) == 0.0);
}
