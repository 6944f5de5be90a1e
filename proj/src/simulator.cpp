#include "slosched/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <queue>

#include "slosched/latency_model.hpp"
#include "slosched/objective.hpp"
#include "slosched/rng.hpp"

namespace slosched {

namespace {

// Realize one batch starting at `start_ms` on an instance clock; appends a
// completion record per member and returns the batch makespan.
double realize_batch(const Batch& batch, double start_ms, const Workload& workload,
                     const LatencyCoefficients& coeffs, double noise_pct, Rng& rng,
                     std::vector<RequestMetrics>& records) {
    const int b = static_cast<int>(batch.size());
    double makespan = 0.0;
    for (int id : batch) {
        const Request* r = workload.find_request(id);
        if (!r) throw DataError("simulator: schedule references unknown request " + std::to_string(id));
        const int lo = r->true_output_len;
        // one factor per request keeps TPOT consistent with e2e
        const double factor = noise_pct > 0.0 ? 1.0 + rng.uniform(-noise_pct, noise_pct) : 1.0;
        const double prefill = predict_prefill(coeffs, b, r->input_len) * factor;
        const double exec = predict_exec(coeffs, b, r->input_len, lo) * factor;
        const double decode = exec - prefill;

        RequestMetrics m;
        m.request_id = id;
        m.wait_ms = start_ms;
        m.exec_ms = exec;
        m.e2e_ms = start_ms + exec;
        m.ttft_ms = start_ms + prefill;
        m.tpot_ms = decode / static_cast<double>(lo);
        m.extrapolated = is_extrapolated(r->input_len, lo);
        m.slo_met = meets_slo(workload.class_of(*r).slo, m.e2e_ms, m.ttft_ms, m.tpot_ms);
        records.push_back(m);
        makespan = std::max(makespan, exec);
    }
    return makespan;
}

}  // namespace

MetricsReport run(const std::vector<Schedule>& schedules,
                  const Workload& workload,
                  const std::vector<InstanceState>& instances,
                  const LatencyCoefficients& coeffs,
                  const SimConfig& sim_cfg,
                  double scheduling_overhead_ms) {
    if (schedules.size() != instances.size())
        throw DataError("simulator: schedule count does not match instance count");

    std::vector<RequestMetrics> records;
    for (std::size_t i = 0; i < schedules.size(); ++i) {
        Rng rng(Rng::derive(sim_cfg.seed, static_cast<std::uint64_t>(instances[i].id)));
        InstanceQueue queue;
        for (const auto& batch : schedules[i].batches) queue.pending.push_back(batch);

        double clock = 0.0;
        bool first = true;
        while (auto batch = dispatch(queue, /*instance_ready=*/true)) {
            const double start = first ? 0.0 : clock + sim_cfg.dispatch_gap_ms;
            first = false;
            clock = start + realize_batch(*batch, start, workload, coeffs,
                                          sim_cfg.noise_pct, rng, records);
        }
    }
    return MetricsReport::from_records(std::move(records), scheduling_overhead_ms);
}

FcfsResult run_fcfs(const Workload& workload,
                    const std::vector<InstanceState>& instances,
                    const LatencyCoefficients& coeffs,
                    const SimConfig& sim_cfg) {
    if (instances.empty())
        throw DataError("run_fcfs: need at least one instance");
    for (const auto& inst : instances) inst.validate();

    std::vector<int> order;
    order.reserve(workload.requests.size());
    for (const auto& r : workload.requests) order.push_back(r.id);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double ta = workload.find_request(a)->arrival_time_ms;
        const double tb = workload.find_request(b)->arrival_time_ms;
        return ta != tb ? ta < tb : a < b;
    });

    FcfsResult res;
    res.schedules.resize(instances.size());
    std::vector<RequestMetrics> records;

    // earliest-ready instance takes the next batch; ties to the lowest id
    using Slot = std::pair<double, std::size_t>;
    std::priority_queue<Slot, std::vector<Slot>, std::greater<>> ready;
    for (std::size_t i = 0; i < instances.size(); ++i) ready.emplace(0.0, i);

    Rng rng(sim_cfg.seed);
    std::size_t pos = 0;
    while (pos < order.size()) {
        auto [clock, inst] = ready.top();
        ready.pop();
        const std::size_t take = std::min<std::size_t>(instances[inst].max_batch_size,
                                                       order.size() - pos);
        Batch batch(order.begin() + pos, order.begin() + pos + take);
        pos += take;

        const double start = res.schedules[inst].batches.empty()
                                 ? 0.0
                                 : clock + sim_cfg.dispatch_gap_ms;
        const double makespan = realize_batch(batch, start, workload, coeffs,
                                              sim_cfg.noise_pct, rng, records);
        res.schedules[inst].batches.push_back(std::move(batch));
        ready.emplace(start + makespan, inst);
    }

    res.report = MetricsReport::from_records(std::move(records), 0.0);
    return res;
}

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const auto mid = values.size() / 2;
    return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::string policy_name(Policy p) {
    switch (p) {
        case Policy::SA: return "sa";
        case Policy::EXHAUSTIVE: return "exhaustive";
        case Policy::FCFS: return "fcfs";
    }
    return "?";
}

Policy parse_policy(const std::string& name) {
    if (name == "sa") return Policy::SA;
    if (name == "exhaustive") return Policy::EXHAUSTIVE;
    if (name == "fcfs") return Policy::FCFS;
    throw DataError("unknown policy '" + name + "' (expected sa, exhaustive, or fcfs)");
}

ComparisonTable compare(const Workload& workload,
                        const std::vector<InstanceState>& instances,
                        const LatencyCoefficients& coeffs,
                        const std::vector<Policy>& policies,
                        const std::vector<std::uint64_t>& seeds,
                        const AnnealConfig& anneal_cfg,
                        const SimConfig& sim_cfg,
                        int exhaustive_cap) {
    int max_batch = 0;
    for (const auto& inst : instances)
        max_batch = std::max(max_batch, inst.max_batch_size);

    ComparisonTable table;
    for (Policy policy : policies) {
        for (std::uint64_t seed : seeds) {
            SimConfig sim = sim_cfg;
            sim.seed = seed;

            MetricsReport report;
            if (policy == Policy::FCFS) {
                const auto t0 = std::chrono::steady_clock::now();
                FcfsResult f = run_fcfs(workload, instances, coeffs, sim);
                report = std::move(f.report);
                report.scheduling_overhead_ms = std::chrono::duration<double, std::milli>(
                                                    std::chrono::steady_clock::now() - t0)
                                                    .count();
            } else {
                AnnealConfig cfg = anneal_cfg;
                cfg.seed = seed;
                ScheduleAllResult sr = schedule_all(workload, instances, coeffs, cfg,
                                                    policy == Policy::SA ? Policy::SA
                                                                         : Policy::EXHAUSTIVE,
                                                    exhaustive_cap);
                std::vector<Schedule> schedules;
                schedules.reserve(sr.per_instance.size());
                for (auto& ev : sr.per_instance) schedules.push_back(ev.schedule);
                report = run(schedules, workload, instances, coeffs, sim, sr.overhead_ms);
            }

            ComparisonRow row;
            row.policy = policy_name(policy);
            row.seed = seed;
            row.n_requests = static_cast<int>(workload.requests.size());
            row.max_batch = max_batch;
            row.attainment = report.slo_attainment;
            row.avg_latency_ms = report.avg_latency_ms;
            row.g_req_per_ms = report.g;
            row.overhead_ms = report.scheduling_overhead_ms;
            table.rows.push_back(row);
        }
    }

    for (Policy policy : policies) {
        std::vector<double> att, lat, g, ovh;
        for (const auto& row : table.rows) {
            if (row.policy != policy_name(policy)) continue;
            att.push_back(row.attainment);
            lat.push_back(row.avg_latency_ms);
            g.push_back(row.g_req_per_ms);
            ovh.push_back(row.overhead_ms);
        }
        ComparisonRow med;
        med.policy = policy_name(policy);
        med.n_requests = static_cast<int>(workload.requests.size());
        med.max_batch = max_batch;
        med.attainment = median(att);
        med.avg_latency_ms = median(lat);
        med.g_req_per_ms = median(g);
        med.overhead_ms = median(ovh);
        table.medians.push_back(med);
    }
    return table;
}

}  // namespace slosched
