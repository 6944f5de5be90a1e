#ifndef SLOSCHED_SIMULATOR_HPP
#define SLOSCHED_SIMULATOR_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "slosched/core.hpp"
#include "slosched/scheduler.hpp"

namespace slosched {

struct SimConfig {
    double noise_pct = 0.0;         // uniform multiplicative execution noise
    double dispatch_gap_ms = 0.1;   // interval between consecutive batch dispatches
    std::uint64_t seed = 0;
};

// Replays per-instance schedules against a synthetic backend whose ground
// truth is the latency model over *true* output lengths, each request
// scaled by one noise factor shared between its prefill and decode phases.
// Batches run back-to-back separated by the dispatch gap.
MetricsReport run(const std::vector<Schedule>& schedules,
                  const Workload& workload,
                  const std::vector<InstanceState>& instances,
                  const LatencyCoefficients& coeffs,
                  const SimConfig& sim_cfg,
                  double scheduling_overhead_ms = 0.0);

struct FcfsResult {
    MetricsReport report;
    std::vector<Schedule> schedules;  // parallel to instances
};

// Baseline without SLO awareness: requests in arrival order, packed
// greedily up to max_batch onto whichever instance becomes ready first.
FcfsResult run_fcfs(const Workload& workload,
                    const std::vector<InstanceState>& instances,
                    const LatencyCoefficients& coeffs,
                    const SimConfig& sim_cfg);

struct ComparisonRow {
    std::string policy;
    std::uint64_t seed = 0;
    int n_requests = 0;
    int max_batch = 0;
    double attainment = 0.0;
    double avg_latency_ms = 0.0;
    double g_req_per_ms = 0.0;
    double overhead_ms = 0.0;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
    std::vector<ComparisonRow> medians;  // one per policy, seed field unused
};

double median(std::vector<double> values);

// One row per (policy, seed): schedule the workload under the policy,
// simulate, and record realized attainment / latency / G / overhead.
ComparisonTable compare(const Workload& workload,
                        const std::vector<InstanceState>& instances,
                        const LatencyCoefficients& coeffs,
                        const std::vector<Policy>& policies,
                        const std::vector<std::uint64_t>& seeds,
                        const AnnealConfig& anneal_cfg,
                        const SimConfig& sim_cfg,
                        int exhaustive_cap = 10);

std::string policy_name(Policy p);
Policy parse_policy(const std::string& name);

}  // namespace slosched

#endif
