#ifndef SLOSCHED_OBJECTIVE_HPP
#define SLOSCHED_OBJECTIVE_HPP

#include <vector>

#include "slosched/core.hpp"
#include "slosched/latency_model.hpp"

namespace slosched {

// Predicted per-phase latencies for one request inside its batch.
struct ExecProfile {
    int request_id = 0;
    double exec_ms = 0.0;
    double prefill_ms = 0.0;
    double tpot_ms = 0.0;
    bool extrapolated = false;
};

// Per-request exec/prefill/TPOT predictions; b is each request's own batch
// size. Throws DataError when a request lacks a predicted output length.
std::vector<ExecProfile> batch_exec_profile(const Schedule& schedule,
                                            const LatencyCoefficients& coeffs,
                                            const Workload& workload);

// Batches run back-to-back in order; a batch's makespan is the largest
// exec time among its members and a request waits for all earlier batches.
// Input and output are ordered like schedule.flatten().
std::vector<double> waiting_times(const Schedule& schedule,
                                  const std::vector<ExecProfile>& profiles);

bool meets_slo(const SloSpec& slo, double e2e_ms, double ttft_ms, double tpot_ms);

// Full evaluation: e2e = exec + wait, TTFT = prefill + wait, SLO flags per
// class, n = met count, t = summed e2e, g = n / t.
EvaluatedSchedule evaluate(const Schedule& schedule,
                           const LatencyCoefficients& coeffs,
                           const Workload& workload);

}  // namespace slosched

#endif
