#ifndef SLOSCHED_SCHEDULER_HPP
#define SLOSCHED_SCHEDULER_HPP

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "slosched/core.hpp"
#include "slosched/priority_mapper.hpp"

namespace slosched {

// Tokens that fit in the given memory: floor(remaining_mem * mu / sigma),
// mu the memory utility (fragmentation discount), sigma bytes per token.
long long token_capacity(std::uint64_t remaining_mem_bytes, double mu, double sigma);

struct AssignmentResult {
    std::vector<std::vector<int>> per_instance;  // request ids, in assignment order
    int epochs = 1;  // incremented each time remaining memory is reset
};

// Round-robin memory-greedy assignment: requests in predicted-e2e order,
// each to the instance with the largest remaining token capacity (ties to
// the lowest id). When even that instance cannot fit a request, all
// remaining memory resets to totals and a new epoch starts. Throws
// CapacityError when a request exceeds a fresh instance's full capacity.
AssignmentResult assign_instances(const Workload& workload,
                                  const std::vector<InstanceState>& instances,
                                  const LatencyCoefficients& coeffs);

enum class Policy { SA, EXHAUSTIVE, FCFS };

struct InstanceQueue {
    std::deque<Batch> pending;
};

// Pops the next whole batch when the instance is ready; the inter-batch
// dispatch interval is applied by the simulator clock, not here.
std::optional<Batch> dispatch(InstanceQueue& queue, bool instance_ready);

struct ScheduleAllResult {
    AssignmentResult assignment;
    std::vector<EvaluatedSchedule> per_instance;  // parallel to instances
    std::vector<AnnealStats> stats;               // empty entries for exhaustive
    std::vector<InstanceQueue> queues;
    double overhead_ms = 0.0;
};

// Full scheduling pass: assign to instances, run the priority mapper per
// instance (SA or the exhaustive oracle), enqueue the resulting batches.
// Per-instance search seeds derive from (config.seed, instance id) so a
// given instance's subproblem is reproducible regardless of fleet size.
ScheduleAllResult schedule_all(const Workload& workload,
                               const std::vector<InstanceState>& instances,
                               const LatencyCoefficients& coeffs,
                               const AnnealConfig& config,
                               Policy policy = Policy::SA,
                               int exhaustive_cap = 10);

}  // namespace slosched

#endif
