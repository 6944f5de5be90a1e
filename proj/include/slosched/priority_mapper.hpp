#ifndef SLOSCHED_PRIORITY_MAPPER_HPP
#define SLOSCHED_PRIORITY_MAPPER_HPP

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "slosched/core.hpp"
#include "slosched/latency_model.hpp"
#include "slosched/objective.hpp"
#include "slosched/rng.hpp"

namespace slosched {

struct AnnealConfig {
    double t0 = 500.0;
    double t_thres = 20.0;
    int iter = 100;
    double tau = 0.95;
    std::uint64_t seed = 0;
    // Factor applied to the G delta inside the Metropolis acceptance
    // probability. Unset means t0 / G(start): a full relative loss of G is
    // borderline-acceptable at T = t0 and all but rejected near t_thres.
    std::optional<double> objective_scale;

    void validate() const;
};

struct AnnealStats {
    std::uint64_t proposals = 0;
    std::uint64_t accepted = 0;
    bool shortcut = false;
    double g_sorted_start = 0.0;
    double g_input_start = 0.0;
    double objective_scale_used = 1.0;
};

struct AnnealResult {
    EvaluatedSchedule best;
    AnnealStats stats;
};

// Two starting solutions, both packed greedily into max-size batches:
// first ordered ascending by predicted standalone e2e (exec at b =
// max_batch), second preserving arrival order.
std::pair<Schedule, Schedule> initial_candidates(const Workload& workload,
                                                 const std::vector<int>& request_ids,
                                                 const LatencyCoefficients& coeffs,
                                                 int max_batch);

// If the latency-sorted candidate already meets every SLO it is the final
// answer and the search is skipped.
std::optional<EvaluatedSchedule> shortcut_check(const Schedule& sorted_schedule,
                                                const LatencyCoefficients& coeffs,
                                                const Workload& workload);

// One random move: squeeze a request into the previous batch, delay it
// into the next, or swap two requests' position slots. Inapplicable draws
// are retried a bounded number of times, then swap is forced; a schedule
// with a single request comes back unchanged. Always a valid partition.
Schedule neighbor(const Schedule& schedule, Rng& rng, int max_batch);

// Simulated-annealing search over request order and batch assignment.
// Deterministic given (workload, config, seed); returns the best-so-far
// schedule, never worse than either starting candidate.
AnnealResult anneal(const Workload& workload, const std::vector<int>& request_ids,
                    const LatencyCoefficients& coeffs, const AnnealConfig& config,
                    int max_batch);

struct ExhaustiveResult {
    EvaluatedSchedule best;
    std::uint64_t schedules_evaluated = 0;
};

// Small-n oracle: every permutation x every ordered batch-size composition
// with parts <= max_batch. Ties broken by lower t, then by lexicographic
// request order, then by batch-size sequence. Throws CapacityError when
// the request count exceeds n_cap (the space is O(N! * 2^N)).
ExhaustiveResult exhaustive(const Workload& workload, const std::vector<int>& request_ids,
                            const LatencyCoefficients& coeffs, int max_batch,
                            int n_cap = 10);

}  // namespace slosched

#endif
