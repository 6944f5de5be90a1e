#include "slosched/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace slosched {

long long token_capacity(std::uint64_t remaining_mem_bytes, double mu, double sigma) {
    if (sigma <= 0.0)
        throw std::invalid_argument("token_capacity: sigma must be > 0");
    if (mu <= 0.0 || mu > 1.0)
        throw std::invalid_argument("token_capacity: mu must be in (0,1]");
    return static_cast<long long>(
        std::floor(static_cast<double>(remaining_mem_bytes) * mu / sigma));
}

AssignmentResult assign_instances(const Workload& workload,
                                  const std::vector<InstanceState>& instances,
                                  const LatencyCoefficients& coeffs) {
    if (instances.empty())
        throw DataError("assign_instances: need at least one instance");
    for (const auto& inst : instances) inst.validate();

    std::vector<int> order;
    order.reserve(workload.requests.size());
    for (const auto& r : workload.requests) order.push_back(r.id);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const Request& ra = *workload.find_request(a);
        const Request& rb = *workload.find_request(b);
        if (!ra.predicted_output_len || !rb.predicted_output_len)
            throw DataError("assign_instances: request missing predicted length");
        const double ea = predict_exec(coeffs, 1, ra.input_len, *ra.predicted_output_len);
        const double eb = predict_exec(coeffs, 1, rb.input_len, *rb.predicted_output_len);
        return ea != eb ? ea < eb : a < b;
    });

    const auto k = instances.size();
    std::vector<double> remaining(k);
    for (std::size_t i = 0; i < k; ++i)
        remaining[i] = static_cast<double>(instances[i].remaining_mem);

    auto capacity = [&](std::size_t i) {
        return token_capacity(static_cast<std::uint64_t>(remaining[i]),
                              instances[i].mem_utility, instances[i].bytes_per_token);
    };
    auto argmax_capacity = [&]() {
        std::size_t best = 0;
        long long best_cap = capacity(0);
        for (std::size_t i = 1; i < k; ++i) {
            const long long c = capacity(i);
            if (c > best_cap) {
                best = i;
                best_cap = c;
            }
        }
        return std::pair{best, best_cap};
    };

    AssignmentResult res;
    res.per_instance.resize(k);
    for (int id : order) {
        const Request& r = *workload.find_request(id);
        const long long need = r.input_len + *r.predicted_output_len;
        auto [inst, cap] = argmax_capacity();
        if (cap < need) {
            // a maximum of requests has been placed; reset and start a
            // fresh iteration epoch
            for (std::size_t i = 0; i < k; ++i)
                remaining[i] = static_cast<double>(instances[i].total_mem);
            res.epochs++;
            std::tie(inst, cap) = argmax_capacity();
            if (cap < need)
                throw CapacityError("request " + std::to_string(id) +
                                    " cannot fit any instance");
        }
        res.per_instance[inst].push_back(id);
        remaining[inst] -= static_cast<double>(need) * instances[inst].bytes_per_token /
                           instances[inst].mem_utility;
        if (remaining[inst] < 0.0) remaining[inst] = 0.0;
    }
    return res;
}

std::optional<Batch> dispatch(InstanceQueue& queue, bool instance_ready) {
    if (!instance_ready || queue.pending.empty()) return std::nullopt;
    Batch next = std::move(queue.pending.front());
    queue.pending.pop_front();
    return next;
}

ScheduleAllResult schedule_all(const Workload& workload,
                               const std::vector<InstanceState>& instances,
                               const LatencyCoefficients& coeffs,
                               const AnnealConfig& config,
                               Policy policy,
                               int exhaustive_cap) {
    if (policy == Policy::FCFS)
        throw std::invalid_argument("schedule_all: FCFS is a simulator baseline, not a mapper policy");

    const auto start = std::chrono::steady_clock::now();

    ScheduleAllResult res;
    res.assignment = assign_instances(workload, instances, coeffs);
    res.per_instance.resize(instances.size());
    res.stats.resize(instances.size());
    res.queues.resize(instances.size());

    for (std::size_t i = 0; i < instances.size(); ++i) {
        const auto& ids = res.assignment.per_instance[i];
        const int max_batch = instances[i].max_batch_size;
        if (policy == Policy::SA) {
            AnnealConfig per_inst = config;
            per_inst.seed = Rng::derive(config.seed, static_cast<std::uint64_t>(instances[i].id));
            AnnealResult ar = anneal(workload, ids, coeffs, per_inst, max_batch);
            res.per_instance[i] = std::move(ar.best);
            res.stats[i] = ar.stats;
        } else {
            res.per_instance[i] = exhaustive(workload, ids, coeffs, max_batch, exhaustive_cap).best;
        }
        for (const auto& batch : res.per_instance[i].schedule.batches)
            res.queues[i].pending.push_back(batch);
    }

    res.overhead_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    return res;
}

}  // namespace slosched
