#include "slosched/core.hpp"

#include <algorithm>
#include <cmath>

namespace slosched {

SloSpec SloSpec::e2e(double ms) {
    SloSpec s;
    s.kind = SloKind::E2E;
    s.e2e_ms = ms;
    return s;
}

SloSpec SloSpec::ttft_tpot(double ttft_ms, double tpot_ms) {
    SloSpec s;
    s.kind = SloKind::TTFT_TPOT;
    s.ttft_ms = ttft_ms;
    s.tpot_ms = tpot_ms;
    return s;
}

void SloSpec::validate() const {
    if (kind == SloKind::E2E) {
        if (!e2e_ms || *e2e_ms <= 0.0)
            throw DataError("SloSpec: E2E kind requires e2e_ms > 0");
    } else {
        if (!ttft_ms || *ttft_ms <= 0.0 || !tpot_ms || *tpot_ms <= 0.0)
            throw DataError("SloSpec: TTFT_TPOT kind requires ttft_ms > 0 and tpot_ms > 0");
    }
}

void TaskClass::validate() const {
    slo.validate();
    if (const auto* g = std::get_if<GaussianPrior>(&output_prior)) {
        if (g->std_tokens < 0.0 || !std::isfinite(g->mean_tokens) || !std::isfinite(g->std_tokens))
            throw DataError("TaskClass '" + name + "': Gaussian prior requires finite mean and std >= 0");
    } else if (const auto* r = std::get_if<RangePrior>(&output_prior)) {
        if (r->low < 1 || r->low > r->high)
            throw DataError("TaskClass '" + name + "': range prior requires 1 <= low <= high");
    }
}

void Request::validate() const {
    if (input_len < 1)
        throw DataError("request " + std::to_string(id) + ": non-positive length");
    if (true_output_len < 1)
        throw DataError("request " + std::to_string(id) + ": non-positive length");
    if (predicted_output_len && *predicted_output_len < 1)
        throw DataError("request " + std::to_string(id) + ": non-positive length");
    if (!std::isfinite(arrival_time_ms) || arrival_time_ms < 0.0)
        throw DataError("request " + std::to_string(id) + ": invalid arrival time");
}

void LatencyCoefficients::validate() const {
    for (double v : {alpha_p, beta_p, gamma_p, delta_p, alpha_d, beta_d, gamma_d, delta_d}) {
        if (!std::isfinite(v))
            throw DataError("LatencyCoefficients: non-finite value");
    }
    if (alpha_p < 0.0 || alpha_d < 0.0)
        throw DataError("LatencyCoefficients: alpha_p and alpha_d must be >= 0");
}

std::size_t Schedule::request_count() const {
    std::size_t n = 0;
    for (const auto& b : batches) n += b.size();
    return n;
}

std::vector<int> Schedule::flatten() const {
    std::vector<int> out;
    out.reserve(request_count());
    for (const auto& b : batches)
        out.insert(out.end(), b.begin(), b.end());
    return out;
}

std::unordered_map<int, std::pair<int, int>> Schedule::positions() const {
    std::unordered_map<int, std::pair<int, int>> out;
    int pos = 0;
    for (int bi = 0; bi < static_cast<int>(batches.size()); ++bi) {
        for (int id : batches[bi]) out[id] = {pos++, bi};
    }
    return out;
}

bool Schedule::is_partition_of(const std::vector<int>& ids, int max_batch) const {
    std::vector<int> seen;
    for (const auto& b : batches) {
        if (b.empty()) return false;
        if (max_batch > 0 && static_cast<int>(b.size()) > max_batch) return false;
        seen.insert(seen.end(), b.begin(), b.end());
    }
    if (seen.size() != ids.size()) return false;
    std::vector<int> want = ids;
    std::sort(seen.begin(), seen.end());
    std::sort(want.begin(), want.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) return false;
    return seen == want;
}

void InstanceState::validate() const {
    if (remaining_mem > total_mem)
        throw DataError("instance " + std::to_string(id) + ": remaining_mem > total_mem");
    if (mem_utility <= 0.0 || mem_utility > 1.0)
        throw DataError("instance " + std::to_string(id) + ": mem_utility must be in (0,1]");
    if (bytes_per_token <= 0.0)
        throw DataError("instance " + std::to_string(id) + ": bytes_per_token must be > 0");
    if (max_batch_size < 1)
        throw DataError("instance " + std::to_string(id) + ": max_batch_size must be >= 1");
}

MetricsReport MetricsReport::from_records(std::vector<RequestMetrics> records,
                                          double overhead_ms) {
    MetricsReport rep;
    rep.per_request = std::move(records);
    rep.scheduling_overhead_ms = overhead_ms;
    for (const auto& r : rep.per_request) {
        if (r.slo_met) rep.n_met++;
        rep.total_latency_ms += r.e2e_ms;
    }
    const auto n_total = rep.per_request.size();
    if (n_total > 0) {
        rep.slo_attainment = static_cast<double>(rep.n_met) / static_cast<double>(n_total);
        rep.avg_latency_ms = rep.total_latency_ms / static_cast<double>(n_total);
        rep.g = rep.total_latency_ms > 0.0
                    ? static_cast<double>(rep.n_met) / rep.total_latency_ms
                    : 0.0;
    }
    return rep;
}

const TaskClass& Workload::class_of(const Request& r) const {
    auto it = class_index_.find(r.task_class_id);
    if (it == class_index_.end())
        throw DataError("request " + std::to_string(r.id) + ": unknown task_class_id " +
                        std::to_string(r.task_class_id));
    return classes[it->second];
}

const TaskClass* Workload::find_class(int class_id) const {
    auto it = class_index_.find(class_id);
    return it == class_index_.end() ? nullptr : &classes[it->second];
}

const Request* Workload::find_request(int request_id) const {
    auto it = request_index_.find(request_id);
    return it == request_index_.end() ? nullptr : &requests[it->second];
}

Workload validate_workload(std::vector<Request> requests, std::vector<TaskClass> classes) {
    Workload w;
    w.classes = std::move(classes);
    w.requests = std::move(requests);
    for (std::size_t i = 0; i < w.classes.size(); ++i) {
        w.classes[i].validate();
        if (!w.class_index_.emplace(w.classes[i].id, i).second)
            throw DataError("duplicate task class id " + std::to_string(w.classes[i].id));
    }
    for (std::size_t i = 0; i < w.requests.size(); ++i) {
        const Request& r = w.requests[i];
        r.validate();
        if (!w.request_index_.emplace(r.id, i).second)
            throw DataError("duplicate request id " + std::to_string(r.id));
        if (w.class_index_.find(r.task_class_id) == w.class_index_.end())
            throw DataError("request " + std::to_string(r.id) + ": unknown task_class_id " +
                            std::to_string(r.task_class_id));
    }
    return w;
}

}  // namespace slosched
