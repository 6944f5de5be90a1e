#include "slosched/objective.hpp"

#include <algorithm>

namespace slosched {

std::vector<ExecProfile> batch_exec_profile(const Schedule& schedule,
                                            const LatencyCoefficients& coeffs,
                                            const Workload& workload) {
    std::vector<ExecProfile> out;
    out.reserve(schedule.request_count());
    for (const auto& batch : schedule.batches) {
        const int b = static_cast<int>(batch.size());
        for (int id : batch) {
            const Request* r = workload.find_request(id);
            if (!r) throw DataError("schedule references unknown request " + std::to_string(id));
            if (!r->predicted_output_len)
                throw DataError("request " + std::to_string(id) + " missing predicted length");
            const int lo = *r->predicted_output_len;
            ExecProfile p;
            p.request_id = id;
            p.exec_ms = predict_exec(coeffs, b, r->input_len, lo);
            p.prefill_ms = predict_prefill(coeffs, b, r->input_len);
            p.tpot_ms = predict_tpot(coeffs, b, r->input_len, lo);
            p.extrapolated = is_extrapolated(r->input_len, lo);
            out.push_back(p);
        }
    }
    return out;
}

std::vector<double> waiting_times(const Schedule& schedule,
                                  const std::vector<ExecProfile>& profiles) {
    std::vector<double> waits;
    waits.reserve(profiles.size());
    double elapsed = 0.0;
    std::size_t idx = 0;
    for (const auto& batch : schedule.batches) {
        double makespan = 0.0;
        for (std::size_t k = 0; k < batch.size(); ++k) {
            waits.push_back(elapsed);
            makespan = std::max(makespan, profiles[idx++].exec_ms);
        }
        elapsed += makespan;
    }
    return waits;
}

bool meets_slo(const SloSpec& slo, double e2e_ms, double ttft_ms, double tpot_ms) {
    if (slo.kind == SloKind::E2E)
        return e2e_ms <= *slo.e2e_ms;
    return ttft_ms <= *slo.ttft_ms && tpot_ms <= *slo.tpot_ms;
}

EvaluatedSchedule evaluate(const Schedule& schedule,
                           const LatencyCoefficients& coeffs,
                           const Workload& workload) {
    EvaluatedSchedule ev;
    ev.schedule = schedule;
    const auto profiles = batch_exec_profile(schedule, coeffs, workload);
    const auto waits = waiting_times(schedule, profiles);

    ev.per_request.reserve(profiles.size());
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        const auto& p = profiles[i];
        const Request& r = *workload.find_request(p.request_id);
        RequestMetrics m;
        m.request_id = p.request_id;
        m.wait_ms = waits[i];
        m.exec_ms = p.exec_ms;
        m.e2e_ms = p.exec_ms + waits[i];
        m.ttft_ms = p.prefill_ms + waits[i];
        m.tpot_ms = p.tpot_ms;
        m.extrapolated = p.extrapolated;
        m.slo_met = meets_slo(workload.class_of(r).slo, m.e2e_ms, m.ttft_ms, m.tpot_ms);
        if (m.slo_met) ev.n++;
        ev.t_ms += m.e2e_ms;
        ev.per_request.push_back(m);
    }
    ev.g = ev.t_ms > 0.0 ? static_cast<double>(ev.n) / ev.t_ms : 0.0;
    return ev;
}

}  // namespace slosched
