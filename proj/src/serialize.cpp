#include "slosched/serialize.hpp"

#include <fstream>

using nlohmann::json;

namespace slosched {

void to_json(json& j, const SloSpec& s) {
    j = json{{"kind", s.kind == SloKind::E2E ? "e2e" : "ttft_tpot"}};
    if (s.e2e_ms) j["e2e_ms"] = *s.e2e_ms;
    if (s.ttft_ms) j["ttft_ms"] = *s.ttft_ms;
    if (s.tpot_ms) j["tpot_ms"] = *s.tpot_ms;
}

void from_json(const json& j, SloSpec& s) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "e2e")
        s.kind = SloKind::E2E;
    else if (kind == "ttft_tpot")
        s.kind = SloKind::TTFT_TPOT;
    else
        throw DataError("SloSpec: unknown kind '" + kind + "'");
    s.e2e_ms.reset();
    s.ttft_ms.reset();
    s.tpot_ms.reset();
    if (j.contains("e2e_ms")) s.e2e_ms = j.at("e2e_ms").get<double>();
    if (j.contains("ttft_ms")) s.ttft_ms = j.at("ttft_ms").get<double>();
    if (j.contains("tpot_ms")) s.tpot_ms = j.at("tpot_ms").get<double>();
}

void to_json(json& j, const TaskClass& c) {
    j = json{{"id", c.id}, {"name", c.name}, {"slo", c.slo}};
    if (const auto* g = std::get_if<GaussianPrior>(&c.output_prior))
        j["output_prior"] = json{{"mean_tokens", g->mean_tokens}, {"std_tokens", g->std_tokens}};
    else if (const auto* r = std::get_if<RangePrior>(&c.output_prior))
        j["output_prior"] = json{{"low", r->low}, {"high", r->high}};
}

void from_json(const json& j, TaskClass& c) {
    c.id = j.at("id").get<int>();
    c.name = j.at("name").get<std::string>();
    c.slo = j.at("slo").get<SloSpec>();
    c.output_prior = std::monostate{};
    if (j.contains("output_prior")) {
        const auto& p = j.at("output_prior");
        if (p.contains("mean_tokens"))
            c.output_prior = GaussianPrior{p.at("mean_tokens").get<double>(),
                                           p.value("std_tokens", 0.0)};
        else
            c.output_prior = RangePrior{p.at("low").get<int>(), p.at("high").get<int>()};
    }
}

void to_json(json& j, const Request& r) {
    j = json{{"id", r.id},
             {"task_class_id", r.task_class_id},
             {"input_len", r.input_len},
             {"output_len", r.true_output_len},
             {"arrival_ms", r.arrival_time_ms}};
    if (r.predicted_output_len) j["predicted_output_len"] = *r.predicted_output_len;
}

void from_json(const json& j, Request& r) {
    r.id = j.at("id").get<int>();
    r.task_class_id = j.at("task_class_id").get<int>();
    r.input_len = j.at("input_len").get<int>();
    r.true_output_len = j.at("output_len").get<int>();
    r.arrival_time_ms = j.at("arrival_ms").get<double>();
    r.predicted_output_len.reset();
    if (j.contains("predicted_output_len"))
        r.predicted_output_len = j.at("predicted_output_len").get<int>();
}

void to_json(json& j, const LatencyCoefficients& c) {
    j = json{{"alpha_p", c.alpha_p}, {"beta_p", c.beta_p},   {"gamma_p", c.gamma_p},
             {"delta_p", c.delta_p}, {"alpha_d", c.alpha_d}, {"beta_d", c.beta_d},
             {"gamma_d", c.gamma_d}, {"delta_d", c.delta_d}};
}

void from_json(const json& j, LatencyCoefficients& c) {
    j.at("alpha_p").get_to(c.alpha_p);
    j.at("beta_p").get_to(c.beta_p);
    j.at("gamma_p").get_to(c.gamma_p);
    j.at("delta_p").get_to(c.delta_p);
    j.at("alpha_d").get_to(c.alpha_d);
    j.at("beta_d").get_to(c.beta_d);
    j.at("gamma_d").get_to(c.gamma_d);
    j.at("delta_d").get_to(c.delta_d);
}

void to_json(json& j, const Schedule& s) { j = json{{"batches", s.batches}}; }

void from_json(const json& j, Schedule& s) {
    s.batches = j.at("batches").get<std::vector<Batch>>();
}

void to_json(json& j, const InstanceState& i) {
    j = json{{"id", i.id},
             {"total_mem_bytes", i.total_mem},
             {"mem_utility", i.mem_utility},
             {"bytes_per_token", i.bytes_per_token},
             {"max_batch_size", i.max_batch_size}};
}

void from_json(const json& j, InstanceState& i) {
    i.id = j.at("id").get<int>();
    i.total_mem = j.at("total_mem_bytes").get<std::uint64_t>();
    i.remaining_mem = j.value("remaining_mem_bytes", i.total_mem);
    i.mem_utility = j.at("mem_utility").get<double>();
    i.bytes_per_token = j.at("bytes_per_token").get<double>();
    i.max_batch_size = j.at("max_batch_size").get<int>();
}

void to_json(json& j, const RequestMetrics& m) {
    j = json{{"request_id", m.request_id}, {"wait_ms", m.wait_ms},
             {"exec_ms", m.exec_ms},        {"e2e_ms", m.e2e_ms},
             {"ttft_ms", m.ttft_ms},        {"tpot_ms", m.tpot_ms},
             {"slo_met", m.slo_met},        {"extrapolated", m.extrapolated}};
}

void from_json(const json& j, RequestMetrics& m) {
    j.at("request_id").get_to(m.request_id);
    j.at("wait_ms").get_to(m.wait_ms);
    j.at("exec_ms").get_to(m.exec_ms);
    j.at("e2e_ms").get_to(m.e2e_ms);
    j.at("ttft_ms").get_to(m.ttft_ms);
    j.at("tpot_ms").get_to(m.tpot_ms);
    j.at("slo_met").get_to(m.slo_met);
    m.extrapolated = j.value("extrapolated", false);
}

void to_json(json& j, const EvaluatedSchedule& e) {
    j = json{{"schedule", e.schedule},
             {"per_request", e.per_request},
             {"n_met", e.n},
             {"t_ms", e.t_ms},
             {"g_req_per_ms", e.g}};
}

void from_json(const json& j, EvaluatedSchedule& e) {
    j.at("schedule").get_to(e.schedule);
    j.at("per_request").get_to(e.per_request);
    j.at("n_met").get_to(e.n);
    j.at("t_ms").get_to(e.t_ms);
    j.at("g_req_per_ms").get_to(e.g);
}

void to_json(json& j, const MetricsReport& r) {
    j = json{{"slo_attainment", r.slo_attainment},
             {"avg_latency_ms", r.avg_latency_ms},
             {"g_req_per_ms", r.g},
             {"scheduling_overhead_ms", r.scheduling_overhead_ms},
             {"n_met", r.n_met},
             {"total_latency_ms", r.total_latency_ms},
             {"per_request", r.per_request}};
}

void from_json(const json& j, MetricsReport& r) {
    j.at("slo_attainment").get_to(r.slo_attainment);
    j.at("avg_latency_ms").get_to(r.avg_latency_ms);
    j.at("g_req_per_ms").get_to(r.g);
    j.at("scheduling_overhead_ms").get_to(r.scheduling_overhead_ms);
    j.at("n_met").get_to(r.n_met);
    j.at("total_latency_ms").get_to(r.total_latency_ms);
    j.at("per_request").get_to(r.per_request);
}

void to_json(json& j, const LengthModel& m) {
    j = json{{"task_class_id", m.task_class_id},
             {"count", m.count},
             {"mean", m.mean},
             {"m2", m.m2}};
}

void from_json(const json& j, LengthModel& m) {
    j.at("task_class_id").get_to(m.task_class_id);
    j.at("count").get_to(m.count);
    j.at("mean").get_to(m.mean);
    j.at("m2").get_to(m.m2);
}

json workload_to_json(const Workload& w) {
    return json{{"classes", w.classes}, {"requests", w.requests}};
}

Workload workload_from_json(const json& j) {
    return validate_workload(j.at("requests").get<std::vector<Request>>(),
                             j.at("classes").get<std::vector<TaskClass>>());
}

std::vector<InstanceState> load_instances(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open instance roster: " + path);
    std::vector<InstanceState> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            InstanceState inst = json::parse(line).get<InstanceState>();
            inst.validate();
            out.push_back(inst);
        } catch (const json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (out.empty()) throw DataError(path + ": roster declares no instances");
    return out;
}

void save_instances(const std::vector<InstanceState>& instances, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open instance roster for writing: " + path);
    for (const auto& inst : instances) out << json(inst).dump() << "\n";
}

}  // namespace slosched
