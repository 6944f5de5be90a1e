#include "slosched/workload.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "slosched/rng.hpp"

using nlohmann::json;

namespace slosched {

namespace {

constexpr int kMaxGeneratedLen = 2047;

SloSpec parse_slo(const json& rec, const std::string& ctx) {
    const std::string kind = rec.at("slo_kind").get<std::string>();
    SloSpec slo;
    if (kind == "e2e") {
        slo = SloSpec::e2e(rec.at("e2e_ms").get<double>());
    } else if (kind == "ttft_tpot") {
        slo = SloSpec::ttft_tpot(rec.at("ttft_ms").get<double>(), rec.at("tpot_ms").get<double>());
    } else {
        throw DataError(ctx + ": slo_kind must be \"e2e\" or \"ttft_tpot\"");
    }
    return slo;
}

OutputPrior parse_prior(const json& rec) {
    if (rec.contains("prior_mean_tokens"))
        return GaussianPrior{rec.at("prior_mean_tokens").get<double>(),
                             rec.value("prior_std_tokens", 0.0)};
    if (rec.contains("prior_low"))
        return RangePrior{rec.at("prior_low").get<int>(), rec.at("prior_high").get<int>()};
    return std::monostate{};
}

int clamp_len(double v) {
    return std::clamp(static_cast<int>(std::llround(v)), 1, kMaxGeneratedLen);
}

}  // namespace

Workload load_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open trace file: " + path);

    std::vector<TaskClass> classes;
    std::vector<Request> requests;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string ctx = path + ":" + std::to_string(lineno);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(ctx + ": parse error: " + e.what());
        }
        try {
            if (rec.contains("slo_kind")) {
                TaskClass c;
                c.id = static_cast<int>(classes.size());
                c.name = rec.at("task").get<std::string>();
                c.slo = parse_slo(rec, ctx);
                c.output_prior = parse_prior(rec);
                classes.push_back(std::move(c));
            } else {
                Request r;
                r.id = rec.at("id").get<int>();
                const std::string task = rec.at("task").get<std::string>();
                auto it = std::find_if(classes.begin(), classes.end(),
                                       [&](const TaskClass& c) { return c.name == task; });
                if (it == classes.end())
                    throw DataError(ctx + ": request references undeclared task '" + task + "'");
                r.task_class_id = it->id;
                r.input_len = rec.at("input_len").get<int>();
                r.true_output_len = rec.at("output_len").get<int>();
                r.arrival_time_ms = rec.at("arrival_ms").get<double>();
                if (rec.contains("predicted_output_len"))
                    r.predicted_output_len = rec.at("predicted_output_len").get<int>();
                requests.push_back(std::move(r));
            }
        } catch (const json::exception& e) {
            throw DataError(ctx + ": schema violation: " + e.what());
        } catch (const DataError& e) {
            throw DataError(ctx + ": " + e.what());
        }
    }
    try {
        return validate_workload(std::move(requests), std::move(classes));
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

void save_trace(const Workload& workload, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open trace file for writing: " + path);
    for (const auto& c : workload.classes) {
        json rec;
        rec["task"] = c.name;
        if (c.slo.kind == SloKind::E2E) {
            rec["slo_kind"] = "e2e";
            rec["e2e_ms"] = *c.slo.e2e_ms;
        } else {
            rec["slo_kind"] = "ttft_tpot";
            rec["ttft_ms"] = *c.slo.ttft_ms;
            rec["tpot_ms"] = *c.slo.tpot_ms;
        }
        if (const auto* g = std::get_if<GaussianPrior>(&c.output_prior)) {
            rec["prior_mean_tokens"] = g->mean_tokens;
            rec["prior_std_tokens"] = g->std_tokens;
        } else if (const auto* r = std::get_if<RangePrior>(&c.output_prior)) {
            rec["prior_low"] = r->low;
            rec["prior_high"] = r->high;
        }
        out << rec.dump() << "\n";
    }
    for (const auto& r : workload.requests) {
        json rec;
        rec["id"] = r.id;
        rec["task"] = workload.class_of(r).name;
        rec["input_len"] = r.input_len;
        rec["output_len"] = r.true_output_len;
        rec["arrival_ms"] = r.arrival_time_ms;
        if (r.predicted_output_len)
            rec["predicted_output_len"] = *r.predicted_output_len;
        out << rec.dump() << "\n";
    }
}

std::pair<TaskClass, TaskClass> default_slo_classes() {
    TaskClass code;
    code.id = 0;
    code.name = "code";
    code.slo = SloSpec::e2e(30000.0);

    TaskClass chat;
    chat.id = 1;
    chat.name = "chat";
    chat.slo = SloSpec::ttft_tpot(10000.0, 50.0);
    return {code, chat};
}

std::pair<TaskClass, TaskClass> default_synth_classes(const LengthDists& dists) {
    auto [code, chat] = default_slo_classes();
    code.output_prior = GaussianPrior{dists.code_output_mean, dists.code_output_std};
    chat.output_prior = GaussianPrior{dists.chat_output_mean, dists.chat_output_std};
    return {code, chat};
}

std::vector<Request> generate_mixed(int n, std::uint64_t seed,
                                    const TaskClass& code_class,
                                    const TaskClass& chat_class,
                                    const LengthDists& dists) {
    Rng rng(seed);
    const int n_code = (n + 1) / 2;

    std::vector<Request> out;
    out.reserve(static_cast<std::size_t>(std::max(n, 0)));
    for (int i = 0; i < n; ++i) {
        const bool is_code = i < n_code;
        Request r;
        r.task_class_id = is_code ? code_class.id : chat_class.id;
        const double in_median = is_code ? dists.code_input_median : dists.chat_input_median;
        const double in_sigma = is_code ? dists.code_input_sigma : dists.chat_input_sigma;
        const double out_mean = is_code ? dists.code_output_mean : dists.chat_output_mean;
        const double out_std = is_code ? dists.code_output_std : dists.chat_output_std;
        r.input_len = clamp_len(in_median * std::exp(in_sigma * rng.normal()));
        r.true_output_len = clamp_len(rng.normal(out_mean, out_std));
        r.arrival_time_ms = 0.0;
        out.push_back(r);
    }
    rng.shuffle(out);
    for (int i = 0; i < n; ++i) out[i].id = i;
    return out;
}

void arrange_longest_first(std::vector<Request>& requests,
                           const LatencyCoefficients& coeffs) {
    std::vector<std::size_t> order(requests.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ea =
            predict_exec(coeffs, 1, requests[a].input_len, requests[a].true_output_len);
        const double eb =
            predict_exec(coeffs, 1, requests[b].input_len, requests[b].true_output_len);
        return ea != eb ? ea > eb : requests[a].id < requests[b].id;
    });
    for (std::size_t rank = 0; rank < order.size(); ++rank)
        requests[order[rank]].arrival_time_ms = static_cast<double>(rank);
}

std::vector<ProfileSample> generate_profile_samples(const LatencyCoefficients& truth,
                                                    const std::vector<int>& b_values,
                                                    const std::vector<int>& l_values,
                                                    double noise_std_ms,
                                                    std::uint64_t seed) {
    if (b_values.empty() || l_values.empty())
        throw DataError("generate_profile_samples: grids must be non-empty");
    Rng rng(seed);
    std::vector<ProfileSample> out;
    out.reserve(b_values.size() * l_values.size());
    for (int b : b_values) {
        for (int l : l_values) {
            ProfileSample s;
            s.batch_size = b;
            s.input_len = l;
            s.accumulated_len = l;
            s.measured_prefill_ms = predict_prefill(truth, b, l);
            s.measured_per_token_decode_ms = predict_per_token_decode(truth, b, l);
            if (noise_std_ms > 0.0) {
                s.measured_prefill_ms += rng.normal(0.0, noise_std_ms);
                s.measured_per_token_decode_ms += rng.normal(0.0, noise_std_ms);
            }
            out.push_back(s);
        }
    }
    return out;
}

std::vector<ProfileSample> load_profile_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open samples file: " + path);
    std::vector<ProfileSample> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json rec = json::parse(line);
            ProfileSample s;
            s.batch_size = rec.at("b").get<int>();
            s.input_len = rec.at("input_len").get<int>();
            s.accumulated_len = rec.value("accumulated_len", s.input_len);
            s.measured_prefill_ms = rec.at("prefill_ms").get<double>();
            s.measured_per_token_decode_ms = rec.at("per_token_decode_ms").get<double>();
            s.validate();
            out.push_back(s);
        } catch (const json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

void save_profile_samples(const std::vector<ProfileSample>& samples, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open samples file for writing: " + path);
    for (const auto& s : samples) {
        json rec;
        rec["b"] = s.batch_size;
        rec["input_len"] = s.input_len;
        rec["accumulated_len"] = s.accumulated_len;
        rec["prefill_ms"] = s.measured_prefill_ms;
        rec["per_token_decode_ms"] = s.measured_per_token_decode_ms;
        out << rec.dump() << "\n";
    }
}

}  // namespace slosched
