#ifndef SLOSCHED_SERIALIZE_HPP
#define SLOSCHED_SERIALIZE_HPP

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "slosched/core.hpp"
#include "slosched/output_estimator.hpp"

namespace slosched {

void to_json(nlohmann::json& j, const SloSpec& s);
void from_json(const nlohmann::json& j, SloSpec& s);
void to_json(nlohmann::json& j, const TaskClass& c);
void from_json(const nlohmann::json& j, TaskClass& c);
void to_json(nlohmann::json& j, const Request& r);
void from_json(const nlohmann::json& j, Request& r);
void to_json(nlohmann::json& j, const LatencyCoefficients& c);
void from_json(const nlohmann::json& j, LatencyCoefficients& c);
void to_json(nlohmann::json& j, const Schedule& s);
void from_json(const nlohmann::json& j, Schedule& s);
void to_json(nlohmann::json& j, const InstanceState& i);
void from_json(const nlohmann::json& j, InstanceState& i);
void to_json(nlohmann::json& j, const RequestMetrics& m);
void from_json(const nlohmann::json& j, RequestMetrics& m);
void to_json(nlohmann::json& j, const EvaluatedSchedule& e);
void from_json(const nlohmann::json& j, EvaluatedSchedule& e);
void to_json(nlohmann::json& j, const MetricsReport& r);
void from_json(const nlohmann::json& j, MetricsReport& r);
void to_json(nlohmann::json& j, const LengthModel& m);
void from_json(const nlohmann::json& j, LengthModel& m);

nlohmann::json workload_to_json(const Workload& w);
Workload workload_from_json(const nlohmann::json& j);

// Instance roster: one JSON object per line with total_mem_bytes,
// mem_utility, bytes_per_token, max_batch_size.
std::vector<InstanceState> load_instances(const std::string& path);
void save_instances(const std::vector<InstanceState>& instances, const std::string& path);

}  // namespace slosched

#endif
