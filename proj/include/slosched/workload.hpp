#ifndef SLOSCHED_WORKLOAD_HPP
#define SLOSCHED_WORKLOAD_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "slosched/core.hpp"
#include "slosched/latency_model.hpp"

namespace slosched {

// Line-delimited JSON trace. Class declaration records carry `task` and
// `slo_kind` ("e2e" | "ttft_tpot") with thresholds in ms; request records
// carry `id`, `task`, `input_len`, `output_len`, `arrival_ms`. Class ids
// are assigned densely in declaration order.
Workload load_trace(const std::string& path);
void save_trace(const Workload& workload, const std::string& path);

// Token-length distributions for the synthetic two-class mix. Inputs are
// lognormal around a median; outputs Gaussian.
struct LengthDists {
    double code_input_median = 300.0;
    double code_input_sigma = 0.5;
    double code_output_mean = 900.0;
    double code_output_std = 300.0;
    double chat_input_median = 200.0;
    double chat_input_sigma = 0.5;
    double chat_output_mean = 250.0;
    double chat_output_std = 150.0;
};

// code: e2e SLO 30 s; chat: TTFT 10 s, TPOT 50 ms
std::pair<TaskClass, TaskClass> default_slo_classes();

// default classes plus Gaussian output priors matching the synthetic
// length distributions, for estimator cold starts
std::pair<TaskClass, TaskClass> default_synth_classes(const LengthDists& dists = {});

// ceil(n/2) code + floor(n/2) chat requests, lengths clamped to [1, 2047],
// shuffled order with dense ids; deterministic per seed.
std::vector<Request> generate_mixed(int n, std::uint64_t seed,
                                    const TaskClass& code_class,
                                    const TaskClass& chat_class,
                                    const LengthDists& dists = {});

// Reorders arrival so the longest standalone executions come first: the
// adversarial pattern where FCFS starves short interactive requests
// behind long jobs.
void arrange_longest_first(std::vector<Request>& requests,
                           const LatencyCoefficients& coeffs);

// Cartesian (b, l) grid of synthetic measurements on the model surface
// plus Gaussian noise; deterministic per seed.
std::vector<ProfileSample> generate_profile_samples(const LatencyCoefficients& truth,
                                                    const std::vector<int>& b_values,
                                                    const std::vector<int>& l_values,
                                                    double noise_std_ms,
                                                    std::uint64_t seed);

// Profiling measurements as line-delimited JSON with fields b, input_len,
// accumulated_len, prefill_ms, per_token_decode_ms.
std::vector<ProfileSample> load_profile_samples(const std::string& path);
void save_profile_samples(const std::vector<ProfileSample>& samples, const std::string& path);

}  // namespace slosched

#endif
