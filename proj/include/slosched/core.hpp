#ifndef SLOSCHED_CORE_HPP
#define SLOSCHED_CORE_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace slosched {

// Malformed input: trace/file parse failures, workload validation failures.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Resource limits: a request that fits no instance, exhaustive-search caps.
class CapacityError : public std::runtime_error {
public:
    explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

enum class SloKind { E2E, TTFT_TPOT };

// Latency target for one task class. E2E tasks bound end-to-end latency;
// TTFT_TPOT tasks bound first-token latency and per-output-token latency.
struct SloSpec {
    SloKind kind = SloKind::E2E;
    std::optional<double> e2e_ms;
    std::optional<double> ttft_ms;
    std::optional<double> tpot_ms;

    static SloSpec e2e(double ms);
    static SloSpec ttft_tpot(double ttft_ms, double tpot_ms);
    void validate() const;
};

struct GaussianPrior {
    double mean_tokens = 0.0;
    double std_tokens = 0.0;
};

struct RangePrior {
    int low = 1;
    int high = 1;
};

using OutputPrior = std::variant<std::monostate, GaussianPrior, RangePrior>;

struct TaskClass {
    int id = 0;
    std::string name;
    SloSpec slo;
    OutputPrior output_prior;

    void validate() const;
};

// One inference job. true_output_len is ground truth known only to the
// simulator and the estimator's observe path; the scheduler sees only
// predicted_output_len.
struct Request {
    int id = 0;
    int task_class_id = 0;
    int input_len = 1;
    int true_output_len = 1;
    std::optional<int> predicted_output_len;
    double arrival_time_ms = 0.0;

    void validate() const;
};

// Eight fitted constants of the prefill/decode linear latency models.
struct LatencyCoefficients {
    double alpha_p = 0.0;
    double beta_p = 0.0;
    double gamma_p = 0.0;
    double delta_p = 0.0;
    double alpha_d = 0.0;
    double beta_d = 0.0;
    double gamma_d = 0.0;
    double delta_d = 0.0;

    void validate() const;
};

using Batch = std::vector<int>;  // request ids, ordered

// Ordered partition of one instance's requests into batches: the search
// variable of the priority mapper. Every batch is non-empty and no larger
// than the configured max batch size.
struct Schedule {
    std::vector<Batch> batches;

    std::size_t request_count() const;
    std::vector<int> flatten() const;
    // position and 0-based batch index per request id
    std::unordered_map<int, std::pair<int, int>> positions() const;
    bool is_partition_of(const std::vector<int>& ids, int max_batch) const;
};

struct InstanceState {
    int id = 0;
    std::uint64_t total_mem = 0;
    std::uint64_t remaining_mem = 0;
    double mem_utility = 0.9;       // mu in (0,1]
    double bytes_per_token = 1.0;   // sigma > 0
    int max_batch_size = 1;

    void validate() const;
};

// Per-request latency figures, predicted (objective) or realized (simulator).
struct RequestMetrics {
    int request_id = 0;
    double wait_ms = 0.0;
    double exec_ms = 0.0;
    double e2e_ms = 0.0;
    double ttft_ms = 0.0;
    double tpot_ms = 0.0;
    bool slo_met = false;
    bool extrapolated = false;  // lengths beyond the predictor's validated range
};

// A Schedule annotated with predicted per-request latencies and the
// objective value g = n / t (requests per ms).
struct EvaluatedSchedule {
    Schedule schedule;
    std::vector<RequestMetrics> per_request;
    int n = 0;          // count of met SLOs
    double t_ms = 0.0;  // sum of e2e latencies
    double g = 0.0;     // n / t_ms; 0 for an empty schedule
};

// Realized aggregate metrics from one simulation run.
struct MetricsReport {
    double slo_attainment = 0.0;
    double avg_latency_ms = 0.0;
    double g = 0.0;  // req/ms; equals slo_attainment / avg_latency_ms
    double scheduling_overhead_ms = 0.0;
    std::vector<RequestMetrics> per_request;
    int n_met = 0;
    double total_latency_ms = 0.0;

    static MetricsReport from_records(std::vector<RequestMetrics> records,
                                      double overhead_ms);
};

// Validated workload: every request references a declared class and all
// type invariants hold. Immutable after construction.
struct Workload {
    std::vector<TaskClass> classes;
    std::vector<Request> requests;

    const TaskClass& class_of(const Request& r) const;
    const TaskClass* find_class(int class_id) const;
    const Request* find_request(int request_id) const;

private:
    friend Workload validate_workload(std::vector<Request> requests,
                                      std::vector<TaskClass> classes);
    std::unordered_map<int, std::size_t> class_index_;
    std::unordered_map<int, std::size_t> request_index_;
};

Workload validate_workload(std::vector<Request> requests,
                           std::vector<TaskClass> classes);

}  // namespace slosched

#endif
