#ifndef SLOSCHED_OUTPUT_ESTIMATOR_HPP
#define SLOSCHED_OUTPUT_ESTIMATOR_HPP

#include <vector>

#include "slosched/core.hpp"
#include "slosched/rng.hpp"

namespace slosched {

// Cold-start output length when a class has no observations and no prior.
constexpr int kDefaultOutputLen = 256;

// Running Gaussian model of one task class's realized output lengths.
// Welford single-pass update keeps mean/variance numerically stable.
struct LengthModel {
    int task_class_id = 0;
    long long count = 0;
    double mean = 0.0;
    double m2 = 0.0;  // sum of squared deviations from the running mean
    OutputPrior prior;

    double sample_variance() const {
        return count >= 2 ? m2 / static_cast<double>(count - 1) : 0.0;
    }
    double sample_std() const;
};

// Record one realized output length. Throws DataError on actual_len < 1.
void observe(LengthModel& model, int actual_len);

// Draw a predicted length: fitted Gaussian when count >= 2, else the class
// prior (Gaussian or uniform range), else kDefaultOutputLen. Result is
// rounded and clamped to >= 1.
int predict_len(const LengthModel& model, Rng& rng);

// Emulates an external predictor of given accuracy: true length scaled by
// a uniform factor in [1-error_pct, 1+error_pct], rounded, clamped to >= 1.
int simulate_predictor_error(int true_len, double error_pct, Rng& rng);

// Per-class registry used by the scheduling pipeline.
class Estimator {
public:
    explicit Estimator(const std::vector<TaskClass>& classes);

    LengthModel& model_for(int task_class_id);
    const std::vector<LengthModel>& models() const { return models_; }

    void observe_output(int task_class_id, int actual_len);
    int predict(int task_class_id, Rng& rng);

private:
    std::vector<LengthModel> models_;
};

// Fill predicted_output_len for every request that lacks one.
void assign_predicted_lengths(std::vector<Request>& requests, Estimator& estimator, Rng& rng);

}  // namespace slosched

#endif
