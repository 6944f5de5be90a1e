#include "slosched/output_estimator.hpp"

#include <algorithm>
#include <cmath>

namespace slosched {

double LengthModel::sample_std() const { return std::sqrt(sample_variance()); }

void observe(LengthModel& model, int actual_len) {
    if (actual_len < 1)
        throw DataError("observe: non-positive length");
    model.count++;
    const double x = static_cast<double>(actual_len);
    const double delta = x - model.mean;
    model.mean += delta / static_cast<double>(model.count);
    model.m2 += delta * (x - model.mean);
}

namespace {

int clamp_round(double v) {
    return std::max(1, static_cast<int>(std::llround(v)));
}

}  // namespace

int predict_len(const LengthModel& model, Rng& rng) {
    if (model.count >= 2)
        return clamp_round(rng.normal(model.mean, model.sample_std()));
    if (const auto* g = std::get_if<GaussianPrior>(&model.prior))
        return clamp_round(rng.normal(g->mean_tokens, g->std_tokens));
    if (const auto* r = std::get_if<RangePrior>(&model.prior))
        return static_cast<int>(rng.uniform_int(r->low, r->high));
    return kDefaultOutputLen;
}

int simulate_predictor_error(int true_len, double error_pct, Rng& rng) {
    if (error_pct < 0.0)
        throw std::invalid_argument("simulate_predictor_error: error_pct must be >= 0");
    if (error_pct == 0.0) return std::max(1, true_len);
    const double u = rng.uniform(-error_pct, error_pct);
    return clamp_round(static_cast<double>(true_len) * (1.0 + u));
}

Estimator::Estimator(const std::vector<TaskClass>& classes) {
    models_.reserve(classes.size());
    for (const auto& c : classes) {
        LengthModel m;
        m.task_class_id = c.id;
        m.prior = c.output_prior;
        models_.push_back(m);
    }
}

LengthModel& Estimator::model_for(int task_class_id) {
    for (auto& m : models_) {
        if (m.task_class_id == task_class_id) return m;
    }
    throw DataError("estimator: unknown task_class_id " + std::to_string(task_class_id));
}

void Estimator::observe_output(int task_class_id, int actual_len) {
    observe(model_for(task_class_id), actual_len);
}

int Estimator::predict(int task_class_id, Rng& rng) {
    return predict_len(model_for(task_class_id), rng);
}

void assign_predicted_lengths(std::vector<Request>& requests, Estimator& estimator, Rng& rng) {
    for (auto& r : requests) {
        if (!r.predicted_output_len)
            r.predicted_output_len = estimator.predict(r.task_class_id, rng);
    }
}

}  // namespace slosched
