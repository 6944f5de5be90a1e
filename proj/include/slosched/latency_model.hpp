#ifndef SLOSCHED_LATENCY_MODEL_HPP
#define SLOSCHED_LATENCY_MODEL_HPP

#include <string>
#include <vector>

#include "slosched/core.hpp"

namespace slosched {

// Prefill and per-token decode times are modelled as linear in the batch
// size, the (input or accumulated) length, and their product:
//
//   t_p(b, l_i)   = alpha_p*b*l_i + beta_p*b + gamma_p*l_i + delta_p
//   tau_d(b, l_a) = alpha_d*b*l_a + beta_d*b + gamma_d*l_a + delta_d
//
// The total decode time sums tau_d over accumulated lengths l_i+1 .. l_i+l_o
// and is evaluated in closed form (arithmetic series).

// One profiling measurement: a prefill time at (b, input_len) and a
// per-token decode time at (b, accumulated_len).
struct ProfileSample {
    int batch_size = 1;
    int input_len = 1;
    int accumulated_len = 1;
    double measured_prefill_ms = 0.0;
    double measured_per_token_decode_ms = 0.0;

    void validate() const;
};

struct FitResult {
    LatencyCoefficients coeffs;
    double prefill_rmse_ms = 0.0;
    double decode_rmse_ms = 0.0;
};

// Least-squares fit of both four-coefficient regressions.
// Throws DataError on fewer than 4 samples or a rank-deficient design
// (e.g. all samples at a single batch size).
FitResult fit_coefficients(const std::vector<ProfileSample>& samples);

double predict_prefill(const LatencyCoefficients& c, int b, int input_len);
double predict_per_token_decode(const LatencyCoefficients& c, int b, int accumulated_len);
double predict_decode_total(const LatencyCoefficients& c, int b, int input_len, int output_len);
double predict_exec(const LatencyCoefficients& c, int b, int input_len, int output_len);
double predict_tpot(const LatencyCoefficients& c, int b, int input_len, int output_len);

// Model validity boundary: fits were collected for lengths under 2k tokens.
// Longer requests are still predicted but reports flag them.
constexpr int kValidatedMaxLen = 2047;

inline bool is_extrapolated(int input_len, int output_len) {
    return input_len + output_len > kValidatedMaxLen;
}

// Coefficients from the built-in profile; the simulator works out of the
// box with these.
LatencyCoefficients table_coefficients();

// key = value persistence, keys alpha_p .. delta_d
void save_coefficients(const LatencyCoefficients& c, const std::string& path);
LatencyCoefficients load_coefficients(const std::string& path);

}  // namespace slosched

#endif
