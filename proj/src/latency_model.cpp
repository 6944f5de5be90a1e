#include "slosched/latency_model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace slosched {

void ProfileSample::validate() const {
    if (batch_size < 1 || input_len < 1 || accumulated_len < input_len)
        throw DataError("ProfileSample: invalid batch size or lengths");
    if (measured_prefill_ms <= 0.0 || measured_per_token_decode_ms <= 0.0)
        throw DataError("ProfileSample: measured durations must be > 0");
}

namespace {

// Solve one regression y ~ a*b*l + c*b + d*l + e over the sample rows.
// Column-pivoted QR exposes rank deficiency (e.g. constant b makes b and
// b*l collinear with 1 and l).
Eigen::Vector4d solve_regression(const std::vector<double>& bs,
                                 const std::vector<double>& ls,
                                 const std::vector<double>& ys,
                                 const char* which) {
    const auto n = static_cast<Eigen::Index>(ys.size());
    if (n < 4)
        throw DataError(std::string("fit_coefficients: fewer than 4 samples for ") + which);
    Eigen::MatrixXd design(n, 4);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        design(i, 0) = bs[i] * ls[i];
        design(i, 1) = bs[i];
        design(i, 2) = ls[i];
        design(i, 3) = 1.0;
        y(i) = ys[i];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < 4)
        throw DataError(std::string("fit_coefficients: rank-deficient design matrix for ") + which);
    return qr.solve(y);
}

double rmse(const std::vector<double>& pred, const std::vector<double>& actual) {
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - actual[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(pred.size()));
}

}  // namespace

FitResult fit_coefficients(const std::vector<ProfileSample>& samples) {
    std::vector<double> b, li, la, tp, td;
    b.reserve(samples.size());
    for (const auto& s : samples) {
        s.validate();
        b.push_back(static_cast<double>(s.batch_size));
        li.push_back(static_cast<double>(s.input_len));
        la.push_back(static_cast<double>(s.accumulated_len));
        tp.push_back(s.measured_prefill_ms);
        td.push_back(s.measured_per_token_decode_ms);
    }
    const Eigen::Vector4d p = solve_regression(b, li, tp, "prefill");
    const Eigen::Vector4d d = solve_regression(b, la, td, "decode");

    FitResult res;
    res.coeffs = {p(0), p(1), p(2), p(3), d(0), d(1), d(2), d(3)};

    std::vector<double> pred_p(samples.size()), pred_d(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        pred_p[i] = predict_prefill(res.coeffs, samples[i].batch_size, samples[i].input_len);
        pred_d[i] = predict_per_token_decode(res.coeffs, samples[i].batch_size,
                                             samples[i].accumulated_len);
    }
    res.prefill_rmse_ms = rmse(pred_p, tp);
    res.decode_rmse_ms = rmse(pred_d, td);
    return res;
}

double predict_prefill(const LatencyCoefficients& c, int b, int input_len) {
    const double bd = b, ld = input_len;
    return c.alpha_p * bd * ld + c.beta_p * bd + c.gamma_p * ld + c.delta_p;
}

double predict_per_token_decode(const LatencyCoefficients& c, int b, int accumulated_len) {
    const double bd = b, ld = accumulated_len;
    return c.alpha_d * bd * ld + c.beta_d * bd + c.gamma_d * ld + c.delta_d;
}

double predict_decode_total(const LatencyCoefficients& c, int b, int input_len, int output_len) {
    // sum_{k=1..l_o} tau_d(b, l_i+k), folded as an arithmetic series:
    // (alpha_d*b + gamma_d) * (l_o*l_i + l_o(l_o+1)/2) + l_o * (beta_d*b + delta_d)
    const double bd = b, li = input_len, lo = output_len;
    const double slope = c.alpha_d * bd + c.gamma_d;
    const double len_sum = lo * li + lo * (lo + 1.0) / 2.0;
    return slope * len_sum + lo * (c.beta_d * bd + c.delta_d);
}

double predict_exec(const LatencyCoefficients& c, int b, int input_len, int output_len) {
    return predict_prefill(c, b, input_len) + predict_decode_total(c, b, input_len, output_len);
}

double predict_tpot(const LatencyCoefficients& c, int b, int input_len, int output_len) {
    if (output_len <= 0)
        throw std::invalid_argument("predict_tpot: TPOT undefined for zero output");
    return predict_decode_total(c, b, input_len, output_len) / static_cast<double>(output_len);
}

LatencyCoefficients table_coefficients() {
    return {0.1, 5.7, 0.01, 43.67, 0.0002, 0.275, 0.00088, 15.85};
}

void save_coefficients(const LatencyCoefficients& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open coefficients file for writing: " + path);
    out.precision(17);
    out << "alpha_p = " << c.alpha_p << "\n"
        << "beta_p = " << c.beta_p << "\n"
        << "gamma_p = " << c.gamma_p << "\n"
        << "delta_p = " << c.delta_p << "\n"
        << "alpha_d = " << c.alpha_d << "\n"
        << "beta_d = " << c.beta_d << "\n"
        << "gamma_d = " << c.gamma_d << "\n"
        << "delta_d = " << c.delta_d << "\n";
}

LatencyCoefficients load_coefficients(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open coefficients file: " + path);
    std::map<std::string, double> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key, eq;
        double value;
        if (!(ls >> key)) continue;  // blank line
        if (!(ls >> eq) || eq != "=" || !(ls >> value))
            throw DataError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        kv[key] = value;
    }
    LatencyCoefficients c;
    const std::pair<const char*, double*> fields[] = {
        {"alpha_p", &c.alpha_p}, {"beta_p", &c.beta_p}, {"gamma_p", &c.gamma_p},
        {"delta_p", &c.delta_p}, {"alpha_d", &c.alpha_d}, {"beta_d", &c.beta_d},
        {"gamma_d", &c.gamma_d}, {"delta_d", &c.delta_d}};
    for (const auto& [key, dst] : fields) {
        auto it = kv.find(key);
        if (it == kv.end())
            throw DataError(path + ": missing coefficient key '" + key + "'");
        *dst = it->second;
    }
    c.validate();
    return c;
}

}  // namespace slosched
