// slosched: SLO-aware scheduling simulator.
//
// Subcommands: fit, schedule, compare, sweep, perturb, report. All output
// is deterministic given explicit seeds; tables go to stdout, CSV/JSON to
// --out for external plotting.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "slosched/latency_model.hpp"
#include "slosched/objective.hpp"
#include "slosched/output_estimator.hpp"
#include "slosched/scheduler.hpp"
#include "slosched/serialize.hpp"
#include "slosched/simulator.hpp"
#include "slosched/workload.hpp"

using nlohmann::json;
using namespace slosched;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitCapacity = 3;

struct WorkloadFlags {
    std::string trace;
    bool synth = false;
    bool adversarial = false;
    int n = 16;
    std::uint64_t seed = 0;
    double predictor_error = -1.0;  // >= 0: emulate an external predictor
};

struct FleetFlags {
    std::string roster;
    int num_instances = 1;
    int max_batch = 1;
    bool max_batch_set = false;
    std::uint64_t total_mem = 1ULL << 35;  // 32 GiB
    double mem_utility = 0.9;
    double bytes_per_token = 262144.0;
};

void add_workload_flags(CLI::App* cmd, WorkloadFlags& wf) {
    cmd->add_option("--trace", wf.trace, "workload trace (JSONL)");
    cmd->add_flag("--synth", wf.synth, "generate a synthetic mixed workload");
    cmd->add_flag("--adversarial", wf.adversarial,
                  "synthetic only: longest jobs arrive first");
    cmd->add_option("--n", wf.n, "synthetic request count")->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", wf.seed, "workload / search seed");
    cmd->add_option("--predictor-error", wf.predictor_error,
                    "emulate an output-length predictor with this relative error "
                    "(0 = exact; default: per-class Gaussian estimator)");
}

void add_fleet_flags(CLI::App* cmd, FleetFlags& ff) {
    cmd->add_option("--instances", ff.roster, "instance roster (JSONL)");
    cmd->add_option("--num-instances", ff.num_instances, "identical default instances")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-batch", ff.max_batch, "max batch size per instance")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--total-mem", ff.total_mem, "default instance memory (bytes)");
    cmd->add_option("--mem-utility", ff.mem_utility, "memory utility in (0,1]");
    cmd->add_option("--bytes-per-token", ff.bytes_per_token, "KV bytes per token");
}

void add_anneal_flags(CLI::App* cmd, AnnealConfig& cfg, double& objective_scale) {
    cmd->add_option("--t0", cfg.t0, "initial temperature");
    cmd->add_option("--t-thres", cfg.t_thres, "stop temperature");
    cmd->add_option("--iter", cfg.iter, "iterations per temperature level");
    cmd->add_option("--tau", cfg.tau, "temperature decay ratio");
    cmd->add_option("--objective-scale", objective_scale,
                    "acceptance scale for G deltas (default 1/G_start)");
}

void add_sim_flags(CLI::App* cmd, SimConfig& cfg) {
    cmd->add_option("--noise-pct", cfg.noise_pct, "simulator execution noise fraction");
    cmd->add_option("--dispatch-gap-ms", cfg.dispatch_gap_ms, "inter-batch dispatch gap");
}

LatencyCoefficients coeffs_from(const std::string& path) {
    if (path.empty() || path == "table") return table_coefficients();
    return load_coefficients(path);
}

std::vector<InstanceState> fleet_from(const FleetFlags& ff) {
    if (!ff.roster.empty()) {
        auto fleet = load_instances(ff.roster);
        if (ff.max_batch_set)
            for (auto& inst : fleet) inst.max_batch_size = ff.max_batch;
        return fleet;
    }
    std::vector<InstanceState> fleet;
    for (int i = 0; i < ff.num_instances; ++i) {
        InstanceState inst;
        inst.id = i;
        inst.total_mem = ff.total_mem;
        inst.remaining_mem = ff.total_mem;
        inst.mem_utility = ff.mem_utility;
        inst.bytes_per_token = ff.bytes_per_token;
        inst.max_batch_size = ff.max_batch;
        fleet.push_back(inst);
    }
    return fleet;
}

// Loads or synthesizes the workload and fills predicted lengths from the
// per-class estimator (prediction draws derive from the workload seed).
// estimator_state, when given, receives the length models used, for
// reproducibility in run reports.
Workload workload_from(const WorkloadFlags& wf, json* estimator_state = nullptr) {
    Workload w;
    if (!wf.trace.empty()) {
        w = load_trace(wf.trace);
    } else if (wf.synth) {
        auto [code, chat] = default_synth_classes();
        auto reqs = generate_mixed(wf.n, wf.seed, code, chat);
        if (wf.adversarial) arrange_longest_first(reqs, table_coefficients());
        w = validate_workload(std::move(reqs), {code, chat});
    } else {
        throw CLI::ValidationError("workload", "need --trace or --synth");
    }
    Rng rng(Rng::derive(wf.seed, 0x9e37));
    if (wf.predictor_error >= 0.0) {
        for (auto& r : w.requests)
            r.predicted_output_len =
                simulate_predictor_error(r.true_output_len, wf.predictor_error, rng);
        if (estimator_state)
            *estimator_state = json{{"predictor_error", wf.predictor_error}};
    } else {
        Estimator est(w.classes);
        assign_predicted_lengths(w.requests, est, rng);
        if (estimator_state) *estimator_state = json(est.models());
    }
    return w;
}

std::vector<std::uint64_t> seeds_from(const std::vector<std::uint64_t>& listed, int num) {
    if (!listed.empty()) return listed;
    std::vector<std::uint64_t> out;
    for (int i = 0; i < num; ++i) out.push_back(i);
    return out;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open output file: " + path);
    out << content;
}

std::string csv_header() {
    return "policy,seed,n_requests,max_batch,attainment,avg_latency_ms,g_req_per_ms,overhead_ms\n";
}

void append_row(std::ostringstream& csv, const ComparisonRow& r, const std::string& seed_label) {
    csv << r.policy << ',' << seed_label << ',' << r.n_requests << ',' << r.max_batch << ','
        << r.attainment << ',' << r.avg_latency_ms << ',' << r.g_req_per_ms << ','
        << r.overhead_ms << '\n';
}

void print_rows(const std::vector<ComparisonRow>& rows, const std::vector<ComparisonRow>& medians) {
    std::printf("%-11s %-8s %4s %6s %11s %14s %14s %12s %10s\n", "policy", "seed", "n", "batch",
                "attainment", "avg_latency_ms", "g_req_per_ms", "g_req_per_s", "overhead_ms");
    for (const auto& r : rows)
        std::printf("%-11s %-8llu %4d %6d %11.4f %14.2f %14.6e %12.4f %10.4f\n", r.policy.c_str(),
                    static_cast<unsigned long long>(r.seed), r.n_requests, r.max_batch,
                    r.attainment, r.avg_latency_ms, r.g_req_per_ms, r.g_req_per_ms * 1000.0,
                    r.overhead_ms);
    for (const auto& r : medians)
        std::printf("%-11s %-8s %4d %6d %11.4f %14.2f %14.6e %12.4f %10.4f\n", r.policy.c_str(),
                    "median", r.n_requests, r.max_batch, r.attainment, r.avg_latency_ms,
                    r.g_req_per_ms, r.g_req_per_ms * 1000.0, r.overhead_ms);
}

ComparisonRow median_of(const std::vector<ComparisonRow>& rows, const std::string& policy) {
    std::vector<double> att, lat, g, ovh;
    ComparisonRow med;
    med.policy = policy;
    for (const auto& r : rows) {
        if (r.policy != policy) continue;
        med.n_requests = r.n_requests;
        med.max_batch = r.max_batch;
        att.push_back(r.attainment);
        lat.push_back(r.avg_latency_ms);
        g.push_back(r.g_req_per_ms);
        ovh.push_back(r.overhead_ms);
    }
    med.attainment = median(att);
    med.avg_latency_ms = median(lat);
    med.g_req_per_ms = median(g);
    med.overhead_ms = median(ovh);
    return med;
}

// --- fit ---------------------------------------------------------------

int cmd_fit(const std::string& samples_path, bool synth, const std::string& truth,
            const std::vector<int>& b_grid, const std::vector<int>& l_grid, double noise_std,
            std::uint64_t seed, const std::string& out_path) {
    std::vector<ProfileSample> samples;
    if (!samples_path.empty()) {
        samples = load_profile_samples(samples_path);
    } else if (synth) {
        samples = generate_profile_samples(coeffs_from(truth), b_grid, l_grid, noise_std, seed);
    } else {
        throw CLI::ValidationError("fit", "need --samples or --synth");
    }
    const FitResult fit = fit_coefficients(samples);
    save_coefficients(fit.coeffs, out_path);
    std::printf("fit %zu samples\n", samples.size());
    std::printf("prefill RMSE: %.6f ms\n", fit.prefill_rmse_ms);
    std::printf("decode  RMSE: %.6f ms\n", fit.decode_rmse_ms);
    std::printf("coefficients written to %s\n", out_path.c_str());
    return 0;
}

// --- schedule ------------------------------------------------------------

int cmd_schedule(const WorkloadFlags& wf, const FleetFlags& ff, const std::string& coeffs_path,
                 AnnealConfig acfg, const std::string& policy_name_str, int n_cap,
                 SimConfig scfg, bool simulate, const std::string& out_path) {
    json estimator_state;
    Workload w = workload_from(wf, &estimator_state);
    const auto fleet = fleet_from(ff);
    const auto coeffs = coeffs_from(coeffs_path);
    acfg.seed = wf.seed;
    scfg.seed = wf.seed;
    const Policy policy = parse_policy(policy_name_str);

    std::vector<EvaluatedSchedule> evaluated(fleet.size());
    double overhead_ms = 0.0;
    if (policy == Policy::FCFS) {
        const auto fcfs = run_fcfs(w, fleet, coeffs, scfg);
        for (std::size_t i = 0; i < fleet.size(); ++i)
            evaluated[i] = evaluate(fcfs.schedules[i], coeffs, w);
    } else {
        auto res = schedule_all(w, fleet, coeffs, acfg, policy, n_cap);
        evaluated = std::move(res.per_instance);
        overhead_ms = res.overhead_ms;
    }

    json out;
    out["policy"] = policy_name_str;
    out["overhead_ms"] = overhead_ms;
    out["estimator"] = estimator_state;
    out["instances"] = json::array();
    int total_met = 0;
    double total_t = 0.0;
    std::size_t total_n = 0;
    for (std::size_t i = 0; i < fleet.size(); ++i) {
        json inst;
        inst["instance_id"] = fleet[i].id;
        inst["predicted"] = evaluated[i];
        out["instances"].push_back(inst);
        total_met += evaluated[i].n;
        total_t += evaluated[i].t_ms;
        total_n += evaluated[i].per_request.size();

        std::printf("instance %d:\n", fleet[i].id);
        for (std::size_t bi = 0; bi < evaluated[i].schedule.batches.size(); ++bi) {
            std::printf("  batch %zu:", bi);
            for (int id : evaluated[i].schedule.batches[bi]) std::printf(" %d", id);
            std::printf("\n");
        }
        std::printf("  predicted: %d/%zu SLOs met, t=%.2f ms, G=%.6e req/ms\n", evaluated[i].n,
                     evaluated[i].per_request.size(), evaluated[i].t_ms, evaluated[i].g);
    }
    const double g_all = total_t > 0.0 ? total_met / total_t : 0.0;
    out["predicted_g_req_per_ms"] = g_all;
    std::printf("overall predicted: %d/%zu met, G=%.6e req/ms (%.4f req/s), overhead=%.4f ms\n",
                total_met, total_n, g_all, g_all * 1000.0, overhead_ms);

    if (simulate) {
        std::vector<Schedule> schedules;
        schedules.reserve(evaluated.size());
        for (const auto& ev : evaluated) schedules.push_back(ev.schedule);
        const MetricsReport report = run(schedules, w, fleet, coeffs, scfg, overhead_ms);
        out["realized"] = report;
        std::printf("realized: attainment %.4f, avg latency %.2f ms, G=%.6e req/ms (%.4f req/s)\n",
                    report.slo_attainment, report.avg_latency_ms, report.g, report.g * 1000.0);
    }

    if (!out_path.empty()) write_text(out_path, out.dump(2) + "\n");
    return 0;
}

// --- compare -------------------------------------------------------------

int cmd_compare(const WorkloadFlags& wf, const FleetFlags& ff, const std::string& coeffs_path,
                const AnnealConfig& acfg, const SimConfig& scfg,
                const std::vector<std::string>& policy_names,
                const std::vector<std::uint64_t>& seed_list, int num_seeds, int n_cap,
                const std::string& out_path) {
    const auto fleet = fleet_from(ff);
    const auto coeffs = coeffs_from(coeffs_path);
    std::vector<Policy> policies;
    for (const auto& name : policy_names) policies.push_back(parse_policy(name));
    const auto seeds = seeds_from(seed_list, num_seeds);

    std::vector<ComparisonRow> rows;
    for (std::uint64_t seed : seeds) {
        WorkloadFlags per_seed = wf;
        per_seed.seed = seed;
        Workload w = workload_from(per_seed);
        const auto table = compare(w, fleet, coeffs, policies, {seed}, acfg, scfg, n_cap);
        rows.insert(rows.end(), table.rows.begin(), table.rows.end());
    }

    std::vector<ComparisonRow> medians;
    for (const auto& name : policy_names) medians.push_back(median_of(rows, name));

    print_rows(rows, medians);
    if (!out_path.empty()) {
        std::ostringstream csv;
        csv << csv_header();
        for (const auto& r : rows) append_row(csv, r, std::to_string(r.seed));
        for (const auto& r : medians) append_row(csv, r, "median");
        write_text(out_path, csv.str());
    }
    return 0;
}

// --- sweep ---------------------------------------------------------------

int cmd_sweep(const WorkloadFlags& wf, const FleetFlags& ff, const std::string& coeffs_path,
              AnnealConfig base_cfg, const std::vector<double>& t0_grid,
              const std::vector<int>& iter_grid, const std::vector<std::uint64_t>& seed_list,
              int num_seeds, const std::string& out_path) {
    if (t0_grid.empty() || iter_grid.empty())
        throw CLI::ValidationError("sweep", "grids must be non-empty");
    const auto fleet = fleet_from(ff);
    const auto coeffs = coeffs_from(coeffs_path);
    const auto seeds = seeds_from(seed_list, num_seeds);

    std::ostringstream csv;
    csv << "t0,iter,seed,g_req_per_ms\n";
    std::printf("%10s %6s %8s %14s\n", "t0", "iter", "seed", "g_req_per_ms");
    for (double t0 : t0_grid) {
        for (int iter : iter_grid) {
            std::vector<double> gs;
            for (std::uint64_t seed : seeds) {
                WorkloadFlags per_seed = wf;
                per_seed.seed = seed;
                Workload w = workload_from(per_seed);
                AnnealConfig cfg = base_cfg;
                cfg.t0 = t0;
                cfg.iter = iter;
                cfg.seed = seed;
                const auto res = schedule_all(w, fleet, coeffs, cfg);
                int met = 0;
                double total = 0.0;
                for (const auto& ev : res.per_instance) {
                    met += ev.n;
                    total += ev.t_ms;
                }
                const double g = total > 0.0 ? met / total : 0.0;
                gs.push_back(g);
                csv << t0 << ',' << iter << ',' << seed << ',' << g << '\n';
                std::printf("%10.1f %6d %8llu %14.6e\n", t0, iter,
                            static_cast<unsigned long long>(seed), g);
            }
            csv << t0 << ',' << iter << ",median," << median(gs) << '\n';
            std::printf("%10.1f %6d %8s %14.6e\n", t0, iter, "median", median(gs));
        }
    }
    if (!out_path.empty()) write_text(out_path, csv.str());
    return 0;
}

// --- perturb ---------------------------------------------------------------

double* coeff_field(LatencyCoefficients& c, const std::string& name) {
    static const std::map<std::string, double LatencyCoefficients::*> fields = {
        {"alpha_p", &LatencyCoefficients::alpha_p}, {"beta_p", &LatencyCoefficients::beta_p},
        {"gamma_p", &LatencyCoefficients::gamma_p}, {"delta_p", &LatencyCoefficients::delta_p},
        {"alpha_d", &LatencyCoefficients::alpha_d}, {"beta_d", &LatencyCoefficients::beta_d},
        {"gamma_d", &LatencyCoefficients::gamma_d}, {"delta_d", &LatencyCoefficients::delta_d}};
    auto it = fields.find(name);
    if (it == fields.end()) throw DataError("unknown coefficient '" + name + "'");
    return &(c.*(it->second));
}

int cmd_perturb(const WorkloadFlags& wf, const FleetFlags& ff, const std::string& coeffs_path,
                const AnnealConfig& base_cfg, const SimConfig& scfg,
                const std::vector<std::string>& params, const std::vector<double>& factors,
                const std::vector<std::uint64_t>& seed_list, int num_seeds,
                const std::string& out_path) {
    const auto fleet = fleet_from(ff);
    const auto truth = coeffs_from(coeffs_path);
    const auto seeds = seeds_from(seed_list, num_seeds);

    // realized G when the mapper sees `predictor` but the backend runs `truth`
    auto realized_g = [&](const LatencyCoefficients& predictor, std::uint64_t seed) {
        WorkloadFlags per_seed = wf;
        per_seed.seed = seed;
        Workload w = workload_from(per_seed);
        AnnealConfig cfg = base_cfg;
        cfg.seed = seed;
        const auto res = schedule_all(w, fleet, predictor, cfg);
        std::vector<Schedule> schedules;
        for (const auto& ev : res.per_instance) schedules.push_back(ev.schedule);
        SimConfig sim = scfg;
        sim.seed = seed;
        return run(schedules, w, fleet, truth, sim, res.overhead_ms).g;
    };

    std::map<std::uint64_t, double> baseline;
    for (std::uint64_t seed : seeds) baseline[seed] = realized_g(truth, seed);

    std::ostringstream csv;
    csv << "param,factor,seed,g_req_per_ms,baseline_g,degradation_pct\n";
    std::printf("%-8s %8s %8s %14s %14s %16s\n", "param", "factor", "seed", "g_req_per_ms",
                "baseline_g", "degradation_pct");
    double max_degradation = 0.0;
    for (const auto& param : params) {
        for (double factor : factors) {
            std::vector<double> degs;
            for (std::uint64_t seed : seeds) {
                LatencyCoefficients perturbed = truth;
                *coeff_field(perturbed, param) *= factor;
                const double g = realized_g(perturbed, seed);
                const double base = baseline[seed];
                const double deg = base > 0.0 ? (base - g) / base * 100.0 : 0.0;
                degs.push_back(deg);
                max_degradation = std::max(max_degradation, deg);
                csv << param << ',' << factor << ',' << seed << ',' << g << ',' << base << ','
                    << deg << '\n';
                std::printf("%-8s %8.3f %8llu %14.6e %14.6e %16.4f\n", param.c_str(), factor,
                            static_cast<unsigned long long>(seed), g, base, deg);
            }
            csv << param << ',' << factor << ",median,,," << median(degs) << '\n';
            std::printf("%-8s %8.3f %8s %14s %14s %16.4f\n", param.c_str(), factor, "median", "",
                        "", median(degs));
        }
    }
    csv << "max_degradation_pct,,,,," << max_degradation << '\n';
    std::printf("max degradation: %.4f%%\n", max_degradation);
    if (!out_path.empty()) write_text(out_path, csv.str());
    return 0;
}

// --- gen -------------------------------------------------------------------

int cmd_gen(const WorkloadFlags& wf, const std::string& out_path) {
    auto [code, chat] = default_synth_classes();
    auto reqs = generate_mixed(wf.n, wf.seed, code, chat);
    if (wf.adversarial) arrange_longest_first(reqs, table_coefficients());
    Workload w = validate_workload(std::move(reqs), {code, chat});
    save_trace(w, out_path);
    std::printf("wrote %zu requests, %zu classes to %s\n", w.requests.size(), w.classes.size(),
                out_path.c_str());
    return 0;
}

// --- report ----------------------------------------------------------------

int cmd_report(const std::string& in_path) {
    std::ifstream in(in_path);
    if (!in) throw DataError("cannot open CSV: " + in_path);
    std::string header;
    if (!std::getline(in, header) || header.rfind("policy,seed,", 0) != 0)
        throw DataError(in_path + ": not a compare CSV");

    std::vector<ComparisonRow> rows;
    std::vector<std::string> policies;
    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 8)
            throw DataError(in_path + ":" + std::to_string(lineno) + ": expected 8 columns");
        if (fields[1] == "median") continue;  // recomputed below
        ComparisonRow r;
        r.policy = fields[0];
        r.seed = std::stoull(fields[1]);
        r.n_requests = std::stoi(fields[2]);
        r.max_batch = std::stoi(fields[3]);
        r.attainment = std::stod(fields[4]);
        r.avg_latency_ms = std::stod(fields[5]);
        r.g_req_per_ms = std::stod(fields[6]);
        r.overhead_ms = std::stod(fields[7]);
        rows.push_back(r);
        if (std::find(policies.begin(), policies.end(), r.policy) == policies.end())
            policies.push_back(r.policy);
    }
    std::vector<ComparisonRow> medians;
    for (const auto& p : policies) medians.push_back(median_of(rows, p));
    print_rows(rows, medians);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SLO-aware scheduling simulator"};
    app.require_subcommand(1);
    app.set_config("--config")->envname("SLOSCHED_CONFIG");

    // fit
    auto* fit = app.add_subcommand("fit", "fit latency coefficients from profiling samples");
    std::string fit_samples, fit_truth = "table", fit_out = "coefficients.txt";
    bool fit_synth = false;
    std::vector<int> fit_b_grid = {1, 2, 4, 8, 16, 32};
    std::vector<int> fit_l_grid = {100, 250, 500, 1000, 2000, 4000, 8000};
    double fit_noise = 0.0;
    std::uint64_t fit_seed = 0;
    fit->add_option("--samples", fit_samples, "profiling samples (JSONL)");
    fit->add_flag("--synth", fit_synth, "synthesize samples from --truth");
    fit->add_option("--truth", fit_truth, "generating coefficients: 'table' or a file");
    fit->add_option("--b-grid", fit_b_grid, "synthetic batch sizes")->delimiter(',');
    fit->add_option("--l-grid", fit_l_grid, "synthetic lengths")->delimiter(',');
    fit->add_option("--noise-std", fit_noise, "measurement noise std (ms)");
    fit->add_option("--seed", fit_seed, "noise seed");
    fit->add_option("--out", fit_out, "output coefficients file");

    // schedule
    auto* schedule = app.add_subcommand("schedule", "map priorities and print the plan");
    WorkloadFlags sch_wf;
    FleetFlags sch_ff;
    AnnealConfig sch_acfg;
    SimConfig sch_scfg;
    double sch_scale = -1.0;
    std::string sch_coeffs = "table", sch_policy = "sa", sch_out;
    int sch_cap = 10;
    bool sch_simulate = false;
    add_workload_flags(schedule, sch_wf);
    add_fleet_flags(schedule, sch_ff);
    add_anneal_flags(schedule, sch_acfg, sch_scale);
    add_sim_flags(schedule, sch_scfg);
    schedule->add_option("--coeffs", sch_coeffs, "coefficients file or 'table'");
    schedule->add_option("--policy", sch_policy, "sa | exhaustive | fcfs");
    schedule->add_option("--n-cap", sch_cap, "exhaustive request cap");
    schedule->add_flag("--simulate", sch_simulate, "also replay the plan and report realized metrics");
    schedule->add_option("--out", sch_out, "write schedule JSON here");

    // compare
    auto* cmp = app.add_subcommand("compare", "run policies side by side");
    WorkloadFlags cmp_wf;
    FleetFlags cmp_ff;
    AnnealConfig cmp_acfg;
    SimConfig cmp_scfg;
    double cmp_scale = -1.0;
    std::string cmp_coeffs = "table", cmp_out;
    std::vector<std::string> cmp_policies = {"sa", "fcfs"};
    std::vector<std::uint64_t> cmp_seeds;
    int cmp_num_seeds = 20, cmp_cap = 10;
    add_workload_flags(cmp, cmp_wf);
    add_fleet_flags(cmp, cmp_ff);
    add_anneal_flags(cmp, cmp_acfg, cmp_scale);
    add_sim_flags(cmp, cmp_scfg);
    cmp->add_option("--coeffs", cmp_coeffs, "coefficients file or 'table'");
    cmp->add_option("--policies", cmp_policies, "subset of sa,exhaustive,fcfs")->delimiter(',');
    cmp->add_option("--seeds", cmp_seeds, "explicit seed list")->delimiter(',');
    cmp->add_option("--num-seeds", cmp_num_seeds, "use seeds 0..N-1 when --seeds absent");
    cmp->add_option("--n-cap", cmp_cap, "exhaustive request cap");
    cmp->add_option("--out", cmp_out, "write CSV here");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "grid-sweep t0 x iter");
    WorkloadFlags swp_wf;
    FleetFlags swp_ff;
    AnnealConfig swp_acfg;
    double swp_scale = -1.0;
    std::string swp_coeffs = "table", swp_out;
    std::vector<double> swp_t0_grid = {50.0, 100.0, 200.0, 500.0};
    std::vector<int> swp_iter_grid = {50, 100};
    std::vector<std::uint64_t> swp_seeds;
    int swp_num_seeds = 10;
    add_workload_flags(sweep, swp_wf);
    add_fleet_flags(sweep, swp_ff);
    add_anneal_flags(sweep, swp_acfg, swp_scale);
    sweep->add_option("--coeffs", swp_coeffs, "coefficients file or 'table'");
    sweep->add_option("--t0-grid", swp_t0_grid, "initial temperatures")->delimiter(',');
    sweep->add_option("--iter-grid", swp_iter_grid, "iterations per level")->delimiter(',');
    sweep->add_option("--seeds", swp_seeds, "explicit seed list")->delimiter(',');
    sweep->add_option("--num-seeds", swp_num_seeds, "use seeds 0..N-1 when --seeds absent");
    sweep->add_option("--out", swp_out, "write CSV here");

    // perturb
    auto* perturb = app.add_subcommand("perturb", "degrade the predictor, simulate with truth");
    WorkloadFlags prt_wf;
    FleetFlags prt_ff;
    AnnealConfig prt_acfg;
    SimConfig prt_scfg;
    double prt_scale = -1.0;
    std::string prt_coeffs = "table", prt_out;
    std::vector<std::string> prt_params = {"alpha_p", "beta_p",  "gamma_p", "delta_p",
                                           "alpha_d", "beta_d",  "gamma_d", "delta_d"};
    std::vector<double> prt_factors = {0.5, 0.75, 1.25, 1.5};
    std::vector<std::uint64_t> prt_seeds;
    int prt_num_seeds = 20;
    add_workload_flags(perturb, prt_wf);
    add_fleet_flags(perturb, prt_ff);
    add_anneal_flags(perturb, prt_acfg, prt_scale);
    add_sim_flags(perturb, prt_scfg);
    perturb->add_option("--coeffs", prt_coeffs, "true coefficients file or 'table'");
    perturb->add_option("--params", prt_params, "coefficients to perturb")->delimiter(',');
    perturb->add_option("--factors", prt_factors, "multiplicative deltas")->delimiter(',');
    perturb->add_option("--seeds", prt_seeds, "explicit seed list")->delimiter(',');
    perturb->add_option("--num-seeds", prt_num_seeds, "use seeds 0..N-1 when --seeds absent");
    perturb->add_option("--out", prt_out, "write CSV here");

    // gen
    auto* gen = app.add_subcommand("gen", "write a synthetic trace file");
    WorkloadFlags gen_wf;
    std::string gen_out = "trace.jsonl";
    gen->add_option("--n", gen_wf.n, "request count")->check(CLI::NonNegativeNumber);
    gen->add_option("--seed", gen_wf.seed, "generation seed");
    gen->add_flag("--adversarial", gen_wf.adversarial, "longest jobs arrive first");
    gen->add_option("--out", gen_out, "output trace path");

    // report
    auto* report = app.add_subcommand("report", "re-read a compare CSV and print medians");
    std::string rep_in;
    report->add_option("--in", rep_in, "compare CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*fit)
            return cmd_fit(fit_samples, fit_synth, fit_truth, fit_b_grid, fit_l_grid, fit_noise,
                           fit_seed, fit_out);
        if (*schedule) {
            if (sch_scale >= 0.0) sch_acfg.objective_scale = sch_scale;
            if (schedule->count("--max-batch")) sch_ff.max_batch_set = true;
            return cmd_schedule(sch_wf, sch_ff, sch_coeffs, sch_acfg, sch_policy, sch_cap,
                                sch_scfg, sch_simulate, sch_out);
        }
        if (*cmp) {
            if (cmp_scale >= 0.0) cmp_acfg.objective_scale = cmp_scale;
            if (cmp->count("--max-batch")) cmp_ff.max_batch_set = true;
            return cmd_compare(cmp_wf, cmp_ff, cmp_coeffs, cmp_acfg, cmp_scfg, cmp_policies,
                               cmp_seeds, cmp_num_seeds, cmp_cap, cmp_out);
        }
        if (*sweep) {
            if (swp_scale >= 0.0) swp_acfg.objective_scale = swp_scale;
            if (sweep->count("--max-batch")) swp_ff.max_batch_set = true;
            return cmd_sweep(swp_wf, swp_ff, swp_coeffs, swp_acfg, swp_t0_grid, swp_iter_grid,
                             swp_seeds, swp_num_seeds, swp_out);
        }
        if (*perturb) {
            if (prt_scale >= 0.0) prt_acfg.objective_scale = prt_scale;
            if (perturb->count("--max-batch")) prt_ff.max_batch_set = true;
            return cmd_perturb(prt_wf, prt_ff, prt_coeffs, prt_acfg, prt_scfg, prt_params,
                               prt_factors, prt_seeds, prt_num_seeds, prt_out);
        }
        if (*gen) return cmd_gen(gen_wf, gen_out);
        if (*report) return cmd_report(rep_in);
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const CapacityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCapacity;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return 0;
}
