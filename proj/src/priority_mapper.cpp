#include "slosched/priority_mapper.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace slosched {

void AnnealConfig::validate() const {
    if (!(t0 > t_thres) || !(t_thres > 0.0))
        throw DataError("AnnealConfig: requires t0 > t_thres > 0");
    if (iter < 1)
        throw DataError("AnnealConfig: iter must be >= 1");
    if (!(tau > 0.0) || !(tau < 1.0))
        throw DataError("AnnealConfig: tau must be in (0,1)");
    if (objective_scale && !(*objective_scale >= 0.0))
        throw DataError("AnnealConfig: objective_scale must be >= 0");
}

namespace {

Schedule pack_greedy(const std::vector<int>& ordered_ids, int max_batch) {
    Schedule s;
    for (std::size_t i = 0; i < ordered_ids.size(); i += max_batch) {
        const std::size_t end = std::min(i + max_batch, ordered_ids.size());
        s.batches.emplace_back(ordered_ids.begin() + i, ordered_ids.begin() + end);
    }
    return s;
}

// (batch index, offset) of every flattened position
std::vector<std::pair<int, int>> locate_positions(const Schedule& s) {
    std::vector<std::pair<int, int>> loc;
    loc.reserve(s.request_count());
    for (int bi = 0; bi < static_cast<int>(s.batches.size()); ++bi)
        for (int j = 0; j < static_cast<int>(s.batches[bi].size()); ++j)
            loc.emplace_back(bi, j);
    return loc;
}

std::optional<Schedule> try_squeeze(const Schedule& s, Rng& rng, int max_batch) {
    if (s.batches.size() < 2) return std::nullopt;
    const auto first_size = s.batches.front().size();
    const auto eligible = s.request_count() - first_size;
    const auto pick = first_size + rng.uniform_index(eligible);
    const auto loc = locate_positions(s)[pick];
    if (static_cast<int>(s.batches[loc.first - 1].size()) >= max_batch) return std::nullopt;

    Schedule out = s;
    const int id = out.batches[loc.first][loc.second];
    out.batches[loc.first - 1].push_back(id);
    out.batches[loc.first].erase(out.batches[loc.first].begin() + loc.second);
    if (out.batches[loc.first].empty())
        out.batches.erase(out.batches.begin() + loc.first);
    return out;
}

std::optional<Schedule> try_delay(const Schedule& s, Rng& rng, int max_batch) {
    const auto n = s.request_count();
    if (n == 0) return std::nullopt;
    const auto pick = rng.uniform_index(n);
    const auto loc = locate_positions(s)[pick];
    const bool has_next = loc.first + 1 < static_cast<int>(s.batches.size());
    if (has_next && static_cast<int>(s.batches[loc.first + 1].size()) >= max_batch)
        return std::nullopt;

    Schedule out = s;
    const int id = out.batches[loc.first][loc.second];
    if (has_next)
        out.batches[loc.first + 1].push_back(id);
    else
        out.batches.push_back({id});
    out.batches[loc.first].erase(out.batches[loc.first].begin() + loc.second);
    if (out.batches[loc.first].empty())
        out.batches.erase(out.batches.begin() + loc.first);
    return out;
}

std::optional<Schedule> try_swap(const Schedule& s, Rng& rng) {
    const auto n = s.request_count();
    if (n < 2) return std::nullopt;
    const auto a = rng.uniform_index(n);
    auto b = rng.uniform_index(n - 1);
    if (b >= a) ++b;
    const auto loc = locate_positions(s);
    Schedule out = s;
    std::swap(out.batches[loc[a].first][loc[a].second],
              out.batches[loc[b].first][loc[b].second]);
    return out;
}

double standalone_e2e(const Workload& w, int id, const LatencyCoefficients& coeffs,
                      int b) {
    const Request* r = w.find_request(id);
    if (!r) throw DataError("unknown request id " + std::to_string(id));
    if (!r->predicted_output_len)
        throw DataError("request " + std::to_string(id) + " missing predicted length");
    return predict_exec(coeffs, b, r->input_len, *r->predicted_output_len);
}

// Flat mirror of a Schedule (flattened order plus batch sizes) so the
// annealing loop runs without per-proposal heap allocation. Moves consume
// rng draws exactly like the Schedule-based neighbor().
struct FlatSchedule {
    std::vector<int> perm;   // dense request indices in position order
    std::vector<int> sizes;  // batch sizes, all >= 1

    static FlatSchedule from(const Schedule& s) {
        FlatSchedule f;
        for (const auto& batch : s.batches) {
            f.sizes.push_back(static_cast<int>(batch.size()));
            f.perm.insert(f.perm.end(), batch.begin(), batch.end());
        }
        f.sizes.reserve(f.perm.size());  // delay can split down to singletons
        return f;
    }

    Schedule to_schedule() const {
        Schedule s;
        std::size_t pos = 0;
        for (int part : sizes) {
            s.batches.emplace_back(perm.begin() + pos, perm.begin() + pos + part);
            pos += part;
        }
        return s;
    }

    int batch_of(int pos) const {
        int k = 0;
        for (int acc = sizes[0]; pos >= acc; acc += sizes[++k]) {
        }
        return k;
    }

    int batch_start(int k) const {
        int acc = 0;
        for (int i = 0; i < k; ++i) acc += sizes[i];
        return acc;
    }

    bool apply_squeeze(Rng& rng, int max_batch) {
        if (sizes.size() < 2) return false;
        const int first = sizes.front();
        const int n = static_cast<int>(perm.size());
        const int pos = first + static_cast<int>(rng.uniform_index(n - first));
        const int k = batch_of(pos);
        if (sizes[k - 1] >= max_batch) return false;
        const int dst = batch_start(k);  // end of batch k-1 once it grows
        std::rotate(perm.begin() + dst, perm.begin() + pos, perm.begin() + pos + 1);
        sizes[k - 1]++;
        if (--sizes[k] == 0) sizes.erase(sizes.begin() + k);
        return true;
    }

    bool apply_delay(Rng& rng, int max_batch) {
        const int n = static_cast<int>(perm.size());
        if (n == 0) return false;
        const int pos = static_cast<int>(rng.uniform_index(n));
        const int k = batch_of(pos);
        const bool has_next = k + 1 < static_cast<int>(sizes.size());
        if (has_next && sizes[k + 1] >= max_batch) return false;
        const int dst = has_next ? batch_start(k + 2) : n;  // end of target batch
        std::rotate(perm.begin() + pos, perm.begin() + pos + 1, perm.begin() + dst);
        if (has_next)
            sizes[k + 1]++;
        else
            sizes.push_back(1);
        if (--sizes[k] == 0) sizes.erase(sizes.begin() + k);
        return true;
    }

    bool apply_swap(Rng& rng) {
        const auto n = perm.size();
        if (n < 2) return false;
        const auto a = rng.uniform_index(n);
        auto b = rng.uniform_index(n - 1);
        if (b >= a) ++b;
        std::swap(perm[a], perm[b]);
        return true;
    }

    // same retry discipline as neighbor(); false means the proposal equals
    // the current state (single-request degenerate case)
    bool propose(Rng& rng, int max_batch) {
        constexpr int kAttempts = 8;
        if (perm.empty()) return false;
        for (int attempt = 0; attempt < kAttempts; ++attempt) {
            const auto op = rng.uniform_index(3);
            if (op == 0) {
                if (apply_squeeze(rng, max_batch)) return true;
            } else if (op == 1) {
                if (apply_delay(rng, max_batch)) return true;
            } else {
                if (apply_swap(rng)) return true;
            }
        }
        return apply_swap(rng);
    }
};

// Per-request predictions and SLO thresholds in flat arrays over dense
// indices, so the search loops are pure arithmetic with no hashing.
class CostModel {
public:
    CostModel(const Workload& workload, const std::vector<int>& request_ids,
              const LatencyCoefficients& coeffs, int max_batch)
        : mb_(max_batch) {
        ids_ = request_ids;
        std::sort(ids_.begin(), ids_.end());
        const auto n = ids_.size();
        exec_.reserve(n * mb_);
        prefill_.reserve(n * mb_);
        tpot_.reserve(n * mb_);
        for (int id : ids_) {
            const Request* r = workload.find_request(id);
            if (!r) throw DataError("unknown request id " + std::to_string(id));
            if (!r->predicted_output_len)
                throw DataError("request " + std::to_string(id) + " missing predicted length");
            const SloSpec& slo = workload.class_of(*r).slo;
            e2e_kind_.push_back(slo.kind == SloKind::E2E);
            e2e_slo_.push_back(slo.kind == SloKind::E2E ? *slo.e2e_ms : 0.0);
            ttft_slo_.push_back(slo.kind == SloKind::E2E ? 0.0 : *slo.ttft_ms);
            tpot_slo_.push_back(slo.kind == SloKind::E2E ? 0.0 : *slo.tpot_ms);
            for (int b = 1; b <= mb_; ++b) {
                exec_.push_back(predict_exec(coeffs, b, r->input_len, *r->predicted_output_len));
                prefill_.push_back(predict_prefill(coeffs, b, r->input_len));
                tpot_.push_back(predict_tpot(coeffs, b, r->input_len, *r->predicted_output_len));
            }
            index_of_[id] = static_cast<int>(index_of_.size());
        }
    }

    int id_of(int idx) const { return ids_[idx]; }
    double exec(int idx, int bidx) const { return exec_[idx * mb_ + bidx]; }
    double prefill(int idx, int bidx) const { return prefill_[idx * mb_ + bidx]; }
    double tpot(int idx, int bidx) const { return tpot_[idx * mb_ + bidx]; }
    bool met(int idx, int bidx, double elapsed, double e2e) const {
        if (e2e_kind_[idx]) return e2e <= e2e_slo_[idx];
        return elapsed + prefill_[idx * mb_ + bidx] <= ttft_slo_[idx] &&
               tpot_[idx * mb_ + bidx] <= tpot_slo_[idx];
    }

    // schedules over dense indices instead of ids keep scoring allocation-
    // and hash-free in the annealing inner loop
    Schedule to_index_space(const Schedule& s) const {
        Schedule out = s;
        for (auto& batch : out.batches)
            for (auto& v : batch) v = index_of_.at(v);
        return out;
    }

    Schedule to_id_space(const Schedule& s) const {
        Schedule out = s;
        for (auto& batch : out.batches)
            for (auto& v : batch) v = ids_[v];
        return out;
    }

    double score(const std::vector<int>& perm, const std::vector<int>& sizes) const {
        int n_met = 0;
        double total = 0.0;
        double elapsed = 0.0;
        int pos = 0;
        for (int part : sizes) {
            const int bidx = part - 1;
            double makespan = 0.0;
            for (int k = 0; k < part; ++k) {
                const int idx = perm[pos + k];
                const double e = exec(idx, bidx);
                const double e2e = elapsed + e;
                total += e2e;
                if (met(idx, bidx, elapsed, e2e)) ++n_met;
                makespan = std::max(makespan, e);
            }
            elapsed += makespan;
            pos += part;
        }
        return total > 0.0 ? static_cast<double>(n_met) / total : 0.0;
    }

private:
    int mb_;
    std::vector<int> ids_;
    std::vector<double> exec_, prefill_, tpot_;
    std::vector<char> e2e_kind_;
    std::vector<double> e2e_slo_, ttft_slo_, tpot_slo_;
    std::unordered_map<int, int> index_of_;
};

}  // namespace

std::pair<Schedule, Schedule> initial_candidates(const Workload& workload,
                                                 const std::vector<int>& request_ids,
                                                 const LatencyCoefficients& coeffs,
                                                 int max_batch) {
    std::vector<int> by_e2e = request_ids;
    std::sort(by_e2e.begin(), by_e2e.end(), [&](int a, int b) {
        const double ea = standalone_e2e(workload, a, coeffs, max_batch);
        const double eb = standalone_e2e(workload, b, coeffs, max_batch);
        return ea != eb ? ea < eb : a < b;
    });

    std::vector<int> by_arrival = request_ids;
    std::sort(by_arrival.begin(), by_arrival.end(), [&](int a, int b) {
        const double ta = workload.find_request(a)->arrival_time_ms;
        const double tb = workload.find_request(b)->arrival_time_ms;
        return ta != tb ? ta < tb : a < b;
    });

    return {pack_greedy(by_e2e, max_batch), pack_greedy(by_arrival, max_batch)};
}

std::optional<EvaluatedSchedule> shortcut_check(const Schedule& sorted_schedule,
                                                const LatencyCoefficients& coeffs,
                                                const Workload& workload) {
    EvaluatedSchedule ev = evaluate(sorted_schedule, coeffs, workload);
    if (ev.n == static_cast<int>(ev.per_request.size()))
        return ev;
    return std::nullopt;
}

Schedule neighbor(const Schedule& schedule, Rng& rng, int max_batch) {
    constexpr int kAttempts = 8;
    if (schedule.request_count() == 0) return schedule;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        const auto op = rng.uniform_index(3);
        std::optional<Schedule> out;
        if (op == 0)
            out = try_squeeze(schedule, rng, max_batch);
        else if (op == 1)
            out = try_delay(schedule, rng, max_batch);
        else
            out = try_swap(schedule, rng);
        if (out) return std::move(*out);
    }
    if (auto out = try_swap(schedule, rng)) return std::move(*out);
    return schedule;  // single request: every move degenerates
}

AnnealResult anneal(const Workload& workload, const std::vector<int>& request_ids,
                    const LatencyCoefficients& coeffs, const AnnealConfig& config,
                    int max_batch) {
    config.validate();
    AnnealResult res;

    auto [sorted_sched, input_sched] = initial_candidates(workload, request_ids, coeffs, max_batch);
    EvaluatedSchedule ev_sorted = evaluate(sorted_sched, coeffs, workload);
    res.stats.g_sorted_start = ev_sorted.g;

    if (ev_sorted.n == static_cast<int>(ev_sorted.per_request.size())) {
        res.stats.shortcut = true;
        res.best = std::move(ev_sorted);
        return res;
    }

    EvaluatedSchedule ev_input = evaluate(input_sched, coeffs, workload);
    res.stats.g_input_start = ev_input.g;

    const CostModel model(workload, request_ids, coeffs, max_batch);
    FlatSchedule current = FlatSchedule::from(
        model.to_index_space(ev_sorted.g >= ev_input.g ? sorted_sched : input_sched));
    double f = model.score(current.perm, current.sizes);

    // The raw objective is O(1e-5) req/ms against temperatures in the
    // hundreds, which would accept every move; scale deltas so that a
    // relative change of 1 is borderline at T = t0 and heavily penalized
    // near t_thres.
    const double scale = config.objective_scale
                             ? *config.objective_scale
                             : (f > 0.0 ? config.t0 / f : config.t0);
    res.stats.objective_scale_used = scale;

    FlatSchedule best = current;
    double best_f = f;
    FlatSchedule scratch = current;

    Rng rng(config.seed);
    for (double t = config.t0; t >= config.t_thres; t *= config.tau) {
        for (int k = 0; k < config.iter; ++k) {
            scratch = current;
            scratch.propose(rng, max_batch);
            const double f_new = model.score(scratch.perm, scratch.sizes);
            res.stats.proposals++;

            bool accept = f_new > f;
            if (!accept) {
                const double x = (f - f_new) * scale / t;
                const double u = rng.uniform();
                // for x >= 38, exp(-x) < 2^-53, below every positive draw
                accept = x < 38.0 ? u < std::exp(-x) : u == 0.0;
            }
            if (accept) {
                res.stats.accepted++;
                std::swap(current, scratch);
                f = f_new;
                if (f > best_f) {
                    best = current;
                    best_f = f;
                }
            }
        }
    }

    // re-evaluate through the objective module; the start candidates stay
    // a floor even under last-ulp disagreement with the table score
    EvaluatedSchedule ev_best = evaluate(model.to_id_space(best.to_schedule()), coeffs, workload);
    res.best = ev_best.g >= std::max(ev_sorted.g, ev_input.g)
                   ? std::move(ev_best)
                   : (ev_sorted.g >= ev_input.g ? std::move(ev_sorted) : std::move(ev_input));
    return res;
}

namespace {

// ordered compositions of n with every part <= max_part, lexicographic
std::vector<std::vector<int>> compositions(int n, int max_part) {
    std::vector<std::vector<int>> out;
    if (n == 0) {
        out.push_back({});
        return out;
    }
    std::vector<int> cur;
    auto rec = [&](auto&& self, int remaining) -> void {
        if (remaining == 0) {
            out.push_back(cur);
            return;
        }
        for (int part = 1; part <= std::min(remaining, max_part); ++part) {
            cur.push_back(part);
            self(self, remaining - part);
            cur.pop_back();
        }
    };
    rec(rec, n);
    return out;
}

}  // namespace

ExhaustiveResult exhaustive(const Workload& workload, const std::vector<int>& request_ids,
                            const LatencyCoefficients& coeffs, int max_batch,
                            int n_cap) {
    const int n = static_cast<int>(request_ids.size());
    if (n > n_cap)
        throw CapacityError("exhaustive: " + std::to_string(n) + " requests exceed cap of " +
                            std::to_string(n_cap) + " (search space is O(N! * 2^N))");

    const CostModel model(workload, request_ids, coeffs, max_batch);

    ExhaustiveResult res;
    double best_g = -1.0;
    double best_t = 0.0;
    std::vector<int> best_perm;
    std::vector<int> best_comp;

    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;

    const auto comps = compositions(n, max_batch);
    for (const auto& comp : comps) {
        std::sort(perm.begin(), perm.end());
        do {
            int met = 0;
            double total = 0.0;
            double elapsed = 0.0;
            int pos = 0;
            for (int part : comp) {
                const int bidx = part - 1;
                double makespan = 0.0;
                for (int k = 0; k < part; ++k) {
                    const int idx = perm[pos + k];
                    const double exec = model.exec(idx, bidx);
                    const double e2e = elapsed + exec;
                    total += e2e;
                    if (model.met(idx, bidx, elapsed, e2e)) ++met;
                    makespan = std::max(makespan, exec);
                }
                elapsed += makespan;
                pos += part;
            }
            res.schedules_evaluated++;
            const double g = total > 0.0 ? static_cast<double>(met) / total : 0.0;

            bool better = g > best_g;
            if (!better && g == best_g) {
                if (total < best_t) {
                    better = true;
                } else if (total == best_t) {
                    // lexicographic on the flattened id order, then on
                    // the batch-size sequence
                    std::vector<int> flat(n);
                    for (int i = 0; i < n; ++i) flat[i] = model.id_of(perm[i]);
                    std::vector<int> best_flat(n);
                    for (int i = 0; i < n; ++i) best_flat[i] = model.id_of(best_perm[i]);
                    better = flat < best_flat || (flat == best_flat && comp < best_comp);
                }
            }
            if (better) {
                best_g = g;
                best_t = total;
                best_perm = perm;
                best_comp = comp;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
    }

    Schedule s;
    int pos = 0;
    for (int part : best_comp) {
        Batch b;
        for (int k = 0; k < part; ++k) b.push_back(model.id_of(best_perm[pos + k]));
        s.batches.push_back(std::move(b));
        pos += part;
    }
    res.best = evaluate(s, coeffs, workload);
    return res;
}

}  // namespace slosched
