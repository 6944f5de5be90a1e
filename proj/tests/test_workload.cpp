#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "slosched/workload.hpp"

using namespace slosched;

namespace {

const std::string kSampleTrace = std::string(SLOSCHED_DATA_DIR) + "/sample_trace.jsonl";

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& contents) : path(name) {
        std::ofstream out(path);
        out << contents;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("bundled sample trace loads 16 requests over 2 classes") {
    Workload w = load_trace(kSampleTrace);
    CHECK(w.requests.size() == 16);
    REQUIRE(w.classes.size() == 2);
    CHECK(w.classes[0].name == "code");
    CHECK(*w.classes[0].slo.e2e_ms == 30000.0);
    CHECK(w.classes[1].name == "chat");
    CHECK(*w.classes[1].slo.ttft_ms == 10000.0);
    CHECK(*w.classes[1].slo.tpot_ms == 50.0);
}

TEST_CASE("trace parse errors carry line numbers") {
    TempFile bad("bad_trace.jsonl",
                 R"({"task":"code","slo_kind":"e2e","e2e_ms":30000})"
                 "\n"
                 R"({"id":0,"task":"code","input_len":10,"output_len":5,"arrival_ms":0})"
                 "\n"
                 R"({"id":1,"task":"code","input_len":-3,"output_len":5,"arrival_ms":0})"
                 "\n");
    CHECK_THROWS_WITH_AS(load_trace(bad.path), doctest::Contains("non-positive length"),
                         DataError);

    TempFile garbled("garbled_trace.jsonl", "{not json\n");
    CHECK_THROWS_WITH_AS(load_trace(garbled.path), doctest::Contains(":1"), DataError);

    TempFile undeclared("undeclared_trace.jsonl",
                        R"({"id":0,"task":"mystery","input_len":10,"output_len":5,"arrival_ms":0})"
                        "\n");
    CHECK_THROWS_WITH_AS(load_trace(undeclared.path), doctest::Contains("undeclared task"),
                         DataError);
}

TEST_CASE("empty trace loads as an empty workload") {
    TempFile empty("empty_trace.jsonl", "");
    Workload w = load_trace(empty.path);
    CHECK(w.requests.empty());
    CHECK(w.classes.empty());
}

TEST_CASE("save then load reproduces the workload") {
    auto [code, chat] = default_synth_classes();
    auto reqs = generate_mixed(10, 123, code, chat);
    reqs[2].predicted_output_len = 99;
    Workload w = validate_workload(reqs, {code, chat});

    const std::string path = "roundtrip_trace.jsonl";
    save_trace(w, path);
    Workload back = load_trace(path);
    std::remove(path.c_str());

    REQUIRE(back.requests.size() == w.requests.size());
    REQUIRE(back.classes.size() == w.classes.size());
    for (std::size_t i = 0; i < w.requests.size(); ++i) {
        CHECK(back.requests[i].id == w.requests[i].id);
        CHECK(back.requests[i].task_class_id == w.requests[i].task_class_id);
        CHECK(back.requests[i].input_len == w.requests[i].input_len);
        CHECK(back.requests[i].true_output_len == w.requests[i].true_output_len);
        CHECK(back.requests[i].predicted_output_len == w.requests[i].predicted_output_len);
        CHECK(back.requests[i].arrival_time_ms == w.requests[i].arrival_time_ms);
    }
    for (std::size_t i = 0; i < w.classes.size(); ++i) {
        CHECK(back.classes[i].id == w.classes[i].id);
        CHECK(back.classes[i].name == w.classes[i].name);
        CHECK(back.classes[i].output_prior.index() == w.classes[i].output_prior.index());
    }
}

TEST_CASE("generate_mixed splits classes evenly, clamps, and is seed-deterministic") {
    auto [code, chat] = default_slo_classes();
    const auto reqs = generate_mixed(10, 7, code, chat);
    REQUIRE(reqs.size() == 10);
    int n_code = 0;
    for (const auto& r : reqs) {
        if (r.task_class_id == code.id) ++n_code;
        CHECK(r.input_len >= 1);
        CHECK(r.input_len <= 2047);
        CHECK(r.true_output_len >= 1);
        CHECK(r.true_output_len <= 2047);
    }
    CHECK(n_code == 5);

    const auto odd = generate_mixed(7, 7, code, chat);
    int n_code_odd = 0;
    for (const auto& r : odd)
        if (r.task_class_id == code.id) ++n_code_odd;
    CHECK(n_code_odd == 4);  // ceil(7/2)

    const auto again = generate_mixed(10, 7, code, chat);
    for (std::size_t i = 0; i < reqs.size(); ++i) {
        CHECK(reqs[i].id == again[i].id);
        CHECK(reqs[i].input_len == again[i].input_len);
        CHECK(reqs[i].true_output_len == again[i].true_output_len);
        CHECK(reqs[i].task_class_id == again[i].task_class_id);
    }

    CHECK(generate_mixed(0, 1, code, chat).empty());

    // ids are dense in shuffled order
    for (std::size_t i = 0; i < reqs.size(); ++i)
        CHECK(reqs[i].id == static_cast<int>(i));
}

TEST_CASE("default SLO classes carry the paper-style targets") {
    auto [code, chat] = default_slo_classes();
    CHECK(code.slo.kind == SloKind::E2E);
    CHECK(*code.slo.e2e_ms == 30000.0);
    CHECK_FALSE(code.slo.ttft_ms.has_value());
    CHECK(chat.slo.kind == SloKind::TTFT_TPOT);
    CHECK(*chat.slo.ttft_ms == 10000.0);
    CHECK(*chat.slo.tpot_ms == 50.0);
    CHECK_FALSE(chat.slo.e2e_ms.has_value());

    auto [scode, schat] = default_synth_classes();
    CHECK(std::holds_alternative<GaussianPrior>(scode.output_prior));
    CHECK(std::holds_alternative<GaussianPrior>(schat.output_prior));
}

TEST_CASE("profile sample generation covers the grid and sits on the surface") {
    const auto truth = table_coefficients();
    const std::vector<int> bs{1, 2, 3, 4, 5, 6, 7, 8};
    const std::vector<int> ls{100, 500, 1000, 2000};
    const auto noiseless = generate_profile_samples(truth, bs, ls, 0.0, 0);
    CHECK(noiseless.size() == 32);
    for (const auto& s : noiseless) {
        CHECK(s.measured_prefill_ms ==
              doctest::Approx(predict_prefill(truth, s.batch_size, s.input_len)));
        CHECK(s.measured_per_token_decode_ms ==
              doctest::Approx(predict_per_token_decode(truth, s.batch_size, s.accumulated_len)));
    }

    const auto noisy_a = generate_profile_samples(truth, bs, ls, 0.5, 9);
    const auto noisy_b = generate_profile_samples(truth, bs, ls, 0.5, 9);
    for (std::size_t i = 0; i < noisy_a.size(); ++i)
        CHECK(noisy_a[i].measured_prefill_ms == noisy_b[i].measured_prefill_ms);

    CHECK_THROWS_AS(generate_profile_samples(truth, {}, ls, 0.0, 0), DataError);
}

TEST_CASE("profile samples persist as JSONL") {
    const auto truth = table_coefficients();
    const auto samples = generate_profile_samples(truth, {1, 2}, {100, 200}, 0.25, 3);
    const std::string path = "samples_roundtrip.jsonl";
    save_profile_samples(samples, path);
    const auto back = load_profile_samples(path);
    std::remove(path.c_str());
    REQUIRE(back.size() == samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        CHECK(back[i].batch_size == samples[i].batch_size);
        CHECK(back[i].input_len == samples[i].input_len);
        CHECK(back[i].measured_prefill_ms == samples[i].measured_prefill_ms);
        CHECK(back[i].measured_per_token_decode_ms == samples[i].measured_per_token_decode_ms);
    }
}

TEST_CASE("arrange_longest_first makes arrival rank follow descending exec") {
    auto [code, chat] = default_synth_classes();
    auto reqs = generate_mixed(8, 11, code, chat);
    arrange_longest_first(reqs, table_coefficients());

    std::vector<const Request*> by_arrival;
    for (const auto& r : reqs) by_arrival.push_back(&r);
    std::sort(by_arrival.begin(), by_arrival.end(), [](const Request* a, const Request* b) {
        return a->arrival_time_ms < b->arrival_time_ms;
    });
    const auto coeffs = table_coefficients();
    for (std::size_t i = 1; i < by_arrival.size(); ++i) {
        const double prev = predict_exec(coeffs, 1, by_arrival[i - 1]->input_len,
                                         by_arrival[i - 1]->true_output_len);
        const double cur = predict_exec(coeffs, 1, by_arrival[i]->input_len,
                                        by_arrival[i]->true_output_len);
        CHECK(prev >= cur);
    }
}
