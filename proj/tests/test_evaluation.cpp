#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "orsynth/evaluation.hpp"
#include "test_support.hpp"

using namespace orsynth;

namespace {

// Correct counts reconstructed from published percentages: round(acc * n).
std::vector<DatasetTally> tallies_from_percent(const std::vector<double>& pct) {
    const std::vector<long> sizes{245, 652, 211, 77};
    const std::vector<std::string> names{"NL4OPT", "MAMO-Easy", "MAMO-Complex", "IndustryOR"};
    std::vector<DatasetTally> out;
    for (std::size_t i = 0; i < sizes.size(); ++i)
        out.push_back({names[i], std::lround(pct[i] / 100.0 * sizes[i]), sizes[i]});
    return out;
}

}  // namespace

TEST_CASE("comparator examples") {
    CHECK_FALSE(answers_equivalent(430.7692307692307, 460));
    CHECK(answers_equivalent(460, 460));
    CHECK(answers_equivalent(1.00009999, 1.0));
    CHECK_FALSE(answers_equivalent(1.0002, 1.0));
    CHECK(answers_equivalent(0.0, 0.0));
    CHECK_FALSE(answers_equivalent(1e-3, 0.0));
    CHECK_FALSE(answers_equivalent(std::nan(""), 1.0));
    CHECK_FALSE(answers_equivalent(1.0, INFINITY));
}

TEST_CASE("comparator boundary") {
    const double eps = 1e-6;
    for (double g : {1.0, 460.0, -37.5, 1e6}) {
        CAPTURE(g);
        double denom = std::fabs(g + eps);
        CHECK(answers_equivalent(g + (1e-4 - 1e-12) * denom, g));
        CHECK_FALSE(answers_equivalent(g + (1e-4 + 1e-12) * denom, g));
        CHECK(answers_equivalent(g - (1e-4 - 1e-12) * denom, g));
        CHECK_FALSE(answers_equivalent(g - (1e-4 + 1e-12) * denom, g));
    }
}

TEST_CASE("comparator configuration") {
    ComparatorConfig loose{1e-2, 1e-6};
    CHECK(answers_equivalent(101, 100, loose));
    CHECK_FALSE(answers_equivalent(101, 100));
    CHECK_THROWS_AS((ComparatorConfig{0, 1e-6}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((ComparatorConfig{1e-4, -1}.validate()), std::invalid_argument);
}

TEST_CASE("every finite value is equivalent to itself") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> mant(-1, 1);
    std::uniform_int_distribution<int> expo(-300, 300);
    for (int i = 0; i < 1000; ++i) {
        double g = std::ldexp(mant(rng), expo(rng));
        CHECK(answers_equivalent(g, g));
    }
}

TEST_CASE("accepted answers form an interval around the truth") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> gdist(1e-3, 1e4);
    for (int i = 0; i < 200; ++i) {
        double g = gdist(rng);
        int transitions = 0;
        bool prev = false;
        for (int k = -400; k <= 400; ++k) {
            double o = g * (1 + k * 1e-6);
            bool acc = answers_equivalent(o, g);
            if (k == 0) CHECK(acc);
            if (k > -400 && acc != prev) ++transitions;
            prev = acc;
        }
        CHECK(transitions == 2);
    }
}

TEST_CASE("table arithmetic") {
    auto row_a = aggregate(tallies_from_percent({84.49, 85.28, 61.61, 36.36}));
    CHECK(row_a.per_dataset[0].correct == 207);
    CHECK(row_a.per_dataset[1].correct == 556);
    CHECK(row_a.per_dataset[2].correct == 130);
    CHECK(row_a.per_dataset[3].correct == 28);
    CHECK(std::fabs(row_a.micro * 100 - 77.72) <= 0.01);
    CHECK(std::fabs(row_a.macro * 100 - 66.94) <= 0.01);
    CHECK(format_percent(row_a.micro) == "77.72");
    CHECK(format_percent(row_a.macro) == "66.94");

    auto row_b = aggregate(tallies_from_percent({78.37, 84.20, 38.39, 35.06}));
    CHECK(row_b.per_dataset[0].correct + row_b.per_dataset[1].correct + row_b.per_dataset[2].correct +
              row_b.per_dataset[3].correct == 849);
    CHECK(format_percent(row_b.micro) == "71.65");
    CHECK(format_percent(row_b.macro) == "59.01");
}

TEST_CASE("aggregation properties") {
    auto one = aggregate({{"only", 3, 7}});
    CHECK(one.micro == one.macro);
    CHECK(one.micro == doctest::Approx(3.0 / 7));
    CHECK_THROWS(aggregate({}));

    std::mt19937_64 rng(12);
    std::uniform_int_distribution<long> size(1, 500);
    for (int i = 0; i < 200; ++i) {
        std::vector<DatasetTally> t;
        int n = 1 + i % 5;
        for (int d = 0; d < n; ++d) {
            long total = size(rng);
            std::uniform_int_distribution<long> c(0, total);
            t.push_back({"d" + std::to_string(d), c(rng), total});
        }
        auto r = aggregate(t);
        auto [lo, hi] = std::minmax_element(t.begin(), t.end(), [](const auto& a, const auto& b) {
            return a.accuracy() < b.accuracy();
        });
        CHECK(r.micro >= lo->accuracy() - 1e-15);
        CHECK(r.micro <= hi->accuracy() + 1e-15);
        std::shuffle(t.begin(), t.end(), rng);
        CHECK(aggregate(t).macro == doctest::Approx(r.macro).epsilon(1e-14));
    }
}

TEST_CASE("half-up rounding") {
    CHECK(round_half_up(77.725, 2) == doctest::Approx(77.73));
    CHECK(round_half_up(0.125, 2) == doctest::Approx(0.13));
    CHECK(round_half_up(59.0049, 2) == doctest::Approx(59.0));
    CHECK(format_percent(0.5) == "50.00");
}

TEST_CASE("dataset evaluation") {
    const std::string salmon = testsupport::read_text(testsupport::data_path("models/salmon_eggs.optir"));
    std::vector<BenchmarkInstance> inst{
        {"a", "toy", "salmon", 460}, {"b", "toy", "salmon", 460}, {"c", "toy", "none", 3},
        {"d", "other", "infeasible", 1}, {"e", "other", "broken", 1}};
    std::map<std::string, Submission> subs{
        {"a", {salmon}},
        {"b", {430.7692307692307}},
        {"d", {std::string("var x <= 1\nmin x\nst c: x >= 2\n")}},
        {"e", {std::string("min y\n")}},
        {"zz", {1.0}}};
    auto ev = evaluate_dataset(inst, subs);
    REQUIRE(ev.outcomes.size() == 5);
    CHECK(ev.outcomes[0].correct);
    CHECK(ev.outcomes[0].produced == 460.0);
    CHECK_FALSE(ev.outcomes[1].correct);
    CHECK(ev.outcomes[1].reason.find("differs") != std::string::npos);
    CHECK(ev.outcomes[2].reason == "missing solution");
    CHECK(ev.outcomes[3].reason == "infeasible");
    CHECK(ev.outcomes[4].reason.rfind("model error", 0) == 0);
    CHECK(ev.unmatched_submissions == std::vector<std::string>{"zz"});
    REQUIRE(ev.tallies.size() == 2);
    CHECK(ev.tallies[0].name == "toy");
    CHECK(ev.tallies[0].correct == 1);
    CHECK(ev.tallies[0].total == 3);
    CHECK(ev.tallies[1].correct == 0);
}

TEST_CASE("benchmark and submission files") {
    testsupport::TempDir dir;
    testsupport::write_text(dir / "bench.jsonl",
                            "{\"id\": \"p1\", \"dataset\": \"toy\", \"description\": \"d\", \"ground_truth\": 460}\n");
    testsupport::write_text(dir / "subs.jsonl",
                            "{\"id\": \"p1\", \"answer\": 460.01}\n{\"id\": \"p2\", \"model\": \"var x\\nmin x\\n\"}\n");
    auto bench = load_benchmark(dir / "bench.jsonl");
    REQUIRE(bench.size() == 1);
    CHECK(bench[0].ground_truth == 460);
    auto subs = load_submissions(dir / "subs.jsonl");
    CHECK(std::get<double>(subs.at("p1").value) == 460.01);
    CHECK(std::holds_alternative<std::string>(subs.at("p2").value));

    testsupport::write_text(dir / "bad.jsonl", "{\"id\": \"p1\", \"dataset\": \"toy\"}\n");
    CHECK_THROWS_AS(load_benchmark(dir / "bad.jsonl"), InvalidRecord);
    CHECK_THROWS_AS(load_submissions(dir / "missing.jsonl"), IoError);
}

TEST_CASE("survival counts") {
    SeedExample seed;
    seed.id = "s";
    std::vector<SeedExample> recs{seed};
    auto gen = [&](std::string id, std::string op, RecordStatus st) {
        SeedExample r;
        r.id = std::move(id);
        r.lineage.op = std::move(op);
        r.status = st;
        return r;
    };
    recs.push_back(gen("g1", "combination", RecordStatus::Active));
    recs.push_back(gen("g2", "combination", RecordStatus::Discarded));
    recs.push_back(gen("g3", "parameter_adjustment", RecordStatus::Active));
    auto tomb = gen("g3~discarded", "parameter_adjustment", RecordStatus::Discarded);
    tomb.supersedes = "g3";
    recs.push_back(tomb);
    auto s = survival_counts(recs);
    CHECK(s.at("combination") == SurvivalCount{2, 1});
    CHECK(s.at("parameter_adjustment") == SurvivalCount{1, 1});
    CHECK(s.count("seed") == 0);

    long attempted = 0, survived = 0, discarded = 0;
    for (const auto& [op, c] : s) attempted += c.attempted, survived += c.survived, discarded += c.discarded();
    CHECK(attempted == survived + discarded);
    CHECK(attempted == 3);

    auto rep = aggregate({{"toy", 1, 2}}, s);
    auto j = rep.to_json();
    CHECK(j.contains("micro"));
    CHECK(rep.to_table().find("toy") != std::string::npos);
}
