#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "orsynth/cli.hpp"
#include "orsynth/corpus.hpp"
#include "test_support.hpp"

using namespace orsynth;
using testsupport::data_path;
using testsupport::TempDir;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "orsynth");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string model(const std::string& name) { return data_path("models/" + name + ".optir").string(); }

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

// Benchmark plus answer file for four datasets with the given correct counts.
void write_four_datasets(const TempDir& dir, const std::vector<long>& correct) {
    const std::vector<long> sizes{245, 652, 211, 77};
    const std::vector<std::string> names{"NL4OPT", "MAMO-Easy", "MAMO-Complex", "IndustryOR"};
    std::string bench, subs;
    for (std::size_t d = 0; d < sizes.size(); ++d) {
        for (long i = 0; i < sizes[d]; ++i) {
            std::string id = names[d] + "-" + std::to_string(i);
            double truth = 100.0 + i;
            bench += nlohmann::json{{"id", id}, {"dataset", names[d]}, {"description", "p"}, {"ground_truth", truth}}.dump() + "\n";
            double answer = i < correct[d] ? truth : truth + 1;
            subs += nlohmann::json{{"id", id}, {"answer", answer}}.dump() + "\n";
        }
    }
    testsupport::write_text(dir / "bench.jsonl", bench);
    testsupport::write_text(dir / "subs.jsonl", subs);
}

}  // namespace

TEST_CASE("solve command") {
    auto r = cli({"solve", "--model", model("salmon_eggs")});
    CHECK(r.code == kExitOk);
    CHECK(r.out == "OBJECTIVE 460\n");
    auto relax = cli({"solve", "--model", model("salmon_eggs"), "--relaxation"});
    CHECK(std::fabs(std::stod(relax.out.substr(10)) - 5600.0 / 13.0) <= 1e-9);
    auto inf = cli({"solve", "--model", model("infeasible")});
    CHECK(inf.code == kExitNoOptimum);
    CHECK(inf.out == "INFEASIBLE\n");
    CHECK(cli({"solve", "--model", "/no/such/file.optir"}).code == kExitInput);
    CHECK(cli({"solve"}).code == kExitUsage);
}

TEST_CASE("usage errors") {
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"frobnicate"}).code == kExitUsage);
    CHECK(cli({"--help"}).code == kExitOk);
    TempDir dir;
    auto r = cli({"generate", "--seeds", data_path("seeds.jsonl").string(), "--out",
                  (dir / "c.jsonl").string(), "--iterations", "1"});
    CHECK(r.code == kExitUsage);
    CHECK(contains(r.err, "backend"));
}

TEST_CASE("validate command") {
    TempDir dir;
    auto ok = cli({"validate", "--solution", model("resource_bigm")});
    CHECK(ok.code == kExitOk);
    CHECK(contains(ok.out, "PASS program"));
    auto bad = cli({"validate", "--solution", model("resource_one_sided")});
    CHECK(bad.code == kExitCheckFailed);
    CHECK(contains(bad.out, "FAIL constraints"));
    CHECK(contains(bad.out, "enforces only one side"));

    testsupport::write_text(dir / "sol.md", "Model.\n\n```optir\nvar s integer\nvar e integer\nmin 80 s + 20 e\n"
                                            "st calories: 300 s + 200 e >= 2000\nst protein: 15 s + 8 e >= 90\n"
                                            "st egg_share: 3 e - 2 s <= 0\n```\nANSWER: 430.7692307692307\n");
    auto mismatch = cli({"validate", "--solution", (dir / "sol.md").string()});
    CHECK(mismatch.code == kExitCheckFailed);
    CHECK(contains(mismatch.out, "answer mismatch"));
}

TEST_CASE("generate runs the demo campaign and resumes") {
    TempDir dir;
    auto out = (dir / "corpus.jsonl").string();
    const std::vector<std::string> base{"generate", "--seeds", data_path("seeds.jsonl").string(),
                                        "--out", out, "--iterations", "5", "--rng-seed", "7",
                                        "--backend", "scripted:" + data_path("fixtures/demo_campaign.jsonl").string()};
    auto r = cli(base);
    REQUIRE(r.code == kExitOk);
    CHECK(contains(r.out, "survived 3"));
    CHECK(contains(r.out, "discarded 2"));

    auto report = nlohmann::json::parse(testsupport::read_text(out + ".report.json"));
    CHECK(report["survived"] == 3);
    CHECK(report["discarded"] == 2);
    CHECK(report["ledger"]["description"]["queries"] == 14);
    CHECK(report["ledger"]["solution"]["queries"] == 15);

    auto stats = cli({"stats", "--corpus", out, "--json"});
    CHECK(stats.code == kExitOk);
    auto sj = nlohmann::json::parse(stats.out);
    CHECK(sj["records"] == 9);
    CHECK(sj["active"] == 7);

    auto exported = cli({"export", "--corpus", out, "--out", (dir / "train.jsonl").string()});
    CHECK(contains(exported.out, "exported 7 examples"));

    // A missing fixture is a backend configuration error; an empty one discards the iteration.
    auto again = cli({"generate", "--seeds", data_path("seeds.jsonl").string(), "--out", out,
                      "--iterations", "1", "--backend",
                      "scripted:" + (dir / "empty.jsonl").string()});
    CHECK(again.code == kExitUsage);
    testsupport::write_text(dir / "empty.jsonl", "");
    again = cli({"generate", "--seeds", data_path("seeds.jsonl").string(), "--out", out,
                 "--iterations", "1", "--backend", "scripted:" + (dir / "empty.jsonl").string()});
    CHECK(again.code == kExitOk);
    CHECK(CorpusStore::load(out).size() == 10);

    CHECK(cli({"generate", "--seeds", "/no/seeds.jsonl", "--out", (dir / "x.jsonl").string(),
               "--iterations", "1", "--backend", "scripted:" + (dir / "empty.jsonl").string()})
              .code == kExitInput);
}

TEST_CASE("evaluate reproduces pooled and mean accuracies") {
    TempDir dir;
    write_four_datasets(dir, {207, 556, 130, 28});
    auto r = cli({"evaluate", "--bench", (dir / "bench.jsonl").string(), "--solutions",
                  (dir / "subs.jsonl").string(), "--json", (dir / "eval.json").string()});
    REQUIRE(r.code == kExitOk);
    CHECK(contains(r.out, "micro avg: 77.72%"));
    CHECK(contains(r.out, "macro avg: 66.94%"));
    auto j = nlohmann::json::parse(testsupport::read_text(dir / "eval.json"));
    CHECK(j["instances"].size() == 1185);

    // Every wrong answer is off by one; a loose enough tolerance accepts them all.
    auto loose = cli({"evaluate", "--bench", (dir / "bench.jsonl").string(), "--solutions",
                      (dir / "subs.jsonl").string(), "--tol", "0.02"});
    CHECK(contains(loose.out, "micro avg: 100.00%"));
    CHECK(cli({"evaluate", "--bench", (dir / "bench.jsonl").string(), "--solutions",
               (dir / "subs.jsonl").string(), "--tol", "-1"})
              .code == kExitUsage);

    testsupport::write_text(dir / "none.jsonl", "");
    auto none = cli({"evaluate", "--bench", (dir / "bench.jsonl").string(), "--solutions",
                     (dir / "none.jsonl").string()});
    CHECK(none.code == kExitOk);
    CHECK(contains(none.out, "micro avg: 0.00%"));
}
