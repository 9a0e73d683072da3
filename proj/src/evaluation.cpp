#include "orsynth/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "orsynth/model_ir.hpp"
#include "orsynth/operators.hpp"

namespace orsynth {

using nlohmann::json;

void ComparatorConfig::validate() const {
    if (!(tol > 0) || !(epsilon > 0))
        throw std::invalid_argument("comparator tol and epsilon must be strictly positive");
}

bool answers_equivalent(double produced, double ground_truth, const ComparatorConfig& cfg) {
    if (!std::isfinite(produced) || !std::isfinite(ground_truth)) return false;
    return std::fabs(produced - ground_truth) <= cfg.tol * std::fabs(ground_truth + cfg.epsilon);
}

namespace {

template <typename Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            fn(json::parse(line));
        } catch (const std::exception& e) {
            throw InvalidRecord(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

}  // namespace

std::vector<BenchmarkInstance> load_benchmark(const std::filesystem::path& path) {
    std::vector<BenchmarkInstance> out;
    for_each_json_line(path, [&](const json& j) {
        BenchmarkInstance b;
        b.id = j.at("id").get<std::string>();
        b.dataset = j.at("dataset").get<std::string>();
        b.description = j.value("description", std::string{});
        b.ground_truth = j.at("ground_truth").get<double>();
        if (!std::isfinite(b.ground_truth)) throw std::invalid_argument("ground_truth is not finite");
        out.push_back(std::move(b));
    });
    return out;
}

std::map<std::string, Submission> load_submissions(const std::filesystem::path& path) {
    std::map<std::string, Submission> out;
    for_each_json_line(path, [&](const json& j) {
        std::string id = j.at("id").get<std::string>();
        Submission s;
        if (j.contains("model"))
            s.value = j.at("model").get<std::string>();
        else
            s.value = j.at("answer").get<double>();
        out.emplace(std::move(id), std::move(s));
    });
    return out;
}

DatasetEvaluation evaluate_dataset(const std::vector<BenchmarkInstance>& instances,
                                   const std::map<std::string, Submission>& submissions,
                                   const ComparatorConfig& cmp, const SolverConfig& solver) {
    cmp.validate();
    DatasetEvaluation ev;
    std::map<std::string, std::size_t> slot;
    std::map<std::string, bool> seen;
    for (const auto& inst : instances) {
        auto [it, inserted] = slot.emplace(inst.dataset, ev.tallies.size());
        if (inserted) ev.tallies.push_back({inst.dataset, 0, 0});
        DatasetTally& tally = ev.tallies[it->second];
        ++tally.total;

        InstanceOutcome out{inst.id, inst.dataset, false, std::nullopt, {}};
        auto sub = submissions.find(inst.id);
        if (sub == submissions.end()) {
            out.reason = "missing solution";
        } else {
            seen[inst.id] = true;
            if (const double* answer = std::get_if<double>(&sub->second.value)) {
                out.produced = *answer;
            } else {
                try {
                    auto result = solve(parse_model(std::get<std::string>(sub->second.value)), solver);
                    if (result.optimal())
                        out.produced = *result.objective;
                    else
                        out.reason = std::string(to_string(result.status));
                } catch (const std::exception& e) {
                    out.reason = std::string("model error: ") + e.what();
                }
            }
            if (out.produced) {
                out.correct = answers_equivalent(*out.produced, inst.ground_truth, cmp);
                if (!out.correct)
                    out.reason = "answer " + format_number(*out.produced) + " differs from " +
                                 format_number(inst.ground_truth);
            }
        }
        if (out.correct) ++tally.correct;
        ev.outcomes.push_back(std::move(out));
    }
    for (const auto& [id, _] : submissions)
        if (!seen.count(id)) ev.unmatched_submissions.push_back(id);
    return ev;
}

AggregateReport aggregate(const std::vector<DatasetTally>& tallies,
                          const std::map<std::string, SurvivalCount>& survival) {
    if (tallies.empty()) throw std::invalid_argument("aggregate needs at least one dataset");
    AggregateReport r;
    r.per_dataset = tallies;
    r.survival = survival;
    long correct = 0, total = 0;
    double acc_sum = 0.0;
    for (const auto& t : tallies) {
        correct += t.correct;
        total += t.total;
        acc_sum += t.accuracy();
    }
    r.micro = total ? static_cast<double>(correct) / total : 0.0;
    r.macro = acc_sum / static_cast<double>(tallies.size());
    return r;
}

std::map<std::string, SurvivalCount> survival_counts(const std::vector<SeedExample>& records) {
    std::map<std::string, SurvivalCount> out;
    for (const auto& r : records) {
        if (r.lineage.op == kSeedOperator || r.supersedes) continue;
        auto& s = out[r.lineage.op];
        ++s.attempted;
        if (r.status == RecordStatus::Active) ++s.survived;
    }
    return out;
}

double round_half_up(double value, int decimals) {
    double scale = std::pow(10.0, decimals);
    // Nudge by a few ulps so values like 66.935 that are stored just below the tie still round up.
    double scaled = value * scale;
    return std::floor(scaled + 0.5 + 1e-9) / scale;
}

std::string format_percent(double accuracy) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", round_half_up(accuracy * 100.0, 2));
    return buf;
}

nlohmann::ordered_json AggregateReport::to_json() const {
    nlohmann::ordered_json j;
    nlohmann::ordered_json datasets = nlohmann::ordered_json::array();
    for (const auto& t : per_dataset)
        datasets.push_back({{"name", t.name},
                            {"correct", t.correct},
                            {"total", t.total},
                            {"accuracy", t.accuracy()}});
    j["per_dataset"] = std::move(datasets);
    j["micro"] = micro;
    j["macro"] = macro;
    nlohmann::ordered_json surv = nlohmann::ordered_json::object();
    for (const auto& [op, s] : survival)
        surv[op] = {{"attempted", s.attempted}, {"survived", s.survived}, {"discarded", s.discarded()}};
    j["survival"] = std::move(surv);
    return j;
}

std::string AggregateReport::to_table() const {
    std::ostringstream os;
    std::size_t width = 10;
    for (const auto& t : per_dataset) width = std::max(width, t.name.size());
    os << std::left << std::setw(static_cast<int>(width)) << "dataset" << "  " << std::right
       << std::setw(8) << "correct" << "  " << std::setw(8) << "total" << "  " << std::setw(8)
       << "accuracy" << '\n';
    for (const auto& t : per_dataset)
        os << std::left << std::setw(static_cast<int>(width)) << t.name << "  " << std::right
           << std::setw(8) << t.correct << "  " << std::setw(8) << t.total << "  " << std::setw(7)
           << format_percent(t.accuracy()) << "%\n";
    os << "micro avg: " << format_percent(micro) << "%\n";
    os << "macro avg: " << format_percent(macro) << "%\n";
    if (!survival.empty()) {
        os << "\noperator survival:\n";
        for (const auto& [op, s] : survival)
            os << "  " << std::left << std::setw(26) << op << std::right << " attempted "
               << std::setw(6) << s.attempted << "  survived " << std::setw(6) << s.survived
               << "  discarded " << std::setw(6) << s.discarded() << '\n';
    }
    return os.str();
}

}  // namespace orsynth
