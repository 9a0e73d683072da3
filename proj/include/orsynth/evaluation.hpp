#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "orsynth/corpus.hpp"
#include "orsynth/solver.hpp"

namespace orsynth {

struct ComparatorConfig {
    double tol = 1e-4;
    double epsilon = 1e-6;
    void validate() const;  // both strictly positive
};

// Relative-error equivalence: |o - g| <= tol * |g + epsilon|.
bool answers_equivalent(double produced, double ground_truth, const ComparatorConfig& cfg = {});

struct BenchmarkInstance {
    std::string id;
    std::string dataset;
    std::string description;
    double ground_truth = 0.0;
};

// A submitted solution: model source to be solved, or a declared objective value.
struct Submission {
    std::variant<std::string, double> value;
};

std::vector<BenchmarkInstance> load_benchmark(const std::filesystem::path& path);
// Lines of {id, model} or {id, answer}.
std::map<std::string, Submission> load_submissions(const std::filesystem::path& path);

struct InstanceOutcome {
    std::string id;
    std::string dataset;
    bool correct = false;
    std::optional<double> produced;
    std::string reason;  // why it is incorrect, empty when correct
};

struct DatasetTally {
    std::string name;
    long correct = 0;
    long total = 0;
    double accuracy() const { return total ? static_cast<double>(correct) / total : 0.0; }
};

struct DatasetEvaluation {
    std::vector<DatasetTally> tallies;  // in order of first appearance
    std::vector<InstanceOutcome> outcomes;
    std::vector<std::string> unmatched_submissions;
};

DatasetEvaluation evaluate_dataset(const std::vector<BenchmarkInstance>& instances,
                                   const std::map<std::string, Submission>& submissions,
                                   const ComparatorConfig& cmp = {}, const SolverConfig& solver = {});

struct SurvivalCount {
    long attempted = 0;
    long survived = 0;
    long discarded() const { return attempted - survived; }
    bool operator==(const SurvivalCount&) const = default;
};

struct AggregateReport {
    std::vector<DatasetTally> per_dataset;
    double micro = 0.0;  // pooled accuracy
    double macro = 0.0;  // unweighted mean of dataset accuracies
    std::map<std::string, SurvivalCount> survival;

    nlohmann::ordered_json to_json() const;
    std::string to_table() const;
};

AggregateReport aggregate(const std::vector<DatasetTally>& tallies,
                          const std::map<std::string, SurvivalCount>& survival = {});

// Per-operator attempted/survived counts over the generated (non-seed) records of a corpus.
// Tombstones that retire an earlier record are not counted as attempts.
std::map<std::string, SurvivalCount> survival_counts(const std::vector<SeedExample>& records);

double round_half_up(double value, int decimals);
// Accuracy in [0,1] as a percentage with two decimals, e.g. "77.72".
std::string format_percent(double accuracy);

}  // namespace orsynth
