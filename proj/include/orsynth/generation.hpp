#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "orsynth/corpus.hpp"
#include "orsynth/evaluation.hpp"
#include "orsynth/llm_backend.hpp"
#include "orsynth/operators.hpp"
#include "orsynth/templates.hpp"
#include "orsynth/validation.hpp"

namespace orsynth {

// Target domains offered to the domain transformation operator.
extern const std::array<std::string_view, 16> kReferenceDomains;

class MissingShotFixture : public std::runtime_error {
    using std::runtime_error::runtime_error;
};
class PreconditionError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct PromptContext {
    EvolutionOperator op = EvolutionOperator::ConstraintModification;
    std::vector<SeedExample> seeds;  // one, or two for combination
    std::vector<std::string> shots;  // exactly two
    std::vector<std::string> domain_list{kReferenceDomains.begin(), kReferenceDomains.end()};
};

// Context with the operator's shots taken from `templates`.
PromptContext make_context(EvolutionOperator op, std::vector<SeedExample> seeds,
                           const TemplateSet& templates = TemplateSet::builtin());

std::string build_evolution_prompt(const PromptContext& ctx,
                                   const TemplateSet& templates = TemplateSet::builtin());

// Returns the completion verbatim; recorded under the description phase.
std::string evolve(Backend& backend, const PromptContext& ctx, BudgetLedger& ledger,
                   const TemplateSet& templates = TemplateSet::builtin());

// "constraint modification" etc.
std::string operator_phrase(EvolutionOperator op);

std::string build_solution_prompt(std::string_view problem, const std::vector<SeedExample>& seeds,
                                  EvolutionOperator op,
                                  const TemplateSet& templates = TemplateSet::builtin());

// Returns the completion verbatim; recorded under the solution phase.
std::string generate_solution(Backend& backend, std::string_view problem,
                              const std::vector<SeedExample>& seeds, EvolutionOperator op,
                              BudgetLedger& ledger,
                              const TemplateSet& templates = TemplateSet::builtin());

using OperatorWeights = std::array<double, 5>;  // in kAllOperators order

EvolutionOperator pick_operator(const OperatorWeights& weights, std::mt19937_64& rng);

struct CampaignConfig {
    long iterations = 1;
    OperatorWeights operator_weights{1, 1, 1, 1, 1};
    int desc_retry_limit = 3;
    int sol_retry_limit = 3;
    std::uint64_t rng_seed = 0;
    int workers = 1;
    bool llm_checks = true;  // run the LLM side of the description and constraint checkers
    ProgramCheckConfig program;

    // Throws std::invalid_argument.
    void validate() const;
};

struct CampaignReport {
    long iterations = 0;
    long survived = 0;
    long discarded = 0;
    long backend_errors = 0;
    std::map<std::string, SurvivalCount> per_operator;
    Usage description_usage;
    Usage solution_usage;
    std::vector<std::string> record_ids;  // in append order

    double discard_rate() const {
        return iterations ? static_cast<double>(discarded) / static_cast<double>(iterations) : 0.0;
    }
    nlohmann::ordered_json to_json() const;
};

// Runs cfg.iterations evolve/check/regenerate iterations, appending one record
// (active or discarded) per iteration. Store IO errors abort the campaign.
CampaignReport run_campaign(CorpusStore& store, Backend& backend, const CampaignConfig& cfg,
                            const TemplateSet& templates = TemplateSet::builtin());

}  // namespace orsynth
