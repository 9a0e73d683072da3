#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "orsynth/check_report.hpp"
#include "orsynth/evaluation.hpp"
#include "orsynth/llm_backend.hpp"
#include "orsynth/model_ir.hpp"
#include "orsynth/solver.hpp"
#include "orsynth/templates.hpp"

namespace orsynth {

// A generated solution: prose formulation plus the model in a ```optir fence,
// optionally followed by an "ANSWER: <number>" line.
struct Solution {
    std::string narrative;
    std::string model_source;  // fence contents, verbatim
    OptModel model;
    std::optional<double> declared_answer;
};

class SolutionFormatError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Throws SolutionFormatError when no optir block is present, and ParseError or
// SemanticError when the block does not parse.
Solution parse_solution_text(std::string_view text);

// Checker reply protocol: pass iff the trimmed reply begins with
// "There are no errors found"; otherwise fail with the text after the first
// "ERROR:", or with the raw reply when there is none.
CheckReport parse_checker_reply(Stage stage, std::string_view reply);

// Optional LLM side of the description and constraint checkers.
struct LlmChecker {
    Backend& backend;
    BudgetLedger& ledger;
    const TemplateSet& templates;
};

// Fails on an empty description or one without any digit. The LLM check only
// runs when the deterministic check passed.
CheckReport check_description(std::string_view description, const LlmChecker* llm = nullptr);

// Structural violations, variables unused by every constraint and objective, and
// requirements that reference variables of the wrong kind.
CheckReport check_variables(const Solution& solution);
CheckReport check_variables(const OptModel& model);

CheckReport check_bigm_requirement(const OptModel& model, const AbsGe& req);
CheckReport check_kway_requirement(const OptModel& model, const KWay& req);

// Every requirement check, then (if given and the deterministic part passed)
// the LLM constraint checker on the full solution text.
CheckReport check_constraints(const Solution& solution, std::string_view problem = {},
                              std::string_view solution_text = {}, const LlmChecker* llm = nullptr);

enum class ProgramMode { Builtin, Subprocess };

struct ProgramCheckConfig {
    ProgramMode mode = ProgramMode::Builtin;
    // Subprocess mode: argv prefix; the model file path is appended.
    std::vector<std::string> command;
    double timeout_seconds = 30.0;
    SolverConfig solver;
    ComparatorConfig comparator;
};

class ProgramTimeout : public std::runtime_error {
    using std::runtime_error::runtime_error;
};
class NonzeroExit : public std::runtime_error {
public:
    NonzeroExit(int code, std::string output);
    int code() const { return code_; }
    const std::string& output() const { return output_; }

private:
    int code_;
    std::string output_;
};

struct ProcessResult {
    int exit_code = 0;
    std::string output;  // stdout and stderr interleaved
};

// Runs argv with a wall-clock limit. Throws ProgramTimeout when it expires and
// std::runtime_error when the process cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, double timeout_seconds);

// Reads the objective from a final "OBJECTIVE <number>" line.
std::optional<double> parse_objective_line(std::string_view output);

struct ProgramCheck {
    CheckReport report;
    std::optional<double> objective;
};

ProgramCheck check_program(const Solution& solution, const ProgramCheckConfig& cfg = {});

// Outcome of one full pass over a stage's checkers for one candidate.
struct StageOutcome {
    std::vector<CheckReport> reports;
    std::optional<double> objective;  // solution stage only

    bool passed() const;
    // Error text of the first failing report.
    std::string error_text() const;
};

StageOutcome run_description_checks(std::string_view description, const LlmChecker* llm = nullptr);
// Parse, variables, constraints, program; stops at the first failing stage.
StageOutcome run_solution_checks(std::string_view problem, std::string_view solution_text,
                                 const ProgramCheckConfig& program, const LlmChecker* llm = nullptr);

std::string build_description_regeneration_prompt(const TemplateSet& templates,
                                                  std::string_view problem, std::string_view error);
std::string build_solution_regeneration_prompt(const TemplateSet& templates,
                                               std::string_view problem, std::string_view solution,
                                               std::string_view error);

struct RegenerationResult {
    bool passed = false;
    int attempts = 0;  // checked candidates plus failed regeneration calls
    std::string candidate;  // last candidate that was checked
    std::vector<CheckReport> reports;  // every report, in order
    std::optional<double> objective;
    long backend_errors = 0;
};

using StageCheck = std::function<StageOutcome(const std::string& candidate)>;
using RegenerationPrompt =
    std::function<std::string(const std::string& candidate, const std::string& error)>;

// Checks `initial`; on failure asks the backend for a corrected candidate built
// from the error text, up to `limit` times. A backend error during regeneration
// counts as a failed attempt.
RegenerationResult validate_with_regeneration(const std::string& initial, const StageCheck& check,
                                              const RegenerationPrompt& regenerate,
                                              Backend& backend, BudgetLedger& ledger, Phase phase,
                                              int limit);

}  // namespace orsynth
