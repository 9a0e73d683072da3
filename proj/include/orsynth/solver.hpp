#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "orsynth/model_ir.hpp"

namespace orsynth {

using Assignment = std::map<std::string, double, std::less<>>;

enum class SolveStatus { Optimal, Infeasible, Unbounded, NodeLimit };

std::string_view to_string(SolveStatus status);

struct SolverConfig {
    double feasibility_tol = 1e-7;
    double integer_tol = 1e-6;
    long node_limit = 100000;

    // Throws std::invalid_argument unless every field is strictly positive.
    void validate() const;
};

struct SolveResult {
    SolveStatus status = SolveStatus::Infeasible;
    std::optional<double> objective;  // present iff optimal
    Assignment assignment;            // non-empty iff optimal
    long nodes = 0;
    std::vector<std::string> diagnostics;

    bool optimal() const { return status == SolveStatus::Optimal; }
};

// Integer bounds beyond this magnitude are clamped before branch-and-bound.
inline constexpr double kIntegerBoundCap = 1e9;

// Continuous relaxation (integrality dropped). Objectives are scalarized by
// weight; the reported objective is in the sense of the first objective.
SolveResult solve_relaxation(const OptModel& model, const SolverConfig& cfg = {});

// Exact MILP solve: best-bound branch-and-bound over the LP relaxation,
// branching on the most fractional variable (ties by name).
SolveResult solve(const OptModel& model, const SolverConfig& cfg = {});

class MissingVariable : public std::invalid_argument {
public:
    explicit MissingVariable(const std::string& name)
        : std::invalid_argument("assignment is missing variable " + name), name_(name) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

struct AssignmentCheck {
    bool feasible = false;
    double objective = 0.0;
    std::vector<std::string> violations;
};

// Weighted sum of objectives in the sense of the first one:
// sum_k w_k * (+1 if sense_k matches the first sense else -1) * f_k(x).
double scalarized_objective(const OptModel& model, const Assignment& assignment);

AssignmentCheck evaluate_assignment(const OptModel& model, const Assignment& assignment,
                                    const SolverConfig& cfg = {});

}  // namespace orsynth
