#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace orsynth {

// Evolution operators. The first three deepen a problem, the last two broaden it.
enum class EvolutionOperator {
    ConstraintModification,
    ObjectiveAlteration,
    ParameterAdjustment,
    DomainTransformation,
    Combination,
};

inline constexpr std::array<EvolutionOperator, 5> kAllOperators = {
    EvolutionOperator::ConstraintModification, EvolutionOperator::ObjectiveAlteration,
    EvolutionOperator::ParameterAdjustment,    EvolutionOperator::DomainTransformation,
    EvolutionOperator::Combination,
};

constexpr std::string_view to_string(EvolutionOperator op) {
    switch (op) {
        case EvolutionOperator::ConstraintModification: return "constraint_modification";
        case EvolutionOperator::ObjectiveAlteration: return "objective_alteration";
        case EvolutionOperator::ParameterAdjustment: return "parameter_adjustment";
        case EvolutionOperator::DomainTransformation: return "domain_transformation";
        case EvolutionOperator::Combination: return "combination";
    }
    return "unknown";
}

constexpr std::optional<EvolutionOperator> operator_from_string(std::string_view name) {
    for (auto op : kAllOperators)
        if (to_string(op) == name) return op;
    return std::nullopt;
}

constexpr std::size_t seed_arity(EvolutionOperator op) {
    return op == EvolutionOperator::Combination ? 2 : 1;
}

// Lineage operator label for records that were not generated.
inline constexpr std::string_view kSeedOperator = "seed";

}  // namespace orsynth
