#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "orsynth/check_report.hpp"

namespace orsynth {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { Continuous, Integer, Binary };

struct VariableDecl {
    std::string name;
    VarKind kind = VarKind::Continuous;
    double lower = 0.0;
    double upper = kInf;

    bool is_integral() const { return kind != VarKind::Continuous; }
    bool operator==(const VariableDecl&) const = default;
};

struct Term {
    double coef = 0.0;
    std::string var;
    bool operator==(const Term&) const = default;
};

struct LinearExpression {
    std::vector<Term> terms;
    double constant = 0.0;
    bool operator==(const LinearExpression&) const = default;
};

enum class Sense { Le, Ge, Eq };

struct Constraint {
    std::string name;
    LinearExpression expr;
    Sense sense = Sense::Le;
    double rhs = 0.0;
    bool operator==(const Constraint&) const = default;
};

enum class ObjSense { Minimize, Maximize };

struct Objective {
    ObjSense sense = ObjSense::Minimize;
    LinearExpression expr;
    double weight = 1.0;
    bool operator==(const Objective&) const = default;
};

// |xi - xj| >= a, expected to be linearized with a binary switch and a big-M pair.
struct AbsGe {
    std::string xi;
    std::string xj;
    double a = 0.0;
    bool operator==(const AbsGe&) const = default;
};

// At most k of the linked variables may be active; selectors[i] gates linked[i].
struct KWay {
    long k = 0;
    std::vector<std::string> selectors;
    std::vector<std::string> linked;
    bool operator==(const KWay&) const = default;
};

using Requirement = std::variant<AbsGe, KWay>;

struct OptModel {
    std::vector<VariableDecl> variables;
    std::vector<Constraint> constraints;
    std::vector<Objective> objectives;
    std::vector<Requirement> requirements;

    // Index of the variable named `name`, or npos.
    std::size_t index_of(std::string_view name) const;
    const VariableDecl* find(std::string_view name) const;

    bool operator==(const OptModel&) const = default;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& message);
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }
    const std::string& message() const { return message_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string message_;
};

class SemanticError : public std::runtime_error {
public:
    explicit SemanticError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

// Sums duplicate terms, drops zero coefficients and sorts terms by variable name.
LinearExpression normalized(const LinearExpression& expr);
// Moves the expression constant to the right-hand side and normalizes the terms.
Constraint normalized(const Constraint& c);

// Parses `.optir` model source. Throws ParseError on syntax faults and
// SemanticError when the parsed model breaks a structural invariant.
OptModel parse_model(std::string_view text);

// Canonical `.optir` rendering: variables, objectives, constraints, requirements.
std::string render_model(const OptModel& model);

// Lists every structural violation (never just the first).
std::vector<std::string> structural_violations(const OptModel& model);
CheckReport validate_structure(const OptModel& model);

// Shortest round-trippable decimal form; "inf"/"-inf" for infinities.
std::string format_number(double value);

std::string_view to_string(VarKind kind);
std::string_view to_string(Sense sense);

}  // namespace orsynth
