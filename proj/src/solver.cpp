#include "orsynth/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <queue>

#include "orsynth/simplex.hpp"

namespace orsynth {

std::string_view to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::NodeLimit: return "node_limit";
    }
    return "unknown";
}

void SolverConfig::validate() const {
    if (!(feasibility_tol > 0) || !(integer_tol > 0) || node_limit <= 0)
        throw std::invalid_argument("solver tolerances and node limit must be strictly positive");
}

namespace {

// Model lowered to dense arrays over the declared variable order.
struct CompiledModel {
    std::vector<std::string> names;
    std::vector<bool> integral;
    std::vector<double> lower, upper;
    Eigen::MatrixXd rows;
    Eigen::VectorXd rhs;
    std::vector<Sense> senses;
    Eigen::VectorXd cost;  // internal minimization cost
    double cost_constant = 0.0;
};

double objective_direction(const OptModel& model, std::size_t k) {
    return model.objectives[k].sense == model.objectives.front().sense ? 1.0 : -1.0;
}

CompiledModel compile(const OptModel& model) {
    CompiledModel cm;
    const auto nv = static_cast<Eigen::Index>(model.variables.size());
    for (const auto& v : model.variables) {
        cm.names.push_back(v.name);
        cm.integral.push_back(v.is_integral());
        cm.lower.push_back(v.lower);
        cm.upper.push_back(v.upper);
    }
    cm.rows = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(model.constraints.size()), nv);
    cm.rhs.resize(static_cast<Eigen::Index>(model.constraints.size()));
    for (std::size_t i = 0; i < model.constraints.size(); ++i) {
        const auto c = normalized(model.constraints[i]);
        for (const auto& t : c.expr.terms)
            cm.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(model.index_of(t.var))) +=
                t.coef;
        cm.rhs(static_cast<Eigen::Index>(i)) = c.rhs;
        cm.senses.push_back(c.sense);
    }
    const double primary = model.objectives.front().sense == ObjSense::Minimize ? 1.0 : -1.0;
    cm.cost = Eigen::VectorXd::Zero(nv);
    for (std::size_t k = 0; k < model.objectives.size(); ++k) {
        const auto& o = model.objectives[k];
        const double scale = primary * o.weight * objective_direction(model, k);
        for (const auto& t : o.expr.terms)
            cm.cost(static_cast<Eigen::Index>(model.index_of(t.var))) += scale * t.coef;
        cm.cost_constant += scale * o.expr.constant;
    }
    return cm;
}

struct LpOutcome {
    LpStatus status = LpStatus::Infeasible;
    Eigen::VectorXd x;
    double value = 0.0;  // internal minimization value, constant included
};

// Solves the LP over box [lo, hi] by shifting/reflecting/splitting variables
// into the nonnegative orthant.
LpOutcome solve_box(const CompiledModel& cm, const std::vector<double>& lo,
                    const std::vector<double>& hi, const SolverConfig& cfg) {
    const auto nv = static_cast<Eigen::Index>(cm.names.size());
    LpOutcome out;
    Eigen::VectorXd offset = Eigen::VectorXd::Zero(nv);
    std::vector<std::pair<Eigen::Index, double>> col_map;  // (variable, sign)
    std::vector<std::pair<Eigen::Index, double>> bound_rows;  // (column, span)
    for (Eigen::Index k = 0; k < nv; ++k) {
        double l = lo[static_cast<std::size_t>(k)], u = hi[static_cast<std::size_t>(k)];
        if (l > u + cfg.feasibility_tol) return out;
        if (std::isfinite(l) && std::isfinite(u) && u - l <= 0.0) {
            offset(k) = l;
        } else if (std::isfinite(l)) {
            offset(k) = l;
            col_map.emplace_back(k, 1.0);
            if (std::isfinite(u))
                bound_rows.emplace_back(static_cast<Eigen::Index>(col_map.size()) - 1, u - l);
        } else if (std::isfinite(u)) {
            offset(k) = u;
            col_map.emplace_back(k, -1.0);
        } else {
            col_map.emplace_back(k, 1.0);
            col_map.emplace_back(k, -1.0);
        }
    }
    const auto ncols = static_cast<Eigen::Index>(col_map.size());
    Eigen::MatrixXd mapping = Eigen::MatrixXd::Zero(nv, ncols);
    for (Eigen::Index j = 0; j < ncols; ++j) mapping(col_map[j].first, j) = col_map[j].second;

    const Eigen::Index m = cm.rows.rows();
    const auto nb = static_cast<Eigen::Index>(bound_rows.size());
    StandardFormLp<double> lp;
    lp.A = Eigen::MatrixXd::Zero(m + nb, ncols);
    lp.b.resize(m + nb);
    lp.A.topRows(m) = cm.rows * mapping;
    lp.b.head(m) = cm.rhs - cm.rows * offset;
    lp.senses = cm.senses;
    for (Eigen::Index r = 0; r < nb; ++r) {
        lp.A(m + r, bound_rows[r].first) = 1.0;
        lp.b(m + r) = bound_rows[r].second;
        lp.senses.push_back(Sense::Le);
    }
    lp.c = mapping.transpose() * cm.cost;

    DenseSimplex<double> simplex({1e-9, cfg.feasibility_tol});
    auto sol = simplex.solve(lp);
    out.status = sol.status;
    if (sol.status != LpStatus::Optimal) return out;
    out.x = offset + mapping * sol.x;
    for (Eigen::Index k = 0; k < nv; ++k)
        out.x(k) = std::clamp(out.x(k), lo[static_cast<std::size_t>(k)], hi[static_cast<std::size_t>(k)]);
    out.value = cm.cost.dot(out.x) + cm.cost_constant;
    return out;
}

Assignment to_assignment(const CompiledModel& cm, const Eigen::VectorXd& x) {
    Assignment a;
    for (std::size_t k = 0; k < cm.names.size(); ++k) a[cm.names[k]] = x(static_cast<Eigen::Index>(k));
    return a;
}

SolveResult finish(const OptModel& model, const CompiledModel& cm, const Eigen::VectorXd& x) {
    SolveResult r;
    r.status = SolveStatus::Optimal;
    r.assignment = to_assignment(cm, x);
    r.objective = scalarized_objective(model, r.assignment);
    return r;
}

void require_solvable(const OptModel& model, const SolverConfig& cfg) {
    cfg.validate();
    auto violations = structural_violations(model);
    if (!violations.empty()) throw SemanticError(std::move(violations));
}

}  // namespace

SolveResult solve_relaxation(const OptModel& model, const SolverConfig& cfg) {
    require_solvable(model, cfg);
    const auto cm = compile(model);
    auto lp = solve_box(cm, cm.lower, cm.upper, cfg);
    SolveResult r;
    r.nodes = 1;
    if (lp.status == LpStatus::Infeasible) {
        r.status = SolveStatus::Infeasible;
        return r;
    }
    if (lp.status == LpStatus::Unbounded) {
        r.status = SolveStatus::Unbounded;
        return r;
    }
    r = finish(model, cm, lp.x);
    r.nodes = 1;
    return r;
}

SolveResult solve(const OptModel& model, const SolverConfig& cfg) {
    require_solvable(model, cfg);
    const auto cm = compile(model);
    const std::size_t nv = cm.names.size();
    SolveResult result;

    std::vector<double> lo = cm.lower, hi = cm.upper;
    bool any_integral = false;
    for (std::size_t k = 0; k < nv; ++k) {
        if (!cm.integral[k]) continue;
        any_integral = true;
        if (lo[k] < -kIntegerBoundCap || hi[k] > kIntegerBoundCap) {
            result.diagnostics.push_back("integer variable " + cm.names[k] +
                                         " has bounds beyond 1e9; capped at +/-1e9");
            lo[k] = std::max(lo[k], -kIntegerBoundCap);
            hi[k] = std::min(hi[k], kIntegerBoundCap);
        }
        lo[k] = std::ceil(lo[k] - cfg.integer_tol);
        hi[k] = std::floor(hi[k] + cfg.integer_tol);
    }

    struct Node {
        std::vector<double> lo, hi;
        double bound;
        long id;
    };
    struct Worse {
        bool operator()(const Node& a, const Node& b) const {
            if (a.bound != b.bound) return a.bound > b.bound;
            return a.id > b.id;
        }
    };
    std::priority_queue<Node, std::vector<Node>, Worse> open;
    long next_id = 0;
    open.push(Node{lo, hi, -kInf, next_id++});

    std::optional<double> incumbent_value;
    Eigen::VectorXd incumbent;
    auto prune_threshold = [&]() {
        return *incumbent_value - 1e-9 * std::max(1.0, std::fabs(*incumbent_value));
    };

    while (!open.empty()) {
        if (result.nodes >= cfg.node_limit) {
            result.status = SolveStatus::NodeLimit;
            result.objective.reset();
            result.assignment.clear();
            return result;
        }
        Node node = open.top();
        open.pop();
        if (incumbent_value && node.bound >= prune_threshold()) continue;

        ++result.nodes;
        auto lp = solve_box(cm, node.lo, node.hi, cfg);
        if (lp.status == LpStatus::Infeasible) continue;
        if (lp.status == LpStatus::Unbounded) {
            // Integer boxes are finite, so an unbounded node means unbounded continuous rays.
            result.status = SolveStatus::Unbounded;
            return result;
        }
        if (incumbent_value && lp.value >= prune_threshold()) continue;

        std::size_t branch = nv;
        double best_frac = 0.0;
        for (std::size_t k = 0; k < nv; ++k) {
            if (!cm.integral[k]) continue;
            double v = lp.x(static_cast<Eigen::Index>(k));
            double frac = std::min(v - std::floor(v), std::ceil(v) - v);
            if (frac <= cfg.integer_tol) continue;
            if (branch == nv || frac > best_frac + 1e-12 ||
                (std::fabs(frac - best_frac) <= 1e-12 && cm.names[k] < cm.names[branch])) {
                branch = k;
                best_frac = frac;
            }
        }

        if (branch == nv) {
            Eigen::VectorXd x = lp.x;
            bool has_continuous = false;
            std::vector<double> fixed_lo = node.lo, fixed_hi = node.hi;
            for (std::size_t k = 0; k < nv; ++k) {
                if (!cm.integral[k]) {
                    has_continuous = true;
                    continue;
                }
                double r = std::round(x(static_cast<Eigen::Index>(k)));
                x(static_cast<Eigen::Index>(k)) = r;
                fixed_lo[k] = fixed_hi[k] = r;
            }
            double value = cm.cost.dot(x) + cm.cost_constant;
            if (has_continuous && any_integral) {
                auto refit = solve_box(cm, fixed_lo, fixed_hi, cfg);
                if (refit.status == LpStatus::Optimal) {
                    x = refit.x;
                    value = refit.value;
                }
            }
            if (!incumbent_value || value < *incumbent_value) {
                incumbent_value = value;
                incumbent = x;
            }
            continue;
        }

        double v = lp.x(static_cast<Eigen::Index>(branch));
        Node down{node.lo, node.hi, lp.value, next_id++};
        down.hi[branch] = std::floor(v);
        Node up{node.lo, node.hi, lp.value, next_id++};
        up.lo[branch] = std::ceil(v);
        open.push(std::move(down));
        open.push(std::move(up));
    }

    if (!incumbent_value) {
        result.status = SolveStatus::Infeasible;
        return result;
    }
    auto nodes = result.nodes;
    auto diagnostics = std::move(result.diagnostics);
    result = finish(model, cm, incumbent);
    result.nodes = nodes;
    result.diagnostics = std::move(diagnostics);
    return result;
}

double scalarized_objective(const OptModel& model, const Assignment& assignment) {
    double total = 0.0;
    for (std::size_t k = 0; k < model.objectives.size(); ++k) {
        const auto& o = model.objectives[k];
        double f = o.expr.constant;
        for (const auto& t : o.expr.terms) {
            auto it = assignment.find(t.var);
            if (it == assignment.end()) throw MissingVariable(t.var);
            f += t.coef * it->second;
        }
        total += o.weight * objective_direction(model, k) * f;
    }
    return total;
}

AssignmentCheck evaluate_assignment(const OptModel& model, const Assignment& assignment,
                                    const SolverConfig& cfg) {
    for (const auto& v : model.variables)
        if (!assignment.count(v.name)) throw MissingVariable(v.name);

    AssignmentCheck out;
    auto tol = [&](double ref) { return cfg.feasibility_tol * std::max(1.0, std::fabs(ref)); };
    for (const auto& v : model.variables) {
        double x = assignment.find(v.name)->second;
        if (!std::isfinite(x)) {
            out.violations.push_back(v.name + " is not finite");
            continue;
        }
        if (x < v.lower - tol(v.lower))
            out.violations.push_back(v.name + " = " + format_number(x) + " is below its lower bound " +
                                     format_number(v.lower));
        if (x > v.upper + tol(v.upper))
            out.violations.push_back(v.name + " = " + format_number(x) + " is above its upper bound " +
                                     format_number(v.upper));
        if (v.is_integral() && std::fabs(x - std::round(x)) > cfg.integer_tol)
            out.violations.push_back(v.name + " = " + format_number(x) + " is not integral");
    }
    for (const auto& raw : model.constraints) {
        const auto c = normalized(raw);
        double lhs = 0.0;
        for (const auto& t : c.expr.terms) lhs += t.coef * assignment.find(t.var)->second;
        bool ok = true;
        switch (c.sense) {
            case Sense::Le: ok = lhs <= c.rhs + tol(c.rhs); break;
            case Sense::Ge: ok = lhs >= c.rhs - tol(c.rhs); break;
            case Sense::Eq: ok = std::fabs(lhs - c.rhs) <= tol(c.rhs); break;
        }
        if (!ok)
            out.violations.push_back("constraint " + c.name + " violated: " + format_number(lhs) + " " +
                                     std::string(to_string(c.sense)) + " " + format_number(c.rhs));
    }
    out.feasible = out.violations.empty();
    out.objective = scalarized_objective(model, assignment);
    return out;
}

}  // namespace orsynth
