#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "orsynth/simplex.hpp"
#include "orsynth/solver.hpp"
#include "test_support.hpp"

using namespace orsynth;
using testsupport::data_path;
using testsupport::read_text;

namespace {

OptModel fixture(const std::string& name) {
    return parse_model(read_text(data_path("models/" + name + ".optir")));
}

}  // namespace

TEST_CASE("salmon and eggs") {
    auto m = fixture("salmon_eggs");
    auto r = solve(m);
    REQUIRE(r.optimal());
    CHECK(*r.objective == 460.0);
    CHECK(r.assignment.at("s") == 5.0);
    CHECK(r.assignment.at("e") == 3.0);

    auto relax = solve_relaxation(m);
    REQUIRE(relax.optimal());
    CHECK(*relax.objective == doctest::Approx(5600.0 / 13.0).epsilon(1e-12));
}

TEST_CASE("resource allocation with and without the big-M pair") {
    CHECK(*solve(fixture("resource_bigm")).objective == 800.0);
    CHECK(*solve(fixture("resource_one_sided")).objective == 1000.0);
}

TEST_CASE("four-city tour") {
    CHECK(*solve(fixture("tsp4_mtz")).objective == doctest::Approx(127.0));
    CHECK(*solve(fixture("tsp4_no_subtour")).objective == doctest::Approx(50.0));
}

TEST_CASE("statuses") {
    CHECK(solve(fixture("infeasible")).status == SolveStatus::Infeasible);
    CHECK(*solve_relaxation(parse_model("var x\nmin 1 x\nst c: x >= 3\n")).objective == 3.0);
    CHECK(solve_relaxation(parse_model("var x\nmax x\n")).status == SolveStatus::Unbounded);
    // Unbounded integers are capped at 1e9 with a diagnostic rather than reported unbounded.
    auto capped = solve(parse_model("var x integer\nmax x\n"));
    REQUIRE(capped.optimal());
    CHECK(*capped.objective == kIntegerBoundCap);
    CHECK_FALSE(capped.diagnostics.empty());

    auto r = solve(parse_model("var x integer >= -inf\nvar y\nmin y\nst c: y - x >= 0\nst d: x >= 2.5\n"));
    REQUIRE(r.optimal());
    CHECK(*r.objective == 3.0);
    CHECK_FALSE(r.diagnostics.empty());  // integer bound capped
}

TEST_CASE("node limit") {
    SolverConfig cfg;
    cfg.node_limit = 1;
    auto r = solve(fixture("tsp4_mtz"), cfg);
    CHECK(r.status == SolveStatus::NodeLimit);
    CHECK_FALSE(r.objective);
}

TEST_CASE("config validation") {
    SolverConfig cfg;
    cfg.integer_tol = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    CHECK_THROWS_AS(solve(fixture("salmon_eggs"), cfg), std::invalid_argument);
}

TEST_CASE("free, negative and fixed variables") {
    auto r = solve_relaxation(parse_model(
        "var a >= -inf <= inf\nvar b >= -5 <= -1\nvar c >= 2 <= 2\nmin a - b + c\n"
        "st lo: a >= -7\nst mix: a + b + c <= 10\n"));
    REQUIRE(r.optimal());
    CHECK(*r.objective == doctest::Approx(-7 + 1 + 2));
    CHECK(r.assignment.at("c") == 2.0);
}

TEST_CASE("two objectives are scalarized in the sense of the first") {
    auto m = parse_model("var x <= 4\nvar y <= 4\nmin x - y\nmax weight 2 x\nst c: x + y <= 6\n");
    auto r = solve(m);
    REQUIRE(r.optimal());
    // min (x - y) - 2x = -x - y over x + y <= 6
    CHECK(*r.objective == doctest::Approx(-6.0));
    CHECK(*r.objective == doctest::Approx(scalarized_objective(m, r.assignment)));
}

TEST_CASE("evaluate_assignment") {
    auto m = fixture("salmon_eggs");
    auto ok = evaluate_assignment(m, {{"s", 5}, {"e", 3}});
    CHECK(ok.feasible);
    CHECK(ok.objective == 460.0);
    auto bad = evaluate_assignment(m, {{"s", 0}, {"e", 0}});
    CHECK_FALSE(bad.feasible);
    REQUIRE_FALSE(bad.violations.empty());
    CHECK(bad.violations.front().find("calories") != std::string::npos);
    auto frac = evaluate_assignment(m, {{"s", 5.5}, {"e", 3}});
    CHECK_FALSE(frac.feasible);
    CHECK_THROWS_AS(evaluate_assignment(m, {{"s", 5}}), MissingVariable);

    auto zero = parse_model("var x >= -inf\nmin 0 x\n");
    auto z = evaluate_assignment(zero, {{"x", 0}});
    CHECK(z.feasible);
    CHECK(z.objective == 0.0);
}

TEST_CASE("dense simplex on a degenerate problem") {
    // Classic cycling example under the largest-coefficient rule.
    DenseSimplex<double> lp;
    StandardFormLp<double> p;
    p.A.resize(3, 4);
    p.A << 0.25, -8, -1, 9, 0.5, -12, -0.5, 3, 0, 0, 1, 0;
    p.b.resize(3);
    p.b << 0, 0, 1;
    p.senses = {Sense::Le, Sense::Le, Sense::Le};
    p.c.resize(4);
    p.c << -0.75, 20, -0.5, 6;
    auto r = lp.solve(p);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == doctest::Approx(-1.25));

    DenseSimplex<long double> wide;
    StandardFormLp<long double> q{p.A.cast<long double>(), p.b.cast<long double>(), p.senses,
                                  p.c.cast<long double>()};
    auto rw = wide.solve(q);
    REQUIRE(rw.status == LpStatus::Optimal);
    CHECK(static_cast<double>(rw.objective) == doctest::Approx(-1.25));
}

TEST_CASE("solver agrees with lattice enumeration") {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 150; ++i) {
        auto m = oracle::random_milp(rng, 5, 12, 2e4);
        CAPTURE(render_model(m));
        auto expected = oracle::enumerate_optimum(m);
        auto r = solve(m);
        if (!expected) {
            CHECK(r.status == SolveStatus::Infeasible);
            continue;
        }
        REQUIRE(r.optimal());
        CHECK(std::fabs(*r.objective - *expected) <= 1e-7 * std::max(1.0, std::fabs(*expected)));
        auto check = evaluate_assignment(m, r.assignment);
        CHECK(check.feasible);
        CHECK(std::fabs(check.objective - *r.objective) <= 1e-9 * std::max(1.0, std::fabs(*r.objective)));
    }
}

TEST_CASE("mixed models agree with enumeration plus fixed-integer relaxations") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 40; ++i) {
        auto m = oracle::random_milp(rng, 3, 6, 400);
        VariableDecl w{"w", VarKind::Continuous, 0, 7.5};
        m.variables.push_back(w);
        m.constraints.push_back(normalized(Constraint{"cw", {{{1, "w"}, {1, m.variables[0].name}}, 0},
                                                      Sense::Le, 9}));
        m.objectives[0].expr.terms.push_back({-1.5, "w"});
        m.objectives[0].expr = normalized(m.objectives[0].expr);
        CAPTURE(render_model(m));
        auto expected = oracle::enumerate_mixed_optimum(m);
        auto r = solve(m);
        if (!expected) {
            CHECK(r.status == SolveStatus::Infeasible);
            continue;
        }
        REQUIRE(r.optimal());
        CHECK(*r.objective == doctest::Approx(*expected).epsilon(1e-7));
    }
}

TEST_CASE("relaxation bounds the integer optimum") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 150; ++i) {
        auto m = oracle::random_milp(rng, 5, 10, 1e4);
        auto r = solve(m);
        if (!r.optimal()) continue;
        auto relax = solve_relaxation(m);
        REQUIRE(relax.optimal());
        bool maximize = m.objectives.front().sense == ObjSense::Maximize;
        if (maximize)
            CHECK(*relax.objective >= *r.objective - 1e-7);
        else
            CHECK(*relax.objective <= *r.objective + 1e-7);
    }
}

TEST_CASE("solves are deterministic") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 50; ++i) {
        auto m = oracle::random_milp(rng);
        auto a = solve(m), b = solve(m);
        CHECK(a.status == b.status);
        CHECK(a.objective == b.objective);
        CHECK(a.assignment == b.assignment);
    }
}
