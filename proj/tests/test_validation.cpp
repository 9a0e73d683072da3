#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "orsynth/validation.hpp"
#include "test_support.hpp"

using namespace orsynth;
using testsupport::data_path;
using testsupport::read_text;

namespace {

const char* const kFighterJets =
    "An air force must assign fighter jets to n missions. A jet of type j costs a_j per sortie "
    "and each mission needs at least k jets. Choose how many jets of each type to assign so "
    "that the total cost is minimized.";

const char* const kSalmon =
    "A patient eats bowls of salmon and eggs. Salmon costs $80 per bowl with 300 calories and "
    "15 grams of protein; eggs cost $20 per bowl with 200 calories and 8 grams of protein. "
    "The patient needs 2000 calories and 90 grams of protein, and at most 40% of bowls may be "
    "eggs. Minimize cost.";

std::string fenced(const std::string& model, const std::string& answer = "") {
    std::string s = "Let s and e count the bowls.\n\n```optir\n" + model + "```\n";
    if (!answer.empty()) s += "ANSWER: " + answer + "\n";
    return s;
}

Solution solution_of(const std::string& model) { return parse_solution_text(fenced(model)); }

struct Llm {
    explicit Llm(std::vector<ScriptedBackend::Entry> entries) : backend(std::move(entries)) {}
    ScriptedBackend backend;
    BudgetLedger ledger;
    LlmChecker checker{backend, ledger, TemplateSet::builtin()};
};

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("solution text parsing") {
    auto sol = parse_solution_text(fenced(read_text(data_path("models/salmon_eggs.optir")), "460"));
    CHECK(sol.declared_answer == 460.0);
    CHECK(sol.model.variables.size() == 2);
    CHECK(contains(sol.narrative, "Let s and e"));
    CHECK_FALSE(contains(sol.narrative, "ANSWER"));
    CHECK_THROWS_AS(parse_solution_text("no model here"), SolutionFormatError);
    CHECK_THROWS_AS(parse_solution_text("```optir\nmin x\n```"), SemanticError);
}

TEST_CASE("checker reply protocol") {
    CHECK(parse_checker_reply(Stage::Description, "  There are no errors found.").passed());
    auto r = parse_checker_reply(Stage::Constraints, "Review:\nERROR: constraint c3 inconsistent");
    CHECK_FALSE(r.passed());
    CHECK(r.mode == CheckMode::Llm);
    CHECK(r.error_text == "constraint c3 inconsistent");
    auto raw = parse_checker_reply(Stage::Description, "looks fine to me");
    CHECK_FALSE(raw.passed());
    CHECK(raw.error_text == "looks fine to me");
}

TEST_CASE("description checks") {
    auto jets = check_description(kFighterJets);
    CHECK_FALSE(jets.passed());
    CHECK(contains(jets.error_text, "no numerical value"));
    CHECK(check_description(kSalmon).passed());
    auto empty = check_description("   ");
    CHECK_FALSE(empty.passed());
    CHECK_FALSE(empty.error_text.empty());
}

TEST_CASE("description LLM check runs only after the deterministic pass") {
    Llm llm({{std::string("# Problem:"), "ERROR: the protein target has no unit."}});
    CHECK_FALSE(check_description(kFighterJets, &llm.checker).passed());
    CHECK(llm.backend.served() == 0);
    auto r = check_description(kSalmon, &llm.checker);
    CHECK_FALSE(r.passed());
    CHECK(r.mode == CheckMode::Llm);
    CHECK(r.error_text == "the protein target has no unit.");
    CHECK(llm.ledger.phase(Phase::Description).queries == 1);
}

TEST_CASE("variable checks") {
    CHECK(check_variables(solution_of(read_text(data_path("models/salmon_eggs.optir")))).passed());
    auto unused = check_variables(parse_model("var x\nvar w\nmin x\nst c: x >= 1\n"));
    CHECK_FALSE(unused.passed());
    CHECK(contains(unused.error_text, "unused variable w"));

    OptModel m = parse_model("var x <= 5\nvar y <= 1\nmin x\nst l: x - 5 y <= 0\n");
    m.requirements.push_back(KWay{0, {"y"}, {"x"}});
    auto kind = check_variables(m);
    CHECK_FALSE(kind.passed());
    CHECK(contains(kind.error_text, "not binary"));
}

TEST_CASE("big-M pair detection") {
    AbsGe req{"x", "z", 200};
    auto one_sided = check_bigm_requirement(parse_model(read_text(data_path("models/resource_one_sided.optir"))), req);
    CHECK_FALSE(one_sided.passed());
    CHECK(contains(one_sided.error_text, "missing branch z - x >= a - M*(1 - y)"));
    CHECK(contains(one_sided.error_text, "enforces only one side"));

    CHECK(check_bigm_requirement(parse_model(read_text(data_path("models/resource_bigm.optir"))), req).passed());
    CHECK(check_bigm_requirement(parse_model("var x\nvar z\nmin x + z\n"), {"x", "z", 0}).passed());

    auto small = parse_model(
        "var x integer <= 500\nvar z integer <= 200\nvar d binary\nmin x\n"
        "st p: x - z + 600 d >= 200\nst n: z - x - 600 d >= -400\n");
    auto r = check_bigm_requirement(small, req);
    CHECK_FALSE(r.passed());
    CHECK(contains(r.error_text, "needs M >= a + span = 700"));

    auto scaled = parse_model(
        "var x integer <= 500\nvar z integer <= 200\nvar d binary\nmin x\n"
        "st p: 2 z - 2 x - 2000 d <= -400\nst n: 3 z - 3 x - 3000 d >= -2400\n");
    CHECK(check_bigm_requirement(scaled, req).passed());

    auto unbounded = parse_model(
        "var x integer\nvar z integer <= 200\nvar d binary\nmin x\n"
        "st p: x - z + 1000 d >= 200\nst n: z - x - 1000 d >= -800\n");
    auto w = check_bigm_requirement(unbounded, req);
    CHECK(w.passed());
    REQUIRE(w.warnings.size() == 1);
    CHECK(contains(w.warnings[0], "cannot verify M"));

    auto not_binary = parse_model(
        "var x integer <= 500\nvar z integer <= 200\nvar d integer <= 3\nmin x\n"
        "st p: x - z + 1000 d >= 200\nst n: z - x - 1000 d >= -800\n");
    CHECK(contains(check_bigm_requirement(not_binary, req).error_text, "not binary"));
}

TEST_CASE("k-way detection") {
    const std::string vars =
        "var x1 <= 60\nvar x2 <= 60\nvar x3 <= 60\nvar y1 binary\nvar y2 binary\nvar y3 binary\n"
        "max x1 + x2 + x3\n";
    KWay req{2, {"y1", "y2", "y3"}, {"x1", "x2", "x3"}};
    const std::string card = "st card: y1 + y2 + y3 <= 2\n";
    const std::string links =
        "st l1: x1 - 60 y1 <= 0\nst l2: x2 - 60 y2 <= 0\nst l3: x3 - 60 y3 <= 0\n";
    CHECK(check_kway_requirement(parse_model(vars + card + links), req).passed());

    auto no_link = check_kway_requirement(
        parse_model(vars + card + "st l1: x1 - 60 y1 <= 0\nst l3: x3 - 60 y3 <= 0\n"), req);
    CHECK_FALSE(no_link.passed());
    CHECK(contains(no_link.error_text, "no linking constraint for x2"));

    auto no_card = check_kway_requirement(parse_model(vars + links), req);
    CHECK(contains(no_card.error_text, "missing cardinality constraint y1 + y2 + y3 <= 2"));

    CHECK(check_kway_requirement(parse_model(vars), {3, req.selectors, req.linked}).passed());
}

TEST_CASE("constraint checks combine deterministic and LLM verdicts") {
    auto one_sided = solution_of(read_text(data_path("models/resource_one_sided.optir")));
    Llm pass_llm({{std::nullopt, "There are no errors found."}});
    auto r = check_constraints(one_sided, "problem", "text", &pass_llm.checker);
    CHECK_FALSE(r.passed());
    CHECK(r.mode == CheckMode::Deterministic);
    CHECK(pass_llm.backend.served() == 0);

    auto good = solution_of(read_text(data_path("models/resource_bigm.optir")));
    CHECK(check_constraints(good, "problem", "text", &pass_llm.checker).passed());
    CHECK(pass_llm.ledger.phase(Phase::Solution).queries == 1);

    Llm err_llm({{std::nullopt, "ERROR: constraint c3 inconsistent"}});
    auto e = check_constraints(good, "problem", "text", &err_llm.checker);
    CHECK_FALSE(e.passed());
    CHECK(e.error_text == "constraint c3 inconsistent");
}

TEST_CASE("builtin program check") {
    const std::string salmon = read_text(data_path("models/salmon_eggs.optir"));
    auto ok = check_program(solution_of(salmon));
    CHECK(ok.report.passed());
    CHECK(ok.objective == 460.0);

    auto inf = check_program(solution_of("var x\nmin x\nst a: x >= 5\nst b: x <= 3\n"));
    CHECK_FALSE(inf.report.passed());
    CHECK(inf.report.error_text == "infeasible");

    auto mismatch = check_program(parse_solution_text(fenced(salmon, "430.7692307692307")));
    CHECK_FALSE(mismatch.report.passed());
    CHECK(contains(mismatch.report.error_text, "answer mismatch"));
    CHECK(check_program(parse_solution_text(fenced(salmon, "460.00001"))).report.passed());
}

TEST_CASE("subprocess program check") {
    ProgramCheckConfig cfg;
    cfg.mode = ProgramMode::Subprocess;
    cfg.command = {ORSYNTH_CLI_PATH, "solve", "--model"};
    cfg.timeout_seconds = 20;
    auto ok = check_program(solution_of(read_text(data_path("models/salmon_eggs.optir"))), cfg);
    CHECK(ok.report.passed());
    CHECK(ok.objective == 460.0);

    auto inf = check_program(solution_of(read_text(data_path("models/infeasible.optir"))), cfg);
    CHECK_FALSE(inf.report.passed());
    CHECK(contains(inf.report.error_text, "INFEASIBLE"));

    cfg.command = {"/bin/sh", "-c", "sleep 5", "sh"};
    cfg.timeout_seconds = 0.2;
    auto slow = check_program(solution_of("var x\nmin x\n"), cfg);
    CHECK_FALSE(slow.report.passed());
    CHECK(contains(slow.report.error_text, "time"));

    CHECK(parse_objective_line("noise\nOBJECTIVE 12.5\n") == 12.5);
    CHECK_FALSE(parse_objective_line("OBJECTIVE 12.5\ntrailing\n"));
    CHECK_THROWS_AS(run_process({"/nonexistent/binary"}, 1), std::runtime_error);
}

TEST_CASE("solution stage stops at the first failure") {
    auto bad = run_solution_checks("p", "```optir\nvar x\nmin y\n```", {});
    REQUIRE(bad.reports.size() == 1);
    CHECK(bad.reports[0].stage == Stage::Variables);
    CHECK(contains(bad.error_text(), "undeclared variable y"));

    auto unused = run_solution_checks("p", fenced("var s\nvar e\nvar w\nmin s + e\nst c: s + e >= 1\n"), {});
    CHECK(unused.reports.size() == 1);
    CHECK_FALSE(unused.passed());

    auto good = run_solution_checks("p", fenced(read_text(data_path("models/salmon_eggs.optir"))), {});
    CHECK(good.passed());
    CHECK(good.reports.size() == 3);
    CHECK(good.objective == 460.0);
}

TEST_CASE("regeneration loop") {
    const auto& templates = TemplateSet::builtin();
    StageCheck check = [](const std::string& c) { return run_description_checks(c); };
    RegenerationPrompt prompt = [&](const std::string& c, const std::string& e) {
        return build_description_regeneration_prompt(templates, c, e);
    };

    SUBCASE("fail then pass") {
        ScriptedBackend b({{std::string("description gives no numerical value"), kSalmon}});
        BudgetLedger ledger;
        auto r = validate_with_regeneration(kFighterJets, check, prompt, b, ledger, Phase::Description, 3);
        CHECK(r.passed);
        CHECK(r.attempts == 2);
        CHECK(r.candidate == kSalmon);
        CHECK(r.reports.size() == 2);
        CHECK(ledger.phase(Phase::Description).queries == 1);
    }
    SUBCASE("exhaustion") {
        ScriptedBackend b({{std::nullopt, "x"}, {std::nullopt, "y"}, {std::nullopt, "z"}});
        BudgetLedger ledger;
        auto r = validate_with_regeneration("w", check, prompt, b, ledger, Phase::Description, 3);
        CHECK_FALSE(r.passed);
        CHECK(r.attempts == 4);
        CHECK(r.candidate == "z");
    }
    SUBCASE("backend errors count as attempts") {
        ScriptedBackend b({{std::nullopt, "still vague"}});
        BudgetLedger ledger;
        auto r = validate_with_regeneration("w", check, prompt, b, ledger, Phase::Description, 3);
        CHECK_FALSE(r.passed);
        CHECK(r.attempts == 4);
        CHECK(r.backend_errors == 2);
        CHECK(ledger.phase(Phase::Description).queries == 3);
    }
    SUBCASE("limit zero checks once") {
        ScriptedBackend b({});
        BudgetLedger ledger;
        auto r = validate_with_regeneration("w", check, prompt, b, ledger, Phase::Description, 0);
        CHECK(r.attempts == 1);
        CHECK(b.served() == 0);
    }
}

TEST_CASE("regeneration prompts embed the error verbatim") {
    const auto& t = TemplateSet::builtin();
    const std::string err = "missing branch z - x >= a - M*(1 - y) for abs_ge(x, z, 200)";
    auto p = build_solution_regeneration_prompt(t, "the problem", "the solution", err);
    CHECK(contains(p, err));
    CHECK(contains(p, "the problem"));
    CHECK(contains(p, "the solution"));
    CHECK(contains(build_description_regeneration_prompt(t, "q", "no digits here"), "no digits here"));
}

TEST_CASE("attempts never exceed limit + 1") {
    const auto& t = TemplateSet::builtin();
    std::mt19937_64 rng(4);
    for (int limit = 0; limit <= 5; ++limit) {
        std::vector<ScriptedBackend::Entry> script;
        std::uniform_int_distribution<int> coin(0, 2);
        for (int i = 0; i < 8; ++i) script.push_back({coin(rng) == 0 ? std::optional<std::string>("zz") : std::nullopt, "vague"});
        ScriptedBackend b(script);
        BudgetLedger ledger;
        auto r = validate_with_regeneration(
            "w", [](const std::string& c) { return run_description_checks(c); },
            [&](const std::string& c, const std::string& e) {
                return build_description_regeneration_prompt(t, c, e);
            },
            b, ledger, Phase::Description, limit);
        CHECK(r.attempts == limit + 1);
        CHECK(ledger.total().queries == limit);
    }
}

TEST_CASE("big-M acceptance is sound under enumeration") {
    std::mt19937_64 rng(2718);
    int passed = 0;
    for (int i = 0; i < 150; ++i) {
        AbsGe req;
        auto m = oracle::random_bigm_model(rng, req);
        CAPTURE(render_model(m));
        if (!check_bigm_requirement(m, req).passed()) continue;
        ++passed;
        oracle::for_each_lattice_point(m, [&](const Assignment& x) {
            if (oracle::satisfies(m, x)) CHECK(std::fabs(x.at("x") - x.at("z")) >= req.a);
        });
    }
    CHECK(passed >= 30);
}

TEST_CASE("k-way acceptance is sound under enumeration") {
    std::mt19937_64 rng(1618);
    int passed = 0;
    for (int i = 0; i < 150; ++i) {
        KWay req;
        auto m = oracle::random_kway_model(rng, req);
        CAPTURE(render_model(m));
        if (!check_kway_requirement(m, req).passed()) continue;
        ++passed;
        oracle::for_each_lattice_point(m, [&](const Assignment& x) {
            if (!oracle::satisfies(m, x)) return;
            long positive = (x.at("x1") > 0) + (x.at("x2") > 0);
            CHECK(positive <= req.k);
        });
    }
    CHECK(passed >= 30);
}
