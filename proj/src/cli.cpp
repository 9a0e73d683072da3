#include "orsynth/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "orsynth/corpus.hpp"
#include "orsynth/evaluation.hpp"
#include "orsynth/generation.hpp"
#include "orsynth/llm_backend.hpp"
#include "orsynth/model_ir.hpp"
#include "orsynth/solver.hpp"
#include "orsynth/templates.hpp"
#include "orsynth/validation.hpp"

namespace orsynth {

namespace fs = std::filesystem;

namespace {

// Failure with a specific exit code, raised inside command handlers.
struct CommandFailure {
    int code;
    std::string message;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CommandFailure{kExitInput, "cannot read " + path.string()};
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_command(const std::string& cmd) {
    std::istringstream in(cmd);
    std::vector<std::string> argv;
    for (std::string part; in >> part;) argv.push_back(part);
    return argv;
}

struct ProgramOptions {
    std::string command;
    double timeout = 30.0;

    void add_to(CLI::App* app) {
        app->add_option("--program-cmd", command,
                        "Run this command on the model file instead of the built-in solver");
        app->add_option("--program-timeout", timeout, "Seconds before the program check gives up")
            ->check(CLI::PositiveNumber);
    }
    ProgramCheckConfig config() const {
        ProgramCheckConfig cfg;
        if (!command.empty()) {
            cfg.mode = ProgramMode::Subprocess;
            cfg.command = split_command(command);
        }
        cfg.timeout_seconds = timeout;
        return cfg;
    }
};

std::unique_ptr<Backend> open_backend(const std::string& spec) {
    try {
        return make_backend(spec);
    } catch (const std::exception& e) {
        throw CommandFailure{kExitUsage, std::string("backend configuration: ") + e.what()};
    }
}

TemplateSet open_templates(const std::string& dir) {
    if (dir.empty()) return TemplateSet::builtin();
    try {
        return TemplateSet::from_directory(dir);
    } catch (const std::exception& e) {
        throw CommandFailure{kExitUsage, e.what()};
    }
}

// ---------------------------------------------------------------------------

struct GenerateOptions {
    std::string seeds, out, backend, report, templates;
    long iterations = 0;
    std::vector<double> weights;
    int desc_retries = 3, sol_retries = 3, workers = 1;
    std::uint64_t rng_seed = 0;
    bool no_llm_checks = false;
    ProgramOptions program;
};

CorpusStore open_output_corpus(const GenerateOptions& o, std::ostream& err) {
    if (fs::exists(o.out)) {
        auto store = CorpusStore::load(o.out);
        for (const auto& c : store.corrupt_records())
            err << "warning: " << o.out << ":" << c.line << ": skipped corrupt record: " << c.message << '\n';
        return store;
    }
    if (o.seeds.empty()) throw CommandFailure{kExitUsage, "--seeds is required when --out does not exist"};
    CorpusStore seeds = [&] {
        try {
            return CorpusStore::load(o.seeds);
        } catch (const CorpusError& e) {
            throw CommandFailure{kExitInput, e.what()};
        }
    }();
    for (const auto& c : seeds.corrupt_records())
        err << "warning: " << o.seeds << ":" << c.line << ": skipped corrupt record: " << c.message << '\n';
    auto store = CorpusStore::create(o.out);
    for (const auto& r : seeds.snapshot()) store.append(r);
    return store;
}

int cmd_generate(const GenerateOptions& o, std::ostream& out, std::ostream& err) {
    CampaignConfig cfg;
    cfg.iterations = o.iterations;
    if (!o.weights.empty()) std::copy(o.weights.begin(), o.weights.end(), cfg.operator_weights.begin());
    cfg.desc_retry_limit = o.desc_retries;
    cfg.sol_retry_limit = o.sol_retries;
    cfg.rng_seed = o.rng_seed;
    cfg.workers = o.workers;
    cfg.llm_checks = !o.no_llm_checks;
    cfg.program = o.program.config();
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw CommandFailure{kExitUsage, e.what()};
    }
    auto backend = open_backend(o.backend);
    TemplateSet templates = open_templates(o.templates);

    CampaignReport report;
    try {
        CorpusStore store = open_output_corpus(o, err);
        if (o.iterations > 0 && store.active_count() == 0)
            throw CommandFailure{kExitInput, "seed corpus has no active records"};
        report = run_campaign(store, *backend, cfg, templates);
    } catch (const PreconditionError& e) {
        throw CommandFailure{kExitInput, e.what()};
    } catch (const CorpusError& e) {
        throw CommandFailure{kExitInput, e.what()};
    }

    std::string report_path = o.report.empty() ? o.out + ".report.json" : o.report;
    std::ofstream rep(report_path, std::ios::trunc);
    if (!rep) throw CommandFailure{kExitInput, "cannot write " + report_path};
    rep << report.to_json().dump(2) << '\n';

    out << "iterations " << report.iterations << "  survived " << report.survived << "  discarded "
        << report.discarded << "  backend errors " << report.backend_errors << '\n';
    for (const auto& [op, s] : report.per_operator)
        out << "  " << op << ": attempted " << s.attempted << ", survived " << s.survived
            << ", discarded " << s.discarded() << '\n';
    Usage total = report.description_usage;
    total += report.solution_usage;
    out << "queries " << total.queries << " (description " << report.description_usage.queries
        << ", solution " << report.solution_usage.queries << ")\n";
    out << "report written to " << report_path << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct ValidateOptions {
    std::string solution, problem, backend, templates;
    ProgramOptions program;
};

int cmd_validate(const ValidateOptions& o, std::ostream& out) {
    std::string solution_text = read_file(o.solution);
    if (solution_text.find("```optir") == std::string::npos)
        solution_text = "```optir\n" + solution_text + (solution_text.ends_with('\n') ? "" : "\n") + "```\n";
    std::string problem = o.problem.empty() ? std::string{} : read_file(o.problem);

    std::unique_ptr<Backend> backend;
    if (!o.backend.empty()) backend = open_backend(o.backend);
    TemplateSet templates = open_templates(o.templates);
    BudgetLedger ledger;
    std::optional<LlmChecker> llm;
    if (backend) llm.emplace(LlmChecker{*backend, ledger, templates});

    std::vector<CheckReport> reports;
    try {
        if (!o.problem.empty()) {
            auto d = run_description_checks(problem, llm ? &*llm : nullptr);
            reports = d.reports;
        }
        if (reports.empty() || reports.back().passed()) {
            auto s = run_solution_checks(problem, solution_text, o.program.config(), llm ? &*llm : nullptr);
            reports.insert(reports.end(), s.reports.begin(), s.reports.end());
            if (s.passed() && s.objective) out << "objective " << format_number(*s.objective) << '\n';
        }
    } catch (const BackendError& e) {
        throw CommandFailure{kExitUsage, e.what()};
    }
    bool ok = true;
    for (const auto& r : reports) {
        out << (r.passed() ? "PASS " : "FAIL ") << to_string(r.stage) << " (" << to_string(r.mode) << ")";
        if (!r.passed()) {
            ok = false;
            out << ": " << r.error_text;
        }
        out << '\n';
        for (const auto& w : r.warnings) out << "  warning: " << w << '\n';
    }
    return ok ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------------------

struct EvaluateOptions {
    std::string bench, solutions, json, corpus;
    double tol = 1e-4, epsilon = 1e-6;
};

int cmd_evaluate(const EvaluateOptions& o, std::ostream& out, std::ostream& err) {
    ComparatorConfig cmp{o.tol, o.epsilon};
    try {
        cmp.validate();
    } catch (const std::invalid_argument& e) {
        throw CommandFailure{kExitUsage, e.what()};
    }
    std::vector<BenchmarkInstance> bench;
    std::map<std::string, Submission> subs;
    std::map<std::string, SurvivalCount> survival;
    try {
        bench = load_benchmark(o.bench);
        subs = load_submissions(o.solutions);
        if (!o.corpus.empty()) survival = survival_counts(CorpusStore::load(o.corpus).snapshot());
    } catch (const std::exception& e) {
        throw CommandFailure{kExitInput, e.what()};
    }
    if (bench.empty()) throw CommandFailure{kExitInput, "benchmark file has no instances"};

    auto ev = evaluate_dataset(bench, subs, cmp);
    for (const auto& id : ev.unmatched_submissions)
        err << "warning: solution " << id << " matches no benchmark instance\n";
    auto report = aggregate(ev.tallies, survival);
    out << report.to_table();
    if (!o.json.empty()) {
        auto j = report.to_json();
        nlohmann::ordered_json instances = nlohmann::ordered_json::array();
        for (const auto& r : ev.outcomes) {
            nlohmann::ordered_json row{{"id", r.id}, {"dataset", r.dataset}, {"correct", r.correct}};
            row["produced"] = r.produced ? nlohmann::ordered_json(*r.produced) : nlohmann::ordered_json(nullptr);
            if (!r.correct) row["reason"] = r.reason;
            instances.push_back(std::move(row));
        }
        j["instances"] = std::move(instances);
        std::ofstream f(o.json, std::ios::trunc);
        if (!f) throw CommandFailure{kExitInput, "cannot write " + o.json};
        f << j.dump(2) << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

CorpusStore load_corpus(const std::string& path, std::ostream& err) {
    try {
        auto store = CorpusStore::load(path);
        for (const auto& c : store.corrupt_records())
            err << "warning: " << path << ":" << c.line << ": skipped corrupt record: " << c.message << '\n';
        return store;
    } catch (const CorpusError& e) {
        throw CommandFailure{kExitInput, e.what()};
    }
}

int cmd_stats(const std::string& corpus, bool json, std::ostream& out, std::ostream& err) {
    auto store = load_corpus(corpus, err);
    auto records = store.snapshot();
    long seeds = 0, tombstones = 0;
    for (const auto& r : records) {
        if (r.supersedes) ++tombstones;
        else if (r.lineage.op == kSeedOperator) ++seeds;
    }
    auto survival = survival_counts(records);
    if (json) {
        nlohmann::ordered_json j{{"records", records.size()},
                                 {"active", store.active_count()},
                                 {"discarded", records.size() - store.active_count()},
                                 {"seeds", seeds},
                                 {"tombstones", tombstones},
                                 {"corrupt_lines", store.corrupt_records().size()}};
        nlohmann::ordered_json ops = nlohmann::ordered_json::object();
        for (const auto& [op, s] : survival)
            ops[op] = {{"attempted", s.attempted}, {"survived", s.survived}, {"discarded", s.discarded()}};
        j["operators"] = std::move(ops);
        out << j.dump(2) << '\n';
        return kExitOk;
    }
    out << "records      " << records.size() << '\n'
        << "active       " << store.active_count() << '\n'
        << "discarded    " << records.size() - store.active_count() << '\n'
        << "seeds        " << seeds << '\n'
        << "tombstones   " << tombstones << '\n'
        << "corrupt      " << store.corrupt_records().size() << '\n';
    for (const auto& [op, s] : survival)
        out << "  " << op << ": attempted " << s.attempted << ", survived " << s.survived
            << ", discarded " << s.discarded() << '\n';
    return kExitOk;
}

int cmd_export(const std::string& corpus, const std::string& path, std::ostream& out, std::ostream& err) {
    auto store = load_corpus(corpus, err);
    try {
        out << "exported " << export_training(store, path) << " examples to " << path << '\n';
    } catch (const CorpusError& e) {
        throw CommandFailure{kExitInput, e.what()};
    }
    return kExitOk;
}

int cmd_solve(const std::string& path, bool relaxation, std::ostream& out) {
    std::string text = read_file(path);
    OptModel model;
    try {
        model = parse_model(text);
    } catch (const std::exception& e) {
        throw CommandFailure{kExitInput, path + ": " + e.what()};
    }
    SolveResult r = relaxation ? solve_relaxation(model) : solve(model);
    switch (r.status) {
        case SolveStatus::Optimal:
            out << "OBJECTIVE " << format_number(*r.objective) << '\n';
            return kExitOk;
        case SolveStatus::Infeasible: out << "INFEASIBLE\n"; break;
        case SolveStatus::Unbounded: out << "UNBOUNDED\n"; break;
        case SolveStatus::NodeLimit: out << "NODE_LIMIT\n"; break;
    }
    return kExitNoOptimum;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Synthesize, validate and score optimization-modeling examples", "orsynth"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    GenerateOptions gen;
    auto* g = app.add_subcommand("generate", "Evolve new examples from a seed corpus");
    g->add_option("--seeds", gen.seeds, "Seed corpus (JSON Lines)");
    g->add_option("--out", gen.out, "Output corpus; resumed when it exists")->required();
    g->add_option("--iterations", gen.iterations, "Number of iterations")->required()->check(CLI::NonNegativeNumber);
    g->add_option("--backend", gen.backend, "Backend config file or scripted:<fixture.jsonl>")->required();
    g->add_option("--weights", gen.weights, "Five operator weights")->expected(5)->delimiter(',');
    g->add_option("--desc-retries", gen.desc_retries, "Description regeneration limit")->check(CLI::NonNegativeNumber);
    g->add_option("--sol-retries", gen.sol_retries, "Solution regeneration limit")->check(CLI::NonNegativeNumber);
    g->add_option("--rng-seed", gen.rng_seed, "Random seed");
    g->add_option("--workers", gen.workers, "Parallel iterations")->check(CLI::PositiveNumber);
    g->add_option("--report", gen.report, "Campaign report path (default <out>.report.json)");
    g->add_option("--templates", gen.templates, "Directory overriding the built-in prompt templates");
    g->add_flag("--no-llm-checks", gen.no_llm_checks, "Run only the deterministic checkers");
    gen.program.add_to(g);

    ValidateOptions val;
    auto* v = app.add_subcommand("validate", "Run the checkers on one solution");
    v->add_option("--solution", val.solution, "Solution text or bare .optir model")->required();
    v->add_option("--problem", val.problem, "Problem description file");
    v->add_option("--backend", val.backend, "Backend for the LLM-side checks");
    v->add_option("--templates", val.templates, "Directory overriding the built-in prompt templates");
    val.program.add_to(v);

    EvaluateOptions eva;
    auto* e = app.add_subcommand("evaluate", "Score solutions against benchmark answers");
    e->add_option("--bench", eva.bench, "Benchmark JSON Lines")->required();
    e->add_option("--solutions", eva.solutions, "Solutions JSON Lines")->required();
    e->add_option("--tol", eva.tol, "Relative tolerance");
    e->add_option("--epsilon", eva.epsilon, "Denominator offset");
    e->add_option("--json", eva.json, "Also write the report as JSON");
    e->add_option("--corpus", eva.corpus, "Corpus whose operator survival is reported");

    std::string stats_corpus;
    bool stats_json = false;
    auto* s = app.add_subcommand("stats", "Summarize a corpus");
    s->add_option("--corpus", stats_corpus, "Corpus file")->required();
    s->add_flag("--json", stats_json, "Machine-readable output");

    std::string export_corpus, export_out;
    auto* x = app.add_subcommand("export", "Write active records as training examples");
    x->add_option("--corpus", export_corpus, "Corpus file")->required();
    x->add_option("--out", export_out, "Output JSON Lines")->required();

    std::string solve_model;
    bool solve_relax = false;
    auto* so = app.add_subcommand("solve", "Solve a .optir model");
    so->add_option("--model", solve_model, "Model file")->required();
    so->add_flag("--relaxation", solve_relax, "Drop integrality");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex) {
        int code = app.exit(ex, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*g) return cmd_generate(gen, out, err);
        if (*v) return cmd_validate(val, out);
        if (*e) return cmd_evaluate(eva, out, err);
        if (*s) return cmd_stats(stats_corpus, stats_json, out, err);
        if (*x) return cmd_export(export_corpus, export_out, out, err);
        if (*so) return cmd_solve(solve_model, solve_relax, out);
    } catch (const CommandFailure& f) {
        err << "error: " << f.message << '\n';
        return f.code;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return kExitInput;
    }
    return kExitUsage;
}

}  // namespace orsynth
