#include "orsynth/generation.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

namespace orsynth {

const std::array<std::string_view, 16> kReferenceDomains = {
    "Education",       "Manufacturing",  "Logistics",     "Retail",
    "Agriculture",     "IT Services",    "Healthcare",    "Event Planning",
    "Construction",    "Entertainment",  "Research and Development",
    "Hospitality",     "Defense",        "Energy Sector", "Transportation",
    "Telecommunications",
};

PromptContext make_context(EvolutionOperator op, std::vector<SeedExample> seeds,
                           const TemplateSet& templates) {
    PromptContext ctx;
    ctx.op = op;
    ctx.seeds = std::move(seeds);
    std::string key(to_string(op));
    if (!templates.has_shots(key)) throw MissingShotFixture("no shot examples for " + key);
    ctx.shots = templates.shots(key);
    return ctx;
}

std::string build_evolution_prompt(const PromptContext& ctx, const TemplateSet& templates) {
    std::string name(to_string(ctx.op));
    if (ctx.shots.size() != 2)
        throw MissingShotFixture(name + " needs exactly 2 shot examples, found " +
                                 std::to_string(ctx.shots.size()));
    if (ctx.seeds.size() != seed_arity(ctx.op))
        throw PreconditionError(name + " needs " + std::to_string(seed_arity(ctx.op)) +
                                " seed(s), got " + std::to_string(ctx.seeds.size()));

    std::map<std::string, std::string> slots{{"shot_1", ctx.shots[0]}, {"shot_2", ctx.shots[1]}};
    if (ctx.op == EvolutionOperator::Combination) {
        slots["problem_1"] = ctx.seeds[0].description;
        slots["problem_2"] = ctx.seeds[1].description;
    } else {
        slots["seed_description"] = ctx.seeds[0].description;
    }
    if (ctx.op == EvolutionOperator::DomainTransformation) {
        std::string list;
        for (const auto& d : ctx.domain_list) list += (list.empty() ? "" : ", ") + d;
        slots["domain_list"] = list;
    }
    return render_template(templates.text("evolve_" + name), slots);
}

std::string evolve(Backend& backend, const PromptContext& ctx, BudgetLedger& ledger,
                   const TemplateSet& templates) {
    CompletionRequest req;
    req.prompt = build_evolution_prompt(ctx, templates);
    return complete(backend, req, ledger, Phase::Description);
}

std::string operator_phrase(EvolutionOperator op) {
    std::string s(to_string(op));
    for (char& c : s)
        if (c == '_') c = ' ';
    return s;
}

std::string build_solution_prompt(std::string_view problem, const std::vector<SeedExample>& seeds,
                                  EvolutionOperator op, const TemplateSet& templates) {
    if (seeds.empty()) throw PreconditionError("solution prompt needs at least one seed");
    std::string examples;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const auto& s = seeds[i];
        std::string n = std::to_string(i + 1);
        std::string model = s.model;
        if (!model.empty() && model.back() != '\n') model += '\n';
        examples += "# Reference Problem " + n + ":\n" + s.description + "\n\n";
        examples += "# Reference Solution " + n + ":\n";
        if (!s.narrative.empty()) examples += s.narrative + "\n\n";
        examples += "```optir\n" + model + "```\n";
        if (i + 1 < seeds.size()) examples += "\n";
    }
    return render_template(templates.text("generate_solution"),
                           {{"operator", operator_phrase(op)},
                            {"seed_examples", examples},
                            {"problem", std::string(problem)}});
}

std::string generate_solution(Backend& backend, std::string_view problem,
                              const std::vector<SeedExample>& seeds, EvolutionOperator op,
                              BudgetLedger& ledger, const TemplateSet& templates) {
    CompletionRequest req;
    req.prompt = build_solution_prompt(problem, seeds, op, templates);
    return complete(backend, req, ledger, Phase::Solution);
}

EvolutionOperator pick_operator(const OperatorWeights& weights, std::mt19937_64& rng) {
    std::discrete_distribution<std::size_t> dist(weights.begin(), weights.end());
    return kAllOperators[dist(rng)];
}

void CampaignConfig::validate() const {
    if (iterations < 0) throw std::invalid_argument("iterations must be non-negative");
    double sum = 0.0;
    for (double w : operator_weights) {
        if (!std::isfinite(w) || w < 0) throw std::invalid_argument("operator weights must be finite and non-negative");
        sum += w;
    }
    if (!(sum > 0)) throw std::invalid_argument("operator weights must not all be zero");
    if (desc_retry_limit < 0 || sol_retry_limit < 0)
        throw std::invalid_argument("retry limits must be non-negative");
    if (workers < 1) throw std::invalid_argument("workers must be at least 1");
    program.solver.validate();
    program.comparator.validate();
}

nlohmann::ordered_json CampaignReport::to_json() const {
    auto usage_json = [](const Usage& u) {
        return nlohmann::ordered_json{{"queries", u.queries},
                                      {"prompt_tokens", u.prompt_tokens},
                                      {"completion_tokens", u.completion_tokens}};
    };
    nlohmann::ordered_json j;
    j["iterations"] = iterations;
    j["survived"] = survived;
    j["discarded"] = discarded;
    j["discard_rate"] = discard_rate();
    j["backend_errors"] = backend_errors;
    nlohmann::ordered_json ops = nlohmann::ordered_json::object();
    for (const auto& [op, s] : per_operator)
        ops[op] = {{"attempted", s.attempted}, {"survived", s.survived}, {"discarded", s.discarded()}};
    j["operators"] = std::move(ops);
    Usage total = description_usage;
    total += solution_usage;
    auto ledger = usage_json(total);
    ledger["description"] = usage_json(description_usage);
    ledger["solution"] = usage_json(solution_usage);
    j["ledger"] = std::move(ledger);
    return j;
}

// ---------------------------------------------------------------------------

namespace {

struct FenceSplit {
    std::string narrative;
    std::string model;
};

// Best-effort split of an unparseable solution, kept on discarded records.
FenceSplit split_fence(const std::string& text) {
    auto start = text.find("```optir");
    if (start == std::string::npos) return {text, {}};
    auto body = text.find('\n', start);
    auto end = body == std::string::npos ? std::string::npos : text.find("```", body + 1);
    if (end == std::string::npos) return {text, {}};
    auto after = text.find('\n', end);
    std::string narrative = text.substr(0, start);
    if (after != std::string::npos) narrative += text.substr(after + 1);
    return {narrative, text.substr(body + 1, end - body - 1)};
}

struct IterationOutcome {
    SeedExample record;
    long backend_errors = 0;
};

class Iteration {
public:
    Iteration(CorpusStore& store, Backend& backend, BudgetLedger& ledger,
              const CampaignConfig& cfg, const TemplateSet& templates)
        : store_(store), backend_(backend), ledger_(ledger), cfg_(cfg), templates_(templates) {}

    IterationOutcome run(long index, const std::string& id, long lineage_iteration) {
        std::seed_seq seq{static_cast<std::uint32_t>(cfg_.rng_seed),
                          static_cast<std::uint32_t>(cfg_.rng_seed >> 32),
                          static_cast<std::uint32_t>(index),
                          static_cast<std::uint32_t>(static_cast<std::uint64_t>(index) >> 32)};
        std::mt19937_64 rng(seq);
        EvolutionOperator op = pick_operator(cfg_.operator_weights, rng);
        std::vector<SeedExample> seeds;
        if (seed_arity(op) == 2) {
            auto [a, b] = sample_pair(store_, rng);
            seeds = {std::move(a), std::move(b)};
        } else {
            seeds = {sample_seed(store_, rng)};
        }

        IterationOutcome out;
        SeedExample& rec = out.record;
        rec.id = id;
        rec.lineage.op = std::string(to_string(op));
        rec.lineage.iteration = lineage_iteration;
        for (const auto& s : seeds) rec.lineage.parent_ids.push_back(s.id);

        std::optional<LlmChecker> llm;
        if (cfg_.llm_checks) llm.emplace(LlmChecker{backend_, ledger_, templates_});
        const LlmChecker* llm_ptr = llm ? &*llm : nullptr;

        auto discard = [&](const CheckReport& why) {
            rec.status = RecordStatus::Discarded;
            rec.checks.push_back(why);
            return out;
        };

        // Description phase.
        std::string description;
        try {
            description = evolve(backend_, make_context(op, seeds, templates_), ledger_, templates_);
        } catch (const BackendError& e) {
            ++out.backend_errors;
            return discard(CheckReport::fail(Stage::Description,
                                             std::string("backend error: ") + e.what(), CheckMode::Llm));
        }
        auto desc = validate_with_regeneration(
            description,
            [&](const std::string& q) { return guarded(Stage::Description, [&] {
                                            return run_description_checks(q, llm_ptr);
                                        }, out); },
            [&](const std::string& q, const std::string& err) {
                return build_description_regeneration_prompt(templates_, q, err);
            },
            backend_, ledger_, Phase::Description, cfg_.desc_retry_limit);
        out.backend_errors += desc.backend_errors;
        rec.description = desc.candidate;
        rec.checks = desc.reports;
        if (!desc.passed) {
            rec.status = RecordStatus::Discarded;
            return out;
        }

        // Solution phase.
        std::string solution;
        try {
            solution = generate_solution(backend_, rec.description, seeds, op, ledger_, templates_);
        } catch (const BackendError& e) {
            ++out.backend_errors;
            return discard(CheckReport::fail(Stage::Program, std::string("backend error: ") + e.what(),
                                             CheckMode::Llm));
        }
        auto sol = validate_with_regeneration(
            solution,
            [&](const std::string& s) { return guarded(Stage::Constraints, [&] {
                                            return run_solution_checks(rec.description, s,
                                                                       cfg_.program, llm_ptr);
                                        }, out); },
            [&](const std::string& s, const std::string& err) {
                return build_solution_regeneration_prompt(templates_, rec.description, s, err);
            },
            backend_, ledger_, Phase::Solution, cfg_.sol_retry_limit);
        out.backend_errors += sol.backend_errors;
        rec.checks.insert(rec.checks.end(), sol.reports.begin(), sol.reports.end());
        if (!sol.passed) {
            auto split = split_fence(sol.candidate);
            rec.narrative = std::string(split.narrative);
            rec.model = split.model;
            rec.status = RecordStatus::Discarded;
            return out;
        }
        Solution parsed = parse_solution_text(sol.candidate);
        rec.narrative = parsed.narrative;
        rec.model = parsed.model_source;
        rec.program_output = sol.objective;
        rec.status = RecordStatus::Active;
        return out;
    }

private:
    // LLM checker calls may fail; that counts as a failed check, not an abort.
    template <typename Fn>
    StageOutcome guarded(Stage stage, Fn&& fn, IterationOutcome& out) {
        try {
            return fn();
        } catch (const BackendError& e) {
            ++out.backend_errors;
            StageOutcome o;
            o.reports.push_back(
                CheckReport::fail(stage, std::string("backend error: ") + e.what(), CheckMode::Llm));
            return o;
        }
    }

    CorpusStore& store_;
    Backend& backend_;
    BudgetLedger& ledger_;
    const CampaignConfig& cfg_;
    const TemplateSet& templates_;
};

std::string generated_id(std::size_t n) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "gen-%06zu", n);
    return buf;
}

}  // namespace

CampaignReport run_campaign(CorpusStore& store, Backend& backend, const CampaignConfig& cfg,
                            const TemplateSet& templates) {
    cfg.validate();
    CampaignReport report;
    for (auto op : kAllOperators) report.per_operator[std::string(to_string(op))];
    if (cfg.iterations == 0) return report;

    std::size_t active = store.active_count();
    if (active < 1) throw PreconditionError("corpus has no active records to evolve");
    double combination_weight = cfg.operator_weights[static_cast<std::size_t>(EvolutionOperator::Combination)];
    if (combination_weight > 0 && active < 2)
        throw PreconditionError("combination needs at least two active records");

    BudgetLedger ledger;
    const std::size_t base = store.size();
    std::mutex report_mutex;

    auto record = [&](const IterationOutcome& o) {
        std::string id = store.append(o.record);
        std::lock_guard lock(report_mutex);
        ++report.iterations;
        auto& s = report.per_operator[o.record.lineage.op];
        ++s.attempted;
        if (o.record.status == RecordStatus::Active) {
            ++s.survived;
            ++report.survived;
        } else {
            ++report.discarded;
        }
        report.backend_errors += o.backend_errors;
        report.record_ids.push_back(id);
    };

    auto run_one = [&](long i) {
        Iteration it(store, backend, ledger, cfg, templates);
        std::size_t n = base + static_cast<std::size_t>(i);
        record(it.run(i, generated_id(n), static_cast<long>(n)));
    };

    if (cfg.workers == 1) {
        for (long i = 0; i < cfg.iterations; ++i) run_one(i);
    } else {
        std::atomic<long> next{0};
        std::atomic<bool> failed{false};
        std::exception_ptr error;
        std::mutex error_mutex;
        std::vector<std::thread> pool;
        int threads = static_cast<int>(std::min<long>(cfg.workers, cfg.iterations));
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (long i; !failed && (i = next++) < cfg.iterations;) {
                    try {
                        run_one(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                        failed = true;
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        if (error) std::rethrow_exception(error);
    }
    report.description_usage = ledger.phase(Phase::Description);
    report.solution_usage = ledger.phase(Phase::Solution);
    return report;
}

}  // namespace orsynth
