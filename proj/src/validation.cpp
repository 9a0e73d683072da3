#include "orsynth/validation.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

namespace orsynth {

namespace {

std::string_view trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string join_lines(const std::vector<std::string>& items) {
    std::string s;
    for (const auto& i : items) s += (s.empty() ? "" : "\n") + i;
    return s;
}

bool close_enough(double p, double q) {
    return std::fabs(p - q) <= 1e-9 * std::max({1.0, std::fabs(p), std::fabs(q)});
}

bool is_binary_like(const VariableDecl* v) {
    if (!v) return false;
    if (v->kind == VarKind::Binary) return true;
    return v->kind == VarKind::Integer && v->lower >= 0.0 && v->upper <= 1.0;
}

// sum coef * var >= rhs
struct GeRow {
    std::string name;
    std::map<std::string, double> coef;
    double rhs = 0.0;
};

std::vector<GeRow> ge_rows(const OptModel& model) {
    std::vector<GeRow> rows;
    for (const auto& c0 : model.constraints) {
        Constraint c = normalized(c0);
        GeRow row{c.name, {}, c.rhs};
        for (const auto& t : c.expr.terms) row.coef[t.var] += t.coef;
        auto negated = [](GeRow r) {
            for (auto& [_, v] : r.coef) v = -v;
            r.rhs = -r.rhs;
            return r;
        };
        if (c.sense == Sense::Ge || c.sense == Sense::Eq) rows.push_back(row);
        if (c.sense == Sense::Le || c.sense == Sense::Eq) rows.push_back(negated(row));
    }
    return rows;
}

std::string fmt(double v) { return format_number(v); }

std::string requirement_text(const AbsGe& r) {
    return "abs_ge(" + r.xi + ", " + r.xj + ", " + fmt(r.a) + ")";
}

}  // namespace

// ---------------------------------------------------------------------------

Solution parse_solution_text(std::string_view text) {
    static constexpr std::string_view open = "```optir";
    auto start = text.find(open);
    if (start == std::string_view::npos)
        throw SolutionFormatError("solution has no ```optir model block");
    auto body = text.find('\n', start);
    if (body == std::string_view::npos)
        throw SolutionFormatError("```optir model block is not terminated");
    ++body;
    auto end = text.find("```", body);
    if (end == std::string_view::npos)
        throw SolutionFormatError("```optir model block is not terminated");
    auto after = text.find('\n', end);
    std::string_view tail = after == std::string_view::npos ? std::string_view{} : text.substr(after + 1);

    Solution sol;
    sol.model_source = std::string(text.substr(body, end - body));
    sol.model = parse_model(sol.model_source);

    static const std::regex answer_re(R"(^\s*ANSWER:\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*$)");
    std::string narrative(trim(text.substr(0, start)));
    std::istringstream rest{std::string(tail)};
    std::string line, kept;
    while (std::getline(rest, line)) {
        std::smatch m;
        if (std::regex_match(line, m, answer_re)) {
            sol.declared_answer = std::stod(m[1].str());
            continue;
        }
        kept += line + "\n";
    }
    auto trailing = trim(kept);
    if (!trailing.empty()) narrative += (narrative.empty() ? "" : "\n\n") + std::string(trailing);
    sol.narrative = std::move(narrative);
    return sol;
}

CheckReport parse_checker_reply(Stage stage, std::string_view reply) {
    auto text = trim(reply);
    if (text.rfind("There are no errors found", 0) == 0) return CheckReport::pass(stage, CheckMode::Llm);
    auto pos = text.find("ERROR:");
    if (pos != std::string_view::npos) {
        auto err = trim(text.substr(pos + 6));
        return CheckReport::fail(stage, err.empty() ? std::string(text) : std::string(err),
                                 CheckMode::Llm);
    }
    return CheckReport::fail(stage, std::string(text), CheckMode::Llm);
}

namespace {

CheckReport llm_check(const LlmChecker& llm, Stage stage, Phase phase, std::string_view tmpl,
                      const std::map<std::string, std::string>& slots) {
    CompletionRequest req;
    req.prompt = render_template(llm.templates.text(tmpl), slots);
    return parse_checker_reply(stage, complete(llm.backend, req, llm.ledger, phase));
}

}  // namespace

CheckReport check_description(std::string_view description, const LlmChecker* llm) {
    auto text = trim(description);
    if (text.empty()) return CheckReport::fail(Stage::Description, "description is empty");
    bool has_digit = std::any_of(text.begin(), text.end(),
                                 [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
    if (!has_digit)
        return CheckReport::fail(Stage::Description,
                                 "description gives no numerical value for its parameters");
    if (!llm) return CheckReport::pass(Stage::Description);
    return llm_check(*llm, Stage::Description, Phase::Description, "check_description",
                     {{"problem", std::string(description)}});
}

CheckReport check_variables(const OptModel& model) {
    auto violations = structural_violations(model);
    std::set<std::string, std::less<>> used;
    for (const auto& c : model.constraints)
        for (const auto& t : c.expr.terms) used.insert(t.var);
    for (const auto& o : model.objectives)
        for (const auto& t : o.expr.terms) used.insert(t.var);
    for (const auto& v : model.variables)
        if (!used.count(v.name)) violations.push_back("unused variable " + v.name);
    for (const auto& req : model.requirements) {
        if (const auto* k = std::get_if<KWay>(&req)) {
            for (const auto& s : k->selectors) {
                const VariableDecl* v = model.find(s);
                if (v && !is_binary_like(v)) {
                    std::string msg = "kway selector " + s + " is not binary";
                    if (std::find(violations.begin(), violations.end(), msg) == violations.end())
                        violations.push_back(msg);
                }
            }
        }
    }
    return CheckReport::from_violations(Stage::Variables, violations);
}

CheckReport check_variables(const Solution& solution) { return check_variables(solution.model); }

CheckReport check_bigm_requirement(const OptModel& model, const AbsGe& req) {
    if (req.a == 0.0) return CheckReport::pass(Stage::Constraints);
    const VariableDecl* vi = model.find(req.xi);
    const VariableDecl* vj = model.find(req.xj);
    if (!vi || !vj)
        return CheckReport::fail(Stage::Constraints,
                                 requirement_text(req) + " references an undeclared variable");

    // Orientation 0: xi - xj + M y >= a and xj - xi - M y >= a - M.
    // Orientation 1 swaps xi and xj (equivalently y and 1 - y).
    struct Branches {
        std::vector<double> first, second;
    };
    std::map<std::pair<int, std::string>, Branches> found;
    std::vector<std::string> one_sided;

    for (const auto& row : ge_rows(model)) {
        auto it_i = row.coef.find(req.xi);
        auto it_j = row.coef.find(req.xj);
        if (it_i == row.coef.end() || it_j == row.coef.end()) continue;
        double ci = it_i->second, cj = it_j->second;
        if (ci == 0.0 || !close_enough(ci, -cj)) continue;
        double s = std::fabs(ci);
        int sigma = ci > 0 ? 1 : -1;
        double r = row.rhs / s;
        if (row.coef.size() == 2) {
            if (r >= req.a - 1e-9 * std::max(1.0, req.a)) {
                std::string lhs = sigma > 0 ? req.xi + " - " + req.xj : req.xj + " - " + req.xi;
                one_sided.push_back(row.name + " (" + lhs + " >= " + fmt(r) + ")");
            }
            continue;
        }
        if (row.coef.size() != 3) continue;
        std::string y;
        double t = 0.0;
        for (const auto& [name, v] : row.coef)
            if (name != req.xi && name != req.xj) y = name, t = v / s;
        if (t > 0 && close_enough(r, req.a)) {
            found[{sigma > 0 ? 0 : 1, y}].first.push_back(t);
        } else if (t < 0 && close_enough(r, req.a + t)) {
            found[{sigma > 0 ? 1 : 0, y}].second.push_back(-t);
        }
    }

    auto branch_text = [&](int orient, bool first) {
        const std::string& p = orient == 0 ? req.xi : req.xj;
        const std::string& q = orient == 0 ? req.xj : req.xi;
        return first ? p + " - " + q + " >= a - M*y" : q + " - " + p + " >= a - M*(1 - y)";
    };

    double span = std::max(vi->upper - vj->lower, vj->upper - vi->lower);
    std::vector<std::string> problems;
    std::vector<std::string> warnings;
    bool any_pair = false;
    for (const auto& [key, br] : found) {
        for (double m1 : br.first) {
            for (double m2 : br.second) {
                if (!close_enough(m1, m2)) continue;
                any_pair = true;
                const std::string& y = key.second;
                if (!is_binary_like(model.find(y))) {
                    problems.push_back("switch variable " + y + " in " + requirement_text(req) +
                                       " is not binary");
                    continue;
                }
                if (!std::isfinite(span)) {
                    CheckReport ok = CheckReport::pass(Stage::Constraints);
                    ok.warnings.push_back("cannot verify M for " + requirement_text(req) + ": " +
                                          req.xi + " or " + req.xj + " is unbounded");
                    return ok;
                }
                double need = req.a + span;
                if (m1 < need && !close_enough(m1, need)) {
                    problems.push_back("M = " + fmt(m1) + " is too small for " +
                                       requirement_text(req) + ": needs M >= a + span = " +
                                       fmt(need));
                    continue;
                }
                return CheckReport::pass(Stage::Constraints);
            }
        }
    }
    if (!any_pair) {
        bool has_first = false, has_second = false;
        int orient = 0;
        for (const auto& [key, br] : found)
            if (!br.first.empty() && !has_first) has_first = true, orient = key.first;
        if (!has_first)
            for (const auto& [key, br] : found)
                if (!br.second.empty() && !has_second) has_second = true, orient = key.first;
        if (has_first) {
            problems.push_back("missing branch " + branch_text(orient, false) + " for " +
                               requirement_text(req));
        } else if (has_second) {
            problems.push_back("missing branch " + branch_text(orient, true) + " for " +
                               requirement_text(req));
        } else {
            for (const auto& c : one_sided)
                problems.push_back("constraint " + c + " enforces only one side of " +
                                   requirement_text(req));
            problems.push_back("missing branch " + branch_text(0, true) + " for " +
                               requirement_text(req));
            problems.push_back("missing branch " + branch_text(0, false) + " for " +
                               requirement_text(req));
        }
    }
    auto report = CheckReport::fail(Stage::Constraints, join_lines(problems));
    report.warnings = std::move(warnings);
    return report;
}

CheckReport check_kway_requirement(const OptModel& model, const KWay& req) {
    const std::size_t n = req.selectors.size();
    if (req.k >= static_cast<long>(n)) return CheckReport::pass(Stage::Constraints);
    auto rows = ge_rows(model);
    std::vector<std::string> problems;

    std::set<std::string> selector_set(req.selectors.begin(), req.selectors.end());
    bool cardinality = false;
    for (const auto& row : rows) {
        if (row.coef.size() != selector_set.size()) continue;
        double c = 0.0;
        bool ok = true;
        for (const auto& [name, v] : row.coef) {
            if (!selector_set.count(name) || v >= 0) { ok = false; break; }
            if (c == 0.0) c = -v;
            else if (!close_enough(-v, c)) { ok = false; break; }
        }
        if (!ok) continue;
        double bound = -row.rhs / c;
        double k = static_cast<double>(req.k);
        if (bound <= k || close_enough(bound, k)) { cardinality = true; break; }
    }
    if (!cardinality) {
        std::string sum;
        for (const auto& s : req.selectors) sum += (sum.empty() ? "" : " + ") + s;
        problems.push_back("missing cardinality constraint " + sum + " <= " + std::to_string(req.k));
    }

    for (std::size_t i = 0; i < n && i < req.linked.size(); ++i) {
        const std::string& x = req.linked[i];
        const std::string& y = req.selectors[i];
        bool linked = false;
        for (const auto& row : rows) {
            if (row.coef.size() != 2 || !row.coef.count(x) || !row.coef.count(y)) continue;
            double cx = row.coef.at(x), cy = row.coef.at(y);
            if (cx >= 0) continue;
            double s = -cx;
            if (cy / s > 0 && std::fabs(row.rhs / s) <= 1e-9) { linked = true; break; }
        }
        if (!linked)
            problems.push_back("no linking constraint for " + x + " (" + x + " - M*" + y + " <= 0)");
    }
    return CheckReport::from_violations(Stage::Constraints, problems);
}

CheckReport check_constraints(const Solution& solution, std::string_view problem,
                              std::string_view solution_text, const LlmChecker* llm) {
    std::vector<std::string> failures, warnings;
    for (const auto& req : solution.model.requirements) {
        CheckReport r = std::visit(
            [&](const auto& q) -> CheckReport {
                using T = std::decay_t<decltype(q)>;
                if constexpr (std::is_same_v<T, AbsGe>) return check_bigm_requirement(solution.model, q);
                else return check_kway_requirement(solution.model, q);
            },
            req);
        if (!r.passed()) failures.push_back(r.error_text);
        warnings.insert(warnings.end(), r.warnings.begin(), r.warnings.end());
    }
    CheckReport out = CheckReport::from_violations(Stage::Constraints, failures);
    out.warnings = warnings;
    if (!out.passed() || !llm) return out;
    std::string shown = solution_text.empty() ? solution.narrative + "\n\n```optir\n" +
                                                    solution.model_source + "```"
                                              : std::string(solution_text);
    CheckReport reply = llm_check(*llm, Stage::Constraints, Phase::Solution, "check_constraints",
                                  {{"problem", std::string(problem)}, {"solution", shown}});
    reply.warnings = warnings;
    return reply;
}

// ---------------------------------------------------------------------------

NonzeroExit::NonzeroExit(int code, std::string output)
    : std::runtime_error("program exited with code " + std::to_string(code)),
      code_(code),
      output_(std::move(output)) {}

ProcessResult run_process(const std::vector<std::string>& argv, double timeout_seconds) {
    if (argv.empty()) throw std::invalid_argument("empty command");
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);

    int fds[2];
    int exec_fds[2];  // closed by a successful exec; carries errno otherwise
    if (::pipe2(fds, O_CLOEXEC) != 0)
        throw std::runtime_error(std::string("pipe failed: ") + std::strerror(errno));
    if (::pipe2(exec_fds, O_CLOEXEC) != 0) {
        ::close(fds[0]);
        ::close(fds[1]);
        throw std::runtime_error(std::string("pipe failed: ") + std::strerror(errno));
    }
    pid_t pid = ::fork();
    if (pid < 0) {
        for (int fd : {fds[0], fds[1], exec_fds[0], exec_fds[1]}) ::close(fd);
        throw std::runtime_error(std::string("fork failed: ") + std::strerror(errno));
    }
    if (pid == 0) {
        ::dup2(fds[1], STDOUT_FILENO);
        ::dup2(fds[1], STDERR_FILENO);
        ::execvp(args[0], args.data());
        int err = errno;
        [[maybe_unused]] auto n = ::write(exec_fds[1], &err, sizeof(err));
        ::_exit(127);
    }
    ::close(fds[1]);
    ::close(exec_fds[1]);
    int exec_errno = 0;
    ssize_t got;
    do {
        got = ::read(exec_fds[0], &exec_errno, sizeof(exec_errno));
    } while (got < 0 && errno == EINTR);
    ::close(exec_fds[0]);
    if (got == static_cast<ssize_t>(sizeof(exec_errno))) {
        ::close(fds[0]);
        ::waitpid(pid, nullptr, 0);
        throw std::runtime_error("cannot run " + argv[0] + ": " + std::strerror(exec_errno));
    }

    using clock = std::chrono::steady_clock;
    auto deadline = clock::now() + std::chrono::duration_cast<clock::duration>(
                                       std::chrono::duration<double>(timeout_seconds));
    auto kill_child = [&] {
        ::kill(pid, SIGKILL);
        ::waitpid(pid, nullptr, 0);
        ::close(fds[0]);
        throw ProgramTimeout("program timed out after " + format_number(timeout_seconds) + " s");
    };

    ProcessResult result;
    char buf[4096];
    for (;;) {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now());
        if (left.count() <= 0) kill_child();
        pollfd p{fds[0], POLLIN, 0};
        int rc = ::poll(&p, 1, static_cast<int>(std::min<long long>(left.count(), 1000)));
        if (rc < 0 && errno != EINTR) break;
        if (rc <= 0) continue;
        ssize_t n = ::read(fds[0], buf, sizeof(buf));
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) break;
        result.output.append(buf, static_cast<std::size_t>(n));
    }
    ::close(fds[0]);

    int status = 0;
    for (;;) {
        pid_t w = ::waitpid(pid, &status, WNOHANG);
        if (w == pid) break;
        if (w < 0 && errno != EINTR) throw std::runtime_error("waitpid failed");
        if (clock::now() >= deadline) {
            ::kill(pid, SIGKILL);
            ::waitpid(pid, nullptr, 0);
            throw ProgramTimeout("program timed out after " + format_number(timeout_seconds) + " s");
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    return result;
}

std::optional<double> parse_objective_line(std::string_view output) {
    auto text = trim(output);
    auto nl = text.find_last_of('\n');
    auto last = trim(nl == std::string_view::npos ? text : text.substr(nl + 1));
    static constexpr std::string_view key = "OBJECTIVE ";
    if (last.rfind(key, 0) != 0) return std::nullopt;
    auto num = trim(last.substr(key.size()));
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
    if (ec != std::errc{} || ptr != num.data() + num.size()) return std::nullopt;
    return v;
}

namespace {

struct TempModelFile {
    std::filesystem::path path;
    explicit TempModelFile(const std::string& content) {
        std::string tmpl = (std::filesystem::temp_directory_path() / "orsynth-XXXXXX.optir").string();
        int fd = ::mkstemps(tmpl.data(), 6);
        if (fd < 0) throw std::runtime_error(std::string("mkstemps failed: ") + std::strerror(errno));
        path = tmpl;
        std::size_t off = 0;
        while (off < content.size()) {
            ssize_t n = ::write(fd, content.data() + off, content.size() - off);
            if (n < 0 && errno == EINTR) continue;
            if (n < 0) {
                ::close(fd);
                throw std::runtime_error("cannot write temporary model file");
            }
            off += static_cast<std::size_t>(n);
        }
        ::close(fd);
    }
    ~TempModelFile() {
        std::error_code ec;
        std::filesystem::remove(path, ec);
    }
};

}  // namespace

ProgramCheck check_program(const Solution& solution, const ProgramCheckConfig& cfg) {
    ProgramCheck out{CheckReport::pass(Stage::Program), std::nullopt};
    if (cfg.mode == ProgramMode::Builtin) {
        SolveResult res = solve(solution.model, cfg.solver);
        if (!res.optimal()) {
            out.report = CheckReport::fail(Stage::Program, std::string(to_string(res.status)));
            return out;
        }
        out.objective = res.objective;
    } else {
        if (cfg.command.empty())
            throw std::invalid_argument("subprocess program check needs a command");
        try {
            TempModelFile file(solution.model_source);
            auto argv = cfg.command;
            argv.push_back(file.path.string());
            ProcessResult pr = run_process(argv, cfg.timeout_seconds);
            if (pr.exit_code != 0) throw NonzeroExit(pr.exit_code, pr.output);
            out.objective = parse_objective_line(pr.output);
            if (!out.objective) {
                out.report = CheckReport::fail(Stage::Program,
                                               "program output has no OBJECTIVE line: " +
                                                   std::string(trim(pr.output)));
                return out;
            }
        } catch (const NonzeroExit& e) {
            std::string output(trim(e.output()));
            out.report = CheckReport::fail(Stage::Program,
                                           std::string(e.what()) + (output.empty() ? "" : ": " + output));
            return out;
        } catch (const ProgramTimeout& e) {
            out.report = CheckReport::fail(Stage::Program, e.what());
            return out;
        }
    }
    if (solution.declared_answer &&
        !answers_equivalent(*solution.declared_answer, *out.objective, cfg.comparator)) {
        out.report = CheckReport::fail(Stage::Program,
                                       "answer mismatch: declared " +
                                           format_number(*solution.declared_answer) +
                                           ", program gives " + format_number(*out.objective));
    }
    return out;
}

// ---------------------------------------------------------------------------

bool StageOutcome::passed() const {
    return !reports.empty() &&
           std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.passed(); });
}

std::string StageOutcome::error_text() const {
    for (const auto& r : reports)
        if (!r.passed()) return r.error_text;
    return {};
}

StageOutcome run_description_checks(std::string_view description, const LlmChecker* llm) {
    StageOutcome out;
    out.reports.push_back(check_description(description, llm));
    return out;
}

StageOutcome run_solution_checks(std::string_view problem, std::string_view solution_text,
                                 const ProgramCheckConfig& program, const LlmChecker* llm) {
    StageOutcome out;
    Solution sol;
    try {
        sol = parse_solution_text(solution_text);
    } catch (const SemanticError& e) {
        out.reports.push_back(CheckReport::from_violations(Stage::Variables, e.violations()));
        return out;
    } catch (const std::exception& e) {
        out.reports.push_back(CheckReport::fail(Stage::Variables,
                                                std::string("model does not parse: ") + e.what()));
        return out;
    }
    out.reports.push_back(check_variables(sol));
    if (!out.reports.back().passed()) return out;
    out.reports.push_back(check_constraints(sol, problem, solution_text, llm));
    if (!out.reports.back().passed()) return out;
    ProgramCheck pc = check_program(sol, program);
    out.reports.push_back(pc.report);
    out.objective = pc.objective;
    return out;
}

std::string build_description_regeneration_prompt(const TemplateSet& templates,
                                                  std::string_view problem, std::string_view error) {
    const auto& shots = templates.shots("regenerate_description");
    return render_template(templates.text("regenerate_description"),
                           {{"problem", std::string(problem)},
                            {"error", std::string(error)},
                            {"shot_1", shots.at(0)},
                            {"shot_2", shots.at(1)}});
}

std::string build_solution_regeneration_prompt(const TemplateSet& templates,
                                               std::string_view problem, std::string_view solution,
                                               std::string_view error) {
    const auto& shots = templates.shots("regenerate_solution");
    return render_template(templates.text("regenerate_solution"),
                           {{"problem", std::string(problem)},
                            {"solution", std::string(solution)},
                            {"error", std::string(error)},
                            {"shot_1", shots.at(0)},
                            {"shot_2", shots.at(1)}});
}

RegenerationResult validate_with_regeneration(const std::string& initial, const StageCheck& check,
                                              const RegenerationPrompt& regenerate,
                                              Backend& backend, BudgetLedger& ledger, Phase phase,
                                              int limit) {
    if (limit < 0) throw std::invalid_argument("regeneration limit must be non-negative");
    RegenerationResult r;
    r.candidate = initial;
    StageOutcome out = check(r.candidate);
    r.attempts = 1;
    r.reports = out.reports;
    std::string error = out.error_text();
    Stage failed_stage = out.reports.empty() ? Stage::Description : out.reports.back().stage;

    for (int regenerations = 0; !out.passed() && regenerations < limit; ++regenerations) {
        ++r.attempts;
        std::string next;
        try {
            CompletionRequest req;
            req.prompt = regenerate(r.candidate, error);
            next = complete(backend, req, ledger, phase);
        } catch (const BackendError& e) {
            ++r.backend_errors;
            r.reports.push_back(CheckReport::fail(failed_stage, std::string("backend error: ") + e.what(),
                                                  CheckMode::Llm));
            continue;
        }
        r.candidate = std::move(next);
        out = check(r.candidate);
        r.reports.insert(r.reports.end(), out.reports.begin(), out.reports.end());
        if (!out.passed()) {
            error = out.error_text();
            failed_stage = out.reports.back().stage;
        }
    }
    r.passed = out.passed();
    r.objective = out.objective;
    return r;
}

}  // namespace orsynth
