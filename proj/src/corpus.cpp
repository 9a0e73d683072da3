#include "orsynth/corpus.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <mutex>
#include <set>

#include "orsynth/model_ir.hpp"
#include "orsynth/operators.hpp"

namespace orsynth {

using nlohmann::json;
using nlohmann::ordered_json;

const char* const kTrainingInstruction =
    "Below is an operations research problem. Formulate a mathematical model for it, then "
    "write the model in optir form so that it can be solved.";

ordered_json to_json(const CheckReport& report) {
    ordered_json j;
    j["stage"] = to_string(report.stage);
    j["verdict"] = to_string(report.verdict);
    j["error_text"] = report.error_text;
    j["mode"] = to_string(report.mode);
    if (!report.warnings.empty()) j["warnings"] = report.warnings;
    return j;
}

CheckReport check_report_from_json(const json& j) {
    try {
        CheckReport r;
        r.stage = stage_from_string(j.at("stage").get<std::string>());
        r.verdict = verdict_from_string(j.at("verdict").get<std::string>());
        r.error_text = j.value("error_text", std::string{});
        r.mode = mode_from_string(j.value("mode", std::string("deterministic")));
        if (j.contains("warnings")) r.warnings = j.at("warnings").get<std::vector<std::string>>();
        return r;
    } catch (const std::exception& e) {
        throw InvalidRecord(std::string("malformed check report: ") + e.what());
    }
}

ordered_json to_json(const SeedExample& r) {
    ordered_json j;
    j["id"] = r.id;
    j["description"] = r.description;
    j["model"] = r.model;
    j["narrative"] = r.narrative;
    j["program_output"] = r.program_output ? ordered_json(*r.program_output) : ordered_json(nullptr);
    j["lineage"] = {{"parent_ids", r.lineage.parent_ids},
                    {"operator", r.lineage.op},
                    {"iteration", r.lineage.iteration}};
    j["status"] = r.status == RecordStatus::Active ? "active" : "discarded";
    ordered_json checks = ordered_json::array();
    for (const auto& c : r.checks) checks.push_back(to_json(c));
    j["checks"] = std::move(checks);
    if (r.supersedes) j["supersedes"] = *r.supersedes;
    return j;
}

SeedExample record_from_json(const json& j) {
    try {
        SeedExample r;
        r.id = j.at("id").get<std::string>();
        r.description = j.at("description").get<std::string>();
        r.model = j.at("model").get<std::string>();
        r.narrative = j.value("narrative", std::string{});
        if (j.contains("program_output") && !j.at("program_output").is_null())
            r.program_output = j.at("program_output").get<double>();
        if (j.contains("lineage")) {
            const auto& l = j.at("lineage");
            r.lineage.parent_ids = l.value("parent_ids", std::vector<std::string>{});
            r.lineage.op = l.value("operator", std::string(kSeedOperator));
            r.lineage.iteration = l.value("iteration", 0L);
        }
        auto status = j.value("status", std::string("active"));
        if (status == "active")
            r.status = RecordStatus::Active;
        else if (status == "discarded")
            r.status = RecordStatus::Discarded;
        else
            throw InvalidRecord("unknown status '" + status + "'");
        if (j.contains("checks"))
            for (const auto& c : j.at("checks")) r.checks.push_back(check_report_from_json(c));
        if (j.contains("supersedes") && !j.at("supersedes").is_null())
            r.supersedes = j.at("supersedes").get<std::string>();
        return r;
    } catch (const InvalidRecord&) {
        throw;
    } catch (const std::exception& e) {
        throw InvalidRecord(e.what());
    }
}

std::vector<std::string> record_violations(const SeedExample& r) {
    std::vector<std::string> out;
    if (r.id.empty()) out.push_back("record id is empty");

    const auto& op = r.lineage.op;
    std::size_t parents = r.lineage.parent_ids.size();
    if (op == kSeedOperator) {
        if (parents != 0) out.push_back("seed records have no parents");
    } else if (auto evo = operator_from_string(op)) {
        if (parents != seed_arity(*evo))
            out.push_back("operator " + op + " requires " + std::to_string(seed_arity(*evo)) +
                          " parent(s), found " + std::to_string(parents));
    } else {
        out.push_back("unknown lineage operator '" + op + "'");
    }
    if (r.lineage.iteration < 0) out.push_back("lineage iteration is negative");

    if (r.status == RecordStatus::Active) {
        if (r.supersedes) out.push_back("a tombstone must have status discarded");
        try {
            (void)parse_model(r.model);
        } catch (const std::exception& e) {
            out.push_back(std::string("active record model does not parse: ") + e.what());
        }
        if (op != kSeedOperator) {
            for (auto stage : {Stage::Description, Stage::Variables, Stage::Constraints,
                               Stage::Program}) {
                bool passed = std::any_of(r.checks.begin(), r.checks.end(), [&](const auto& c) {
                    return c.stage == stage && c.passed();
                });
                if (!passed)
                    out.push_back("active record lacks a passing " + std::string(to_string(stage)) +
                                  " check");
            }
        }
    } else {
        bool has_failure = std::any_of(r.checks.begin(), r.checks.end(),
                                       [](const auto& c) { return !c.passed(); });
        if (!has_failure) out.push_back("discarded record carries no failing check report");
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string s;
    for (const auto& i : items) s += (s.empty() ? "" : "; ") + i;
    return s;
}

void append_line_durably(const std::filesystem::path& path, const std::string& line) {
    int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
    if (fd < 0) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
    std::string data = line + "\n";
    const char* p = data.data();
    std::size_t left = data.size();
    while (left > 0) {
        ssize_t n = ::write(fd, p, left);
        if (n < 0) {
            if (errno == EINTR) continue;
            int err = errno;
            ::close(fd);
            throw IoError("write to " + path.string() + " failed: " + std::strerror(err));
        }
        p += n;
        left -= static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0) {
        int err = errno;
        ::close(fd);
        throw IoError("fsync of " + path.string() + " failed: " + std::strerror(err));
    }
    ::close(fd);
}

}  // namespace

CorpusStore::CorpusStore(std::filesystem::path path)
    : path_(std::move(path)), mutex_(std::make_unique<std::shared_mutex>()) {}

CorpusStore CorpusStore::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read corpus " + path.string());
    CorpusStore store(path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto record = record_from_json(json::parse(line));
            store.check_admissible(record);
            store.admit(record);
        } catch (const std::exception& e) {
            store.corrupt_.push_back({line_no, e.what()});
        }
    }
    return store;
}

CorpusStore CorpusStore::create(const std::filesystem::path& path) {
    if (std::filesystem::exists(path)) throw IoError("corpus already exists: " + path.string());
    std::ofstream out(path);
    if (!out) throw IoError("cannot create corpus " + path.string());
    return CorpusStore(path);
}

void CorpusStore::check_admissible(const SeedExample& record) const {
    auto violations = record_violations(record);
    if (!violations.empty()) throw InvalidRecord("record " + record.id + ": " + join(violations));
    if (contains_locked(record.id)) throw DuplicateId(record.id);
    for (const auto& parent : record.lineage.parent_ids)
        if (!contains_locked(parent))
            throw InvalidRecord("record " + record.id + ": unknown parent " + parent);
    if (record.supersedes && !contains_locked(*record.supersedes))
        throw InvalidRecord("record " + record.id + ": tombstone for unknown id " + *record.supersedes);
}

void CorpusStore::admit(const SeedExample& record) {
    if (record.supersedes) retired_.insert(*record.supersedes);
    records_.push_back(record);
    ids_.insert(record.id);
}

bool CorpusStore::contains_locked(const std::string& id) const {
    return ids_.count(id) > 0;
}

bool CorpusStore::is_active_locked(const SeedExample& record) const {
    return record.status == RecordStatus::Active &&
           !retired_.count(record.id);
}

std::string CorpusStore::append(const SeedExample& record) {
    std::unique_lock lock(*mutex_);
    check_admissible(record);
    append_line_durably(path_, to_json(record).dump());
    admit(record);
    return record.id;
}

std::string CorpusStore::discard(const std::string& id, const std::string& reason) {
    std::optional<SeedExample> original = find(id);
    if (!original) throw InvalidRecord("cannot discard unknown record " + id);
    SeedExample tomb = *original;
    tomb.id = id + "~discarded";
    tomb.status = RecordStatus::Discarded;
    tomb.supersedes = id;
    tomb.checks.push_back(CheckReport::fail(Stage::Program, reason));
    return append(tomb);
}

std::vector<SeedExample> CorpusStore::snapshot() const {
    std::shared_lock lock(*mutex_);
    return records_;
}

std::vector<SeedExample> CorpusStore::active() const {
    std::shared_lock lock(*mutex_);
    std::vector<SeedExample> out;
    for (const auto& r : records_)
        if (is_active_locked(r)) out.push_back(r);
    return out;
}

std::size_t CorpusStore::size() const {
    std::shared_lock lock(*mutex_);
    return records_.size();
}

std::size_t CorpusStore::active_count() const {
    std::shared_lock lock(*mutex_);
    return static_cast<std::size_t>(std::count_if(
        records_.begin(), records_.end(), [&](const auto& r) { return is_active_locked(r); }));
}

std::optional<SeedExample> CorpusStore::find(const std::string& id) const {
    std::shared_lock lock(*mutex_);
    for (const auto& r : records_)
        if (r.id == id) return r;
    return std::nullopt;
}

bool CorpusStore::contains(const std::string& id) const {
    std::shared_lock lock(*mutex_);
    return contains_locked(id);
}

// ---------------------------------------------------------------------------

SeedExample sample_seed(const CorpusStore& store, std::mt19937_64& rng) {
    auto pool = store.active();
    if (pool.empty()) throw EmptyCorpus("no active records to sample from");
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    return pool[pick(rng)];
}

std::pair<SeedExample, SeedExample> sample_pair(const CorpusStore& store, std::mt19937_64& rng) {
    auto pool = store.active();
    if (pool.size() < 2) throw EmptyCorpus("combination needs at least two active records");
    std::uniform_int_distribution<std::size_t> first(0, pool.size() - 1);
    std::uniform_int_distribution<std::size_t> second(0, pool.size() - 2);
    std::size_t i = first(rng);
    std::size_t j = second(rng);
    if (j >= i) ++j;
    return {pool[i], pool[j]};
}

std::size_t export_training(const CorpusStore& store, const std::filesystem::path& out_path) {
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + out_path.string());
    std::size_t count = 0;
    for (const auto& r : store.active()) {
        std::string output = r.narrative.empty() ? r.model : r.narrative + "\n\n" + r.model;
        ordered_json j;
        j["instruction"] = kTrainingInstruction;
        j["input"] = r.description;
        j["output"] = output;
        out << j.dump() << '\n';
        ++count;
    }
    out.flush();
    if (!out) throw IoError("write to " + out_path.string() + " failed");
    return count;
}

}  // namespace orsynth
