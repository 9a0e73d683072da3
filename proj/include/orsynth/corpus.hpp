#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "orsynth/check_report.hpp"

namespace orsynth {

enum class RecordStatus { Active, Discarded };

struct Lineage {
    std::vector<std::string> parent_ids;
    std::string op = "seed";  // evolution operator name or "seed"
    long iteration = 0;
    bool operator==(const Lineage&) const = default;
};

// One corpus line: a problem description paired with its model.
struct SeedExample {
    std::string id;
    std::string description;
    std::string model;      // `.optir` source
    std::string narrative;  // prose formulation, may be empty
    std::optional<double> program_output;
    Lineage lineage;
    RecordStatus status = RecordStatus::Active;
    std::vector<CheckReport> checks;
    // Set on tombstones: id of the earlier record this line retires.
    std::optional<std::string> supersedes;

    bool operator==(const SeedExample&) const = default;
};

class CorpusError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};
class DuplicateId : public CorpusError {
public:
    explicit DuplicateId(const std::string& id) : CorpusError("duplicate record id " + id) {}
};
class InvalidRecord : public CorpusError {
    using CorpusError::CorpusError;
};
class IoError : public CorpusError {
    using CorpusError::CorpusError;
};
class EmptyCorpus : public CorpusError {
    using CorpusError::CorpusError;
};

struct CorruptRecord {
    std::size_t line = 0;
    std::string message;
};

nlohmann::ordered_json to_json(const CheckReport& report);
CheckReport check_report_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const SeedExample& record);
// Throws InvalidRecord on schema violations.
SeedExample record_from_json(const nlohmann::json& j);

// Invariant check shared by load and append; empty when the record is valid.
std::vector<std::string> record_violations(const SeedExample& record);

// Append-only JSON Lines store. Appends are serialized and fsync'ed before
// returning; status changes are recorded as tombstones, never by rewriting.
class CorpusStore {
public:
    // Loads an existing file. Corrupt lines are skipped and listed in corrupt_records().
    static CorpusStore load(const std::filesystem::path& path);
    // Starts a new empty file (fails if the file already exists).
    static CorpusStore create(const std::filesystem::path& path);

    CorpusStore(CorpusStore&&) noexcept = default;
    CorpusStore& operator=(CorpusStore&&) noexcept = default;

    std::string append(const SeedExample& record);
    // Appends a tombstone retiring `id`; returns the tombstone id.
    std::string discard(const std::string& id, const std::string& reason);

    const std::filesystem::path& path() const { return path_; }
    std::vector<SeedExample> snapshot() const;
    std::vector<SeedExample> active() const;
    std::size_t size() const;
    std::size_t active_count() const;
    std::optional<SeedExample> find(const std::string& id) const;
    bool contains(const std::string& id) const;
    const std::vector<CorruptRecord>& corrupt_records() const { return corrupt_; }

private:
    explicit CorpusStore(std::filesystem::path path);
    // Both require the caller to hold the lock.
    void check_admissible(const SeedExample& record) const;
    void admit(const SeedExample& record);
    bool contains_locked(const std::string& id) const;
    bool is_active_locked(const SeedExample& record) const;

    std::filesystem::path path_;
    std::vector<SeedExample> records_;
    std::unordered_set<std::string> ids_;
    std::unordered_set<std::string> retired_;  // ids retired by tombstones
    std::vector<CorruptRecord> corrupt_;
    std::unique_ptr<std::shared_mutex> mutex_;
};

SeedExample sample_seed(const CorpusStore& store, std::mt19937_64& rng);
// Two distinct active records, in random order.
std::pair<SeedExample, SeedExample> sample_pair(const CorpusStore& store, std::mt19937_64& rng);

// Fixed instruction placed on every exported training example.
extern const char* const kTrainingInstruction;

// Writes {instruction, input, output} lines for active records; returns the count.
std::size_t export_training(const CorpusStore& store, const std::filesystem::path& out);

}  // namespace orsynth
