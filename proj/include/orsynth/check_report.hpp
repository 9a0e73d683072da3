#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace orsynth {

enum class Stage { Description, Variables, Constraints, Program };
enum class Verdict { Pass, Fail };
enum class CheckMode { Deterministic, Llm };

// Outcome of one checker stage. A failing report always carries error text
// that can be pasted into a regeneration prompt.
struct CheckReport {
    Stage stage = Stage::Description;
    Verdict verdict = Verdict::Pass;
    std::string error_text;
    CheckMode mode = CheckMode::Deterministic;
    std::vector<std::string> warnings;

    bool passed() const { return verdict == Verdict::Pass; }

    static CheckReport pass(Stage stage, CheckMode mode = CheckMode::Deterministic);
    static CheckReport fail(Stage stage, std::string error_text,
                            CheckMode mode = CheckMode::Deterministic);
    // Pass when `violations` is empty, otherwise fail with one violation per line.
    static CheckReport from_violations(Stage stage, const std::vector<std::string>& violations,
                                       CheckMode mode = CheckMode::Deterministic);

    bool operator==(const CheckReport&) const = default;
};

std::string_view to_string(Stage stage);
std::string_view to_string(Verdict verdict);
std::string_view to_string(CheckMode mode);
Stage stage_from_string(std::string_view text);
Verdict verdict_from_string(std::string_view text);
CheckMode mode_from_string(std::string_view text);

}  // namespace orsynth
