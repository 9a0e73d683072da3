#include "orsynth/check_report.hpp"

#include <stdexcept>

namespace orsynth {

CheckReport CheckReport::pass(Stage stage, CheckMode mode) {
    return CheckReport{stage, Verdict::Pass, {}, mode, {}};
}

CheckReport CheckReport::fail(Stage stage, std::string error_text, CheckMode mode) {
    if (error_text.empty()) error_text = "unspecified error";
    return CheckReport{stage, Verdict::Fail, std::move(error_text), mode, {}};
}

CheckReport CheckReport::from_violations(Stage stage, const std::vector<std::string>& violations,
                                         CheckMode mode) {
    if (violations.empty()) return pass(stage, mode);
    std::string text;
    for (const auto& v : violations) {
        if (!text.empty()) text += '\n';
        text += v;
    }
    return fail(stage, std::move(text), mode);
}

std::string_view to_string(Stage stage) {
    switch (stage) {
        case Stage::Description: return "description";
        case Stage::Variables: return "variables";
        case Stage::Constraints: return "constraints";
        case Stage::Program: return "program";
    }
    return "unknown";
}

std::string_view to_string(Verdict verdict) { return verdict == Verdict::Pass ? "pass" : "fail"; }

std::string_view to_string(CheckMode mode) {
    return mode == CheckMode::Deterministic ? "deterministic" : "llm";
}

Stage stage_from_string(std::string_view text) {
    if (text == "description") return Stage::Description;
    if (text == "variables") return Stage::Variables;
    if (text == "constraints") return Stage::Constraints;
    if (text == "program") return Stage::Program;
    throw std::invalid_argument("unknown check stage '" + std::string(text) + "'");
}

Verdict verdict_from_string(std::string_view text) {
    if (text == "pass") return Verdict::Pass;
    if (text == "fail") return Verdict::Fail;
    throw std::invalid_argument("unknown verdict '" + std::string(text) + "'");
}

CheckMode mode_from_string(std::string_view text) {
    if (text == "deterministic") return CheckMode::Deterministic;
    if (text == "llm") return CheckMode::Llm;
    throw std::invalid_argument("unknown check mode '" + std::string(text) + "'");
}

}  // namespace orsynth
