#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace orsynth {

class TemplateError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Prompt templates (text with {{slot}} markers) plus the curated two-shot
// examples, keyed by name. The built-in set is compiled into the binary from
// the repository's templates/ directory.
class TemplateSet {
public:
    static const TemplateSet& builtin();
    // Same layout as templates/: <name>.txt files and shots.json. Missing files
    // fall back to the built-in set.
    static TemplateSet from_directory(const std::filesystem::path& dir);

    const std::string& text(std::string_view name) const;
    // Two-shot examples for `key` (an operator name or a regeneration kind).
    const std::vector<std::string>& shots(std::string_view key) const;
    bool has_shots(std::string_view key) const;

private:
    std::map<std::string, std::string, std::less<>> texts_;
    std::map<std::string, std::vector<std::string>, std::less<>> shots_;
};

// Replaces every {{slot}} with its value. Throws TemplateError when the
// template references a slot that `values` does not provide.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

// Slot names referenced by a template, in order of first appearance.
std::vector<std::string> template_slots(std::string_view tmpl);

}  // namespace orsynth
