#include "orsynth/templates.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace orsynth {

namespace detail {
const std::map<std::string_view, std::string_view>& embedded_files();
}

namespace {

void load_shots(std::string_view json_text, std::map<std::string, std::vector<std::string>, std::less<>>& out) {
    try {
        auto j = nlohmann::json::parse(json_text);
        for (auto& [key, value] : j.items()) out[key] = value.get<std::vector<std::string>>();
    } catch (const std::exception& e) {
        throw TemplateError(std::string("malformed shots.json: ") + e.what());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw TemplateError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

const TemplateSet& TemplateSet::builtin() {
    static const TemplateSet set = [] {
        TemplateSet s;
        for (const auto& [file, content] : detail::embedded_files()) {
            std::string_view name = file;
            if (name == "shots.json") {
                load_shots(content, s.shots_);
            } else if (name.size() > 4 && name.substr(name.size() - 4) == ".txt") {
                s.texts_.emplace(std::string(name.substr(0, name.size() - 4)), std::string(content));
            }
        }
        return s;
    }();
    return set;
}

TemplateSet TemplateSet::from_directory(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw TemplateError("not a directory: " + dir.string());
    TemplateSet s = builtin();
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const auto& p = entry.path();
        if (p.filename() == "shots.json") {
            load_shots(read_file(p), s.shots_);
        } else if (p.extension() == ".txt") {
            s.texts_[p.stem().string()] = read_file(p);
        }
    }
    return s;
}

const std::string& TemplateSet::text(std::string_view name) const {
    auto it = texts_.find(name);
    if (it == texts_.end()) throw TemplateError("unknown template '" + std::string(name) + "'");
    return it->second;
}

const std::vector<std::string>& TemplateSet::shots(std::string_view key) const {
    auto it = shots_.find(key);
    if (it == shots_.end()) throw TemplateError("no shot examples for '" + std::string(key) + "'");
    return it->second;
}

bool TemplateSet::has_shots(std::string_view key) const { return shots_.find(key) != shots_.end(); }

std::vector<std::string> template_slots(std::string_view tmpl) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while ((pos = tmpl.find("{{", pos)) != std::string_view::npos) {
        auto end = tmpl.find("}}", pos + 2);
        if (end == std::string_view::npos) break;
        std::string name(tmpl.substr(pos + 2, end - pos - 2));
        if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
        pos = end + 2;
    }
    return out;
}

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t pos = 0;
    while (true) {
        auto open = tmpl.find("{{", pos);
        if (open == std::string_view::npos) break;
        auto close = tmpl.find("}}", open + 2);
        if (close == std::string_view::npos) break;
        std::string name(tmpl.substr(open + 2, close - open - 2));
        auto it = values.find(name);
        if (it == values.end()) throw TemplateError("template slot {{" + name + "}} has no value");
        out.append(tmpl.substr(pos, open - pos));
        out.append(it->second);
        pos = close + 2;
    }
    out.append(tmpl.substr(pos));
    return out;
}

}  // namespace orsynth
