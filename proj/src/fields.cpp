#include "techspace/fields.hpp"

#include "techspace/csv.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace techspace {

const std::vector<FieldInfo>& field_universe() {
    static const std::vector<FieldInfo> fields = {
        {"Electrical machinery, apparatus, energy", "Electrical engineering"},
        {"Audio-visual technology", "Electrical engineering"},
        {"Telecommunications", "Electrical engineering"},
        {"Digital communication", "Electrical engineering"},
        {"Basic communication processes", "Electrical engineering"},
        {"Computer technology", "Electrical engineering"},
        {"IT methods for management", "Electrical engineering"},
        {"Semiconductors", "Electrical engineering"},
        {"Optics", "Instruments"},
        {"Measurement", "Instruments"},
        {"Analysis of biological materials", "Instruments"},
        {"Control", "Instruments"},
        {"Medical technology", "Instruments"},
        {"Organic fine chemistry", "Chemistry"},
        {"Biotechnology", "Chemistry"},
        {"Pharmaceuticals", "Chemistry"},
        {"Macromolecular chemistry, polymers", "Chemistry"},
        {"Food chemistry", "Chemistry"},
        {"Basic materials chemistry", "Chemistry"},
        {"Materials, metallurgy", "Chemistry"},
        {"Surface technology, coating", "Chemistry"},
        {"Micro-structural and nano-technology", "Chemistry"},
        {"Chemical engineering", "Chemistry"},
        {"Environmental technology", "Chemistry"},
        {"Handling", "Mechanical engineering"},
        {"Machine tools", "Mechanical engineering"},
        {"Engines, pumps, turbines", "Mechanical engineering"},
        {"Textile and paper machines", "Mechanical engineering"},
        {"Other special machines", "Mechanical engineering"},
        {"Thermal processes and apparatus", "Mechanical engineering"},
        {"Mechanical elements", "Mechanical engineering"},
        {"Transport", "Mechanical engineering"},
        {"Furniture, games", "Other fields"},
        {"Other consumer goods", "Other fields"},
        {"Civil engineering", "Other fields"},
    };
    return fields;
}

std::optional<int> field_index(const std::string& name) {
    static const std::unordered_map<std::string, int> index = [] {
        std::unordered_map<std::string, int> m;
        const auto& u = field_universe();
        for (int i = 0; i < static_cast<int>(u.size()); ++i) m[u[i].name] = i;
        return m;
    }();
    auto it = index.find(name);
    if (it == index.end()) return std::nullopt;
    return it->second;
}

std::string normalize_ipc(const std::string& symbol) {
    std::string s;
    s.reserve(symbol.size());
    for (char c : symbol) {
        if (c == ' ' || c == '\t') continue;
        s.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    // squeeze zero-padded main groups: "A61K0008/00" -> "A61K8/00"
    if (s.size() > 4 && std::isdigit(static_cast<unsigned char>(s[4]))) {
        size_t g = 4;
        while (g < s.size() && s[g] == '0') ++g;
        if (g > 4 && g < s.size() && std::isdigit(static_cast<unsigned char>(s[g])))
            s.erase(4, g - 4);
        else if (g > 5) // all zeros: keep a single one
            s.erase(4, g - 5);
    }
    return s;
}

std::optional<std::string> ipc_subclass(const std::string& normalized) {
    if (normalized.size() < 4) return std::nullopt;
    if (!std::isalpha(static_cast<unsigned char>(normalized[0])) ||
        !std::isdigit(static_cast<unsigned char>(normalized[1])) ||
        !std::isdigit(static_cast<unsigned char>(normalized[2])) ||
        !std::isalpha(static_cast<unsigned char>(normalized[3])))
        return std::nullopt;
    return normalized.substr(0, 4);
}

FieldConcordance FieldConcordance::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open concordance file: " + path);
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t tab = t.find('\t');
        if (tab == std::string::npos) {
            std::ostringstream msg;
            msg << path << ":" << lineno << ": expected two tab-separated columns";
            throw std::runtime_error(msg.str());
        }
        entries.emplace_back(trim(t.substr(0, tab)), trim(t.substr(tab + 1)));
    }
    return from_entries(entries);
}

FieldConcordance FieldConcordance::from_entries(
    const std::vector<std::pair<std::string, std::string>>& entries) {
    FieldConcordance conc;
    for (const auto& [prefix, field] : entries) {
        std::string p = normalize_ipc(prefix);
        if (p.empty()) throw std::runtime_error("concordance: empty prefix");
        auto idx = field_index(field);
        if (!idx)
            throw std::runtime_error("concordance: unknown field '" + field + "'");
        auto [it, inserted] = conc.entries_.emplace(p, *idx);
        if (!inserted && it->second != *idx)
            throw std::runtime_error("concordance: ambiguous prefix '" + p + "'");
        conc.max_prefix_len_ = std::max(conc.max_prefix_len_, p.size());
    }
    return conc;
}

std::optional<int> FieldConcordance::map_symbol(const std::string& normalized) const {
    size_t maxlen = std::min(max_prefix_len_, normalized.size());
    for (size_t len = maxlen; len >= 1; --len) {
        auto it = entries_.find(normalized.substr(0, len));
        if (it == entries_.end()) continue;
        // group-level prefixes (longer than a subclass) only match at a
        // main-group boundary: "G01N33" must not capture "G01N330"
        if (len > 4 && len < normalized.size() && normalized[len] != '/') continue;
        return it->second;
    }
    return std::nullopt;
}

std::vector<int> map_ipc_to_fields(const std::vector<std::string>& ipc_codes,
                                   const FieldConcordance& conc,
                                   std::map<std::string, long>* unmapped) {
    std::vector<int> out;
    for (const auto& code : ipc_codes) {
        std::string norm = normalize_ipc(code);
        if (norm.empty()) continue;
        auto idx = conc.map_symbol(norm);
        if (!idx) {
            if (unmapped) ++(*unmapped)[norm];
            continue;
        }
        bool seen = false;
        for (int f : out) seen = seen || f == *idx;
        if (!seen) out.push_back(*idx);
    }
    return out;
}

const std::vector<CategorySpec>& default_categories() {
    static const std::vector<CategorySpec> cats = {
        {"AI-core",
         {"Computer technology", "IT methods for management", "Measurement",
          "Control"}},
        {"AI-related",
         {"Analysis of biological materials", "Basic communication processes",
          "Digital communication"}},
        {"Surrounding",
         {"Telecommunications", "Audio-visual technology",
          "Electrical machinery, apparatus, energy", "Medical technology",
          "Handling", "Other consumer goods"}},
    };
    return cats;
}

std::vector<CategorySpec> load_categories(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open category file: " + path);
    std::vector<CategorySpec> cats;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t tab = t.find('\t');
        if (tab == std::string::npos) {
            std::ostringstream msg;
            msg << path << ":" << lineno << ": expected two tab-separated columns";
            throw std::runtime_error(msg.str());
        }
        std::string cat = trim(t.substr(0, tab));
        std::string member = trim(t.substr(tab + 1));
        if (!field_index(member))
            throw std::runtime_error(path + ": unknown field '" + member + "'");
        auto it = std::find_if(cats.begin(), cats.end(),
                               [&](const CategorySpec& c) { return c.name == cat; });
        if (it == cats.end()) {
            cats.push_back({cat, {member}});
        } else {
            it->members.push_back(member);
        }
    }
    if (cats.empty()) throw std::runtime_error(path + ": no categories defined");
    return cats;
}

std::string category_tag(const std::string& field_name,
                         const std::vector<CategorySpec>& categories) {
    for (const auto& cat : categories) {
        for (const auto& m : cat.members) {
            if (m != field_name) continue;
            if (cat.name == "AI-core") return "core";
            if (cat.name == "AI-related") return "related";
            if (cat.name == "Surrounding") return "surrounding";
            return cat.name;
        }
    }
    return "other";
}

} // namespace techspace
