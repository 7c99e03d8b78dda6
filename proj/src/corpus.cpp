#include "techspace/corpus.hpp"

#include "techspace/csv.hpp"
#include "techspace/fields.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace techspace {

// ---------------------------------------------------------------------------
// keywords

KeywordSet KeywordSet::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open keyword file: " + path);
    std::vector<std::string> patterns;
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        patterns.push_back(t);
    }
    if (patterns.empty()) throw ConfigError("keyword file has no patterns: " + path);
    return from_patterns(patterns);
}

KeywordSet KeywordSet::from_patterns(const std::vector<std::string>& patterns) {
    KeywordSet set;
    for (const auto& p : patterns) {
        std::string t = trim(p);
        if (t.empty()) throw ConfigError("empty keyword pattern");
        set.rules_.push_back({to_lower(t), t});
    }
    return set;
}

bool match_ai_into(const std::string& title, const std::string& abstract,
                   const KeywordSet& rules, std::string& scratch,
                   std::vector<uint32_t>& hit_indices) {
    hit_indices.clear();
    if (title.empty() && abstract.empty()) return false;

    // lowercase title and abstract into one scratch buffer, separated by a
    // NUL so no pattern can straddle the two texts
    scratch.clear();
    scratch.reserve(title.size() + abstract.size() + 1);
    for (char c : title)
        scratch.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    scratch.push_back('\0');
    for (char c : abstract)
        scratch.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));

    const auto& rs = rules.rules();
    for (uint32_t i = 0; i < rs.size(); ++i) {
        if (scratch.find(rs[i].pattern) != std::string::npos)
            hit_indices.push_back(i);
    }
    return !hit_indices.empty();
}

MatchResult match_ai(const PatentRecord& record, const KeywordSet& rules) {
    std::string scratch;
    std::vector<uint32_t> idx;
    MatchResult res;
    res.is_ai = match_ai_into(record.title, record.abstract, rules, scratch, idx);
    for (uint32_t i : idx) res.hits.push_back(rules.rules()[i].label);
    return res;
}

// ---------------------------------------------------------------------------
// windows

WindowSpec WindowSpec::default_windows() {
    return from_windows({{"P1", 1974, 1988}, {"P2", 1989, 2003}, {"P3", 2004, 2018}});
}

WindowSpec WindowSpec::from_windows(std::vector<Window> windows) {
    WindowSpec spec;
    spec.windows_ = std::move(windows);
    spec.validate();
    return spec;
}

WindowSpec WindowSpec::parse(const std::string& text) {
    std::vector<Window> windows;
    for (const auto& part : split_multi(text, ',')) {
        size_t colon = part.find(':');
        size_t dash = part.find('-', colon == std::string::npos ? 0 : colon);
        if (colon == std::string::npos || dash == std::string::npos)
            throw ConfigError("bad window '" + part + "', expected LABEL:START-END");
        auto start = parse_int(part.substr(colon + 1, dash - colon - 1));
        auto end = parse_int(part.substr(dash + 1));
        if (!start || !end)
            throw ConfigError("bad window years in '" + part + "'");
        windows.push_back({trim(part.substr(0, colon)), static_cast<int>(*start),
                           static_cast<int>(*end)});
    }
    return from_windows(std::move(windows));
}

void WindowSpec::validate() const {
    if (windows_.empty()) throw ConfigError("window spec is empty");
    for (size_t i = 0; i < windows_.size(); ++i) {
        const Window& w = windows_[i];
        if (w.label.empty()) throw ConfigError("window label empty");
        if (w.label == "ALL")
            throw ConfigError("window label 'ALL' is reserved for the pooled period");
        if (w.start_year > w.end_year)
            throw ConfigError("window '" + w.label + "' has start > end");
        if (i > 0 && windows_[i - 1].end_year >= w.start_year)
            throw ConfigError("windows overlap or are not ascending at '" + w.label + "'");
        for (size_t j = 0; j < i; ++j)
            if (windows_[j].label == w.label)
                throw ConfigError("duplicate window label '" + w.label + "'");
    }
}

std::optional<int> WindowSpec::assign(int year) const {
    for (size_t i = 0; i < windows_.size(); ++i) {
        if (year >= windows_[i].start_year && year <= windows_[i].end_year)
            return static_cast<int>(i);
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// parsing

namespace {

bool valid_country(const std::string& s) {
    return s.size() == 2 && std::isalpha(static_cast<unsigned char>(s[0])) &&
           std::isalpha(static_cast<unsigned char>(s[1]));
}

std::string upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

} // namespace

CorpusParser::CorpusParser(std::istream& in, const CorpusSchema& schema) : in_(in) {
    std::string header_line;
    if (!std::getline(in_, header_line))
        throw ConfigError("corpus input is empty (no header row)");
    if (!header_line.empty() && header_line.back() == '\r') header_line.pop_back();
    delim_ = CsvReader::detect_delimiter(header_line);

    std::vector<std::string> names;
    {
        std::istringstream hs(header_line);
        CsvReader hr(hs, delim_);
        hr.next(names);
    }
    const std::string wanted[6] = {schema.id,       schema.year, schema.title,
                                   schema.abstract, schema.countries, schema.ipc};
    for (size_t c = 0; c < names.size(); ++c) {
        std::string n = trim(names[c]);
        for (int k = 0; k < 6; ++k)
            if (n == wanted[k] && col_[k] < 0) col_[k] = static_cast<int>(c);
    }
    for (int k = 0; k < 6; ++k) {
        if (col_[k] < 0)
            throw ConfigError("corpus input is missing mandatory column '" + wanted[k] + "'");
        min_columns_ = std::max(min_columns_, static_cast<size_t>(col_[k]) + 1);
    }
    reader_ = std::make_unique<CsvReader>(in_, delim_);
}

CorpusParser::~CorpusParser() = default;

void CorpusParser::skip(long line, std::string reason) {
    ++rows_skipped_;
    if (diagnostics_.size() < kMaxStoredDiagnostics)
        diagnostics_.push_back({line, std::move(reason)});
}

bool CorpusParser::next(PatentRecord& record) {
    while (reader_->next(fields_)) {
        ++rows_total_;
        long line = reader_->line() + 1; // header occupied line 1
        if (fields_.size() < min_columns_) {
            std::ostringstream msg;
            msg << "expected at least " << min_columns_ << " columns, got " << fields_.size();
            skip(line, msg.str());
            continue;
        }
        std::string id = trim(fields_[col_[0]]);
        if (id.empty()) {
            skip(line, "empty id");
            continue;
        }
        auto year = parse_int(fields_[col_[1]]);
        if (!year) {
            skip(line, "malformed year '" + trim(fields_[col_[1]]) + "'");
            continue;
        }
        if (*year < 1900 || *year > 2100) {
            skip(line, "year " + std::to_string(*year) + " outside [1900, 2100]");
            continue;
        }
        if (!seen_ids_.insert(id).second) {
            skip(line, "duplicate id '" + id + "'");
            continue;
        }

        record.id = std::move(id);
        record.year = static_cast<int>(*year);
        record.title = fields_[col_[2]];
        record.abstract = fields_[col_[3]];

        record.countries.clear();
        for (auto& c : split_multi(fields_[col_[4]])) {
            if (!valid_country(c)) {
                skip(line, "invalid country code '" + c + "'");
                record.countries.clear();
                record.id.clear();
                break;
            }
            record.countries.push_back(upper(c));
        }
        if (record.id.empty()) continue; // row rejected above

        record.ipc_codes.clear();
        for (auto& s : split_multi(fields_[col_[5]])) {
            std::string norm = normalize_ipc(s);
            if (!norm.empty()) record.ipc_codes.push_back(std::move(norm));
        }

        std::sort(record.countries.begin(), record.countries.end());
        record.countries.erase(
            std::unique(record.countries.begin(), record.countries.end()),
            record.countries.end());
        std::sort(record.ipc_codes.begin(), record.ipc_codes.end());
        record.ipc_codes.erase(
            std::unique(record.ipc_codes.begin(), record.ipc_codes.end()),
            record.ipc_codes.end());
        return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// canonical serialization

void write_corpus_header(std::ostream& out, bool with_keywords_column) {
    std::vector<std::string> cols = {"id", "year", "title", "abstract", "countries", "ipc"};
    if (with_keywords_column) cols.push_back("keywords");
    write_csv_row(out, cols);
}

namespace {
std::string join_multi(const std::vector<std::string>& values) {
    std::string out;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) out.push_back('|');
        out += values[i];
    }
    return out;
}
} // namespace

void write_corpus_row(std::ostream& out, const PatentRecord& record,
                      const std::vector<std::string>* keyword_hits) {
    std::vector<std::string> cols = {record.id,
                                     std::to_string(record.year),
                                     record.title,
                                     record.abstract,
                                     join_multi(record.countries),
                                     join_multi(record.ipc_codes)};
    if (keyword_hits) cols.push_back(join_multi(*keyword_hits));
    write_csv_row(out, cols);
}

} // namespace techspace
