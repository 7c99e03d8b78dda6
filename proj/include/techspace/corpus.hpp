#ifndef TECHSPACE_CORPUS_HPP
#define TECHSPACE_CORPUS_HPP

#include "techspace/errors.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace techspace {

// One priority filing.
struct PatentRecord {
    std::string id;
    int year = 0;
    std::string title;
    std::string abstract;
    std::vector<std::string> countries; // ISO alpha-2, sorted, unique
    std::vector<std::string> ipc_codes; // normalized IPC symbols, sorted, unique
};

// ---------------------------------------------------------------------------
// keyword classification

struct KeywordRule {
    std::string pattern; // lowercased match fragment
    std::string label;   // verbatim text from the rule file
};

class KeywordSet {
public:
    // One pattern per line, '#' comments, blank lines ignored.
    static KeywordSet load(const std::string& path);
    static KeywordSet from_patterns(const std::vector<std::string>& patterns);

    const std::vector<KeywordRule>& rules() const { return rules_; }
    size_t size() const { return rules_.size(); }

private:
    std::vector<KeywordRule> rules_;
};

struct MatchResult {
    bool is_ai = false;
    std::vector<std::string> hits; // labels of matching rules, rule order
};

// True iff any pattern occurs in the title or the abstract,
// case-insensitively. `scratch` avoids per-call allocations in hot loops.
MatchResult match_ai(const PatentRecord& record, const KeywordSet& rules);
bool match_ai_into(const std::string& title, const std::string& abstract,
                   const KeywordSet& rules, std::string& scratch,
                   std::vector<uint32_t>& hit_indices);

// ---------------------------------------------------------------------------
// analysis windows

struct Window {
    std::string label;
    int start_year = 0; // inclusive
    int end_year = 0;   // inclusive
};

class WindowSpec {
public:
    static WindowSpec default_windows(); // P1 1974-1988, P2 1989-2003, P3 2004-2018
    // "P1:1974-1988,P2:1989-2003,P3:2004-2018"
    static WindowSpec parse(const std::string& text);
    static WindowSpec from_windows(std::vector<Window> windows);

    std::optional<int> assign(int year) const;
    const std::vector<Window>& windows() const { return windows_; }
    size_t size() const { return windows_.size(); }
    const std::string& label(int idx) const { return windows_[idx].label; }

private:
    void validate() const; // non-overlapping, ascending, labels unique
    std::vector<Window> windows_;
};

// ---------------------------------------------------------------------------
// corpus parsing

struct CorpusSchema {
    std::string id = "id";
    std::string year = "year";
    std::string title = "title";
    std::string abstract = "abstract";
    std::string countries = "countries";
    std::string ipc = "ipc";
};

struct RowDiagnostic {
    long line = 0;
    std::string reason;
};

// Streaming parser over delimiter-separated text (comma or tab, auto-detected
// from the header). Malformed rows are skipped with a diagnostic; a missing
// mandatory column is a ConfigError.
class CsvReader;

class CorpusParser {
public:
    CorpusParser(std::istream& in, const CorpusSchema& schema = {});
    ~CorpusParser();

    bool next(PatentRecord& record);

    long rows_total() const { return rows_total_; }
    long rows_skipped() const { return rows_skipped_; }
    // first kMaxStoredDiagnostics diagnostics; rows_skipped() has the total
    const std::vector<RowDiagnostic>& diagnostics() const { return diagnostics_; }
    char delimiter() const { return delim_; }

    static constexpr size_t kMaxStoredDiagnostics = 100;

private:
    void skip(long line, std::string reason);

    std::istream& in_;
    std::unique_ptr<CsvReader> reader_;
    char delim_ = ',';
    int col_[6] = {-1, -1, -1, -1, -1, -1};
    size_t min_columns_ = 0;
    long rows_total_ = 0;
    long rows_skipped_ = 0;
    std::vector<RowDiagnostic> diagnostics_;
    std::vector<std::string> fields_;
    std::unordered_set<std::string> seen_ids_;
};

// Canonical serialization (comma CSV): header + one row per record, optional
// extra column appended to each row by the caller. Round-trips through
// CorpusParser.
void write_corpus_header(std::ostream& out, bool with_keywords_column);
void write_corpus_row(std::ostream& out, const PatentRecord& record,
                      const std::vector<std::string>* keyword_hits = nullptr);

} // namespace techspace

#endif
