#ifndef TECHSPACE_FIELDS_HPP
#define TECHSPACE_FIELDS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace techspace {

inline constexpr int kFieldCount = 35;

struct FieldInfo {
    std::string name;
    std::string sector;
};

// The fixed 35-field universe (Schmoch rev. 3 ordering) with sector labels.
const std::vector<FieldInfo>& field_universe();

// Index into field_universe() by exact name; nullopt if unknown.
std::optional<int> field_index(const std::string& name);

// Uppercases, strips spaces and squeezes zero-padded main-group numbers, so
// "h04n 0021/00" and "H04N21/00" normalize identically.
std::string normalize_ipc(const std::string& symbol);

// 4-char subclass of a normalized symbol ("G06N3/08" -> "G06N");
// nullopt when the symbol is shorter than a subclass or malformed.
std::optional<std::string> ipc_subclass(const std::string& normalized);

// IPC prefix -> field concordance. Entries longer than a subclass only match
// at a main-group boundary, so "G01N33" captures "G01N33/48" but not
// "G01N3/02". Longest matching prefix wins.
class FieldConcordance {
public:
    // Loads two-column (prefix, field name) lines; '#' starts a comment.
    // Throws std::runtime_error on unreadable files, unknown target fields
    // or ambiguous duplicate prefixes.
    static FieldConcordance load(const std::string& path);
    static FieldConcordance from_entries(
        const std::vector<std::pair<std::string, std::string>>& entries);

    // Field index for one normalized symbol; nullopt when no prefix matches.
    std::optional<int> map_symbol(const std::string& normalized) const;

    size_t entry_count() const { return entries_.size(); }

private:
    std::unordered_map<std::string, int> entries_; // normalized prefix -> field idx
    size_t max_prefix_len_ = 0;
};

// Maps a set of IPC symbols to the deduplicated set of field indices.
// Unmapped symbols are tallied into `unmapped` (symbol -> count) when given.
std::vector<int> map_ipc_to_fields(const std::vector<std::string>& ipc_codes,
                                   const FieldConcordance& conc,
                                   std::map<std::string, long>* unmapped = nullptr);

// AI category -> member fields (Appendix-style fixed default, replaceable
// through a category file).
struct CategorySpec {
    std::string name;
    std::vector<std::string> members;
};

const std::vector<CategorySpec>& default_categories();
std::vector<CategorySpec> load_categories(const std::string& path);

// Tag for one field given the category list: "core", "related",
// "surrounding" or "other".
std::string category_tag(const std::string& field_name,
                         const std::vector<CategorySpec>& categories);

} // namespace techspace

#endif
