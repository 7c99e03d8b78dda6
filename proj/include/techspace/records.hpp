#ifndef TECHSPACE_RECORDS_HPP
#define TECHSPACE_RECORDS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace techspace {

// Insertion-ordered string interner; ids are stable once assigned.
class LabelInterner {
public:
    uint32_t intern(const std::string& label) {
        auto it = ids_.find(label);
        if (it != ids_.end()) return it->second;
        uint32_t id = static_cast<uint32_t>(labels_.size());
        labels_.push_back(label);
        ids_.emplace(labels_.back(), id);
        return id;
    }
    std::optional<uint32_t> find(const std::string& label) const {
        auto it = ids_.find(label);
        if (it == ids_.end()) return std::nullopt;
        return it->second;
    }
    const std::string& label(uint32_t id) const { return labels_[id]; }
    size_t size() const { return labels_.size(); }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, uint32_t> ids_;
};

// Label tables shared by every compact record of one corpus run. Field ids
// are indices into field_universe() and need no interner.
struct CorpusIndex {
    LabelInterner countries;
    LabelInterner subclasses;
};

// One parsed, classified and windowed record, reduced to what the matrix
// and metric layers need. String payloads are dropped after classification.
struct CompactRecord {
    int32_t year = 0;
    int16_t window = -1; // index into WindowSpec, -1 = outside all windows
    uint8_t is_ai = 0;
    std::vector<uint32_t> countries;  // CorpusIndex::countries ids, deduplicated
    std::vector<uint32_t> fields;     // field_universe indices, deduplicated
    std::vector<uint32_t> subclasses; // CorpusIndex::subclasses ids, deduplicated
};

} // namespace techspace

#endif
