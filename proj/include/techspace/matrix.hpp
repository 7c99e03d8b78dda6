#ifndef TECHSPACE_MATRIX_HPP
#define TECHSPACE_MATRIX_HPP

#include "techspace/errors.hpp"
#include "techspace/records.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace techspace {

enum class Counting { whole, fractional };
enum class EntityAxis { country, corpus };
enum class TechLevel { field, subclass };

const char* to_string(Counting c);

// Record filter for one matrix build. Defaults select everything that has a
// window assigned.
struct RecordSelection {
    int window = -1;  // window index; -1 = any assigned window (pooled)
    int ai = -1;      // 1 = AI subset, 0 = complement, -1 = both
    int country = -1; // CorpusIndex country id; -1 = no country filter
};

// Entity x technology counts X_ct. Immutable after construction. Cells are
// stored sparse in sorted order; a dense mirror is kept when the technology
// axis is small enough for direct indexing.
class OccurrenceMatrix {
public:
    struct Cell {
        uint32_t entity;
        uint32_t tech;
        double value;
    };

    static constexpr size_t kDenseTechLimit = 64;

    static OccurrenceMatrix from_dense(std::vector<std::string> entities,
                                       std::vector<std::string> technologies,
                                       const std::vector<std::vector<double>>& rows,
                                       std::string window = "", std::string scope = "",
                                       Counting counting = Counting::whole);

    const std::vector<std::string>& entities() const { return entities_; }
    const std::vector<std::string>& technologies() const { return technologies_; }
    const std::vector<Cell>& cells() const { return cells_; }

    double at(size_t entity, size_t tech) const;
    double row_sum(size_t entity) const { return row_sums_[entity]; }
    double col_sum(size_t tech) const { return col_sums_[tech]; }
    double total() const { return total_; }
    bool empty() const { return entities_.empty() || technologies_.empty(); }

    const std::string& window() const { return window_; }
    const std::string& scope() const { return scope_; }
    Counting counting() const { return counting_; }

    // element-wise sum over the union of both label sets
    OccurrenceMatrix merged_with(const OccurrenceMatrix& other) const;

    // stored totals equal recomputed sums
    bool totals_consistent(double tol = 1e-9) const;

private:
    friend class OccurrenceAccumulator;
    void finalize();

    std::vector<std::string> entities_;
    std::vector<std::string> technologies_;
    std::vector<Cell> cells_; // sorted by (entity, tech), nonzero
    std::vector<double> row_sums_, col_sums_;
    std::vector<double> dense_; // entities x technologies, iff tech axis small
    double total_ = 0.0;
    std::string window_, scope_;
    Counting counting_ = Counting::whole;
};

// Symmetric technology co-occurrence counts with per-technology occurrence
// totals s_i and grand total T = sum_i s_i. Zero diagonal.
class CooccurrenceMatrix {
public:
    struct PairCell {
        uint32_t i, j; // i < j
        double value;
    };

    const std::vector<std::string>& technologies() const { return technologies_; }
    const std::vector<PairCell>& pairs() const { return pairs_; }
    double pair_count(size_t i, size_t j) const;
    double occurrence(size_t i) const { return occurrence_[i]; }
    const std::vector<double>& occurrence_totals() const { return occurrence_; }
    double total() const { return total_; }
    bool empty() const { return technologies_.empty(); }

    const std::string& window() const { return window_; }
    const std::string& scope() const { return scope_; }

    static CooccurrenceMatrix from_counts(std::vector<std::string> technologies,
                                          const std::vector<std::vector<double>>& counts,
                                          std::vector<double> occurrence,
                                          std::string window = "", std::string scope = "");

    CooccurrenceMatrix merged_with(const CooccurrenceMatrix& other) const;

private:
    friend class CooccurrenceAccumulator;

    std::vector<std::string> technologies_;
    std::vector<PairCell> pairs_; // sorted by (i, j), nonzero, i < j
    std::vector<double> occurrence_;
    double total_ = 0.0;
    std::string window_, scope_;
};

// ---------------------------------------------------------------------------
// builders
//
// The parallel builders shard the record span into a fixed number of blocks,
// accumulate each block independently and merge the partials in block order,
// so results do not depend on the number of threads. The *_serial variants
// are the single-pass reference implementations kept for testing and for the
// serial-vs-parallel benchmark.

struct MatrixBuildOptions {
    EntityAxis axis = EntityAxis::country;
    TechLevel level = TechLevel::field;
    Counting counting = Counting::whole;
    RecordSelection select;
    std::string window_label;
    std::string scope_label;
    // entity label used when axis == corpus (one synthetic row)
    std::string corpus_entity = "ai";
};

OccurrenceMatrix build_occurrence(const std::vector<CompactRecord>& records,
                                  const CorpusIndex& index,
                                  const MatrixBuildOptions& opts);
OccurrenceMatrix build_occurrence_serial(const std::vector<CompactRecord>& records,
                                         const CorpusIndex& index,
                                         const MatrixBuildOptions& opts);

CooccurrenceMatrix build_cooccurrence(const std::vector<CompactRecord>& records,
                                      const CorpusIndex& index,
                                      const MatrixBuildOptions& opts);
CooccurrenceMatrix build_cooccurrence_serial(const std::vector<CompactRecord>& records,
                                             const CorpusIndex& index,
                                             const MatrixBuildOptions& opts);

// records excluded from matrix construction (no countries or no technologies
// at the requested level) among those matching `select`
long count_matrix_exclusions(const std::vector<CompactRecord>& records,
                             const RecordSelection& select, TechLevel level);

// ---------------------------------------------------------------------------
// serialization: long-format CSV plus JSON sidecar

void write_occurrence_csv(std::ostream& out, const OccurrenceMatrix& m);
std::string occurrence_sidecar_json(const OccurrenceMatrix& m);
void write_cooccurrence_csv(std::ostream& out, const CooccurrenceMatrix& m);
std::string cooccurrence_sidecar_json(const CooccurrenceMatrix& m);

// Effective worker count: OpenMP max threads capped by TECHSPACE_THREADS.
int effective_threads();

} // namespace techspace

#endif
