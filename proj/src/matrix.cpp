#include "techspace/matrix.hpp"

#include "techspace/csv.hpp"
#include "techspace/fields.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <ostream>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace techspace {

namespace {

// fixed shard count so parallel results do not depend on the thread count
constexpr size_t kShards = 64;
constexpr size_t kSerialCutoff = 4096;

using AccumMap = std::unordered_map<uint64_t, double>;

inline uint64_t cell_key(uint32_t a, uint32_t b) {
    return (static_cast<uint64_t>(a) << 32) | b;
}

inline bool selected(const CompactRecord& r, const RecordSelection& s) {
    if (r.window < 0) return false;
    if (s.window >= 0 && r.window != s.window) return false;
    if (s.ai >= 0 && static_cast<int>(r.is_ai) != s.ai) return false;
    if (s.country >= 0) {
        bool has = false;
        for (uint32_t c : r.countries) has = has || c == static_cast<uint32_t>(s.country);
        if (!has) return false;
    }
    return true;
}

inline const std::vector<uint32_t>& techs_of(const CompactRecord& r, TechLevel level) {
    return level == TechLevel::field ? r.fields : r.subclasses;
}

void accumulate_occurrence(const std::vector<CompactRecord>& records, size_t lo,
                           size_t hi, const MatrixBuildOptions& opts, AccumMap& acc) {
    for (size_t n = lo; n < hi; ++n) {
        const CompactRecord& r = records[n];
        if (!selected(r, opts.select)) continue;
        const auto& techs = techs_of(r, opts.level);
        if (r.countries.empty() || techs.empty()) continue;
        if (opts.axis == EntityAxis::corpus) {
            double w = opts.counting == Counting::whole
                           ? 1.0
                           : 1.0 / static_cast<double>(techs.size());
            for (uint32_t t : techs) acc[cell_key(0, t)] += w;
        } else {
            double w = opts.counting == Counting::whole
                           ? 1.0
                           : 1.0 / static_cast<double>(r.countries.size() * techs.size());
            for (uint32_t c : r.countries)
                for (uint32_t t : techs) acc[cell_key(c, t)] += w;
        }
    }
}

void accumulate_cooccurrence(const std::vector<CompactRecord>& records, size_t lo,
                             size_t hi, const MatrixBuildOptions& opts, AccumMap& pairs,
                             AccumMap& occ) {
    for (size_t n = lo; n < hi; ++n) {
        const CompactRecord& r = records[n];
        if (!selected(r, opts.select)) continue;
        const auto& techs = techs_of(r, opts.level);
        if (r.countries.empty() || techs.empty()) continue;
        for (size_t i = 0; i < techs.size(); ++i) {
            occ[techs[i]] += 1.0;
            for (size_t j = i + 1; j < techs.size(); ++j) {
                uint32_t a = std::min(techs[i], techs[j]);
                uint32_t b = std::max(techs[i], techs[j]);
                pairs[cell_key(a, b)] += 1.0;
            }
        }
    }
}

// runs fn(shard_lo, shard_hi, shard_idx) over fixed shards, possibly in
// parallel; partial results must be merged by the caller in shard order
template <typename Fn>
void for_each_shard(size_t count, Fn&& fn) {
    size_t shards = std::min(kShards, std::max<size_t>(count, 1));
    size_t chunk = (count + shards - 1) / shards;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(effective_threads())
#endif
    for (long s = 0; s < static_cast<long>(shards); ++s) {
        size_t lo = static_cast<size_t>(s) * chunk;
        size_t hi = std::min(count, lo + chunk);
        if (lo < hi) fn(lo, hi, static_cast<size_t>(s));
    }
}

struct LabelMap {
    std::vector<std::string> labels;            // final, ordered
    std::unordered_map<uint32_t, uint32_t> remap; // global id -> local index
};

// observed entity ids -> lexicographically sorted labels
LabelMap map_entities(const std::vector<uint32_t>& observed, EntityAxis axis,
                      const CorpusIndex& index, const std::string& corpus_entity) {
    LabelMap lm;
    std::vector<std::pair<std::string, uint32_t>> pairs;
    for (uint32_t id : observed) {
        if (axis == EntityAxis::corpus)
            pairs.emplace_back(corpus_entity, id);
        else
            pairs.emplace_back(index.countries.label(id), id);
    }
    std::sort(pairs.begin(), pairs.end());
    for (uint32_t i = 0; i < pairs.size(); ++i) {
        lm.labels.push_back(pairs[i].first);
        lm.remap[pairs[i].second] = i;
    }
    return lm;
}

// field level keeps the whole 35-field universe in canonical order;
// subclasses keep only what was observed, sorted
LabelMap map_technologies(const std::vector<uint32_t>& observed, TechLevel level,
                          const CorpusIndex& index) {
    LabelMap lm;
    if (level == TechLevel::field) {
        const auto& u = field_universe();
        for (uint32_t i = 0; i < u.size(); ++i) {
            lm.labels.push_back(u[i].name);
            lm.remap[i] = i;
        }
    } else {
        std::vector<std::pair<std::string, uint32_t>> pairs;
        for (uint32_t id : observed) pairs.emplace_back(index.subclasses.label(id), id);
        std::sort(pairs.begin(), pairs.end());
        for (uint32_t i = 0; i < pairs.size(); ++i) {
            lm.labels.push_back(pairs[i].first);
            lm.remap[pairs[i].second] = i;
        }
    }
    return lm;
}

std::vector<uint32_t> sorted_unique_keys(const AccumMap& acc, bool high_half) {
    std::vector<uint32_t> ids;
    for (const auto& [key, value] : acc) {
        (void)value;
        ids.push_back(high_half ? static_cast<uint32_t>(key >> 32)
                                : static_cast<uint32_t>(key & 0xffffffffu));
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

OccurrenceMatrix finalize_occurrence(const AccumMap& acc, const CorpusIndex& index,
                                     const MatrixBuildOptions& opts) {
    if (acc.empty())
        return OccurrenceMatrix::from_dense({}, {}, {}, opts.window_label,
                                            opts.scope_label, opts.counting);

    std::vector<uint32_t> ent_ids = sorted_unique_keys(acc, true);
    std::vector<uint32_t> tech_ids = sorted_unique_keys(acc, false);
    LabelMap ents = map_entities(ent_ids, opts.axis, index, opts.corpus_entity);
    LabelMap techs = map_technologies(tech_ids, opts.level, index);

    std::vector<std::vector<double>> rows(ents.labels.size(),
                                          std::vector<double>(techs.labels.size(), 0.0));
    for (const auto& [key, value] : acc) {
        uint32_t e = ents.remap.at(static_cast<uint32_t>(key >> 32));
        uint32_t t = techs.remap.at(static_cast<uint32_t>(key & 0xffffffffu));
        rows[e][t] += value;
    }
    return OccurrenceMatrix::from_dense(std::move(ents.labels), std::move(techs.labels),
                                        rows, opts.window_label, opts.scope_label,
                                        opts.counting);
}

CooccurrenceMatrix finalize_cooccurrence(const AccumMap& pairs, const AccumMap& occ,
                                         const CorpusIndex& index,
                                         const MatrixBuildOptions& opts) {
    if (occ.empty()) {
        return CooccurrenceMatrix::from_counts({}, {}, {}, opts.window_label,
                                               opts.scope_label);
    }
    std::vector<uint32_t> tech_ids;
    for (const auto& [id, v] : occ) {
        (void)v;
        tech_ids.push_back(static_cast<uint32_t>(id));
    }
    std::sort(tech_ids.begin(), tech_ids.end());
    LabelMap techs = map_technologies(tech_ids, opts.level, index);

    size_t n = techs.labels.size();
    std::vector<std::vector<double>> counts(n, std::vector<double>(n, 0.0));
    std::vector<double> occurrence(n, 0.0);
    for (const auto& [id, v] : occ) occurrence[techs.remap.at(static_cast<uint32_t>(id))] = v;
    for (const auto& [key, v] : pairs) {
        uint32_t i = techs.remap.at(static_cast<uint32_t>(key >> 32));
        uint32_t j = techs.remap.at(static_cast<uint32_t>(key & 0xffffffffu));
        counts[i][j] += v;
        counts[j][i] += v;
    }
    return CooccurrenceMatrix::from_counts(std::move(techs.labels), counts,
                                           std::move(occurrence), opts.window_label,
                                           opts.scope_label);
}

void merge_into(AccumMap& into, const AccumMap& from) {
    for (const auto& [key, value] : from) into[key] += value;
}

} // namespace

const char* to_string(Counting c) {
    return c == Counting::whole ? "whole" : "fractional";
}

int effective_threads() {
#ifdef _OPENMP
    int n = omp_get_max_threads();
#else
    int n = 1;
#endif
    if (const char* env = std::getenv("TECHSPACE_THREADS")) {
        int cap = std::atoi(env);
        if (cap >= 1 && cap < n) n = cap;
    }
    return n;
}

// ---------------------------------------------------------------------------
// OccurrenceMatrix

namespace {
void check_unique(const std::vector<std::string>& labels, const char* axis) {
    std::vector<std::string> sorted = labels;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw DataError(std::string("duplicate ") + axis + " label");
}
} // namespace

OccurrenceMatrix OccurrenceMatrix::from_dense(
    std::vector<std::string> entities, std::vector<std::string> technologies,
    const std::vector<std::vector<double>>& rows, std::string window, std::string scope,
    Counting counting) {
    OccurrenceMatrix m;
    m.entities_ = std::move(entities);
    m.technologies_ = std::move(technologies);
    check_unique(m.entities_, "entity");
    check_unique(m.technologies_, "technology");
    m.window_ = std::move(window);
    m.scope_ = std::move(scope);
    m.counting_ = counting;
    for (uint32_t e = 0; e < rows.size(); ++e) {
        if (rows[e].size() != m.technologies_.size())
            throw DataError("occurrence row width does not match technology axis");
        for (uint32_t t = 0; t < rows[e].size(); ++t) {
            if (rows[e][t] < 0) throw DataError("occurrence counts must be nonnegative");
            if (rows[e][t] != 0.0) m.cells_.push_back({e, t, rows[e][t]});
        }
    }
    if (rows.size() != m.entities_.size())
        throw DataError("occurrence row count does not match entity axis");
    m.finalize();
    return m;
}

void OccurrenceMatrix::finalize() {
    std::sort(cells_.begin(), cells_.end(), [](const Cell& a, const Cell& b) {
        return a.entity != b.entity ? a.entity < b.entity : a.tech < b.tech;
    });
    row_sums_.assign(entities_.size(), 0.0);
    col_sums_.assign(technologies_.size(), 0.0);
    total_ = 0.0;
    for (const Cell& c : cells_) {
        row_sums_[c.entity] += c.value;
        col_sums_[c.tech] += c.value;
        total_ += c.value;
    }
    dense_.clear();
    if (!technologies_.empty() && technologies_.size() <= kDenseTechLimit) {
        dense_.assign(entities_.size() * technologies_.size(), 0.0);
        for (const Cell& c : cells_)
            dense_[c.entity * technologies_.size() + c.tech] = c.value;
    }
}

double OccurrenceMatrix::at(size_t entity, size_t tech) const {
    if (!dense_.empty()) return dense_[entity * technologies_.size() + tech];
    Cell probe{static_cast<uint32_t>(entity), static_cast<uint32_t>(tech), 0.0};
    auto it = std::lower_bound(cells_.begin(), cells_.end(), probe,
                               [](const Cell& a, const Cell& b) {
                                   return a.entity != b.entity ? a.entity < b.entity
                                                               : a.tech < b.tech;
                               });
    if (it != cells_.end() && it->entity == entity && it->tech == tech) return it->value;
    return 0.0;
}

OccurrenceMatrix OccurrenceMatrix::merged_with(const OccurrenceMatrix& other) const {
    std::vector<std::string> ents = entities_;
    for (const auto& e : other.entities_)
        if (std::find(ents.begin(), ents.end(), e) == ents.end()) ents.push_back(e);
    std::sort(ents.begin(), ents.end());

    std::vector<std::string> techs;
    if (technologies_ == other.technologies_) {
        techs = technologies_;
    } else {
        techs = technologies_;
        for (const auto& t : other.technologies_)
            if (std::find(techs.begin(), techs.end(), t) == techs.end()) techs.push_back(t);
        std::sort(techs.begin(), techs.end());
    }

    auto index_of = [](const std::vector<std::string>& v, const std::string& s) {
        return static_cast<size_t>(std::find(v.begin(), v.end(), s) - v.begin());
    };
    std::vector<std::vector<double>> rows(ents.size(),
                                          std::vector<double>(techs.size(), 0.0));
    for (const OccurrenceMatrix* m : {this, &other}) {
        for (const Cell& c : m->cells_) {
            size_t e = index_of(ents, m->entities_[c.entity]);
            size_t t = index_of(techs, m->technologies_[c.tech]);
            rows[e][t] += c.value;
        }
    }
    return from_dense(std::move(ents), std::move(techs), rows, window_, scope_, counting_);
}

bool OccurrenceMatrix::totals_consistent(double tol) const {
    std::vector<double> rs(entities_.size(), 0.0), cs(technologies_.size(), 0.0);
    double tot = 0.0;
    for (const Cell& c : cells_) {
        rs[c.entity] += c.value;
        cs[c.tech] += c.value;
        tot += c.value;
    }
    for (size_t e = 0; e < rs.size(); ++e)
        if (std::abs(rs[e] - row_sums_[e]) > tol) return false;
    for (size_t t = 0; t < cs.size(); ++t)
        if (std::abs(cs[t] - col_sums_[t]) > tol) return false;
    return std::abs(tot - total_) <= tol;
}

// ---------------------------------------------------------------------------
// CooccurrenceMatrix

CooccurrenceMatrix CooccurrenceMatrix::from_counts(
    std::vector<std::string> technologies, const std::vector<std::vector<double>>& counts,
    std::vector<double> occurrence, std::string window, std::string scope) {
    CooccurrenceMatrix m;
    m.technologies_ = std::move(technologies);
    m.occurrence_ = std::move(occurrence);
    m.window_ = std::move(window);
    m.scope_ = std::move(scope);
    size_t n = m.technologies_.size();
    if (counts.size() != n || m.occurrence_.size() != n)
        throw DataError("co-occurrence counts do not match technology axis");
    for (size_t i = 0; i < n; ++i) {
        if (counts[i].size() != n)
            throw DataError("co-occurrence matrix is not square");
        for (size_t j = i + 1; j < n; ++j) {
            if (std::abs(counts[i][j] - counts[j][i]) > 1e-12)
                throw DataError("co-occurrence matrix is not symmetric");
            if (counts[i][j] != 0.0)
                m.pairs_.push_back({static_cast<uint32_t>(i), static_cast<uint32_t>(j),
                                    counts[i][j]});
        }
    }
    m.total_ = 0.0;
    for (double s : m.occurrence_) m.total_ += s;
    std::sort(m.pairs_.begin(), m.pairs_.end(), [](const PairCell& a, const PairCell& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    return m;
}

double CooccurrenceMatrix::pair_count(size_t i, size_t j) const {
    if (i == j) return 0.0;
    uint32_t a = static_cast<uint32_t>(std::min(i, j));
    uint32_t b = static_cast<uint32_t>(std::max(i, j));
    PairCell probe{a, b, 0.0};
    auto it = std::lower_bound(pairs_.begin(), pairs_.end(), probe,
                               [](const PairCell& x, const PairCell& y) {
                                   return x.i != y.i ? x.i < y.i : x.j < y.j;
                               });
    if (it != pairs_.end() && it->i == a && it->j == b) return it->value;
    return 0.0;
}

CooccurrenceMatrix CooccurrenceMatrix::merged_with(const CooccurrenceMatrix& other) const {
    std::vector<std::string> techs = technologies_;
    if (technologies_ != other.technologies_) {
        for (const auto& t : other.technologies_)
            if (std::find(techs.begin(), techs.end(), t) == techs.end()) techs.push_back(t);
        std::sort(techs.begin(), techs.end());
    }
    auto index_of = [&](const std::string& s) {
        return static_cast<size_t>(std::find(techs.begin(), techs.end(), s) - techs.begin());
    };
    size_t n = techs.size();
    std::vector<std::vector<double>> counts(n, std::vector<double>(n, 0.0));
    std::vector<double> occurrence(n, 0.0);
    for (const CooccurrenceMatrix* m : {this, &other}) {
        for (const PairCell& p : m->pairs_) {
            size_t i = index_of(m->technologies_[p.i]);
            size_t j = index_of(m->technologies_[p.j]);
            counts[i][j] += p.value;
            counts[j][i] += p.value;
        }
        for (size_t i = 0; i < m->occurrence_.size(); ++i)
            occurrence[index_of(m->technologies_[i])] += m->occurrence_[i];
    }
    return from_counts(std::move(techs), counts, std::move(occurrence), window_, scope_);
}

// ---------------------------------------------------------------------------
// builders

OccurrenceMatrix build_occurrence_serial(const std::vector<CompactRecord>& records,
                                         const CorpusIndex& index,
                                         const MatrixBuildOptions& opts) {
    AccumMap acc;
    accumulate_occurrence(records, 0, records.size(), opts, acc);
    return finalize_occurrence(acc, index, opts);
}

OccurrenceMatrix build_occurrence(const std::vector<CompactRecord>& records,
                                  const CorpusIndex& index,
                                  const MatrixBuildOptions& opts) {
    if (records.size() < kSerialCutoff) return build_occurrence_serial(records, index, opts);
    std::vector<AccumMap> partials(kShards);
    for_each_shard(records.size(), [&](size_t lo, size_t hi, size_t shard) {
        accumulate_occurrence(records, lo, hi, opts, partials[shard]);
    });
    AccumMap acc;
    for (const AccumMap& p : partials) merge_into(acc, p);
    return finalize_occurrence(acc, index, opts);
}

CooccurrenceMatrix build_cooccurrence_serial(const std::vector<CompactRecord>& records,
                                             const CorpusIndex& index,
                                             const MatrixBuildOptions& opts) {
    AccumMap pairs, occ;
    accumulate_cooccurrence(records, 0, records.size(), opts, pairs, occ);
    return finalize_cooccurrence(pairs, occ, index, opts);
}

CooccurrenceMatrix build_cooccurrence(const std::vector<CompactRecord>& records,
                                      const CorpusIndex& index,
                                      const MatrixBuildOptions& opts) {
    if (records.size() < kSerialCutoff)
        return build_cooccurrence_serial(records, index, opts);
    std::vector<AccumMap> pair_partials(kShards), occ_partials(kShards);
    for_each_shard(records.size(), [&](size_t lo, size_t hi, size_t shard) {
        accumulate_cooccurrence(records, lo, hi, opts, pair_partials[shard],
                                occ_partials[shard]);
    });
    AccumMap pairs, occ;
    for (size_t s = 0; s < kShards; ++s) {
        merge_into(pairs, pair_partials[s]);
        merge_into(occ, occ_partials[s]);
    }
    return finalize_cooccurrence(pairs, occ, index, opts);
}

long count_matrix_exclusions(const std::vector<CompactRecord>& records,
                             const RecordSelection& select, TechLevel level) {
    long n = 0;
    for (const CompactRecord& r : records) {
        if (!selected(r, select)) continue;
        if (r.countries.empty() || techs_of(r, level).empty()) ++n;
    }
    return n;
}

// ---------------------------------------------------------------------------
// serialization

void write_occurrence_csv(std::ostream& out, const OccurrenceMatrix& m) {
    write_csv_row(out, {"entity", "technology", "value"});
    for (const auto& c : m.cells())
        write_csv_row(out, {m.entities()[c.entity], m.technologies()[c.tech],
                            format_value(c.value)});
}

std::string occurrence_sidecar_json(const OccurrenceMatrix& m) {
    nlohmann::json j;
    j["kind"] = "occurrence";
    j["entities"] = m.entities();
    j["technologies"] = m.technologies();
    j["window"] = m.window();
    j["scope"] = m.scope();
    j["counting"] = to_string(m.counting());
    j["total"] = m.total();
    return j.dump(2) + "\n";
}

void write_cooccurrence_csv(std::ostream& out, const CooccurrenceMatrix& m) {
    write_csv_row(out, {"technology_i", "technology_j", "value"});
    for (const auto& p : m.pairs())
        write_csv_row(out, {m.technologies()[p.i], m.technologies()[p.j],
                            format_value(p.value)});
}

std::string cooccurrence_sidecar_json(const CooccurrenceMatrix& m) {
    nlohmann::json j;
    j["kind"] = "cooccurrence";
    j["technologies"] = m.technologies();
    j["occurrence"] = m.occurrence_totals();
    j["window"] = m.window();
    j["scope"] = m.scope();
    j["total"] = m.total();
    return j.dump(2) + "\n";
}

} // namespace techspace
