#ifndef TECHSPACE_PIPELINE_HPP
#define TECHSPACE_PIPELINE_HPP

#include "techspace/corpus.hpp"
#include "techspace/fields.hpp"
#include "techspace/matrix.hpp"
#include "techspace/metrics.hpp"
#include "techspace/records.hpp"
#include "techspace/space.hpp"

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace techspace {

// Everything one run needs; loaded from a JSON config file with CLI flag
// overrides applied on top.
struct RunConfig {
    std::string input;
    std::string keywords;
    std::string concordance;
    std::string categories; // empty = built-in Appendix-style defaults
    WindowSpec windows = WindowSpec::default_windows();
    Counting counting = Counting::whole;
    int morc_steps = 1;
    int mort_steps = 2;
    long backbone_k = 70;
    std::vector<std::string> countries = {"US", "JP", "KR", "CN"};
    std::string out = "out";
    bool relatedness_positive_pairs_only = false;
    bool category_relatedness_incident = false;
    CorpusSchema schema;

    static RunConfig from_json_file(const std::string& path);
    void validate() const; // throws ConfigError
    std::vector<CategorySpec> load_category_specs() const;
};

struct CorpusStats {
    long rows_total = 0;
    long parsed = 0;
    long skipped = 0;
    long ai = 0;
    long out_of_window = 0;
    long no_country = 0;
    long no_field = 0;
    long no_subclass = 0;
    std::map<std::string, long> unmapped_ipc;  // normalized symbol -> count
    std::map<std::string, long> keyword_hits;  // label -> records matched
    std::vector<RowDiagnostic> diagnostics;    // first N skipped rows
    std::vector<long> window_counts_all;       // per-window record counts
    std::vector<long> window_counts_ai;
};

struct LoadedCorpus {
    CorpusIndex index;
    std::vector<CompactRecord> records;
    CorpusStats stats;
};

// Streams the corpus through parse -> classify -> field/window assignment.
// `ai_sink`, when set, receives every AI-flagged record with its keyword hits
// in input order. Throws ConfigError for unreadable inputs and DataError when
// every data row was rejected.
using AiSink =
    std::function<void(const PatentRecord&, const std::vector<std::string>&)>;
LoadedCorpus load_corpus(const RunConfig& config, const AiSink* ai_sink = nullptr);

// One row of the single tabular metrics contract.
struct MetricRow {
    std::string window;
    std::string scope;
    std::string axis;   // "entity", "technology" or ""
    std::string label;
    std::string metric;
    int iteration = -1; // -1 prints empty
    double value = 0.0; // NaN prints empty
};

struct MetricsResult {
    std::vector<std::string> window_labels; // config windows, then "ALL"
    std::vector<MetricRow> rows;
    std::map<std::string, OccurrenceMatrix> occurrence;
    std::map<std::string, CooccurrenceMatrix> cooccurrence;
    std::map<std::string, RcaMatrix> rca_matrices;
    std::map<std::string, BinaryRcaMatrix> binary_matrices;
    std::map<std::string, RelatednessMatrix> relatedness_matrices;
    std::map<std::string, ComplexityVector> complexity;
    CorePartition core;
};

// key helpers for the matrix maps: e.g. rca key "raw_field_all_P1"
std::string matrix_key(const std::string& kind, const std::string& level,
                       const std::string& scope, const std::string& window);

MetricsResult compute_metrics(const LoadedCorpus& corpus, const RunConfig& config);

struct SpaceResult {
    TechnologySpace global;                        // backbone extracted
    std::vector<std::pair<std::string, Overlay>> overlays; // (scope_window, overlay)
};
SpaceResult compute_space(const MetricsResult& metrics, const RunConfig& config);

// stage commands: compute + write outputs under config.out; wall-clock
// timings go to `console`, the output files are bit-reproducible
void cmd_classify(const RunConfig& config, std::ostream& console);
void cmd_metrics(const RunConfig& config, std::ostream& console);
void cmd_space(const RunConfig& config, std::ostream& console);
void cmd_report(const RunConfig& config, std::ostream& console);

// serialization helpers shared by stages and tests
void write_metrics_csv(std::ostream& out, const std::vector<MetricRow>& rows);
std::string rca_csv(const RcaMatrix& m);
std::string rca_sidecar_json(const RcaMatrix& m);
std::string binary_csv(const BinaryRcaMatrix& m);
std::string relatedness_csv(const RelatednessMatrix& m);
std::string relatedness_sidecar_json(const RelatednessMatrix& m);

// write-temp-then-rename; creates parent directories
void atomic_write(const std::string& path, const std::string& content);

} // namespace techspace

#endif
