#include "techspace/pipeline.hpp"

#include "techspace/csv.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace techspace {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// config

RunConfig RunConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }
    RunConfig cfg;
    try {
        cfg.input = j.value("input", cfg.input);
        cfg.keywords = j.value("keywords", cfg.keywords);
        cfg.concordance = j.value("concordance", cfg.concordance);
        cfg.categories = j.value("categories", cfg.categories);
        if (j.contains("windows")) {
            if (j["windows"].is_string()) {
                cfg.windows = WindowSpec::parse(j["windows"].get<std::string>());
            } else {
                std::vector<Window> ws;
                for (const auto& w : j["windows"])
                    ws.push_back({w.at("label").get<std::string>(), w.at("start").get<int>(),
                                  w.at("end").get<int>()});
                cfg.windows = WindowSpec::from_windows(std::move(ws));
            }
        }
        if (j.contains("counting")) {
            std::string c = j["counting"].get<std::string>();
            if (c == "whole")
                cfg.counting = Counting::whole;
            else if (c == "fractional")
                cfg.counting = Counting::fractional;
            else
                throw ConfigError("counting must be 'whole' or 'fractional', got '" + c + "'");
        }
        cfg.morc_steps = j.value("morc_steps", cfg.morc_steps);
        cfg.mort_steps = j.value("mort_steps", cfg.mort_steps);
        cfg.backbone_k = j.value("backbone_k", cfg.backbone_k);
        if (j.contains("countries"))
            cfg.countries = j["countries"].get<std::vector<std::string>>();
        cfg.out = j.value("out", cfg.out);
        cfg.relatedness_positive_pairs_only =
            j.value("relatedness_positive_pairs_only", cfg.relatedness_positive_pairs_only);
        cfg.category_relatedness_incident =
            j.value("category_relatedness_incident", cfg.category_relatedness_incident);
        if (j.contains("schema")) {
            const auto& s = j["schema"];
            cfg.schema.id = s.value("id", cfg.schema.id);
            cfg.schema.year = s.value("year", cfg.schema.year);
            cfg.schema.title = s.value("title", cfg.schema.title);
            cfg.schema.abstract = s.value("abstract", cfg.schema.abstract);
            cfg.schema.countries = s.value("countries", cfg.schema.countries);
            cfg.schema.ipc = s.value("ipc", cfg.schema.ipc);
        }
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }
    return cfg;
}

void RunConfig::validate() const {
    if (input.empty()) throw ConfigError("no input file configured");
    if (!fs::exists(input)) throw ConfigError("input file does not exist: " + input);
    if (keywords.empty()) throw ConfigError("no keyword file configured");
    if (!fs::exists(keywords)) throw ConfigError("keyword file does not exist: " + keywords);
    if (concordance.empty()) throw ConfigError("no concordance file configured");
    if (!fs::exists(concordance))
        throw ConfigError("concordance file does not exist: " + concordance);
    if (!categories.empty() && !fs::exists(categories))
        throw ConfigError("category file does not exist: " + categories);
    if (morc_steps < 0 || mort_steps < 0)
        throw ConfigError("reflection steps must be >= 0");
    if (backbone_k < 0) throw ConfigError("backbone-k must be >= 0");
    if (out.empty()) throw ConfigError("no output directory configured");
    for (const auto& c : countries) {
        if (c.size() != 2 || !std::isalpha(static_cast<unsigned char>(c[0])) ||
            !std::isalpha(static_cast<unsigned char>(c[1])) ||
            std::islower(static_cast<unsigned char>(c[0])) ||
            std::islower(static_cast<unsigned char>(c[1])))
            throw ConfigError("country list entries must be ISO alpha-2 codes, got '" + c +
                              "'");
    }
}

std::vector<CategorySpec> RunConfig::load_category_specs() const {
    if (categories.empty()) return default_categories();
    return load_categories(categories);
}

// ---------------------------------------------------------------------------
// corpus loading

LoadedCorpus load_corpus(const RunConfig& config, const AiSink* ai_sink) {
    config.validate();
    std::ifstream in(config.input, std::ios::binary);
    if (!in) throw ConfigError("cannot open input file: " + config.input);

    CorpusParser parser(in, config.schema);
    KeywordSet keywords = KeywordSet::load(config.keywords);
    FieldConcordance conc = FieldConcordance::load(config.concordance);

    LoadedCorpus corpus;
    corpus.stats.window_counts_all.assign(config.windows.size(), 0);
    corpus.stats.window_counts_ai.assign(config.windows.size(), 0);

    constexpr size_t kBatch = 4096;
    std::vector<PatentRecord> batch(kBatch);
    std::vector<std::vector<uint32_t>> hits(kBatch);

    for (;;) {
        size_t n = 0;
        while (n < kBatch && parser.next(batch[n])) ++n;
        if (n == 0) break;

#ifdef _OPENMP
#pragma omp parallel num_threads(effective_threads())
#endif
        {
            std::string scratch;
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
            for (long i = 0; i < static_cast<long>(n); ++i)
                match_ai_into(batch[i].title, batch[i].abstract, keywords, scratch,
                              hits[i]);
        }

        for (size_t i = 0; i < n; ++i) {
            const PatentRecord& rec = batch[i];
            CompactRecord c;
            c.year = rec.year;
            c.is_ai = hits[i].empty() ? 0 : 1;
            auto w = config.windows.assign(rec.year);
            c.window = w ? static_cast<int16_t>(*w) : int16_t{-1};
            for (const auto& country : rec.countries)
                c.countries.push_back(corpus.index.countries.intern(country));
            std::vector<int> fields =
                map_ipc_to_fields(rec.ipc_codes, conc, &corpus.stats.unmapped_ipc);
            for (int f : fields) c.fields.push_back(static_cast<uint32_t>(f));
            std::sort(c.fields.begin(), c.fields.end());
            for (const auto& code : rec.ipc_codes) {
                if (auto sub = ipc_subclass(code)) {
                    uint32_t id = corpus.index.subclasses.intern(*sub);
                    bool seen = false;
                    for (uint32_t s : c.subclasses) seen = seen || s == id;
                    if (!seen) c.subclasses.push_back(id);
                }
            }

            CorpusStats& st = corpus.stats;
            ++st.parsed;
            if (c.is_ai) {
                ++st.ai;
                for (uint32_t h : hits[i]) ++st.keyword_hits[keywords.rules()[h].label];
            }
            if (c.window < 0)
                ++st.out_of_window;
            else {
                ++st.window_counts_all[c.window];
                if (c.is_ai) ++st.window_counts_ai[c.window];
            }
            if (rec.countries.empty()) ++st.no_country;
            if (c.fields.empty()) ++st.no_field;
            if (c.subclasses.empty()) ++st.no_subclass;

            if (ai_sink && c.is_ai) {
                std::vector<std::string> labels;
                for (uint32_t h : hits[i]) labels.push_back(keywords.rules()[h].label);
                (*ai_sink)(rec, labels);
            }
            corpus.records.push_back(std::move(c));
        }
    }

    corpus.stats.rows_total = parser.rows_total();
    corpus.stats.skipped = parser.rows_skipped();
    corpus.stats.diagnostics = parser.diagnostics();
    if (corpus.stats.rows_total > 0 && corpus.stats.parsed == 0)
        throw DataError("all " + std::to_string(corpus.stats.rows_total) +
                        " data rows were rejected");
    return corpus;
}

// ---------------------------------------------------------------------------
// metrics

std::string matrix_key(const std::string& kind, const std::string& level,
                       const std::string& scope, const std::string& window) {
    return kind + "_" + level + "_" + scope + "_" + window;
}

namespace {

struct WindowCase {
    std::string label;
    int index; // -1 = pooled ALL
};

void emit_complexity_rows(MetricsResult& res, const std::string& window,
                          const std::string& scope, const ComplexityVector& v,
                          const std::string& metric) {
    for (size_t i = 0; i < v.labels.size(); ++i) {
        res.rows.push_back({window, scope,
                            v.axis == Axis::entity ? "entity" : "technology", v.labels[i],
                            metric, v.steps, v.values[i]});
    }
}

void emit_missing_metric_rows(MetricsResult& res, const std::string& window,
                              const std::string& scope,
                              const std::vector<CategorySpec>& cats) {
    res.rows.push_back({window, scope, "technology", "", "relatedness_overall", -1,
                        missing_value()});
    for (const auto& cat : cats) {
        res.rows.push_back({window, scope, "technology", cat.name, "relatedness_category",
                            -1, missing_value()});
        res.rows.push_back({window, scope, "technology", cat.name,
                            "complexity_category_sum", -1, missing_value()});
    }
}

void emit_missing_scope_rows(MetricsResult& res, const std::string& window,
                             const std::string& scope,
                             const std::vector<CategorySpec>& cats) {
    res.rows.push_back({window, scope, "", "", "record_count", -1, 0.0});
    emit_missing_metric_rows(res, window, scope, cats);
}

long count_selected(const std::vector<CompactRecord>& records, RecordSelection sel) {
    long n = 0;
    for (const auto& r : records) {
        if (r.window < 0) continue;
        if (sel.window >= 0 && r.window != sel.window) continue;
        if (sel.ai >= 0 && static_cast<int>(r.is_ai) != sel.ai) continue;
        if (sel.country >= 0) {
            bool has = false;
            for (uint32_t c : r.countries)
                has = has || c == static_cast<uint32_t>(sel.country);
            if (!has) continue;
        }
        ++n;
    }
    return n;
}

// all-zero single-entity matrix over the field universe, for windows where a
// corpus slice is empty (keeps core detection window-complete)
BinaryRcaMatrix zero_binary_row(const std::string& entity, const std::string& window,
                                const std::string& scope) {
    BinaryRcaMatrix m;
    m.entities = {entity};
    for (const auto& f : field_universe()) m.technologies.push_back(f.name);
    m.values.assign(m.technologies.size(), 0);
    m.window = window;
    m.scope = scope;
    return m;
}

} // namespace

MetricsResult compute_metrics(const LoadedCorpus& corpus, const RunConfig& config) {
    MetricsResult res;
    const auto cats = config.load_category_specs();
    const auto& records = corpus.records;
    const auto& index = corpus.index;

    std::vector<WindowCase> cases;
    for (size_t w = 0; w < config.windows.size(); ++w) {
        cases.push_back({config.windows.label(static_cast<int>(w)), static_cast<int>(w)});
        res.window_labels.push_back(cases.back().label);
    }
    cases.push_back({"ALL", -1});
    res.window_labels.push_back("ALL");

    std::vector<BinaryRcaMatrix> ai_rows_per_window; // drives core detection

    for (const auto& wc : cases) {
        // ---- scope "all" and scope "ai": country x field matrices
        for (int ai : {-1, 1}) {
            std::string scope = ai < 0 ? "all" : "ai";
            MatrixBuildOptions opts;
            opts.axis = EntityAxis::country;
            opts.level = TechLevel::field;
            opts.counting = config.counting;
            opts.select = {wc.index, ai, -1};
            opts.window_label = wc.label;
            opts.scope_label = scope;

            long selected = count_selected(records, opts.select);
            if (selected == 0) {
                emit_missing_scope_rows(res, wc.label, scope, cats);
                continue;
            }
            res.rows.push_back({wc.label, scope, "", "", "record_count", -1,
                                static_cast<double>(selected)});
            res.rows.push_back(
                {wc.label, scope, "", "", "records_excluded_from_matrices", -1,
                 static_cast<double>(
                     count_matrix_exclusions(records, opts.select, opts.level))});

            OccurrenceMatrix occ = build_occurrence(records, index, opts);
            if (occ.empty()) { // selected records all lacked countries/fields
                emit_missing_metric_rows(res, wc.label, scope, cats);
                continue;
            }
            RcaMatrix r = rca(occ);
            BinaryRcaMatrix b = binarize(r);
            RcaMatrix l = log10_rca(r);
            res.occurrence.emplace(matrix_key("occurrence", "field", scope, wc.label), occ);
            res.rca_matrices.emplace(matrix_key("rca_raw", "field", scope, wc.label), r);
            res.binary_matrices.emplace(matrix_key("rca_binary", "field", scope, wc.label),
                                        b);
            res.rca_matrices.emplace(matrix_key("rca_log10", "field", scope, wc.label), l);

            ComplexityVector kt = method_of_reflections(b, Axis::technology,
                                                        config.mort_steps);
            ComplexityVector kc = country_complexity(b, config.morc_steps);
            ComplexityVector ubiquity = method_of_reflections(b, Axis::technology, 0);
            ComplexityVector diversity = method_of_reflections(b, Axis::entity, 0);
            res.complexity.emplace(matrix_key("mort", "field", scope, wc.label), kt);
            res.complexity.emplace(matrix_key("morc", "field", scope, wc.label), kc);
            emit_complexity_rows(res, wc.label, scope, kt, "mort");
            emit_complexity_rows(res, wc.label, scope, kc, "morc");
            emit_complexity_rows(res, wc.label, scope, ubiquity, "ubiquity");
            emit_complexity_rows(res, wc.label, scope, diversity, "diversity");

            CooccurrenceMatrix cooc = build_cooccurrence(records, index, opts);
            RelatednessMatrix phi = association_strength(cooc);
            res.cooccurrence.emplace(
                matrix_key("cooccurrence", "field", scope, wc.label), cooc);
            res.relatedness_matrices.emplace(
                matrix_key("relatedness", "field", scope, wc.label), phi);
            res.rows.push_back(
                {wc.label, scope, "technology", "", "relatedness_overall", -1,
                 overall_relatedness(phi, config.relatedness_positive_pairs_only)});
            for (const auto& cat : cats) {
                double rel = config.category_relatedness_incident
                                 ? category_relatedness_incident(phi, cat)
                                 : category_relatedness(phi, cat);
                res.rows.push_back({wc.label, scope, "technology", cat.name,
                                    "relatedness_category", -1, rel});
                CategoryComplexity cc = category_complexity(kt, cat);
                res.rows.push_back({wc.label, scope, "technology", cat.name,
                                    "complexity_category_sum", kt.steps, cc.value});
            }
            // whole-universe complexity sum, reported alongside the categories
            double kt_sum = 0.0;
            for (double v : kt.values)
                if (!is_missing(v)) kt_sum += v;
            res.rows.push_back({wc.label, scope, "technology", "", "complexity_sum",
                                kt.steps, kt_sum});
        }

        // ---- scope "ai_corpus": the AI slice against the general corpus
        {
            MatrixBuildOptions opts;
            opts.axis = EntityAxis::corpus;
            opts.level = TechLevel::field;
            opts.counting = config.counting;
            opts.window_label = wc.label;
            opts.scope_label = "ai_corpus";
            opts.select = {wc.index, 1, -1};
            opts.corpus_entity = "ai";
            OccurrenceMatrix ai_slice = build_occurrence(records, index, opts);
            opts.select.ai = 0;
            opts.corpus_entity = "rest";
            OccurrenceMatrix rest_slice = build_occurrence(records, index, opts);

            BinaryRcaMatrix ai_binary;
            if (ai_slice.empty()) {
                ai_binary = zero_binary_row("ai", wc.label, "ai_corpus");
            } else {
                OccurrenceMatrix stacked = rest_slice.empty()
                                               ? ai_slice
                                               : ai_slice.merged_with(rest_slice);
                RcaMatrix r = rca(stacked);
                ai_binary = binarize(r);
                res.occurrence.emplace(
                    matrix_key("occurrence", "field", "ai_corpus", wc.label), stacked);
                res.rca_matrices.emplace(
                    matrix_key("rca_raw", "field", "ai_corpus", wc.label), r);
                res.rca_matrices.emplace(
                    matrix_key("rca_log10", "field", "ai_corpus", wc.label), log10_rca(r));
                res.binary_matrices.emplace(
                    matrix_key("rca_binary", "field", "ai_corpus", wc.label), ai_binary);
            }
            if (wc.index >= 0) ai_rows_per_window.push_back(ai_binary);
        }

        // ---- per-country relatedness scopes
        for (const auto& cc : config.countries) {
            auto cid = index.countries.find(cc);
            long selected = 0;
            if (cid) {
                RecordSelection sel{wc.index, -1, static_cast<int>(*cid)};
                selected = count_selected(records, sel);
            }
            if (selected == 0) {
                emit_missing_scope_rows(res, wc.label, cc, cats);
                continue;
            }
            MatrixBuildOptions opts;
            opts.axis = EntityAxis::country;
            opts.level = TechLevel::field;
            opts.counting = config.counting;
            opts.select = {wc.index, -1, static_cast<int>(*cid)};
            opts.window_label = wc.label;
            opts.scope_label = cc;
            res.rows.push_back({wc.label, cc, "", "", "record_count", -1,
                                static_cast<double>(selected)});
            CooccurrenceMatrix cooc = build_cooccurrence(records, index, opts);
            if (cooc.empty() || cooc.total() <= 0) {
                emit_missing_metric_rows(res, wc.label, cc, cats);
                continue;
            }
            RelatednessMatrix phi = association_strength(cooc);
            res.cooccurrence.emplace(matrix_key("cooccurrence", "field", cc, wc.label),
                                     cooc);
            res.relatedness_matrices.emplace(
                matrix_key("relatedness", "field", cc, wc.label), phi);
            res.rows.push_back(
                {wc.label, cc, "technology", "", "relatedness_overall", -1,
                 overall_relatedness(phi, config.relatedness_positive_pairs_only)});
            for (const auto& cat : cats) {
                double rel = config.category_relatedness_incident
                                 ? category_relatedness_incident(phi, cat)
                                 : category_relatedness(phi, cat);
                res.rows.push_back({wc.label, cc, "technology", cat.name,
                                    "relatedness_category", -1, rel});
            }
        }

        // ---- subclass-level RCA for scope all and scope ai
        for (int ai : {-1, 1}) {
            std::string scope = ai < 0 ? "all" : "ai";
            MatrixBuildOptions opts;
            opts.axis = EntityAxis::country;
            opts.level = TechLevel::subclass;
            opts.counting = config.counting;
            opts.select = {wc.index, ai, -1};
            opts.window_label = wc.label;
            opts.scope_label = scope;
            OccurrenceMatrix occ = build_occurrence(records, index, opts);
            if (occ.empty() || occ.total() <= 0) continue;
            RcaMatrix r = rca(occ);
            res.occurrence.emplace(matrix_key("occurrence", "subclass", scope, wc.label),
                                   occ);
            res.rca_matrices.emplace(matrix_key("rca_raw", "subclass", scope, wc.label), r);
            res.rca_matrices.emplace(matrix_key("rca_log10", "subclass", scope, wc.label),
                                     log10_rca(r));
        }
    }

    // ---- core detection over the configured windows
    res.core = detect_core(ai_rows_per_window, "ai");
    for (const auto& f : res.core.core)
        res.rows.push_back({"ALL", "ai_corpus", "technology", f, "core_membership", -1, 1.0});
    for (const auto& f : res.core.related)
        res.rows.push_back(
            {"ALL", "ai_corpus", "technology", f, "related_membership", -1, 1.0});

    // deterministic row order
    std::map<std::string, int> window_order;
    for (size_t i = 0; i < res.window_labels.size(); ++i)
        window_order[res.window_labels[i]] = static_cast<int>(i);
    std::stable_sort(res.rows.begin(), res.rows.end(),
                     [&](const MetricRow& a, const MetricRow& b) {
                         int wa = window_order[a.window], wb = window_order[b.window];
                         if (wa != wb) return wa < wb;
                         if (a.scope != b.scope) return a.scope < b.scope;
                         if (a.metric != b.metric) return a.metric < b.metric;
                         if (a.axis != b.axis) return a.axis < b.axis;
                         if (a.label != b.label) return a.label < b.label;
                         return a.iteration < b.iteration;
                     });
    return res;
}

// ---------------------------------------------------------------------------
// space

SpaceResult compute_space(const MetricsResult& metrics, const RunConfig& config) {
    SpaceResult out;
    auto phi_it = metrics.relatedness_matrices.find(
        matrix_key("relatedness", "field", "all", "ALL"));
    auto kt_it = metrics.complexity.find(matrix_key("mort", "field", "all", "ALL"));
    if (phi_it == metrics.relatedness_matrices.end() ||
        kt_it == metrics.complexity.end())
        throw DataError("global technology space needs pooled all-patent metrics");

    std::map<std::string, std::string> sectors;
    for (const auto& f : field_universe()) sectors[f.name] = f.sector;

    out.global = extract_backbone(build_space(phi_it->second, kt_it->second, sectors),
                                  config.backbone_k);

    const auto cats = config.load_category_specs();
    for (const auto& wlabel : metrics.window_labels) {
        if (wlabel == "ALL") continue;
        // AI specialisation overlay (the corpus-slice row)
        auto b = metrics.binary_matrices.find(
            matrix_key("rca_binary", "field", "ai_corpus", wlabel));
        if (b != metrics.binary_matrices.end()) {
            out.overlays.emplace_back(
                "ai_" + wlabel,
                overlay_specialisation(out.global, b->second, "ai", wlabel, cats));
        }
        // per-country overlays from the all-patent country matrix
        auto all_b = metrics.binary_matrices.find(
            matrix_key("rca_binary", "field", "all", wlabel));
        if (all_b == metrics.binary_matrices.end()) continue;
        for (const auto& cc : config.countries) {
            if (std::find(all_b->second.entities.begin(), all_b->second.entities.end(),
                          cc) == all_b->second.entities.end())
                continue;
            out.overlays.emplace_back(
                cc + "_" + wlabel,
                overlay_specialisation(out.global, all_b->second, cc, wlabel, cats));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// serialization helpers

void write_metrics_csv(std::ostream& out, const std::vector<MetricRow>& rows) {
    write_csv_row(out, {"window", "scope", "axis", "label", "metric", "iteration",
                        "value"});
    for (const auto& r : rows) {
        write_csv_row(out, {r.window, r.scope, r.axis, r.label, r.metric,
                            r.iteration < 0 ? "" : std::to_string(r.iteration),
                            format_value(r.value)});
    }
}

std::string rca_csv(const RcaMatrix& m) {
    std::ostringstream out;
    write_csv_row(out, {"entity", "technology", "value"});
    for (size_t e = 0; e < m.entities.size(); ++e)
        for (size_t t = 0; t < m.technologies.size(); ++t)
            write_csv_row(out, {m.entities[e], m.technologies[t], format_value(m.at(e, t))});
    return out.str();
}

std::string rca_sidecar_json(const RcaMatrix& m) {
    json j;
    j["kind"] = "rca";
    j["transform"] = m.transform == RcaMatrix::Transform::raw ? "raw" : "log10";
    j["entities"] = m.entities;
    j["technologies"] = m.technologies;
    j["window"] = m.window;
    j["scope"] = m.scope;
    return j.dump(2) + "\n";
}

std::string binary_csv(const BinaryRcaMatrix& m) {
    std::ostringstream out;
    write_csv_row(out, {"entity", "technology", "value"});
    for (size_t e = 0; e < m.entities.size(); ++e)
        for (size_t t = 0; t < m.technologies.size(); ++t)
            write_csv_row(out, {m.entities[e], m.technologies[t],
                                m.at(e, t) ? "1" : "0"});
    return out.str();
}

std::string relatedness_csv(const RelatednessMatrix& m) {
    std::ostringstream out;
    write_csv_row(out, {"technology_i", "technology_j", "value"});
    size_t n = m.technologies.size();
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            write_csv_row(out, {m.technologies[i], m.technologies[j],
                                format_value(m.at(i, j))});
    return out.str();
}

std::string relatedness_sidecar_json(const RelatednessMatrix& m) {
    json j;
    j["kind"] = "relatedness";
    j["normalization"] = "association-strength";
    j["technologies"] = m.technologies;
    j["occurrence"] = m.occurrence;
    j["window"] = m.window;
    j["scope"] = m.scope;
    return j.dump(2) + "\n";
}

void atomic_write(const std::string& path, const std::string& content) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw ConfigError("short write to " + tmp.string());
    }
    fs::rename(tmp, p);
}

// ---------------------------------------------------------------------------
// stage commands

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

json stats_json(const CorpusStats& st, const RunConfig& config) {
    json j;
    j["rows_total"] = st.rows_total;
    j["parsed"] = st.parsed;
    j["skipped"] = st.skipped;
    j["ai"] = st.ai;
    j["non_ai"] = st.parsed - st.ai;
    j["out_of_window"] = st.out_of_window;
    j["records_without_country"] = st.no_country;
    j["records_without_field"] = st.no_field;
    j["records_without_subclass"] = st.no_subclass;
    j["keyword_hits"] = st.keyword_hits;
    json unmapped = json::object();
    for (const auto& [symbol, n] : st.unmapped_ipc) unmapped[symbol] = n;
    j["unmapped_ipc"] = unmapped;
    json diags = json::array();
    for (const auto& d : st.diagnostics) diags.push_back({{"line", d.line},
                                                          {"reason", d.reason}});
    j["diagnostics"] = diags;
    json wc = json::array();
    for (size_t w = 0; w < config.windows.size(); ++w)
        wc.push_back({{"window", config.windows.label(static_cast<int>(w))},
                      {"records", st.window_counts_all[w]},
                      {"ai", st.window_counts_ai[w]}});
    j["window_counts"] = wc;
    return j;
}

void write_matrix_outputs(const MetricsResult& metrics, const RunConfig& config) {
    fs::path dir = fs::path(config.out) / "matrices";
    for (const auto& [key, m] : metrics.occurrence) {
        std::ostringstream csv;
        write_occurrence_csv(csv, m);
        atomic_write((dir / (key + ".csv")).string(), csv.str());
        atomic_write((dir / (key + ".meta.json")).string(), occurrence_sidecar_json(m));
    }
    for (const auto& [key, m] : metrics.cooccurrence) {
        std::ostringstream csv;
        write_cooccurrence_csv(csv, m);
        atomic_write((dir / (key + ".csv")).string(), csv.str());
        atomic_write((dir / (key + ".meta.json")).string(), cooccurrence_sidecar_json(m));
    }
    for (const auto& [key, m] : metrics.rca_matrices) {
        atomic_write((dir / (key + ".csv")).string(), rca_csv(m));
        atomic_write((dir / (key + ".meta.json")).string(), rca_sidecar_json(m));
    }
    for (const auto& [key, m] : metrics.binary_matrices) {
        atomic_write((dir / (key + ".csv")).string(), binary_csv(m));
    }
    for (const auto& [key, m] : metrics.relatedness_matrices) {
        atomic_write((dir / (key + ".csv")).string(), relatedness_csv(m));
        atomic_write((dir / (key + ".meta.json")).string(), relatedness_sidecar_json(m));
    }
}

void write_space_outputs(const SpaceResult& space, const RunConfig& config) {
    fs::path dir = fs::path(config.out) / "space";
    atomic_write((dir / "space_global.graphml").string(),
                 export_graph(space.global, nullptr, GraphFormat::graphml));
    atomic_write((dir / "space_global.dot").string(),
                 export_graph(space.global, nullptr, GraphFormat::dot));
    atomic_write((dir / "space_global.json").string(),
                 export_graph(space.global, nullptr, GraphFormat::json));
    for (const auto& [name, overlay] : space.overlays) {
        atomic_write((dir / ("space_" + name + ".graphml")).string(),
                     export_graph(space.global, &overlay, GraphFormat::graphml));
    }
}

double metric_value(const MetricsResult& metrics, const std::string& window,
                    const std::string& scope, const std::string& metric,
                    const std::string& label) {
    for (const auto& r : metrics.rows) {
        if (r.window == window && r.scope == scope && r.metric == metric &&
            r.label == label)
            return r.value;
    }
    return missing_value();
}

json value_or_null(double v) {
    if (is_missing(v)) return nullptr;
    return v;
}

json build_report_json(const LoadedCorpus& corpus, const MetricsResult& metrics,
                       const RunConfig& config) {
    json j;
    j["schema_version"] = 1;
    j["counts"] = stats_json(corpus.stats, config);

    json windows = json::array();
    for (const auto& w : config.windows.windows())
        windows.push_back({{"label", w.label}, {"start", w.start_year},
                           {"end", w.end_year}});
    j["windows"] = windows;

    j["parameters"] = {{"counting", to_string(config.counting)},
                       {"morc_steps", config.morc_steps},
                       {"mort_steps", config.mort_steps},
                       {"backbone_k", config.backbone_k},
                       {"countries", config.countries}};

    const auto cats = config.load_category_specs();
    json core;
    core["core"] = metrics.core.core;
    core["related"] = metrics.core.related;
    for (const auto& cat : cats)
        if (cat.name == "Surrounding") core["surrounding"] = cat.members;
    j["core_detection"] = core;

    // figure-3-shaped: AI relatedness and complexity per window and category
    json ai_trends = json::array();
    for (const auto& w : metrics.window_labels) {
        if (w == "ALL") continue;
        ai_trends.push_back(
            {{"window", w},
             {"category", "overall"},
             {"relatedness",
              value_or_null(metric_value(metrics, w, "ai", "relatedness_overall", ""))},
             {"complexity",
              value_or_null(metric_value(metrics, w, "ai", "complexity_sum", ""))}});
        for (const auto& cat : cats) {
            ai_trends.push_back(
                {{"window", w},
                 {"category", cat.name},
                 {"relatedness", value_or_null(metric_value(
                                     metrics, w, "ai", "relatedness_category", cat.name))},
                 {"complexity",
                  value_or_null(metric_value(metrics, w, "ai", "complexity_category_sum",
                                             cat.name))}});
        }
    }
    j["tables"]["ai_trends"] = ai_trends;

    // figure-7-shaped: per-country relatedness and MORc complexity
    json country_trends = json::array();
    for (const auto& w : metrics.window_labels) {
        if (w == "ALL") continue;
        for (const auto& cc : config.countries) {
            json row = {{"window", w},
                        {"country", cc},
                        {"relatedness_overall",
                         value_or_null(metric_value(metrics, w, cc,
                                                    "relatedness_overall", ""))},
                        {"complexity_morc",
                         value_or_null(metric_value(metrics, w, "all", "morc", cc))}};
            json rel_cats = json::object();
            for (const auto& cat : cats)
                rel_cats[cat.name] = value_or_null(
                    metric_value(metrics, w, cc, "relatedness_category", cat.name));
            row["relatedness_category"] = rel_cats;
            country_trends.push_back(row);
        }
    }
    j["tables"]["country_trends"] = country_trends;

    // figure-6-shaped: log10 RCA per country for the subclasses most used in
    // AI patents (pooled), overall vs within-AI
    std::vector<std::pair<double, std::string>> ai_subclass_use;
    auto occ_ai = metrics.occurrence.find(matrix_key("occurrence", "subclass", "ai", "ALL"));
    if (occ_ai != metrics.occurrence.end()) {
        const auto& m = occ_ai->second;
        for (size_t t = 0; t < m.technologies().size(); ++t)
            ai_subclass_use.emplace_back(-m.col_sum(t), m.technologies()[t]);
        std::sort(ai_subclass_use.begin(), ai_subclass_use.end());
        if (ai_subclass_use.size() > 10) ai_subclass_use.resize(10);
    }
    json subclass_rca = json::array();
    for (const auto& w : metrics.window_labels) {
        if (w == "ALL") continue;
        auto all_rca = metrics.rca_matrices.find(
            matrix_key("rca_log10", "subclass", "all", w));
        auto ai_rca = metrics.rca_matrices.find(
            matrix_key("rca_log10", "subclass", "ai", w));
        for (const auto& [neg_use, sub] : ai_subclass_use) {
            (void)neg_use;
            for (const auto& cc : config.countries) {
                auto lookup = [&](decltype(all_rca) it) -> json {
                    if (it == metrics.rca_matrices.end()) return nullptr;
                    const RcaMatrix& m = it->second;
                    auto e = std::find(m.entities.begin(), m.entities.end(), cc);
                    auto t = std::find(m.technologies.begin(), m.technologies.end(), sub);
                    if (e == m.entities.end() || t == m.technologies.end()) return nullptr;
                    return value_or_null(
                        m.at(static_cast<size_t>(e - m.entities.begin()),
                             static_cast<size_t>(t - m.technologies.begin())));
                };
                subclass_rca.push_back({{"window", w},
                                        {"country", cc},
                                        {"subclass", sub},
                                        {"rca_log10_overall", lookup(all_rca)},
                                        {"rca_log10_ai", lookup(ai_rca)}});
            }
        }
    }
    j["tables"]["subclass_rca_log10"] = subclass_rca;
    return j;
}

// plot-ready CSV projections of the report tables
std::string table_csv(const json& rows, const std::vector<std::string>& columns) {
    std::ostringstream out;
    write_csv_row(out, columns);
    for (const auto& row : rows) {
        std::vector<std::string> cells;
        for (const auto& col : columns) {
            const json& v = row.at(col);
            if (v.is_null())
                cells.emplace_back();
            else if (v.is_string())
                cells.push_back(v.get<std::string>());
            else if (v.is_number())
                cells.push_back(format_value(v.get<double>()));
            else
                cells.push_back(v.dump());
        }
        write_csv_row(out, cells);
    }
    return out.str();
}

void write_report_tables(const json& report, const RunConfig& config) {
    fs::path dir = fs::path(config.out) / "tables";
    atomic_write((dir / "ai_trends.csv").string(),
                 table_csv(report["tables"]["ai_trends"],
                           {"window", "category", "relatedness", "complexity"}));
    atomic_write((dir / "country_trends.csv").string(),
                 table_csv(report["tables"]["country_trends"],
                           {"window", "country", "relatedness_overall",
                            "complexity_morc"}));
    atomic_write((dir / "subclass_rca_log10.csv").string(),
                 table_csv(report["tables"]["subclass_rca_log10"],
                           {"window", "country", "subclass", "rca_log10_overall",
                            "rca_log10_ai"}));
}

std::string report_text(const json& report) {
    std::ostringstream out;
    const auto& counts = report["counts"];
    out << "corpus: " << counts["rows_total"].get<long>() << " rows, "
        << counts["parsed"].get<long>() << " parsed, " << counts["skipped"].get<long>()
        << " skipped, " << counts["ai"].get<long>() << " AI-flagged\n";
    out << "\ncore detection\n";
    auto list = [&](const char* key) {
        out << "  " << key << ":";
        for (const auto& f : report["core_detection"][key]) out << " [" << f.get<std::string>() << "]";
        out << "\n";
    };
    list("core");
    list("related");
    if (report["core_detection"].contains("surrounding")) list("surrounding");
    out << "\nAI relatedness / complexity by window\n";
    for (const auto& row : report["tables"]["ai_trends"]) {
        out << "  " << row["window"].get<std::string>() << "  "
            << row["category"].get<std::string>() << "  relatedness=";
        if (row["relatedness"].is_null())
            out << "-";
        else
            out << format_value(row["relatedness"].get<double>());
        out << "  complexity=";
        if (row["complexity"].is_null())
            out << "-";
        else
            out << format_value(row["complexity"].get<double>());
        out << "\n";
    }
    out << "\ncountry relatedness / complexity by window\n";
    for (const auto& row : report["tables"]["country_trends"]) {
        out << "  " << row["window"].get<std::string>() << "  "
            << row["country"].get<std::string>() << "  relatedness=";
        if (row["relatedness_overall"].is_null())
            out << "-";
        else
            out << format_value(row["relatedness_overall"].get<double>());
        out << "  morc=";
        if (row["complexity_morc"].is_null())
            out << "-";
        else
            out << format_value(row["complexity_morc"].get<double>());
        out << "\n";
    }
    return out.str();
}

} // namespace

void cmd_classify(const RunConfig& config, std::ostream& console) {
    auto t0 = std::chrono::steady_clock::now();
    std::ostringstream subset;
    write_corpus_header(subset, true);
    AiSink sink = [&](const PatentRecord& rec, const std::vector<std::string>& hits) {
        write_corpus_row(subset, rec, &hits);
    };
    LoadedCorpus corpus = load_corpus(config, &sink);

    atomic_write((fs::path(config.out) / "ai_subset.csv").string(), subset.str());
    atomic_write((fs::path(config.out) / "classify_stats.json").string(),
                 stats_json(corpus.stats, config).dump(2) + "\n");

    console << "records: " << corpus.stats.parsed << " parsed, " << corpus.stats.ai
            << " AI-flagged, " << corpus.stats.skipped << " skipped\n";
    console << "keyword hits:\n";
    for (const auto& [label, n] : corpus.stats.keyword_hits)
        console << "  " << label << ": " << n << "\n";
    console << "classify took " << ms_since(t0) << " ms\n";
}

void cmd_metrics(const RunConfig& config, std::ostream& console) {
    auto t0 = std::chrono::steady_clock::now();
    LoadedCorpus corpus = load_corpus(config);
    double t_load = ms_since(t0);

    auto t1 = std::chrono::steady_clock::now();
    MetricsResult metrics = compute_metrics(corpus, config);
    double t_metrics = ms_since(t1);

    std::ostringstream csv;
    write_metrics_csv(csv, metrics.rows);
    atomic_write((fs::path(config.out) / "metrics.csv").string(), csv.str());
    write_matrix_outputs(metrics, config);

    long degenerate = 0;
    for (const auto& row : metrics.rows)
        if (row.metric == "record_count" && row.value == 0.0) ++degenerate;
    if (degenerate > 0)
        console << "warning: " << degenerate
                << " window/scope combination(s) had no records; their metric rows "
                   "carry missing values\n";

    console << "metrics: " << metrics.rows.size() << " rows over "
            << metrics.window_labels.size() << " windows (load " << t_load
            << " ms, compute " << t_metrics << " ms)\n";
    if (!metrics.core.core.empty()) {
        console << "core fields:";
        for (const auto& f : metrics.core.core) console << " [" << f << "]";
        console << "\n";
    }
}

void cmd_space(const RunConfig& config, std::ostream& console) {
    auto t0 = std::chrono::steady_clock::now();
    LoadedCorpus corpus = load_corpus(config);
    MetricsResult metrics = compute_metrics(corpus, config);
    SpaceResult space = compute_space(metrics, config);
    write_space_outputs(space, config);
    long backbone_edges = 0;
    for (const auto& e : space.global.edges) backbone_edges += e.backbone ? 1 : 0;
    console << "space: " << space.global.nodes.size() << " nodes, "
            << space.global.edges.size() << " edges (" << backbone_edges
            << " backbone), " << space.overlays.size() << " overlays, took "
            << ms_since(t0) << " ms\n";
}

void cmd_report(const RunConfig& config, std::ostream& console) {
    auto t0 = std::chrono::steady_clock::now();
    std::ostringstream subset;
    write_corpus_header(subset, true);
    AiSink sink = [&](const PatentRecord& rec, const std::vector<std::string>& hits) {
        write_corpus_row(subset, rec, &hits);
    };
    LoadedCorpus corpus = load_corpus(config, &sink);
    MetricsResult metrics = compute_metrics(corpus, config);
    SpaceResult space = compute_space(metrics, config);

    atomic_write((fs::path(config.out) / "ai_subset.csv").string(), subset.str());
    atomic_write((fs::path(config.out) / "classify_stats.json").string(),
                 stats_json(corpus.stats, config).dump(2) + "\n");
    std::ostringstream csv;
    write_metrics_csv(csv, metrics.rows);
    atomic_write((fs::path(config.out) / "metrics.csv").string(), csv.str());
    write_matrix_outputs(metrics, config);
    write_space_outputs(space, config);

    json report = build_report_json(corpus, metrics, config);
    atomic_write((fs::path(config.out) / "report.json").string(), report.dump(2) + "\n");
    atomic_write((fs::path(config.out) / "report.txt").string(), report_text(report));
    write_report_tables(report, config);

    console << "report: " << corpus.stats.parsed << " records, "
            << corpus.stats.ai << " AI, core = {";
    for (size_t i = 0; i < metrics.core.core.size(); ++i)
        console << (i ? ", " : "") << metrics.core.core[i];
    console << "}, took " << ms_since(t0) << " ms\n";
}

} // namespace techspace
