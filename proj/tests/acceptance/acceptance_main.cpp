// Acceptance suite: each criterion prints one PASS/FAIL line; the binary
// exits nonzero if any criterion fails.

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "techspace/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sys/resource.h>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace techspace;

namespace {

struct Criterion {
    std::string name;
    long failures = 0;
    std::string first_failure;

    void expect(bool ok, const std::string& what) {
        if (ok) return;
        ++failures;
        if (first_failure.empty()) first_failure = what;
    }
};

std::vector<Criterion> results;

void report(Criterion& c) {
    if (c.failures == 0) {
        std::cout << "PASS  " << c.name << "\n";
    } else {
        std::cout << "FAIL  " << c.name << "  (" << c.failures
                  << " check(s) failed; first: " << c.first_failure << ")\n";
    }
    results.push_back(c);
}

bool close_rel(double a, double b, double tol) {
    if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
    double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
    return std::fabs(a - b) <= tol * scale;
}

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

long peak_rss_kb() {
    struct rusage usage{};
    if (getrusage(RUSAGE_SELF, &usage) == 0 && usage.ru_maxrss > 0)
        return usage.ru_maxrss; // kilobytes on Linux
    std::ifstream in("/proc/self/status");
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("VmHWM:", 0) == 0) {
            long kb = 0;
            std::sscanf(line.c_str(), "VmHWM: %ld", &kb);
            return kb;
        }
    }
    return -1;
}

// ---------------------------------------------------------------------------

void criterion_1_reflections() {
    Criterion c{"1. reflections match brute-force oracle (200 random, depths 0-4, "
                "1e-12) and the hand example exactly"};
    double t0 = now_seconds();

    fixtures::Rng rng(0xACCE55ull);
    for (int trial = 0; trial < 200; ++trial) {
        size_t ne = 1 + rng.below(12), nt = 1 + rng.below(12);
        std::vector<std::vector<int>> m(ne, std::vector<int>(nt, 0));
        bool any = false;
        for (auto& row : m)
            for (auto& v : row) {
                v = rng.below(100) < 35 ? 1 : 0;
                any = any || v;
            }
        if (!any) m[rng.below(ne)][rng.below(nt)] = 1;

        BinaryRcaMatrix b;
        for (size_t e = 0; e < ne; ++e) b.entities.push_back("e" + std::to_string(e));
        for (size_t t = 0; t < nt; ++t) b.technologies.push_back("t" + std::to_string(t));
        for (const auto& row : m)
            for (int v : row) b.values.push_back(static_cast<uint8_t>(v));

        auto expected = oracles::reflections(m, 4);
        for (int steps = 0; steps <= 4; ++steps) {
            ComplexityVector e = method_of_reflections(b, Axis::entity, steps);
            ComplexityVector t = method_of_reflections(b, Axis::technology, steps);
            for (size_t i = 0; i < ne; ++i)
                c.expect(close_rel(e.values[i], expected.kc[steps][i], 1e-12),
                         "entity reflections diverge from oracle");
            for (size_t i = 0; i < nt; ++i)
                c.expect(close_rel(t.values[i], expected.kt[steps][i], 1e-12),
                         "technology reflections diverge from oracle");
        }
    }

    BinaryRcaMatrix hand;
    hand.entities = {"c1", "c2"};
    hand.technologies = {"t1", "t2"};
    hand.values = {1, 1, 0, 1};
    ComplexityVector kt2 = method_of_reflections(hand, Axis::technology, 2);
    c.expect(kt2.values[0] == 1.5 && kt2.values[1] == 1.75,
             "hand example k_t2 != (1.5, 1.75) exactly");

    double elapsed = now_seconds() - t0;
    c.expect(elapsed < 5.0, "runtime exceeded 5 s");
    report(c);
}

void criterion_2_rca() {
    Criterion c{"2. RCA: scale invariance 1e-12, single-entity and uniform all-ones, "
                "hand case exact"};

    auto occ = [](const std::vector<std::vector<double>>& rows) {
        std::vector<std::string> ents, techs;
        for (size_t e = 0; e < rows.size(); ++e) ents.push_back("e" + std::to_string(e));
        for (size_t t = 0; t < rows[0].size(); ++t) techs.push_back("t" + std::to_string(t));
        return OccurrenceMatrix::from_dense(ents, techs, rows);
    };

    fixtures::Rng rng(0x5CA1Eull);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::vector<double>> x(2 + rng.below(6),
                                           std::vector<double>(2 + rng.below(6), 0.0));
        for (auto& row : x)
            for (auto& v : row) v = static_cast<double>(rng.below(9));
        x[0][0] += 1;
        RcaMatrix base = rca(occ(x));
        double lambda = static_cast<double>(2 + rng.below(17));
        auto scaled = x;
        for (auto& row : scaled)
            for (auto& v : row) v *= lambda;
        RcaMatrix after = rca(occ(scaled));
        for (size_t i = 0; i < base.values.size(); ++i)
            c.expect(close_rel(base.values[i], after.values[i], 1e-12),
                     "scaling all counts changed RCA");
        c.expect(binarize(base).values == binarize(after).values,
                 "scaling changed the binarization");
        ComplexityVector k1 = method_of_reflections(binarize(base), Axis::technology, 2);
        ComplexityVector k2 = method_of_reflections(binarize(after), Axis::technology, 2);
        for (size_t i = 0; i < k1.values.size(); ++i)
            c.expect(close_rel(k1.values[i], k2.values[i], 1e-12),
                     "scaling changed downstream complexity");
    }

    RcaMatrix single = rca(occ({{2, 3}}));
    c.expect(single.values[0] == 1.0 && single.values[1] == 1.0,
             "single entity RCA not all ones");

    RcaMatrix uniform = rca(occ({{7, 7, 7}, {7, 7, 7}, {7, 7, 7}}));
    for (double v : uniform.values)
        c.expect(v == 1.0, "uniform matrix RCA not all ones");

    RcaMatrix hand = rca(occ({{4, 0}, {1, 1}}));
    c.expect(hand.at(0, 0) == 1.2, "hand RCA[0][0] != 1.2");
    c.expect(hand.at(0, 1) == 0.0, "hand RCA[0][1] != 0");
    c.expect(hand.at(1, 0) == 0.6, "hand RCA[1][0] != 0.6");
    c.expect(hand.at(1, 1) == 3.0, "hand RCA[1][1] != 3.0");
    report(c);
}

void criterion_3_association() {
    Criterion c{"3. association strength: independence=1 (1e-12), symmetry and zero "
                "diagonal on 200 random, exact scaling invariance"};

    fixtures::Rng rng(0xA550Cull);
    for (int trial = 0; trial < 200; ++trial) {
        size_t n = 2 + rng.below(9);
        std::vector<std::string> names;
        for (size_t i = 0; i < n; ++i) names.push_back("t" + std::to_string(i));
        std::vector<double> s(n, 0.0);
        std::vector<std::vector<double>> counts(n, std::vector<double>(n, 0.0));
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j)
                counts[i][j] = counts[j][i] = static_cast<double>(rng.below(6));
        for (size_t i = 0; i < n; ++i) {
            double mx = 0;
            for (size_t j = 0; j < n; ++j) mx = std::max(mx, counts[i][j]);
            s[i] = mx + 1 + static_cast<double>(rng.below(5));
        }
        CooccurrenceMatrix cm = CooccurrenceMatrix::from_counts(names, counts, s);
        RelatednessMatrix phi = association_strength(cm);
        for (size_t i = 0; i < n; ++i) {
            c.expect(phi.at(i, i) == 0.0, "nonzero diagonal");
            for (size_t j = 0; j < n; ++j)
                c.expect(phi.at(i, j) == phi.at(j, i), "asymmetric phi");
        }
        // exact invariance under integer scaling of counts and marginals
        auto counts3 = counts;
        auto s3 = s;
        for (auto& row : counts3)
            for (auto& v : row) v *= 3.0;
        for (auto& v : s3) v *= 3.0;
        RelatednessMatrix phi3 =
            association_strength(CooccurrenceMatrix::from_counts(names, counts3, s3));
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j)
                c.expect(phi3.at(i, j) == phi.at(i, j), "scaling changed phi");
    }

    // independence-constructed counts
    for (int trial = 0; trial < 20; ++trial) {
        size_t n = 3 + rng.below(5);
        std::vector<std::string> names;
        std::vector<double> s;
        for (size_t i = 0; i < n; ++i) {
            names.push_back("t" + std::to_string(i));
            s.push_back(static_cast<double>(1 + rng.below(20)));
        }
        double total = 0;
        for (double v : s) total += v;
        std::vector<std::vector<double>> counts(n, std::vector<double>(n, 0.0));
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j)
                if (i != j) counts[i][j] = s[i] * s[j] / total;
        RelatednessMatrix phi =
            association_strength(CooccurrenceMatrix::from_counts(names, counts, s));
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j)
                if (i != j)
                    c.expect(close_rel(phi.at(i, j), 1.0, 1e-12),
                             "independence baseline phi != 1");
    }
    report(c);
}

void criterion_4_keywords() {
    Criterion c{"4. keyword classifier reproduces the 50-record hand-labelled fixture "
                "50/50"};
    KeywordSet rules = KeywordSet::load(fixtures::data_file("ai_keywords.txt"));
    c.expect(rules.size() == 36, "default rule set is not 36 patterns");

    const auto& fixture = fixtures::keyword_fixture();
    c.expect(fixture.size() == 50, "fixture is not 50 records");
    for (const auto& fx : fixture) {
        PatentRecord rec;
        rec.title = fx.title;
        rec.abstract = fx.abstract;
        MatchResult res = match_ai(rec, rules);
        c.expect(res.is_ai == fx.is_ai,
                 "misclassified: '" + fx.title + "' / '" + fx.abstract + "'");
    }

    // 'pervised learn' catches both the supervised and unsupervised variants
    for (const char* text : {"A supervised learning algorithm",
                             "An unsupervised learning approach"}) {
        PatentRecord rec;
        rec.abstract = text;
        MatchResult res = match_ai(rec, rules);
        bool hit = std::find(res.hits.begin(), res.hits.end(), "pervised learn") !=
                   res.hits.end();
        c.expect(hit, std::string("'pervised learn' missed: ") + text);
    }

    // the same texts classified through the full corpus path
    std::string dir = fixtures::make_temp_dir("acc_kw");
    fixtures::write_file(dir + "/kw.csv", fixtures::keyword_fixture_csv());
    RunConfig cfg = fixtures::base_config(dir + "/kw.csv", dir + "/out");
    LoadedCorpus corpus = load_corpus(cfg);
    long expected_ai = 0;
    for (const auto& fx : fixture) expected_ai += fx.is_ai ? 1 : 0;
    c.expect(corpus.stats.ai == expected_ai, "pipeline AI count disagrees with fixture");
    for (size_t i = 0; i < fixture.size(); ++i)
        c.expect(corpus.records[i].is_ai == (fixture[i].is_ai ? 1 : 0),
                 "pipeline flag mismatch at record " + std::to_string(i + 1));
    report(c);
}

void criterion_5_core_detection() {
    Criterion c{"5. core detection recovers the engineered core and related sets"};
    std::string dir = fixtures::make_temp_dir("acc_core");
    fixtures::write_file(dir + "/core.csv", fixtures::core_fixture_csv());
    RunConfig cfg = fixtures::base_config(dir + "/core.csv", dir + "/out");
    LoadedCorpus corpus = load_corpus(cfg);
    MetricsResult metrics = compute_metrics(corpus, cfg);

    std::set<std::string> core(metrics.core.core.begin(), metrics.core.core.end());
    std::set<std::string> related(metrics.core.related.begin(),
                                  metrics.core.related.end());
    std::set<std::string> expected_core = {"Computer technology",
                                           "IT methods for management", "Measurement",
                                           "Control"};
    std::set<std::string> expected_related = {"Analysis of biological materials",
                                              "Basic communication processes",
                                              "Digital communication"};
    c.expect(core == expected_core, "core set mismatch");
    c.expect(related == expected_related, "related set mismatch");
    report(c);
}

void criterion_6_determinism() {
    Criterion c{"6. two full pipeline runs on the 1000-record fixture are "
                "byte-identical"};
    std::string dir = fixtures::make_temp_dir("acc_det");
    fixtures::write_file(dir + "/golden.csv", fixtures::golden_fixture_csv(1000));

    std::ostringstream log;
    RunConfig cfg1 = fixtures::base_config(dir + "/golden.csv", dir + "/out1");
    cmd_report(cfg1, log);
    RunConfig cfg2 = fixtures::base_config(dir + "/golden.csv", dir + "/out2");
    cmd_report(cfg2, log);

    auto tree1 = fixtures::read_tree(dir + "/out1");
    auto tree2 = fixtures::read_tree(dir + "/out2");
    c.expect(!tree1.empty(), "no outputs written");
    c.expect(tree1.size() == tree2.size(), "output trees differ in file count");
    size_t n = std::min(tree1.size(), tree2.size());
    for (size_t i = 0; i < n; ++i) {
        c.expect(tree1[i].first == tree2[i].first,
                 "file name mismatch: " + tree1[i].first);
        c.expect(tree1[i].second == tree2[i].second,
                 "file bytes differ: " + tree1[i].first);
    }
    report(c);
}

void criterion_7_backbone() {
    Criterion c{"7. backbone: MST size law on 100 random graphs; 35-node export with "
                "max complexity 1 and 34+k backbone edges"};

    fixtures::Rng rng(0xBACB0Eull);
    for (int trial = 0; trial < 100; ++trial) {
        size_t n = 2 + rng.below(30);
        std::vector<std::string> techs;
        for (size_t i = 0; i < n; ++i) techs.push_back("t" + std::to_string(i));
        RelatednessMatrix phi;
        phi.technologies = techs;
        phi.phi.assign(n * n, 0.0);
        phi.occurrence.assign(n, 1.0);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j)
                if (rng.below(100) < 25) {
                    double w = static_cast<double>(1 + rng.below(100));
                    phi.phi[i * n + j] = phi.phi[j * n + i] = w;
                }
        ComplexityVector kt;
        kt.axis = Axis::technology;
        kt.labels = techs;
        kt.values.assign(n, 1.0);
        std::map<std::string, std::string> sectors;
        for (const auto& t : techs) sectors[t] = "S";
        TechnologySpace space = extract_backbone(build_space(phi, kt, sectors), 0);
        long backbone_edges = 0;
        for (const auto& e : space.edges) backbone_edges += e.backbone ? 1 : 0;
        c.expect(backbone_edges ==
                     static_cast<long>(space.nodes.size()) - space.components,
                 "MST edge count != n - components");
    }

    // figure-1-shaped export from the 1000-record fixture
    std::string dir = fixtures::make_temp_dir("acc_bb");
    fixtures::write_file(dir + "/golden.csv", fixtures::golden_fixture_csv(1000));
    RunConfig cfg = fixtures::base_config(dir + "/golden.csv", dir + "/out");
    LoadedCorpus corpus = load_corpus(cfg);
    MetricsResult metrics = compute_metrics(corpus, cfg);
    SpaceResult space = compute_space(metrics, cfg);

    c.expect(space.global.nodes.size() == 35, "global space does not have 35 nodes");
    double max_complexity = 0.0;
    for (const auto& node : space.global.nodes)
        max_complexity = std::max(max_complexity, node.complexity);
    c.expect(max_complexity == 1.0, "max normalized complexity != 1.000");
    c.expect(space.global.components == 1, "35-field fixture space is not connected");
    long flagged = 0;
    for (const auto& e : space.global.edges) flagged += e.backbone ? 1 : 0;
    c.expect(flagged == 34 + cfg.backbone_k,
             "flagged edges != 34 + backbone_k on the connected fixture");

    std::string xml = export_graph(space.global, nullptr, GraphFormat::graphml);
    size_t node_count = 0, pos = 0;
    while ((pos = xml.find("<node id=", pos)) != std::string::npos) {
        ++node_count;
        pos += 9;
    }
    c.expect(node_count == 35, "graphml export does not contain 35 nodes");
    report(c);
}

void criterion_8_performance() {
    Criterion c{"8. one million records stream through classify + metrics in < 60 s "
                "and < 2 GB"};
    std::string dir = fixtures::make_temp_dir("acc_perf");
    std::string path = dir + "/million.csv";
    fixtures::write_perf_fixture(path, 1000000);

    RunConfig cfg = fixtures::base_config(path, dir + "/out");
    double t0 = now_seconds();
    LoadedCorpus corpus = load_corpus(cfg);
    MetricsResult metrics = compute_metrics(corpus, cfg);
    double elapsed = now_seconds() - t0;

    c.expect(corpus.stats.parsed == 1000000, "not all records parsed");
    c.expect(!metrics.rows.empty(), "no metric rows produced");
    c.expect(elapsed < 60.0,
             "classify+metrics took " + std::to_string(elapsed) + " s");
    long hwm = peak_rss_kb();
    c.expect(hwm > 0, "could not read peak RSS");
    c.expect(hwm < 2L * 1024 * 1024,
             "peak memory " + std::to_string(hwm / 1024) + " MB exceeds 2 GB");
    std::cout << "      (" << elapsed << " s, peak " << (hwm / 1024) << " MB)\n";
    std::remove(path.c_str());
    report(c);
}

void criterion_9_aggregation() {
    Criterion c{"9. aggregation contracts: AI-core complexity sum and 3-field "
                "relatedness mean are exact"};

    std::string dir = fixtures::make_temp_dir("acc_agg");
    fixtures::write_file(dir + "/golden.csv", fixtures::golden_fixture_csv(1000));
    RunConfig cfg = fixtures::base_config(dir + "/golden.csv", dir + "/out");
    LoadedCorpus corpus = load_corpus(cfg);
    MetricsResult metrics = compute_metrics(corpus, cfg);

    const CategorySpec& ai_core = default_categories()[0];
    bool any_window = false;
    for (const auto& w : metrics.window_labels) {
        auto kt = metrics.complexity.find(matrix_key("mort", "field", "ai", w));
        if (kt == metrics.complexity.end()) continue;
        any_window = true;
        CategoryComplexity cc = category_complexity(kt->second, ai_core);
        double manual = 0.0;
        for (const auto& member : ai_core.members) {
            double v = kt->second.value_of(member);
            if (!is_missing(v)) manual += v;
        }
        c.expect(cc.value == manual,
                 "category_complexity(AI-core) != sum of member k_t2 in window " + w);
    }
    c.expect(any_window, "no AI complexity vectors were produced");

    RelatednessMatrix phi;
    phi.technologies = {"a", "b", "c"};
    phi.phi = {0, 2, 1, 2, 0, 0, 1, 0, 0};
    phi.occurrence = {1, 1, 1};
    double rel = category_relatedness(phi, {"cat", {"a", "b", "c"}});
    c.expect(rel == 1.0, "3-field category relatedness != hand mean of (2+1+0)/3");
    report(c);
}

} // namespace

int main() {
    std::cout << "acceptance criteria\n===================\n";
    criterion_1_reflections();
    criterion_2_rca();
    criterion_3_association();
    criterion_4_keywords();
    criterion_5_core_detection();
    criterion_6_determinism();
    criterion_7_backbone();
    criterion_8_performance();
    criterion_9_aggregation();

    long failed = 0;
    for (const auto& c : results) failed += c.failures ? 1 : 0;
    std::cout << "===================\n"
              << (results.size() - failed) << "/" << results.size()
              << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
