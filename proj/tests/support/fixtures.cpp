#include "support/fixtures.hpp"

#include "techspace/csv.hpp"
#include "techspace/fields.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

namespace fixtures {

namespace fs = std::filesystem;
using techspace::write_csv_row;

const std::vector<LabelledRecord>& keyword_fixture() {
    static const std::vector<LabelledRecord> records = {
        {"Method for machine learning on encrypted data", "", true},
        {"Engine with probabilistic reasoning module", "", true},
        {"Fuzzy logic controller for HVAC systems", "", true},
        {"Inductive logic programming system for rule synthesis", "", true},
        {"Ontology engineering workbench for medical records", "", true},
        {"", "We present an unsupervised learning approach for anomaly detection", true},
        {"", "The controller is trained by reinforced learning on sensor data", true},
        {"Multi-task learning architecture for machine vision", "", true},
        {"Neural network accelerator chip", "", true},
        {"", "A deep learning pipeline for speech enhancement", true},
        {"Expert system shell for fault diagnosis", "", true},
        {"Support vector machine classifier for spam filtering", "", true},
        {"", "Uses description logistics for inventory ontologies", true},
        {"Classification tree induction for churn prediction", "", true},
        {"Boosted regression tree ensemble for insurance pricing", "", true},
        {"", "A logical learning framework for program synthesis", true},
        {"", "Statistical relational learning over knowledge graphs", true},
        {"Probabilistic graphical model for gene regulatory networks", "", true},
        {"Association rule learning for market basket analysis", "", true},
        {"", "An instance-based learning method with prototype selection", true},
        {"Latent representation codec for image compression", "", true},
        {"", "A bio-inspired approach to swarm coordination", true},
        {"Probability logic engine for legal argumentation", "", true},
        {"", "Inference with probabilistic logic under uncertainty", true},
        {"Reinforcement learning agent for robotic grasping", "", true},
        {"", "Multitask learning heads share a common encoder backbone", true},
        {"Decision tree learning apparatus with pruning unit", "", true},
        {"", "A support vector network detects intrusion attempts", true},
        {"", "Deep structured learning for document layout parsing", true},
        {"Hierarchical learning controller for quadrotor drones", "", true},
        {"", "A graphical model captures dependencies between sensors", true},
        {"", "Structured probabilistic models for scene understanding", true},
        {"Rule induction unit for maintenance databases", "", true},
        {"", "A memory-based learning scheme for machine translation", true},
        {"Bio-inspired computing fabric with spiking elements", "", true},
        {"", "Biologically inspired computation for network routing", true},
        // tricky positives
        {"Neural networking cable assembly", "", true},
        {"", "A supervised learning algorithm for credit scoring", true},
        {"FUZZY LOGIC SYSTEM FOR WASHING MACHINES", "", true},
        {"Expert systematic review tool for clinical trials", "", true},
        // near-miss negatives
        {"Machine-learned model compression hardware", "", false},
        {"Neutral network topology analyzer", "", false},
        {"Fuzzy matching of database strings", "", false},
        {"Logical programming interface for industrial PLCs", "", false},
        {"", "The supervisor controls learning outcomes in classrooms", false},
        {"Decision support dashboard for hospitals", "", false},
        {"Tree regression analysis of forest growth", "", false},
        {"", "An expert panel reviews the classification criteria", false},
        {"Networked neurons in cultured tissue", "", false},
        {"", "Rule-based induction heating controller", false},
    };
    return records;
}

std::string keyword_fixture_csv() {
    std::ostringstream out;
    write_csv_row(out, {"id", "year", "title", "abstract", "countries", "ipc"});
    const auto& recs = keyword_fixture();
    for (size_t i = 0; i < recs.size(); ++i) {
        write_csv_row(out, {"kw" + std::to_string(i + 1), "2010", recs[i].title,
                            recs[i].abstract, "US", "G06N"});
    }
    return out.str();
}

std::string small_fixture_csv() {
    std::ostringstream out;
    write_csv_row(out, {"id", "year", "title", "abstract", "countries", "ipc"});
    write_csv_row(out, {"s1", "1976", "Fuzzy logic thermostat", "", "JP", "G05B"});
    write_csv_row(out, {"s2", "1991", "Gear assembly for tractors", "", "DE", "F16H"});
    write_csv_row(out, {"s3", "2007", "Neural network image codec",
                        "Encodes frames with a neural network", "US|JP", "G06N|G06T"});
    write_csv_row(out, {"s4", "1985", "Crane hook with safety latch", "", "US", "B66C"});
    write_csv_row(out, {"s5", "2011", "Antenna array for base stations", "", "KR", "H04B"});
    write_csv_row(out, {"s6", "1995", "Expert system for loan approval", "", "US", "G06Q"});
    write_csv_row(out, {"s7", "2015", "Optical lens coating process", "", "CN", "G02B|C23C"});
    write_csv_row(out, {"s8", "1979", "Fertilizer spreading machine", "", "FR", "A01C"});
    write_csv_row(out, {"s9", "2002", "Disk brake pad composition", "", "JP", "F16D"});
    write_csv_row(out, {"s10", "2018", "Centrifugal pump impeller", "", "US", "F04D"});
    return out.str();
}

namespace {

const std::vector<std::string>& ai_titles() {
    static const std::vector<std::string> titles = {
        "Neural network controller for welding robots",
        "Fuzzy logic climate control unit",
        "Method of training a deep learning model for defect detection",
        "Expert system for pipeline diagnostics",
        "Reinforcement learning scheduler for elevators",
        "Support vector machine based fault classifier",
        "Speech recognition with a recurrent neural network",
        "Machine learning apparatus for demand forecasting",
        "Decision tree learning engine for telemetry",
        "Unsupervised learning of sensor embeddings",
    };
    return titles;
}

const std::vector<std::string>& plain_titles() {
    static const std::vector<std::string> titles = {
        "Hydraulic valve with integrated damper",
        "Antenna diversity receiver for mobile sets",
        "Polymer composition for sealing rings, stabilized",
        "Crankshaft bearing with oil groove",
        "Method for brewing low-alcohol beer",
        "Semiconductor package with heat spreader",
        "Textile loom shuttle guide",
        "Optical scanner for barcode labels",
        "Pharmaceutical composition for asthma therapy",
        "Refrigeration cycle with dual compressors",
        "Road paving machine with vibrating screed",
        "Measurement probe for surface roughness",
        "Digital telephone exchange switching circuit",
        "Video signal deinterlacing apparatus",
        "Catalytic converter housing",
    };
    return titles;
}

const std::vector<std::string>& plain_abstracts() {
    static const std::vector<std::string> abstracts = {
        "The device comprises a housing, a drive unit and a control lever arranged "
        "to engage the latch under spring load.",
        "A process is disclosed in which the mixture is heated, filtered and "
        "recirculated until the desired viscosity is reached.",
        "An arrangement of sensors measures temperature and pressure along the "
        "duct and reports deviations to the operator console.",
        "", // some records carry no abstract
        "The composition contains a copolymer blend with improved adhesion to "
        "metallic substrates under thermal cycling.",
    };
    return abstracts;
}

const std::vector<std::string>& country_pool() {
    static const std::vector<std::string> pool = {"US", "JP", "KR", "CN", "DE",
                                                  "FR", "GB", "NL"};
    return pool;
}

const std::vector<std::string>& ipc_pool() {
    static const std::vector<std::string> pool = {
        "G06N3/08",  "G06F17/30", "G06Q10/00", "G06K9/62",  "G06T7/00", "G10L15/16",
        "G01B11/00", "G01N33/48", "G01N21/00", "G05B13/02", "H04L29/06", "H04B7/26",
        "H03B5/12",  "A61B5/00",  "H01L21/00", "G02B6/00",  "C07D233/00", "C12N15/00",
        "A61K31/00", "C08F2/00",  "A23L1/00",  "C09D5/00",  "C22C38/00", "C23C16/00",
        "B82Y30/00", "B01J23/00", "C02F1/00",  "B65G47/00", "B23K26/00", "F02D41/00",
        "D21H17/00", "B29C45/00", "F24F11/00", "F16H57/00", "B60K6/00",  "A63F13/00",
        "D06F33/00", "E04B1/00",  "H02J3/00",  "G11B7/00",
    };
    return pool;
}

} // namespace

std::string golden_fixture_csv(int n) {
    Rng rng(0x5eedf00d1234ull);
    std::ostringstream out;
    write_csv_row(out, {"id", "year", "title", "abstract", "countries", "ipc"});
    for (int i = 0; i < n; ++i) {
        std::string id = "g" + std::to_string(i + 1);
        int year = 1970 + static_cast<int>(rng.below(52)); // 1970..2021
        bool ai = rng.below(100) < 15;
        std::string title = ai ? ai_titles()[rng.below(ai_titles().size())]
                               : plain_titles()[rng.below(plain_titles().size())];
        std::string abstract = plain_abstracts()[rng.below(plain_abstracts().size())];

        std::string countries;
        if (rng.below(100) < 3) {
            // a few records with no inventor country
        } else {
            size_t nc = 1 + rng.below(3);
            std::vector<std::string> cs;
            for (size_t k = 0; k < nc; ++k) {
                std::string c = country_pool()[rng.below(country_pool().size())];
                if (std::find(cs.begin(), cs.end(), c) == cs.end()) cs.push_back(c);
            }
            for (size_t k = 0; k < cs.size(); ++k)
                countries += (k ? "|" : "") + cs[k];
        }

        std::string ipc;
        if (rng.below(100) < 3) {
            // a few records with no classification
        } else {
            size_t ni = 1 + rng.below(4);
            std::vector<std::string> codes;
            for (size_t k = 0; k < ni; ++k) {
                std::string c = ipc_pool()[rng.below(ipc_pool().size())];
                if (std::find(codes.begin(), codes.end(), c) == codes.end())
                    codes.push_back(c);
            }
            if (rng.below(100) < 2) codes.push_back("Y02E10/00"); // unmapped on purpose
            for (size_t k = 0; k < codes.size(); ++k) ipc += (k ? "|" : "") + codes[k];
        }

        write_csv_row(out, {id, std::to_string(year), title, abstract, countries, ipc});
    }
    return out.str();
}

std::string core_fixture_csv() {
    std::ostringstream out;
    write_csv_row(out, {"id", "year", "title", "abstract", "countries", "ipc"});
    long id = 0;
    auto emit = [&](int year, bool ai, const std::string& ipc) {
        std::string title = ai ? ai_titles()[id % ai_titles().size()]
                               : plain_titles()[id % plain_titles().size()];
        std::string country = country_pool()[id % country_pool().size()];
        write_csv_row(out, {"c" + std::to_string(++id), std::to_string(year), title, "",
                            country, ipc});
    };

    // one representative subclass per field, universe order
    const std::vector<std::string> representative = {
        "H01B", "G11B", "H04B", "H04L", "H03B", "G06N", "G06Q", "H01L", "G02B",
        "G01B", "G01N33/00", "G05B", "A61B", "C07C", "C12N", "A61P", "C08F",
        "A23L", "C09D", "C22C", "C23C", "B82Y", "B01J", "C02F", "B65G", "B23K",
        "F02D", "D21H", "B29C", "F24F", "F16H", "B60K", "A63F", "D06F", "E04B",
    };

    const int window_years[3] = {1980, 1995, 2010};
    for (int w = 0; w < 3; ++w) {
        int year = window_years[w];
        // background corpus: ten plain records per field
        for (const auto& ipc : representative)
            for (int k = 0; k < 10; ++k) emit(year + k % 5, false, ipc);
        // AI subset: core fields specialised in every window
        for (const std::string& ipc : {"G06N", "G06Q", "G01B", "G05B"})
            for (int k = 0; k < 6; ++k) emit(year + k % 5, true, ipc);
        // related fields: each specialised in some but not all windows
        if (w == 0)
            for (int k = 0; k < 6; ++k) emit(year + k % 5, true, "H03B");
        if (w == 1 || w == 2)
            for (int k = 0; k < 6; ++k) emit(year + k % 5, true, "H04L");
        if (w == 2)
            for (int k = 0; k < 6; ++k) emit(year + k % 5, true, "G01N33/00");
    }
    return out.str();
}

long write_perf_fixture(const std::string& path, long n) {
    Rng rng(0xfeedbeef77ull);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "id,year,title,abstract,countries,ipc\n";
    auto quoted = [](const std::string& text) {
        if (text.find(',') == std::string::npos) return text;
        return '"' + text + '"'; // fixture texts carry no quote characters
    };
    std::string row;
    row.reserve(512);
    for (long i = 0; i < n; ++i) {
        row.clear();
        row += 'p';
        row += std::to_string(i + 1);
        row += ',';
        row += std::to_string(1974 + rng.below(45));
        row += ',';
        bool ai = rng.below(100) < 5;
        const std::string& title = ai ? ai_titles()[rng.below(ai_titles().size())]
                                      : plain_titles()[rng.below(plain_titles().size())];
        row += quoted(title);
        row += ',';
        const std::string& abs = plain_abstracts()[rng.below(plain_abstracts().size())];
        row += quoted(abs);
        row += ',';
        row += country_pool()[rng.below(country_pool().size())];
        if (rng.below(100) < 20) {
            row += '|';
            row += country_pool()[rng.below(country_pool().size())];
        }
        row += ',';
        row += ipc_pool()[rng.below(ipc_pool().size())];
        if (rng.below(100) < 40) {
            row += '|';
            row += ipc_pool()[rng.below(ipc_pool().size())];
        }
        row += '\n';
        out << row;
    }
    return n;
}

std::pair<techspace::CorpusIndex, std::vector<techspace::CompactRecord>>
make_corpus(const std::vector<RecSpec>& specs, const techspace::WindowSpec& windows) {
    techspace::CorpusIndex index;
    std::vector<techspace::CompactRecord> records;
    for (const auto& spec : specs) {
        techspace::CompactRecord r;
        r.year = spec.year;
        auto w = windows.assign(spec.year);
        r.window = w ? static_cast<int16_t>(*w) : int16_t{-1};
        r.is_ai = spec.ai ? 1 : 0;
        for (const auto& c : spec.countries)
            r.countries.push_back(index.countries.intern(c));
        for (const auto& t : spec.techs) {
            r.subclasses.push_back(index.subclasses.intern(t));
            if (auto f = techspace::field_index(t))
                r.fields.push_back(static_cast<uint32_t>(*f));
        }
        std::sort(r.fields.begin(), r.fields.end());
        records.push_back(std::move(r));
    }
    return {std::move(index), std::move(records)};
}

std::string make_temp_dir(const std::string& hint) {
    static long counter = 0;
    fs::path base = fs::temp_directory_path() / ("techspace_" + hint);
    fs::path dir;
    do {
        dir = base;
        dir += "_" + std::to_string(++counter) + "_" + std::to_string(::getpid());
    } while (fs::exists(dir));
    fs::create_directories(dir);
    return dir.string();
}

void write_file(const std::string& path, const std::string& content) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::pair<std::string, std::string>> read_tree(const std::string& root) {
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        std::string rel = fs::relative(entry.path(), root).string();
        files.emplace_back(rel, read_file(entry.path().string()));
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::string data_file(const std::string& name) {
#ifdef TECHSPACE_DATA_DIR
    return std::string(TECHSPACE_DATA_DIR) + "/" + name;
#else
    return "data/" + name;
#endif
}

techspace::RunConfig base_config(const std::string& input_csv_path,
                                 const std::string& out_dir) {
    techspace::RunConfig cfg;
    cfg.input = input_csv_path;
    cfg.keywords = data_file("ai_keywords.txt");
    cfg.concordance = data_file("ipc_to_schmoch35.tsv");
    cfg.out = out_dir;
    return cfg;
}

} // namespace fixtures
