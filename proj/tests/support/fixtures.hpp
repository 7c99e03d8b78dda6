#ifndef TESTS_SUPPORT_FIXTURES_HPP
#define TESTS_SUPPORT_FIXTURES_HPP

#include "techspace/corpus.hpp"
#include "techspace/pipeline.hpp"
#include "techspace/records.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fixtures {

// deterministic xorshift64 so generated corpora are identical across runs
// and platforms
struct Rng {
    uint64_t state;
    explicit Rng(uint64_t seed) : state(seed ? seed : 0x9e3779b97f4a7c15ull) {}
    uint64_t next() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return state;
    }
    uint64_t below(uint64_t n) { return next() % n; }
};

// 50 records with hand-labelled ground truth, verified against the pattern
// list with an independent checker before being frozen here.
struct LabelledRecord {
    std::string title;
    std::string abstract;
    bool is_ai;
};
const std::vector<LabelledRecord>& keyword_fixture();
std::string keyword_fixture_csv();

// 10 records, exactly 3 of them AI
std::string small_fixture_csv();

// deterministic mixed corpus: n records over 1970-2021, multi-country,
// multi-IPC, ~15% AI titles, a few rows with empty countries or IPC
std::string golden_fixture_csv(int n = 1000);

// corpus engineered so the AI subset is specialised in the four core fields
// in all three windows and in each related field in at least one window
std::string core_fixture_csv();

// large synthetic corpus streamed to a file; returns the row count
long write_perf_fixture(const std::string& path, long n);

// compact-record builder for matrix-level tests; technology labels are
// interned on the subclass axis so arbitrary names work
struct RecSpec {
    int year = 2010;
    bool ai = false;
    std::vector<std::string> countries;
    std::vector<std::string> techs;
};
std::pair<techspace::CorpusIndex, std::vector<techspace::CompactRecord>>
make_corpus(const std::vector<RecSpec>& specs, const techspace::WindowSpec& windows);

// filesystem helpers
std::string make_temp_dir(const std::string& hint);
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);
// path -> content for every regular file under root (relative paths)
std::vector<std::pair<std::string, std::string>> read_tree(const std::string& root);

// default data files, resolved against TECHSPACE_DATA_DIR when defined
std::string data_file(const std::string& name);

techspace::RunConfig base_config(const std::string& input_csv_path,
                                 const std::string& out_dir);

} // namespace fixtures

#endif
