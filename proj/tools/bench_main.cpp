// Serial vs OpenMP comparison for the record-parallel kernels: keyword
// classification and matrix construction.

#include "techspace/corpus.hpp"
#include "techspace/matrix.hpp"
#include "techspace/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Line {
    std::string name;
    double serial_s;
    double parallel_s;
};

void print(const Line& l) {
    std::cout << std::left << std::setw(28) << l.name << std::right << std::fixed
              << std::setprecision(3) << std::setw(10) << l.serial_s << " s"
              << std::setw(10) << l.parallel_s << " s" << std::setw(9)
              << std::setprecision(2) << (l.serial_s / l.parallel_s) << "x\n";
}

uint64_t rng_state = 0x243f6a8885a308d3ull;
uint64_t rng() {
    rng_state ^= rng_state << 13;
    rng_state ^= rng_state >> 7;
    rng_state ^= rng_state << 17;
    return rng_state;
}

} // namespace

int main(int argc, char** argv) {
    long n = argc > 1 ? std::atol(argv[1]) : 200000;
    std::cout << "records: " << n << ", threads: " << techspace::effective_threads()
              << "\n\n";

    const std::vector<std::string> titles = {
        "Neural network controller for industrial robots",
        "Hydraulic valve with integrated damper",
        "Fuzzy logic climate control unit",
        "Crankshaft bearing with oil groove",
        "Antenna diversity receiver for mobile handsets",
        "Reinforcement learning scheduler for elevators",
        "Catalytic converter housing with baffles",
        "Measurement probe for surface roughness",
    };
    const std::string abstract_text =
        "The apparatus comprises a housing, a drive unit and a sensor array "
        "arranged to monitor the process and adjust the actuator accordingly.";

    // synthetic parsed records
    std::vector<techspace::PatentRecord> records(n);
    for (long i = 0; i < n; ++i) {
        records[i].id = "b" + std::to_string(i);
        records[i].year = 1974 + static_cast<int>(rng() % 45);
        records[i].title = titles[rng() % titles.size()];
        records[i].abstract = abstract_text;
    }
    techspace::KeywordSet keywords =
        techspace::KeywordSet::load(argc > 2 ? argv[2] : "data/ai_keywords.txt");

    std::vector<uint8_t> flags_serial(n), flags_parallel(n);
    auto t0 = Clock::now();
    {
        std::string scratch;
        std::vector<uint32_t> hits;
        for (long i = 0; i < n; ++i)
            flags_serial[i] = techspace::match_ai_into(records[i].title,
                                                       records[i].abstract, keywords,
                                                       scratch, hits);
    }
    double classify_serial = seconds_since(t0);

    t0 = Clock::now();
#ifdef _OPENMP
#pragma omp parallel num_threads(techspace::effective_threads())
#endif
    {
        std::string scratch;
        std::vector<uint32_t> hits;
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
        for (long i = 0; i < n; ++i)
            flags_parallel[i] = techspace::match_ai_into(records[i].title,
                                                         records[i].abstract, keywords,
                                                         scratch, hits);
    }
    double classify_parallel = seconds_since(t0);
    if (flags_serial != flags_parallel) {
        std::cerr << "classification mismatch between serial and parallel\n";
        return 1;
    }

    // synthetic compact records for matrix kernels
    techspace::CorpusIndex index;
    std::vector<uint32_t> countries, subs;
    for (const char* c : {"US", "JP", "KR", "CN", "DE", "FR", "GB", "NL"})
        countries.push_back(index.countries.intern(c));
    for (int s = 0; s < 64; ++s)
        subs.push_back(index.subclasses.intern("S" + std::to_string(s)));

    std::vector<techspace::CompactRecord> compact(n);
    for (long i = 0; i < n; ++i) {
        techspace::CompactRecord& r = compact[i];
        r.year = records[i].year;
        r.window = static_cast<int16_t>(rng() % 3);
        r.is_ai = flags_serial[i];
        r.countries = {countries[rng() % countries.size()]};
        if (rng() % 4 == 0) r.countries.push_back(countries[rng() % countries.size()]);
        size_t nf = 1 + rng() % 4;
        for (size_t k = 0; k < nf; ++k) {
            uint32_t f = static_cast<uint32_t>(rng() % 35);
            bool seen = false;
            for (uint32_t x : r.fields) seen = seen || x == f;
            if (!seen) r.fields.push_back(f);
        }
        r.subclasses = {subs[rng() % subs.size()]};
    }

    techspace::MatrixBuildOptions opts;
    opts.select.window = 0;

    t0 = Clock::now();
    auto occ_serial = techspace::build_occurrence_serial(compact, index, opts);
    double occ_s = seconds_since(t0);
    t0 = Clock::now();
    auto occ_parallel = techspace::build_occurrence(compact, index, opts);
    double occ_p = seconds_since(t0);
    if (occ_serial.cells().size() != occ_parallel.cells().size() ||
        occ_serial.total() != occ_parallel.total()) {
        std::cerr << "occurrence mismatch between serial and parallel\n";
        return 1;
    }

    t0 = Clock::now();
    auto co_serial = techspace::build_cooccurrence_serial(compact, index, opts);
    double co_s = seconds_since(t0);
    t0 = Clock::now();
    auto co_parallel = techspace::build_cooccurrence(compact, index, opts);
    double co_p = seconds_since(t0);
    if (co_serial.pairs().size() != co_parallel.pairs().size() ||
        co_serial.total() != co_parallel.total()) {
        std::cerr << "co-occurrence mismatch between serial and parallel\n";
        return 1;
    }

    std::cout << std::left << std::setw(28) << "kernel" << std::right << std::setw(12)
              << "serial" << std::setw(12) << "parallel" << std::setw(10) << "speedup\n";
    print({"classify", classify_serial, classify_parallel});
    print({"build_occurrence", occ_s, occ_p});
    print({"build_cooccurrence", co_s, co_p});
    return 0;
}
