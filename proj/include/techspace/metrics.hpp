#ifndef TECHSPACE_METRICS_HPP
#define TECHSPACE_METRICS_HPP

#include "techspace/errors.hpp"
#include "techspace/fields.hpp"
#include "techspace/matrix.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace techspace {

inline double missing_value() { return std::nan(""); }
inline bool is_missing(double v) { return std::isnan(v); }

// Balassa index per (entity, technology) cell. NaN marks cells whose row or
// column total is zero (no data, as opposed to no specialisation).
struct RcaMatrix {
    enum class Transform { raw, log10 };

    std::vector<std::string> entities;
    std::vector<std::string> technologies;
    std::vector<double> values; // row-major entities x technologies
    Transform transform = Transform::raw;
    std::string window, scope;

    double at(size_t e, size_t t) const { return values[e * technologies.size() + t]; }
    size_t entity_index(const std::string& label) const;
};

// M_ct = 1 iff raw RCA >= threshold; missing counts as 0.
struct BinaryRcaMatrix {
    std::vector<std::string> entities;
    std::vector<std::string> technologies;
    std::vector<uint8_t> values;
    std::string window, scope;

    uint8_t at(size_t e, size_t t) const { return values[e * technologies.size() + t]; }
    size_t entity_index(const std::string& label) const;
    BinaryRcaMatrix transposed() const;
};

// Association-strength normalized co-occurrence: phi = 1 on the statistical
// independence baseline. Symmetric, zero diagonal.
struct RelatednessMatrix {
    std::vector<std::string> technologies;
    std::vector<double> phi;        // dense n x n
    std::vector<double> occurrence; // s_i carried over from the source counts
    std::string window, scope;

    double at(size_t i, size_t j) const { return phi[i * technologies.size() + j]; }
    bool present(size_t i) const { return occurrence.empty() || occurrence[i] > 0; }
};

enum class Axis { entity, technology };

// k values at one reflection depth. NaN for entities/technologies excluded
// because their depth-0 value was zero.
struct ComplexityVector {
    Axis axis = Axis::entity;
    int steps = 0;
    std::vector<std::string> labels;
    std::vector<double> values;
    std::vector<std::string> excluded;

    double value_of(const std::string& label) const;
};

RcaMatrix rca(const OccurrenceMatrix& counts);
BinaryRcaMatrix binarize(const RcaMatrix& r, double threshold = 1.0);
RcaMatrix log10_rca(const RcaMatrix& r);

RelatednessMatrix association_strength(const CooccurrenceMatrix& c);

ComplexityVector method_of_reflections(const BinaryRcaMatrix& m, Axis axis, int steps);

// MORc convenience: entity-axis reflections, one step by default.
ComplexityVector country_complexity(const BinaryRcaMatrix& m, int steps = 1);

// Mean phi over unordered member pairs (zero-valued pairs included);
// NaN for singleton categories, ConfigError for members missing from phi.
double category_relatedness(const RelatednessMatrix& phi, const CategorySpec& cat);
// Alternative reading: mean phi over edges incident to the category.
double category_relatedness_incident(const RelatednessMatrix& phi, const CategorySpec& cat);

// Mean phi over unordered pairs of technologies present in the data
// (occurrence > 0); NaN when fewer than two are present.
double overall_relatedness(const RelatednessMatrix& phi, bool positive_pairs_only = false);

struct CategoryComplexity {
    double value = 0.0;
    std::vector<std::string> missing_members; // absent from k_t, contributed 0
};
CategoryComplexity category_complexity(const ComplexityVector& k_t, const CategorySpec& cat);

// core = specialised in every window; related = specialised in at least one
// window, minus the core.
struct CorePartition {
    std::vector<std::string> core;
    std::vector<std::string> related;
};
CorePartition detect_core(const std::vector<BinaryRcaMatrix>& per_window,
                          const std::string& entity_label);

} // namespace techspace

#endif
