#include "techspace/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace techspace {

size_t RcaMatrix::entity_index(const std::string& label) const {
    auto it = std::find(entities.begin(), entities.end(), label);
    if (it == entities.end()) throw DataError("entity '" + label + "' not in RCA matrix");
    return static_cast<size_t>(it - entities.begin());
}

size_t BinaryRcaMatrix::entity_index(const std::string& label) const {
    auto it = std::find(entities.begin(), entities.end(), label);
    if (it == entities.end())
        throw DataError("entity '" + label + "' not in binary RCA matrix");
    return static_cast<size_t>(it - entities.begin());
}

BinaryRcaMatrix BinaryRcaMatrix::transposed() const {
    BinaryRcaMatrix t;
    t.entities = technologies;
    t.technologies = entities;
    t.window = window;
    t.scope = scope;
    t.values.assign(values.size(), 0);
    for (size_t e = 0; e < entities.size(); ++e)
        for (size_t k = 0; k < technologies.size(); ++k)
            t.values[k * entities.size() + e] = at(e, k);
    return t;
}

double ComplexityVector::value_of(const std::string& label) const {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) return missing_value();
    return values[static_cast<size_t>(it - labels.begin())];
}

// ---------------------------------------------------------------------------

RcaMatrix rca(const OccurrenceMatrix& counts) {
    if (counts.total() <= 0.0) throw DataError("no data in window");
    RcaMatrix r;
    r.entities = counts.entities();
    r.technologies = counts.technologies();
    r.window = counts.window();
    r.scope = counts.scope();
    size_t ne = r.entities.size(), nt = r.technologies.size();
    r.values.assign(ne * nt, missing_value());
    double total = counts.total();
    for (size_t e = 0; e < ne; ++e) {
        double row = counts.row_sum(e);
        if (row <= 0.0) continue;
        for (size_t t = 0; t < nt; ++t) {
            double col = counts.col_sum(t);
            if (col <= 0.0) continue;
            r.values[e * nt + t] = (counts.at(e, t) / row) / (col / total);
        }
    }
    return r;
}

BinaryRcaMatrix binarize(const RcaMatrix& r, double threshold) {
    if (r.transform != RcaMatrix::Transform::raw)
        throw DataError("binarize expects a raw RCA matrix");
    BinaryRcaMatrix m;
    m.entities = r.entities;
    m.technologies = r.technologies;
    m.window = r.window;
    m.scope = r.scope;
    m.values.assign(r.values.size(), 0);
    for (size_t i = 0; i < r.values.size(); ++i)
        m.values[i] = (!is_missing(r.values[i]) && r.values[i] >= threshold) ? 1 : 0;
    return m;
}

RcaMatrix log10_rca(const RcaMatrix& r) {
    if (r.transform != RcaMatrix::Transform::raw)
        throw DataError("log10_rca expects a raw RCA matrix");
    RcaMatrix out = r;
    out.transform = RcaMatrix::Transform::log10;
    for (double& v : out.values)
        v = (!is_missing(v) && v > 0.0) ? std::log10(v) : missing_value();
    return out;
}

RelatednessMatrix association_strength(const CooccurrenceMatrix& c) {
    if (c.empty() || c.total() <= 0.0) throw DataError("no data in window");
    RelatednessMatrix r;
    r.technologies = c.technologies();
    r.occurrence = c.occurrence_totals();
    r.window = c.window();
    r.scope = c.scope();
    size_t n = r.technologies.size();
    r.phi.assign(n * n, 0.0);
    double total = c.total();
    for (const auto& p : c.pairs()) {
        double si = c.occurrence(p.i), sj = c.occurrence(p.j);
        if (si <= 0.0 || sj <= 0.0) continue;
        double phi = p.value * total / (si * sj);
        r.phi[p.i * n + p.j] = phi;
        r.phi[p.j * n + p.i] = phi;
    }
    return r;
}

// ---------------------------------------------------------------------------
// method of reflections

ComplexityVector method_of_reflections(const BinaryRcaMatrix& m, Axis axis, int steps) {
    if (steps < 0) throw ConfigError("reflection steps must be >= 0");
    size_t ne = m.entities.size(), nt = m.technologies.size();
    if (ne == 0 || nt == 0) throw DataError("degenerate matrix");

    std::vector<double> kc0(ne, 0.0), kt0(nt, 0.0);
    for (size_t e = 0; e < ne; ++e)
        for (size_t t = 0; t < nt; ++t) {
            double v = m.at(e, t);
            kc0[e] += v;
            kt0[t] += v;
        }

    bool any_entity = false, any_tech = false;
    for (double v : kc0) any_entity = any_entity || v > 0;
    for (double v : kt0) any_tech = any_tech || v > 0;
    if (!any_entity || !any_tech) throw DataError("degenerate matrix");

    // excluded rows/columns stay at zero inside the iteration and are
    // reported as missing in the result
    std::vector<double> kc = kc0, kt = kt0;
    std::vector<double> kc_next(ne), kt_next(nt);
    for (int step = 1; step <= steps; ++step) {
        for (size_t e = 0; e < ne; ++e) {
            if (kc0[e] <= 0) {
                kc_next[e] = 0.0;
                continue;
            }
            double acc = 0.0;
            for (size_t t = 0; t < nt; ++t)
                if (m.at(e, t)) acc += kt[t];
            kc_next[e] = acc / kc0[e];
        }
        for (size_t t = 0; t < nt; ++t) {
            if (kt0[t] <= 0) {
                kt_next[t] = 0.0;
                continue;
            }
            double acc = 0.0;
            for (size_t e = 0; e < ne; ++e)
                if (m.at(e, t)) acc += kc[e];
            kt_next[t] = acc / kt0[t];
        }
        kc.swap(kc_next);
        kt.swap(kt_next);
    }

    ComplexityVector out;
    out.axis = axis;
    out.steps = steps;
    if (axis == Axis::entity) {
        out.labels = m.entities;
        out.values.assign(ne, missing_value());
        for (size_t e = 0; e < ne; ++e) {
            if (kc0[e] > 0)
                out.values[e] = kc[e];
            else
                out.excluded.push_back(m.entities[e]);
        }
    } else {
        out.labels = m.technologies;
        out.values.assign(nt, missing_value());
        for (size_t t = 0; t < nt; ++t) {
            if (kt0[t] > 0)
                out.values[t] = kt[t];
            else
                out.excluded.push_back(m.technologies[t]);
        }
    }
    return out;
}

ComplexityVector country_complexity(const BinaryRcaMatrix& m, int steps) {
    return method_of_reflections(m, Axis::entity, steps);
}

// ---------------------------------------------------------------------------
// aggregates

namespace {
size_t tech_index_checked(const RelatednessMatrix& phi, const std::string& member) {
    auto it = std::find(phi.technologies.begin(), phi.technologies.end(), member);
    if (it == phi.technologies.end())
        throw ConfigError("category member '" + member + "' not in relatedness matrix");
    return static_cast<size_t>(it - phi.technologies.begin());
}
} // namespace

double category_relatedness(const RelatednessMatrix& phi, const CategorySpec& cat) {
    std::vector<size_t> idx;
    for (const auto& member : cat.members) idx.push_back(tech_index_checked(phi, member));
    if (idx.size() < 2) return missing_value();
    double sum = 0.0;
    long pairs = 0;
    for (size_t a = 0; a < idx.size(); ++a)
        for (size_t b = a + 1; b < idx.size(); ++b) {
            sum += phi.at(idx[a], idx[b]);
            ++pairs;
        }
    return sum / static_cast<double>(pairs);
}

double category_relatedness_incident(const RelatednessMatrix& phi, const CategorySpec& cat) {
    std::vector<size_t> idx;
    for (const auto& member : cat.members) idx.push_back(tech_index_checked(phi, member));
    std::vector<bool> in_cat(phi.technologies.size(), false);
    for (size_t i : idx) in_cat[i] = true;
    double sum = 0.0;
    long pairs = 0;
    size_t n = phi.technologies.size();
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            if (!in_cat[i] && !in_cat[j]) continue;
            if (!phi.present(i) || !phi.present(j)) continue;
            sum += phi.at(i, j);
            ++pairs;
        }
    if (pairs == 0) return missing_value();
    return sum / static_cast<double>(pairs);
}

double overall_relatedness(const RelatednessMatrix& phi, bool positive_pairs_only) {
    size_t n = phi.technologies.size();
    double sum = 0.0;
    long pairs = 0;
    for (size_t i = 0; i < n; ++i) {
        if (!phi.present(i)) continue;
        for (size_t j = i + 1; j < n; ++j) {
            if (!phi.present(j)) continue;
            double v = phi.at(i, j);
            if (positive_pairs_only && v <= 0.0) continue;
            sum += v;
            ++pairs;
        }
    }
    if (pairs == 0) return missing_value();
    return sum / static_cast<double>(pairs);
}

CategoryComplexity category_complexity(const ComplexityVector& k_t, const CategorySpec& cat) {
    CategoryComplexity out;
    for (const auto& member : cat.members) {
        double v = k_t.value_of(member);
        if (is_missing(v)) {
            out.missing_members.push_back(member);
            continue;
        }
        out.value += v;
    }
    return out;
}

CorePartition detect_core(const std::vector<BinaryRcaMatrix>& per_window,
                          const std::string& entity_label) {
    CorePartition out;
    if (per_window.empty()) return out;

    // union of technology labels across windows, first-seen order
    std::vector<std::string> techs;
    for (const auto& m : per_window)
        for (const auto& t : m.technologies)
            if (std::find(techs.begin(), techs.end(), t) == techs.end()) techs.push_back(t);

    for (const auto& tech : techs) {
        int windows_specialised = 0;
        for (const auto& m : per_window) {
            auto it = std::find(m.technologies.begin(), m.technologies.end(), tech);
            if (it == m.technologies.end()) continue;
            size_t t = static_cast<size_t>(it - m.technologies.begin());
            size_t e = m.entity_index(entity_label);
            if (m.at(e, t)) ++windows_specialised;
        }
        if (windows_specialised == static_cast<int>(per_window.size()))
            out.core.push_back(tech);
        else if (windows_specialised > 0)
            out.related.push_back(tech);
    }
    return out;
}

} // namespace techspace
