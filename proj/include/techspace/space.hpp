#ifndef TECHSPACE_SPACE_HPP
#define TECHSPACE_SPACE_HPP

#include "techspace/metrics.hpp"

#include <map>
#include <string>
#include <vector>

namespace techspace {

struct SpaceNode {
    std::string id;
    std::string sector;
    double complexity = 0.0; // k_t normalized to max = 1
    double degree = 0.0;     // weighted degree
};

struct SpaceEdge {
    uint32_t a = 0, b = 0; // node indices, a < b
    double weight = 0.0;   // phi
    bool backbone = false;
};

// Technology-space graph: nodes are fields, undirected edges carry
// relatedness. Nodes are kept even when isolated.
struct TechnologySpace {
    std::vector<SpaceNode> nodes; // sorted by id
    std::vector<SpaceEdge> edges; // sorted by (a, b)
    std::string window, scope;
    long backbone_extra_edges = -1; // -1 = backbone not extracted
    int components = 0;             // set by extract_backbone

    size_t node_index(const std::string& id) const;
};

// Specialisation markings layered over a space: per window, each field is
// specialised or not; each field carries a category tag.
struct Overlay {
    std::vector<std::string> windows; // emission order
    std::map<std::string, std::map<std::string, bool>> marking; // window -> field -> spec
    std::map<std::string, std::string> category; // field -> core/related/surrounding/other
};

// Complete weighted graph over phi's technologies (positive-phi edges only);
// node complexity = k_t / max(k_t), degree = weighted degree.
// Throws DataError when phi and k_t disagree on the technology set.
TechnologySpace build_space(const RelatednessMatrix& phi, const ComplexityVector& k_t,
                            const std::map<std::string, std::string>& sectors);

// Maximum spanning tree (forest on disconnected graphs) under edge weight,
// plus the top_k_extra highest-weight non-tree edges. Ties break by
// lexicographic node-pair order.
TechnologySpace extract_backbone(TechnologySpace space, long top_k_extra);

// Marks each field of `space` specialised/not from the given entity row of M
// for one window and attaches category tags.
Overlay overlay_specialisation(const TechnologySpace& space, const BinaryRcaMatrix& m,
                               const std::string& entity_label,
                               const std::string& window_label,
                               const std::vector<CategorySpec>& categories);

// Adds a second window's markings to an existing overlay.
void add_overlay_window(Overlay& overlay, const TechnologySpace& space,
                        const BinaryRcaMatrix& m, const std::string& entity_label,
                        const std::string& window_label);

enum class GraphFormat { graphml, dot, json };

GraphFormat parse_graph_format(const std::string& name); // throws ConfigError

// Deterministic export; overlay may be null. Attribute names: sector,
// complexity, degree, category, spec_<window> (nodes); weight, backbone (edges).
std::string export_graph(const TechnologySpace& space, const Overlay* overlay,
                         GraphFormat format);

// Inverse of the JSON export, used for round-trip checks.
std::pair<TechnologySpace, Overlay> import_graph_json(const std::string& text);

} // namespace techspace

#endif
