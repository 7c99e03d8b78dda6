#include "techspace/space.hpp"

#include "techspace/csv.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <numeric>
#include <sstream>

namespace techspace {

size_t TechnologySpace::node_index(const std::string& id) const {
    for (size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].id == id) return i;
    throw DataError("node '" + id + "' not in space");
}

TechnologySpace build_space(const RelatednessMatrix& phi, const ComplexityVector& k_t,
                            const std::map<std::string, std::string>& sectors) {
    if (k_t.axis != Axis::technology)
        throw DataError("build_space expects a technology-axis complexity vector");
    std::vector<std::string> a = phi.technologies, b = k_t.labels;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw DataError("relatedness and complexity label sets differ");

    TechnologySpace space;
    space.window = phi.window;
    space.scope = phi.scope;

    double max_k = 0.0;
    for (double v : k_t.values)
        if (!is_missing(v)) max_k = std::max(max_k, v);

    // nodes sorted by id
    std::vector<size_t> order(phi.technologies.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
        return phi.technologies[x] < phi.technologies[y];
    });
    std::vector<uint32_t> to_node(phi.technologies.size());
    for (uint32_t n = 0; n < order.size(); ++n) {
        size_t t = order[n];
        to_node[t] = n;
        SpaceNode node;
        node.id = phi.technologies[t];
        auto sec = sectors.find(node.id);
        node.sector = sec == sectors.end() ? "" : sec->second;
        double k = k_t.value_of(node.id);
        node.complexity = (!is_missing(k) && max_k > 0) ? k / max_k : 0.0;
        double degree = 0.0;
        for (size_t j = 0; j < phi.technologies.size(); ++j) degree += phi.at(t, j);
        node.degree = degree;
        space.nodes.push_back(std::move(node));
    }

    for (size_t i = 0; i < phi.technologies.size(); ++i)
        for (size_t j = i + 1; j < phi.technologies.size(); ++j) {
            double w = phi.at(i, j);
            if (w <= 0.0) continue;
            uint32_t na = to_node[i], nb = to_node[j];
            if (na > nb) std::swap(na, nb);
            space.edges.push_back({na, nb, w, false});
        }
    std::sort(space.edges.begin(), space.edges.end(),
              [](const SpaceEdge& x, const SpaceEdge& y) {
                  return x.a != y.a ? x.a < y.a : x.b < y.b;
              });
    return space;
}

namespace {

struct UnionFind {
    std::vector<uint32_t> parent;
    explicit UnionFind(size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0u);
    }
    uint32_t find(uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    bool unite(uint32_t a, uint32_t b) {
        uint32_t ra = find(a), rb = find(b);
        if (ra == rb) return false;
        parent[ra] = rb;
        return true;
    }
};

} // namespace

TechnologySpace extract_backbone(TechnologySpace space, long top_k_extra) {
    if (top_k_extra < 0) throw ConfigError("backbone extra edge count must be >= 0");
    for (auto& e : space.edges) e.backbone = false;

    // Kruskal on weight descending; ties broken by node-pair label order so
    // the result is independent of the input edge order
    std::vector<size_t> order(space.edges.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
        const SpaceEdge& ex = space.edges[x];
        const SpaceEdge& ey = space.edges[y];
        if (ex.weight != ey.weight) return ex.weight > ey.weight;
        const std::string& xa = space.nodes[ex.a].id;
        const std::string& ya = space.nodes[ey.a].id;
        if (xa != ya) return xa < ya;
        return space.nodes[ex.b].id < space.nodes[ey.b].id;
    });

    UnionFind uf(space.nodes.size());
    std::vector<size_t> non_tree;
    for (size_t idx : order) {
        SpaceEdge& e = space.edges[idx];
        if (uf.unite(e.a, e.b))
            e.backbone = true;
        else
            non_tree.push_back(idx);
    }
    long extra = 0;
    for (size_t idx : non_tree) {
        if (extra >= top_k_extra) break;
        space.edges[idx].backbone = true;
        ++extra;
    }

    int components = 0;
    for (uint32_t n = 0; n < space.nodes.size(); ++n)
        if (uf.find(n) == n) ++components;
    space.components = components;
    space.backbone_extra_edges = top_k_extra;
    return space;
}

Overlay overlay_specialisation(const TechnologySpace& space, const BinaryRcaMatrix& m,
                               const std::string& entity_label,
                               const std::string& window_label,
                               const std::vector<CategorySpec>& categories) {
    Overlay overlay;
    for (const auto& node : space.nodes)
        overlay.category[node.id] = category_tag(node.id, categories);
    add_overlay_window(overlay, space, m, entity_label, window_label);
    return overlay;
}

void add_overlay_window(Overlay& overlay, const TechnologySpace& space,
                        const BinaryRcaMatrix& m, const std::string& entity_label,
                        const std::string& window_label) {
    size_t e = m.entity_index(entity_label);
    auto& marks = overlay.marking[window_label];
    for (const auto& node : space.nodes) {
        bool spec = false;
        auto it = std::find(m.technologies.begin(), m.technologies.end(), node.id);
        if (it != m.technologies.end())
            spec = m.at(e, static_cast<size_t>(it - m.technologies.begin())) != 0;
        marks[node.id] = spec;
    }
    if (std::find(overlay.windows.begin(), overlay.windows.end(), window_label) ==
        overlay.windows.end())
        overlay.windows.push_back(window_label);
}

// ---------------------------------------------------------------------------
// exports

GraphFormat parse_graph_format(const std::string& name) {
    if (name == "graphml") return GraphFormat::graphml;
    if (name == "dot") return GraphFormat::dot;
    if (name == "json") return GraphFormat::json;
    throw ConfigError("unknown graph format '" + name + "' (graphml|dot|json)");
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

std::string export_graphml(const TechnologySpace& space, const Overlay* overlay) {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
        << "  <key id=\"sector\" for=\"node\" attr.name=\"sector\" attr.type=\"string\"/>\n"
        << "  <key id=\"complexity\" for=\"node\" attr.name=\"complexity\" attr.type=\"double\"/>\n"
        << "  <key id=\"degree\" for=\"node\" attr.name=\"degree\" attr.type=\"double\"/>\n";
    if (overlay) {
        out << "  <key id=\"category\" for=\"node\" attr.name=\"category\" attr.type=\"string\"/>\n";
        for (const auto& w : overlay->windows)
            out << "  <key id=\"spec_" << xml_escape(w) << "\" for=\"node\" attr.name=\"spec_"
                << xml_escape(w) << "\" attr.type=\"boolean\"/>\n";
    }
    out << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
        << "  <key id=\"backbone\" for=\"edge\" attr.name=\"backbone\" attr.type=\"boolean\"/>\n"
        << "  <graph id=\"technology_space\" edgedefault=\"undirected\">\n";
    for (const auto& node : space.nodes) {
        out << "    <node id=\"" << xml_escape(node.id) << "\">\n"
            << "      <data key=\"sector\">" << xml_escape(node.sector) << "</data>\n"
            << "      <data key=\"complexity\">" << format_value(node.complexity)
            << "</data>\n"
            << "      <data key=\"degree\">" << format_value(node.degree) << "</data>\n";
        if (overlay) {
            auto cat = overlay->category.find(node.id);
            out << "      <data key=\"category\">"
                << xml_escape(cat == overlay->category.end() ? "other" : cat->second)
                << "</data>\n";
            for (const auto& w : overlay->windows) {
                bool spec = false;
                auto wm = overlay->marking.find(w);
                if (wm != overlay->marking.end()) {
                    auto f = wm->second.find(node.id);
                    spec = f != wm->second.end() && f->second;
                }
                out << "      <data key=\"spec_" << xml_escape(w) << "\">"
                    << (spec ? "true" : "false") << "</data>\n";
            }
        }
        out << "    </node>\n";
    }
    for (const auto& e : space.edges) {
        out << "    <edge source=\"" << xml_escape(space.nodes[e.a].id) << "\" target=\""
            << xml_escape(space.nodes[e.b].id) << "\">\n"
            << "      <data key=\"weight\">" << format_value(e.weight) << "</data>\n"
            << "      <data key=\"backbone\">" << (e.backbone ? "true" : "false")
            << "</data>\n"
            << "    </edge>\n";
    }
    out << "  </graph>\n</graphml>\n";
    return out.str();
}

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

std::string export_dot(const TechnologySpace& space, const Overlay* overlay) {
    std::ostringstream out;
    out << "graph technology_space {\n";
    for (const auto& node : space.nodes) {
        out << "  \"" << dot_escape(node.id) << "\" [sector=\"" << dot_escape(node.sector)
            << "\", complexity=" << format_value(node.complexity)
            << ", degree=" << format_value(node.degree);
        if (overlay) {
            auto cat = overlay->category.find(node.id);
            out << ", category=\""
                << dot_escape(cat == overlay->category.end() ? "other" : cat->second)
                << "\"";
            for (const auto& w : overlay->windows) {
                bool spec = false;
                auto wm = overlay->marking.find(w);
                if (wm != overlay->marking.end()) {
                    auto f = wm->second.find(node.id);
                    spec = f != wm->second.end() && f->second;
                }
                out << ", spec_" << w << "=" << (spec ? "true" : "false");
            }
        }
        out << "];\n";
    }
    for (const auto& e : space.edges) {
        out << "  \"" << dot_escape(space.nodes[e.a].id) << "\" -- \""
            << dot_escape(space.nodes[e.b].id) << "\" [weight=" << format_value(e.weight)
            << ", backbone=" << (e.backbone ? "true" : "false") << "];\n";
    }
    out << "}\n";
    return out.str();
}

nlohmann::json graph_json(const TechnologySpace& space, const Overlay* overlay) {
    nlohmann::json j;
    j["graph"] = {{"window", space.window},
                  {"scope", space.scope},
                  {"backbone_extra_edges", space.backbone_extra_edges},
                  {"components", space.components}};
    j["nodes"] = nlohmann::json::array();
    for (const auto& node : space.nodes) {
        nlohmann::json n = {{"id", node.id},
                            {"sector", node.sector},
                            {"complexity", node.complexity},
                            {"degree", node.degree}};
        if (overlay) {
            auto cat = overlay->category.find(node.id);
            n["category"] = cat == overlay->category.end() ? "other" : cat->second;
            for (const auto& w : overlay->windows) {
                bool spec = false;
                auto wm = overlay->marking.find(w);
                if (wm != overlay->marking.end()) {
                    auto f = wm->second.find(node.id);
                    spec = f != wm->second.end() && f->second;
                }
                n["spec_" + w] = spec;
            }
        }
        j["nodes"].push_back(std::move(n));
    }
    j["edges"] = nlohmann::json::array();
    for (const auto& e : space.edges) {
        j["edges"].push_back({{"source", space.nodes[e.a].id},
                              {"target", space.nodes[e.b].id},
                              {"weight", e.weight},
                              {"backbone", e.backbone}});
    }
    return j;
}

} // namespace

std::string export_graph(const TechnologySpace& space, const Overlay* overlay,
                         GraphFormat format) {
    switch (format) {
    case GraphFormat::graphml: return export_graphml(space, overlay);
    case GraphFormat::dot: return export_dot(space, overlay);
    case GraphFormat::json: return graph_json(space, overlay).dump(2) + "\n";
    }
    throw ConfigError("unknown graph format");
}

std::pair<TechnologySpace, Overlay> import_graph_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    TechnologySpace space;
    Overlay overlay;
    space.window = j["graph"].value("window", "");
    space.scope = j["graph"].value("scope", "");
    space.backbone_extra_edges = j["graph"].value("backbone_extra_edges", -1L);
    space.components = j["graph"].value("components", 0);
    for (const auto& n : j["nodes"]) {
        SpaceNode node;
        node.id = n.at("id").get<std::string>();
        node.sector = n.value("sector", "");
        node.complexity = n.value("complexity", 0.0);
        node.degree = n.value("degree", 0.0);
        space.nodes.push_back(node);
        if (n.contains("category")) overlay.category[node.id] = n["category"];
        for (auto it = n.begin(); it != n.end(); ++it) {
            if (it.key().rfind("spec_", 0) == 0) {
                std::string w = it.key().substr(5);
                overlay.marking[w][node.id] = it.value().get<bool>();
                if (std::find(overlay.windows.begin(), overlay.windows.end(), w) ==
                    overlay.windows.end())
                    overlay.windows.push_back(w);
            }
        }
    }
    std::sort(overlay.windows.begin(), overlay.windows.end());
    for (const auto& e : j["edges"]) {
        uint32_t a = static_cast<uint32_t>(space.node_index(e.at("source")));
        uint32_t b = static_cast<uint32_t>(space.node_index(e.at("target")));
        if (a > b) std::swap(a, b);
        space.edges.push_back({a, b, e.value("weight", 0.0), e.value("backbone", false)});
    }
    std::sort(space.edges.begin(), space.edges.end(),
              [](const SpaceEdge& x, const SpaceEdge& y) {
                  return x.a != y.a ? x.a < y.a : x.b < y.b;
              });
    return {std::move(space), std::move(overlay)};
}

} // namespace techspace
