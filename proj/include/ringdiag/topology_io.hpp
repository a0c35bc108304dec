#pragma once

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "ringdiag/topology.hpp"

namespace ringdiag {

struct LoadStats {
    std::size_t self_loops_dropped = 0;
};

namespace detail {

inline SwitchId intern_switch(Topology& t, std::map<std::string, SwitchId>& ids,
                              const std::string& token) {
    auto it = ids.find(token);
    if (it != ids.end()) return it->second;
    SwitchId s = static_cast<SwitchId>(t.switches.size());
    ids.emplace(token, s);
    t.switches.push_back(s);
    t.labels.push_back(token);
    return s;
}

inline void add_edge_checked(Topology& t, SwitchId a, SwitchId b, LoadStats* stats) {
    if (a == b) {
        if (stats) ++stats->self_loops_dropped;
        return;
    }
    t.edges.push_back(Edge{static_cast<EdgeId>(t.edges.size()), a, b});
}

}  // namespace detail

// Reads an undirected GraphML file (Topology Zoo flavor: plain element names,
// nodes declared before use, optional node label <data> entries).
inline Topology load_graphml(const std::string& path, LoadStats* stats = nullptr) {
    namespace pt = boost::property_tree;
    pt::ptree doc;
    try {
        pt::read_xml(path, doc, pt::xml_parser::trim_whitespace);
    } catch (const pt::xml_parser_error& e) {
        throw error("graphml: " + std::string(e.what()));
    }

    auto graphml = doc.get_child_optional("graphml");
    if (!graphml) throw error("graphml: missing <graphml> root in " + path);

    // key declarations, to find the node-label attribute if present
    std::string node_label_key;
    for (const auto& [tag, child] : *graphml) {
        if (tag != "key") continue;
        // '/' separator: the attribute name itself contains a dot
        pt::ptree::path_type attr_name("<xmlattr>/attr.name", '/');
        if (child.get("<xmlattr>.for", "") == "node" &&
            child.get(attr_name, std::string()) == "label")
            node_label_key = child.get("<xmlattr>.id", "");
    }

    const pt::ptree* graph = nullptr;
    for (const auto& [tag, child] : *graphml)
        if (tag == "graph") {
            graph = &child;
            break;
        }
    if (!graph) throw error("graphml: no <graph> element in " + path);
    if (graph->get("<xmlattr>.edgedefault", "undirected") == "directed")
        throw error("graphml: directed graphs are unsupported (" + path + ")");

    Topology t;
    t.name = std::filesystem::path(path).stem().string();
    std::map<std::string, SwitchId> ids;

    for (const auto& [tag, child] : *graph) {
        if (tag == "node") {
            std::string id = child.get("<xmlattr>.id", "");
            if (id.empty()) throw error("graphml: node without id in " + path);
            if (ids.count(id)) throw error("graphml: duplicate node id '" + id + "'");
            SwitchId s = detail::intern_switch(t, ids, id);
            if (!node_label_key.empty()) {
                for (const auto& [dtag, data] : child) {
                    if (dtag != "data") continue;
                    if (data.get("<xmlattr>.key", "") == node_label_key) {
                        std::string label = data.get_value<std::string>();
                        if (!label.empty()) t.labels[s] = label;
                    }
                }
            }
        } else if (tag == "edge") {
            if (child.get("<xmlattr>.directed", "false") == "true")
                throw error("graphml: directed edges are unsupported (" + path + ")");
            std::string src = child.get("<xmlattr>.source", "");
            std::string dst = child.get("<xmlattr>.target", "");
            auto si = ids.find(src);
            auto di = ids.find(dst);
            if (si == ids.end() || di == ids.end())
                throw error("graphml: edge references undeclared node (" + src + "," + dst + ")");
            detail::add_edge_checked(t, si->second, di->second, stats);
        }
    }
    if (t.switches.empty()) throw error("graphml: empty topology in " + path);
    return t;
}

// Plain edge list: one "u v" pair per line, '#' starts a comment.
inline Topology load_edgelist(const std::string& path, LoadStats* stats = nullptr) {
    std::ifstream in(path);
    if (!in) throw error("edgelist: cannot open " + path);
    Topology t;
    t.name = std::filesystem::path(path).stem().string();
    std::map<std::string, SwitchId> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string u, v;
        if (!(ls >> u)) continue;
        if (!(ls >> v))
            throw error("edgelist: " + path + ":" + std::to_string(lineno) + ": expected 'u v'");
        std::string extra;
        if (ls >> extra)
            throw error("edgelist: " + path + ":" + std::to_string(lineno) + ": trailing tokens");
        // two statements: first-appearance ids must follow token order
        SwitchId a = detail::intern_switch(t, ids, u);
        SwitchId b = detail::intern_switch(t, ids, v);
        detail::add_edge_checked(t, a, b, stats);
    }
    if (t.switches.empty()) throw error("edgelist: empty topology in " + path);
    return t;
}

// Dispatch on extension: .graphml/.xml vs anything else as an edge list.
inline Topology load_topology(const std::string& path, LoadStats* stats = nullptr) {
    std::string ext = std::filesystem::path(path).extension().string();
    if (ext == ".graphml" || ext == ".xml") return load_graphml(path, stats);
    return load_edgelist(path, stats);
}

}  // namespace ringdiag
