// Copyright (c) irqv contributors.
// SPDX-License-Identifier: Apache-2.0

#include "irqv/feasibility.hpp"

#include <algorithm>

namespace irqv {

FactBase extract_facts(const Program& p, std::span<const Cfg> cfgs, std::span<const AccessInfo> infos) {
    FactBase fb;
    for (const Cfg& g : cfgs) {
        const Handler& h = p.handlers.at(g.handler_index());
        for (std::uint32_t n = 0; n < g.size(); ++n) {
            fb.pri[g.id(n)] = h.priority;
            fb.handler_of[g.id(n)] = h.name;
        }
        fb.dom.merge(dominators(g));
        fb.postdom.merge(post_dominators(g));
    }
    for (const AccessInfo& info : infos) {
        fb.load.insert(info.loads.begin(), info.loads.end());
        fb.store.insert(info.stores.begin(), info.stores.end());
    }
    return fb;
}

NodeRelation no_preempt(const FactBase& fb) {
    NodeRelation out;
    for (const auto& [s1, p1] : fb.pri) {
        for (const auto& [s2, p2] : fb.pri) {
            if (fb.handler_of.at(s1) != fb.handler_of.at(s2) && p2 >= p1) {
                out.emplace(s1, s2);
            }
        }
    }
    return out;
}

namespace {

// Stores of `var`, grouped once so the joins below stay linear in practice.
std::vector<NodeId> stores_of(const FactBase& fb, const std::string& var) {
    std::vector<NodeId> out;
    for (const auto& [s, v] : fb.store) {
        if (v == var) {
            out.push_back(s);
        }
    }
    return out;
}

} // namespace

AccessSet covered_loads(const FactBase& fb) {
    AccessSet out;
    for (const auto& [l, v] : fb.load) {
        for (NodeId s : stores_of(fb, v)) {
            if (s != l && fb.dom.count({s, l}) > 0) {
                out.emplace(l, v);
                break;
            }
        }
    }
    return out;
}

AccessSet intercepted_stores(const FactBase& fb) {
    AccessSet out;
    for (const auto& [s1, v] : fb.store) {
        for (NodeId s2 : stores_of(fb, v)) {
            if (s2 != s1 && fb.postdom.count({s2, s1}) > 0) {
                out.emplace(s1, v);
                break;
            }
        }
    }
    return out;
}

std::set<ReadFromPair> cross_handler_pairs(const FactBase& fb) {
    std::set<ReadFromPair> out;
    for (const auto& [l, v] : fb.load) {
        for (NodeId s : stores_of(fb, v)) {
            if (fb.handler_of.at(l) != fb.handler_of.at(s)) {
                out.insert(ReadFromPair{l, s, v});
            }
        }
    }
    return out;
}

FeasibilityResult must_not_read_from(const FactBase& fb) {
    FeasibilityResult r;
    r.no_preempt = no_preempt(fb);
    r.covered_load = covered_loads(fb);
    r.intercepted_store = intercepted_stores(fb);
    for (const ReadFromPair& pair : cross_handler_pairs(fb)) {
        const bool covered = r.covered_load.count({pair.load, pair.var}) > 0;
        const bool intercepted = r.intercepted_store.count({pair.store, pair.var}) > 0;
        const bool r1 = covered && intercepted;
        const bool r2 = covered && r.no_preempt.count({pair.store, pair.load}) > 0;
        const bool r3 = intercepted && r.no_preempt.count({pair.load, pair.store}) > 0;
        if (r1 || r2 || r3) {
            r.must_not_read_from.insert(pair);
        }
    }
    return r;
}

PairStats pair_statistics(const FactBase& fb, const FeasibilityResult& r) {
    PairStats stats;
    for (const ReadFromPair& pair : cross_handler_pairs(fb)) {
        ++stats.total;
        if (r.must_not_read_from.count(pair) > 0) {
            ++stats.pruned;
        }
    }
    stats.ratio = stats.total == 0 ? 0.0 : static_cast<double>(stats.pruned) / static_cast<double>(stats.total);
    return stats;
}

std::vector<std::string> dump_facts(const Program& p, const FactBase& fb, const FeasibilityResult& r) {
    std::vector<std::string> lines;
    auto name = [&](NodeId n) { return node_name(p, n); };
    auto pair_rel = [&](const char* rel, const NodeRelation& relation) {
        for (const auto& [a, b] : relation) {
            lines.push_back(std::string(rel) + "(" + name(a) + ", " + name(b) + ")");
        }
    };
    auto access_rel = [&](const char* rel, const AccessSet& set) {
        for (const auto& [n, v] : set) {
            lines.push_back(std::string(rel) + "(" + name(n) + ", " + v + ")");
        }
    };
    pair_rel("Dom", fb.dom);
    pair_rel("PostDom", fb.postdom);
    for (const auto& [n, prio] : fb.pri) {
        lines.push_back("Pri(" + name(n) + ", " + std::to_string(prio) + ")");
    }
    access_rel("Load", fb.load);
    access_rel("Store", fb.store);
    pair_rel("NoPreempt", r.no_preempt);
    access_rel("CoveredLoad", r.covered_load);
    access_rel("InterceptedStore", r.intercepted_store);
    for (const ReadFromPair& m : r.must_not_read_from) {
        lines.push_back("MustNotReadFrom(" + name(m.load) + ", " + name(m.store) + ", " + m.var + ")");
    }
    std::sort(lines.begin(), lines.end());
    return lines;
}

} // namespace irqv
