#ifndef DPC_SHAPES_HPP
#define DPC_SHAPES_HPP

#include <vector>

#include "dpc/normalize.hpp"

namespace dpc {

enum class OperatorShape : std::uint8_t { Prefix, Postfix, Infix, Closed };

inline const char* to_string(OperatorShape s) {
    switch (s) {
        case OperatorShape::Prefix: return "prefix";
        case OperatorShape::Postfix: return "postfix";
        case OperatorShape::Infix: return "infix";
        case OperatorShape::Closed: return "closed";
    }
    return "?";
}

namespace detail {

inline const NSymbol* edge_symbol(const NormalizedGrammar& g, const NProduction& p,
                                  bool leftEdge) {
    if (p.rhs.empty()) return nullptr;
    if (leftEdge) {
        for (const NSymbol& s : p.rhs) {
            if (s.kind == NSymbol::Kind::Nt && g.nt_is_layout(s.nt)) continue;
            return &s;
        }
    } else {
        for (auto it = p.rhs.rbegin(); it != p.rhs.rend(); ++it) {
            if (it->kind == NSymbol::Kind::Nt && g.nt_is_layout(it->nt)) continue;
            return &*it;
        }
    }
    return nullptr;
}

/// Nonterminals reachable from `nt` through injection productions and the
/// inner nonterminal of bracket productions.
inline std::vector<int> injection_closure(const NormalizedGrammar& g, int nt) {
    std::vector<int> reach;
    std::vector<char> seen(g.nts.size(), 0);
    std::vector<int> work{nt};
    seen[nt] = 1;
    while (!work.empty()) {
        int cur = work.back();
        work.pop_back();
        reach.push_back(cur);
        for (ProductionId pid : g.ntProds[cur]) {
            const NProduction& p = g.prods[pid];
            int next = -1;
            if (g.is_injection(pid)) {
                next = p.rhs[0].nt;
            } else if (p.bracket) {
                for (const NSymbol& s : p.rhs)
                    if (s.kind == NSymbol::Kind::Nt && !g.nt_is_layout(s.nt) &&
                        !g.nt_is_literal(s.nt))
                        next = s.nt;
            }
            if (next >= 0 && !seen[next]) {
                seen[next] = 1;
                work.push_back(next);
            }
        }
    }
    return reach;
}

} // namespace detail

/// Recursion shape of a production. A production is left-recursive when its
/// leftmost non-layout symbol reaches the production's own sort through
/// injection (and bracket) wrappers; right-recursion is the mirror.
inline OperatorShape classify_production(const NormalizedGrammar& g,
                                         ProductionId pid) {
    const NProduction& p = g.prods[pid];
    auto edgeReaches = [&](bool leftEdge) {
        const NSymbol* s = detail::edge_symbol(g, p, leftEdge);
        if (!s || s->kind != NSymbol::Kind::Nt) return false;
        for (int nt : detail::injection_closure(g, s->nt))
            if (nt == p.lhs) return true;
        return false;
    };
    bool leftRec = edgeReaches(true);
    bool rightRec = edgeReaches(false);
    if (leftRec && rightRec) return OperatorShape::Infix;
    if (rightRec) return OperatorShape::Prefix;
    if (leftRec) return OperatorShape::Postfix;
    return OperatorShape::Closed;
}

/// Spine reachability: spine_nts(g, leftSpine)[nt] is the set of
/// nonterminals that can occur on the leftmost (resp. rightmost) spine of
/// some tree for `nt`, including nt itself. Spines follow the first (resp.
/// last) non-layout right-hand-side symbol of each production; terminal
/// edges end a spine, so brackets never extend one.
inline std::vector<std::vector<char>> spine_nts(const NormalizedGrammar& g,
                                                bool leftSpine) {
    std::size_t n = g.nts.size();
    std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
    for (std::size_t nt = 0; nt < n; ++nt) reach[nt][nt] = 1;

    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t nt = 0; nt < n; ++nt) {
            for (ProductionId pid : g.ntProds[nt]) {
                const NSymbol* s = detail::edge_symbol(g, g.prods[pid], leftSpine);
                if (!s || s->kind != NSymbol::Kind::Nt) continue;
                for (std::size_t m = 0; m < n; ++m) {
                    if (reach[s->nt][m] && !reach[nt][m]) {
                        reach[nt][m] = 1;
                        changed = true;
                    }
                }
            }
        }
    }
    return reach;
}

/// Deep recursion shape used by conflict detection: a production is
/// deep-right-recursive when a tree built from it can carry its own sort on
/// the rightmost spine of its last argument (lists and constructor-carrying
/// wrappers included), which is what makes a low-priority operator able to
/// "absorb" input to the right.
struct DeepShapes {
    std::vector<char> deepLeft;  // by production id
    std::vector<char> deepRight; // by production id

    bool prefix(ProductionId p) const { return deepRight[p] && !deepLeft[p]; }
    bool postfix(ProductionId p) const { return deepLeft[p] && !deepRight[p]; }
    bool infix(ProductionId p) const { return deepLeft[p] && deepRight[p]; }
};

inline DeepShapes deep_shapes(const NormalizedGrammar& g) {
    auto leftReach = spine_nts(g, true);
    auto rightReach = spine_nts(g, false);
    DeepShapes out;
    out.deepLeft.assign(g.prods.size(), 0);
    out.deepRight.assign(g.prods.size(), 0);
    for (const NProduction& p : g.prods) {
        if (p.reject) continue;
        const NSymbol* l = detail::edge_symbol(g, p, true);
        const NSymbol* r = detail::edge_symbol(g, p, false);
        if (l && l->kind == NSymbol::Kind::Nt && leftReach[l->nt][p.lhs])
            out.deepLeft[p.id] = 1;
        if (r && r->kind == NSymbol::Kind::Nt && rightReach[r->nt][p.lhs])
            out.deepRight[p.id] = 1;
    }
    return out;
}

} // namespace dpc

#endif // DPC_SHAPES_HPP
