#ifndef DPC_CONFLICTS_HPP
#define DPC_CONFLICTS_HPP

#include <algorithm>
#include <map>
#include <set>
#include <tuple>
#include <vector>

#include "dpc/normalize.hpp"
#include "dpc/shapes.hpp"
#include "dpc/token_set.hpp"

namespace dpc {

/// One-level tree filter: (parent production, argument index, child
/// production) triples that must not appear as a direct parent-child edge.
/// Argument indices count the parent's non-layout, non-literal nonterminal
/// occurrences.
struct ShallowFilter {
    std::set<std::tuple<ProductionId, int, ProductionId>> entries;

    bool filtered(ProductionId parent, int argIdx, ProductionId child) const {
        return entries.count({parent, argIdx, child}) > 0;
    }

    std::size_t size() const { return entries.size(); }
};

struct DeepConflict {
    enum class Class : std::uint8_t { OperatorStyle, DanglingElse, LongestMatch };
    enum class Side : std::uint8_t { Leftmost, Rightmost };

    Class cls = Class::OperatorStyle;
    ProductionId production = 0; // conflict site: this production...
    int argPosition = 0;         // ...at this argument index
    Side side = Side::Rightmost;
    std::vector<ProductionId> forbidden; // sorted, non-empty

    friend bool operator==(const DeepConflict&, const DeepConflict&) = default;
};

inline const char* to_string(DeepConflict::Class c) {
    switch (c) {
        case DeepConflict::Class::OperatorStyle: return "operator-style";
        case DeepConflict::Class::DanglingElse: return "dangling-else";
        case DeepConflict::Class::LongestMatch: return "longest-match";
    }
    return "?";
}

/// A normalized grammar whose right-hand sides carry contextual symbols
/// (nonterminals annotated with forbidden-production sets), plus the
/// conflicts they came from. Erasing the annotations gives back the
/// original grammar.
struct ContextualGrammar {
    NormalizedGrammar grammar;
    std::vector<DeepConflict> conflicts;
};

/// The watched production set W with its bit assignment.
struct TokenUniverse {
    std::vector<ProductionId> members;          // ascending production id
    std::map<ProductionId, int> bitIndex;

    int size() const { return static_cast<int>(members.size()); }
    bool empty() const { return members.empty(); }

    bool contains(ProductionId p) const { return bitIndex.count(p) > 0; }

    TokenSet bit(ProductionId p) const {
        auto it = bitIndex.find(p);
        return it == bitIndex.end() ? TokenSet() : TokenSet::single(it->second);
    }

    TokenSet mask(const std::vector<ProductionId>& ids) const {
        TokenSet s;
        for (ProductionId p : ids) s |= bit(p);
        return s;
    }
};

namespace detail {

/// True when the production's trailing (or leading) symbol is a
/// nonterminal, i.e. its derivation can extend past that edge.
inline bool sticks_out(const NormalizedGrammar& g, const NProduction& q,
                       bool rightEdge) {
    const NSymbol* s = edge_symbol(g, q, !rightEdge);
    return s && s->kind == NSymbol::Kind::Nt && !g.nt_is_literal(s->nt);
}

inline int arg_index_of_rhs_pos(const NProduction& p, int rhsPos) {
    for (std::size_t k = 0; k < p.argPositions.size(); ++k)
        if (p.argPositions[k] == rhsPos) return static_cast<int>(k);
    return -1;
}

/// Argument index of the first (or last) non-layout symbol, or -1 when that
/// edge is not a nonterminal argument.
inline int edge_arg_index(const NormalizedGrammar& g, const NProduction& p,
                          bool leftEdge) {
    const NSymbol* s = edge_symbol(g, p, leftEdge);
    if (!s || s->kind != NSymbol::Kind::Nt) return -1;
    int rhsPos = static_cast<int>(s - p.rhs.data());
    return arg_index_of_rhs_pos(p, rhsPos);
}

inline bool reaches_through_injections(const NormalizedGrammar& g, int fromNt,
                                       int target) {
    for (int nt : injection_closure(g, fromNt))
        if (nt == target) return true;
    return false;
}

} // namespace detail

/// Shallow priority and associativity conflicts, as goto-filterable
/// parent/child pairs. A priority pair p > q yields an entry only at an
/// edge of p where q's opposite edge is itself a nonterminal: that is the
/// only alignment in which the two productions' derivations can overlap,
/// and filtering elsewhere would remove sentences from the language.
/// Copies produced by contextual rewriting participate through their
/// lineage.
inline ShallowFilter shallow_conflicts(const NormalizedGrammar& g) {
    ShallowFilter out;
    std::vector<const NProduction*> cands;
    for (const NProduction& p : g.prods)
        if (!p.reject && !p.rhs.empty()) cands.push_back(&p);

    for (const NProduction* pp : cands) {
        const NProduction& p = *pp;
        if (p.bracket) continue;
        int leftArg = detail::edge_arg_index(g, p, true);
        int rightArg = detail::edge_arg_index(g, p, false);
        const NProduction& pBase = g.prods[p.lineage];

        for (const NProduction* qq : cands) {
            const NProduction& q = *qq;
            if (q.bracket) continue;
            const NProduction& qBase = g.prods[q.lineage];
            if (pBase.lhs != qBase.lhs) continue;

            bool higher = g.priorities.contains(pBase.id, qBase.id);
            bool assocPair = pBase.id == qBase.id && pBase.assoc != Assoc::None;
            if (!higher && !assocPair) continue;

            auto edgeEntry = [&](bool leftEdge) {
                int argIdx = leftEdge ? leftArg : rightArg;
                if (argIdx < 0) return;
                const NSymbol* edge = detail::edge_symbol(g, p, leftEdge);
                if (!detail::reaches_through_injections(g, edge->nt, q.lhs)) return;
                if (higher && detail::sticks_out(g, q, /*rightEdge=*/leftEdge))
                    out.entries.insert({p.id, argIdx, q.id});
            };
            if (higher) {
                edgeEntry(true);
                edgeEntry(false);
            }
            if (assocPair) {
                // left-assoc forbids self nesting on the right edge; right-assoc
                // on the left; non-assoc on both.
                auto assocEntry = [&](bool leftEdge) {
                    int argIdx = leftEdge ? leftArg : rightArg;
                    if (argIdx < 0) return;
                    const NSymbol* edge = detail::edge_symbol(g, p, leftEdge);
                    if (!detail::reaches_through_injections(g, edge->nt, q.lhs))
                        return;
                    out.entries.insert({p.id, argIdx, q.id});
                };
                if (pBase.assoc == Assoc::Left || pBase.assoc == Assoc::NonAssoc)
                    assocEntry(false);
                if (pBase.assoc == Assoc::Right || pBase.assoc == Assoc::NonAssoc)
                    assocEntry(true);
            }
        }
    }
    return out;
}

/// Deep priority conflict detection: the three classes that cannot be
/// resolved by one-level filtering.
inline std::vector<DeepConflict> detect_deep_conflicts(const NormalizedGrammar& g) {
    std::vector<DeepConflict> out;
    DeepShapes shapes = deep_shapes(g);
    auto rightReach = spine_nts(g, false);

    std::vector<const NProduction*> userProds;
    for (const NProduction& p : g.prods)
        if (p.origin == Origin::User && !p.reject && !p.bracket)
            userProds.push_back(&p);

    // Operator-style: a lower-priority prefix operator may hide on the
    // rightmost spine of a higher-priority operator's left argument (and the
    // postfix mirror). Prefix/postfix here means deep recursion along the
    // spine, so operators that extend through lists or named wrappers (an
    // OCaml-style match) are covered too.
    for (const NProduction* pp : userProds) {
        const NProduction& p = *pp;
        for (const NProduction* qq : userProds) {
            const NProduction& q = *qq;
            if (p.id == q.id || p.lhs != q.lhs) continue;
            if (!g.priorities.contains(p.id, q.id)) continue;
            if (shapes.prefix(q.id) && shapes.deepLeft[p.id]) {
                int arg = detail::edge_arg_index(g, p, true);
                if (arg >= 0)
                    out.push_back({DeepConflict::Class::OperatorStyle, p.id, arg,
                                   DeepConflict::Side::Rightmost, {q.id}});
            }
            if (shapes.postfix(q.id) && shapes.deepRight[p.id]) {
                int arg = detail::edge_arg_index(g, p, false);
                if (arg >= 0)
                    out.push_back({DeepConflict::Class::OperatorStyle, p.id, arg,
                                   DeepConflict::Side::Leftmost, {q.id}});
            }
        }
    }

    // Dangling-else: two same-sort productions sharing a prefix (suffix),
    // where the shorter one ends (starts) in a recursive nonterminal and can
    // absorb material that belongs to the longer one.
    auto strippedRhs = [&](const NProduction& p) {
        std::vector<const NSymbol*> seq;
        for (const NSymbol& s : p.rhs) {
            if (s.kind == NSymbol::Kind::Nt && g.nt_is_layout(s.nt)) continue;
            seq.push_back(&s);
        }
        return seq;
    };
    auto plainEq = [](const NSymbol& a, const NSymbol& b) {
        if (a.kind != b.kind) return false;
        if (a.kind == NSymbol::Kind::Chars) return a.cc == b.cc;
        return a.nt == b.nt;
    };
    for (const NProduction* ss : userProds) {
        const NProduction& s = *ss;
        auto sSeq = strippedRhs(s);
        if (sSeq.empty()) continue;
        for (const NProduction* ll : userProds) {
            const NProduction& l = *ll;
            if (s.id == l.id || s.lhs != l.lhs) continue;
            auto lSeq = strippedRhs(l);
            if (sSeq.size() >= lSeq.size()) continue;

            auto isPrefix = [&] {
                for (std::size_t i = 0; i < sSeq.size(); ++i)
                    if (!plainEq(*sSeq[i], *lSeq[i])) return false;
                return true;
            };
            auto isSuffix = [&] {
                std::size_t off = lSeq.size() - sSeq.size();
                for (std::size_t i = 0; i < sSeq.size(); ++i)
                    if (!plainEq(*sSeq[i], *lSeq[off + i])) return false;
                return true;
            };

            const NSymbol* sLast = sSeq.back();
            if (isPrefix() && sLast->kind == NSymbol::Kind::Nt &&
                detail::reaches_through_injections(g, sLast->nt, s.lhs)) {
                int rhsPos = static_cast<int>(lSeq[sSeq.size() - 1] - l.rhs.data());
                int arg = detail::arg_index_of_rhs_pos(l, rhsPos);
                if (arg >= 0)
                    out.push_back({DeepConflict::Class::DanglingElse, l.id, arg,
                                   DeepConflict::Side::Rightmost, {s.id}});
            }
            const NSymbol* sFirst = sSeq.front();
            if (isSuffix() && sFirst->kind == NSymbol::Kind::Nt &&
                detail::reaches_through_injections(g, sFirst->nt, s.lhs)) {
                std::size_t off = lSeq.size() - sSeq.size();
                int rhsPos = static_cast<int>(lSeq[off] - l.rhs.data());
                int arg = detail::arg_index_of_rhs_pos(l, rhsPos);
                if (arg >= 0)
                    out.push_back({DeepConflict::Class::DanglingElse, l.id, arg,
                                   DeepConflict::Side::Leftmost, {s.id}});
            }
        }
    }

    // Longest-match: a non-final element of a list must not end in a
    // construct that itself ends in such a list, or it would have absorbed
    // the following elements.
    struct ListGroup {
        ProductionId consProd = kNoProduction;
        std::vector<ProductionId> enders;
        bool reachable = false;
    };
    std::map<int, ListGroup> groups; // keyed by element nonterminal
    auto plusOf = [&](int listNt) -> int {
        if (g.nts[listNt].kind == NtInfo::Kind::List) return listNt;
        for (ProductionId pid : g.ntProds[listNt])
            if (g.prods[pid].origin == Origin::StarInject)
                return g.prods[pid].rhs[0].nt;
        return -1;
    };
    auto listElement = [&](int listNt) -> int {
        int plus = plusOf(listNt);
        if (plus < 0) return -1;
        for (ProductionId pid : g.ntProds[plus]) {
            const NProduction& lp = g.prods[pid];
            if (lp.origin == Origin::ListSingle && !lp.rhs.empty() &&
                lp.rhs[0].kind == NSymbol::Kind::Nt)
                return lp.rhs[0].nt;
        }
        return -1;
    };
    auto plusConsOf = [&](int listNt) -> ProductionId {
        int plus = plusOf(listNt);
        if (plus < 0) return kNoProduction;
        for (ProductionId pid : g.ntProds[plus])
            if (g.prods[pid].origin == Origin::ListCons) return pid;
        return kNoProduction;
    };
    for (const NProduction* mm : userProds) {
        const NProduction& m = *mm;
        const NSymbol* last = detail::edge_symbol(g, m, false);
        if (!last || last->kind != NSymbol::Kind::Nt) continue;
        NtInfo::Kind k = g.nts[last->nt].kind;
        if (k != NtInfo::Kind::List && k != NtInfo::Kind::Star) continue;
        int element = listElement(last->nt);
        if (element < 0) continue;
        ListGroup& grp = groups[element];
        if (grp.consProd == kNoProduction) grp.consProd = plusConsOf(last->nt);
        grp.enders.push_back(m.id);
        if (rightReach[element][m.lhs]) grp.reachable = true;
    }
    for (auto& [element, grp] : groups) {
        if (!grp.reachable || grp.consProd == kNoProduction) continue;
        std::sort(grp.enders.begin(), grp.enders.end());
        grp.enders.erase(std::unique(grp.enders.begin(), grp.enders.end()),
                         grp.enders.end());
        out.push_back({DeepConflict::Class::LongestMatch, grp.consProd, 0,
                       DeepConflict::Side::Rightmost, grp.enders});
    }

    // A conflict forbidding its own site would contradict the shallow
    // associativity filter; drop it.
    std::vector<DeepConflict> kept;
    for (DeepConflict& c : out) {
        std::sort(c.forbidden.begin(), c.forbidden.end());
        c.forbidden.erase(std::unique(c.forbidden.begin(), c.forbidden.end()),
                          c.forbidden.end());
        if (c.forbidden.size() == 1 && c.forbidden[0] == c.production) continue;
        kept.push_back(std::move(c));
    }
    std::sort(kept.begin(), kept.end(), [](const DeepConflict& a, const DeepConflict& b) {
        return std::tuple(a.cls, a.production, a.argPosition) <
               std::tuple(b.cls, b.production, b.argPosition);
    });
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    return kept;
}

/// Annotates the conflict sites with contextual symbols. Conflicts sharing
/// a (site, side) union their forbidden sets.
inline ContextualGrammar derive_contextual_grammar(const NormalizedGrammar& g,
                                                   std::vector<DeepConflict> conflicts) {
    ContextualGrammar cg;
    cg.grammar = g;
    cg.conflicts = std::move(conflicts);
    for (const DeepConflict& c : cg.conflicts) {
        NProduction& p = cg.grammar.prods[c.production];
        int rhsPos = p.argPositions.at(c.argPosition);
        NSymbol& s = p.rhs[rhsPos];
        std::vector<ProductionId>& dst =
            c.side == DeepConflict::Side::Leftmost ? s.lm : s.rm;
        dst.insert(dst.end(), c.forbidden.begin(), c.forbidden.end());
        std::sort(dst.begin(), dst.end());
        dst.erase(std::unique(dst.begin(), dst.end()), dst.end());
    }
    return cg;
}

/// Strips every contextual annotation.
inline NormalizedGrammar erase_contextual(const ContextualGrammar& cg) {
    NormalizedGrammar g = cg.grammar;
    for (NProduction& p : g.prods)
        for (NSymbol& s : p.rhs) {
            s.lm.clear();
            s.rm.clear();
        }
    return g;
}

inline TokenUniverse token_universe(const ContextualGrammar& cg) {
    std::set<ProductionId> members;
    for (const NProduction& p : cg.grammar.prods)
        for (const NSymbol& s : p.rhs) {
            members.insert(s.lm.begin(), s.lm.end());
            members.insert(s.rm.begin(), s.rm.end());
        }
    TokenUniverse u;
    for (ProductionId pid : members) {
        u.bitIndex[pid] = static_cast<int>(u.members.size());
        u.members.push_back(pid);
    }
    if (u.size() > TokenSet::kMaxBits)
        throw GrammarError("token universe exceeds " +
                           std::to_string(TokenSet::kMaxBits) + " watched productions");
    return u;
}

/// One-call analysis pipeline: detect conflicts and annotate the grammar.
inline ContextualGrammar analyze_grammar(const NormalizedGrammar& g) {
    return derive_contextual_grammar(g, detect_deep_conflicts(g));
}

} // namespace dpc

#endif // DPC_CONFLICTS_HPP
