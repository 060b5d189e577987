#ifndef DPC_TESTS_ENUMERATOR_HPP
#define DPC_TESTS_ENUMERATOR_HPP

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpc/conflicts.hpp"
#include "dpc/normalize.hpp"

// Test-side oracle machinery, independent of the parse table and engine:
// a token-level view of a normalized grammar, an exhaustive bottom-up
// enumerator of derivation trees, sentence enumeration up to a lexeme
// budget, and the shallow/deep tree predicates from the disambiguation
// semantics.
namespace dpc::tests {

struct TokGrammar {
    struct Sym {
        bool terminal = false;
        int idx = 0;      // terminal id or tok-nonterminal id
        bool isArg = false; // counts as an argument position of the production
    };
    struct TokProd {
        ProductionId origId = 0;
        int lhs = 0;
        std::vector<Sym> rhs;
    };
    struct Terminal {
        std::string render; // concrete lexeme from the reduced lexicon
        bool lexical = false;
    };

    std::vector<Terminal> terminals;
    std::vector<std::string> ntNames;
    std::vector<TokProd> prods;
    std::vector<std::vector<int>> byNt; // tok-nt -> tok-prod indices
    int startNt = -1;

    const NormalizedGrammar* source = nullptr;
};

/// Maps a normalized grammar to lexeme-level tokens: literal sorts become
/// terminal tokens, lexical sorts become single representative lexemes
/// (the reduced lexicon), and layout disappears.
inline TokGrammar tokenize_grammar(const NormalizedGrammar& g,
                                   const std::map<std::string, std::string>& lexicon) {
    TokGrammar tg;
    tg.source = &g;
    std::map<int, int> ntMap;    // grammar nt -> tok nt
    std::map<int, int> termMap;  // grammar nt -> terminal id

    auto isTokNt = [&](int nt) {
        const NtInfo& info = g.nts[nt];
        if (info.layout) return false;
        switch (info.kind) {
            case NtInfo::Kind::Cf:
            case NtInfo::Kind::List:
            case NtInfo::Kind::Star:
            case NtInfo::Kind::Opt:
                return true;
            default:
                return false;
        }
    };
    auto tokNt = [&](int nt) {
        auto it = ntMap.find(nt);
        if (it != ntMap.end()) return it->second;
        int id = static_cast<int>(tg.ntNames.size());
        tg.ntNames.push_back(g.nt_name(nt));
        tg.byNt.push_back({});
        ntMap.emplace(nt, id);
        return id;
    };
    auto terminal = [&](int nt) {
        auto it = termMap.find(nt);
        if (it != termMap.end()) return it->second;
        TokGrammar::Terminal t;
        const NtInfo& info = g.nts[nt];
        if (info.kind == NtInfo::Kind::LiteralInternal) {
            t.render = info.literalSpelling;
        } else {
            auto lex = lexicon.find(info.name);
            if (lex == lexicon.end())
                throw std::runtime_error("no lexicon entry for sort " + info.name);
            t.render = lex->second;
            t.lexical = true;
        }
        int id = static_cast<int>(tg.terminals.size());
        tg.terminals.push_back(std::move(t));
        termMap.emplace(nt, id);
        return id;
    };

    // Breadth-first from the start sort; lexical internals stay behind
    // their terminal tokens and are never traversed.
    std::vector<int> work{g.startNt};
    std::set<int> visited{g.startNt};
    tg.startNt = tokNt(g.startNt);
    while (!work.empty()) {
        int nt = work.back();
        work.pop_back();
        for (ProductionId pid : g.ntProds[nt]) {
            const NProduction& p = g.prods[pid];
            TokGrammar::TokProd tp;
            tp.origId = p.id;
            tp.lhs = tokNt(p.lhs);
            for (std::size_t i = 0; i < p.rhs.size(); ++i) {
                const NSymbol& s = p.rhs[i];
                if (s.kind == NSymbol::Kind::Chars)
                    throw std::runtime_error(
                        "token oracle cannot handle raw character classes in "
                        "context-free rules");
                if (g.nt_is_layout(s.nt)) continue;
                TokGrammar::Sym sym;
                sym.isArg = std::find(p.argPositions.begin(), p.argPositions.end(),
                                      static_cast<int>(i)) != p.argPositions.end();
                if (isTokNt(s.nt)) {
                    sym.terminal = false;
                    sym.idx = tokNt(s.nt);
                    if (visited.insert(s.nt).second) work.push_back(s.nt);
                } else {
                    sym.terminal = true;
                    sym.idx = terminal(s.nt);
                }
                tp.rhs.push_back(sym);
            }
            int prodIdx = static_cast<int>(tg.prods.size());
            int lhs = tp.lhs;
            tg.prods.push_back(std::move(tp));
            tg.byNt[lhs].push_back(prodIdx);
        }
    }
    return tg;
}

// ---- derivation trees -----------------------------------------------------

struct OTree;
using OTreePtr = std::shared_ptr<const OTree>;

struct OTree {
    bool leaf = false;
    int terminal = 0;       // leaf
    int prodIdx = -1;       // internal: TokGrammar production index
    std::vector<OTreePtr> kids;
    int from = 0, to = 0;   // token span
};

inline std::string otree_key(const OTreePtr& t) {
    if (t->leaf) return "t" + std::to_string(t->terminal);
    std::string s = "(" + std::to_string(t->prodIdx);
    for (const OTreePtr& k : t->kids) s += " " + otree_key(k);
    return s + ")";
}

/// All derivation trees of every (nonterminal, span) cell, bottom-up by
/// span width. Intended for short sentences; throws when a cell explodes.
class ExhaustiveParser {
public:
    ExhaustiveParser(const TokGrammar& tg, std::vector<int> tokens,
                     std::size_t cellCap = 20000)
        : tg_(tg), tokens_(std::move(tokens)), cap_(cellCap) {
        std::size_t n = tokens_.size();
        cells_.assign(tg_.ntNames.size(),
                      std::vector<std::vector<std::vector<OTreePtr>>>(
                          n + 1, std::vector<std::vector<OTreePtr>>(n + 1)));
        for (std::size_t w = 0; w <= n; ++w)
            for (std::size_t i = 0; i + w <= n; ++i) fill_cells(i, i + w);
    }

    const std::vector<OTreePtr>& trees(int nt, int from, int to) const {
        return cells_[nt][from][to];
    }

    std::vector<OTreePtr> parse_all() const {
        return cells_[tg_.startNt][0][tokens_.size()];
    }

private:
    void fill_cells(std::size_t from, std::size_t to) {
        // Fixpoint per span: same-width results can feed unit-style rules.
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t p = 0; p < tg_.prods.size(); ++p) {
                const TokGrammar::TokProd& tp = tg_.prods[p];
                std::vector<OTreePtr> kids;
                changed |= try_prod(static_cast<int>(p), tp, 0, from, from, to, kids);
            }
        }
    }

    bool try_prod(int prodIdx, const TokGrammar::TokProd& tp, std::size_t rhsPos,
                  std::size_t start, std::size_t at, std::size_t to,
                  std::vector<OTreePtr>& kids) {
        if (rhsPos == tp.rhs.size()) {
            if (at != to) return false;
            auto tree = std::make_shared<OTree>();
            tree->prodIdx = prodIdx;
            tree->kids = kids;
            tree->from = static_cast<int>(start);
            tree->to = static_cast<int>(to);
            return insert(tp.lhs, tree);
        }
        const TokGrammar::Sym& sym = tp.rhs[rhsPos];
        bool changed = false;
        if (sym.terminal) {
            if (at < to && tokens_[at] == sym.idx) {
                auto leaf = std::make_shared<OTree>();
                leaf->leaf = true;
                leaf->terminal = sym.idx;
                leaf->from = static_cast<int>(at);
                leaf->to = static_cast<int>(at + 1);
                kids.push_back(leaf);
                changed |= try_prod(prodIdx, tp, rhsPos + 1, start, at + 1, to, kids);
                kids.pop_back();
            }
            return changed;
        }
        for (std::size_t mid = at; mid <= to; ++mid) {
            const std::vector<OTreePtr>& sub = cells_[sym.idx][at][mid];
            // Index-based loop: the fixpoint may grow the cell we read from.
            for (std::size_t k = 0; k < sub.size(); ++k) {
                kids.push_back(sub[k]);
                changed |= try_prod(prodIdx, tp, rhsPos + 1, start, mid, to, kids);
                kids.pop_back();
            }
        }
        return changed;
    }

    bool insert(int nt, const OTreePtr& tree) {
        std::vector<OTreePtr>& cell = cells_[nt][tree->from][tree->to];
        std::string key = otree_key(tree);
        auto& keys = cellKeys_[{nt, {tree->from, tree->to}}];
        if (!keys.insert(key).second) return false;
        if (cell.size() >= cap_)
            throw std::runtime_error("oracle cell exploded");
        cell.push_back(tree);
        return true;
    }

    const TokGrammar& tg_;
    std::vector<int> tokens_;
    std::size_t cap_;
    // cells_[nt][from][to]
    std::vector<std::vector<std::vector<std::vector<OTreePtr>>>> cells_;
    std::map<std::pair<int, std::pair<int, int>>, std::set<std::string>> cellKeys_;
};

// ---- sentence enumeration ---------------------------------------------------

/// All token sequences of exactly the given length derivable from a
/// nonterminal. Requires a grammar without nullable context-free symbols.
class SentenceEnumerator {
public:
    explicit SentenceEnumerator(const TokGrammar& tg) : tg_(tg) {
        minLen_.assign(tg_.ntNames.size(), 1 << 20);
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& tp : tg_.prods) {
                int sum = 0;
                for (const auto& s : tp.rhs)
                    sum += s.terminal ? 1 : minLen_[s.idx];
                if (sum < minLen_[tp.lhs]) {
                    minLen_[tp.lhs] = sum;
                    changed = true;
                }
            }
        }
    }

    std::set<std::vector<int>> sentences_up_to(int maxLen) {
        std::set<std::vector<int>> out;
        for (int len = minLen_[tg_.startNt]; len <= maxLen; ++len)
            for (auto& s : of_length(tg_.startNt, len)) out.insert(s);
        return out;
    }

private:
    const std::set<std::vector<int>>& of_length(int nt, int len) {
        auto key = std::make_pair(nt, len);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        if (!inProgress_.insert(key).second)
            throw std::runtime_error("sentence enumeration hit a derivation cycle");
        std::set<std::vector<int>> result;
        if (len >= minLen_[nt]) {
            for (int pi : tg_.byNt[nt]) {
                const TokGrammar::TokProd& tp = tg_.prods[pi];
                std::vector<int> prefix;
                extend(tp, 0, len, prefix, result);
            }
        }
        inProgress_.erase(key);
        return memo_.emplace(key, std::move(result)).first->second;
    }

    void extend(const TokGrammar::TokProd& tp, std::size_t rhsPos, int remaining,
                std::vector<int>& prefix, std::set<std::vector<int>>& out) {
        if (rhsPos == tp.rhs.size()) {
            if (remaining == 0) out.insert(prefix);
            return;
        }
        int minRest = 0;
        for (std::size_t k = rhsPos + 1; k < tp.rhs.size(); ++k)
            minRest += tp.rhs[k].terminal ? 1 : minLen_[tp.rhs[k].idx];

        const TokGrammar::Sym& sym = tp.rhs[rhsPos];
        if (sym.terminal) {
            if (remaining - 1 < minRest) return;
            prefix.push_back(sym.idx);
            extend(tp, rhsPos + 1, remaining - 1, prefix, out);
            prefix.pop_back();
            return;
        }
        for (int take = minLen_[sym.idx]; take <= remaining - minRest; ++take) {
            for (const std::vector<int>& sub : of_length(sym.idx, take)) {
                std::size_t mark = prefix.size();
                prefix.insert(prefix.end(), sub.begin(), sub.end());
                extend(tp, rhsPos + 1, remaining - take, prefix, out);
                prefix.resize(mark);
            }
        }
    }

    const TokGrammar& tg_;
    std::vector<int> minLen_;
    std::map<std::pair<int, int>, std::set<std::vector<int>>> memo_;
    std::set<std::pair<int, int>> inProgress_;
};

inline std::string render_sentence(const TokGrammar& tg, const std::vector<int>& toks) {
    std::string out;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (i) out += " ";
        out += tg.terminals[toks[i]].render;
    }
    return out;
}

// ---- tree predicates --------------------------------------------------------

/// Direct parent-child filtering: true when some node has a forbidden child
/// production at a filtered argument position.
inline bool violates_shallow(const TokGrammar& tg, const OTreePtr& tree,
                             const ShallowFilter& filter) {
    if (tree->leaf) return false;
    const TokGrammar::TokProd& tp = tg.prods[tree->prodIdx];
    int argIdx = 0;
    for (std::size_t i = 0; i < tp.rhs.size(); ++i) {
        const OTreePtr& child = tree->kids[i];
        if (tp.rhs[i].isArg) {
            if (!child->leaf &&
                filter.filtered(tp.origId, argIdx,
                                tg.prods[child->prodIdx].origId))
                return true;
            ++argIdx;
        }
        if (violates_shallow(tg, child, filter)) return true;
    }
    return false;
}

/// Production ids on the leftmost (or rightmost) non-empty-yield spine,
/// including the root's own production.
inline void spine_productions(const TokGrammar& tg, const OTreePtr& tree,
                              bool leftmost, std::set<ProductionId>& out) {
    if (tree->leaf) return;
    out.insert(tg.prods[tree->prodIdx].origId);
    const std::vector<OTreePtr>& kids = tree->kids;
    if (leftmost) {
        for (const OTreePtr& k : kids)
            if (k->to > k->from) {
                spine_productions(tg, k, leftmost, out);
                return;
            }
    } else {
        for (auto it = kids.rbegin(); it != kids.rend(); ++it)
            if ((*it)->to > (*it)->from) {
                spine_productions(tg, *it, leftmost, out);
                return;
            }
    }
}

/// Deep-spine predicate: true when some node places a child whose
/// leftmost/rightmost spine intersects a conflict's forbidden set at the
/// conflict's argument position.
inline bool violates_deep(const TokGrammar& tg, const OTreePtr& tree,
                          const std::vector<DeepConflict>& conflicts) {
    if (tree->leaf) return false;
    const TokGrammar::TokProd& tp = tg.prods[tree->prodIdx];
    int argIdx = 0;
    for (std::size_t i = 0; i < tp.rhs.size(); ++i) {
        const OTreePtr& child = tree->kids[i];
        if (tp.rhs[i].isArg) {
            for (const DeepConflict& c : conflicts) {
                if (c.production != tp.origId || c.argPosition != argIdx) continue;
                std::set<ProductionId> spine;
                spine_productions(tg, child,
                                  c.side == DeepConflict::Side::Leftmost, spine);
                for (ProductionId f : c.forbidden)
                    if (spine.count(f)) return true;
            }
            ++argIdx;
        }
        if (violates_deep(tg, child, conflicts)) return true;
    }
    return false;
}

// ---- independent implode ----------------------------------------------------

/// Token-level implode, mirroring the engine's semantics but computed from
/// the oracle trees: constructor nodes, collapsed injections/brackets,
/// flattened lists, dropped literals and optionals.
inline std::string otree_sexpr(const TokGrammar& tg, const OTreePtr& tree);

inline void otree_list_elems(const TokGrammar& tg, const OTreePtr& tree,
                             std::vector<std::string>& elems) {
    const NormalizedGrammar& g = *tg.source;
    const NProduction& p = g.prods[tg.prods[tree->prodIdx].origId];
    const TokGrammar::TokProd& tp = tg.prods[tree->prodIdx];
    std::vector<const OTreePtr*> args;
    for (std::size_t i = 0; i < tp.rhs.size(); ++i)
        if (tp.rhs[i].isArg) args.push_back(&tree->kids[i]);
    switch (p.origin) {
        case Origin::ListCons:
            otree_list_elems(tg, *args[0], elems);
            elems.push_back(otree_sexpr(tg, *args[1]));
            return;
        case Origin::ListSingle:
            elems.push_back(otree_sexpr(tg, *args[0]));
            return;
        case Origin::StarInject:
            otree_list_elems(tg, *args[0], elems);
            return;
        case Origin::StarEmpty:
            return;
        default:
            elems.push_back(otree_sexpr(tg, tree));
            return;
    }
}

inline std::string otree_sexpr(const TokGrammar& tg, const OTreePtr& tree) {
    if (tree->leaf) {
        std::string out = "\"";
        for (char c : tg.terminals[tree->terminal].render) {
            if (c == '"' || c == '\\') out.push_back('\\');
            out.push_back(c);
        }
        return out + "\"";
    }
    const NormalizedGrammar& g = *tg.source;
    const TokGrammar::TokProd& tp = tg.prods[tree->prodIdx];
    const NProduction& p = g.prods[tp.origId];

    std::vector<const OTreePtr*> args;
    std::vector<bool> lexArg;
    for (std::size_t i = 0; i < tp.rhs.size(); ++i)
        if (tp.rhs[i].isArg) {
            args.push_back(&tree->kids[i]);
            lexArg.push_back(tp.rhs[i].terminal);
        }

    switch (p.origin) {
        case Origin::ListCons:
        case Origin::ListSingle:
        case Origin::StarInject:
        case Origin::StarEmpty: {
            std::vector<std::string> elems;
            otree_list_elems(tg, tree, elems);
            std::string out = "[";
            for (std::size_t i = 0; i < elems.size(); ++i) {
                if (i) out += " ";
                out += elems[i];
            }
            return out + "]";
        }
        case Origin::OptEmpty:
            return ""; // dropped by parent
        case Origin::OptInject:
            return otree_sexpr(tg, *args[0]);
        default:
            break;
    }

    if (!p.ctor.empty()) {
        std::string out = "(" + p.ctor;
        for (std::size_t i = 0; i < args.size(); ++i) {
            std::string kid = otree_sexpr(tg, *args[i]);
            if (!kid.empty()) out += " " + kid;
        }
        return out + ")";
    }
    if (args.size() == 1) return otree_sexpr(tg, *args[0]);
    return "()";
}

} // namespace dpc::tests

#endif // DPC_TESTS_ENUMERATOR_HPP
