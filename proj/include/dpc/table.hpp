#ifndef DPC_TABLE_HPP
#define DPC_TABLE_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dpc/conflicts.hpp"
#include "dpc/normalize.hpp"
#include "dpc/token_set.hpp"

namespace dpc {

/// LR item: dot position inside a production's right-hand side.
struct Item {
    ProductionId production = 0;
    int dot = 0;

    friend auto operator<=>(const Item&, const Item&) = default;
};

struct Action {
    enum class Kind : std::uint8_t { Shift, Reduce, Accept };
    Kind kind = Kind::Shift;
    std::uint32_t target = 0; // state for Shift, production for Reduce

    friend auto operator<=>(const Action&, const Action&) = default;
};

/// Per-production metadata carried in the table so parsing, imploding and
/// filtering need no separate grammar file.
struct TableProduction {
    int sort = -1;
    std::string ctor;
    std::uint32_t arity = 0;
    Origin origin = Origin::User;
    ProductionId lineage = 0;
    Assoc assoc = Assoc::None;
    bool bracket = false;
    bool reject = false;
    bool injection = false;
    std::vector<int> argPositions;
    CharClass followRestriction; // empty = unrestricted

    friend bool operator==(const TableProduction&, const TableProduction&) = default;
};

struct TableSort {
    std::string name;
    NtInfo::Kind kind = NtInfo::Kind::Cf;
    bool layout = false;
    std::vector<std::string> rejectSpellings;

    friend bool operator==(const TableSort&, const TableSort&) = default;
};

struct TableState {
    std::vector<Item> kernel;                      // for diagnostics
    std::vector<std::vector<Action>> actions;      // by alphabet interval
    std::map<ProductionId, std::uint32_t> gotos;   // production-keyed

    friend bool operator==(const TableState&, const TableState&) = default;
};

struct PositionConstraint {
    ProductionId production = 0;
    int rhsPosition = 0;
    TokenSet lmMask;
    TokenSet rmMask;

    friend bool operator==(const PositionConstraint&,
                           const PositionConstraint&) = default;
};

struct ParseTable {
    static constexpr int kFormatVersion = 1;

    std::string grammarHash;
    std::vector<CharClass::Range> alphabet; // disjoint, ascending
    std::vector<TableSort> sorts;
    std::vector<TableProduction> productions;
    std::vector<TableState> states;
    std::uint32_t startState = 0;
    ProductionId augmentedProd = 0;

    // Data-dependent metadata (empty in plain mode).
    std::vector<std::string> universeNames;       // Sort.Ctor per bit
    std::vector<ProductionId> universeMembers;    // production per bit, ascending
    std::vector<PositionConstraint> constraintMeta;
    std::vector<ProductionId> rejectSet;

    // Caches rebuilt after construction / deserialization.
    std::vector<TokenSet> prodSelfBit;                       // by production
    std::vector<std::vector<PositionConstraint>> constraintsByProd;

    int interval_of(std::int32_t cp) const {
        auto it = std::upper_bound(
            alphabet.begin(), alphabet.end(), cp,
            [](std::int32_t v, const CharClass::Range& r) { return v < r.lo; });
        if (it == alphabet.begin()) return -1;
        --it;
        if (cp > it->hi) return -1;
        return static_cast<int>(it - alphabet.begin());
    }

    const std::vector<Action>& actions_at(std::uint32_t state, std::int32_t cp) const {
        static const std::vector<Action> kNone;
        int iv = interval_of(cp);
        if (iv < 0) return kNone;
        return states[state].actions[iv];
    }

    std::string prod_display(ProductionId pid) const {
        const TableProduction& p = productions[pid];
        std::string s = sorts[p.sort].name;
        if (!p.ctor.empty()) s += "." + p.ctor;
        return s;
    }

    bool watched() const { return !universeMembers.empty(); }

    void rebuild_caches() {
        prodSelfBit.assign(productions.size(), TokenSet());
        for (std::size_t bit = 0; bit < universeMembers.size(); ++bit)
            prodSelfBit[universeMembers[bit]] =
                TokenSet::single(static_cast<int>(bit));
        constraintsByProd.assign(productions.size(), {});
        for (const PositionConstraint& c : constraintMeta)
            constraintsByProd[c.production].push_back(c);
    }
};

/// 64-bit FNV-1a, used for grammar hashes and table checksums.
inline std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace detail {

/// Interval sets as sorted index vectors (the alphabets here are tiny).
using IntervalSet = std::vector<int>;

inline bool iset_add(IntervalSet& s, int v) {
    auto it = std::lower_bound(s.begin(), s.end(), v);
    if (it != s.end() && *it == v) return false;
    s.insert(it, v);
    return true;
}

inline bool iset_union(IntervalSet& into, const IntervalSet& from) {
    bool changed = false;
    for (int v : from) changed |= iset_add(into, v);
    return changed;
}

class TableBuilder {
public:
    TableBuilder(const NormalizedGrammar& g, const ShallowFilter& filter,
                 const ContextualGrammar* cg)
        : g_(g), filter_(filter), cg_(cg) {}

    ParseTable build() {
        reject_problematic_recursion();
        build_alphabet();
        compute_nullable_first_follow();
        build_states();
        fill_metadata();
        out_.rebuild_caches();
        return std::move(out_);
    }

private:
    // ---- static structure checks -------------------------------------

    void reject_problematic_recursion() {
        std::size_t n = g_.nts.size();
        std::vector<char> nullable = nullable_nts();

        // Left-corner graph; an edge is "hidden" when a non-empty nullable
        // prefix precedes it. Hidden left recursion and derivation cycles
        // need epsilon-GLR machinery that is out of scope, so reject both.
        struct Edge {
            int to;
            bool hidden;
        };
        std::vector<std::vector<Edge>> lc(n);
        std::vector<std::vector<int>> chain(n); // A =>+ B over same span
        for (const NProduction& p : g_.prods) {
            if (p.reject) continue;
            bool prefixNullable = true;
            bool sawSymbol = false;
            for (const NSymbol& s : p.rhs) {
                if (!prefixNullable) break;
                if (s.kind == NSymbol::Kind::Chars) {
                    prefixNullable = false;
                    break;
                }
                lc[p.lhs].push_back({s.nt, sawSymbol});
                sawSymbol = true;
                prefixNullable = nullable[s.nt];
            }
            // chain edge: exactly one non-nullable-free symbol
            int ntCount = 0, target = -1;
            bool chainable = true;
            for (const NSymbol& s : p.rhs) {
                if (s.kind == NSymbol::Kind::Chars) {
                    chainable = false;
                    break;
                }
                if (!nullable[s.nt]) {
                    ++ntCount;
                    target = s.nt;
                }
            }
            if (chainable) {
                if (ntCount == 1) chain[p.lhs].push_back(target);
                if (ntCount == 0 && !p.rhs.empty()) {
                    // every symbol nullable: conservatively treat each as a
                    // potential cycle edge
                    for (const NSymbol& s : p.rhs) chain[p.lhs].push_back(s.nt);
                }
            }
        }

        auto findCycleWithHidden = [&]() -> std::optional<std::string> {
            // reachability closure over lc
            std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
            for (std::size_t a = 0; a < n; ++a)
                for (const Edge& e : lc[a]) reach[a][e.to] = 1;
            bool changed = true;
            while (changed) {
                changed = false;
                for (std::size_t a = 0; a < n; ++a)
                    for (std::size_t b = 0; b < n; ++b)
                        if (reach[a][b])
                            for (std::size_t c = 0; c < n; ++c)
                                if (reach[b][c] && !reach[a][c]) {
                                    reach[a][c] = 1;
                                    changed = true;
                                }
            }
            for (std::size_t a = 0; a < n; ++a)
                for (const Edge& e : lc[a])
                    if (e.hidden && reach[e.to][a])
                        return "hidden left recursion through nullable symbols at sort '" +
                               g_.nt_name(static_cast<int>(a)) + "'";
            return std::nullopt;
        };
        if (auto err = findCycleWithHidden()) throw GrammarError(*err);

        // derivation cycles (A =>+ A with identical yield)
        {
            std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
            for (std::size_t a = 0; a < n; ++a)
                for (int b : chain[a]) reach[a][b] = 1;
            bool changed = true;
            while (changed) {
                changed = false;
                for (std::size_t a = 0; a < n; ++a)
                    for (std::size_t b = 0; b < n; ++b)
                        if (reach[a][b])
                            for (std::size_t c = 0; c < n; ++c)
                                if (reach[b][c] && !reach[a][c]) {
                                    reach[a][c] = 1;
                                    changed = true;
                                }
            }
            for (std::size_t a = 0; a < n; ++a)
                if (reach[a][a])
                    throw GrammarError("cyclic derivation at sort '" +
                                       g_.nt_name(static_cast<int>(a)) + "'");
        }
    }

    std::vector<char> nullable_nts() const {
        std::vector<char> nullable(g_.nts.size(), 0);
        bool changed = true;
        while (changed) {
            changed = false;
            for (const NProduction& p : g_.prods) {
                if (p.reject || nullable[p.lhs]) continue;
                bool all = true;
                for (const NSymbol& s : p.rhs) {
                    if (s.kind == NSymbol::Kind::Chars || !nullable[s.nt]) {
                        all = false;
                        break;
                    }
                }
                if (all) {
                    nullable[p.lhs] = 1;
                    changed = true;
                }
            }
        }
        return nullable;
    }

    // ---- alphabet -----------------------------------------------------

    void build_alphabet() {
        std::set<std::int32_t> bounds; // interval starts
        std::set<std::int32_t> ends;   // exclusive ends
        auto addClass = [&](const CharClass& cc) {
            for (const auto& r : cc.ranges()) {
                bounds.insert(r.lo);
                ends.insert(r.hi + 1);
            }
        };
        for (const NProduction& p : g_.prods)
            for (const NSymbol& s : p.rhs)
                if (s.kind == NSymbol::Kind::Chars) addClass(s.cc);
        for (const auto& [nt, cc] : g_.followRestrictionByNt) addClass(cc);
        addClass(CharClass::eof());

        std::set<std::int32_t> cuts = bounds;
        cuts.insert(ends.begin(), ends.end());
        std::vector<std::int32_t> cutsVec(cuts.begin(), cuts.end());
        for (std::size_t i = 0; i + 1 < cutsVec.size(); ++i) {
            std::int32_t lo = cutsVec[i];
            std::int32_t hi = cutsVec[i + 1] - 1;
            // keep only intervals covered by some class
            bool covered = false;
            for (const NProduction& p : g_.prods) {
                for (const NSymbol& s : p.rhs)
                    if (s.kind == NSymbol::Kind::Chars && s.cc.contains(lo)) {
                        covered = true;
                        break;
                    }
                if (covered) break;
            }
            if (!covered) {
                for (const auto& [nt, cc] : g_.followRestrictionByNt)
                    if (cc.contains(lo)) covered = true;
                if (lo == kEofCodepoint) covered = true;
            }
            if (covered) out_.alphabet.push_back({lo, hi});
        }
    }

    IntervalSet intervals_of(const CharClass& cc) const {
        IntervalSet s;
        for (std::size_t i = 0; i < out_.alphabet.size(); ++i)
            if (cc.contains(out_.alphabet[i].lo)) s.push_back(static_cast<int>(i));
        return s;
    }

    // ---- FIRST / FOLLOW ------------------------------------------------

    void compute_nullable_first_follow() {
        nullable_ = nullable_nts();
        std::size_t n = g_.nts.size();
        first_.assign(n, {});
        follow_.assign(n, {});

        bool changed = true;
        while (changed) {
            changed = false;
            for (const NProduction& p : g_.prods) {
                if (p.reject) continue;
                for (const NSymbol& s : p.rhs) {
                    if (s.kind == NSymbol::Kind::Chars) {
                        changed |= iset_union(first_[p.lhs], intervals_of(s.cc));
                        break;
                    }
                    changed |= iset_union(first_[p.lhs], first_[s.nt]);
                    if (!nullable_[s.nt]) break;
                }
            }
        }

        changed = true;
        while (changed) {
            changed = false;
            for (const NProduction& p : g_.prods) {
                if (p.reject) continue;
                for (std::size_t i = 0; i < p.rhs.size(); ++i) {
                    const NSymbol& s = p.rhs[i];
                    if (s.kind != NSymbol::Kind::Nt) continue;
                    bool tailNullable = true;
                    for (std::size_t j = i + 1; j < p.rhs.size() && tailNullable; ++j) {
                        const NSymbol& t = p.rhs[j];
                        if (t.kind == NSymbol::Kind::Chars) {
                            changed |= iset_union(follow_[s.nt], intervals_of(t.cc));
                            tailNullable = false;
                        } else {
                            changed |= iset_union(follow_[s.nt], first_[t.nt]);
                            tailNullable = nullable_[t.nt];
                        }
                    }
                    if (tailNullable)
                        changed |= iset_union(follow_[s.nt], follow_[p.lhs]);
                }
            }
        }
    }

    // ---- automaton ------------------------------------------------------

    int arg_index(const NProduction& p, int rhsPos) const {
        for (std::size_t k = 0; k < p.argPositions.size(); ++k)
            if (p.argPositions[k] == rhsPos) return static_cast<int>(k);
        return -1;
    }

    std::vector<Item> closure(std::vector<Item> items) const {
        std::set<Item> seen(items.begin(), items.end());
        std::vector<Item> work = items;
        while (!work.empty()) {
            Item it = work.back();
            work.pop_back();
            const NProduction& p = g_.prods[it.production];
            if (it.dot >= static_cast<int>(p.rhs.size())) continue;
            const NSymbol& s = p.rhs[it.dot];
            if (s.kind != NSymbol::Kind::Nt) continue;
            int argIdx = arg_index(p, it.dot);
            for (ProductionId q : g_.ntProds[s.nt]) {
                if (argIdx >= 0 && filter_.filtered(p.id, argIdx, q)) continue;
                Item next{q, 0};
                if (seen.insert(next).second) work.push_back(next);
            }
        }
        return {seen.begin(), seen.end()};
    }

    std::uint32_t state_for(std::vector<Item> kernel) {
        std::sort(kernel.begin(), kernel.end());
        kernel.erase(std::unique(kernel.begin(), kernel.end()), kernel.end());
        auto it = stateIds_.find(kernel);
        if (it != stateIds_.end()) return it->second;
        std::uint32_t id = static_cast<std::uint32_t>(out_.states.size());
        stateIds_.emplace(kernel, id);
        out_.states.push_back({});
        out_.states.back().kernel = kernel;
        pending_.push_back(id);
        return id;
    }

    void build_states() {
        out_.startState = state_for({Item{g_.augmentedProd, 0}});
        while (!pending_.empty()) {
            std::uint32_t id = pending_.front();
            pending_.erase(pending_.begin());
            expand_state(id);
        }
    }

    void expand_state(std::uint32_t id) {
        std::vector<Item> items = closure(out_.states[id].kernel);
        std::size_t nIv = out_.alphabet.size();
        std::vector<std::vector<Item>> shiftKernels(nIv);
        std::map<int, std::vector<Item>> awaiting; // nonterminal -> items

        std::vector<std::vector<Action>> actions(nIv);

        for (const Item& it : items) {
            const NProduction& p = g_.prods[it.production];
            if (it.dot == static_cast<int>(p.rhs.size())) {
                if (p.id == g_.augmentedProd) {
                    // Nothing follows the augmented start; accept fires on
                    // the end-of-input sentinel it just consumed.
                    int eof = 0;
                    while (out_.alphabet[eof].lo != kEofCodepoint) ++eof;
                    actions[eof].push_back({Action::Kind::Accept, p.id});
                    continue;
                }
                // Completed item: reduce on FOLLOW(lhs) minus the follow
                // restriction of this production (maximal munch gating).
                IntervalSet lookaheads = follow_[p.lhs];
                auto fr = g_.followRestrictionByNt.find(p.lhs);
                Action act{Action::Kind::Reduce, p.id};
                for (int iv : lookaheads) {
                    if (fr != g_.followRestrictionByNt.end() &&
                        fr->second.contains(out_.alphabet[iv].lo))
                        continue;
                    actions[iv].push_back(act);
                }
                continue;
            }
            const NSymbol& s = p.rhs[it.dot];
            if (s.kind == NSymbol::Kind::Chars) {
                for (int iv : intervals_of(s.cc))
                    shiftKernels[iv].push_back({it.production, it.dot + 1});
            } else {
                awaiting[s.nt].push_back(it);
            }
        }

        for (std::size_t iv = 0; iv < nIv; ++iv) {
            if (shiftKernels[iv].empty()) continue;
            std::uint32_t target = state_for(shiftKernels[iv]);
            actions[iv].push_back({Action::Kind::Shift, target});
        }

        std::map<ProductionId, std::uint32_t> gotos;
        for (auto& [nt, awaitingItems] : awaiting) {
            for (ProductionId q : g_.ntProds[nt]) {
                std::vector<Item> kernel;
                for (const Item& it : awaitingItems) {
                    const NProduction& p = g_.prods[it.production];
                    int argIdx = arg_index(p, it.dot);
                    if (argIdx >= 0 && filter_.filtered(p.id, argIdx, q)) continue;
                    kernel.push_back({it.production, it.dot + 1});
                }
                if (kernel.empty()) continue;
                gotos[q] = state_for(std::move(kernel));
            }
        }

        // Deterministic action ordering: sort and dedup each cell.
        for (auto& cell : actions) {
            std::sort(cell.begin(), cell.end());
            cell.erase(std::unique(cell.begin(), cell.end()), cell.end());
        }
        out_.states[id].actions = std::move(actions);
        out_.states[id].gotos = std::move(gotos);
    }

    // ---- metadata -------------------------------------------------------

    void fill_metadata() {
        out_.augmentedProd = g_.augmentedProd;

        out_.sorts.resize(g_.nts.size());
        for (std::size_t i = 0; i < g_.nts.size(); ++i) {
            TableSort& s = out_.sorts[i];
            s.name = g_.nts[i].name;
            s.kind = g_.nts[i].kind;
            s.layout = g_.nts[i].layout;
            auto rj = g_.rejectSpellingsByNt.find(static_cast<int>(i));
            if (rj != g_.rejectSpellingsByNt.end()) s.rejectSpellings = rj->second;
        }

        out_.productions.resize(g_.prods.size());
        for (const NProduction& p : g_.prods) {
            TableProduction& tp = out_.productions[p.id];
            tp.sort = p.lhs;
            tp.ctor = p.ctor;
            tp.arity = static_cast<std::uint32_t>(p.rhs.size());
            tp.origin = p.origin;
            tp.lineage = p.lineage;
            tp.assoc = p.assoc;
            tp.bracket = p.bracket;
            tp.reject = p.reject;
            tp.injection = !p.reject && g_.is_injection(p.id);
            tp.argPositions = p.argPositions;
            auto fr = g_.followRestrictionByNt.find(p.lhs);
            if (fr != g_.followRestrictionByNt.end()) tp.followRestriction = fr->second;
            if (p.reject) out_.rejectSet.push_back(p.id);
        }

        if (cg_) {
            TokenUniverse universe = token_universe(*cg_);
            out_.universeMembers = universe.members;
            for (ProductionId pid : universe.members)
                out_.universeNames.push_back(g_.prod_display(pid));
            for (const NProduction& p : cg_->grammar.prods)
                for (std::size_t i = 0; i < p.rhs.size(); ++i) {
                    const NSymbol& s = p.rhs[i];
                    if (!s.is_contextual()) continue;
                    PositionConstraint c;
                    c.production = p.id;
                    c.rhsPosition = static_cast<int>(i);
                    c.lmMask = universe.mask(s.lm);
                    c.rmMask = universe.mask(s.rm);
                    out_.constraintMeta.push_back(c);
                }
        }
    }

    const NormalizedGrammar& g_;
    const ShallowFilter& filter_;
    const ContextualGrammar* cg_;
    ParseTable out_;

    std::vector<char> nullable_;
    std::vector<IntervalSet> first_;
    std::vector<IntervalSet> follow_;
    std::map<std::vector<Item>, std::uint32_t> stateIds_;
    std::vector<std::uint32_t> pending_;
};

} // namespace detail

/// SLR(1) character-level table with shallow priority conflicts filtered
/// out of closure and goto transitions. When a contextual grammar is given
/// its constraint metadata is attached; states, actions and gotos do not
/// depend on it.
inline ParseTable build_table(const NormalizedGrammar& g, const ShallowFilter& filter,
                              const ContextualGrammar* cg = nullptr) {
    if (cg) {
        // The automaton is built from the plain grammar; the contextual
        // grammar must erase to it.
        if (cg->grammar.prods.size() != g.prods.size())
            throw GrammarError("contextual grammar does not match the grammar");
    }
    return detail::TableBuilder(g, filter, cg).build();
}

} // namespace dpc

#endif // DPC_TABLE_HPP
