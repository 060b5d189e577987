#ifndef DPC_REWRITE_HPP
#define DPC_REWRITE_HPP

#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dpc/conflicts.hpp"
#include "dpc/normalize.hpp"

namespace dpc {

/// Identity of a contextual nonterminal: the tuple (lm, base sort, rm)
/// with both token sets kept sorted so set-equal keys compare equal.
struct ContextualNonterminalKey {
    std::vector<ProductionId> lm;
    int base = -1;
    std::vector<ProductionId> rm;

    friend bool operator==(const ContextualNonterminalKey&,
                           const ContextualNonterminalKey&) = default;
    friend auto operator<=>(const ContextualNonterminalKey&,
                            const ContextualNonterminalKey&) = default;
};

namespace detail {

class ContextualRewriter {
public:
    explicit ContextualRewriter(const ContextualGrammar& cg)
        : base_(cg.grammar), out_(cg.grammar) {
        leftReach_ = spine_nts(base_, true);
        rightReach_ = spine_nts(base_, false);
    }

    NormalizedGrammar rewrite() {
        run_fixpoint(/*materialize=*/true);

        // Replace contextual occurrences in the original productions.
        for (ProductionId id = 0; id < base_.prods.size(); ++id) {
            const NProduction& src = base_.prods[id];
            NProduction& dst = out_.prods[id];
            for (std::size_t i = 0; i < src.rhs.size(); ++i) {
                NSymbol replaced;
                if (resolve_occurrence(src.rhs[i], replaced)) dst.rhs[i] = replaced;
            }
        }
        reindex(out_);
        return std::move(out_);
    }

    std::set<ContextualNonterminalKey> reachable_keys() {
        run_fixpoint(/*materialize=*/false);
        std::set<ContextualNonterminalKey> keys;
        for (const auto& [k, nt] : keyNt_) keys.insert(k);
        return keys;
    }

    static void reindex(NormalizedGrammar& g) {
        g.ntProds.assign(g.nts.size(), {});
        for (NProduction& p : g.prods) {
            p.argPositions.clear();
            for (std::size_t i = 0; i < p.rhs.size(); ++i) {
                const NSymbol& s = p.rhs[i];
                if (s.kind != NSymbol::Kind::Nt) continue;
                if (g.nt_is_layout(s.nt) || g.nt_is_literal(s.nt)) continue;
                p.argPositions.push_back(static_cast<int>(i));
            }
            if (!p.reject) g.ntProds[p.lhs].push_back(p.id);
        }
    }

private:
    /// Keeps only tokens that can actually occur on the respective spine of
    /// the base nonterminal; a fully trivialized key is the plain sort.
    ContextualNonterminalKey effective_key(int nt,
                                           const std::vector<ProductionId>& lm,
                                           const std::vector<ProductionId>& rm) const {
        ContextualNonterminalKey k;
        k.base = nt;
        for (ProductionId t : lm)
            if (leftReach_[nt][base_.prods[t].lhs]) k.lm.push_back(t);
        for (ProductionId t : rm)
            if (rightReach_[nt][base_.prods[t].lhs]) k.rm.push_back(t);
        return k;
    }

    /// True when the symbol is a non-trivial contextual occurrence;
    /// `replaced` then names the fresh nonterminal. A trivialized occurrence
    /// still reports true so annotations are erased from the output.
    bool resolve_occurrence(const NSymbol& s, NSymbol& replaced) {
        if (s.kind != NSymbol::Kind::Nt || !s.is_contextual()) return false;
        ContextualNonterminalKey k = effective_key(s.nt, s.lm, s.rm);
        replaced = NSymbol::nonterminal(k.lm.empty() && k.rm.empty() ? s.nt
                                                                     : nt_for(k));
        return true;
    }

    int nt_for(const ContextualNonterminalKey& k) {
        auto it = keyNt_.find(k);
        if (it != keyNt_.end()) return it->second;
        int nt = static_cast<int>(out_.nts.size());
        NtInfo info = out_.nts[k.base];
        info.name = mangle(k);
        while (out_.ntByName.count(info.name)) info.name += "'";
        out_.nts.push_back(info);
        out_.ntByName.emplace(out_.nts.back().name, nt);
        auto fr = base_.followRestrictionByNt.find(k.base);
        if (fr != base_.followRestrictionByNt.end())
            out_.followRestrictionByNt.emplace(nt, fr->second);
        auto rj = base_.rejectSpellingsByNt.find(k.base);
        if (rj != base_.rejectSpellingsByNt.end())
            out_.rejectSpellingsByNt.emplace(nt, rj->second);
        keyNt_.emplace(k, nt);
        work_.push_back(k);
        return nt;
    }

    std::string mangle(const ContextualNonterminalKey& k) const {
        auto list = [&](const std::vector<ProductionId>& ids) {
            std::string s;
            for (std::size_t i = 0; i < ids.size(); ++i) {
                if (i) s += ",";
                s += base_.prod_display(ids[i]);
            }
            return s;
        };
        std::string name = base_.nt_name(k.base) + "{";
        if (!k.lm.empty()) name += list(k.lm) + "|";
        name += list(k.rm) + "}";
        return name;
    }

    static std::vector<ProductionId> merged(const std::vector<ProductionId>& a,
                                            const std::vector<ProductionId>& b) {
        std::vector<ProductionId> out;
        std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                       std::back_inserter(out));
        return out;
    }

    void run_fixpoint(bool materialize) {
        // Seed with the contextual occurrences of the source grammar.
        for (const NProduction& p : base_.prods)
            for (const NSymbol& s : p.rhs) {
                NSymbol ignored;
                resolve_occurrence(s, ignored);
            }

        while (!work_.empty()) {
            ContextualNonterminalKey key = work_.front();
            work_.pop_front();
            materialize_key(key, materialize);
        }
    }

    void materialize_key(const ContextualNonterminalKey& key, bool materialize) {
        int freshNt = keyNt_.at(key);
        std::set<ProductionId> excluded(key.lm.begin(), key.lm.end());
        excluded.insert(key.rm.begin(), key.rm.end());

        std::size_t copies = 0;
        for (ProductionId pid : base_.ntProds[key.base]) {
            const NProduction& src = base_.prods[pid];
            if (excluded.count(src.lineage)) continue;
            ++copies;

            // Locate the left/right propagation targets: the first and last
            // non-layout symbols of the copy.
            int li = -1, ri = -1;
            for (std::size_t i = 0; i < src.rhs.size(); ++i) {
                const NSymbol& s = src.rhs[i];
                if (s.kind == NSymbol::Kind::Nt && base_.nt_is_layout(s.nt)) continue;
                if (li < 0) li = static_cast<int>(i);
                ri = static_cast<int>(i);
            }

            NProduction copy;
            copy.id = static_cast<ProductionId>(out_.prods.size());
            copy.lhs = freshNt;
            copy.ctor = src.ctor;
            copy.assoc = src.assoc;
            copy.bracket = src.bracket;
            copy.origin = src.origin;
            copy.lineage = src.lineage;
            copy.rhs = src.rhs;

            for (std::size_t i = 0; i < copy.rhs.size(); ++i) {
                NSymbol& s = copy.rhs[i];
                if (s.kind != NSymbol::Kind::Nt) continue;
                std::vector<ProductionId> lm = s.lm;
                std::vector<ProductionId> rm = s.rm;
                if (static_cast<int>(i) == li) lm = merged(lm, key.lm);
                if (static_cast<int>(i) == ri) rm = merged(rm, key.rm);
                if (lm.empty() && rm.empty()) continue;
                if (base_.nt_is_layout(s.nt) || base_.nt_is_literal(s.nt)) continue;
                ContextualNonterminalKey sub = effective_key(s.nt, lm, rm);
                s.lm.clear();
                s.rm.clear();
                if (!sub.lm.empty() || !sub.rm.empty())
                    s = NSymbol::nonterminal(nt_for(sub));
            }

            if (materialize) out_.prods.push_back(std::move(copy));
        }

        if (copies == 0)
            throw GrammarError("contextual symbol " + mangle(key) +
                               " excludes every production of " +
                               base_.nt_name(key.base));
    }

    const NormalizedGrammar& base_;
    NormalizedGrammar out_;
    std::vector<std::vector<char>> leftReach_;
    std::vector<std::vector<char>> rightReach_;
    std::map<ContextualNonterminalKey, int> keyNt_;
    std::deque<ContextualNonterminalKey> work_;
};

} // namespace detail

/// Set of contextual nonterminals the recursive rewriting generates: the
/// least fixpoint of token propagation starting from the grammar's
/// contextual occurrences.
inline std::set<ContextualNonterminalKey> reachable_keys(const ContextualGrammar& cg) {
    return detail::ContextualRewriter(cg).reachable_keys();
}

/// Rewrites a contextual grammar into a plain context-free grammar by
/// duplicating productions per contextual nonterminal, excluding forbidden
/// productions and propagating the token sets to the leftmost/rightmost
/// symbols of every copy. Copies keep their original production in
/// `lineage`, so shallow filtering and imploding treat them as the
/// originals.
inline NormalizedGrammar rewrite(const ContextualGrammar& cg) {
    return detail::ContextualRewriter(cg).rewrite();
}

} // namespace dpc

#endif // DPC_REWRITE_HPP
