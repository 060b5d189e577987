#ifndef DPC_SENTENCE_GEN_HPP
#define DPC_SENTENCE_GEN_HPP

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "dpc/conflicts.hpp"
#include "dpc/normalize.hpp"
#include "dpc/text.hpp"

namespace dpc {

/// Seeded random sentence generation from a normalized grammar. Derivations
/// respect the shallow filter (so generated trees are parseable) and skip
/// reject spellings for lexical sorts; every optional-layout position emits
/// one space, which keeps lexemes maximal-munch safe.
class SentenceGenerator {
public:
    SentenceGenerator(const NormalizedGrammar& g, const ShallowFilter& filter,
                      std::uint64_t seed)
        : g_(g), filter_(filter), rng_(seed) {
        minDepth_.assign(g_.nts.size(), kInf);
        bool changed = true;
        while (changed) {
            changed = false;
            for (const NProduction& p : g_.prods) {
                if (p.reject) continue;
                int depth = 1;
                for (const NSymbol& s : p.rhs) {
                    if (s.kind != NSymbol::Kind::Nt) continue;
                    depth = std::max(depth, minDepth_[s.nt] == kInf
                                                ? kInf
                                                : minDepth_[s.nt] + 1);
                }
                if (depth < minDepth_[p.lhs]) {
                    minDepth_[p.lhs] = depth;
                    changed = true;
                }
            }
        }
    }

    /// One random sentence, at most maxDepth derivation levels deep.
    /// Throws GrammarError when even the shallowest derivation exceeds it.
    std::string generate(int maxDepth) {
        if (minDepth_[g_.startNt] > maxDepth)
            throw GrammarError("depth bound exhausted before any complete sentence");
        std::string out;
        emit_nt(g_.startNt, maxDepth, kNoProduction, -1, out);
        return out;
    }

private:
    static constexpr int kInf = 1 << 20;

    std::uint64_t next(std::uint64_t bound) { return rng_() % bound; }

    ProductionId pick_production(int nt, int depthLeft, ProductionId parent,
                                 int argIdx) {
        candidates_.clear();
        for (ProductionId pid : g_.ntProds[nt]) {
            if (parent != kNoProduction && argIdx >= 0 &&
                filter_.filtered(parent, argIdx, pid))
                continue;
            candidates_.push_back(pid);
        }
        if (candidates_.empty())
            throw GrammarError("no production for sort " + g_.nt_name(nt) +
                               " survives shallow filtering here");

        // Among the allowed productions prefer ones that fit the remaining
        // depth; fall back to the shallowest otherwise.
        fitting_.clear();
        for (ProductionId pid : candidates_)
            if (prod_depth(pid) <= depthLeft) fitting_.push_back(pid);
        if (!fitting_.empty()) return fitting_[next(fitting_.size())];
        ProductionId best = candidates_[0];
        for (ProductionId pid : candidates_)
            if (prod_depth(pid) < prod_depth(best)) best = pid;
        return best;
    }

    int prod_depth(ProductionId pid) const {
        const NProduction& p = g_.prods[pid];
        int depth = 1;
        for (const NSymbol& s : p.rhs)
            if (s.kind == NSymbol::Kind::Nt)
                depth = std::max(depth, minDepth_[s.nt] + 1);
        return depth;
    }

    void emit_nt(int nt, int depthLeft, ProductionId parent, int argIdx,
                 std::string& out) {
        if (g_.nt_is_layout(nt)) {
            out += ' ';
            return;
        }
        if (g_.nt_is_literal(nt)) {
            out += g_.nts[nt].literalSpelling;
            return;
        }
        auto rejects = g_.rejectSpellingsByNt.find(nt);
        if (rejects != g_.rejectSpellingsByNt.end()) {
            // Regenerate lexemes that collide with reserved spellings.
            for (int attempt = 0; attempt < 64; ++attempt) {
                std::string lexeme;
                emit_plain(nt, depthLeft, parent, argIdx, lexeme);
                if (std::find(rejects->second.begin(), rejects->second.end(),
                              lexeme) == rejects->second.end()) {
                    out += lexeme;
                    return;
                }
            }
            throw GrammarError("cannot generate a non-reserved lexeme for sort " +
                               g_.nt_name(nt));
        }
        emit_plain(nt, depthLeft, parent, argIdx, out);
    }

    void emit_plain(int nt, int depthLeft, ProductionId parent, int argIdx,
                    std::string& out) {
        ProductionId pid = pick_production(nt, depthLeft, parent, argIdx);
        const NProduction& p = g_.prods[pid];
        int arg = 0;
        for (const NSymbol& s : p.rhs) {
            if (s.kind == NSymbol::Kind::Chars) {
                emit_char(s.cc, out);
                continue;
            }
            bool isArg = arg < static_cast<int>(p.argPositions.size()) &&
                         p.argPositions[arg] ==
                             static_cast<int>(&s - p.rhs.data());
            emit_nt(s.nt, depthLeft - 1, pid, isArg ? arg : -1, out);
            if (isArg) ++arg;
        }
    }

    void emit_char(const CharClass& cc, std::string& out) {
        std::uint64_t total = 0;
        for (const auto& r : cc.ranges())
            total += static_cast<std::uint64_t>(r.hi - r.lo + 1);
        std::uint64_t k = next(total);
        for (const auto& r : cc.ranges()) {
            std::uint64_t width = static_cast<std::uint64_t>(r.hi - r.lo + 1);
            if (k < width) {
                encode_utf8(r.lo + static_cast<std::int32_t>(k), out);
                return;
            }
            k -= width;
        }
    }

    const NormalizedGrammar& g_;
    const ShallowFilter& filter_;
    std::mt19937_64 rng_;
    std::vector<int> minDepth_;
    std::vector<ProductionId> candidates_;
    std::vector<ProductionId> fitting_;
};

} // namespace dpc

#endif // DPC_SENTENCE_GEN_HPP
