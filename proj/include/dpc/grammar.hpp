#ifndef DPC_GRAMMAR_HPP
#define DPC_GRAMMAR_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dpc/charclass.hpp"

namespace dpc {

using ProductionId = std::uint32_t;
constexpr ProductionId kNoProduction = 0xffffffffu;

/// Error from grammar-definition parsing or validation, with a 1-based
/// source position when one is known.
class GrammarError : public std::runtime_error {
public:
    GrammarError(std::string msg, int line = 0, int col = 0)
        : std::runtime_error(line > 0 ? msg + " (line " + std::to_string(line) +
                                            ", col " + std::to_string(col) + ")"
                                      : msg),
          line_(line),
          col_(col) {}

    int line() const { return line_; }
    int col() const { return col_; }

private:
    int line_;
    int col_;
};

/// Right-hand-side symbol as written in a grammar definition. List,
/// star and optional symbols wrap an element symbol; normalization
/// later expands them into derived productions over plain nonterminals.
struct Symbol {
    enum class Kind {
        CharClassSym,
        Literal,
        Nonterminal,
        ListPlus,
        ListStar,
        Optional,
        Layout,     // the implicit optional-layout separator (normalized form only)
        Contextual, // nonterminal with forbidden-production sets (analysis output)
    };

    Kind kind = Kind::Nonterminal;
    CharClass cc;                  // CharClassSym
    std::string text;              // Literal spelling or Nonterminal/Contextual name
    std::shared_ptr<Symbol> inner; // ListPlus / ListStar / Optional element
    std::vector<ProductionId> lm;  // Contextual: forbidden on leftmost spine
    std::vector<ProductionId> rm;  // Contextual: forbidden on rightmost spine

    static Symbol charclass(CharClass c) {
        Symbol s;
        s.kind = Kind::CharClassSym;
        s.cc = std::move(c);
        return s;
    }
    static Symbol literal(std::string t) {
        Symbol s;
        s.kind = Kind::Literal;
        s.text = std::move(t);
        return s;
    }
    static Symbol nonterminal(std::string name) {
        Symbol s;
        s.kind = Kind::Nonterminal;
        s.text = std::move(name);
        return s;
    }
    static Symbol list_plus(Symbol element) {
        Symbol s;
        s.kind = Kind::ListPlus;
        s.inner = std::make_shared<Symbol>(std::move(element));
        return s;
    }
    static Symbol list_star(Symbol element) {
        Symbol s;
        s.kind = Kind::ListStar;
        s.inner = std::make_shared<Symbol>(std::move(element));
        return s;
    }
    static Symbol optional(Symbol element) {
        Symbol s;
        s.kind = Kind::Optional;
        s.inner = std::make_shared<Symbol>(std::move(element));
        return s;
    }
    static Symbol contextual(std::string name, std::vector<ProductionId> lmSet,
                             std::vector<ProductionId> rmSet) {
        Symbol s;
        s.kind = Kind::Contextual;
        s.text = std::move(name);
        s.lm = std::move(lmSet);
        s.rm = std::move(rmSet);
        return s;
    }

    bool is_nonterminal_like() const {
        return kind == Kind::Nonterminal || kind == Kind::Contextual;
    }

    friend bool operator==(const Symbol& a, const Symbol& b) {
        if (a.kind != b.kind || a.cc != b.cc || a.text != b.text || a.lm != b.lm ||
            a.rm != b.rm)
            return false;
        if (!a.inner != !b.inner) return false;
        return !a.inner || *a.inner == *b.inner;
    }
};

enum class Assoc : std::uint8_t { None, Left, Right, NonAssoc };

struct Production {
    ProductionId id = 0;
    std::string lhs;
    std::string constructor; // empty when absent
    std::vector<Symbol> rhs;
    Assoc assoc = Assoc::None;
    bool bracket = false;
    bool reject = false;

    bool has_constructor() const { return !constructor.empty(); }

    /// "Sort.Ctor" or just "Sort" for constructor-less productions.
    std::string display_name() const {
        return has_constructor() ? lhs + "." + constructor : lhs;
    }
};

/// Strict partial order between productions, kept transitively closed.
class PriorityRelation {
public:
    void add(ProductionId higher, ProductionId lower) {
        pairs_.insert({higher, lower});
    }

    bool contains(ProductionId higher, ProductionId lower) const {
        return pairs_.count({higher, lower}) > 0;
    }

    const std::set<std::pair<ProductionId, ProductionId>>& pairs() const {
        return pairs_;
    }

    bool empty() const { return pairs_.empty(); }
    std::size_t size() const { return pairs_.size(); }

private:
    std::set<std::pair<ProductionId, ProductionId>> pairs_;
};

/// Transitive closure of the relation. Throws GrammarError with the cycle
/// path if closure would make the relation reflexive.
inline PriorityRelation priority_closure(const PriorityRelation& rel) {
    std::map<ProductionId, std::set<ProductionId>> succ;
    for (auto& [hi, lo] : rel.pairs()) succ[hi].insert(lo);

    // Floyd-Warshall style saturation; the relations here are tiny.
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto& [a, bs] : succ) {
            std::set<ProductionId> add;
            for (ProductionId b : bs) {
                auto it = succ.find(b);
                if (it == succ.end()) continue;
                for (ProductionId c : it->second)
                    if (!bs.count(c)) add.insert(c);
            }
            if (!add.empty()) {
                bs.insert(add.begin(), add.end());
                changed = true;
            }
        }
    }

    for (auto& [a, bs] : succ) {
        if (bs.count(a)) {
            // Recover one witness cycle for the diagnostic.
            std::vector<ProductionId> path{a};
            ProductionId cur = a;
            std::set<ProductionId> seen{a};
            while (true) {
                ProductionId next = kNoProduction;
                for (ProductionId cand : succ[cur]) {
                    if (cand == a || (succ.count(cand) && succ[cand].count(a))) {
                        next = cand;
                        break;
                    }
                }
                if (next == kNoProduction) break;
                path.push_back(next);
                if (next == a || seen.count(next)) break;
                seen.insert(next);
                cur = next;
            }
            std::string msg = "priority cycle:";
            for (ProductionId p : path) msg += " " + std::to_string(p) + " >";
            msg += " " + std::to_string(a);
            throw GrammarError(msg);
        }
    }

    PriorityRelation out;
    for (auto& [a, bs] : succ)
        for (ProductionId b : bs) out.add(a, b);
    return out;
}

/// A grammar definition as parsed from its textual form: character-level
/// lexical syntax plus context-free syntax with priorities, follow
/// restrictions and a start symbol.
struct Grammar {
    std::vector<Production> lexicalProductions;
    std::vector<Production> cfProductions;
    PriorityRelation priorities;
    std::map<std::string, CharClass> followRestrictions;
    std::string startSymbol;
    bool layoutDefined = false;

    const Production* find(ProductionId id) const {
        for (const auto& p : lexicalProductions)
            if (p.id == id) return &p;
        for (const auto& p : cfProductions)
            if (p.id == id) return &p;
        return nullptr;
    }

    const Production* find(const std::string& sort, const std::string& ctor) const {
        for (const auto& p : lexicalProductions)
            if (p.lhs == sort && p.constructor == ctor) return &p;
        for (const auto& p : cfProductions)
            if (p.lhs == sort && p.constructor == ctor) return &p;
        return nullptr;
    }
};

} // namespace dpc

#endif // DPC_GRAMMAR_HPP
