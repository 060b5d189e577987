#ifndef DPC_NORMALIZE_HPP
#define DPC_NORMALIZE_HPP

#include <map>
#include <string>
#include <vector>

#include "dpc/grammar.hpp"

namespace dpc {

/// Why a normalized production exists.
enum class Origin : std::uint8_t {
    User,       // written in the grammar definition
    LiteralDef, // "if" = [i][f]
    ListCons,   // X+ = X+ X
    ListSingle, // X+ = X
    StarInject, // X* = X+
    StarEmpty,  // X* =
    OptInject,  // X? = X
    OptEmpty,   // X? =
    Augmented,  // S' = LAYOUT? S LAYOUT? [EOF]
};

struct NtInfo {
    enum class Kind : std::uint8_t {
        Cf,              // user context-free sort
        Lex,             // user lexical sort
        LiteralInternal, // expansion of a literal spelling
        List,            // derived X+
        Star,            // derived X*
        Opt,             // derived X?
        Augmented,
    };

    std::string name;
    Kind kind = Kind::Cf;
    bool layout = false;         // LAYOUT or derived layout machinery
    std::string literalSpelling; // LiteralInternal only
};

/// Normalized right-hand-side symbol: either a character class or a
/// nonterminal occurrence. A nonterminal occurrence with a non-empty
/// lm or rm set is a contextual symbol.
struct NSymbol {
    enum class Kind : std::uint8_t { Chars, Nt };

    Kind kind = Kind::Nt;
    CharClass cc;
    int nt = -1;
    std::vector<ProductionId> lm; // sorted
    std::vector<ProductionId> rm; // sorted

    static NSymbol chars(CharClass c) {
        NSymbol s;
        s.kind = Kind::Chars;
        s.cc = std::move(c);
        return s;
    }
    static NSymbol nonterminal(int nt) {
        NSymbol s;
        s.kind = Kind::Nt;
        s.nt = nt;
        return s;
    }

    bool is_contextual() const { return !lm.empty() || !rm.empty(); }

    friend bool operator==(const NSymbol&, const NSymbol&) = default;
};

struct NProduction {
    ProductionId id = 0;
    int lhs = -1;
    std::string ctor;
    std::vector<NSymbol> rhs;
    Assoc assoc = Assoc::None;
    bool bracket = false;
    bool reject = false;
    Origin origin = Origin::User;
    ProductionId lineage = 0;      // original id this production stands for
    std::vector<int> argPositions; // rhs indices of non-layout, non-literal nonterminals
    std::string rejectSpelling;    // reject productions only

    bool has_constructor() const { return !ctor.empty(); }
};

struct NormalizedGrammar {
    std::vector<NProduction> prods; // dense: prods[id].id == id
    std::vector<NtInfo> nts;
    std::map<std::string, int> ntByName;
    std::vector<std::vector<ProductionId>> ntProds; // parseable productions per nt

    PriorityRelation priorities; // transitively closed, over user production ids
    std::map<int, CharClass> followRestrictionByNt;
    std::map<int, std::vector<std::string>> rejectSpellingsByNt;

    int startNt = -1;
    ProductionId augmentedProd = kNoProduction;
    int layoutOptNt = -1; // -1 when the grammar defines no layout
    bool layoutDefined = false;
    ProductionId firstDerivedId = 0; // user productions have smaller ids

    const NProduction& prod(ProductionId id) const { return prods[id]; }
    const std::string& nt_name(int nt) const { return nts[nt].name; }

    bool nt_is_layout(int nt) const { return nts[nt].layout; }
    bool nt_is_literal(int nt) const {
        return nts[nt].kind == NtInfo::Kind::LiteralInternal;
    }
    bool nt_is_lexical(int nt) const {
        return nts[nt].kind == NtInfo::Kind::Lex ||
               nts[nt].kind == NtInfo::Kind::LiteralInternal;
    }

    /// True for productions with a single nonterminal right-hand side and no
    /// constructor: transparent wrappers for classification, propagation and
    /// imploding.
    bool is_injection(ProductionId id) const {
        const NProduction& p = prods[id];
        return !p.has_constructor() && !p.bracket && p.rhs.size() == 1 &&
               p.rhs[0].kind == NSymbol::Kind::Nt;
    }

    std::string prod_display(ProductionId id) const {
        const NProduction& p = prods[id];
        std::string s = nt_name(p.lhs);
        if (p.has_constructor()) s += "." + p.ctor;
        return s;
    }

    int find_nt(const std::string& name) const {
        auto it = ntByName.find(name);
        return it == ntByName.end() ? -1 : it->second;
    }
};

namespace detail {

class Normalizer {
public:
    explicit Normalizer(const Grammar& g) : g_(g) {}

    NormalizedGrammar run() {
        out_.layoutDefined = g_.layoutDefined;
        out_.priorities = priority_closure(g_.priorities);

        // Pass 1: register user sorts so references resolve in any order.
        for (const Production& p : g_.lexicalProductions)
            ensure_nt(p.lhs, NtInfo::Kind::Lex, p.lhs == "LAYOUT");
        for (const Production& p : g_.cfProductions) {
            int nt = ensure_nt(p.lhs, NtInfo::Kind::Cf, false);
            (void)nt;
        }
        // Pre-register already-present derived sorts (re-normalization of a
        // pretty-printed or rewritten grammar) so we can skip re-deriving.
        for (const Production& p : g_.lexicalProductions)
            if (p.has_constructor()) existing_.insert({p.lhs, p.constructor});
        for (const Production& p : g_.cfProductions) {
            if (p.has_constructor()) existing_.insert({p.lhs, p.constructor});
            else if (p.rhs.size() == 1) existingInjections_.insert(p.lhs);
        }

        // Pass 2: user productions keep their ids, in id order.
        std::vector<const Production*> byId;
        for (const Production& p : g_.lexicalProductions) byId.push_back(&p);
        for (const Production& p : g_.cfProductions) byId.push_back(&p);
        std::sort(byId.begin(), byId.end(),
                  [](const Production* a, const Production* b) { return a->id < b->id; });
        for (std::size_t i = 0; i < byId.size(); ++i)
            if (byId[i]->id != i)
                throw GrammarError("internal: production ids are not dense");

        out_.prods.resize(byId.size());
        nextId_ = static_cast<ProductionId>(byId.size());
        out_.firstDerivedId = nextId_;

        for (const Production* p : byId) convert_user(*p);

        // The augmented production references optional layout, so make sure
        // the machinery exists even when no user production needed it.
        if (g_.layoutDefined) layout_opt_nt();

        // Follow restrictions; a LAYOUT restriction moves to the derived
        // optional-layout sort so layout runs can still grow char by char.
        for (const auto& [sort, cc] : g_.followRestrictions) {
            if (sort == "LAYOUT" && layoutOpt_ >= 0) {
                add_restriction(layoutOpt_, cc);
            } else {
                auto it = out_.ntByName.find(sort);
                if (it == out_.ntByName.end())
                    throw GrammarError("follow restriction on undefined sort '" + sort +
                                       "'");
                add_restriction(it->second, cc);
            }
        }

        augment_start();
        index_productions();
        return std::move(out_);
    }

private:
    using Key = std::pair<std::string, std::string>;

    int ensure_nt(const std::string& name, NtInfo::Kind kind, bool layout) {
        auto it = out_.ntByName.find(name);
        if (it != out_.ntByName.end()) return it->second;
        int id = static_cast<int>(out_.nts.size());
        NtInfo info;
        info.name = name;
        info.kind = kind;
        info.layout = layout;
        out_.nts.push_back(std::move(info));
        out_.ntByName.emplace(name, id);
        return id;
    }

    void add_restriction(int nt, const CharClass& cc) {
        auto [it, fresh] = out_.followRestrictionByNt.emplace(nt, cc);
        if (!fresh) it->second.add(cc);
    }

    NProduction& alloc(Origin origin) {
        ProductionId id = nextId_++;
        out_.prods.push_back({});
        NProduction& np = out_.prods.back();
        np.id = id;
        np.lineage = id;
        np.origin = origin;
        return np;
    }

    static std::string symbol_print_name(const Symbol& s) {
        switch (s.kind) {
            case Symbol::Kind::CharClassSym: return s.cc.to_string();
            case Symbol::Kind::Literal: {
                std::string out = "\"";
                for (char c : s.text) {
                    if (c == '"' || c == '\\') out.push_back('\\');
                    out.push_back(c);
                }
                out += '"';
                return out;
            }
            case Symbol::Kind::Nonterminal:
            case Symbol::Kind::Contextual: return s.text;
            case Symbol::Kind::ListPlus: return symbol_print_name(*s.inner) + "+";
            case Symbol::Kind::ListStar: return symbol_print_name(*s.inner) + "*";
            case Symbol::Kind::Optional: return symbol_print_name(*s.inner) + "?";
            case Symbol::Kind::Layout: return "LAYOUT?";
        }
        return "?";
    }

    int literal_nt(const std::string& spelling) {
        std::string name = symbol_print_name(Symbol::literal(spelling));
        auto it = out_.ntByName.find(name);
        if (it != out_.ntByName.end()) return it->second;
        int nt = ensure_nt(name, NtInfo::Kind::LiteralInternal, false);
        out_.nts[nt].literalSpelling = spelling;
        NProduction& np = alloc(Origin::LiteralDef);
        np.lhs = nt;
        // One character-class symbol per codepoint of the spelling.
        std::size_t i = 0;
        while (i < spelling.size()) {
            unsigned char u = static_cast<unsigned char>(spelling[i]);
            std::int32_t cp;
            int len;
            if (u < 0x80) { cp = u; len = 1; }
            else if (u >= 0xf0) { cp = u & 0x07; len = 4; }
            else if (u >= 0xe0) { cp = u & 0x0f; len = 3; }
            else { cp = u & 0x1f; len = 2; }
            for (int k = 1; k < len; ++k)
                cp = (cp << 6) | (static_cast<unsigned char>(spelling[i + k]) & 0x3f);
            i += len;
            np.rhs.push_back(NSymbol::chars(CharClass::single(cp)));
        }
        return nt;
    }

    /// Derived list/star/optional sorts. `separated` inserts optional layout
    /// between list elements (context-free lists only).
    int plus_nt(const Symbol& element, bool separated, bool layout) {
        std::string name = symbol_print_name(element) + "+";
        int nt = ensure_nt(name, NtInfo::Kind::List, layout);
        if (!derived_.insert(name).second) return nt;
        NSymbol el = convert_symbol(element, separated, layout);
        if (!existing_.count({name, "Cons"})) {
            NProduction& cons = alloc(Origin::ListCons);
            cons.lhs = nt;
            cons.ctor = "Cons";
            cons.rhs.push_back(NSymbol::nonterminal(nt));
            if (separated && layoutOpt_ >= 0)
                cons.rhs.push_back(NSymbol::nonterminal(layoutOpt_));
            cons.rhs.push_back(el);
        }
        if (!existing_.count({name, "Single"})) {
            NProduction& single = alloc(Origin::ListSingle);
            single.lhs = nt;
            single.ctor = "Single";
            single.rhs.push_back(el);
        }
        return nt;
    }

    int star_nt(const Symbol& element, bool separated, bool layout) {
        std::string name = symbol_print_name(element) + "*";
        int nt = ensure_nt(name, NtInfo::Kind::Star, layout);
        if (!derived_.insert(name).second) return nt;
        int plus = plus_nt(element, separated, layout);
        if (!existingInjections_.count(name)) {
            NProduction& inj = alloc(Origin::StarInject);
            inj.lhs = nt;
            inj.rhs.push_back(NSymbol::nonterminal(plus));
        }
        {
            NProduction& empty = alloc(Origin::StarEmpty);
            empty.lhs = nt;
        }
        return nt;
    }

    int opt_nt(const Symbol& element, bool separated, bool layout) {
        std::string name = symbol_print_name(element) + "?";
        int nt = ensure_nt(name, NtInfo::Kind::Opt, layout);
        if (!derived_.insert(name).second) return nt;
        NSymbol el = convert_symbol(element, separated, layout);
        if (!existingInjections_.count(name)) {
            NProduction& inj = alloc(Origin::OptInject);
            inj.lhs = nt;
            inj.rhs.push_back(el);
        }
        {
            NProduction& empty = alloc(Origin::OptEmpty);
            empty.lhs = nt;
        }
        return nt;
    }

    /// The optional-layout separator: LAYOUT? = LAYOUT+ | empty, with
    /// LAYOUT+ the usual left-recursive repetition.
    int layout_opt_nt() {
        if (layoutOpt_ >= 0) return layoutOpt_;
        Symbol layoutRep = Symbol::list_plus(Symbol::nonterminal("LAYOUT"));
        layoutOpt_ = opt_nt(layoutRep, /*separated=*/false, /*layout=*/true);
        out_.layoutOptNt = layoutOpt_;
        return layoutOpt_;
    }

    NSymbol convert_symbol(const Symbol& s, bool cfContext, bool layoutContext) {
        switch (s.kind) {
            case Symbol::Kind::CharClassSym: return NSymbol::chars(s.cc);
            case Symbol::Kind::Literal:
                return NSymbol::nonterminal(literal_nt(s.text));
            case Symbol::Kind::Nonterminal: {
                auto it = out_.ntByName.find(s.text);
                if (it == out_.ntByName.end())
                    throw GrammarError("undefined sort '" + s.text + "'");
                return NSymbol::nonterminal(it->second);
            }
            case Symbol::Kind::Contextual: {
                auto it = out_.ntByName.find(s.text);
                if (it == out_.ntByName.end())
                    throw GrammarError("undefined sort '" + s.text + "'");
                NSymbol n = NSymbol::nonterminal(it->second);
                n.lm = s.lm;
                n.rm = s.rm;
                return n;
            }
            case Symbol::Kind::ListPlus:
                return NSymbol::nonterminal(plus_nt(*s.inner, cfContext, layoutContext));
            case Symbol::Kind::ListStar:
                return NSymbol::nonterminal(star_nt(*s.inner, cfContext, layoutContext));
            case Symbol::Kind::Optional:
                return NSymbol::nonterminal(opt_nt(*s.inner, cfContext, layoutContext));
            case Symbol::Kind::Layout:
                return NSymbol::nonterminal(layout_opt_nt());
        }
        throw GrammarError("internal: unknown symbol kind");
    }

    void convert_user(const Production& p) {
        bool isCf = false;
        for (const Production& q : g_.cfProductions)
            if (&q == &p) isCf = true;

        NProduction np;
        np.id = p.id;
        np.lineage = p.id;
        np.origin = Origin::User;
        np.lhs = out_.ntByName.at(p.lhs);
        np.ctor = p.constructor;
        np.assoc = p.assoc;
        np.bracket = p.bracket;
        np.reject = p.reject;

        if (p.reject) {
            np.rejectSpelling = p.rhs[0].text;
            out_.rejectSpellingsByNt[np.lhs].push_back(np.rejectSpelling);
            out_.prods[p.id] = std::move(np);
            return;
        }

        bool insertLayout = isCf && g_.layoutDefined;
        for (std::size_t i = 0; i < p.rhs.size(); ++i) {
            if (insertLayout && i > 0)
                np.rhs.push_back(NSymbol::nonterminal(layout_opt_nt()));
            np.rhs.push_back(convert_symbol(p.rhs[i], isCf, false));
        }
        out_.prods[p.id] = std::move(np);
    }

    void augment_start() {
        auto it = out_.ntByName.find(g_.startSymbol);
        if (it == out_.ntByName.end())
            throw GrammarError("start symbol '" + g_.startSymbol + "' is undefined");
        out_.startNt = it->second;

        int aug = ensure_nt("<start>", NtInfo::Kind::Augmented, false);
        NProduction& np = alloc(Origin::Augmented);
        np.lhs = aug;
        if (layoutOpt_ >= 0) np.rhs.push_back(NSymbol::nonterminal(layoutOpt_));
        np.rhs.push_back(NSymbol::nonterminal(out_.startNt));
        if (layoutOpt_ >= 0) np.rhs.push_back(NSymbol::nonterminal(layoutOpt_));
        np.rhs.push_back(NSymbol::chars(CharClass::eof()));
        out_.augmentedProd = np.id;
    }

    void index_productions() {
        out_.ntProds.assign(out_.nts.size(), {});
        for (NProduction& p : out_.prods) {
            p.argPositions.clear();
            for (std::size_t i = 0; i < p.rhs.size(); ++i) {
                const NSymbol& s = p.rhs[i];
                if (s.kind != NSymbol::Kind::Nt) continue;
                if (out_.nt_is_layout(s.nt) || out_.nt_is_literal(s.nt)) continue;
                p.argPositions.push_back(static_cast<int>(i));
            }
            if (!p.reject) out_.ntProds[p.lhs].push_back(p.id);
        }
    }

    const Grammar& g_;
    NormalizedGrammar out_;
    ProductionId nextId_ = 0;
    int layoutOpt_ = -1;
    std::set<Key> existing_;
    std::set<std::string> existingInjections_;
    std::set<std::string> derived_;
};

} // namespace detail

/// Expands literals into internal character productions, derives list /
/// star / optional productions, inserts optional layout between the
/// symbols of context-free productions, and appends the augmented start
/// production. User production ids are preserved; derived productions get
/// fresh ids after them.
inline NormalizedGrammar normalize(const Grammar& g) {
    return detail::Normalizer(g).run();
}

} // namespace dpc

#endif // DPC_NORMALIZE_HPP
