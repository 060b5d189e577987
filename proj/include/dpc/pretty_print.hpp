#ifndef DPC_PRETTY_PRINT_HPP
#define DPC_PRETTY_PRINT_HPP

#include <string>

#include "dpc/grammar.hpp"
#include "dpc/normalize.hpp"

namespace dpc {
namespace detail {

inline std::string print_literal(const std::string& text) {
    std::string out = "\"";
    for (char c : text) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            default: out.push_back(c);
        }
    }
    out += '"';
    return out;
}

inline std::string print_symbol(const Symbol& s) {
    switch (s.kind) {
        case Symbol::Kind::CharClassSym: return s.cc.to_string();
        case Symbol::Kind::Literal: return print_literal(s.text);
        case Symbol::Kind::Nonterminal: return s.text;
        case Symbol::Kind::ListPlus: return print_symbol(*s.inner) + "+";
        case Symbol::Kind::ListStar: return print_symbol(*s.inner) + "*";
        case Symbol::Kind::Optional: return print_symbol(*s.inner) + "?";
        case Symbol::Kind::Layout: return "LAYOUT?";
        case Symbol::Kind::Contextual: return s.text;
    }
    return "?";
}

inline std::string print_annotations(Assoc assoc, bool bracket, bool reject) {
    std::vector<std::string> anns;
    if (assoc == Assoc::Left) anns.push_back("left");
    if (assoc == Assoc::Right) anns.push_back("right");
    if (assoc == Assoc::NonAssoc) anns.push_back("non-assoc");
    if (bracket) anns.push_back("bracket");
    if (reject) anns.push_back("reject");
    if (anns.empty()) return "";
    std::string out = " {";
    for (std::size_t i = 0; i < anns.size(); ++i) {
        if (i) out += ", ";
        out += anns[i];
    }
    out += "}";
    return out;
}

} // namespace detail

/// Emits the grammar-definition format; the result reparses to a
/// structurally equal grammar.
inline std::string pretty_print(const Grammar& g) {
    std::string out = "start symbol " + g.startSymbol + "\n";

    if (!g.lexicalProductions.empty()) {
        out += "lexical syntax\n";
        for (const Production& p : g.lexicalProductions) {
            out += "  " + p.lhs;
            if (p.has_constructor()) out += "." + p.constructor;
            out += " =";
            for (const Symbol& s : p.rhs) out += " " + detail::print_symbol(s);
            out += detail::print_annotations(p.assoc, p.bracket, p.reject);
            out += "\n";
        }
    }
    if (!g.followRestrictions.empty()) {
        out += "lexical restrictions\n";
        for (const auto& [sort, cc] : g.followRestrictions)
            out += "  " + sort + " -/- " + cc.to_string() + "\n";
    }
    if (!g.cfProductions.empty()) {
        out += "context-free syntax\n";
        for (const Production& p : g.cfProductions) {
            out += "  " + p.lhs;
            if (p.has_constructor()) out += "." + p.constructor;
            out += " =";
            for (const Symbol& s : p.rhs) out += " " + detail::print_symbol(s);
            out += detail::print_annotations(p.assoc, p.bracket, p.reject);
            out += "\n";
        }
    }
    if (!g.priorities.empty()) {
        out += "context-free priorities\n";
        for (const auto& [hi, lo] : g.priorities.pairs()) {
            const Production* h = g.find(hi);
            const Production* l = g.find(lo);
            out += "  " + h->display_name() + " > " + l->display_name() + "\n";
        }
    }
    return out;
}

namespace detail {

inline std::string print_nsymbol(const NormalizedGrammar& g, const NSymbol& s) {
    if (s.kind == NSymbol::Kind::Chars) return s.cc.to_string();
    const NtInfo& info = g.nts[s.nt];
    if (info.kind == NtInfo::Kind::LiteralInternal)
        return print_literal(info.literalSpelling);
    return info.name;
}

/// True when a derived production has exactly the shape normalize() would
/// re-create from its sort's name, so printing may omit it.
inline bool is_canonical_derived(const NormalizedGrammar& g, const NProduction& p) {
    const std::string& lhsName = g.nt_name(p.lhs);
    std::vector<const NSymbol*> seq;
    for (const NSymbol& s : p.rhs) {
        if (s.kind == NSymbol::Kind::Nt && g.nt_is_layout(s.nt) &&
            s.nt == g.layoutOptNt)
            continue;
        seq.push_back(&s);
    }
    auto elementMatches = [&](const NSymbol& s, char suffix) {
        return lhsName == print_nsymbol(g, s) + suffix;
    };
    switch (p.origin) {
        case Origin::LiteralDef:
        case Origin::Augmented:
        case Origin::StarEmpty:
        case Origin::OptEmpty:
            return true;
        case Origin::ListCons:
            return seq.size() == 2 && seq[0]->kind == NSymbol::Kind::Nt &&
                   seq[0]->nt == p.lhs && elementMatches(*seq[1], '+');
        case Origin::ListSingle:
            return seq.size() == 1 && elementMatches(*seq[0], '+');
        case Origin::StarInject:
            return seq.size() == 1 && seq[0]->kind == NSymbol::Kind::Nt &&
                   !lhsName.empty() && lhsName.back() == '*' &&
                   g.nt_name(seq[0]->nt) ==
                       lhsName.substr(0, lhsName.size() - 1) + "+";
        case Origin::OptInject:
            return seq.size() == 1 && elementMatches(*seq[0], '?');
        case Origin::User:
            return false;
    }
    return false;
}

} // namespace detail

/// Prints a normalized grammar back in user form: literals restored,
/// optional layout stripped, canonically derived productions omitted (they
/// are re-derived on normalization). Productions that rewriting modified or
/// created keep their mangled sorts and are printed explicitly, so the
/// output reparses to a grammar that normalizes to an equivalent one.
inline std::string pretty_print(const NormalizedGrammar& g) {
    std::string out = "start symbol " + g.nt_name(g.startNt) + "\n";

    auto printProd = [&](const NProduction& p) {
        out += "  " + g.nt_name(p.lhs);
        if (p.has_constructor()) out += "." + p.ctor;
        out += " =";
        if (p.reject) {
            out += " " + detail::print_literal(p.rejectSpelling);
        } else {
            for (const NSymbol& s : p.rhs) {
                if (s.kind == NSymbol::Kind::Nt && s.nt == g.layoutOptNt) continue;
                out += " " + detail::print_nsymbol(g, s);
            }
        }
        out += detail::print_annotations(p.assoc, p.bracket, p.reject);
        out += "\n";
    };

    bool anyLex = false, anyCf = false;
    for (const NProduction& p : g.prods) {
        if (p.origin != Origin::User) continue;
        (g.nts[p.lhs].kind == NtInfo::Kind::Lex ? anyLex : anyCf) = true;
    }

    if (anyLex) {
        out += "lexical syntax\n";
        for (const NProduction& p : g.prods)
            if (p.origin == Origin::User && g.nts[p.lhs].kind == NtInfo::Kind::Lex)
                printProd(p);
    }
    if (!g.followRestrictionByNt.empty()) {
        out += "lexical restrictions\n";
        for (const auto& [nt, cc] : g.followRestrictionByNt) {
            std::string name = nt == g.layoutOptNt ? "LAYOUT" : g.nt_name(nt);
            out += "  " + name + " -/- " + cc.to_string() + "\n";
        }
    }
    if (anyCf || g.prods.size() > g.firstDerivedId) {
        out += "context-free syntax\n";
        for (const NProduction& p : g.prods) {
            if (p.origin == Origin::User) {
                if (g.nts[p.lhs].kind != NtInfo::Kind::Lex) printProd(p);
            } else if (!detail::is_canonical_derived(g, p)) {
                printProd(p);
            }
        }
    }
    if (!g.priorities.empty()) {
        out += "context-free priorities\n";
        for (const auto& [hi, lo] : g.priorities.pairs())
            out += "  " + g.prod_display(hi) + " > " + g.prod_display(lo) + "\n";
    }
    return out;
}

} // namespace dpc

#endif // DPC_PRETTY_PRINT_HPP
