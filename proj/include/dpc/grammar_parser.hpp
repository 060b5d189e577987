#ifndef DPC_GRAMMAR_PARSER_HPP
#define DPC_GRAMMAR_PARSER_HPP

#include <cctype>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dpc/grammar.hpp"

namespace dpc {
namespace detail {

/// Cursor over one logical line of a grammar definition.
class LineScanner {
public:
    LineScanner(const std::string& text, int lineNo) : s_(text), line_(lineNo) {}

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }

    bool at_end() {
        skip_ws();
        return pos_ >= s_.size();
    }

    char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
    char peek_raw(std::size_t off = 0) const {
        return pos_ + off < s_.size() ? s_[pos_ + off] : '\0';
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw GrammarError(msg, line_, static_cast<int>(pos_) + 1);
    }

    bool try_consume(char c) {
        skip_ws();
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c, const std::string& what) {
        if (!try_consume(c)) fail("expected '" + std::string(1, c) + "' " + what);
    }

    bool try_consume_str(const std::string& tok) {
        skip_ws();
        if (s_.compare(pos_, tok.size(), tok) == 0) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    static bool is_ident_start(char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
    }
    static bool is_ident_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
    }

    /// Sort / constructor identifier. When `sortName` is set, also absorbs an
    /// immediately adjacent postfix (+ * ?) and an adjacent {...} suffix, so
    /// mangled contextual names like Exp{Exp.If} and list sorts like Pat+
    /// round-trip as opaque names.
    std::string ident(bool sortName) {
        skip_ws();
        if (!is_ident_start(peek())) fail("expected an identifier");
        std::size_t start = pos_;
        while (pos_ < s_.size() && is_ident_char(s_[pos_])) ++pos_;
        if (sortName) {
            if (peek_raw() == '+' || peek_raw() == '*' || peek_raw() == '?') ++pos_;
            if (peek_raw() == '{') {
                while (pos_ < s_.size() && s_[pos_] != '}') ++pos_;
                if (pos_ >= s_.size()) fail("unterminated '{' in sort name");
                ++pos_;
            }
        }
        return s_.substr(start, pos_ - start);
    }

    std::string quoted_literal() {
        skip_ws();
        if (peek() != '"') fail("expected a string literal");
        ++pos_;
        std::string out;
        while (pos_ < s_.size() && s_[pos_] != '"') {
            char c = s_[pos_++];
            if (c == '\\') {
                if (pos_ >= s_.size()) fail("dangling escape in literal");
                char e = s_[pos_++];
                switch (e) {
                    case '"': out.push_back('"'); break;
                    case '\\': out.push_back('\\'); break;
                    case 't': out.push_back('\t'); break;
                    case 'n': out.push_back('\n'); break;
                    case 'r': out.push_back('\r'); break;
                    default: fail("unknown escape in literal");
                }
            } else {
                out.push_back(c);
            }
        }
        if (pos_ >= s_.size()) fail("unterminated string literal");
        ++pos_;
        if (out.empty()) fail("empty literal");
        return out;
    }

    CharClass char_class() {
        skip_ws();
        if (peek() != '[') fail("expected a character class");
        ++pos_;
        CharClass cc;
        bool sawItem = false;
        while (pos_ < s_.size() && s_[pos_] != ']') {
            std::int32_t lo = class_char();
            std::int32_t hi = lo;
            if (peek_raw() == '-' ) {
                ++pos_;
                hi = class_char();
            }
            if (lo > hi) fail("character class range out of order");
            cc.add(lo, hi);
            sawItem = true;
        }
        if (pos_ >= s_.size()) fail("unterminated character class");
        ++pos_;
        if (!sawItem) fail("empty character class");
        return cc;
    }

private:
    std::int32_t class_char() {
        if (pos_ >= s_.size()) fail("unterminated character class");
        char c = s_[pos_++];
        if (c == '\\') {
            if (pos_ >= s_.size()) fail("dangling escape in character class");
            char e = s_[pos_++];
            switch (e) {
                case ' ': return ' ';
                case 't': return '\t';
                case 'n': return '\n';
                case 'r': return '\r';
                case '\\': return '\\';
                case ']': return ']';
                case '-': return '-';
                default: fail("unknown escape in character class");
            }
        }
        if (c == ' ' || c == '\t') fail("space in character class must be escaped");
        // Decode one UTF-8 scalar so classes may hold non-ASCII codepoints.
        unsigned char u = static_cast<unsigned char>(c);
        if (u < 0x80) return u;
        int extra = (u >= 0xf0) ? 3 : (u >= 0xe0) ? 2 : 1;
        std::int32_t cp = u & (0x3f >> extra);
        for (int i = 0; i < extra; ++i) {
            if (pos_ >= s_.size()) fail("truncated UTF-8 sequence");
            cp = (cp << 6) | (static_cast<unsigned char>(s_[pos_++]) & 0x3f);
        }
        return cp;
    }

    const std::string& s_;
    std::size_t pos_ = 0;
    int line_;
};

inline Symbol apply_postfix(LineScanner& sc, Symbol base) {
    // Postfix operators bind to the directly preceding symbol, no space.
    for (;;) {
        char c = sc.peek_raw();
        if (c == '+') base = Symbol::list_plus(std::move(base));
        else if (c == '*') base = Symbol::list_star(std::move(base));
        else if (c == '?') base = Symbol::optional(std::move(base));
        else break;
        sc.try_consume(c);
    }
    return base;
}

} // namespace detail

/// Parses the SDF3-like grammar definition format. Productions get dense
/// ids starting at 0 in file order. Throws GrammarError with the offending
/// source position on malformed input.
inline Grammar parse_grammar(const std::string& text) {
    Grammar g;
    enum class Section { None, Lexical, LexicalRestrictions, ContextFree, Priorities };
    Section section = Section::None;
    ProductionId nextId = 0;

    std::set<std::pair<std::string, std::string>> seenCtors;
    // Priority lines are resolved after all productions are known.
    struct PendingPriority {
        std::string hiSort, hiCtor, loSort, loCtor;
        int line;
    };
    std::vector<PendingPriority> pendingPriorities;

    std::size_t lineStart = 0;
    int lineNo = 0;
    while (lineStart <= text.size()) {
        std::size_t lineEnd = text.find('\n', lineStart);
        if (lineEnd == std::string::npos) lineEnd = text.size();
        std::string line = text.substr(lineStart, lineEnd - lineStart);
        lineStart = lineEnd + 1;
        ++lineNo;
        if (lineEnd == text.size() && line.empty() && lineStart > text.size()) break;

        // Strip // comments (not inside literals or character classes).
        bool inStr = false, inClass = false;
        for (std::size_t i = 0; i + 1 < line.size(); ++i) {
            char c = line[i];
            if (c == '\\') { ++i; continue; }
            if (inStr) { if (c == '"') inStr = false; continue; }
            if (inClass) { if (c == ']') inClass = false; continue; }
            if (c == '"') inStr = true;
            else if (c == '[') inClass = true;
            else if (c == '/' && line[i + 1] == '/') {
                line.resize(i);
                break;
            }
        }

        detail::LineScanner sc(line, lineNo);
        if (sc.at_end()) continue;

        if (sc.try_consume_str("start symbol")) {
            g.startSymbol = sc.ident(true);
            if (!sc.at_end()) sc.fail("trailing input after start symbol");
            continue;
        }
        if (sc.try_consume_str("lexical syntax")) {
            if (!sc.at_end()) sc.fail("trailing input after section header");
            section = Section::Lexical;
            continue;
        }
        if (sc.try_consume_str("lexical restrictions")) {
            if (!sc.at_end()) sc.fail("trailing input after section header");
            section = Section::LexicalRestrictions;
            continue;
        }
        if (sc.try_consume_str("context-free syntax")) {
            if (!sc.at_end()) sc.fail("trailing input after section header");
            section = Section::ContextFree;
            continue;
        }
        if (sc.try_consume_str("context-free priorities")) {
            if (!sc.at_end()) sc.fail("trailing input after section header");
            section = Section::Priorities;
            continue;
        }

        switch (section) {
            case Section::None:
                sc.fail("unknown section keyword or content before any section");

            case Section::LexicalRestrictions: {
                std::string sort = sc.ident(true);
                if (!sc.try_consume_str("-/-")) sc.fail("expected '-/-'");
                CharClass cc = sc.char_class();
                if (!sc.at_end()) sc.fail("trailing input after restriction");
                auto [it, fresh] = g.followRestrictions.emplace(sort, cc);
                if (!fresh) it->second.add(cc);
                break;
            }

            case Section::Priorities: {
                PendingPriority pp;
                pp.line = lineNo;
                pp.hiSort = sc.ident(true);
                sc.expect('.', "before constructor in priority");
                pp.hiCtor = sc.ident(false);
                if (!sc.try_consume('>')) sc.fail("expected '>' in priority");
                pp.loSort = sc.ident(true);
                sc.expect('.', "before constructor in priority");
                pp.loCtor = sc.ident(false);
                if (!sc.at_end()) sc.fail("trailing input after priority pair");
                pendingPriorities.push_back(std::move(pp));
                break;
            }

            case Section::Lexical:
            case Section::ContextFree: {
                Production p;
                p.id = nextId++;
                p.lhs = sc.ident(true);
                if (sc.try_consume('.')) p.constructor = sc.ident(false);
                sc.expect('=', "in production");

                while (!sc.at_end()) {
                    sc.skip_ws();
                    char c = sc.peek();
                    if (c == '{') break; // annotations
                    Symbol sym;
                    if (c == '"') sym = Symbol::literal(sc.quoted_literal());
                    else if (c == '[') sym = Symbol::charclass(sc.char_class());
                    else if (detail::LineScanner::is_ident_start(c)) {
                        std::string name = sc.ident(true);
                        // A name with an embedded +/*/? postfix denotes a list
                        // or optional of the base sort.
                        char suffix = name.back();
                        if ((suffix == '+' || suffix == '*' || suffix == '?') &&
                            name.find('{') == std::string::npos) {
                            Symbol base = Symbol::nonterminal(name.substr(0, name.size() - 1));
                            sym = suffix == '+'   ? Symbol::list_plus(base)
                                  : suffix == '*' ? Symbol::list_star(base)
                                                  : Symbol::optional(base);
                        } else {
                            sym = Symbol::nonterminal(name);
                        }
                        p.rhs.push_back(std::move(sym));
                        continue;
                    } else {
                        sc.fail("unexpected character in production right-hand side");
                    }
                    p.rhs.push_back(detail::apply_postfix(sc, std::move(sym)));
                }

                if (sc.try_consume('{')) {
                    for (;;) {
                        std::string ann = sc.ident(false);
                        if (ann == "left" || ann == "right" || ann == "non") {
                            if (ann == "non") {
                                if (!sc.try_consume('-')) sc.fail("expected 'non-assoc'");
                                std::string rest = sc.ident(false);
                                if (rest != "assoc") sc.fail("expected 'non-assoc'");
                            }
                            if (p.assoc != Assoc::None)
                                sc.fail("multiple associativity annotations");
                            p.assoc = ann == "left"    ? Assoc::Left
                                      : ann == "right" ? Assoc::Right
                                                       : Assoc::NonAssoc;
                        } else if (ann == "bracket") {
                            p.bracket = true;
                        } else if (ann == "reject") {
                            p.reject = true;
                        } else {
                            sc.fail("unknown annotation '" + ann + "'");
                        }
                        if (sc.try_consume(',')) continue;
                        sc.expect('}', "after annotations");
                        break;
                    }
                    if (!sc.at_end()) sc.fail("trailing input after annotations");
                }

                if (p.has_constructor()) {
                    if (!seenCtors.insert({p.lhs, p.constructor}).second)
                        sc.fail("duplicate production " + p.display_name());
                }
                if (p.reject) {
                    if (p.rhs.size() != 1 || p.rhs[0].kind != Symbol::Kind::Literal)
                        sc.fail("reject productions must have a single literal right-hand side");
                }
                if (p.bracket) {
                    if (p.has_constructor())
                        sc.fail("bracket productions cannot have a constructor");
                    int args = 0;
                    for (const Symbol& s : p.rhs)
                        if (s.is_nonterminal_like() || s.kind == Symbol::Kind::ListPlus ||
                            s.kind == Symbol::Kind::ListStar ||
                            s.kind == Symbol::Kind::Optional)
                            ++args;
                    if (args != 1)
                        sc.fail("bracket productions need exactly one nonterminal argument");
                }
                if (section == Section::ContextFree && !p.has_constructor() &&
                    !p.bracket && !p.reject) {
                    int args = 0;
                    for (const Symbol& s : p.rhs)
                        if (s.kind != Symbol::Kind::Literal &&
                            s.kind != Symbol::Kind::CharClassSym)
                            ++args;
                    if (args != 1)
                        sc.fail("constructor-less productions must be injections "
                                "(exactly one nonterminal argument)");
                }
                if (p.rhs.empty() && !p.reject)
                    sc.fail("empty right-hand side");

                if (section == Section::Lexical) {
                    if (p.lhs == "LAYOUT") g.layoutDefined = true;
                    g.lexicalProductions.push_back(std::move(p));
                } else {
                    g.cfProductions.push_back(std::move(p));
                }
                break;
            }
        }
    }

    if (g.startSymbol.empty()) throw GrammarError("no start symbol declared");

    bool startHasProduction = false;
    for (const auto& p : g.cfProductions)
        if (p.lhs == g.startSymbol && !p.reject) startHasProduction = true;
    for (const auto& p : g.lexicalProductions)
        if (p.lhs == g.startSymbol && !p.reject) startHasProduction = true;
    if (!startHasProduction) throw GrammarError("start symbol has no productions");

    // Resolve priorities now that every production id is known.
    for (const auto& pp : pendingPriorities) {
        const Production* hi = g.find(pp.hiSort, pp.hiCtor);
        const Production* lo = g.find(pp.loSort, pp.loCtor);
        if (!hi)
            throw GrammarError("priority references unknown production " + pp.hiSort +
                                   "." + pp.hiCtor,
                               pp.line, 1);
        if (!lo)
            throw GrammarError("priority references unknown production " + pp.loSort +
                                   "." + pp.loCtor,
                               pp.line, 1);
        g.priorities.add(hi->id, lo->id);
    }

    // Every referenced sort must be defined somewhere.
    std::set<std::string> defined;
    for (const auto& p : g.lexicalProductions) defined.insert(p.lhs);
    for (const auto& p : g.cfProductions) defined.insert(p.lhs);
    auto checkSym = [&](const Symbol& s, auto&& self) -> void {
        switch (s.kind) {
            case Symbol::Kind::Nonterminal:
            case Symbol::Kind::Contextual:
                if (!defined.count(s.text))
                    throw GrammarError("undefined sort '" + s.text + "'");
                break;
            case Symbol::Kind::ListPlus:
            case Symbol::Kind::ListStar:
            case Symbol::Kind::Optional:
                self(*s.inner, self);
                break;
            default:
                break;
        }
    };
    for (const auto& p : g.lexicalProductions)
        for (const Symbol& s : p.rhs) checkSym(s, checkSym);
    for (const auto& p : g.cfProductions)
        for (const Symbol& s : p.rhs) checkSym(s, checkSym);

    return g;
}

} // namespace dpc

#endif // DPC_GRAMMAR_PARSER_HPP
