#ifndef DPC_IMPLODE_HPP
#define DPC_IMPLODE_HPP

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dpc/engine.hpp"
#include "dpc/forest.hpp"
#include "dpc/table.hpp"
#include "dpc/text.hpp"

namespace dpc {

/// Abstract syntax tree produced by imploding a parse forest.
struct Ast;
using AstPtr = std::shared_ptr<const Ast>;

struct Ast {
    enum class Kind : std::uint8_t { Node, Leaf, List, Amb };

    Kind kind = Kind::Node;
    std::string text; // constructor name (Node) or lexeme (Leaf)
    std::vector<AstPtr> kids;

    static AstPtr node(std::string ctor, std::vector<AstPtr> kids) {
        auto a = std::make_shared<Ast>();
        a->kind = Kind::Node;
        a->text = std::move(ctor);
        a->kids = std::move(kids);
        return a;
    }
    static AstPtr leaf(std::string text) {
        auto a = std::make_shared<Ast>();
        a->kind = Kind::Leaf;
        a->text = std::move(text);
        return a;
    }
    static AstPtr list(std::vector<AstPtr> kids) {
        auto a = std::make_shared<Ast>();
        a->kind = Kind::List;
        a->kids = std::move(kids);
        return a;
    }
    static AstPtr amb(std::vector<AstPtr> kids) {
        auto a = std::make_shared<Ast>();
        a->kind = Kind::Amb;
        a->kids = std::move(kids);
        return a;
    }
};

/// Canonical s-expression form: `(Ctor c1 c2)`, leaves as quoted lexemes,
/// lists as `[e1 e2]`, ambiguities as `(amb a1 a2)` with alternatives in
/// sorted serialized order.
inline std::string to_sexpr(const AstPtr& ast) {
    if (!ast) return "()";
    switch (ast->kind) {
        case Ast::Kind::Leaf: {
            std::string out = "\"";
            for (char c : ast->text) {
                if (c == '"' || c == '\\') out.push_back('\\');
                out.push_back(c);
            }
            out += '"';
            return out;
        }
        case Ast::Kind::Node: {
            std::string out = "(" + ast->text;
            for (const AstPtr& k : ast->kids) out += " " + to_sexpr(k);
            out += ")";
            return out;
        }
        case Ast::Kind::List: {
            std::string out = "[";
            for (std::size_t i = 0; i < ast->kids.size(); ++i) {
                if (i) out += " ";
                out += to_sexpr(ast->kids[i]);
            }
            out += "]";
            return out;
        }
        case Ast::Kind::Amb: {
            std::vector<std::string> alts;
            for (const AstPtr& k : ast->kids) alts.push_back(to_sexpr(k));
            std::sort(alts.begin(), alts.end());
            std::string out = "(amb";
            for (const std::string& a : alts) out += " " + a;
            out += ")";
            return out;
        }
    }
    return "()";
}

namespace detail {

class Imploder {
public:
    Imploder(const ParseTable& table, const Forest& forest,
             const std::vector<std::int32_t>& input)
        : t_(table), f_(forest), input_(input) {}

    std::optional<AstPtr> implode(NodeId id) {
        auto it = memo_.find(id);
        if (it != memo_.end()) return it->second;
        std::optional<AstPtr> out = compute(id);
        memo_.emplace(id, out);
        return out;
    }

private:
    std::optional<AstPtr> compute(NodeId id) {
        const ForestNode& n = f_[id];
        switch (n.kind) {
            case ForestNode::Kind::Char: {
                std::string text;
                encode_utf8(n.ch, text);
                return Ast::leaf(std::move(text));
            }
            case ForestNode::Kind::Amb: {
                std::vector<AstPtr> alts;
                std::vector<std::string> seen;
                for (NodeId alt : n.children) {
                    std::optional<AstPtr> a = implode(alt);
                    if (!a) continue;
                    std::string key = to_sexpr(*a);
                    if (std::find(seen.begin(), seen.end(), key) != seen.end())
                        continue;
                    seen.push_back(std::move(key));
                    alts.push_back(*a);
                }
                if (alts.empty()) return std::nullopt;
                if (alts.size() == 1) return alts[0];
                return Ast::amb(std::move(alts));
            }
            case ForestNode::Kind::Prod: break;
        }

        const TableProduction& p = t_.productions[n.prod];
        const TableSort& sort = t_.sorts[p.sort];

        if (sort.layout) return std::nullopt;
        if (sort.kind == NtInfo::Kind::LiteralInternal) return std::nullopt;
        if (sort.kind == NtInfo::Kind::Lex)
            return Ast::leaf(encode_utf8(input_, n.start, n.end));

        switch (p.origin) {
            case Origin::LiteralDef:
                return std::nullopt;
            case Origin::OptEmpty:
                return std::nullopt; // absent optional: dropped by the parent
            case Origin::OptInject:
                return implode(n.children[p.argPositions[0]]);
            case Origin::StarEmpty:
                return Ast::list({});
            case Origin::ListCons:
            case Origin::ListSingle:
            case Origin::StarInject: {
                std::vector<AstPtr> elems;
                collect_list(id, elems);
                return Ast::list(std::move(elems));
            }
            case Origin::Augmented:
                return implode(n.children[p.argPositions[0]]);
            case Origin::User:
                break;
        }

        // Injections and brackets collapse to their single argument.
        if (!p.ctor.empty()) {
            std::vector<AstPtr> kids;
            for (int pos : p.argPositions) {
                std::optional<AstPtr> k = implode(n.children[pos]);
                if (k) kids.push_back(*k);
            }
            return Ast::node(p.ctor, std::move(kids));
        }
        if (p.argPositions.size() == 1) return implode(n.children[p.argPositions[0]]);
        return std::nullopt;
    }

    void collect_list(NodeId id, std::vector<AstPtr>& elems) {
        const ForestNode& n = f_[id];
        if (n.kind == ForestNode::Kind::Amb) {
            // A cluster inside a list spine: implode it as a unit element.
            std::optional<AstPtr> a = implode(id);
            if (a) {
                if ((*a)->kind == Ast::Kind::List)
                    elems.insert(elems.end(), (*a)->kids.begin(), (*a)->kids.end());
                else
                    elems.push_back(*a);
            }
            return;
        }
        const TableProduction& p = t_.productions[n.prod];
        switch (p.origin) {
            case Origin::ListCons: {
                collect_list(n.children[p.argPositions[0]], elems);
                std::optional<AstPtr> tail = implode(n.children[p.argPositions.back()]);
                if (tail) elems.push_back(*tail);
                return;
            }
            case Origin::ListSingle:
            case Origin::StarInject: {
                if (p.origin == Origin::ListSingle) {
                    std::optional<AstPtr> e = implode(n.children[p.argPositions[0]]);
                    if (e) elems.push_back(*e);
                } else {
                    collect_list(n.children[p.argPositions[0]], elems);
                }
                return;
            }
            case Origin::StarEmpty:
                return;
            default: {
                std::optional<AstPtr> e = implode(id);
                if (e) elems.push_back(*e);
                return;
            }
        }
    }

    const ParseTable& t_;
    const Forest& f_;
    const std::vector<std::int32_t>& input_;
    std::map<NodeId, std::optional<AstPtr>> memo_;
};

} // namespace detail

/// Drops layout and literal children, collapses injections and brackets,
/// flattens lists, and turns ambiguity clusters into explicit `amb` nodes.
inline AstPtr implode(const ParseTable& table, const Forest& forest, NodeId root,
                      const std::vector<std::int32_t>& input) {
    detail::Imploder imp(table, forest, input);
    std::optional<AstPtr> out = imp.implode(root);
    return out ? *out : Ast::list({});
}

/// Indented forest dump with production ids, spans and hex token sets.
inline std::string forest_dump(const ParseTable& table, const Forest& forest,
                               NodeId root) {
    std::string out;
    std::vector<std::pair<NodeId, int>> work{{root, 0}};
    while (!work.empty()) {
        auto [id, depth] = work.back();
        work.pop_back();
        const ForestNode& n = forest[id];
        out.append(static_cast<std::size_t>(depth) * 2, ' ');
        switch (n.kind) {
            case ForestNode::Kind::Char: {
                std::string text;
                encode_utf8(n.ch, text);
                out += n.ch == kEofCodepoint ? "'<eof>'" : "'" + text + "'";
                out += "\n";
                continue;
            }
            case ForestNode::Kind::Amb:
                out += "amb [" + std::to_string(n.start) + "," +
                       std::to_string(n.end) + ")";
                break;
            case ForestNode::Kind::Prod:
                out += "#" + std::to_string(n.prod) + " " + table.prod_display(n.prod) +
                       " [" + std::to_string(n.start) + "," + std::to_string(n.end) +
                       ")";
                break;
        }
        out += " lm=" + n.leftmostTokens.to_hex() + " rm=" + n.rightmostTokens.to_hex() +
               "\n";
        for (auto it = n.children.rbegin(); it != n.children.rend(); ++it)
            work.push_back({*it, depth + 1});
    }
    return out;
}

} // namespace dpc

#endif // DPC_IMPLODE_HPP
