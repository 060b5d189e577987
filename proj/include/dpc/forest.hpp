#ifndef DPC_FOREST_HPP
#define DPC_FOREST_HPP

#include <cstdint>
#include <map>
#include <vector>

#include "dpc/grammar.hpp"
#include "dpc/token_set.hpp"

namespace dpc {

using NodeId = std::uint32_t;
constexpr NodeId kNoNode = 0xffffffffu;

/// Parse forest node. Character leaves are interned per codepoint and carry
/// no span; ambiguity clusters hold alternatives with equal span, sort and
/// token sets, so parent nodes stay valid when a cluster grows in place.
struct ForestNode {
    enum class Kind : std::uint8_t { Char, Prod, Amb };

    Kind kind = Kind::Char;
    std::int32_t ch = 0;            // Char
    ProductionId prod = 0;          // Prod
    std::uint32_t start = 0;        // Prod/Amb, codepoint offsets
    std::uint32_t end = 0;
    std::vector<NodeId> children;   // Prod: children, Amb: alternatives
    TokenSet leftmostTokens;
    TokenSet rightmostTokens;
};

class Forest {
public:
    const ForestNode& operator[](NodeId id) const { return nodes_[id]; }
    ForestNode& at(NodeId id) { return nodes_[id]; }
    std::size_t size() const { return nodes_.size(); }

    NodeId make_char(std::int32_t cp) {
        auto it = charNodes_.find(cp);
        if (it != charNodes_.end()) return it->second;
        ForestNode n;
        n.kind = ForestNode::Kind::Char;
        n.ch = cp;
        NodeId id = push(std::move(n));
        charNodes_.emplace(cp, id);
        return id;
    }

    NodeId make_prod(ProductionId prod, std::vector<NodeId> children,
                     std::uint32_t start, std::uint32_t end, TokenSet lm, TokenSet rm) {
        ForestNode n;
        n.kind = ForestNode::Kind::Prod;
        n.prod = prod;
        n.children = std::move(children);
        n.start = start;
        n.end = end;
        n.leftmostTokens = lm;
        n.rightmostTokens = rm;
        return push(std::move(n));
    }

    std::uint32_t width(NodeId id) const {
        const ForestNode& n = nodes_[id];
        if (n.kind == ForestNode::Kind::Char) return n.ch == kEofCodepoint ? 0 : 1;
        return n.end - n.start;
    }

    /// Shallow structural equality; shared children make this an effective
    /// duplicate test inside one parse.
    bool equal(NodeId a, NodeId b) const {
        if (a == b) return true;
        const ForestNode& na = nodes_[a];
        const ForestNode& nb = nodes_[b];
        return na.kind == nb.kind && na.ch == nb.ch && na.prod == nb.prod &&
               na.start == nb.start && na.end == nb.end && na.children == nb.children;
    }

    /// Packs `tree` into the cluster rooted at `into`, converting a plain
    /// node into a cluster in place so existing parents see the new
    /// alternative. Structural duplicates are dropped. Returns true when a
    /// new cluster was created.
    bool pack_ambiguity(NodeId into, NodeId tree) {
        ForestNode& n = nodes_[into];
        if (n.kind == ForestNode::Kind::Amb) {
            for (NodeId alt : n.children)
                if (equal(alt, tree)) return false;
            n.children.push_back(tree);
            return false;
        }
        if (equal(into, tree)) return false;
        ForestNode moved = n;
        NodeId movedId = push(std::move(moved));
        ForestNode& again = nodes_[into]; // push may reallocate
        again.kind = ForestNode::Kind::Amb;
        again.children = {movedId, tree};
        return true;
    }

    /// Ambiguity clusters reachable from `root`, shared nodes counted once.
    std::size_t count_ambiguities(NodeId root) const {
        if (root == kNoNode) return 0;
        std::vector<char> seen(nodes_.size(), 0);
        std::vector<NodeId> work{root};
        std::size_t count = 0;
        while (!work.empty()) {
            NodeId id = work.back();
            work.pop_back();
            if (seen[id]) continue;
            seen[id] = 1;
            const ForestNode& n = nodes_[id];
            if (n.kind == ForestNode::Kind::Amb) ++count;
            for (NodeId c : n.children)
                if (!seen[c]) work.push_back(c);
        }
        return count;
    }

private:
    NodeId push(ForestNode n) {
        nodes_.push_back(std::move(n));
        return static_cast<NodeId>(nodes_.size() - 1);
    }

    std::vector<ForestNode> nodes_;
    std::map<std::int32_t, NodeId> charNodes_;
};

} // namespace dpc

#endif // DPC_FOREST_HPP
