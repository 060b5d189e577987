#ifndef DPC_ENGINE_HPP
#define DPC_ENGINE_HPP

#include <deque>
#include <map>
#include <string>
#include <vector>

#include "dpc/forest.hpp"
#include "dpc/table.hpp"
#include "dpc/text.hpp"

namespace dpc {

enum class ParseMode : std::uint8_t { None, DataDep };

struct ParseStats {
    std::uint64_t nodesCreated = 0;
    std::uint64_t reductionsPerformed = 0;
    std::uint64_t reductionsBlocked = 0;
    std::uint64_t ambiguityClusters = 0;
};

struct ParseResult {
    bool success = false;
    Forest forest;
    NodeId root = kNoNode;        // success: spans the full input
    std::size_t failureOffset = 0;
    std::string expected;         // character summary at the failure offset
    ParseStats stats;
};

/// Reduce-time lexical disambiguation: maximal munch via follow
/// restrictions, and keyword reservation via reject-production spellings.
/// Returns false when the reduction must be denied.
inline bool lexical_filters(const ParseTable& table, ProductionId production,
                            const std::vector<std::int32_t>& input,
                            std::size_t spanStart, std::size_t spanEnd,
                            std::int32_t lookahead) {
    const TableProduction& p = table.productions[production];
    if (!p.followRestriction.empty() && p.followRestriction.contains(lookahead))
        return false;
    const TableSort& sort = table.sorts[p.sort];
    if (!sort.rejectSpellings.empty()) {
        std::string span = encode_utf8(input, spanStart, spanEnd);
        for (const std::string& spelling : sort.rejectSpellings)
            if (span == spelling) return false;
    }
    return true;
}

namespace detail {

struct GssLink {
    std::uint32_t from = 0;
    std::uint32_t to = 0;
    NodeId tree = kNoNode;
};

struct GssNode {
    std::uint32_t state = 0;
    std::uint32_t pos = 0;
    std::vector<std::uint32_t> links; // outgoing, in creation order
};

class SglrParser {
public:
    SglrParser(const ParseTable& table, ParseMode mode)
        : t_(table), mode_(mode == ParseMode::DataDep && table.watched()
                               ? ParseMode::DataDep
                               : ParseMode::None) {}

    ParseResult parse(const std::vector<std::int32_t>& input) {
        input_ = &input;
        std::size_t len = input.size();

        frontier_.clear();
        frontierByState_.clear();
        nodes_.clear();
        links_.clear();
        std::uint32_t v0 = new_node(t_.startState, 0);
        frontier_.push_back(v0);
        frontierByState_.emplace(t_.startState, v0);

        for (pos_ = 0; pos_ <= len; ++pos_) {
            std::int32_t cp = pos_ < len ? input[pos_] : kEofCodepoint;
            reduce_phase(cp);
            std::vector<std::uint32_t> next = shift_phase(cp);
            if (next.empty()) {
                if (pos_ == len) break; // EOF unshiftable: no accept path
                return fail(pos_);
            }
            frontier_ = std::move(next);
            frontierByState_.clear();
            for (std::uint32_t v : frontier_) frontierByState_[nodes_[v].state] = v;
        }

        // The EOF shift landed in states whose only item is the completed
        // augmented production; harvest roots from them.
        NodeId root = kNoNode;
        if (pos_ > len) {
            for (std::uint32_t v : frontier_) {
                for (const Action& a : t_.actions_at(nodes_[v].state, kEofCodepoint)) {
                    if (a.kind != Action::Kind::Accept) continue;
                    collect_roots(v, root);
                }
            }
        }
        if (root == kNoNode) return fail(len);

        ParseResult out;
        out.success = true;
        out.root = root;
        out.forest = std::move(forest_);
        out.stats = stats_;
        out.stats.ambiguityClusters = out.forest.count_ambiguities(root);
        return out;
    }

private:
    struct ReduceJob {
        std::uint32_t node;
        ProductionId production;
        std::uint32_t viaLink; // kNoNode-like sentinel when unrestricted
    };
    static constexpr std::uint32_t kAnyLink = 0xffffffffu;

    std::uint32_t new_node(std::uint32_t state, std::uint32_t pos) {
        nodes_.push_back({state, pos, {}});
        return static_cast<std::uint32_t>(nodes_.size() - 1);
    }

    std::uint32_t add_link(std::uint32_t from, std::uint32_t to, NodeId tree) {
        links_.push_back({from, to, tree});
        std::uint32_t id = static_cast<std::uint32_t>(links_.size() - 1);
        nodes_[from].links.push_back(id);
        return id;
    }

    void enqueue_reductions(std::uint32_t v, std::int32_t cp, std::uint32_t via) {
        for (const Action& a : t_.actions_at(nodes_[v].state, cp))
            if (a.kind == Action::Kind::Reduce) jobs_.push_back({v, a.target, via});
    }

    void reduce_phase(std::int32_t cp) {
        jobs_.clear();
        for (std::uint32_t v : frontier_) enqueue_reductions(v, cp, kAnyLink);
        while (!jobs_.empty()) {
            ReduceJob job = jobs_.front();
            jobs_.pop_front();
            do_reductions(job, cp);
        }
    }

    /// Enumerates GSS paths of the production's arity below `job.node`,
    /// checks the data-dependent constraints per path, and reduces the
    /// surviving paths. A blocked path is skipped; the rest proceed and the
    /// GSS is otherwise untouched.
    void do_reductions(const ReduceJob& job, std::int32_t cp) {
        const TableProduction& p = t_.productions[job.production];
        pathLinks_.clear();
        walk_paths(job.node, p.arity, job.viaLink, job.viaLink == kAnyLink, cp,
                   job.production);
    }

    void walk_paths(std::uint32_t node, std::uint32_t depth, std::uint32_t via,
                    bool viaSeen, std::int32_t cp, ProductionId production) {
        if (depth == 0) {
            if (viaSeen) reduce_path(node, production, cp);
            return;
        }
        const std::vector<std::uint32_t> linkIds = nodes_[node].links;
        for (std::uint32_t l : linkIds) {
            pathLinks_.push_back(l);
            walk_paths(links_[l].to, depth - 1, via, viaSeen || l == via, cp,
                       production);
            pathLinks_.pop_back();
        }
    }

    void reduce_path(std::uint32_t bottom, ProductionId production, std::int32_t cp) {
        const TableProduction& p = t_.productions[production];
        const TableState& st = t_.states[nodes_[bottom].state];
        auto g = st.gotos.find(production);
        if (g == st.gotos.end()) return; // shallow-filtered or impossible path

        // Path links were collected top-down; rhs order is bottom-up.
        std::size_t n = p.arity;
        childBuf_.assign(n, kNoNode);
        for (std::size_t i = 0; i < n; ++i)
            childBuf_[i] = links_[pathLinks_[n - 1 - i]].tree;

        if (mode_ == ParseMode::DataDep) {
            for (const PositionConstraint& c : t_.constraintsByProd[production]) {
                const ForestNode& child = forest_[childBuf_[c.rhsPosition]];
                if (c.lmMask.intersects(child.leftmostTokens) ||
                    c.rmMask.intersects(child.rightmostTokens)) {
                    ++stats_.reductionsBlocked;
                    return;
                }
            }
        }

        std::uint32_t spanStart = nodes_[bottom].pos;
        if (!lexical_filters(t_, production, *input_, spanStart, pos_, cp)) return;

        NodeId tree = create_tree_node(production, childBuf_, spanStart,
                                       static_cast<std::uint32_t>(pos_));
        ++stats_.reductionsPerformed;
        attach(g->second, bottom, tree, cp);
    }

    /// CREATE-TREE-NODE with token propagation: the node's leftmost set is
    /// the leftmost set of its first non-empty child plus the node's own
    /// production when watched; symmetrically on the right. Nodes built from
    /// only empty-yield children carry just their own bit.
    NodeId create_tree_node(ProductionId production, const std::vector<NodeId>& children,
                            std::uint32_t start, std::uint32_t end) {
        TokenSet self = mode_ == ParseMode::DataDep ? t_.prodSelfBit[production]
                                                    : TokenSet();
        TokenSet lm = self;
        TokenSet rm = self;
        for (NodeId c : children) {
            if (forest_.width(c) == 0) continue;
            lm = forest_[c].leftmostTokens | self;
            break;
        }
        for (std::size_t i = children.size(); i > 0; --i) {
            NodeId c = children[i - 1];
            if (forest_.width(c) == 0) continue;
            rm = forest_[c].rightmostTokens | self;
            break;
        }
        ++stats_.nodesCreated;
        return forest_.make_prod(production, children, start, end, lm, rm);
    }

    /// Lands a reduced tree on the GSS: reuses the (state, position) node,
    /// packs into an existing link only when the token sets agree, and
    /// otherwise adds a parallel link and re-runs limited reductions through
    /// it.
    void attach(std::uint32_t target, std::uint32_t bottom, NodeId tree,
                std::int32_t cp) {
        auto it = frontierByState_.find(target);
        if (it == frontierByState_.end()) {
            std::uint32_t u = new_node(target, static_cast<std::uint32_t>(pos_));
            frontier_.push_back(u);
            frontierByState_.emplace(target, u);
            add_link(u, bottom, tree);
            enqueue_reductions(u, cp, kAnyLink);
            return;
        }
        std::uint32_t u = it->second;
        const ForestNode& tn = forest_[tree];
        for (std::uint32_t l : nodes_[u].links) {
            if (links_[l].to != bottom) continue;
            const ForestNode& existing = forest_[links_[l].tree];
            if (existing.leftmostTokens == tn.leftmostTokens &&
                existing.rightmostTokens == tn.rightmostTokens) {
                forest_.pack_ambiguity(links_[l].tree, tree);
                return;
            }
        }
        std::uint32_t l = add_link(u, bottom, tree);
        // Standard SGLR re-reduction: every stack may have new paths through
        // the new link.
        for (std::uint32_t x : frontier_) enqueue_reductions(x, cp, l);
    }

    std::vector<std::uint32_t> shift_phase(std::int32_t cp) {
        std::vector<std::uint32_t> next;
        std::map<std::uint32_t, std::uint32_t> byState;
        NodeId leaf = forest_.make_char(cp);
        for (std::uint32_t v : frontier_) {
            for (const Action& a : t_.actions_at(nodes_[v].state, cp)) {
                if (a.kind != Action::Kind::Shift) continue;
                auto [it, fresh] = byState.emplace(
                    a.target, static_cast<std::uint32_t>(nodes_.size()));
                if (fresh) {
                    new_node(a.target, static_cast<std::uint32_t>(pos_) + 1);
                    next.push_back(it->second);
                }
                add_link(it->second, v, leaf);
            }
        }
        return next;
    }

    void collect_roots(std::uint32_t v, NodeId& root) {
        const TableProduction& aug = t_.productions[t_.augmentedProd];
        pathLinks_.clear();
        collectRoot_ = &root;
        walk_root_paths(v, aug.arity);
        collectRoot_ = nullptr;
    }

    void walk_root_paths(std::uint32_t node, std::uint32_t depth) {
        if (depth == 0) {
            std::size_t n = pathLinks_.size();
            childBuf_.assign(n, kNoNode);
            for (std::size_t i = 0; i < n; ++i)
                childBuf_[i] = links_[pathLinks_[n - 1 - i]].tree;
            NodeId tree = create_tree_node(t_.augmentedProd, childBuf_, 0,
                                           static_cast<std::uint32_t>(input_->size()));
            ++stats_.reductionsPerformed;
            if (*collectRoot_ == kNoNode) *collectRoot_ = tree;
            else forest_.pack_ambiguity(*collectRoot_, tree);
            return;
        }
        const std::vector<std::uint32_t> linkIds = nodes_[node].links;
        for (std::uint32_t l : linkIds) {
            pathLinks_.push_back(l);
            walk_root_paths(links_[l].to, depth - 1);
            pathLinks_.pop_back();
        }
    }

    ParseResult fail(std::size_t offset) {
        ParseResult out;
        out.success = false;
        out.failureOffset = offset;
        CharClass expected;
        for (std::uint32_t v : frontier_) {
            const TableState& st = t_.states[nodes_[v].state];
            for (std::size_t iv = 0; iv < st.actions.size(); ++iv)
                if (!st.actions[iv].empty())
                    expected.add(t_.alphabet[iv].lo, t_.alphabet[iv].hi);
        }
        out.expected = expected.to_string();
        out.stats = stats_;
        out.forest = std::move(forest_);
        return out;
    }

    const ParseTable& t_;
    ParseMode mode_;
    const std::vector<std::int32_t>* input_ = nullptr;
    std::size_t pos_ = 0;

    Forest forest_;
    ParseStats stats_;
    std::vector<GssNode> nodes_;
    std::vector<GssLink> links_;
    std::vector<std::uint32_t> frontier_;
    std::map<std::uint32_t, std::uint32_t> frontierByState_;
    std::deque<ReduceJob> jobs_;
    std::vector<std::uint32_t> pathLinks_;
    std::vector<NodeId> childBuf_;
    NodeId* collectRoot_ = nullptr;
};

} // namespace detail

/// Scannerless GLR parse over a graph-structured stack. In DataDep mode the
/// table's constraint metadata is enforced during reductions; in None mode
/// it is ignored and no tokens are propagated (the table's universe is
/// treated as empty).
inline ParseResult parse(const ParseTable& table, const std::vector<std::int32_t>& input,
                         ParseMode mode = ParseMode::None) {
    detail::SglrParser parser(table, mode);
    return parser.parse(input);
}

inline ParseResult parse(const ParseTable& table, const std::string& utf8,
                         ParseMode mode = ParseMode::None) {
    return parse(table, decode_utf8(utf8), mode);
}

} // namespace dpc

#endif // DPC_ENGINE_HPP
