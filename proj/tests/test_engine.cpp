#include <catch2/catch_amalgamated.hpp>

#include "dpc/engine.hpp"
#include "dpc/grammar_parser.hpp"
#include "dpc/implode.hpp"
#include "dpc/rewrite.hpp"
#include "dpc/sentence_gen.hpp"
#include "dpc/table.hpp"

#include "support/fixtures.hpp"
#include "support/oracle.hpp"

using namespace dpc;
using namespace dpc::tests;

namespace {

struct Rig {
    Pipeline pipeline;
    ParseTable table;

    explicit Rig(const std::string& name) : pipeline(fixture_pipeline(name)) {
        table = build_table(pipeline.grammar, pipeline.filter, &pipeline.contextual);
    }

    ParseResult run(const std::string& input, ParseMode mode) const {
        return dpc::parse(table, input, mode);
    }

    std::string ast(const ParseResult& r, const std::string& input) const {
        return to_sexpr(implode(table, r.forest, r.root, decode_utf8(input)));
    }
};

} // namespace

TEST_CASE("prefix-add input: datadep blocks the deep conflict") {
    Rig rig("prefix-add.def");
    std::string input = "1 + if 2 + 3"; // INT + if INT + INT
    ParseResult r = rig.run(input, ParseMode::DataDep);
    REQUIRE(r.success);
    CHECK(r.stats.reductionsBlocked >= 1);
    CHECK(r.stats.ambiguityClusters == 0);
    CHECK(rig.ast(r, input) ==
          "(Add (Int \"1\") (If (Add (Int \"2\") (Int \"3\"))))");
    check_spine_sets(rig.table, r.forest, r.root, true);
}

TEST_CASE("prefix-add input: plain mode keeps both readings") {
    Rig rig("prefix-add.def");
    std::string input = "1 + if 2 + 3";
    ParseResult r = rig.run(input, ParseMode::None);
    REQUIRE(r.success);
    CHECK(r.stats.reductionsBlocked == 0);
    CHECK(r.stats.ambiguityClusters == 1);
    std::set<std::string> trees =
        tree_set(rig.table, r.forest, r.root, decode_utf8(input));
    CHECK(trees ==
          std::set<std::string>{
              "(Add (Int \"1\") (If (Add (Int \"2\") (Int \"3\"))))",
              "(Add (Add (Int \"1\") (If (Int \"2\"))) (Int \"3\"))"});
    check_spine_sets(rig.table, r.forest, r.root, false);
}

TEST_CASE("single token input parses with empty token sets") {
    Rig rig("prefix-add.def");
    ParseResult r = rig.run("1", ParseMode::DataDep);
    REQUIRE(r.success);
    CHECK(r.stats.ambiguityClusters == 0);
    CHECK(r.stats.reductionsBlocked == 0);
    CHECK(rig.ast(r, "1") == "(Int \"1\")");
    // Int is not watched, so every set in the forest is empty.
    for (NodeId id = 0; id < r.forest.size(); ++id) {
        CHECK(r.forest[id].leftmostTokens.empty());
        CHECK(r.forest[id].rightmostTokens.empty());
    }
}

TEST_CASE("token propagation on the if node") {
    Rig rig("prefix-add.def");
    std::string input = "if 1";
    ParseResult r = rig.run(input, ParseMode::DataDep);
    REQUIRE(r.success);
    ProductionId iff = prod_id(rig.pipeline.grammar, "Exp.If");
    bool found = false;
    for (NodeId id = 0; id < r.forest.size(); ++id) {
        const ForestNode& n = r.forest[id];
        if (n.kind != ForestNode::Kind::Prod || n.prod != iff) continue;
        found = true;
        CHECK(n.leftmostTokens.to_hex() == "1");
        CHECK(n.rightmostTokens.to_hex() == "1");
    }
    CHECK(found);
    check_spine_sets(rig.table, r.forest, r.root, true);
}

TEST_CASE("addition over an if-ending right child propagates rm only") {
    Rig rig("prefix-add.def");
    std::string input = "1 + if 2";
    ParseResult r = rig.run(input, ParseMode::DataDep);
    REQUIRE(r.success);
    CHECK(rig.ast(r, input) == "(Add (Int \"1\") (If (Int \"2\")))");
    ProductionId add = prod_id(rig.pipeline.grammar, "Exp.Add");
    for (NodeId id = 0; id < r.forest.size(); ++id) {
        const ForestNode& n = r.forest[id];
        if (n.kind != ForestNode::Kind::Prod || n.prod != add) continue;
        CHECK(n.rightmostTokens.to_hex() == "1"); // If on the right spine
        CHECK(n.leftmostTokens.to_hex() == "0");  // Add itself is unwatched
    }
}

TEST_CASE("cluster packing deduplicates structurally equal trees") {
    Forest f;
    NodeId a = f.make_char('a');
    NodeId one = f.make_prod(3, {a}, 0, 1, {}, {});
    NodeId sameAsOne = f.make_prod(3, {a}, 0, 1, {}, {});
    NodeId other = f.make_prod(4, {a}, 0, 1, {}, {});

    // Equal trees never create a cluster.
    CHECK_FALSE(f.pack_ambiguity(one, sameAsOne));
    CHECK(f[one].kind == ForestNode::Kind::Prod);

    // A genuinely different tree converts the node in place.
    CHECK(f.pack_ambiguity(one, other));
    REQUIRE(f[one].kind == ForestNode::Kind::Amb);
    CHECK(f[one].children.size() == 2);

    // Re-adding a structural duplicate leaves the cluster unchanged.
    NodeId dup = f.make_prod(4, {a}, 0, 1, {}, {});
    CHECK_FALSE(f.pack_ambiguity(one, dup));
    CHECK(f[one].children.size() == 2);

    CHECK(f.count_ambiguities(one) == 1);
}

TEST_CASE("parallel links keep alternatives with different token sets apart") {
    // E.Cat = E E and E.P = "p" E make "p x x" ambiguous between
    // Cat(P(x),x) with an empty rightmost set and P(Cat(x,x)) ending in P.
    // A handmade constraint on Root's left argument must block exactly the
    // P-ending alternative.
    std::string text =
        "start symbol S\n"
        "lexical syntax\n"
        "  X = [x]\n"
        "  INT = [0-9]+\n"
        "  LAYOUT = [\\ ]\n"
        "context-free syntax\n"
        "  S.Root = E \"+\" INT\n"
        "  E.Cat = E E\n"
        "  E.P = \"p\" E\n"
        "  E.X = X\n";
    NormalizedGrammar g = normalize(parse_grammar(text));
    ProductionId root = prod_id(g, "S.Root");
    ProductionId p = prod_id(g, "E.P");
    DeepConflict c{DeepConflict::Class::OperatorStyle, root, 0,
                   DeepConflict::Side::Rightmost, {p}};
    ContextualGrammar cg = derive_contextual_grammar(g, {c});
    ParseTable table = build_table(g, shallow_conflicts(g), &cg);

    std::string input = "p x x + 1";
    ParseResult dd = dpc::parse(table, input, ParseMode::DataDep);
    REQUIRE(dd.success);
    CHECK(dd.stats.reductionsBlocked == 1);
    CHECK(dd.stats.ambiguityClusters == 0);
    CHECK(to_sexpr(implode(table, dd.forest, dd.root, decode_utf8(input))) ==
          "(Root (Cat (P (X \"x\")) (X \"x\")) \"1\")");

    ParseResult none = dpc::parse(table, input, ParseMode::None);
    REQUIRE(none.success);
    CHECK(none.stats.ambiguityClusters == 1);
    std::set<std::string> trees =
        tree_set(table, none.forest, none.root, decode_utf8(input));
    CHECK(trees.size() == 2);
}

TEST_CASE("structurally equal trees pack into one alternative") {
    // An ambiguous grammar whose two derivations build the same tree shape
    // twice over: E.Cat is fully associative, so "x x x" has two parses.
    std::string text =
        "start symbol E\n"
        "lexical syntax\n"
        "  X = [x]\n"
        "  LAYOUT = [\\ ]\n"
        "context-free syntax\n"
        "  E.Cat = E E\n"
        "  E.X = X\n";
    NormalizedGrammar g = normalize(parse_grammar(text));
    ParseTable table = build_table(g, {});
    ParseResult r = dpc::parse(table, std::string("x x x"), ParseMode::None);
    REQUIRE(r.success);
    CHECK(r.stats.ambiguityClusters == 1);
    std::set<std::string> trees =
        tree_set(table, r.forest, r.root, decode_utf8("x x x"));
    CHECK(trees.size() == 2);
}

TEST_CASE("lexical filters: keyword reservation and maximal munch") {
    Rig rig("mini-ml.def");
    const NormalizedGrammar& g = rig.pipeline.grammar;

    ProductionId idProd = kNoProduction;
    for (const NProduction& p : g.prods)
        if (g.nt_name(p.lhs) == "ID" && !p.reject) idProd = p.id;
    REQUIRE(idProd != kNoProduction);

    SECTION("ID over a reserved spelling is denied") {
        std::vector<std::int32_t> input = decode_utf8("if");
        CHECK_FALSE(lexical_filters(rig.table, idProd, input, 0, 2, ' '));
    }
    SECTION("ID over a non-reserved spelling is allowed") {
        std::vector<std::int32_t> input = decode_utf8("ifx");
        CHECK(lexical_filters(rig.table, idProd, input, 0, 3, ' '));
    }
    SECTION("INT reduce under more digits is denied") {
        ProductionId intProd = kNoProduction;
        for (const NProduction& p : g.prods)
            if (g.nt_name(p.lhs) == "INT" && !p.reject) intProd = p.id;
        std::vector<std::int32_t> input = decode_utf8("123");
        CHECK_FALSE(lexical_filters(rig.table, intProd, input, 0, 2, '3'));
        CHECK(lexical_filters(rig.table, intProd, input, 0, 3, ' '));
    }
    SECTION("keywords cannot parse as variables") {
        ParseResult r = rig.run("if ( 1 ) if", ParseMode::DataDep);
        CHECK_FALSE(r.success);
        ParseResult ok = rig.run("if ( 1 ) ifx", ParseMode::DataDep);
        REQUIRE(ok.success);
        CHECK(rig.ast(ok, "if ( 1 ) ifx") == "(If (Int \"1\") (Var \"ifx\"))");
    }
    SECTION("maximal munch joins adjacent digits") {
        ParseResult r = rig.run("12", ParseMode::DataDep);
        REQUIRE(r.success);
        CHECK(rig.ast(r, "12") == "(Int \"12\")");
    }
}

TEST_CASE("implosion drops brackets and flattens lists") {
    Rig rig("mini-ml.def");
    SECTION("bracket transparency") {
        ParseResult r = rig.run("( 1 )", ParseMode::DataDep);
        REQUIRE(r.success);
        CHECK(rig.ast(r, "( 1 )") == "(Int \"1\")");
    }
    SECTION("nested match imploded per the longest-match reading") {
        std::string input = "match x with a -> match y with b -> 1 c -> 2";
        ParseResult r = rig.run(input, ParseMode::DataDep);
        REQUIRE(r.success);
        CHECK(r.stats.ambiguityClusters == 0);
        CHECK(rig.ast(r, input) ==
              "(Match (Var \"x\") [(Pattern \"a\" (Match (Var \"y\") "
              "[(Pattern \"b\" (Int \"1\")) (Pattern \"c\" (Int \"2\"))]))])");
    }
}

TEST_CASE("parse failures report the offset and expected characters") {
    Rig rig("prefix-add.def");
    ParseResult r = rig.run("1 + ?", ParseMode::DataDep);
    REQUIRE_FALSE(r.success);
    CHECK(r.failureOffset == 4);
    CHECK_FALSE(r.expected.empty());

    ParseResult r2 = rig.run("1 +", ParseMode::DataDep);
    REQUIRE_FALSE(r2.success);
    CHECK(r2.failureOffset == 3);
}

TEST_CASE("empty-universe grammars behave identically in both modes") {
    Pipeline p = fixture_pipeline("arith.def");
    REQUIRE(p.universe.size() == 0);
    ParseTable t = build_table(p.grammar, p.filter, &p.contextual);
    for (std::string input :
         {std::string("1 + 2 * 3"), std::string("( 1 + 2 ) * 3"),
          std::string("1 * 2 * 3 + 4")}) {
        ParseResult a = dpc::parse(t, input, ParseMode::DataDep);
        ParseResult b = dpc::parse(t, input, ParseMode::None);
        REQUIRE(a.success);
        REQUIRE(b.success);
        CHECK(a.stats.reductionsBlocked == 0);
        CHECK(b.stats.reductionsBlocked == 0);
        CHECK(a.stats.nodesCreated == b.stats.nodesCreated);
        CHECK(a.stats.reductionsPerformed == b.stats.reductionsPerformed);
        CHECK(forest_dump(t, a.forest, a.root) == forest_dump(t, b.forest, b.root));
    }
}

TEST_CASE("associativity and priority filtering shape arithmetic") {
    Pipeline p = fixture_pipeline("arith.def");
    ParseTable t = build_table(p.grammar, p.filter, &p.contextual);
    ParseResult r = dpc::parse(t, std::string("1 + 2 * 3 + 4"), ParseMode::None);
    REQUIRE(r.success);
    CHECK(r.stats.ambiguityClusters == 0);
    CHECK(to_sexpr(implode(t, r.forest, r.root, decode_utf8("1 + 2 * 3 + 4"))) ==
          "(Add (Add (Int \"1\") (Mul (Int \"2\") (Int \"3\"))) (Int \"4\"))");
}

TEST_CASE("shallow filtering soundness audited on parsed forests") {
    Rig rig("mini-ml.def");
    const ShallowFilter& filter = rig.pipeline.filter;
    for (std::string input :
         {std::string("1 + 2 + 3"), std::string("if ( 1 ) 2 + 3"),
          std::string("match x with a -> 1 + 2 b -> if ( 1 ) 2")}) {
        INFO(input);
        ParseResult r = rig.run(input, ParseMode::None);
        REQUIRE(r.success);
        Forest& f = r.forest;
        ForestExpander ex(f);
        for (NodeId root : ex.expand(r.root)) {
            // audit: no tree node has a filtered child at a filtered position
            std::vector<NodeId> work{root};
            while (!work.empty()) {
                NodeId id = work.back();
                work.pop_back();
                const ForestNode& n = f[id];
                if (n.kind != ForestNode::Kind::Prod) continue;
                const TableProduction& tp = rig.table.productions[n.prod];
                for (std::size_t k = 0; k < tp.argPositions.size(); ++k) {
                    NodeId child = n.children[tp.argPositions[k]];
                    if (f[child].kind != ForestNode::Kind::Prod) continue;
                    CHECK_FALSE(filter.filtered(n.prod, static_cast<int>(k),
                                                f[child].prod));
                }
                for (NodeId c : n.children) work.push_back(c);
            }
        }
    }
}

TEST_CASE("dangling else resolves to the closest if") {
    Rig rig("dangling-else.def");
    std::string input = "if ( 1 ) if ( 2 ) 3 else if ( 4 ) 5 else 6";
    ParseResult dd = rig.run(input, ParseMode::DataDep);
    REQUIRE(dd.success);
    CHECK(dd.stats.ambiguityClusters == 0);
    CHECK(rig.ast(dd, input) ==
          "(If (Int \"1\") (IfElse (Int \"2\") (Int \"3\") (IfElse (Int \"4\") "
          "(Int \"5\") (Int \"6\"))))");

    ParseResult none = rig.run(input, ParseMode::None);
    REQUIRE(none.success);
    std::set<std::string> trees =
        tree_set(rig.table, none.forest, none.root, decode_utf8(input));
    CHECK(trees.size() >= 2);
    check_spine_sets(rig.table, dd.forest, dd.root, true);
}

TEST_CASE("parsing is deterministic run to run") {
    for (const char* name : {"prefix-add.def", "mini-ml.def"}) {
        INFO(name);
        Rig rig(name);
        SentenceGenerator gen(rig.pipeline.grammar, rig.pipeline.filter, 17);
        for (int i = 0; i < 10; ++i) {
            std::string input = gen.generate(12);
            for (ParseMode mode : {ParseMode::None, ParseMode::DataDep}) {
                ParseResult a = rig.run(input, mode);
                ParseResult b = rig.run(input, mode);
                REQUIRE(a.success == b.success);
                if (!a.success) continue;
                CHECK(forest_dump(rig.table, a.forest, a.root) ==
                      forest_dump(rig.table, b.forest, b.root));
                CHECK(a.stats.nodesCreated == b.stats.nodesCreated);
                CHECK(a.stats.reductionsPerformed == b.stats.reductionsPerformed);
                CHECK(a.stats.reductionsBlocked == b.stats.reductionsBlocked);
            }
        }
    }
}

TEST_CASE("count_ambiguities deduplicates shared clusters") {
    Rig rig("prefix-add.def");
    std::string input = "1 + if 2 + 3";
    ParseResult r = rig.run(input, ParseMode::None);
    REQUIRE(r.success);
    CHECK(r.forest.count_ambiguities(r.root) == r.stats.ambiguityClusters);
    CHECK(r.forest.count_ambiguities(kNoNode) == 0);
}

TEST_CASE("datadep forests satisfy the constraints they were built under") {
    // Post-parse audit: re-running the reduce-time check over the finished
    // forest finds no child whose spine set intersects its position's mask.
    for (const char* name : {"prefix-add.def", "dangling-else.def", "mini-ml.def"}) {
        INFO(name);
        Rig rig(name);
        SentenceGenerator gen(rig.pipeline.grammar, rig.pipeline.filter, 321);
        for (int i = 0; i < 40; ++i) {
            std::string input = gen.generate(12);
            ParseResult r = rig.run(input, ParseMode::DataDep);
            REQUIRE(r.success);
            CHECK(r.forest[r.root].start == 0);
            CHECK(r.forest[r.root].end == decode_utf8(input).size());
            std::vector<NodeId> work{r.root};
            std::set<NodeId> seen;
            while (!work.empty()) {
                NodeId id = work.back();
                work.pop_back();
                if (!seen.insert(id).second) continue;
                const ForestNode& n = r.forest[id];
                for (NodeId c : n.children) work.push_back(c);
                if (n.kind != ForestNode::Kind::Prod) continue;
                for (const PositionConstraint& c :
                     rig.table.constraintsByProd[n.prod]) {
                    const ForestNode& child = r.forest[n.children[c.rhsPosition]];
                    CHECK_FALSE(c.lmMask.intersects(child.leftmostTokens));
                    CHECK_FALSE(c.rmMask.intersects(child.rightmostTokens));
                }
            }
        }
    }
}

TEST_CASE("mode equivalence between rewriting and data-dependent parsing") {
    for (const char* name : {"prefix-add.def", "dangling-else.def", "mini-ml.def"}) {
        INFO(name);
        Pipeline p = fixture_pipeline(name);
        ParseTable dd = build_table(p.grammar, p.filter, &p.contextual);
        NormalizedGrammar rw = rewrite(p.contextual);
        ParseTable rwT = build_table(rw, shallow_conflicts(rw));

        std::vector<std::string> inputs;
        if (std::string(name) == "dangling-else.def") {
            inputs = {"if ( 1 ) if ( 2 ) 3 else 4",
                      "if ( 1 ) if ( 2 ) 3 else if ( 4 ) 5 else 6", "7"};
        } else if (std::string(name) == "prefix-add.def") {
            inputs = {"1 + if 2 + 3", "if 1", "1 + 2 + 3", "if if 1 + 2"};
        } else {
            inputs = {"1 + if ( 2 ) 3 + 4",
                      "match x with a -> match y with b -> 1 c -> 2",
                      "if ( x ) match y with a -> 1 + 2",
                      "( 1 + 2 ) + x"};
        }
        for (const std::string& input : inputs) {
            INFO(input);
            ParseResult a = dpc::parse(dd, input, ParseMode::DataDep);
            ParseResult b = dpc::parse(rwT, input, ParseMode::None);
            REQUIRE(a.success);
            REQUIRE(b.success);
            std::set<std::string> ta =
                tree_set(dd, a.forest, a.root, decode_utf8(input));
            std::set<std::string> tb =
                tree_set(rwT, b.forest, b.root, decode_utf8(input));
            CHECK(ta == tb);
        }
    }
}
