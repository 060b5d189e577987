#include <catch2/catch_amalgamated.hpp>

#include "dpc/grammar_parser.hpp"
#include "dpc/rewrite.hpp"
#include "dpc/table.hpp"
#include "dpc/table_io.hpp"

#include "support/fixtures.hpp"

using namespace dpc;
using namespace dpc::tests;

namespace {

ParseTable fixture_table(const std::string& name, bool withMeta) {
    Pipeline p = fixture_pipeline(name);
    return build_table(p.grammar, p.filter, withMeta ? &p.contextual : nullptr);
}

} // namespace

TEST_CASE("a one-production grammar builds the minimal automaton") {
    std::string text =
        "start symbol S\n"
        "context-free syntax\n"
        "  S.A = \"a\"\n";
    NormalizedGrammar g = normalize(parse_grammar(text));
    ParseTable t = build_table(g, {});

    int shifts = 0, reduces = 0, accepts = 0;
    for (const TableState& st : t.states)
        for (const auto& cell : st.actions)
            for (const Action& a : cell) {
                if (a.kind == Action::Kind::Shift) ++shifts;
                if (a.kind == Action::Kind::Reduce) ++reduces;
                if (a.kind == Action::Kind::Accept) ++accepts;
            }
    CHECK(shifts >= 2);  // 'a' and the EOF sentinel
    CHECK(reduces >= 2); // "a" literal and S.A
    CHECK(accepts == 1);
}

TEST_CASE("alphabet intervals are disjoint, sorted, and cover all actions") {
    ParseTable t = fixture_table("mini-ml.def", true);
    for (std::size_t i = 0; i < t.alphabet.size(); ++i) {
        CHECK(t.alphabet[i].lo <= t.alphabet[i].hi);
        if (i > 0) CHECK(t.alphabet[i - 1].hi < t.alphabet[i].lo);
    }
    for (const TableState& st : t.states)
        CHECK(st.actions.size() == t.alphabet.size());
    // every character of a class maps to exactly one interval
    CHECK(t.interval_of('z') >= 0);
    CHECK(t.interval_of(kEofCodepoint) >= 0);
    CHECK(t.interval_of(0x1F600) == -1); // not in any class
}

TEST_CASE("datadep metadata is additive: states, actions and gotos agree") {
    ParseTable plain = fixture_table("prefix-add.def", false);
    ParseTable meta = fixture_table("prefix-add.def", true);
    CHECK(serialize_table_core(plain) == serialize_table_core(meta));
    CHECK(plain.constraintMeta.empty());
    CHECK(plain.universeMembers.empty());
    CHECK_FALSE(meta.constraintMeta.empty());
}

TEST_CASE("constraint metadata of the prefix-add grammar") {
    Pipeline p = fixture_pipeline("prefix-add.def");
    ParseTable t = build_table(p.grammar, p.filter, &p.contextual);
    ProductionId add = prod_id(p.grammar, "Exp.Add");
    ProductionId iff = prod_id(p.grammar, "Exp.If");

    REQUIRE(t.universeMembers == std::vector<ProductionId>{iff});
    REQUIRE(t.constraintMeta.size() == 1);
    const PositionConstraint& c = t.constraintMeta[0];
    CHECK(c.production == add);
    CHECK(c.rhsPosition == 0);
    CHECK(c.lmMask.to_hex() == "0");
    CHECK(c.rmMask.to_hex() == "1"); // bit 0 = Exp.If
}

TEST_CASE("serialized tables round-trip bit-exactly") {
    for (const char* name : {"operator-style.def", "prefix-add.def", "mini-ml.def"}) {
        INFO(name);
        ParseTable t = fixture_table(name, true);
        t.grammarHash = fnv1a_hex(fixture_text(name));
        std::string payload = serialize_table(t);
        ParseTable u = deserialize_table(payload);
        CHECK(serialize_table(u) == payload);
        CHECK(u.states.size() == t.states.size());
        CHECK(u.universeMembers == t.universeMembers);
        CHECK(u.constraintMeta == t.constraintMeta);
        CHECK(u.productions == t.productions);
        CHECK(u.sorts == t.sorts);
    }
}

TEST_CASE("table deserialization rejects bad payloads") {
    ParseTable t = fixture_table("prefix-add.def", true);
    std::string payload = serialize_table(t);

    SECTION("version mismatch") {
        std::string bad = payload;
        std::size_t pos = bad.find("\"formatVersion\": 1");
        REQUIRE(pos != std::string::npos);
        bad.replace(pos, 18, "\"formatVersion\": 9");
        CHECK_THROWS_WITH(deserialize_table(bad),
                          Catch::Matchers::ContainsSubstring("version mismatch"));
    }
    SECTION("truncated payload") {
        CHECK_THROWS_WITH(deserialize_table(payload.substr(0, payload.size() / 2)),
                          Catch::Matchers::ContainsSubstring("truncated"));
    }
    SECTION("checksum failure") {
        // Flip a digit inside the body without breaking JSON syntax.
        std::size_t pos = payload.find("\"arity\": 1");
        REQUIRE(pos != std::string::npos);
        std::string bad = payload;
        bad.replace(pos, 10, "\"arity\": 7");
        CHECK_THROWS_WITH(deserialize_table(bad),
                          Catch::Matchers::ContainsSubstring("checksum"));
    }
}

TEST_CASE("rewritten tables are strictly larger on conflict fixtures") {
    // Note: on the 3-production prefix-add grammar the duplicated
    // productions are outweighed by saved goto-filter splits, so the growth
    // claim is checked on the realistic fixtures.
    for (const char* name : {"mini-ml.def", "mini-java-stmt.def"}) {
        INFO(name);
        Pipeline p = fixture_pipeline(name);
        ParseTable orig = build_table(p.grammar, p.filter, &p.contextual);
        NormalizedGrammar rw = rewrite(p.contextual);
        ParseTable rwTable = build_table(rw, shallow_conflicts(rw));
        CHECK(rwTable.states.size() > orig.states.size());
    }
}

TEST_CASE("hidden left recursion is rejected with a diagnostic") {
    std::string text =
        "start symbol S\n"
        "context-free syntax\n"
        "  S.X = B* S [x]\n"
        "  S.Y = [y]\n"
        "  B.B = [b]\n";
    NormalizedGrammar g = normalize(parse_grammar(text));
    CHECK_THROWS_WITH(build_table(g, {}),
                      Catch::Matchers::ContainsSubstring("hidden left recursion"));
}

TEST_CASE("derivation cycles are rejected with a diagnostic") {
    std::string text =
        "start symbol A\n"
        "context-free syntax\n"
        "  A = B\n"
        "  B = A\n"
        "  A.X = [x]\n";
    NormalizedGrammar g = normalize(parse_grammar(text));
    CHECK_THROWS_WITH(build_table(g, {}),
                      Catch::Matchers::ContainsSubstring("cyclic"));
}

TEST_CASE("goto transitions are filtered by the shallow filter") {
    Pipeline p = fixture_pipeline("operator-style.def");
    ParseTable t = build_table(p.grammar, p.filter, &p.contextual);
    ProductionId add = prod_id(p.grammar, "Exp.Add");
    ProductionId iff = prod_id(p.grammar, "Exp.If");
    ProductionId intP = prod_id(p.grammar, "Exp.Int");

    // (Add, 0, If) is filtered: no goto on If may advance Add's dot over its
    // left argument, while a goto on Int somewhere must.
    bool intAdvancesAdd = false;
    for (const TableState& st : t.states) {
        if (st.gotos.count(iff)) {
            for (const Item& it : t.states[st.gotos.at(iff)].kernel)
                CHECK_FALSE((it.production == add && it.dot == 1));
        }
        if (st.gotos.count(intP)) {
            for (const Item& it : t.states[st.gotos.at(intP)].kernel)
                if (it.production == add && it.dot == 1) intAdvancesAdd = true;
        }
    }
    CHECK(intAdvancesAdd);

    // Left associativity: no goto on Add advances Add's dot over its right
    // argument (position 4 after layout insertion).
    for (const TableState& st : t.states) {
        if (!st.gotos.count(add)) continue;
        for (const Item& it : t.states[st.gotos.at(add)].kernel)
            CHECK_FALSE((it.production == add && it.dot == 5));
    }
}
