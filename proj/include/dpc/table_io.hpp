#ifndef DPC_TABLE_IO_HPP
#define DPC_TABLE_IO_HPP

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "dpc/table.hpp"

namespace dpc {

class TableIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

using json = nlohmann::json;

inline json ranges_to_json(const std::vector<CharClass::Range>& rs) {
    json a = json::array();
    for (const auto& r : rs) a.push_back({r.lo, r.hi});
    return a;
}

inline json charclass_to_json(const CharClass& cc) { return ranges_to_json(cc.ranges()); }

inline CharClass charclass_from_json(const json& a) {
    CharClass cc;
    for (const auto& r : a) cc.add(r.at(0).get<std::int32_t>(), r.at(1).get<std::int32_t>());
    return cc;
}

/// Actions of one state as maximal ranges: adjacent alphabet intervals with
/// identical action sets are merged.
inline json state_actions_to_json(const ParseTable& t, const TableState& st) {
    json out = json::array();
    std::size_t n = t.alphabet.size();
    std::size_t i = 0;
    while (i < n) {
        if (st.actions[i].empty()) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && st.actions[j + 1] == st.actions[i] &&
               t.alphabet[j + 1].lo == t.alphabet[j].hi + 1)
            ++j;
        json entry;
        entry["range"] = {t.alphabet[i].lo, t.alphabet[j].hi};
        json acts = json::array();
        for (const Action& a : st.actions[i]) {
            switch (a.kind) {
                case Action::Kind::Shift: acts.push_back({{"shift", a.target}}); break;
                case Action::Kind::Reduce: acts.push_back({{"reduce", a.target}}); break;
                case Action::Kind::Accept: acts.push_back({{"accept", true}}); break;
            }
        }
        entry["actions"] = std::move(acts);
        out.push_back(std::move(entry));
        i = j + 1;
    }
    return out;
}

inline json table_body_to_json(const ParseTable& t) {
    json body;
    body["grammarHash"] = t.grammarHash;
    body["alphabet"] = ranges_to_json(t.alphabet);
    body["startState"] = t.startState;
    body["augmentedProd"] = t.augmentedProd;

    json sorts = json::array();
    for (const TableSort& s : t.sorts) {
        json js;
        js["name"] = s.name;
        js["kind"] = static_cast<int>(s.kind);
        if (s.layout) js["layout"] = true;
        if (!s.rejectSpellings.empty()) js["rejects"] = s.rejectSpellings;
        sorts.push_back(std::move(js));
    }
    body["sorts"] = std::move(sorts);

    json prods = json::array();
    for (const TableProduction& p : t.productions) {
        json jp;
        jp["sort"] = p.sort;
        if (!p.ctor.empty()) jp["ctor"] = p.ctor;
        jp["arity"] = p.arity;
        jp["origin"] = static_cast<int>(p.origin);
        jp["lineage"] = p.lineage;
        if (p.assoc != Assoc::None) jp["assoc"] = static_cast<int>(p.assoc);
        if (p.bracket) jp["bracket"] = true;
        if (p.reject) jp["reject"] = true;
        if (p.injection) jp["injection"] = true;
        jp["args"] = p.argPositions;
        if (!p.followRestriction.empty())
            jp["restriction"] = charclass_to_json(p.followRestriction);
        prods.push_back(std::move(jp));
    }
    body["productions"] = std::move(prods);

    json states = json::array();
    for (const TableState& st : t.states) {
        json js;
        json kernel = json::array();
        for (const Item& it : st.kernel) kernel.push_back({it.production, it.dot});
        js["kernel"] = std::move(kernel);
        js["actions"] = state_actions_to_json(t, st);
        json gotos = json::array();
        for (const auto& [pid, target] : st.gotos) gotos.push_back({pid, target});
        js["gotos"] = std::move(gotos);
        states.push_back(std::move(js));
    }
    body["states"] = std::move(states);

    json universe = json::array();
    for (std::size_t i = 0; i < t.universeMembers.size(); ++i)
        universe.push_back({{"production", t.universeMembers[i]},
                            {"name", t.universeNames[i]},
                            {"bit", i}});
    body["universe"] = std::move(universe);

    json meta = json::array();
    for (const PositionConstraint& c : t.constraintMeta)
        meta.push_back({{"production", c.production},
                        {"position", c.rhsPosition},
                        {"lm", c.lmMask.to_hex()},
                        {"rm", c.rmMask.to_hex()}});
    body["constraintMeta"] = std::move(meta);
    body["rejectSet"] = t.rejectSet;
    return body;
}

} // namespace detail

/// Versioned, checksummed, self-describing text container.
inline std::string serialize_table(const ParseTable& t) {
    detail::json doc;
    doc["format"] = "dpc-parse-table";
    doc["formatVersion"] = ParseTable::kFormatVersion;
    detail::json body = detail::table_body_to_json(t);
    doc["checksum"] = fnv1a_hex(body.dump());
    doc["body"] = std::move(body);
    return doc.dump(1);
}

inline ParseTable deserialize_table(const std::string& data) {
    detail::json doc;
    try {
        doc = detail::json::parse(data);
    } catch (const std::exception& e) {
        throw TableIoError(std::string("truncated or malformed table payload: ") +
                           e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != "dpc-parse-table")
            throw TableIoError("not a parse table file");
        int version = doc.at("formatVersion").get<int>();
        if (version != ParseTable::kFormatVersion)
            throw TableIoError("table format version mismatch: found " +
                               std::to_string(version) + ", expected " +
                               std::to_string(ParseTable::kFormatVersion));
        const detail::json& body = doc.at("body");
        if (doc.at("checksum").get<std::string>() != fnv1a_hex(body.dump()))
            throw TableIoError("table checksum failure");

        ParseTable t;
        t.grammarHash = body.at("grammarHash").get<std::string>();
        for (const auto& r : body.at("alphabet"))
            t.alphabet.push_back({r.at(0).get<std::int32_t>(), r.at(1).get<std::int32_t>()});
        t.startState = body.at("startState").get<std::uint32_t>();
        t.augmentedProd = body.at("augmentedProd").get<ProductionId>();

        for (const auto& js : body.at("sorts")) {
            TableSort s;
            s.name = js.at("name").get<std::string>();
            s.kind = static_cast<NtInfo::Kind>(js.at("kind").get<int>());
            s.layout = js.value("layout", false);
            if (js.contains("rejects"))
                s.rejectSpellings = js.at("rejects").get<std::vector<std::string>>();
            t.sorts.push_back(std::move(s));
        }

        for (const auto& jp : body.at("productions")) {
            TableProduction p;
            p.sort = jp.at("sort").get<int>();
            p.ctor = jp.value("ctor", std::string());
            p.arity = jp.at("arity").get<std::uint32_t>();
            p.origin = static_cast<Origin>(jp.at("origin").get<int>());
            p.lineage = jp.at("lineage").get<ProductionId>();
            p.assoc = static_cast<Assoc>(jp.value("assoc", 0));
            p.bracket = jp.value("bracket", false);
            p.reject = jp.value("reject", false);
            p.injection = jp.value("injection", false);
            p.argPositions = jp.at("args").get<std::vector<int>>();
            if (jp.contains("restriction"))
                p.followRestriction = detail::charclass_from_json(jp.at("restriction"));
            t.productions.push_back(std::move(p));
        }

        for (const auto& js : body.at("states")) {
            TableState st;
            for (const auto& k : js.at("kernel"))
                st.kernel.push_back({k.at(0).get<ProductionId>(), k.at(1).get<int>()});
            st.actions.assign(t.alphabet.size(), {});
            for (const auto& entry : js.at("actions")) {
                std::int32_t lo = entry.at("range").at(0).get<std::int32_t>();
                std::int32_t hi = entry.at("range").at(1).get<std::int32_t>();
                std::vector<Action> acts;
                for (const auto& ja : entry.at("actions")) {
                    if (ja.contains("shift"))
                        acts.push_back({Action::Kind::Shift, ja.at("shift").get<std::uint32_t>()});
                    else if (ja.contains("reduce"))
                        acts.push_back({Action::Kind::Reduce, ja.at("reduce").get<std::uint32_t>()});
                    else
                        acts.push_back({Action::Kind::Accept, 0});
                }
                for (std::size_t iv = 0; iv < t.alphabet.size(); ++iv)
                    if (t.alphabet[iv].lo >= lo && t.alphabet[iv].hi <= hi)
                        st.actions[iv] = acts;
            }
            for (const auto& jg : js.at("gotos"))
                st.gotos[jg.at(0).get<ProductionId>()] = jg.at(1).get<std::uint32_t>();
            t.states.push_back(std::move(st));
        }

        for (const auto& ju : body.at("universe")) {
            t.universeMembers.push_back(ju.at("production").get<ProductionId>());
            t.universeNames.push_back(ju.at("name").get<std::string>());
        }
        for (const auto& jc : body.at("constraintMeta")) {
            PositionConstraint c;
            c.production = jc.at("production").get<ProductionId>();
            c.rhsPosition = jc.at("position").get<int>();
            if (!TokenSet::from_hex(jc.at("lm").get<std::string>(), c.lmMask) ||
                !TokenSet::from_hex(jc.at("rm").get<std::string>(), c.rmMask))
                throw TableIoError("malformed constraint bitset");
            t.constraintMeta.push_back(c);
        }
        t.rejectSet = body.at("rejectSet").get<std::vector<ProductionId>>();
        t.rebuild_caches();
        return t;
    } catch (const TableIoError&) {
        throw;
    } catch (const std::exception& e) {
        throw TableIoError(std::string("truncated or malformed table payload: ") +
                           e.what());
    }
}

/// The states/actions/gotos sections alone, for structural comparisons
/// between tables built in different modes.
inline std::string serialize_table_core(const ParseTable& t) {
    detail::json body = detail::table_body_to_json(t);
    detail::json core;
    core["alphabet"] = body["alphabet"];
    core["startState"] = body["startState"];
    core["states"] = body["states"];
    return core.dump(1);
}

} // namespace dpc

#endif // DPC_TABLE_IO_HPP
