#ifndef DPC_REPORT_HPP
#define DPC_REPORT_HPP

#include <sstream>
#include <string>

#include <json.hpp>

#include "dpc/conflicts.hpp"

namespace dpc {

/// Conflict analysis report: shallow filter size, deep conflicts by class,
/// and the token universe with bit assignments.
inline std::string analyze_text_report(const NormalizedGrammar& g,
                                       const ShallowFilter& filter,
                                       const ContextualGrammar& cg,
                                       const TokenUniverse& universe) {
    std::ostringstream out;
    out << "shallow filter: " << filter.size() << " parent/child entries\n";
    out << "deep conflicts: " << cg.conflicts.size() << "\n";
    for (const DeepConflict& c : cg.conflicts) {
        out << "  " << to_string(c.cls) << " at " << g.prod_display(c.production)
            << " argument " << c.argPosition << " ("
            << (c.side == DeepConflict::Side::Leftmost ? "leftmost" : "rightmost")
            << " spine) forbids";
        for (ProductionId f : c.forbidden) out << " " << g.prod_display(f);
        out << "\n";
    }
    out << "token universe: " << universe.size() << " watched production"
        << (universe.size() == 1 ? "" : "s") << "\n";
    for (std::size_t i = 0; i < universe.members.size(); ++i)
        out << "  bit " << i << " = " << g.prod_display(universe.members[i]) << "\n";
    return out.str();
}

inline std::string analyze_json_report(const NormalizedGrammar& g,
                                       const ShallowFilter& filter,
                                       const ContextualGrammar& cg,
                                       const TokenUniverse& universe) {
    nlohmann::json doc;
    doc["shallowFilterSize"] = filter.size();
    nlohmann::json conflicts = nlohmann::json::array();
    for (const DeepConflict& c : cg.conflicts) {
        nlohmann::json jc;
        jc["class"] = to_string(c.cls);
        jc["production"] = g.prod_display(c.production);
        jc["argument"] = c.argPosition;
        jc["side"] = c.side == DeepConflict::Side::Leftmost ? "leftmost" : "rightmost";
        nlohmann::json forb = nlohmann::json::array();
        for (ProductionId f : c.forbidden) forb.push_back(g.prod_display(f));
        jc["forbidden"] = std::move(forb);
        conflicts.push_back(std::move(jc));
    }
    doc["deepConflicts"] = std::move(conflicts);
    nlohmann::json universeJson = nlohmann::json::array();
    for (std::size_t i = 0; i < universe.members.size(); ++i)
        universeJson.push_back({{"bit", i},
                                {"production", g.prod_display(universe.members[i])}});
    doc["tokenUniverse"] = std::move(universeJson);
    return doc.dump(1) + "\n";
}

} // namespace dpc

#endif // DPC_REPORT_HPP
