#ifndef DPC_TESTS_FIXTURES_HPP
#define DPC_TESTS_FIXTURES_HPP

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dpc/conflicts.hpp"
#include "dpc/grammar_parser.hpp"
#include "dpc/normalize.hpp"
#include "dpc/table.hpp"

namespace dpc::tests {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string fixture_path(const std::string& name) {
    return std::string(DPC_FIXTURE_DIR) + "/" + name;
}

inline std::string fixture_text(const std::string& name) {
    return read_file(fixture_path(name));
}

inline Grammar fixture_grammar(const std::string& name) {
    return parse_grammar(fixture_text(name));
}

inline NormalizedGrammar fixture_normalized(const std::string& name) {
    return normalize(fixture_grammar(name));
}

struct Pipeline {
    NormalizedGrammar grammar;
    ShallowFilter filter;
    ContextualGrammar contextual;
    TokenUniverse universe;
};

inline Pipeline fixture_pipeline(const std::string& name) {
    Pipeline p;
    p.grammar = fixture_normalized(name);
    p.filter = shallow_conflicts(p.grammar);
    p.contextual = analyze_grammar(p.grammar);
    p.universe = token_universe(p.contextual);
    return p;
}

inline ProductionId prod_id(const NormalizedGrammar& g, const std::string& display) {
    for (const NProduction& p : g.prods)
        if (g.prod_display(p.id) == display) return p.id;
    throw std::runtime_error("no production " + display);
}

} // namespace dpc::tests

#endif // DPC_TESTS_FIXTURES_HPP
