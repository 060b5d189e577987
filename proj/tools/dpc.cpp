// dpc: declarative disambiguation of deep priority conflicts.
//
// Subcommands: analyze, rewrite, tablegen, parse, bench, gen-corpus.
// Exit codes: 0 success, 1 usage, 2 grammar error, 3 parse failure,
// 4 benchmark abort.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpc/bench.hpp"
#include "dpc/conflicts.hpp"
#include "dpc/engine.hpp"
#include "dpc/grammar_parser.hpp"
#include "dpc/implode.hpp"
#include "dpc/normalize.hpp"
#include "dpc/pretty_print.hpp"
#include "dpc/report.hpp"
#include "dpc/rewrite.hpp"
#include "dpc/sentence_gen.hpp"
#include "dpc/table.hpp"
#include "dpc/table_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitGrammar = 2;
constexpr int kExitParse = 3;
constexpr int kExitBench = 4;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw dpc::GrammarError("cannot read file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw dpc::GrammarError("cannot write file " + path);
    out << content;
}

struct Analysis {
    dpc::NormalizedGrammar grammar;
    dpc::ShallowFilter filter;
    dpc::ContextualGrammar contextual;
    dpc::TokenUniverse universe;
    std::string text;
};

Analysis analyze_file(const std::string& path) {
    Analysis a;
    a.text = read_file(path);
    a.grammar = dpc::normalize(dpc::parse_grammar(a.text));
    a.filter = dpc::shallow_conflicts(a.grammar);
    a.contextual = dpc::analyze_grammar(a.grammar);
    a.universe = dpc::token_universe(a.contextual);
    return a;
}

int cmd_analyze(const std::string& grammarPath, const std::string& format) {
    Analysis a = analyze_file(grammarPath);
    if (format == "json")
        std::cout << dpc::analyze_json_report(a.grammar, a.filter, a.contextual,
                                              a.universe);
    else
        std::cout << dpc::analyze_text_report(a.grammar, a.filter, a.contextual,
                                              a.universe);
    return kExitOk;
}

int cmd_rewrite(const std::string& grammarPath, const std::string& outPath) {
    Analysis a = analyze_file(grammarPath);
    dpc::NormalizedGrammar rw = dpc::rewrite(a.contextual);
    std::string printed = dpc::pretty_print(rw);
    if (outPath.empty())
        std::cout << printed;
    else
        write_file(outPath, printed);
    return kExitOk;
}

int cmd_tablegen(const std::string& grammarPath, const std::string& mode,
                 const std::string& outPath) {
    Analysis a = analyze_file(grammarPath);
    dpc::ParseTable table;
    if (mode == "none") {
        table = dpc::build_table(a.grammar, a.filter);
    } else if (mode == "datadep") {
        table = dpc::build_table(a.grammar, a.filter, &a.contextual);
    } else {
        dpc::NormalizedGrammar rw = dpc::rewrite(a.contextual);
        table = dpc::build_table(rw, dpc::shallow_conflicts(rw));
    }
    table.grammarHash = dpc::fnv1a_hex(a.text);
    write_file(outPath, dpc::serialize_table(table));
    std::cerr << "wrote " << outPath << ": " << table.states.size() << " states, "
              << table.productions.size() << " productions, universe "
              << table.universeMembers.size() << "\n";
    return kExitOk;
}

int cmd_parse(const std::string& tablePath, const std::string& mode,
              const std::string& outKind, bool expectUnambiguous,
              const std::vector<std::string>& files) {
    dpc::ParseTable table;
    try {
        table = dpc::deserialize_table(read_file(tablePath));
    } catch (const dpc::TableIoError& e) {
        std::cerr << "dpc parse: " << e.what() << "\n";
        return kExitGrammar;
    }
    dpc::ParseMode parseMode =
        mode == "none" ? dpc::ParseMode::None : dpc::ParseMode::DataDep;

    int status = kExitOk;
    for (const std::string& file : files) {
        std::vector<std::int32_t> input = dpc::decode_utf8(read_file(file));
        dpc::ParseResult r = dpc::parse(table, input, parseMode);
        nlohmann::json stats{{"file", file},
                             {"success", r.success},
                             {"nodes", r.stats.nodesCreated},
                             {"reductions", r.stats.reductionsPerformed},
                             {"blocked", r.stats.reductionsBlocked},
                             {"ambiguities", r.stats.ambiguityClusters}};
        if (!r.success) {
            std::cerr << file << ": parse failure at offset " << r.failureOffset
                      << ", expected one of " << r.expected << "\n";
            std::cout << stats.dump() << "\n";
            status = kExitParse;
            continue;
        }
        if (outKind == "ast")
            std::cout << dpc::to_sexpr(dpc::implode(table, r.forest, r.root, input))
                      << "\n";
        else if (outKind == "forest")
            std::cout << dpc::forest_dump(table, r.forest, r.root);
        std::cout << stats.dump() << "\n";
        if (expectUnambiguous && r.stats.ambiguityClusters > 0) {
            std::cerr << file << ": ambiguous parse (" << r.stats.ambiguityClusters
                      << " clusters) with --expect-unambiguous\n";
            status = kExitParse;
        }
    }
    return status;
}

int cmd_bench(dpc::BenchConfig cfg) {
    dpc::BenchReport report = dpc::run_bench(cfg);
    std::string output =
        cfg.csv ? dpc::bench_csv(report) : dpc::bench_text_report(report.aggregates);
    if (cfg.outPath.empty())
        std::cout << output;
    else
        write_file(cfg.outPath, output);
    return kExitOk;
}

int cmd_gen_corpus(const std::string& grammarPath, const std::string& outDir,
                   int count, int maxDepth, std::uint64_t seed) {
    Analysis a = analyze_file(grammarPath);
    dpc::ParseTable table = dpc::build_table(a.grammar, a.filter, &a.contextual);
    dpc::SentenceGenerator gen(a.grammar, a.filter, seed);

    namespace fs = std::filesystem;
    fs::create_directories(fs::path(outDir) / "with-conflicts");
    fs::create_directories(fs::path(outDir) / "without-conflicts");

    int written = 0, attempts = 0;
    int withConflicts = 0;
    while (written < count) {
        if (++attempts > count * 50 + 100)
            throw dpc::GrammarError("could not generate enough parseable sentences");
        std::string sentence = gen.generate(maxDepth);
        dpc::ParseResult r = dpc::parse(table, sentence, dpc::ParseMode::DataDep);
        if (!r.success) continue; // deterministic given the seed
        const char* partition =
            r.stats.reductionsBlocked > 0 ? "with-conflicts" : "without-conflicts";
        if (r.stats.reductionsBlocked > 0) ++withConflicts;
        char name[32];
        std::snprintf(name, sizeof name, "%05d.txt", written);
        write_file((fs::path(outDir) / partition / name).string(), sentence + "\n");
        ++written;
    }
    std::cerr << "generated " << written << " sentences: " << withConflicts
              << " with conflicts, " << written - withConflicts << " without\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"scannerless GLR parsing with declarative disambiguation of "
                 "deep priority conflicts"};
    app.require_subcommand(1);

    // analyze
    std::string grammarPath, format = "text";
    CLI::App* analyze = app.add_subcommand("analyze", "report priority conflicts");
    analyze->add_option("grammar", grammarPath, "grammar definition file")
        ->required();
    analyze->add_option("--format", format, "text|json")
        ->check(CLI::IsMember({"text", "json"}));

    // rewrite
    std::string rwGrammar, rwOut;
    CLI::App* rewriteCmd =
        app.add_subcommand("rewrite", "emit the contextual rewriting of a grammar");
    rewriteCmd->add_option("grammar", rwGrammar, "grammar definition file")
        ->required();
    rewriteCmd->add_option("-o,--output", rwOut, "output grammar file");

    // tablegen
    std::string tgGrammar, tgMode = "datadep", tgOut;
    CLI::App* tablegen = app.add_subcommand("tablegen", "generate a parse table");
    tablegen->add_option("grammar", tgGrammar, "grammar definition file")
        ->required();
    tablegen->add_option("--mode", tgMode, "none|rewrite|datadep")
        ->check(CLI::IsMember({"none", "rewrite", "datadep"}));
    tablegen->add_option("-o,--output", tgOut, "output table file")->required();

    // parse
    std::string pTable, pMode = "datadep", pOut = "ast";
    bool pExpectUnambiguous = false;
    std::vector<std::string> pFiles;
    CLI::App* parseCmd = app.add_subcommand("parse", "parse files with a table");
    parseCmd->add_option("--table", pTable, "serialized parse table")->required();
    parseCmd->add_option("--mode", pMode, "none|datadep")
        ->check(CLI::IsMember({"none", "datadep"}));
    parseCmd->add_option("--out", pOut, "ast|forest|stats")
        ->check(CLI::IsMember({"ast", "forest", "stats"}));
    parseCmd->add_flag("--expect-unambiguous", pExpectUnambiguous,
                       "fail when the forest contains ambiguities");
    parseCmd->add_option("files", pFiles, "input files")->required();

    // bench
    dpc::BenchConfig bCfg;
    std::string bModes = "none,rewrite,datadep";
    std::string bFormat = "text";
    CLI::App* bench = app.add_subcommand("bench", "benchmark disambiguation modes");
    bench->add_option("--grammar", bCfg.grammarPath, "grammar definition file")
        ->required();
    bench->add_option("--corpus", bCfg.corpusDir,
                      "corpus directory with with-conflicts/ and "
                      "without-conflicts/ partitions")
        ->required();
    bench->add_option("--modes", bModes, "comma-separated none,rewrite,datadep");
    bench->add_option("--forks", bCfg.forks, "measurement repetitions");
    bench->add_option("--warmups", bCfg.warmups, "untimed repetitions per mode");
    bench->add_option("--format", bFormat, "csv|text")
        ->check(CLI::IsMember({"csv", "text"}));
    bench->add_option("-o,--output", bCfg.outPath, "write the report to a file");

    // gen-corpus
    std::string gGrammar, gOut;
    int gCount = 100, gMaxDepth = 20;
    std::uint64_t gSeed = 1;
    CLI::App* genCorpus =
        app.add_subcommand("gen-corpus", "generate a partitioned random corpus");
    genCorpus->add_option("--grammar", gGrammar, "grammar definition file")
        ->required();
    genCorpus->add_option("-o,--output", gOut, "corpus directory")->required();
    genCorpus->add_option("--count", gCount, "number of sentences");
    genCorpus->add_option("--max-depth", gMaxDepth, "derivation depth bound");
    genCorpus->add_option("--seed", gSeed, "random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*analyze) return cmd_analyze(grammarPath, format);
        if (*rewriteCmd) return cmd_rewrite(rwGrammar, rwOut);
        if (*tablegen) return cmd_tablegen(tgGrammar, tgMode, tgOut);
        if (*parseCmd)
            return cmd_parse(pTable, pMode, pOut, pExpectUnambiguous, pFiles);
        if (*bench) {
            bCfg.csv = bFormat == "csv";
            bCfg.modes.clear();
            std::istringstream ms(bModes);
            std::string mode;
            while (std::getline(ms, mode, ','))
                if (!mode.empty()) bCfg.modes.push_back(mode);
            return cmd_bench(bCfg);
        }
        if (*genCorpus) return cmd_gen_corpus(gGrammar, gOut, gCount, gMaxDepth, gSeed);
    } catch (const dpc::BenchError& e) {
        std::cerr << "dpc: " << e.what() << "\n";
        return kExitBench;
    } catch (const dpc::GrammarError& e) {
        std::cerr << "dpc: " << e.what() << "\n";
        return kExitGrammar;
    } catch (const std::exception& e) {
        std::cerr << "dpc: " << e.what() << "\n";
        return kExitGrammar;
    }
    return kExitUsage;
}
