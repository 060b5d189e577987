#ifndef DPC_BENCH_HPP
#define DPC_BENCH_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpc/conflicts.hpp"
#include "dpc/engine.hpp"
#include "dpc/grammar_parser.hpp"
#include "dpc/normalize.hpp"
#include "dpc/rewrite.hpp"
#include "dpc/table.hpp"

namespace dpc {

class BenchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BenchConfig {
    std::string grammarPath;
    std::string corpusDir;
    std::vector<std::string> modes; // subset of {"none","rewrite","datadep"}
    int forks = 15;
    int warmups = 0;
    bool csv = false;
    std::string outPath; // empty = stdout
};

/// One timed batch-parse: a (mode, partition, fork) measurement.
struct BenchRow {
    std::string mode;
    std::string partition;
    int fork = 0;
    double seconds = 0;
    std::uint64_t files = 0;
    std::uint64_t ambiguities = 0;
    std::uint64_t blocked = 0;
};

struct BenchAggregate {
    std::string mode;
    std::string partition;
    double totalSeconds = 0;
    double median = 0;
    double mad = 0;
    std::uint64_t files = 0;
    std::uint64_t filesWithAmbiguities = 0;
    std::uint64_t blocked = 0;
    std::optional<double> speedupVsRewrite; // time(rewrite)/time(this)
    std::optional<double> costVsNone;       // time(this)/time(none)
};

struct BenchReport {
    std::vector<BenchRow> rows;
    std::vector<BenchAggregate> aggregates;
};

inline double median_of(std::vector<double> xs) {
    if (xs.empty()) return 0;
    std::sort(xs.begin(), xs.end());
    std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
}

/// Median absolute deviation: median of |x - median(xs)|.
inline double mad_of(const std::vector<double>& xs) {
    if (xs.empty()) return 0;
    double med = median_of(xs);
    std::vector<double> dev;
    dev.reserve(xs.size());
    for (double x : xs) dev.push_back(std::fabs(x - med));
    return median_of(dev);
}

inline std::string bench_csv(const BenchReport& r) {
    std::ostringstream out;
    out << "mode,partition,fork,seconds,files,ambiguities,blocked\n";
    for (const BenchRow& row : r.rows) {
        out << row.mode << ',' << row.partition << ',' << row.fork << ','
            << std::setprecision(9) << std::fixed << row.seconds << ','
            << row.files << ',' << row.ambiguities << ',' << row.blocked << '\n';
    }
    return out.str();
}

inline std::vector<BenchRow> parse_bench_csv(const std::string& text) {
    std::vector<BenchRow> rows;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw BenchError("empty benchmark csv");
    if (line != "mode,partition,fork,seconds,files,ambiguities,blocked")
        throw BenchError("unexpected benchmark csv header: " + line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        BenchRow row;
        std::string field;
        auto take = [&]() {
            if (!std::getline(ls, field, ',')) throw BenchError("short csv row");
            return field;
        };
        row.mode = take();
        row.partition = take();
        row.fork = std::stoi(take());
        row.seconds = std::stod(take());
        row.files = std::stoull(take());
        row.ambiguities = std::stoull(take());
        row.blocked = std::stoull(take());
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Recomputes aggregates and the derived speedup/cost columns from raw rows.
inline std::vector<BenchAggregate> aggregate_bench(const std::vector<BenchRow>& rows) {
    std::map<std::pair<std::string, std::string>, std::vector<const BenchRow*>> groups;
    for (const BenchRow& r : rows) groups[{r.mode, r.partition}].push_back(&r);

    std::map<std::string, double> medianByKey;
    std::vector<BenchAggregate> out;
    for (auto& [key, gr] : groups) {
        BenchAggregate a;
        a.mode = key.first;
        a.partition = key.second;
        std::vector<double> secs;
        for (const BenchRow* r : gr) {
            secs.push_back(r->seconds);
            a.totalSeconds += r->seconds;
        }
        a.median = median_of(secs);
        a.mad = mad_of(secs);
        a.files = gr.front()->files;
        a.filesWithAmbiguities = gr.front()->ambiguities;
        a.blocked = gr.front()->blocked;
        medianByKey[key.first + "/" + key.second] = a.median;
        out.push_back(std::move(a));
    }
    for (BenchAggregate& a : out) {
        auto rewriteIt = medianByKey.find("rewrite/" + a.partition);
        if (rewriteIt != medianByKey.end() && a.median > 0)
            a.speedupVsRewrite = rewriteIt->second / a.median;
        auto noneIt = medianByKey.find("none/" + a.partition);
        if (noneIt != medianByKey.end() && noneIt->second > 0)
            a.costVsNone = a.median / noneIt->second;
    }
    return out;
}

inline std::string bench_text_report(const std::vector<BenchAggregate>& aggs) {
    std::ostringstream out;
    out << std::left << std::setw(10) << "mode" << std::setw(20) << "partition"
        << std::right << std::setw(12) << "median(s)" << std::setw(12) << "mad(s)"
        << std::setw(8) << "files" << std::setw(8) << "amb" << std::setw(10)
        << "blocked" << std::setw(10) << "speedup" << std::setw(8) << "cost"
        << "\n";
    auto ratio = [](const std::optional<double>& v) {
        if (!v) return std::string("n/a");
        std::ostringstream s;
        s << std::fixed << std::setprecision(2) << *v << "x";
        return s.str();
    };
    for (const BenchAggregate& a : aggs) {
        out << std::left << std::setw(10) << a.mode << std::setw(20) << a.partition
            << std::right << std::fixed << std::setprecision(6) << std::setw(12)
            << a.median << std::setw(12) << a.mad << std::setw(8) << a.files
            << std::setw(8) << a.filesWithAmbiguities << std::setw(10) << a.blocked
            << std::setw(10) << ratio(a.speedupVsRewrite) << std::setw(8)
            << ratio(a.costVsNone) << "\n";
    }
    return out.str();
}

namespace detail {

struct PreparedMode {
    std::string name;
    ParseTable table;
    ParseMode parseMode = ParseMode::None;
};

/// Tables per benchmark mode, cached by (grammar hash, mode).
class TableCache {
public:
    const ParseTable& get(const std::string& grammarText, const std::string& mode) {
        std::string key = fnv1a_hex(grammarText) + "/" + mode;
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;

        NormalizedGrammar g = normalize(parse_grammar(grammarText));
        ShallowFilter filter = shallow_conflicts(g);
        ParseTable t;
        if (mode == "none") {
            t = build_table(g, filter);
        } else if (mode == "datadep") {
            ContextualGrammar cg = analyze_grammar(g);
            t = build_table(g, filter, &cg);
        } else if (mode == "rewrite") {
            ContextualGrammar cg = analyze_grammar(g);
            NormalizedGrammar rw = rewrite(cg);
            t = build_table(rw, shallow_conflicts(rw));
        } else {
            throw BenchError("unknown mode '" + mode + "'");
        }
        t.grammarHash = fnv1a_hex(grammarText);
        return cache_.emplace(key, std::move(t)).first->second;
    }

private:
    std::map<std::string, ParseTable> cache_;
};

} // namespace detail

/// Runs the benchmark: per requested mode and per corpus partition, batch
/// parses every file `forks` times with fresh parser state, timing only the
/// parse loop. Work counters must match across forks by construction.
inline BenchReport run_bench(const BenchConfig& cfg) {
    namespace fs = std::filesystem;
    if (cfg.forks < 1) throw BenchError("forks must be >= 1");
    if (cfg.modes.empty()) throw BenchError("no benchmark modes requested");

    std::ifstream in(cfg.grammarPath, std::ios::binary);
    if (!in) throw BenchError("cannot read grammar " + cfg.grammarPath);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string grammarText = ss.str();

    detail::TableCache cache;
    std::vector<detail::PreparedMode> prepared;
    for (const std::string& mode : cfg.modes) {
        detail::PreparedMode pm;
        pm.name = mode;
        pm.table = cache.get(grammarText, mode);
        pm.parseMode = mode == "datadep" ? ParseMode::DataDep : ParseMode::None;
        prepared.push_back(std::move(pm));
    }

    struct Partition {
        std::string name;
        std::vector<std::string> fileNames;
        std::vector<std::vector<std::int32_t>> inputs; // decoded ahead of timing
    };
    std::vector<Partition> partitions;
    for (const char* part : {"with-conflicts", "without-conflicts"}) {
        Partition p;
        p.name = part;
        fs::path dir = fs::path(cfg.corpusDir) / part;
        if (fs::exists(dir)) {
            std::vector<fs::path> paths;
            for (const auto& entry : fs::directory_iterator(dir))
                if (entry.is_regular_file()) paths.push_back(entry.path());
            std::sort(paths.begin(), paths.end());
            for (const fs::path& path : paths) {
                std::ifstream f(path, std::ios::binary);
                std::ostringstream fss;
                fss << f.rdbuf();
                p.fileNames.push_back(path.filename().string());
                p.inputs.push_back(decode_utf8(fss.str()));
            }
        }
        partitions.push_back(std::move(p));
    }

    // Forks are interleaved round-robin across modes so slow clock or
    // frequency drift lands on every mode equally; each fork still parses
    // the whole partition with fresh parser state.
    BenchReport report;
    for (const Partition& part : partitions) {
        for (int fork = -cfg.warmups; fork < cfg.forks; ++fork) {
            for (const detail::PreparedMode& pm : prepared) {
                std::uint64_t ambiguities = 0, blocked = 0;
                auto t0 = std::chrono::steady_clock::now();
                for (std::size_t i = 0; i < part.inputs.size(); ++i) {
                    ParseResult r = parse(pm.table, part.inputs[i], pm.parseMode);
                    if (!r.success)
                        throw BenchError("benchmark aborted: " + part.name + "/" +
                                         part.fileNames[i] +
                                         " does not parse in mode " + pm.name);
                    if (r.stats.ambiguityClusters > 0) ++ambiguities;
                    blocked += r.stats.reductionsBlocked;
                }
                auto t1 = std::chrono::steady_clock::now();
                if (fork < 0) continue;
                BenchRow row;
                row.mode = pm.name;
                row.partition = part.name;
                row.fork = fork;
                row.seconds = std::chrono::duration<double>(t1 - t0).count();
                row.files = part.inputs.size();
                row.ambiguities = ambiguities;
                row.blocked = blocked;
                report.rows.push_back(std::move(row));
            }
        }
    }
    report.aggregates = aggregate_bench(report.rows);
    return report;
}

} // namespace dpc

#endif // DPC_BENCH_HPP
