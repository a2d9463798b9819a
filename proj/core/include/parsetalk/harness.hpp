#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "parsetalk/chart.hpp"
#include "parsetalk/parser.hpp"

namespace parsetalk::harness {

inline constexpr const char* kTagPt = "PT";
inline constexpr const char* kTagCp = "CP";
inline constexpr const char* kTagCpDisc = "CP.disc";

struct CorpusEntry {
  int id = 0;
  std::set<std::string> flags;  // grammatical | ungrammatical | discontinuous | adversarial
  std::vector<std::string> tokens;
};

// Line format: `<id>|<flag>[,<flag>...]|<token> <token> ...`; '#' comments
// and blank lines ignored. Ids must be unique and strictly increasing.
std::vector<CorpusEntry> load_corpus(const std::string& text);
std::vector<CorpusEntry> load_corpus_file(const std::string& path);

struct Cell {
  std::uint64_t syn = 0;
  std::uint64_t con = 0;
  bool aborted = false;  // budget abort: a missing value, never a zero
  std::string note;
};

struct SentenceRow {
  int id = 0;
  std::vector<std::string> tokens;
  std::set<std::string> flags;
  std::map<std::string, Cell> counts;  // parser tag -> cell
  // Canonical analysis signatures per parser tag (sorted, deduplicated).
  std::map<std::string, std::vector<std::string>> analysis_sigs;
  std::vector<PhrasePtr> pt_analyses;
  std::vector<PhrasePtr> pt_fragments;
  std::vector<PhrasePtr> cp_analyses;
  std::vector<PhrasePtr> cpdisc_analyses;
  ParseDiagnostics pt_diagnostics;
};

struct RunConfig {
  std::vector<std::uint64_t> seeds;  // PT runs once per seed
  bool run_pt = true;
  bool run_cp = true;
  bool run_cpdisc = true;
  std::uint64_t edge_budget = 1'000'000;
  bool trace = false;
};

struct RunReport {
  std::vector<SentenceRow> rows;
  bool confluence_ok = true;
  std::string confluence_note;
};

// Parses every corpus sentence with the configured parsers and collects the
// predicate-call counts. PT counters and analysis sets must be identical
// across all seeds; a divergence is reported as a confluence violation.
RunReport run_corpus(const Grammar& g, const KnowledgeBase& kb,
                     const std::vector<CorpusEntry>& corpus, const RunConfig& config);

struct FactorCell {
  std::optional<double> factor;  // nullopt: excluded (abort or 0/0)
  bool infinite = false;         // PT count 0 with nonzero baseline count
  std::string note;
};

struct FactorTable {
  // metric name ("CP/PT syn", ...) -> per-sentence factors keyed by id.
  std::map<std::string, std::map<int, FactorCell>> per_sentence;
  // Unweighted mean over the included cells per metric.
  std::map<std::string, std::optional<double>> means;
  std::map<std::string, std::size_t> included;
  std::map<std::string, std::size_t> excluded;
};

FactorTable compare_reports(const RunReport& report);

// `edge <head-pos> -<role>-> <mod-pos>` lines in (head, modifier) order.
std::string format_analysis(const PhraseState& p);

// Writes counts.csv, factors.csv, fig4.dat (SYN), fig5.dat (CON) and
// summary.txt. Byte-deterministic for identical reports.
void emit_outputs(const RunReport& report, const FactorTable& factors,
                  const std::string& out_dir);

}  // namespace parsetalk::harness
