#include "parsetalk/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace parsetalk::harness {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::set<std::string> kKnownFlags = {"grammatical", "ungrammatical", "discontinuous",
                                           "adversarial"};

std::vector<std::string> sigs_of(const std::vector<PhrasePtr>& phrases) {
  std::vector<std::string> out;
  for (const auto& p : phrases) out.push_back(tree_signature(*p));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string fmt_factor(const FactorCell& cell) {
  if (cell.infinite) return "inf";
  if (!cell.factor) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *cell.factor);
  return buf;
}

std::string fmt_mean(const std::optional<double>& mean) {
  if (!mean) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *mean);
  return buf;
}

}  // namespace

std::vector<CorpusEntry> load_corpus(const std::string& text) {
  std::vector<CorpusEntry> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  int last_id = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto parts = split(t, '|');
    if (parts.size() != 3)
      throw std::runtime_error("corpus:" + std::to_string(lineno) +
                               ": expected <id>|<flags>|<tokens>");
    CorpusEntry entry;
    entry.id = std::stoi(trim(parts[0]));
    if (entry.id <= last_id)
      throw std::runtime_error("corpus:" + std::to_string(lineno) +
                               ": ids must be strictly increasing");
    last_id = entry.id;
    for (const auto& f : split(trim(parts[1]), ',')) {
      std::string flag = trim(f);
      if (!kKnownFlags.count(flag))
        throw std::runtime_error("corpus:" + std::to_string(lineno) + ": unknown flag " + flag);
      entry.flags.insert(flag);
    }
    std::istringstream toks(parts[2]);
    std::string tok;
    while (toks >> tok) entry.tokens.push_back(tok);
    if (entry.tokens.empty())
      throw std::runtime_error("corpus:" + std::to_string(lineno) + ": empty sentence");
    out.push_back(std::move(entry));
  }
  return out;
}

std::vector<CorpusEntry> load_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return load_corpus(buf.str());
}

RunReport run_corpus(const Grammar& g, const KnowledgeBase& kb,
                     const std::vector<CorpusEntry>& corpus, const RunConfig& config) {
  RunReport report;
  for (const auto& entry : corpus) {
    SentenceRow row;
    row.id = entry.id;
    row.tokens = entry.tokens;
    row.flags = entry.flags;

    if (config.run_pt) {
      if (config.seeds.empty()) throw std::invalid_argument("run_corpus: no seeds");
      bool first = true;
      Cell canonical;
      std::vector<std::string> canonical_sigs, canonical_frag_sigs;
      for (std::uint64_t seed : config.seeds) {
        CheckCounters counters;
        ParseOptions opts;
        opts.seed = seed;
        opts.parser_tag = kTagPt;
        opts.trace = config.trace;
        ParseResult result = parse(entry.tokens, g, kb, counters, opts);
        Cell cell;
        cell.syn = counters.get(kTagPt, Predicate::Syn);
        cell.con = counters.get(kTagPt, Predicate::Con);
        auto sigs = sigs_of(result.analyses);
        auto frag_sigs = sigs_of(result.fragments);
        if (first) {
          first = false;
          canonical = cell;
          canonical_sigs = sigs;
          canonical_frag_sigs = frag_sigs;
          row.counts[kTagPt] = cell;
          row.analysis_sigs[kTagPt] = sigs;
          row.pt_analyses = result.analyses;
          row.pt_fragments = result.fragments;
          row.pt_diagnostics = result.diagnostics;
        } else if (cell.syn != canonical.syn || cell.con != canonical.con ||
                   sigs != canonical_sigs || frag_sigs != canonical_frag_sigs) {
          report.confluence_ok = false;
          report.confluence_note = "sentence " + std::to_string(entry.id) + ": seed " +
                                   std::to_string(seed) +
                                   " diverges from seed " + std::to_string(config.seeds.front());
        }
      }
    }

    auto run_chart = [&](ChartMode mode, const char* tag) {
      CheckCounters counters;
      ChartOptions opts;
      opts.mode = mode;
      opts.edge_budget = config.edge_budget;
      opts.parser_tag = tag;
      ChartResult result = chart_parse(entry.tokens, g, kb, counters, opts);
      Cell cell;
      cell.syn = counters.get(tag, Predicate::Syn);
      cell.con = counters.get(tag, Predicate::Con);
      cell.aborted = result.aborted;
      cell.note = result.abort_note;
      row.counts[tag] = cell;
      row.analysis_sigs[tag] = sigs_of(result.analyses);
      return result.analyses;
    };
    if (config.run_cp) row.cp_analyses = run_chart(ChartMode::Contiguous, kTagCp);
    if (config.run_cpdisc) row.cpdisc_analyses = run_chart(ChartMode::Disc, kTagCpDisc);

    report.rows.push_back(std::move(row));
  }
  return report;
}

FactorTable compare_reports(const RunReport& report) {
  FactorTable table;
  struct Metric {
    const char* name;
    const char* baseline_tag;
    Predicate predicate;
  };
  const Metric metrics[] = {{"CP/PT syn", kTagCp, Predicate::Syn},
                            {"CP/PT con", kTagCp, Predicate::Con},
                            {"CP.disc/PT syn", kTagCpDisc, Predicate::Syn},
                            {"CP.disc/PT con", kTagCpDisc, Predicate::Con}};
  for (const auto& metric : metrics) {
    double sum = 0;
    std::size_t used = 0, skipped = 0;
    for (const auto& row : report.rows) {
      auto pt = row.counts.find(kTagPt);
      auto base = row.counts.find(metric.baseline_tag);
      if (pt == row.counts.end() || base == row.counts.end()) continue;
      FactorCell cell;
      std::uint64_t ptc = metric.predicate == Predicate::Syn ? pt->second.syn : pt->second.con;
      std::uint64_t bc =
          metric.predicate == Predicate::Syn ? base->second.syn : base->second.con;
      if (base->second.aborted) {
        cell.note = "budget abort: missing value, excluded from mean";
        ++skipped;
      } else if (ptc == 0 && bc == 0) {
        cell.note = "0/0: excluded from mean";
        ++skipped;
      } else if (ptc == 0) {
        cell.infinite = true;
        cell.note = "division by zero: infinite, excluded from mean";
        ++skipped;
      } else {
        cell.factor = static_cast<double>(bc) / static_cast<double>(ptc);
        sum += *cell.factor;
        ++used;
      }
      table.per_sentence[metric.name][row.id] = std::move(cell);
    }
    table.included[metric.name] = used;
    table.excluded[metric.name] = skipped;
    if (used > 0) table.means[metric.name] = sum / static_cast<double>(used);
  }
  return table;
}

std::string format_analysis(const PhraseState& p) {
  std::vector<std::tuple<Position, std::string, Position>> edges;
  for (const auto& [pos, node] : p.nodes)
    for (const auto& [mod, role] : node.modifiers) edges.emplace_back(pos, role, mod);
  std::sort(edges.begin(), edges.end());
  std::string out;
  for (const auto& [head, role, mod] : edges)
    out += "edge " + std::to_string(head) + " -" + role + "-> " + std::to_string(mod) + "\n";
  return out;
}

void emit_outputs(const RunReport& report, const FactorTable& factors,
                  const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto open = [&](const char* name) {
    std::ofstream out(fs::path(out_dir) / name, std::ios::binary);
    if (!out) throw std::runtime_error(std::string("cannot write ") + name + " in " + out_dir);
    return out;
  };

  {
    auto out = open("counts.csv");
    out << "sentence_id,parser,predicate,count\n";
    for (const auto& row : report.rows)
      for (const auto& [tag, cell] : row.counts) {
        if (cell.aborted) {
          // Missing values, never zeros.
          out << row.id << "," << tag << ",syn,\n";
          out << row.id << "," << tag << ",con,\n";
        } else {
          out << row.id << "," << tag << ",syn," << cell.syn << "\n";
          out << row.id << "," << tag << ",con," << cell.con << "\n";
        }
      }
  }

  {
    auto out = open("factors.csv");
    out << "metric,sentence_id,factor\n";
    for (const auto& [metric, cells] : factors.per_sentence)
      for (const auto& [id, cell] : cells)
        out << metric << "," << id << "," << fmt_factor(cell) << "\n";
    for (const auto& [metric, mean] : factors.means)
      out << metric << ",mean," << fmt_mean(mean) << "\n";
  }

  auto write_fig = [&](const char* name, Predicate p) {
    auto out = open(name);
    out << "# sentence_id PT CP CP.disc\n";
    for (const auto& row : report.rows) {
      out << row.id;
      for (const char* tag : {kTagPt, kTagCp, kTagCpDisc}) {
        auto it = row.counts.find(tag);
        if (it == row.counts.end() || it->second.aborted)
          out << " -";
        else
          out << " " << (p == Predicate::Syn ? it->second.syn : it->second.con);
      }
      out << "\n";
    }
  };
  write_fig("fig4.dat", Predicate::Syn);
  write_fig("fig5.dat", Predicate::Con);

  {
    auto out = open("summary.txt");
    out << "corpus run summary\n";
    out << "==================\n\n";
    for (const auto& row : report.rows) {
      out << "sentence " << row.id << ":";
      for (const auto& tok : row.tokens) out << " " << tok;
      out << "\n  flags:";
      for (const auto& f : row.flags) out << " " << f;
      out << "\n";
      for (const auto& [tag, cell] : row.counts) {
        if (cell.aborted)
          out << "  " << tag << ": aborted (" << cell.note << ")\n";
        else
          out << "  " << tag << ": syn=" << cell.syn << " con=" << cell.con << "\n";
      }
      auto emit_block = [&](const char* tag, const std::vector<PhrasePtr>& analyses) {
        int n = 0;
        for (const auto& a : analyses) {
          out << "  analysis " << tag << " " << ++n << ":\n";
          std::istringstream lines(format_analysis(*a));
          std::string line;
          while (std::getline(lines, line)) out << "    " << line << "\n";
        }
      };
      emit_block(kTagPt, row.pt_analyses);
      for (const auto& f : row.pt_fragments) {
        out << "  fragment";
        for (Position pos : f->coverage()) out << " " << pos;
        out << "\n";
      }
      for (const auto& s : row.pt_diagnostics.skips) {
        out << "  skip at " << s.token << " over";
        for (Position pos : s.skipped_span) out << " " << pos;
        out << "\n";
      }
      for (const auto& b : row.pt_diagnostics.backtracks)
        out << "  backtrack at " << b.token << "\n";
      emit_block(kTagCp, row.cp_analyses);
      emit_block(kTagCpDisc, row.cpdisc_analyses);
      out << "\n";
    }
    out << "reduction factors (unweighted means over included sentences)\n";
    for (const auto& [metric, mean] : factors.means)
      out << "  " << metric << ": mean=" << fmt_mean(mean) << " included=" <<
          factors.included.at(metric) << " excluded=" << factors.excluded.at(metric) << "\n";
    out << "  reference ranges from the original experiment: 4-5 (vs. CP), 6-9 (vs. CP.disc)\n";
    out << "  note: the baseline omits subsumption-based redundancy checking, which biases\n";
    out << "  the comparison against large factors (conservative reproduction)\n";
    out << (report.confluence_ok ? "confluence: ok\n"
                                 : "confluence: VIOLATION - " + report.confluence_note + "\n");
  }
}

}  // namespace parsetalk::harness
