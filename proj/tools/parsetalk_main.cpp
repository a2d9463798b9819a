#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "parsetalk/harness.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// "1..20" or "1,5,9" or "7".
std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  std::vector<std::uint64_t> out;
  auto dots = spec.find("..");
  if (dots != std::string::npos) {
    std::uint64_t lo = std::stoull(spec.substr(0, dots));
    std::uint64_t hi = std::stoull(spec.substr(dots + 2));
    if (hi < lo) throw CLI::ValidationError("--seeds", "range end before start");
    for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
    return out;
  }
  std::stringstream in(spec);
  std::string part;
  while (std::getline(in, part, ','))
    if (!part.empty()) out.push_back(std::stoull(part));
  if (out.empty()) throw CLI::ValidationError("--seeds", "no seeds given");
  return out;
}

int cmd_run(const std::string& grammar_path, const std::string& kb_path,
            const std::string& corpus_path, const std::string& seeds_spec,
            const std::string& out_dir, const std::string& parsers, std::uint64_t edge_budget,
            bool trace) {
  using namespace parsetalk;
  Grammar g = load_grammar(slurp(grammar_path));
  KnowledgeBase kb = load_kb(slurp(kb_path));
  auto corpus = harness::load_corpus_file(corpus_path);

  harness::RunConfig config;
  config.seeds = parse_seeds(seeds_spec);
  config.edge_budget = edge_budget;
  config.trace = trace;
  config.run_pt = parsers.find("pt") != std::string::npos;
  config.run_cp = parsers.find("cp") != std::string::npos;
  config.run_cpdisc = parsers.find("cpdisc") != std::string::npos;

  harness::RunReport report = harness::run_corpus(g, kb, corpus, config);
  harness::FactorTable factors = harness::compare_reports(report);
  harness::emit_outputs(report, factors, out_dir);

  for (const auto& [metric, mean] : factors.means) {
    std::cout << metric << ": mean=";
    if (mean)
      std::cout << *mean;
    else
      std::cout << "-";
    std::cout << " (included " << factors.included.at(metric) << ", excluded "
              << factors.excluded.at(metric) << ")\n";
  }
  if (!report.confluence_ok) {
    std::cerr << "confluence violation: " << report.confluence_note << "\n";
    return 2;
  }
  std::cout << "outputs written to " << out_dir << "\n";
  return 0;
}

int cmd_parse(const std::string& grammar_path, const std::string& kb_path,
              const std::string& sentence, std::uint64_t seed, bool trace) {
  using namespace parsetalk;
  Grammar g = load_grammar(slurp(grammar_path));
  KnowledgeBase kb = load_kb(slurp(kb_path));
  std::vector<std::string> tokens;
  std::stringstream in(sentence);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);

  CheckCounters counters;
  ParseOptions opts;
  opts.seed = seed;
  opts.trace = trace;
  ParseResult result = parse(tokens, g, kb, counters, opts);
  int n = 0;
  for (const auto& a : result.analyses) {
    std::cout << "analysis " << ++n << ":\n" << harness::format_analysis(*a);
  }
  for (const auto& f : result.fragments) {
    std::cout << "fragment";
    for (auto pos : f->coverage()) std::cout << " " << pos;
    std::cout << "\n";
  }
  for (const auto& s : result.diagnostics.skips) {
    std::cout << "skip at " << s.token << " over";
    for (auto pos : s.skipped_span) std::cout << " " << pos;
    std::cout << "\n";
  }
  for (const auto& b : result.diagnostics.backtracks) std::cout << "backtrack at " << b.token << "\n";
  std::cout << "syn=" << counters.get("PT", Predicate::Syn)
            << " con=" << counters.get("PT", Predicate::Con) << "\n";
  if (trace)
    for (const auto& e : result.trace)
      std::cout << e.step << " " << e.sender << " -> " << e.receiver << " " << e.message
                << (e.sync ? " (sync)" : "") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"restricted-parallel dependency parser and chart baseline"};
  app.require_subcommand(1);

  std::string grammar_path, kb_path, corpus_path, out_dir, sentence;
  std::string seeds_spec = "1..20";
  std::string parsers = "pt,cp,cpdisc";
  std::uint64_t edge_budget = 1'000'000;
  std::uint64_t seed = 1;
  bool trace = false;

  auto* run = app.add_subcommand("run", "run the corpus comparison experiment");
  run->add_option("--grammar", grammar_path)->required();
  run->add_option("--kb", kb_path)->required();
  run->add_option("--corpus", corpus_path)->required();
  run->add_option("--seeds", seeds_spec, "seed range (e.g. 1..20) or comma list");
  run->add_option("--out", out_dir)->required();
  run->add_option("--parsers", parsers, "subset of pt,cp,cpdisc");
  run->add_option("--edge-budget", edge_budget, "chart edge cap before abort");
  run->add_flag("--trace", trace);

  auto* parse_cmd = app.add_subcommand("parse", "parse one sentence incrementally");
  parse_cmd->add_option("--grammar", grammar_path)->required();
  parse_cmd->add_option("--kb", kb_path)->required();
  parse_cmd->add_option("--sentence", sentence)->required();
  parse_cmd->add_option("--seed", seed);
  parse_cmd->add_flag("--trace", trace);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(grammar_path, kb_path, corpus_path, seeds_spec, out_dir, parsers,
                     edge_budget, trace);
    return cmd_parse(grammar_path, kb_path, sentence, seed, trace);
  } catch (const parsetalk::rt::ProtocolViolation& e) {
    std::cerr << "protocol violation: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
