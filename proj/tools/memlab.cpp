// memlab: simulate, analyze and translate mobile membrane systems.
//
// Exit codes: 0 success (validate clean, reach Reached, check fully matched),
// 1 negative answer (validate errors, reach Unreachable, check unmatched),
// 2 a search cap was exceeded, 64 usage error, 65 input parses badly or is
// outside the supported fragment, 66 input file cannot be read.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "memlab/memlab.hpp"

using namespace memlab;

namespace {

constexpr int kNegative = 1;
constexpr int kCapExceeded = 2;
constexpr int kUsage = 64;
constexpr int kDataError = 65;
constexpr int kNoInput = 66;

struct Exit {
  int code;
};

std::string read_input(const std::string& path) {
  if (path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), {});
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "memlab: cannot read '" << path << "'\n";
    throw Exit{kNoInput};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_diagnostics(const std::string& path, const std::vector<Diagnostic>& ds) {
  for (const auto& d : ds) std::cerr << path << ":" << to_string(d) << "\n";
}

SystemDefinition load_system(const std::string& path, const ValidationOptions& vopts) {
  auto res = parse_system(read_input(path), vopts);
  print_diagnostics(path, res.diagnostics);
  if (!res.ok()) throw Exit{kDataError};
  return *res.system;
}

std::size_t state_cap(std::optional<std::size_t> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("MEMLAB_STATE_CAP")) {
    try {
      return static_cast<std::size_t>(std::stoull(env));
    } catch (const std::exception&) {
      std::cerr << "memlab: ignoring malformed MEMLAB_STATE_CAP='" << env << "'\n";
    }
  }
  return kDefaultStateCap;
}

void print_step(std::size_t n, const ApplicationMultiset& fired, const Configuration& next,
                const TimedStepReport* rep, bool machine) {
  const std::string key = canonical_encoding(next);
  if (machine) {
    std::cout << "step " << n << ": " << rule_ids(fired) << " -> " << key << "\n";
    return;
  }
  std::cout << "step " << n << ": rules " << rule_ids(fired) << "\n";
  if (rep && !rep->expired_objects.empty()) {
    std::cout << "  expired:";
    for (const auto& [o, k] : rep->expired_objects)
      for (int i = 0; i < k; ++i) std::cout << " " << to_string(o);
    std::cout << "\n";
  }
  if (rep && !rep->dissolved.empty()) {
    std::cout << "  dissolved:";
    for (const auto& l : rep->dissolved) std::cout << " " << l;
    std::cout << "\n";
  }
  std::cout << render_tree(next);
}

// ---- commands ----

int cmd_validate(const std::string& path, const ValidationOptions& vopts) {
  auto res = parse_system(read_input(path), vopts);
  print_diagnostics(path, res.diagnostics);
  if (!res.ok()) return kNegative;
  std::cout << path << ": ok (" << res.system->rules.size() << " rules)\n";
  return 0;
}

int cmd_step(const std::string& path, bool all, bool machine, const ValidationOptions& vopts,
             const EngineOptions& eopts) {
  auto s = load_system(path, vopts);
  if (!all) {
    TimedStepReport rep;
    auto step = choose_step(s.initial, s, Strategy::First, nullptr, eopts);
    auto next = apply_timed_step(s.initial, step, s, &rep);
    print_step(1, step, next, &rep, machine);
    return 0;
  }
  auto e = timed_successors(s.initial, s, eopts);
  std::size_t i = 0;
  for (const auto& o : e.outcomes) {
    if (machine)
      std::cout << "successor " << ++i << ": " << rule_ids(o.step) << " -> " << o.key << "\n";
    else
      std::cout << "successor " << ++i << ": rules " << rule_ids(o.step) << "\n" << render_tree(o.successor);
  }
  if (e.outcomes.empty()) std::cout << "no rule applies\n";
  if (!e.complete) {
    std::cerr << "memlab: enumeration cap of " << eopts.cap << " search nodes exceeded; list is partial\n";
    return kCapExceeded;
  }
  return 0;
}

int cmd_run(const std::string& path, const std::string& strategy, std::optional<std::uint64_t> seed,
            std::size_t max_steps, bool machine, const ValidationOptions& vopts,
            const EngineOptions& eopts) {
  auto s = load_system(path, vopts);
  if (strategy == "all-breadth") {
    bool complete = true;
    auto frontiers = run_all_breadth(s, max_steps, eopts, &complete);
    for (std::size_t d = 0; d < frontiers.size(); ++d) {
      if (!machine) std::cout << "depth " << d << ": " << frontiers[d].size() << " configurations\n";
      for (const auto& c : frontiers[d]) std::cout << (machine ? "depth " + std::to_string(d) + ": " : "  ")
                                                   << canonical_encoding(c) << "\n";
    }
    if (!complete) {
      std::cerr << "memlab: enumeration cap exceeded; frontiers are partial\n";
      return kCapExceeded;
    }
    return 0;
  }
  const Strategy st = strategy == "random" ? Strategy::Random : Strategy::First;
  auto tr = run(s, st, max_steps, seed.value_or(0), eopts);
  if (machine) {
    std::cout << "init: " << canonical_encoding(s.initial) << "\n";
  } else {
    std::cout << "initial\n" << render_tree(s.initial);
  }
  for (std::size_t i = 0; i < tr.steps.size(); ++i)
    print_step(i + 1, tr.steps[i].report.fired, tr.steps[i].successor, &tr.steps[i].report, machine);
  if (tr.halted)
    std::cout << "halted after " << tr.steps.size() << " steps\n";
  else
    std::cout << "stopped after " << tr.steps.size() << " steps\n";
  return 0;
}

int cmd_reach(const std::string& sys_path, const std::string& target_path, std::optional<std::size_t> cap_flag,
              bool machine, const ValidationOptions& vopts, const EngineOptions& eopts) {
  auto s = load_system(sys_path, vopts);
  std::vector<Diagnostic> ds;
  auto target = parse_configuration(read_input(target_path), &ds);
  print_diagnostics(target_path, ds);
  if (!target) return kDataError;

  const auto cls = classify_mobility(s);
  if (!cls.pure)
    std::cerr << "memlab: note: system is outside the pure-mobility class; the search may not close\n";
  else if (cls.relabeling)
    std::cerr << "memlab: note: rules relabel trigger objects (accepted extension of pure mobility)\n";

  const std::size_t cap = state_cap(cap_flag);
  ReachabilityVerdict v;
  try {
    v = decide_reachability(s, *target, cap, eopts);
  } catch (const Error& e) {
    std::cerr << target_path << ": " << e.what() << "\n";
    return kDataError;
  }
  switch (v.outcome) {
    case ReachOutcome::Reached:
      std::cout << "reached in " << v.path.size() << " steps (" << v.explored << " states explored)\n";
      for (std::size_t i = 0; i < v.path.size(); ++i)
        print_step(i + 1, v.path[i].report.fired, v.path[i].successor, nullptr, machine);
      return 0;
    case ReachOutcome::Unreachable:
      std::cout << "unreachable (" << v.explored << " states, closure complete)\n";
      return kNegative;
    case ReachOutcome::BoundExceeded:
      std::cout << "bound exceeded after " << v.explored << " states at depth " << v.depth << "\n";
      std::cerr << "memlab: state cap " << cap << " exceeded; reachability undecided\n";
      return kCapExceeded;
  }
  return kCapExceeded;
}

template <class Term>
Term load_term(const std::string& path, Parsed<Term> (*parse)(std::string_view)) {
  auto p = parse(read_input(path));
  print_diagnostics(path, p.diagnostics);
  if (!p.ok()) throw Exit{kDataError};
  return *p.value;
}

int cmd_translate(const std::string& from, const std::string& path) {
  if (from == "safe-ambients")
    std::cout << print_system(translate_ambient(load_term<AmbientTerm>(path, parse_ambient)));
  else
    std::cout << print_system(translate_brane(load_term<BraneSystem>(path, parse_brane)));
  return 0;
}

int cmd_check(const std::string& from, const std::string& path, std::size_t depth,
              std::optional<std::size_t> remove, bool machine) {
  CorrespondenceOptions opts{depth, remove};
  CorrespondenceReport rep = from == "safe-ambients"
                                 ? check_correspondence(load_term<AmbientTerm>(path, parse_ambient), opts)
                                 : check_correspondence(load_term<BraneSystem>(path, parse_brane), opts);
  for (const auto& e : rep.entries) {
    if (!machine && e.matched) continue;
    const char* dir = e.direction == CorrespondenceEntry::Direction::Forward ? "forward" : "backward";
    std::cout << dir << " " << (e.matched ? "matched" : "unmatched") << ": " << e.source << " -> " << e.target;
    if (!e.rules.empty()) {
      std::cout << " [";
      for (std::size_t i = 0; i < e.rules.size(); ++i) std::cout << (i ? "," : "") << "r" << e.rules[i];
      std::cout << "]";
    }
    std::cout << "\n";
  }
  std::cout << "matched " << rep.matched << ", unmatched " << rep.unmatched << ", terms explored "
            << rep.terms_explored << ", rules used " << rep.rules_used.size() << "\n";
  return rep.success() ? 0 : kNegative;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memlab: mobile membrane systems"};
  app.require_subcommand(1);
  app.fallthrough();

  bool elementary_only = false;
  bool machine = false;
  std::size_t engine_cap = EngineOptions{}.cap;
  app.add_flag("--elementary-only", elementary_only, "only elementary membranes may move");
  app.add_flag("--machine", machine, "line-oriented output with a stable field order");
  app.add_option("--engine-cap", engine_cap, "search-node bound when enumerating one step")
      ->check(CLI::PositiveNumber);

  std::string file;
  std::string target;

  auto* validate_cmd = app.add_subcommand("validate", "check a .mem system for well-formedness");
  validate_cmd->add_option("file", file, ".mem file or - for stdin")->required();

  bool all = false;
  auto* step_cmd = app.add_subcommand("step", "one maximally parallel step");
  step_cmd->add_option("file", file)->required();
  step_cmd->add_flag("--all", all, "list every maximal successor");

  std::string strategy = "first";
  std::optional<std::uint64_t> seed;
  std::size_t max_steps = 100;
  auto* run_cmd = app.add_subcommand("run", "execute a trace");
  run_cmd->add_option("file", file)->required();
  run_cmd->add_option("--strategy", strategy)->check(CLI::IsMember({"first", "random", "all-breadth"}));
  run_cmd->add_option("--seed", seed, "required with --strategy random");
  run_cmd->add_option("--max-steps", max_steps);

  std::optional<std::size_t> state_cap_flag;
  auto* reach_cmd = app.add_subcommand("reach", "decide reachability of a target configuration");
  reach_cmd->add_option("system", file)->required();
  reach_cmd->add_option("target", target)->required();
  reach_cmd->add_option("--cap", state_cap_flag, "state cap (default: MEMLAB_STATE_CAP or 1000000)");

  std::string from;
  const auto calculi = CLI::IsMember({"safe-ambients", "brane-pep"});
  auto* translate_cmd = app.add_subcommand("translate", "encode a calculus term as a .mem system");
  translate_cmd->add_option("--from", from)->required()->check(calculi);
  translate_cmd->add_option("file", file)->required();

  std::size_t depth = 1;
  std::optional<std::size_t> remove_rule;
  auto* check_cmd = app.add_subcommand("check", "check operational correspondence of the encoding");
  check_cmd->add_option("--from", from)->required()->check(calculi);
  check_cmd->add_option("file", file)->required();
  check_cmd->add_option("--depth", depth);
  check_cmd->add_option("--remove-rule", remove_rule, "delete one generated rule first (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }
  if (run_cmd->parsed() && strategy == "random" && !seed) {
    std::cerr << "memlab run: --strategy random requires --seed\n" << run_cmd->help();
    return kUsage;
  }

  const ValidationOptions vopts{elementary_only};
  EngineOptions eopts;
  eopts.elementary_only = elementary_only;
  eopts.cap = engine_cap;

  try {
    if (validate_cmd->parsed()) return cmd_validate(file, vopts);
    if (step_cmd->parsed()) return cmd_step(file, all, machine, vopts, eopts);
    if (run_cmd->parsed()) return cmd_run(file, strategy, seed, max_steps, machine, vopts, eopts);
    if (reach_cmd->parsed()) return cmd_reach(file, target, state_cap_flag, machine, vopts, eopts);
    if (translate_cmd->parsed()) return cmd_translate(from, file);
    if (check_cmd->parsed()) return cmd_check(from, file, depth, remove_rule, machine);
  } catch (const Exit& e) {
    return e.code;
  } catch (const UnsupportedFragment& e) {
    std::cerr << file << ": unsupported fragment: " << e.what() << "\n";
    return kDataError;
  } catch (const Error& e) {
    std::cerr << "memlab: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}
