// kflow: command-line front end.
//   kflow check  <protocol> <query>       exit 0 secure, 1 attack, 2 error
//   kflow trace  <protocol> <query>
//   kflow oracle <protocol>|random        exit 0 when engine and oracle agree
//   kflow axioms [spec-file]              exit 0 when (s1) and (s2) hold
//   kflow print  <protocol>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "kflow/dsl.hpp"
#include "kflow/engine.hpp"
#include "kflow/error.hpp"
#include "kflow/primitives.hpp"
#include "kflow/random.hpp"

using namespace kflow;
using nlohmann::json;

namespace {

constexpr int kExitSecure = 0;
constexpr int kExitAttack = 1;
constexpr int kExitError = 2;

struct Options {
  Bounds bounds;
  bool rounds_given = false;
  std::string format = "text";
  std::uint64_t seed = 7;
  int cases = 100;
  std::string fault;
  std::string protocol;
  std::string query;
  std::string spec_file;
};

bool use_color() {
  const char* env = std::getenv("KFLOW_COLOR");
  if (env && std::string(env) == "0") return false;
  return isatty(STDOUT_FILENO) != 0;
}

std::string paint(const std::string& text, const char* code) {
  if (!use_color()) return text;
  return std::string("\033[") + code + "m" + text + "\033[0m";
}

void emit(const Options& o, const json& report, const std::string& text) {
  if (o.format == "json") {
    std::cout << report.dump(2) << "\n";
  } else {
    std::cout << text;
  }
}

std::string bounds_text(const Bounds& b) {
  std::ostringstream os;
  os << "depth " << b.max_term_depth << ", rounds " << b.max_rounds << ", synthesis depth "
     << b.max_synthesis_depth << ", universe cap " << b.universe_cap;
  return os.str();
}

const std::vector<Term>& query_targets(const CompiledProtocol& c, const std::string& query) {
  auto it = c.queries.find(query);
  if (it == c.queries.end()) {
    std::string known;
    for (const auto& [name, _] : c.queries) known += (known.empty() ? "" : ", ") + name;
    throw ValidationError("unknown query '" + query + "' (known: " + (known.empty() ? "none" : known) +
                          ")");
  }
  return it->second;
}

int run_check(const Options& o, bool trace_only) {
  auto compiled = compile(load_protocol(o.protocol));
  const auto& targets = query_targets(compiled, o.query);
  Verdict v = check_targets(targets, compiled.problem, o.bounds);
  auto lines = trace_lines(v.proof);

  json report;
  report["command"] = trace_only ? "trace" : "check";
  report["protocol"] = o.protocol;
  report["query"] = o.query;
  report["verdict"] = to_json(v);
  report["trace"] = lines;

  std::ostringstream text;
  if (!trace_only) {
    text << "protocol " << o.protocol << ", query " << o.query << "\n";
    text << "bounds: " << bounds_text(v.bounds) << "\n";
    if (v.status == Status::AttackFound) {
      text << paint("attack found", "1;31") << ": Oscar learns " << to_sexpr(v.target) << "\n";
    } else {
      text << paint("secure at bound", "1;32") << ": no target derivable\n";
    }
  }
  if (v.status == Status::AttackFound) {
    for (const auto& l : lines) text << (trace_only ? "" : "  ") << l << "\n";
  } else if (trace_only) {
    text << "no attack within bounds\n";
  }
  if (!trace_only) {
    const auto& s = v.stats;
    text << "statistics: universe " << s.universe_size << ", analyzed " << s.analyzed_size
         << ", synthesizable " << s.synthesizable_size << ", rounds " << s.rounds
         << (s.fixpoint ? " (fixpoint)" : "") << ", protocol firings " << s.protocol_firings << "\n";
  }
  emit(o, report, text.str());
  return v.status == Status::AttackFound ? kExitAttack : kExitSecure;
}

json comparison_json(const OracleComparison& c) {
  json j;
  j["compared"] = c.compared;
  j["derivable"] = c.attacks;
  j["engine_only"] = json::array();
  j["oracle_only"] = json::array();
  for (Term t : c.engine_only) j["engine_only"].push_back(to_sexpr(t));
  for (Term t : c.oracle_only) j["oracle_only"].push_back(to_sexpr(t));
  return j;
}

void diff_text(std::ostringstream& text, const OracleComparison& c) {
  for (Term t : c.oracle_only) text << "  - oracle derives, engine misses: " << to_sexpr(t) << "\n";
  for (Term t : c.engine_only) text << "  + engine derives, oracle rejects: " << to_sexpr(t) << "\n";
}

int run_oracle(const Options& o) {
  AnalyzerOptions opts;
  if (o.fault == "misclassify") {
    opts.misclassify = true;
  } else if (!o.fault.empty()) {
    throw ValidationError("unknown fault '" + o.fault + "' (known: misclassify)");
  }

  json report;
  report["command"] = "oracle";
  report["protocol"] = o.protocol;
  report["fault"] = o.fault.empty() ? json(nullptr) : json(o.fault);
  std::ostringstream text;
  std::size_t mismatched = 0;

  if (o.protocol == "random") {
    if (o.cases <= 0) throw ValidationError("--cases must be positive");
    std::mt19937_64 seeds(o.seed);
    report["seed"] = o.seed;
    report["cases"] = json::array();
    for (int i = 0; i < o.cases; ++i) {
      auto rp = random_protocol(seeds());
      auto c = compare_with_oracle(rp.problem, rp.universe, rp.depth + 1, opts);
      json cj = comparison_json(c);
      cj["seed"] = rp.seed;
      cj["universe_size"] = rp.universe.size();
      report["cases"].push_back(cj);
      if (!c.ok()) {
        ++mismatched;
        text << "case " << i << " mismatch, " << rp.describe() << "\n";
        diff_text(text, c);
      }
    }
    text << o.cases << " random protocols (seed " << o.seed << "), " << mismatched
         << " mismatching\n";
  } else {
    auto compiled = compile(load_protocol(o.protocol));
    std::vector<Term> targets;
    for (const auto& [_, ts] : compiled.queries) targets.insert(targets.end(), ts.begin(), ts.end());
    Universe u = relevant_universe(compiled.problem, targets, o.bounds);
    int synth = std::max(o.bounds.max_synthesis_depth, o.bounds.max_term_depth);
    auto c = compare_with_oracle(compiled.problem, u, synth, opts);
    report["bounds"] = to_json(o.bounds);
    report["cases"] = json::array({comparison_json(c)});
    report["cases"][0]["universe_size"] = u.size();
    if (!c.ok()) {
      mismatched = 1;
      diff_text(text, c);
    }
    text << o.protocol << " at depth " << o.bounds.max_term_depth << ": " << u.size()
         << " universe terms compared, " << c.attacks << " derivable by both, "
         << (c.engine_only.size() + c.oracle_only.size()) << " mismatching\n";
  }
  report["mismatches"] = mismatched;
  report["agree"] = mismatched == 0;
  text << (mismatched == 0 ? paint("engine agrees with oracle", "1;32")
                           : paint("engine disagrees with oracle", "1;31"))
       << "\n";
  emit(o, report, text.str());
  return mismatched == 0 ? 0 : 1;
}

// Leaves a sample universe needs for a spec: two atoms plus named identities.
Universe axiom_sample(const PrimitiveSpec& spec) {
  TermSet atoms{atom("k1"), atom("k2")};
  std::set<Tag> ctors;
  for (Term t : spec.schema) {
    for (Tag c : constructors(t)) ctors.insert(c);
    for (Term l : leaves(t)) {
      if (l.tag() != Tag::Var) atoms.insert(l);
    }
  }
  return Universe::enumerate(atoms, ctors, 2, 50'000);
}

int run_axioms(const Options& o) {
  std::vector<PrimitiveSpec> specs;
  if (o.spec_file.empty()) {
    specs = builtin_specs();
  } else {
    std::ifstream in(o.spec_file);
    if (!in) throw ValidationError("cannot read spec file '" + o.spec_file + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    specs = parse_primitive_specs(ss.str());
  }

  json report;
  report["command"] = "axioms";
  report["source"] = o.spec_file.empty() ? json("builtin") : json(o.spec_file);
  report["specs"] = json::array();
  std::ostringstream text;
  bool all_pass = true;

  for (const auto& spec : specs) {
    validate_spec(spec);
    Universe sample = axiom_sample(spec);
    AxiomReport r = check_local_cf(spec, sample.terms());
    json j = to_json(r);
    j["composing"] = spec.composing;
    j["decomposing"] = spec.decomposing;
    j["sample_universe_size"] = sample.size();
    all_pass = all_pass && r.pass;

    text << spec.principal << ": " << (r.pass ? paint("pass", "32") : paint("FAIL", "1;31")) << " ("
         << r.tuples_checked << " tuples)\n";
    for (const auto& v : r.violations) text << "  (" << v.condition << ") violated: " << v.message << "\n";

    auto set_text = [](const std::set<std::size_t>& s) {
      std::string out = "{";
      for (auto i : s) out += (out.size() > 1 ? "," : "") + std::to_string(i);
      return out + "}";
    };
    text << "  C=" << set_text(spec.composing) << " D=" << set_text(spec.decomposing) << "\n";

    j["classification"] = json::array();
    bool s1 = std::none_of(r.violations.begin(), r.violations.end(),
                           [](const AxiomViolation& v) { return v.condition == "s1"; });
    if (s1) {
      for (const auto& c : classify(spec)) {
        json cj{{"position", c.position}, {"kind", std::string(rule_kind_name(c.kind))}};
        cj["controlled_by"] = c.controlled_by ? json(*c.controlled_by) : json(nullptr);
        j["classification"].push_back(cj);
        text << "  position " << c.position << ": " << rule_kind_name(c.kind);
        if (c.controlled_by) text << ", controlled by position " << *c.controlled_by;
        text << "\n";
      }
    }

    StrataMap m = strata(sample.terms(), {spec});
    json sj;
    sj["max_level"] = m.max_level;
    sj["sample"] = json::array();
    int shown = 0;
    for (Term t : sample.by_depth()) {
      if (m.stratum(t) <= 0 || shown >= 4) continue;
      sj["sample"].push_back({{"term", to_sexpr(t)}, {"level", m.stratum(t)}});
      text << "  stratum " << m.stratum(t) << ": " << to_sexpr(t) << "\n";
      ++shown;
    }
    j["strata"] = sj;
    FixedSet fixed = fixed_set(sample.terms(), spec);
    j["fixed_set"] = json::array();
    for (Term t : fixed.members) j["fixed_set"].push_back(to_sexpr(t));
    text << "  fixed set: " << (fixed.members.empty() ? "empty" : std::to_string(fixed.members.size()) + " values")
         << " over " << sample.size() << " sample values\n";
    report["specs"].push_back(j);
  }
  report["pass"] = all_pass;
  emit(o, report, text.str());
  return all_pass ? 0 : 1;
}

int run_print(const Options& o) {
  auto spec = load_protocol(o.protocol);
  if (o.format == "json") {
    std::cout << to_json(spec).dump(2) << "\n";
  } else {
    std::cout << print_protocol(spec);
  }
  return 0;
}

void error_out(const Options& o, const std::string& kind, const std::string& message,
               const std::vector<ParseIssue>& issues = {}) {
  if (o.format == "json") {
    json j{{"command", "error"}, {"error", kind}, {"message", message}};
    j["issues"] = json::array();
    for (const auto& i : issues) {
      j["issues"].push_back({{"line", i.line}, {"column", i.column}, {"message", i.message}});
    }
    std::cout << j.dump(2) << "\n";
  }
  std::cerr << "kflow: " << kind << ": " << message << "\n";
  for (const auto& i : issues) std::cerr << "  " << i.line << ":" << i.column << ": " << i.message << "\n";
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--depth", o.bounds.max_term_depth, "maximum term depth")
      ->check(CLI::PositiveNumber);
  cmd->add_option_function<int>(
         "--rounds",
         [&o](int n) {
           o.bounds.max_rounds = n;
           o.rounds_given = true;
         },
         "maximum protocol rounds")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--synth-depth", o.bounds.max_synthesis_depth, "maximum synthesis proof height")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--universe-cap", o.bounds.universe_cap, "maximum universe size")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--format", o.format, "output format")->check(CLI::IsMember({"text", "json"}));
  cmd->add_option("--seed", o.seed, "seed for randomized suites");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kflow: knowledge-flow analysis of security protocols"};
  app.require_subcommand(1);
  Options o;

  auto* check = app.add_subcommand("check", "check a secrecy query");
  check->add_option("protocol", o.protocol, "builtin name or .kf file")->required();
  check->add_option("query", o.query, "query name")->required();
  add_common(check, o);

  auto* trace = app.add_subcommand("trace", "print the attack trace of a query");
  trace->add_option("protocol", o.protocol, "builtin name or .kf file")->required();
  trace->add_option("query", o.query, "query name")->required();
  add_common(trace, o);

  auto* oracle = app.add_subcommand("oracle", "compare the engine with naive saturation");
  oracle->add_option("protocol", o.protocol, "builtin name, .kf file, or 'random'")->required();
  oracle->add_option("--cases", o.cases, "number of random protocols");
  oracle->add_option("--fault", o.fault, "inject a fault into the engine (misclassify)");
  add_common(oracle, o);

  auto* axioms = app.add_subcommand("axioms", "check primitive specs against (s1)/(s2)");
  axioms->add_option("spec", o.spec_file, "primitive spec file (default: builtins)");
  add_common(axioms, o);

  auto* print = app.add_subcommand("print", "pretty-print a protocol");
  print->add_option("protocol", o.protocol, "builtin name or .kf file")->required();
  add_common(print, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (*check) return run_check(o, false);
    if (*trace) return run_check(o, true);
    if (*oracle) return run_oracle(o);
    if (*axioms) return run_axioms(o);
    if (*print) return run_print(o);
  } catch (const ParseError& e) {
    error_out(o, "parse", "invalid input", e.issues());
  } catch (const ResourceError& e) {
    error_out(o, "resource", e.what());
  } catch (const Error& e) {
    error_out(o, "validation", e.what());
  }
  return kExitError;
}
