#include "isim/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "isim/scenario.hpp"
#include "isim/serial.hpp"
#include "isim/verify.hpp"

namespace isim {

namespace {

Verdict::Status worse(Verdict::Status a, Verdict::Status b) {
  auto rank = [](Verdict::Status s) {
    switch (s) {
      case Verdict::Status::Pass: return 0;
      case Verdict::Status::Inconclusive: return 1;
      case Verdict::Status::Fail: return 2;
    }
    return 2;
  };
  return rank(a) >= rank(b) ? a : b;
}

int status_exit(Verdict::Status s, bool allow_inconclusive) {
  if (s == Verdict::Status::Pass) return 0;
  if (s == Verdict::Status::Inconclusive && allow_inconclusive) return 0;
  return 1;
}

void emit_report(const Scenario& s, const ojson& report) {
  std::cout << report.dump(2) << "\n";
  if (s.out_dir.empty()) return;
  std::filesystem::create_directories(s.out_dir);
  std::ofstream os(std::filesystem::path(s.out_dir) / "report.json");
  os << report.dump(2) << "\n";
}

// Realized environment histories of every length below the horizon, for
// exactness of policy-level checks on table policies.
std::vector<AdversaryHistory> realized_histories(const Context& ctx) {
  std::vector<AdversaryHistory> out;
  for (const Adversary& adv : ctx.adversaries)
    for (int m = 0; m < ctx.horizon; ++m)
      out.push_back(history(adv, m, ctx.pool, &ctx.env));
  return out;
}

struct LazyOracle {
  const System& sys;
  std::unique_ptr<Oracle> oracle;
  explicit LazyOracle(const System& s) : sys(s) {}
  const Oracle& get() {
    if (!oracle) oracle = std::make_unique<Oracle>(sys);
    return *oracle;
  }
};

int cmd_simulate(const Scenario& s, bool allow_inconclusive) {
  ActionProtocol protocol = resolve_protocol(s, s.protocol, s.protocol_file);
  System sys = generate_system(s.ctx, protocol);

  std::filesystem::create_directories(s.out_dir);
  std::filesystem::path trace_path = std::filesystem::path(s.out_dir) / "trace.jsonl";
  {
    std::ofstream os(trace_path);
    if (!os) throw SpecError("cannot write trace to '" + trace_path.string() + "'");
    write_trace(os, sys);
  }

  long total_go = 0;
  long crossings = 0;
  for (const Run& run : sys.runs) {
    for (const RoundRecord& rec : run.rounds)
      for (Action a : rec.actions)
        if (a == Action::Go) ++total_go;
    crossings += static_cast<long>(run.states.back().env.done.size());
  }

  ojson report;
  report["command"] = "simulate";
  report["protocol"] = sys.protocol_name;
  report["context"] = context_to_json(*s.ctx);
  report["runs"] = sys.runs.size();
  report["go_actions"] = total_go;
  report["crossings"] = crossings;
  report["trace"] = trace_path.string();
  report["status"] =
      to_string(s.ctx->truncated ? Verdict::Status::Inconclusive : Verdict::Status::Pass);
  emit_report(s, report);
  return status_exit(
      s.ctx->truncated ? Verdict::Status::Inconclusive : Verdict::Status::Pass,
      allow_inconclusive);
}

int cmd_verify(const Scenario& s, std::vector<std::string> checks, bool allow_inconclusive) {
  if (checks.empty()) checks = s.checks;
  if (checks.empty()) checks = {"validity", "safety"};

  ActionProtocol protocol = resolve_protocol(s, s.protocol, s.protocol_file);
  System sys = generate_system(s.ctx, protocol);
  LazyOracle oracle(sys);

  ojson report;
  report["command"] = "verify";
  report["protocol"] = sys.protocol_name;
  report["context"] = context_to_json(*s.ctx);
  ojson results;
  Verdict::Status overall = Verdict::Status::Pass;

  for (const std::string& name : checks) {
    Verdict v;
    if (name == "validity") {
      v = check_validity(sys);
    } else if (name == "safety") {
      v = check_safety(sys);
    } else if (name == "liveness") {
      if (!s.liveness_bound)
        throw SpecError("scenario field 'liveness_bound': required by the liveness check");
      v = check_liveness_bounded(sys, *s.liveness_bound);
    } else if (name == "unnecessary_waiting") {
      v = find_unnecessary_waiting(oracle.get());
    } else if (name == "implements") {
      v = check_implements_system(oracle.get(), s.program());
    } else if (name == "awareness_sigma") {
      v = check_awareness_sigma(oracle.get(), s.policy);
    } else if (name == "awareness_next") {
      v = check_awareness_next(oracle.get(), s.next);
    } else if (name == "rich_knowledge") {
      v = check_sufficiently_rich_knowledge(oracle.get());
    } else if (name == "front_memory") {
      v = check_front_memory_agreement(sys);
    } else if (name == "pos_knowledge") {
      v = check_pos_knowledge(oracle.get(), s.next);
    } else if (name == "conflict_free") {
      v = check_conflict_free(s.policy, s.ctx->spec, realized_histories(*s.ctx));
    } else if (name == "fairness") {
      v = check_fairness(s.policy, s.ctx->spec);
    } else if (name == "pair_fairness") {
      v = check_pair_fairness(s.policy, s.next, s.ctx->spec);
    } else if (name == "efficient") {
      v = check_efficient(s.policy, s.ctx->spec, realized_histories(*s.ctx));
    } else {
      throw SpecError("scenario field 'checks': unknown check '" + name + "'");
    }
    results[name] = verdict_to_json(v);
    overall = worse(overall, v.status);
  }

  report["checks"] = std::move(results);
  report["status"] = to_string(overall);
  emit_report(s, report);
  return status_exit(overall, allow_inconclusive);
}

ojson domination_to_json(const DominationReport& rep) {
  ojson j;
  switch (rep.outcome) {
    case DominationReport::Outcome::Equal: j["outcome"] = "equal"; break;
    case DominationReport::Outcome::FirstDominates: j["outcome"] = "first_dominates"; break;
    case DominationReport::Outcome::SecondDominates: j["outcome"] = "second_dominates"; break;
    case DominationReport::Outcome::Incomparable: j["outcome"] = "incomparable"; break;
  }
  j["strict"] = rep.strict;
  j["first_faster"] = rep.first_faster.size();
  j["second_faster"] = rep.second_faster.size();
  j["unresolved"] = rep.inconclusive.size();
  j["verdict"] = verdict_to_json(rep.verdict);
  return j;
}

ojson lex_to_json(const LexReport& rep) {
  ojson j;
  j["first_dominates"] = rep.first_dominates;
  j["second_dominates"] = rep.second_dominates;
  j["first_wins"] = rep.first_wins;
  j["second_wins"] = rep.second_wins;
  Verdict with_blocking = rep.verdict;
  with_blocking.witnesses = rep.blocking;
  j["verdict"] = verdict_to_json(with_blocking);
  return j;
}

int cmd_compare(const Scenario& s, bool allow_inconclusive) {
  if (s.protocol_b.empty())
    throw SpecError("scenario field 'protocol_b': compare needs a second protocol");
  ActionProtocol pa = resolve_protocol(s, s.protocol, s.protocol_file);
  ActionProtocol pb = resolve_protocol(s, s.protocol_b, s.protocol_b_file);
  System sa = generate_system(s.ctx, pa);
  System sb = generate_system(s.ctx, pb);
  Oracle oa(sa);
  Oracle ob(sb);

  DominationReport dom = compare_domination(oa, ob);
  LexReport lex = compare_lex_domination(oa, ob);

  ojson report;
  report["command"] = "compare";
  report["first"] = sa.protocol_name;
  report["second"] = sb.protocol_name;
  report["context"] = context_to_json(*s.ctx);
  report["domination"] = domination_to_json(dom);
  report["lexicographic"] = lex_to_json(lex);
  if (lex.first_wins > 0 && lex.blocking.empty())
    report["win_waiting_cross_check"] = verdict_to_json(cross_check_lex_waiting(oa, ob));

  Verdict::Status overall = worse(dom.verdict.status, lex.verdict.status);
  report["status"] = to_string(overall);
  emit_report(s, report);
  return status_exit(overall, allow_inconclusive);
}

int cmd_synthesize(const Scenario& s, bool allow_inconclusive) {
  TableProtocol table = synthesize_implementation(s.ctx, s.policy, s.next, s.strict_override);

  std::filesystem::create_directories(s.out_dir);
  std::filesystem::path table_path = std::filesystem::path(s.out_dir) / "protocol.json";
  save_table_protocol(table_path.string(), table);

  System sys = generate_system(s.ctx, table.to_protocol());
  Oracle oracle(sys);
  KbProgram program;
  program.kind = KbProgram::Kind::PolicyWithOverride;
  program.sigma = s.policy;
  program.next = s.next;
  program.strict_override = s.strict_override;
  Verdict implements = check_implements_system(oracle, program);

  ojson report;
  report["command"] = "synthesize";
  report["context"] = context_to_json(*s.ctx);
  report["policy"] = s.policy.describe();
  report["next"] = s.next.describe();
  report["entries"] = table.entries.size();
  report["table"] = table_path.string();
  report["implements"] = verdict_to_json(implements);
  report["status"] = to_string(implements.status);
  emit_report(s, report);
  return status_exit(implements.status, allow_inconclusive);
}

int cmd_extract(const Scenario& s, bool allow_inconclusive) {
  ActionProtocol protocol = resolve_protocol(s, s.protocol, s.protocol_file);
  System sys = generate_system(s.ctx, protocol);

  Verdict validity = check_validity(sys);
  Verdict safety = check_safety(sys);
  ojson report;
  report["command"] = "extract";
  report["protocol"] = sys.protocol_name;
  report["context"] = context_to_json(*s.ctx);
  report["validity"] = verdict_to_json(validity);
  report["safety"] = verdict_to_json(safety);
  if (validity.status == Verdict::Status::Fail || safety.status == Verdict::Status::Fail) {
    report["status"] = to_string(Verdict::Status::Fail);
    report["notes"] = {"extraction refused: the protocol is not valid and safe here"};
    emit_report(s, report);
    return 1;
  }

  Oracle oracle(sys);
  ExtractResult res = extract_policy(oracle);

  std::filesystem::create_directories(s.out_dir);
  std::filesystem::path policy_path = std::filesystem::path(s.out_dir) / "policy.json";
  save_policy_table(policy_path.string(), res.entries);

  KbProgram roundtrip;
  roundtrip.kind = KbProgram::Kind::PolicyGate;
  roundtrip.sigma = res.policy;
  roundtrip.next = s.next;
  Verdict implements = check_implements_system(oracle, roundtrip);

  report["entries"] = res.entries.size();
  report["policy_table"] = policy_path.string();
  report["conflict_free"] = verdict_to_json(res.verdict);
  report["roundtrip_implements"] = verdict_to_json(implements);
  Verdict::Status overall = worse(worse(validity.status, safety.status),
                                  worse(res.verdict.status, implements.status));
  report["status"] = to_string(overall);
  emit_report(s, report);
  return status_exit(overall, allow_inconclusive);
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"simulate, verify, compare, synthesize, and extract broadcast "
               "intersection-crossing protocols over exhaustively enumerated adversaries"};
  app.require_subcommand(1);

  std::string scenario_path;
  int horizon = 0;
  long caps = 0;
  int liveness_bound = -1;
  bool allow_inconclusive = false;
  bool strict_vi = false;
  std::string out_dir;
  std::vector<std::string> checks;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("scenario", scenario_path, "scenario file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--horizon", horizon, "override the scenario horizon");
    cmd->add_option("--caps", caps, "cap the enumerated adversary count");
    cmd->add_option("--liveness-bound", liveness_bound, "override the liveness bound");
    cmd->add_flag("--allow-inconclusive", allow_inconclusive,
                  "exit 0 when checks are inconclusive rather than failed");
    cmd->add_flag("--strict-vi", strict_vi,
                  "override moves must be compatible with every permitted move, "
                  "going or not");
    cmd->add_option("--out", out_dir, "directory for traces, tables, and reports");
    return cmd;
  };

  CLI::App* sim = add_common(app.add_subcommand("simulate", "generate all runs and dump traces"));
  CLI::App* ver = add_common(app.add_subcommand("verify", "run correctness checks"));
  ver->add_option("--check", checks, "check to run (repeatable; overrides the scenario list)");
  CLI::App* cmp = add_common(app.add_subcommand("compare", "domination between two protocols"));
  CLI::App* syn = add_common(app.add_subcommand(
      "synthesize", "tabulate the knowledge-based program's implementation"));
  CLI::App* ext = add_common(app.add_subcommand("extract", "tabulate the realized policy"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  CLI::App* active = sim->parsed()   ? sim
                     : ver->parsed() ? ver
                     : cmp->parsed() ? cmp
                     : syn->parsed() ? syn
                                     : ext;

  ScenarioOverrides ov;
  if (active->count("--horizon")) ov.horizon = horizon;
  if (active->count("--caps")) ov.caps = caps;
  if (active->count("--liveness-bound")) ov.liveness_bound = liveness_bound;
  ov.strict_override = strict_vi;
  ov.out_dir = out_dir;

  try {
    Scenario s = load_scenario(scenario_path, ov);
    if (sim->parsed()) return cmd_simulate(s, allow_inconclusive);
    if (ver->parsed()) return cmd_verify(s, checks, allow_inconclusive);
    if (cmp->parsed()) return cmd_compare(s, allow_inconclusive);
    if (syn->parsed()) return cmd_synthesize(s, allow_inconclusive);
    if (ext->parsed()) return cmd_extract(s, allow_inconclusive);
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace isim
