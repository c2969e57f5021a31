// Acceptance gate: eleven behavioral criteria over fully enumerated micro
// contexts, one printed pass/fail line each. Exits nonzero if any fail.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "isim/cli.hpp"
#include "isim/policy.hpp"
#include "isim/verify.hpp"

#ifndef ISIM_SCENARIO_DIR
#define ISIM_SCENARIO_DIR "scenarios"
#endif

using namespace isim;
using isim::testing::crossing_spec;
using isim::testing::enumerated_context;
using isim::testing::merge_spec;
using isim::testing::three_lane_spec;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::runtime_error(msg);
}

void criterion(int id, const std::string& what, const std::function<void()>& body) {
  try {
    body();
    std::cout << "criterion " << std::setw(2) << id << " pass  " << what << "\n";
  } catch (const std::exception& e) {
    ++failures;
    std::cout << "criterion " << std::setw(2) << id << " FAIL  " << what << " (" << e.what()
              << ")\n";
  }
}

void require_verdict(const Verdict& v, const std::string& what) {
  std::string where = v.witnesses.empty() ? "" : ": " + v.witnesses.front().detail;
  require(v.status == Verdict::Status::Pass, what + " is " + to_string(v.status) + where);
  require(v.exact, what + " is not exhaustive");
}

void require_same_actions(const System& a, const System& b, const std::string& what) {
  require(a.runs.size() == b.runs.size(), what + ": run counts differ");
  for (size_t r = 0; r < a.runs.size(); ++r)
    for (size_t m = 0; m < a.runs[r].rounds.size(); ++m)
      require(a.runs[r].rounds[m].actions == b.runs[r].rounds[m].actions,
              what + ": actions diverge under adversary " +
                  std::to_string(a.runs[r].adversary->id) + " in round " +
                  std::to_string(m + 1));
}

KbProgram override_program() {
  KbProgram p;
  p.kind = KbProgram::Kind::PolicyWithOverride;
  p.sigma = Policy::empty();
  p.next = NextFn::round_robin();
  return p;
}

struct CliOutcome {
  int code = -1;
  std::string out;
};

CliOutcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "isim");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  std::ostringstream captured;
  std::streambuf* old = std::cout.rdbuf(captured.rdbuf());
  CliOutcome res;
  try {
    res.code = cli_main(static_cast<int>(argv.size()), argv.data());
  } catch (...) {
    std::cout.rdbuf(old);
    throw;
  }
  std::cout.rdbuf(old);
  res.out = captured.str();
  return res;
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  require(bool(is), "cannot read " + p.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

const std::vector<FailureModel> kAllModels = {FailureModel::NF, FailureModel::CR,
                                              FailureModel::SO};
const std::vector<FailureModel> kLossyModels = {FailureModel::CR, FailureModel::SO};

std::vector<IntersectionSpec> micro_specs() { return {merge_spec(), crossing_spec()}; }

}  // namespace

int main() {
  NextFn rr = NextFn::round_robin();

  criterion(1,
            "every enumerated run is valid and safe for the phase, blind-scan, and "
            "announcement-scan protocols under NF, CR, and SO",
            [&] {
              const std::map<FailureModel, size_t> merge_counts = {{FailureModel::NF, 43},
                                                                   {FailureModel::CR, 688},
                                                                   {FailureModel::SO, 2752}};
              const std::map<FailureModel, size_t> crossing_counts = {{FailureModel::NF, 145},
                                                                      {FailureModel::CR, 2320},
                                                                      {FailureModel::SO, 9280}};
              for (FailureModel model : kAllModels) {
                for (const IntersectionSpec& spec : micro_specs()) {
                  size_t want = (spec.lanes_out().size() == 1 ? merge_counts : crossing_counts)
                                    .at(model);
                  auto ctx = enumerated_context(spec, "empty", model, {1, 2}, 3);
                  require(!ctx->truncated, "enumeration truncated");
                  require(ctx->adversaries.size() == want,
                          "enumeration count " + std::to_string(ctx->adversaries.size()) +
                              ", expected " + std::to_string(want));
                  for (const ActionProtocol& proto :
                       {traffic_light_protocol(spec), p_empty_protocol(spec, rr)}) {
                    System sys = generate_system(ctx, proto);
                    require_verdict(check_validity(sys), proto.name + " validity");
                    require_verdict(check_safety(sys), proto.name + " safety");
                  }
                  auto ctx_i = enumerated_context(spec, "intent", model, {1, 2}, 3);
                  System sys = generate_system(ctx_i, p_intent_protocol(spec, rr));
                  require_verdict(check_validity(sys), "p_intent validity");
                  require_verdict(check_safety(sys), "p_intent safety");
                }
              }
            });

  criterion(2, "the blind scanner implements the override program exactly under every failure model",
            [&] {
              for (FailureModel model : kAllModels) {
                for (const IntersectionSpec& spec : micro_specs()) {
                  auto ctx = enumerated_context(spec, "empty", model, {1, 2}, 3);
                  System sys = generate_system(ctx, p_empty_protocol(spec, rr));
                  Oracle oracle(sys);
                  Verdict v = check_implements_system(oracle, override_program());
                  require_verdict(v, "p_empty agreement");
                  require(v.witnesses.empty(), "mismatching points recorded");
                }
              }
              auto wide = enumerated_context(three_lane_spec(), "empty", FailureModel::NF,
                                             {1, 2, 3}, 4);
              System sys = generate_system(wide, p_empty_protocol(three_lane_spec(), rr));
              Oracle oracle(sys);
              require_verdict(check_implements_system(oracle, override_program()),
                              "three-lane p_empty agreement");
            });

  criterion(3,
            "the announcement scanner implements the override program exactly under crash "
            "and omission failures",
            [&] {
              for (FailureModel model : kLossyModels) {
                for (const IntersectionSpec& spec : micro_specs()) {
                  auto ctx = enumerated_context(spec, "intent", model, {1, 2}, 3);
                  System sys = generate_system(ctx, p_intent_protocol(spec, rr));
                  Oracle oracle(sys);
                  Verdict v = check_implements_system(oracle, override_program());
                  require_verdict(v, "p_intent agreement");
                  require(v.witnesses.empty(), "mismatching points recorded");
                }
              }
            });

  criterion(4, "front agents hold identical announcement memories at every reachable point",
            [&] {
              for (FailureModel model : kLossyModels) {
                for (const IntersectionSpec& spec : micro_specs()) {
                  auto ctx = enumerated_context(spec, "intent", model, {1, 2}, 3);
                  System sys = generate_system(ctx, p_intent_protocol(spec, rr));
                  require_verdict(check_front_memory_agreement(sys), "front memory agreement");
                }
              }
            });

  criterion(5,
            "scan membership coincides with conceivably going conflicting moves at every "
            "front point",
            [&] {
              for (FailureModel model : kLossyModels) {
                for (const IntersectionSpec& spec : micro_specs()) {
                  auto ctx = enumerated_context(spec, "intent", model, {1, 2}, 3);
                  System sys = generate_system(ctx, p_intent_protocol(spec, rr));
                  Oracle oracle(sys);
                  require_verdict(check_pos_knowledge(oracle, rr), "scan knowledge agreement");
                }
              }
            });

  criterion(6,
            "synthesized tables reproduce both scanners and lexicographically beat the "
            "fixed-cell gate",
            [&] {
              for (const IntersectionSpec& spec : micro_specs()) {
                auto blind = enumerated_context(spec, "empty", FailureModel::NF, {1, 2}, 3);
                TableProtocol t = synthesize_implementation(blind, Policy::empty(), rr);
                require_same_actions(generate_system(blind, t.to_protocol()),
                                     generate_system(blind, p_empty_protocol(spec, rr)),
                                     "blind table vs p_empty");
                auto heard = enumerated_context(spec, "intent", FailureModel::CR, {1, 2}, 3);
                TableProtocol ti = synthesize_implementation(heard, Policy::empty(), rr);
                require_same_actions(generate_system(heard, ti.to_protocol()),
                                     generate_system(heard, p_intent_protocol(spec, rr)),
                                     "announcement table vs p_intent");
              }

              auto ctx = enumerated_context(crossing_spec(), "empty", FailureModel::NF, {1, 2},
                                            3);
              TableProtocol t = synthesize_implementation(ctx, Policy::empty(), rr);
              System synth_sys = generate_system(ctx, t.to_protocol());
              Policy gate =
                  Policy::cyclic({{Move{0, 2}}, {Move{1, 3}}}, crossing_spec());
              System gate_sys = generate_system(ctx, p_sigma_protocol(crossing_spec(), gate));
              Oracle synth_oracle(synth_sys);
              Oracle gate_oracle(gate_sys);
              LexReport lex = compare_lex_domination(synth_oracle, gate_oracle);
              require(lex.first_dominates, "table loses or blocks some run pair");
              require(!lex.second_dominates, "gate never falls strictly behind");
              require(lex.first_wins >= 1, "no strict win recorded");
              require(lex.blocking.empty(), "incomparable divergence found");
              require_verdict(lex.verdict, "lexicographic comparison");
            });

  criterion(7, "with the fair rotation every front agent crosses within lane-count-plus-one rounds",
            [&] {
              const int bound = 3;
              for (const IntersectionSpec& spec : micro_specs()) {
                auto ctx = enumerated_context(spec, "empty", FailureModel::NF, {1, 2}, 4);
                System sys = generate_system(ctx, p_empty_protocol(spec, rr));
                Verdict v = check_liveness_bounded(sys, bound);
                require(v.status != Verdict::Status::Fail,
                        "p_empty misses the bound: " +
                            (v.witnesses.empty() ? to_string(v.status)
                                                 : v.witnesses.front().detail));
              }
              for (FailureModel model : kLossyModels) {
                auto ctx = enumerated_context(merge_spec(), "intent", model, {1, 2}, 4);
                System sys = generate_system(ctx, p_intent_protocol(merge_spec(), rr));
                Verdict v = check_liveness_bounded(sys, bound);
                require(v.status != Verdict::Status::Fail,
                        "p_intent misses the bound: " +
                            (v.witnesses.empty() ? to_string(v.status)
                                                 : v.witnesses.front().detail));
              }
            });

  criterion(8,
            "the phase protocol withholds a provably safe agent where the synthesized table "
            "releases it",
            [&] {
              auto ctx = enumerated_context(crossing_spec(), "intent", FailureModel::NF, {1, 2},
                                            3);
              System phase_sys = generate_system(ctx, traffic_light_protocol(crossing_spec()));
              Oracle phase_oracle(phase_sys);
              Verdict held = find_unnecessary_waiting(phase_oracle);
              require(held.status == Verdict::Status::Fail,
                      "phase protocol reported " + to_string(held.status));
              require(!held.witnesses.empty(), "no waiting witness recorded");

              TableProtocol t = synthesize_implementation(ctx, Policy::empty(), rr);
              System synth_sys = generate_system(ctx, t.to_protocol());
              Oracle synth_oracle(synth_sys);
              Verdict free = find_unnecessary_waiting(synth_oracle);
              require_verdict(free, "synthesized table waiting check");
              require(free.witnesses.empty(), "synthesized table still withholds an agent");
            });

  criterion(9,
            "extracted policies are conflict-free and their gate programs match the source "
            "protocols",
            [&] {
              auto roundtrip = [&](std::shared_ptr<const Context> ctx,
                                   const ActionProtocol& proto, const std::string& what) {
                System sys = generate_system(ctx, proto);
                Oracle oracle(sys);
                ExtractResult res = extract_policy(oracle);
                require_verdict(res.verdict, what + " extraction conflict-freedom");
                require(!res.entries.empty(), what + ": empty extracted table");
                KbProgram gate;
                gate.kind = KbProgram::Kind::PolicyGate;
                gate.sigma = res.policy;
                gate.next = rr;
                require_verdict(check_implements_system(oracle, gate), what + " gate roundtrip");
              };
              roundtrip(enumerated_context(merge_spec(), "empty", FailureModel::NF, {1, 2}, 3),
                        traffic_light_protocol(merge_spec()), "merge phase");
              roundtrip(
                  enumerated_context(crossing_spec(), "empty", FailureModel::NF, {1, 2}, 3),
                  traffic_light_protocol(crossing_spec()), "crossing phase");
              roundtrip(enumerated_context(merge_spec(), "intent", FailureModel::CR, {1, 2}, 3),
                        p_intent_protocol(merge_spec(), rr), "announcement scanner");
            });

  criterion(10, "the policy checkers grade rotation, starvation, and pairing exactly", [&] {
    IntersectionSpec merge = merge_spec();
    Policy rotation = Policy::cyclic({{Move{0, 2}}, {Move{1, 2}}}, merge);
    require_verdict(check_conflict_free(rotation, merge, {}), "rotation conflict-freedom");
    require_verdict(check_fairness(rotation, merge), "rotation fairness");
    Verdict starved = check_fairness(Policy::empty(), merge);
    require(starved.status == Verdict::Status::Fail, "empty policy passed fairness");
    require(starved.exact, "starvation verdict is not exhaustive");
    require_verdict(check_pair_fairness(Policy::empty(), rr, merge), "pair fairness");
  });

  criterion(11,
            "every battery scenario yields byte-identical reports and traces across repeated "
            "invocations",
            [&] {
              fs::path scenarios(ISIM_SCENARIO_DIR);
              fs::path scratch = fs::temp_directory_path() / "isim_acceptance";
              fs::remove_all(scratch);
              struct Job {
                const char* scenario;
                const char* cmd;
                const char* artifact;
              };
              const std::vector<Job> jobs = {
                  {"merge_nf_tl.json", "simulate", "trace.jsonl"},
                  {"merge_nf_tl.json", "verify", nullptr},
                  {"merge_nf_tl.json", "extract", "policy.json"},
                  {"merge_cr_pintent.json", "simulate", "trace.jsonl"},
                  {"merge_cr_pintent.json", "verify", nullptr},
                  {"crossing_so_pintent.json", "verify", nullptr},
                  {"crossing_nf_synth.json", "synthesize", "protocol.json"},
                  {"merge_nf_compare.json", "compare", nullptr},
              };
              for (const Job& job : jobs) {
                std::string tag =
                    std::string(job.cmd) + "_" + fs::path(job.scenario).stem().string();
                fs::path out = scratch / tag;
                std::vector<std::string> args = {job.cmd, (scenarios / job.scenario).string(),
                                                 "--out", out.string()};
                if (std::string(job.cmd) == "compare") args.push_back("--allow-inconclusive");
                CliOutcome first = run_cli(args);
                require(first.code == 0,
                        tag + ": first invocation exited " + std::to_string(first.code));
                std::string report = read_file(out / "report.json");
                std::string artifact = job.artifact ? read_file(out / job.artifact) : "";
                CliOutcome second = run_cli(args);
                require(second.code == 0,
                        tag + ": second invocation exited " + std::to_string(second.code));
                require(first.out == second.out, tag + ": stdout differs between invocations");
                require(report == read_file(out / "report.json"), tag + ": report bytes differ");
                if (job.artifact)
                  require(artifact == read_file(out / job.artifact),
                          tag + ": " + job.artifact + " bytes differ");
              }
            });

  std::cout << (11 - failures) << " of 11 criteria passed\n";
  return failures == 0 ? 0 : 1;
}
