// tmcheck: transactional-memory correctness workbench CLI.
//
// Subcommands:
//   check    analyze a history file (well-formedness, races, opacity, atomicity)
//   litmus   run a litmus program on a TM and explore its schedules
//   witness  extract a serial witness for a history

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "tmcheck/atomic_tm.hpp"
#include "tmcheck/explore.hpp"
#include "tmcheck/history.hpp"
#include "tmcheck/litmus.hpp"
#include "tmcheck/opacity.hpp"
#include "tmcheck/relations.hpp"
#include "tmcheck/report_json.hpp"

using namespace tmcheck;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFinding = 1;
constexpr int kExitUsage = 2;

int cmd_check(const std::string& path, bool drf, bool opacity, bool atomic) {
  // no flags selects every check
  if (!drf && !opacity && !atomic) drf = opacity = atomic = true;

  Trace t = decode_file(path);
  WellFormednessReport wf = well_formed(t);
  std::cout << wf_report_json(wf) << "\n";
  if (!wf.ok()) {
    std::cerr << "ill-formed history:\n" << wf.to_string();
    return kExitFinding;
  }
  History h = history_of(t);
  int rc = kExitOk;
  if (drf) {
    std::vector<Race> rs = races(h);
    std::cout << races_json(h, rs) << "\n";
    std::cerr << (rs.empty() ? "drf: no races\n"
                             : "drf: " + std::to_string(rs.size()) + " race(s)\n");
    if (!rs.empty()) rc = kExitFinding;
  }
  if (opacity) {
    OpacityVerdict v = check_strong_opacity(h);
    std::cout << opacity_verdict_json(v) << "\n";
    std::cerr << "opacity: " << verdict_name(v.kind) << "\n";
    if (v.kind == OpacityVerdict::Kind::SearchBoundExceeded) return kExitUsage;
    if (!v.strongly_opaque() && v.kind != OpacityVerdict::Kind::Racy) rc = kExitFinding;
    if (v.kind == OpacityVerdict::Kind::Racy) rc = kExitFinding;
  }
  if (atomic) {
    bool member = atomic_member(h);
    std::cout << "{\"atomic_member\":" << (member ? "true" : "false") << "}\n";
    std::cerr << "atomic: " << (member ? "member" : "not a member") << "\n";
    if (!member) rc = kExitFinding;
  }
  return rc;
}

int cmd_litmus(const std::string& name, const std::string& tm_s, const std::string& explore_s,
               uint64_t seed, int trials, int max_steps, int loop_bound, bool ghost,
               uint64_t schedule_cap, bool spurious) {
  LitmusProgram prog;
  if (name.size() > 5 && name.substr(name.size() - 5) == ".json") {
    prog = load_litmus_file(name);
  } else {
    prog = builtin(name);
  }
  TmKind tm = tm_s == "atomic" ? TmKind::Atomic : TmKind::Tl2;

  ScheduleConfig cfg;
  cfg.mode = explore_s == "random" ? ScheduleConfig::Mode::Random
                                   : ScheduleConfig::Mode::Exhaustive;
  cfg.seed = seed;
  cfg.trials = trials;
  cfg.max_steps = max_steps;
  cfg.loop_bound = loop_bound;
  cfg.ghost = ghost;
  cfg.schedule_cap = schedule_cap;
  cfg.spurious_aborts = spurious;
  cfg.check_wf = true;
  if (tm == TmKind::Atomic) cfg.record_all = true;
  if (ghost && cfg.mode == ScheduleConfig::Mode::Exhaustive) {
    std::cerr << "--ghost requires --explore random\n";
    return kExitUsage;
  }

  ExplorationReport rep = explore(prog, tm, cfg);
  std::cout << exploration_report_json(rep) << "\n";
  std::cerr << rep.program << " on " << rep.tm << ": " << rep.schedules_explored
            << " schedule(s), " << rep.violations << " violation(s), " << rep.divergences
            << " divergence(s), " << rep.drf.racy_histories << "/"
            << rep.drf.histories_checked << " racy histories\n";
  if (rep.bound_exceeded) {
    std::cerr << "schedule cap exceeded\n";
    return kExitUsage;
  }
  if (rep.violations || rep.wf_failures || rep.drf.racy_histories) return kExitFinding;
  return kExitOk;
}

int cmd_witness(const std::string& path, const std::string& out) {
  Trace t = decode_file(path);
  WellFormednessReport wf = well_formed(t);
  if (!wf.ok()) {
    std::cerr << "ill-formed history:\n" << wf.to_string();
    return kExitFinding;
  }
  History h = history_of(t);
  // witness extraction builds the serial permutation whether or not the
  // history is racy; races are reported separately by `check --drf`
  OpacityOptions opt;
  opt.race_gate = false;
  OpacityVerdict v = check_strong_opacity(h, opt);
  std::cerr << "opacity: " << verdict_name(v.kind) << "\n";
  if (v.kind == OpacityVerdict::Kind::SearchBoundExceeded) return kExitUsage;
  if (!v.strongly_opaque()) {
    std::cout << opacity_verdict_json(v) << "\n";
    return kExitFinding;
  }
  encode_file(v.witness->serial, out);
  std::string theta_path = out;
  size_t dot = theta_path.find_last_of('.');
  if (dot != std::string::npos) theta_path.resize(dot);
  theta_path += ".theta.json";
  {
    std::string sidecar = "[";
    for (size_t i = 0; i < v.witness->theta.size(); ++i) {
      if (i) sidecar += ",";
      sidecar += "[" + std::to_string(i) + "," + std::to_string(v.witness->theta[i]) + "]";
    }
    sidecar += "]\n";
    FILE* f = fopen(theta_path.c_str(), "wb");
    if (!f) {
      std::cerr << "cannot write " << theta_path << "\n";
      return kExitUsage;
    }
    fwrite(sidecar.data(), 1, sidecar.size(), f);
    fclose(f);
  }
  std::cerr << "wrote " << out << " and " << theta_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tmcheck: STM correctness workbench"};
  app.require_subcommand(1);

  // check
  auto* check = app.add_subcommand("check", "analyze a history file");
  std::string check_path;
  bool f_drf = false, f_opacity = false, f_atomic = false;
  check->add_option("history", check_path, "history .jsonl file")->required();
  check->add_flag("--drf", f_drf, "report data races");
  check->add_flag("--opacity", f_opacity, "decide strong opacity");
  check->add_flag("--atomic", f_atomic, "decide atomic-TM membership");

  // litmus
  auto* litmus = app.add_subcommand("litmus", "run a litmus program");
  std::string lit_name, lit_tm = "tl2", lit_explore = "exhaustive";
  uint64_t lit_seed = 1, lit_cap = 5'000'000;
  int lit_trials = 100, lit_max_steps = 400, lit_loop_bound = 16;
  bool lit_ghost = false, lit_spurious = false;
  litmus->add_option("name", lit_name, "builtin name or .json file")->required();
  litmus->add_option("--tm", lit_tm, "tl2|atomic")->check(CLI::IsMember({"tl2", "atomic"}));
  litmus->add_option("--explore", lit_explore, "exhaustive|random")
      ->check(CLI::IsMember({"exhaustive", "random"}));
  litmus->add_option("--seed", lit_seed, "random seed");
  litmus->add_option("--trials", lit_trials, "random trials");
  litmus->add_option("--max-steps", lit_max_steps, "scheduler turns per run");
  litmus->add_option("--loop-bound", lit_loop_bound, "loop iterations before divergence");
  litmus->add_option("--schedule-cap", lit_cap, "exhaustive schedule cap");
  litmus->add_flag("--ghost", lit_ghost, "maintain the ghost graph (random mode)");
  litmus->add_flag("--spurious-aborts", lit_spurious,
                   "enumerate mid-transaction aborts (atomic TM)");

  // witness
  auto* witness = app.add_subcommand("witness", "extract a serial witness");
  std::string wit_path, wit_out;
  witness->add_option("history", wit_path, "history .jsonl file")->required();
  witness->add_option("-o,--out", wit_out, "output .jsonl path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (check->parsed()) return cmd_check(check_path, f_drf, f_opacity, f_atomic);
    if (litmus->parsed())
      return cmd_litmus(lit_name, lit_tm, lit_explore, lit_seed, lit_trials, lit_max_steps,
                        lit_loop_bound, lit_ghost, lit_cap, lit_spurious);
    if (witness->parsed()) return cmd_witness(wit_path, wit_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
