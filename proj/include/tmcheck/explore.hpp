#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tmcheck/atomic_machine.hpp"
#include "tmcheck/history.hpp"
#include "tmcheck/litmus.hpp"
#include "tmcheck/relations.hpp"
#include "tmcheck/tl2.hpp"

namespace tmcheck {

enum class TmKind { Tl2, Atomic };
const char* tm_name(TmKind);

// One scheduler decision: which thread advances, and (for atomic-TM blocks)
// which outcome variant its block takes:
//   0 commit, 1 abort at the commit point,
//   2 abort at txbegin, 3+k abort at the k-th register access
// (variants 2+ only with spurious_aborts).
struct Choice {
  int16_t thread = 0;
  int16_t variant = 0;
  friend bool operator==(const Choice&, const Choice&) = default;
};

std::string schedule_to_string(const std::vector<Choice>&);

struct ScheduleConfig {
  enum class Mode { Exhaustive, Random };
  Mode mode = Mode::Exhaustive;
  uint64_t seed = 1;
  int trials = 100;               // random mode
  int max_steps = 400;            // scheduler turns per run
  int loop_bound = 16;            // iterations before a loop is cut as divergent
  bool spurious_aborts = false;   // atomic TM only
  uint64_t schedule_cap = 5'000'000;
  bool ghost = false;             // TL2, replay/random modes only
  bool record_all = false;        // keep every outcome and history
  bool check_wf = false;          // run well_formed on every leaf history
  int history_sample = 64;        // reservoir size when not recording all
  int max_recorded_violations = 128;
  int max_recorded_divergences = 16;
  // called after every machine micro-step (TL2 replay/random only)
  std::function<void(const Tl2Machine&)> on_step;
};

struct FinalState {
  std::vector<std::pair<std::string, int64_t>> registers;
  std::vector<std::pair<std::string, LocalValue>> locals;
  std::string to_string() const;
};

struct Outcome {
  std::vector<Choice> schedule;
  FinalState finals;
  bool post_ok = true;
  bool completed = false;  // all threads ran to the end
  bool diverged = false;
  bool deadlock = false;
  std::string note;
  int history_index = -1;  // into ExplorationReport::histories when recorded
};

struct DrfSummary {
  uint64_t histories_checked = 0;
  uint64_t racy_histories = 0;
  std::vector<Race> sample_races;
};

struct ExplorationReport {
  std::string program;
  std::string tm;
  uint64_t schedules_explored = 0;
  uint64_t completed = 0;
  uint64_t violations = 0;
  uint64_t divergences = 0;
  uint64_t deadlocks = 0;
  bool bound_exceeded = false;
  uint64_t wf_checked = 0;
  uint64_t wf_failures = 0;
  std::vector<Outcome> outcomes;             // every leaf, record_all mode only
  std::vector<Outcome> violation_outcomes;   // up to max_recorded_violations
  std::vector<History> violation_histories;  // parallel to violation_outcomes
  std::vector<Outcome> divergence_outcomes;  // sample
  std::vector<History> histories;            // recorded leaf histories
  DrfSummary drf;                             // over the recorded histories
};

ExplorationReport explore(const LitmusProgram& p, TmKind tm, const ScheduleConfig& cfg);

struct RunResult {
  Trace trace;
  FinalState finals;
  bool post_ok = true;
  bool completed = false;
  bool diverged = false;
  bool deadlock = false;
  std::string note;
};

// Deterministic replay of an explicit schedule. The schedule may be a prefix;
// it must only name enabled threads and valid variants.
RunResult run(const LitmusProgram& p, TmKind tm, const std::vector<Choice>& schedule,
              const ScheduleConfig& cfg = {});

// Convenience for tests: run the given threads serially, each to completion.
RunResult run_threads_serially(const LitmusProgram& p, TmKind tm,
                               const std::vector<int>& thread_order,
                               const ScheduleConfig& cfg = {});

}  // namespace tmcheck
