#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tmcheck/history.hpp"
#include "tmcheck/tl2.hpp"

namespace tmcheck::test {

// Compact action literal for building histories in tests.
struct A {
  int thread;
  ActionKind kind;
  const char* reg = nullptr;
  int64_t val = 0;
};

History make_history(const std::vector<A>& actions);

// H_0: t1 commits a write of x=1 up to txcommit (commit-pending), t2 begins
// and writes x=2 (live), t3 reads x non-transactionally and sees 1.
History h0();

// H_bad: t1 fully commits a write of x=1; t2 runs a fence and then reads x
// non-transactionally, seeing the initial value.
History h_bad();

// Brute-force strong-opacity oracle: enumerates happens-before-respecting
// permutations (per-thread order fixed, hb predecessors first, adjacent
// non-transactional pairs) and asks for a well-formed one admitted by the
// atomic TM. Independent of the graph-based checker.
struct OracleResult {
  bool exists = false;
  uint64_t permutations_tried = 0;
  History witness;  // valid when exists
};
OracleResult oracle_strong_opacity(const History& h, uint64_t cap = 4'000'000);

// Random well-formed histories with at most max_actions TM actions: a mix of
// consistent and inconsistent reads, committed/aborted/live/commit-pending
// transactions, and occasional fences.
struct RandomHistoryOptions {
  int max_actions = 10;
  int threads = 3;
  int regs = 2;
  bool allow_fences = true;
};
History random_history(std::mt19937_64& rng, const RandomHistoryOptions& opt);

// Drives a ghost-mode TL2 machine with a random most-general client, checking
// the runtime invariants after every machine step. Returns the number of steps
// whose invariant check ran with a data-race-free history, and fails the
// calling doctest assertion context on any invariant issue.
struct MgcResult {
  int steps = 0;
  int drf_checked_steps = 0;
  std::vector<std::string> failures;
  bool final_wf = true;
};
MgcResult run_most_general_client(uint64_t seed, int threads, int regs, int max_steps,
                                  Tl2Faults faults = {});

}  // namespace tmcheck::test
