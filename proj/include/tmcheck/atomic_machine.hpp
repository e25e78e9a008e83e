#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tmcheck/history.hpp"

namespace tmcheck {

// Strongly-atomic execution: transactions run as uninterruptible blocks with
// buffered writes, aborts are decided at the commit point (or injected
// mid-block for spurious-abort enumeration), and non-transactional accesses
// are single steps. Histories it emits are non-interleaved by construction.
class AtomicMachine {
 public:
  AtomicMachine(int n_threads, std::vector<std::string> registers);

  int n_regs() const { return int(history_.regs.size()); }
  const History& history() const { return history_; }
  int64_t cell_value(int reg) const { return cells_[reg]; }
  bool any_live() const;
  bool live(int thread) const { return live_[thread - 1]; }

  // transactional block, driven by the interpreter within one turn
  void begin_block(int thread);                       // txbegin ok
  void begin_block_aborted(int thread);               // txbegin aborted
  int64_t tx_read(int thread, int reg);               // read ret(v)
  void tx_write(int thread, int reg, int64_t val);    // write retu
  void tx_abort_at_read(int thread, int reg);         // read aborted
  void tx_abort_at_write(int thread, int reg, int64_t val);  // write aborted
  void end_block(int thread, bool commit);            // txcommit committed|aborted
  void abandon_block(int thread);                     // divergence: stays live

  // a fence is enabled only when no transaction is live; it then emits
  // fbegin fend adjacently
  bool fence_enabled() const { return !any_live(); }
  void fence(int thread);

  int64_t nt_read(int thread, int reg);
  void nt_write(int thread, int reg, int64_t val);

  size_t mark() const { return journal_.size(); }
  void undo_to(size_t mark);
  void enable_journal(bool on) { journal_on_ = on; }

 private:
  enum class UK : uint8_t { Cell, Live, HistPush, BufInsert, BufOverwrite, BufClear };
  struct Undo {
    UK k;
    int32_t a = 0, b = 0;
    int64_t old = 0;
  };
  void push_undo(Undo u) { if (journal_on_) journal_.push_back(u); }
  void emit(int thread, ActionKind kind, int reg = -1, int64_t val = 0);
  void buf_put(int thread, int reg, int64_t val);
  const int64_t* buf_get(int thread, int reg) const;
  void buf_clear(int thread);

  int n_threads_ = 0;
  std::vector<int64_t> cells_;
  std::vector<char> live_;
  std::vector<std::vector<std::pair<int, int64_t>>> buf_;  // per thread, sorted by reg
  History history_;

  bool journal_on_ = false;
  std::vector<Undo> journal_;
  std::vector<std::pair<int, int64_t>> buf_pool_;  // cleared buffers for undo
};

}  // namespace tmcheck
