#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tmcheck/history.hpp"

namespace tmcheck {

// Timestamp sentinels: rver starts below every clock value, wver above.
constexpr int64_t kRverBot = -1;
constexpr int64_t kWverTop = INT64_MAX;

enum class Tl2Op : uint8_t { None, Begin, Read, Write, Commit, Fence, NtRead, NtWrite };

struct StepOutcome {
  enum class Kind { Continue, Blocked, DoneValue, DoneUnit, DoneCommitted, DoneAborted };
  Kind kind = Kind::Continue;
  int64_t value = 0;        // read result
  std::string blocked_on;   // fence wait predicate description

  bool done() const {
    return kind != Kind::Continue && kind != Kind::Blocked;
  }
};

struct Tl2Faults {
  bool skip_clock_increment = false;  // commit assigns wver without advancing the clock
  bool skip_first_unlock = false;     // commit write-back keeps its first lock
  bool reorder_handler = false;       // handlers clear active before appending the response
};

// Shared-state access record for the step footprint audit.
struct SharedAccess {
  enum class Target : uint8_t { RegValue, RegVer, RegLock, Clock, Active };
  Target target;
  int index;  // register index or thread
  bool write;
  friend bool operator==(const SharedAccess&, const SharedAccess&) = default;
  friend auto operator<=>(const SharedAccess&, const SharedAccess&) = default;
};

struct InvariantIssue {
  std::string clause;  // e.g. "INV.5(c)", "INV.8(e)"
  std::string detail;
};

struct InvariantReport {
  bool drf = true;  // INV.1, reported but treated as an assumption
  std::vector<InvariantIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string to_string() const;
};

// Ghost opacity graph maintained online alongside execution.
struct GhostGraph {
  struct Node {
    bool is_txn = false;
    int txn = -1;        // machine transaction index
    int thread = 0;
    // non-transactional access payload
    int reg = -1;
    bool is_write = false;
    int64_t value = 0;
  };
  std::vector<Node> nodes;
  std::vector<char> vis;
  std::set<std::pair<int, int>> hb;
  std::map<int, std::vector<int>> ww;  // register -> node ids, order of visibility
  std::map<int, std::set<std::pair<int, int>>> wr;
  std::map<int, std::set<std::pair<int, int>>> rw;
};

// Executable TL2 with transactional fences as a resumable small-step machine.
// One caller drives it at a time; distinct instances are independent.
class Tl2Machine {
 public:
  Tl2Machine(int n_threads, std::vector<std::string> registers, bool ghost = false,
             Tl2Faults faults = {});

  int n_threads() const { return n_threads_; }
  int n_regs() const { return int(history_.regs.size()); }
  int reg_index(const std::string& name) const { return history_.reg_index(name); }

  // Starts an operation on a thread; the operation then advances one
  // pseudocode line per step() call. Throws on precondition violations
  // (nested begin, access outside/inside a transaction as appropriate).
  void start(int thread, Tl2Op op, int reg = -1, int64_t val = 0);
  bool op_pending(int thread) const;
  Tl2Op current_op(int thread) const;

  // One atomic machine step. Returns Blocked (without advancing) when the
  // thread sits in a fence wait whose predicate is false.
  StepOutcome step(int thread);

  // True when the thread's next step is a fence wait that cannot proceed.
  bool blocked(int thread) const;
  // True when the thread's next step begins a scheduler-visible segment.
  bool at_schedule_point(int thread) const;

  // Convenience: start and run an operation to completion (throws if blocked).
  StepOutcome run_op(int thread, Tl2Op op, int reg = -1, int64_t val = 0);

  const History& history() const { return history_; }
  int64_t clock() const { return clock_; }
  bool active(int thread) const { return active_[thread - 1]; }
  int64_t cell_value(int reg) const { return cells_[reg].value; }
  int64_t cell_ver(int reg) const { return cells_[reg].ver; }
  int cell_lock(int reg) const { return cells_[reg].lock; }

  int current_txn(int thread) const { return cur_txn_[thread - 1]; }
  int txn_count() const { return int(txns_.size()); }
  int64_t txn_rver(int txn) const { return txns_[txn].rver; }
  int64_t txn_wver(int txn) const { return txns_[txn].wver; }
  bool txn_pv(int txn, int reg) const { return txns_[txn].pv[reg]; }

  bool ghost_enabled() const { return ghost_on_; }
  const GhostGraph& ghost() const { return ghost_; }

  // Checks the runtime invariants against the current state, history and
  // ghost graph. Requires ghost mode.
  InvariantReport assert_invariants() const;

  // Footprint audit: when enabled, every step records its shared accesses.
  void enable_audit(bool on) { audit_on_ = on; }
  const std::vector<SharedAccess>& last_step_accesses() const { return audit_; }

  // Undo journal for exhaustive exploration (incompatible with ghost mode).
  void enable_journal(bool on);
  size_t mark() const { return journal_.size(); }
  void undo_to(size_t mark);

 private:
  struct Cell {
    int64_t value = kInitValue;
    int64_t ver = 0;
    int lock = -1;  // owning transaction index, -1 when free
  };

  struct TxnDesc {
    int thread = 0;
    int64_t rver = kRverBot;
    int64_t wver = kWverTop;
    std::vector<std::pair<int, int64_t>> wset;  // sorted by register
    std::vector<int> rset;                      // sorted registers
    std::vector<int> lset;                      // acquisition order
    std::vector<char> pv;                       // per register
    std::vector<std::pair<int, int64_t>> ghost_reads;  // non-local reads (reg, val)
    int ghost_node = -1;
  };

  struct OpState {
    Tl2Op op = Tl2Op::None;
    int pc = 0;
    int reg = -1;
    int64_t val = 0;
    int64_t ts1 = 0, ts2 = 0, value = 0;
    bool locked = false;
    int iter = 0;
    int sub = 0;        // write-back phase 0..2
    int unlock_iter = 0;
    uint64_t fence_mask = 0;  // snapshot r[t']
  };

  // journal
  enum class UK : uint8_t {
    CellValue, CellVer, CellLock, Clock, Active, Rver, Wver, Pv,
    WsetInsert, WsetOverwrite, RsetInsert, LsetPush, HistPush, TxnCreated,
    CurTxn, OpSnap,
  };
  struct Undo {
    UK k;
    int32_t a = 0, b = 0;
    int64_t old = 0;
  };

  void push_undo(Undo u) { if (journal_on_) journal_.push_back(u); }

  // audited shared-state accessors
  int64_t sh_reg_read(int x);
  void sh_reg_write(int x, int64_t v);
  int64_t sh_ver_read(int x);
  void sh_ver_write(int x, int64_t v);
  bool sh_lock_test(int x);
  bool sh_lock_try(int x, int txn);  // true on acquisition
  void sh_lock_release(int x);
  int64_t sh_clock_read();
  int64_t sh_clock_faa();  // returns the incremented value
  bool sh_active_read(int t);
  void sh_active_write(int t, bool v);

  void emit(int thread, ActionKind kind, int reg = -1, int64_t val = 0);
  void wset_put(int txn, int reg, int64_t val);
  const int64_t* wset_get(int txn, int reg) const;
  void rset_add(int txn, int reg);

  StepOutcome step_begin(int t, OpState& o);
  StepOutcome step_read(int t, OpState& o);
  StepOutcome step_write(int t, OpState& o);
  StepOutcome step_commit(int t, OpState& o);
  StepOutcome step_fence(int t, OpState& o);
  StepOutcome step_nontxn(int t, OpState& o);

  // ghost graph updates (Fig-style events)
  void ghost_txbegin(int txn);
  void ghost_txread(int txn, int reg, int64_t val);
  void ghost_txvis(int txn);
  void ghost_ntxread(int node, int reg, int64_t val);
  void ghost_ntxwrite(int node, int reg, int64_t val);
  int ghost_new_nontxn_node(int thread, int reg, bool is_write, int64_t val);
  void ghost_add_hb_into(int node);
  bool ghost_writes(int node, int reg, int64_t* val_out = nullptr) const;
  bool ghost_reads(int node, int reg) const;

  int n_threads_ = 0;
  std::vector<Cell> cells_;
  int64_t clock_ = 0;
  std::vector<char> active_;   // by thread-1
  std::vector<int> cur_txn_;   // by thread-1, -1 none
  std::vector<TxnDesc> txns_;
  std::vector<OpState> ops_;   // by thread-1
  History history_;

  bool ghost_on_ = false;
  GhostGraph ghost_;
  Tl2Faults faults_;

  bool audit_on_ = false;
  std::vector<SharedAccess> audit_;

  bool journal_on_ = false;
  std::vector<Undo> journal_;
  std::vector<OpState> op_pool_;
};

}  // namespace tmcheck
