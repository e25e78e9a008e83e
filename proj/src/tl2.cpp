#include "tmcheck/tl2.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "tmcheck/opacity.hpp"
#include "tmcheck/relations.hpp"

namespace tmcheck {

std::string InvariantReport::to_string() const {
  std::ostringstream os;
  if (!drf) os << "INV.1: history has data races (assumption, reported only)\n";
  for (const InvariantIssue& i : issues) os << i.clause << ": " << i.detail << "\n";
  return os.str();
}

Tl2Machine::Tl2Machine(int n_threads, std::vector<std::string> registers, bool ghost,
                       Tl2Faults faults)
    : n_threads_(n_threads), ghost_on_(ghost), faults_(faults) {
  if (n_threads < 1 || n_threads > 64)
    throw std::invalid_argument("Tl2Machine: thread count out of range");
  cells_.resize(registers.size());
  active_.assign(n_threads, 0);
  cur_txn_.assign(n_threads, -1);
  ops_.resize(n_threads);
  history_.regs = std::move(registers);
}

void Tl2Machine::enable_journal(bool on) {
  if (on && ghost_on_)
    throw std::logic_error("Tl2Machine: journaling and ghost mode are exclusive");
  journal_on_ = on;
}

// --- shared-state accessors -------------------------------------------------

int64_t Tl2Machine::sh_reg_read(int x) {
  if (audit_on_) audit_.push_back({SharedAccess::Target::RegValue, x, false});
  return cells_[x].value;
}
void Tl2Machine::sh_reg_write(int x, int64_t v) {
  if (audit_on_) audit_.push_back({SharedAccess::Target::RegValue, x, true});
  push_undo({UK::CellValue, x, 0, cells_[x].value});
  cells_[x].value = v;
}
int64_t Tl2Machine::sh_ver_read(int x) {
  if (audit_on_) audit_.push_back({SharedAccess::Target::RegVer, x, false});
  return cells_[x].ver;
}
void Tl2Machine::sh_ver_write(int x, int64_t v) {
  if (audit_on_) audit_.push_back({SharedAccess::Target::RegVer, x, true});
  push_undo({UK::CellVer, x, 0, cells_[x].ver});
  cells_[x].ver = v;
}
bool Tl2Machine::sh_lock_test(int x) {
  if (audit_on_) audit_.push_back({SharedAccess::Target::RegLock, x, false});
  return cells_[x].lock != -1;
}
bool Tl2Machine::sh_lock_try(int x, int txn) {
  if (audit_on_) audit_.push_back({SharedAccess::Target::RegLock, x, true});
  if (cells_[x].lock != -1) return false;
  push_undo({UK::CellLock, x, 0, cells_[x].lock});
  cells_[x].lock = txn;
  return true;
}
void Tl2Machine::sh_lock_release(int x) {
  if (audit_on_) audit_.push_back({SharedAccess::Target::RegLock, x, true});
  push_undo({UK::CellLock, x, 0, cells_[x].lock});
  cells_[x].lock = -1;
}
int64_t Tl2Machine::sh_clock_read() {
  if (audit_on_) audit_.push_back({SharedAccess::Target::Clock, 0, false});
  return clock_;
}
int64_t Tl2Machine::sh_clock_faa() {
  if (audit_on_) audit_.push_back({SharedAccess::Target::Clock, 0, true});
  push_undo({UK::Clock, 0, 0, clock_});
  return ++clock_;
}
bool Tl2Machine::sh_active_read(int t) {
  if (audit_on_) audit_.push_back({SharedAccess::Target::Active, t, false});
  return active_[t - 1];
}
void Tl2Machine::sh_active_write(int t, bool v) {
  if (audit_on_) audit_.push_back({SharedAccess::Target::Active, t, true});
  push_undo({UK::Active, t - 1, 0, active_[t - 1]});
  active_[t - 1] = v ? 1 : 0;
}

// --- bookkeeping -------------------------------------------------------------

void Tl2Machine::emit(int thread, ActionKind kind, int reg, int64_t val) {
  Action a;
  a.id = int64_t(history_.actions.size());
  a.thread = thread;
  a.kind = kind;
  a.reg = reg;
  a.val = val;
  push_undo({UK::HistPush, 0, 0, 0});
  history_.actions.push_back(a);
}

void Tl2Machine::wset_put(int txn, int reg, int64_t val) {
  auto& ws = txns_[txn].wset;
  auto it = std::lower_bound(ws.begin(), ws.end(), reg,
                             [](const auto& p, int r) { return p.first < r; });
  if (it != ws.end() && it->first == reg) {
    push_undo({UK::WsetOverwrite, txn, int32_t(it - ws.begin()), it->second});
    it->second = val;  // most recent write per register
  } else {
    push_undo({UK::WsetInsert, txn, int32_t(it - ws.begin()), 0});
    ws.insert(it, {reg, val});
  }
}

const int64_t* Tl2Machine::wset_get(int txn, int reg) const {
  const auto& ws = txns_[txn].wset;
  auto it = std::lower_bound(ws.begin(), ws.end(), reg,
                             [](const auto& p, int r) { return p.first < r; });
  if (it != ws.end() && it->first == reg) return &it->second;
  return nullptr;
}

void Tl2Machine::rset_add(int txn, int reg) {
  auto& rs = txns_[txn].rset;
  auto it = std::lower_bound(rs.begin(), rs.end(), reg);
  if (it != rs.end() && *it == reg) return;
  push_undo({UK::RsetInsert, txn, int32_t(it - rs.begin()), 0});
  rs.insert(it, reg);
}

void Tl2Machine::undo_to(size_t m) {
  while (journal_.size() > m) {
    const Undo u = journal_.back();
    journal_.pop_back();
    switch (u.k) {
      case UK::CellValue: cells_[u.a].value = u.old; break;
      case UK::CellVer: cells_[u.a].ver = u.old; break;
      case UK::CellLock: cells_[u.a].lock = int(u.old); break;
      case UK::Clock: clock_ = u.old; break;
      case UK::Active: active_[u.a] = char(u.old); break;
      case UK::Rver: txns_[u.a].rver = u.old; break;
      case UK::Wver: txns_[u.a].wver = u.old; break;
      case UK::Pv: txns_[u.a].pv[u.b] = char(u.old); break;
      case UK::WsetInsert: txns_[u.a].wset.erase(txns_[u.a].wset.begin() + u.b); break;
      case UK::WsetOverwrite: txns_[u.a].wset[u.b].second = u.old; break;
      case UK::RsetInsert: txns_[u.a].rset.erase(txns_[u.a].rset.begin() + u.b); break;
      case UK::LsetPush: txns_[u.a].lset.pop_back(); break;
      case UK::HistPush: history_.actions.pop_back(); break;
      case UK::TxnCreated: txns_.pop_back(); break;
      case UK::CurTxn: cur_txn_[u.a] = int(u.old); break;
      case UK::OpSnap:
        ops_[u.a] = op_pool_[u.b];
        op_pool_.resize(u.b);
        break;
    }
  }
}

// --- operation control --------------------------------------------------------

bool Tl2Machine::op_pending(int thread) const { return ops_[thread - 1].op != Tl2Op::None; }
Tl2Op Tl2Machine::current_op(int thread) const { return ops_[thread - 1].op; }

void Tl2Machine::start(int thread, Tl2Op op, int reg, int64_t val) {
  OpState& o = ops_[thread - 1];
  if (o.op != Tl2Op::None)
    throw std::logic_error("Tl2Machine: operation already in progress");
  int txn = cur_txn_[thread - 1];
  switch (op) {
    case Tl2Op::Begin:
      if (txn >= 0) throw std::logic_error("Tl2Machine: nested begin");
      break;
    case Tl2Op::Read:
    case Tl2Op::Write:
    case Tl2Op::Commit:
      if (txn < 0) throw std::logic_error("Tl2Machine: no live transaction");
      break;
    case Tl2Op::Fence:
    case Tl2Op::NtRead:
    case Tl2Op::NtWrite:
      if (txn >= 0) throw std::logic_error("Tl2Machine: operation not allowed inside a transaction");
      break;
    case Tl2Op::None:
      throw std::logic_error("Tl2Machine: cannot start None");
  }
  if ((op == Tl2Op::Read || op == Tl2Op::Write || op == Tl2Op::NtRead ||
       op == Tl2Op::NtWrite) &&
      (reg < 0 || reg >= n_regs()))
    throw std::invalid_argument("Tl2Machine: bad register");
  if (journal_on_) {
    push_undo({UK::OpSnap, thread - 1, int32_t(op_pool_.size()), 0});
    op_pool_.push_back(o);
  }
  o = OpState{};
  o.op = op;
  o.reg = reg;
  o.val = val;
}

bool Tl2Machine::blocked(int thread) const {
  const OpState& o = ops_[thread - 1];
  if (o.op != Tl2Op::Fence || o.pc != 20) return false;
  for (int t = o.iter; t < n_threads_; ++t) {
    if (!((o.fence_mask >> t) & 1)) continue;
    return active_[t];  // waiting on this thread's active flag
  }
  return false;
}

bool Tl2Machine::at_schedule_point(int thread) const {
  const OpState& o = ops_[thread - 1];
  switch (o.op) {
    case Tl2Op::None: return true;
    case Tl2Op::Begin: return o.pc == 0 || o.pc == 1;
    case Tl2Op::Read: return o.pc == 0 || o.pc == 7;
    case Tl2Op::Write: return o.pc == 0;
    case Tl2Op::Commit:
      switch (o.pc) {
        case 0: return true;
        case 10: return o.iter > 0;
        case 20: case 40: case 30: case 31: case 32:
        case 50: case 60: case 61: return true;
        default: return false;
      }
    case Tl2Op::Fence: return o.pc == 0 || o.pc == 10 || o.pc == 20;
    case Tl2Op::NtRead:
    case Tl2Op::NtWrite: return o.pc == 0;
  }
  return true;
}

StepOutcome Tl2Machine::step(int thread) {
  OpState& o = ops_[thread - 1];
  if (o.op == Tl2Op::None) throw std::logic_error("Tl2Machine: no operation to step");
  if (blocked(thread)) {
    StepOutcome s;
    s.kind = StepOutcome::Kind::Blocked;
    for (int t = o.iter; t < n_threads_; ++t)
      if ((o.fence_mask >> t) & 1 && active_[t]) {
        s.blocked_on = "active[" + std::to_string(t + 1) + "] == false";
        break;
      }
    return s;
  }
  if (audit_on_) audit_.clear();
  if (journal_on_) {
    push_undo({UK::OpSnap, thread - 1, int32_t(op_pool_.size()), 0});
    op_pool_.push_back(o);
  }
  switch (o.op) {
    case Tl2Op::Begin: return step_begin(thread, o);
    case Tl2Op::Read: return step_read(thread, o);
    case Tl2Op::Write: return step_write(thread, o);
    case Tl2Op::Commit: return step_commit(thread, o);
    case Tl2Op::Fence: return step_fence(thread, o);
    case Tl2Op::NtRead:
    case Tl2Op::NtWrite: return step_nontxn(thread, o);
    case Tl2Op::None: break;
  }
  throw std::logic_error("unreachable");
}

StepOutcome Tl2Machine::run_op(int thread, Tl2Op op, int reg, int64_t val) {
  start(thread, op, reg, val);
  StepOutcome s;
  do {
    s = step(thread);
    if (s.kind == StepOutcome::Kind::Blocked)
      throw std::logic_error("Tl2Machine: run_op blocked on " + s.blocked_on);
  } while (!s.done());
  return s;
}

// --- step functions ------------------------------------------------------------

StepOutcome Tl2Machine::step_begin(int t, OpState& o) {
  StepOutcome s;
  if (o.pc == 0) {
    emit(t, ActionKind::TxBegin);
    sh_active_write(t, true);
    push_undo({UK::TxnCreated, 0, 0, 0});
    push_undo({UK::CurTxn, t - 1, 0, cur_txn_[t - 1]});
    TxnDesc d;
    d.thread = t;
    d.pv.assign(n_regs(), 0);
    txns_.push_back(std::move(d));
    cur_txn_[t - 1] = int(txns_.size()) - 1;
    if (ghost_on_) ghost_txbegin(cur_txn_[t - 1]);
    o.pc = 1;
    return s;
  }
  // pc 1: read timestamp, then return
  int txn = cur_txn_[t - 1];
  push_undo({UK::Rver, txn, 0, txns_[txn].rver});
  txns_[txn].rver = sh_clock_read();
  emit(t, ActionKind::Ok);
  o.op = Tl2Op::None;
  s.kind = StepOutcome::Kind::DoneUnit;
  return s;
}

StepOutcome Tl2Machine::step_read(int t, OpState& o) {
  StepOutcome s;
  int txn = cur_txn_[t - 1];
  switch (o.pc) {
    case 0:
      emit(t, ActionKind::ReadReq, o.reg);
      o.pc = 1;
      return s;
    case 1:
      if (const int64_t* v = wset_get(txn, o.reg)) {
        // buffered value, no validation
        emit(t, ActionKind::RetVal, -1, *v);
        o.op = Tl2Op::None;
        s.kind = StepOutcome::Kind::DoneValue;
        s.value = *v;
        return s;
      }
      o.pc = 2;
      return s;
    case 2: o.ts1 = sh_ver_read(o.reg); o.pc = 3; return s;
    case 3: o.value = sh_reg_read(o.reg); o.pc = 4; return s;
    case 4: o.locked = sh_lock_test(o.reg); o.pc = 5; return s;
    case 5: o.ts2 = sh_ver_read(o.reg); o.pc = 6; return s;
    case 6: {
      bool fail = o.locked || o.ts1 != o.ts2 || txns_[txn].rver < o.ts2;
      if (!fail) {
        rset_add(txn, o.reg);
        emit(t, ActionKind::RetVal, -1, o.value);
        if (ghost_on_) ghost_txread(txn, o.reg, o.value);
        o.op = Tl2Op::None;
        s.kind = StepOutcome::Kind::DoneValue;
        s.value = o.value;
        return s;
      }
      if (!faults_.reorder_handler) emit(t, ActionKind::Aborted);
      else sh_active_write(t, false);
      o.pc = 7;
      return s;
    }
    case 7:
      if (!faults_.reorder_handler) sh_active_write(t, false);
      else emit(t, ActionKind::Aborted);
      push_undo({UK::CurTxn, t - 1, 0, cur_txn_[t - 1]});
      cur_txn_[t - 1] = -1;
      o.op = Tl2Op::None;
      s.kind = StepOutcome::Kind::DoneAborted;
      return s;
  }
  throw std::logic_error("step_read: bad pc");
}

StepOutcome Tl2Machine::step_write(int t, OpState& o) {
  int txn = cur_txn_[t - 1];
  emit(t, ActionKind::WriteReq, o.reg, o.val);
  wset_put(txn, o.reg, o.val);
  emit(t, ActionKind::RetUnit);
  o.op = Tl2Op::None;
  StepOutcome s;
  s.kind = StepOutcome::Kind::DoneUnit;
  return s;
}

StepOutcome Tl2Machine::step_commit(int t, OpState& o) {
  StepOutcome s;
  int txn = cur_txn_[t - 1];
  TxnDesc& d = txns_[txn];
  switch (o.pc) {
    case 0:
      emit(t, ActionKind::TxCommit);
      o.iter = 0;
      o.pc = d.wset.empty() ? 20 : 10;
      return s;
    case 10: {  // lock acquisition, one register per step
      int x = d.wset[o.iter].first;
      if (sh_lock_try(x, txn)) {
        push_undo({UK::LsetPush, txn, 0, 0});
        d.lset.push_back(x);
        if (++o.iter == int(d.wset.size())) o.pc = 20;
      } else {
        o.unlock_iter = 0;
        o.pc = d.lset.empty() ? 31 : 30;
      }
      return s;
    }
    case 20: {  // write timestamp
      push_undo({UK::Wver, txn, 0, d.wver});
      if (faults_.skip_clock_increment) d.wver = sh_clock_read() + 1;
      else d.wver = sh_clock_faa();
      o.iter = 0;
      if (d.rset.empty()) {
        if (ghost_on_) ghost_txvis(txn);
        o.sub = 0;
        o.pc = d.wset.empty() ? 60 : 50;
      } else {
        o.pc = 40;
      }
      return s;
    }
    case 40:  // validation: lock test
      o.locked = sh_lock_test(d.rset[o.iter]);
      o.pc = 41;
      return s;
    case 41: {  // validation: version read and post-validation flag, one step
      int x = d.rset[o.iter];
      int64_t ts = sh_ver_read(x);
      bool fail = o.locked || d.rver < ts;
      push_undo({UK::Pv, txn, x, d.pv[x]});
      d.pv[x] = fail ? 0 : 1;
      if (fail) {
        o.unlock_iter = 0;
        o.pc = d.lset.empty() ? 31 : 30;
        return s;
      }
      if (++o.iter == int(d.rset.size())) {
        if (ghost_on_) ghost_txvis(txn);
        o.iter = 0;
        o.sub = 0;
        o.pc = d.wset.empty() ? 60 : 50;
      } else {
        o.pc = 40;
      }
      return s;
    }
    case 30:  // abort path: release acquired locks, one per step
      sh_lock_release(d.lset[o.unlock_iter]);
      if (++o.unlock_iter == int(d.lset.size())) o.pc = 31;
      return s;
    case 31:
      if (!faults_.reorder_handler) emit(t, ActionKind::Aborted);
      else sh_active_write(t, false);
      o.pc = 32;
      return s;
    case 32:
      if (!faults_.reorder_handler) sh_active_write(t, false);
      else emit(t, ActionKind::Aborted);
      push_undo({UK::CurTxn, t - 1, 0, cur_txn_[t - 1]});
      cur_txn_[t - 1] = -1;
      o.op = Tl2Op::None;
      s.kind = StepOutcome::Kind::DoneAborted;
      return s;
    case 50: {  // write-back: value, version, unlock, one step each
      int x = d.wset[o.iter].first;
      if (o.sub == 0) {
        sh_reg_write(x, d.wset[o.iter].second);
        o.sub = 1;
      } else if (o.sub == 1) {
        sh_ver_write(x, d.wver);
        o.sub = 2;
      } else {
        if (!(faults_.skip_first_unlock && o.iter == 0)) sh_lock_release(x);
        o.sub = 0;
        if (++o.iter == int(d.wset.size())) o.pc = 60;
      }
      return s;
    }
    case 60:
      if (!faults_.reorder_handler) emit(t, ActionKind::Committed);
      else sh_active_write(t, false);
      o.pc = 61;
      return s;
    case 61:
      if (!faults_.reorder_handler) sh_active_write(t, false);
      else emit(t, ActionKind::Committed);
      push_undo({UK::CurTxn, t - 1, 0, cur_txn_[t - 1]});
      cur_txn_[t - 1] = -1;
      o.op = Tl2Op::None;
      s.kind = StepOutcome::Kind::DoneCommitted;
      return s;
  }
  throw std::logic_error("step_commit: bad pc");
}

StepOutcome Tl2Machine::step_fence(int t, OpState& o) {
  StepOutcome s;
  switch (o.pc) {
    case 0:
      emit(t, ActionKind::FBegin);
      o.iter = 0;
      o.fence_mask = 0;
      o.pc = 10;
      return s;
    case 10:  // snapshot active flags, one thread per step
      if (sh_active_read(o.iter + 1)) o.fence_mask |= uint64_t(1) << o.iter;
      if (++o.iter == n_threads_) {
        o.iter = 0;
        o.pc = 20;
      }
      return s;
    case 20: {
      // wait for the next snapshotted thread; blocked() guarantees the flag
      // is clear when this step runs. With nothing left to wait for, return.
      int w = -1;
      for (int u = o.iter; u < n_threads_; ++u)
        if ((o.fence_mask >> u) & 1) { w = u; break; }
      if (w < 0) {
        emit(t, ActionKind::FEnd);
        o.op = Tl2Op::None;
        s.kind = StepOutcome::Kind::DoneUnit;
        return s;
      }
      bool still = sh_active_read(w + 1);
      if (still) {
        s.kind = StepOutcome::Kind::Blocked;
        s.blocked_on = "active[" + std::to_string(w + 1) + "] == false";
        return s;
      }
      o.iter = w + 1;
      return s;
    }
  }
  throw std::logic_error("step_fence: bad pc");
}

StepOutcome Tl2Machine::step_nontxn(int t, OpState& o) {
  StepOutcome s;
  if (o.op == Tl2Op::NtRead) {
    int64_t v = sh_reg_read(o.reg);
    emit(t, ActionKind::ReadReq, o.reg);
    emit(t, ActionKind::RetVal, -1, v);
    if (ghost_on_) {
      int node = ghost_new_nontxn_node(t, o.reg, false, v);
      ghost_ntxread(node, o.reg, v);
    }
    o.op = Tl2Op::None;
    s.kind = StepOutcome::Kind::DoneValue;
    s.value = v;
    return s;
  }
  // uninstrumented write: value cell only, version and lock untouched
  sh_reg_write(o.reg, o.val);
  emit(t, ActionKind::WriteReq, o.reg, o.val);
  emit(t, ActionKind::RetUnit);
  if (ghost_on_) {
    int node = ghost_new_nontxn_node(t, o.reg, true, o.val);
    ghost_ntxwrite(node, o.reg, o.val);
  }
  o.op = Tl2Op::None;
  s.kind = StepOutcome::Kind::DoneUnit;
  return s;
}

// --- ghost graph ----------------------------------------------------------------

bool Tl2Machine::ghost_writes(int node, int reg, int64_t* val_out) const {
  const GhostGraph::Node& n = ghost_.nodes[node];
  if (n.is_txn) {
    if (const int64_t* v = wset_get(n.txn, reg)) {
      if (val_out) *val_out = *v;
      return true;
    }
    return false;
  }
  if (n.is_write && n.reg == reg) {
    if (val_out) *val_out = n.value;
    return true;
  }
  return false;
}

bool Tl2Machine::ghost_reads(int node, int reg) const {
  const GhostGraph::Node& n = ghost_.nodes[node];
  if (n.is_txn) {
    for (const auto& [r, v] : txns_[n.txn].ghost_reads)
      if (r == reg) return true;
    return false;
  }
  return !n.is_write && n.reg == reg;
}

void Tl2Machine::ghost_add_hb_into(int node) {
  Classification cls = classify(history_);
  Relation hb = happens_before(history_, cls, base_relations(history_, cls));
  // map classification node ids to ghost node ids
  std::vector<int> ghost_of(cls.node_count(), -1);
  for (size_t k = 0; k < cls.txns.size(); ++k) ghost_of[k] = txns_[k].ghost_node;
  int m = 0;
  for (int g = 0; g < int(ghost_.nodes.size()); ++g)
    if (!ghost_.nodes[g].is_txn) ghost_of[cls.txns.size() + m++] = g;

  for (auto [i, j] : hb.pairs()) {
    int cj = cls.node_of[j];
    if (cj < 0 || ghost_of[cj] != node) continue;
    int ci = cls.node_of[i];
    if (ci < 0) continue;
    int gi = ghost_of[ci];
    if (gi >= 0 && gi != node) ghost_.hb.insert({gi, node});
  }
}

void Tl2Machine::ghost_txbegin(int txn) {
  GhostGraph::Node n;
  n.is_txn = true;
  n.txn = txn;
  n.thread = txns_[txn].thread;
  ghost_.nodes.push_back(n);
  ghost_.vis.push_back(0);
  txns_[txn].ghost_node = int(ghost_.nodes.size()) - 1;
  ghost_add_hb_into(txns_[txn].ghost_node);
}

void Tl2Machine::ghost_txread(int txn, int reg, int64_t val) {
  int self = txns_[txn].ghost_node;
  if (val == kInitValue) {
    for (int n = 0; n < int(ghost_.nodes.size()); ++n)
      if (n != self && ghost_.vis[n] && ghost_writes(n, reg))
        ghost_.rw[reg].insert({self, n});
  } else {
    const std::vector<int>& order = ghost_.ww[reg];
    for (int n = 0; n < int(ghost_.nodes.size()); ++n) {
      int64_t v;
      if (n == self || !ghost_writes(n, reg, &v) || v != val) continue;
      ghost_.wr[reg].insert({n, self});
      // anti-dependencies on everything ordered after the writer
      auto it = std::find(order.begin(), order.end(), n);
      if (it != order.end())
        for (auto jt = it + 1; jt != order.end(); ++jt)
          if (*jt != self) ghost_.rw[reg].insert({self, *jt});
    }
  }
  txns_[txn].ghost_reads.emplace_back(reg, val);
  ghost_add_hb_into(self);
}

void Tl2Machine::ghost_txvis(int txn) {
  int self = txns_[txn].ghost_node;
  ghost_.vis[self] = 1;
  for (const auto& [x, v] : txns_[txn].wset) {
    ghost_.ww[x].push_back(self);
    for (int n = 0; n < int(ghost_.nodes.size()); ++n)
      if (n != self && ghost_reads(n, x)) ghost_.rw[x].insert({n, self});
  }
}

int Tl2Machine::ghost_new_nontxn_node(int thread, int reg, bool is_write, int64_t val) {
  GhostGraph::Node n;
  n.is_txn = false;
  n.thread = thread;
  n.reg = reg;
  n.is_write = is_write;
  n.value = val;
  ghost_.nodes.push_back(n);
  ghost_.vis.push_back(1);
  return int(ghost_.nodes.size()) - 1;
}

void Tl2Machine::ghost_ntxread(int node, int reg, int64_t val) {
  if (val != kInitValue) {
    int64_t v;
    for (int n = 0; n < int(ghost_.nodes.size()); ++n)
      if (n != node && ghost_writes(n, reg, &v) && v == val)
        ghost_.wr[reg].insert({n, node});
  }
  ghost_add_hb_into(node);
}

void Tl2Machine::ghost_ntxwrite(int node, int reg, int64_t) {
  ghost_.ww[reg].push_back(node);
  for (int n = 0; n < int(ghost_.nodes.size()); ++n)
    if (n != node && ghost_reads(n, reg)) ghost_.rw[reg].insert({n, node});
  ghost_add_hb_into(node);
}

// --- invariants --------------------------------------------------------------

InvariantReport Tl2Machine::assert_invariants() const {
  if (!ghost_on_) throw std::logic_error("assert_invariants requires ghost mode");
  InvariantReport rep;
  auto issue = [&rep](const std::string& clause, const std::string& detail) {
    rep.issues.push_back({clause, detail});
  };

  Classification cls = classify(history_);
  Relation hb_actions = happens_before(history_, cls, base_relations(history_, cls));
  rep.drf = races(history_, cls, hb_actions).empty();

  const int G = int(ghost_.nodes.size());
  auto tstamp = [&](const char* what, int64_t v) {
    if (v == kRverBot) return std::string(what) + "=bot";
    if (v == kWverTop) return std::string(what) + "=top";
    return std::string(what) + "=" + std::to_string(v);
  };

  // INV.2(a): consistency
  if (!is_consistent(history_)) issue("INV.2(a)", "history is not consistent");

  // INV.2(b): write-sets hold the most recent write per register
  for (size_t k = 0; k < cls.txns.size(); ++k) {
    std::map<int, int64_t> last;
    for (int i : cls.txns[k].actions)
      if (history_[i].kind == ActionKind::WriteReq) last[history_[i].reg] = history_[i].val;
    std::map<int, int64_t> ws(txns_[k].wset.begin(), txns_[k].wset.end());
    if (last != ws)
      issue("INV.2(b)", "wset of transaction " + std::to_string(k) +
                            " differs from its history writes");
  }

  // node-level dependency union
  auto dep_contains = [&](int a, int b) {
    for (const auto& [x, s] : ghost_.wr)
      if (s.count({a, b})) return true;
    for (const auto& [x, s] : ghost_.rw)
      if (s.count({a, b})) return true;
    for (const auto& [x, order] : ghost_.ww) {
      auto ia = std::find(order.begin(), order.end(), a);
      auto ib = std::find(order.begin(), order.end(), b);
      if (ia != order.end() && ib != order.end() && ia < ib) return true;
    }
    return false;
  };

  // INV.3: HB;(WR ∪ WW ∪ RW) irreflexive
  for (const auto& [a, b] : ghost_.hb)
    if (dep_contains(b, a))
      issue("INV.3", "HB " + std::to_string(a) + "->" + std::to_string(b) +
                         " composed with a dependency back-edge");

  // lifted real-time order between transactions (ghost node ids)
  std::set<std::pair<int, int>> rt;
  for (size_t a = 0; a < cls.txns.size(); ++a) {
    TxnStatus st = cls.txns[a].status;
    if (st != TxnStatus::Committed && st != TxnStatus::Aborted) continue;
    for (size_t b = 0; b < cls.txns.size(); ++b)
      if (a != b && cls.txns[a].last_index() < cls.txns[b].begin_index())
        rt.insert({txns_[a].ghost_node, txns_[b].ghost_node});
  }

  // INV.4: RT ∪ tx-dependencies acyclic over transactions
  {
    std::vector<int> txnodes;
    for (int n = 0; n < G; ++n)
      if (ghost_.nodes[n].is_txn) txnodes.push_back(n);
    std::map<int, std::vector<int>> adj;
    for (int a : txnodes)
      for (int b : txnodes)
        if (a != b && (rt.count({a, b}) || dep_contains(a, b))) adj[a].push_back(b);
    std::map<int, int> color;
    bool cyclic = false;
    std::function<void(int)> dfs = [&](int u) {
      color[u] = 1;
      for (int v : adj[u]) {
        if (color[v] == 1) { cyclic = true; return; }
        if (!color[v]) dfs(v);
        if (cyclic) return;
      }
      color[u] = 2;
    };
    for (int n : txnodes)
      if (!color[n] && !cyclic) dfs(n);
    if (cyclic) issue("INV.4", "cycle over transactions in RT with dependencies");
  }

  // INV.5: timestamps vs graph edges (transaction endpoints only)
  auto check_pair = [&](const char* clause, int ga, int gb, bool strict, bool use_wver_a) {
    const TxnDesc& A = txns_[ghost_.nodes[ga].txn];
    const TxnDesc& B = txns_[ghost_.nodes[gb].txn];
    int64_t lhs = use_wver_a ? A.wver : A.rver;
    int64_t rhs = strict ? B.wver : B.rver;
    bool ok = strict ? lhs < rhs : lhs <= rhs;
    if (!ok)
      issue(clause, tstamp(use_wver_a ? "wver[T]" : "rver[T]", lhs) + " vs " +
                        tstamp(strict ? "wver[T']" : "rver[T']", rhs));
  };
  for (auto [a, b] : rt) {  // INV.5(a)
    const TxnDesc& A = txns_[ghost_.nodes[a].txn];
    const TxnDesc& B = txns_[ghost_.nodes[b].txn];
    if (B.rver == kRverBot) continue;
    bool ok = ghost_.vis[a] ? A.wver <= B.rver : A.rver <= B.rver;
    if (!ok)
      issue("INV.5(a)", "RT edge with " + tstamp("lhs", ghost_.vis[a] ? A.wver : A.rver) +
                            " > " + tstamp("rver[T']", B.rver));
  }
  for (const auto& [x, s] : ghost_.wr)
    for (auto [a, b] : s)
      if (ghost_.nodes[a].is_txn && ghost_.nodes[b].is_txn) {
        const TxnDesc& A = txns_[ghost_.nodes[a].txn];
        const TxnDesc& B = txns_[ghost_.nodes[b].txn];
        if (!(A.wver <= B.rver))
          issue("INV.5(b)", tstamp("wver[T]", A.wver) + " > " + tstamp("rver[T']", B.rver));
      }
  for (const auto& [x, order] : ghost_.ww)
    for (size_t i = 0; i < order.size(); ++i)
      for (size_t j = i + 1; j < order.size(); ++j)
        if (ghost_.nodes[order[i]].is_txn && ghost_.nodes[order[j]].is_txn)
          check_pair("INV.5(c)", order[i], order[j], true, true);
  for (const auto& [x, s] : ghost_.rw)
    for (auto [a, b] : s)
      if (ghost_.nodes[a].is_txn && ghost_.nodes[b].is_txn) {
        check_pair("INV.5(d)", a, b, true, false);
        if (txns_[ghost_.nodes[a].txn].pv[x]) check_pair("INV.5(e)", a, b, true, true);
      }

  // INV.6: lock holders
  for (int x = 0; x < int(cells_.size()); ++x) {
    int holder = cells_[x].lock;
    if (holder < 0) continue;
    const TxnDesc& L = txns_[holder];
    for (size_t k = 0; k < txns_.size(); ++k) {
      if (int(k) == holder) continue;
      const TxnDesc& T = txns_[k];
      int gn = T.ghost_node;
      if (ghost_writes(gn, x) && ghost_.vis[gn] && !(T.wver < L.wver))
        issue("INV.6(a)", "visible writer T" + std::to_string(k) + " of locked register: " +
                              tstamp("wver[T]", T.wver) + " !< " + tstamp("wver[T']", L.wver));
      if (ghost_reads(gn, x) && !(T.rver < L.wver))
        issue("INV.6(b)", "reader T" + std::to_string(k) + " of locked register: " +
                              tstamp("rver[T]", T.rver) + " !< " + tstamp("wver[T']", L.wver));
      if (T.pv[x] && !(T.wver < L.wver))
        issue("INV.6(c)", "post-validated T" + std::to_string(k) + " of locked register: " +
                              tstamp("wver[T]", T.wver) + " !< " + tstamp("wver[T']", L.wver));
    }
  }

  // INV.7: timestamp well-formedness
  for (size_t k = 0; k < txns_.size(); ++k) {
    const TxnDesc& T = txns_[k];
    std::string who = "T" + std::to_string(k) + ": ";
    if (!(T.rver < T.wver)) issue("INV.7(a)", who + tstamp("rver", T.rver) + " !< " + tstamp("wver", T.wver));
    if (!(T.rver <= clock_)) issue("INV.7(b)", who + tstamp("rver", T.rver) + " > clock");
    if (!(T.wver == kWverTop || T.wver <= clock_))
      issue("INV.7(b)", who + tstamp("wver", T.wver) + " > clock=" + std::to_string(clock_));
    if (T.wver != kWverTop && T.rver == kRverBot)
      issue("INV.7(c)", who + "wver set while rver is bot");
    if (!T.ghost_reads.empty() && T.rver == kRverBot)
      issue("INV.7(d)", who + "non-local read with rver=bot");
    bool any_pv = std::find(T.pv.begin(), T.pv.end(), 1) != T.pv.end();
    if ((any_pv || ghost_.vis[T.ghost_node]) && T.wver == kWverTop)
      issue("INV.7(e)", who + "post-validated or visible with wver=top");
  }

  // INV.8(a,b): unlocked register state agrees with the last writer
  for (int x = 0; x < int(cells_.size()); ++x) {
    if (cells_[x].lock != -1) continue;
    bool vis_writer = false;
    for (int n = 0; n < G; ++n)
      if (ghost_.vis[n] && ghost_writes(n, x)) vis_writer = true;
    if ((cells_[x].value == kInitValue) == vis_writer)
      issue("INV.8(a)", "register " + history_.reg_name(x) +
                            (vis_writer ? " still initial despite a visible writer"
                                        : " non-initial without a visible writer"));
    if (cells_[x].value != kInitValue) {
      auto it = ghost_.ww.find(x);
      int64_t v = kInitValue;
      if (it == ghost_.ww.end() || it->second.empty() ||
          !ghost_writes(it->second.back(), x, &v) || v != cells_[x].value)
        issue("INV.8(a)", "register " + history_.reg_name(x) +
                              " does not hold the last WW writer's value");
    }
    bool vis_txn_writer = false;
    for (int n = 0; n < G; ++n)
      if (ghost_.nodes[n].is_txn && ghost_.vis[n] && ghost_writes(n, x)) vis_txn_writer = true;
    if ((cells_[x].ver == 0) == vis_txn_writer)
      issue("INV.8(b)", "version of " + history_.reg_name(x) +
                            (vis_txn_writer ? " still initial despite a visible writer"
                                            : " non-initial without a visible transaction writer"));
    if (cells_[x].ver != 0) {
      int last_txn = -1;
      auto it = ghost_.ww.find(x);
      if (it != ghost_.ww.end())
        for (int n : it->second)
          if (ghost_.nodes[n].is_txn) last_txn = n;
      if (last_txn < 0 || txns_[ghost_.nodes[last_txn].txn].wver != cells_[x].ver)
        issue("INV.8(b)", "version of " + history_.reg_name(x) +
                              " is not the last transactional writer's wver");
    }
  }

  // INV.8(c): visible transactions post-validated their reads
  for (size_t k = 0; k < txns_.size(); ++k) {
    const TxnDesc& T = txns_[k];
    if (!ghost_.vis[T.ghost_node]) continue;
    for (const auto& [x, v] : T.ghost_reads)
      if (!T.pv[x])
        issue("INV.8(c)", "visible T" + std::to_string(k) + " read " +
                              history_.reg_name(x) + " without post-validation");
  }

  // INV.8(d): no HB edges out of incomplete transactions
  for (size_t k = 0; k < cls.txns.size(); ++k) {
    TxnStatus st = cls.txns[k].status;
    if (st == TxnStatus::Committed || st == TxnStatus::Aborted) continue;
    int gn = txns_[k].ghost_node;
    for (const auto& [a, b] : ghost_.hb)
      if (a == gn)
        issue("INV.8(d)", "HB edge out of incomplete transaction T" + std::to_string(k));
  }

  // INV.8(e): lock holders are incomplete writers, WW-maximal
  for (int x = 0; x < int(cells_.size()); ++x) {
    int holder = cells_[x].lock;
    if (holder < 0) continue;
    TxnStatus st = cls.txns[holder].status;
    if (st == TxnStatus::Committed || st == TxnStatus::Aborted)
      issue("INV.8(e)", "completed transaction T" + std::to_string(holder) +
                            " still holds the lock on " + history_.reg_name(x));
    if (!ghost_writes(txns_[holder].ghost_node, x))
      issue("INV.8(e)", "lock holder T" + std::to_string(holder) + " does not write " +
                            history_.reg_name(x));
    auto it = ghost_.ww.find(x);
    if (it != ghost_.ww.end()) {
      auto pos = std::find(it->second.begin(), it->second.end(), txns_[holder].ghost_node);
      if (pos != it->second.end() && pos + 1 != it->second.end())
        issue("INV.8(e)", "lock holder T" + std::to_string(holder) + " is WW-followed on " +
                              history_.reg_name(x));
    }
  }

  return rep;
}

}  // namespace tmcheck
