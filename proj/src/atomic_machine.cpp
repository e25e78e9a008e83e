#include "tmcheck/atomic_machine.hpp"

#include <algorithm>
#include <stdexcept>

namespace tmcheck {

AtomicMachine::AtomicMachine(int n_threads, std::vector<std::string> registers)
    : n_threads_(n_threads) {
  cells_.assign(registers.size(), kInitValue);
  live_.assign(n_threads, 0);
  buf_.resize(n_threads);
  history_.regs = std::move(registers);
}

bool AtomicMachine::any_live() const {
  return std::find(live_.begin(), live_.end(), 1) != live_.end();
}

void AtomicMachine::emit(int thread, ActionKind kind, int reg, int64_t val) {
  Action a;
  a.id = int64_t(history_.actions.size());
  a.thread = thread;
  a.kind = kind;
  a.reg = reg;
  a.val = val;
  push_undo({UK::HistPush, 0, 0, 0});
  history_.actions.push_back(a);
}

void AtomicMachine::buf_put(int thread, int reg, int64_t val) {
  auto& b = buf_[thread - 1];
  auto it = std::lower_bound(b.begin(), b.end(), reg,
                             [](const auto& p, int r) { return p.first < r; });
  if (it != b.end() && it->first == reg) {
    push_undo({UK::BufOverwrite, thread - 1, int32_t(it - b.begin()), it->second});
    it->second = val;
  } else {
    push_undo({UK::BufInsert, thread - 1, int32_t(it - b.begin()), 0});
    b.insert(it, {reg, val});
  }
}

const int64_t* AtomicMachine::buf_get(int thread, int reg) const {
  const auto& b = buf_[thread - 1];
  auto it = std::lower_bound(b.begin(), b.end(), reg,
                             [](const auto& p, int r) { return p.first < r; });
  if (it != b.end() && it->first == reg) return &it->second;
  return nullptr;
}

void AtomicMachine::buf_clear(int thread) {
  auto& b = buf_[thread - 1];
  if (journal_on_) {
    // stash the cleared entries so undo can restore them
    push_undo({UK::BufClear, thread - 1, int32_t(b.size()), int64_t(buf_pool_.size())});
    for (const auto& e : b) buf_pool_.push_back(e);
  }
  b.clear();
}

void AtomicMachine::undo_to(size_t m) {
  while (journal_.size() > m) {
    const Undo u = journal_.back();
    journal_.pop_back();
    switch (u.k) {
      case UK::Cell: cells_[u.a] = u.old; break;
      case UK::Live: live_[u.a] = char(u.old); break;
      case UK::HistPush: history_.actions.pop_back(); break;
      case UK::BufInsert: buf_[u.a].erase(buf_[u.a].begin() + u.b); break;
      case UK::BufOverwrite: buf_[u.a][u.b].second = u.old; break;
      case UK::BufClear: {
        size_t start = size_t(u.old);
        buf_[u.a].assign(buf_pool_.begin() + start, buf_pool_.begin() + start + u.b);
        buf_pool_.resize(start);
        break;
      }
    }
  }
}

void AtomicMachine::begin_block(int thread) {
  if (live_[thread - 1]) throw std::logic_error("AtomicMachine: nested block");
  emit(thread, ActionKind::TxBegin);
  emit(thread, ActionKind::Ok);
  push_undo({UK::Live, thread - 1, 0, live_[thread - 1]});
  live_[thread - 1] = 1;
}

void AtomicMachine::begin_block_aborted(int thread) {
  if (live_[thread - 1]) throw std::logic_error("AtomicMachine: nested block");
  emit(thread, ActionKind::TxBegin);
  emit(thread, ActionKind::Aborted);
}

int64_t AtomicMachine::tx_read(int thread, int reg) {
  emit(thread, ActionKind::ReadReq, reg);
  int64_t v = cells_[reg];
  if (const int64_t* b = buf_get(thread, reg)) v = *b;
  emit(thread, ActionKind::RetVal, -1, v);
  return v;
}

void AtomicMachine::tx_write(int thread, int reg, int64_t val) {
  emit(thread, ActionKind::WriteReq, reg, val);
  emit(thread, ActionKind::RetUnit);
  buf_put(thread, reg, val);
}

void AtomicMachine::tx_abort_at_read(int thread, int reg) {
  emit(thread, ActionKind::ReadReq, reg);
  emit(thread, ActionKind::Aborted);
  buf_clear(thread);
  push_undo({UK::Live, thread - 1, 0, live_[thread - 1]});
  live_[thread - 1] = 0;
}

void AtomicMachine::tx_abort_at_write(int thread, int reg, int64_t val) {
  emit(thread, ActionKind::WriteReq, reg, val);
  emit(thread, ActionKind::Aborted);
  buf_clear(thread);
  push_undo({UK::Live, thread - 1, 0, live_[thread - 1]});
  live_[thread - 1] = 0;
}

void AtomicMachine::end_block(int thread, bool commit) {
  emit(thread, ActionKind::TxCommit);
  emit(thread, commit ? ActionKind::Committed : ActionKind::Aborted);
  if (commit) {
    for (const auto& [reg, val] : buf_[thread - 1]) {
      push_undo({UK::Cell, reg, 0, cells_[reg]});
      cells_[reg] = val;
    }
  }
  buf_clear(thread);
  push_undo({UK::Live, thread - 1, 0, live_[thread - 1]});
  live_[thread - 1] = 0;
}

void AtomicMachine::abandon_block(int) {
  // a diverged block keeps its live flag: fences block on it forever
}

void AtomicMachine::fence(int thread) {
  if (!fence_enabled()) throw std::logic_error("AtomicMachine: fence while a block is live");
  emit(thread, ActionKind::FBegin);
  emit(thread, ActionKind::FEnd);
}

int64_t AtomicMachine::nt_read(int thread, int reg) {
  if (live_[thread - 1]) throw std::logic_error("AtomicMachine: non-transactional access inside a block");
  emit(thread, ActionKind::ReadReq, reg);
  emit(thread, ActionKind::RetVal, -1, cells_[reg]);
  return cells_[reg];
}

void AtomicMachine::nt_write(int thread, int reg, int64_t val) {
  if (live_[thread - 1]) throw std::logic_error("AtomicMachine: non-transactional access inside a block");
  emit(thread, ActionKind::WriteReq, reg, val);
  emit(thread, ActionKind::RetUnit);
  push_undo({UK::Cell, reg, 0, cells_[reg]});
  cells_[reg] = val;
}

}  // namespace tmcheck
