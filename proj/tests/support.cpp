#include "support.hpp"

#include <algorithm>
#include <map>

#include "tmcheck/atomic_tm.hpp"
#include "tmcheck/relations.hpp"

namespace tmcheck::test {

History make_history(const std::vector<A>& actions) {
  History h;
  int64_t id = 0;
  for (const A& a : actions) {
    Action act;
    act.id = id++;
    act.thread = a.thread;
    act.kind = a.kind;
    act.reg = a.reg ? h.intern_reg(a.reg) : -1;
    act.val = a.val;
    h.actions.push_back(act);
  }
  return h;
}

History h0() {
  using K = ActionKind;
  return make_history({
      {1, K::TxBegin}, {1, K::Ok}, {1, K::WriteReq, "x", 1}, {1, K::RetUnit},
      {1, K::TxCommit},
      {2, K::TxBegin}, {2, K::Ok}, {2, K::WriteReq, "x", 2},
      {3, K::ReadReq, "x"}, {3, K::RetVal, nullptr, 1},
  });
}

History h_bad() {
  using K = ActionKind;
  return make_history({
      {1, K::TxBegin}, {1, K::Ok}, {1, K::WriteReq, "x", 1}, {1, K::RetUnit},
      {1, K::TxCommit}, {1, K::Committed},
      {2, K::FBegin}, {2, K::FEnd},
      {2, K::ReadReq, "x"}, {2, K::RetVal, nullptr, 0},
  });
}

// --- oracle ---------------------------------------------------------------------

namespace {

struct OracleSearch {
  const History& h;
  std::vector<std::vector<int>> per_thread;  // action indices per thread
  Relation hb;
  std::vector<int> placed_count_per_thread;
  std::vector<char> placed;
  std::vector<int> order;
  uint64_t tried = 0;
  uint64_t cap;
  bool found = false;
  History witness;

  std::vector<char> is_nontxn_request;

  OracleSearch(const History& hh, uint64_t cap_) : h(hh), hb(happens_before(hh)), cap(cap_) {
    std::map<int, int> tmap;
    for (int i = 0; i < int(h.size()); ++i) {
      auto [it, fresh] = tmap.emplace(h[i].thread, int(per_thread.size()));
      if (fresh) per_thread.emplace_back();
      per_thread[it->second].push_back(i);
    }
    placed_count_per_thread.assign(per_thread.size(), 0);
    placed.assign(h.size(), 0);
    is_nontxn_request.assign(h.size(), 0);
    Classification cls = classify(h);
    for (const NonTxnAccess& nu : cls.nontxn)
      if (nu.response_index >= 0) is_nontxn_request[nu.request_index] = 1;
  }

  bool preds_placed(int i) const {
    for (int j = 0; j < int(h.size()); ++j)
      if (hb.contains(j, i) && !placed[j]) return false;
    return true;
  }

  bool search() {
    if (found || tried > cap) return found;
    if (order.size() == h.size()) {
      ++tried;
      History s;
      s.regs = h.regs;
      for (int i : order) s.actions.push_back(h[i]);
      if (well_formed(s).ok() && atomic_member(s)) {
        found = true;
        witness = std::move(s);
      }
      return found;
    }
    for (size_t t = 0; t < per_thread.size(); ++t) {
      int c = placed_count_per_thread[t];
      if (c >= int(per_thread[t].size())) continue;
      int i = per_thread[t][c];
      if (!preds_placed(i)) continue;
      // place i (and the adjacent response of a non-transactional request, so
      // permutations never split an access)
      int take = is_nontxn_request[i] ? 2 : 1;
      for (int k = 0; k < take; ++k) {
        int idx = per_thread[t][c + k];
        placed[idx] = 1;
        order.push_back(idx);
        placed_count_per_thread[t]++;
      }
      if (search()) return true;
      for (int k = 0; k < take; ++k) {
        int idx = order.back();
        order.pop_back();
        placed[idx] = 0;
        placed_count_per_thread[t]--;
        (void)idx;
      }
      if (tried > cap) return false;
    }
    return false;
  }
};

}  // namespace

OracleResult oracle_strong_opacity(const History& h, uint64_t cap) {
  OracleResult res;
  if (h.empty()) {
    res.exists = true;
    res.witness = h;
    res.permutations_tried = 1;
    return res;
  }
  OracleSearch s(h, cap);
  s.search();
  if (s.tried > cap) throw std::runtime_error("oracle: permutation cap exceeded");
  res.exists = s.found;
  res.permutations_tried = s.tried;
  if (s.found) res.witness = std::move(s.witness);
  return res;
}

// --- random histories --------------------------------------------------------------

History random_history(std::mt19937_64& rng, const RandomHistoryOptions& opt) {
  using K = ActionKind;
  History h;
  for (int r = 0; r < opt.regs; ++r) h.intern_reg("r" + std::to_string(r));

  struct TState {
    bool in_txn = false;
    K pending = K::Prim;  // Prim = none
    int pending_reg = -1;
  };
  std::vector<TState> ts(opt.threads);
  int64_t next_val = 1;
  std::vector<std::pair<int, int64_t>> writes;  // (reg, val) seen so far
  int open_txns = 0;
  int64_t id = 0;

  auto emit = [&](int t, K k, int reg = -1, int64_t val = 0) {
    Action a;
    a.id = id++;
    a.thread = t + 1;
    a.kind = k;
    a.reg = reg;
    a.val = val;
    h.actions.push_back(a);
  };
  auto pick_read_value = [&](int reg) -> int64_t {
    int c = int(rng() % 4);
    if (c == 0) return kInitValue;
    if (c <= 2) {
      std::vector<int64_t> same;
      for (auto [r, v] : writes)
        if (r == reg) same.push_back(v);
      if (!same.empty()) return same[rng() % same.size()];
      return kInitValue;
    }
    return 700000 + int64_t(rng() % 16);  // unwritten: an inconsistent read
  };

  int tm_actions = int(2 + rng() % std::max(1, opt.max_actions - 1));
  while (int(h.size()) < tm_actions) {
    int t = int(rng() % opt.threads);
    TState& st = ts[t];
    if (st.pending != K::Prim) {
      // answer the pending transactional request
      K req = st.pending;
      bool abort = rng() % 8 == 0;
      switch (req) {
        case K::TxBegin: emit(t, abort ? K::Aborted : K::Ok); break;
        case K::TxCommit: emit(t, abort ? K::Aborted : K::Committed); break;
        case K::WriteReq: emit(t, abort ? K::Aborted : K::RetUnit); break;
        case K::ReadReq:
          if (abort) emit(t, K::Aborted);
          else emit(t, K::RetVal, -1, pick_read_value(st.pending_reg));
          break;
        default: break;
      }
      if (abort || req == K::TxCommit) {
        st.in_txn = false;
        --open_txns;
      }
      if (req == K::TxBegin && abort) { /* handled above */ }
      if (req == K::TxBegin && !abort) st.in_txn = true;
      st.pending = K::Prim;
      st.pending_reg = -1;
      continue;
    }
    if (st.in_txn) {
      int c = int(rng() % 3);
      int reg = int(rng() % opt.regs);
      if (c == 0) {
        emit(t, K::ReadReq, reg);
        st.pending = K::ReadReq;
        st.pending_reg = reg;
      } else if (c == 1) {
        int64_t v = next_val++;
        emit(t, K::WriteReq, reg, v);
        writes.emplace_back(reg, v);
        st.pending = K::WriteReq;
      } else {
        emit(t, K::TxCommit);
        st.pending = K::TxCommit;
      }
      continue;
    }
    // idle thread
    int c = int(rng() % 4);
    if (c == 0) {
      emit(t, K::TxBegin);
      st.pending = K::TxBegin;
      ++open_txns;
    } else if (c == 1) {
      int reg = int(rng() % opt.regs);
      emit(t, K::ReadReq, reg);
      emit(t, K::RetVal, -1, pick_read_value(reg));
    } else if (c == 2) {
      int reg = int(rng() % opt.regs);
      int64_t v = next_val++;
      emit(t, K::WriteReq, reg, v);
      writes.emplace_back(reg, v);
      emit(t, K::RetUnit);
    } else if (opt.allow_fences && open_txns == 0 && rng() % 2 == 0) {
      emit(t, K::FBegin);
      emit(t, K::FEnd);
    } else {
      emit(t, K::TxBegin);
      st.pending = K::TxBegin;
      ++open_txns;
    }
  }
  return h;
}

// --- most general client ---------------------------------------------------------------

MgcResult run_most_general_client(uint64_t seed, int threads, int regs, int max_steps,
                                  Tl2Faults faults) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> reg_names;
  for (int r = 0; r < regs; ++r) reg_names.push_back("r" + std::to_string(r));
  Tl2Machine m(threads, reg_names, /*ghost=*/true, faults);

  MgcResult res;
  int64_t next_val = 1;
  for (int step = 0; step < max_steps; ++step) {
    // choose a runnable thread
    std::vector<int> runnable;
    for (int t = 1; t <= threads; ++t) {
      if (m.op_pending(t)) {
        if (!m.blocked(t)) runnable.push_back(t);
      } else {
        runnable.push_back(t);
      }
    }
    if (runnable.empty()) break;
    int t = runnable[rng() % runnable.size()];
    if (!m.op_pending(t)) {
      if (m.current_txn(t) >= 0) {
        int c = int(rng() % 4);
        int reg = int(rng() % regs);
        if (c == 0) m.start(t, Tl2Op::Read, reg);
        else if (c == 1) m.start(t, Tl2Op::Write, reg, next_val++);
        else m.start(t, Tl2Op::Commit);
      } else {
        int c = int(rng() % 8);
        int reg = int(rng() % regs);
        if (c < 3) m.start(t, Tl2Op::Begin);
        else if (c < 5) m.start(t, Tl2Op::NtRead, reg);
        else if (c < 7) m.start(t, Tl2Op::NtWrite, reg, next_val++);
        else m.start(t, Tl2Op::Fence);
      }
    }
    StepOutcome out = m.step(t);
    if (out.kind == StepOutcome::Kind::Blocked) continue;
    ++res.steps;
    InvariantReport rep = m.assert_invariants();
    if (rep.drf) {
      ++res.drf_checked_steps;
      if (!rep.ok())
        for (const InvariantIssue& i : rep.issues)
          res.failures.push_back(i.clause + ": " + i.detail);
    }
    if (!res.failures.empty()) break;
  }
  res.final_wf = well_formed(m.history()).ok();
  return res;
}

}  // namespace tmcheck::test
