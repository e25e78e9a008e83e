#include "tmcheck/history.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace tmcheck {

const char* kind_name(ActionKind k) {
  switch (k) {
    case ActionKind::Prim: return "prim";
    case ActionKind::TxBegin: return "txbegin";
    case ActionKind::Ok: return "ok";
    case ActionKind::TxCommit: return "txcommit";
    case ActionKind::Committed: return "committed";
    case ActionKind::Aborted: return "aborted";
    case ActionKind::WriteReq: return "write";
    case ActionKind::ReadReq: return "read";
    case ActionKind::RetVal: return "ret";
    case ActionKind::RetUnit: return "retu";
    case ActionKind::FBegin: return "fbegin";
    case ActionKind::FEnd: return "fend";
  }
  return "?";
}

bool is_request(ActionKind k) {
  switch (k) {
    case ActionKind::TxBegin:
    case ActionKind::TxCommit:
    case ActionKind::WriteReq:
    case ActionKind::ReadReq:
    case ActionKind::FBegin:
      return true;
    default:
      return false;
  }
}

bool is_response(ActionKind k) {
  switch (k) {
    case ActionKind::Ok:
    case ActionKind::Committed:
    case ActionKind::Aborted:
    case ActionKind::RetVal:
    case ActionKind::RetUnit:
    case ActionKind::FEnd:
      return true;
    default:
      return false;
  }
}

bool is_tm_interface(ActionKind k) { return k != ActionKind::Prim; }

bool response_matches(ActionKind req, ActionKind resp) {
  switch (req) {
    case ActionKind::TxBegin:
      return resp == ActionKind::Ok || resp == ActionKind::Aborted;
    case ActionKind::TxCommit:
      return resp == ActionKind::Committed || resp == ActionKind::Aborted;
    case ActionKind::WriteReq:
      return resp == ActionKind::RetUnit || resp == ActionKind::Aborted;
    case ActionKind::ReadReq:
      return resp == ActionKind::RetVal || resp == ActionKind::Aborted;
    case ActionKind::FBegin:
      return resp == ActionKind::FEnd;
    default:
      return false;
  }
}

int Trace::reg_index(const std::string& name) const {
  for (size_t i = 0; i < regs.size(); ++i)
    if (regs[i] == name) return int(i);
  return -1;
}

int Trace::intern_reg(const std::string& name) {
  int i = reg_index(name);
  if (i >= 0) return i;
  regs.push_back(name);
  return int(regs.size()) - 1;
}

const std::string& Trace::reg_name(int idx) const {
  static const std::string none = "";
  if (idx < 0 || idx >= int(regs.size())) return none;
  return regs[size_t(idx)];
}

History history_of(const Trace& t) {
  History h;
  h.regs = t.regs;
  for (const Action& a : t.actions)
    if (is_tm_interface(a.kind)) h.actions.push_back(a);
  return h;
}

bool same_action(const Trace& ta, const Action& a, const Trace& tb, const Action& b) {
  if (a.id != b.id || a.thread != b.thread || a.kind != b.kind || a.val != b.val) return false;
  if ((a.reg < 0) != (b.reg < 0)) return false;
  if (a.reg >= 0 && ta.reg_name(a.reg) != tb.reg_name(b.reg)) return false;
  return true;
}

const char* status_name(TxnStatus s) {
  switch (s) {
    case TxnStatus::Committed: return "committed";
    case TxnStatus::Aborted: return "aborted";
    case TxnStatus::CommitPending: return "commit-pending";
    case TxnStatus::Live: return "live";
  }
  return "?";
}

std::string WellFormednessReport::to_string() const {
  std::ostringstream os;
  for (const WfViolation& v : violations)
    os << "rule " << v.rule << " at action " << v.index << ": " << v.message << "\n";
  return os.str();
}

namespace {

// True when every transaction thread t had opened before position i is
// already completed (committed/aborted) in trace[0..i).
struct ThreadTxnTracker {
  // per thread: number of open (begun, not yet completed) transactions
  std::unordered_map<int, int> open;
  void feed(const Action& a) {
    if (a.kind == ActionKind::TxBegin) open[a.thread]++;
    else if (a.kind == ActionKind::Committed || a.kind == ActionKind::Aborted)
      open[a.thread]--;
  }
  bool all_completed(int thread) const {
    auto it = open.find(thread);
    return it == open.end() || it->second <= 0;
  }
};

}  // namespace

WellFormednessReport well_formed(const Trace& trace) {
  WellFormednessReport rep;
  const auto& acts = trace.actions;
  const int n = int(acts.size());
  auto flag = [&rep](int rule, int index, std::string msg) {
    rep.violations.push_back({rule, index, std::move(msg)});
  };

  // rule 1: unique action identifiers
  {
    std::unordered_map<int64_t, int> seen;
    for (int i = 0; i < n; ++i) {
      auto [it, fresh] = seen.emplace(acts[i].id, i);
      if (!fresh)
        flag(1, i, "duplicate action id " + std::to_string(acts[i].id) +
                       " (first at " + std::to_string(it->second) + ")");
    }
  }

  // rule 2: primitive commands only touch their own thread's locals. The
  // action model carries opaque command tags, so thread-locality is
  // guaranteed by construction of traces; nothing checkable remains here.

  // rule 3: write values are pairwise distinct and differ from the initial value
  {
    std::unordered_map<int64_t, int> writes;
    for (int i = 0; i < n; ++i) {
      if (acts[i].kind != ActionKind::WriteReq) continue;
      if (acts[i].val == kInitValue)
        flag(3, i, "write of the initial value");
      auto [it, fresh] = writes.emplace(acts[i].val, i);
      if (!fresh)
        flag(3, i, "duplicate write value " + std::to_string(acts[i].val) +
                       " (first at " + std::to_string(it->second) + ")");
    }
  }

  // rule 4: in the per-thread projection, a request action is never
  // immediately followed by a primitive action
  {
    std::unordered_map<int, int> last_of_thread;  // thread -> index
    for (int i = 0; i < n; ++i) {
      auto it = last_of_thread.find(acts[i].thread);
      if (it != last_of_thread.end()) {
        const Action& prev = acts[it->second];
        if (is_request(prev.kind) && acts[i].kind == ActionKind::Prim)
          flag(4, i, "primitive action while a request is pending");
      }
      last_of_thread[acts[i].thread] = i;
    }
  }

  // rule 5: per thread, the history projection alternates request/response
  // starting with a request, with matching kinds
  {
    std::unordered_map<int, int> pending;  // thread -> index of pending request, or -1
    for (int i = 0; i < n; ++i) {
      const Action& a = acts[i];
      if (!is_tm_interface(a.kind)) continue;
      auto& p = pending.try_emplace(a.thread, -1).first->second;
      if (is_request(a.kind)) {
        if (p >= 0)
          flag(5, i, "request while an earlier request is unanswered");
        p = i;
      } else {  // response
        if (p < 0) {
          flag(5, i, "response without a pending request");
        } else {
          if (!response_matches(acts[p].kind, a.kind))
            flag(5, i, std::string("response ") + kind_name(a.kind) +
                           " does not match request " + kind_name(acts[p].kind));
          p = -1;
        }
      }
    }
  }

  // rule 6: per thread, txbegin alternates with committed/aborted, starting
  // with txbegin
  {
    std::unordered_map<int, bool> in_txn;
    for (int i = 0; i < n; ++i) {
      const Action& a = acts[i];
      auto& open = in_txn.try_emplace(a.thread, false).first->second;
      if (a.kind == ActionKind::TxBegin) {
        if (open) flag(6, i, "txbegin inside an open transaction");
        open = true;
      } else if (a.kind == ActionKind::Committed || a.kind == ActionKind::Aborted) {
        if (!open) flag(6, i, "transaction completion without txbegin");
        open = false;
      }
    }
  }

  // rule 7: non-transactional accesses execute atomically: the response
  // immediately follows the request in the whole trace
  {
    ThreadTxnTracker txns;
    for (int i = 0; i < n; ++i) {
      const Action& a = acts[i];
      bool nontxn_req = (a.kind == ActionKind::ReadReq || a.kind == ActionKind::WriteReq) &&
                        txns.all_completed(a.thread);
      if (nontxn_req) {
        if (i + 1 >= n) {
          // a trailing unanswered non-transactional request is a violation:
          // the access must execute atomically once issued
          flag(7, i, "non-transactional request without adjacent response");
        } else {
          const Action& next = acts[i + 1];
          if (next.thread != a.thread || !response_matches(a.kind, next.kind))
            flag(7, i, "non-transactional request not answered by the next action");
        }
      }
      txns.feed(a);
    }
  }

  // rule 8: non-transactional accesses never abort
  {
    ThreadTxnTracker txns;
    for (int i = 0; i < n; ++i) {
      const Action& a = acts[i];
      bool nontxn_req = (a.kind == ActionKind::ReadReq || a.kind == ActionKind::WriteReq) &&
                        txns.all_completed(a.thread);
      if (nontxn_req && i + 1 < n && acts[i + 1].thread == a.thread &&
          acts[i + 1].kind == ActionKind::Aborted)
        flag(8, i, "non-transactional access aborted");
      txns.feed(a);
    }
  }

  // rule 9: fence actions do not occur inside transactions
  {
    ThreadTxnTracker txns;
    for (int i = 0; i < n; ++i) {
      const Action& a = acts[i];
      if ((a.kind == ActionKind::FBegin || a.kind == ActionKind::FEnd) &&
          !txns.all_completed(a.thread))
        flag(9, i, "fence action inside a transaction");
      txns.feed(a);
    }
  }

  // rule 10: a fence waits for every transaction begun before it: if a
  // txbegin by t precedes an fbegin whose fend is also present, a completion
  // by t occurs between the txbegin and the fend
  {
    for (int i = 0; i < n; ++i) {
      if (acts[i].kind != ActionKind::FBegin) continue;
      int fend = -1;
      for (int j = i + 1; j < n; ++j) {
        if (acts[j].thread == acts[i].thread && acts[j].kind == ActionKind::FEnd) {
          fend = j;
          break;
        }
      }
      if (fend < 0) continue;
      for (int b = 0; b < i; ++b) {
        if (acts[b].kind != ActionKind::TxBegin) continue;
        int t = acts[b].thread;
        bool completed = false;
        for (int m = b + 1; m < fend && !completed; ++m)
          completed = acts[m].thread == t && (acts[m].kind == ActionKind::Committed ||
                                              acts[m].kind == ActionKind::Aborted);
        if (!completed)
          flag(10, fend, "fence completed while the transaction begun at " +
                             std::to_string(b) + " by thread " + std::to_string(t) +
                             " is incomplete");
      }
    }
  }

  std::stable_sort(rep.violations.begin(), rep.violations.end(),
                   [](const WfViolation& a, const WfViolation& b) {
                     return a.rule != b.rule ? a.rule < b.rule : a.index < b.index;
                   });
  return rep;
}

int Classification::node_thread(int node) const {
  return node_is_txn(node) ? txns[node].thread : nontxn[node - txns.size()].thread;
}

std::vector<int> Classification::node_actions(int node) const {
  if (node_is_txn(node)) return txns[node].actions;
  const NonTxnAccess& nu = nontxn[node - txns.size()];
  if (nu.response_index >= 0) return {nu.request_index, nu.response_index};
  return {nu.request_index};
}

Classification classify(const History& h) {
  WellFormednessReport wf = well_formed(h);
  if (!wf.ok())
    throw std::invalid_argument("classify: malformed history:\n" + wf.to_string());
  for (const Action& a : h.actions)
    if (!is_tm_interface(a.kind))
      throw std::invalid_argument("classify: trace contains primitive actions");

  Classification out;
  out.node_of.assign(h.size(), -1);
  std::unordered_map<int, int> open_txn;  // thread -> txn ordinal
  std::vector<std::pair<int, int>> nontxn_pending;  // (thread, request index)

  const int n = int(h.size());
  for (int i = 0; i < n; ++i) {
    const Action& a = h[i];
    auto open_it = open_txn.find(a.thread);
    bool in_txn = open_it != open_txn.end();

    if (a.kind == ActionKind::FBegin || a.kind == ActionKind::FEnd) {
      out.fence_actions.push_back(i);
      continue;
    }
    if (a.kind == ActionKind::TxBegin) {
      TransactionView tv;
      tv.thread = a.thread;
      tv.actions.push_back(i);
      out.txns.push_back(std::move(tv));
      open_txn[a.thread] = int(out.txns.size()) - 1;
      continue;
    }
    if (in_txn) {
      TransactionView& tv = out.txns[open_it->second];
      tv.actions.push_back(i);
      if (a.kind == ActionKind::Committed || a.kind == ActionKind::Aborted)
        open_txn.erase(open_it);
      continue;
    }
    // non-transactional access
    if (a.kind == ActionKind::ReadReq || a.kind == ActionKind::WriteReq) {
      NonTxnAccess nu;
      nu.request_index = i;
      nu.thread = a.thread;
      nu.reg = a.reg;
      nu.is_write = a.kind == ActionKind::WriteReq;
      if (nu.is_write) nu.value = a.val;
      out.nontxn.push_back(nu);
      nontxn_pending.emplace_back(a.thread, int(out.nontxn.size()) - 1);
    } else {
      // response to a pending non-transactional request (adjacent by rule 7)
      for (auto it = nontxn_pending.begin(); it != nontxn_pending.end(); ++it) {
        if (it->first == a.thread) {
          NonTxnAccess& nu = out.nontxn[it->second];
          nu.response_index = i;
          if (a.kind == ActionKind::RetVal) nu.value = a.val;
          nontxn_pending.erase(it);
          break;
        }
      }
    }
  }

  // statuses
  for (TransactionView& tv : out.txns) {
    const Action& last = h[tv.last_index()];
    switch (last.kind) {
      case ActionKind::Committed: tv.status = TxnStatus::Committed; break;
      case ActionKind::Aborted: tv.status = TxnStatus::Aborted; break;
      case ActionKind::TxCommit: tv.status = TxnStatus::CommitPending; break;
      default: tv.status = TxnStatus::Live; break;
    }
  }

  // node ids: transactions first, then non-transactional accesses
  for (size_t t = 0; t < out.txns.size(); ++t)
    for (int i : out.txns[t].actions) out.node_of[i] = int(t);
  for (size_t m = 0; m < out.nontxn.size(); ++m) {
    out.node_of[out.nontxn[m].request_index] = int(out.txns.size() + m);
    if (out.nontxn[m].response_index >= 0)
      out.node_of[out.nontxn[m].response_index] = int(out.txns.size() + m);
  }
  return out;
}

History complete(const History& h, const std::map<int, CompletionDecision>& decisions) {
  Classification cls = classify(h);
  std::set<int> pending;
  for (size_t t = 0; t < cls.txns.size(); ++t)
    if (cls.txns[t].status == TxnStatus::CommitPending) pending.insert(int(t));

  for (const auto& [ordinal, _] : decisions)
    if (!pending.count(ordinal))
      throw std::invalid_argument("complete: decision for a transaction that is not commit-pending");
  for (int ordinal : pending)
    if (!decisions.count(ordinal))
      throw std::invalid_argument("complete: missing decision for commit-pending transaction");

  int64_t next_id = 0;
  for (const Action& a : h.actions) next_id = std::max(next_id, a.id + 1);

  // completion action to insert after a given position
  std::map<int, Action> insert_after;
  for (const auto& [ordinal, decision] : decisions) {
    const TransactionView& tv = cls.txns[ordinal];
    Action a;
    a.id = next_id++;
    a.thread = tv.thread;
    a.kind = decision == CompletionDecision::Commit ? ActionKind::Committed
                                                    : ActionKind::Aborted;
    insert_after.emplace(tv.last_index(), a);
  }

  History out;
  out.regs = h.regs;
  for (int i = 0; i < int(h.size()); ++i) {
    out.actions.push_back(h[i]);
    auto it = insert_after.find(i);
    if (it != insert_after.end()) out.actions.push_back(it->second);
  }
  return out;
}

}  // namespace tmcheck
