#include "tmcheck/atomic_tm.hpp"

#include <algorithm>
#include <stdexcept>

namespace tmcheck {

bool is_non_interleaved(const History& h) {
  return is_non_interleaved(h, classify(h));
}

bool is_non_interleaved(const History& h, const Classification& cls) {
  (void)h;
  // span per node: [first action, last action]
  struct Span { int lo, hi; };
  std::vector<Span> spans;
  spans.reserve(cls.node_count());
  for (const TransactionView& tv : cls.txns)
    spans.push_back({tv.begin_index(), tv.last_index()});
  for (const NonTxnAccess& nu : cls.nontxn)
    spans.push_back({nu.request_index,
                     nu.response_index >= 0 ? nu.response_index : nu.request_index});
  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) {
    return a.lo < b.lo;
  });
  for (size_t i = 1; i < spans.size(); ++i)
    if (spans[i].lo < spans[i - 1].hi) return false;
  return true;
}

bool reads_legal(const History& h) {
  Classification cls = classify(h);
  if (!is_non_interleaved(h, cls))
    throw std::invalid_argument("reads_legal: history is interleaved");
  for (const TransactionView& tv : cls.txns)
    if (tv.status == TxnStatus::CommitPending)
      throw std::invalid_argument("reads_legal: commit-pending transaction present");

  const int n = int(h.size());
  // response index -> its request
  std::map<int, int> pending;
  std::vector<int> request_of(n, -1);
  for (int i = 0; i < n; ++i) {
    if (is_request(h[i].kind)) pending[h[i].thread] = i;
    else if (is_response(h[i].kind)) {
      auto it = pending.find(h[i].thread);
      if (it != pending.end()) { request_of[i] = it->second; pending.erase(it); }
    }
  }

  for (int j = 0; j < n; ++j) {
    if (h[j].kind != ActionKind::RetVal) continue;
    int req = request_of[j];
    if (req < 0 || h[req].kind != ActionKind::ReadReq) continue;
    int x = h[req].reg;
    int reader_node = cls.node_of[req];
    bool reader_is_txn = cls.node_is_txn(reader_node);

    // last preceding write to x not located in an aborted or live transaction
    // different from the reader's own
    int64_t expected = kInitValue;
    for (int i = req - 1; i >= 0; --i) {
      if (h[i].kind != ActionKind::WriteReq || h[i].reg != x) continue;
      int wnode = cls.node_of[i];
      if (cls.node_is_txn(wnode)) {
        TxnStatus st = cls.txn_of_node(wnode).status;
        bool same_txn = reader_is_txn && wnode == reader_node;
        if (!same_txn && (st == TxnStatus::Aborted || st == TxnStatus::Live)) continue;
      }
      expected = h[i].val;
      break;
    }
    if (h[j].val != expected) return false;
  }
  return true;
}

std::optional<std::map<int, CompletionDecision>> atomic_member_witness(const History& h) {
  WellFormednessReport wf = well_formed(h);
  if (!wf.ok()) return std::nullopt;
  Classification cls = classify(h);
  if (!is_non_interleaved(h, cls)) return std::nullopt;

  std::vector<int> pending;
  for (size_t t = 0; t < cls.txns.size(); ++t)
    if (cls.txns[t].status == TxnStatus::CommitPending) pending.push_back(int(t));

  const uint64_t total = uint64_t(1) << pending.size();
  for (uint64_t mask = 0; mask < total; ++mask) {
    std::map<int, CompletionDecision> choice;
    for (size_t b = 0; b < pending.size(); ++b)
      choice[pending[b]] = (mask >> b) & 1 ? CompletionDecision::Commit
                                           : CompletionDecision::Abort;
    if (reads_legal(complete(h, choice))) return choice;
  }
  return std::nullopt;
}

bool atomic_member(const History& h) { return atomic_member_witness(h).has_value(); }

}  // namespace tmcheck
