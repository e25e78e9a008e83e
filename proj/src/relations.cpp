#include "tmcheck/relations.hpp"

#include <algorithm>
#include <stdexcept>

namespace tmcheck {

Relation& Relation::operator|=(const Relation& other) {
  if (other.n_ != n_) throw std::invalid_argument("relation size mismatch");
  for (size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
  return *this;
}

Relation Relation::compose(const Relation& other) const {
  if (other.n_ != n_) throw std::invalid_argument("relation size mismatch");
  Relation out(n_);
  for (int i = 0; i < n_; ++i) {
    const uint64_t* row = &bits_[size_t(i) * words_];
    uint64_t* orow = &out.bits_[size_t(i) * words_];
    for (int j = 0; j < n_; ++j) {
      if ((row[size_t(j) / 64] >> (j % 64)) & 1) {
        const uint64_t* jrow = &other.bits_[size_t(j) * words_];
        for (size_t w = 0; w < words_; ++w) orow[w] |= jrow[w];
      }
    }
  }
  return out;
}

Relation Relation::closure() const {
  Relation out = *this;
  // Warshall with bitset rows
  for (int k = 0; k < n_; ++k) {
    const uint64_t* krow = &out.bits_[size_t(k) * words_];
    std::vector<uint64_t> ksnap(krow, krow + words_);
    for (int i = 0; i < n_; ++i) {
      if (out.contains(i, k)) {
        uint64_t* irow = &out.bits_[size_t(i) * words_];
        for (size_t w = 0; w < words_; ++w) irow[w] |= ksnap[w];
      }
    }
  }
  return out;
}

bool Relation::irreflexive() const {
  for (int i = 0; i < n_; ++i)
    if (contains(i, i)) return false;
  return true;
}

bool Relation::empty() const {
  for (uint64_t w : bits_)
    if (w) return false;
  return true;
}

size_t Relation::count() const {
  size_t c = 0;
  for (uint64_t w : bits_) c += size_t(__builtin_popcountll(w));
  return c;
}

std::vector<std::pair<int, int>> Relation::pairs() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      if (contains(i, j)) out.emplace_back(i, j);
  return out;
}

RelationBundle base_relations(const History& h) {
  return base_relations(h, classify(h));
}

RelationBundle base_relations(const History& h, const Classification& cls) {
  const int n = int(h.size());
  RelationBundle out;
  out.po = Relation(n);
  out.xpo = Relation(n);
  out.cl = Relation(n);
  out.af = Relation(n);
  out.bf = Relation(n);
  out.rt = Relation(n);

  // per action: does it belong to a non-transactional access?
  std::vector<char> is_nontxn_access(n, 0);
  for (const NonTxnAccess& nu : cls.nontxn) {
    is_nontxn_access[nu.request_index] = 1;
    if (nu.response_index >= 0) is_nontxn_access[nu.response_index] = 1;
  }
  std::vector<char> in_txn(n, 0);
  for (const TransactionView& tv : cls.txns)
    for (int i : tv.actions) in_txn[i] = 1;

  // po / xpo
  for (int i = 0; i < n; ++i) {
    int next_begin = -1;  // first txbegin of h[i].thread after i
    for (int j = i + 1; j < n; ++j) {
      if (h[j].thread != h[i].thread) continue;
      out.po.add(i, j);
      if (next_begin >= 0 && next_begin < j) out.xpo.add(i, j);
      if (h[j].kind == ActionKind::TxBegin && next_begin < 0) next_begin = j;
    }
  }

  // cl / af / bf / rt
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (is_nontxn_access[i] && is_nontxn_access[j]) out.cl.add(i, j);
      if (h[i].kind == ActionKind::FBegin && h[j].kind == ActionKind::TxBegin)
        out.af.add(i, j);
      bool i_completion =
          h[i].kind == ActionKind::Committed || h[i].kind == ActionKind::Aborted;
      if (i_completion && h[j].kind == ActionKind::FEnd) out.bf.add(i, j);
      if (i_completion && h[j].kind == ActionKind::TxBegin) out.rt.add(i, j);
    }
  }

  // wr / txwr: match each read response ret(v) on register x with the unique
  // write(x, v) request
  std::map<int, int> pending_req;  // thread -> request index
  std::vector<int> request_of(n, -1);
  for (int i = 0; i < n; ++i) {
    const Action& a = h[i];
    if (is_request(a.kind)) {
      pending_req[a.thread] = i;
    } else if (is_response(a.kind)) {
      auto it = pending_req.find(a.thread);
      if (it != pending_req.end()) {
        request_of[i] = it->second;
        pending_req.erase(it);
      }
    }
  }
  for (int j = 0; j < n; ++j) {
    if (h[j].kind != ActionKind::RetVal) continue;
    int req = request_of[j];
    if (req < 0 || h[req].kind != ActionKind::ReadReq) continue;
    int x = h[req].reg;
    for (int i = 0; i < n; ++i) {
      if (h[i].kind != ActionKind::WriteReq || h[i].reg != x || h[i].val != h[j].val)
        continue;
      auto [it, fresh] = out.wr.try_emplace(x, Relation(n));
      it->second.add(i, j);
      if (in_txn[i] && in_txn[j]) {
        auto [it2, fresh2] = out.txwr.try_emplace(x, Relation(n));
        it2->second.add(i, j);
      }
    }
  }
  return out;
}

Relation happens_before(const History& h) {
  Classification cls = classify(h);
  return happens_before(h, cls, base_relations(h, cls));
}

Relation happens_before(const History& h, const Classification&,
                        const RelationBundle& rels) {
  Relation u(int(h.size()));
  u |= rels.po;
  u |= rels.cl;
  u |= rels.af;
  u |= rels.bf;
  for (const auto& [x, txwr_x] : rels.txwr) u |= rels.xpo.compose(txwr_x);
  return u.closure();
}

std::vector<ConflictPair> conflicts(const History& h) {
  return conflicts(h, classify(h));
}

std::vector<ConflictPair> conflicts(const History& h, const Classification& cls) {
  std::vector<ConflictPair> out;
  std::vector<int> txn_reqs, nontxn_reqs;
  std::vector<char> in_txn(h.size(), 0);
  for (const TransactionView& tv : cls.txns)
    for (int i : tv.actions) in_txn[i] = 1;
  for (int i = 0; i < int(h.size()); ++i) {
    if (h[i].kind != ActionKind::ReadReq && h[i].kind != ActionKind::WriteReq) continue;
    (in_txn[i] ? txn_reqs : nontxn_reqs).push_back(i);
  }
  for (int nu : nontxn_reqs) {
    for (int tx : txn_reqs) {
      if (h[nu].thread == h[tx].thread) continue;
      if (h[nu].reg != h[tx].reg) continue;
      if (h[nu].kind != ActionKind::WriteReq && h[tx].kind != ActionKind::WriteReq)
        continue;
      out.push_back({nu, tx, h[nu].reg});
    }
  }
  std::sort(out.begin(), out.end(), [](const ConflictPair& a, const ConflictPair& b) {
    int amin = std::min(a.nontxn_index, a.txn_index), amax = std::max(a.nontxn_index, a.txn_index);
    int bmin = std::min(b.nontxn_index, b.txn_index), bmax = std::max(b.nontxn_index, b.txn_index);
    return amin != bmin ? amin < bmin : amax < bmax;
  });
  return out;
}

std::vector<Race> races(const History& h) {
  Classification cls = classify(h);
  return races(h, cls, happens_before(h, cls, base_relations(h, cls)));
}

std::vector<Race> races(const History& h, const Classification& cls,
                        const Relation& hb) {
  std::vector<Race> out;
  for (const ConflictPair& c : conflicts(h, cls)) {
    if (hb.contains(c.nontxn_index, c.txn_index)) continue;
    if (hb.contains(c.txn_index, c.nontxn_index)) continue;
    Race r;
    r.conflict = c;
    int first = std::min(c.nontxn_index, c.txn_index);
    int second = std::max(c.nontxn_index, c.txn_index);
    r.note = "actions " + std::to_string(first) + " and " + std::to_string(second) +
             " on register '" + h.reg_name(c.reg) + "' are hb-unordered both ways";
    out.push_back(std::move(r));
  }
  return out;
}

bool is_drf(const History& h) { return races(h).empty(); }

}  // namespace tmcheck
