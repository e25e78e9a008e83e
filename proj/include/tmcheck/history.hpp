#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tmcheck {

// The distinguished initial value of every register.
constexpr int64_t kInitValue = 0;

enum class ActionKind : uint8_t {
  Prim,       // thread-local primitive command
  TxBegin,    // request: enter atomic block
  Ok,         // response to TxBegin
  TxCommit,   // request: commit
  Committed,  // response to TxCommit
  Aborted,    // abort response to any transactional request
  WriteReq,   // request: write(reg, val)
  ReadReq,    // request: read(reg)
  RetVal,     // response to ReadReq, carries val
  RetUnit,    // response to WriteReq
  FBegin,     // request: fence begin
  FEnd,       // response: fence end
};

const char* kind_name(ActionKind k);

struct Action {
  int64_t id = 0;
  int thread = 0;  // 1-based
  ActionKind kind = ActionKind::Prim;
  int reg = -1;    // index into the owning trace's register table, -1 if none
  int64_t val = 0; // payload of WriteReq / RetVal

  friend bool operator==(const Action& a, const Action& b) = default;
};

bool is_request(ActionKind k);
bool is_response(ActionKind k);
bool is_tm_interface(ActionKind k);
// True when resp is a legal response kind for the request kind req.
bool response_matches(ActionKind req, ActionKind resp);

struct Trace {
  std::vector<Action> actions;
  std::vector<std::string> regs;  // register name table

  int reg_index(const std::string& name) const;
  int intern_reg(const std::string& name);
  const std::string& reg_name(int idx) const;

  size_t size() const { return actions.size(); }
  bool empty() const { return actions.empty(); }

  Action& operator[](size_t i) { return actions[i]; }
  const Action& operator[](size_t i) const { return actions[i]; }
};

// A history is a trace containing only TM interface actions.
using History = Trace;

// Projection of a trace onto its TM interface actions.
History history_of(const Trace& t);

// Compares two actions that may live in different traces (register names are
// resolved through each trace's table).
bool same_action(const Trace& ta, const Action& a, const Trace& tb, const Action& b);

// ---------------------------------------------------------------------------
// Well-formedness

struct WfViolation {
  int rule = 0;   // 1..10
  int index = 0;  // offending action index (or -1)
  std::string message;
};

struct WellFormednessReport {
  std::vector<WfViolation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

// Checks the ten trace well-formedness rules. Violations are data, not errors.
WellFormednessReport well_formed(const Trace& trace);

// ---------------------------------------------------------------------------
// Transactions and non-transactional accesses

enum class TxnStatus { Committed, Aborted, CommitPending, Live };

const char* status_name(TxnStatus s);

struct TransactionView {
  int thread = 0;
  std::vector<int> actions;  // indices into the parent history, ascending
  TxnStatus status = TxnStatus::Live;

  int begin_index() const { return actions.front(); }
  int last_index() const { return actions.back(); }
};

struct NonTxnAccess {
  int request_index = -1;
  int response_index = -1;
  int thread = 0;
  int reg = -1;
  bool is_write = false;
  int64_t value = 0;  // value written, or value returned by the read
};

struct Classification {
  std::vector<TransactionView> txns;  // ordered by begin index
  std::vector<NonTxnAccess> nontxn;   // ordered by request index
  std::vector<int> fence_actions;     // indices of FBegin/FEnd actions
  // Per action: node id, where ids 0..txns-1 are transactions and
  // txns..txns+nontxn-1 are non-transactional accesses; -1 for fence actions.
  std::vector<int> node_of;

  int node_count() const { return int(txns.size() + nontxn.size()); }
  bool node_is_txn(int node) const { return node < int(txns.size()); }
  const TransactionView& txn_of_node(int node) const { return txns[node]; }
  const NonTxnAccess& nontxn_of_node(int node) const { return nontxn[node - txns.size()]; }
  int node_thread(int node) const;
  // Action indices of a node, ascending.
  std::vector<int> node_actions(int node) const;
};

// Partitions a well-formed history into transactions, non-transactional
// accesses and fence actions. Throws std::invalid_argument on a malformed
// history.
Classification classify(const History& h);

enum class CompletionDecision { Commit, Abort };

// Inserts a Committed/Aborted action immediately after the TxCommit of every
// commit-pending transaction, per the supplied decisions. Keys are ordinals
// into classify(h).txns and must cover exactly the commit-pending set.
History complete(const History& h, const std::map<int, CompletionDecision>& decisions);

// ---------------------------------------------------------------------------
// Wire format (line-delimited JSON)

// Canonical byte encoding; decode(encode(t)) == t and encode(decode(b)) == b
// for canonical b.
std::string encode(const Trace& t);

// Parses the JSONL wire form. Throws std::runtime_error on malformed lines,
// duplicate ids or unknown kinds. Does not require well-formedness.
Trace decode(const std::string& bytes);

Trace decode_file(const std::string& path);
void encode_file(const Trace& t, const std::string& path);

}  // namespace tmcheck
