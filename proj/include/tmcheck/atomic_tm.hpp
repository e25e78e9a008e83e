#pragma once

#include <map>
#include <optional>

#include "tmcheck/history.hpp"

namespace tmcheck {

// True iff no transaction's action span overlaps another transaction's span
// or a non-transactional access. Fence actions may overlap freely.
bool is_non_interleaved(const History& h);
bool is_non_interleaved(const History& h, const Classification& cls);

// Read legality for a non-interleaved history with no commit-pending
// transactions: every read returns the value of the last preceding write not
// located in an aborted or live transaction other than the reader's own, or
// the initial value when there is no such write. Throws on precondition
// violation.
bool reads_legal(const History& completed);

// Membership in the atomic TM: non-interleaved and some completion of the
// commit-pending transactions makes every read legal. Returns the witnessing
// completion choice when a member.
std::optional<std::map<int, CompletionDecision>> atomic_member_witness(const History& h);
bool atomic_member(const History& h);

}  // namespace tmcheck
