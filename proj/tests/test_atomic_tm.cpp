#include "doctest.h"

#include <random>

#include "tmcheck/atomic_tm.hpp"

#include "support.hpp"

using namespace tmcheck;
using namespace tmcheck::test;
using K = ActionKind;

TEST_CASE("is_non_interleaved: H_0 yes, overlapping transactions no, empty yes") {
  CHECK(is_non_interleaved(h0()));
  History overlapping = make_history({
      {1, K::TxBegin}, {1, K::Ok},
      {2, K::TxBegin}, {2, K::Ok},
      {1, K::WriteReq, "x", 1}, {1, K::RetUnit},
  });
  CHECK_FALSE(is_non_interleaved(overlapping));
  CHECK(is_non_interleaved(History{}));
}

TEST_CASE("is_non_interleaved: a fence may span a transaction") {
  History h = make_history({
      {1, K::TxBegin}, {1, K::Ok}, {1, K::TxCommit},
      {2, K::FBegin}, {1, K::Committed}, {2, K::FEnd},
  });
  CHECK(is_non_interleaved(h));
}

TEST_CASE("reads_legal: direct committed write") {
  History h = make_history({
      {1, K::TxBegin}, {1, K::Ok}, {1, K::WriteReq, "x", 1}, {1, K::RetUnit},
      {1, K::TxCommit}, {1, K::Committed},
      {2, K::ReadReq, "x"}, {2, K::RetVal, nullptr, 1},
  });
  CHECK(reads_legal(h));
}

TEST_CASE("reads_legal: stale read of the initial value is illegal") {
  History h = make_history({
      {1, K::TxBegin}, {1, K::Ok}, {1, K::WriteReq, "x", 1}, {1, K::RetUnit},
      {1, K::TxCommit}, {1, K::Committed},
      {2, K::ReadReq, "x"}, {2, K::RetVal, nullptr, 0},
  });
  CHECK_FALSE(reads_legal(h));
}

TEST_CASE("reads_legal: a live writer in another thread is skipped") {
  History h = make_history({
      {1, K::TxBegin}, {1, K::Ok}, {1, K::WriteReq, "x", 5}, {1, K::RetUnit},
      {2, K::ReadReq, "x"}, {2, K::RetVal, nullptr, 0},
  });
  CHECK(reads_legal(h));
}

TEST_CASE("reads_legal: preconditions are enforced") {
  CHECK_THROWS(reads_legal(h0()));  // commit-pending transaction present
}

TEST_CASE("atomic_member: H_0 joins by committing T1") {
  auto witness = atomic_member_witness(h0());
  REQUIRE(witness.has_value());
  CHECK(witness->at(0) == CompletionDecision::Commit);
  // replaying the witness choice re-validates
  CHECK(reads_legal(complete(h0(), *witness)));
}

TEST_CASE("atomic_member: H_bad is excluded") {
  CHECK_FALSE(atomic_member(h_bad()));
}

TEST_CASE("atomic_member: empty history is a member") {
  CHECK(atomic_member(History{}));
}

TEST_CASE("atomic_member: members are prefix-closed at litmus scale") {
  // every well-formed prefix of a member is a member
  History h = h0();
  REQUIRE(atomic_member(h));
  for (size_t len = 0; len <= h.size(); ++len) {
    History prefix;
    prefix.regs = h.regs;
    prefix.actions.assign(h.actions.begin(), h.actions.begin() + len);
    if (!well_formed(prefix).ok()) continue;
    if (!is_non_interleaved(prefix)) continue;
    CHECK(atomic_member(prefix));
  }
}

TEST_CASE("atomic_member: witness replay re-validates on random members") {
  std::mt19937_64 rng(404);
  int members = 0;
  for (int i = 0; i < 200; ++i) {
    History h = random_history(rng, {});
    auto w = atomic_member_witness(h);
    if (!w) continue;
    ++members;
    CHECK(reads_legal(complete(h, *w)));
  }
  CHECK(members > 10);  // the generator produces enough members to be useful
}
