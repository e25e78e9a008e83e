#include "tmcheck/explore.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tmcheck {

const char* tm_name(TmKind k) { return k == TmKind::Tl2 ? "tl2" : "atomic"; }

std::string schedule_to_string(const std::vector<Choice>& s) {
  std::ostringstream os;
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) os << ",";
    os << s[i].thread;
    if (s[i].variant) os << "v" << s[i].variant;
  }
  return os.str();
}

std::string FinalState::to_string() const {
  std::ostringstream os;
  for (const auto& [n, v] : registers) os << n << "=" << v << " ";
  for (const auto& [n, v] : locals) os << n << "=" << v.to_string() << " ";
  std::string s = os.str();
  if (!s.empty()) s.pop_back();
  return s;
}

namespace {

// --- expression evaluation -----------------------------------------------------

using Resolver = std::function<LocalValue(const std::string&)>;

bool truthy(const LocalValue& v) {
  if (!v.is_int()) throw std::runtime_error("litmus: status value used as a condition");
  return v.v != 0;
}

LocalValue eval_expr(const Expr& e, const Resolver& res) {
  using Op = Expr::Op;
  auto int_of = [](const LocalValue& v) {
    if (!v.is_int()) throw std::runtime_error("litmus: status value used in arithmetic");
    return v.v;
  };
  switch (e.op) {
    case Op::IntLit: return LocalValue::of(e.ival);
    case Op::TrueLit: return LocalValue::of(1);
    case Op::CommittedLit: return LocalValue::committed();
    case Op::AbortedLit: return LocalValue::aborted();
    case Op::Name: return res(e.name);
    case Op::Not: return LocalValue::of(!truthy(eval_expr(e.kids[0], res)));
    default: break;
  }
  LocalValue a = eval_expr(e.kids[0], res);
  if (e.op == Op::And) return LocalValue::of(truthy(a) && truthy(eval_expr(e.kids[1], res)));
  if (e.op == Op::Or) return LocalValue::of(truthy(a) || truthy(eval_expr(e.kids[1], res)));
  if (e.op == Op::Implies)
    return LocalValue::of(!truthy(a) || truthy(eval_expr(e.kids[1], res)));
  LocalValue b = eval_expr(e.kids[1], res);
  switch (e.op) {
    case Op::Eq: return LocalValue::of(a == b);
    case Op::Ne: return LocalValue::of(!(a == b));
    case Op::Lt: return LocalValue::of(int_of(a) < int_of(b));
    case Op::Le: return LocalValue::of(int_of(a) <= int_of(b));
    case Op::Gt: return LocalValue::of(int_of(a) > int_of(b));
    case Op::Ge: return LocalValue::of(int_of(a) >= int_of(b));
    case Op::Add: return LocalValue::of(int_of(a) + int_of(b));
    case Op::Sub: return LocalValue::of(int_of(a) - int_of(b));
    default: throw std::logic_error("eval_expr: bad op");
  }
}

// --- engine ----------------------------------------------------------------------

struct Frame {
  const std::vector<Stmt>* block = nullptr;
  int idx = 0;
  const Stmt* owner = nullptr;  // If/While/Atomic statement that pushed this frame
  int iters = 0;                // While iterations run so far
};

enum class Awaiting : uint8_t { None, Begin, ReadInto, Write, Commit, Fence, NtReadInto, NtWrite };

struct ThreadState {
  std::vector<Frame> frames;
  std::vector<LocalValue> locals;
  bool done = false;
  bool diverged = false;
  std::string diverge_note;
  // TL2 atomic-block context
  bool in_atomic = false;
  int status_local = -1;
  std::vector<LocalValue> snapshot;
  // pending machine operation
  Awaiting awaiting = Awaiting::None;
  int read_target = -1;
};

// Threads are kept parked either on a machine-action statement (Read, Write,
// Fence, Atomic), at the end of an atomic body awaiting its commit, or done.
// A scheduler turn then performs exactly one machine segment.
class Engine {
 public:
  Engine(const LitmusProgram& p, TmKind tm, const ScheduleConfig& cfg, bool journal)
      : p_(p), tm_(tm), cfg_(cfg), journal_on_(journal) {
    const int nt = int(p.threads.size());
    if (tm == TmKind::Tl2) {
      tl2_ = std::make_unique<Tl2Machine>(nt, p.registers, cfg.ghost);
      if (journal) tl2_->enable_journal(true);
    } else {
      atm_ = std::make_unique<AtomicMachine>(nt, p.registers);
      if (journal) atm_->enable_journal(true);
    }
    threads_.resize(nt);
    local_names_.resize(nt);
    for (int t = 1; t <= nt; ++t) {
      local_names_[t - 1] = p.locals_of_thread(t);
      threads_[t - 1].locals.assign(local_names_[t - 1].size(), LocalValue::of(0));
      Frame f;
      f.block = &p.threads[t - 1];
      threads_[t - 1].frames.push_back(f);
      settle(t);  // run leading local statements
    }
  }

  int n_threads() const { return int(threads_.size()); }
  bool thread_done(int t) const { return threads_[t - 1].done; }
  bool any_diverged() const { return any_diverged_; }
  int turns() const { return turns_; }

  bool all_done() const {
    for (const ThreadState& ts : threads_)
      if (!ts.done) return false;
    return true;
  }

  // statement a thread is parked on, when it is parked on one
  const Stmt* parked_stmt(int t) const {
    const ThreadState& ts = threads_[t - 1];
    if (ts.frames.empty()) return nullptr;
    const Frame& f = ts.frames.back();
    if (f.idx >= int(f.block->size())) return nullptr;
    return &(*f.block)[f.idx];
  }

  bool enabled(int t) const {
    const ThreadState& ts = threads_[t - 1];
    if (ts.done || ts.diverged) return false;
    if (tm_ == TmKind::Tl2) {
      if (tl2_->op_pending(t)) return !tl2_->blocked(t);
      return true;
    }
    const Stmt* s = parked_stmt(t);
    if (s && s->kind == Stmt::Kind::Fence) return atm_->fence_enabled();
    return true;
  }

  struct TurnResult {
    bool variant_used = false;
    bool invalid_variant = false;
  };

  TurnResult apply_turn(int t, int variant) {
    if (journal_on_) undo_.push_back({t, threads_[t - 1], turns_, any_diverged_});
    ++turns_;
    TurnResult r;
    if (tm_ == TmKind::Tl2) {
      turn_tl2(t);
    } else {
      turn_atomic(t, variant, r);
    }
    return r;
  }

  struct Mark {
    size_t machine = 0;
    size_t engine = 0;
  };

  Mark mark() const {
    Mark m;
    m.machine = tl2_ ? tl2_->mark() : atm_->mark();
    m.engine = undo_.size();
    return m;
  }

  void undo_to(const Mark& m) {
    while (undo_.size() > m.engine) {
      EngineUndo& u = undo_.back();
      threads_[u.thread - 1] = std::move(u.saved);
      turns_ = u.turns;
      any_diverged_ = u.any_diverged;
      undo_.pop_back();
    }
    if (tl2_) tl2_->undo_to(m.machine);
    else atm_->undo_to(m.machine);
  }

  const History& history() const { return tl2_ ? tl2_->history() : atm_->history(); }

  FinalState finals() const {
    FinalState f;
    for (int x = 0; x < int(p_.registers.size()); ++x)
      f.registers.emplace_back(p_.registers[x],
                               tl2_ ? tl2_->cell_value(x) : atm_->cell_value(x));
    for (int t = 1; t <= n_threads(); ++t)
      for (size_t i = 0; i < local_names_[t - 1].size(); ++i)
        f.locals.emplace_back(local_names_[t - 1][i], threads_[t - 1].locals[i]);
    return f;
  }

  bool eval_post() const {
    Resolver res = [this](const std::string& n) -> LocalValue {
      for (int x = 0; x < int(p_.registers.size()); ++x)
        if (p_.registers[x] == n)
          return LocalValue::of(tl2_ ? tl2_->cell_value(x) : atm_->cell_value(x));
      for (int t = 1; t <= n_threads(); ++t)
        for (size_t i = 0; i < local_names_[t - 1].size(); ++i)
          if (local_names_[t - 1][i] == n) return threads_[t - 1].locals[i];
      throw std::runtime_error("postcondition references unknown name " + n);
    };
    return truthy(eval_expr(p_.post, res));
  }

  std::string divergence_note() const {
    for (const ThreadState& ts : threads_)
      if (ts.diverged) return ts.diverge_note;
    return "";
  }

 private:
  struct EngineUndo {
    int thread;
    ThreadState saved;
    int turns;
    bool any_diverged;
  };

  int local_index(int t, const std::string& name) const {
    const auto& names = local_names_[t - 1];
    for (size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return int(i);
    throw std::logic_error("unknown local " + name);
  }

  int reg_of(const std::string& name) const {
    for (int x = 0; x < int(p_.registers.size()); ++x)
      if (p_.registers[x] == name) return x;
    throw std::logic_error("unknown register " + name);
  }

  LocalValue eval_local(int t, const Expr& e) const {
    Resolver res = [this, t](const std::string& n) -> LocalValue {
      const auto& names = local_names_[t - 1];
      for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == n) return threads_[t - 1].locals[i];
      throw std::runtime_error("expression references unknown local " + n);
    };
    return eval_expr(e, res);
  }

  void mark_diverged(int t, const std::string& note) {
    ThreadState& ts = threads_[t - 1];
    ts.diverged = true;
    ts.diverge_note = note;
    any_diverged_ = true;
    if (tm_ == TmKind::Atomic && atm_->live(t)) atm_->abandon_block(t);
  }

  // Runs local statements until the thread parks on a machine-action
  // statement, the end of an atomic body, or finishes.
  void settle(int t) {
    ThreadState& ts = threads_[t - 1];
    for (;;) {
      if (ts.frames.empty()) {
        ts.done = true;
        return;
      }
      Frame& f = ts.frames.back();
      if (f.idx >= int(f.block->size())) {
        if (f.owner && f.owner->kind == Stmt::Kind::While) {
          if (truthy(eval_local(t, f.owner->expr))) {
            if (f.iters >= cfg_.loop_bound) {
              mark_diverged(t, "loop bound reached");
              return;
            }
            ++f.iters;
            f.idx = 0;
            continue;
          }
          ts.frames.pop_back();
          ts.frames.back().idx++;
          continue;
        }
        if (f.owner && f.owner->kind == Stmt::Kind::Atomic) return;  // park pre-commit
        if (f.owner && f.owner->kind == Stmt::Kind::If) {
          ts.frames.pop_back();
          ts.frames.back().idx++;
          continue;
        }
        ts.frames.pop_back();  // top-level block done
        continue;
      }
      const Stmt& s = (*f.block)[f.idx];
      switch (s.kind) {
        case Stmt::Kind::Assign:
          ts.locals[local_index(t, s.var)] = eval_local(t, s.expr);
          f.idx++;
          continue;
        case Stmt::Kind::If: {
          bool c = truthy(eval_local(t, s.expr));
          const std::vector<Stmt>& branch = c ? s.body : s.els;
          if (branch.empty()) {
            f.idx++;
            continue;
          }
          Frame bf;
          bf.block = &branch;
          bf.owner = &s;
          ts.frames.push_back(bf);
          continue;
        }
        case Stmt::Kind::While: {
          if (!truthy(eval_local(t, s.expr))) {
            f.idx++;
            continue;
          }
          if (cfg_.loop_bound < 1) {
            mark_diverged(t, "loop bound reached");
            return;
          }
          Frame bf;
          bf.block = &s.body;
          bf.owner = &s;
          bf.iters = 1;
          ts.frames.push_back(bf);
          continue;
        }
        case Stmt::Kind::Fence:
        case Stmt::Kind::Read:
        case Stmt::Kind::Write:
        case Stmt::Kind::Atomic:
          return;  // machine action: park here
      }
    }
  }

  // --- TL2 path -------------------------------------------------------------------

  void run_segment_tl2(int t) {
    StepOutcome out;
    do {
      out = tl2_->step(t);
      if (cfg_.on_step) cfg_.on_step(*tl2_);
      if (out.kind == StepOutcome::Kind::Blocked) return;
      if (out.done()) {
        on_op_done_tl2(t, out);
        if (!threads_[t - 1].done && !threads_[t - 1].diverged && !tl2_->op_pending(t))
          settle(t);
        return;
      }
    } while (!tl2_->at_schedule_point(t));
  }

  void start_op_tl2(int t, Awaiting a, Tl2Op op, int reg = -1, int64_t val = 0) {
    threads_[t - 1].awaiting = a;
    tl2_->start(t, op, reg, val);
    run_segment_tl2(t);
  }

  void on_op_done_tl2(int t, const StepOutcome& out) {
    ThreadState& ts = threads_[t - 1];
    Awaiting a = ts.awaiting;
    ts.awaiting = Awaiting::None;
    switch (a) {
      case Awaiting::Begin: {
        Frame& f = ts.frames.back();
        const Stmt& stmt = (*f.block)[f.idx];
        Frame body;
        body.block = &stmt.body;
        body.owner = &stmt;
        ts.frames.push_back(body);
        return;
      }
      case Awaiting::ReadInto:
        if (out.kind == StepOutcome::Kind::DoneAborted) {
          ts.locals = ts.snapshot;  // roll back the block's local effects
          finish_block(t, false);
          return;
        }
        ts.locals[ts.read_target] = LocalValue::of(out.value);
        ts.frames.back().idx++;
        return;
      case Awaiting::NtReadInto:
        ts.locals[ts.read_target] = LocalValue::of(out.value);
        ts.frames.back().idx++;
        return;
      case Awaiting::Write:
      case Awaiting::NtWrite:
      case Awaiting::Fence:
        ts.frames.back().idx++;
        return;
      case Awaiting::Commit:
        if (out.kind == StepOutcome::Kind::DoneCommitted) {
          finish_block(t, true);
        } else {
          ts.locals = ts.snapshot;
          finish_block(t, false);
        }
        return;
      case Awaiting::None:
        throw std::logic_error("op completion without awaiting");
    }
  }

  void finish_block(int t, bool committed) {
    ThreadState& ts = threads_[t - 1];
    while (!ts.frames.empty()) {
      Frame f = ts.frames.back();
      ts.frames.pop_back();
      if (f.owner && f.owner->kind == Stmt::Kind::Atomic) break;
    }
    ts.locals[ts.status_local] = committed ? LocalValue::committed() : LocalValue::aborted();
    ts.in_atomic = false;
    ts.status_local = -1;
    ts.snapshot.clear();
    if (!ts.frames.empty()) ts.frames.back().idx++;
  }

  void turn_tl2(int t) {
    ThreadState& ts = threads_[t - 1];
    if (tl2_->op_pending(t)) {
      run_segment_tl2(t);
      return;
    }
    if (ts.frames.empty()) {
      ts.done = true;
      return;
    }
    Frame& f = ts.frames.back();
    if (f.idx >= int(f.block->size())) {
      // parked at the end of an atomic body: commit
      start_op_tl2(t, Awaiting::Commit, Tl2Op::Commit);
      return;
    }
    const Stmt& s = (*f.block)[f.idx];
    switch (s.kind) {
      case Stmt::Kind::Fence:
        start_op_tl2(t, Awaiting::Fence, Tl2Op::Fence);
        return;
      case Stmt::Kind::Read:
        threads_[t - 1].read_target = local_index(t, s.var);
        start_op_tl2(t, ts.in_atomic ? Awaiting::ReadInto : Awaiting::NtReadInto,
                     ts.in_atomic ? Tl2Op::Read : Tl2Op::NtRead, reg_of(s.reg));
        return;
      case Stmt::Kind::Write:
        start_op_tl2(t, ts.in_atomic ? Awaiting::Write : Awaiting::NtWrite,
                     ts.in_atomic ? Tl2Op::Write : Tl2Op::NtWrite, reg_of(s.reg),
                     eval_local(t, s.expr).v);
        return;
      case Stmt::Kind::Atomic:
        ts.in_atomic = true;
        ts.status_local = local_index(t, s.var);
        ts.snapshot = ts.locals;
        start_op_tl2(t, Awaiting::Begin, Tl2Op::Begin);
        return;
      default:
        throw std::logic_error("turn_tl2: thread parked on a local statement");
    }
  }

  // --- atomic TM path ---------------------------------------------------------------

  struct BlockDiverged {};

  void turn_atomic(int t, int variant, TurnResult& r) {
    ThreadState& ts = threads_[t - 1];
    const Stmt* sp = parked_stmt(t);
    if (!sp) throw std::logic_error("turn_atomic: nothing to run");
    const Stmt& s = *sp;
    Frame& f = ts.frames.back();
    switch (s.kind) {
      case Stmt::Kind::Fence:
        atm_->fence(t);
        f.idx++;
        break;
      case Stmt::Kind::Read:
        ts.locals[local_index(t, s.var)] = LocalValue::of(atm_->nt_read(t, reg_of(s.reg)));
        f.idx++;
        break;
      case Stmt::Kind::Write:
        atm_->nt_write(t, reg_of(s.reg), eval_local(t, s.expr).v);
        f.idx++;
        break;
      case Stmt::Kind::Atomic:
        exec_atomic_block(t, ts, s, variant, r);
        if (r.invalid_variant || ts.diverged) return;
        break;
      default:
        throw std::logic_error("turn_atomic: parked on a local statement");
    }
    settle(t);
  }

  void exec_atomic_block(int t, ThreadState& ts, const Stmt& stmt, int variant, TurnResult& r) {
    r.variant_used = true;
    if (variant > 1 && !cfg_.spurious_aborts) {
      r.invalid_variant = true;
      return;
    }
    int status_local = local_index(t, stmt.var);

    if (variant == 2) {  // aborted right after txbegin
      atm_->begin_block_aborted(t);
      ts.locals[status_local] = LocalValue::aborted();
      ts.frames.back().idx++;
      return;
    }

    std::vector<LocalValue> snapshot = ts.locals;
    atm_->begin_block(t);
    int accesses = 0;
    const int abort_at = variant >= 3 ? variant - 3 : -1;
    bool aborted_mid = false;
    try {
      exec_block_stmts(t, ts, stmt.body, accesses, abort_at, aborted_mid);
    } catch (BlockDiverged&) {
      mark_diverged(t, "loop bound reached inside an atomic block");
      return;  // the live block is abandoned
    }
    if (aborted_mid) {
      ts.locals = snapshot;
      ts.locals[status_local] = LocalValue::aborted();
      ts.frames.back().idx++;
      return;
    }
    if (abort_at >= 0 && abort_at >= accesses) {
      r.invalid_variant = true;  // caller undoes the partial effects
      return;
    }
    bool commit = variant == 0;
    atm_->end_block(t, commit);
    if (!commit) ts.locals = snapshot;
    ts.locals[status_local] = commit ? LocalValue::committed() : LocalValue::aborted();
    ts.frames.back().idx++;
  }

  void exec_block_stmts(int t, ThreadState& ts, const std::vector<Stmt>& block, int& accesses,
                        int abort_at, bool& aborted_mid) {
    for (const Stmt& s : block) {
      if (aborted_mid) return;
      switch (s.kind) {
        case Stmt::Kind::Assign:
          ts.locals[local_index(t, s.var)] = eval_local(t, s.expr);
          break;
        case Stmt::Kind::Read: {
          int x = reg_of(s.reg);
          if (accesses == abort_at) {
            atm_->tx_abort_at_read(t, x);
            aborted_mid = true;
            return;
          }
          ++accesses;
          ts.locals[local_index(t, s.var)] = LocalValue::of(atm_->tx_read(t, x));
          break;
        }
        case Stmt::Kind::Write: {
          int x = reg_of(s.reg);
          int64_t v = eval_local(t, s.expr).v;
          if (accesses == abort_at) {
            atm_->tx_abort_at_write(t, x, v);
            aborted_mid = true;
            return;
          }
          ++accesses;
          atm_->tx_write(t, x, v);
          break;
        }
        case Stmt::Kind::If: {
          bool c = truthy(eval_local(t, s.expr));
          exec_block_stmts(t, ts, c ? s.body : s.els, accesses, abort_at, aborted_mid);
          break;
        }
        case Stmt::Kind::While: {
          int iters = 0;
          while (truthy(eval_local(t, s.expr))) {
            if (++iters > cfg_.loop_bound) throw BlockDiverged{};
            exec_block_stmts(t, ts, s.body, accesses, abort_at, aborted_mid);
            if (aborted_mid) return;
          }
          break;
        }
        case Stmt::Kind::Atomic:
        case Stmt::Kind::Fence:
          throw std::logic_error("nested atomic/fence inside a block");
      }
    }
  }

  const LitmusProgram& p_;
  TmKind tm_;
  const ScheduleConfig& cfg_;
  bool journal_on_ = false;
  std::unique_ptr<Tl2Machine> tl2_;
  std::unique_ptr<AtomicMachine> atm_;
  std::vector<ThreadState> threads_;
  std::vector<std::vector<std::string>> local_names_;
  std::vector<EngineUndo> undo_;
  int turns_ = 0;
  bool any_diverged_ = false;
};

// --- exploration ----------------------------------------------------------------------

struct Explorer {
  const LitmusProgram& p;
  TmKind tm;
  const ScheduleConfig& cfg;
  ExplorationReport& rep;
  Engine eng;
  std::vector<Choice> choices;
  std::mt19937_64 sample_rng;
  uint64_t leaf_count = 0;
  bool stop = false;

  Explorer(const LitmusProgram& p_, TmKind tm_, const ScheduleConfig& cfg_,
           ExplorationReport& rep_)
      : p(p_), tm(tm_), cfg(cfg_), rep(rep_), eng(p_, tm_, cfg_, /*journal=*/true),
        sample_rng(cfg_.seed ^ 0x9e3779b97f4a7c15ull) {}

  void record_history_sample() {
    if (cfg.record_all) {
      rep.histories.push_back(eng.history());
      return;
    }
    if (int(rep.histories.size()) < cfg.history_sample) {
      rep.histories.push_back(eng.history());
    } else {
      uint64_t j = sample_rng() % leaf_count;
      if (j < uint64_t(cfg.history_sample)) rep.histories[j] = eng.history();
    }
  }

  void record_leaf() {
    if (++rep.schedules_explored > cfg.schedule_cap) {
      rep.bound_exceeded = true;
      stop = true;
      return;
    }
    ++leaf_count;
    if (cfg.check_wf) {
      ++rep.wf_checked;
      if (!well_formed(eng.history()).ok()) ++rep.wf_failures;
    }
    bool diverged = eng.any_diverged() || eng.turns() >= cfg.max_steps;
    bool done = eng.all_done();
    if (cfg.record_all) {
      Outcome o;
      o.schedule = choices;
      o.completed = done && !diverged;
      o.diverged = diverged;
      o.deadlock = !done && !diverged;
      o.finals = eng.finals();
      o.post_ok = o.completed ? eng.eval_post() : true;
      o.history_index = int(rep.histories.size());  // sample below appends
      rep.outcomes.push_back(std::move(o));
    }
    if (diverged || !done) {
      (diverged ? rep.divergences : rep.deadlocks)++;
      if (int(rep.divergence_outcomes.size()) < cfg.max_recorded_divergences) {
        Outcome o;
        o.schedule = choices;
        o.diverged = diverged;
        o.deadlock = !diverged;
        o.note = diverged ? (eng.any_diverged() ? eng.divergence_note() : "max steps reached")
                          : "no enabled thread";
        o.finals = eng.finals();
        rep.divergence_outcomes.push_back(std::move(o));
      }
      record_history_sample();
      return;
    }
    ++rep.completed;
    if (!eng.eval_post()) {
      ++rep.violations;
      if (int(rep.violation_outcomes.size()) < cfg.max_recorded_violations) {
        Outcome o;
        o.schedule = choices;
        o.completed = true;
        o.post_ok = false;
        o.finals = eng.finals();
        rep.violation_outcomes.push_back(std::move(o));
        rep.violation_histories.push_back(eng.history());
      }
    }
    record_history_sample();
  }

  bool is_leaf() const {
    if (eng.any_diverged()) return true;
    if (eng.turns() >= cfg.max_steps) return true;
    for (int t = 1; t <= eng.n_threads(); ++t)
      if (eng.enabled(t)) return false;
    return true;
  }

  void dfs() {
    if (stop) return;
    if (is_leaf()) {
      record_leaf();
      return;
    }
    for (int t = 1; t <= eng.n_threads() && !stop; ++t) {
      if (!eng.enabled(t)) continue;
      bool variants_apply = false;
      for (int v = 0;; ++v) {
        if (v == 1 && !variants_apply) break;
        if (v == 2 && !cfg.spurious_aborts) break;
        Engine::Mark m = eng.mark();
        choices.push_back({int16_t(t), int16_t(v)});
        Engine::TurnResult r = eng.apply_turn(t, v);
        if (r.invalid_variant) {
          choices.pop_back();
          eng.undo_to(m);
          break;
        }
        if (v == 0) variants_apply = r.variant_used;
        dfs();
        choices.pop_back();
        eng.undo_to(m);
        if (stop) return;
        if (!r.variant_used) break;
      }
    }
  }
};

}  // namespace

ExplorationReport explore(const LitmusProgram& p, TmKind tm, const ScheduleConfig& cfg) {
  p.validate();
  ExplorationReport rep;
  rep.program = p.name;
  rep.tm = tm_name(tm);

  if (cfg.mode == ScheduleConfig::Mode::Exhaustive) {
    if (cfg.ghost)
      throw std::invalid_argument("explore: ghost mode is unavailable with exhaustive search");
    Explorer ex(p, tm, cfg, rep);
    ex.dfs();
  } else {
    std::mt19937_64 rng(cfg.seed);
    for (int trial = 0; trial < cfg.trials; ++trial) {
      Engine eng(p, tm, cfg, /*journal=*/false);
      std::vector<Choice> choices;
      for (;;) {
        if (eng.any_diverged() || eng.turns() >= cfg.max_steps) break;
        std::vector<int> enabled;
        for (int t = 1; t <= eng.n_threads(); ++t)
          if (eng.enabled(t)) enabled.push_back(t);
        if (enabled.empty()) break;
        int t = enabled[rng() % enabled.size()];
        int v = tm == TmKind::Atomic ? int(rng() % 2) : 0;
        Engine::TurnResult r = eng.apply_turn(t, v);
        if (r.invalid_variant) throw std::logic_error("random walk chose an invalid variant");
        choices.push_back({int16_t(t), int16_t(v)});
      }
      ++rep.schedules_explored;
      bool diverged = eng.any_diverged() || eng.turns() >= cfg.max_steps;
      if (diverged) ++rep.divergences;
      else if (eng.all_done()) ++rep.completed;
      else ++rep.deadlocks;
      if (cfg.record_all) {
        Outcome o;
        o.schedule = choices;
        o.completed = eng.all_done() && !diverged;
        o.diverged = diverged;
        o.deadlock = !eng.all_done() && !diverged;
        o.finals = eng.finals();
        o.post_ok = o.completed ? eng.eval_post() : true;
        o.history_index = int(rep.histories.size());
        rep.outcomes.push_back(std::move(o));
      }
      if (!diverged && eng.all_done() && !eng.eval_post()) {
        ++rep.violations;
        if (int(rep.violation_outcomes.size()) < cfg.max_recorded_violations) {
          Outcome o;
          o.schedule = choices;
          o.completed = true;
          o.post_ok = false;
          o.finals = eng.finals();
          rep.violation_outcomes.push_back(std::move(o));
          rep.violation_histories.push_back(eng.history());
        }
      }
      if (cfg.check_wf) {
        ++rep.wf_checked;
        if (!well_formed(eng.history()).ok()) ++rep.wf_failures;
      }
      if (cfg.record_all || int(rep.histories.size()) < cfg.history_sample)
        rep.histories.push_back(eng.history());
    }
  }

  for (const History& h : rep.histories) {
    ++rep.drf.histories_checked;
    std::vector<Race> rs = races(h);
    if (!rs.empty()) {
      ++rep.drf.racy_histories;
      for (size_t i = 0; i < rs.size() && rep.drf.sample_races.size() < 8; ++i)
        rep.drf.sample_races.push_back(rs[i]);
    }
  }
  return rep;
}

RunResult run(const LitmusProgram& p, TmKind tm, const std::vector<Choice>& schedule,
              const ScheduleConfig& cfg) {
  p.validate();
  Engine eng(p, tm, cfg, /*journal=*/false);
  for (const Choice& c : schedule) {
    if (c.thread < 1 || c.thread > eng.n_threads())
      throw std::runtime_error("run: schedule names thread " + std::to_string(c.thread));
    if (eng.any_diverged() || eng.turns() >= cfg.max_steps)
      throw std::runtime_error("run: schedule continues past the end of the run");
    if (!eng.enabled(c.thread))
      throw std::runtime_error("run: schedule names a disabled thread at turn " +
                               std::to_string(eng.turns()));
    Engine::TurnResult r = eng.apply_turn(c.thread, c.variant);
    if (r.invalid_variant) throw std::runtime_error("run: invalid variant in schedule");
  }
  RunResult res;
  res.trace = eng.history();
  res.finals = eng.finals();
  res.completed = eng.all_done();
  res.diverged = eng.any_diverged() || eng.turns() >= cfg.max_steps;
  res.deadlock = !res.completed && !res.diverged;
  res.note = eng.divergence_note();
  res.post_ok = res.completed ? eng.eval_post() : true;
  return res;
}

RunResult run_threads_serially(const LitmusProgram& p, TmKind tm,
                               const std::vector<int>& thread_order,
                               const ScheduleConfig& cfg) {
  p.validate();
  Engine eng(p, tm, cfg, /*journal=*/false);
  for (int t : thread_order) {
    while (!eng.thread_done(t) && !eng.any_diverged()) {
      if (!eng.enabled(t))
        throw std::runtime_error("run_threads_serially: thread " + std::to_string(t) +
                                 " is blocked");
      eng.apply_turn(t, 0);
    }
    if (eng.any_diverged()) break;
  }
  RunResult res;
  res.trace = eng.history();
  res.finals = eng.finals();
  res.completed = eng.all_done();
  res.diverged = eng.any_diverged();
  res.post_ok = res.completed ? eng.eval_post() : true;
  return res;
}

}  // namespace tmcheck
