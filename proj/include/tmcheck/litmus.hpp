#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace tmcheck {

// Thread-local values: integers plus the distinguished atomic-block statuses.
struct LocalValue {
  enum class Tag : uint8_t { Int, Committed, Aborted } tag = Tag::Int;
  int64_t v = 0;

  static LocalValue of(int64_t x) { return {Tag::Int, x}; }
  static LocalValue committed() { return {Tag::Committed, 0}; }
  static LocalValue aborted() { return {Tag::Aborted, 0}; }
  bool is_int() const { return tag == Tag::Int; }
  friend bool operator==(const LocalValue&, const LocalValue&) = default;
  std::string to_string() const;
};

struct Expr {
  enum class Op : uint8_t {
    IntLit, TrueLit, CommittedLit, AbortedLit, Name,
    Eq, Ne, Lt, Le, Gt, Ge, And, Or, Implies, Not, Add, Sub,
  };
  Op op = Op::IntLit;
  int64_t ival = 0;
  std::string name;
  std::vector<Expr> kids;

  static Expr lit(int64_t v) { Expr e; e.op = Op::IntLit; e.ival = v; return e; }
  static Expr var(std::string n) { Expr e; e.op = Op::Name; e.name = std::move(n); return e; }
  static Expr bin(Op o, Expr a, Expr b) {
    Expr e; e.op = o; e.kids = {std::move(a), std::move(b)}; return e;
  }
};

// Parses the postcondition/guard grammar: `=` `!=` `<` `<=` `>` `>=` on
// integer terms, `&&` `||` `!` `=>`, parentheses, integer literals, `true`,
// `committed`, `aborted`, and identifiers (locals or registers).
Expr parse_expr(const std::string& src);

struct Stmt {
  enum class Kind : uint8_t { Assign, Read, Write, Atomic, Fence, If, While } kind;
  std::string var;          // Assign/Read target, Atomic status variable
  std::string reg;          // Read/Write register
  Expr expr;                // Assign value, Write value, If/While condition
  std::vector<Stmt> body;   // Atomic body, If-then, While body
  std::vector<Stmt> els;    // If-else

  static Stmt assign(std::string v, Expr e);
  static Stmt read(std::string reg, std::string var);
  static Stmt write(std::string reg, Expr e);
  static Stmt atomic(std::vector<Stmt> body, std::string status_var);
  static Stmt fence();
  static Stmt if_(Expr c, std::vector<Stmt> then_, std::vector<Stmt> else_ = {});
  static Stmt while_(Expr c, std::vector<Stmt> body);
};

struct LitmusProgram {
  std::string name;
  std::vector<std::string> registers;          // all initialized to the initial value
  std::vector<std::vector<Stmt>> threads;      // 1-based thread t = threads[t-1]
  Expr post;
  std::string post_src;

  // Validates: no Fence/Atomic nested inside Atomic, conditions and
  // expressions reference only the owning thread's locals, write literals
  // globally distinct and nonzero, local names unique across threads.
  void validate() const;
  std::vector<std::string> locals_of_thread(int thread) const;
};

// The built-in litmus programs:
// fig1a, fig1a_nofence, fig1b, fig1b_nofence, fig2, fig3, fig6.
LitmusProgram builtin(const std::string& name);
std::vector<std::string> builtin_names();

// Loads the JSON litmus file format.
LitmusProgram parse_litmus_json(const std::string& text, const std::string& name);
LitmusProgram load_litmus_file(const std::string& path);

}  // namespace tmcheck
