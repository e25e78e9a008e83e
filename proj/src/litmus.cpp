#include "tmcheck/litmus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace tmcheck {

std::string LocalValue::to_string() const {
  switch (tag) {
    case Tag::Int: return std::to_string(v);
    case Tag::Committed: return "committed";
    case Tag::Aborted: return "aborted";
  }
  return "?";
}

Stmt Stmt::assign(std::string v, Expr e) {
  Stmt s; s.kind = Kind::Assign; s.var = std::move(v); s.expr = std::move(e); return s;
}
Stmt Stmt::read(std::string reg, std::string var) {
  Stmt s; s.kind = Kind::Read; s.reg = std::move(reg); s.var = std::move(var); return s;
}
Stmt Stmt::write(std::string reg, Expr e) {
  Stmt s; s.kind = Kind::Write; s.reg = std::move(reg); s.expr = std::move(e); return s;
}
Stmt Stmt::atomic(std::vector<Stmt> body, std::string status_var) {
  Stmt s; s.kind = Kind::Atomic; s.body = std::move(body); s.var = std::move(status_var); return s;
}
Stmt Stmt::fence() { Stmt s; s.kind = Kind::Fence; return s; }
Stmt Stmt::if_(Expr c, std::vector<Stmt> then_, std::vector<Stmt> else_) {
  Stmt s; s.kind = Kind::If; s.expr = std::move(c); s.body = std::move(then_);
  s.els = std::move(else_); return s;
}
Stmt Stmt::while_(Expr c, std::vector<Stmt> body) {
  Stmt s; s.kind = Kind::While; s.expr = std::move(c); s.body = std::move(body); return s;
}

// --- expression parser -------------------------------------------------------

namespace {

struct Parser {
  const std::string& s;
  size_t i = 0;

  explicit Parser(const std::string& src) : s(src) {}

  void skip() { while (i < s.size() && std::isspace(uint8_t(s[i]))) ++i; }

  bool eat(const char* tok) {
    skip();
    size_t n = std::strlen(tok);
    if (s.compare(i, n, tok) == 0) {
      // identifiers must not merge: "committedx" is not "committed" "x"
      if (std::isalpha(uint8_t(tok[0])) && i + n < s.size() &&
          (std::isalnum(uint8_t(s[i + n])) || s[i + n] == '_'))
        return false;
      i += n;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) {
    throw std::runtime_error("expression parse error at offset " + std::to_string(i) +
                             ": " + what + " in '" + s + "'");
  }

  Expr parse() {
    Expr e = implies();
    skip();
    if (i != s.size()) fail("trailing input");
    return e;
  }

  Expr implies() {  // right associative
    Expr lhs = or_();
    if (eat("=>") || eat("==>")) return Expr::bin(Expr::Op::Implies, std::move(lhs), implies());
    return lhs;
  }

  Expr or_() {
    Expr e = and_();
    while (eat("||")) e = Expr::bin(Expr::Op::Or, std::move(e), and_());
    return e;
  }

  Expr and_() {
    Expr e = cmp();
    while (eat("&&")) e = Expr::bin(Expr::Op::And, std::move(e), cmp());
    return e;
  }

  Expr cmp() {
    Expr e = sum();
    skip();
    if (eat("==") || eat("=")) return Expr::bin(Expr::Op::Eq, std::move(e), sum());
    if (eat("!=")) return Expr::bin(Expr::Op::Ne, std::move(e), sum());
    if (eat("<=")) return Expr::bin(Expr::Op::Le, std::move(e), sum());
    if (eat(">=")) return Expr::bin(Expr::Op::Ge, std::move(e), sum());
    if (eat("<")) return Expr::bin(Expr::Op::Lt, std::move(e), sum());
    if (eat(">")) return Expr::bin(Expr::Op::Gt, std::move(e), sum());
    return e;
  }

  Expr sum() {
    Expr e = unary();
    for (;;) {
      if (eat("+")) e = Expr::bin(Expr::Op::Add, std::move(e), unary());
      else if (eat("-")) e = Expr::bin(Expr::Op::Sub, std::move(e), unary());
      else return e;
    }
  }

  Expr unary() {
    skip();
    if (eat("!")) {
      Expr e; e.op = Expr::Op::Not; e.kids.push_back(unary()); return e;
    }
    return atom();
  }

  Expr atom() {
    skip();
    if (eat("(")) {
      Expr e = implies();
      if (!eat(")")) fail("expected ')'");
      return e;
    }
    if (eat("true")) { Expr e; e.op = Expr::Op::TrueLit; return e; }
    if (eat("committed")) { Expr e; e.op = Expr::Op::CommittedLit; return e; }
    if (eat("aborted")) { Expr e; e.op = Expr::Op::AbortedLit; return e; }
    if (i < s.size() && (std::isdigit(uint8_t(s[i])) ||
                         (s[i] == '-' && i + 1 < s.size() && std::isdigit(uint8_t(s[i + 1]))))) {
      size_t j = i + 1;
      while (j < s.size() && std::isdigit(uint8_t(s[j]))) ++j;
      Expr e = Expr::lit(std::stoll(s.substr(i, j - i)));
      i = j;
      return e;
    }
    if (i < s.size() && (std::isalpha(uint8_t(s[i])) || s[i] == '_')) {
      size_t j = i;
      while (j < s.size() && (std::isalnum(uint8_t(s[j])) || s[j] == '_')) ++j;
      Expr e = Expr::var(s.substr(i, j - i));
      i = j;
      return e;
    }
    fail("expected an atom");
  }
};

}  // namespace

Expr parse_expr(const std::string& src) { return Parser(src).parse(); }

// --- validation ----------------------------------------------------------------

namespace {

void collect_locals(const std::vector<Stmt>& block, std::vector<std::string>& out) {
  for (const Stmt& s : block) {
    if (s.kind == Stmt::Kind::Assign || s.kind == Stmt::Kind::Read ||
        s.kind == Stmt::Kind::Atomic) {
      if (!s.var.empty() && std::find(out.begin(), out.end(), s.var) == out.end())
        out.push_back(s.var);
    }
    collect_locals(s.body, out);
    collect_locals(s.els, out);
  }
}

void collect_names(const Expr& e, std::set<std::string>& out) {
  if (e.op == Expr::Op::Name) out.insert(e.name);
  for (const Expr& k : e.kids) collect_names(k, out);
}

void collect_writes(const std::vector<Stmt>& block, std::vector<std::pair<int64_t, bool>>& out) {
  for (const Stmt& s : block) {
    if (s.kind == Stmt::Kind::Write) {
      // only literal writes participate in the distinctness check; the
      // validator rejects non-literal write expressions below
      if (s.expr.op == Expr::Op::IntLit) out.emplace_back(s.expr.ival, true);
      else out.emplace_back(0, false);
    }
    collect_writes(s.body, out);
    collect_writes(s.els, out);
  }
}

void check_block(const std::vector<Stmt>& block, bool inside_atomic,
                 const std::set<std::string>& locals,
                 const std::set<std::string>& registers) {
  for (const Stmt& s : block) {
    std::set<std::string> names;
    if (s.kind == Stmt::Kind::Assign || s.kind == Stmt::Kind::Write ||
        s.kind == Stmt::Kind::If || s.kind == Stmt::Kind::While)
      collect_names(s.expr, names);
    for (const std::string& n : names)
      if (!locals.count(n))
        throw std::invalid_argument("litmus: expression references '" + n +
                                    "', which is not a local of the thread");
    switch (s.kind) {
      case Stmt::Kind::Atomic:
        if (inside_atomic) throw std::invalid_argument("litmus: nested atomic block");
        check_block(s.body, true, locals, registers);
        break;
      case Stmt::Kind::Fence:
        if (inside_atomic) throw std::invalid_argument("litmus: fence inside an atomic block");
        break;
      case Stmt::Kind::Read:
      case Stmt::Kind::Write:
        if (!registers.count(s.reg))
          throw std::invalid_argument("litmus: unknown register '" + s.reg + "'");
        if (s.kind == Stmt::Kind::Write && s.expr.op != Expr::Op::IntLit)
          throw std::invalid_argument("litmus: write values must be integer literals");
        break;
      case Stmt::Kind::If:
      case Stmt::Kind::While:
        check_block(s.body, inside_atomic, locals, registers);
        check_block(s.els, inside_atomic, locals, registers);
        break;
      case Stmt::Kind::Assign:
        break;
    }
  }
}

}  // namespace

std::vector<std::string> LitmusProgram::locals_of_thread(int thread) const {
  std::vector<std::string> out;
  collect_locals(threads[thread - 1], out);
  return out;
}

void LitmusProgram::validate() const {
  std::set<std::string> registers_set(registers.begin(), registers.end());
  if (registers_set.size() != registers.size())
    throw std::invalid_argument("litmus: duplicate register names");
  std::set<std::string> all_locals;
  for (int t = 1; t <= int(threads.size()); ++t) {
    std::vector<std::string> locals = locals_of_thread(t);
    for (const std::string& l : locals) {
      if (registers_set.count(l))
        throw std::invalid_argument("litmus: local '" + l + "' shadows a register");
      if (!all_locals.insert(l).second)
        throw std::invalid_argument("litmus: local '" + l + "' used by two threads");
    }
    std::set<std::string> locals_set(locals.begin(), locals.end());
    check_block(threads[t - 1], false, locals_set, registers_set);
  }
  // write literals pairwise distinct and nonzero
  std::vector<std::pair<int64_t, bool>> writes;
  for (const auto& th : threads) collect_writes(th, writes);
  std::set<int64_t> seen;
  for (auto [v, lit] : writes) {
    if (!lit) continue;
    if (v == 0) throw std::invalid_argument("litmus: write of the initial value 0");
    if (!seen.insert(v).second)
      throw std::invalid_argument("litmus: duplicate write literal " + std::to_string(v));
  }
  // postcondition may reference registers and any thread's locals
  std::set<std::string> names;
  collect_names(post, names);
  for (const std::string& n : names)
    if (!registers_set.count(n) && !all_locals.count(n))
      throw std::invalid_argument("litmus: postcondition references unknown name '" + n + "'");
}

// --- built-in programs ----------------------------------------------------------

namespace {

LitmusProgram make_fig1(bool doomed, bool fence) {
  // privatization: T1 flips x_is_private, then the privatizer touches x
  // non-transactionally; T2 writes (fig1a) or spins on (fig1b) x inside a
  // transaction when the flag is still clear
  const int64_t kTrue = 11;
  LitmusProgram p;
  p.name = std::string(doomed ? "fig1b" : "fig1a") + (fence ? "" : "_nofence");
  p.registers = {"x_is_private", "x"};
  std::vector<Stmt> left;
  left.push_back(Stmt::atomic({Stmt::write("x_is_private", Expr::lit(kTrue))}, "l1"));
  if (fence) left.push_back(Stmt::fence());
  left.push_back(Stmt::if_(parse_expr("l1 = committed"),
                           {Stmt::write("x", Expr::lit(doomed ? 42 : 1))}));
  std::vector<Stmt> t2_body;
  {
    Expr not_private = Expr::bin(Expr::Op::Ne, Expr::var(doomed ? "l3" : "r2"), Expr::lit(kTrue));
    if (doomed) {
      // read the flag, then spin on x while it is nonzero
      t2_body.push_back(Stmt::read("x_is_private", "l3"));
      std::vector<Stmt> then_;
      then_.push_back(Stmt::read("x", "l4"));
      then_.push_back(Stmt::while_(Expr::bin(Expr::Op::Ne, Expr::var("l4"), Expr::lit(0)),
                                   {Stmt::read("x", "l4")}));
      t2_body.push_back(Stmt::if_(std::move(not_private), std::move(then_)));
    } else {
      t2_body.push_back(Stmt::read("x_is_private", "r2"));
      t2_body.push_back(Stmt::if_(std::move(not_private), {Stmt::write("x", Expr::lit(42))}));
    }
  }
  std::vector<Stmt> right;
  right.push_back(Stmt::atomic(std::move(t2_body), "l2"));
  p.threads = {std::move(left), std::move(right)};
  if (doomed) {
    p.post_src = "true";
  } else {
    p.post_src = "l1 = committed => x = 1";
  }
  p.post = parse_expr(p.post_src);
  p.validate();
  return p;
}

LitmusProgram make_fig2() {
  // publication: the flag starts in the "private" state (initial value);
  // clearing it is written as a distinct literal
  const int64_t kFalse = 21;
  LitmusProgram p;
  p.name = "fig2";
  p.registers = {"x_is_private", "x"};
  std::vector<Stmt> left;
  left.push_back(Stmt::write("x", Expr::lit(42)));  // runs outside any transaction
  left.push_back(Stmt::atomic({Stmt::write("x_is_private", Expr::lit(kFalse))}, "l1"));
  std::vector<Stmt> t2_body;
  t2_body.push_back(Stmt::read("x_is_private", "r2"));
  t2_body.push_back(Stmt::if_(Expr::bin(Expr::Op::Eq, Expr::var("r2"), Expr::lit(kFalse)),
                              {Stmt::read("x", "l")}));
  std::vector<Stmt> right;
  right.push_back(Stmt::atomic(std::move(t2_body), "l2"));
  p.threads = {std::move(left), std::move(right)};
  p.post_src = "l2 = committed && l != 0 => l = 42";
  p.post = parse_expr(p.post_src);
  p.validate();
  return p;
}

LitmusProgram make_fig3() {
  LitmusProgram p;
  p.name = "fig3";
  p.registers = {"x", "y"};
  std::vector<Stmt> left;
  left.push_back(Stmt::atomic({Stmt::write("x", Expr::lit(1)), Stmt::write("y", Expr::lit(2))}, "l"));
  std::vector<Stmt> right;
  right.push_back(Stmt::read("x", "l1"));
  right.push_back(Stmt::read("y", "l2"));
  p.threads = {std::move(left), std::move(right)};
  p.post_src = "x = l1 => y = l2";
  p.post = parse_expr(p.post_src);
  p.validate();
  return p;
}

LitmusProgram make_fig6() {
  const int64_t kReady = 9;
  LitmusProgram p;
  p.name = "fig6";
  p.registers = {"x", "x_is_ready"};
  std::vector<Stmt> left;
  left.push_back(Stmt::atomic({Stmt::write("x", Expr::lit(42))}, "l1"));
  left.push_back(Stmt::write("x_is_ready", Expr::lit(kReady)));
  std::vector<Stmt> right;
  right.push_back(Stmt::read("x_is_ready", "l2"));
  right.push_back(Stmt::while_(Expr::bin(Expr::Op::Ne, Expr::var("l2"), Expr::lit(kReady)),
                               {Stmt::read("x_is_ready", "l2")}));
  right.push_back(Stmt::read("x", "l3"));
  p.threads = {std::move(left), std::move(right)};
  p.post_src = "l1 = committed => l3 = 42";
  p.post = parse_expr(p.post_src);
  p.validate();
  return p;
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"fig1a", "fig1a_nofence", "fig1b", "fig1b_nofence", "fig2", "fig3", "fig6"};
}

LitmusProgram builtin(const std::string& name) {
  if (name == "fig1a") return make_fig1(false, true);
  if (name == "fig1a_nofence") return make_fig1(false, false);
  if (name == "fig1b") return make_fig1(true, true);
  if (name == "fig1b_nofence") return make_fig1(true, false);
  if (name == "fig2") return make_fig2();
  if (name == "fig3") return make_fig3();
  if (name == "fig6") return make_fig6();
  throw std::invalid_argument("unknown builtin litmus program '" + name + "'");
}

// --- JSON litmus files -----------------------------------------------------------

namespace {

std::vector<Stmt> parse_block(const nlohmann::json& arr);

Stmt parse_stmt(const nlohmann::json& j) {
  if (!j.is_object()) throw std::runtime_error("litmus json: statement must be an object");
  auto has = [&j](const char* k) { return j.contains(k); };
  if (has("assign")) {
    return Stmt::assign(j["assign"].get<std::string>(),
                        parse_expr(j.at("value").get<std::string>()));
  }
  if (has("read")) {
    return Stmt::read(j["read"].get<std::string>(), j.at("into").get<std::string>());
  }
  if (has("write")) {
    return Stmt::write(j["write"].get<std::string>(),
                       parse_expr(j.at("value").get<std::string>()));
  }
  if (has("atomic")) {
    return Stmt::atomic(parse_block(j["atomic"]), j.at("status").get<std::string>());
  }
  if (has("fence")) return Stmt::fence();
  if (has("if")) {
    std::vector<Stmt> els;
    if (j.contains("else")) els = parse_block(j["else"]);
    return Stmt::if_(parse_expr(j["if"].get<std::string>()), parse_block(j.at("then")),
                     std::move(els));
  }
  if (has("while")) {
    return Stmt::while_(parse_expr(j["while"].get<std::string>()), parse_block(j.at("do")));
  }
  throw std::runtime_error("litmus json: unknown statement " + j.dump());
}

std::vector<Stmt> parse_block(const nlohmann::json& arr) {
  if (!arr.is_array()) throw std::runtime_error("litmus json: expected a statement array");
  std::vector<Stmt> out;
  for (const auto& j : arr) out.push_back(parse_stmt(j));
  return out;
}

}  // namespace

LitmusProgram parse_litmus_json(const std::string& text, const std::string& name) {
  nlohmann::json j = nlohmann::json::parse(text);
  LitmusProgram p;
  p.name = name;
  if (!j.contains("registers") || !j["registers"].is_array())
    throw std::runtime_error("litmus json: missing 'registers' array");
  for (const auto& r : j["registers"]) p.registers.push_back(r.get<std::string>());
  if (!j.contains("threads") || !j["threads"].is_array())
    throw std::runtime_error("litmus json: missing 'threads' array");
  for (const auto& th : j["threads"]) p.threads.push_back(parse_block(th));
  p.post_src = j.value("post", std::string("true"));
  p.post = parse_expr(p.post_src);
  p.validate();
  return p;
}

LitmusProgram load_litmus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string base = path;
  size_t slash = base.find_last_of('/');
  if (slash != std::string::npos) base = base.substr(slash + 1);
  return parse_litmus_json(ss.str(), base);
}

}  // namespace tmcheck
