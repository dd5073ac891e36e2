#include "gdef/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "gdef/errors.hpp"

namespace gdef {

Expr make_number(double v) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::Number;
  n->number = v;
  return n;
}

Expr make_imag() {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::ImagUnit;
  return n;
}

Expr make_var(int index) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::Var;
  n->var = index;
  return n;
}

Expr make_neg(Expr a) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::Neg;
  n->lhs = std::move(a);
  return n;
}

Expr make_binary(Op op, Expr a, Expr b) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

Expr make_call(Func f, Expr a) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::Call;
  n->func = f;
  n->lhs = std::move(a);
  return n;
}

const char* func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Sinh: return "sinh";
    case Func::Cosh: return "cosh";
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sqrt: return "sqrt";
  }
  return "?";
}

namespace {

bool lookup_func(const std::string& name, Func& out) {
  static const std::pair<const char*, Func> table[] = {
      {"sin", Func::Sin},   {"cos", Func::Cos}, {"sinh", Func::Sinh}, {"cosh", Func::Cosh},
      {"exp", Func::Exp},   {"log", Func::Log}, {"sqrt", Func::Sqrt}};
  for (auto& [n, f] : table)
    if (name == n) {
      out = f;
      return true;
    }
  return false;
}

class Parser {
 public:
  Parser(const std::string& text, int dims) : s_(text), dims_(dims) {}

  Expr run() {
    Expr e = expr();
    skip();
    if (pos_ != s_.size()) fail({"operator", "end of input"});
    return e;
  }

 private:
  const std::string& s_;
  int dims_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(std::vector<std::string> expected) {
    std::string msg = "syntax error at position " + std::to_string(pos_) + ": expected ";
    for (std::size_t k = 0; k < expected.size(); ++k) msg += (k ? " or " : "") + expected[k];
    throw SyntaxError(pos_, std::move(expected), msg);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expr() {
    Expr e = term();
    for (;;) {
      if (accept('+'))
        e = make_binary(Op::Add, e, term());
      else if (accept('-'))
        e = make_binary(Op::Sub, e, term());
      else
        return e;
    }
  }

  Expr term() {
    Expr e = factor();
    for (;;) {
      if (accept('*'))
        e = make_binary(Op::Mul, e, factor());
      else if (accept('/'))
        e = make_binary(Op::Div, e, factor());
      else
        return e;
    }
  }

  Expr factor() {
    Expr base = unary();
    if (accept('^')) return make_binary(Op::Pow, base, factor());
    return base;
  }

  Expr unary() {
    if (accept('-')) return make_neg(atom());
    return atom();
  }

  Expr atom() {
    skip();
    if (pos_ >= s_.size()) fail({"number", "identifier", "'('", "'-'"});
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    if (accept('(')) {
      Expr e = expr();
      if (!accept(')')) fail({"')'"});
      return e;
    }
    fail({"number", "identifier", "'('"});
  }

  Expr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t nd = digits();
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      nd += digits();
    }
    if (nd == 0) fail({"digit"});
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (digits() == 0) fail({"exponent digits"});
    }
    return make_number(std::strtod(s_.substr(start, pos_ - start).c_str(), nullptr));
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    const std::string name = s_.substr(start, pos_ - start);
    Func f;
    if (lookup_func(name, f)) {
      if (!accept('(')) fail({"'('"});
      Expr arg = expr();
      if (!accept(')')) fail({"')'"});
      return make_call(f, arg);
    }
    if (name == "i") return make_imag();
    if (name.size() > 1 && name[0] == 'u') {
      bool all_digits = true;
      for (std::size_t k = 1; k < name.size(); ++k)
        all_digits = all_digits && std::isdigit(static_cast<unsigned char>(name[k]));
      if (all_digits && name.size() < 8) {
        const int idx = std::atoi(name.c_str() + 1);
        if (dims_ < 0 || idx < dims_) return make_var(idx);
      }
    }
    throw UnknownSymbol(name, start);
  }
};

std::string format_number(double v) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

bool is_atom(const Expr& e) {
  return e->op == Op::Number || e->op == Op::ImagUnit || e->op == Op::Var || e->op == Op::Call;
}

bool is_sum(const Expr& e) { return e->op == Op::Add || e->op == Op::Sub; }
bool is_product(const Expr& e) { return e->op == Op::Mul || e->op == Op::Div; }

std::string paren(const std::string& s) { return "(" + s + ")"; }

}  // namespace

Expr parse(const std::string& text, int dims) { return Parser(text, dims).run(); }

std::string pretty_print(const Expr& e) {
  switch (e->op) {
    case Op::Number: return format_number(e->number);
    case Op::ImagUnit: return "i";
    case Op::Var: return "u" + std::to_string(e->var);
    case Op::Call: return std::string(func_name(e->func)) + "(" + pretty_print(e->lhs) + ")";
    case Op::Neg: {
      const std::string inner = pretty_print(e->lhs);
      return "-" + (is_atom(e->lhs) ? inner : paren(inner));
    }
    case Op::Add:
    case Op::Sub: {
      const std::string r = pretty_print(e->rhs);
      return pretty_print(e->lhs) + (e->op == Op::Add ? "+" : "-") + (is_sum(e->rhs) ? paren(r) : r);
    }
    case Op::Mul:
    case Op::Div: {
      const std::string l = pretty_print(e->lhs), r = pretty_print(e->rhs);
      return (is_sum(e->lhs) ? paren(l) : l) + (e->op == Op::Mul ? "*" : "/") +
             (is_sum(e->rhs) || is_product(e->rhs) ? paren(r) : r);
    }
    case Op::Pow: {
      const std::string l = pretty_print(e->lhs), r = pretty_print(e->rhs);
      const bool base_ok = is_atom(e->lhs) || e->lhs->op == Op::Neg;
      const bool exp_ok = !is_sum(e->rhs) && !is_product(e->rhs);
      return (base_ok ? l : paren(l)) + "^" + (exp_ok ? r : paren(r));
    }
  }
  return "";
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a->op != b->op) return false;
  switch (a->op) {
    case Op::Number: return a->number == b->number;
    case Op::ImagUnit: return true;
    case Op::Var: return a->var == b->var;
    case Op::Call: return a->func == b->func && structurally_equal(a->lhs, b->lhs);
    case Op::Neg: return structurally_equal(a->lhs, b->lhs);
    default: return structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
  }
}

int max_variable(const Expr& e) {
  int m = e->op == Op::Var ? e->var : -1;
  if (e->lhs) m = std::max(m, max_variable(e->lhs));
  if (e->rhs) m = std::max(m, max_variable(e->rhs));
  return m;
}

bool is_constant(const Expr& e) { return max_variable(e) < 0; }

Expr substitute(const Expr& e, const std::vector<Expr>& replacement) {
  switch (e->op) {
    case Op::Number:
    case Op::ImagUnit: return e;
    case Op::Var: return replacement.at(e->var);
    case Op::Neg: return make_neg(substitute(e->lhs, replacement));
    case Op::Call: return make_call(e->func, substitute(e->lhs, replacement));
    default:
      return make_binary(e->op, substitute(e->lhs, replacement), substitute(e->rhs, replacement));
  }
}

namespace {

// An exponent that is a constant real integer is applied by repeated
// multiplication, which keeps negative bases and zero bases valid.
bool integer_exponent(const Expr& e, long& n) {
  if (!is_constant(e)) return false;
  const cd v = evaluate(e, {});
  if (v.imag() != 0.0 || std::abs(v.real()) > 1e6) return false;
  if (std::floor(v.real()) != v.real()) return false;
  n = static_cast<long>(v.real());
  return true;
}

void check_branch(cd a, const char* name) {
  if (a == cd(0.0)) throw DomainError(std::string(name) + " at zero");
  if (a.imag() == 0.0 && a.real() < 0.0)
    throw DomainError(std::string(name) + " on the negative real axis");
}

cd scalar_ipow(cd x, long n) {
  if (n < 0) {
    if (x == cd(0.0)) throw DivisionByZero("negative power of zero");
    return 1.0 / scalar_ipow(x, -n);
  }
  cd r = 1.0;
  while (n > 0) {
    if (n & 1) r *= x;
    n >>= 1;
    if (n > 0) x *= x;
  }
  return r;
}

}  // namespace

cd evaluate(const Expr& e, const std::vector<cd>& point) {
  switch (e->op) {
    case Op::Number: return e->number;
    case Op::ImagUnit: return cd(0.0, 1.0);
    case Op::Var:
      if (e->var >= static_cast<int>(point.size()))
        throw EvaluationError("coordinate u" + std::to_string(e->var) + " outside the point");
      return point[e->var];
    case Op::Neg: return -evaluate(e->lhs, point);
    case Op::Add: return evaluate(e->lhs, point) + evaluate(e->rhs, point);
    case Op::Sub: return evaluate(e->lhs, point) - evaluate(e->rhs, point);
    case Op::Mul: return evaluate(e->lhs, point) * evaluate(e->rhs, point);
    case Op::Div: {
      const cd den = evaluate(e->rhs, point);
      if (den == cd(0.0)) throw DivisionByZero("denominator vanishes");
      return evaluate(e->lhs, point) / den;
    }
    case Op::Pow: {
      const cd base = evaluate(e->lhs, point);
      long n;
      if (integer_exponent(e->rhs, n)) return scalar_ipow(base, n);
      if (base == cd(0.0)) throw DomainError("non-integer power of zero");
      return std::exp(evaluate(e->rhs, point) * std::log(base));
    }
    case Op::Call: {
      const cd a = evaluate(e->lhs, point);
      switch (e->func) {
        case Func::Sin: return std::sin(a);
        case Func::Cos: return std::cos(a);
        case Func::Sinh: return std::sinh(a);
        case Func::Cosh: return std::cosh(a);
        case Func::Exp: return std::exp(a);
        case Func::Log: check_branch(a, "log"); return std::log(a);
        case Func::Sqrt:
          if (a == cd(0.0)) return 0.0;
          check_branch(a, "sqrt");
          return std::sqrt(a);
      }
    }
  }
  return 0.0;
}

namespace {

Jet jet_rec(const Expr& e, const std::vector<cd>& point,
            const std::shared_ptr<const JetLayout>& layout) {
  switch (e->op) {
    case Op::Number: return Jet(layout, e->number);
    case Op::ImagUnit: return Jet(layout, cd(0.0, 1.0));
    case Op::Var:
      if (e->var >= layout->dims() || e->var >= static_cast<int>(point.size()))
        throw EvaluationError("coordinate u" + std::to_string(e->var) + " outside the point");
      return Jet::variable(layout, e->var, point[e->var]);
    case Op::Neg: return -jet_rec(e->lhs, point, layout);
    case Op::Add: return jet_rec(e->lhs, point, layout) + jet_rec(e->rhs, point, layout);
    case Op::Sub: return jet_rec(e->lhs, point, layout) - jet_rec(e->rhs, point, layout);
    case Op::Mul: return jet_rec(e->lhs, point, layout) * jet_rec(e->rhs, point, layout);
    case Op::Div: return jet_rec(e->lhs, point, layout) / jet_rec(e->rhs, point, layout);
    case Op::Pow: {
      Jet base = jet_rec(e->lhs, point, layout);
      long n;
      if (integer_exponent(e->rhs, n)) {
        if (n < 0 && base.value() == cd(0.0)) throw DivisionByZero("negative power of zero");
        return ipow(base, n);
      }
      return pow(base, jet_rec(e->rhs, point, layout));
    }
    case Op::Call: {
      Jet a = jet_rec(e->lhs, point, layout);
      switch (e->func) {
        case Func::Sin: return sin(a);
        case Func::Cos: return cos(a);
        case Func::Sinh: return sinh(a);
        case Func::Cosh: return cosh(a);
        case Func::Exp: return exp(a);
        case Func::Log: return log(a);
        case Func::Sqrt: return sqrt(a);
      }
    }
  }
  return Jet(layout, 0.0);
}

}  // namespace

Jet eval_jet(const Expr& e, const std::vector<cd>& point,
             const std::shared_ptr<const JetLayout>& layout) {
  return jet_rec(e, point, layout);
}

Jet eval_jet(const Expr& e, const std::vector<cd>& point, int order) {
  if (order < 0) throw EvaluationError("negative jet order");
  return jet_rec(e, point, JetLayout::get(static_cast<int>(point.size()), order));
}

}  // namespace gdef
