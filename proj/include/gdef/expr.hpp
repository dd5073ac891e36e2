#pragma once

// Scalar expressions over chart coordinates u0..up.
//
// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := unary ('^' factor)?
//   unary  := '-'? atom
//   atom   := number | 'i' | ident | ident '(' expr ')' | '(' expr ')'
// Functions: sin cos sinh cosh exp log sqrt.  '^' is right associative and
// binds a leading minus to its base, so "-u0^2" is (-u0)^2.

#include <memory>
#include <string>
#include <vector>

#include "gdef/jet.hpp"

namespace gdef {

enum class Op { Number, ImagUnit, Var, Neg, Add, Sub, Mul, Div, Pow, Call };
enum class Func { Sin, Cos, Sinh, Cosh, Exp, Log, Sqrt };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  Op op;
  double number = 0.0;  // Number: non-negative literal
  int var = 0;          // Var: coordinate index
  Func func = Func::Sin;
  Expr lhs, rhs;        // unary ops and calls use lhs
};

Expr make_number(double v);
Expr make_imag();
Expr make_var(int index);
Expr make_neg(Expr a);
Expr make_binary(Op op, Expr a, Expr b);
Expr make_call(Func f, Expr a);

// dims < 0 accepts any u<k>; otherwise indices must be < dims.
Expr parse(const std::string& text, int dims = -1);
std::string pretty_print(const Expr& e);
bool structurally_equal(const Expr& a, const Expr& b);

// Largest coordinate index used, or -1.
int max_variable(const Expr& e);
bool is_constant(const Expr& e);
// Replaces u<k> by the given expressions.
Expr substitute(const Expr& e, const std::vector<Expr>& replacement);

cd evaluate(const Expr& e, const std::vector<cd>& point);
Jet eval_jet(const Expr& e, const std::vector<cd>& point, int order);
Jet eval_jet(const Expr& e, const std::vector<cd>& point,
             const std::shared_ptr<const JetLayout>& layout);

const char* func_name(Func f);

}  // namespace gdef
