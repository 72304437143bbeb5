#ifndef BALANS_EXPR_HPP
#define BALANS_EXPR_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "balans/errors.hpp"

namespace balans {

/// Value of an expression together with the partial derivatives needed by
/// the solver's constants: d/du, d/dx and the second derivatives d2/dxdu,
/// d2/dx2. Derivatives in t are not tracked.
struct Jet2 {
  double value = 0.0;
  double d_u = 0.0;
  double d_x = 0.0;
  double d_xu = 0.0;
  double d_xx = 0.0;
};

enum class JetComponent { value, d_u, d_x, d_xu, d_xx };

enum class Var { t, x, u };

/// Parsed arithmetic expression in the variables (t, x, u).
///
/// Grammar:
///   expr   := term (("+"|"-") term)*
///   term   := factor (("*"|"/") factor)*
///   factor := ("-")? atom ("^" atom)?
///   atom   := number | "t" | "x" | "u" | "pi" | "e"
///           | ident "(" expr ("," expr)* ")" | "(" expr ")"
/// Builtins: sin cos exp log abs sqrt (unary), min max (binary),
/// if(cond, a, b) which selects a when cond > 0.
///
/// Immutable after parse; safe to evaluate concurrently from any number of
/// threads. Values and derivatives are computed by second-order forward-mode
/// arithmetic, never by finite differences. Derivatives at kinks of
/// abs/min/max/if use the branch selected by the value (right-continuous
/// convention); true domain violations (log(x<=0), division by zero,
/// sqrt(x<0), 0^negative) throw EvalError.
class Expr {
public:
  Expr() = default;

  /// Parses `text`; throws ParseError with a byte offset on bad syntax,
  /// unknown identifiers, or wrong builtin arity.
  static Expr parse(std::string_view text);

  double value(double t, double x, double u) const;
  Jet2 jet(double t, double x, double u) const;

  /// Infix rendering; parse(str()) evaluates identically to this expression.
  std::string str() const;

  const std::string& source() const noexcept { return source_; }
  bool depends_on(Var v) const noexcept;
  /// True when the tree contains an if(...) node.
  bool piecewise() const noexcept;
  bool empty() const noexcept { return nodes_.empty(); }

  // Internal flat-tree node; public only for the evaluator and tests that
  // inspect tree shape.
  enum class Op : std::uint8_t {
    number, var_t, var_x, var_u,
    add, sub, mul, div, neg, pow,
    sin, cos, exp, log, abs, sqrt, min, max, branch_if,
  };
  struct Node {
    Op op;
    std::int32_t arg0 = -1;
    std::int32_t arg1 = -1;
    std::int32_t arg2 = -1;
    double number = 0.0;
    std::uint32_t offset = 0;   // byte offset of this subexpression in source()
    bool const_subtree = false; // no variables below (enables exact powers)
  };
  const std::vector<Node>& nodes() const noexcept { return nodes_; }

private:
  friend class Parser;
  Jet2 jet_pow(const Jet2& base, const Jet2& exponent, const Node& n) const;

  std::vector<Node> nodes_; // children precede parents; last node is the root
  std::string source_;
};

struct Box3 {
  double t0 = 0.0, t1 = 0.0;
  double x0 = 0.0, x1 = 0.0;
  double u0 = 0.0, u1 = 0.0;
};

/// Maximum of |selected jet component| over a tensor grid on `box` with
/// `samples_per_axis` points per non-degenerate axis, endpoints always
/// included. A sampled lower estimate of the true supremum.
double sup_abs_on_box(const Expr& e, JetComponent sel, const Box3& box,
                      int samples_per_axis);

} // namespace balans

#endif
