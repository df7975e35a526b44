#pragma once

#include "hjm/common.hpp"
#include "hjm/hamiltonian.hpp"

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <variant>

namespace hjm {

using ExprValue = std::variant<double, Vec>;
using ExprEnv = std::map<std::string, ExprValue>;

// Arithmetic over scalars and vectors: + - * / ^ (power right-associative),
// unary minus, component access v[i], dot(a,b), norm(v), scalar functions
// sin cos exp sqrt abs min max, and the constant pi.  Parsing reports
// malformed input; evaluation reports unknown names and type mismatches.
class Expression {
  public:
    struct Node;

    static Expression parse(const std::string& src);

    ExprValue evaluate(const ExprEnv& env) const;
    double evaluate_scalar(const ExprEnv& env) const;

    const std::string& source() const { return source_; }

  private:
    std::shared_ptr<const Node> root_;
    std::string source_;
};

// Hamiltonian H(q,p) from an expression in the variables q and p.
HamiltonianField make_expression_hamiltonian(const std::string& src, int dim);

// Scalar function of the variable q, e.g. an initial datum or a constraint.
std::function<double(const Vec&)> make_expression_scalar_field(const std::string& src,
                                                               int dim);

}  // namespace hjm
