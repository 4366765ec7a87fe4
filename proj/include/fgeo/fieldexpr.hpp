#pragma once

#include "fgeo/core.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace fgeo {

class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line, int column);
    int line;
    int column;
};

class EvalError : public Error {
public:
    EvalError(const std::string& msg, std::string subexpression);
    std::string subexpression;
};

enum class NodeKind { Number, VarX, VarT, Pi, E, Neg, Add, Sub, Mul, Div, Pow, Call };

enum class Func { Exp, Log, Sqrt, Sin, Cos, Tan, Erf, Erfc, Abs, Min, Max };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    NodeKind kind = NodeKind::Number;
    double value = 0.0;  // Number
    int index = 0;       // VarX / VarT, zero-based
    Func func = Func::Exp;
    std::vector<ExprPtr> args;
};

// Scalar field over chart coordinates x1..xn and control parameters t1..tm.
class FieldExpression {
public:
    FieldExpression() = default;
    FieldExpression(ExprPtr root, int nx, int nt) : root_(std::move(root)), nx_(nx), nt_(nt) {}

    const ExprPtr& root() const { return root_; }
    int nx() const { return nx_; }
    int nt() const { return nt_; }

    double eval(const Vec& x, const Vec& t) const;
    // Canonical, fully parenthesized form.
    std::string print() const;

private:
    ExprPtr root_;
    int nx_ = 0;
    int nt_ = 0;
};

struct EvalContext {
    Point x;
    ControlParams theta;
};

FieldExpression parse_field(std::string_view source, int nx, int nt);
double eval_field(const FieldExpression& e, const EvalContext& ctx);

std::string print_node(const ExprNode& node);
bool same_tree(const ExprPtr& a, const ExprPtr& b);

// Central-difference gradient in x with step 1e-5 (1 + |x_i|).
Vec field_gradient(const FieldExpression& e, const Vec& x, const Vec& t);

} // namespace fgeo
