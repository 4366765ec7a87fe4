#include "fgeo/fieldexpr.hpp"

#include "fgeo/special.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>

namespace fgeo {

ParseError::ParseError(const std::string& msg, int line_, int column_)
    : Error(msg + " at line " + std::to_string(line_) + ", column " + std::to_string(column_)),
      line(line_), column(column_) {}

EvalError::EvalError(const std::string& msg, std::string sub)
    : Error(msg + " in '" + sub + "'"), subexpression(std::move(sub)) {}

namespace {

struct FuncInfo {
    const char* name;
    Func func;
    int arity;
};

const FuncInfo kFuncs[] = {
    {"exp", Func::Exp, 1},   {"log", Func::Log, 1},   {"sqrt", Func::Sqrt, 1}, {"sin", Func::Sin, 1},
    {"cos", Func::Cos, 1},   {"tan", Func::Tan, 1},   {"erf", Func::Erf, 1},   {"erfc", Func::Erfc, 1},
    {"abs", Func::Abs, 1},   {"min", Func::Min, 2},   {"max", Func::Max, 2},
};

const FuncInfo* find_func(std::string_view name) {
    for (const auto& f : kFuncs)
        if (name == f.name) return &f;
    return nullptr;
}

const FuncInfo& func_info(Func f) {
    for (const auto& i : kFuncs)
        if (i.func == f) return i;
    throw Error("unknown function id");
}

ExprPtr make(NodeKind k, std::vector<ExprPtr> args = {}) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->args = std::move(args);
    return n;
}

class Parser {
public:
    Parser(std::string_view src, int nx, int nt) : s_(src), nx_(nx), nt_(nt) {}

    ExprPtr parse() {
        skip();
        if (pos_ >= s_.size()) fail("empty expression");
        ExprPtr e = expr();
        skip();
        if (pos_ < s_.size()) fail(std::string("unexpected '") + s_[pos_] + "'");
        return e;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    int nx_, nt_;

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }
    [[noreturn]] void fail_at(const std::string& msg, int line, int col) const { throw ParseError(msg, line, col); }

    void advance() {
        if (s_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r'))
            advance();
    }

    bool peek(char c) {
        skip();
        return pos_ < s_.size() && s_[pos_] == c;
    }

    void expect(char c) {
        if (!peek(c)) {
            if (pos_ >= s_.size()) fail(std::string("expected '") + c + "' before end of input");
            fail(std::string("expected '") + c + "'");
        }
        advance();
    }

    ExprPtr expr() {
        ExprPtr lhs = term();
        for (;;) {
            if (peek('+')) {
                advance();
                lhs = make(NodeKind::Add, {lhs, term()});
            } else if (peek('-')) {
                advance();
                lhs = make(NodeKind::Sub, {lhs, term()});
            } else {
                return lhs;
            }
        }
    }

    ExprPtr term() {
        ExprPtr lhs = unary();
        for (;;) {
            if (peek('*')) {
                advance();
                lhs = make(NodeKind::Mul, {lhs, unary()});
            } else if (peek('/')) {
                advance();
                lhs = make(NodeKind::Div, {lhs, unary()});
            } else {
                return lhs;
            }
        }
    }

    ExprPtr unary() {
        if (peek('-')) {
            advance();
            return make(NodeKind::Neg, {unary()});
        }
        return power();
    }

    ExprPtr power() {
        ExprPtr base = primary();
        if (peek('^')) {
            advance();
            return make(NodeKind::Pow, {base, unary()});
        }
        return base;
    }

    ExprPtr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (c == '(') {
            advance();
            ExprPtr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail(std::string("unexpected '") + c + "'");
    }

    ExprPtr number() {
        const int line = line_, col = col_;
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                advance();
                ++n;
            }
            return n;
        };
        std::size_t nd = digits();
        if (pos_ < s_.size() && s_[pos_] == '.') {
            advance();
            nd += digits();
        }
        if (nd == 0) fail_at("malformed number", line, col);
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            const std::size_t save = pos_;
            const int sl = line_, sc = col_;
            advance();
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) advance();
            if (digits() == 0) {
                // not an exponent; leave 'e' for the caller (it will fail as juxtaposition)
                pos_ = save;
                line_ = sl;
                col_ = sc;
            }
        }
        const std::string text(s_.substr(start, pos_ - start));
        char* end = nullptr;
        const double v = std::strtod(text.c_str(), &end);
        if (!std::isfinite(v)) fail_at("numeric literal out of range", line, col);
        auto n = std::make_shared<ExprNode>();
        n->kind = NodeKind::Number;
        n->value = v;
        return n;
    }

    ExprPtr identifier() {
        const int line = line_, col = col_;
        const std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            advance();
        const std::string_view name = s_.substr(start, pos_ - start);
        if (const FuncInfo* fi = find_func(name)) {
            if (!peek('(')) fail_at("function '" + std::string(name) + "' needs an argument list", line, col);
            advance();
            std::vector<ExprPtr> args;
            if (!peek(')')) {
                args.push_back(expr());
                while (peek(',')) {
                    advance();
                    args.push_back(expr());
                }
            }
            expect(')');
            if (static_cast<int>(args.size()) != fi->arity)
                fail_at("function '" + std::string(name) + "' takes " + std::to_string(fi->arity) +
                            " argument(s), got " + std::to_string(args.size()),
                        line, col);
            auto n = std::make_shared<ExprNode>();
            n->kind = NodeKind::Call;
            n->func = fi->func;
            n->args = std::move(args);
            return n;
        }
        if (name == "pi") return make(NodeKind::Pi);
        if (name == "e") return make(NodeKind::E);
        if (name.size() >= 2 && (name[0] == 'x' || name[0] == 't')) {
            bool all_digits = true;
            for (std::size_t i = 1; i < name.size(); ++i)
                all_digits = all_digits && std::isdigit(static_cast<unsigned char>(name[i]));
            if (all_digits && name[1] != '0') {
                const int idx = std::atoi(std::string(name.substr(1)).c_str());
                const int limit = name[0] == 'x' ? nx_ : nt_;
                if (idx >= 1 && idx <= limit) {
                    auto n = std::make_shared<ExprNode>();
                    n->kind = name[0] == 'x' ? NodeKind::VarX : NodeKind::VarT;
                    n->index = idx - 1;
                    return n;
                }
            }
        }
        fail_at("unknown identifier '" + std::string(name) + "'", line, col);
    }
};

std::string format_number(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

double eval_node(const ExprNode& n, const Vec& x, const Vec& t) {
    auto sub = [&](std::size_t i) { return eval_node(*n.args[i], x, t); };
    double v = 0.0;
    switch (n.kind) {
    case NodeKind::Number: return n.value;
    case NodeKind::VarX: return x(n.index);
    case NodeKind::VarT: return t(n.index);
    case NodeKind::Pi: return kPi;
    case NodeKind::E: return std::exp(1.0);
    case NodeKind::Neg: return -sub(0);
    case NodeKind::Add: return sub(0) + sub(1);
    case NodeKind::Sub: return sub(0) - sub(1);
    case NodeKind::Mul: return sub(0) * sub(1);
    case NodeKind::Div: return sub(0) / sub(1);
    case NodeKind::Pow: {
        const double a = sub(0), b = sub(1);
        v = std::pow(a, b);
        if (std::isnan(v) && !std::isnan(a) && !std::isnan(b))
            throw EvalError("negative base with non-integer exponent", print_node(n));
        return v;
    }
    case NodeKind::Call: {
        const double a = sub(0);
        switch (n.func) {
        case Func::Exp: return std::exp(a);
        case Func::Log:
            if (a < 0.0) throw EvalError("log of negative argument", print_node(n));
            return std::log(a);
        case Func::Sqrt:
            if (a < 0.0) throw EvalError("sqrt of negative argument", print_node(n));
            return std::sqrt(a);
        case Func::Sin: return std::sin(a);
        case Func::Cos: return std::cos(a);
        case Func::Tan: return std::tan(a);
        case Func::Erf: return fgeo::erf(a);
        case Func::Erfc: return fgeo::erfc(a);
        case Func::Abs: return std::abs(a);
        case Func::Min: return std::min(a, sub(1));
        case Func::Max: return std::max(a, sub(1));
        }
    }
    }
    throw Error("corrupt expression tree");
}

} // namespace

std::string print_node(const ExprNode& n) {
    auto bin = [&](const char* op) {
        return "(" + print_node(*n.args[0]) + " " + op + " " + print_node(*n.args[1]) + ")";
    };
    switch (n.kind) {
    case NodeKind::Number: return format_number(n.value);
    case NodeKind::VarX: return "x" + std::to_string(n.index + 1);
    case NodeKind::VarT: return "t" + std::to_string(n.index + 1);
    case NodeKind::Pi: return "pi";
    case NodeKind::E: return "e";
    case NodeKind::Neg: return "(-" + print_node(*n.args[0]) + ")";
    case NodeKind::Add: return bin("+");
    case NodeKind::Sub: return bin("-");
    case NodeKind::Mul: return bin("*");
    case NodeKind::Div: return bin("/");
    case NodeKind::Pow: return bin("^");
    case NodeKind::Call: {
        std::string s = std::string(func_info(n.func).name) + "(";
        for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) s += ", ";
            s += print_node(*n.args[i]);
        }
        return s + ")";
    }
    }
    return "?";
}

bool same_tree(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return a == b;
    if (a->kind != b->kind || a->args.size() != b->args.size()) return false;
    switch (a->kind) {
    case NodeKind::Number:
        if (a->value != b->value) return false;
        break;
    case NodeKind::VarX:
    case NodeKind::VarT:
        if (a->index != b->index) return false;
        break;
    case NodeKind::Call:
        if (a->func != b->func) return false;
        break;
    default: break;
    }
    for (std::size_t i = 0; i < a->args.size(); ++i)
        if (!same_tree(a->args[i], b->args[i])) return false;
    return true;
}

double FieldExpression::eval(const Vec& x, const Vec& t) const {
    if (!root_) throw EvalError("empty expression", "");
    if (x.size() != nx_ || t.size() < nt_) throw DimensionError("eval_field: context dimensions do not match");
    const double v = eval_node(*root_, x, t);
    if (std::isnan(v)) throw EvalError("expression evaluated to NaN", print());
    return v;
}

std::string FieldExpression::print() const { return root_ ? print_node(*root_) : std::string(); }

FieldExpression parse_field(std::string_view source, int nx, int nt) {
    Parser p(source, nx, nt);
    return FieldExpression(p.parse(), nx, nt);
}

double eval_field(const FieldExpression& e, const EvalContext& ctx) {
    return e.eval(ctx.x.x, ctx.theta.values);
}

Vec field_gradient(const FieldExpression& e, const Vec& x, const Vec& t) {
    Vec g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = 1e-5 * (1.0 + std::abs(x(i)));
        Vec xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        g(i) = (e.eval(xp, t) - e.eval(xm, t)) / (2.0 * h);
    }
    return g;
}

} // namespace fgeo
