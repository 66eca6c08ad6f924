#include "mpcolloc/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <vector>

namespace mpcolloc {

Dual2 operator+(const Dual2& a, const Dual2& b)
{
    return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2, a.h11 + b.h11, a.h12 + b.h12, a.h22 + b.h22};
}

Dual2 operator-(const Dual2& a, const Dual2& b)
{
    return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2, a.h11 - b.h11, a.h12 - b.h12, a.h22 - b.h22};
}

Dual2 operator-(const Dual2& a)
{
    return {-a.v, -a.d1, -a.d2, -a.h11, -a.h12, -a.h22};
}

Dual2 operator*(const Dual2& a, const Dual2& b)
{
    return {a.v * b.v,
            a.d1 * b.v + a.v * b.d1,
            a.d2 * b.v + a.v * b.d2,
            a.h11 * b.v + 2 * a.d1 * b.d1 + a.v * b.h11,
            a.h12 * b.v + a.d1 * b.d2 + a.d2 * b.d1 + a.v * b.h12,
            a.h22 * b.v + 2 * a.d2 * b.d2 + a.v * b.h22};
}

namespace {

// phi(a) given phi, phi', phi'' at a.v
Dual2 chain(const Dual2& a, double f, double df, double ddf)
{
    return {f,
            df * a.d1,
            df * a.d2,
            ddf * a.d1 * a.d1 + df * a.h11,
            ddf * a.d1 * a.d2 + df * a.h12,
            ddf * a.d2 * a.d2 + df * a.h22};
}

}  // namespace

Dual2 operator/(const Dual2& a, const Dual2& b)
{
    if (b.v == 0.0) {
        throw ExpressionError("division by zero");
    }
    const double r = 1.0 / b.v;
    return a * chain(b, r, -r * r, 2 * r * r * r);
}

Dual2 sin(const Dual2& a)
{
    return chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v));
}

Dual2 cos(const Dual2& a)
{
    return chain(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v));
}

Dual2 exp(const Dual2& a)
{
    const double e = std::exp(a.v);
    return chain(a, e, e, e);
}

Dual2 log(const Dual2& a)
{
    if (a.v <= 0.0) {
        throw ExpressionError("log of a non-positive value");
    }
    return chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v));
}

Dual2 sqrt(const Dual2& a)
{
    if (a.v <= 0.0) {
        throw ExpressionError("sqrt of a non-positive value");
    }
    const double s = std::sqrt(a.v);
    return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}

Dual2 pow(const Dual2& a, const Dual2& b)
{
    const bool constExponent = b.d1 == 0.0 && b.d2 == 0.0 && b.h11 == 0.0 && b.h12 == 0.0 && b.h22 == 0.0;
    if (constExponent) {
        const double c = b.v;
        if (c == 0.0) {
            return Dual2::constant(1.0);
        }
        return chain(a, std::pow(a.v, c), c * std::pow(a.v, c - 1), c * (c - 1) * std::pow(a.v, c - 2));
    }
    return exp(b * log(a));
}

struct Expression::Node {
    enum class Kind { Number, Var1, Var2, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Log, Sqrt };
    Kind kind = Kind::Number;
    double value = 0.0;
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr, double v = 0.0)
{
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    n->value = v;
    return n;
}

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr parse()
    {
        NodePtr n = expr();
        skip();
        if (pos_ != s_.size()) {
            fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        }
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const
    {
        throw ExpressionError("expression error at position " + std::to_string(pos_) + ": " + msg);
    }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) {
            ++pos_;
        }
    }

    bool accept(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr()
    {
        NodePtr n = term();
        for (;;) {
            if (accept('+')) {
                n = make(Kind::Add, n, term());
            } else if (accept('-')) {
                n = make(Kind::Sub, n, term());
            } else {
                return n;
            }
        }
    }

    NodePtr term()
    {
        NodePtr n = unary();
        for (;;) {
            if (accept('*')) {
                n = make(Kind::Mul, n, unary());
            } else if (accept('/')) {
                n = make(Kind::Div, n, unary());
            } else {
                return n;
            }
        }
    }

    NodePtr unary()
    {
        if (accept('-')) {
            return make(Kind::Neg, unary());
        }
        if (accept('+')) {
            return unary();
        }
        return power();
    }

    // right associative; -x^2 = -(x^2)
    NodePtr power()
    {
        NodePtr base = primary();
        if (accept('^')) {
            return make(Kind::Pow, base, unary());
        }
        return base;
    }

    NodePtr primary()
    {
        skip();
        if (pos_ >= s_.size()) {
            fail("unexpected end of input");
        }
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr n = expr();
            if (!accept(')')) {
                fail("missing ')'");
            }
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) {
                fail("bad number");
            }
            pos_ += static_cast<std::size_t>(end - begin);
            return make(Kind::Number, nullptr, nullptr, v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) {
                ++pos_;
            }
            const std::string id = s_.substr(start, pos_ - start);
            if (id == "x1" || id == "x") {
                return make(Kind::Var1);
            }
            if (id == "x2" || id == "y") {
                return make(Kind::Var2);
            }
            if (id == "pi") {
                return make(Kind::Number, nullptr, nullptr, std::numbers::pi);
            }
            Kind k;
            if (id == "sin") {
                k = Kind::Sin;
            } else if (id == "cos") {
                k = Kind::Cos;
            } else if (id == "exp") {
                k = Kind::Exp;
            } else if (id == "log") {
                k = Kind::Log;
            } else if (id == "sqrt") {
                k = Kind::Sqrt;
            } else {
                pos_ = start;
                fail("unknown identifier '" + id + "'");
            }
            if (!accept('(')) {
                fail("expected '(' after " + id);
            }
            NodePtr arg = expr();
            if (!accept(')')) {
                fail("missing ')'");
            }
            return make(k, arg);
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

Dual2 eval_node(const Expression::Node& n, double x1, double x2)
{
    switch (n.kind) {
    case Kind::Number:
        return Dual2::constant(n.value);
    case Kind::Var1:
        return Dual2::variable(0, x1);
    case Kind::Var2:
        return Dual2::variable(1, x2);
    case Kind::Neg:
        return -eval_node(*n.a, x1, x2);
    case Kind::Add:
        return eval_node(*n.a, x1, x2) + eval_node(*n.b, x1, x2);
    case Kind::Sub:
        return eval_node(*n.a, x1, x2) - eval_node(*n.b, x1, x2);
    case Kind::Mul:
        return eval_node(*n.a, x1, x2) * eval_node(*n.b, x1, x2);
    case Kind::Div:
        return eval_node(*n.a, x1, x2) / eval_node(*n.b, x1, x2);
    case Kind::Pow:
        return pow(eval_node(*n.a, x1, x2), eval_node(*n.b, x1, x2));
    case Kind::Sin:
        return sin(eval_node(*n.a, x1, x2));
    case Kind::Cos:
        return cos(eval_node(*n.a, x1, x2));
    case Kind::Exp:
        return exp(eval_node(*n.a, x1, x2));
    case Kind::Log:
        return log(eval_node(*n.a, x1, x2));
    case Kind::Sqrt:
        return sqrt(eval_node(*n.a, x1, x2));
    }
    return {};
}

}  // namespace

Expression::Expression(const std::string& text) : text_(text), root_(Parser(text_).parse()) {}
Expression::~Expression() = default;
Expression::Expression(const Expression&) = default;
Expression& Expression::operator=(const Expression&) = default;

Dual2 Expression::eval(double x1, double x2) const
{
    return eval_node(*root_, x1, x2);
}

}  // namespace mpcolloc
