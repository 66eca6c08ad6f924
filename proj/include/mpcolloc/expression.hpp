#pragma once

#include <memory>
#include <stdexcept>
#include <string>

namespace mpcolloc {

class ExpressionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Value with gradient and Hessian in two variables (second-order forward mode).
struct Dual2 {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double h11 = 0.0;
    double h12 = 0.0;
    double h22 = 0.0;

    static Dual2 constant(double c) { return {c, 0, 0, 0, 0, 0}; }
    static Dual2 variable(int which, double value)
    {
        Dual2 d = constant(value);
        (which == 0 ? d.d1 : d.d2) = 1.0;
        return d;
    }
};

Dual2 operator+(const Dual2& a, const Dual2& b);
Dual2 operator-(const Dual2& a, const Dual2& b);
Dual2 operator-(const Dual2& a);
Dual2 operator*(const Dual2& a, const Dual2& b);
Dual2 operator/(const Dual2& a, const Dual2& b);
Dual2 sin(const Dual2& a);
Dual2 cos(const Dual2& a);
Dual2 exp(const Dual2& a);
Dual2 log(const Dual2& a);
Dual2 sqrt(const Dual2& a);
Dual2 pow(const Dual2& a, const Dual2& b);

/// Arithmetic expression in x1, x2 with + - * / ^, parentheses, numbers, pi,
/// and sin, cos, exp, log, sqrt. Parsed once, evaluated with derivatives.
class Expression {
public:
    explicit Expression(const std::string& text);
    ~Expression();
    Expression(const Expression&);
    Expression& operator=(const Expression&);

    Dual2 eval(double x1, double x2) const;
    const std::string& text() const { return text_; }

    struct Node;

private:
    std::string text_;
    std::shared_ptr<const Node> root_;
};

}  // namespace mpcolloc
