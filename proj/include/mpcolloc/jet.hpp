#pragma once

#include <Eigen/Dense>

#include <array>

namespace mpcolloc {

/// Highest total derivative order carried by vertex jets.
inline constexpr int kJetOrder = 4;

/// Bivariate polynomial truncated above total degree kJetOrder.
///
/// Stored as monomial coefficients c(a,b) of t1^a t2^b, so that the partial
/// derivative d^{a+b}/dt1^a dt2^b at the origin equals a! b! c(a,b).
template <typename Scalar>
class TruncatedPoly {
public:
    using Coeffs = Eigen::Matrix<Scalar, kJetOrder + 1, kJetOrder + 1>;

    TruncatedPoly() : c_(Coeffs::Zero()) {}

    static TruncatedPoly constant(Scalar v)
    {
        TruncatedPoly t;
        t.c_(0, 0) = v;
        return t;
    }

    static TruncatedPoly variable(int which)
    {
        TruncatedPoly t;
        if (which == 0) {
            t.c_(1, 0) = Scalar(1);
        } else {
            t.c_(0, 1) = Scalar(1);
        }
        return t;
    }

    /// Builds the Taylor polynomial from derivative values d(a,b).
    template <typename Deriv>
    static TruncatedPoly fromDerivatives(const Deriv& d)
    {
        TruncatedPoly t;
        for (int a = 0; a <= kJetOrder; ++a) {
            for (int b = 0; a + b <= kJetOrder; ++b) {
                t.c_(a, b) = d(a, b) / (factorial(a) * factorial(b));
            }
        }
        return t;
    }

    Scalar coeff(int a, int b) const { return c_(a, b); }
    Scalar& coeff(int a, int b) { return c_(a, b); }

    Scalar derivative(int a, int b) const { return c_(a, b) * factorial(a) * factorial(b); }

    TruncatedPoly& operator+=(const TruncatedPoly& o)
    {
        c_ += o.c_;
        return *this;
    }
    TruncatedPoly& operator-=(const TruncatedPoly& o)
    {
        c_ -= o.c_;
        return *this;
    }
    TruncatedPoly& operator*=(Scalar s)
    {
        c_ *= s;
        return *this;
    }
    friend TruncatedPoly operator+(TruncatedPoly a, const TruncatedPoly& b) { return a += b; }
    friend TruncatedPoly operator-(TruncatedPoly a, const TruncatedPoly& b) { return a -= b; }
    friend TruncatedPoly operator*(TruncatedPoly a, Scalar s) { return a *= s; }
    friend TruncatedPoly operator*(Scalar s, TruncatedPoly a) { return a *= s; }

    friend TruncatedPoly operator*(const TruncatedPoly& x, const TruncatedPoly& y)
    {
        TruncatedPoly out;
        for (int a1 = 0; a1 <= kJetOrder; ++a1) {
            for (int b1 = 0; a1 + b1 <= kJetOrder; ++b1) {
                const Scalar xv = x.c_(a1, b1);
                if (xv == Scalar(0)) {
                    continue;
                }
                for (int a2 = 0; a1 + b1 + a2 <= kJetOrder; ++a2) {
                    for (int b2 = 0; a1 + b1 + a2 + b2 <= kJetOrder; ++b2) {
                        out.c_(a1 + a2, b1 + b2) += xv * y.c_(a2, b2);
                    }
                }
            }
        }
        return out;
    }

    Scalar maxAbs() const { return c_.cwiseAbs().maxCoeff(); }

    static Scalar factorial(int m)
    {
        Scalar f(1);
        for (int i = 2; i <= m; ++i) {
            f *= Scalar(i);
        }
        return f;
    }

private:
    Coeffs c_;
};

using Jet = TruncatedPoly<double>;

/// A planar map t -> (x1(t), x2(t)) as a pair of truncated polynomials.
struct JetMap {
    std::array<Jet, 2> comp;
};

/// Substitutes x_i = inner.comp[i] into the polynomial outer(x1, x2). The
/// inner map must have zero constant terms.
Jet compose(const Jet& outer, const JetMap& inner);

/// Truncated inverse series of a map with zero constant term and regular
/// linear part: returns H with map(H(x)) = x up to total degree kJetOrder.
JetMap invert(const JetMap& map);

}  // namespace mpcolloc
