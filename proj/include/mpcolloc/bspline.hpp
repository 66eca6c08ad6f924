#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace mpcolloc {

/// Thrown when a space, domain or solver receives inconsistent parameters.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when an evaluation point lies outside the parameter domain.
class DomainError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Nonzero B-spline values and derivatives at one abscissa.
///
/// Row d holds the d-th derivatives of the deg+1 functions that are active on
/// the knot span containing the abscissa; column l belongs to function first+l.
struct LocalBasis {
    int first = 0;
    Eigen::MatrixXd ders;

    double operator()(int j, int d) const
    {
        const int l = j - first;
        if (l < 0 || l >= ders.cols() || d < 0 || d >= ders.rows()) {
            return 0.0;
        }
        return ders(d, l);
    }
};

/// Univariate spline space S_h^{p,r} on [0,1] with an open uniform knot vector.
///
/// Inner knots j/(k+1) have multiplicity p-r, the end knots p+1. All span
/// lookups go through knot indices; the only floating-point knot values are
/// the ones stored here.
class SplineSpace1D {
public:
    SplineSpace1D(int degree, int regularity, int innerKnots);

    int degree() const { return p_; }
    int regularity() const { return r_; }
    int innerKnots() const { return k_; }
    int dim() const { return n_; }
    double meshSize() const { return 1.0 / (k_ + 1); }
    const std::vector<double>& knots() const { return knots_; }

    /// Value of the j-th distinct knot j/(k+1), j = 0..k+1.
    double breakpoint(int j) const { return breaks_[j]; }

    /// Index s of the knot span [s h, (s+1) h) containing x; x = 1 maps to
    /// the last span.
    int spanOf(double x) const;

    /// Support [t_j, t_{j+p+1}] of the j-th B-spline.
    double supportBegin(int j) const { return knots_[j]; }
    double supportEnd(int j) const { return knots_[j + p_ + 1]; }

    /// Nonzero basis functions at x with derivatives 0..maxDeriv. Orders
    /// above p are returned as zero rows.
    LocalBasis evalLocal(double x, int maxDeriv) const;

    /// Full (maxDeriv+1) x n table of all basis functions at x.
    Eigen::MatrixXd evalAll(double x, int maxDeriv) const;

    /// Greville abscissae (t_{j+1}+...+t_{j+p})/p.
    std::vector<double> greville() const;

    bool operator==(const SplineSpace1D& o) const { return p_ == o.p_ && r_ == o.r_ && k_ == o.k_; }

private:
    int p_;
    int r_;
    int k_;
    int n_;
    std::vector<double> breaks_;
    std::vector<double> knots_;
    std::vector<int> spanKnot_;  // last knot index t_i with t_i = breakpoint(s)
};

SplineSpace1D make_space(int p, int r, int k);

/// Tensor-product space with the same univariate factor in both directions.
class TensorSpace2D {
public:
    explicit TensorSpace2D(SplineSpace1D factor) : factor_(std::move(factor)) {}

    const SplineSpace1D& factor() const { return factor_; }
    int dim() const { return factor_.dim() * factor_.dim(); }

    /// n x n table with entry (j1,j2) = N_{j1}^{(d1)}(xi1) N_{j2}^{(d2)}(xi2).
    Eigen::MatrixXd evalTensor(const Eigen::Vector2d& xi, int d1, int d2) const;

private:
    SplineSpace1D factor_;
};

}  // namespace mpcolloc
