#include "mpcolloc/bspline.hpp"

#include <algorithm>
#include <cmath>

namespace mpcolloc {

SplineSpace1D::SplineSpace1D(int degree, int regularity, int innerKnots)
    : p_(degree), r_(regularity), k_(innerKnots)
{
    if (p_ < 1) {
        throw ParameterError("spline degree must satisfy p >= 1, got p = " + std::to_string(p_));
    }
    if (r_ < -1 || r_ > p_ - 1) {
        throw ParameterError("regularity must satisfy -1 <= r <= p-1, got (p,r) = (" + std::to_string(p_) + "," +
                             std::to_string(r_) + ")");
    }
    if (k_ < 0) {
        throw ParameterError("inner knot count must satisfy k >= 0, got k = " + std::to_string(k_));
    }
    n_ = p_ + 1 + k_ * (p_ - r_);

    breaks_.resize(k_ + 2);
    for (int j = 0; j <= k_ + 1; ++j) {
        breaks_[j] = static_cast<double>(j) / (k_ + 1);
    }
    breaks_.back() = 1.0;

    knots_.reserve(n_ + p_ + 1);
    knots_.insert(knots_.end(), p_ + 1, 0.0);
    for (int j = 1; j <= k_; ++j) {
        knots_.insert(knots_.end(), p_ - r_, breaks_[j]);
    }
    knots_.insert(knots_.end(), p_ + 1, 1.0);

    spanKnot_.resize(k_ + 1);
    for (int s = 0; s <= k_; ++s) {
        spanKnot_[s] = p_ + s * (p_ - r_);
    }
}

SplineSpace1D make_space(int p, int r, int k)
{
    return SplineSpace1D(p, r, k);
}

int SplineSpace1D::spanOf(double x) const
{
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError("evaluation point " + std::to_string(x) + " outside [0,1]");
    }
    int s = static_cast<int>(std::floor(x * (k_ + 1)));
    s = std::clamp(s, 0, k_);
    // Correct the floor against the stored breakpoints so that a point equal
    // to a knot always lands in the span to its right.
    while (s < k_ && x >= breaks_[s + 1]) {
        ++s;
    }
    while (s > 0 && x < breaks_[s]) {
        --s;
    }
    return s;
}

LocalBasis SplineSpace1D::evalLocal(double x, int maxDeriv) const
{
    const int span = spanKnot_[spanOf(x)];
    const int nd = std::min(maxDeriv, p_);
    const std::vector<double>& U = knots_;

    // Derivatives of B-spline basis functions (The NURBS Book, A2.3).
    Eigen::MatrixXd ndu(p_ + 1, p_ + 1);
    std::vector<double> left(p_ + 1), right(p_ + 1);
    ndu(0, 0) = 1.0;
    for (int j = 1; j <= p_; ++j) {
        left[j] = x - U[span + 1 - j];
        right[j] = U[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu(j, r) = right[r + 1] + left[j - r];
            const double temp = ndu(r, j - 1) / ndu(j, r);
            ndu(r, j) = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu(j, j) = saved;
    }

    LocalBasis out;
    out.first = span - p_;
    out.ders = Eigen::MatrixXd::Zero(std::max(maxDeriv, 0) + 1, p_ + 1);
    for (int j = 0; j <= p_; ++j) {
        out.ders(0, j) = ndu(j, p_);
    }

    Eigen::MatrixXd a(2, p_ + 1);
    for (int r = 0; r <= p_; ++r) {
        int s1 = 0;
        int s2 = 1;
        a(0, 0) = 1.0;
        for (int k = 1; k <= nd; ++k) {
            double d = 0.0;
            const int rk = r - k;
            const int pk = p_ - k;
            if (r >= k) {
                a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
                d = a(s2, 0) * ndu(rk, pk);
            }
            const int j1 = rk >= -1 ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p_ - r;
            for (int j = j1; j <= j2; ++j) {
                a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
                d += a(s2, j) * ndu(rk + j, pk);
            }
            if (r <= pk) {
                a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
                d += a(s2, k) * ndu(r, pk);
            }
            out.ders(k, r) = d;
            std::swap(s1, s2);
        }
    }

    double factor = p_;
    for (int k = 1; k <= nd; ++k) {
        out.ders.row(k) *= factor;
        factor *= (p_ - k);
    }
    return out;
}

Eigen::MatrixXd SplineSpace1D::evalAll(double x, int maxDeriv) const
{
    const LocalBasis local = evalLocal(x, maxDeriv);
    Eigen::MatrixXd table = Eigen::MatrixXd::Zero(local.ders.rows(), n_);
    table.middleCols(local.first, p_ + 1) = local.ders;
    return table;
}

std::vector<double> SplineSpace1D::greville() const
{
    std::vector<double> g(n_);
    for (int j = 0; j < n_; ++j) {
        double sum = 0.0;
        for (int i = 1; i <= p_; ++i) {
            sum += knots_[j + i];
        }
        g[j] = sum / p_;
    }
    // Mirror the upper half so that zeta_j + zeta_{n-1-j} = 1 holds exactly.
    for (int j = 0; j < n_ / 2; ++j) {
        g[n_ - 1 - j] = 1.0 - g[j];
    }
    if (n_ % 2 == 1) {
        g[n_ / 2] = 0.5;
    }
    g.front() = 0.0;
    g.back() = 1.0;
    return g;
}

Eigen::MatrixXd TensorSpace2D::evalTensor(const Eigen::Vector2d& xi, int d1, int d2) const
{
    const Eigen::MatrixXd t1 = factor_.evalAll(xi.x(), d1);
    const Eigen::MatrixXd t2 = factor_.evalAll(xi.y(), d2);
    return t1.row(d1).transpose() * t2.row(d2);
}

}  // namespace mpcolloc
