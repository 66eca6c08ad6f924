#include "mpcolloc/solver.hpp"

#include <Eigen/SparseQR>
#ifdef MPCOLLOC_HAVE_SPQR
#include <Eigen/SPQRSupport>
#endif

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

namespace mpcolloc {

int worker_threads()
{
    if (const char* env = std::getenv("MPCOLLOC_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) {
            return n;
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int n, const std::function<void(int)>& body)
{
    const int threads = std::min(worker_threads(), std::max(1, n / 64));
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        try {
            for (int i = next++; i < n && !failed; i = next++) {
                body(i);
            }
        } catch (...) {
            if (!failed.exchange(true)) {
                error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    for (std::thread& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

PhysicalJet physical_derivatives(const PatchJet& F, const DerivArray& g)
{
    const Eigen::Matrix2d J = F.jacobian();
    const double det = J.determinant();
    if (!(std::abs(det) > 1e-14 * std::max(1.0, J.squaredNorm()))) {
        throw NumericalError("singular patch Jacobian");
    }
    const Eigen::Matrix2d Jinv = J.inverse();
    PhysicalJet out;
    out.value = g[deriv_index(0, 0)];
    const Eigen::Vector2d dg(g[deriv_index(1, 0)], g[deriv_index(0, 1)]);
    out.grad = Jinv.transpose() * dg;
    Eigen::Matrix2d H;
    H << g[deriv_index(2, 0)], g[deriv_index(1, 1)], g[deriv_index(1, 1)], g[deriv_index(0, 2)];
    for (int c = 0; c < 2; ++c) {
        Eigen::Matrix2d HF;
        HF << F(2, 0)[c], F(1, 1)[c], F(1, 1)[c], F(0, 2)[c];
        H -= out.grad[c] * HF;
    }
    out.hess = Jinv.transpose() * H * Jinv;
    return out;
}

double laplacian_pullback(const PatchJet& F, const DerivArray& g)
{
    return physical_derivatives(F, g).laplacian();
}

bool structurally_boundary_active(const BasisFunction& fn)
{
    switch (fn.kind) {
    case BasisKind::BoundaryEdge:
        return fn.j1 == 0;
    case BasisKind::VertexV1:
        return fn.j1 == 0 || fn.j2 == 0;
    case BasisKind::VertexV2:
        // at eta2 = 0 the edge families keep the terms beta^q N^(q)_{j2}, q <= 2 - j1;
        // the corner B-splines N_{3,0}, N_{4,0}
        return fn.j1 <= 2 ? fn.j2 <= 2 - fn.j1 : fn.j2 != 1;
    case BasisKind::VertexV3:
        return true;
    default:
        return false;
    }
}

namespace {

using Row = std::vector<std::pair<int, double>>;

Eigen::SparseMatrix<double> from_rows(const std::vector<Row>& rows, int cols)
{
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
        for (const auto& [j, v] : rows[i]) {
            trip.emplace_back(i, j, v);
        }
    }
    Eigen::SparseMatrix<double> m(static_cast<int>(rows.size()), cols);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

Eigen::SparseMatrix<double> select_columns(const Eigen::SparseMatrix<double>& A, const std::vector<int>& cols)
{
    Eigen::SparseMatrix<double> out(A.rows(), static_cast<int>(cols.size()));
    std::vector<Eigen::Triplet<double>> trip;
    for (int c = 0; c < static_cast<int>(cols.size()); ++c) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, cols[c]); it; ++it) {
            trip.emplace_back(static_cast<int>(it.row()), c, it.value());
        }
    }
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

}  // namespace

CollocationSystem assemble(const C2Space& space, const CollocationPointSet& points, const ScalarField& f, const ScalarField& f1)
{
    if (points.p != space.degree() || points.r != space.regularity() || points.k != space.innerKnots()) {
        throw ParameterError("collocation points were generated for a different spline space");
    }
    const MultiPatchDomain& dom = space.domain();
    const int nI = static_cast<int>(points.inner.size());
    const int nB = static_cast<int>(points.boundary.size());
    std::vector<Row> rowsI(nI);
    std::vector<Row> rowsB(nB);
    CollocationSystem sys;
    sys.rhsInterior.resize(nI);
    sys.rhsBoundary.resize(nB);

    parallel_for(nI + nB, [&](int i) {
        std::vector<BasisValue> active;
        const bool isBoundary = i >= nI;
        const CollocationPoint& pt = points.points[isBoundary ? points.boundary[i - nI] : points.inner[i]];
        if (isBoundary) {
            space.evalActive(pt.patch, pt.xi, 0, active);
            Row& row = rowsB[i - nI];
            for (const BasisValue& bv : active) {
                if (bv.d[0] != 0.0) {
                    row.emplace_back(bv.index, bv.d[0]);
                }
            }
            sys.rhsBoundary[i - nI] = f1(pt.x);
        } else {
            space.evalActive(pt.patch, pt.xi, 2, active);
            const PatchJet F = dom.patch(pt.patch).derivatives(pt.xi, 2);
            Row& row = rowsI[i];
            for (const BasisValue& bv : active) {
                const double v = laplacian_pullback(F, bv.d);
                if (v != 0.0) {
                    row.emplace_back(bv.index, v);
                }
            }
            sys.rhsInterior[i] = f(pt.x);
        }
    });

    sys.interior = from_rows(rowsI, space.dim());
    sys.boundary = from_rows(rowsB, space.dim());

    std::vector<double> colMax(space.dim(), 0.0);
    for (int c = 0; c < space.dim(); ++c) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.boundary, c); it; ++it) {
            colMax[c] = std::max(colMax[c], std::abs(it.value()));
        }
    }
    for (int c = 0; c < space.dim(); ++c) {
        const bool structural = structurally_boundary_active(space.function(c));
        if (!structural && colMax[c] > 1e-12) {
            std::ostringstream os;
            os << "boundary audit: basis function " << c << " (" << to_string(space.function(c).kind)
               << ") has boundary value " << colMax[c];
            throw NumericalError(os.str());
        }
        (structural && colMax[c] > 1e-12 ? sys.boundaryActive : sys.freeColumns).push_back(c);
    }
    return sys;
}

const char* least_squares_backend()
{
#ifdef MPCOLLOC_HAVE_SPQR
    return "SuiteSparseQR";
#else
    return "Eigen::SparseQR";
#endif
}

LeastSquaresResult sparse_least_squares(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b, const std::string& stage)
{
    LeastSquaresResult res;
    if (A.cols() == 0) {
        res.x.resize(0);
        res.residual = b.norm();
        return res;
    }
    if (A.rows() < A.cols()) {
        throw NumericalError(stage + " stage: " + std::to_string(A.rows()) + " equations for " + std::to_string(A.cols()) +
                             " unknowns");
    }
    Eigen::VectorXd rdiag;
#ifdef MPCOLLOC_HAVE_SPQR
    using LongMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, SuiteSparse_long>;
    LongMatrix M = A;
    M.makeCompressed();
    Eigen::SPQR<LongMatrix> qr;
    qr.compute(M);
    if (qr.info() != Eigen::Success) {
        throw NumericalError(stage + " stage: sparse QR factorization failed");
    }
    res.rank = static_cast<int>(qr.rank());
    res.x = qr.solve(b);
    if (res.rank < A.cols()) {
        rdiag = qr.matrixR().diagonal();
    }
#else
    Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qr;
    Eigen::SparseMatrix<double> M = A;
    M.makeCompressed();
    qr.compute(M);
    if (qr.info() != Eigen::Success) {
        throw NumericalError(stage + " stage: sparse QR factorization failed");
    }
    res.rank = static_cast<int>(qr.rank());
    res.x = qr.solve(b);
    if (res.rank < A.cols()) {
        rdiag = Eigen::VectorXd(qr.matrixR().diagonal());
    }
#endif
    if (res.rank < A.cols()) {
        const Eigen::VectorXd d = rdiag.cwiseAbs();
        std::ostringstream os;
        os << stage << " stage is rank deficient: rank " << res.rank << " of " << A.cols() << " columns";
        if (d.size() > 0 && d.minCoeff() > 0.0) {
            os << ", condition estimate " << d.maxCoeff() / d.minCoeff();
        } else {
            os << ", condition estimate inf";
        }
        throw NumericalError(os.str());
    }
    res.residual = (A * res.x - b).norm();
    return res;
}

namespace {

// Rank-revealing boundary stage: coefficients of a basic least-squares
// solution plus a sparse basis of the null space of the boundary block.
struct BoundaryStage {
    Eigen::VectorXd x;
    Eigen::SparseMatrix<double> nullBasis;  // columns are null vectors
    double residual = 0.0;
};

BoundaryStage boundary_stage(const Eigen::SparseMatrix<double>& B, const Eigen::VectorXd& b)
{
    BoundaryStage st;
    const int m = static_cast<int>(B.cols());
    st.x = Eigen::VectorXd::Zero(m);
    st.nullBasis.resize(m, 0);
    if (m == 0) {
        st.residual = b.norm();
        return st;
    }
    Eigen::SparseMatrix<double> M = B;
    M.makeCompressed();
    Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qr(M);
    if (qr.info() != Eigen::Success) {
        throw NumericalError("boundary stage: sparse QR factorization failed");
    }
    const int rank = static_cast<int>(qr.rank());
    if (rank == m) {
        st.x = qr.solve(b);
        st.residual = (B * st.x - b).norm();
        return st;
    }
    // the factorization moves dependent columns behind the first `rank` ones
    const auto& perm = qr.colsPermutation().indices();
    std::vector<int> indep(perm.data(), perm.data() + rank);
    std::vector<int> dep(perm.data() + rank, perm.data() + m);
    std::sort(indep.begin(), indep.end());
    std::sort(dep.begin(), dep.end());

    const Eigen::SparseMatrix<double> Bi = select_columns(B, indep);
    Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qi(Bi);
    if (qi.info() != Eigen::Success || qi.rank() < rank) {
        throw NumericalError("boundary stage: independent columns lost rank");
    }
    const Eigen::VectorXd xi = qi.solve(b);
    for (int i = 0; i < rank; ++i) {
        st.x[indep[i]] = xi[i];
    }
    st.residual = (B * st.x - b).norm();

    const Eigen::MatrixXd Bd = Eigen::MatrixXd(select_columns(B, dep));
    const Eigen::MatrixXd X = qi.solve(Eigen::MatrixXd(-Bd));
    const double consistency = (Bi * X + Bd).norm() / std::max(1.0, Bd.norm());
    if (consistency > 1e-8) {
        std::ostringstream os;
        os << "boundary stage is rank deficient (rank " << rank << " of " << m
           << ") but the dependent columns are not in the span of the others (defect " << consistency << ")";
        throw NumericalError(os.str());
    }
    std::vector<Eigen::Triplet<double>> trip;
    for (int d = 0; d < static_cast<int>(dep.size()); ++d) {
        trip.emplace_back(dep[d], d, 1.0);
        const double cut = 1e-13 * std::max(1.0, X.col(d).cwiseAbs().maxCoeff());
        for (int i = 0; i < rank; ++i) {
            if (std::abs(X(i, d)) > cut) {
                trip.emplace_back(indep[i], d, X(i, d));
            }
        }
    }
    st.nullBasis.resize(m, static_cast<int>(dep.size()));
    st.nullBasis.setFromTriplets(trip.begin(), trip.end());
    return st;
}

}  // namespace

Solution solve_two_stage(const C2Space& space, const CollocationSystem& sys)
{
    Solution sol;
    sol.space = &space;
    sol.coef = Eigen::VectorXd::Zero(space.dim());

    const std::vector<int>& act = sys.boundaryActive;
    const BoundaryStage s1 = boundary_stage(select_columns(sys.boundary, act), sys.rhsBoundary);
    for (std::size_t i = 0; i < act.size(); ++i) {
        sol.coef[act[i]] = s1.x[i];
    }
    sol.boundaryResidual = s1.residual;
    sol.boundaryNullity = static_cast<int>(s1.nullBasis.cols());

    // unknowns of the interior stage: the free columns and the boundary null space
    const Eigen::VectorXd rhs = sys.rhsInterior - sys.interior * sol.coef;
    const Eigen::SparseMatrix<double> free = select_columns(sys.interior, sys.freeColumns);
    const Eigen::SparseMatrix<double> carried = select_columns(sys.interior, act) * s1.nullBasis;
    Eigen::SparseMatrix<double> A(free.rows(), free.cols() + carried.cols());
    {
        std::vector<Eigen::Triplet<double>> trip;
        for (int c = 0; c < free.cols(); ++c) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(free, c); it; ++it) {
                trip.emplace_back(static_cast<int>(it.row()), c, it.value());
            }
        }
        for (int c = 0; c < carried.cols(); ++c) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(carried, c); it; ++it) {
                trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(free.cols()) + c, it.value());
            }
        }
        A.setFromTriplets(trip.begin(), trip.end());
    }
    const LeastSquaresResult s2 = sparse_least_squares(A, rhs, "interior");
    for (std::size_t i = 0; i < sys.freeColumns.size(); ++i) {
        sol.coef[sys.freeColumns[i]] = s2.x[i];
    }
    if (carried.cols() > 0) {
        const Eigen::VectorXd shift = s1.nullBasis * s2.x.tail(carried.cols());
        for (std::size_t i = 0; i < act.size(); ++i) {
            sol.coef[act[i]] += shift[i];
        }
    }
    sol.interiorResidual = s2.residual;
    return sol;
}

PhysicalJet evaluate_solution(const Solution& sol, int patch, const Eigen::Vector2d& xi)
{
    const C2Space& space = *sol.space;
    std::vector<BasisValue> active;
    space.evalActive(patch, xi, 2, active);
    DerivArray g{};
    for (const BasisValue& bv : active) {
        const double c = sol.coef[bv.index];
        for (int i = 0; i < num_derivs(2); ++i) {
            g[i] += c * bv.d[i];
        }
    }
    return physical_derivatives(space.domain().patch(patch).derivatives(xi, 2), g);
}

PhysicalJet evaluate_solution(const Solution& sol, const Eigen::Vector2d& x)
{
    const MultiPatchDomain& dom = sol.space->domain();
    const double slack = 1e-10;
    for (int i = 0; i < dom.numPatches(); ++i) {
        const auto xi = dom.patch(i).invert(x);
        if (xi && xi->minCoeff() >= -slack && xi->maxCoeff() <= 1.0 + slack) {
            return evaluate_solution(sol, i, xi->cwiseMax(0.0).cwiseMin(1.0));
        }
    }
    std::ostringstream os;
    os << "point (" << x.x() << ", " << x.y() << ") lies outside the domain";
    throw DomainError(os.str());
}

}  // namespace mpcolloc
