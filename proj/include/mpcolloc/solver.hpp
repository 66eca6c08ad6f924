#pragma once

#include "mpcolloc/collocation.hpp"
#include "mpcolloc/smoothspace.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpcolloc {

/// Rank-deficient least-squares stage, singular Jacobian, or failed point search.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Worker thread count: MPCOLLOC_THREADS if set, else the hardware count.
int worker_threads();

/// Runs body(i) for i in [0, n) on up to worker_threads() threads.
void parallel_for(int n, const std::function<void(int)>& body);

/// Value, gradient and Hessian of a function in physical coordinates.
struct PhysicalJet {
    double value = 0.0;
    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
    Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();

    double laplacian() const { return hess.trace(); }
};

/// Chain rule for u = g o F^{-1}: grad = J^{-T} grad g and
/// hess = J^{-T} (H g - sum_c u_c H F_c) J^{-1}. g holds parametric
/// derivatives up to order 2; F needs orders up to 2.
PhysicalJet physical_derivatives(const PatchJet& F, const DerivArray& g);

/// Trace of the physical Hessian.
double laplacian_pullback(const PatchJet& F, const DerivArray& g);

using ScalarField = std::function<double(const Eigen::Vector2d&)>;

/// Interior rows Delta phi_i(y_j), boundary rows phi_i(y_j). Columns in
/// boundaryActive carry a boundary trace; the others are zero on the
/// boundary block.
struct CollocationSystem {
    Eigen::SparseMatrix<double> interior;
    Eigen::SparseMatrix<double> boundary;
    Eigen::VectorXd rhsInterior;
    Eigen::VectorXd rhsBoundary;
    std::vector<int> boundaryActive;
    std::vector<int> freeColumns;
};

/// True for the basis functions that can have a nonzero trace on the
/// boundary; a numeric audit of the boundary block refines this set.
bool structurally_boundary_active(const BasisFunction& fn);

CollocationSystem assemble(const C2Space& space, const CollocationPointSet& points, const ScalarField& f,
                           const ScalarField& f1);

struct LeastSquaresResult {
    Eigen::VectorXd x;
    int rank = 0;
    double residual = 0.0;  // |Ax - b|
};

/// Sparse QR least squares. Throws NumericalError naming `stage` when A has
/// deficient column rank.
LeastSquaresResult sparse_least_squares(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                                        const std::string& stage);

/// Name of the sparse QR backend compiled in.
const char* least_squares_backend();

struct Solution {
    const C2Space* space = nullptr;
    Eigen::VectorXd coef;
    double boundaryResidual = 0.0;
    double interiorResidual = 0.0;
    int boundaryNullity = 0;  // dependent boundary traces carried into the interior stage
};

/// Boundary block over the active columns first, then the interior block
/// over the remaining columns with the boundary coefficients fixed. When the
/// boundary traces are linearly dependent, the null-space combinations of the
/// active columns join the interior unknowns, so boundary values stay fixed.
Solution solve_two_stage(const C2Space& space, const CollocationSystem& system);

/// Physical derivatives of u_h on one patch.
PhysicalJet evaluate_solution(const Solution& sol, int patch, const Eigen::Vector2d& xi);

/// Physical derivatives of u_h at a physical point, using the first patch that
/// contains it. Throws DomainError outside all patches.
PhysicalJet evaluate_solution(const Solution& sol, const Eigen::Vector2d& x);

}  // namespace mpcolloc
