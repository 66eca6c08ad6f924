#pragma once

#include "mpcolloc/collocation.hpp"
#include "mpcolloc/expression.hpp"
#include "mpcolloc/solver.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace mpcolloc {

/// Exact solution u with its physical derivatives. f = Delta u is the
/// interior data, f1 = u the Dirichlet data.
struct ManufacturedSolution {
    std::string name;
    std::function<PhysicalJet(const Eigen::Vector2d&)> jet;

    double u(const Eigen::Vector2d& x) const { return jet(x).value; }
    double f(const Eigen::Vector2d& x) const { return jet(x).laplacian(); }
    ScalarField interiorData() const;
    ScalarField boundaryData() const;
};

/// onepatch, ua, ub, uc, ud.
ManufacturedSolution catalog(const std::string& name);
std::vector<std::string> catalog_names();

/// u given as an expression in x1, x2, differentiated automatically.
ManufacturedSolution expression_solution(const std::string& text);

/// Catalog name or, failing that, an expression.
ManufacturedSolution resolve_solution(const std::string& nameOrExpression);

/// Gauss-Legendre rule with q nodes on [0,1].
struct QuadratureRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

QuadratureRule gauss_legendre(int q);

struct ErrorNorms {
    double relL2 = 0.0;
    double relH1 = 0.0;
    double relH2 = 0.0;
    // absolute error norms and norms of u
    std::array<double, 3> error{};
    std::array<double, 3> exact{};
};

/// Full-norm relative errors by q-point Gauss quadrature on each knot span of
/// each patch, weighted by |det J|.
ErrorNorms error_norms(const Solution& sol, const ManufacturedSolution& exact, int q);

/// log(e0/e1) / log(h0/h1).
double pairwise_rate(double h0, double e0, double h1, double e1);

/// Least-squares slope of log e against log h.
double fitted_rate(const std::vector<double>& h, const std::vector<double>& e);

struct StudyLevel {
    int k = 0;
    double h = 0.0;
    int ndof = 0;
    int npoints = 0;
    ErrorNorms norms;
    std::array<double, 3> rate{};  // NaN on the first level
    double boundaryResidual = 0.0;
    double interiorResidual = 0.0;
    double seconds = 0.0;
};

struct ErrorReport {
    std::string domain;
    int p = 0;
    int r = 0;
    Strategy strategy = Strategy::Greville;
    std::string solution;
    std::vector<StudyLevel> levels;

    /// Least-squares rates over the last `count` levels, per norm.
    std::array<double, 3> fittedRates(int count) const;
};

struct StudyOptions {
    int quadrature = -1;  // <= 0 selects p + 2
    std::function<void(const StudyLevel&)> progress;
};

/// Solves on each k in turn and records errors and rates.
ErrorReport convergence_study(const MultiPatchDomain& domain, int p, int r, Strategy strategy,
                              const std::vector<int>& ks, const ManufacturedSolution& exact,
                              const StudyOptions& options = {});

inline constexpr const char* kReportHeader =
    "domain,p,r,strategy,k,h,ndof,npoints,relL2,relH1,relH2,rateL2,rateH1,rateH2";

/// Header line followed by one row per level of each report.
void write_report_csv(std::ostream& out, const std::vector<ErrorReport>& reports);

}  // namespace mpcolloc
