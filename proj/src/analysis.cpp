#include "mpcolloc/analysis.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace mpcolloc {

namespace {

// u = A cos(a x1 + b) sin(c x2 + d)
ManufacturedSolution cos_sin(std::string name, double A, double a, double b, double c, double d)
{
    ManufacturedSolution m;
    m.name = std::move(name);
    m.jet = [=](const Eigen::Vector2d& x) {
        const double s1 = std::sin(a * x.x() + b);
        const double c1 = std::cos(a * x.x() + b);
        const double s2 = std::sin(c * x.y() + d);
        const double c2 = std::cos(c * x.y() + d);
        PhysicalJet j;
        j.value = A * c1 * s2;
        j.grad = Eigen::Vector2d(-A * a * s1 * s2, A * c * c1 * c2);
        j.hess(0, 0) = -A * a * a * c1 * s2;
        j.hess(0, 1) = j.hess(1, 0) = -A * a * c * s1 * c2;
        j.hess(1, 1) = -A * c * c * c1 * s2;
        return j;
    };
    return m;
}

}  // namespace

ScalarField ManufacturedSolution::interiorData() const
{
    auto j = jet;
    return [j](const Eigen::Vector2d& x) { return j(x).laplacian(); };
}

ScalarField ManufacturedSolution::boundaryData() const
{
    auto j = jet;
    return [j](const Eigen::Vector2d& x) { return j(x).value; };
}

std::vector<std::string> catalog_names()
{
    return {"onepatch", "ua", "ub", "uc", "ud"};
}

ManufacturedSolution catalog(const std::string& name)
{
    if (name == "onepatch") {
        return cos_sin(name, 1.0, 4.0, -2.0, 4.0, -2.0 / 3.0);
    }
    if (name == "ua") {
        return cos_sin(name, -4.0, 2.0 / 3.0, 0.0, 2.0 / 3.0, 0.0);
    }
    if (name == "ub") {
        return cos_sin(name, -4.0, 0.5, 0.0, 0.5, -1.0);
    }
    if (name == "uc") {
        return cos_sin(name, -4.0, 0.5, 1.5, 0.5, -0.5);
    }
    if (name == "ud") {
        return cos_sin(name, -4.0, 1.0 / 3.0, 0.0, 1.0 / 3.0, 0.0);
    }
    throw ParameterError("unknown solution '" + name + "' (known: onepatch, ua, ub, uc, ud)");
}

ManufacturedSolution expression_solution(const std::string& text)
{
    Expression expr(text);
    ManufacturedSolution m;
    m.name = text;
    m.jet = [expr](const Eigen::Vector2d& x) {
        const Dual2 d = expr.eval(x.x(), x.y());
        PhysicalJet j;
        j.value = d.v;
        j.grad = Eigen::Vector2d(d.d1, d.d2);
        j.hess << d.h11, d.h12, d.h12, d.h22;
        return j;
    };
    return m;
}

ManufacturedSolution resolve_solution(const std::string& nameOrExpression)
{
    const auto names = catalog_names();
    if (std::find(names.begin(), names.end(), nameOrExpression) != names.end()) {
        return catalog(nameOrExpression);
    }
    try {
        return expression_solution(nameOrExpression);
    } catch (const ExpressionError& e) {
        throw ParameterError("solution '" + nameOrExpression + "' is neither a catalog name nor a valid expression: " +
                             e.what());
    }
}

QuadratureRule gauss_legendre(int q)
{
    if (q < 1) {
        throw ParameterError("quadrature order must be >= 1");
    }
    // Golub-Welsch on the Legendre Jacobi matrix
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(q, q);
    for (int i = 1; i < q; ++i) {
        const double b = i / std::sqrt(4.0 * i * i - 1.0);
        J(i, i - 1) = J(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    QuadratureRule rule;
    rule.nodes = (es.eigenvalues().array() + 1.0) * 0.5;
    rule.weights = es.eigenvectors().row(0).transpose().array().square();
    return rule;
}

ErrorNorms error_norms(const Solution& sol, const ManufacturedSolution& exact, int q)
{
    if (q < 1) {
        throw ParameterError("quadrature order must be >= 1");
    }
    const C2Space& space = *sol.space;
    const MultiPatchDomain& dom = space.domain();
    const QuadratureRule rule = gauss_legendre(q);

    struct Cell {
        int patch;
        double a1, b1, a2, b2;
    };
    std::vector<Cell> cells;
    for (int pi = 0; pi < dom.numPatches(); ++pi) {
        std::vector<double> br = space.space().knots();
        const auto geo = dom.patch(pi).breakpoints();
        br.insert(br.end(), geo.begin(), geo.end());
        std::sort(br.begin(), br.end());
        br.erase(std::unique(br.begin(), br.end(), [](double x, double y) { return std::abs(x - y) < 1e-14; }),
                 br.end());
        for (std::size_t i = 0; i + 1 < br.size(); ++i) {
            for (std::size_t j = 0; j + 1 < br.size(); ++j) {
                cells.push_back({pi, br[i], br[i + 1], br[j], br[j + 1]});
            }
        }
    }

    // per cell: |e|^2, |grad e|^2, |hess e|^2, then the same for u
    std::vector<std::array<double, 6>> sums(cells.size());
    parallel_for(static_cast<int>(cells.size()), [&](int c) {
        const Cell& cell = cells[c];
        const Patch& patch = dom.patch(cell.patch);
        std::array<double, 6> s{};
        for (int i = 0; i < q; ++i) {
            for (int j = 0; j < q; ++j) {
                const Eigen::Vector2d xi(cell.a1 + (cell.b1 - cell.a1) * rule.nodes[i],
                                         cell.a2 + (cell.b2 - cell.a2) * rule.nodes[j]);
                const double w = rule.weights[i] * rule.weights[j] * (cell.b1 - cell.a1) * (cell.b2 - cell.a2) *
                                 std::abs(patch.derivatives(xi, 1).jacobian().determinant());
                const PhysicalJet uh = evaluate_solution(sol, cell.patch, xi);
                const PhysicalJet u = exact.jet(patch.eval(xi));
                const double e0 = u.value - uh.value;
                const Eigen::Vector2d e1 = u.grad - uh.grad;
                const Eigen::Matrix2d e2 = u.hess - uh.hess;
                // second derivatives by multi-index, mixed term once
                s[0] += w * e0 * e0;
                s[1] += w * e1.squaredNorm();
                s[2] += w * (e2(0, 0) * e2(0, 0) + e2(0, 1) * e2(0, 1) + e2(1, 1) * e2(1, 1));
                s[3] += w * u.value * u.value;
                s[4] += w * u.grad.squaredNorm();
                s[5] += w * (u.hess(0, 0) * u.hess(0, 0) + u.hess(0, 1) * u.hess(0, 1) + u.hess(1, 1) * u.hess(1, 1));
            }
        }
        sums[c] = s;
    });

    std::array<double, 6> t{};
    for (const auto& s : sums) {
        for (int i = 0; i < 6; ++i) {
            t[i] += s[i];
        }
    }
    ErrorNorms n;
    n.error = {std::sqrt(t[0]), std::sqrt(t[0] + t[1]), std::sqrt(t[0] + t[1] + t[2])};
    n.exact = {std::sqrt(t[3]), std::sqrt(t[3] + t[4]), std::sqrt(t[3] + t[4] + t[5])};
    auto rel = [](double e, double u) { return u > 0.0 ? e / u : e; };
    n.relL2 = rel(n.error[0], n.exact[0]);
    n.relH1 = rel(n.error[1], n.exact[1]);
    n.relH2 = rel(n.error[2], n.exact[2]);
    return n;
}

double pairwise_rate(double h0, double e0, double h1, double e1)
{
    return std::log(e0 / e1) / std::log(h0 / h1);
}

double fitted_rate(const std::vector<double>& h, const std::vector<double>& e)
{
    if (h.size() != e.size() || h.size() < 2) {
        throw ParameterError("rate fit needs at least two (h, e) pairs");
    }
    const int n = static_cast<int>(h.size());
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = std::log(h[i]);
        b[i] = std::log(e[i]);
    }
    return A.colPivHouseholderQr().solve(b)[1];
}

std::array<double, 3> ErrorReport::fittedRates(int count) const
{
    const int n = static_cast<int>(levels.size());
    const int first = std::max(0, n - count);
    std::vector<double> h;
    std::array<std::vector<double>, 3> e;
    for (int i = first; i < n; ++i) {
        h.push_back(levels[i].h);
        e[0].push_back(levels[i].norms.relL2);
        e[1].push_back(levels[i].norms.relH1);
        e[2].push_back(levels[i].norms.relH2);
    }
    return {fitted_rate(h, e[0]), fitted_rate(h, e[1]), fitted_rate(h, e[2])};
}

ErrorReport convergence_study(const MultiPatchDomain& domain, int p, int r, Strategy strategy,
                              const std::vector<int>& ks, const ManufacturedSolution& exact,
                              const StudyOptions& options)
{
    if (ks.empty()) {
        throw ParameterError("study needs at least one k");
    }
    for (int k : ks) {
        check_space_parameters(p, r, k);
        if (k < 2) {
            throw ParameterError("collocation points need k >= 2");
        }
    }
    const int q = options.quadrature > 0 ? options.quadrature : p + 2;

    ErrorReport report;
    report.domain = domain.name();
    report.p = p;
    report.r = r;
    report.strategy = strategy;
    report.solution = exact.name;
    const ScalarField f = exact.interiorData();
    const ScalarField f1 = exact.boundaryData();

    for (int k : ks) {
        const auto t0 = std::chrono::steady_clock::now();
        const C2Space space(domain, p, r, k);
        const CollocationPointSet points = assemble_global(domain, p, r, k, strategy);
        const CollocationSystem sys = assemble(space, points, f, f1);
        const Solution sol = solve_two_stage(space, sys);

        StudyLevel level;
        level.k = k;
        level.h = 1.0 / (k + 1);
        level.ndof = space.dim();
        level.npoints = points.size();
        level.norms = error_norms(sol, exact, q);
        level.boundaryResidual = sol.boundaryResidual;
        level.interiorResidual = sol.interiorResidual;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        level.rate = {nan, nan, nan};
        if (!report.levels.empty()) {
            const StudyLevel& prev = report.levels.back();
            level.rate = {pairwise_rate(prev.h, prev.norms.relL2, level.h, level.norms.relL2),
                          pairwise_rate(prev.h, prev.norms.relH1, level.h, level.norms.relH1),
                          pairwise_rate(prev.h, prev.norms.relH2, level.h, level.norms.relH2)};
        }
        level.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report.levels.push_back(level);
        if (options.progress) {
            options.progress(level);
        }
    }
    return report;
}

void write_report_csv(std::ostream& out, const std::vector<ErrorReport>& reports)
{
    out << kReportHeader << '\n';
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.10e", v);
        return std::string(buf);
    };
    for (const ErrorReport& rep : reports) {
        for (const StudyLevel& l : rep.levels) {
            out << rep.domain << ',' << rep.p << ',' << rep.r << ',' << to_string(rep.strategy) << ',' << l.k << ','
                << num(l.h) << ',' << l.ndof << ',' << l.npoints << ',' << num(l.norms.relL2) << ','
                << num(l.norms.relH1) << ',' << num(l.norms.relH2);
            for (double rt : l.rate) {
                out << ',';
                if (!std::isnan(rt)) {
                    std::snprintf(buf, sizeof buf, "%.6f", rt);
                    out << buf;
                }
            }
            out << '\n';
        }
    }
}

}  // namespace mpcolloc
