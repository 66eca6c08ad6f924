#include "mpcolloc/analysis.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace mpcolloc;

namespace {

std::vector<Eigen::Vector2d> random_points(int n, unsigned seed, double lo, double hi)
{
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<Eigen::Vector2d> pts;
    for (int i = 0; i < n; ++i) {
        pts.emplace_back(d(gen), d(gen));
    }
    return pts;
}

// central differences of u only
PhysicalJet fd_jet_raw(const ManufacturedSolution& m, const Eigen::Vector2d& x, double h)
{
    PhysicalJet j;
    const Eigen::Vector2d e[2] = {Eigen::Vector2d(h, 0), Eigen::Vector2d(0, h)};
    j.value = m.u(x);
    for (int a = 0; a < 2; ++a) {
        j.grad[a] = (m.u(x + e[a]) - m.u(x - e[a])) / (2 * h);
        for (int b = 0; b < 2; ++b) {
            j.hess(a, b) = (m.u(x + e[a] + e[b]) - m.u(x + e[a] - e[b]) - m.u(x - e[a] + e[b]) + m.u(x - e[a] - e[b])) /
                           (4 * h * h);
        }
    }
    return j;
}

// Richardson step removes the h^2 term
PhysicalJet fd_jet(const ManufacturedSolution& m, const Eigen::Vector2d& x, double h)
{
    const PhysicalJet a = fd_jet_raw(m, x, h);
    const PhysicalJet b = fd_jet_raw(m, x, h / 2);
    PhysicalJet j;
    j.value = a.value;
    j.grad = (4 * b.grad - a.grad) / 3;
    j.hess = (4 * b.hess - a.hess) / 3;
    return j;
}

const char* kFormulas[][2] = {
    {"onepatch", "cos(4*x1-2)*sin(4*x2-2/3)"},
    {"ua", "-4*cos(2*x1/3)*sin(2*x2/3)"},
    {"ub", "-4*cos(x1/2)*sin((x2-2)/2)"},
    {"uc", "-4*cos((x1+3)/2)*sin((x2-1)/2)"},
    {"ud", "-4*cos(x1/3)*sin(x2/3)"},
};

}  // namespace

TEST(Catalog, LaplacianMatchesFiniteDifferences)
{
    for (const auto& name : catalog_names()) {
        const ManufacturedSolution m = catalog(name);
        for (const auto& x : random_points(50, 7, -3.0, 3.0)) {
            const PhysicalJet j = m.jet(x);
            const PhysicalJet fd = fd_jet(m, x, 1e-3);
            EXPECT_NEAR(j.laplacian(), fd.hess.trace(), 1e-6) << name;
            EXPECT_NEAR((j.grad - fd.grad).norm(), 0.0, 1e-6) << name;
        }
    }
}

TEST(Catalog, AgreesWithDifferentiatedFormula)
{
    for (const auto& [name, formula] : kFormulas) {
        const ManufacturedSolution hand = catalog(name);
        const ManufacturedSolution ad = expression_solution(formula);
        for (const auto& x : random_points(50, 11, -4.0, 4.0)) {
            const PhysicalJet a = hand.jet(x);
            const PhysicalJet b = ad.jet(x);
            EXPECT_NEAR(a.value, b.value, 1e-13) << name;
            EXPECT_NEAR((a.grad - b.grad).norm(), 0.0, 1e-12) << name;
            EXPECT_NEAR((a.hess - b.hess).norm(), 0.0, 1e-12) << name;
        }
    }
}

TEST(Catalog, OnePatchLaplacianIsMinus32U)
{
    const ManufacturedSolution m = catalog("onepatch");
    for (const auto& x : random_points(20, 3, 0.0, 1.0)) {
        EXPECT_NEAR(m.f(x), -32.0 * m.u(x), 1e-12);
    }
}

TEST(Catalog, DataAndLookup)
{
    const ManufacturedSolution ua = catalog("ua");
    EXPECT_EQ(ua.u(Eigen::Vector2d(0, 0)), 0.0);
    const Eigen::Vector2d x(0.3, 1.7);
    EXPECT_EQ(ua.boundaryData()(x), ua.u(x));
    EXPECT_NEAR(ua.interiorData()(x), -(8.0 / 9.0) * ua.u(x), 1e-14);
    EXPECT_THROW(catalog("ue"), ParameterError);
    EXPECT_EQ(resolve_solution("ub").name, "ub");
    EXPECT_EQ(resolve_solution("x1^2").name, "x1^2");
    EXPECT_THROW(resolve_solution("sinh(x1)"), ParameterError);
}

TEST(Expression, PrecedenceAndAssociativity)
{
    EXPECT_DOUBLE_EQ(Expression("2^3^2").eval(0, 0).v, 512.0);
    EXPECT_DOUBLE_EQ(Expression("-x1^2").eval(3, 0).v, -9.0);
    EXPECT_DOUBLE_EQ(Expression("1-2-3").eval(0, 0).v, -4.0);
    EXPECT_DOUBLE_EQ(Expression("8/4/2").eval(0, 0).v, 1.0);
    EXPECT_DOUBLE_EQ(Expression("2*(x1+x2)*3").eval(1, 2).v, 18.0);
    EXPECT_DOUBLE_EQ(Expression("1.5e1 + .5").eval(0, 0).v, 15.5);
    EXPECT_NEAR(Expression("cos(pi)").eval(0, 0).v, -1.0, 1e-15);
}

TEST(Expression, PolynomialDerivativesExact)
{
    // u = x1^3 x2 + x2^2 / 2
    const Dual2 d = Expression("x1^3*x2 + x2^2/2").eval(2.0, 3.0);
    EXPECT_DOUBLE_EQ(d.v, 24.0 + 4.5);
    EXPECT_DOUBLE_EQ(d.d1, 3 * 4.0 * 3.0);
    EXPECT_DOUBLE_EQ(d.d2, 8.0 + 3.0);
    EXPECT_DOUBLE_EQ(d.h11, 6 * 2.0 * 3.0);
    EXPECT_DOUBLE_EQ(d.h12, 3 * 4.0);
    EXPECT_DOUBLE_EQ(d.h22, 1.0);
}

TEST(Expression, TranscendentalDerivatives)
{
    const std::string f = "exp(x1*x2)/(1+x1^2) + sqrt(2+x2)*log(3+x1) + x1^x2";
    const ManufacturedSolution m = expression_solution(f);
    for (const auto& x : random_points(30, 5, 0.2, 1.5)) {
        const PhysicalJet j = m.jet(x);
        const PhysicalJet fd = fd_jet(m, x, 1e-3);
        EXPECT_NEAR((j.grad - fd.grad).norm(), 0.0, 1e-7);
        EXPECT_NEAR((j.hess - fd.hess).norm(), 0.0, 1e-6);
    }
}

TEST(Expression, Errors)
{
    EXPECT_THROW(Expression("x1 +"), ExpressionError);
    EXPECT_THROW(Expression("(x1"), ExpressionError);
    EXPECT_THROW(Expression("foo(x1)"), ExpressionError);
    EXPECT_THROW(Expression("x3"), ExpressionError);
    EXPECT_THROW(Expression("x1 x2"), ExpressionError);
    EXPECT_THROW(Expression("1/x1").eval(0, 0), ExpressionError);
    EXPECT_THROW(Expression("log(x1)").eval(-1, 0), ExpressionError);
}

TEST(Quadrature, ExactUpToDegree2qMinus1)
{
    for (int q = 1; q <= 10; ++q) {
        const QuadratureRule rule = gauss_legendre(q);
        EXPECT_NEAR(rule.weights.sum(), 1.0, 1e-14);
        for (int deg = 0; deg <= 2 * q; ++deg) {
            double s = 0.0;
            for (int i = 0; i < q; ++i) {
                s += rule.weights[i] * std::pow(rule.nodes[i], deg);
            }
            const double exact = 1.0 / (deg + 1);
            if (deg <= 2 * q - 1) {
                EXPECT_NEAR(s, exact, 1e-13) << "q=" << q << " deg=" << deg;
            } else {
                EXPECT_GT(std::abs(s - exact), 1e-13) << "q=" << q;
            }
        }
    }
    EXPECT_THROW(gauss_legendre(0), ParameterError);
}

TEST(Rates, RecoverExponent)
{
    const double s = 4.73;
    std::vector<double> h, e;
    for (int k : {4, 9, 19, 39}) {
        h.push_back(1.0 / (k + 1));
        e.push_back(2.5 * std::pow(h.back(), s));
    }
    EXPECT_NEAR(pairwise_rate(h[0], e[0], h[1], e[1]), s, 1e-12);
    EXPECT_NEAR(fitted_rate(h, e), s, 1e-12);
    EXPECT_THROW(fitted_rate({0.1}, {0.2}), ParameterError);
}

namespace {

Solution solve_for(const C2Space& space, const ManufacturedSolution& m, Strategy s)
{
    const auto pts = assemble_global(space.domain(), space.degree(), space.regularity(), space.innerKnots(), s);
    return solve_two_stage(space, assemble(space, pts, m.interiorData(), m.boundaryData()));
}

}  // namespace

TEST(ErrorNorms, ConstantIsReproduced)
{
    const C2Space space(builtin_domain("pinwheel-3"), 5, 2, 4);
    const ManufacturedSolution one = expression_solution("1");
    const ErrorNorms n = error_norms(solve_for(space, one, Strategy::Greville), one, 7);
    EXPECT_LE(n.relL2, 1e-12);
    EXPECT_LE(n.relH1, 1e-12);
    EXPECT_LE(n.relH2, 1e-12);
    EXPECT_NEAR(n.exact[0], std::sqrt(6 * std::sin(M_PI / 3)), 1e-12);  // area of three kites
}

TEST(ErrorNorms, ZeroIffErrorVanishes)
{
    const C2Space space(builtin_domain("unit-square"), 5, 2, 4);
    const ManufacturedSolution zero = expression_solution("0");
    Solution sol{&space, Eigen::VectorXd::Zero(space.dim())};
    ErrorNorms n = error_norms(sol, zero, 7);
    EXPECT_EQ(n.relL2, 0.0);
    EXPECT_EQ(n.relH2, 0.0);
    sol.coef[space.dim() / 2] = 1e-3;
    n = error_norms(sol, zero, 7);
    EXPECT_GT(n.relL2, 0.0);
    EXPECT_GT(n.relH1, 0.0);
    EXPECT_GT(n.relH2, 0.0);
}

TEST(ErrorNorms, QuadratureConverged)
{
    const C2Space space(builtin_domain("appendix-three-patch"), 6, 2, 3);
    const ManufacturedSolution ua = catalog("ua");
    const Solution sol = solve_for(space, ua, Strategy::Greville);
    const ErrorNorms a = error_norms(sol, ua, 8);
    const ErrorNorms b = error_norms(sol, ua, 16);
    EXPECT_LT(std::abs(a.relL2 - b.relL2), 1e-3 * b.relL2);
    EXPECT_LT(std::abs(a.relH1 - b.relH1), 1e-3 * b.relH1);
    EXPECT_LT(std::abs(a.relH2 - b.relH2), 1e-3 * b.relH2);
    EXPECT_THROW(error_norms(sol, ua, 0), ParameterError);
}

TEST(Study, OnePatchGrevilleRateFour)
{
    const ErrorReport rep = convergence_study(builtin_domain("unit-square"), 5, 2, Strategy::Greville, {4, 9},
                                              catalog("onepatch"));
    ASSERT_EQ(rep.levels.size(), 2u);
    EXPECT_TRUE(std::isnan(rep.levels[0].rate[0]));
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(rep.levels[1].rate[i], 4.0, 0.3);
    }
    EXPECT_EQ(rep.levels[0].ndof, 324);
    EXPECT_EQ(rep.levels[1].h, 0.1);
}

TEST(Study, ErrorsDecreaseMonotonically)
{
    const ErrorReport rep = convergence_study(builtin_domain("pinwheel-3"), 6, 2, Strategy::ClusteredSuperconvergent,
                                              {2, 3, 5}, catalog("onepatch"));
    for (std::size_t i = 1; i < rep.levels.size(); ++i) {
        EXPECT_LT(rep.levels[i].norms.relL2, rep.levels[i - 1].norms.relL2);
        EXPECT_LT(rep.levels[i].norms.relH1, rep.levels[i - 1].norms.relH1);
        EXPECT_LT(rep.levels[i].norms.relH2, rep.levels[i - 1].norms.relH2);
    }
}

TEST(Study, RejectsInvalidLevels)
{
    const auto dom = builtin_domain("unit-square");
    const auto u = catalog("onepatch");
    EXPECT_THROW(convergence_study(dom, 5, 2, Strategy::Greville, {3, 4}, u), ParameterError);
    EXPECT_THROW(convergence_study(dom, 6, 2, Strategy::ClusteredSuperconvergent, {1}, u), ParameterError);
    EXPECT_THROW(convergence_study(dom, 4, 2, Strategy::Greville, {4}, u), ParameterError);
    EXPECT_THROW(convergence_study(dom, 5, 2, Strategy::Greville, {}, u), ParameterError);
}

TEST(Report, CsvLayoutAndDeterminism)
{
    auto run = [] {
        const ErrorReport rep = convergence_study(builtin_domain("two-patch-strip"), 6, 3, Strategy::Greville, {3, 4},
                                                  catalog("onepatch"));
        std::ostringstream os;
        write_report_csv(os, {rep});
        return os.str();
    };
    const std::string a = run();
    EXPECT_EQ(a, run());
    std::istringstream in(a);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, kReportHeader);
    std::getline(in, line);
    EXPECT_EQ(line.substr(0, 30), "two-patch-strip,6,3,greville,3");
    EXPECT_EQ(line.substr(line.size() - 3), ",,,");
    std::getline(in, line);
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 13);
    EXPECT_NE(line.back(), ',');
    EXPECT_FALSE(std::getline(in, line));
}
