#include "mpcolloc/multipatch.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace mpcolloc;

namespace {

Patch square(double x0, double y0, double x1, double y1)
{
    return Patch::bilinear({Eigen::Vector2d(x0, y0), Eigen::Vector2d(x1, y0), Eigen::Vector2d(x0, y1), Eigen::Vector2d(x1, y1)});
}

Patch transformed(const Patch& p, const Eigen::Matrix2d& A, const Eigen::Vector2d& b)
{
    std::array<Eigen::Vector2d, 4> c;
    for (int i = 0; i < 4; ++i) {
        c[i] = A * p.corner(i) + b;
    }
    return Patch::bilinear(c);
}

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b)
{
    return a.x() * b.y() - a.y() * b.x();
}

}  // namespace

TEST(Orientation, InverseAndCompose)
{
    const Eigen::Vector2d xi(0.2, 0.7);
    for (const Orientation& o : Orientation::all()) {
        EXPECT_LE((o.inverse().apply(o.apply(xi)) - xi).norm(), 1e-15);
        for (const Orientation& q : Orientation::all()) {
            const Orientation c = Orientation::compose(o, q);
            EXPECT_LE((c.apply(xi) - q.apply(o.apply(xi))).norm(), 1e-15);
        }
    }
}

TEST(Orientation, DerivativeRule)
{
    // h(xi) = g(apply(xi)) with g(eta) = eta1^3 eta2^2
    auto g_der = [](const Eigen::Vector2d& e, int a, int b) {
        auto mono = [](double x, int deg, int d) {
            double c = 1.0;
            for (int i = 0; i < d; ++i) {
                c *= deg - i;
            }
            return d > deg ? 0.0 : c * std::pow(x, deg - d);
        };
        return mono(e.x(), 3, a) * mono(e.y(), 2, b);
    };
    const Eigen::Vector2d xi(0.3, 0.6);
    const double step = 1e-5;
    for (const Orientation& o : Orientation::all()) {
        auto h = [&](const Eigen::Vector2d& x) { return g_der(o.apply(x), 0, 0); };
        for (int dir = 0; dir < 2; ++dir) {
            Eigen::Vector2d s = Eigen::Vector2d::Zero();
            s[dir] = step;
            const double fd = (h(xi + s) - h(xi - s)) / (2 * step);
            const auto e = o.orientedOrders(dir == 0, dir == 1);
            const double exact = o.derivativeSign(dir == 0, dir == 1) * g_der(o.apply(xi), e[0], e[1]);
            EXPECT_NEAR(fd, exact, 1e-8);
        }
    }
}

TEST(Patch, BilinearDerivatives)
{
    const Patch p = Patch::bilinear({Eigen::Vector2d(0, 0), Eigen::Vector2d(2, 0), Eigen::Vector2d(0, 1), Eigen::Vector2d(3, 2)});
    const PatchJet j = p.derivatives(Eigen::Vector2d(0.4, 0.3), 2);
    EXPECT_LE((j(1, 1) - Eigen::Vector2d(1, 1)).norm(), 1e-15);
    EXPECT_LE(j(2, 0).norm(), 0.0);
    EXPECT_LE(j(0, 2).norm(), 0.0);
    const double step = 1e-6;
    const Eigen::Vector2d fd1 = (p.eval({0.4 + step, 0.3}) - p.eval({0.4 - step, 0.3})) / (2 * step);
    const Eigen::Vector2d fd2 = (p.eval({0.4, 0.3 + step}) - p.eval({0.4, 0.3 - step})) / (2 * step);
    EXPECT_LE((j(1, 0) - fd1).norm(), 1e-8);
    EXPECT_LE((j(0, 1) - fd2).norm(), 1e-8);
    EXPECT_LE((p.eval({1, 1}) - Eigen::Vector2d(3, 2)).norm(), 0.0);
}

TEST(Patch, SplineDerivativesMatchFiniteDifferences)
{
    const MultiPatchDomain d = builtin_domain("appendix-three-patch");
    const double step = 1e-5;
    const Eigen::Vector2d xi(0.37, 0.61);  // away from knots 1/4, 1/2, 3/4
    for (const Patch& p : d.patches()) {
        ASSERT_FALSE(p.isBilinear());
        const PatchJet j = p.derivatives(xi, 4);
        for (int a = 0; a <= 3; ++a) {
            for (int b = 0; a + b <= 3; ++b) {
                const Eigen::Vector2d fd = (p.derivatives(xi + Eigen::Vector2d(step, 0), 4)(a, b) -
                                            p.derivatives(xi - Eigen::Vector2d(step, 0), 4)(a, b)) /
                                           (2 * step);
                EXPECT_LE((j(a + 1, b) - fd).norm(), 1e-6 * std::max(1.0, j(a + 1, b).norm()));
            }
        }
    }
}

TEST(Patch, InvertRoundTrip)
{
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Patch> patches = {
        Patch::bilinear({Eigen::Vector2d(0, 0), Eigen::Vector2d(2, 0), Eigen::Vector2d(0, 1), Eigen::Vector2d(3, 2)}),
        square(-1, 0, 0, 1),
    };
    for (const Patch& p : builtin_domain("appendix-three-patch").patches()) {
        patches.push_back(p);
    }
    for (const Patch& p : builtin_domain("pinwheel-5").patches()) {
        patches.push_back(p);
    }
    for (const Patch& p : patches) {
        for (int i = 0; i < 25; ++i) {
            const Eigen::Vector2d xi(u(rng), u(rng));
            const auto back = p.invert(p.eval(xi));
            ASSERT_TRUE(back.has_value());
            EXPECT_LE((*back - xi).norm(), 1e-9);
        }
        for (int c = 0; c < 4; ++c) {
            const auto back = p.invert(p.corner(c));
            ASSERT_TRUE(back.has_value());
            EXPECT_LE((*back - Eigen::Vector2d(c & 1, c >> 1)).norm(), 1e-9);
        }
    }
    EXPECT_FALSE(square(0, 0, 1, 1).invert(Eigen::Vector2d(1.5, 0.5)).has_value());
}

TEST(Jet, ComposeIdentityAndScaling)
{
    Jet f;
    f.coeff(0, 0) = 1.5;
    f.coeff(2, 1) = -2.0;
    f.coeff(1, 3) = 0.25;
    f.coeff(4, 0) = 3.0;
    const JetMap id{{Jet::variable(0), Jet::variable(1)}};
    EXPECT_LE((compose(f, id) - f).maxAbs(), 0.0);

    const JetMap diag{{2.0 * Jet::variable(0), 3.0 * Jet::variable(1)}};
    const Jet g = compose(f, diag);
    EXPECT_DOUBLE_EQ(g.coeff(2, 1), -2.0 * 4 * 3);
    EXPECT_DOUBLE_EQ(g.coeff(1, 3), 0.25 * 2 * 27);
    EXPECT_DOUBLE_EQ(g.coeff(4, 0), 3.0 * 16);
}

TEST(Jet, ComposeNonlinear)
{
    // x1 x2 with x1 = t1 + t2^2, x2 = t2 - t1 t2 gives t1 t2 + t2^3 - t1^2 t2 - t1 t2^3
    Jet f;
    f.coeff(1, 1) = 1.0;
    Jet x1 = Jet::variable(0);
    x1.coeff(0, 2) = 1.0;
    Jet x2 = Jet::variable(1);
    x2.coeff(1, 1) = -1.0;
    const Jet g = compose(f, JetMap{{x1, x2}});
    Jet expected;
    expected.coeff(1, 1) = 1.0;
    expected.coeff(0, 3) = 1.0;
    expected.coeff(2, 1) = -1.0;
    expected.coeff(1, 3) = -1.0;
    EXPECT_LE((g - expected).maxAbs(), 1e-15);
}

TEST(Jet, InverseSeries)
{
    Jet x1 = 2.0 * Jet::variable(0) + 0.5 * Jet::variable(1);
    x1.coeff(2, 0) = 0.3;
    x1.coeff(1, 2) = -0.7;
    Jet x2 = -1.0 * Jet::variable(0) + 1.5 * Jet::variable(1);
    x2.coeff(0, 2) = 0.2;
    x2.coeff(3, 1) = 0.9;
    const JetMap m{{x1, x2}};
    const JetMap h = invert(m);
    for (int c = 0; c < 2; ++c) {
        const Jet back = compose(m.comp[c], h);
        EXPECT_LE((back - Jet::variable(c)).maxAbs(), 1e-13);
        const Jet fwd = compose(h.comp[c], m);
        EXPECT_LE((fwd - Jet::variable(c)).maxAbs(), 1e-13);
    }
}

TEST(Topology, UnitSquare)
{
    const MultiPatchDomain d = builtin_domain("unit-square");
    EXPECT_EQ(d.numPatches(), 1);
    EXPECT_EQ(d.numInterfaces(), 0);
    EXPECT_EQ(d.numBoundaryEdges(), 4);
    EXPECT_EQ(d.countVertices(VertexClass::Boundary1), 4);
}

TEST(Topology, TwoPatchStrip)
{
    const MultiPatchDomain d = builtin_domain("two-patch-strip");
    EXPECT_EQ(d.numPatches(), 2);
    EXPECT_EQ(d.numInterfaces(), 1);
    EXPECT_EQ(d.numBoundaryEdges(), 6);
    EXPECT_EQ(d.countVertices(VertexClass::Boundary1), 4);
    EXPECT_EQ(d.countVertices(VertexClass::Boundary2), 2);
    EXPECT_EQ(d.countVertices(VertexClass::Inner), 0);
}

TEST(Topology, Pinwheels)
{
    for (int nu = 3; nu <= 7; ++nu) {
        const MultiPatchDomain d = builtin_domain("pinwheel-" + std::to_string(nu));
        EXPECT_EQ(d.numPatches(), nu);
        EXPECT_EQ(d.numInterfaces(), nu);
        EXPECT_EQ(d.numBoundaryEdges(), 2 * nu);
        EXPECT_EQ(d.countVertices(VertexClass::Inner), 1);
        EXPECT_EQ(d.countVertices(VertexClass::Boundary2), nu);
        EXPECT_EQ(d.countVertices(VertexClass::Boundary1), nu);
        EXPECT_EQ(d.countVertices(VertexClass::Boundary3), 0);
        for (const Vertex& v : d.vertices()) {
            if (v.cls == VertexClass::Inner) {
                EXPECT_EQ(v.valency, nu);
                EXPECT_LE(v.point.norm(), 1e-15);
            }
        }
    }
    EXPECT_NO_THROW(builtin_domain("pinwheel(4)"));
    EXPECT_THROW(builtin_domain("pinwheel-2"), ParameterError);
}

TEST(Topology, AppendixThreePatch)
{
    const MultiPatchDomain d = builtin_domain("appendix-three-patch");
    EXPECT_EQ(d.numPatches(), 3);
    EXPECT_EQ(d.numInterfaces(), 3);
    EXPECT_EQ(d.countVertices(VertexClass::Inner), 1);
    for (const Vertex& v : d.vertices()) {
        if (v.cls == VertexClass::Inner) {
            EXPECT_LE((v.point - Eigen::Vector2d(17.0 / 3, 2.0)).norm(), 1e-14);
        }
    }
    for (int e = 0; e < static_cast<int>(d.edges().size()); ++e) {
        if (!d.edge(e).isInterface) {
            continue;
        }
        for (const PatchSide& ps : d.edge(e).sides) {
            const Orientation o = d.edgeFrame(ps, d.edge(e).vertices[0]);
            EXPECT_LE(interface_bilinearity_defect(d.patch(ps.patch), o), 1e-9);
        }
        EXPECT_NO_THROW(d.gluing(e));
    }
}

TEST(Topology, BoundaryThreeVertex)
{
    // L-shape of three squares around (0,0) with a reentrant boundary corner
    std::vector<Patch> p = {square(-1, -1, 0, 0), square(0, -1, 1, 0), square(-1, 0, 0, 1)};
    const MultiPatchDomain d = build_topology(p);
    EXPECT_EQ(d.countVertices(VertexClass::Boundary3), 1);
    for (const Vertex& v : d.vertices()) {
        if (v.cls == VertexClass::Boundary3) {
            EXPECT_EQ(v.valency, 3);
            EXPECT_FALSE(d.edge(v.fan.front().firstEdge).isInterface);
            EXPECT_FALSE(d.edge(v.fan.back().secondEdge).isInterface);
        }
    }
}

TEST(Topology, FanInvariants)
{
    std::vector<MultiPatchDomain> domains = {builtin_domain("pinwheel-3"), builtin_domain("pinwheel-6"),
                                             builtin_domain("appendix-three-patch"), builtin_domain("two-patch-strip"),
                                             build_topology({square(-1, -1, 0, 0), square(0, -1, 1, 0), square(-1, 0, 0, 1)})};
    for (const MultiPatchDomain& d : domains) {
        for (int vi = 0; vi < static_cast<int>(d.vertices().size()); ++vi) {
            const Vertex& v = d.vertex(vi);
            ASSERT_EQ(static_cast<int>(v.fan.size()), v.valency);
            double angleSum = 0.0;
            for (int l = 0; l < v.valency; ++l) {
                const FanPatch& f = v.fan[l];
                const PatchJet j = oriented_derivatives(d.patch(f.patch), f.orient, Eigen::Vector2d(0, 0), 1);
                EXPECT_GT(j.jacobian().determinant(), 0.0);
                EXPECT_LE((j(0, 0) - v.point).norm(), 1e-12);
                angleSum += std::atan2(cross(j(1, 0), j(0, 1)), j(1, 0).dot(j(0, 1)));
                // the first edge runs along eta2 = 0
                const Eigen::Vector2d far = d.patch(f.patch).eval(f.orient.inverse().apply(Eigen::Vector2d(1, 0)));
                const Edge& fe = d.edge(f.firstEdge);
                const int other = fe.vertices[0] == vi ? fe.vertices[1] : fe.vertices[0];
                EXPECT_LE((far - d.vertex(other).point).norm(), 1e-12);
                if (l + 1 < v.valency || v.cls == VertexClass::Inner) {
                    const FanPatch& g = v.fan[(l + 1) % v.valency];
                    EXPECT_EQ(f.secondEdge, g.firstEdge);
                    // in the frame of the shared edge, patch l is the positive side
                    const GluingData gd = d.gluing(f.secondEdge, vi);
                    EXPECT_EQ(gd.side[1].patch, f.patch);
                    EXPECT_EQ(gd.side[0].patch, g.patch);
                    const PatchJet jg = oriented_derivatives(d.patch(g.patch), g.orient, Eigen::Vector2d(0, 0), 1);
                    EXPECT_LE((j(0, 1) - jg(1, 0)).norm(), 1e-12);
                }
            }
            if (v.cls == VertexClass::Inner) {
                EXPECT_NEAR(angleSum, 2 * M_PI, 1e-12);
            } else {
                EXPECT_LT(angleSum, 2 * M_PI);
            }
        }
    }
}

TEST(Gluing, StripInterface)
{
    const MultiPatchDomain d = builtin_domain("two-patch-strip");
    int e = -1;
    for (int i = 0; i < static_cast<int>(d.edges().size()); ++i) {
        if (d.edge(i).isInterface) {
            e = i;
        }
    }
    ASSERT_GE(e, 0);
    const GluingData g = d.gluing(e);
    EXPECT_DOUBLE_EQ(g.c1, 1.0);
    for (int t = 0; t < 2; ++t) {
        EXPECT_DOUBLE_EQ(g.alpha[0][t], -1.0);
        EXPECT_DOUBLE_EQ(g.alpha[1][t], 1.0);
        EXPECT_DOUBLE_EQ(g.beta[0][t], 0.0);
        EXPECT_DOUBLE_EQ(g.beta[1][t], 0.0);
    }
}

TEST(Gluing, ReversedFrameNegatesAlpha)
{
    const MultiPatchDomain d = builtin_domain("pinwheel-5");
    for (int e = 0; e < static_cast<int>(d.edges().size()); ++e) {
        if (!d.edge(e).isInterface) {
            continue;
        }
        const GluingData a = d.gluing(e, d.edge(e).vertices[0]);
        const GluingData b = d.gluing(e, d.edge(e).vertices[1]);
        EXPECT_EQ(a.side[0].patch, b.side[1].patch);
        EXPECT_NEAR(a.c1, b.c1, 1e-14);
        for (int tau = 0; tau < 2; ++tau) {
            for (int t = 0; t < 2; ++t) {
                EXPECT_NEAR(a.alpha[tau][t], -b.alpha[1 - tau][1 - t], 1e-13);
            }
        }
    }
}

TEST(Gluing, OptimalityAndInvariance)
{
    const MultiPatchDomain d = builtin_domain("pinwheel-4");
    const double angle = 0.7;
    const double scale = 2.5;
    Eigen::Matrix2d R;
    R << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    std::vector<Patch> moved;
    for (const Patch& p : d.patches()) {
        moved.push_back(transformed(p, scale * R, Eigen::Vector2d(3, -1)));
    }
    const MultiPatchDomain m = build_topology(moved);
    for (int e = 0; e < static_cast<int>(d.edges().size()); ++e) {
        if (!d.edge(e).isInterface) {
            continue;
        }
        const GluingData g = d.gluing(e);
        const GluingData h = m.gluing(e);
        EXPECT_NEAR(h.c1 * scale * scale, g.c1, 1e-12);
        for (int tau = 0; tau < 2; ++tau) {
            for (int t = 0; t < 2; ++t) {
                EXPECT_NEAR(h.alpha[tau][t], g.alpha[tau][t], 1e-12);
                EXPECT_NEAR(h.beta[tau][t], g.beta[tau][t], 1e-12);
            }
        }
        // c1 minimizes the functional; check by perturbation with Simpson's rule
        auto functional = [&](double c) {
            auto f = [&](double t) {
                const double a0 = c * g.alphaAt(0, t) / g.c1;
                const double a1 = c * g.alphaAt(1, t) / g.c1;
                return (a0 + 1) * (a0 + 1) + (a1 - 1) * (a1 - 1);
            };
            return (f(0) + 4 * f(0.5) + f(1)) / 6;
        };
        EXPECT_LT(functional(g.c1), functional(g.c1 * 1.01));
        EXPECT_LT(functional(g.c1), functional(g.c1 * 0.99));
        // G1 condition: alpha_1 d1F^0 - alpha_0 d1F^1 + beta d2F = 0 with beta = alpha_0 beta_1 - alpha_1 beta_0
        for (double t : {0.0, 0.3, 1.0}) {
            const PatchJet j0 = oriented_derivatives(d.patch(g.side[0].patch), g.side[0].orient, Eigen::Vector2d(0, t), 1);
            const PatchJet j1 = oriented_derivatives(d.patch(g.side[1].patch), g.side[1].orient, Eigen::Vector2d(0, t), 1);
            const double a0 = g.alphaAt(0, t);
            const double a1 = g.alphaAt(1, t);
            const double b = a0 * g.betaAt(1, t) - a1 * g.betaAt(0, t);
            EXPECT_LE((a1 * j0(1, 0) - a0 * j1(1, 0) + b * j0(0, 1)).norm(), 1e-12);
        }
    }
}

TEST(Topology, RejectsTJunction)
{
    std::vector<Patch> p = {square(0, 0, 2, 1), square(0, 1, 1, 2), square(1, 1, 2, 2)};
    EXPECT_THROW(build_topology(p), TopologyError);
}

TEST(Topology, RejectsIrregularPatch)
{
    std::vector<Patch> p = {Patch::bilinear({Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1), Eigen::Vector2d(0, 1)})};
    EXPECT_THROW(build_topology(p), TopologyError);
}

TEST(Topology, RejectsDisconnected)
{
    EXPECT_THROW(build_topology({square(0, 0, 1, 1), square(2, 0, 3, 1)}), TopologyError);
    // touching in a single corner
    EXPECT_THROW(build_topology({square(0, 0, 1, 1), square(1, 1, 2, 2)}), TopologyError);
}

TEST(Topology, RejectsOverlappingEdge)
{
    EXPECT_THROW(build_topology({square(0, 0, 1, 1), square(1, 0, 2, 1), square(1, 0, 2, 1)}), TopologyError);
}

TEST(DomainJson, RoundTrip)
{
    const MultiPatchDomain d = builtin_domain("appendix-three-patch");
    const MultiPatchDomain e = parse_domain_json(domain_to_json(d));
    ASSERT_EQ(e.numPatches(), 3);
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(e.patch(i).controlPoints(), d.patch(i).controlPoints());
    }
    const MultiPatchDomain s = parse_domain_json(R"({"name":"sq","patches":[{"corners":[[0,0],[1,0],[0,1],[1,1]]}]})");
    EXPECT_EQ(s.name(), "sq");
    EXPECT_THROW(parse_domain_json(R"({"patches":[{"corners":[[0,0],[1,0]]}]})"), ParameterError);
    EXPECT_THROW(parse_domain_json("not json"), ParameterError);
    EXPECT_THROW(load_domain("/nonexistent/domain.json"), IoError);
}
