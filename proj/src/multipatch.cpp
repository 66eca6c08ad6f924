#include "mpcolloc/multipatch.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace mpcolloc {

namespace {

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b)
{
    return a.x() * b.y() - a.y() * b.x();
}

Eigen::Vector2d corner_param(int c)
{
    return Eigen::Vector2d(c & 1, (c >> 1) & 1);
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); }
    void join(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

Orientation Orientation::compose(const Orientation& first, const Orientation& then)
{
    const Eigen::Vector2d probes[3] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    for (const Orientation& o : all()) {
        bool match = true;
        for (const auto& p : probes) {
            if ((o.apply(p) - then.apply(first.apply(p))).norm() > 0.5) {
                match = false;
                break;
            }
        }
        if (match) {
            return o;
        }
    }
    throw std::logic_error("orientation composition failed");
}

std::array<Orientation, 8> Orientation::all()
{
    std::array<Orientation, 8> out;
    for (int m = 0; m < 8; ++m) {
        out[m] = Orientation{(m & 4) != 0, (m & 1) != 0, (m & 2) != 0};
    }
    return out;
}

Patch Patch::bilinear(const std::array<Eigen::Vector2d, 4>& corners)
{
    Patch p;
    p.corners_ = corners;
    return p;
}

Patch Patch::spline(const SplineSpace1D& space, std::vector<Eigen::Vector2d> points)
{
    const int n = space.dim();
    if (static_cast<int>(points.size()) != n * n) {
        throw ParameterError("control net needs n^2 = " + std::to_string(n * n) + " points, got " +
                             std::to_string(points.size()));
    }
    Patch p;
    p.space_ = space;
    p.control_ = std::move(points);
    p.corners_ = {p.control_[0], p.control_[(n - 1) * n], p.control_[n - 1], p.control_[n * n - 1]};
    return p;
}

Eigen::Vector2d Patch::eval(const Eigen::Vector2d& xi) const
{
    return derivatives(xi, 0)(0, 0);
}

PatchJet Patch::derivatives(const Eigen::Vector2d& xi, int maxOrder) const
{
    PatchJet out;
    for (auto& row : out.d) {
        for (auto& v : row) {
            v.setZero();
        }
    }
    if (!(xi.x() >= 0.0 && xi.x() <= 1.0 && xi.y() >= 0.0 && xi.y() <= 1.0)) {
        throw DomainError("patch parameter outside [0,1]^2");
    }
    if (isBilinear()) {
        const double u = xi.x();
        const double v = xi.y();
        const auto& c = corners_;
        out(0, 0) = (1 - u) * (1 - v) * c[0] + u * (1 - v) * c[1] + (1 - u) * v * c[2] + u * v * c[3];
        if (maxOrder >= 1) {
            out(1, 0) = (1 - v) * (c[1] - c[0]) + v * (c[3] - c[2]);
            out(0, 1) = (1 - u) * (c[2] - c[0]) + u * (c[3] - c[1]);
        }
        if (maxOrder >= 2) {
            out(1, 1) = c[3] - c[2] - c[1] + c[0];
        }
        return out;
    }
    const SplineSpace1D& s = *space_;
    const int n = s.dim();
    const LocalBasis b1 = s.evalLocal(xi.x(), maxOrder);
    const LocalBasis b2 = s.evalLocal(xi.y(), maxOrder);
    const int w = s.degree() + 1;
    for (int a = 0; a <= maxOrder; ++a) {
        for (int b = 0; a + b <= maxOrder; ++b) {
            Eigen::Vector2d acc = Eigen::Vector2d::Zero();
            for (int l1 = 0; l1 < w; ++l1) {
                const double v1 = b1.ders(a, l1);
                if (v1 == 0.0) {
                    continue;
                }
                for (int l2 = 0; l2 < w; ++l2) {
                    acc += v1 * b2.ders(b, l2) * control_[(b1.first + l1) * n + b2.first + l2];
                }
            }
            out(a, b) = acc;
        }
    }
    return out;
}

std::vector<double> Patch::breakpoints() const
{
    if (isBilinear()) {
        return {0.0, 1.0};
    }
    std::vector<double> out;
    for (int j = 0; j <= space_->innerKnots() + 1; ++j) {
        out.push_back(space_->breakpoint(j));
    }
    return out;
}

std::optional<Eigen::Vector2d> Patch::invert(const Eigen::Vector2d& x, double tol) const
{
    const double scale = std::max({(corners_[1] - corners_[0]).norm(), (corners_[2] - corners_[0]).norm(),
                                   (corners_[3] - corners_[0]).norm(), 1e-300});
    const double slack = 1e-9;
    auto newton = [&](Eigen::Vector2d xi) -> std::optional<Eigen::Vector2d> {
        if (!xi.allFinite()) {
            return std::nullopt;
        }
        for (int it = 0; it < 50; ++it) {
            Eigen::Vector2d c = xi.cwiseMax(0.0).cwiseMin(1.0);
            const PatchJet j = derivatives(c, 1);
            const Eigen::Vector2d res = j(0, 0) + j.jacobian() * (xi - c) - x;
            const Eigen::Vector2d step = j.jacobian().partialPivLu().solve(res);
            xi -= step;
            if (!xi.allFinite() || xi.cwiseAbs().maxCoeff() > 10.0) {
                return std::nullopt;
            }
            if (step.norm() <= tol) {
                return xi;
            }
        }
        return std::nullopt;
    };

    std::optional<Eigen::Vector2d> found;
    if (isBilinear()) {
        // x - c0 = u e1 + v e2 + u v e3, eliminate u and solve the quadratic in v.
        const Eigen::Vector2d q = x - corners_[0];
        const Eigen::Vector2d e1 = corners_[1] - corners_[0];
        const Eigen::Vector2d e2 = corners_[2] - corners_[0];
        const Eigen::Vector2d e3 = corners_[3] - corners_[2] - corners_[1] + corners_[0];
        const double A = -cross2(e2, e3);
        const double B = cross2(q, e3) - cross2(e2, e1);
        const double C = cross2(q, e1);
        std::vector<double> roots;
        if (std::abs(A) <= 1e-14 * scale * scale) {
            roots.push_back(-C / B);
        } else {
            const double disc = B * B - 4 * A * C;
            if (disc >= -1e-14 * B * B) {
                const double sq = std::sqrt(std::max(disc, 0.0));
                const double qq = -0.5 * (B + std::copysign(sq, B));
                if (qq != 0.0) {
                    roots.push_back(C / qq);
                }
                roots.push_back(qq / A);
            }
        }
        for (double v : roots) {
            if (!(v >= -0.1 && v <= 1.1)) {
                continue;
            }
            const Eigen::Vector2d den = e1 + v * e3;
            const Eigen::Vector2d num = q - v * e2;
            const double u = den.dot(num) / den.squaredNorm();
            auto polished = newton(Eigen::Vector2d(u, v));
            if (polished && polished->minCoeff() >= -slack && polished->maxCoeff() <= 1 + slack) {
                found = polished;
                break;
            }
        }
    }
    if (!found) {
        for (int s = 0; s < 9 && !found; ++s) {
            found = newton(Eigen::Vector2d(0.5 + 0.3 * (s % 3 - 1), 0.5 + 0.3 * (s / 3 - 1)));
            if (found && (found->minCoeff() < -slack || found->maxCoeff() > 1 + slack)) {
                found.reset();
            }
        }
    }
    if (!found || found->minCoeff() < -slack || found->maxCoeff() > 1 + slack) {
        return std::nullopt;
    }
    return found->cwiseMax(0.0).cwiseMin(1.0).eval();
}

PatchJet oriented_derivatives(const Patch& patch, const Orientation& orient, const Eigen::Vector2d& eta, int maxOrder)
{
    const Orientation inv = orient.inverse();
    const PatchJet native = patch.derivatives(inv.apply(eta), maxOrder);
    PatchJet out;
    for (int a = 0; a <= kJetOrder; ++a) {
        for (int b = 0; a + b <= kJetOrder; ++b) {
            if (a + b > maxOrder) {
                out(a, b).setZero();
                continue;
            }
            const auto e = inv.orientedOrders(a, b);
            out(a, b) = inv.derivativeSign(a, b) * native(e[0], e[1]);
        }
    }
    return out;
}

JetMap patch_jet_map(const Patch& patch, const Orientation& orient, const Eigen::Vector2d& eta)
{
    const PatchJet j = oriented_derivatives(patch, orient, eta, kJetOrder);
    JetMap m;
    for (int c = 0; c < 2; ++c) {
        m.comp[c] = Jet::fromDerivatives([&](int a, int b) { return (a + b == 0) ? 0.0 : j(a, b)[c]; });
    }
    return m;
}

std::array<int, 2> side_corners(int side)
{
    switch (side) {
    case 0:
        return {0, 2};
    case 1:
        return {1, 3};
    case 2:
        return {0, 1};
    case 3:
        return {2, 3};
    default:
        throw std::out_of_range("patch side index must be 0..3");
    }
}

const char* to_string(VertexClass c)
{
    switch (c) {
    case VertexClass::Inner:
        return "inner";
    case VertexClass::Boundary1:
        return "boundary-1";
    case VertexClass::Boundary2:
        return "boundary-2";
    case VertexClass::Boundary3:
        return "boundary-3";
    }
    return "?";
}

int MultiPatchDomain::numInterfaces() const
{
    return static_cast<int>(std::count_if(edges_.begin(), edges_.end(), [](const Edge& e) { return e.isInterface; }));
}

int MultiPatchDomain::numBoundaryEdges() const
{
    return static_cast<int>(edges_.size()) - numInterfaces();
}

int MultiPatchDomain::countVertices(VertexClass c) const
{
    return static_cast<int>(
        std::count_if(vertices_.begin(), vertices_.end(), [c](const Vertex& v) { return v.cls == c; }));
}

Orientation MultiPatchDomain::edgeFrame(const PatchSide& ps, int v) const
{
    const auto ends = side_corners(ps.side);
    int startCorner = -1;
    for (int c : ends) {
        if (cornerVertex_[ps.patch][c] == v) {
            startCorner = c;
        }
    }
    if (startCorner < 0) {
        throw std::logic_error("vertex is not an end of the patch side");
    }
    Orientation o;
    o.swap = ps.side >= 2;
    o.flip1 = (ps.side % 2) == 1;
    // The running coordinate along the side must start at the chosen corner.
    const Eigen::Vector2d eta = o.apply(corner_param(startCorner));
    o.flip2 = eta.y() > 0.5;
    return o;
}

GluingData gluing_data(const Patch& a, const EdgeSide& sa, const Patch& b, const EdgeSide& sb)
{
    struct Samples {
        std::array<double, 3> det;
        std::array<double, 3> beta;
    };
    auto sample = [](const Patch& p, const Orientation& o) {
        Samples s{};
        const double ts[3] = {0.0, 0.5, 1.0};
        for (int i = 0; i < 3; ++i) {
            const PatchJet j = oriented_derivatives(p, o, Eigen::Vector2d(0.0, ts[i]), 1);
            const Eigen::Vector2d d1 = j(1, 0);
            const Eigen::Vector2d d2 = j(0, 1);
            s.det[i] = cross2(d1, d2);
            if (d2.squaredNorm() == 0.0) {
                throw TopologyError("degenerate Jacobian on interface");
            }
            s.beta[i] = d1.dot(d2) / d2.squaredNorm();
        }
        const double dscale = std::max(std::abs(s.det[0]), std::abs(s.det[2]));
        if (std::abs(s.det[1] - 0.5 * (s.det[0] + s.det[2])) > 1e-10 * std::max(dscale, 1e-300) ||
            std::abs(s.beta[1] - 0.5 * (s.beta[0] + s.beta[2])) > 1e-10 * std::max(1.0, std::abs(s.beta[0]) + std::abs(s.beta[2]))) {
            throw TopologyError("gluing data is not linear along the interface; the geometry is not bilinear there");
        }
        return s;
    };
    const Samples s0 = sample(a, sa.orient);
    const Samples s1 = sample(b, sb.orient);

    auto negative = [](const Samples& s) { return s.det[0] < 0 && s.det[1] < 0 && s.det[2] < 0; };
    auto positive = [](const Samples& s) { return s.det[0] > 0 && s.det[1] > 0 && s.det[2] > 0; };

    GluingData g;
    const Samples* lo = nullptr;
    const Samples* hi = nullptr;
    if (negative(s0) && positive(s1)) {
        g.side = {sa, sb};
        lo = &s0;
        hi = &s1;
    } else if (negative(s1) && positive(s0)) {
        g.side = {sb, sa};
        lo = &s1;
        hi = &s0;
    } else {
        throw TopologyError("interface sides do not have opposite orientation; a patch is not regular");
    }
    // c1 minimizes ||c d0 + 1||^2 + ||c d1 - 1||^2 over [0,1] for linear d.
    auto integral = [](double x0, double x1) { return 0.5 * (x0 + x1); };
    auto integral2 = [](double x0, double x1) { return (x0 * x0 + x0 * x1 + x1 * x1) / 3.0; };
    const double num = integral(hi->det[0], hi->det[2]) - integral(lo->det[0], lo->det[2]);
    const double den = integral2(lo->det[0], lo->det[2]) + integral2(hi->det[0], hi->det[2]);
    g.c1 = num / den;
    g.alpha[0] = {g.c1 * lo->det[0], g.c1 * lo->det[2]};
    g.alpha[1] = {g.c1 * hi->det[0], g.c1 * hi->det[2]};
    g.beta[0] = {lo->beta[0], lo->beta[2]};
    g.beta[1] = {hi->beta[0], hi->beta[2]};
    return g;
}

GluingData MultiPatchDomain::gluing(int edge, int v) const
{
    const Edge& e = edges_[edge];
    if (!e.isInterface) {
        throw std::logic_error("gluing data requested for a boundary edge");
    }
    const EdgeSide a{e.sides[0].patch, edgeFrame(e.sides[0], v)};
    const EdgeSide b{e.sides[1].patch, edgeFrame(e.sides[1], v)};
    return gluing_data(patches_[a.patch], a, patches_[b.patch], b);
}

double interface_bilinearity_defect(const Patch& patch, const Orientation& orient, int samples)
{
    static const int orders[][2] = {{2, 0}, {0, 2}, {1, 2}, {2, 1}, {0, 3}, {2, 2}, {1, 3}, {0, 4}};
    double defect = 0.0;
    for (int i = 0; i <= samples; ++i) {
        const double t = static_cast<double>(i) / samples;
        const PatchJet j = oriented_derivatives(patch, orient, Eigen::Vector2d(0.0, t), kJetOrder);
        for (const auto& o : orders) {
            defect = std::max(defect, j(o[0], o[1]).norm());
        }
    }
    return defect;
}

MultiPatchDomain build_topology(std::vector<Patch> patches, double tol)
{
    if (patches.empty()) {
        throw TopologyError("domain has no patches");
    }
    MultiPatchDomain dom;
    dom.patches_ = std::move(patches);
    const int np = dom.numPatches();

    Eigen::Vector2d lo = dom.patches_[0].corner(0);
    Eigen::Vector2d hi = lo;
    for (const Patch& p : dom.patches_) {
        for (int c = 0; c < 4; ++c) {
            lo = lo.cwiseMin(p.corner(c));
            hi = hi.cwiseMax(p.corner(c));
        }
        for (const auto& q : p.controlPoints()) {
            lo = lo.cwiseMin(q);
            hi = hi.cwiseMax(q);
        }
    }
    dom.diameter_ = (hi - lo).norm();
    if (tol <= 0.0) {
        tol = 1e-9 * dom.diameter_;
    }

    // Regularity: one sign of det J over a sample grid including the corners.
    for (int i = 0; i < np; ++i) {
        const int m = 10;
        double dmin = std::numeric_limits<double>::infinity();
        double dmax = -dmin;
        for (int a = 0; a <= m; ++a) {
            for (int b = 0; b <= m; ++b) {
                const double d = dom.patches_[i].derivatives(Eigen::Vector2d(double(a) / m, double(b) / m), 1).jacobian().determinant();
                dmin = std::min(dmin, d);
                dmax = std::max(dmax, d);
            }
        }
        const double floor = 1e-12 * dom.diameter_ * dom.diameter_;
        if (!(dmin > floor || dmax < -floor)) {
            throw TopologyError("patch " + std::to_string(i) + " is not regular: Jacobian determinant changes sign or vanishes");
        }
    }

    // Corner matching by spatial hashing.
    const double cell = 4.0 * tol;
    std::unordered_map<long long, std::vector<int>> grid;
    auto key = [&](long long ix, long long iy) { return ix * 1000003LL + iy; };
    dom.cornerVertex_.assign(np, {-1, -1, -1, -1});
    for (int i = 0; i < np; ++i) {
        for (int c = 0; c < 4; ++c) {
            const Eigen::Vector2d x = dom.patches_[i].corner(c);
            const long long ix = static_cast<long long>(std::floor((x.x() - lo.x()) / cell));
            const long long iy = static_cast<long long>(std::floor((x.y() - lo.y()) / cell));
            int found = -1;
            for (long long dx = -1; dx <= 1 && found < 0; ++dx) {
                for (long long dy = -1; dy <= 1 && found < 0; ++dy) {
                    auto it = grid.find(key(ix + dx, iy + dy));
                    if (it == grid.end()) {
                        continue;
                    }
                    for (int v : it->second) {
                        if ((dom.vertices_[v].point - x).norm() <= tol) {
                            found = v;
                            break;
                        }
                    }
                }
            }
            if (found < 0) {
                found = static_cast<int>(dom.vertices_.size());
                Vertex v;
                v.point = x;
                dom.vertices_.push_back(v);
                grid[key(ix, iy)].push_back(found);
            }
            dom.cornerVertex_[i][c] = found;
        }
        std::array<int, 4> cv = dom.cornerVertex_[i];
        std::sort(cv.begin(), cv.end());
        if (std::adjacent_find(cv.begin(), cv.end()) != cv.end()) {
            throw TopologyError("patch " + std::to_string(i) + " has two corners at the same point");
        }
    }

    // Edges by endpoint pairs.
    std::map<std::pair<int, int>, int> edgeOf;
    dom.sideEdge_.assign(np, {-1, -1, -1, -1});
    for (int i = 0; i < np; ++i) {
        for (int s = 0; s < 4; ++s) {
            const auto ends = side_corners(s);
            const int v0 = dom.cornerVertex_[i][ends[0]];
            const int v1 = dom.cornerVertex_[i][ends[1]];
            const auto k = std::minmax(v0, v1);
            auto it = edgeOf.find(k);
            if (it == edgeOf.end()) {
                Edge e;
                e.vertices = {k.first, k.second};
                e.sides.push_back({i, s});
                edgeOf[k] = static_cast<int>(dom.edges_.size());
                dom.sideEdge_[i][s] = static_cast<int>(dom.edges_.size());
                dom.edges_.push_back(e);
            } else {
                Edge& e = dom.edges_[it->second];
                if (e.sides.size() >= 2) {
                    throw TopologyError("edge between vertices " + std::to_string(k.first) + " and " +
                                        std::to_string(k.second) + " is shared by more than two patches");
                }
                e.sides.push_back({i, s});
                e.isInterface = true;
                dom.sideEdge_[i][s] = it->second;
            }
        }
    }

    // Interface sides must trace the same curve in a common frame.
    for (int e = 0; e < static_cast<int>(dom.edges_.size()); ++e) {
        const Edge& ed = dom.edges_[e];
        if (!ed.isInterface) {
            continue;
        }
        const int v = ed.vertices[0];
        const Orientation oa = dom.edgeFrame(ed.sides[0], v);
        const Orientation ob = dom.edgeFrame(ed.sides[1], v);
        for (int s = 0; s <= 10; ++s) {
            const Eigen::Vector2d eta(0.0, s / 10.0);
            const Eigen::Vector2d xa = dom.patches_[ed.sides[0].patch].eval(oa.inverse().apply(eta));
            const Eigen::Vector2d xb = dom.patches_[ed.sides[1].patch].eval(ob.inverse().apply(eta));
            if ((xa - xb).norm() > tol) {
                throw TopologyError("patches " + std::to_string(ed.sides[0].patch) + " and " +
                                    std::to_string(ed.sides[1].patch) + " share end points but not the edge curve");
            }
        }
        for (const PatchSide& ps : ed.sides) {
            const Patch& p = dom.patches_[ps.patch];
            if (!p.isBilinear()) {
                const Orientation o = dom.edgeFrame(ps, v);
                const double scale = oriented_derivatives(p, o, Eigen::Vector2d(0, 0), 1).jacobian().norm();
                if (interface_bilinearity_defect(p, o) > 1e-9 * std::max(scale, 1.0)) {
                    throw TopologyError("spline patch " + std::to_string(ps.patch) +
                                        " is not bilinear along its interface (transversal order <= 2)");
                }
            }
        }
    }

    // Hanging vertices: a corner lying in the interior of an edge it does not bound.
    for (int v = 0; v < static_cast<int>(dom.vertices_.size()); ++v) {
        const Eigen::Vector2d x = dom.vertices_[v].point;
        for (const Edge& ed : dom.edges_) {
            if (ed.vertices[0] == v || ed.vertices[1] == v) {
                continue;
            }
            const PatchSide& ps = ed.sides[0];
            const Patch& p = dom.patches_[ps.patch];
            const Orientation o = dom.edgeFrame(ps, ed.vertices[0]);
            const int m = p.isBilinear() ? 1 : 64;
            for (int s = 0; s < m; ++s) {
                const Eigen::Vector2d a = p.eval(o.inverse().apply(Eigen::Vector2d(0.0, double(s) / m)));
                const Eigen::Vector2d b = p.eval(o.inverse().apply(Eigen::Vector2d(0.0, double(s + 1) / m)));
                const Eigen::Vector2d ab = b - a;
                const double t = std::clamp((x - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
                if ((a + t * ab - x).norm() <= std::max(tol, 1e-6 * ab.norm() * (m > 1 ? 1.0 : 0.0))) {
                    throw TopologyError("T-junction: vertex " + std::to_string(v) + " lies on the interior of an edge of patch " +
                                        std::to_string(ps.patch));
                }
            }
        }
    }

    // Vertex incidences, classes and fans.
    for (int e = 0; e < static_cast<int>(dom.edges_.size()); ++e) {
        for (int v : dom.edges_[e].vertices) {
            dom.vertices_[v].edges.push_back(e);
        }
    }
    for (int v = 0; v < static_cast<int>(dom.vertices_.size()); ++v) {
        Vertex& vx = dom.vertices_[v];
        std::vector<FanPatch> inc;
        for (int i = 0; i < np; ++i) {
            for (int c = 0; c < 4; ++c) {
                if (dom.cornerVertex_[i][c] != v) {
                    continue;
                }
                const Eigen::Vector2d cp = corner_param(c);
                const int sideAlong2 = static_cast<int>(cp.x());      // xi1 fixed
                const int sideAlong1 = 2 + static_cast<int>(cp.y());  // xi2 fixed
                FanPatch f;
                f.patch = i;
                f.corner = c;
                Orientation o = dom.edgeFrame({i, sideAlong2}, v);
                const double det = oriented_derivatives(dom.patches_[i], o, Eigen::Vector2d(0, 0), 1).jacobian().determinant();
                if (det > 0) {
                    f.orient = o;
                    f.secondEdge = dom.sideEdge_[i][sideAlong2];
                    f.firstEdge = dom.sideEdge_[i][sideAlong1];
                } else {
                    f.orient = dom.edgeFrame({i, sideAlong1}, v);
                    f.secondEdge = dom.sideEdge_[i][sideAlong1];
                    f.firstEdge = dom.sideEdge_[i][sideAlong2];
                }
                inc.push_back(f);
            }
        }
        vx.valency = static_cast<int>(inc.size());
        const bool boundary = std::any_of(vx.edges.begin(), vx.edges.end(), [&](int e) { return !dom.edges_[e].isInterface; });
        if (!boundary) {
            vx.cls = VertexClass::Inner;
            if (vx.valency < 3) {
                throw TopologyError("inner vertex " + std::to_string(v) + " has patch valency " + std::to_string(vx.valency));
            }
        } else {
            vx.cls = vx.valency == 1 ? VertexClass::Boundary1 : vx.valency == 2 ? VertexClass::Boundary2 : VertexClass::Boundary3;
        }

        // Walk the fan counterclockwise across second edges.
        int start = -1;
        if (boundary) {
            for (int l = 0; l < vx.valency; ++l) {
                if (!dom.edges_[inc[l].firstEdge].isInterface) {
                    if (start >= 0) {
                        throw TopologyError("patches around boundary vertex " + std::to_string(v) + " do not form a single fan");
                    }
                    start = l;
                }
            }
        } else {
            start = 0;  // lowest patch index
        }
        if (start < 0) {
            throw TopologyError("patches around vertex " + std::to_string(v) + " do not form a fan");
        }
        std::vector<bool> used(inc.size(), false);
        int cur = start;
        while (true) {
            vx.fan.push_back(inc[cur]);
            used[cur] = true;
            const Edge& next = dom.edges_[inc[cur].secondEdge];
            if (!next.isInterface) {
                break;
            }
            int nxt = -1;
            for (int l = 0; l < vx.valency; ++l) {
                if (l != cur && inc[l].firstEdge == inc[cur].secondEdge) {
                    nxt = l;
                }
            }
            if (nxt < 0) {
                throw TopologyError("fan around vertex " + std::to_string(v) + " is not consistently oriented");
            }
            if (used[nxt]) {
                if (nxt != start || boundary) {
                    throw TopologyError("fan around vertex " + std::to_string(v) + " is not a single cycle");
                }
                break;
            }
            cur = nxt;
        }
        if (static_cast<int>(vx.fan.size()) != vx.valency) {
            throw TopologyError("patches around vertex " + std::to_string(v) + " do not form a single fan");
        }
    }

    // Connectivity, also after removing any single vertex.
    auto connected = [&](int removed) {
        UnionFind uf(np);
        for (const Edge& e : dom.edges_) {
            if (e.isInterface) {
                uf.join(e.sides[0].patch, e.sides[1].patch);
            }
        }
        for (int v = 0; v < static_cast<int>(dom.vertices_.size()); ++v) {
            if (v == removed || dom.vertices_[v].fan.empty()) {
                continue;
            }
            for (const FanPatch& f : dom.vertices_[v].fan) {
                uf.join(f.patch, dom.vertices_[v].fan[0].patch);
            }
        }
        for (int i = 1; i < np; ++i) {
            if (uf.find(i) != uf.find(0)) {
                return false;
            }
        }
        return true;
    };
    if (!connected(-1)) {
        throw TopologyError("domain is not connected");
    }
    for (int v = 0; v < static_cast<int>(dom.vertices_.size()); ++v) {
        if (!connected(v)) {
            throw TopologyError("removing vertex " + std::to_string(v) + " disconnects the domain");
        }
    }
    return dom;
}

}  // namespace mpcolloc
