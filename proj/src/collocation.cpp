#include "mpcolloc/collocation.hpp"

#include "mpcolloc/bspline.hpp"

#include <algorithm>
#include <cmath>

namespace mpcolloc {

const char* to_string(Strategy s)
{
    switch (s) {
    case Strategy::Greville:
        return "greville";
    case Strategy::AllSuperconvergent:
        return "all";
    case Strategy::ClusteredSuperconvergent:
        return "clustered";
    }
    return "?";
}

Strategy parse_strategy(const std::string& name)
{
    if (name == "greville") {
        return Strategy::Greville;
    }
    if (name == "all" || name == "superconvergent") {
        return Strategy::AllSuperconvergent;
    }
    if (name == "clustered") {
        return Strategy::ClusteredSuperconvergent;
    }
    throw ParameterError("unknown collocation strategy '" + name + "' (greville, all, clustered)");
}

namespace {

void check_superconvergent(int p, int r, int k)
{
    if (!((p == 5 && r == 2) || (p == 6 && r == 2) || (p == 6 && r == 3))) {
        throw ParameterError("superconvergent points need (p,r) in {(5,2), (6,2), (6,3)}");
    }
    if (k < 2) {
        throw ParameterError("superconvergent points need k >= 2");
    }
}

int floor_div(int a, int b)
{
    return a >= 0 ? a / b : -((-a + b - 1) / b);
}

}  // namespace

std::vector<int> omission_set(int p, int r, int k)
{
    check_superconvergent(p, r, k);
    std::vector<int> s;
    if (p == 5) {
        s = {4, 4 * k + 1};
        for (int i = 0; i <= floor_div(k - 6, 4); ++i) {
            const int a = 9 + 8 * i;
            const int b = 12 + 8 * i;
            s.insert(s.end(), {a, b, 4 * k + 5 - a, 4 * k + 5 - b});
        }
        switch (k % 4) {
        case 0:
            s.insert(s.end(), {2 * k + 1, 2 * k + 4});
            break;
        case 1:
            s.insert(s.end(), {2 * k - 1, 2 * k + 2, 2 * k + 6});
            break;
        case 3:
            s.push_back(2 * k + 2);
            break;
        default:
            break;
        }
    } else if (r == 3) {
        // every inner knot but the first and the last; knot j sits at index 4j
        for (int i = 0; i <= k - 3; ++i) {
            s.push_back(8 + 4 * i);
        }
    }
    std::sort(s.begin(), s.end());
    return s;
}

Superconvergent1D superconvergent_1d(int p, int r, int k, bool clustered)
{
    check_superconvergent(p, r, k);
    Superconvergent1D sc;
    sc.p = p;
    sc.r = r;
    sc.k = k;
    if (p == 5) {
        const double a = std::sqrt((6.0 + std::sqrt(21.0)) / 15.0);
        const double b = std::sqrt((6.0 - std::sqrt(21.0)) / 15.0);
        sc.referenceRoots = {-a, -b, b, a};
    } else {
        const double a = std::sqrt(31.0 / 99.0);
        sc.referenceRoots = {-1.0, -a, 0.0, a, 1.0};
    }
    const SplineSpace1D space(p, r, k);
    const int spans = k + 1;
    if (p == 5) {
        sc.all.push_back(0.0);
    }
    for (int j = 0; j < spans; ++j) {
        const double lo = space.breakpoint(j);
        const double hi = space.breakpoint(j + 1);
        for (double rho : sc.referenceRoots) {
            if (rho == -1.0 && j > 0) {
                continue;  // knot already added by the previous span
            }
            double x = lo + 0.5 * (rho + 1.0) * (hi - lo);
            if (rho == -1.0) {
                x = lo;
            } else if (rho == 1.0) {
                x = hi;
            }
            sc.all.push_back(x);
        }
    }
    if (p == 5) {
        sc.all.push_back(1.0);
    }
    sc.delta = static_cast<int>(sc.all.size()) - space.dim();
    sc.omitted = omission_set(p, r, k);
    if (clustered) {
        std::vector<bool> drop(sc.all.size(), false);
        for (int i : sc.omitted) {
            drop.at(i) = true;
        }
        for (std::size_t i = 0; i < sc.all.size(); ++i) {
            if (!drop[i]) {
                sc.points.push_back(sc.all[i]);
            }
        }
    } else {
        sc.points = sc.all;
    }
    if (p == 6 && r == 2) {
        // two points short of the dimension: add the second and second last Greville points
        const auto g = space.greville();
        sc.points.push_back(g[1]);
        sc.points.push_back(g[g.size() - 2]);
        std::sort(sc.points.begin(), sc.points.end());
    }
    return sc;
}

std::vector<double> points_1d(int p, int r, int k, Strategy strategy)
{
    if (strategy == Strategy::Greville) {
        return SplineSpace1D(p, r, k).greville();
    }
    return superconvergent_1d(p, r, k, strategy == Strategy::ClusteredSuperconvergent).points;
}

std::vector<Eigen::Vector2d> local_points(int p, int r, int k, Strategy strategy)
{
    const std::vector<double> l = points_1d(p, r, k, strategy);
    std::vector<Eigen::Vector2d> out;
    out.reserve(l.size() * l.size());
    for (double a : l) {
        for (double b : l) {
            out.emplace_back(a, b);
        }
    }
    return out;
}

CollocationPointSet assemble_global(const MultiPatchDomain& domain, int p, int r, int k, Strategy strategy)
{
    CollocationPointSet set;
    set.strategy = strategy;
    set.p = p;
    set.r = r;
    set.k = k;
    const std::vector<double> l = points_1d(p, r, k, strategy);
    const int m = static_cast<int>(l.size());

    for (int patch = 0; patch < domain.numPatches(); ++patch) {
        for (int i1 = 0; i1 < m; ++i1) {
            for (int i2 = 0; i2 < m; ++i2) {
                const bool end1 = i1 == 0 || i1 == m - 1;
                const bool end2 = i2 == 0 || i2 == m - 1;
                int owner = patch;
                bool boundary = false;
                if (end1 && end2) {
                    const int c = (i1 == m - 1 ? 1 : 0) + (i2 == m - 1 ? 2 : 0);
                    const Vertex& v = domain.vertex(domain.cornerVertex(patch, c));
                    for (const FanPatch& fp : v.fan) {
                        owner = std::min(owner, fp.patch);
                    }
                    boundary = v.cls != VertexClass::Inner;
                } else if (end1 || end2) {
                    const int side = end1 ? (i1 == 0 ? 0 : 1) : (i2 == 0 ? 2 : 3);
                    const Edge& e = domain.edge(domain.sideEdge(patch, side));
                    for (const PatchSide& ps : e.sides) {
                        owner = std::min(owner, ps.patch);
                    }
                    boundary = !e.isInterface;
                }
                if (owner != patch) {
                    continue;
                }
                CollocationPoint pt;
                pt.xi = Eigen::Vector2d(l[i1], l[i2]);
                pt.patch = patch;
                pt.x = domain.patch(patch).eval(pt.xi);
                pt.boundary = boundary;
                (boundary ? set.boundary : set.inner).push_back(set.size());
                set.points.push_back(pt);
            }
        }
    }
    return set;
}

}  // namespace mpcolloc
