#pragma once

#include "mpcolloc/bspline.hpp"
#include "mpcolloc/jet.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace mpcolloc {

/// Thrown when patches do not form a valid multi-patch configuration.
class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when an input file cannot be read.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One of the 8 dihedral transforms of [0,1]^2.
///
/// Maps native parameters xi to oriented parameters eta: first the axes are
/// optionally swapped, then each oriented axis is optionally reversed.
struct Orientation {
    bool swap = false;
    bool flip1 = false;
    bool flip2 = false;

    Eigen::Vector2d apply(const Eigen::Vector2d& xi) const
    {
        Eigen::Vector2d t = swap ? Eigen::Vector2d(xi.y(), xi.x()) : xi;
        if (flip1) {
            t.x() = 1.0 - t.x();
        }
        if (flip2) {
            t.y() = 1.0 - t.y();
        }
        return t;
    }

    Orientation inverse() const
    {
        return swap ? Orientation{true, flip2, flip1} : *this;
    }

    /// The transform xi -> then.apply(first.apply(xi)).
    static Orientation compose(const Orientation& first, const Orientation& then);

    /// For h(xi) = g(apply(xi)): the native derivative of order (d1,d2) of h
    /// equals sign * (derivative of g of order oriented(d1,d2)).
    std::array<int, 2> orientedOrders(int d1, int d2) const
    {
        return swap ? std::array<int, 2>{d2, d1} : std::array<int, 2>{d1, d2};
    }
    double derivativeSign(int d1, int d2) const
    {
        const auto e = orientedOrders(d1, d2);
        const int odd = (flip1 ? e[0] : 0) + (flip2 ? e[1] : 0);
        return (odd % 2 == 0) ? 1.0 : -1.0;
    }

    bool operator==(const Orientation& o) const { return swap == o.swap && flip1 == o.flip1 && flip2 == o.flip2; }

    static std::array<Orientation, 8> all();
};

/// Derivatives d[a][b] = d^{a+b} F / dxi1^a dxi2^b for a + b <= kJetOrder.
struct PatchJet {
    std::array<std::array<Eigen::Vector2d, kJetOrder + 1>, kJetOrder + 1> d;

    const Eigen::Vector2d& operator()(int a, int b) const { return d[a][b]; }
    Eigen::Vector2d& operator()(int a, int b) { return d[a][b]; }

    Eigen::Matrix2d jacobian() const
    {
        Eigen::Matrix2d j;
        j.col(0) = d[1][0];
        j.col(1) = d[0][1];
        return j;
    }
};

/// Geometry map F: [0,1]^2 -> R^2, either bilinear or a tensor spline.
class Patch {
public:
    /// Corners are the images of (0,0), (1,0), (0,1), (1,1).
    static Patch bilinear(const std::array<Eigen::Vector2d, 4>& corners);

    /// Control points indexed as points[j1 * n + j2].
    static Patch spline(const SplineSpace1D& space, std::vector<Eigen::Vector2d> points);

    bool isBilinear() const { return !space_.has_value(); }
    const std::optional<SplineSpace1D>& splineSpace() const { return space_; }
    const std::array<Eigen::Vector2d, 4>& cornerPoints() const { return corners_; }
    const std::vector<Eigen::Vector2d>& controlPoints() const { return control_; }

    /// Image of corner c = b1 + 2 b2, i.e. F(b1, b2).
    const Eigen::Vector2d& corner(int c) const { return corners_[c]; }

    Eigen::Vector2d eval(const Eigen::Vector2d& xi) const;
    PatchJet derivatives(const Eigen::Vector2d& xi, int maxOrder) const;

    /// Parametric breakpoints of the geometry in each direction.
    std::vector<double> breakpoints() const;

    /// Inverse map x -> xi by the closed form for bilinear patches or Newton
    /// iteration otherwise. Returns nothing when x is not in the patch.
    std::optional<Eigen::Vector2d> invert(const Eigen::Vector2d& x, double tol = 1e-12) const;

private:
    std::array<Eigen::Vector2d, 4> corners_;
    std::optional<SplineSpace1D> space_;
    std::vector<Eigen::Vector2d> control_;
};

/// Derivatives of F o orient^{-1} at oriented parameters eta.
PatchJet oriented_derivatives(const Patch& patch, const Orientation& orient, const Eigen::Vector2d& eta, int maxOrder);

/// Taylor polynomials of F o orient^{-1} - F(orient^{-1}(eta)) at eta.
JetMap patch_jet_map(const Patch& patch, const Orientation& orient, const Eigen::Vector2d& eta);

/// Native sides: 0 is xi1 = 0, 1 is xi1 = 1, 2 is xi2 = 0, 3 is xi2 = 1.
struct PatchSide {
    int patch = -1;
    int side = -1;
};

/// Corner indices (b1 + 2 b2) at the two ends of a native side, ordered by
/// increasing running parameter.
std::array<int, 2> side_corners(int side);

enum class VertexClass { Inner, Boundary1, Boundary2, Boundary3 };

const char* to_string(VertexClass c);

struct Edge {
    bool isInterface = false;
    std::vector<PatchSide> sides;  // one for boundary edges, two for interfaces
    std::array<int, 2> vertices{};
};

/// Patch around a vertex in fan position l. The orientation places the vertex
/// at eta = (0,0), edge firstEdge along eta2 = 0 and secondEdge along eta1 = 0,
/// with positive Jacobian determinant.
struct FanPatch {
    int patch = -1;
    int corner = -1;
    Orientation orient;
    int firstEdge = -1;
    int secondEdge = -1;
};

struct Vertex {
    Eigen::Vector2d point;
    VertexClass cls = VertexClass::Boundary1;
    int valency = 0;
    std::vector<FanPatch> fan;  // counterclockwise
    std::vector<int> edges;
};

/// A patch seen in the frame of one edge: the edge at eta1 = 0 and a chosen
/// end vertex at eta2 = 0.
struct EdgeSide {
    int patch = -1;
    Orientation orient;
};

/// Gluing data of an interface in a fixed frame. Index 0 is the side i0 with
/// negative determinant, index 1 the side i1.
struct GluingData {
    std::array<EdgeSide, 2> side;
    std::array<std::array<double, 2>, 2> alpha{};  // values at t = 0 and t = 1
    std::array<std::array<double, 2>, 2> beta{};
    double c1 = 1.0;

    double alphaAt(int tau, double t) const { return alpha[tau][0] + (alpha[tau][1] - alpha[tau][0]) * t; }
    double betaAt(int tau, double t) const { return beta[tau][0] + (beta[tau][1] - beta[tau][0]) * t; }
    double alphaSlope(int tau) const { return alpha[tau][1] - alpha[tau][0]; }
    double betaSlope(int tau) const { return beta[tau][1] - beta[tau][0]; }
};

class MultiPatchDomain {
public:
    MultiPatchDomain() = default;

    const std::string& name() const { return name_; }
    void setName(std::string n) { name_ = std::move(n); }

    int numPatches() const { return static_cast<int>(patches_.size()); }
    const Patch& patch(int i) const { return patches_[i]; }
    const std::vector<Patch>& patches() const { return patches_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<Vertex>& vertices() const { return vertices_; }
    const Edge& edge(int e) const { return edges_[e]; }
    const Vertex& vertex(int v) const { return vertices_[v]; }

    int sideEdge(int patch, int side) const { return sideEdge_[patch][side]; }
    int cornerVertex(int patch, int corner) const { return cornerVertex_[patch][corner]; }

    int numInterfaces() const;
    int numBoundaryEdges() const;
    int countVertices(VertexClass c) const;
    double diameter() const { return diameter_; }

    /// Orientation of patch side ps placing the side at eta1 = 0 and the
    /// corner at vertex v at eta2 = 0.
    Orientation edgeFrame(const PatchSide& ps, int v) const;

    /// Gluing data of an interface in the frame starting at vertex v.
    GluingData gluing(int edge, int v) const;

    /// Default frame of an edge: starting at its first vertex.
    GluingData gluing(int edge) const { return gluing(edge, edges_[edge].vertices[0]); }

    friend MultiPatchDomain build_topology(std::vector<Patch> patches, double tol);

private:
    std::string name_;
    std::vector<Patch> patches_;
    std::vector<Edge> edges_;
    std::vector<Vertex> vertices_;
    std::vector<std::array<int, 4>> sideEdge_;
    std::vector<std::array<int, 4>> cornerVertex_;
    double diameter_ = 0.0;
};

/// Builds and validates the topology. tol <= 0 selects 1e-9 times the
/// bounding-box diameter.
MultiPatchDomain build_topology(std::vector<Patch> patches, double tol = -1.0);

/// Gluing data for two patch sides already placed in a common edge frame.
GluingData gluing_data(const Patch& a, const EdgeSide& sa, const Patch& b, const EdgeSide& sb);

/// Checks that each patch restricted to the given frame agrees with a bilinear
/// map up to transversal order two along the edge. Returns the max deviation.
double interface_bilinearity_defect(const Patch& patch, const Orientation& orient, int samples = 10);

/// Built-in domains: unit-square, two-patch-strip, pinwheel-<nu>,
/// appendix-three-patch.
MultiPatchDomain builtin_domain(const std::string& name);
std::vector<std::string> builtin_domain_names();

/// Domain from a JSON document with a "patches" list.
MultiPatchDomain parse_domain_json(const std::string& text);
MultiPatchDomain load_domain(const std::string& pathOrBuiltin);
std::string domain_to_json(const MultiPatchDomain& domain);

}  // namespace mpcolloc
