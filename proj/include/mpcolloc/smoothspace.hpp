#pragma once

#include "mpcolloc/bspline.hpp"
#include "mpcolloc/multipatch.hpp"

#include <Eigen/Dense>

#include <array>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace mpcolloc {

/// Raised when a local interpolation system of the vertex construction is
/// singular or its solution misses the required accuracy.
class ConstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Smallest number of inner knots for which the construction is defined.
int min_inner_knots(int p, int r);

/// Throws ParameterError unless (p,r) is one of (5,2), (6,2), (6,3) and k is
/// large enough.
void check_space_parameters(int p, int r, int k);

/// Closed-form dimension of the space for the topology of dom.
long long dimension_formula(const MultiPatchDomain& dom, int p, int r, int k);

/// Position of the derivative of order (a,b), a + b <= 4, in a DerivArray.
constexpr int deriv_index(int a, int b)
{
    return (a + b) * (a + b + 1) / 2 + b;
}

inline constexpr int kMaxEvalOrder = 4;
inline constexpr int kNumDerivs = 15;

/// Partial derivatives of a function of two variables up to total order 4,
/// stored by deriv_index.
using DerivArray = std::array<double, kNumDerivs>;

/// Number of entries used for derivatives up to the given total order.
constexpr int num_derivs(int maxOrder)
{
    return (maxOrder + 1) * (maxOrder + 2) / 2;
}

enum class BasisKind { Patch, BoundaryEdge, InterfaceEdge, VertexInner, VertexV3, VertexV2, VertexV1 };

const char* to_string(BasisKind kind);

/// Building block of a basis function piece, given in its own frame eta =
/// orient.apply(xi).
///
/// BSpline is N_{j1}(eta1) N_{j2}(eta2). The three edge families are the
/// interface functions of one side: EdgeTrace uses S^{p,r+2}, EdgeFirst
/// S^{p-1,r+1}, EdgeSecond S^{p-2,r}, each indexed by j2 along eta2 with the
/// linear gluing data alpha, beta of that side.
struct Atom {
    enum class Type { BSpline, EdgeTrace, EdgeFirst, EdgeSecond };

    Type type = Type::BSpline;
    Orientation orient;
    int j1 = 0;
    int j2 = 0;
    std::array<double, 2> alpha{};  // values at eta2 = 0 and eta2 = 1
    std::array<double, 2> beta{};
};

struct Term {
    double coef = 1.0;
    Atom atom;
};

/// Restriction of a basis function to one patch. cells bounds the native
/// knot-span support: [cells[0], cells[1]] x [cells[2], cells[3]].
struct Piece {
    int patch = -1;
    std::vector<Term> terms;
    std::array<int, 4> cells{};
};

struct BasisFunction {
    BasisKind kind = BasisKind::Patch;
    int entity = -1;  // patch, edge or vertex index depending on kind
    int j1 = 0;
    int j2 = 0;
    std::vector<Piece> pieces;

    const Piece* pieceOn(int patch) const;
};

struct BasisValue {
    int index = -1;
    DerivArray d{};
};

/// Evaluation tables of the four univariate spaces at one parameter point.
class PointCache;

/// The C^2-smooth space: an enumerated basis over a multi-patch domain.
class C2Space {
public:
    C2Space(MultiPatchDomain domain, int p, int r, int k);
    ~C2Space();
    C2Space(C2Space&&) noexcept;
    C2Space& operator=(C2Space&&) noexcept;

    const MultiPatchDomain& domain() const { return domain_; }
    int degree() const { return p_; }
    int regularity() const { return r_; }
    int innerKnots() const { return k_; }
    const SplineSpace1D& space() const { return spaces_[0]; }

    /// 0: S^{p,r}, 1: S^{p,r+2}, 2: S^{p-1,r+1}, 3: S^{p-2,r}.
    const SplineSpace1D& auxSpace(int s) const { return spaces_[s]; }

    int dim() const { return static_cast<int>(functions_.size()); }
    const BasisFunction& function(int i) const { return functions_[i]; }
    const std::vector<BasisFunction>& functions() const { return functions_; }
    std::map<BasisKind, int> countByKind() const;

    /// Scaling factor of the vertex jets, defined for inner and v3 vertices.
    double sigma(int vertex) const { return sigma_.at(vertex); }

    /// Native parametric derivatives of function fn on patch up to maxOrder.
    /// Zero when fn has no piece on the patch.
    DerivArray eval(int fn, int patch, const Eigen::Vector2d& xi, int maxOrder) const;
    double eval(int fn, int patch, const Eigen::Vector2d& xi, int d1, int d2) const;

    /// All basis functions whose support box on patch contains the knot
    /// span of xi, with their native derivatives up to maxOrder.
    void evalActive(int patch, const Eigen::Vector2d& xi, int maxOrder, std::vector<BasisValue>& out) const;

    /// Derivatives of a single atom in its own frame at eta = orient(xi),
    /// indexed [a][b] with a + b <= maxOrder.
    std::array<std::array<double, 5>, 5> frameDerivatives(const Atom& atom, const Eigen::Vector2d& xi, int maxOrder) const;

    /// Coefficients of the vertex edge system for edge e around vertex v,
    /// solved in the frame of the adjacent fan patch `patch`.
    Eigen::VectorXd vertexEdgeCoefficients(int v, int e, int patch, int j1, int j2) const;

private:
    void build();
    void addPatchFunctions();
    void addBoundaryEdgeFunctions();
    void addInterfaceFunctions();
    void addVertexFunctions();
    void addFanVertex(int v);
    void addValency2Vertex(int v);
    void addValency1Vertex(int v);

    Piece makePiece(int patch, std::vector<Term> terms) const;
    std::array<int, 4> atomCells(const Atom& atom) const;
    std::vector<Atom> edgeCandidates(int v, int e, int patch, Orientation& frame) const;
    Eigen::VectorXd psiJet(int v, int patch, const Orientation& frame, int j1, int j2) const;
    DerivArray evalPiece(const Piece& piece, PointCache& cache, int maxOrder) const;
    void frameEval(const Atom& atom, PointCache& cache, int maxOrder, double (&out)[7][7]) const;

    MultiPatchDomain domain_;
    int p_;
    int r_;
    int k_;
    std::vector<SplineSpace1D> spaces_;
    std::vector<BasisFunction> functions_;
    std::map<int, double> sigma_;
    // per patch, per cell (c1 * (k+1) + c2): function indices
    std::vector<std::vector<std::vector<int>>> cellIndex_;
};

/// Builds the space; validates (p, r, k).
C2Space build_space(const MultiPatchDomain& domain, int p, int r, int k);

/// Mismatches of the three interface smoothness conditions at one point.
struct SmoothnessResidual {
    double value = 0.0;
    double first = 0.0;
    double second = 0.0;
    double scale = 1.0;  // magnitude of the compared quantities, at least 1

    double maxAbs() const { return std::max({std::abs(value), std::abs(first), std::abs(second)}); }
    double maxRelative() const { return maxAbs() / scale; }
};

/// Derivatives [a][b], a + b <= 2, of one side's function in the edge frame
/// of the gluing data (eta1 transversal, eta2 along the edge).
using EdgeFrameJet = std::array<std::array<double, 3>, 3>;

/// Evaluates the three conditions for two sides given in the edge frame.
SmoothnessResidual smoothness_residual(const GluingData& g, double t, const EdgeFrameJet& side0, const EdgeFrameJet& side1);

/// Residual of basis function fn across interface edge at edge parameter t
/// (frame starting at the edge's first vertex).
SmoothnessResidual smoothness_residual(const C2Space& space, int fn, int edge, double t);

/// For inner and v3 vertex functions: max over fan patches and orders
/// |m| <= 4 of |d^m phi(v) - sigma^{|j|} delta| / sigma^{|m|}, with physical
/// derivatives obtained through the inverse of each patch map.
double vertex_jet_mismatch(const C2Space& space, int fn);

}  // namespace mpcolloc
