#include "mpcolloc/smoothspace.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

namespace mpcolloc {

namespace {

int binom(int n, int k)
{
    int c = 1;
    for (int i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;
    }
    return c;
}

// Row index of the jet condition (t, a) in the 12 x 12 vertex edge system.
int edge_row(int t, int a)
{
    static const int offset[3] = {0, 5, 9};
    return offset[t] + a;
}

}  // namespace

class PointCache {
public:
    PointCache(const std::vector<SplineSpace1D>& spaces, const Eigen::Vector2d& xi, int maxDeriv)
        : spaces_(&spaces), maxDeriv_(maxDeriv)
    {
        coords_[0] = xi.x();
        coords_[1] = 1.0 - xi.x();
        coords_[2] = xi.y();
        coords_[3] = 1.0 - xi.y();
    }

    const LocalBasis& get(int space, int coord)
    {
        auto& slot = tab_[space][coord];
        if (!slot) {
            slot = (*spaces_)[space].evalLocal(coords_[coord], maxDeriv_);
        }
        return *slot;
    }

    double coord(int c) const { return coords_[c]; }
    int maxDeriv() const { return maxDeriv_; }

private:
    const std::vector<SplineSpace1D>* spaces_;
    double coords_[4];
    int maxDeriv_;
    std::array<std::array<std::optional<LocalBasis>, 4>, 4> tab_;
};

int min_inner_knots(int p, int r)
{
    const int den = p - r - 2;
    return std::max(0, (9 - p + den - 1) / den);
}

void check_space_parameters(int p, int r, int k)
{
    const bool supported = (p == 5 && r == 2) || (p == 6 && r == 2) || (p == 6 && r == 3);
    if (!supported) {
        std::ostringstream os;
        os << "unsupported (p,r) = (" << p << "," << r << "): the smooth space needs p >= 5 and 2 <= r <= p-3, "
           << "and collocation is implemented for (5,2), (6,2), (6,3)";
        throw ParameterError(os.str());
    }
    if (k < min_inner_knots(p, r)) {
        std::ostringstream os;
        os << "k = " << k << " violates k >= (9-p)/(p-r-2); (p,r) = (" << p << "," << r << ") needs k >= "
           << min_inner_knots(p, r);
        throw ParameterError(os.str());
    }
}

long long dimension_formula(const MultiPatchDomain& dom, int p, int r, int k)
{
    const long long n = p + 1 + static_cast<long long>(k) * (p - r);
    const long long v15 = dom.countVertices(VertexClass::Inner) + dom.countVertices(VertexClass::Boundary1) +
                          dom.countVertices(VertexClass::Boundary3);
    return dom.numPatches() * (n - 6) * (n - 6) + 3LL * dom.numInterfaces() * (n - 2LL * k - 9) +
           3LL * dom.numBoundaryEdges() * (n - 8) + 15 * v15 + 18LL * dom.countVertices(VertexClass::Boundary2);
}

const char* to_string(BasisKind kind)
{
    switch (kind) {
    case BasisKind::Patch:
        return "patch";
    case BasisKind::BoundaryEdge:
        return "boundary-edge";
    case BasisKind::InterfaceEdge:
        return "interface-edge";
    case BasisKind::VertexInner:
        return "vertex-inner";
    case BasisKind::VertexV3:
        return "vertex-v3";
    case BasisKind::VertexV2:
        return "vertex-v2";
    case BasisKind::VertexV1:
        return "vertex-v1";
    }
    return "?";
}

const Piece* BasisFunction::pieceOn(int patch) const
{
    for (const Piece& pc : pieces) {
        if (pc.patch == patch) {
            return &pc;
        }
    }
    return nullptr;
}

C2Space::C2Space(MultiPatchDomain domain, int p, int r, int k) : domain_(std::move(domain)), p_(p), r_(r), k_(k)
{
    check_space_parameters(p, r, k);
    for (const Patch& patch : domain_.patches()) {
        if (!patch.isBilinear()) {
            const int gp = patch.splineSpace()->degree();
            if (gp > p) {
                throw ParameterError("geometry degree " + std::to_string(gp) + " exceeds the solution degree " + std::to_string(p));
            }
        }
    }
    spaces_ = {SplineSpace1D(p, r, k), SplineSpace1D(p, r + 2, k), SplineSpace1D(p - 1, r + 1, k), SplineSpace1D(p - 2, r, k)};
    build();
}

C2Space::~C2Space() = default;
C2Space::C2Space(C2Space&&) noexcept = default;
C2Space& C2Space::operator=(C2Space&&) noexcept = default;

C2Space build_space(const MultiPatchDomain& domain, int p, int r, int k)
{
    return C2Space(domain, p, r, k);
}

std::map<BasisKind, int> C2Space::countByKind() const
{
    std::map<BasisKind, int> out;
    for (const BasisFunction& f : functions_) {
        ++out[f.kind];
    }
    return out;
}

void C2Space::frameEval(const Atom& atom, PointCache& cache, int maxOrder, double (&out)[7][7]) const
{
    const Orientation& o = atom.orient;
    const int c1 = (o.swap ? 2 : 0) + (o.flip1 ? 1 : 0);
    const int c2 = (o.swap ? 0 : 2) + (o.flip2 ? 1 : 0);
    const LocalBasis& A = cache.get(0, c1);
    if (atom.type == Atom::Type::BSpline) {
        const LocalBasis& B = cache.get(0, c2);
        for (int a = 0; a <= maxOrder; ++a) {
            const double va = A(atom.j1, a);
            for (int b = 0; a + b <= maxOrder; ++b) {
                out[a][b] = va * B(atom.j2, b);
            }
        }
        return;
    }

    const double p = p_;
    const double h = spaces_[0].meshSize();
    // transversal profiles with unit jets at eta1 = 0
    double M[3][5];
    for (int a = 0; a <= maxOrder; ++a) {
        const double n0 = A(0, a);
        const double n1 = A(1, a);
        const double n2 = A(2, a);
        M[0][a] = n0 + n1 + n2;
        M[1][a] = h / p * (n1 + 2.0 * n2);
        M[2][a] = h * h / (p * (p - 1.0)) * n2;
    }

    const double t = cache.coord(c2);
    const double al = atom.alpha[0] + (atom.alpha[1] - atom.alpha[0]) * t;
    const double dal = atom.alpha[1] - atom.alpha[0];
    const double be = atom.beta[0] + (atom.beta[1] - atom.beta[0]) * t;
    const double dbe = atom.beta[1] - atom.beta[0];

    int s = 1;
    if (atom.type == Atom::Type::EdgeFirst) {
        s = 2;
    } else if (atom.type == Atom::Type::EdgeSecond) {
        s = 3;
    }
    const LocalBasis& F = cache.get(s, c2);
    auto f = [&](int d) { return F(atom.j2, d); };
    // b-th derivative of c(t) f^{(q)}(t) for quadratic c given by (c, c', c'')
    auto leibniz = [&](const double (&c)[3], int q, int b) {
        double sum = 0.0;
        for (int i = 0; i <= std::min(b, 2); ++i) {
            if (c[i] != 0.0) {
                sum += binom(b, i) * c[i] * f(q + b - i);
            }
        }
        return sum;
    };

    for (int a = 0; a <= maxOrder; ++a) {
        for (int b = 0; a + b <= maxOrder; ++b) {
            double v = 0.0;
            switch (atom.type) {
            case Atom::Type::EdgeTrace: {
                const double c1d[3] = {be, dbe, 0.0};
                const double c2d[3] = {be * be, 2 * be * dbe, 2 * dbe * dbe};
                v = M[0][a] * f(b) + M[1][a] * leibniz(c1d, 1, b) + M[2][a] * leibniz(c2d, 2, b);
                break;
            }
            case Atom::Type::EdgeFirst: {
                const double ca[3] = {al, dal, 0.0};
                const double cab[3] = {2 * al * be, 2 * (dal * be + al * dbe), 4 * dal * dbe};
                v = p / h * (M[1][a] * leibniz(ca, 0, b) + M[2][a] * leibniz(cab, 1, b));
                break;
            }
            case Atom::Type::EdgeSecond: {
                const double caa[3] = {al * al, 2 * al * dal, 2 * dal * dal};
                v = p * (p - 1) / (h * h) * M[2][a] * leibniz(caa, 0, b);
                break;
            }
            default:
                break;
            }
            out[a][b] = v;
        }
    }
}

std::array<std::array<double, 5>, 5> C2Space::frameDerivatives(const Atom& atom, const Eigen::Vector2d& xi, int maxOrder) const
{
    PointCache cache(spaces_, xi, maxOrder + 2);
    double raw[7][7] = {};
    frameEval(atom, cache, maxOrder, raw);
    std::array<std::array<double, 5>, 5> out{};
    for (int a = 0; a <= maxOrder; ++a) {
        for (int b = 0; a + b <= maxOrder; ++b) {
            out[a][b] = raw[a][b];
        }
    }
    return out;
}

DerivArray C2Space::evalPiece(const Piece& piece, PointCache& cache, int maxOrder) const
{
    DerivArray out{};
    double raw[7][7];
    for (const Term& term : piece.terms) {
        frameEval(term.atom, cache, maxOrder, raw);
        const Orientation& o = term.atom.orient;
        for (int d1 = 0; d1 <= maxOrder; ++d1) {
            for (int d2 = 0; d1 + d2 <= maxOrder; ++d2) {
                const auto e = o.orientedOrders(d1, d2);
                out[deriv_index(d1, d2)] += term.coef * o.derivativeSign(d1, d2) * raw[e[0]][e[1]];
            }
        }
    }
    return out;
}

DerivArray C2Space::eval(int fn, int patch, const Eigen::Vector2d& xi, int maxOrder) const
{
    if (maxOrder > kMaxEvalOrder) {
        throw ParameterError("derivative order above 4 requested");
    }
    const Piece* piece = functions_.at(fn).pieceOn(patch);
    if (!piece) {
        return DerivArray{};
    }
    PointCache cache(spaces_, xi, maxOrder + 2);
    return evalPiece(*piece, cache, maxOrder);
}

double C2Space::eval(int fn, int patch, const Eigen::Vector2d& xi, int d1, int d2) const
{
    return eval(fn, patch, xi, d1 + d2)[deriv_index(d1, d2)];
}

void C2Space::evalActive(int patch, const Eigen::Vector2d& xi, int maxOrder, std::vector<BasisValue>& out) const
{
    out.clear();
    const int c1 = spaces_[0].spanOf(xi.x());
    const int c2 = spaces_[0].spanOf(xi.y());
    PointCache cache(spaces_, xi, maxOrder + 2);
    for (int fn : cellIndex_[patch][c1 * (k_ + 1) + c2]) {
        const Piece* piece = functions_[fn].pieceOn(patch);
        out.push_back({fn, evalPiece(*piece, cache, maxOrder)});
    }
}

std::array<int, 4> C2Space::atomCells(const Atom& atom) const
{
    const double kk = k_ + 1;
    auto cells = [&](double lo, double hi) {
        return std::array<int, 2>{static_cast<int>(std::lround(lo * kk)), static_cast<int>(std::lround(hi * kk)) - 1};
    };
    const SplineSpace1D& s0 = spaces_[0];
    std::array<int, 2> f1;
    std::array<int, 2> f2;
    if (atom.type == Atom::Type::BSpline) {
        f1 = cells(s0.supportBegin(atom.j1), s0.supportEnd(atom.j1));
        f2 = cells(s0.supportBegin(atom.j2), s0.supportEnd(atom.j2));
    } else {
        const int s = atom.type == Atom::Type::EdgeTrace ? 1 : atom.type == Atom::Type::EdgeFirst ? 2 : 3;
        f1 = cells(0.0, s0.supportEnd(2));
        f2 = cells(spaces_[s].supportBegin(atom.j2), spaces_[s].supportEnd(atom.j2));
    }
    const Orientation& o = atom.orient;
    if (o.flip1) {
        f1 = {k_ - f1[1], k_ - f1[0]};
    }
    if (o.flip2) {
        f2 = {k_ - f2[1], k_ - f2[0]};
    }
    if (o.swap) {
        std::swap(f1, f2);
    }
    return {f1[0], f1[1], f2[0], f2[1]};
}

Piece C2Space::makePiece(int patch, std::vector<Term> terms) const
{
    Piece pc;
    pc.patch = patch;
    pc.cells = {k_ + 1, -1, k_ + 1, -1};
    for (const Term& t : terms) {
        const auto c = atomCells(t.atom);
        pc.cells[0] = std::min(pc.cells[0], c[0]);
        pc.cells[1] = std::max(pc.cells[1], c[1]);
        pc.cells[2] = std::min(pc.cells[2], c[2]);
        pc.cells[3] = std::max(pc.cells[3], c[3]);
    }
    pc.terms = std::move(terms);
    return pc;
}

void C2Space::build()
{
    addPatchFunctions();
    addBoundaryEdgeFunctions();
    addInterfaceFunctions();
    addVertexFunctions();

    cellIndex_.assign(domain_.numPatches(), std::vector<std::vector<int>>((k_ + 1) * (k_ + 1)));
    for (int i = 0; i < dim(); ++i) {
        for (const Piece& pc : functions_[i].pieces) {
            for (int c1 = pc.cells[0]; c1 <= pc.cells[1]; ++c1) {
                for (int c2 = pc.cells[2]; c2 <= pc.cells[3]; ++c2) {
                    cellIndex_[pc.patch][c1 * (k_ + 1) + c2].push_back(i);
                }
            }
        }
    }
}

void C2Space::addPatchFunctions()
{
    const int n = spaces_[0].dim();
    for (int i = 0; i < domain_.numPatches(); ++i) {
        for (int j1 = 3; j1 <= n - 4; ++j1) {
            for (int j2 = 3; j2 <= n - 4; ++j2) {
                BasisFunction f;
                f.kind = BasisKind::Patch;
                f.entity = i;
                f.j1 = j1;
                f.j2 = j2;
                Atom a;
                a.j1 = j1;
                a.j2 = j2;
                f.pieces.push_back(makePiece(i, {Term{1.0, a}}));
                functions_.push_back(std::move(f));
            }
        }
    }
}

void C2Space::addBoundaryEdgeFunctions()
{
    const int n = spaces_[0].dim();
    for (int e = 0; e < static_cast<int>(domain_.edges().size()); ++e) {
        const Edge& ed = domain_.edge(e);
        if (ed.isInterface) {
            continue;
        }
        const Orientation o = domain_.edgeFrame(ed.sides[0], ed.vertices[0]);
        for (int j1 = 0; j1 <= 2; ++j1) {
            for (int j2 = 5 - j1; j2 <= n + j1 - 6; ++j2) {
                BasisFunction f;
                f.kind = BasisKind::BoundaryEdge;
                f.entity = e;
                f.j1 = j1;
                f.j2 = j2;
                Atom a;
                a.orient = o;
                a.j1 = j1;
                a.j2 = j2;
                f.pieces.push_back(makePiece(ed.sides[0].patch, {Term{1.0, a}}));
                functions_.push_back(std::move(f));
            }
        }
    }
}

namespace {

Atom edge_atom(const GluingData& g, int tau, int j1, int j2)
{
    Atom a;
    a.type = j1 == 0 ? Atom::Type::EdgeTrace : j1 == 1 ? Atom::Type::EdgeFirst : Atom::Type::EdgeSecond;
    a.orient = g.side[tau].orient;
    a.j2 = j2;
    a.alpha = g.alpha[tau];
    a.beta = g.beta[tau];
    return a;
}

}  // namespace

void C2Space::addInterfaceFunctions()
{
    const int nj[3] = {spaces_[1].dim(), spaces_[2].dim(), spaces_[3].dim()};
    for (int e = 0; e < static_cast<int>(domain_.edges().size()); ++e) {
        const Edge& ed = domain_.edge(e);
        if (!ed.isInterface) {
            continue;
        }
        const GluingData g = domain_.gluing(e);
        for (int j1 = 0; j1 <= 2; ++j1) {
            for (int j2 = 5 - j1; j2 <= nj[j1] + j1 - 6; ++j2) {
                BasisFunction f;
                f.kind = BasisKind::InterfaceEdge;
                f.entity = e;
                f.j1 = j1;
                f.j2 = j2;
                for (int tau = 0; tau < 2; ++tau) {
                    f.pieces.push_back(makePiece(g.side[tau].patch, {Term{1.0, edge_atom(g, tau, j1, j2)}}));
                }
                functions_.push_back(std::move(f));
            }
        }
    }
}

void C2Space::addVertexFunctions()
{
    const VertexClass order[4] = {VertexClass::Inner, VertexClass::Boundary3, VertexClass::Boundary2, VertexClass::Boundary1};
    for (VertexClass cls : order) {
        for (int v = 0; v < static_cast<int>(domain_.vertices().size()); ++v) {
            if (domain_.vertex(v).cls != cls) {
                continue;
            }
            switch (cls) {
            case VertexClass::Inner:
            case VertexClass::Boundary3:
                addFanVertex(v);
                break;
            case VertexClass::Boundary2:
                addValency2Vertex(v);
                break;
            case VertexClass::Boundary1:
                addValency1Vertex(v);
                break;
            }
        }
    }
}

std::vector<Atom> C2Space::edgeCandidates(int v, int e, int patch, Orientation& frame) const
{
    int side = -1;
    for (int s = 0; s < 4; ++s) {
        if (domain_.sideEdge(patch, s) == e) {
            side = s;
        }
    }
    if (side < 0) {
        throw std::logic_error("patch does not touch the edge");
    }
    frame = domain_.edgeFrame({patch, side}, v);
    std::vector<Atom> atoms;
    const Edge& ed = domain_.edge(e);
    if (ed.isInterface) {
        const GluingData g = domain_.gluing(e, v);
        const int tau = g.side[0].patch == patch ? 0 : 1;
        for (int j1 = 0; j1 <= 2; ++j1) {
            for (int j2 = 0; j2 <= 4 - j1; ++j2) {
                atoms.push_back(edge_atom(g, tau, j1, j2));
            }
        }
    } else {
        for (int j1 = 0; j1 <= 2; ++j1) {
            for (int j2 = 0; j2 <= 4 - j1; ++j2) {
                Atom a;
                a.orient = frame;
                a.j1 = j1;
                a.j2 = j2;
                atoms.push_back(a);
            }
        }
    }
    return atoms;
}

Eigen::VectorXd C2Space::psiJet(int v, int patch, const Orientation& frame, int j1, int j2) const
{
    // psi(v + y) = sigma^{j1+j2} y1^{j1} y2^{j2} / (j1! j2!), composed with the
    // patch map in the given frame; returned as derivatives by deriv_index.
    Jet psi;
    psi.coeff(j1, j2) = std::pow(sigma_.at(v), j1 + j2) / (Jet::factorial(j1) * Jet::factorial(j2));
    const Jet g = compose(psi, patch_jet_map(domain_.patch(patch), frame, Eigen::Vector2d::Zero()));
    Eigen::VectorXd out(kNumDerivs);
    for (int a = 0; a <= kJetOrder; ++a) {
        for (int b = 0; a + b <= kJetOrder; ++b) {
            out[deriv_index(a, b)] = g.derivative(a, b);
        }
    }
    return out;
}

Eigen::VectorXd C2Space::vertexEdgeCoefficients(int v, int e, int patch, int j1, int j2) const
{
    Orientation frame;
    const std::vector<Atom> atoms = edgeCandidates(v, e, patch, frame);
    const Eigen::Vector2d corner = frame.inverse().apply(Eigen::Vector2d::Zero());
    Eigen::MatrixXd A(12, 12);
    for (int c = 0; c < 12; ++c) {
        const auto d = frameDerivatives(atoms[c], corner, 4);
        for (int t = 0; t <= 2; ++t) {
            for (int a = 0; a <= 4 - t; ++a) {
                A(edge_row(t, a), c) = d[t][a];
            }
        }
    }
    const Eigen::VectorXd jet = psiJet(v, patch, frame, j1, j2);
    Eigen::VectorXd rhs(12);
    for (int t = 0; t <= 2; ++t) {
        for (int a = 0; a <= 4 - t; ++a) {
            rhs[edge_row(t, a)] = jet[deriv_index(t, a)];
        }
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.rank() < 12) {
        throw ConstructionError("singular edge interpolation system at vertex " + std::to_string(v) + ", edge " +
                                std::to_string(e));
    }
    const Eigen::VectorXd x = lu.solve(rhs);
    const double res = (A * x - rhs).norm() / (A.norm() * x.norm() + rhs.norm());
    if (res > 1e-12) {
        throw ConstructionError("edge interpolation system at vertex " + std::to_string(v) +
                                " solved with relative residual " + std::to_string(res));
    }
    return x;
}

void C2Space::addFanVertex(int v)
{
    const Vertex& vx = domain_.vertex(v);
    const int nu = vx.valency;
    const bool inner = vx.cls == VertexClass::Inner;
    const double h = spaces_[0].meshSize();

    double normSum = 0.0;
    for (const FanPatch& fp : vx.fan) {
        const Eigen::Vector2d c(fp.corner & 1, fp.corner >> 1);
        const Eigen::Matrix2d J = domain_.patch(fp.patch).derivatives(c, 1).jacobian();
        normSum += Eigen::JacobiSVD<Eigen::Matrix2d>(J).singularValues()[0];
    }
    sigma_[v] = 1.0 / (h / (p_ * nu) * normSum);

    // fan edge l is the first edge of patch l; for open fans edge nu closes the chain
    const int numEdges = inner ? nu : nu + 1;
    std::vector<int> fanEdge(numEdges);
    for (int l = 0; l < nu; ++l) {
        fanEdge[l] = vx.fan[l].firstEdge;
    }
    if (!inner) {
        fanEdge[nu] = vx.fan[nu - 1].secondEdge;
    }

    for (int j1 = 0; j1 <= 4; ++j1) {
        for (int j2 = 0; j1 + j2 <= 4; ++j2) {
            std::vector<Eigen::VectorXd> edgeCoef(numEdges);
            for (int l = 0; l < numEdges; ++l) {
                const int patch = l < nu ? vx.fan[l].patch : vx.fan[nu - 1].patch;
                edgeCoef[l] = vertexEdgeCoefficients(v, fanEdge[l], patch, j1, j2);
            }
            BasisFunction f;
            f.kind = inner ? BasisKind::VertexInner : BasisKind::VertexV3;
            f.entity = v;
            f.j1 = j1;
            f.j2 = j2;
            for (int l = 0; l < nu; ++l) {
                const FanPatch& fp = vx.fan[l];
                std::vector<Term> terms;
                const int el[2] = {l, inner ? (l + 1) % nu : l + 1};
                for (int which : el) {
                    Orientation frame;
                    const std::vector<Atom> atoms = edgeCandidates(v, fanEdge[which], fp.patch, frame);
                    for (int c = 0; c < 12; ++c) {
                        if (edgeCoef[which][c] != 0.0) {
                            terms.push_back({edgeCoef[which][c], atoms[c]});
                        }
                    }
                }
                // subtract the tensor B-splines near the corner counted twice
                Eigen::MatrixXd A(9, 9);
                std::vector<Atom> atoms;
                const Eigen::Vector2d corner(fp.corner & 1, fp.corner >> 1);
                for (int a1 = 0; a1 <= 2; ++a1) {
                    for (int a2 = 0; a2 <= 2; ++a2) {
                        Atom a;
                        a.orient = fp.orient;
                        a.j1 = a1;
                        a.j2 = a2;
                        atoms.push_back(a);
                    }
                }
                const Eigen::VectorXd jet = psiJet(v, fp.patch, fp.orient, j1, j2);
                Eigen::VectorXd rhs(9);
                for (int c = 0; c < 9; ++c) {
                    const auto d = frameDerivatives(atoms[c], corner, 4);
                    for (int m1 = 0; m1 <= 2; ++m1) {
                        for (int m2 = 0; m2 <= 2; ++m2) {
                            A(m1 * 3 + m2, c) = d[m1][m2];
                            rhs[m1 * 3 + m2] = jet[deriv_index(m1, m2)];
                        }
                    }
                }
                const Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
                if (lu.rank() < 9) {
                    throw ConstructionError("singular patch interpolation system at vertex " + std::to_string(v));
                }
                const Eigen::VectorXd x = lu.solve(rhs);
                if ((A * x - rhs).norm() > 1e-12 * (A.norm() * x.norm() + rhs.norm())) {
                    throw ConstructionError("patch interpolation system at vertex " + std::to_string(v) + " is inaccurate");
                }
                for (int c = 0; c < 9; ++c) {
                    if (x[c] != 0.0) {
                        terms.push_back({-x[c], atoms[c]});
                    }
                }
                f.pieces.push_back(makePiece(fp.patch, std::move(terms)));
            }
            functions_.push_back(std::move(f));
        }
    }
}

void C2Space::addValency2Vertex(int v)
{
    const Vertex& vx = domain_.vertex(v);
    int e = -1;
    for (int ed : vx.edges) {
        if (domain_.edge(ed).isInterface) {
            e = ed;
        }
    }
    const GluingData g = domain_.gluing(e, v);
    auto push = [&](int j1, int j2, std::vector<Piece> pieces) {
        BasisFunction f;
        f.kind = BasisKind::VertexV2;
        f.entity = v;
        f.j1 = j1;
        f.j2 = j2;
        f.pieces = std::move(pieces);
        functions_.push_back(std::move(f));
    };
    for (int j1 = 0; j1 <= 2; ++j1) {
        for (int j2 = 0; j2 <= 4 - j1; ++j2) {
            std::vector<Piece> pieces;
            for (int tau = 0; tau < 2; ++tau) {
                pieces.push_back(makePiece(g.side[tau].patch, {Term{1.0, edge_atom(g, tau, j1, j2)}}));
            }
            push(j1, j2, std::move(pieces));
        }
    }
    for (int j1 = 3; j1 <= 4; ++j1) {
        const EdgeSide& side = g.side[j1 - 3];
        for (int j2 = 0; j2 <= 2; ++j2) {
            Atom a;
            a.orient = side.orient;
            a.j1 = 3 + j2 / 2;
            a.j2 = j2 % 2;
            push(j1, j2, {makePiece(side.patch, {Term{1.0, a}})});
        }
    }
}

void C2Space::addValency1Vertex(int v)
{
    const FanPatch& fp = domain_.vertex(v).fan.at(0);
    for (int j1 = 0; j1 <= 4; ++j1) {
        for (int j2 = 0; j1 + j2 <= 4; ++j2) {
            BasisFunction f;
            f.kind = BasisKind::VertexV1;
            f.entity = v;
            f.j1 = j1;
            f.j2 = j2;
            Atom a;
            a.orient = fp.orient;
            a.j1 = j1;
            a.j2 = j2;
            f.pieces.push_back(makePiece(fp.patch, {Term{1.0, a}}));
            functions_.push_back(std::move(f));
        }
    }
}

SmoothnessResidual smoothness_residual(const GluingData& g, double t, const EdgeFrameJet& side0, const EdgeFrameJet& side1)
{
    const EdgeFrameJet* J[2] = {&side0, &side1};
    double g1[2];
    double g2[2];
    double scale = 1.0;
    for (int tau = 0; tau < 2; ++tau) {
        const EdgeFrameJet& j = *J[tau];
        const double al = g.alphaAt(tau, t);
        const double dal = g.alphaSlope(tau);
        const double be = g.betaAt(tau, t);
        const double dbe = g.betaSlope(tau);
        const double d0 = j[0][1];
        const double dd0 = j[0][2];
        const double num = j[1][0] - be * d0;
        g1[tau] = num / al;
        const double dg1 = (j[1][1] - dbe * d0 - be * dd0) / al - dal * num / (al * al);
        g2[tau] = (j[2][0] - be * be * dd0 - 2 * al * be * dg1) / (al * al);
        for (const auto& row : j) {
            for (double x : row) {
                scale = std::max(scale, std::abs(x));
            }
        }
        scale = std::max({scale, std::abs(g1[tau]), std::abs(g2[tau])});
    }
    SmoothnessResidual r;
    r.value = side0[0][0] - side1[0][0];
    r.first = g1[0] - g1[1];
    r.second = g2[0] - g2[1];
    r.scale = scale;
    return r;
}

SmoothnessResidual smoothness_residual(const C2Space& space, int fn, int edge, double t)
{
    const GluingData g = space.domain().gluing(edge);
    EdgeFrameJet jets[2];
    for (int tau = 0; tau < 2; ++tau) {
        const Orientation inv = g.side[tau].orient.inverse();
        const Eigen::Vector2d xi = inv.apply(Eigen::Vector2d(0.0, t));
        const DerivArray d = space.eval(fn, g.side[tau].patch, xi, 2);
        for (int a = 0; a <= 2; ++a) {
            for (int b = 0; b <= 2; ++b) {
                if (a + b > 2) {
                    jets[tau][a][b] = 0.0;
                    continue;
                }
                const auto e = inv.orientedOrders(a, b);
                jets[tau][a][b] = inv.derivativeSign(a, b) * d[deriv_index(e[0], e[1])];
            }
        }
    }
    return smoothness_residual(g, t, jets[0], jets[1]);
}

double vertex_jet_mismatch(const C2Space& space, int fn)
{
    const BasisFunction& f = space.function(fn);
    if (f.kind != BasisKind::VertexInner && f.kind != BasisKind::VertexV3) {
        throw ParameterError("jet check applies to inner and v3 vertex functions only");
    }
    const Vertex& vx = space.domain().vertex(f.entity);
    const double sigma = space.sigma(f.entity);
    double worst = 0.0;
    for (const FanPatch& fp : vx.fan) {
        const Eigen::Vector2d corner(fp.corner & 1, fp.corner >> 1);
        const DerivArray d = space.eval(fn, fp.patch, corner, kJetOrder);
        const Orientation inv = fp.orient.inverse();
        const Jet g = Jet::fromDerivatives([&](int a, int b) {
            const auto e = inv.orientedOrders(a, b);
            return inv.derivativeSign(a, b) * d[deriv_index(e[0], e[1])];
        });
        const JetMap H = invert(patch_jet_map(space.domain().patch(fp.patch), fp.orient, Eigen::Vector2d::Zero()));
        const Jet phys = compose(g, H);
        for (int m1 = 0; m1 <= kJetOrder; ++m1) {
            for (int m2 = 0; m1 + m2 <= kJetOrder; ++m2) {
                const double target = (m1 == f.j1 && m2 == f.j2) ? std::pow(sigma, m1 + m2) : 0.0;
                worst = std::max(worst, std::abs(phys.derivative(m1, m2) - target) / std::pow(sigma, m1 + m2));
            }
        }
    }
    return worst;
}

}  // namespace mpcolloc
