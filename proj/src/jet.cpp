#include "mpcolloc/jet.hpp"

#include <stdexcept>

namespace mpcolloc {

Jet compose(const Jet& outer, const JetMap& inner)
{
    // Horner-free evaluation: accumulate powers x1^a x2^b incrementally.
    std::array<Jet, kJetOrder + 1> pow1;
    std::array<Jet, kJetOrder + 1> pow2;
    pow1[0] = Jet::constant(1.0);
    pow2[0] = Jet::constant(1.0);
    for (int m = 1; m <= kJetOrder; ++m) {
        pow1[m] = pow1[m - 1] * inner.comp[0];
        pow2[m] = pow2[m - 1] * inner.comp[1];
    }
    Jet out;
    for (int a = 0; a <= kJetOrder; ++a) {
        for (int b = 0; a + b <= kJetOrder; ++b) {
            const double c = outer.coeff(a, b);
            if (c != 0.0) {
                out += (pow1[a] * pow2[b]) * c;
            }
        }
    }
    return out;
}

JetMap invert(const JetMap& map)
{
    Eigen::Matrix2d lin;
    lin << map.comp[0].coeff(1, 0), map.comp[0].coeff(0, 1), map.comp[1].coeff(1, 0), map.comp[1].coeff(0, 1);
    if (std::abs(lin.determinant()) < 1e-300) {
        throw std::domain_error("cannot invert a jet map with singular linear part");
    }
    const Eigen::Matrix2d linInv = lin.inverse();

    // Nonlinear remainder of the forward map.
    JetMap nonlinear = map;
    for (auto& c : nonlinear.comp) {
        c.coeff(0, 0) = 0.0;
        c.coeff(1, 0) = 0.0;
        c.coeff(0, 1) = 0.0;
    }

    // Fixed point H = L^{-1}(x - N(H)); each sweep fixes one more degree.
    const Jet x1 = Jet::variable(0);
    const Jet x2 = Jet::variable(1);
    JetMap h;
    h.comp[0] = x1 * linInv(0, 0) + x2 * linInv(0, 1);
    h.comp[1] = x1 * linInv(1, 0) + x2 * linInv(1, 1);
    for (int sweep = 1; sweep < kJetOrder; ++sweep) {
        const Jet n1 = compose(nonlinear.comp[0], h);
        const Jet n2 = compose(nonlinear.comp[1], h);
        const Jet r1 = x1 - n1;
        const Jet r2 = x2 - n2;
        h.comp[0] = r1 * linInv(0, 0) + r2 * linInv(0, 1);
        h.comp[1] = r1 * linInv(1, 0) + r2 * linInv(1, 1);
    }
    return h;
}

}  // namespace mpcolloc
