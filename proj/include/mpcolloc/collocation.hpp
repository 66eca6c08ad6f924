#pragma once

#include "mpcolloc/multipatch.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace mpcolloc {

enum class Strategy { Greville, AllSuperconvergent, ClusteredSuperconvergent };

const char* to_string(Strategy s);

/// Accepts "greville", "all" / "superconvergent", "clustered".
Strategy parse_strategy(const std::string& name);

/// Superconvergent points of S^{p,r} with k inner knots.
struct Superconvergent1D {
    int p = 0;
    int r = 0;
    int k = 0;
    std::vector<double> referenceRoots;  // on [-1,1], per knot span
    std::vector<double> all;             // sorted; knots merged, (5,2) endpoints added
    std::vector<int> omitted;            // 0-based indices into `all` (clustered mode)
    int delta = 0;                       // |all| - dim S^{p,r}
    std::vector<double> points;          // the selected list; (6,2) adds two Greville points
};

/// 0-based omission indices S_k for (5,2) and (6,3); empty for (6,2).
std::vector<int> omission_set(int p, int r, int k);

Superconvergent1D superconvergent_1d(int p, int r, int k, bool clustered);

/// The univariate point list used in both directions of every patch.
std::vector<double> points_1d(int p, int r, int k, Strategy strategy);

/// Tensor grid of points_1d, ordered with xi2 fastest.
std::vector<Eigen::Vector2d> local_points(int p, int r, int k, Strategy strategy);

struct CollocationPoint {
    Eigen::Vector2d x;   // physical location
    int patch = -1;      // owner: smallest patch index containing the point
    Eigen::Vector2d xi;  // parameter on the owner patch
    bool boundary = false;
};

struct CollocationPointSet {
    Strategy strategy = Strategy::Greville;
    int p = 0;
    int r = 0;
    int k = 0;
    std::vector<CollocationPoint> points;
    std::vector<int> inner;
    std::vector<int> boundary;

    int size() const { return static_cast<int>(points.size()); }
};

/// Collects the local grids of all patches. A point on a patch side or corner
/// shared with other patches is kept only by the smallest patch index.
CollocationPointSet assemble_global(const MultiPatchDomain& domain, int p, int r, int k, Strategy strategy);

}  // namespace mpcolloc
