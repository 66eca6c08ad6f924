#include "mpcolloc/multipatch.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <regex>
#include <sstream>

namespace mpcolloc {

namespace {

using json = nlohmann::json;

// Bicubic C^2 three-patch geometry with h = 1/4, control points c_{j1,j2}.
const double kThreePatch[3 * 49][2] = {
    // patch 1, rows j1 = 0..6
    {17.0 / 3, 2.0}, {853.0 / 144, 169.0 / 84}, {103.0 / 16, 57.0 / 28}, {173.0 / 24, 29.0 / 14}, {383.0 / 48, 59.0 / 28}, {1223.0 / 144, 179.0 / 84}, {35.0 / 4, 15.0 / 7},
    {101.0 / 18, 11.0 / 6}, {10163.0 / 1728, 1859.0 / 1008}, {411.0 / 64, 209.0 / 112}, {2083.0 / 288, 319.0 / 168}, {4633.0 / 576, 649.0 / 336}, {14833.0 / 1728, 1969.0 / 1008}, {425.0 / 48, 55.0 / 28},
    {11.0 / 2, 3.0 / 2}, {371.0 / 64, 169.0 / 112}, {409.0 / 64, 171.0 / 112}, {233.0 / 32, 87.0 / 56}, {523.0 / 64, 177.0 / 112}, {561.0 / 64, 179.0 / 112}, {145.0 / 16, 45.0 / 28},
    {16.0 / 3, 1.0}, {1633.0 / 288, 169.0 / 168}, {203.0 / 32, 57.0 / 56}, {37.0 / 5, 99.0 / 100}, {849.0 / 100, 103.0 / 100}, {923.0 / 100, 57.0 / 50}, {48.0 / 5, 121.0 / 100},
    {31.0 / 6, 1.0 / 2}, {3193.0 / 576, 169.0 / 336}, {403.0 / 64, 57.0 / 112}, {749.0 / 100, 8.0 / 25}, {873.0 / 100, 29.0 / 100}, {961.0 / 100, 27.0 / 50}, {251.0 / 25, 13.0 / 20},
    {91.0 / 18, 1.0 / 6}, {9433.0 / 1728, 169.0 / 1008}, {401.0 / 64, 19.0 / 112}, {15.0 / 2, -21.0 / 100}, {437.0 / 50, -12.0 / 25}, {961.0 / 100, -6.0 / 25}, {201.0 / 20, -1.0 / 14},
    {5.0, 0.0}, {65.0 / 12, 0.0}, {25.0 / 4, 0.0}, {15.0 / 2, -12.0 / 25}, {35.0 / 4, -21.0 / 25}, {115.0 / 12, -2.0 / 3}, {10.0, -1.0 / 2},
    // patch 2, rows j1 = 0..6
    {17.0 / 3, 2.0}, {50.0 / 9, 13.0 / 6}, {16.0 / 3, 5.0 / 2}, {5.0, 3.0}, {14.0 / 3, 7.0 / 2}, {40.0 / 9, 23.0 / 6}, {13.0 / 3, 4.0},
    {853.0 / 144, 169.0 / 84}, {10033.0 / 1728, 2209.0 / 1008}, {3209.0 / 576, 857.0 / 336}, {167.0 / 32, 173.0 / 56}, {2803.0 / 576, 1219.0 / 336}, {8003.0 / 1728, 4019.0 / 1008}, {325.0 / 72, 25.0 / 6},
    {103.0 / 16, 57.0 / 28}, {1211.0 / 192, 251.0 / 112}, {387.0 / 64, 297.0 / 112}, {181.0 / 32, 183.0 / 56}, {337.0 / 64, 435.0 / 112}, {961.0 / 192, 481.0 / 112}, {39.0 / 8, 9.0 / 2},
    {173.0 / 24, 29.0 / 14}, {2033.0 / 288, 389.0 / 168}, {649.0 / 96, 157.0 / 56}, {127.0 / 20, 359.0 / 100}, {587.0 / 100, 441.0 / 100}, {109.0 / 20, 99.0 / 20}, {523.0 / 100, 523.0 / 100},
    {383.0 / 48, 59.0 / 28}, {4499.0 / 576, 803.0 / 336}, {1435.0 / 192, 331.0 / 112}, {178.0 / 25, 391.0 / 100}, {661.0 / 100, 49.0 / 10}, {597.0 / 100, 279.0 / 50}, {142.0 / 25, 591.0 / 100},
    {1223.0 / 144, 179.0 / 84}, {14363.0 / 1728, 2459.0 / 1008}, {4579.0 / 576, 1027.0 / 336}, {769.0 / 100, 409.0 / 100}, {73.0 / 10, 257.0 / 50}, {33.0 / 5, 583.0 / 100}, {31.0 / 5, 37.0 / 6},
    {35.0 / 4, 15.0 / 7}, {137.0 / 16, 69.0 / 28}, {131.0 / 16, 87.0 / 28}, {799.0 / 100, 209.0 / 50}, {763.0 / 100, 263.0 / 50}, {111.0 / 16, 83.0 / 14}, {13.0 / 2, 25.0 / 4},
    // patch 3, rows j1 = 0..6
    {17.0 / 3, 2.0}, {101.0 / 18, 11.0 / 6}, {11.0 / 2, 3.0 / 2}, {16.0 / 3, 1.0}, {31.0 / 6, 1.0 / 2}, {91.0 / 18, 1.0 / 6}, {5.0, 0.0},
    {50.0 / 9, 13.0 / 6}, {2365.0 / 432, 143.0 / 72}, {85.0 / 16, 13.0 / 8}, {365.0 / 72, 13.0 / 12}, {695.0 / 144, 13.0 / 24}, {2015.0 / 432, 13.0 / 72}, {55.0 / 12, 0.0},
    {16.0 / 3, 5.0 / 2}, {749.0 / 144, 55.0 / 24}, {79.0 / 16, 15.0 / 8}, {109.0 / 24, 5.0 / 4}, {199.0 / 48, 5.0 / 8}, {559.0 / 144, 5.0 / 24}, {15.0 / 4, 0.0},
    {5.0, 3.0}, {115.0 / 24, 11.0 / 4}, {35.0 / 8, 9.0 / 4}, {19.0 / 5, 43.0 / 25}, {83.0 / 25, 117.0 / 100}, {153.0 / 50, 7.0 / 10}, {59.0 / 20, 9.0 / 20},
    {14.0 / 3, 7.0 / 2}, {631.0 / 144, 77.0 / 24}, {61.0 / 16, 21.0 / 8}, {61.0 / 20, 227.0 / 100}, {123.0 / 50, 181.0 / 100}, {113.0 / 50, 6.0 / 5}, {43.0 / 20, 9.0 / 10},
    {40.0 / 9, 23.0 / 6}, {1775.0 / 432, 253.0 / 72}, {55.0 / 16, 23.0 / 8}, {251.0 / 100, 263.0 / 100}, {7.0 / 4, 113.0 / 50}, {151.0 / 100, 149.0 / 100}, {17.0 / 12, 1.0},
    {13.0 / 3, 4.0}, {143.0 / 36, 11.0 / 3}, {13.0 / 4, 3.0}, {56.0 / 25, 141.0 / 50}, {141.0 / 100, 247.0 / 100}, {10.0 / 9, 19.0 / 12}, {1.0, 1.0},
};

Patch quad(Eigen::Vector2d a, Eigen::Vector2d b, Eigen::Vector2d c, Eigen::Vector2d d)
{
    return Patch::bilinear({a, b, c, d});
}

MultiPatchDomain pinwheel(int nu)
{
    if (nu < 3) {
        throw ParameterError("pinwheel needs at least 3 patches, got " + std::to_string(nu));
    }
    std::vector<Patch> patches;
    const double pi = std::numbers::pi;
    for (int l = 0; l < nu; ++l) {
        const double t0 = 2 * pi * l / nu;
        const double t1 = 2 * pi * (l + 1) / nu;
        const double tm = 0.5 * (t0 + t1);
        patches.push_back(quad({0.0, 0.0}, {std::cos(t0), std::sin(t0)}, {std::cos(t1), std::sin(t1)},
                               {2 * std::cos(tm), 2 * std::sin(tm)}));
    }
    MultiPatchDomain d = build_topology(std::move(patches));
    d.setName("pinwheel-" + std::to_string(nu));
    return d;
}

Eigen::Vector2d point_from_json(const json& j)
{
    if (!j.is_array() || j.size() != 2) {
        throw ParameterError("a point must be a pair [x, y]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

std::vector<std::string> builtin_domain_names()
{
    return {"unit-square", "two-patch-strip", "pinwheel-3", "pinwheel-5", "pinwheel-6", "appendix-three-patch"};
}

MultiPatchDomain builtin_domain(const std::string& name)
{
    static const std::regex pin(R"(pinwheel[-(]?(\d+)\)?)");
    std::smatch m;
    if (std::regex_match(name, m, pin)) {
        return pinwheel(std::stoi(m[1]));
    }
    MultiPatchDomain d;
    if (name == "unit-square") {
        d = build_topology({quad({0, 0}, {1, 0}, {0, 1}, {1, 1})});
    } else if (name == "two-patch-strip") {
        d = build_topology({quad({0, 0}, {1, 0}, {0, 1}, {1, 1}), quad({-1, 0}, {0, 0}, {-1, 1}, {0, 1})});
    } else if (name == "appendix-three-patch") {
        const SplineSpace1D cubic(3, 2, 3);
        std::vector<Patch> patches;
        for (int i = 0; i < 3; ++i) {
            std::vector<Eigen::Vector2d> pts;
            for (int j = 0; j < 49; ++j) {
                pts.emplace_back(kThreePatch[49 * i + j][0], kThreePatch[49 * i + j][1]);
            }
            patches.push_back(Patch::spline(cubic, std::move(pts)));
        }
        d = build_topology(std::move(patches));
    } else {
        throw ParameterError("unknown built-in domain '" + name + "'");
    }
    d.setName(name);
    return d;
}

MultiPatchDomain parse_domain_json(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParameterError(std::string("domain file is not valid JSON: ") + e.what());
    }
    if (!doc.contains("patches") || !doc["patches"].is_array() || doc["patches"].empty()) {
        throw ParameterError("domain file needs a nonempty 'patches' list");
    }
    std::vector<Patch> patches;
    try {
        for (const json& p : doc["patches"]) {
            if (p.contains("corners")) {
                const json& c = p["corners"];
                if (!c.is_array() || c.size() != 4) {
                    throw ParameterError("'corners' needs 4 points");
                }
                patches.push_back(quad(point_from_json(c[0]), point_from_json(c[1]), point_from_json(c[2]), point_from_json(c[3])));
            } else if (p.contains("control_net")) {
                const json& c = p["control_net"];
                const SplineSpace1D s(c.at("p").get<int>(), c.at("r").get<int>(), c.at("k").get<int>());
                std::vector<Eigen::Vector2d> pts;
                for (const json& q : c.at("points")) {
                    pts.push_back(point_from_json(q));
                }
                patches.push_back(Patch::spline(s, std::move(pts)));
            } else {
                throw ParameterError("each patch needs 'corners' or 'control_net'");
            }
        }
    } catch (const json::exception& e) {
        throw ParameterError(std::string("malformed patch entry: ") + e.what());
    }
    MultiPatchDomain d = build_topology(std::move(patches));
    d.setName(doc.value("name", std::string("custom")));
    return d;
}

MultiPatchDomain load_domain(const std::string& pathOrBuiltin)
{
    try {
        return builtin_domain(pathOrBuiltin);
    } catch (const ParameterError&) {
        // not a built-in name; fall through to the file system
    }
    std::ifstream in(pathOrBuiltin);
    if (!in) {
        throw IoError("cannot open domain file '" + pathOrBuiltin + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_domain_json(ss.str());
}

std::string domain_to_json(const MultiPatchDomain& domain)
{
    json doc;
    doc["name"] = domain.name();
    doc["patches"] = json::array();
    for (const Patch& p : domain.patches()) {
        json entry;
        if (p.isBilinear()) {
            for (int c = 0; c < 4; ++c) {
                entry["corners"].push_back({p.corner(c).x(), p.corner(c).y()});
            }
        } else {
            const SplineSpace1D& s = *p.splineSpace();
            json net{{"p", s.degree()}, {"r", s.regularity()}, {"k", s.innerKnots()}, {"points", json::array()}};
            for (const auto& q : p.controlPoints()) {
                net["points"].push_back({q.x(), q.y()});
            }
            entry["control_net"] = net;
        }
        doc["patches"].push_back(entry);
    }
    return doc.dump(2);
}

}  // namespace mpcolloc
