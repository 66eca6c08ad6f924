// Command-line front end for the C^2 multi-patch collocation solver.
//
// Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical failure.

#include "mpcolloc/analysis.hpp"
#include "mpcolloc/collocation.hpp"
#include "mpcolloc/smoothspace.hpp"
#include "mpcolloc/solver.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

using namespace mpcolloc;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

struct RunConfig {
    std::string domain = "unit-square";
    int p = 5;
    int r = 2;
    std::vector<int> ks;
    std::string strategy = "greville";
    std::string solution = "onepatch";
    std::string out;
    int quadrature = -1;
    int grid = 11;
    int samples = 20;
    double smoothTol = 1e-9;
    double jetTol = 1e-8;
    std::string exportPath;
    std::string valuesPath;
};

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// "-" or empty writes to stdout
class Output {
public:
    explicit Output(const std::string& path)
    {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) {
                throw IoError("cannot open output file '" + path + "'");
            }
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }
    void close(const std::string& path)
    {
        if (file_) {
            file_->close();
            if (!*file_) {
                throw IoError("failed writing '" + path + "'");
            }
        }
    }

private:
    std::unique_ptr<std::ofstream> file_;
};

int single_k(const RunConfig& c)
{
    if (c.ks.size() != 1) {
        throw ParameterError("this command needs exactly one --k value");
    }
    return c.ks.front();
}

std::vector<int> default_levels(int p, int r)
{
    if (p == 5 && r == 2) {
        return {4, 9, 19, 39};
    }
    return {3, 7, 15, 31};
}

int cmd_solve(const RunConfig& c)
{
    const MultiPatchDomain dom = load_domain(c.domain);
    const int k = single_k(c);
    const Strategy strategy = parse_strategy(c.strategy);
    const ManufacturedSolution exact = resolve_solution(c.solution);
    check_space_parameters(c.p, c.r, k);
    if (c.grid < 2) {
        throw ParameterError("--grid needs at least 2 samples per direction");
    }

    const C2Space space(dom, c.p, c.r, k);
    const CollocationPointSet pts = assemble_global(dom, c.p, c.r, k, strategy);
    const CollocationSystem sys = assemble(space, pts, exact.interiorData(), exact.boundaryData());
    const Solution sol = solve_two_stage(space, sys);
    const ErrorNorms n = error_norms(sol, exact, c.quadrature > 0 ? c.quadrature : c.p + 2);

    std::cout << "domain " << dom.name() << ", (p,r) = (" << c.p << "," << c.r << "), k = " << k << ", points "
              << to_string(strategy) << "\n"
              << "dim " << space.dim() << ", collocation points " << pts.size() << " (" << pts.inner.size()
              << " inner, " << pts.boundary.size() << " boundary)\n"
              << "least squares: " << least_squares_backend() << "\n"
              << "boundary residual " << fmt(sol.boundaryResidual) << ", interior residual "
              << fmt(sol.interiorResidual) << ", dependent boundary traces " << sol.boundaryNullity << "\n"
              << "coefficients: max |c| " << fmt(sol.coef.cwiseAbs().maxCoeff()) << ", |c|_2 " << fmt(sol.coef.norm())
              << "\n"
              << "relative errors: L2 " << fmt(n.relL2) << ", H1 " << fmt(n.relH1) << ", H2 " << fmt(n.relH2) << "\n";

    const std::string path = c.out.empty() ? "solution.csv" : c.out;
    Output out(path);
    std::ostream& os = out.stream();
    os << "patch,xi1,xi2,x,y,uh,u,error\n";
    for (int pi = 0; pi < dom.numPatches(); ++pi) {
        for (int i = 0; i < c.grid; ++i) {
            for (int j = 0; j < c.grid; ++j) {
                const Eigen::Vector2d xi(double(i) / (c.grid - 1), double(j) / (c.grid - 1));
                const Eigen::Vector2d x = dom.patch(pi).eval(xi);
                const double uh = evaluate_solution(sol, pi, xi).value;
                const double u = exact.u(x);
                os << pi << ',' << fmt(xi.x()) << ',' << fmt(xi.y()) << ',' << fmt(x.x()) << ',' << fmt(x.y()) << ','
                   << fmt(uh) << ',' << fmt(u) << ',' << fmt(uh - u) << '\n';
            }
        }
    }
    out.close(path);
    if (path != "-") {
        std::cout << "samples written to " << path << "\n";
    }
    return 0;
}

int cmd_study(const RunConfig& c)
{
    const MultiPatchDomain dom = load_domain(c.domain);
    const Strategy strategy = parse_strategy(c.strategy);
    const ManufacturedSolution exact = resolve_solution(c.solution);
    const std::vector<int> ks = c.ks.empty() ? default_levels(c.p, c.r) : c.ks;

    StudyOptions opts;
    opts.quadrature = c.quadrature;
    opts.progress = [](const StudyLevel& l) {
        std::cerr << "k = " << l.k << ": ndof " << l.ndof << ", relL2 " << l.norms.relL2 << ", relH1 "
                  << l.norms.relH1 << ", relH2 " << l.norms.relH2 << " (" << l.seconds << " s)\n";
    };
    // opened first so an unwritable path fails before any solve
    Output out(c.out);
    const ErrorReport rep = convergence_study(dom, c.p, c.r, strategy, ks, exact, opts);
    write_report_csv(out.stream(), {rep});
    out.close(c.out);
    if (rep.levels.size() >= 2) {
        const auto f = rep.fittedRates(3);
        std::cerr << "fitted rates (last " << std::min<std::size_t>(3, rep.levels.size()) << " levels): L2 " << f[0]
                  << ", H1 " << f[1] << ", H2 " << f[2] << "\n";
    }
    return 0;
}

int cmd_points(const RunConfig& c)
{
    const MultiPatchDomain dom = load_domain(c.domain);
    const int k = single_k(c);
    const Strategy strategy = parse_strategy(c.strategy);
    check_space_parameters(c.p, c.r, k);
    const CollocationPointSet pts = assemble_global(dom, c.p, c.r, k, strategy);

    Output out(c.out);
    std::ostream& os = out.stream();
    os << "x,y,patch,xi1,xi2,kind\n";
    for (const CollocationPoint& pt : pts.points) {
        os << fmt(pt.x.x()) << ',' << fmt(pt.x.y()) << ',' << pt.patch << ',' << fmt(pt.xi.x()) << ','
           << fmt(pt.xi.y()) << ',' << (pt.boundary ? "boundary" : "inner") << '\n';
    }
    out.close(c.out);
    std::cerr << pts.size() << " points (" << pts.inner.size() << " inner, " << pts.boundary.size()
              << " boundary)\n";
    return 0;
}

int cmd_basis(const RunConfig& c)
{
    const MultiPatchDomain dom = load_domain(c.domain);
    const int k = single_k(c);
    check_space_parameters(c.p, c.r, k);
    const C2Space space(dom, c.p, c.r, k);
    const long long formula = dimension_formula(dom, c.p, c.r, k);

    std::cout << "domain " << dom.name() << ", (p,r) = (" << c.p << "," << c.r << "), k = " << k << "\n"
              << "patches " << dom.numPatches() << ", interfaces " << dom.numInterfaces() << ", boundary edges "
              << dom.numBoundaryEdges() << "\n";
    for (const auto& [kind, count] : space.countByKind()) {
        std::cout << "  " << to_string(kind) << ": " << count << "\n";
    }
    std::cout << "dim = " << space.dim() << "\n"
              << "closed form = " << formula << "\n"
              << "closed-form check: " << (formula == space.dim() ? "PASS" : "FAIL") << "\n";

    if (!c.valuesPath.empty()) {
        if (c.grid < 2) {
            throw ParameterError("--grid needs at least 2 samples per direction");
        }
        Output out(c.valuesPath);
        std::ostream& os = out.stream();
        os << "function,kind,patch,xi1,xi2,x,y,value\n";
        for (int fn = 0; fn < space.dim(); ++fn) {
            for (const Piece& piece : space.function(fn).pieces) {
                for (int i = 0; i < c.grid; ++i) {
                    for (int j = 0; j < c.grid; ++j) {
                        const Eigen::Vector2d xi(double(i) / (c.grid - 1), double(j) / (c.grid - 1));
                        const Eigen::Vector2d x = dom.patch(piece.patch).eval(xi);
                        os << fn << ',' << to_string(space.function(fn).kind) << ',' << piece.patch << ','
                           << fmt(xi.x()) << ',' << fmt(xi.y()) << ',' << fmt(x.x()) << ',' << fmt(x.y()) << ','
                           << fmt(space.eval(fn, piece.patch, xi, 0, 0)) << '\n';
                    }
                }
            }
        }
        out.close(c.valuesPath);
    }
    return formula == space.dim() ? 0 : kExitNumerical;
}

int cmd_check_smoothness(const RunConfig& c)
{
    const MultiPatchDomain dom = load_domain(c.domain);
    const int k = single_k(c);
    check_space_parameters(c.p, c.r, k);
    if (c.samples < 1) {
        throw ParameterError("--samples must be positive");
    }
    const C2Space space(dom, c.p, c.r, k);
    bool ok = true;

    std::cout << "interface smoothness (" << c.samples << " points per interface, tolerance " << c.smoothTol
              << " relative)\n";
    for (int e = 0; e < static_cast<int>(dom.edges().size()); ++e) {
        if (!dom.edge(e).isInterface) {
            continue;
        }
        const int pa = dom.edge(e).sides[0].patch;
        const int pb = dom.edge(e).sides[1].patch;
        double maxAbs = 0.0;
        double maxRel = 0.0;
        for (int fn = 0; fn < space.dim(); ++fn) {
            if (!space.function(fn).pieceOn(pa) && !space.function(fn).pieceOn(pb)) {
                continue;
            }
            for (int s = 0; s < c.samples; ++s) {
                const double t = (s + 0.5) / c.samples;
                const SmoothnessResidual res = smoothness_residual(space, fn, e, t);
                maxAbs = std::max(maxAbs, res.maxAbs());
                maxRel = std::max(maxRel, res.maxRelative());
            }
        }
        ok = ok && maxRel <= c.smoothTol;
        std::cout << "  edge " << e << " (patches " << pa << "," << pb << "): max abs " << maxAbs << ", max rel "
                  << maxRel << (maxRel <= c.smoothTol ? "" : "  FAIL") << "\n";
    }

    std::cout << "vertex jets (orders <= 4, tolerance " << c.jetTol << " relative)\n";
    for (int v = 0; v < static_cast<int>(dom.vertices().size()); ++v) {
        const VertexClass cls = dom.vertex(v).cls;
        if (cls != VertexClass::Inner && cls != VertexClass::Boundary3) {
            continue;
        }
        double worst = 0.0;
        int count = 0;
        for (int fn = 0; fn < space.dim(); ++fn) {
            const BasisFunction& bf = space.function(fn);
            if ((bf.kind == BasisKind::VertexInner || bf.kind == BasisKind::VertexV3) && bf.entity == v) {
                worst = std::max(worst, vertex_jet_mismatch(space, fn));
                ++count;
            }
        }
        ok = ok && worst <= c.jetTol;
        std::cout << "  vertex " << v << " (" << to_string(cls) << ", valency " << dom.vertex(v).valency << ", "
                  << count << " functions): max mismatch " << worst << (worst <= c.jetTol ? "" : "  FAIL") << "\n";
    }
    std::cout << "smoothness audit: " << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? 0 : kExitNumerical;
}

int cmd_domains(const RunConfig& c, bool domainGiven)
{
    if (!domainGiven) {
        for (const auto& name : builtin_domain_names()) {
            std::cout << name << "\n";
        }
        std::cout << "pinwheel-<nu> accepts any nu >= 3\n";
        return 0;
    }
    const MultiPatchDomain dom = load_domain(c.domain);
    std::cout << "domain " << dom.name() << "\n"
              << "patches " << dom.numPatches() << ", interfaces " << dom.numInterfaces() << ", boundary edges "
              << dom.numBoundaryEdges() << "\n"
              << "vertices: inner " << dom.countVertices(VertexClass::Inner) << ", v1 "
              << dom.countVertices(VertexClass::Boundary1) << ", v2 " << dom.countVertices(VertexClass::Boundary2)
              << ", v3 " << dom.countVertices(VertexClass::Boundary3) << "\n";
    if (!c.exportPath.empty()) {
        Output out(c.exportPath);
        out.stream() << domain_to_json(dom) << "\n";
        out.close(c.exportPath);
    }
    return 0;
}

void error_line(const char* cls, const std::string& msg)
{
    std::cerr << "error: " << cls << ": " << msg << "\n";
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"C^2-smooth multi-patch isogeometric collocation for the Poisson equation"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "INI/TOML file with one [subcommand] section; command-line flags override it");

    RunConfig c;
    auto common = [&c](CLI::App* sub, bool space, bool levels) {
        sub->add_option("--domain", c.domain, "built-in name or domain JSON file")->capture_default_str();
        if (space) {
            sub->add_option("--p", c.p, "spline degree")->capture_default_str();
            sub->add_option("--r", c.r, "spline regularity")->capture_default_str();
            sub->add_option("--k", c.ks, levels ? "inner knot counts, one per level" : "number of inner knots")
                ->delimiter(',')
                ->required(!levels);
        }
    };

    CLI::App* solve = app.add_subcommand("solve", "solve one problem and write a sampled solution CSV");
    common(solve, true, false);
    solve->add_option("--points,--strategy", c.strategy, "greville, all or clustered")->capture_default_str();
    solve->add_option("--solution", c.solution, "catalog name (onepatch, ua, ub, uc, ud) or expression in x1, x2")
        ->capture_default_str();
    solve->add_option("--out", c.out, "sample CSV path (default solution.csv, - for stdout)");
    solve->add_option("--grid", c.grid, "samples per direction per patch")->capture_default_str();
    solve->add_option("--quad", c.quadrature, "Gauss points per span (default p+2)");

    CLI::App* study = app.add_subcommand("study", "convergence study, report CSV");
    common(study, true, true);
    study->add_option("--points,--strategy", c.strategy, "greville, all or clustered")->capture_default_str();
    study->add_option("--solution", c.solution, "catalog name or expression")->capture_default_str();
    study->add_option("--out", c.out, "report CSV path (default stdout)");
    study->add_option("--quad", c.quadrature, "Gauss points per span (default p+2)");

    CLI::App* points = app.add_subcommand("points", "dump the global collocation points as CSV");
    common(points, true, false);
    points->add_option("--points,--strategy", c.strategy, "greville, all or clustered")->capture_default_str();
    points->add_option("--out", c.out, "CSV path (default stdout)");

    CLI::App* basis = app.add_subcommand("basis", "basis counts and closed-form dimension check");
    common(basis, true, false);
    basis->add_option("--values", c.valuesPath, "optional CSV of sampled basis values");
    basis->add_option("--grid", c.grid, "samples per direction per patch for --values")->capture_default_str();

    CLI::App* smooth = app.add_subcommand("check-smoothness", "interface residuals and vertex jet audit");
    common(smooth, true, false);
    smooth->add_option("--samples", c.samples, "points per interface")->capture_default_str();
    smooth->add_option("--tol", c.smoothTol, "relative interface tolerance")->capture_default_str();
    smooth->add_option("--jet-tol", c.jetTol, "relative vertex jet tolerance")->capture_default_str();

    CLI::App* domains = app.add_subcommand("domains", "list built-in domains or describe one");
    CLI::Option* domOpt = domains->add_option("--domain", c.domain, "built-in name or domain JSON file");
    domains->add_option("--export", c.exportPath, "write the domain as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        error_line("config", e.what());
        return kExitConfig;
    }

    try {
        if (*solve) {
            return cmd_solve(c);
        }
        if (*study) {
            return cmd_study(c);
        }
        if (*points) {
            return cmd_points(c);
        }
        if (*basis) {
            return cmd_basis(c);
        }
        if (*smooth) {
            return cmd_check_smoothness(c);
        }
        return cmd_domains(c, domOpt->count() > 0);
    } catch (const IoError& e) {
        error_line("io", e.what());
        return kExitIo;
    } catch (const ParameterError& e) {
        error_line("config", e.what());
        return kExitConfig;
    } catch (const TopologyError& e) {
        error_line("config", e.what());
        return kExitConfig;
    } catch (const ExpressionError& e) {
        error_line("config", e.what());
        return kExitConfig;
    } catch (const NumericalError& e) {
        error_line("numerical", e.what());
        return kExitNumerical;
    } catch (const ConstructionError& e) {
        error_line("numerical", e.what());
        return kExitNumerical;
    } catch (const DomainError& e) {
        error_line("numerical", e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        error_line("internal", e.what());
        return kExitNumerical;
    }
}
