#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "plasma/ansatz.hpp"
#include "plasma/errors.hpp"
#include "plasma/greens.hpp"
#include "plasma/jsonio.hpp"
#include "plasma/routh.hpp"
#include "plasma/solver.hpp"
#include "plasma/specfun.hpp"
#include "plasma/sweep.hpp"
#include "plasma/verify.hpp"

using namespace plasma;

namespace {

int env_threads() {
    if (const char* s = std::getenv("PLASMA_PEAKS_THREADS")) {
        int v = std::atoi(s);
        if (v >= 1) return v;
    }
    return 1;
}

Point parse_point(const std::string& s) {
    std::istringstream in(s);
    double x = 0.0, y = 0.0;
    char c = 0;
    if (!(in >> x >> c >> y) || c != ',')
        throw ValidationError("expected a point as x,y; got '" + s + "'");
    std::string rest;
    if (in >> rest) throw ValidationError("trailing text after point '" + s + "'");
    return {x, y};
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ValidationError("bad number '" + item + "' in list '" + s + "'");
        }
    }
    if (out.empty()) throw ValidationError("empty number list '" + s + "'");
    return out;
}

// "disk" gives the unit disk; anything else is read as a JSON file holding
// {"type":"disk","radius":r,"center":[x,y]} or {"type":"curve","points":[[x,y],..]}.
// Resolution always comes from the flags, the file only carries geometry.
DomainModel load_domain(const RunConfig& rc) {
    if (rc.domain == "disk")
        return make_disk_domain({0.0, 0.0}, 1.0, rc.grid_n, rc.r_factor);
    std::ifstream in(rc.domain);
    if (!in) throw ValidationError("cannot open domain file '" + rc.domain + "'");
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::exception& e) {
        throw ValidationError("domain file '" + rc.domain + "' is not valid JSON: " + e.what());
    }
    const std::string type = doc.value("type", "");
    try {
        if (type == "disk") {
            Point c{0.0, 0.0};
            if (doc.contains("center"))
                c = {doc["center"][0].get<double>(), doc["center"][1].get<double>()};
            double r = doc.value("radius", 1.0);
            if (!(r > 0.0)) throw ValidationError("disk radius must be positive");
            return make_disk_domain(c, r, rc.grid_n, rc.r_factor);
        }
        if (type == "curve") {
            std::vector<Point> pts;
            for (const auto& row : doc.at("points"))
                pts.push_back({row[0].get<double>(), row[1].get<double>()});
            return make_curve_domain(pts, rc.grid_n, rc.r_factor);
        }
    } catch (const Json::exception& e) {
        throw ValidationError("malformed domain file '" + rc.domain + "': " + e.what());
    }
    throw ValidationError("domain type must be 'disk' or 'curve', got '" + type + "'");
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::fputs(text.c_str(), stdout);
        return;
    }
    std::ofstream os(out_path);
    if (!os) throw ValidationError("cannot write output file '" + out_path + "'");
    os << text;
}

void emit_json(Json doc, const std::string& out_path) {
    emit(dump_json(doc) + "\n", out_path);
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot write output file '" + path + "'");
    os << text;
}

// shared flags; each subcommand validates through parse_config so the emitted
// config block and the accepted flags stay one contract
struct CommonFlags {
    RunConfig rc;
    std::string out;
    std::string z1s, z2s;

    void add_domain(CLI::App* cmd) {
        cmd->add_option("--domain", rc.domain, "'disk' or a path to a domain JSON file");
        cmd->add_option("--grid-n", rc.grid_n, "nodes along the longer box side");
        cmd->add_option("--r-factor", rc.r_factor, "log normalisation radius over the diameter");
        cmd->add_option("--out", out, "write the result here instead of stdout");
    }
    void add_seeding(CLI::App* cmd) {
        cmd->add_option("--seed", rc.seed, "jitter stream for multistart minimization");
        cmd->add_option("--threads", rc.threads, "parallelism cap");
    }
    RunConfig checked() const { return parse_config(config_json(rc)); }
};

Json levelset_json(const LevelSetReport& rep) {
    Json r;
    r["positive_core_ok"] = rep.positive_core_ok;
    r["negative_core_ok"] = rep.negative_core_ok;
    r["annulus_ok"] = rep.annulus_ok;
    r["radius_inner"] = rep.radius_inner;
    r["radius_outer"] = rep.radius_outer;
    r["radius_pos"] = rep.radius_pos;
    r["radius_neg"] = rep.radius_neg;
    r["nodes_core_pos"] = rep.nodes_core_pos;
    r["nodes_core_neg"] = rep.nodes_core_neg;
    r["t_used"] = rep.t_used;
    r["sigma"] = rep.sigma;
    r["sigma_bound"] = rep.sigma_bound;
    return r;
}

void require_solvable(const DomainModel& dom, double epsilon) {
    if (core_constants().s * epsilon / dom.grid.h < 6.0)
        throw ValidationError(
            "plasma cores span fewer than 6 grid cells at this epsilon; refine "
            "the grid or grow epsilon");
}

int cmd_greens(CommonFlags& cf, const std::string& zs, const std::string& xs, double tflag,
               bool have_t, bool force_grid) {
    RunConfig rc = cf.checked();
    DomainModel dom = load_domain(rc);
    GreensTable tbl = force_grid ? make_greens_table(dom, GreensTable::Method::grid_solve)
                                 : make_greens_table(dom);
    Point z = parse_point(zs);
    Json doc;
    doc["config"] = config_json(rc);
    doc["backend"] = tbl.method == GreensTable::Method::closed_form_disk ? "closed-form"
                                                                         : "grid";
    doc["z"] = point_json(z);
    doc["robin"] = robin(tbl, z);
    if (!xs.empty()) {
        Point x = parse_point(xs);
        doc["x"] = point_json(x);
        doc["greens_value"] = greens_value(tbl, x, z);
        doc["regular_part"] = regular_part(tbl, x, z);
    }
    if (have_t) {
        doc["boundary_t"] = tflag;
        doc["normal_derivative"] = boundary_normal_derivative(tbl, z, tflag);
    }
    emit_json(doc, cf.out);
    return 0;
}

int cmd_harmonic_center(CommonFlags& cf, bool force_grid) {
    RunConfig rc = cf.checked();
    DomainModel dom = load_domain(rc);
    GreensTable tbl = force_grid ? make_greens_table(dom, GreensTable::Method::grid_solve)
                                 : make_greens_table(dom);
    Point c = harmonic_center(tbl);
    Json doc;
    doc["config"] = config_json(rc);
    doc["center"] = point_json(c);
    doc["h_value"] = robin(tbl, c);
    emit_json(doc, cf.out);
    return 0;
}

int cmd_minimize(CommonFlags& cf, int starts) {
    RunConfig rc = cf.checked();
    if (starts < 1) throw ValidationError("starts must be at least 1");
    DomainModel dom = load_domain(rc);
    GreensTable tbl = make_greens_table(dom);
    MinimizeOptions opt;
    opt.starts = starts;
    opt.seed = rc.seed;
    opt.threads = rc.threads;
    MinimizeResult mr = minimize_hamiltonian(tbl, rc.gamma, opt);
    std::array<double, 4> gr = hamiltonian_gradient(tbl, mr.z1, mr.z2, 1.0, rc.gamma);
    double gn = std::sqrt(gr[0] * gr[0] + gr[1] * gr[1] + gr[2] * gr[2] + gr[3] * gr[3]);
    Json doc;
    doc["config"] = config_json(rc);
    doc["z1"] = point_json(mr.z1);
    doc["z2"] = point_json(mr.z2);
    doc["value"] = mr.value;
    doc["gradient_norm"] = gn;
    emit_json(doc, cf.out);
    return 0;
}

int cmd_ansatz(CommonFlags& cf, double epsilon, const std::string& field_csv) {
    cf.rc.epsilons = {epsilon};
    if (!cf.z1s.empty()) cf.rc.z1 = parse_point(cf.z1s);
    if (!cf.z2s.empty()) cf.rc.z2 = parse_point(cf.z2s);
    RunConfig rc = cf.checked();
    if (rc.z1.has_value() != rc.z2.has_value())
        throw ValidationError("give both --z1 and --z2 or neither");
    DomainModel dom = load_domain(rc);
    GreensTable tbl = make_greens_table(dom);
    Point z1, z2;
    if (rc.z1) {
        z1 = *rc.z1;
        z2 = *rc.z2;
    } else {
        MinimizeOptions opt;
        opt.seed = rc.seed;
        opt.threads = rc.threads;
        MinimizeResult mr = minimize_hamiltonian(tbl, rc.gamma, opt);
        z1 = mr.z1;
        z2 = mr.z2;
    }
    Amplitudes amp = solve_amplitudes(tbl, z1, z2, rc.gamma, epsilon);
    ScalarField w = assemble_W(tbl, z1, z2, amp);

    const Grid& g = dom.grid;
    double wmin = 0.0, wmax = 0.0, l2 = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (g.unknown[g.idx(i, j)] < 0) continue;
            double v = w.at(i, j);
            wmin = std::min(wmin, v);
            wmax = std::max(wmax, v);
            l2 += v * v;
        }
    l2 = std::sqrt(l2 * g.h * g.h);

    double T = calibrate_level_T(tbl, z1, z2, amp);
    LevelSetReport rep = verify_level_sets(w, z1, z2, rc.gamma, epsilon, T);
    ErrorTermReport err = error_term(w, z1, z2, rc.gamma, epsilon);
    EnergyExpansion ex = reduced_energy_expansion(tbl, z1, z2, amp);

    Json doc;
    doc["config"] = config_json(rc);
    doc["z1"] = point_json(z1);
    doc["z2"] = point_json(z2);
    doc["a1"] = amp.a1;
    doc["a2"] = amp.a2;
    Json ws;
    ws["min"] = wmin;
    ws["max"] = wmax;
    ws["l2"] = l2;
    doc["W_stats"] = ws;
    doc["levelset_report"] = levelset_json(rep);
    doc["l2_error_term"] = err.l2_norm;
    doc["energy"] = energy(w, rc.gamma, epsilon);
    Json exj;
    exj["value"] = ex.value;
    exj["interaction"] = ex.interaction;
    exj["volume"] = ex.volume;
    exj["quadratic"] = ex.quadratic;
    doc["expansion"] = exj;
    emit_json(doc, cf.out);

    if (!field_csv.empty()) {
        std::ostringstream os;
        write_field_csv(os, w);
        write_file(field_csv, os.str());
    }
    return 0;
}

int cmd_solve(CommonFlags& cf, double epsilon, bool minimize, double tol,
              const std::string& field_csv, const std::string& contours_csv) {
    cf.rc.epsilons = {epsilon};
    cf.rc.tol = tol;
    if (!cf.z1s.empty()) cf.rc.z1 = parse_point(cf.z1s);
    if (!cf.z2s.empty()) cf.rc.z2 = parse_point(cf.z2s);
    RunConfig rc = cf.checked();
    if (rc.z1.has_value() != rc.z2.has_value())
        throw ValidationError("give both --z1 and --z2 or neither");
    if (minimize && rc.z1)
        throw ValidationError("--minimize replaces --z1/--z2; give one or the other");
    DomainModel dom = load_domain(rc);
    require_solvable(dom, epsilon);
    GreensTable tbl = make_greens_table(dom);

    Point z1, z2;
    SolveResult sr;
    if (rc.z1) {
        // explicit pair: solve exactly where the caller asked
        z1 = *rc.z1;
        z2 = *rc.z2;
        sr = solve_pde(tbl, z1, z2, rc.gamma, epsilon, rc.tol);
    } else {
        // seed at the interaction-energy minimizer, settle it to the
        // finite-epsilon equilibrium, then solve with seed registration
        MinimizeOptions opt;
        opt.seed = rc.seed;
        opt.threads = rc.threads;
        MinimizeResult mr = minimize_hamiltonian(tbl, rc.gamma, opt);
        auto [e1, e2] = equilibrate_configuration(tbl, mr.z1, mr.z2, rc.gamma, epsilon);
        z1 = e1;
        z2 = e2;
        sr = solve_pde_aligned(tbl, z1, z2, rc.gamma, epsilon, rc.tol);
    }

    const Grid& g = dom.grid;
    double area_pos = 0.0, area_neg = 0.0;
    for (const Contour& c : sr.free_boundary_pos) area_pos += c.closed ? c.area : 0.0;
    for (const Contour& c : sr.free_boundary_neg) area_neg += c.closed ? c.area : 0.0;

    ScalarField flip = sr.u;
    for (double& v : flip.values) v = -v;

    Json doc;
    doc["config"] = config_json(rc);
    doc["z1"] = point_json(z1);
    doc["z2"] = point_json(z2);
    doc["iterations"] = sr.iterations;
    doc["residual_norm"] = sr.residual_norm;
    doc["correction_norm"] = sr.correction_norm;
    doc["components_pos"] = connected_components(g, sr.plasma_pos);
    doc["components_neg"] = connected_components(g, sr.plasma_neg);
    doc["eps2_lambda1_pos"] = epsilon * epsilon * plasma_eigenvalue(sr.u, epsilon, 1.0);
    doc["eps2_lambda1_neg"] = epsilon * epsilon * plasma_eigenvalue(flip, epsilon, rc.gamma);
    Json areas;
    areas["positive"] = area_pos;
    areas["negative"] = area_neg;
    doc["areas"] = areas;
    emit_json(doc, cf.out);

    if (!field_csv.empty()) {
        std::ostringstream os;
        write_field_csv(os, sr.u);
        write_file(field_csv, os.str());
    }
    if (!contours_csv.empty()) {
        std::vector<Contour> all = sr.free_boundary_pos;
        all.insert(all.end(), sr.free_boundary_neg.begin(), sr.free_boundary_neg.end());
        std::ostringstream os;
        write_contours_csv(os, all);
        write_file(contours_csv, os.str());
    }
    return 0;
}

int cmd_sweep(CommonFlags& cf, const std::string& gammas_arg) {
    RunConfig rc = cf.checked();
    std::vector<double> gammas = parse_list(gammas_arg);
    DomainModel dom = load_domain(rc);
    GreensTable tbl = make_greens_table(dom);
    MinimizeOptions opt;
    opt.seed = rc.seed;
    opt.threads = rc.threads;
    std::vector<SweepRecord> recs = gamma_sweep(tbl, gammas, opt);
    std::vector<std::vector<double>> rows;
    for (const SweepRecord& r : recs) {
        if (!r.minimization_ok)
            throw NumericalError("sweep failed at gamma " + std::to_string(r.gamma) + ": " +
                                 r.note);
        rows.push_back({r.gamma, r.z1.x, r.z1.y, r.z2.x, r.z2.y, r.dist_to_center,
                        r.dist_to_boundary, r.boundary_projection.x, r.boundary_projection.y,
                        r.nu_derivative_at_projection});
    }
    std::ostringstream os;
    write_table_csv(os,
                    {"gamma", "z1_x", "z1_y", "z2_x", "z2_y", "dist_center", "dist_boundary",
                     "nu_extremizer_x", "nu_extremizer_y", "nu_value"},
                    rows);
    emit(os.str(), cf.out);
    return 0;
}

int cmd_verify(CommonFlags& cf, const std::string& suite) {
    VerifyOptions opt;
    opt.suite = suite;
    opt.seed = cf.rc.seed;
    opt.threads = cf.rc.threads;
    std::vector<CheckLine> lines = run_suite(opt);
    emit(render_report(lines), cf.out);
    for (const CheckLine& ln : lines)
        if (!ln.pass) return 1;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-peak free boundary toolkit for the plasma problem"};
    app.require_subcommand(1);

    CommonFlags cf;
    cf.rc.threads = env_threads();

    std::string zs, xs, suite = "all", gammas = "0.5,0.3,0.2,0.1,0.05";
    std::string field_csv, contours_csv;
    double epsilon = 0.04, tflag = 0.0, tol = 1e-10;
    bool force_grid = false, minimize = false;
    int starts = 16;

    CLI::App* greens_cmd = app.add_subcommand("greens", "evaluate the Green data of the domain");
    cf.add_domain(greens_cmd);
    greens_cmd->add_option("--z", zs, "pole x,y")->required();
    greens_cmd->add_option("--x", xs, "evaluation point x,y");
    CLI::Option* topt = greens_cmd->add_option("--boundary-t", tflag,
                                               "boundary parameter in [0,1) for the normal "
                                               "derivative");
    greens_cmd->add_flag("--grid-backend", force_grid, "force the grid backend on a disk");

    CLI::App* hc_cmd = app.add_subcommand("harmonic-center", "locate the Robin minimizer");
    cf.add_domain(hc_cmd);
    hc_cmd->add_flag("--grid-backend", force_grid, "force the grid backend on a disk");

    CLI::App* min_cmd = app.add_subcommand("minimize", "minimize the two-peak interaction energy");
    cf.add_domain(min_cmd);
    cf.add_seeding(min_cmd);
    min_cmd->add_option("--gamma", cf.rc.gamma, "negative peak weight")->required();
    min_cmd->add_option("--starts", starts, "multistart count");

    CLI::App* ans_cmd = app.add_subcommand("ansatz", "assemble and grade the two-peak profile");
    cf.add_domain(ans_cmd);
    cf.add_seeding(ans_cmd);
    ans_cmd->add_option("--gamma", cf.rc.gamma, "negative peak level")->required();
    ans_cmd->add_option("--epsilon", epsilon, "core scale")->required();
    ans_cmd->add_option("--z1", cf.z1s, "positive peak x,y (default: minimizer)");
    ans_cmd->add_option("--z2", cf.z2s, "negative peak x,y");
    ans_cmd->add_option("--field-csv", field_csv, "write the profile nodes as x,y,value");

    CLI::App* solve_cmd = app.add_subcommand("solve", "solve the free boundary problem");
    cf.add_domain(solve_cmd);
    cf.add_seeding(solve_cmd);
    solve_cmd->add_option("--gamma", cf.rc.gamma, "negative peak level")->required();
    solve_cmd->add_option("--epsilon", epsilon, "core scale")->required();
    solve_cmd->add_option("--z1", cf.z1s, "seed the positive peak at x,y");
    solve_cmd->add_option("--z2", cf.z2s, "seed the negative peak at x,y");
    solve_cmd->add_flag("--minimize", minimize,
                        "seed at the equilibrated interaction minimizer (default when no "
                        "pair is given)");
    solve_cmd->add_option("--tol", tol, "nonlinear residual tolerance");
    solve_cmd->add_option("--field-csv", field_csv, "write the solution nodes as x,y,value");
    solve_cmd->add_option("--contours-csv", contours_csv, "write both free boundaries");

    CLI::App* sweep_cmd = app.add_subcommand("sweep-gamma", "track the minimizer as gamma shrinks");
    cf.add_domain(sweep_cmd);
    cf.add_seeding(sweep_cmd);
    sweep_cmd->add_option("--gammas", gammas, "descending comma list in (0, 1]");

    CLI::App* ver_cmd = app.add_subcommand("verify", "run the desk-scale acceptance checks");
    cf.add_domain(ver_cmd);
    cf.add_seeding(ver_cmd);
    ver_cmd->add_option("--suite", suite, "all | disk-oracle | solve | sweep");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    }

    try {
        if (greens_cmd->parsed())
            return cmd_greens(cf, zs, xs, tflag, topt->count() > 0, force_grid);
        if (hc_cmd->parsed()) return cmd_harmonic_center(cf, force_grid);
        if (min_cmd->parsed()) return cmd_minimize(cf, starts);
        if (ans_cmd->parsed()) return cmd_ansatz(cf, epsilon, field_csv);
        if (solve_cmd->parsed())
            return cmd_solve(cf, epsilon, minimize, tol, field_csv, contours_csv);
        if (sweep_cmd->parsed()) return cmd_sweep(cf, gammas);
        if (ver_cmd->parsed()) return cmd_verify(cf, suite);
        std::fprintf(stderr, "usage error: no subcommand\n");
        return 2;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
