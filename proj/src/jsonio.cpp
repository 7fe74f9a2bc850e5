#include "plasma/jsonio.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "plasma/errors.hpp"

namespace plasma {

std::string format_real(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace {

bool scalar_only(const Json& arr) {
    for (const auto& el : arr)
        if (el.is_object() || el.is_array()) return false;
    return true;
}

void dump_rec(const Json& v, std::string& out, int depth) {
    const auto pad = [&](int d) { out.append(static_cast<std::size_t>(2 * d), ' '); };
    switch (v.type()) {
        case Json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            std::size_t k = 0;
            for (auto it = v.begin(); it != v.end(); ++it, ++k) {
                pad(depth + 1);
                out += Json(it.key()).dump();
                out += ": ";
                dump_rec(it.value(), out, depth + 1);
                if (k + 1 < v.size()) out += ',';
                out += '\n';
            }
            pad(depth);
            out += '}';
            return;
        }
        case Json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            if (scalar_only(v)) {
                out += '[';
                for (std::size_t k = 0; k < v.size(); ++k) {
                    if (k) out += ", ";
                    dump_rec(v[k], out, depth);
                }
                out += ']';
                return;
            }
            out += "[\n";
            for (std::size_t k = 0; k < v.size(); ++k) {
                pad(depth + 1);
                dump_rec(v[k], out, depth + 1);
                if (k + 1 < v.size()) out += ',';
                out += '\n';
            }
            pad(depth);
            out += ']';
            return;
        }
        case Json::value_t::number_float:
            out += format_real(v.get<double>());
            return;
        default:
            // strings, integers, booleans, null render identically everywhere
            out += v.dump();
            return;
    }
}

}  // namespace

std::string dump_json(const Json& doc) {
    std::string out;
    dump_rec(doc, out, 0);
    return out;
}

Json point_json(Point p) { return Json::array({p.x, p.y}); }

Json config_json(const RunConfig& rc) {
    Json c;
    c["domain"] = rc.domain;
    c["grid_n"] = rc.grid_n;
    c["r_factor"] = rc.r_factor;
    c["gamma"] = rc.gamma;
    c["epsilons"] = rc.epsilons;
    if (rc.z1) c["z1"] = point_json(*rc.z1);
    if (rc.z2) c["z2"] = point_json(*rc.z2);
    c["tol"] = rc.tol;
    c["seed"] = rc.seed;
    c["threads"] = rc.threads;
    return c;
}

RunConfig parse_config(const Json& doc) {
    if (!doc.is_object()) throw ValidationError("config must be a JSON object");
    RunConfig rc;
    try {
        rc.domain = doc.value("domain", rc.domain);
        rc.grid_n = doc.value("grid_n", rc.grid_n);
        rc.r_factor = doc.value("r_factor", rc.r_factor);
        rc.gamma = doc.value("gamma", rc.gamma);
        if (doc.contains("epsilons")) rc.epsilons = doc["epsilons"].get<std::vector<double>>();
        if (doc.contains("z1")) rc.z1 = Point{doc["z1"][0].get<double>(), doc["z1"][1].get<double>()};
        if (doc.contains("z2")) rc.z2 = Point{doc["z2"][0].get<double>(), doc["z2"][1].get<double>()};
        rc.tol = doc.value("tol", rc.tol);
        rc.seed = doc.value("seed", rc.seed);
        rc.threads = doc.value("threads", rc.threads);
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("malformed config: ") + e.what());
    }
    if (rc.grid_n < 65) throw ValidationError("grid_n must be at least 65");
    if (!(rc.r_factor > 1.0)) throw ValidationError("r_factor must exceed 1");
    if (!(rc.gamma > 0.0)) throw ValidationError("gamma must be positive");
    for (double e : rc.epsilons)
        if (!(e > 0.0)) throw ValidationError("epsilon must be positive");
    if (!(rc.tol > 0.0)) throw ValidationError("tol must be positive");
    if (rc.threads < 1) throw ValidationError("threads must be at least 1");
    return rc;
}

void write_field_csv(std::ostream& os, const ScalarField& u) {
    const Grid& g = u.dom->grid;
    os << "x,y,value\n";
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (g.unknown[g.idx(i, j)] < 0) continue;
            Point p = g.point(i, j);
            os << format_real(p.x) << ',' << format_real(p.y) << ','
               << format_real(u.at(i, j)) << '\n';
        }
}

void write_contours_csv(std::ostream& os, const std::vector<Contour>& contours) {
    os << "contour,closed,x,y\n";
    for (std::size_t c = 0; c < contours.size(); ++c)
        for (const Point& p : contours[c].points)
            os << c << ',' << (contours[c].closed ? 1 : 0) << ','
               << format_real(p.x) << ',' << format_real(p.y) << '\n';
}

void write_table_csv(std::ostream& os, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
    for (std::size_t k = 0; k < header.size(); ++k)
        os << (k ? "," : "") << header[k];
    os << '\n';
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k)
            os << (k ? "," : "") << format_real(row[k]);
        os << '\n';
    }
}

}  // namespace plasma
