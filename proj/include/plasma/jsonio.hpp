#pragma once

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "plasma/field.hpp"
#include "plasma/solver.hpp"

namespace plasma {

// insertion-ordered document type for all emitted results
using Json = nlohmann::ordered_json;

// fixed formatting for every real number that leaves the process: 12
// significant digits, so identical inputs give byte-identical output
std::string format_real(double v);

// deterministic renderer: two-space indent, keys in insertion order, scalar
// arrays inline, reals through format_real
std::string dump_json(const Json& doc);

Json point_json(Point p);

// one parsed command configuration; every subcommand echoes it back under
// the "config" key so results are reproducible from their own output
struct RunConfig {
    std::string domain = "disk";  // "disk" or a path to a domain JSON file
    int grid_n = 257;
    double r_factor = 1.1;
    double gamma = 0.5;
    std::vector<double> epsilons;
    std::optional<Point> z1, z2;
    double tol = 1e-10;
    unsigned int seed = 0;
    int threads = 1;
};

Json config_json(const RunConfig& rc);
// inverse of config_json; throws ValidationError on malformed or
// out-of-range fields (grid_n < 65, r_factor <= 1, gamma <= 0)
RunConfig parse_config(const Json& doc);

// node table x,y,value over the interior unknowns
void write_field_csv(std::ostream& os, const ScalarField& u);
// vertex table contour,closed,x,y
void write_contours_csv(std::ostream& os, const std::vector<Contour>& contours);
void write_table_csv(std::ostream& os, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

}  // namespace plasma
