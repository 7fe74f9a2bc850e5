#pragma once

#include <string>
#include <vector>

namespace plasma {

// One verification check: stable id, short name, verdict, and a detail string
// carrying the measured numbers that back the verdict.
struct CheckLine {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifyOptions {
    std::string suite = "all";  // all | disk-oracle | solve | sweep
    unsigned int seed = 0;
    int threads = 1;
};

// Runs the requested checks on the desk-scale disk instance and returns one
// line per check. Suite "all" additionally reruns every check from scratch and
// grades the two rendered reports for byte equality, so the determinism line
// reflects a genuine second pass, not a cached one.
std::vector<CheckLine> run_suite(const VerifyOptions& opt);

// Fixed-format text report, one line per check plus a tally line.
std::string render_report(const std::vector<CheckLine>& lines);

}  // namespace plasma
