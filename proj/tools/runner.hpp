#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"

namespace nevres::cli {

struct TaskRecord {
    std::string task;
    bool pass = true;
    std::map<std::string, double> residuals;
    std::string error;
    double seconds = 0.0;
};

struct Curve {
    int lam_index = 0, f_index = 0;
    cplx lam;
    std::vector<double> t;
    std::vector<Vec> y1;
};

struct Report {
    std::string name, digest;
    unsigned seed = 0;
    int N = 0, substeps = 0;
    std::vector<cplx> lams;
    std::vector<TaskRecord> tasks;
    std::vector<Curve> curves;
    bool ok() const;
};

struct RunOptions {
    int jobs = 1;
};

Report run(const ProblemConfig& cfg, const RunOptions& opt);

/// Report as JSON text with every float printed to 17 significant digits.
std::string structured(const Report& rep, bool timing);
void write_curve(std::ostream& out, const Curve& c);
std::string summary_table(const Report& rep);

}  // namespace nevres::cli
