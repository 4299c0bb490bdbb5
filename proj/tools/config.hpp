#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "nevres/weyl.hpp"

namespace nevres::cli {

class SchemaError : public std::runtime_error {
public:
    SchemaError(const std::string& path, const std::string& msg) : std::runtime_error(path + ": " + msg) {}
};

struct SeparatedSpec {
    NevanlinnaPair pair;
    Mat gamma;  // n x 2n, constant
};

struct OracleSpec {
    int function = 0;
    MatrixExpr y;  // d x 1 in t and lam
};

struct ProblemConfig {
    std::string name;
    double a = 0.0, b = 1.0;
    int d = 1, r = 2, s = 0;
    LambdaFamily family;
    std::optional<BoundaryPair> pair;
    std::optional<SeparatedSpec> separated;
    int N = 400, substeps = 4;
    std::vector<cplx> lams;
    std::vector<MatrixExpr> functions;  // d x 1 each
    std::vector<MatrixExpr> null_functions;
    std::vector<OracleSpec> oracles;
    std::vector<std::string> tasks;
    std::map<std::string, double> tol;
    unsigned seed = 1;
    nlohmann::json source;
};

extern const std::vector<std::string> kTaskOrder;

/// Default tolerances, overridden by the config's "tolerances" section.
std::map<std::string, double> default_tolerances();

ProblemConfig parse_config(const nlohmann::json& j);
ProblemConfig load_config(const std::string& path);

/// Number literal or coeff-lang constant text; "pi" is accepted.
double real_constant(const nlohmann::json& v, const std::string& path);

}  // namespace nevres::cli
