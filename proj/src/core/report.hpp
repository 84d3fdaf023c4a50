#pragma once

#include <string>
#include <vector>

#include "equilibrium.hpp"
#include "fock.hpp"

namespace kms {

struct ReportOptions {
    bool log2 = false;  // present entropies and beta in bits
    Tolerances tol;
};

json report_header(const Instance& inst, const ReportOptions& opt);
json beta_json(const Beta& b, const ReportOptions& opt);
json colors_json(ColorSet F);
ColorSet colors_from_json(const json& j, int N);

json entropy_json(const Instance& inst, const EntropyReport& r, const ReportOptions& opt);
json mfl_entropy_json(const MflEntropy& r, const ReportOptions& opt);
std::string slope_csv(const std::vector<double>& slopes, const ReportOptions& opt);

json simplex_json(const Instance& inst, const TraceSimplexResult& r, const ReportOptions& opt);
json full_simplex_json(const Instance& inst, const FullSimplex& r, const ReportOptions& opt);
json phase_json(const Instance& inst, const PhaseDiagram& d, const ReportOptions& opt);
std::string phase_csv(const Instance& inst, const PhaseDiagram& d, const ReportOptions& opt);
json ground_json(const Instance& inst, const GroundStates& g);

// Handle JSON: {"beta": "log(3)" | 1.09, "components": [{"F": [1], "tau": [...], "w": 1.0}]}
struct StateRequest {
    Beta beta;
    std::vector<StateComponent> components;
};
StateRequest state_request_from_json(const Instance& inst, const json& j);
json state_json(const Instance& inst, const EquilibriumState& s, const ReportOptions& opt);

// Query JSON: {"terms": [{"coef": 1, "diag": [...]}, {"coef": 1, "mu": [[1],[]], "nu": [[1],[]]}]}, symbols 1-based.
MonomialQuery query_from_json(const Instance& inst, const json& j);
MultiWord multiword_from_json(const Instance& inst, const json& j);

json wold_json(const Instance& inst, const WoldDecomposition& w, const ReportOptions& opt);
json identity_json(const IdentityReport& r);
json kms_check_json(const KmsCheck& r);
json oracle_json(const OracleValue& v);

std::string dump(const json& j);

}  // namespace kms
