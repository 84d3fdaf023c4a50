#pragma once

#include <string>
#include <vector>

#include "entropy.hpp"
#include "model.hpp"

namespace kms {

struct TraceSimplexResult {
    Beta beta;
    ColorSet F = 0;
    std::vector<std::vector<double>> extreme_points;
    int dim = -1;  // affine dimension, -1 when empty
    bool empty = true;
    bool exact = false;  // vertices computed in rational arithmetic
    std::vector<bool> filtered;    // coordinates forced to vanish by the ideal filters
    std::vector<bool> admissible;  // vertices passing the convergence certificate
    std::vector<int> eigen_colors;
    double eigenvalue = 0.0;
    double max_residual = 0.0;
};

// Traces in Tr^F_beta: eigen condition off F, finite partition value on F,
// vanishing on fI_{F^c} and (when a lattice is given) on I_F.
TraceSimplexResult f_trace_set(const Instance& inst, const Beta& beta, ColorSet F, const IdealLattice* lattice = nullptr,
                               const Tolerances& tol = {});
TraceSimplexResult finite_trace_set(const Instance& inst, const Beta& beta, const IdealLattice* lattice = nullptr,
                                    const Tolerances& tol = {});
TraceSimplexResult avt_traces(const Instance& inst, const Beta& beta, const Tolerances& tol = {});

struct Membership {
    bool member = false;
    bool normalized = false;
    bool filters_ok = false;
    bool eigen_ok = false;
    bool convergent = false;
    double residual = 0.0;
    std::string reason;
};
Membership trace_membership(const Instance& inst, const Beta& beta, ColorSet F, const std::vector<double>& tau,
                            const IdealLattice* lattice = nullptr, const Tolerances& tol = {});

struct FullSimplex {
    Beta beta;
    std::vector<TraceSimplexResult> parts;  // indexed by ColorSet
    bool disjoint = true;
};
FullSimplex full_simplex(const Instance& inst, const Beta& beta, const IdealLattice* lattice = nullptr,
                         const Tolerances& tol = {});

struct PhasePart {
    ColorSet F = 0;
    bool nonempty = false;
    int dim = -1;
    int vertices = 0;
};

struct PhaseRow {
    Beta beta;
    std::string candidate;  // empty for plain grid points
    std::vector<PhasePart> parts;
    std::string label;
    bool ambiguous = false;
};

struct PhaseDiagram {
    std::vector<PhaseRow> rows;
    std::vector<std::pair<std::string, Beta>> critical;
    double system_entropy = 0.0;
    double strong_entropy = 0.0;
    bool above_strong_ok = true;
    bool below_system_ok = true;
};
PhaseDiagram phase_diagram(const Instance& inst, const Beta& beta_min, const Beta& beta_max, int steps,
                           const IdealLattice* lattice = nullptr, int jobs = 1, const Tolerances& tol = {});

struct GroundStates {
    std::vector<std::vector<double>> extreme_points;
    std::vector<bool> filtered;
    int dim = -1;
    bool empty = true;
};
GroundStates ground_states(const Instance& inst, const IdealLattice* lattice = nullptr);

int affine_dimension(const std::vector<std::vector<double>>& pts);

}  // namespace kms
