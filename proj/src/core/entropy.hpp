#pragma once

#include <optional>
#include <string>
#include <vector>

#include "model.hpp"

namespace kms {

// Natural-log entropies; -infinity marks a direction with no growth at all.
double restricted_radius(const Instance& inst, int i, const std::vector<bool>& R, const Tolerances& tol = {});
double restricted_log_radius(const Instance& inst, ColorSet F, const std::vector<bool>& R, const Tolerances& tol = {});

double fiber_entropy(const Instance& inst, ColorSet F, const Tolerances& tol = {});
double strong_entropy(const Instance& inst, const Tolerances& tol = {});
double tracial_entropy(const Instance& inst, const std::vector<double>& tau, ColorSet F, const Tolerances& tol = {});

struct SystemEntropy {
    double value = 0.0;
    int attaining_vertex = -1;
};
SystemEntropy system_entropy(const Instance& inst, const Tolerances& tol = {});

// S_k = sum over |n| = k, n supported in F, of M^n 1, computed exactly (CapExceeded on overflow).
std::vector<std::vector<std::int64_t>> block_sum_vectors(const Instance& inst, ColorSet F, int k_max);
// (1/k) log ||S_k||_inf for k = 1..k_max, in floating point.
std::vector<double> slope_table(const Instance& inst, ColorSet F, int k_max);

struct MflEntropy {
    std::vector<std::int64_t> counts;  // |B_k^F| for k = 0..k_max
    std::vector<double> slopes;        // slopes[k-1] for k = 1..k_max
    double estimate = 0.0;
    bool converged = true;
    bool empty_direction = false;
};
MflEntropy mfl_entropy(const MflSpec& spec, ColorSet F, int k_max, double tol = 1e-3);

struct EntropyReport {
    std::vector<double> per_color;
    std::vector<std::pair<ColorSet, double>> per_subset;
    double strong = 0.0;
    double system = 0.0;
    int attaining_vertex = -1;
    std::vector<double> tracial;  // for supplied traces
    std::string method;
    int k_used = 0;
};
EntropyReport entropy_report(const Instance& inst, const std::vector<std::vector<double>>& taus, int k_max = 20,
                             const Tolerances& tol = {});

}  // namespace kms
