#pragma once

#include <memory>
#include <string>
#include <vector>

#include "simplex.hpp"

namespace kms {

struct PartitionValue {
    double value = 0.0;
    double radius_ratio = 0.0;  // max_i rho(M_i|R) / e^beta
    double partial_sum = 0.0;   // box-truncated series used as a cross-check
    int partial_order = 0;
};
// c^F = tau(prod_{i in F} (1 - e^{-beta} M_i)^{-1} 1); ConvergenceError when it diverges.
PartitionValue partition_value(const Instance& inst, const std::vector<double>& tau, const Beta& beta, ColorSet F,
                               const Tolerances& tol = {});

// Rigorous bound for sum over n in Z_+^F outside the box n <= K 1_F of e^{-|n|beta} tau(M^n 1).
// Returns +infinity when no certificate is available.
double geometric_tail_bound(const Instance& inst, const std::vector<double>& tau, const Beta& beta, ColorSet F, int K,
                            const Tolerances& tol = {});

struct StateComponent {
    ColorSet F = 0;
    std::vector<double> tau;
    double weight = 1.0;
    double c = 1.0;
    std::vector<double> psi;  // a -> psi . a gives the component state on pi(A)
};

struct MonomialTerm {
    double coef = 1.0;
    bool diag = false;
    std::vector<double> a;  // diag(a)
    MultiWord mu, nu;       // t(x_mu) t(x_nu)^*
};

struct MonomialQuery {
    std::vector<MonomialTerm> terms;
    static MonomialQuery diag(std::vector<double> a, double coef = 1.0);
    static MonomialQuery pair(MultiWord mu, MultiWord nu, double coef = 1.0);
};

class EquilibriumState {
public:
    std::shared_ptr<const Instance> instance;
    Beta beta;
    std::vector<StateComponent> components;
    bool checked = true;

    // Skips membership and certificate checks (used for negative controls).
    static EquilibriumState unchecked(std::shared_ptr<const Instance> inst, const Beta& beta,
                                      std::vector<StateComponent> comps);
};

EquilibriumState build_state(std::shared_ptr<const Instance> inst, const Beta& beta, std::vector<StateComponent> comps,
                             const IdealLattice* lattice = nullptr, const Tolerances& tol = {});

MultiIndex word_degree(const MultiWord& w);
// <x_nu, x_mu> as a function on atoms; PathError for words that are not valid paths.
std::vector<double> unit_inner(const Instance& inst, const MultiWord& nu, const MultiWord& mu);

double evaluate_state(const EquilibriumState& state, const MonomialQuery& q);
double state_on_QF(const EquilibriumState& state, ColorSet F);
std::vector<double> pi_restriction(const EquilibriumState& state);

struct WoldPart {
    ColorSet F = 0;
    bool infinite = false;
    double mass = 0.0;
    std::vector<double> tau;
};

struct WoldDecomposition {
    Beta beta;
    std::vector<WoldPart> parts;  // finite parts by color set, then the infinite part
    double reconstruction_error = 0.0;
};
WoldDecomposition wold_decompose(const Instance& inst, const Beta& beta, const std::vector<double>& tau_total,
                                 const Tolerances& tol = {});

}  // namespace kms
