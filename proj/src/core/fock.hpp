#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "equilibrium.hpp"

namespace kms {

using SparseI = Eigen::SparseMatrix<long long>;

// Fock space truncated to degrees n <= box, with basis vectors indexed by
// normal-form paths (graphs), (degree, vertex) pairs (dynamics) or
// allowable multiwords (m-FL, concrete model on l^2 of the language).
class TruncatedFock {
public:
    std::shared_ptr<const Instance> instance;
    MultiIndex box;

    int size() const { return static_cast<int>(degree_.size()); }
    int symbols() const { return static_cast<int>(sym_color_.size()); }
    int symbol_index(int color, int j) const { return sym_offset_[color] + j; }
    int symbol_color(int s) const { return sym_color_[s]; }
    int symbol_unit(int s) const { return sym_unit_[s]; }

    const MultiIndex& degree_of(int b) const { return degrees_[degree_[b]]; }
    int degree_id(int b) const { return degree_[b]; }
    int source(int b) const { return source_[b]; }
    int range(int b) const { return range_[b]; }
    const std::vector<int>& label(int b) const { return label_[b]; }
    std::string describe(int b) const;
    bool interior(int b) const;  // every creation from b stays inside the box
    bool interior_in(int b, int color) const;

    // Partial maps on basis indices; -1 for zero or leaving the box.
    int create(int s, int b) const { return b < 0 ? -1 : create_[s][b]; }
    int annihilate(int s, int b) const { return b < 0 ? -1 : annihilate_[s][b]; }
    int create_word(const std::vector<int>& syms, int b) const;      // applies t(x_w)
    int annihilate_word(const std::vector<int>& syms, int b) const;  // applies t(x_w)^*
    std::vector<int> basis_of_degree(const MultiIndex& n) const;
    // Symbol sequence of the normal-form word labelling basis vector b.
    std::vector<int> word_of(int b) const;
    // Unit-decomposition words of degree n that are nonzero, in normal form.
    std::vector<std::vector<int>> words_of_degree(const MultiIndex& n) const;
    std::vector<int> symbols_of(const MultiWord& w) const;

    SparseI creation(int s) const;
    SparseI identity() const;
    SparseI diag(const std::vector<long long>& d) const;
    SparseI pi(int atom) const;

private:
    friend TruncatedFock build_fock(std::shared_ptr<const Instance>, const MultiIndex&, const Tolerances&);
    std::vector<MultiIndex> degrees_;
    std::vector<int> degree_;
    std::vector<int> source_, range_;
    std::vector<std::vector<int>> label_;
    std::vector<std::vector<int>> by_degree_;
    std::vector<int> sym_offset_, sym_color_, sym_unit_;
    std::vector<std::vector<int>> create_, annihilate_;
};

TruncatedFock build_fock(std::shared_ptr<const Instance> inst, int K, const Tolerances& tol = {});
TruncatedFock build_fock(std::shared_ptr<const Instance> inst, const MultiIndex& box, const Tolerances& tol = {});

enum class ProjKind { p_n, P_i, P_ki, P_F, Q_F, Q_F_n, R_F_m };
struct ProjectionSpec {
    ProjKind kind = ProjKind::p_n;
    MultiIndex n;     // p_n, Q_F^n, R_F^m
    int color = 0;    // P_i, P_{k.i}
    int k = 1;        // P_{k.i}, R_F^m(k)
    ColorSet F = 0;   // P_F, Q_F, Q_F^n, R_F^m
};
SparseI projection(const TruncatedFock& fock, const ProjectionSpec& p);

struct IdentityResult {
    std::string name;
    long checks = 0;
    long long max_residual = 0;
};
struct IdentityReport {
    std::vector<IdentityResult> results;
    bool all_passed = true;
};
IdentityReport check_identities(const TruncatedFock& fock);

SparseI conditional_expectation(const TruncatedFock& fock, const SparseI& op);

struct OracleValue {
    double value = 0.0;
    double tail_bound = 0.0;
    bool certified = true;
};
// Truncated Gibbs sum over lambda with lambda_F <= K and lambda_{F^c} at a fixed depth.
OracleValue oracle_state_eval(const TruncatedFock& fock, const EquilibriumState& state, const MonomialQuery& q, int K);
// Same, on the smallest truncation that holds the window for every component.
OracleValue oracle_state_eval(const EquilibriumState& state, const MonomialQuery& q, int K, const Tolerances& tol = {});

struct KmsCheck {
    double max_residual = 0.0;
    long triples = 0;
    double gauge_residual = 0.0;
    long gauge_checks = 0;
    bool passed = false;
};
KmsCheck check_kms(const EquilibriumState& state, const MultiIndex& degree_bound, int K, double threshold = 1e-10,
                   const Tolerances& tol = {});

void dump_ops(const TruncatedFock& fock, std::ostream& os);

}  // namespace kms
