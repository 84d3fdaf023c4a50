#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "common.hpp"
#include "linalg.hpp"
#include "mfl.hpp"

namespace kms {

using json = nlohmann::json;

// x_{ci,e} x_{cj,f} = x_{cj,g} x_{ci,h}, edges 0-based within their color.
struct FactorizationBlock {
    int ci = 0;
    int cj = 1;
    std::vector<std::array<int, 4>> pairs;  // {e, f, g, h}
    bool operator==(const FactorizationBlock&) const = default;
};

struct GraphSpec {
    int N = 0;
    std::vector<std::string> vertices;
    std::vector<IntMatrix> matrices;  // B_i(v, w): color-i edges from w to v
    std::optional<std::vector<FactorizationBlock>> factorizations;
    bool operator==(const GraphSpec&) const = default;
};

struct DynamicsSpec {
    int N = 0;
    std::vector<std::string> vertices;
    std::vector<std::vector<int>> maps;
    bool operator==(const DynamicsSpec&) const = default;
};

using InstanceSpec = std::variant<GraphSpec, MflSpec, DynamicsSpec>;

enum class Kind { Graph, Mfl, Dynamics };
std::string kind_name(Kind k);

struct Edge {
    int source = 0;
    int range = 0;
};

class Instance {
public:
    Kind kind = Kind::Graph;
    int N = 0;
    int dim = 0;
    std::vector<std::string> labels;
    std::vector<IntMatrix> M;  // transfer maps on functions
    std::vector<IntMatrix> B;  // M_i transposed: action on trace vectors
    std::vector<int> unit_size;

    // graphs
    std::vector<std::vector<Edge>> edges;
    bool has_factorization = false;

    // dynamics
    std::vector<std::vector<int>> maps;

    // m-FL
    std::shared_ptr<const MflLanguage> language;
    std::shared_ptr<const MflAlgebra> algebra;

    InstanceSpec spec;
    std::string canonical;
    std::uint64_t hash = 0;

    bool has_algebra() const { return kind != Kind::Mfl || algebra != nullptr; }
    void require_algebra(const std::string& what) const;
    int vertex_index(const std::string& label) const;

    // Factorization swap: x_{i,e} x_{j,f} -> x_{j,g} x_{i,h}; returns false if not composable.
    bool swap(int i, int e, int j, int f, int& g, int& h) const;

    bool operator==(const Instance& o) const { return canonical == o.canonical && M == o.M; }

private:
    friend Instance validate(const InstanceSpec&, const Tolerances&);
    // swap_table[i*N+j][e*d_j+f] = {g, h}
    std::vector<std::vector<std::array<int, 2>>> swap_table_;
};

Instance validate(const InstanceSpec& spec, const Tolerances& tol = {});

const IntMatrix& transfer_map(const Instance& inst, int i);

struct TransferPower {
    IntMatrix exact;
    Eigen::MatrixXd approx;
    bool overflow = false;
};
TransferPower multidegree_transfer(const Instance& inst, const MultiIndex& n);

// Vertices v with phi_{k 1_F}(delta_v) = 0 for some k.
std::vector<bool> compute_fI(const Instance& inst, ColorSet F);

struct IdealLattice {
    int N = 0;
    int dim = 0;
    std::map<ColorSet, std::vector<bool>> ideals;

    static IdealLattice zero(int N, int dim);
    std::vector<bool> get(ColorSet F) const;
    bool operator==(const IdealLattice&) const = default;
};

IdealLattice compute_cnp_ideals(const Instance& inst);
// Checks monotonicity and invariance under the complementary transfer maps.
void validate_lattice(const Instance& inst, const IdealLattice& L);
bool is_perp_invariant(const Instance& inst, ColorSet F, const std::vector<bool>& ideal);

// Lexicographic matching of i-then-j paths with j-then-i paths.
std::vector<FactorizationBlock> lexicographic_factorization(const GraphSpec& g);

InstanceSpec spec_from_json(const json& j);
json spec_to_json(const InstanceSpec& spec);
Instance load_instance(const std::string& json_text, const Tolerances& tol = {});
IdealLattice lattice_from_json(const Instance& inst, const json& j);
json lattice_to_json(const Instance& inst, const IdealLattice& L);

}  // namespace kms
