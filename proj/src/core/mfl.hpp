#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "common.hpp"
#include "linalg.hpp"

namespace kms {

using Word = std::vector<int>;           // 0-based symbols
using MultiWord = std::vector<Word>;     // one word per color

struct MflSpec {
    int N = 0;
    std::vector<int> symbols;
    std::vector<MultiWord> forbidden;
    bool operator==(const MflSpec&) const = default;
};

bool is_factor(const Word& f, const Word& w);
// Direct containment test against the forbidden list.
bool mfl_allowable(const MflSpec& spec, const MultiWord& mu);

// Finite-state summary of a multiword: per color a boundary window of
// bounded length plus the set of forbidden components already contained.
struct MflState {
    std::vector<Word> window;
    std::vector<std::uint64_t> bits;
    bool operator<(const MflState& o) const {
        return window != o.window ? window < o.window : bits < o.bits;
    }
    bool operator==(const MflState& o) const = default;
};

class MflLanguage {
public:
    explicit MflLanguage(MflSpec spec);

    const MflSpec& spec() const { return spec_; }
    MflState empty() const;
    // Suffix-tracking state extended by appending symbol k in color i.
    MflState append(const MflState& s, int i, int k) const;
    // Prefix-tracking state extended by prepending symbol k in color i.
    MflState prepend(const MflState& s, int i, int k) const;
    bool allowable(const MflState& s) const;
    // Whether (forward state) * (reverse state) is allowable.
    bool compatible(const MflState& fwd, const MflState& rev) const;

    MflState forward_of(const MultiWord& mu) const;
    MflState reverse_of(const MultiWord& nu) const;

private:
    int bit_index(int p, int i) const { return p * spec_.N + i; }
    bool get_bit(const MflState& s, int b) const { return (s.bits[b / 64] >> (b % 64)) & 1u; }
    void set_bit(MflState& s, int b) const { s.bits[b / 64] |= (std::uint64_t(1) << (b % 64)); }

    MflSpec spec_;
    std::vector<int> keep_;
    int nbits_ = 0;
};

// Coefficient algebra generated by the follower-set projections, realised on atoms.
struct MflAlgebra {
    int atoms = 0;
    int empty_atom = 0;
    std::vector<std::string> labels;
    std::vector<IntMatrix> transfer;           // M_i[c'][c]
    std::vector<MflState> atom_rep;            // reverse state representative per atom
    std::vector<MflState> forward_states;
    std::map<MflState, int> reverse_atom;      // reverse state -> atom

    int atom_of(const MflLanguage& lang, const MultiWord& nu) const;
    // Indicator over atoms of {nu : mu * nu allowable}.
    std::vector<bool> follower(const MflLanguage& lang, const MultiWord& mu) const;
};

// Throws CapExceeded when either automaton exceeds `cap` states.
MflAlgebra build_mfl_algebra(const MflLanguage& lang, int cap);

// Number of allowable multiwords of total length k supported in F.
std::int64_t mfl_allowable_words(const MflSpec& spec, int k, ColorSet F, std::int64_t node_budget = 50000000);

std::string format_multiword(const MultiWord& mu);

}  // namespace kms
