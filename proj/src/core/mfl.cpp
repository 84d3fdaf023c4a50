#include "mfl.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

namespace kms {

bool is_factor(const Word& f, const Word& w) {
    if (f.empty()) return true;
    if (f.size() > w.size()) return false;
    return std::search(w.begin(), w.end(), f.begin(), f.end()) != w.end();
}

bool mfl_allowable(const MflSpec& spec, const MultiWord& mu) {
    for (const auto& f : spec.forbidden) {
        bool all = true;
        for (int i = 0; i < spec.N && all; ++i) all = is_factor(f[i], mu[i]);
        if (all) return false;
    }
    return true;
}

MflLanguage::MflLanguage(MflSpec spec) : spec_(std::move(spec)) {
    keep_.assign(spec_.N, 0);
    for (const auto& f : spec_.forbidden)
        for (int i = 0; i < spec_.N; ++i)
            keep_[i] = std::max<int>(keep_[i], static_cast<int>(f[i].size()) - 1);
    nbits_ = static_cast<int>(spec_.forbidden.size()) * spec_.N;
}

MflState MflLanguage::empty() const {
    MflState s;
    s.window.assign(spec_.N, Word{});
    s.bits.assign((nbits_ + 63) / 64, 0);
    for (std::size_t p = 0; p < spec_.forbidden.size(); ++p)
        for (int i = 0; i < spec_.N; ++i)
            if (spec_.forbidden[p][i].empty()) set_bit(s, bit_index(static_cast<int>(p), i));
    return s;
}

MflState MflLanguage::append(const MflState& s, int i, int k) const {
    MflState t = s;
    Word ext = s.window[i];
    ext.push_back(k);
    for (std::size_t p = 0; p < spec_.forbidden.size(); ++p) {
        const Word& f = spec_.forbidden[p][i];
        if (f.empty() || f.size() > ext.size()) continue;
        if (std::equal(f.begin(), f.end(), ext.end() - static_cast<long>(f.size())))
            set_bit(t, bit_index(static_cast<int>(p), i));
    }
    if (static_cast<int>(ext.size()) > keep_[i]) ext.erase(ext.begin(), ext.end() - keep_[i]);
    t.window[i] = std::move(ext);
    return t;
}

MflState MflLanguage::prepend(const MflState& s, int i, int k) const {
    MflState t = s;
    Word ext;
    ext.push_back(k);
    ext.insert(ext.end(), s.window[i].begin(), s.window[i].end());
    for (std::size_t p = 0; p < spec_.forbidden.size(); ++p) {
        const Word& f = spec_.forbidden[p][i];
        if (f.empty() || f.size() > ext.size()) continue;
        if (std::equal(f.begin(), f.end(), ext.begin())) set_bit(t, bit_index(static_cast<int>(p), i));
    }
    if (static_cast<int>(ext.size()) > keep_[i]) ext.resize(keep_[i]);
    t.window[i] = std::move(ext);
    return t;
}

bool MflLanguage::allowable(const MflState& s) const {
    for (std::size_t p = 0; p < spec_.forbidden.size(); ++p) {
        bool all = true;
        for (int i = 0; i < spec_.N && all; ++i) all = get_bit(s, bit_index(static_cast<int>(p), i));
        if (all) return false;
    }
    return true;
}

bool MflLanguage::compatible(const MflState& fwd, const MflState& rev) const {
    for (std::size_t p = 0; p < spec_.forbidden.size(); ++p) {
        bool all = true;
        for (int i = 0; i < spec_.N && all; ++i) {
            int b = bit_index(static_cast<int>(p), i);
            if (get_bit(fwd, b) || get_bit(rev, b)) continue;
            Word joined = fwd.window[i];
            joined.insert(joined.end(), rev.window[i].begin(), rev.window[i].end());
            all = is_factor(spec_.forbidden[p][i], joined);
        }
        if (all) return false;
    }
    return true;
}

MflState MflLanguage::forward_of(const MultiWord& mu) const {
    MflState s = empty();
    for (int i = 0; i < spec_.N; ++i)
        for (int k : mu[i]) s = append(s, i, k);
    return s;
}

MflState MflLanguage::reverse_of(const MultiWord& nu) const {
    MflState s = empty();
    for (int i = 0; i < spec_.N; ++i)
        for (auto it = nu[i].rbegin(); it != nu[i].rend(); ++it) s = prepend(s, i, *it);
    return s;
}

int MflAlgebra::atom_of(const MflLanguage& lang, const MultiWord& nu) const {
    auto it = reverse_atom.find(lang.reverse_of(nu));
    if (it == reverse_atom.end()) throw PathError("word " + format_multiword(nu) + " is not allowable");
    return it->second;
}

std::vector<bool> MflAlgebra::follower(const MflLanguage& lang, const MultiWord& mu) const {
    MflState f = lang.forward_of(mu);
    std::vector<bool> out(atoms, false);
    if (!lang.allowable(f)) return out;
    for (int c = 0; c < atoms; ++c) out[c] = lang.compatible(f, atom_rep[c]);
    return out;
}

namespace {

struct Explored {
    std::vector<MflState> states;
    std::vector<MultiWord> words;
    std::map<MflState, int> index;
    // transitions[s][i][k] = target state or -1
    std::vector<std::vector<std::vector<int>>> next;
};

Explored explore(const MflLanguage& lang, bool reverse, int cap) {
    const MflSpec& spec = lang.spec();
    Explored ex;
    auto add = [&](const MflState& s, MultiWord w) {
        auto it = ex.index.find(s);
        if (it != ex.index.end()) return it->second;
        if (static_cast<int>(ex.states.size()) >= cap)
            throw CapExceeded("coefficient automaton exceeds " + std::to_string(cap) + " states");
        int id = static_cast<int>(ex.states.size());
        ex.index.emplace(s, id);
        ex.states.push_back(s);
        ex.words.push_back(std::move(w));
        return id;
    };
    add(lang.empty(), MultiWord(spec.N));
    for (std::size_t cur = 0; cur < ex.states.size(); ++cur) {
        std::vector<std::vector<int>> tr(spec.N);
        for (int i = 0; i < spec.N; ++i) {
            tr[i].assign(spec.symbols[i], -1);
            for (int k = 0; k < spec.symbols[i]; ++k) {
                MflState s = ex.states[cur];
                MflState t = reverse ? lang.prepend(s, i, k) : lang.append(s, i, k);
                if (!lang.allowable(t)) continue;
                MultiWord w = ex.words[cur];
                if (reverse)
                    w[i].insert(w[i].begin(), k);
                else
                    w[i].push_back(k);
                tr[i][k] = add(t, std::move(w));
            }
        }
        ex.next.push_back(std::move(tr));
    }
    return ex;
}

}  // namespace

MflAlgebra build_mfl_algebra(const MflLanguage& lang, int cap) {
    const MflSpec& spec = lang.spec();
    Explored rev = explore(lang, true, cap);
    Explored fwd = explore(lang, false, cap);

    MflAlgebra A;
    A.forward_states = fwd.states;
    std::map<std::vector<bool>, int> sig_atom;
    std::vector<int> state_atom(rev.states.size());
    for (std::size_t r = 0; r < rev.states.size(); ++r) {
        std::vector<bool> sig(fwd.states.size());
        for (std::size_t s = 0; s < fwd.states.size(); ++s) sig[s] = lang.compatible(fwd.states[s], rev.states[r]);
        auto [it, inserted] = sig_atom.emplace(sig, static_cast<int>(sig_atom.size()));
        state_atom[r] = it->second;
        if (inserted) {
            A.atom_rep.push_back(rev.states[r]);
            A.labels.push_back(format_multiword(rev.words[r]));
        }
        A.reverse_atom.emplace(rev.states[r], it->second);
    }
    A.atoms = static_cast<int>(sig_atom.size());
    A.empty_atom = state_atom[0];

    A.transfer.assign(spec.N, IntMatrix(A.atoms, A.atoms));
    std::vector<std::vector<bool>> filled(spec.N, std::vector<bool>(A.atoms, false));
    for (std::size_t r = 0; r < rev.states.size(); ++r) {
        int src = state_atom[r];
        for (int i = 0; i < spec.N; ++i) {
            std::vector<std::int64_t> row(A.atoms, 0);
            for (int k = 0; k < spec.symbols[i]; ++k) {
                int t = rev.next[r][i][k];
                if (t >= 0) ++row[state_atom[t]];
            }
            if (!filled[i][src]) {
                for (int c = 0; c < A.atoms; ++c) A.transfer[i](src, c) = row[c];
                filled[i][src] = true;
            } else {
                for (int c = 0; c < A.atoms; ++c)
                    if (A.transfer[i](src, c) != row[c])
                        throw InternalError("transfer counts are not constant on an atom");
            }
        }
    }
    return A;
}

std::int64_t mfl_allowable_words(const MflSpec& spec, int k, ColorSet F, std::int64_t node_budget) {
    MflLanguage lang(spec);
    std::vector<int> cols;
    for (int c : colors_of(F))
        if (c < spec.N) cols.push_back(c);
    if (k == 0) return lang.allowable(lang.empty()) ? 1 : 0;
    if (cols.empty()) return 0;
    std::int64_t nodes = 0;
    std::function<std::int64_t(const MflState&, std::size_t, int)> dfs = [&](const MflState& s, std::size_t ci,
                                                                              int left) -> std::int64_t {
        if (++nodes > node_budget) throw CapExceeded("word enumeration exceeded node budget");
        if (left == 0) return 1;
        if (ci >= cols.size()) return 0;
        std::int64_t total = dfs(s, ci + 1, left);
        int i = cols[ci];
        for (int sym = 0; sym < spec.symbols[i]; ++sym) {
            MflState t = lang.append(s, i, sym);
            if (lang.allowable(t)) total += dfs(t, ci, left - 1);
        }
        return total;
    };
    return dfs(lang.empty(), 0, k);
}

std::string format_multiword(const MultiWord& mu) {
    std::ostringstream os;
    bool wide = false;
    for (const auto& w : mu)
        for (int k : w) wide = wide || k >= 9;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (i) os << "|";
        if (mu[i].empty()) os << "e";
        for (std::size_t j = 0; j < mu[i].size(); ++j) {
            if (wide && j) os << ".";
            os << (mu[i][j] + 1);
        }
    }
    return os.str();
}

}  // namespace kms
