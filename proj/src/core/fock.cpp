#include "fock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace kms {

namespace {

struct LabelHash {
    std::size_t operator()(const std::vector<int>& v) const {
        std::size_t h = 1469598103934665603ull;
        for (int x : v) h = (h ^ static_cast<std::size_t>(x + 7)) * 1099511628211ull;
        return h;
    }
};

using LabelMap = std::unordered_map<std::vector<int>, int, LabelHash>;

// All multi-indices 0 <= n <= box, ordered by total length then lexicographically.
std::vector<MultiIndex> box_degrees(const MultiIndex& box) {
    std::vector<MultiIndex> out;
    MultiIndex n(box.size(), 0);
    while (true) {
        out.push_back(n);
        std::size_t i = 0;
        while (i < n.size() && n[i] == box[i]) n[i++] = 0;
        if (i == n.size()) break;
        ++n[i];
    }
    std::stable_sort(out.begin(), out.end(), [](const MultiIndex& a, const MultiIndex& b) {
        int sa = 0, sb = 0;
        for (int x : a) sa += x;
        for (int x : b) sb += x;
        return sa < sb;
    });
    return out;
}

MultiWord unflatten(const std::vector<int>& label, int N) {
    MultiWord w(N);
    std::size_t p = 0;
    for (int i = 0; i < N; ++i) {
        int len = label[p++];
        w[i].assign(label.begin() + p, label.begin() + p + len);
        p += len;
    }
    return w;
}

std::vector<int> flatten(const MultiWord& w) {
    std::vector<int> out;
    for (const auto& x : w) {
        out.push_back(static_cast<int>(x.size()));
        out.insert(out.end(), x.begin(), x.end());
    }
    return out;
}

// Prepends x_{i,e} to a graph label, moving it past lower colors with the factorization.
std::optional<std::vector<int>> graph_prepend(const Instance& inst, int i, int e, const std::vector<int>& label) {
    int r = label.size() == 1 ? label[0] : inst.edges[label[1]][label[2]].range;
    if (inst.edges[i][e].source != r) return std::nullopt;
    std::vector<int> out{label[0]};
    int cur = e;
    std::size_t pos = 1;
    while (pos < label.size() && label[pos] < i) {
        int g = 0, h = 0;
        if (!inst.swap(i, cur, label[pos], label[pos + 1], g, h))
            throw InternalError("factorization has no image for a composable pair");
        out.push_back(label[pos]);
        out.push_back(g);
        cur = h;
        pos += 2;
    }
    out.push_back(i);
    out.push_back(cur);
    out.insert(out.end(), label.begin() + pos, label.end());
    return out;
}

long long max_abs(const SparseI& m) {
    long long r = 0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseI::InnerIterator it(m, k); it; ++it) r = std::max(r, std::abs(it.value()));
    return r;
}

SparseI ad(const TruncatedFock& fock, int color, const SparseI& X) {
    SparseI out(fock.size(), fock.size());
    for (int j = 0; j < fock.instance->unit_size[color]; ++j) {
        SparseI T = fock.creation(fock.symbol_index(color, j));
        SparseI Tt = T.transpose();
        out += SparseI(T * X) * Tt;
    }
    return out;
}

bool leq(const MultiIndex& a, const MultiIndex& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] > b[i]) return false;
    return true;
}

}  // namespace

std::string TruncatedFock::describe(int b) const {
    const Instance& inst = *instance;
    std::ostringstream os;
    const auto& l = label_[b];
    if (inst.kind == Kind::Graph) {
        os << inst.labels[l[0]];
        for (std::size_t p = 1; p < l.size(); p += 2) os << " x" << l[p] + 1 << "," << l[p + 1] + 1;
    } else if (inst.kind == Kind::Dynamics) {
        os << inst.labels[l[0]] << " @";
        for (int x : degree_of(b)) os << " " << x;
    } else {
        os << format_multiword(unflatten(l, inst.N));
    }
    return os.str();
}

bool TruncatedFock::interior_in(int b, int color) const { return degree_of(b)[color] < box[color]; }

bool TruncatedFock::interior(int b) const {
    for (std::size_t i = 0; i < box.size(); ++i)
        if (!interior_in(b, static_cast<int>(i))) return false;
    return true;
}

int TruncatedFock::create_word(const std::vector<int>& syms, int b) const {
    for (auto it = syms.rbegin(); it != syms.rend() && b >= 0; ++it) b = create(*it, b);
    return b;
}

int TruncatedFock::annihilate_word(const std::vector<int>& syms, int b) const {
    for (auto it = syms.begin(); it != syms.end() && b >= 0; ++it) b = annihilate(*it, b);
    return b;
}

std::vector<int> TruncatedFock::basis_of_degree(const MultiIndex& n) const {
    for (std::size_t d = 0; d < degrees_.size(); ++d)
        if (degrees_[d] == n) return by_degree_[d];
    throw OutOfTruncation("degree outside the truncation box");
}

std::vector<int> TruncatedFock::word_of(int b) const {
    const Instance& inst = *instance;
    const auto& l = label_[b];
    std::vector<int> out;
    if (inst.kind == Kind::Graph) {
        for (std::size_t p = 1; p < l.size(); p += 2) out.push_back(symbol_index(l[p], l[p + 1]));
    } else if (inst.kind == Kind::Dynamics) {
        const auto& n = degree_of(b);
        for (int i = 0; i < inst.N; ++i) out.insert(out.end(), n[i], symbol_index(i, 0));
    } else {
        out = symbols_of(unflatten(l, inst.N));
    }
    return out;
}

std::vector<std::vector<int>> TruncatedFock::words_of_degree(const MultiIndex& n) const {
    std::set<std::vector<int>> seen;
    std::vector<std::vector<int>> out;
    bool zero = std::all_of(n.begin(), n.end(), [](int x) { return x == 0; });
    if (zero) return {std::vector<int>{}};
    for (int b : basis_of_degree(n)) {
        auto w = word_of(b);
        if (seen.insert(w).second) out.push_back(std::move(w));
    }
    return out;
}

std::vector<int> TruncatedFock::symbols_of(const MultiWord& w) const {
    std::vector<int> out;
    for (int i = 0; i < instance->N && i < static_cast<int>(w.size()); ++i)
        for (int k : w[i]) {
            if (k < 0 || k >= instance->unit_size[i]) throw PathError("symbol out of range in color " + std::to_string(i + 1));
            out.push_back(symbol_index(i, k));
        }
    return out;
}

SparseI TruncatedFock::creation(int s) const {
    std::vector<Eigen::Triplet<long long>> t;
    for (int b = 0; b < size(); ++b)
        if (create_[s][b] >= 0) t.emplace_back(create_[s][b], b, 1);
    SparseI m(size(), size());
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

SparseI TruncatedFock::identity() const { return diag(std::vector<long long>(size(), 1)); }

SparseI TruncatedFock::diag(const std::vector<long long>& d) const {
    std::vector<Eigen::Triplet<long long>> t;
    for (int b = 0; b < size(); ++b)
        if (d[b] != 0) t.emplace_back(b, b, d[b]);
    SparseI m(size(), size());
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

SparseI TruncatedFock::pi(int atom) const {
    std::vector<long long> d(size(), 0);
    for (int b = 0; b < size(); ++b) d[b] = range_[b] == atom ? 1 : 0;
    return diag(d);
}

TruncatedFock build_fock(std::shared_ptr<const Instance> inst, int K, const Tolerances& tol) {
    return build_fock(inst, MultiIndex(inst->N, K), tol);
}

TruncatedFock build_fock(std::shared_ptr<const Instance> inst, const MultiIndex& box, const Tolerances& tol) {
    const Instance& I = *inst;
    if (static_cast<int>(box.size()) != I.N) throw ValidationError("truncation box needs one entry per color");
    for (int x : box)
        if (x < 0) throw ValidationError("truncation box must be nonnegative");
    if (I.kind == Kind::Graph && I.N >= 2 && !I.has_factorization)
        throw FactorizationRequired("the Fock representation needs a factorization rule");

    TruncatedFock F;
    F.instance = inst;
    F.box = box;
    F.degrees_ = box_degrees(box);
    std::map<MultiIndex, int> deg_id;
    for (std::size_t d = 0; d < F.degrees_.size(); ++d) deg_id[F.degrees_[d]] = static_cast<int>(d);
    for (int i = 0; i < I.N; ++i) {
        F.sym_offset_.push_back(static_cast<int>(F.sym_color_.size()));
        for (int j = 0; j < I.unit_size[i]; ++j) {
            F.sym_color_.push_back(i);
            F.sym_unit_.push_back(j);
        }
    }
    F.by_degree_.assign(F.degrees_.size(), {});
    std::vector<LabelMap> lookup(F.degrees_.size());
    const MflSpec* mspec = I.kind == Kind::Mfl ? &std::get<MflSpec>(I.spec) : nullptr;

    auto add = [&](int d, std::vector<int> label, int src, int rng) {
        if (static_cast<long>(F.label_.size()) >= tol.fock_size_cap)
            throw SizeCap("truncated Fock space exceeds " + std::to_string(tol.fock_size_cap) + " basis vectors");
        int b = static_cast<int>(F.label_.size());
        lookup[d].emplace(label, b);
        F.by_degree_[d].push_back(b);
        F.label_.push_back(std::move(label));
        F.degree_.push_back(d);
        F.source_.push_back(src);
        F.range_.push_back(rng);
    };
    auto mfl_range = [&](const std::vector<int>& label) {
        if (!I.algebra) return -1;
        return I.algebra->atom_of(*I.language, unflatten(label, I.N));
    };

    // prepend x_{i,j} to basis vector b; nullopt when the product vanishes
    auto prepend = [&](int i, int j, int b) -> std::optional<std::vector<int>> {
        const auto& l = F.label_[b];
        if (I.kind == Kind::Graph) return graph_prepend(I, i, j, l);
        if (I.kind == Kind::Dynamics) return l;
        MultiWord w = unflatten(l, I.N);
        w[i].insert(w[i].begin(), j);
        if (!mfl_allowable(*mspec, w)) return std::nullopt;
        return flatten(w);
    };
    auto range_after = [&](int i, int b, const std::vector<int>& label) {
        if (I.kind == Kind::Graph) return I.edges[label[1]][label[2]].range;
        if (I.kind == Kind::Dynamics) return I.maps[i][F.range_[b]];
        return mfl_range(label);
    };

    for (std::size_t d = 0; d < F.degrees_.size(); ++d) {
        const MultiIndex& n = F.degrees_[d];
        int c = -1;
        for (int i = 0; i < I.N; ++i)
            if (n[i] > 0) {
                c = i;
                break;
            }
        if (c < 0) {
            if (I.kind == Kind::Mfl) {
                std::vector<int> label = flatten(MultiWord(I.N));
                add(static_cast<int>(d), label, -1, mfl_range(label));
            } else {
                for (int v = 0; v < I.dim; ++v) add(static_cast<int>(d), {v}, v, v);
            }
            continue;
        }
        MultiIndex m = n;
        --m[c];
        int pd = deg_id.at(m);
        std::vector<int> prev = F.by_degree_[pd];
        for (int j = 0; j < I.unit_size[c]; ++j)
            for (int b : prev) {
                auto l = prepend(c, j, b);
                if (!l) continue;
                int rng = range_after(c, b, *l);
                add(static_cast<int>(d), std::move(*l), F.source_[b], rng);
            }
    }

    const int S = F.symbols();
    F.create_.assign(S, std::vector<int>(F.size(), -1));
    F.annihilate_.assign(S, std::vector<int>(F.size(), -1));
    for (int s = 0; s < S; ++s) {
        const int i = F.sym_color_[s], j = F.sym_unit_[s];
        for (int b = 0; b < F.size(); ++b) {
            MultiIndex n = F.degree_of(b);
            if (n[i] + 1 > box[i]) continue;
            ++n[i];
            auto l = prepend(i, j, b);
            if (!l) continue;
            int d = deg_id.at(n);
            auto it = lookup[d].find(*l);
            if (it == lookup[d].end()) throw InternalError("Fock basis is not closed under creation");
            F.create_[s][b] = it->second;
            if (F.annihilate_[s][it->second] >= 0) throw InternalError("creation operator is not injective on the basis");
            F.annihilate_[s][it->second] = b;
        }
    }
    return F;
}

SparseI projection(const TruncatedFock& fock, const ProjectionSpec& p) {
    const Instance& inst = *fock.instance;
    const int N = inst.N;
    auto P_ki = [&](int i, int k) {
        if (k > fock.box[i]) throw OutOfTruncation("projection degree outside the truncation box");
        SparseI X = fock.identity();
        for (int r = 0; r < k; ++r) X = ad(fock, i, X);
        return X;
    };
    auto Q_F = [&](ColorSet F) {
        SparseI X = fock.identity();
        for (int i : colors_of(F & full_set(N))) X = SparseI(X * SparseI(fock.identity() - P_ki(i, 1)));
        return X;
    };
    auto Q_F_n = [&](ColorSet F, const MultiIndex& n) {
        if (static_cast<int>(n.size()) != N) throw ValidationError("degree needs one entry per color");
        for (int i = 0; i < N; ++i) {
            if (!has_color(F, i) && n[i] != 0) throw ValidationError("Q_F^n needs n supported in F");
            if (n[i] > fock.box[i]) throw OutOfTruncation("projection degree outside the truncation box");
        }
        SparseI X = Q_F(F);
        for (int i = N - 1; i >= 0; --i)
            for (int r = 0; r < n[i]; ++r) X = ad(fock, i, X);
        return X;
    };
    switch (p.kind) {
    case ProjKind::p_n: {
        if (static_cast<int>(p.n.size()) != N) throw ValidationError("degree needs one entry per color");
        SparseI X = fock.identity();
        for (int i = 0; i < N; ++i) X = SparseI(X * P_ki(i, p.n[i]));
        return X;
    }
    case ProjKind::P_i:
        return P_ki(p.color, 1);
    case ProjKind::P_ki:
        return P_ki(p.color, p.k);
    case ProjKind::P_F: {
        SparseI X = fock.identity();
        for (int i : colors_of(p.F & full_set(N))) X = SparseI(X * P_ki(i, 1));
        return X;
    }
    case ProjKind::Q_F:
        return Q_F(p.F);
    case ProjKind::Q_F_n:
        return Q_F_n(p.F, p.n);
    case ProjKind::R_F_m: {
        SparseI inner = Q_F(p.F);
        for (int i = 0; i < N; ++i)
            if (!has_color(p.F, i)) inner = SparseI(P_ki(i, p.k + 1) * inner);
        for (int i = 0; i < N; ++i)
            if (!has_color(p.F, i) && p.n[i] != 0) throw ValidationError("R_F^m needs m supported in F");
        for (int i = N - 1; i >= 0; --i)
            for (int r = 0; r < p.n[i]; ++r) inner = ad(fock, i, inner);
        return inner;
    }
    }
    throw InternalError("unknown projection");
}

IdentityReport check_identities(const TruncatedFock& fock) {
    const Instance& inst = *fock.instance;
    const int N = inst.N;
    const int size = fock.size();
    IdentityReport rep;
    auto record = [&](IdentityResult r) {
        if (r.max_residual != 0) rep.all_passed = false;
        rep.results.push_back(std::move(r));
    };

    // t(x)^* t(y) = pi(<x, y>) away from the truncation edge
    {
        IdentityResult r{"inner_product"};
        for (int s = 0; s < fock.symbols(); ++s)
            for (int s2 = 0; s2 < fock.symbols(); ++s2) {
                if (fock.symbol_color(s) != fock.symbol_color(s2)) continue;
                const int i = fock.symbol_color(s);
                for (int b = 0; b < size; ++b) {
                    if (!fock.interior_in(b, i)) continue;
                    int out = fock.annihilate(s2, fock.create(s, b));
                    bool expect = false;
                    if (s == s2) {
                        if (inst.kind == Kind::Graph)
                            expect = inst.edges[i][fock.symbol_unit(s)].source == fock.range(b);
                        else if (inst.kind == Kind::Dynamics)
                            expect = true;
                        else {
                            MultiWord w(N);
                            w[i].push_back(fock.symbol_unit(s));
                            auto lab = fock.label(b);
                            MultiWord mu(N);
                            std::size_t p = 0;
                            for (int c = 0; c < N; ++c) {
                                int len = lab[p++];
                                mu[c].assign(lab.begin() + p, lab.begin() + p + len);
                                p += len;
                            }
                            mu[i].insert(mu[i].begin(), fock.symbol_unit(s));
                            expect = mfl_allowable(std::get<MflSpec>(inst.spec), mu);
                        }
                    }
                    bool got = out == b;
                    if (out >= 0 && out != b) got = false, r.max_residual = 1;
                    if (got != expect) r.max_residual = 1;
                    ++r.checks;
                }
            }
        record(r);
    }

    // sum_j t(x_{i,j}) t(x_{i,j})^* is the projection onto degree_i >= 1
    {
        IdentityResult r{"range_projection"};
        for (int i = 0; i < N; ++i)
            for (int b = 0; b < size; ++b) {
                long long hits = 0;
                bool ok = true;
                for (int j = 0; j < inst.unit_size[i]; ++j) {
                    int s = fock.symbol_index(i, j);
                    int a = fock.annihilate(s, b);
                    if (a < 0) continue;
                    ++hits;
                    ok = ok && fock.create(s, a) == b;
                }
                long long expect = fock.degree_of(b)[i] >= 1 ? 1 : 0;
                if (!ok || hits != expect) r.max_residual = std::max(r.max_residual, std::abs(hits - expect) + (ok ? 0 : 1));
                ++r.checks;
            }
        record(r);
    }

    std::vector<MultiIndex> degs = box_degrees(fock.box);
    // p_n p_m = p_{n v m}
    {
        IdentityResult r{"nica"};
        std::map<MultiIndex, SparseI> P;
        for (const auto& n : degs) {
            ProjectionSpec ps;
            ps.kind = ProjKind::p_n;
            ps.n = n;
            P[n] = projection(fock, ps);
            std::vector<long long> d(size);
            for (int b = 0; b < size; ++b) d[b] = leq(n, fock.degree_of(b)) ? 1 : 0;
            r.max_residual = std::max(r.max_residual, max_abs(SparseI(P[n] - fock.diag(d))));
        }
        for (const auto& n : degs)
            for (const auto& m : degs) {
                MultiIndex j(N);
                for (int i = 0; i < N; ++i) j[i] = std::max(n[i], m[i]);
                r.max_residual = std::max(r.max_residual, max_abs(SparseI(P[n] * P[m] - P[j])));
                ++r.checks;
            }
        record(r);
    }

    // t(x_{i',a})^* t(x_{i,b}) for i != i' rewritten through the factorization rule
    if (inst.kind != Kind::Mfl && N >= 2) {
        IdentityResult r{"covariance"};
        for (int i = 0; i < N; ++i)
            for (int i2 = 0; i2 < N; ++i2) {
                if (i == i2) continue;
                for (int e = 0; e < inst.unit_size[i]; ++e)
                    for (int a = 0; a < inst.unit_size[i2]; ++a)
                        for (int b = 0; b < size; ++b) {
                            if (!fock.interior_in(b, i)) continue;
                            int lhs = fock.annihilate(fock.symbol_index(i2, a), fock.create(fock.symbol_index(i, e), b));
                            std::vector<int> rhs;
                            for (int g = 0; g < inst.unit_size[i2]; ++g) {
                                int gg = 0, h = 0;
                                if (inst.kind == Kind::Graph) {
                                    if (inst.edges[i][e].source != inst.edges[i2][g].range) continue;
                                    if (!inst.swap(i, e, i2, g, gg, h)) continue;
                                }
                                if (gg != a) continue;
                                int x = fock.create(fock.symbol_index(i, h), fock.annihilate(fock.symbol_index(i2, g), b));
                                if (x >= 0) rhs.push_back(x);
                            }
                            bool ok = lhs < 0 ? rhs.empty() : (rhs.size() == 1 && rhs[0] == lhs);
                            if (!ok) r.max_residual = 1;
                            ++r.checks;
                        }
            }
        record(r);
    }

    const ColorSet all = full_set(N);
    auto small = [&](const MultiIndex& n) {
        for (int x : n)
            if (x > 2) return false;
        return true;
    };
    auto restrict = [&](const MultiIndex& n, ColorSet F) {
        MultiIndex m(N, 0);
        for (int i = 0; i < N; ++i)
            if (has_color(F, i)) m[i] = n[i];
        return m;
    };
    auto supported = [&](const MultiIndex& n, ColorSet F) { return restrict(n, F) == n; };
    std::map<std::pair<ColorSet, MultiIndex>, SparseI> Q;
    auto getQ = [&](ColorSet F, const MultiIndex& n) -> const SparseI& {
        auto key = std::make_pair(F, n);
        auto it = Q.find(key);
        if (it != Q.end()) return it->second;
        ProjectionSpec ps;
        ps.kind = ProjKind::Q_F_n;
        ps.F = F;
        ps.n = n;
        return Q.emplace(key, projection(fock, ps)).first->second;
    };

    // Q_F^n Q_C^m = delta_{n, m_F} Q_C^m for nonempty F inside C
    {
        IdentityResult r{"q_products"};
        for (ColorSet C = 1; C <= all; ++C)
            for (ColorSet F = C; F; F = (F - 1) & C)
                for (const auto& n : degs) {
                    if (!supported(n, F) || !small(n)) continue;
                    for (const auto& m : degs) {
                        if (!supported(m, C) || !small(m)) continue;
                        SparseI lhs = getQ(F, n) * getQ(C, m);
                        SparseI rhs = restrict(m, F) == n ? getQ(C, m) : SparseI(size, size);
                        r.max_residual = std::max(r.max_residual, max_abs(SparseI(lhs - rhs)));
                        ++r.checks;
                    }
                }
        record(r);
    }

    // Q_F^n t(x) = t(x) Q_F^{n - m_F} for x of degree m = e_i, zero if n < m_F
    {
        IdentityResult r{"q_creation"};
        for (ColorSet F = 1; F <= all; ++F)
            for (const auto& n : degs) {
                if (!supported(n, F) || !small(n)) continue;
                const SparseI& Qn = getQ(F, n);
                for (int s = 0; s < fock.symbols(); ++s) {
                    const int i = fock.symbol_color(s);
                    SparseI T = fock.creation(s);
                    std::vector<long long> inner(size);
                    for (int b = 0; b < size; ++b) inner[b] = fock.interior_in(b, i) ? 1 : 0;
                    SparseI D = fock.diag(inner);
                    SparseI lhs = SparseI(Qn * T) * D;
                    SparseI rhs(size, size);
                    MultiIndex m = n;
                    if (has_color(F, i)) --m[i];
                    if (m[i] >= 0) rhs = SparseI(T * getQ(F, m)) * D;
                    r.max_residual = std::max(r.max_residual, max_abs(SparseI(lhs - rhs)));
                    ++r.checks;
                }
            }
        record(r);
    }

    // R_F^m as an alternating sum of Q_C^{m+w}, and the R_F^m are mutually orthogonal projections
    {
        IdentityResult r{"r_expansion"};
        const int k = 1;
        std::vector<std::pair<std::pair<ColorSet, MultiIndex>, SparseI>> Rs;
        for (ColorSet F = 0; F <= all; ++F) {
            for (const auto& m : degs) {
                if (!supported(m, F)) continue;
                bool ok = true;
                for (int i = 0; i < N; ++i) ok = ok && m[i] <= k;
                if (!ok) continue;
                ProjectionSpec ps;
                ps.kind = ProjKind::R_F_m;
                ps.F = F;
                ps.n = m;
                ps.k = k;
                bool fits = true;
                for (int i = 0; i < N; ++i)
                    if (!has_color(F, i) && fock.box[i] < k + 1) fits = false;
                if (!fits) continue;
                SparseI R = projection(fock, ps);
                SparseI sum(size, size);
                const ColorSet rest = all & ~F;
                for (ColorSet E = rest;; E = (E - 1) & rest) {
                    ColorSet C = F | E;
                    std::vector<int> cs = colors_of(E);
                    long long sign = (set_size(E) % 2) ? -1 : 1;
                    // w ranges over 0 <= w <= k on the colors of E
                    std::vector<int> w(cs.size(), 0);
                    while (true) {
                        MultiIndex n = m;
                        for (std::size_t t = 0; t < cs.size(); ++t) n[cs[t]] += w[t];
                        sum += sign * getQ(C, n);
                        std::size_t t = 0;
                        while (t < w.size() && w[t] == k) w[t++] = 0;
                        if (t == w.size()) break;
                        ++w[t];
                    }
                    if (E == 0) break;
                }
                r.max_residual = std::max(r.max_residual, max_abs(SparseI(R - sum)));
                ++r.checks;
                Rs.push_back({{F, m}, R});
            }
        }
        for (std::size_t a = 0; a < Rs.size(); ++a)
            for (std::size_t b = 0; b < Rs.size(); ++b) {
                SparseI prod = Rs[a].second * Rs[b].second;
                SparseI expect = a == b ? Rs[a].second : SparseI(size, size);
                r.max_residual = std::max(r.max_residual, max_abs(SparseI(prod - expect)));
                ++r.checks;
            }
        record(r);
    }
    return rep;
}

SparseI conditional_expectation(const TruncatedFock& fock, const SparseI& op) {
    if (op.rows() != fock.size() || op.cols() != fock.size()) throw ValidationError("operator has wrong size");
    std::vector<Eigen::Triplet<long long>> t;
    for (int k = 0; k < op.outerSize(); ++k)
        for (SparseI::InnerIterator it(op, k); it; ++it)
            if (fock.degree_id(static_cast<int>(it.row())) == fock.degree_id(static_cast<int>(it.col())))
                t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    SparseI out(op.rows(), op.cols());
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

namespace {

struct Window {
    ColorSet F = 0;
    int K = 0;
    MultiIndex depth;  // fixed degree off F
    bool contains(const MultiIndex& n, const MultiIndex& shift) const {
        for (std::size_t i = 0; i < n.size(); ++i) {
            if (has_color(F, static_cast<int>(i))) {
                if (n[i] > K - shift[i]) return false;
            } else if (n[i] != depth[i]) {
                return false;
            }
        }
        return true;
    }
};

// Gibbs weight e^{-|n| beta} tau(source) of each basis vector.
std::vector<double> gibbs_weights(const TruncatedFock& fock, const std::vector<double>& tau, double beta) {
    std::vector<double> w(fock.size());
    std::map<int, double> factor;
    for (int b = 0; b < fock.size(); ++b) {
        auto it = factor.find(fock.degree_id(b));
        if (it == factor.end()) {
            int len = 0;
            for (int x : fock.degree_of(b)) len += x;
            it = factor.emplace(fock.degree_id(b), std::exp(-len * beta)).first;
        }
        w[b] = it->second * tau[fock.source(b)];
    }
    return w;
}

std::vector<double> push_trace(const Instance& inst, std::vector<double> tau, const MultiIndex& D) {
    for (int i = 0; i < inst.N; ++i)
        for (int r = 0; r < D[i]; ++r) {
            std::vector<double> nt(inst.dim, 0.0);
            for (int v = 0; v < inst.dim; ++v)
                for (int u = 0; u < inst.dim; ++u) nt[v] += static_cast<double>(inst.B[i](v, u)) * tau[u];
            tau = std::move(nt);
        }
    return tau;
}

}  // namespace

OracleValue oracle_state_eval(const TruncatedFock& fock, const EquilibriumState& state, const MonomialQuery& q, int K) {
    const Instance& inst = *state.instance;
    if (inst.kind == Kind::Mfl) throw UnsupportedError("the Fock state oracle is not available for m-FL instances");
    if (fock.instance->canonical != inst.canonical) throw ValidationError("Fock space belongs to a different instance");
    const int N = inst.N;
    const double beta = state.beta.value;

    struct Term {
        double coef;
        bool diag;
        std::vector<double> a;
        std::vector<int> mu, nu;
        double amax;
    };
    std::vector<Term> terms;
    MultiIndex need(N, 0);
    for (const auto& t : q.terms) {
        Term x{t.coef, t.diag, t.a, {}, {}, 1.0};
        if (t.diag) {
            if (static_cast<int>(t.a.size()) != inst.dim) throw ValidationError("diag entry has wrong length");
            x.amax = 0;
            for (double v : t.a) x.amax = std::max(x.amax, std::abs(v));
        } else {
            if (static_cast<int>(t.mu.size()) != N || static_cast<int>(t.nu.size()) != N)
                throw PathError("words need one component per color");
            x.mu = fock.symbols_of(t.mu);
            x.nu = fock.symbols_of(t.nu);
            for (int i = 0; i < N; ++i) need[i] = std::max({need[i], static_cast<int>(t.mu[i].size()), static_cast<int>(t.nu[i].size())});
        }
        terms.push_back(std::move(x));
    }

    OracleValue out;
    for (const auto& comp : state.components) {
        Window W{comp.F, K, MultiIndex(N, 0)};
        for (int i = 0; i < N; ++i) {
            if (has_color(comp.F, i)) {
                if (fock.box[i] < K) throw OutOfTruncation("truncation box is smaller than K in color " + std::to_string(i + 1));
            } else {
                W.depth[i] = need[i];
                if (fock.box[i] < need[i]) throw OutOfTruncation("truncation box too small for the query in color " + std::to_string(i + 1));
            }
        }
        auto w = gibbs_weights(fock, comp.tau, beta);
        MultiIndex zero(N, 0);
        double Z = 0, num = 0, amax = 0;
        for (int b = 0; b < fock.size(); ++b) {
            if (!W.contains(fock.degree_of(b), zero)) continue;
            Z += w[b];
            for (const auto& t : terms) {
                if (t.diag) {
                    num += t.coef * w[b] * t.a[fock.range(b)];
                } else {
                    int x = fock.create_word(t.mu, fock.annihilate_word(t.nu, b));
                    if (x == b) num += t.coef * w[b];
                }
            }
        }
        for (const auto& t : terms) amax += std::abs(t.coef) * t.amax;
        if (Z <= 0) throw MembershipError("state component has no mass in the truncation window");
        double tail = 0;
        MultiIndex D = W.depth;
        int Dlen = 0;
        for (int x : D) Dlen += x;
        tail = std::exp(-Dlen * beta) * geometric_tail_bound(inst, push_trace(inst, comp.tau, D), state.beta, comp.F, K);
        double value = num / Z;
        double bound = std::isfinite(tail) ? tail * (amax + std::abs(value)) / Z : std::numeric_limits<double>::infinity();
        out.value += comp.weight * value;
        out.tail_bound += comp.weight * bound;
        if (!std::isfinite(bound)) out.certified = false;
    }
    return out;
}

OracleValue oracle_state_eval(const EquilibriumState& state, const MonomialQuery& q, int K, const Tolerances& tol) {
    const Instance& inst = *state.instance;
    if (K < 0) throw ValidationError("K must be nonnegative");
    MultiIndex box(inst.N, 0);
    for (const auto& t : q.terms)
        if (!t.diag)
            for (int i = 0; i < inst.N && i < static_cast<int>(t.mu.size()) && i < static_cast<int>(t.nu.size()); ++i)
                box[i] = std::max({box[i], static_cast<int>(t.mu[i].size()), static_cast<int>(t.nu[i].size())});
    for (const auto& c : state.components)
        for (int i : colors_of(c.F)) box[i] = std::max(box[i], K);
    return oracle_state_eval(build_fock(state.instance, box, tol), state, q, K);
}

KmsCheck check_kms(const EquilibriumState& state, const MultiIndex& bound, int K, double threshold, const Tolerances& tol) {
    const Instance& inst = *state.instance;
    if (inst.kind == Kind::Mfl) throw UnsupportedError("KMS verification on the Fock space is not available for m-FL instances");
    const int N = inst.N;
    if (static_cast<int>(bound.size()) != N) throw ValidationError("degree bound needs one entry per color");
    const double beta = state.beta.value;
    KmsCheck rep;
    const long max_triples = 60000;

    struct Acc {
        double lhs = 0, rhs = 0;
    };
    std::map<std::vector<std::vector<int>>, Acc> acc;
    std::map<std::pair<std::vector<int>, std::vector<int>>, double> gauge;

    for (const auto& comp : state.components) {
        MultiIndex box(N), depth(N, 0);
        for (int i = 0; i < N; ++i) {
            if (has_color(comp.F, i)) {
                box[i] = std::max(K, bound[i]);
            } else {
                depth[i] = bound[i];
                box[i] = 2 * bound[i];
            }
        }
        TruncatedFock fock = build_fock(state.instance, box, tol);
        auto w = gibbs_weights(fock, comp.tau, beta);
        MultiIndex zero(N, 0);
        Window W{comp.F, K, depth};
        double Z = 0;
        std::vector<int> win;
        for (int b = 0; b < fock.size(); ++b)
            if (W.contains(fock.degree_of(b), zero)) {
                Z += w[b];
                win.push_back(b);
            }
        if (Z <= 0) throw MembershipError("state component has no mass in the truncation window");

        auto degs = box_degrees(bound);
        std::map<MultiIndex, std::vector<std::vector<int>>> words;
        for (const auto& n : degs) words[n] = fock.words_of_degree(n);
        long count = 0;
        for (const auto& n : degs)
            for (const auto& k : degs) {
                MultiIndex s(N);
                bool ok = true;
                for (int i = 0; i < N; ++i) {
                    s[i] = n[i] + k[i];
                    ok = ok && s[i] <= bound[i];
                }
                if (!ok) continue;
                int nlen = 0;
                for (int x : n) nlen += x;
                const double factor = std::exp(-nlen * beta);
                std::vector<int> rhs_win;
                for (int b = 0; b < fock.size(); ++b)
                    if (W.contains(fock.degree_of(b), n)) rhs_win.push_back(b);
                for (const auto& xn : words[n])
                    for (const auto& xk : words[k])
                        for (const auto& yw : words[s]) {
                            if (count++ >= max_triples) continue;
                            double L = 0, R = 0;
                            for (int b : win) {
                                int x = fock.create_word(xn, fock.create_word(xk, fock.annihilate_word(yw, b)));
                                if (x == b) L += w[b];
                            }
                            for (int b : rhs_win) {
                                int x = fock.create_word(xk, fock.annihilate_word(yw, fock.create_word(xn, b)));
                                if (x == b) R += w[b];
                            }
                            auto& a = acc[{xn, xk, yw}];
                            a.lhs += comp.weight * L / Z;
                            a.rhs += comp.weight * factor * R / Z;
                        }
            }

        // phi(t(x_mu) t(x_nu)^*) vanishes off the diagonal of the gauge action
        long gcount = 0;
        for (const auto& n : degs)
            for (const auto& m : degs) {
                if (n == m) continue;
                for (const auto& xm : words[n])
                    for (const auto& xn : words[m]) {
                        if (gcount++ >= 2000) break;
                        double v = 0;
                        for (int b : win)
                            if (fock.create_word(xm, fock.annihilate_word(xn, b)) == b) v += w[b];
                        gauge[{xm, xn}] += comp.weight * v / Z;
                    }
            }
    }
    for (const auto& [key, a] : acc) {
        rep.max_residual = std::max(rep.max_residual, std::abs(a.lhs - a.rhs));
        ++rep.triples;
    }
    for (const auto& [key, v] : gauge) {
        rep.gauge_residual = std::max(rep.gauge_residual, std::abs(v));
        ++rep.gauge_checks;
    }
    rep.passed = rep.max_residual <= threshold && rep.gauge_residual <= threshold;
    return rep;
}

void dump_ops(const TruncatedFock& fock, std::ostream& os) {
    const Instance& inst = *fock.instance;
    os << "# basis " << fock.size() << "\n";
    for (int b = 0; b < fock.size(); ++b) os << b << " " << fock.describe(b) << "\n";
    for (int s = 0; s < fock.symbols(); ++s) {
        os << "# creation color " << fock.symbol_color(s) + 1 << " unit " << fock.symbol_unit(s) + 1 << "\n";
        for (int b = 0; b < fock.size(); ++b)
            if (fock.create(s, b) >= 0) os << fock.create(s, b) << " " << b << " 1\n";
    }
    const int atoms = inst.kind == Kind::Mfl ? (inst.algebra ? inst.algebra->atoms : 0) : inst.dim;
    for (int c = 0; c < atoms; ++c) {
        os << "# pi " << (c < static_cast<int>(inst.labels.size()) ? inst.labels[c] : std::to_string(c)) << "\n";
        for (int b = 0; b < fock.size(); ++b)
            if (fock.range(b) == c) os << b << " " << b << " 1\n";
    }
}

}  // namespace kms
