#include "model.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace kms {

std::string kind_name(Kind k) {
    switch (k) {
        case Kind::Graph: return "graph";
        case Kind::Mfl: return "mfl";
        case Kind::Dynamics: return "dynamics";
    }
    return "?";
}

void Instance::require_algebra(const std::string& what) const {
    if (!has_algebra())
        throw UnsupportedError(what + " needs the coefficient algebra, which exceeded the automaton cap");
}

int Instance::vertex_index(const std::string& label) const {
    for (int v = 0; v < dim; ++v)
        if (labels[v] == label) return v;
    throw ValidationError("unknown vertex '" + label + "'");
}

bool Instance::swap(int i, int e, int j, int f, int& g, int& h) const {
    const auto& tab = swap_table_[static_cast<std::size_t>(i) * N + j];
    const auto& r = tab[static_cast<std::size_t>(e) * unit_size[j] + f];
    if (r[0] < 0) return false;
    g = r[0];
    h = r[1];
    return true;
}

namespace {

void check_square(const IntMatrix& m, int n, const std::string& what) {
    if (m.rows() != n || m.cols() != n) throw ValidationError(what + " must be " + std::to_string(n) + "x" + std::to_string(n));
}

void check_commuting(const std::vector<IntMatrix>& mats) {
    for (std::size_t i = 0; i < mats.size(); ++i)
        for (std::size_t j = i + 1; j < mats.size(); ++j) {
            IntMatrix a, b;
            if (!mats[i].multiply(mats[j], a) || !mats[j].multiply(mats[i], b))
                throw ValidationError("overflow while checking commutation");
            if (!(a == b))
                throw CommutationError("matrices of colors " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                                       " do not commute");
        }
}

void check_labels(const std::vector<std::string>& v) {
    if (v.empty()) throw ValidationError("vertex set is empty");
    std::set<std::string> s(v.begin(), v.end());
    if (s.size() != v.size()) throw ValidationError("duplicate vertex labels");
}

}  // namespace

Instance validate(const InstanceSpec& spec, const Tolerances& tol) {
    Instance inst;
    inst.spec = spec;
    if (const auto* g = std::get_if<GraphSpec>(&spec)) {
        inst.kind = Kind::Graph;
        if (g->N < 1 || g->N > 16) throw ValidationError("N must be between 1 and 16");
        check_labels(g->vertices);
        const int n = static_cast<int>(g->vertices.size());
        if (static_cast<int>(g->matrices.size()) != g->N) throw ValidationError("expected N matrices");
        for (int i = 0; i < g->N; ++i) {
            check_square(g->matrices[i], n, "matrix " + std::to_string(i + 1));
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c)
                    if (g->matrices[i](r, c) < 0) throw ValidationError("negative entry in matrix " + std::to_string(i + 1));
        }
        check_commuting(g->matrices);
        inst.N = g->N;
        inst.dim = n;
        inst.labels = g->vertices;
        inst.B = g->matrices;
        for (const auto& b : inst.B) inst.M.push_back(b.transpose());
        inst.edges.resize(inst.N);
        for (int i = 0; i < inst.N; ++i) {
            for (int v = 0; v < n; ++v)
                for (int w = 0; w < n; ++w)
                    for (std::int64_t c = 0; c < g->matrices[i](v, w); ++c) inst.edges[i].push_back(Edge{w, v});
            inst.unit_size.push_back(static_cast<int>(inst.edges[i].size()));
        }
        // factorization tables
        const int N = inst.N;
        inst.swap_table_.assign(static_cast<std::size_t>(N) * N, {});
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                if (i != j)
                    inst.swap_table_[static_cast<std::size_t>(i) * N + j].assign(
                        static_cast<std::size_t>(inst.unit_size[i]) * inst.unit_size[j], {-1, -1});
        auto& E = inst.edges;
        auto set_pair = [&](int i, int e, int j, int f, int gg, int hh) {
            auto& cell = inst.swap_table_[static_cast<std::size_t>(i) * N + j][static_cast<std::size_t>(e) * inst.unit_size[j] + f];
            if (cell[0] >= 0) throw FactorizationError("path listed twice in factorization");
            cell = {gg, hh};
        };
        std::vector<FactorizationBlock> blocks;
        if (g->factorizations) {
            blocks = *g->factorizations;
        } else if (n == 1) {
            for (int i = 0; i < N; ++i)
                for (int j = i + 1; j < N; ++j) {
                    FactorizationBlock b{i, j, {}};
                    for (int e = 0; e < inst.unit_size[i]; ++e)
                        for (int f = 0; f < inst.unit_size[j]; ++f) b.pairs.push_back({e, f, f, e});
                    blocks.push_back(std::move(b));
                }
        }
        if (g->factorizations || n == 1) {
            std::set<std::pair<int, int>> seen;
            for (const auto& b : blocks) {
                if (b.ci < 0 || b.cj >= N || b.ci >= b.cj)
                    throw FactorizationError("factorization colors must satisfy 1 <= i < j <= N");
                if (!seen.insert({b.ci, b.cj}).second) throw FactorizationError("duplicate factorization block");
                for (const auto& p : b.pairs) {
                    auto [e, f, gg, hh] = p;
                    if (e < 0 || e >= inst.unit_size[b.ci] || f < 0 || f >= inst.unit_size[b.cj] || gg < 0 ||
                        gg >= inst.unit_size[b.cj] || hh < 0 || hh >= inst.unit_size[b.ci])
                        throw FactorizationError("edge index out of range");
                    const Edge &xe = E[b.ci][e], &xf = E[b.cj][f], &xg = E[b.cj][gg], &xh = E[b.ci][hh];
                    if (xe.source != xf.range || xg.source != xh.range)
                        throw FactorizationError("factorization pair is not composable");
                    if (xe.range != xg.range || xf.source != xh.source)
                        throw FactorizationError("factorization pair changes endpoints");
                    set_pair(b.ci, e, b.cj, f, gg, hh);
                    set_pair(b.cj, gg, b.ci, hh, e, f);
                }
            }
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j) {
                    if (i == j) continue;
                    for (int e = 0; e < inst.unit_size[i]; ++e)
                        for (int f = 0; f < inst.unit_size[j]; ++f)
                            if (E[i][e].source == E[j][f].range) {
                                int a, b;
                                if (!inst.swap(i, e, j, f, a, b))
                                    throw FactorizationError("factorization misses a path of colors " + std::to_string(i + 1) +
                                                             "," + std::to_string(j + 1));
                            }
                }
            // associativity over all composable three-color paths
            for (int a = 0; a < N; ++a)
                for (int b = a + 1; b < N; ++b)
                    for (int c = b + 1; c < N; ++c)
                        for (int e3 = 0; e3 < inst.unit_size[c]; ++e3)
                            for (int e2 = 0; e2 < inst.unit_size[b]; ++e2) {
                                if (E[c][e3].source != E[b][e2].range) continue;
                                for (int e1 = 0; e1 < inst.unit_size[a]; ++e1) {
                                    if (E[b][e2].source != E[a][e1].range) continue;
                                    int p, q, r, s, t, u;
                                    inst.swap(c, e3, b, e2, p, q);
                                    inst.swap(c, q, a, e1, r, s);
                                    inst.swap(b, p, a, r, t, u);
                                    int p2, q2, r2, s2, t2, u2;
                                    inst.swap(b, e2, a, e1, p2, q2);
                                    inst.swap(c, e3, a, p2, r2, s2);
                                    inst.swap(c, s2, b, q2, t2, u2);
                                    if (std::tie(t, u, s) != std::tie(r2, t2, u2))
                                        throw FactorizationError("factorization rules are not associative");
                                }
                            }
            inst.has_factorization = true;
        } else {
            inst.has_factorization = (N == 1);
        }
    } else if (const auto* d = std::get_if<DynamicsSpec>(&spec)) {
        inst.kind = Kind::Dynamics;
        if (d->N < 1 || d->N > 16) throw ValidationError("N must be between 1 and 16");
        check_labels(d->vertices);
        const int n = static_cast<int>(d->vertices.size());
        if (static_cast<int>(d->maps.size()) != d->N) throw ValidationError("expected N maps");
        for (const auto& m : d->maps) {
            if (static_cast<int>(m.size()) != n) throw ValidationError("each map needs one image per vertex");
            for (int x : m)
                if (x < 0 || x >= n) throw ValidationError("map image out of range");
        }
        for (int i = 0; i < d->N; ++i)
            for (int j = i + 1; j < d->N; ++j)
                for (int v = 0; v < n; ++v)
                    if (d->maps[i][d->maps[j][v]] != d->maps[j][d->maps[i][v]])
                        throw DynamicsError("maps " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                                            " do not commute at vertex " + d->vertices[v]);
        inst.N = d->N;
        inst.dim = n;
        inst.labels = d->vertices;
        inst.maps = d->maps;
        for (int i = 0; i < d->N; ++i) {
            IntMatrix m(n, n);
            for (int v = 0; v < n; ++v) m(v, d->maps[i][v]) = 1;
            inst.M.push_back(m);
            inst.B.push_back(m.transpose());
            inst.unit_size.push_back(1);
        }
        inst.has_factorization = true;
    } else {
        const auto& m = std::get<MflSpec>(spec);
        inst.kind = Kind::Mfl;
        if (m.N < 1 || m.N > 16) throw ValidationError("N must be between 1 and 16");
        if (static_cast<int>(m.symbols.size()) != m.N) throw ValidationError("expected N symbol counts");
        for (int s : m.symbols)
            if (s < 1) throw ValidationError("every color needs at least one symbol");
        for (const auto& f : m.forbidden) {
            if (static_cast<int>(f.size()) != m.N) throw ValidationError("forbidden words need N components");
            bool all_empty = true;
            for (int i = 0; i < m.N; ++i) {
                all_empty = all_empty && f[i].empty();
                for (int k : f[i])
                    if (k < 0 || k >= m.symbols[i]) throw ValidationError("forbidden symbol out of range");
            }
            if (all_empty) throw LanguageError("the empty multiword is forbidden");
        }
        for (int i = 0; i < m.N; ++i) {
            bool any = false;
            for (int k = 0; k < m.symbols[i] && !any; ++k) {
                MultiWord w(m.N);
                w[i] = {k};
                any = mfl_allowable(m, w);
            }
            if (!any) throw LanguageError("no symbol of color " + std::to_string(i + 1) + " is allowable");
        }
        inst.N = m.N;
        inst.unit_size = m.symbols;
        inst.language = std::make_shared<MflLanguage>(m);
        try {
            auto alg = std::make_shared<MflAlgebra>(build_mfl_algebra(*inst.language, tol.mfl_state_cap));
            inst.dim = alg->atoms;
            inst.labels = alg->labels;
            inst.M = alg->transfer;
            for (const auto& x : inst.M) inst.B.push_back(x.transpose());
            inst.algebra = alg;
        } catch (const CapExceeded&) {
            inst.dim = 0;
        }
        inst.has_factorization = true;
    }
    inst.canonical = spec_to_json(spec).dump();
    inst.hash = fnv1a64(inst.canonical);
    return inst;
}

const IntMatrix& transfer_map(const Instance& inst, int i) {
    inst.require_algebra("transfer_map");
    if (i < 0 || i >= inst.N) throw ValidationError("color out of range");
    return inst.M[i];
}

TransferPower multidegree_transfer(const Instance& inst, const MultiIndex& n) {
    inst.require_algebra("multidegree_transfer");
    if (static_cast<int>(n.size()) != inst.N) throw ValidationError("multidegree needs N entries");
    TransferPower out;
    out.exact = IntMatrix::identity(inst.dim);
    out.approx = Eigen::MatrixXd::Identity(inst.dim, inst.dim);
    for (int i = 0; i < inst.N; ++i) {
        if (n[i] < 0) throw ValidationError("multidegree entries must be nonnegative");
        for (int k = 0; k < n[i]; ++k) {
            if (!out.overflow) {
                IntMatrix next;
                if (out.exact.multiply(inst.M[i], next))
                    out.exact = std::move(next);
                else
                    out.overflow = true;
            }
            out.approx = out.approx * inst.M[i].to_double();
        }
    }
    return out;
}

std::vector<bool> compute_fI(const Instance& inst, ColorSet F) {
    inst.require_algebra("compute_fI");
    const int n = inst.dim;
    std::vector<bool> alive(n, true);
    if ((F & full_set(inst.N)) == 0) return std::vector<bool>(n, false);
    std::vector<std::vector<bool>> D(n, std::vector<bool>(n, true));
    // boolean product of the B_i, i in F
    bool first = true;
    for (int i : colors_of(F & full_set(inst.N))) {
        std::vector<std::vector<bool>> b(n, std::vector<bool>(n, false));
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) b[r][c] = inst.B[i](r, c) > 0;
        if (first) {
            D = b;
            first = false;
            continue;
        }
        std::vector<std::vector<bool>> P(n, std::vector<bool>(n, false));
        for (int r = 0; r < n; ++r)
            for (int k = 0; k < n; ++k)
                if (D[r][k])
                    for (int c = 0; c < n; ++c)
                        if (b[k][c]) P[r][c] = true;
        D = std::move(P);
    }
    for (int step = 0; step <= n; ++step) {
        std::vector<bool> next(n, false);
        for (int v = 0; v < n; ++v)
            for (int u = 0; u < n && !next[v]; ++u) next[v] = D[v][u] && alive[u];
        if (next == alive) break;
        alive = std::move(next);
    }
    std::vector<bool> out(n);
    for (int v = 0; v < n; ++v) out[v] = !alive[v];
    return out;
}

IdealLattice IdealLattice::zero(int N, int dim) {
    IdealLattice L;
    L.N = N;
    L.dim = dim;
    return L;
}

std::vector<bool> IdealLattice::get(ColorSet F) const {
    auto it = ideals.find(F);
    if (it == ideals.end()) return std::vector<bool>(dim, false);
    return it->second;
}

IdealLattice compute_cnp_ideals(const Instance& inst) {
    inst.require_algebra("compute_cnp_ideals");
    IdealLattice L = IdealLattice::zero(inst.N, inst.dim);
    const int n = inst.dim;
    const ColorSet all = full_set(inst.N);
    for (ColorSet F = 1; F <= all; ++F) {
        std::vector<bool> bad(n, true);  // intersection of kernels
        for (int i : colors_of(F))
            for (int v = 0; v < n; ++v) {
                bool row_zero = true;
                for (int w = 0; w < n && row_zero; ++w) row_zero = inst.B[i](v, w) == 0;
                if (!row_zero) bad[v] = false;
            }
        std::vector<bool> reach = forward_closure(inst.M, all & ~F, bad);
        std::vector<bool> I(n);
        for (int v = 0; v < n; ++v) I[v] = !reach[v];
        L.ideals[F] = I;
    }
    return L;
}

bool is_perp_invariant(const Instance& inst, ColorSet F, const std::vector<bool>& I) {
    for (int i = 0; i < inst.N; ++i) {
        if (has_color(F, i)) continue;
        for (int v = 0; v < inst.dim; ++v) {
            if (!I[v]) continue;
            for (int u = 0; u < inst.dim; ++u)
                if (inst.M[i](u, v) > 0 && !I[u]) return false;
        }
    }
    return true;
}

void validate_lattice(const Instance& inst, const IdealLattice& L) {
    if (L.N != inst.N || L.dim != inst.dim) throw ValidationError("ideal lattice does not match the instance");
    const ColorSet all = full_set(inst.N);
    for (ColorSet F = 1; F <= all; ++F) {
        auto I = L.get(F);
        if (!is_perp_invariant(inst, F, I))
            throw ValidationError("ideal for " + set_label(F) + " is not invariant under the complementary colors");
        for (ColorSet G = F + 1; G <= all; ++G) {
            if ((F & G) != F) continue;
            auto J = L.get(G);
            for (int v = 0; v < inst.dim; ++v)
                if (I[v] && !J[v])
                    throw ValidationError("ideal lattice is not monotone between " + set_label(F) + " and " + set_label(G));
        }
    }
}

std::vector<FactorizationBlock> lexicographic_factorization(const GraphSpec& g) {
    std::vector<std::vector<Edge>> E(g.N);
    const int n = static_cast<int>(g.vertices.size());
    for (int i = 0; i < g.N; ++i)
        for (int v = 0; v < n; ++v)
            for (int w = 0; w < n; ++w)
                for (std::int64_t c = 0; c < g.matrices[i](v, w); ++c) E[i].push_back(Edge{w, v});
    std::vector<FactorizationBlock> out;
    for (int i = 0; i < g.N; ++i)
        for (int j = i + 1; j < g.N; ++j) {
            FactorizationBlock b{i, j, {}};
            std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> ij, ji;
            for (int e = 0; e < static_cast<int>(E[i].size()); ++e)
                for (int f = 0; f < static_cast<int>(E[j].size()); ++f)
                    if (E[i][e].source == E[j][f].range) ij[{E[i][e].range, E[j][f].source}].push_back({e, f});
            for (int gg = 0; gg < static_cast<int>(E[j].size()); ++gg)
                for (int h = 0; h < static_cast<int>(E[i].size()); ++h)
                    if (E[j][gg].source == E[i][h].range) ji[{E[j][gg].range, E[i][h].source}].push_back({gg, h});
            for (auto& [key, lst] : ij) {
                auto& other = ji[key];
                if (other.size() != lst.size()) throw CommutationError("path counts differ; matrices do not commute");
                for (std::size_t k = 0; k < lst.size(); ++k)
                    b.pairs.push_back({lst[k].first, lst[k].second, other[k].first, other[k].second});
            }
            out.push_back(std::move(b));
        }
    return out;
}

namespace {

IntMatrix matrix_from_json(const json& j, const std::string& what) {
    if (!j.is_array()) throw ValidationError(what + " must be an array of rows");
    int r = static_cast<int>(j.size());
    int c = r ? static_cast<int>(j[0].size()) : 0;
    IntMatrix m(r, c);
    for (int a = 0; a < r; ++a) {
        if (!j[a].is_array() || static_cast<int>(j[a].size()) != c) throw ValidationError(what + " has ragged rows");
        for (int b = 0; b < c; ++b) {
            if (!j[a][b].is_number_integer()) throw ValidationError(what + " entries must be integers");
            m(a, b) = j[a][b].get<std::int64_t>();
        }
    }
    return m;
}

json matrix_to_json(const IntMatrix& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

InstanceSpec spec_from_json(const json& j) {
    try {
        std::string kind = j.at("kind").get<std::string>();
        int N = j.at("N").get<int>();
        if (kind == "graph") {
            GraphSpec g;
            g.N = N;
            g.vertices = j.at("vertices").get<std::vector<std::string>>();
            for (const auto& m : j.at("matrices")) g.matrices.push_back(matrix_from_json(m, "matrix"));
            if (j.contains("factorizations") && !j["factorizations"].is_null()) {
                std::vector<FactorizationBlock> blocks;
                for (const auto& b : j["factorizations"]) {
                    FactorizationBlock fb;
                    auto cols = b.at("colors").get<std::vector<int>>();
                    if (cols.size() != 2) throw ValidationError("factorization block needs two colors");
                    fb.ci = cols[0] - 1;
                    fb.cj = cols[1] - 1;
                    for (const auto& p : b.at("pairs")) {
                        auto lhs = p.at(0).get<std::vector<int>>();
                        auto rhs = p.at(1).get<std::vector<int>>();
                        if (lhs.size() != 2 || rhs.size() != 2) throw ValidationError("factorization pair needs [[e,f],[g,h]]");
                        fb.pairs.push_back({lhs[0] - 1, lhs[1] - 1, rhs[0] - 1, rhs[1] - 1});
                    }
                    blocks.push_back(std::move(fb));
                }
                g.factorizations = std::move(blocks);
            }
            return g;
        }
        if (kind == "mfl") {
            MflSpec m;
            m.N = N;
            m.symbols = j.at("symbols").get<std::vector<int>>();
            for (const auto& f : j.at("forbidden")) {
                MultiWord w;
                for (const auto& comp : f) {
                    Word word;
                    for (const auto& s : comp) word.push_back(s.get<int>() - 1);
                    w.push_back(std::move(word));
                }
                m.forbidden.push_back(std::move(w));
            }
            return m;
        }
        if (kind == "dynamics") {
            DynamicsSpec d;
            d.N = N;
            d.vertices = j.at("vertices").get<std::vector<std::string>>();
            d.maps = j.at("maps").get<std::vector<std::vector<int>>>();
            return d;
        }
        throw ValidationError("unknown instance kind '" + kind + "'");
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed instance: ") + e.what());
    }
}

json spec_to_json(const InstanceSpec& spec) {
    json j;
    if (const auto* g = std::get_if<GraphSpec>(&spec)) {
        j["kind"] = "graph";
        j["N"] = g->N;
        j["vertices"] = g->vertices;
        j["matrices"] = json::array();
        for (const auto& m : g->matrices) j["matrices"].push_back(matrix_to_json(m));
        if (g->factorizations) {
            json blocks = json::array();
            for (const auto& b : *g->factorizations) {
                json pairs = json::array();
                for (const auto& p : b.pairs)
                    pairs.push_back(json::array({json::array({p[0] + 1, p[1] + 1}), json::array({p[2] + 1, p[3] + 1})}));
                blocks.push_back({{"colors", {b.ci + 1, b.cj + 1}}, {"pairs", pairs}});
            }
            j["factorizations"] = blocks;
        } else {
            j["factorizations"] = nullptr;
        }
    } else if (const auto* d = std::get_if<DynamicsSpec>(&spec)) {
        j["kind"] = "dynamics";
        j["N"] = d->N;
        j["vertices"] = d->vertices;
        j["maps"] = d->maps;
    } else {
        const auto& m = std::get<MflSpec>(spec);
        j["kind"] = "mfl";
        j["N"] = m.N;
        j["symbols"] = m.symbols;
        json forb = json::array();
        for (const auto& f : m.forbidden) {
            json w = json::array();
            for (const auto& comp : f) {
                json c = json::array();
                for (int s : comp) c.push_back(s + 1);
                w.push_back(c);
            }
            forb.push_back(w);
        }
        j["forbidden"] = forb;
    }
    return j;
}

Instance load_instance(const std::string& text, const Tolerances& tol) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid JSON: ") + e.what());
    }
    return validate(spec_from_json(j), tol);
}

IdealLattice lattice_from_json(const Instance& inst, const json& j) {
    IdealLattice L = IdealLattice::zero(inst.N, inst.dim);
    try {
        const json& ideals = j.contains("ideals") ? j.at("ideals") : j;
        for (auto it = ideals.begin(); it != ideals.end(); ++it) {
            ColorSet F = parse_set_label(it.key(), inst.N);
            if (F == 0) throw ValidationError("ideal lattice is indexed by nonempty color sets");
            std::vector<bool> I(inst.dim, false);
            for (const auto& v : it.value()) I[inst.vertex_index(v.get<std::string>())] = true;
            L.ideals[F] = I;
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed ideal lattice: ") + e.what());
    }
    validate_lattice(inst, L);
    return L;
}

json lattice_to_json(const Instance& inst, const IdealLattice& L) {
    json ideals = json::object();
    for (ColorSet F = 1; F <= full_set(inst.N); ++F) {
        json arr = json::array();
        auto I = L.get(F);
        for (int v = 0; v < inst.dim; ++v)
            if (I[v]) arr.push_back(inst.labels[v]);
        ideals[set_label(F)] = arr;
    }
    return json{{"ideals", ideals}};
}

}  // namespace kms
