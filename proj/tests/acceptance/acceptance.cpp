// Acceptance runner: prints one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "report.hpp"

using namespace kms;

namespace {

std::shared_ptr<const Instance> load(const std::string& name) {
    std::ifstream in(std::string(KMS_DATA_DIR) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return std::make_shared<const Instance>(load_instance(ss.str()));
}

std::shared_ptr<const Instance> graph(const std::vector<IntMatrix>& mats) {
    GraphSpec g;
    g.N = static_cast<int>(mats.size());
    for (int v = 0; v < mats[0].rows(); ++v) g.vertices.push_back("v" + std::to_string(v));
    g.matrices = mats;
    return std::make_shared<const Instance>(validate(g));
}

struct Check {
    bool ok = true;
    std::string detail;
    void require(bool cond, const std::string& what) {
        if (!cond && ok) detail = what;
        ok = ok && cond;
    }
};

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

bool is_delta(const std::vector<double>& p, int v, double tol = 1e-9) {
    for (int i = 0; i < static_cast<int>(p.size()); ++i)
        if (!close(p[i], i == v ? 1.0 : 0.0, tol)) return false;
    return true;
}

const double L2 = std::log(2.0), L3 = std::log(3.0);

// Single vertex, two colors with 2 and 3 loops.
Check a1() {
    Check c;
    auto e1 = load("e1.json");
    auto rep = entropy_report(*e1, {{1.0}});
    c.require(close(rep.strong, L3, 1e-12), "h^s != log 3");
    c.require(close(rep.per_color[0], L2, 1e-12), "h^{x,1} != log 2");
    c.require(close(rep.system, L3, 1e-12), "h_X != log 3");
    auto pd = phase_diagram(*e1, Beta::from_double(0.5), Beta::from_double(2.0), 30);
    c.require(close(pd.system_entropy, L3, 1e-12), "phase h_X");
    bool saw_critical = false;
    for (const auto& row : pd.rows) {
        double b = row.beta.value;
        int nonempty = 0;
        for (const auto& p : row.parts) nonempty += p.nonempty;
        if (close(b, L3, 1e-12)) {
            saw_critical = true;
            c.require(nonempty == 1 && row.parts[1].nonempty && row.parts[1].vertices == 1,
                      "at log 3 expected exactly the {1} part with one trace");
        } else if (b < L3) {
            c.require(nonempty == 0, "nonempty part below log 3 at beta=" + std::to_string(b));
        } else {
            c.require(nonempty == 1 && row.parts[3].nonempty && row.parts[3].vertices == 1,
                      "expected fty-only single trace at beta=" + std::to_string(b));
        }
    }
    c.require(saw_critical, "scan misses beta = log 3");
    c.require(pd.above_strong_ok && pd.below_system_ok, "phase invariants");
    if (c.ok) c.detail = "h^s=log3, h^{x,1}=log2, h_X=log3, " + std::to_string(pd.rows.size()) + " phase rows";
    return c;
}

// Irreducible commuting pair with common Perron eigenvalue 2.
Check a2() {
    Check c;
    auto pf = load("pf_pair.json");
    auto avt = avt_traces(*pf, Beta::parse("log(2)"));
    c.require(avt.extreme_points.size() == 1, "avt should be a single point");
    if (!avt.extreme_points.empty()) {
        const auto& p = avt.extreme_points[0];
        c.require(close(p[0], 0.5, 1e-9) && close(p[1], 0.5, 1e-9), "avt point != (1/2,1/2)");
        for (int i = 0; i < 2; ++i) {
            double r = 0;
            for (int v = 0; v < 2; ++v) {
                double s = -2.0 * p[v];
                for (int w = 0; w < 2; ++w) s += static_cast<double>(pf->B[i](v, w)) * p[w];
                r = std::max(r, std::abs(s));
            }
            c.require(r <= 1e-9, "eigen residual too large");
        }
    }
    for (double b : {0.7, 0.9, 1.2, 2.0, 3.0}) {
        auto fs = full_simplex(*pf, Beta::from_double(b));
        for (ColorSet F = 0; F < 3; ++F) c.require(fs.parts[F].empty, "non-fty part above log 2");
        const auto& fty = fs.parts[3];
        c.require(fty.dim == 1 && fty.extreme_points.size() == 2, "fty part is not the full 1-simplex");
        bool d0 = false, d1 = false;
        for (const auto& p : fty.extreme_points) {
            d0 = d0 || is_delta(p, 0);
            d1 = d1 || is_delta(p, 1);
        }
        c.require(d0 && d1, "fty vertices are not the point masses");
    }
    auto low = full_simplex(*pf, Beta::from_double(0.6));
    for (const auto& p : low.parts) c.require(p.empty, "states below log 2");
    if (c.ok) c.detail = "Avt_log2 = {(1/2,1/2)}, fty = full 1-simplex above log 2";
    return c;
}

// Two-point coexistence for diag(2,3), diag(3,2) at log 3.
Check a3() {
    Check c;
    auto e4 = load("e4.json");
    Beta b = Beta::parse("log(3)");
    auto fs = full_simplex(*e4, b);
    int nonempty = 0;
    for (const auto& p : fs.parts) nonempty += !p.empty;
    c.require(nonempty == 2, "expected exactly two nonempty parts");
    c.require(fs.parts[1].extreme_points.size() == 1 && is_delta(fs.parts[1].extreme_points[0], 0), "F={1} part != {delta_1}");
    c.require(fs.parts[2].extreme_points.size() == 1 && is_delta(fs.parts[2].extreme_points[0], 1), "F={2} part != {delta_2}");
    double c1 = partition_value(*e4, {1.0, 0.0}, b, 1).value;
    double c2 = partition_value(*e4, {0.0, 1.0}, b, 2).value;
    c.require(close(c1, 3.0, 1e-9) && close(c2, 3.0, 1e-9), "partition values != 3");
    auto w = wold_decompose(*e4, b, {0.5, 0.5});
    c.require(w.parts.size() == 2, "wold should give two parts");
    for (const auto& p : w.parts) {
        c.require(!p.infinite && close(p.mass, 0.5, 1e-9), "wold weight != 0.5");
        if (p.F == 1) c.require(is_delta(p.tau, 0), "wold trace for {1}");
        if (p.F == 2) c.require(is_delta(p.tau, 1), "wold trace for {2}");
    }
    c.require(w.reconstruction_error <= 1e-9, "reconstruction error");
    if (c.ok) c.detail = "parts {1}:{d1}, {2}:{d2}; c=3,3; wold (0.5,0.5)";
    return c;
}

// Exact operator identities on truncated Fock spaces.
Check a4() {
    Check c;
    std::ostringstream d;
    for (auto [name, K] : {std::pair{std::string("e1.json"), 3}, std::pair{std::string("golden.json"), 4}}) {
        auto inst = load(name);
        auto fock = build_fock(inst, K);
        auto rep = check_identities(fock);
        for (const auto& r : rep.results) {
            c.require(r.max_residual == 0, name + " identity " + r.name + " residual " + std::to_string(r.max_residual));
            c.require(r.checks > 0, name + " identity " + r.name + " had no checks");
        }
        c.require(rep.results.size() >= 6, name + " missing identities");
        d << name << " K=" << K << " basis " << fock.size() << " identities " << rep.results.size() << "; ";
    }
    if (c.ok) c.detail = d.str() + "all residuals 0";
    return c;
}

// Closed-form states against the Fock oracle, KMS residuals and a negative control.
Check a5() {
    Check c;
    auto e1 = load("e1.json");
    Beta b = Beta::parse("log(3)");
    auto st = build_state(e1, b, {StateComponent{1u, {1.0}, 1.0}});
    const int K = 12;
    auto fock = build_fock(e1, MultiIndex{K, 2});
    std::vector<MultiWord> words;
    for (int a = 0; a <= 2; ++a)
        for (int bb = 0; bb <= 2; ++bb) {
            for (int b0 = 0; b0 < fock.size(); ++b0) {
                if (fock.degree_of(b0) != MultiIndex{a, bb}) continue;
                const auto& l = fock.label(b0);
                MultiWord w(2);
                for (std::size_t p = 1; p < l.size(); p += 2) w[l[p]].push_back(l[p + 1]);
                words.push_back(w);
            }
        }
    double worst = 0;
    long compared = 0;
    auto compare = [&](const MonomialQuery& q) {
        double closed = evaluate_state(st, q);
        auto o = oracle_state_eval(fock, st, q, K);
        double gap = std::abs(closed - o.value);
        c.require(o.certified && gap <= o.tail_bound, "oracle gap " + std::to_string(gap) + " exceeds tail bound " + std::to_string(o.tail_bound));
        worst = std::max(worst, gap);
        ++compared;
    };
    compare(MonomialQuery::diag({1.0}));
    for (const auto& mu : words)
        for (const auto& nu : words)
            if (word_degree(mu) == word_degree(nu)) compare(MonomialQuery::pair(mu, nu));
    // off-diagonal degrees evaluate to zero on both sides
    for (std::size_t i = 0; i < words.size(); i += 7)
        for (std::size_t j = 1; j < words.size(); j += 11)
            if (word_degree(words[i]) != word_degree(words[j])) compare(MonomialQuery::pair(words[i], words[j]));

    auto kc = check_kms(st, MultiIndex{2, 2}, 8);
    c.require(kc.passed && kc.max_residual <= 1e-10, "KMS residual " + std::to_string(kc.max_residual));
    auto bad = EquilibriumState::unchecked(e1, Beta::parse("log(63/20)"), {StateComponent{1u, {1.0}, 1.0}});
    auto kb = check_kms(bad, MultiIndex{2, 2}, 8);
    c.require(kb.max_residual > 1e-3, "perturbed state not rejected, residual " + std::to_string(kb.max_residual));
    if (c.ok) {
        std::ostringstream d;
        d << compared << " monomials, max gap " << worst << "; KMS residual " << kc.max_residual << " over " << kc.triples
          << " triples; perturbed residual " << kb.max_residual;
        c.detail = d.str();
    }
    return c;
}

// Word counts of the golden-mean language.
Check a6() {
    Check c;
    auto g = load("golden.json");
    auto r = mfl_entropy(std::get<MflSpec>(g->spec), 1u, 20);
    std::vector<std::int64_t> fib{1, 1};
    for (int k = 2; k < 30; ++k) fib.push_back(fib[k - 1] + fib[k - 2]);
    // fib[m] is the (m+1)-th Fibonacci number, so Fib(k+2) = fib[k+1]
    for (int k = 0; k <= 20; ++k) c.require(r.counts.size() > static_cast<std::size_t>(k) && r.counts[k] == fib[k + 1], "count at k=" + std::to_string(k));
    const double lphi = std::log((1.0 + std::sqrt(5.0)) / 2.0);
    c.require(r.slopes.size() >= 20 && close(r.slopes[19], lphi, 1e-2), "slope at k=20");
    if (c.ok) c.detail = "|B_k| = Fib(k+2) for k<=20, slope_20 = " + std::to_string(r.slopes[19]);
    return c;
}

IntMatrix random_matrix(std::mt19937& rng, int n, int lo, int hi) {
    std::uniform_int_distribution<int> d(lo, hi);
    IntMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = d(rng);
    return m;
}

IntMatrix kron(const IntMatrix& a, const IntMatrix& b) {
    IntMatrix m(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            for (int k = 0; k < b.rows(); ++k)
                for (int l = 0; l < b.cols(); ++l) m(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    return m;
}

std::vector<IntMatrix> random_family(std::mt19937& rng, int kind) {
    std::uniform_int_distribution<int> dim(1, 4), pick(0, 2);
    if (kind == 0) {  // common eigenbasis: diagonal
        int n = dim(rng), N = 2 + pick(rng) % 2;
        std::vector<IntMatrix> out;
        for (int i = 0; i < N; ++i) {
            IntMatrix m(n, n);
            std::uniform_int_distribution<int> d(1, 4);
            for (int v = 0; v < n; ++v) m(v, v) = d(rng);
            out.push_back(m);
        }
        return out;
    }
    if (kind == 1) {  // polynomials in a single nonnegative matrix
        int n = 2 + pick(rng) % 2;
        IntMatrix A = random_matrix(rng, n, 0, 2);
        if (A == IntMatrix(n, n)) A(0, 0) = 1;
        IntMatrix I = IntMatrix::identity(n);
        std::uniform_int_distribution<int> coef(0, 1);
        IntMatrix B2;
        A.multiply(A, B2);
        const int c0 = coef(rng);
        for (int v = 0; v < n; ++v) B2(v, v) += c0;
        IntMatrix B3 = A;
        for (int v = 0; v < n; ++v) B3(v, v) += 1;
        if (pick(rng) == 0) return {A, B2, B3};
        return {A, B2};
    }
    // Kronecker products acting on separate tensor factors
    IntMatrix A = random_matrix(rng, 2, 0, 2), C = random_matrix(rng, 2, 0, 2);
    if (A == IntMatrix(2, 2)) A(1, 1) = 2;
    if (C == IntMatrix(2, 2)) C(0, 1) = 1;
    return {kron(A, IntMatrix::identity(2)), kron(IntMatrix::identity(2), C)};
}

// Randomized property suite over commuting families.
Check a7() {
    Check c;
    std::mt19937 rng(20240611u);
    int instances = 0, states = 0, simplices = 0;
    const double tol = 1e-9;
    for (int t = 0; t < 120; ++t) {
        auto fam = random_family(rng, t % 3);
        std::shared_ptr<const Instance> inst;
        try {
            inst = graph(fam);
        } catch (const Error& e) {
            std::ostringstream m;
            for (const auto& x : fam) m << x.to_double() << "\n--\n";
            c.require(false, std::string(e.what()) + " for family\n" + m.str());
            continue;
        }
        const Instance& I = *inst;
        const ColorSet all = full_set(I.N);
        ++instances;
        double hs = strong_entropy(I);
        // submultiplicativity of block sums in the sup norm
        auto S = block_sum_vectors(I, all, 8);
        auto norm = [](const std::vector<std::int64_t>& v) {
            std::int64_t m = 0;
            for (auto x : v) m = std::max(m, x);
            return static_cast<double>(m);
        };
        for (int k = 1; k <= 4; ++k)
            for (int k2 = 1; k2 <= 4; ++k2)
                c.require(norm(S[k + k2]) <= norm(S[k]) * norm(S[k2]) + 0.5, "submultiplicativity, instance " + std::to_string(t));

        std::vector<Beta> betas;
        for (int i = 0; i < I.N; ++i)
            for (double ev : real_eigenvalues(I.M[i].to_double())) {
                double r = std::round(ev);
                if (ev > 1.0 + 1e-9 && std::abs(ev - r) < 1e-9) betas.push_back(Beta::parse("log(" + std::to_string(static_cast<long>(r)) + ")"));
            }
        if (std::isfinite(hs)) betas.push_back(Beta::from_double(std::max(hs, 0.0) + 0.1));
        betas.push_back(Beta::from_double(0.35));
        for (const auto& b : betas) {
            FullSimplex fs;
            try {
                fs = full_simplex(I, b);
            } catch (const Error& e) {
                c.require(false, std::string("full_simplex failed: ") + e.what());
                continue;
            }
            c.require(fs.disjoint, "simplices intersect");
            for (ColorSet F = 0; F <= all; ++F) {
                const auto& part = fs.parts[F];
                ++simplices;
                if (b.value > hs + 1e-6 && F != all) c.require(part.empty, "non-fty part above h^s, instance " + std::to_string(t));
                for (const auto& tau : part.extreme_points) {
                    // independent disjointness check against every other color set
                    for (ColorSet G = 0; G <= all; ++G)
                        if (G != F) c.require(!trace_membership(I, b, G, tau).member, "extreme point lies in two simplices");
                    double hF = tracial_entropy(I, tau, F), h = tracial_entropy(I, tau, all);
                    c.require(!(hF > h + tol), "h^{tau,F} > h^tau");
                    c.require(!(h > b.value + tol), "h^tau > beta, instance " + std::to_string(t));
                    // extreme traces give pure single-component states
                    auto st = build_state(inst, b, {StateComponent{F, tau, 1.0}});
                    auto w = wold_decompose(I, b, pi_restriction(st));
                    ++states;
                    c.require(w.parts.size() == 1, "extreme trace splits in wold, instance " + std::to_string(t));
                    if (w.parts.size() == 1) {
                        const auto& p = w.parts[0];
                        c.require(close(p.mass, 1.0, tol), "pure part mass");
                        c.require(F == 0 ? p.infinite : (!p.infinite && p.F == F), "pure part has wrong color set");
                        double dist = 0;
                        for (int v = 0; v < I.dim; ++v) dist = std::max(dist, std::abs(p.tau[v] - tau[v]));
                        c.require(dist <= tol, "pure part trace differs");
                    }
                }
            }
        }
    }
    c.require(instances >= 100, "too few instances");
    if (c.ok) {
        std::ostringstream d;
        d << instances << " instances, " << simplices << " simplices, " << states << " extreme states";
        c.detail = d.str();
    }
    return c;
}

// Computed ideals shrink the simplex on an instance with a color-1 source vertex.
Check a8() {
    Check c;
    auto sv = load("source_vertex.json");
    auto L = compute_cnp_ideals(*sv);
    validate_lattice(*sv, L);
    Beta b = Beta::parse("log(2)");
    auto zero = f_trace_set(*sv, b, 1u);
    auto cnp = f_trace_set(*sv, b, 1u, &L);
    c.require(zero.dim == 1 && zero.extreme_points.size() == 2, "zero lattice should give a segment");
    c.require(cnp.dim == 0 && cnp.extreme_points.size() == 1 && is_delta(cnp.extreme_points[0], 0), "CNP lattice should give {delta_s}");
    for (const auto& p : cnp.extreme_points)
        c.require(trace_membership(*sv, b, 1u, p).member, "CNP polytope not contained in the zero-lattice polytope");
    auto g = ground_states(*sv, &L);
    auto I12 = L.get(3u);
    c.require(g.filtered == I12, "ground filter differs from I_{1,2}");
    c.require(I12 == std::vector<bool>{true, true, false}, "I_{1,2} != {s,w}");
    for (const auto& p : g.extreme_points)
        for (int v = 0; v < sv->dim; ++v)
            if (I12[v]) c.require(p[v] == 0.0, "ground state charges a filtered vertex");
    c.require(g.extreme_points.size() == 1 && is_delta(g.extreme_points[0], 2), "ground states should be {delta_z}");
    if (c.ok) c.detail = "zero lattice dim 1, CNP lattice dim 0; ground states avoid I_{1,2} = {s,w}";
    return c;
}

}  // namespace

int main() {
    std::vector<std::pair<std::string, std::function<Check()>>> all{{"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4},
                                                                      {"A5", a5}, {"A6", a6}, {"A7", a7}, {"A8", a8}};
    int failed = 0;
    for (auto& [name, fn] : all) {
        auto t0 = std::chrono::steady_clock::now();
        Check c;
        try {
            c = fn();
        } catch (const std::exception& e) {
            c.ok = false;
            c.detail = std::string("exception: ") + e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %s (%.2fs) %s\n", name.c_str(), c.ok ? "PASS" : "FAIL", secs, c.detail.c_str());
        failed += !c.ok;
    }
    return failed ? 1 : 0;
}
