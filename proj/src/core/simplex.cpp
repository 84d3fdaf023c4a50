#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include <Eigen/SVD>

#include "polytope.hpp"

namespace kms {

namespace {

std::vector<bool> filter_set(const Instance& inst, ColorSet F, const IdealLattice* lattice) {
    const ColorSet all = full_set(inst.N);
    std::vector<bool> Z(inst.dim, false);
    if (F != all) {
        auto fI = compute_fI(inst, all & ~F);
        for (int v = 0; v < inst.dim; ++v) Z[v] = Z[v] || fI[v];
    }
    if (lattice && F != 0) {
        auto I = lattice->get(F);
        for (int v = 0; v < inst.dim; ++v) Z[v] = Z[v] || I[v];
    }
    return Z;
}

bool certificate_holds(const Instance& inst, ColorSet F, const std::vector<bool>& support, const Beta& beta,
                       const Tolerances& tol) {
    if (F == 0) return true;
    auto R = forward_closure(inst.M, F, support);
    for (int i : colors_of(F))
        if (restricted_radius(inst, i, R, tol) >= beta.exp_value * (1.0 - tol.certificate_margin)) return false;
    return true;
}

std::optional<Rational> exact_eigenvalue(const Beta& beta, const Tolerances& tol) {
    if (beta.exact_exp) return Rational(beta.exact_exp->first) / Rational(beta.exact_exp->second);
    double r = std::round(beta.exp_value);
    if (r >= 1.0 && r < 9e15 && std::abs(beta.exp_value - r) <= tol.snap * std::max(1.0, r))
        return Rational(static_cast<std::int64_t>(r));
    return std::nullopt;
}

std::vector<double> normalize_point(std::vector<double> t) {
    double s = 0;
    for (double& x : t) {
        if (std::abs(x) < 1e-13) x = 0;
        s += x;
    }
    if (s > 0)
        for (double& x : t) x /= s;
    return t;
}

void add_unique(std::vector<std::vector<double>>& pts, const std::vector<double>& p) {
    for (const auto& q : pts) {
        double d = 0;
        for (std::size_t i = 0; i < p.size(); ++i) d = std::max(d, std::abs(p[i] - q[i]));
        if (d < 1e-9) return;
    }
    pts.push_back(p);
}

}  // namespace

int affine_dimension(const std::vector<std::vector<double>>& pts) {
    if (pts.empty()) return -1;
    if (pts.size() == 1) return 0;
    const int n = static_cast<int>(pts[0].size());
    Eigen::MatrixXd D(pts.size() - 1, n);
    for (std::size_t r = 1; r < pts.size(); ++r)
        for (int c = 0; c < n; ++c) D(r - 1, c) = pts[r][c] - pts[0][c];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(D);
    int rank = 0;
    for (long i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > 1e-9) ++rank;
    return rank;
}

TraceSimplexResult f_trace_set(const Instance& inst, const Beta& beta, ColorSet F, const IdealLattice* lattice,
                               const Tolerances& tol) {
    inst.require_algebra("trace simplex");
    const ColorSet all = full_set(inst.N);
    F &= all;
    const int n = inst.dim;
    TraceSimplexResult res;
    res.beta = beta;
    res.F = F;
    res.filtered = filter_set(inst, F, lattice);
    res.admissible.assign(n, true);
    if (F != 0)
        for (int v = 0; v < n; ++v) {
            std::vector<bool> s(n, false);
            s[v] = true;
            res.admissible[v] = certificate_holds(inst, F, s, beta, tol);
        }
    std::vector<int> idx;
    for (int v = 0; v < n; ++v)
        if (!res.filtered[v] && res.admissible[v]) idx.push_back(v);
    const int m = static_cast<int>(idx.size());
    for (int i = 0; i < inst.N; ++i)
        if (!has_color(F, i)) res.eigen_colors.push_back(i);
    res.eigenvalue = beta.exp_value;

    if (m == 0) return res;

    if (res.eigen_colors.empty()) {
        res.exact = true;
        for (int v : idx) {
            std::vector<double> t(n, 0.0);
            t[v] = 1.0;
            res.extreme_points.push_back(t);
        }
    } else {
        if (n > tol.vertex_enum_max_dim)
            throw DimensionCap("vertex enumeration is limited to " + std::to_string(tol.vertex_enum_max_dim) + " atoms");
        const int rows = static_cast<int>(res.eigen_colors.size()) * n;
        auto lam = exact_eigenvalue(beta, tol);
        if (lam) {
            res.exact = true;
            res.eigenvalue = rational_to_double(*lam);
            RatMatrix C(rows, std::vector<Rational>(m, Rational(0)));
            int r = 0;
            for (int i : res.eigen_colors)
                for (int u = 0; u < n; ++u, ++r)
                    for (int c = 0; c < m; ++c) {
                        C[r][c] = Rational(inst.B[i](u, idx[c]));
                        if (u == idx[c]) C[r][c] -= *lam;
                    }
            RatMatrix K = rational_nullspace(C, m);
            const int k = static_cast<int>(K.size());
            if (k > 0) {
                std::vector<std::vector<Rational>> G(m, std::vector<Rational>(k));
                for (int c = 0; c < m; ++c)
                    for (int j = 0; j < k; ++j) G[c][j] = K[j][c];
                for (const auto& y : extreme_rays<Rational>(G, k)) {
                    std::vector<Rational> t(m, Rational(0));
                    Rational s = 0;
                    for (int c = 0; c < m; ++c) {
                        for (int j = 0; j < k; ++j) t[c] += G[c][j] * y[j];
                        s += t[c];
                    }
                    if (s <= 0) continue;
                    std::vector<double> p(n, 0.0);
                    for (int c = 0; c < m; ++c) p[idx[c]] = rational_to_double(t[c] / s);
                    add_unique(res.extreme_points, p);
                }
            }
        } else {
            const double lamd = beta.exp_value;
            bool all_near = true;
            for (int i : res.eigen_colors) {
                bool near = false;
                for (double ev : real_eigenvalues(inst.M[i].to_double()))
                    near = near || std::abs(ev - lamd) <= tol.snap * std::max(1.0, std::abs(ev)) * 1e3;
                all_near = all_near && near;
            }
            if (all_near) {
                Eigen::MatrixXd C = Eigen::MatrixXd::Zero(rows, m);
                int r = 0;
                for (int i : res.eigen_colors)
                    for (int u = 0; u < n; ++u, ++r)
                        for (int c = 0; c < m; ++c) C(r, c) = static_cast<double>(inst.B[i](u, idx[c])) - (u == idx[c] ? lamd : 0.0);
                bool ambiguous = false;
                Eigen::MatrixXd K = nullspace(C, tol.snap * std::max(1.0, lamd), &ambiguous);
                if (ambiguous)
                    throw EigenSnapAmbiguity("e^beta = " + std::to_string(lamd) +
                                             " lies in the grey zone of the eigen-snap tolerance");
                const int k = static_cast<int>(K.cols());
                if (k > 0) {
                    std::vector<std::vector<double>> G(m, std::vector<double>(k));
                    for (int c = 0; c < m; ++c)
                        for (int j = 0; j < k; ++j) G[c][j] = K(c, j);
                    for (const auto& y : extreme_rays<double>(G, k)) {
                        std::vector<double> p(n, 0.0);
                        for (int c = 0; c < m; ++c)
                            for (int j = 0; j < k; ++j) p[idx[c]] += G[c][j] * y[j];
                        double s = 0;
                        for (double x : p) s += x;
                        if (s <= 1e-12) continue;
                        add_unique(res.extreme_points, normalize_point(p));
                    }
                }
            }
        }
    }
    std::sort(res.extreme_points.begin(), res.extreme_points.end(), std::greater<>());
    for (const auto& p : res.extreme_points)
        for (int i : res.eigen_colors)
            for (int u = 0; u < n; ++u) {
                double s = -beta.exp_value * p[u];
                for (int v = 0; v < n; ++v) s += static_cast<double>(inst.B[i](u, v)) * p[v];
                res.max_residual = std::max(res.max_residual, std::abs(s));
            }
    res.empty = res.extreme_points.empty();
    res.dim = affine_dimension(res.extreme_points);
    return res;
}

TraceSimplexResult finite_trace_set(const Instance& inst, const Beta& beta, const IdealLattice* lattice,
                                    const Tolerances& tol) {
    return f_trace_set(inst, beta, full_set(inst.N), lattice, tol);
}

TraceSimplexResult avt_traces(const Instance& inst, const Beta& beta, const Tolerances& tol) {
    return f_trace_set(inst, beta, 0, nullptr, tol);
}

Membership trace_membership(const Instance& inst, const Beta& beta, ColorSet F, const std::vector<double>& tau,
                            const IdealLattice* lattice, const Tolerances& tol) {
    inst.require_algebra("trace membership");
    Membership m;
    const int n = inst.dim;
    F &= full_set(inst.N);
    if (static_cast<int>(tau.size()) != n) throw ValidationError("trace has wrong length");
    double s = 0;
    bool nonneg = true;
    for (double x : tau) {
        s += x;
        nonneg = nonneg && x >= -tol.residual;
    }
    m.normalized = nonneg && std::abs(s - 1.0) <= 1e-9;
    auto Z = filter_set(inst, F, lattice);
    m.filters_ok = true;
    for (int v = 0; v < n; ++v)
        if (Z[v] && std::abs(tau[v]) > tol.residual) m.filters_ok = false;
    m.eigen_ok = true;
    for (int i = 0; i < inst.N; ++i) {
        if (has_color(F, i)) continue;
        for (int u = 0; u < n; ++u) {
            double r = -beta.exp_value * tau[u];
            for (int v = 0; v < n; ++v) r += static_cast<double>(inst.B[i](u, v)) * tau[v];
            m.residual = std::max(m.residual, std::abs(r));
        }
    }
    m.eigen_ok = m.residual <= tol.residual * std::max(1.0, beta.exp_value);
    std::vector<bool> supp(n);
    for (int v = 0; v < n; ++v) supp[v] = tau[v] > tol.residual;
    m.convergent = certificate_holds(inst, F, supp, beta, tol);
    m.member = m.normalized && m.filters_ok && m.eigen_ok && m.convergent;
    if (!m.normalized)
        m.reason = "not a normalized positive trace";
    else if (!m.filters_ok)
        m.reason = "trace does not vanish on the filter ideals";
    else if (!m.eigen_ok)
        m.reason = "eigen condition fails off " + set_label(F);
    else if (!m.convergent)
        m.reason = "partition value diverges (tracial entropy reaches beta)";
    return m;
}

FullSimplex full_simplex(const Instance& inst, const Beta& beta, const IdealLattice* lattice, const Tolerances& tol) {
    FullSimplex fs;
    fs.beta = beta;
    const ColorSet all = full_set(inst.N);
    for (ColorSet F = 0; F <= all; ++F) fs.parts.push_back(f_trace_set(inst, beta, F, lattice, tol));
    for (ColorSet F = 0; F <= all; ++F)
        for (const auto& p : fs.parts[F].extreme_points)
            for (ColorSet G = 0; G <= all; ++G) {
                if (G == F) continue;
                if (trace_membership(inst, beta, G, p, lattice, tol).member) fs.disjoint = false;
            }
    if (!fs.disjoint) throw InternalError("trace simplices for distinct color sets intersect");
    return fs;
}

namespace {

std::string phase_label(const std::vector<PhasePart>& parts, ColorSet all) {
    std::string out;
    for (const auto& p : parts) {
        if (!p.nonempty) continue;
        std::string name = p.F == 0 ? "inf" : (p.F == all ? "fty" : set_label(p.F));
        out += (out.empty() ? "" : "+") + name;
    }
    return out.empty() ? "none" : out;
}

}  // namespace

PhaseDiagram phase_diagram(const Instance& inst, const Beta& beta_min, const Beta& beta_max, int steps,
                           const IdealLattice* lattice, int jobs, const Tolerances& tol) {
    inst.require_algebra("phase diagram");
    if (steps < 1) throw ValidationError("steps must be positive");
    if (beta_max.value < beta_min.value) throw ValidationError("beta-max is below beta-min");
    PhaseDiagram pd;
    pd.system_entropy = system_entropy(inst, tol).value;
    pd.strong_entropy = strong_entropy(inst, tol);

    std::vector<std::pair<std::string, Beta>> cands;
    std::set<std::int64_t> seen_int;
    for (int i = 0; i < inst.N; ++i)
        for (double ev : real_eigenvalues(inst.M[i].to_double())) {
            if (ev <= 0) continue;
            double r = std::round(ev);
            Beta b;
            if (std::abs(ev - r) <= 1e-9 * std::max(1.0, r)) {
                if (!seen_int.insert(static_cast<std::int64_t>(r)).second) continue;
                b = Beta::parse("log(" + std::to_string(static_cast<std::int64_t>(r)) + ")");
            } else {
                b = Beta::from_double(std::log(ev));
            }
            cands.push_back({"log eigenvalue of color " + std::to_string(i + 1), b});
        }
    cands.push_back({"system entropy", Beta::from_double(pd.system_entropy)});
    cands.push_back({"strong entropy", Beta::from_double(pd.strong_entropy)});
    for (auto& c : cands)
        if (c.first == "system entropy" || c.first == "strong entropy")
            for (const auto& d : cands)
                if (d.second.exact_exp && std::abs(d.second.value - c.second.value) < 1e-12) c.second = d.second;
    pd.critical = cands;

    std::vector<PhaseRow> rows;
    for (int t = 0; t < steps; ++t) {
        double b = steps == 1 ? beta_min.value : beta_min.value + (beta_max.value - beta_min.value) * t / (steps - 1);
        PhaseRow r;
        r.beta = t == 0 ? beta_min : (t == steps - 1 ? beta_max : Beta::from_double(b));
        rows.push_back(r);
    }
    for (const auto& [name, b] : cands) {
        if (b.value < beta_min.value - 1e-12 || b.value > beta_max.value + 1e-12) continue;
        PhaseRow r;
        r.beta = b;
        r.candidate = name;
        rows.push_back(r);
    }
    std::stable_sort(rows.begin(), rows.end(), [](const PhaseRow& a, const PhaseRow& b) { return a.beta.value < b.beta.value; });
    std::vector<PhaseRow> merged;
    for (auto& r : rows) {
        if (!merged.empty() && std::abs(merged.back().beta.value - r.beta.value) < 1e-12) {
            auto& last = merged.back();
            if (!r.candidate.empty()) {
                if (last.candidate.empty() || (!last.beta.exact_exp && r.beta.exact_exp)) last.beta = r.beta;
                last.candidate += (last.candidate.empty() ? "" : "; ") + r.candidate;
            }
            continue;
        }
        merged.push_back(r);
    }

    const ColorSet all = full_set(inst.N);
    auto work = [&](std::size_t k) {
        PhaseRow& r = merged[k];
        try {
            auto fs = full_simplex(inst, r.beta, lattice, tol);
            for (ColorSet F = 0; F <= all; ++F) {
                const auto& p = fs.parts[F];
                r.parts.push_back(PhasePart{F, !p.empty, p.dim, static_cast<int>(p.extreme_points.size())});
            }
            r.label = phase_label(r.parts, all);
        } catch (const EigenSnapAmbiguity&) {
            r.ambiguous = true;
            r.label = "ambiguous";
        }
    };
    jobs = std::max(1, jobs);
    if (jobs == 1) {
        for (std::size_t k = 0; k < merged.size(); ++k) work(k);
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j)
            pool.emplace_back([&, j] {
                for (std::size_t k = j; k < merged.size(); k += jobs) work(k);
            });
        for (auto& th : pool) th.join();
    }
    for (const auto& r : merged) {
        if (r.ambiguous) continue;
        if (r.beta.value > pd.strong_entropy + 1e-9)
            for (const auto& p : r.parts)
                if (p.F != all && p.nonempty) pd.above_strong_ok = false;
        if (r.beta.value < pd.system_entropy - 1e-9)
            for (const auto& p : r.parts)
                if (p.nonempty) pd.below_system_ok = false;
    }
    pd.rows = std::move(merged);
    return pd;
}

GroundStates ground_states(const Instance& inst, const IdealLattice* lattice) {
    inst.require_algebra("ground states");
    GroundStates g;
    g.filtered = lattice ? lattice->get(full_set(inst.N)) : std::vector<bool>(inst.dim, false);
    for (int v = 0; v < inst.dim; ++v) {
        if (g.filtered[v]) continue;
        std::vector<double> t(inst.dim, 0.0);
        t[v] = 1.0;
        g.extreme_points.push_back(t);
    }
    g.empty = g.extreme_points.empty();
    g.dim = g.empty ? -1 : static_cast<int>(g.extreme_points.size()) - 1;
    return g;
}

}  // namespace kms
