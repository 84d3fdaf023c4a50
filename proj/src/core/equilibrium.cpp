#include "equilibrium.hpp"

#include <cmath>
#include <limits>

#include <Eigen/LU>

namespace kms {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<bool> support_of(const Eigen::VectorXd& x) {
    std::vector<bool> s(x.size());
    for (long v = 0; v < x.size(); ++v) s[v] = x(v) != 0.0;
    return s;
}

// sum_t (e^{-beta} B_i)^t x on trace vectors; `finite` reports convergence.
Eigen::VectorXd trace_series(const Instance& inst, int i, const Beta& beta, const Eigen::VectorXd& x, const Tolerances& tol,
                             bool& finite) {
    const int n = inst.dim;
    const double z = 1.0 / beta.exp_value;
    std::vector<bool> one(n, false);
    auto R = forward_closure(inst.M, 1u << i, support_of(x));
    auto idx = indices_of(R);
    finite = true;
    if (idx.empty()) return x;
    Eigen::MatrixXd Mi = principal_submatrix(inst.M[i].to_double(), idx);
    if (spectral_radius(Mi, tol) < beta.exp_value * (1.0 - tol.certificate_margin)) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(idx.size(), idx.size()) - z * Mi.transpose();
        Eigen::VectorXd b(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) b(k) = x(idx[k]);
        Eigen::VectorXd y = A.partialPivLu().solve(b);
        Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
        for (std::size_t k = 0; k < idx.size(); ++k) out(idx[k]) = y(k);
        return out;
    }
    Eigen::MatrixXd Bi = z * inst.B[i].to_double();
    Eigen::VectorXd y = x, term = x;
    for (int t = 1; t < tol.power_max_iter; ++t) {
        term = Bi * term;
        y += term;
        if (term.cwiseAbs().sum() < 1e-12) return y;
        if (y.sum() > 1e6) break;
    }
    finite = false;
    return y;
}

Eigen::VectorXd trace_series_set(const Instance& inst, ColorSet F, const Beta& beta, Eigen::VectorXd x, const Tolerances& tol,
                                 bool& finite) {
    finite = true;
    for (int i : colors_of(F)) {
        bool ok = true;
        x = trace_series(inst, i, beta, x, tol, ok);
        finite = finite && ok;
    }
    return x;
}

Eigen::VectorXd to_vec(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); }

std::vector<double> from_vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// prod_{i in F} (1 - M_i/s)^{-1} 1 restricted to R.
Eigen::VectorXd neumann_ones(const Instance& inst, ColorSet F, double s, const std::vector<int>& idx) {
    Eigen::VectorXd y = Eigen::VectorXd::Ones(idx.size());
    for (int i : colors_of(F)) {
        Eigen::MatrixXd Mi = principal_submatrix(inst.M[i].to_double(), idx);
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(idx.size(), idx.size()) - Mi / s;
        y = A.partialPivLu().solve(y);
    }
    return y;
}

}  // namespace

PartitionValue partition_value(const Instance& inst, const std::vector<double>& tau, const Beta& beta, ColorSet F,
                               const Tolerances& tol) {
    inst.require_algebra("partition_value");
    if (static_cast<int>(tau.size()) != inst.dim) throw ValidationError("trace has wrong length");
    F &= full_set(inst.N);
    PartitionValue pv;
    if (F == 0) {
        pv.value = 0;
        for (double x : tau) pv.value += x;
        pv.partial_sum = pv.value;
        return pv;
    }
    std::vector<bool> supp(inst.dim);
    for (int v = 0; v < inst.dim; ++v) supp[v] = tau[v] > 0;
    auto R = forward_closure(inst.M, F, supp);
    auto idx = indices_of(R);
    double rho = 0;
    for (int i : colors_of(F)) rho = std::max(rho, restricted_radius(inst, i, R, tol));
    pv.radius_ratio = rho / beta.exp_value;
    if (rho >= beta.exp_value * (1.0 - tol.certificate_margin))
        throw ConvergenceError("partition value diverges: spectral radius " + std::to_string(rho) + " >= e^beta");
    Eigen::VectorXd y = neumann_ones(inst, F, beta.exp_value, idx);
    for (std::size_t k = 0; k < idx.size(); ++k) pv.value += tau[idx[k]] * y(k);
    // box-truncated cross-check
    pv.partial_order = 60;
    Eigen::VectorXd p = Eigen::VectorXd::Ones(inst.dim);
    for (int i : colors_of(F)) {
        Eigen::MatrixXd Mi = inst.M[i].to_double() / beta.exp_value;
        Eigen::VectorXd acc = p, term = p;
        for (int t = 1; t <= pv.partial_order; ++t) {
            term = Mi * term;
            acc += term;
        }
        p = acc;
    }
    for (int v = 0; v < inst.dim; ++v) pv.partial_sum += tau[v] * p(v);
    if (!std::isfinite(pv.value) || pv.value <= 0) throw ConvergenceError("partition value is not finite");
    return pv;
}

double geometric_tail_bound(const Instance& inst, const std::vector<double>& tau, const Beta& beta, ColorSet F, int K,
                            const Tolerances& tol) {
    F &= full_set(inst.N);
    if (F == 0) return 0.0;
    std::vector<bool> supp(inst.dim);
    double mass = 0;
    for (int v = 0; v < inst.dim; ++v) {
        supp[v] = tau[v] > 0;
        mass += tau[v];
    }
    auto R = forward_closure(inst.M, F, supp);
    auto idx = indices_of(R);
    if (idx.empty()) return 0.0;
    double rho = 0;
    for (int i : colors_of(F)) rho = std::max(rho, restricted_radius(inst, i, R, tol));
    const double eb = beta.exp_value;
    if (rho >= eb * (1.0 - tol.certificate_margin)) return kInf;
    const int f = set_size(F);
    double best = kInf;
    for (double t : {1e-4, 1e-3, 1e-2, 0.03, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
        double s = rho + t * (eb - rho);
        if (s <= 0) continue;
        Eigen::VectorXd u = neumann_ones(inst, F, s, idx);
        if (!(u.minCoeff() > 0) || !u.allFinite()) continue;
        bool sub = true;
        for (int i : colors_of(F)) {
            Eigen::VectorXd Mu = principal_submatrix(inst.M[i].to_double(), idx) * u;
            for (long k = 0; k < u.size(); ++k) sub = sub && Mu(k) <= s * u(k) * (1 + 1e-9) + 1e-12;
        }
        if (!sub) continue;
        double tu = 0;
        for (std::size_t k = 0; k < idx.size(); ++k) tu += tau[idx[k]] * u(k);
        double q = s / eb;
        double total = std::pow(1.0 / (1.0 - q), f);
        double box = std::pow((1.0 - std::pow(q, K + 1)) / (1.0 - q), f);
        double bound = tu / u.minCoeff() * (total - box);
        best = std::min(best, bound * (1 + 1e-9) + 1e-15 * mass);
    }
    return best;
}

MonomialQuery MonomialQuery::diag(std::vector<double> a, double coef) {
    MonomialQuery q;
    MonomialTerm t;
    t.coef = coef;
    t.diag = true;
    t.a = std::move(a);
    q.terms.push_back(std::move(t));
    return q;
}

MonomialQuery MonomialQuery::pair(MultiWord mu, MultiWord nu, double coef) {
    MonomialQuery q;
    MonomialTerm t;
    t.coef = coef;
    t.mu = std::move(mu);
    t.nu = std::move(nu);
    q.terms.push_back(std::move(t));
    return q;
}

EquilibriumState EquilibriumState::unchecked(std::shared_ptr<const Instance> inst, const Beta& beta,
                                             std::vector<StateComponent> comps) {
    EquilibriumState st;
    st.instance = std::move(inst);
    st.beta = beta;
    st.checked = false;
    Tolerances tol;
    for (auto& c : comps) {
        bool finite = true;
        Eigen::VectorXd w = trace_series_set(*st.instance, c.F, beta, to_vec(c.tau), tol, finite);
        if (!finite) throw ConvergenceError("partition value diverges for component " + set_label(c.F));
        c.c = w.sum();
        c.psi = from_vec(w / c.c);
    }
    st.components = std::move(comps);
    return st;
}

EquilibriumState build_state(std::shared_ptr<const Instance> inst, const Beta& beta, std::vector<StateComponent> comps,
                             const IdealLattice* lattice, const Tolerances& tol) {
    inst->require_algebra("build_state");
    if (comps.empty()) throw ValidationError("state needs at least one component");
    double wsum = 0;
    for (const auto& c : comps) {
        if (c.weight < 0) throw ValidationError("component weights must be nonnegative");
        wsum += c.weight;
    }
    if (std::abs(wsum - 1.0) > 1e-9) throw ValidationError("component weights must sum to 1");
    for (auto& c : comps) {
        c.F &= full_set(inst->N);
        auto m = trace_membership(*inst, beta, c.F, c.tau, lattice, tol);
        if (!m.member) throw MembershipError("component " + set_label(c.F) + ": " + m.reason);
        auto pv = partition_value(*inst, c.tau, beta, c.F, tol);
        bool finite = true;
        Eigen::VectorXd w = trace_series_set(*inst, c.F, beta, to_vec(c.tau), tol, finite);
        if (!finite || std::abs(w.sum() - pv.value) > 1e-8 * std::max(1.0, pv.value))
            throw ConvergenceError("partition value certificate is inconsistent for component " + set_label(c.F));
        c.c = pv.value;
        c.psi = from_vec(w / pv.value);
    }
    EquilibriumState st;
    st.instance = std::move(inst);
    st.beta = beta;
    st.components = std::move(comps);
    return st;
}

MultiIndex word_degree(const MultiWord& w) {
    MultiIndex n;
    for (const auto& x : w) n.push_back(static_cast<int>(x.size()));
    return n;
}

std::vector<double> unit_inner(const Instance& inst, const MultiWord& nu, const MultiWord& mu) {
    if (static_cast<int>(mu.size()) != inst.N || static_cast<int>(nu.size()) != inst.N)
        throw PathError("words need one component per color");
    for (const MultiWord* w : {&mu, &nu})
        for (int i = 0; i < inst.N; ++i)
            for (int k : (*w)[i])
                if (k < 0 || k >= inst.unit_size[i]) throw PathError("symbol out of range in color " + std::to_string(i + 1));
    std::vector<double> out(inst.dim, 0.0);
    if (inst.kind == Kind::Graph) {
        std::vector<int> src(2, -1);
        for (int which = 0; which < 2; ++which) {
            const MultiWord& w = which == 0 ? mu : nu;
            int prev_source = -1;
            for (int i = 0; i < inst.N; ++i)
                for (int e : w[i]) {
                    const Edge& x = inst.edges[i][e];
                    if (prev_source >= 0 && prev_source != x.range) throw PathError("word " + format_multiword(w) + " is not a path");
                    prev_source = x.source;
                }
            src[which] = prev_source;
        }
        if (mu != nu) return out;
        if (src[0] < 0) return std::vector<double>(inst.dim, 1.0);
        out[src[0]] = 1.0;
        return out;
    }
    if (inst.kind == Kind::Dynamics) {
        if (mu != nu) return out;
        return std::vector<double>(inst.dim, 1.0);
    }
    inst.require_algebra("unit_inner");
    for (const MultiWord* w : {&mu, &nu})
        if (!mfl_allowable(std::get<MflSpec>(inst.spec), *w)) throw PathError("word " + format_multiword(*w) + " is not allowable");
    if (mu != nu) return out;
    auto fol = inst.algebra->follower(*inst.language, mu);
    for (int c = 0; c < inst.dim; ++c) out[c] = fol[c] ? 1.0 : 0.0;
    return out;
}

double evaluate_state(const EquilibriumState& st, const MonomialQuery& q) {
    const Instance& inst = *st.instance;
    double total = 0;
    for (const auto& t : q.terms) {
        std::vector<double> a;
        double scale = t.coef;
        if (t.diag) {
            if (static_cast<int>(t.a.size()) != inst.dim) throw ValidationError("diag entry has wrong length");
            a = t.a;
        } else {
            a = unit_inner(inst, t.nu, t.mu);
            if (word_degree(t.mu) != word_degree(t.nu)) continue;
            int len = 0;
            for (int d : word_degree(t.mu)) len += d;
            scale *= std::exp(-len * st.beta.value);
        }
        for (const auto& c : st.components) {
            double v = 0;
            for (int x = 0; x < inst.dim; ++x) v += c.psi[x] * a[x];
            total += scale * c.weight * v;
        }
    }
    return total;
}

double state_on_QF(const EquilibriumState& st, ColorSet F) {
    for (const auto& c : st.components)
        if (c.F == F) return c.weight / c.c;
    return 0.0;
}

std::vector<double> pi_restriction(const EquilibriumState& st) {
    std::vector<double> out(st.instance->dim, 0.0);
    for (const auto& c : st.components)
        for (int v = 0; v < st.instance->dim; ++v) out[v] += c.weight * c.psi[v];
    return out;
}

WoldDecomposition wold_decompose(const Instance& inst, const Beta& beta, const std::vector<double>& tau_total,
                                 const Tolerances& tol) {
    inst.require_algebra("wold_decompose");
    const int n = inst.dim;
    const ColorSet all = full_set(inst.N);
    if (static_cast<int>(tau_total.size()) != n) throw ValidationError("trace has wrong length");
    double s = 0;
    for (double x : tau_total) {
        if (x < -tol.mass_clamp) throw ValidationError("trace has negative entries");
        s += x;
    }
    if (std::abs(s - 1.0) > 1e-9) throw ValidationError("trace must be normalized");
    const double z = 1.0 / beta.exp_value;
    Eigen::VectorXd tau = to_vec(tau_total);

    auto clamp = [&](Eigen::VectorXd x, const std::string& what) {
        for (long v = 0; v < x.size(); ++v) {
            if (std::abs(x(v)) <= tol.mass_clamp) x(v) = 0.0;
            if (x(v) < 0)
                throw NegativeMassError(what + " is negative (" + std::to_string(x(v)) + "); input is not a KMS trace");
        }
        return x;
    };

    // q_C = phi(pi(.) Q_C) = prod_{i in C} (1 - e^{-beta} B_i) tau
    std::vector<Eigen::VectorXd> q(all + 1);
    for (ColorSet C = 0; C <= all; ++C) {
        Eigen::VectorXd x = tau;
        for (int i : colors_of(C)) x = x - z * (inst.B[i].to_double() * x);
        q[C] = clamp(x, "weight of Q_" + set_label(C));
    }
    // phi_{0,C} restricted to pi(A) Q_F for F subset of C
    auto phi0 = [&](ColorSet C, ColorSet F) {
        bool finite = true;
        Eigen::VectorXd y = trace_series_set(inst, C & ~F, beta, q[C], tol, finite);
        if (!finite || y.sum() > 1.0 + 1e-9)
            throw NotKMSError("the series for the Q_" + set_label(C) + " part diverges; input is not a KMS trace");
        return y;
    };
    WoldDecomposition out;
    out.beta = beta;
    Eigen::VectorXd finite_total = Eigen::VectorXd::Zero(n);
    double mass_total = 0;
    for (ColorSet F = 1; F <= all; ++F) {
        Eigen::VectorXd phiF = Eigen::VectorXd::Zero(n), corner = Eigen::VectorXd::Zero(n);
        for (ColorSet C = F; C <= all; ++C) {
            if ((C & F) != F) continue;
            double sign = (set_size(C & ~F) % 2) ? -1.0 : 1.0;
            phiF += sign * phi0(C, 0);
            corner += sign * phi0(C, F);
        }
        phiF = clamp(phiF, "finite part " + set_label(F));
        corner = clamp(corner, "corner of finite part " + set_label(F));
        double mass = phiF.sum();
        if (mass <= tol.mass_clamp) continue;
        WoldPart p;
        p.F = F;
        p.mass = mass;
        p.tau = from_vec(corner / corner.sum());
        auto mem = trace_membership(inst, beta, F, p.tau, nullptr, tol);
        if (!mem.member) throw NotKMSError("recovered trace for " + set_label(F) + " is not in its simplex: " + mem.reason);
        bool finite = true;
        Eigen::VectorXd model = trace_series_set(inst, F, beta, to_vec(p.tau), tol, finite);
        model *= mass / model.sum();
        double err = (model - phiF).cwiseAbs().maxCoeff();
        if (err > 1e-7) throw NotKMSError("finite part " + set_label(F) + " is not of Gibbs form");
        finite_total += phiF;
        mass_total += mass;
        out.parts.push_back(std::move(p));
    }
    double inf_mass = 1.0 - mass_total;
    if (inf_mass < -tol.mass_clamp) throw NegativeMassError("finite parts exceed total mass");
    if (inf_mass > tol.mass_clamp) {
        Eigen::VectorXd rest = clamp(tau - finite_total, "infinite part");
        WoldPart p;
        p.infinite = true;
        p.mass = inf_mass;
        p.tau = from_vec(rest / rest.sum());
        auto mem = trace_membership(inst, beta, 0, p.tau, nullptr, tol);
        if (!mem.member) throw NotKMSError("infinite part is not an eigen-trace: " + mem.reason);
        out.parts.push_back(std::move(p));
    }
    Eigen::VectorXd rec = Eigen::VectorXd::Zero(n);
    for (const auto& p : out.parts) {
        bool finite = true;
        Eigen::VectorXd w = p.infinite ? to_vec(p.tau) : trace_series_set(inst, p.F, beta, to_vec(p.tau), tol, finite);
        rec += p.mass * w / w.sum();
    }
    out.reconstruction_error = (rec - tau).cwiseAbs().maxCoeff();
    return out;
}

}  // namespace kms
