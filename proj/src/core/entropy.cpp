#include "entropy.hpp"

#include <cmath>
#include <limits>

namespace kms {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double r) { return r > 0 ? std::log(r) : kNegInf; }
}  // namespace

double restricted_radius(const Instance& inst, int i, const std::vector<bool>& R, const Tolerances& tol) {
    auto idx = indices_of(R);
    if (idx.empty()) return 0.0;
    return spectral_radius(principal_submatrix(inst.M[i].to_double(), idx), tol);
}

double restricted_log_radius(const Instance& inst, ColorSet F, const std::vector<bool>& R, const Tolerances& tol) {
    double best = kNegInf;
    for (int i : colors_of(F & full_set(inst.N))) best = std::max(best, safe_log(restricted_radius(inst, i, R, tol)));
    return best;
}

double fiber_entropy(const Instance& inst, ColorSet F, const Tolerances& tol) {
    F &= full_set(inst.N);
    if (F == 0) return 0.0;
    if (inst.kind == Kind::Mfl) {
        if (!inst.has_algebra()) return mfl_entropy(std::get<MflSpec>(inst.spec), F, 20, tol.slope_tol).estimate;
        std::vector<bool> start(inst.dim, false);
        start[inst.algebra->empty_atom] = true;
        return restricted_log_radius(inst, F, forward_closure(inst.M, F, start), tol);
    }
    return restricted_log_radius(inst, F, std::vector<bool>(inst.dim, true), tol);
}

double strong_entropy(const Instance& inst, const Tolerances& tol) { return fiber_entropy(inst, full_set(inst.N), tol); }

double tracial_entropy(const Instance& inst, const std::vector<double>& tau, ColorSet F, const Tolerances& tol) {
    inst.require_algebra("tracial_entropy");
    if (static_cast<int>(tau.size()) != inst.dim) throw ValidationError("trace has wrong length");
    F &= full_set(inst.N);
    if (F == 0) return 0.0;
    std::vector<bool> supp(inst.dim);
    for (int v = 0; v < inst.dim; ++v) supp[v] = tau[v] > 0;
    return restricted_log_radius(inst, F, forward_closure(inst.M, F, supp), tol);
}

SystemEntropy system_entropy(const Instance& inst, const Tolerances& tol) {
    inst.require_algebra("system_entropy");
    SystemEntropy out;
    double best = std::numeric_limits<double>::infinity();
    const ColorSet all = full_set(inst.N);
    for (int v = 0; v < inst.dim; ++v) {
        std::vector<bool> start(inst.dim, false);
        start[v] = true;
        double h = restricted_log_radius(inst, all, forward_closure(inst.M, all, start), tol);
        if (h < best) {
            best = h;
            out.attaining_vertex = v;
        }
    }
    out.value = std::max(0.0, best);
    if (out.value == 0.0 && best < 0.0) out.attaining_vertex = -1;
    return out;
}

std::vector<std::vector<std::int64_t>> block_sum_vectors(const Instance& inst, ColorSet F, int k_max) {
    inst.require_algebra("block_sum_vectors");
    const int n = inst.dim;
    std::vector<std::vector<std::int64_t>> G(k_max + 1, std::vector<std::int64_t>(n, 0));
    G[0].assign(n, 1);
    for (int j : colors_of(F & full_set(inst.N))) {
        std::vector<std::vector<std::int64_t>> H(k_max + 1);
        H[0] = G[0];
        for (int k = 1; k <= k_max; ++k) {
            H[k] = G[k];
            for (int v = 0; v < n; ++v)
                for (int w = 0; w < n; ++w) {
                    std::int64_t p;
                    if (__builtin_mul_overflow(inst.M[j](v, w), H[k - 1][w], &p) || __builtin_add_overflow(H[k][v], p, &H[k][v]))
                        throw CapExceeded("block sum overflows 64-bit integers");
                }
        }
        G = std::move(H);
    }
    return G;
}

std::vector<double> slope_table(const Instance& inst, ColorSet F, int k_max) {
    inst.require_algebra("slope_table");
    const int n = inst.dim;
    // log-scaled recursion: G[k] stored with a common scale exponent per k
    std::vector<Eigen::VectorXd> G(k_max + 1, Eigen::VectorXd::Zero(n));
    std::vector<double> logscale(k_max + 1, 0.0);
    G[0] = Eigen::VectorXd::Ones(n);
    for (int j : colors_of(F & full_set(inst.N))) {
        Eigen::MatrixXd M = inst.M[j].to_double();
        std::vector<Eigen::VectorXd> H(k_max + 1);
        std::vector<double> hs(k_max + 1, 0.0);
        H[0] = G[0];
        hs[0] = logscale[0];
        for (int k = 1; k <= k_max; ++k) {
            Eigen::VectorXd prev = M * H[k - 1];
            double s = std::max(logscale[k], hs[k - 1]);
            H[k] = G[k] * std::exp(logscale[k] - s) + prev * std::exp(hs[k - 1] - s);
            double m = H[k].cwiseAbs().maxCoeff();
            if (m > 0) {
                H[k] /= m;
                s += std::log(m);
            }
            hs[k] = s;
        }
        G = std::move(H);
        logscale = std::move(hs);
    }
    std::vector<double> out;
    for (int k = 1; k <= k_max; ++k) {
        double m = G[k].cwiseAbs().maxCoeff();
        out.push_back(m > 0 ? (logscale[k] + std::log(m)) / k : kNegInf);
    }
    return out;
}

MflEntropy mfl_entropy(const MflSpec& spec, ColorSet F, int k_max, double tol) {
    MflEntropy out;
    F &= full_set(spec.N);
    for (int k = 0; k <= k_max; ++k) out.counts.push_back(mfl_allowable_words(spec, k, F));
    for (int k = 1; k <= k_max; ++k)
        out.slopes.push_back(out.counts[k] > 0 ? std::log(static_cast<double>(out.counts[k])) / k : kNegInf);
    if (F == 0 || k_max == 0) {
        out.estimate = 0.0;
        return out;
    }
    out.estimate = out.slopes.back();
    out.empty_direction = out.counts.back() == 0;
    if (k_max >= 2 && !out.empty_direction) out.converged = std::abs(out.slopes[k_max - 1] - out.slopes[k_max - 2]) <= tol;
    return out;
}

EntropyReport entropy_report(const Instance& inst, const std::vector<std::vector<double>>& taus, int k_max,
                             const Tolerances& tol) {
    EntropyReport r;
    r.method = inst.has_algebra() ? "spectral" : "finite-k slope";
    r.k_used = inst.has_algebra() ? 0 : k_max;
    for (int i = 0; i < inst.N; ++i) r.per_color.push_back(fiber_entropy(inst, 1u << i, tol));
    for (ColorSet F = 1; F <= full_set(inst.N); ++F) r.per_subset.push_back({F, fiber_entropy(inst, F, tol)});
    r.strong = strong_entropy(inst, tol);
    if (inst.has_algebra()) {
        auto s = system_entropy(inst, tol);
        r.system = s.value;
        r.attaining_vertex = s.attaining_vertex;
        for (const auto& t : taus) r.tracial.push_back(tracial_entropy(inst, t, full_set(inst.N), tol));
    }
    return r;
}

}  // namespace kms
