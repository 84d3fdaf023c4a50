#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace kms {

namespace {

double scale(const ReportOptions& opt) { return opt.log2 ? 1.0 / std::log(2.0) : 1.0; }

json num(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

json entropy_value(double x, const ReportOptions& opt) { return num(x * scale(opt)); }

json point_json(const std::vector<double>& p) {
    json a = json::array();
    for (double x : p) a.push_back(num(x));
    return a;
}

json vertex_set_json(const Instance& inst, const std::vector<bool>& s) {
    json a = json::array();
    for (std::size_t v = 0; v < s.size(); ++v)
        if (s[v]) a.push_back(v < inst.labels.size() ? inst.labels[v] : std::to_string(v));
    return a;
}

std::vector<double> doubles(const json& j, const std::string& what) {
    if (!j.is_array()) throw ValidationError(what + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : j) {
        if (!x.is_number()) throw ValidationError(what + " must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

}  // namespace

json report_header(const Instance& inst, const ReportOptions& opt) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(inst.hash));
    const Tolerances& t = opt.tol;
    return json{{"instance_hash", hex},
                {"kind", kind_name(inst.kind)},
                {"N", inst.N},
                {"units", opt.log2 ? "bits" : "nats"},
                {"tolerances",
                 {{"snap", t.snap},
                  {"residual", t.residual},
                  {"certificate_margin", t.certificate_margin},
                  {"mass_clamp", t.mass_clamp},
                  {"power_tol", t.power_tol},
                  {"power_max_iter", t.power_max_iter},
                  {"dense_eigen_max_dim", t.dense_eigen_max_dim},
                  {"vertex_enum_max_dim", t.vertex_enum_max_dim},
                  {"mfl_state_cap", t.mfl_state_cap},
                  {"fock_size_cap", t.fock_size_cap},
                  {"slope_tol", t.slope_tol}}}};
}

json beta_json(const Beta& b, const ReportOptions& opt) {
    json j{{"value", num(b.value * scale(opt))}, {"text", b.text}};
    if (b.exact_exp) j["exp_beta"] = std::to_string(b.exact_exp->first) + "/" + std::to_string(b.exact_exp->second);
    return j;
}

json colors_json(ColorSet F) {
    json a = json::array();
    for (int i : colors_of(F)) a.push_back(i + 1);
    return a;
}

ColorSet colors_from_json(const json& j, int N) {
    if (j.is_string()) return parse_set_label(j.get<std::string>(), N);
    if (!j.is_array()) throw ValidationError("color set must be an array of 1-based colors");
    ColorSet F = 0;
    for (const auto& x : j) {
        if (!x.is_number_integer()) throw ValidationError("color set must be an array of 1-based colors");
        int c = x.get<int>();
        if (c < 1 || c > N) throw ValidationError("color " + std::to_string(c) + " out of range");
        F |= 1u << (c - 1);
    }
    return F;
}

json entropy_json(const Instance& inst, const EntropyReport& r, const ReportOptions& opt) {
    json j = report_header(inst, opt);
    json per_color = json::array();
    bool empty_dir = false;
    for (double x : r.per_color) {
        per_color.push_back(entropy_value(x, opt));
        empty_dir = empty_dir || !std::isfinite(x);
    }
    json per_subset = json::object();
    for (const auto& [F, x] : r.per_subset) per_subset[set_label(F)] = entropy_value(x, opt);
    j["h_x_color"] = per_color;
    j["h_x_subset"] = per_subset;
    j["h_s"] = entropy_value(r.strong, opt);
    if (inst.has_algebra()) {
        j["h_X"] = entropy_value(r.system, opt);
        if (r.attaining_vertex >= 0) j["attaining_vertex"] = inst.labels[r.attaining_vertex];
        json tr = json::array();
        for (double x : r.tracial) tr.push_back(entropy_value(x, opt));
        j["h_tau"] = tr;
    }
    j["empty_direction"] = empty_dir;
    j["method"] = r.method;
    j["k_used"] = r.k_used;
    return j;
}

json mfl_entropy_json(const MflEntropy& r, const ReportOptions& opt) {
    json slopes = json::array();
    for (double s : r.slopes) slopes.push_back(entropy_value(s, opt));
    return json{{"counts", r.counts},
                {"slopes", slopes},
                {"estimate", entropy_value(r.estimate, opt)},
                {"converged", r.converged},
                {"empty_direction", r.empty_direction}};
}

std::string slope_csv(const std::vector<double>& slopes, const ReportOptions& opt) {
    std::ostringstream os;
    os.precision(17);
    os << "k,slope\n";
    for (std::size_t k = 0; k < slopes.size(); ++k) {
        os << k + 1 << ",";
        if (std::isfinite(slopes[k]))
            os << slopes[k] * scale(opt);
        else
            os << "-inf";
        os << "\n";
    }
    return os.str();
}

json simplex_json(const Instance& inst, const TraceSimplexResult& r, const ReportOptions& opt) {
    json pts = json::array();
    for (const auto& p : r.extreme_points) pts.push_back(point_json(p));
    json eig = json::array();
    for (int i : r.eigen_colors) eig.push_back(i + 1);
    return json{{"beta", beta_json(r.beta, opt)},
                {"F", colors_json(r.F)},
                {"extreme_points", pts},
                {"dim", r.dim},
                {"empty", r.empty},
                {"convex", true},
                {"exact", r.exact},
                {"filters", {{"vanishing", vertex_set_json(inst, r.filtered)}, {"admissible", vertex_set_json(inst, r.admissible)}}},
                {"eigen_colors", eig},
                {"max_residual", num(r.max_residual)}};
}

json full_simplex_json(const Instance& inst, const FullSimplex& r, const ReportOptions& opt) {
    json j = report_header(inst, opt);
    j["beta"] = beta_json(r.beta, opt);
    json parts = json::array();
    for (const auto& p : r.parts) parts.push_back(simplex_json(inst, p, opt));
    j["parts"] = parts;
    j["disjoint"] = r.disjoint;
    return j;
}

json phase_json(const Instance& inst, const PhaseDiagram& d, const ReportOptions& opt) {
    json j = report_header(inst, opt);
    json crit = json::array();
    for (const auto& [name, b] : d.critical) crit.push_back(json{{"name", name}, {"beta", beta_json(b, opt)}});
    json rows = json::array();
    for (const auto& r : d.rows) {
        json parts = json::array();
        for (const auto& p : r.parts)
            parts.push_back(json{{"F", colors_json(p.F)}, {"nonempty", p.nonempty}, {"dim", p.dim}, {"vertices", p.vertices}});
        json row{{"beta", beta_json(r.beta, opt)}, {"label", r.label}, {"parts", parts}, {"ambiguous", r.ambiguous}};
        if (!r.candidate.empty()) row["candidate"] = r.candidate;
        rows.push_back(row);
    }
    j["critical"] = crit;
    j["h_X"] = entropy_value(d.system_entropy, opt);
    j["h_s"] = entropy_value(d.strong_entropy, opt);
    j["rows"] = rows;
    j["checks"] = {{"above_strong_fty_only", d.above_strong_ok}, {"below_system_empty", d.below_system_ok}};
    return j;
}

std::string phase_csv(const Instance& inst, const PhaseDiagram& d, const ReportOptions& opt) {
    std::ostringstream os;
    os.precision(17);
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(inst.hash));
    {
        std::ostringstream h;
        h << "# instance_hash=" << hex << " snap=" << opt.tol.snap << " residual=" << opt.tol.residual << "\n";
        os << h.str();
    }
    os << "beta,F_mask,nonempty,dim,vertices,candidate\n";
    for (const auto& r : d.rows)
        for (const auto& p : r.parts)
            os << r.beta.value * scale(opt) << "," << p.F << "," << (p.nonempty ? 1 : 0) << "," << p.dim << "," << p.vertices
               << "," << r.candidate << "\n";
    return os.str();
}

json ground_json(const Instance& inst, const GroundStates& g) {
    json pts = json::array();
    for (const auto& p : g.extreme_points) pts.push_back(point_json(p));
    return json{{"extreme_points", pts}, {"dim", g.dim}, {"empty", g.empty}, {"filters", {{"vanishing", vertex_set_json(inst, g.filtered)}}}};
}

StateRequest state_request_from_json(const Instance& inst, const json& j) {
    StateRequest r;
    try {
        const json& b = j.at("beta");
        r.beta = b.is_string() ? Beta::parse(b.get<std::string>()) : Beta::from_double(b.get<double>());
        for (const auto& c : j.at("components")) {
            StateComponent sc;
            sc.F = colors_from_json(c.at("F"), inst.N);
            sc.tau = doubles(c.at("tau"), "tau");
            if (static_cast<int>(sc.tau.size()) != inst.dim) throw ValidationError("tau has wrong length");
            sc.weight = c.contains("w") ? c.at("w").get<double>() : 1.0;
            r.components.push_back(std::move(sc));
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed state: ") + e.what());
    }
    if (r.components.empty()) throw ValidationError("state has no components");
    return r;
}

json state_json(const Instance& inst, const EquilibriumState& s, const ReportOptions& opt) {
    json comps = json::array();
    for (const auto& c : s.components)
        comps.push_back(json{{"F", colors_json(c.F)}, {"tau", point_json(c.tau)}, {"w", c.weight}, {"c", num(c.c)}, {"psi", point_json(c.psi)}});
    json j{{"beta", beta_json(s.beta, opt)}, {"components", comps}, {"checked", s.checked}};
    j["pi_restriction"] = point_json(pi_restriction(s));
    (void)inst;
    return j;
}

MultiWord multiword_from_json(const Instance& inst, const json& j) {
    if (!j.is_array() || static_cast<int>(j.size()) != inst.N) throw PathError("words need one component per color");
    MultiWord w(inst.N);
    for (int i = 0; i < inst.N; ++i) {
        if (!j[i].is_array()) throw PathError("word component must be an array");
        for (const auto& x : j[i]) {
            if (!x.is_number_integer()) throw PathError("word symbols must be integers");
            int k = x.get<int>();
            if (k < 1 || k > inst.unit_size[i]) throw PathError("symbol " + std::to_string(k) + " out of range in color " + std::to_string(i + 1));
            w[i].push_back(k - 1);
        }
    }
    return w;
}

MonomialQuery query_from_json(const Instance& inst, const json& j) {
    MonomialQuery q;
    try {
        const json& terms = j.is_array() ? j : j.at("terms");
        for (const auto& t : terms) {
            MonomialTerm m;
            m.coef = t.contains("coef") ? t.at("coef").get<double>() : 1.0;
            if (t.contains("diag")) {
                m.diag = true;
                m.a = doubles(t.at("diag"), "diag");
                if (static_cast<int>(m.a.size()) != inst.dim) throw ValidationError("diag entry has wrong length");
            } else {
                m.mu = multiword_from_json(inst, t.at("mu"));
                m.nu = multiword_from_json(inst, t.at("nu"));
            }
            q.terms.push_back(std::move(m));
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed query: ") + e.what());
    }
    return q;
}

json wold_json(const Instance& inst, const WoldDecomposition& w, const ReportOptions& opt) {
    json j = report_header(inst, opt);
    j["beta"] = beta_json(w.beta, opt);
    json parts = json::array();
    const ColorSet all = full_set(inst.N);
    double fty = 0, inf = 0;
    for (const auto& p : w.parts) {
        json pj{{"mass", num(p.mass)}, {"tau", point_json(p.tau)}};
        if (p.infinite)
            pj["F"] = "inf";
        else
            pj["F"] = colors_json(p.F);
        parts.push_back(pj);
        if (p.infinite) inf += p.mass;
        if (!p.infinite && p.F == all) fty += p.mass;
    }
    j["fty"] = num(fty);
    j["inf"] = num(inf);
    j["parts"] = parts;
    j["reconstruction_error"] = num(w.reconstruction_error);
    return j;
}

json identity_json(const IdentityReport& r) {
    json res = json::array();
    for (const auto& x : r.results) res.push_back(json{{"name", x.name}, {"checks", x.checks}, {"max_residual", x.max_residual}});
    return json{{"identities", res}, {"all_passed", r.all_passed}};
}

json kms_check_json(const KmsCheck& r) {
    return json{{"max_residual", num(r.max_residual)},
                {"triples", r.triples},
                {"gauge_residual", num(r.gauge_residual)},
                {"gauge_checks", r.gauge_checks},
                {"passed", r.passed}};
}

json oracle_json(const OracleValue& v) {
    return json{{"value", num(v.value)}, {"tail_bound", num(v.tail_bound)}, {"certified", v.certified}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace kms
