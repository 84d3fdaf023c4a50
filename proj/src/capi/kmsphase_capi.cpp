#include "kmsphase/kmsphase.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <optional>
#include <sstream>

#include "report.hpp"

struct kms_instance {
    std::shared_ptr<const kms::Instance> inst;
};

struct kms_state {
    kms::EquilibriumState st;
};

struct kms_fock {
    kms::TruncatedFock fock;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_kind;

kms_status fail(kms_status code, const std::string& kind, const std::string& msg) {
    g_kind = kind;
    g_error = msg;
    return code;
}

template <class F>
kms_status guarded(F&& body) {
    g_error.clear();
    g_kind.clear();
    try {
        body();
        return KMS_OK;
    } catch (const kms::Error& e) {
        return fail(static_cast<kms_status>(e.code()), e.kind(), e.what());
    } catch (const kms::json::exception& e) {
        return fail(KMS_ERR_VALIDATION, "ValidationError", std::string("ValidationError: ") + e.what());
    } catch (const std::bad_alloc&) {
        return fail(KMS_ERR_CAP_EXCEEDED, "CapExceeded", "CapExceeded: out of memory");
    } catch (const std::exception& e) {
        return fail(KMS_ERR_INTERNAL, "InternalError", std::string("InternalError: ") + e.what());
    }
}

char* to_c(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

void require(const void* p, const char* what) {
    if (!p) throw kms::Error(kms::ErrorCode::InvalidArgument, "InvalidArgument", std::string(what) + " is null");
}

kms::json parse(const char* text, const char* what) {
    require(text, what);
    try {
        return kms::json::parse(text);
    } catch (const kms::json::exception& e) {
        throw kms::ValidationError(std::string(what) + " is not valid JSON: " + e.what());
    }
}

struct Options {
    kms::ReportOptions report;
    int jobs = 1;
    int k_max = 20;
    std::string format = "json";
    std::optional<kms::IdealLattice> lattice;
};

Options parse_options(const kms::Instance& inst, const char* text) {
    Options o;
    if (!text || !*text) return o;
    kms::json j = parse(text, "options");
    if (!j.is_object()) throw kms::ValidationError("options must be a JSON object");
    if (j.contains("snap_tol")) o.report.tol.snap = j.at("snap_tol").get<double>();
    if (j.contains("tol")) o.report.tol.residual = j.at("tol").get<double>();
    if (o.report.tol.snap <= 0 || o.report.tol.residual <= 0) throw kms::ValidationError("tolerances must be positive");
    if (j.contains("log2")) o.report.log2 = j.at("log2").get<bool>();
    if (j.contains("jobs")) o.jobs = j.at("jobs").get<int>();
    if (j.contains("k_max")) o.k_max = j.at("k_max").get<int>();
    if (o.jobs < 1) throw kms::ValidationError("jobs must be at least 1");
    if (o.k_max < 2) throw kms::ValidationError("k_max must be at least 2");
    if (j.contains("format")) o.format = j.at("format").get<std::string>();
    if (o.format != "json" && o.format != "csv") throw kms::ValidationError("format must be json or csv");
    if (j.contains("ideals")) {
        const auto& id = j.at("ideals");
        if (id.is_string() && id.get<std::string>() == "cnp") {
            o.lattice = kms::compute_cnp_ideals(inst);
        } else if (!id.is_null()) {
            o.lattice = kms::lattice_from_json(inst, id);
            kms::validate_lattice(inst, *o.lattice);
        }
    }
    return o;
}

const kms::IdealLattice* lattice_of(const Options& o) { return o.lattice ? &*o.lattice : nullptr; }

kms::Beta beta_of(const char* text) {
    require(text, "beta");
    kms::Beta b = kms::Beta::parse(text);
    if (!(b.value > 0)) throw kms::ValidationError("beta must be positive");
    return b;
}

std::vector<double> vector_of(const kms::json& j, const char* what) {
    if (!j.is_array()) throw kms::ValidationError(std::string(what) + " must be an array");
    std::vector<double> v;
    for (const auto& x : j) v.push_back(x.get<double>());
    return v;
}

kms::EquilibriumState make_state(const kms_instance* h, const char* state_json, const Options& o, bool checked) {
    require(h, "instance");
    auto req = kms::state_request_from_json(*h->inst, parse(state_json, "state"));
    if (!checked) return kms::EquilibriumState::unchecked(h->inst, req.beta, std::move(req.components));
    return kms::build_state(h->inst, req.beta, std::move(req.components), lattice_of(o), o.report.tol);
}

}  // namespace

extern "C" {

const char* kms_last_error_message(void) { return g_error.c_str(); }
const char* kms_last_error_kind(void) { return g_kind.c_str(); }
const char* kms_version(void) { return "1.0.0"; }
void kms_string_free(char* s) { std::free(s); }

kms_status kms_instance_from_json(const char* json_text, kms_instance** out) {
    return guarded([&] {
        require(out, "out");
        *out = nullptr;
        require(json_text, "json_text");
        auto inst = std::make_shared<const kms::Instance>(kms::load_instance(json_text));
        *out = new kms_instance{std::move(inst)};
    });
}

kms_status kms_instance_from_file(const char* path, kms_instance** out) {
    return guarded([&] {
        require(out, "out");
        *out = nullptr;
        require(path, "path");
        std::ifstream in(path);
        if (!in) throw kms::Error(kms::ErrorCode::InvalidArgument, "InvalidArgument", std::string("cannot open ") + path);
        std::stringstream ss;
        ss << in.rdbuf();
        auto inst = std::make_shared<const kms::Instance>(kms::load_instance(ss.str()));
        *out = new kms_instance{std::move(inst)};
    });
}

void kms_instance_free(kms_instance* inst) { delete inst; }

kms_status kms_instance_info(const kms_instance* h, char** out) {
    return guarded([&] {
        require(h, "instance");
        require(out, "out");
        const auto& I = *h->inst;
        kms::json j = kms::report_header(I, {});
        j["vertices"] = I.labels;
        j["unit_size"] = I.unit_size;
        j["has_factorization"] = I.has_factorization;
        j["has_algebra"] = I.has_algebra();
        j["spec"] = kms::spec_to_json(I.spec);
        *out = to_c(kms::dump(j));
    });
}

kms_status kms_cnp_ideals(const kms_instance* h, char** out) {
    return guarded([&] {
        require(h, "instance");
        require(out, "out");
        *out = to_c(kms::dump(kms::lattice_to_json(*h->inst, kms::compute_cnp_ideals(*h->inst))));
    });
}

kms_status kms_entropy(const kms_instance* h, const char* taus_json, const char* options_json, char** out) {
    return guarded([&] {
        require(h, "instance");
        require(out, "out");
        const auto& I = *h->inst;
        Options o = parse_options(I, options_json);
        std::vector<std::vector<double>> taus;
        if (taus_json && *taus_json)
            for (const auto& t : parse(taus_json, "taus")) {
                taus.push_back(vector_of(t, "tau"));
                if (static_cast<int>(taus.back().size()) != I.dim) throw kms::ValidationError("tau has wrong length");
            }
        const kms::ColorSet all = kms::full_set(I.N);
        std::vector<double> slopes;
        std::optional<kms::MflEntropy> mfl;
        if (I.kind == kms::Kind::Mfl) {
            mfl = kms::mfl_entropy(std::get<kms::MflSpec>(I.spec), all, o.k_max, o.report.tol.slope_tol);
            slopes = mfl->slopes;
        } else {
            slopes = kms::slope_table(I, all, o.k_max);
        }
        if (o.format == "csv") {
            *out = to_c(kms::slope_csv(slopes, o.report));
            return;
        }
        auto rep = kms::entropy_report(I, taus, o.k_max, o.report.tol);
        kms::json j = kms::entropy_json(I, rep, o.report);
        if (mfl) j["word_counts"] = kms::mfl_entropy_json(*mfl, o.report);
        *out = to_c(kms::dump(j));
    });
}

kms_status kms_simplex(const kms_instance* h, const char* beta, const char* F_json, const char* options_json, char** out) {
    return guarded([&] {
        require(h, "instance");
        require(out, "out");
        const auto& I = *h->inst;
        Options o = parse_options(I, options_json);
        kms::Beta b = beta_of(beta);
        if (F_json && *F_json) {
            kms::ColorSet F = kms::colors_from_json(parse(F_json, "F"), I.N);
            auto r = kms::f_trace_set(I, b, F, lattice_of(o), o.report.tol);
            kms::json j = kms::report_header(I, o.report);
            j.update(kms::simplex_json(I, r, o.report));
            *out = to_c(kms::dump(j));
        } else {
            *out = to_c(kms::dump(kms::full_simplex_json(I, kms::full_simplex(I, b, lattice_of(o), o.report.tol), o.report)));
        }
    });
}

kms_status kms_phase(const kms_instance* h, const char* beta_min, const char* beta_max, int steps, const char* options_json,
                     char** out) {
    return guarded([&] {
        require(h, "instance");
        require(out, "out");
        const auto& I = *h->inst;
        Options o = parse_options(I, options_json);
        kms::Beta lo = beta_of(beta_min), hi = beta_of(beta_max);
        if (!(lo.value < hi.value)) throw kms::ValidationError("beta range must be increasing");
        if (steps < 1) throw kms::ValidationError("steps must be positive");
        auto d = kms::phase_diagram(I, lo, hi, steps, lattice_of(o), o.jobs, o.report.tol);
        *out = to_c(o.format == "csv" ? kms::phase_csv(I, d, o.report) : kms::dump(kms::phase_json(I, d, o.report)));
    });
}

kms_status kms_ground(const kms_instance* h, const char* options_json, char** out) {
    return guarded([&] {
        require(h, "instance");
        require(out, "out");
        const auto& I = *h->inst;
        Options o = parse_options(I, options_json);
        kms::json j = kms::report_header(I, o.report);
        j.update(kms::ground_json(I, kms::ground_states(I, lattice_of(o))));
        *out = to_c(kms::dump(j));
    });
}

kms_status kms_wold(const kms_instance* h, const char* beta, const char* tau_json, const char* options_json, char** out) {
    return guarded([&] {
        require(h, "instance");
        require(out, "out");
        const auto& I = *h->inst;
        Options o = parse_options(I, options_json);
        auto tau = vector_of(parse(tau_json, "tau"), "tau");
        auto w = kms::wold_decompose(I, beta_of(beta), tau, o.report.tol);
        *out = to_c(kms::dump(kms::wold_json(I, w, o.report)));
    });
}

kms_status kms_state_build(const kms_instance* h, const char* state_json, const char* options_json, kms_state** out) {
    return guarded([&] {
        require(out, "out");
        *out = nullptr;
        require(h, "instance");
        Options o = parse_options(*h->inst, options_json);
        *out = new kms_state{make_state(h, state_json, o, true)};
    });
}

kms_status kms_state_build_unchecked(const kms_instance* h, const char* state_json, kms_state** out) {
    return guarded([&] {
        require(out, "out");
        *out = nullptr;
        *out = new kms_state{make_state(h, state_json, Options{}, false)};
    });
}

void kms_state_free(kms_state* st) { delete st; }

kms_status kms_state_describe(const kms_state* st, char** out) {
    return guarded([&] {
        require(st, "state");
        require(out, "out");
        const auto& I = *st->st.instance;
        kms::json j = kms::report_header(I, {});
        j.update(kms::state_json(I, st->st, {}));
        *out = to_c(kms::dump(j));
    });
}

kms_status kms_state_evaluate(const kms_state* st, const char* query_json, double* out) {
    return guarded([&] {
        require(st, "state");
        require(out, "out");
        auto q = kms::query_from_json(*st->st.instance, parse(query_json, "query"));
        *out = kms::evaluate_state(st->st, q);
    });
}

kms_status kms_state_oracle_eval(const kms_state* st, const char* query_json, int K, char** out) {
    return guarded([&] {
        require(st, "state");
        require(out, "out");
        auto q = kms::query_from_json(*st->st.instance, parse(query_json, "query"));
        *out = to_c(kms::dump(kms::oracle_json(kms::oracle_state_eval(st->st, q, K))));
    });
}

kms_status kms_state_check_kms(const kms_state* st, const char* bound_json, int K, double threshold, char** out) {
    return guarded([&] {
        require(st, "state");
        require(out, "out");
        if (K < 0) throw kms::ValidationError("K must be nonnegative");
        kms::MultiIndex bound;
        for (const auto& x : parse(bound_json, "degree bound")) bound.push_back(x.get<int>());
        *out = to_c(kms::dump(kms::kms_check_json(kms::check_kms(st->st, bound, K, threshold))));
    });
}

kms_status kms_fock_build(const kms_instance* h, const char* box_json, kms_fock** out) {
    return guarded([&] {
        require(out, "out");
        *out = nullptr;
        require(h, "instance");
        kms::json j = parse(box_json, "box");
        kms::MultiIndex box;
        if (j.is_number_integer())
            box.assign(h->inst->N, j.get<int>());
        else
            for (const auto& x : j) box.push_back(x.get<int>());
        *out = new kms_fock{kms::build_fock(h->inst, box)};
    });
}

void kms_fock_free(kms_fock* fock) { delete fock; }

kms_status kms_fock_size(const kms_fock* fock, size_t* out) {
    return guarded([&] {
        require(fock, "fock");
        require(out, "out");
        *out = static_cast<size_t>(fock->fock.size());
    });
}

kms_status kms_fock_check_identities(const kms_fock* fock, char** out) {
    return guarded([&] {
        require(fock, "fock");
        require(out, "out");
        *out = to_c(kms::dump(kms::identity_json(kms::check_identities(fock->fock))));
    });
}

kms_status kms_fock_dump(const kms_fock* fock, const char* path) {
    return guarded([&] {
        require(fock, "fock");
        require(path, "path");
        std::ofstream os(path);
        if (!os) throw kms::Error(kms::ErrorCode::InvalidArgument, "InvalidArgument", std::string("cannot write ") + path);
        kms::dump_ops(fock->fock, os);
    });
}

kms_status kms_fock_oracle_eval(const kms_fock* fock, const kms_state* st, const char* query_json, int K, char** out) {
    return guarded([&] {
        require(fock, "fock");
        require(st, "state");
        require(out, "out");
        auto q = kms::query_from_json(*st->st.instance, parse(query_json, "query"));
        *out = to_c(kms::dump(kms::oracle_json(kms::oracle_state_eval(fock->fock, st->st, q, K))));
    });
}

kms_status kms_verify(const kms_instance* h, int K, const char* options_json, char** out) {
    return guarded([&] {
        require(h, "instance");
        require(out, "out");
        if (K < 1) throw kms::ValidationError("K must be at least 1");
        Options o = parse_options(*h->inst, options_json);
        auto fock = kms::build_fock(h->inst, K, o.report.tol);
        kms::json j = kms::report_header(*h->inst, o.report);
        j["K"] = K;
        j["basis_size"] = fock.size();
        j.update(kms::identity_json(kms::check_identities(fock)));
        *out = to_c(kms::dump(j));
    });
}

}  // extern "C"
