#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "kmsphase/kmsphase.h"

using nlohmann::json;

namespace {

const std::string DATA = KMS_DATA_DIR;

struct Inst {
    kms_instance* h = nullptr;
    explicit Inst(const std::string& name) {
        REQUIRE(kms_instance_from_file((DATA + "/" + name).c_str(), &h) == KMS_OK);
    }
    ~Inst() { kms_instance_free(h); }
};

json take(char* s) {
    REQUIRE(s != nullptr);
    json j = json::parse(s);
    kms_string_free(s);
    return j;
}

std::string slurp(const std::string& name) {
    std::ifstream in(DATA + "/" + name);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("status codes and error messages") {
    kms_instance* h = reinterpret_cast<kms_instance*>(1);
    CHECK(kms_instance_from_json("{\"kind\":\"graph\"", &h) == KMS_ERR_VALIDATION);
    CHECK(h == nullptr);
    CHECK(std::string(kms_last_error_kind()) == "ValidationError");
    CHECK(std::string(kms_last_error_message()).size() > 0);

    CHECK(kms_instance_from_json(slurp("noncommuting.json").c_str(), &h) == KMS_ERR_VALIDATION);
    CHECK(std::string(kms_last_error_kind()) == "CommutationError");

    CHECK(kms_instance_from_file("/nonexistent/x.json", &h) == KMS_ERR_INVALID_ARGUMENT);
    CHECK(kms_instance_from_json(nullptr, &h) == KMS_ERR_INVALID_ARGUMENT);
    CHECK(kms_instance_from_json("{}", nullptr) == KMS_ERR_INVALID_ARGUMENT);

    char* out = nullptr;
    CHECK(kms_entropy(nullptr, nullptr, nullptr, &out) == KMS_ERR_INVALID_ARGUMENT);
    CHECK(out == nullptr);
    CHECK(std::string(kms_version()).size() > 0);
}

TEST_CASE("a successful call clears the previous error") {
    kms_instance* h = nullptr;
    kms_instance_from_json("[", &h);
    Inst e1("e1.json");
    char* out = nullptr;
    REQUIRE(kms_instance_info(e1.h, &out) == KMS_OK);
    CHECK(std::string(kms_last_error_message()).empty());
    json info = take(out);
    CHECK(info["kind"] == "graph");
    CHECK(info["N"] == 2);
    CHECK(info["has_factorization"] == true);
    CHECK(info["instance_hash"].get<std::string>().size() == 16);
}

TEST_CASE("free functions accept null") {
    kms_instance_free(nullptr);
    kms_state_free(nullptr);
    kms_fock_free(nullptr);
    kms_string_free(nullptr);
}

TEST_CASE("entropy and options") {
    Inst e1("e1.json");
    char* out = nullptr;
    REQUIRE(kms_entropy(e1.h, "[[1]]", nullptr, &out) == KMS_OK);
    json j = take(out);
    CHECK(j["h_X"].get<double>() == doctest::Approx(std::log(3.0)));
    CHECK(j["h_tau"][0].get<double>() == doctest::Approx(std::log(3.0)));
    REQUIRE(kms_entropy(e1.h, nullptr, "{\"log2\": true}", &out) == KMS_OK);
    CHECK(take(out)["h_X"].get<double>() == doctest::Approx(std::log2(3.0)));
    CHECK(kms_entropy(e1.h, "[[1, 0]]", nullptr, &out) == KMS_ERR_VALIDATION);
    CHECK(kms_entropy(e1.h, nullptr, "{\"jobs\": 0}", &out) == KMS_ERR_VALIDATION);
    CHECK(kms_entropy(e1.h, nullptr, "{\"format\": \"xml\"}", &out) == KMS_ERR_VALIDATION);
    CHECK(kms_entropy(e1.h, nullptr, "not json", &out) == KMS_ERR_VALIDATION);

    Inst golden("golden.json");
    REQUIRE(kms_entropy(golden.h, nullptr, "{\"k_max\": 12}", &out) == KMS_OK);
    json g = take(out);
    CHECK(g.dump().find("slope") != std::string::npos);
}

TEST_CASE("simplex, phase, ground and wold") {
    Inst e4("e4.json");
    char* out = nullptr;
    REQUIRE(kms_simplex(e4.h, "log(3)", "[1]", nullptr, &out) == KMS_OK);
    json s = take(out);
    CHECK(s["dim"] == 0);
    CHECK(s["extreme_points"].size() == 1);
    REQUIRE(kms_simplex(e4.h, "log(3)", nullptr, nullptr, &out) == KMS_OK);
    take(out);
    CHECK(kms_simplex(e4.h, "-1", nullptr, nullptr, &out) == KMS_ERR_VALIDATION);
    CHECK(kms_simplex(e4.h, nullptr, nullptr, nullptr, &out) == KMS_ERR_INVALID_ARGUMENT);

    REQUIRE(kms_phase(e4.h, "0.5", "2.0", 8, "{\"format\": \"csv\"}", &out) == KMS_OK);
    std::string csv(out);
    kms_string_free(out);
    CHECK(csv.rfind("# instance_hash=", 0) == 0);
    CHECK(csv.find("beta,F_mask,nonempty,dim") != std::string::npos);
    REQUIRE(kms_phase(e4.h, "0.5", "2.0", 8, "{\"jobs\": 2}", &out) == KMS_OK);
    CHECK(take(out).contains("rows"));

    Inst sv("source_vertex.json");
    REQUIRE(kms_ground(sv.h, "{\"ideals\": \"cnp\"}", &out) == KMS_OK);
    json g = take(out);
    REQUIRE(g["extreme_points"].size() == 1);
    CHECK(g["extreme_points"][0][2].get<double>() == doctest::Approx(1.0));
    REQUIRE(kms_cnp_ideals(sv.h, &out) == KMS_OK);
    take(out);

    Inst d("diag23.json");
    REQUIRE(kms_wold(d.h, "log(3)", "[0.3, 0.7]", nullptr, &out) == KMS_OK);
    json w = take(out);
    CHECK(w["inf"].get<double>() == doctest::Approx(0.7));
    CHECK(kms_wold(d.h, "log(2)", "[0, 1]", nullptr, &out) == KMS_ERR_MEMBERSHIP);
    CHECK(std::string(kms_last_error_kind()) == "NegativeMassError");
}

TEST_CASE("state evaluation and checks") {
    Inst e1("e1.json");
    kms_state* st = nullptr;
    REQUIRE(kms_state_build(e1.h, slurp("e1_state.json").c_str(), nullptr, &st) == KMS_OK);
    double v = 0;
    REQUIRE(kms_state_evaluate(st, slurp("e1_query.json").c_str(), &v) == KMS_OK);
    // 1/9 + 0.5 + 0
    CHECK(v == doctest::Approx(1.0 / 9 + 0.5).epsilon(1e-12));
    char* out = nullptr;
    REQUIRE(kms_state_oracle_eval(st, slurp("e1_query.json").c_str(), 10, &out) == KMS_OK);
    json o = take(out);
    CHECK(std::abs(o["value"].get<double>() - v) <= o["tail_bound"].get<double>());
    REQUIRE(kms_state_check_kms(st, "[1, 1]", 6, 1e-10, &out) == KMS_OK);
    CHECK(take(out)["passed"] == true);
    REQUIRE(kms_state_describe(st, &out) == KMS_OK);
    CHECK(take(out)["components"].size() == 1);
    CHECK(kms_state_evaluate(st, "{\"terms\": [{\"mu\": [[3], []], \"nu\": [[3], []]}]}", &v) == KMS_ERR_VALIDATION);
    CHECK(kms_state_evaluate(st, "{}", nullptr) == KMS_ERR_INVALID_ARGUMENT);
    kms_state_free(st);

    kms_state* bad = nullptr;
    CHECK(kms_state_build(e1.h, slurp("e1_divergent_state.json").c_str(), nullptr, &bad) == KMS_ERR_MEMBERSHIP);
    REQUIRE(kms_state_build_unchecked(e1.h, "{\"beta\": \"log(7/2)\", \"components\": [{\"F\": [1], \"tau\": [1]}]}",
                                      &bad) == KMS_OK);
    REQUIRE(kms_state_check_kms(bad, "[1, 1]", 6, 1e-10, &out) == KMS_OK);
    CHECK(take(out)["passed"] == false);
    kms_state_free(bad);
}

TEST_CASE("fock handles") {
    Inst e1("e1.json");
    kms_fock* f = nullptr;
    REQUIRE(kms_fock_build(e1.h, "[2, 1]", &f) == KMS_OK);
    size_t n = 0;
    REQUIRE(kms_fock_size(f, &n) == KMS_OK);
    // sum_{a<=2, b<=1} 2^a 3^b
    CHECK(n == 7 * 4);
    char* out = nullptr;
    REQUIRE(kms_fock_check_identities(f, &out) == KMS_OK);
    CHECK(take(out)["all_passed"] == true);
    std::string path = (std::filesystem::temp_directory_path() / "kms_capi_dump.txt").string();
    REQUIRE(kms_fock_dump(f, path.c_str()) == KMS_OK);
    std::ifstream dumped(path);
    CHECK(dumped.good());
    std::remove(path.c_str());
    kms_fock_free(f);

    REQUIRE(kms_fock_build(e1.h, "3", &f) == KMS_OK);
    kms_state* st = nullptr;
    REQUIRE(kms_state_build(e1.h, slurp("e1_state.json").c_str(), nullptr, &st) == KMS_OK);
    REQUIRE(kms_fock_oracle_eval(f, st, "{\"terms\": [{\"diag\": [1]}]}", 2, &out) == KMS_OK);
    CHECK(take(out)["certified"] == true);
    kms_state_free(st);
    kms_fock_free(f);

    Inst pf("pf_pair.json");
    CHECK(kms_fock_build(pf.h, "2", &f) == KMS_ERR_VALIDATION);
    CHECK(std::string(kms_last_error_kind()) == "FactorizationRequired");
    CHECK(kms_fock_build(e1.h, "60", &f) == KMS_ERR_CAP_EXCEEDED);

    REQUIRE(kms_verify(e1.h, 2, nullptr, &out) == KMS_OK);
    json vr = take(out);
    CHECK(vr["all_passed"] == true);
    CHECK(vr.contains("instance_hash"));
}
