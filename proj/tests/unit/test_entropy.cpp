#include <algorithm>
#include <cmath>
#include <functional>

#include "doctest.h"
#include "helpers.hpp"

using namespace kms;
using namespace testing;

namespace {

const double L2 = std::log(2.0), L3 = std::log(3.0);

// log sum_{a+b=k} x^a y^b, in log space
double log_block(double lx, double ly, int k) {
    double m = -INFINITY;
    std::vector<double> t;
    for (int a = 0; a <= k; ++a) {
        t.push_back(a * lx + (k - a) * ly);
        m = std::max(m, t.back());
    }
    double s = 0;
    for (double x : t) s += std::exp(x - m);
    return m + std::log(s);
}

// Brute-force count of words of length k over `q` symbols avoiding every forbidden factor.
long brute_count(int q, int k, const std::vector<std::vector<int>>& forbidden) {
    long n = 0;
    std::vector<int> w(k, 0);
    std::function<void(int)> rec = [&](int p) {
        if (p == k) {
            for (const auto& f : forbidden)
                if (std::search(w.begin(), w.end(), f.begin(), f.end()) != w.end()) return;
            ++n;
            return;
        }
        for (int s = 0; s < q; ++s) {
            w[p] = s;
            rec(p + 1);
        }
    };
    rec(0);
    return n;
}

MflSpec mfl(const char* text) { return std::get<MflSpec>(spec_from_json(json::parse(text))); }

}  // namespace

TEST_CASE("closed-form entropies of the one-vertex example") {
    auto e1 = load("e1.json");
    auto r = entropy_report(*e1, {{1.0}});
    CHECK(r.per_color[0] == doctest::Approx(L2).epsilon(1e-12));
    CHECK(r.per_color[1] == doctest::Approx(L3).epsilon(1e-12));
    CHECK(r.strong == doctest::Approx(L3).epsilon(1e-12));
    CHECK(r.system == doctest::Approx(L3).epsilon(1e-12));
    REQUIRE(r.tracial.size() == 1);
    CHECK(r.tracial[0] == doctest::Approx(L3).epsilon(1e-12));
    CHECK(fiber_entropy(*e1, 1u) == doctest::Approx(L2).epsilon(1e-12));
    CHECK(fiber_entropy(*e1, 3u) == doctest::Approx(L3).epsilon(1e-12));
}

TEST_CASE("diagonal entropies and the attaining vertex") {
    auto d = load("diag23.json");
    auto s = system_entropy(*d);
    // infimum over traces, attained at the point mass on a
    CHECK(s.value == doctest::Approx(L2).epsilon(1e-12));
    CHECK(s.attaining_vertex == 0);
    CHECK(strong_entropy(*d) == doctest::Approx(L3).epsilon(1e-12));
    CHECK(tracial_entropy(*d, {1.0, 0.0}, 1u) == doctest::Approx(L2).epsilon(1e-12));
    CHECK(tracial_entropy(*d, {0.3, 0.7}, 1u) == doctest::Approx(L3).epsilon(1e-12));
}

TEST_CASE("tracial entropies of the coexistence example") {
    auto e4 = load("e4.json");
    CHECK(tracial_entropy(*e4, {1.0, 0.0}, 1u) == doctest::Approx(L2).epsilon(1e-12));
    CHECK(tracial_entropy(*e4, {1.0, 0.0}, 2u) == doctest::Approx(L3).epsilon(1e-12));
    CHECK(tracial_entropy(*e4, {0.0, 1.0}, 1u) == doctest::Approx(L3).epsilon(1e-12));
    CHECK(tracial_entropy(*e4, {0.5, 0.5}, 1u) == doctest::Approx(L3).epsilon(1e-12));
    CHECK(tracial_entropy(*e4, {1.0, 0.0}, 3u) == doctest::Approx(L3).epsilon(1e-12));
    // oracle: (1/k) log tau(S_k) with S_k(a) = sum_{a+b=k} 2^a 3^b
    const int k = 400;
    double oracle = log_block(L2, L3, k) / k;
    CHECK(std::abs(tracial_entropy(*e4, {1.0, 0.0}, 3u) - oracle) <= std::log(k + 1.0) / k);
}

TEST_CASE("per-color slope tables approach the spectral values") {
    for (const char* name : {"e1.json", "e4.json", "pf_pair.json", "golden_graph.json", "source_vertex.json"}) {
        auto I = load(name);
        for (int i = 0; i < I->N; ++i) {
            auto t = slope_table(*I, 1u << i, 30);
            REQUIRE(t.size() == 30);
            double h = fiber_entropy(*I, 1u << i);
            if (std::isfinite(h)) CHECK(std::abs(t[29] - h) <= 5e-2);
        }
    }
}

TEST_CASE("block sums are exact and submultiplicative") {
    auto pf = load("pf_pair.json");
    auto S = block_sum_vectors(*pf, 3u, 10);
    REQUIRE(S.size() == 11);
    // oracle: sum_{a+b=k} M_1^a M_2^b 1 by explicit integer powers
    for (int k = 0; k <= 10; ++k) {
        std::vector<std::int64_t> expect(2, 0);
        for (int a = 0; a <= k; ++a) {
            IntMatrix P = power(pf->M[0], a);
            P.multiply(power(pf->M[1], k - a), P);
            for (int v = 0; v < 2; ++v) expect[v] += P(v, 0) + P(v, 1);
        }
        CHECK(S[k] == expect);
    }
    auto norm = [](const std::vector<std::int64_t>& v) { return *std::max_element(v.begin(), v.end()); };
    for (int a = 1; a <= 5; ++a)
        for (int b = 1; b <= 5; ++b) CHECK(norm(S[a + b]) <= norm(S[a]) * norm(S[b]));
    auto big = load("e1.json");
    CHECK_THROWS_AS(block_sum_vectors(*big, 3u, 60), CapExceeded);
}

TEST_CASE("strong entropy with an empty direction") {
    auto sv = load("source_vertex.json");
    double hs = strong_entropy(*sv);
    CHECK(std::isfinite(hs));
    auto r = entropy_report(*sv, {});
    CHECK(r.per_color[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.per_color[1] == doctest::Approx(L2).epsilon(1e-12));
    auto sw = load("swap_dynamics.json");
    CHECK(strong_entropy(*sw) == 0.0);
    CHECK(system_entropy(*sw).value == 0.0);
}

TEST_CASE("golden-mean counts match brute force") {
    auto g = load("golden.json");
    const auto& spec = std::get<MflSpec>(g->spec);
    auto r = mfl_entropy(spec, 1u, 16);
    for (int k = 0; k <= 14; ++k) {
        long b = brute_count(2, k, {{0, 0}});
        CHECK(mfl_allowable_words(spec, k, 1u) == b);
        CHECK(r.counts[k] == b);
    }
    const double lphi = std::log((1.0 + std::sqrt(5.0)) / 2.0);
    CHECK(std::abs(r.estimate - lphi) <= 5e-2);
}

TEST_CASE("full shift and a forbidden symbol") {
    auto full = mfl(R"({"kind":"mfl","N":1,"symbols":[3],"forbidden":[]})");
    auto r = mfl_entropy(full, 1u, 12);
    long p = 1;
    for (int k = 0; k <= 12; ++k, p *= 3) CHECK(r.counts[k] == p);
    CHECK(r.estimate == doctest::Approx(L3).epsilon(1e-9));

    auto no2 = mfl(R"({"kind":"mfl","N":1,"symbols":[3],"forbidden":[[[2]]]})");
    auto r2 = mfl_entropy(no2, 1u, 12);
    for (int k = 0; k <= 12; ++k) CHECK(r2.counts[k] == brute_count(3, k, {{1}}));
    CHECK(r2.estimate == doctest::Approx(L2).epsilon(1e-9));

    // two colors with no constraints: sum_{a+b=k} 2^a 3^b multiwords
    auto two = mfl(R"({"kind":"mfl","N":2,"symbols":[2,3],"forbidden":[]})");
    for (int k = 0; k <= 8; ++k) {
        long expect = 0;
        for (int a = 0; a <= k; ++a) expect += std::lround(std::pow(2, a) * std::pow(3, k - a));
        CHECK(mfl_allowable_words(two, k, 3u) == expect);
    }
}

TEST_CASE("allowability agrees with the language automaton") {
    auto spec = mfl(R"({"kind":"mfl","N":2,"symbols":[2,2],"forbidden":[[[1,1],[]],[[2],[2]]]})");
    MflLanguage lang(spec);
    std::vector<MultiWord> words;
    for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 4; ++b) {
            MultiWord w(2);
            for (int i = 0; i < 3; ++i) w[0].push_back((a >> i) & 1);
            for (int i = 0; i < 2; ++i) w[1].push_back((b >> i) & 1);
            words.push_back(w);
        }
    for (const auto& w : words) {
        bool direct = mfl_allowable(spec, w);
        CHECK(lang.allowable(lang.forward_of(w)) == direct);
        CHECK(lang.allowable(lang.reverse_of(w)) == direct);
    }
}
