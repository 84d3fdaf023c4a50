#include <cmath>

#include "doctest.h"
#include "helpers.hpp"

using namespace kms;
using namespace testing;

namespace {

// Independent check of the defining constraints of a point in the F-simplex.
void check_vertex(const Instance& I, const Beta& b, ColorSet F, const std::vector<double>& tau) {
    double s = 0;
    for (double x : tau) {
        CHECK(x >= -1e-12);
        s += x;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
    for (int i = 0; i < I.N; ++i) {
        if (has_color(F, i)) continue;
        for (int v = 0; v < I.dim; ++v) {
            double r = -b.exp_value * tau[v];
            for (int w = 0; w < I.dim; ++w) r += static_cast<double>(I.B[i](v, w)) * tau[w];
            CHECK(std::abs(r) <= 1e-9);
        }
    }
    // the partition series over F converges: each color radius on the support's forward closure is below e^beta
    std::vector<bool> supp(I.dim);
    for (int v = 0; v < I.dim; ++v) supp[v] = tau[v] > 1e-12;
    auto R = forward_closure(I.M, F, supp);
    for (int i : colors_of(F)) CHECK(restricted_radius(I, i, R) < b.exp_value);
}

}  // namespace

TEST_CASE("extreme points satisfy the simplex constraints") {
    std::vector<std::pair<std::string, std::vector<std::string>>> cases{
        {"e1.json", {"log(3)", "log(4)", "1.5"}},
        {"e4.json", {"log(3)", "log(4)", "2.0"}},
        {"pf_pair.json", {"log(2)", "1.0", "3.0"}},
        {"diag23.json", {"log(2)", "log(3)", "1.2"}},
        {"source_vertex.json", {"log(2)", "log(3)"}},
    };
    for (const auto& [name, betas] : cases) {
        auto I = load(name);
        for (const auto& bt : betas) {
            Beta b = Beta::parse(bt);
            auto fs = full_simplex(*I, b);
            CHECK(fs.disjoint);
            for (ColorSet F = 0; F <= full_set(I->N); ++F) {
                const auto& part = fs.parts[F];
                CHECK(part.max_residual <= 1e-9);
                CHECK(part.empty == part.extreme_points.empty());
                if (!part.empty) CHECK(part.dim == affine_dimension(part.extreme_points));
                for (const auto& tau : part.extreme_points) {
                    check_vertex(*I, b, F, tau);
                    CHECK(trace_membership(*I, b, F, tau).member);
                }
            }
        }
    }
}

TEST_CASE("membership reports the failing condition") {
    auto e4 = load("e4.json");
    Beta b = Beta::parse("log(3)");
    auto ok = trace_membership(*e4, b, 1u, {1.0, 0.0});
    CHECK(ok.member);
    auto wrong_eigen = trace_membership(*e4, b, 1u, {0.0, 1.0});
    CHECK_FALSE(wrong_eigen.member);
    CHECK_FALSE(wrong_eigen.eigen_ok);
    auto unnormalized = trace_membership(*e4, b, 1u, {2.0, 0.0});
    CHECK_FALSE(unnormalized.member);
    CHECK_FALSE(unnormalized.normalized);
    auto divergent = trace_membership(*e4, Beta::parse("log(2)"), 2u, {1.0, 0.0});
    CHECK_FALSE(divergent.member);
    CHECK(divergent.eigen_ok);
    CHECK_FALSE(divergent.convergent);
    CHECK_FALSE(wrong_eigen.reason.empty());
}

TEST_CASE("phase diagram of the coexistence example") {
    auto e4 = load("e4.json");
    auto pd = phase_diagram(*e4, Beta::from_double(0.5), Beta::from_double(2.0), 16);
    CHECK(pd.strong_entropy == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(pd.above_strong_ok);
    CHECK(pd.below_system_ok);
    bool saw = false;
    const double L3 = std::log(3.0);
    for (const auto& row : pd.rows) {
        double b = row.beta.value;
        REQUIRE(row.parts.size() == 4);
        if (std::abs(b - L3) <= 1e-12) {
            saw = true;
            CHECK(row.parts[1].nonempty);
            CHECK(row.parts[2].nonempty);
            CHECK_FALSE(row.parts[0].nonempty);
            CHECK_FALSE(row.parts[3].nonempty);
        } else if (b < L3) {
            for (const auto& p : row.parts) CHECK_FALSE(p.nonempty);
        } else {
            CHECK(row.parts[3].nonempty);
            CHECK(row.parts[3].dim == 1);
            CHECK(row.parts[3].vertices == 2);
        }
    }
    CHECK(saw);
}

TEST_CASE("phase diagram is independent of the worker count") {
    auto e1 = load("e1.json");
    auto a = phase_diagram(*e1, Beta::from_double(0.5), Beta::from_double(2.0), 12, nullptr, 1);
    auto b = phase_diagram(*e1, Beta::from_double(0.5), Beta::from_double(2.0), 12, nullptr, 4);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
        CHECK(a.rows[r].beta.value == b.rows[r].beta.value);
        CHECK(a.rows[r].label == b.rows[r].label);
        for (std::size_t p = 0; p < a.rows[r].parts.size(); ++p) {
            CHECK(a.rows[r].parts[p].nonempty == b.rows[r].parts[p].nonempty);
            CHECK(a.rows[r].parts[p].dim == b.rows[r].parts[p].dim);
        }
    }
}

TEST_CASE("finite type part above the strong entropy is the whole trace simplex") {
    auto pf = load("pf_pair.json");
    auto r = finite_trace_set(*pf, Beta::from_double(1.5));
    CHECK(r.dim == 1);
    REQUIRE(r.extreme_points.size() == 2);
    CHECK((is_delta(r.extreme_points[0], 0) || is_delta(r.extreme_points[1], 0)));
    auto avt = avt_traces(*pf, Beta::parse("log(2)"));
    REQUIRE(avt.extreme_points.size() == 1);
    CHECK(avt.extreme_points[0][0] == doctest::Approx(0.5));
    CHECK(avt.exact);
}

TEST_CASE("ideal lattices filter the source-vertex example") {
    auto sv = load("source_vertex.json");
    auto L = compute_cnp_ideals(*sv);
    Beta b = Beta::parse("log(2)");
    auto zero = f_trace_set(*sv, b, 1u);
    auto cnp = f_trace_set(*sv, b, 1u, &L);
    CHECK(zero.dim == 1);
    CHECK(cnp.dim == 0);
    REQUIRE(cnp.extreme_points.size() == 1);
    CHECK(is_delta(cnp.extreme_points[0], 0));
    CHECK(trace_membership(*sv, b, 1u, cnp.extreme_points[0], &L).member);
    // z lies in fI_{2}, so its point mass is filtered once the lattice is applied
    for (const auto& p : zero.extreme_points)
        if (is_delta(p, 2)) CHECK_FALSE(trace_membership(*sv, b, 1u, p, &L).member);
    auto g = ground_states(*sv, &L);
    REQUIRE(g.extreme_points.size() == 1);
    CHECK(is_delta(g.extreme_points[0], 2));
}

TEST_CASE("affine dimension") {
    CHECK(affine_dimension({}) == -1);
    CHECK(affine_dimension({{1, 0, 0}}) == 0);
    CHECK(affine_dimension({{1, 0, 0}, {0, 1, 0}}) == 1);
    CHECK(affine_dimension({{1, 0, 0}, {0, 1, 0}, {0.5, 0.5, 0}}) == 1);
    CHECK(affine_dimension({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}) == 2);
}
