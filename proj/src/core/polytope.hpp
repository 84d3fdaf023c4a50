#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "common.hpp"
#include "linalg.hpp"

namespace kms {

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
    static constexpr double eps = 1e-10;
    static int sign(double x) { return x > eps ? 1 : (x < -eps ? -1 : 0); }
    static void normalize(std::vector<double>& v) {
        double m = 0;
        for (double x : v) m = std::max(m, std::abs(x));
        if (m > 0)
            for (double& x : v) x /= m;
    }
};

template <>
struct ScalarTraits<Rational> {
    static int sign(const Rational& x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }
    static void normalize(std::vector<Rational>& v) {
        Rational m = 0;
        for (const auto& x : v) m = std::max(m, x < 0 ? Rational(-x) : x);
        if (m > 0)
            for (auto& x : v) x /= m;
    }
};

// Extreme rays of the pointed cone {y : G y >= 0} by the double description method.
template <class T>
std::vector<std::vector<T>> extreme_rays(const std::vector<std::vector<T>>& G, int k) {
    using Tr = ScalarTraits<T>;
    const int m = static_cast<int>(G.size());
    if (m > 64) throw DimensionCap("double description limited to 64 inequalities");
    auto dot = [k](const std::vector<T>& a, const std::vector<T>& b) {
        T s = 0;
        for (int i = 0; i < k; ++i) s += a[i] * b[i];
        return s;
    };
    struct Ray {
        std::vector<T> y;
        std::uint64_t zero = 0;
    };
    std::vector<std::vector<T>> lines;
    for (int i = 0; i < k; ++i) {
        std::vector<T> e(k, T(0));
        e[i] = 1;
        lines.push_back(std::move(e));
    }
    std::vector<Ray> rays;
    std::uint64_t processed = 0;

    for (int j = 0; j < m; ++j) {
        const auto& g = G[j];
        const std::uint64_t bit = std::uint64_t(1) << j;
        int li = -1;
        for (std::size_t l = 0; l < lines.size(); ++l)
            if (Tr::sign(dot(g, lines[l])) != 0) {
                li = static_cast<int>(l);
                break;
            }
        if (li >= 0) {
            std::vector<T> l0 = lines[li];
            T gl0 = dot(g, l0);
            if (Tr::sign(gl0) < 0) {
                for (auto& x : l0) x = -x;
                gl0 = -gl0;
            }
            std::vector<std::vector<T>> new_lines;
            for (std::size_t l = 0; l < lines.size(); ++l) {
                if (static_cast<int>(l) == li) continue;
                std::vector<T> v = lines[l];
                T f = dot(g, v) / gl0;
                for (int i = 0; i < k; ++i) v[i] -= f * l0[i];
                Tr::normalize(v);
                new_lines.push_back(std::move(v));
            }
            for (auto& r : rays) {
                T f = dot(g, r.y) / gl0;
                for (int i = 0; i < k; ++i) r.y[i] -= f * l0[i];
                Tr::normalize(r.y);
                r.zero |= bit;
            }
            Tr::normalize(l0);
            rays.push_back(Ray{l0, processed});
            lines = std::move(new_lines);
        } else {
            std::vector<int> pos, neg;
            std::vector<Ray> out;
            std::vector<int> sg(rays.size());
            for (std::size_t r = 0; r < rays.size(); ++r) {
                sg[r] = Tr::sign(dot(g, rays[r].y));
                if (sg[r] > 0) pos.push_back(static_cast<int>(r));
                if (sg[r] < 0) neg.push_back(static_cast<int>(r));
            }
            for (int ip : pos) {
                for (int in : neg) {
                    std::uint64_t common = rays[ip].zero & rays[in].zero & processed;
                    bool adjacent = true;
                    for (std::size_t r = 0; r < rays.size(); ++r) {
                        if (static_cast<int>(r) == ip || static_cast<int>(r) == in) continue;
                        if ((rays[r].zero & common) == common) {
                            adjacent = false;
                            break;
                        }
                    }
                    if (!adjacent) continue;
                    T a = dot(g, rays[ip].y);
                    T b = -dot(g, rays[in].y);
                    std::vector<T> y(k);
                    for (int i = 0; i < k; ++i) y[i] = a * rays[in].y[i] + b * rays[ip].y[i];
                    Tr::normalize(y);
                    out.push_back(Ray{y, common | bit});
                }
            }
            for (std::size_t r = 0; r < rays.size(); ++r) {
                if (sg[r] > 0) out.push_back(rays[r]);
                if (sg[r] == 0) out.push_back(Ray{rays[r].y, rays[r].zero | bit});
            }
            rays = std::move(out);
        }
        processed |= bit;
    }
    if (!lines.empty()) throw InternalError("cone is not pointed");
    std::vector<std::vector<T>> result;
    for (auto& r : rays) result.push_back(r.y);
    return result;
}

}  // namespace kms
