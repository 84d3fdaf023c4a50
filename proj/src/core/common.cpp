#include "common.hpp"

#include <cctype>
#include <cmath>
#include <numeric>
#include <regex>
#include <sstream>

namespace kms {

std::vector<int> colors_of(ColorSet F) {
    std::vector<int> out;
    for (int i = 0; i < 32; ++i)
        if (has_color(F, i)) out.push_back(i);
    return out;
}

ColorSet set_from_colors(const std::vector<int>& colors) {
    ColorSet F = 0;
    for (int c : colors) F |= (1u << c);
    return F;
}

std::string set_label(ColorSet F) {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (int c : colors_of(F)) {
        if (!first) os << ",";
        os << (c + 1);
        first = false;
    }
    os << "}";
    return os.str();
}

ColorSet parse_set_label(const std::string& label, int N) {
    std::string s;
    for (char ch : label)
        if (ch != '{' && ch != '}' && ch != ' ') s.push_back(ch);
    ColorSet F = 0;
    if (s.empty()) return F;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        int c = 0;
        try {
            c = std::stoi(tok);
        } catch (...) {
            throw ValidationError("bad color set label '" + label + "'");
        }
        if (c < 1 || c > N) throw ValidationError("color " + tok + " out of range in '" + label + "'");
        F |= (1u << (c - 1));
    }
    return F;
}

Beta Beta::from_double(double b) {
    Beta r;
    r.value = b;
    r.exp_value = std::exp(b);
    std::ostringstream os;
    os.precision(17);
    os << b;
    r.text = os.str();
    return r;
}

Beta Beta::parse(const std::string& text) {
    static const std::regex sym(R"(^\s*(?:([0-9]+)\s*\*\s*)?log\(\s*([0-9]+)\s*(?:/\s*([0-9]+)\s*)?\)\s*$)");
    std::smatch m;
    if (std::regex_match(text, m, sym)) {
        std::int64_t k = m[1].matched ? std::stoll(m[1].str()) : 1;
        std::int64_t p = std::stoll(m[2].str());
        std::int64_t q = m[3].matched ? std::stoll(m[3].str()) : 1;
        if (p <= 0 || q <= 0) throw ValidationError("log argument must be positive: " + text);
        Beta r;
        r.value = static_cast<double>(k) * std::log(static_cast<double>(p) / static_cast<double>(q));
        std::int64_t P = 1, Q = 1;
        bool ok = true;
        for (std::int64_t i = 0; i < k && ok; ++i) {
            ok = !__builtin_mul_overflow(P, p, &P) && !__builtin_mul_overflow(Q, q, &Q);
        }
        if (ok) {
            std::int64_t g = std::gcd(P, Q);
            r.exact_exp = std::make_pair(P / g, Q / g);
            r.exp_value = static_cast<double>(P / g) / static_cast<double>(Q / g);
        } else {
            r.exp_value = std::exp(r.value);
        }
        r.text = text;
        return r;
    }
    try {
        std::size_t pos = 0;
        double v = std::stod(text, &pos);
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos != text.size()) throw ValidationError("cannot parse beta '" + text + "'");
        Beta r = from_double(v);
        r.text = text;
        return r;
    } catch (const std::logic_error&) {
        throw ValidationError("cannot parse beta '" + text + "'");
    }
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace kms
