#pragma once

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "fock.hpp"

namespace testing {

inline std::string read_data(const std::string& name) {
    std::ifstream in(std::string(KMS_DATA_DIR) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::shared_ptr<const kms::Instance> load(const std::string& name) {
    return std::make_shared<const kms::Instance>(kms::load_instance(read_data(name)));
}

inline kms::IntMatrix mat(const std::vector<std::vector<long>>& rows) {
    kms::IntMatrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
    return m;
}

inline kms::GraphSpec graph_spec(const std::vector<kms::IntMatrix>& mats) {
    kms::GraphSpec g;
    g.N = static_cast<int>(mats.size());
    for (int v = 0; v < mats[0].rows(); ++v) g.vertices.push_back("v" + std::to_string(v));
    g.matrices = mats;
    return g;
}

inline std::shared_ptr<const kms::Instance> graph(const std::vector<kms::IntMatrix>& mats) {
    return std::make_shared<const kms::Instance>(kms::validate(graph_spec(mats)));
}

inline kms::IntMatrix power(const kms::IntMatrix& m, int k) {
    kms::IntMatrix r = kms::IntMatrix::identity(m.rows());
    for (int i = 0; i < k; ++i) r.multiply(m, r);
    return r;
}

inline long entry_sum(const kms::IntMatrix& m) {
    long s = 0;
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) s += m(r, c);
    return s;
}

inline bool is_delta(const std::vector<double>& p, int v, double tol = 1e-9) {
    for (int i = 0; i < static_cast<int>(p.size()); ++i)
        if (std::abs(p[i] - (i == v ? 1.0 : 0.0)) > tol) return false;
    return true;
}

}  // namespace testing
