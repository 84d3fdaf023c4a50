#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kms {

enum class ErrorCode : int {
    Ok = 0,
    InvalidArgument = 1,
    Validation = 2,
    Membership = 3,
    CapExceeded = 4,
    Unsupported = 5,
    Internal = 6,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string kind, const std::string& msg)
        : std::runtime_error(kind + ": " + msg), code_(code), kind_(std::move(kind)) {}
    ErrorCode code() const { return code_; }
    const std::string& kind() const { return kind_; }

private:
    ErrorCode code_;
    std::string kind_;
};

#define KMS_DEFINE_ERROR(Name, Code)                                              \
    struct Name : Error {                                                         \
        explicit Name(const std::string& msg) : Error(ErrorCode::Code, #Name, msg) {} \
    };

KMS_DEFINE_ERROR(ValidationError, Validation)
KMS_DEFINE_ERROR(CommutationError, Validation)
KMS_DEFINE_ERROR(FactorizationError, Validation)
KMS_DEFINE_ERROR(FactorizationRequired, Validation)
KMS_DEFINE_ERROR(LanguageError, Validation)
KMS_DEFINE_ERROR(DynamicsError, Validation)
KMS_DEFINE_ERROR(PathError, Validation)
KMS_DEFINE_ERROR(MembershipError, Membership)
KMS_DEFINE_ERROR(ConvergenceError, Membership)
KMS_DEFINE_ERROR(NotKMSError, Membership)
KMS_DEFINE_ERROR(NegativeMassError, Membership)
KMS_DEFINE_ERROR(EigenSnapAmbiguity, Membership)
KMS_DEFINE_ERROR(CapExceeded, CapExceeded)
KMS_DEFINE_ERROR(DimensionCap, CapExceeded)
KMS_DEFINE_ERROR(SizeCap, CapExceeded)
KMS_DEFINE_ERROR(OutOfTruncation, InvalidArgument)
KMS_DEFINE_ERROR(UnsupportedError, Unsupported)
KMS_DEFINE_ERROR(InternalError, Internal)

#undef KMS_DEFINE_ERROR

// Colors are 0-based internally; bit i of a ColorSet is color i.
using ColorSet = std::uint32_t;
using MultiIndex = std::vector<int>;

inline ColorSet full_set(int N) { return N >= 32 ? ~0u : ((1u << N) - 1u); }
inline bool has_color(ColorSet F, int i) { return (F >> i) & 1u; }
inline int set_size(ColorSet F) { return __builtin_popcount(F); }
std::vector<int> colors_of(ColorSet F);
ColorSet set_from_colors(const std::vector<int>& colors);
// "{1,2}" style label with 1-based colors.
std::string set_label(ColorSet F);
ColorSet parse_set_label(const std::string& label, int N);

struct Tolerances {
    double snap = 1e-9;
    double residual = 1e-9;
    double certificate_margin = 1e-12;
    double mass_clamp = 1e-9;
    double power_tol = 1e-12;
    int power_max_iter = 100000;
    int dense_eigen_max_dim = 64;
    int vertex_enum_max_dim = 32;
    int mfl_state_cap = 4096;
    long fock_size_cap = 1000000;
    double slope_tol = 1e-3;
};

// Inverse temperature with an optional exact rational value of e^beta.
struct Beta {
    double value = 0.0;
    double exp_value = 1.0;
    std::optional<std::pair<std::int64_t, std::int64_t>> exact_exp;
    std::string text;

    static Beta from_double(double b);
    // Accepts "1.5", "log(3)", "log(3/2)", "2*log(3)".
    static Beta parse(const std::string& text);
};

std::uint64_t fnv1a64(const std::string& s);

}  // namespace kms
