#ifndef KMSPHASE_H
#define KMSPHASE_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define KMS_API __declspec(dllexport)
#else
#define KMS_API __attribute__((visibility("default")))
#endif

typedef enum kms_status {
    KMS_OK = 0,
    KMS_ERR_INVALID_ARGUMENT = 1,
    KMS_ERR_VALIDATION = 2,
    KMS_ERR_MEMBERSHIP = 3,
    KMS_ERR_CAP_EXCEEDED = 4,
    KMS_ERR_UNSUPPORTED = 5,
    KMS_ERR_INTERNAL = 6
} kms_status;

typedef struct kms_instance kms_instance;
typedef struct kms_state kms_state;
typedef struct kms_fock kms_fock;

/* Message and error class name of the last failure on the calling thread. */
KMS_API const char* kms_last_error_message(void);
KMS_API const char* kms_last_error_kind(void);
KMS_API const char* kms_version(void);

/* Strings returned through char** out parameters are owned by the caller. */
KMS_API void kms_string_free(char* s);

/*
 * options_json may be NULL or an object with any of
 *   "snap_tol", "tol", "log2", "jobs", "k_max", "format" ("json" | "csv"),
 *   "ideals" ("cnp" or an ideal-lattice object).
 */

KMS_API kms_status kms_instance_from_json(const char* json_text, kms_instance** out);
KMS_API kms_status kms_instance_from_file(const char* path, kms_instance** out);
KMS_API void kms_instance_free(kms_instance* inst);
KMS_API kms_status kms_instance_info(const kms_instance* inst, char** out_json);
KMS_API kms_status kms_cnp_ideals(const kms_instance* inst, char** out_json);

/* taus_json: NULL or an array of trace vectors for the tracial entropies. */
KMS_API kms_status kms_entropy(const kms_instance* inst, const char* taus_json, const char* options_json, char** out);

/* F_json: NULL for every color set, else a 1-based color list such as "[1]". */
KMS_API kms_status kms_simplex(const kms_instance* inst, const char* beta, const char* F_json, const char* options_json,
                               char** out_json);
KMS_API kms_status kms_phase(const kms_instance* inst, const char* beta_min, const char* beta_max, int steps,
                             const char* options_json, char** out);
KMS_API kms_status kms_ground(const kms_instance* inst, const char* options_json, char** out_json);
KMS_API kms_status kms_wold(const kms_instance* inst, const char* beta, const char* tau_json, const char* options_json,
                            char** out_json);

/* state_json: {"beta": "log(3)", "components": [{"F": [1], "tau": [1], "w": 1.0}]} */
KMS_API kms_status kms_state_build(const kms_instance* inst, const char* state_json, const char* options_json,
                                   kms_state** out);
/* Builds the state without membership or convergence checks. */
KMS_API kms_status kms_state_build_unchecked(const kms_instance* inst, const char* state_json, kms_state** out);
KMS_API void kms_state_free(kms_state* st);
KMS_API kms_status kms_state_describe(const kms_state* st, char** out_json);
/* query_json: {"terms": [{"coef": 1, "mu": [[1], []], "nu": [[1], []]}, {"diag": [1, 0]}]} */
KMS_API kms_status kms_state_evaluate(const kms_state* st, const char* query_json, double* out_value);
/* Fock-space evaluation on a truncation sized from the state and the query. */
KMS_API kms_status kms_state_oracle_eval(const kms_state* st, const char* query_json, int K, char** out_json);
KMS_API kms_status kms_state_check_kms(const kms_state* st, const char* degree_bound_json, int K, double threshold,
                                       char** out_json);

KMS_API kms_status kms_fock_build(const kms_instance* inst, const char* box_json, kms_fock** out);
KMS_API void kms_fock_free(kms_fock* fock);
KMS_API kms_status kms_fock_size(const kms_fock* fock, size_t* out_size);
KMS_API kms_status kms_fock_check_identities(const kms_fock* fock, char** out_json);
KMS_API kms_status kms_fock_dump(const kms_fock* fock, const char* path);
KMS_API kms_status kms_fock_oracle_eval(const kms_fock* fock, const kms_state* st, const char* query_json, int K,
                                        char** out_json);

/* Identity report for a Fock space truncated at K in every color, with the reproducibility header. */
KMS_API kms_status kms_verify(const kms_instance* inst, int K, const char* options_json, char** out_json);

#ifdef __cplusplus
}
#endif

#endif
