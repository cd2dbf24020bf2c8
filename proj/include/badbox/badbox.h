/* badbox - backdoor-poisoning toolkit for object-detection datasets.
 *
 * C API over the core library: opaque handles, status codes, and
 * bb_last_error() for the failure message of the most recent call on the
 * calling thread. All functions returning bb_status leave outputs untouched
 * on failure. Strings returned through char** are owned by the caller and
 * released with bb_string_free().
 */
#ifndef BADBOX_H
#define BADBOX_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define BB_API __declspec(dllexport)
#else
#define BB_API __attribute__((visibility("default")))
#endif

typedef enum bb_status {
    BB_OK = 0,
    BB_ERR_IO = 1,
    BB_ERR_PARSE = 2,
    BB_ERR_INVALID = 3,
    BB_ERR_NOT_FOUND = 4,
    BB_ERR_SCHEMA = 5,
    BB_ERR_CONFLICT = 6,
    BB_ERR_NULL_ARGUMENT = 7,
    BB_ERR_INTERNAL = 8
} bb_status;

typedef struct bb_dataset bb_dataset;
typedef struct bb_trigger bb_trigger;
typedef struct bb_plan bb_plan;
typedef struct bb_predictions bb_predictions;
typedef struct bb_report bb_report;

BB_API const char* bb_version(void);

/* Message for the most recent failing call on this thread. */
BB_API const char* bb_last_error(void);

BB_API void bb_string_free(char* s);
BB_API void bb_string_list_free(char** list, size_t count);

/* Worker threads for pixel-heavy operations. Output bytes never depend on
 * this setting. */
BB_API void bb_set_thread_count(unsigned threads);
BB_API unsigned bb_thread_count(void);

/* ---- datasets ------------------------------------------------------- */

/* classes_file: optional newline-separated category vocabulary; pass NULL
 * for the standard 20-class list. report_json (optional) receives rejected
 * annotations and warnings as a JSON document. */
BB_API bb_status bb_dataset_import_voc(const char* annotation_dir, const char* image_dir,
                                       const char* split_list, const char* classes_file,
                                       bb_dataset** out, char** report_json);
BB_API bb_status bb_dataset_import_coco(const char* annotation_json, const char* image_dir,
                                        bb_dataset** out, char** report_json);
BB_API bb_status bb_dataset_load_manifest(const char* path, bb_dataset** out);
BB_API bb_status bb_dataset_export_manifest(const bb_dataset* ds, const char* path);
BB_API void bb_dataset_free(bb_dataset* ds);

BB_API size_t bb_dataset_image_count(const bb_dataset* ds);
BB_API size_t bb_dataset_category_count(const bb_dataset* ds);
BB_API size_t bb_dataset_object_count(const bb_dataset* ds);
BB_API int bb_dataset_has_provenance(const bb_dataset* ds);

/* Ids of images with at least one non-difficult object of the category, in
 * manifest order. Free with bb_string_list_free. */
BB_API bb_status bb_dataset_images_with_class(const bb_dataset* ds, const char* category_name,
                                              char*** out_ids, size_t* out_count);

/* ---- triggers ------------------------------------------------------- */

BB_API bb_status bb_trigger_generate(int index, int width, int height, bb_trigger** out);
BB_API bb_status bb_trigger_load(const char* png_path, double uniform_alpha, bb_trigger** out);
BB_API bb_status bb_trigger_save(const bb_trigger* trig, const char* png_path);
BB_API int bb_trigger_width(const bb_trigger* trig);
BB_API int bb_trigger_height(const bb_trigger* trig);
BB_API void bb_trigger_free(bb_trigger* trig);

/* ---- poisoning ------------------------------------------------------ */

typedef struct bb_attack_spec {
    const char* attacked_class;
    const char* target_class;
    double poison_rate;
    int trigger_width;
    int trigger_height;
    double trigger_alpha;
    int placement_random; /* 0 = bbox-center, 1 = random in-image */
    uint64_t master_seed;
} bb_attack_spec;

BB_API bb_status bb_plan_create(const bb_dataset* ds, const bb_attack_spec* spec, bb_plan** out);
BB_API size_t bb_plan_selected_count(const bb_plan* plan);
BB_API void bb_plan_free(bb_plan* plan);

/* warnings_json (optional) receives a JSON array of warning strings. */
BB_API bb_status bb_poison_apply(const bb_dataset* ds, const bb_plan* plan,
                                 const bb_trigger* trig, const char* out_dir, bb_dataset** out,
                                 char** warnings_json);
BB_API bb_status bb_poison_shadow(const bb_dataset* ds, const bb_attack_spec* spec,
                                  const bb_trigger* trig, const char* out_dir, bb_dataset** out,
                                  char** warnings_json);
BB_API bb_status bb_build_test_variants(const bb_dataset* ds, const bb_attack_spec* spec,
                                        const bb_trigger* trig, const char* out_dir,
                                        bb_dataset** out_benign, bb_dataset** out_backdoored,
                                        bb_dataset** out_backdoored_benign,
                                        bb_dataset** out_part_backdoored_benign,
                                        char** warnings_json);

/* ---- simulated detector --------------------------------------------- */

typedef struct bb_sim_profile {
    double detection_rate;
    double backdoor_fidelity;
    double false_positive_rate;
    double loc_jitter_sigma;
    double tp_score_center;
    double tp_score_spread;
    double fp_score_center;
    double fp_score_spread;
    double degradation;
} bb_sim_profile;

BB_API void bb_sim_profile_defaults(bb_sim_profile* out);
BB_API bb_status bb_sim_profile_degrade(const bb_sim_profile* profile, double pruning_rate,
                                        bb_sim_profile* out);

BB_API bb_status bb_simulate(const bb_dataset* variant, const bb_dataset* benign_twin,
                             const bb_sim_profile* profile, uint64_t seed, bb_predictions** out);

BB_API bb_status bb_predictions_load(const char* jsonl_path, bb_predictions** out);
BB_API bb_status bb_predictions_save(const bb_predictions* preds, const char* jsonl_path);
BB_API size_t bb_predictions_count(const bb_predictions* preds);
BB_API void bb_predictions_free(bb_predictions* preds);

/* ---- evaluation ------------------------------------------------------ */

BB_API bb_status bb_evaluate_suite(const bb_dataset* benign, const bb_dataset* backdoored,
                                   const bb_dataset* backdoored_benign,
                                   const bb_dataset* part_backdoored_benign,
                                   const bb_predictions* preds_benign,
                                   const bb_predictions* preds_backdoored,
                                   const bb_predictions* preds_backdoored_benign,
                                   const bb_predictions* preds_part,
                                   const bb_attack_spec* spec, int eleven_point, bb_report** out);

/* name: mAP_benign, AP_benign, mAP_attack, AP_attack, mAP_attack_benign,
 * AP_attack_benign, mAP_part_attack_benign, ASR. */
BB_API bb_status bb_report_metric(const bb_report* report, const char* name, double* out_value);
BB_API bb_status bb_report_write(const bb_report* report, const char* json_path,
                                 const char* csv_path);
BB_API bb_status bb_report_to_json(const bb_report* report, char** out_json);
BB_API void bb_report_free(bb_report* report);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BADBOX_H */
