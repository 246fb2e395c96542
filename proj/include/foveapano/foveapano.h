/*
 * foveapano C API.
 *
 * Every function returns an fp_status. On failure, fp_last_error() returns
 * a message for the calling thread that stays valid until the next call on
 * that thread. Strings returned through char** out-parameters are owned by
 * the caller and must be released with fp_string_free. Angles are degrees.
 */
#ifndef FOVEAPANO_FOVEAPANO_H_
#define FOVEAPANO_FOVEAPANO_H_

#include <stddef.h>

#if defined(_WIN32)
#define FP_API __declspec(dllexport)
#elif defined(__GNUC__)
#define FP_API __attribute__((visibility("default")))
#else
#define FP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fp_status {
  FP_OK = 0,
  FP_ERR_INVALID_ARGUMENT = 1,
  FP_ERR_DOMAIN = 2,
  FP_ERR_DIMENSION = 3,
  FP_ERR_COVERAGE = 4,
  FP_ERR_GEOMETRY = 5,
  FP_ERR_SOLVER = 6,
  FP_ERR_EXTERNAL_GENERATOR = 7,
  FP_ERR_IO = 8,
  FP_ERR_NORMALIZATION = 9,
  FP_ERR_BATCH = 10,
  FP_ERR_INTERNAL = 11,
} fp_status;

typedef enum fp_stage {
  FP_STAGE_NEAR = 0, /* narrow -> 90 degree perspective */
  FP_STAGE_MID = 1,  /* 90 degree perspective -> 180 degree equirect */
} fp_stage;

typedef struct fp_image fp_image;
typedef struct fp_pipeline fp_pipeline;

FP_API const char* fp_version(void);
FP_API const char* fp_last_error(void);
FP_API const char* fp_status_name(fp_status status);
FP_API void fp_string_free(char* str);

/* Images: interleaved RGB doubles in [0,1]. */
FP_API fp_status fp_image_create(int width, int height, const double* rgb,
                                 fp_image** out);
FP_API fp_status fp_image_load(const char* path, fp_image** out);
FP_API fp_status fp_image_save_png(const fp_image* image, const char* path);
FP_API int fp_image_width(const fp_image* image);
FP_API int fp_image_height(const fp_image* image);
/* Pointer to width*height*3 samples, valid while the image lives. */
FP_API const double* fp_image_data(const fp_image* image);
FP_API void fp_image_free(fp_image* image);

/* Foveation model and extension geometry. */
FP_API fp_status fp_relative_resolution(double beta, double theta, double* out);
FP_API fp_status fp_required_resolution(double beta, double theta1,
                                        double theta2, double r1, double* out);
FP_API fp_status fp_input_fov(double linear_ratio, double alpha_prime,
                              double* out);
/* CSV "theta_deg,required,system". |layout_json| may be NULL. */
FP_API fp_status fp_resolution_profile_csv(double beta, double r1, double step,
                                           int mid_downscale,
                                           const char* layout_json,
                                           char** csv_out);

/* Quality metrics. An infinite PSNR (identical images) sets *is_infinite. */
FP_API fp_status fp_psnr(const fp_image* a, const fp_image* b, double* out,
                         int* is_infinite);
FP_API fp_status fp_nrmse(const fp_image* a, const fp_image* reference,
                          double* out);
/* Writes the CSV report to |out_csv| (may be NULL) and returns the JSON
 * summary. |target| selects the manifest field ("near" or "mid") when
 * entries carry no "path". */
FP_API fp_status fp_evaluate(const char* pred_dir, const char* gt_dir,
                             const char* manifest_path, const char* target,
                             const char* out_csv, char** summary_json);

/* Projection utilities. */
FP_API fp_status fp_mirror_extend(const fp_image* pano180, fp_image** out);
FP_API fp_status fp_prepare_dataset(const char* input_dir,
                                    const char* output_dir, int native_size,
                                    char** summary_json);

/* Aligns |original| with |generated| for |stage| and fuses them.
 * |options_json| (may be NULL) holds "method", "cg_tolerance",
 * "cg_max_iters", "preconditioner" and "canvas_height". Returns the fused
 * image and a JSON report with seam_before / seam_after. */
FP_API fp_status fp_fuse(const fp_image* original, const fp_image* generated,
                         fp_stage stage, const char* options_json,
                         fp_image** out, char** report_json);

/* External generator protocol: runs |command_template| over each input
 * path and returns the outputs (an array of |count| images; free each and
 * then the array with fp_image_array_free). */
FP_API fp_status fp_external_generate(const char* command_template,
                                      const char* const* input_paths,
                                      size_t count, fp_stage stage,
                                      fp_image*** outputs);
FP_API void fp_image_array_free(fp_image** images, size_t count);

/* Pipeline. |config_json| may be NULL for defaults. */
FP_API fp_status fp_pipeline_create(const char* config_json, fp_pipeline** out);
FP_API fp_status fp_pipeline_config_json(const fp_pipeline* pipeline,
                                         char** out);
/* Writes pano180.png, optional pano360.png and manifest.json into
 * |out_dir| and returns the manifest JSON. */
FP_API fp_status fp_pipeline_run(const fp_pipeline* pipeline,
                                 const char* input_path, const char* out_dir,
                                 char** manifest_json);
/* In-memory variant; |pano360| may be NULL. */
FP_API fp_status fp_pipeline_run_image(const fp_pipeline* pipeline,
                                       const fp_image* input,
                                       fp_image** pano180, fp_image** pano360);
/* |max_parallel| <= 0 uses the hardware concurrency. Returns the batch
 * report JSON even when the status is FP_ERR_BATCH. */
FP_API fp_status fp_pipeline_run_batch(const fp_pipeline* pipeline,
                                       const char* manifest_path,
                                       const char* out_dir, int max_parallel,
                                       char** report_json);
FP_API void fp_pipeline_free(fp_pipeline* pipeline);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* FOVEAPANO_FOVEAPANO_H_ */
