#ifndef FOVEAPANO_METRICS_H_
#define FOVEAPANO_METRICS_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "raster.h"

namespace foveapano {

// 10 * log10(1 / MSE) with peak 1. Identical images give +infinity.
double Psnr(const RasterImage& a, const RasterImage& b);

// RMSE(a, reference) / (max(reference) - min(reference)).
// Throws kNormalization for a constant reference.
double Nrmse(const RasterImage& a, const RasterImage& reference);

// Formats a PSNR value for reports; +infinity becomes "inf".
std::string FormatPsnr(double psnr);

struct MetricRow {
  std::string id;
  std::string direction;  // empty when the manifest carries none
  double psnr = 0.0;
  double nrmse = 0.0;
};

struct MetricAggregate {
  std::size_t count = 0;
  double mean_psnr = 0.0;  // +infinity if any row is infinite
  double mean_nrmse = 0.0;
};

struct MetricReport {
  std::vector<MetricRow> rows;  // sorted by id
  MetricAggregate overall;
  std::map<std::string, MetricAggregate> per_direction;
  std::vector<std::string> missing;  // ids without a prediction or ground truth
  std::vector<std::string> failed;   // "id: reason"

  std::string ToCsv() const;
  std::string ToJson() const;
};

// One entry of an evaluation manifest. |path| is relative to both the
// prediction and ground-truth roots.
struct EvalEntry {
  std::string id;
  std::string direction;
  std::string path;
};

// Reads JSON lines. Each line needs "path", or the dataset manifest's
// "near"/"mid" field selected by |target|. "id" defaults to the path and
// "direction" is optional.
std::vector<EvalEntry> ReadEvalManifest(const std::string& manifest_path,
                                        const std::string& target = "near");

MetricAggregate Aggregate(const std::vector<const MetricRow*>& rows);

// Throws kInvalidArgument when no manifest id has both files.
MetricReport Evaluate(const std::string& pred_dir, const std::string& gt_dir,
                      const std::vector<EvalEntry>& entries);

}  // namespace foveapano

#endif  // FOVEAPANO_METRICS_H_
