#include "metrics.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "errors.h"
#include "image_io.h"

namespace foveapano {

namespace {

void RequireSameSize(const RasterImage& a, const RasterImage& b) {
  Require(a.width() == b.width() && a.height() == b.height(),
          ErrorCode::kInvalidArgument,
          "image dimensions differ: " + std::to_string(a.width()) + "x" +
              std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
              "x" + std::to_string(b.height()));
}

double MeanSquaredError(const RasterImage& a, const RasterImage& b) {
  RequireSameSize(a, b);
  double sum = 0.0;
  const auto sa = a.samples();
  const auto sb = b.samples();
  for (std::size_t i = 0; i < sa.size(); ++i) {
    const double d = sa[i] - sb[i];
    sum += d * d;
  }
  return sum / static_cast<double>(sa.size());
}

nlohmann::json PsnrJson(double psnr) {
  if (std::isinf(psnr)) return "inf";
  return psnr;
}

nlohmann::json AggregateJson(const MetricAggregate& agg) {
  return {{"count", agg.count},
          {"mean_psnr", PsnrJson(agg.mean_psnr)},
          {"mean_nrmse", agg.mean_nrmse}};
}

}  // namespace

double Psnr(const RasterImage& a, const RasterImage& b) {
  const double mse = MeanSquaredError(a, b);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double Nrmse(const RasterImage& a, const RasterImage& reference) {
  const double mse = MeanSquaredError(a, reference);
  const auto [lo, hi] = std::minmax_element(reference.samples().begin(),
                                            reference.samples().end());
  const double range = *hi - *lo;
  Require(range > 0.0, ErrorCode::kNormalization,
          "reference image is constant; NRMSE range normalization undefined");
  return std::sqrt(mse) / range;
}

std::string FormatPsnr(double psnr) {
  if (std::isinf(psnr)) return "inf";
  std::ostringstream out;
  out.precision(10);
  out << psnr;
  return out.str();
}

std::string MetricReport::ToCsv() const {
  std::ostringstream out;
  out.precision(10);
  out << "id,direction,psnr,nrmse\n";
  for (const auto& row : rows) {
    out << row.id << ',' << row.direction << ',' << FormatPsnr(row.psnr) << ','
        << row.nrmse << '\n';
  }
  return out.str();
}

std::string MetricReport::ToJson() const {
  nlohmann::json j;
  j["overall"] = AggregateJson(overall);
  j["per_direction"] = nlohmann::json::object();
  for (const auto& [dir, agg] : per_direction) {
    j["per_direction"][dir] = AggregateJson(agg);
  }
  j["rows"] = rows.size();
  j["missing"] = missing;
  j["failed"] = failed;
  return j.dump();
}

std::vector<EvalEntry> ReadEvalManifest(const std::string& manifest_path,
                                        const std::string& target) {
  std::ifstream in(manifest_path);
  Require(in.good(), ErrorCode::kIo, "cannot open manifest " + manifest_path);
  std::vector<EvalEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument,
                  manifest_path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    EvalEntry entry;
    if (j.contains("path")) {
      entry.path = j.at("path").get<std::string>();
    } else {
      Require(j.contains(target), ErrorCode::kInvalidArgument,
              manifest_path + ":" + std::to_string(line_no) +
                  ": entry has neither \"path\" nor \"" + target + "\"");
      entry.path = j.at(target).get<std::string>();
    }
    entry.id = j.value("id", entry.path);
    entry.direction = j.value("direction", std::string());
    entries.push_back(std::move(entry));
  }
  return entries;
}

MetricAggregate Aggregate(const std::vector<const MetricRow*>& rows) {
  MetricAggregate agg;
  agg.count = rows.size();
  if (rows.empty()) return agg;
  double psnr_sum = 0.0;
  double nrmse_sum = 0.0;
  for (const MetricRow* row : rows) {
    psnr_sum += row->psnr;
    nrmse_sum += row->nrmse;
  }
  agg.mean_psnr = psnr_sum / rows.size();
  agg.mean_nrmse = nrmse_sum / rows.size();
  return agg;
}

MetricReport Evaluate(const std::string& pred_dir, const std::string& gt_dir,
                      const std::vector<EvalEntry>& entries) {
  namespace fs = std::filesystem;
  MetricReport report;
  std::vector<EvalEntry> sorted = entries;
  std::sort(sorted.begin(), sorted.end(),
            [](const EvalEntry& a, const EvalEntry& b) { return a.id < b.id; });
  std::size_t present = 0;
  for (const auto& entry : sorted) {
    const fs::path pred = fs::path(pred_dir) / entry.path;
    const fs::path gt = fs::path(gt_dir) / entry.path;
    if (!fs::exists(pred) || !fs::exists(gt)) {
      report.missing.push_back(entry.id);
      continue;
    }
    ++present;
    try {
      const RasterImage p = LoadImage(pred.string());
      const RasterImage g = LoadImage(gt.string());
      report.rows.push_back({entry.id, entry.direction, Psnr(p, g), Nrmse(p, g)});
    } catch (const Error& e) {
      report.failed.push_back(entry.id + ": " + e.what());
    }
  }
  Require(present > 0, ErrorCode::kInvalidArgument,
          "no manifest id has both a prediction and a ground truth");

  std::vector<const MetricRow*> all;
  std::map<std::string, std::vector<const MetricRow*>> by_direction;
  for (const auto& row : report.rows) {
    all.push_back(&row);
    if (!row.direction.empty()) by_direction[row.direction].push_back(&row);
  }
  report.overall = Aggregate(all);
  for (const auto& [dir, rows] : by_direction) {
    report.per_direction[dir] = Aggregate(rows);
  }
  return report;
}

}  // namespace foveapano
