#pragma once

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pqc/arch_metrics.hpp"
#include "pqc/checkpoint.hpp"
#include "pqc/pipelines.hpp"

// Run artifacts: per-epoch CSV, a versioned JSON report, and weight
// histograms. Everything here is a pure function of the run result, so
// reruns with the same seed produce byte-identical files.

namespace pqc {

inline constexpr int kReportSchemaVersion = 1;

inline std::string epochs_csv(const std::vector<EpochRecord>& records) {
  std::string out = "epoch,phase,train_acc,eval_acc,lr,pruned_fraction\n";
  char line[256];
  for (const auto& r : records) {
    std::snprintf(line, sizeof(line), "%d,%s,%.6f,%.6f,%.8f,%.6f\n", r.epoch, r.phase.c_str(),
                  r.train_acc, r.eval_acc, r.lr, r.pruned_fraction);
    out += line;
  }
  return out;
}

inline nlohmann::json config_json(const TrainConfig& cfg) {
  return nlohmann::json{{"arch", cfg.arch},
                        {"epochs_prune", cfg.epochs_prune},
                        {"epochs_quant", cfg.epochs_quant},
                        {"stages", cfg.stages},
                        {"prune_rates", cfg.prune_rates},
                        {"lr0", cfg.lr0},
                        {"lr_quant", cfg.lr_quant},
                        {"lr_decay", cfg.lr_decay},
                        {"plateau_window", cfg.plateau_window},
                        {"momentum", cfg.momentum},
                        {"weight_decay", cfg.weight_decay},
                        {"batch_size", cfg.batch_size},
                        {"seed", cfg.seed},
                        {"val_fraction", cfg.val_fraction}};
}

inline nlohmann::json quant_json(const QuantSpec& q) {
  return nlohmann::json{{"weight_bits", q.weight.bits},
                        {"weight_base_bits", q.weight.base_bits},
                        {"act_bits", q.act.bits},
                        {"act_base_bits", q.act.base_bits},
                        {"first_last_bits", q.first_last_bits}};
}

/// Policy the run realizes, for the analytic size/BOPs reproduction.
inline CompressionPolicy policy_from_config(const TrainConfig& cfg) {
  CompressionPolicy p;
  p.body_bits = cfg.quant.weight.bits;
  p.first_last_bits = cfg.quant.first_last_bits;
  p.input_act_bits = std::min(8, cfg.quant.first_last_bits);
  p.prune_rate = cfg.prune_rate_max();
  return p;
}

inline nlohmann::json metrics_json(const ArchDescriptor& arch, const CompressionPolicy& compressed) {
  const CompressionReport rep = compression_report(arch, CompressionPolicy::baseline32(), compressed);
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : rep.layers) {
    layers.push_back({{"layer", l.name},
                      {"params", l.params},
                      {"params_effective", l.params_effective},
                      {"macs", l.macs},
                      {"macs_effective", l.macs_effective},
                      {"weight_bits", l.weight_bits},
                      {"act_in_bits", l.act_in_bits},
                      {"survival_out", l.survival_out},
                      {"survival_in", l.survival_in},
                      {"size_bits_baseline", l.size_bits_baseline},
                      {"size_bits_compressed", l.size_bits_compressed},
                      {"bops_baseline", l.bops_baseline},
                      {"bops_compressed", l.bops_compressed}});
  }
  return nlohmann::json{{"size_bits_baseline", rep.size_bits_baseline},
                        {"size_bits_compressed", rep.size_bits_compressed},
                        {"size_ratio", rep.size_ratio},
                        {"bops_baseline", rep.bops_baseline},
                        {"bops_compressed", rep.bops_compressed},
                        {"bops_ratio", rep.bops_ratio},
                        {"per_layer", layers}};
}

inline nlohmann::json build_report(const std::string& pipeline, const TrainConfig& cfg,
                                   const RunResult& result, const ArchDescriptor& arch,
                                   double test_acc = -1.0,
                                   const nlohmann::json& data_block = nlohmann::json::object()) {
  nlohmann::json census = nlohmann::json::array();
  for (const auto& row : result.mask_census) {
    census.push_back({{"layer", row.layer}, {"filters", row.filters}, {"pruned", row.pruned}});
  }
  nlohmann::json final_block{{"train_acc", result.final_train_acc},
                             {"eval_acc", result.final_eval_acc}};
  if (test_acc >= 0.0) final_block["test_acc"] = test_acc;
  return nlohmann::json{{"schema_version", kReportSchemaVersion},
                        {"pipeline", pipeline},
                        {"config", config_json(cfg)},
                        {"quant", quant_json(cfg.quant)},
                        {"data", data_block},
                        {"epochs", result.records.size()},
                        {"final", final_block},
                        {"mask_census", census},
                        {"metrics", metrics_json(arch, policy_from_config(cfg))}};
}

/// Normalization statistics of the training split plus the generator echo.
inline nlohmann::json data_json(const Dataset& train) {
  return nlohmann::json{{"samples", train.size()},
                        {"classes", train.num_classes},
                        {"channel_mean", train.channel_mean},
                        {"channel_std", train.channel_std}};
}

/// Minimal schema check used by tests and the CLI after deserializing.
inline void validate_report(const nlohmann::json& r) {
  const char* required[] = {"schema_version", "pipeline", "config",      "quant",
                            "data",           "epochs",   "final",       "mask_census",
                            "metrics"};
  for (const char* key : required) {
    if (!r.contains(key)) throw std::runtime_error(std::string("report: missing key ") + key);
  }
  if (r["schema_version"].get<int>() != kReportSchemaVersion) {
    throw std::runtime_error("report: unsupported schema version");
  }
  if (!r["mask_census"].is_array()) throw std::runtime_error("report: mask_census must be an array");
  if (!r["metrics"].contains("size_ratio") || !r["metrics"].contains("bops_ratio")) {
    throw std::runtime_error("report: metrics block incomplete");
  }
  if (!r["final"].contains("train_acc") || !r["final"].contains("eval_acc")) {
    throw std::runtime_error("report: final block incomplete");
  }
}

struct HistogramRow {
  double bin_center = 0.0;
  int64_t count = 0;
};

/// Equal-width histogram of a checkpoint layer's full-precision weights.
/// A degenerate range (constant layer) collapses into the single first bin.
inline std::vector<HistogramRow> weight_histogram(const Checkpoint& ck, const std::string& layer,
                                                  int bins) {
  if (bins < 1) throw std::invalid_argument("histogram: need at least one bin");
  const CheckpointEntry* e = ck.find(layer);
  if (!e) e = ck.find(layer + ".weight");
  if (!e) {
    std::string names;
    for (const auto& n : ck.names()) names += "\n  " + n;
    throw std::invalid_argument("histogram: no layer named '" + layer + "'; checkpoint contains:" + names);
  }
  const auto& v = e->tensor.data;
  if (v.empty()) throw std::invalid_argument("histogram: layer " + layer + " is empty");
  float lo = v[0], hi = v[0];
  for (float x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  std::vector<HistogramRow> rows(static_cast<size_t>(bins));
  const double width = (hi - lo) > 0 ? (double(hi) - double(lo)) / bins : 1.0;
  for (int b = 0; b < bins; ++b) rows[static_cast<size_t>(b)].bin_center = double(lo) + (b + 0.5) * width;
  for (float x : v) {
    int b = hi > lo ? static_cast<int>((double(x) - double(lo)) / width) : 0;
    b = std::min(std::max(b, 0), bins - 1);
    rows[static_cast<size_t>(b)].count++;
  }
  return rows;
}

inline std::string histogram_csv(const std::vector<HistogramRow>& rows) {
  std::string out = "bin_center,count\n";
  char line[64];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%.8f,%lld\n", r.bin_center, static_cast<long long>(r.count));
    out += line;
  }
  return out;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

/// Writes report.json, epochs.csv and checkpoint.pqck under out_dir.
inline void emit_run_artifacts(const std::filesystem::path& out_dir, const std::string& pipeline,
                               const TrainConfig& cfg, const RunResult& result,
                               const ArchDescriptor& arch, double test_acc = -1.0,
                               const nlohmann::json& data_block = nlohmann::json::object()) {
  std::filesystem::create_directories(out_dir);
  const nlohmann::json report = build_report(pipeline, cfg, result, arch, test_acc, data_block);
  validate_report(report);
  write_text_file(out_dir / "report.json", report.dump(2) + "\n");
  write_text_file(out_dir / "epochs.csv", epochs_csv(result.records));
  save_checkpoint(result.checkpoint, out_dir / "checkpoint.pqck");
}

}  // namespace pqc
