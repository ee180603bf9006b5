#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pqc/data.hpp"
#include "pqc/pipelines.hpp"

// Run configuration file: one `key = value` per line, `#` comments.
// Keys mirror TrainConfig plus the data block; see README for the full list.

namespace pqc {

struct DataConfig {
  std::string source = "synthetic";  // synthetic | cifar10
  std::string path;                  // cifar10 directory or file
  uint64_t seed = 7;
  int classes = 10;
  int per_class = 64;
  int test_per_class = 32;
  int image_size = 8;
  double noise = 0.05;
};

struct RunConfig {
  TrainConfig train;
  DataConfig data;
  std::string out_dir = "out";
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<double> parse_rate_list(const std::string& value) {
  std::vector<double> rates;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) rates.push_back(std::stod(item));
  }
  return rates;
}

}  // namespace detail

inline RunConfig parse_run_config(std::istream& in) {
  RunConfig rc;
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    kv[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
  }

  auto take = [&](const std::string& key) -> const std::string* {
    auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    return &it->second;
  };

  TrainConfig& t = rc.train;
  if (auto* v = take("model.arch")) t.arch = *v;
  if (auto* v = take("run.out_dir")) rc.out_dir = *v;
  if (auto* v = take("run.seed")) t.seed = std::stoull(*v);
  if (auto* v = take("train.epochs_prune")) t.epochs_prune = std::stoi(*v);
  if (auto* v = take("train.epochs_quant")) t.epochs_quant = std::stoi(*v);
  if (auto* v = take("train.stages")) t.stages = std::stoi(*v);
  if (auto* v = take("train.prune_rates")) t.prune_rates = detail::parse_rate_list(*v);
  if (auto* v = take("train.lr0")) t.lr0 = std::stod(*v);
  if (auto* v = take("train.lr_quant")) t.lr_quant = std::stod(*v);
  if (auto* v = take("train.lr_decay")) t.lr_decay = std::stod(*v);
  if (auto* v = take("train.plateau_window")) t.plateau_window = std::stoi(*v);
  if (auto* v = take("train.momentum")) t.momentum = std::stod(*v);
  if (auto* v = take("train.weight_decay")) t.weight_decay = std::stod(*v);
  if (auto* v = take("train.batch_size")) t.batch_size = std::stoi(*v);
  if (auto* v = take("train.val_fraction")) t.val_fraction = std::stod(*v);
  if (auto* v = take("quant.weight_bits")) t.quant.weight.bits = std::stoi(*v);
  if (auto* v = take("quant.weight_k")) t.quant.weight.base_bits = std::stoi(*v);
  if (auto* v = take("quant.act_bits")) t.quant.act.bits = std::stoi(*v);
  if (auto* v = take("quant.act_k")) t.quant.act.base_bits = std::stoi(*v);
  if (auto* v = take("quant.first_last_bits")) t.quant.first_last_bits = std::stoi(*v);

  DataConfig& d = rc.data;
  if (auto* v = take("data.augment_flip")) t.augment_flip = (*v == "true" || *v == "1");
  if (auto* v = take("data.source")) d.source = *v;
  if (auto* v = take("data.path")) d.path = *v;
  if (auto* v = take("data.seed")) d.seed = std::stoull(*v);
  if (auto* v = take("data.classes")) d.classes = std::stoi(*v);
  if (auto* v = take("data.per_class")) d.per_class = std::stoi(*v);
  if (auto* v = take("data.test_per_class")) d.test_per_class = std::stoi(*v);
  if (auto* v = take("data.image_size")) d.image_size = std::stoi(*v);
  if (auto* v = take("data.noise")) d.noise = std::stod(*v);

  static const char* known[] = {
      "model.arch",          "run.out_dir",      "run.seed",           "train.epochs_prune",
      "train.epochs_quant",  "train.stages",     "train.prune_rates",  "train.lr0",
      "train.lr_quant",      "train.lr_decay",   "train.plateau_window", "train.momentum",
      "train.weight_decay",  "train.batch_size", "train.val_fraction", "quant.weight_bits",
      "quant.weight_k",      "quant.act_bits",   "quant.act_k",        "quant.first_last_bits",
      "data.source",         "data.path",        "data.seed",          "data.classes",
      "data.per_class",      "data.test_per_class", "data.image_size", "data.noise",
      "data.augment_flip"};
  for (const auto& [key, value] : kv) {
    bool ok = false;
    for (const char* k : known) {
      if (key == k) {
        ok = true;
        break;
      }
    }
    if (!ok) throw std::invalid_argument("config: unknown key '" + key + "'");
  }

  if (d.source != "synthetic" && d.source != "cifar10") {
    throw std::invalid_argument("config: data.source must be synthetic or cifar10");
  }
  rc.train.validate();
  return rc;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path.string());
  return parse_run_config(in);
}

inline Dataset load_train_data(const DataConfig& d) {
  if (d.source == "cifar10") return load_cifar10(d.path, Split::train);
  SyntheticConfig s;
  s.seed = d.seed;
  s.classes = d.classes;
  s.n_per_class = d.per_class;
  s.image_size = d.image_size;
  s.noise = d.noise;
  return gen_synthetic(s, Split::train);
}

inline Dataset load_test_data(const DataConfig& d) {
  if (d.source == "cifar10") return load_cifar10(d.path, Split::test);
  SyntheticConfig s;
  s.seed = d.seed;
  s.classes = d.classes;
  s.n_per_class = d.test_per_class;
  s.image_size = d.image_size;
  s.noise = d.noise;
  return gen_synthetic(s, Split::test);
}

}  // namespace pqc
