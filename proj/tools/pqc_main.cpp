// pqc: compression toolkit CLI.
//   train | spq | ppq     run a pipeline from a config file
//   eval                  evaluate a checkpoint
//   metrics               analytic model size / BOPs for an architecture
//   levels                dump an APoT level set with shift decompositions
//   verify-shift          exhaustive shift-add MAC equivalence check
//   hist                  weight histogram of a checkpoint layer

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pqc/apot.hpp"
#include "pqc/arch_metrics.hpp"
#include "pqc/checkpoint.hpp"
#include "pqc/config.hpp"
#include "pqc/model.hpp"
#include "pqc/pipelines.hpp"
#include "pqc/report.hpp"
#include "pqc/shift_mac.hpp"

namespace fs = std::filesystem;
using namespace pqc;

namespace {

std::string format_terms(const std::vector<PotTerm>& terms) {
  if (terms.empty()) return "0";
  std::string out;
  for (const auto& t : terms) {
    if (!out.empty()) out += " ";
    out += t.sign >= 0 ? "+" : "-";
    out += "2^-" + std::to_string(t.exponent);
  }
  return out;
}

int run_pipeline(const std::string& which, const std::string& config_path, const std::string& out_dir_flag) {
  RunConfig rc = load_run_config(config_path);
  if (!out_dir_flag.empty()) rc.out_dir = out_dir_flag;
  const Dataset train = load_train_data(rc.data);
  const Dataset test = load_test_data(rc.data);
  auto model = make_model(rc.train.arch, rc.data.image_size, rc.train.seed);

  auto progress = [](const EpochRecord& r, Model&) {
    std::printf("epoch %3d  %-9s train %.4f  eval %.4f  lr %.5f  pruned %.3f\n", r.epoch,
                r.phase.c_str(), r.train_acc, r.eval_acc, r.lr, r.pruned_fraction);
  };

  RunResult result;
  bool quantized_eval = false;
  if (which == "train") {
    result = train_baseline(*model, train, rc.train, progress);
  } else if (which == "spq") {
    result = run_spq(*model, train, rc.train, progress);
    quantized_eval = true;
  } else {
    result = run_ppq(*model, train, rc.train, progress);
    quantized_eval = true;
  }
  const double test_acc = evaluate(*model, test, quantized_eval, rc.train.batch_size);
  const ArchDescriptor arch = builtin_arch(rc.train.arch);
  nlohmann::json data_block = data_json(train);
  data_block["source"] = rc.data.source;
  data_block["seed"] = rc.data.seed;
  data_block["image_size"] = rc.data.image_size;
  data_block["noise"] = rc.data.noise;
  data_block["augment_flip"] = rc.train.augment_flip;
  emit_run_artifacts(rc.out_dir, which, rc.train, result, arch, test_acc, data_block);
  std::printf("final: train %.4f  eval %.4f  test %.4f\n", result.final_train_acc,
              result.final_eval_acc, test_acc);
  std::printf("artifacts written to %s (report.json, epochs.csv, checkpoint.pqck)\n",
              rc.out_dir.c_str());
  return 0;
}

int run_eval(const std::string& checkpoint_path, const std::string& config_path, bool quantized,
             const std::string& split) {
  RunConfig rc = load_run_config(config_path);
  const Dataset data = split == "train" ? load_train_data(rc.data) : load_test_data(rc.data);
  auto model = make_model(rc.train.arch, rc.data.image_size, rc.train.seed);
  if (quantized) model->configure_quant(rc.train.quant);
  const Checkpoint ck = load_checkpoint(checkpoint_path);
  model->load_from_checkpoint(ck, /*masks_zero_grad=*/false);
  if (quantized) {
    bool missing_alpha = false;
    for (ConvUnit* c : model->conv_units()) missing_alpha |= c->act_site.enabled() && c->act_site.warm;
    missing_alpha |= model->head()->act_site.enabled() && model->head()->act_site.warm;
    if (missing_alpha) {
      std::fprintf(stderr, "[pqc] checkpoint has no stored activation thresholds; calibrating on the eval split\n");
      calibrate_act_alphas(*model, data, rc.train.batch_size);
    }
  }
  const double acc = evaluate(*model, data, quantized, rc.train.batch_size);
  std::printf("%s accuracy (%s): %.4f\n", split.c_str(), quantized ? "quantized" : "full-precision", acc);
  return 0;
}

CompressionPolicy load_policy_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("policy: cannot open " + path);
  CompressionPolicy p = CompressionPolicy::reference_default();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::stringstream ss(line);
    std::string key, eq, value;
    if (!(ss >> key)) continue;
    if (!(ss >> eq >> value) || eq != "=") {
      throw std::runtime_error("policy line " + std::to_string(line_no) + ": expected key = value");
    }
    if (key == "body_bits") p.body_bits = std::stoi(value);
    else if (key == "first_last_bits") p.first_last_bits = std::stoi(value);
    else if (key == "input_act_bits") p.input_act_bits = std::stoi(value);
    else if (key == "prune_rate") p.prune_rate = std::stod(value);
    else if (key.rfind("prune_override.", 0) == 0) p.prune_rate_overrides[key.substr(15)] = std::stod(value);
    else throw std::runtime_error("policy: unknown key '" + key + "'");
  }
  return p;
}

ArchDescriptor load_arch_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("arch file: cannot open " + path);
  ArchDescriptor a;
  a.name = fs::path(path).stem().string();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::stringstream ss(line);
    std::string kind;
    if (!(ss >> kind)) continue;
    auto fields = [&]() {
      std::map<std::string, std::string> kv;
      std::string tok;
      while (ss >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw std::runtime_error("arch line " + std::to_string(line_no));
        kv[tok.substr(0, eq)] = tok.substr(eq + 1);
      }
      return kv;
    };
    if (kind == "input_channels") {
      std::string eq, v;
      ss >> eq >> v;
      a.input_channels = std::stoll(v);
    } else if (kind == "conv" || kind == "fc") {
      auto kv = fields();
      LayerSpec l;
      l.kind = kind == "conv" ? LayerKind::conv : LayerKind::fc;
      l.name = kv.at("name");
      l.in_ch = std::stoll(kv.at("in"));
      l.out_ch = std::stoll(kv.at("out"));
      if (kind == "conv") {
        l.kernel_h = l.kernel_w = std::stoi(kv.at("k"));
        l.out_h = l.out_w = std::stoll(kv.at("out_hw"));
      }
      l.has_bias = kv.count("bias") ? kv.at("bias") == "1" : (kind == "fc");
      l.producer = kv.count("producer") ? std::stoi(kv.at("producer"))
                                        : static_cast<int>(a.layers.size()) - 1;
      a.layers.push_back(std::move(l));
    } else if (kind == "residual") {
      auto kv = fields();
      a.residual_links.push_back(ResidualLink{std::stoi(kv.at("source")), std::stoi(kv.at("into"))});
    } else {
      throw std::runtime_error("arch line " + std::to_string(line_no) + ": unknown entry '" + kind + "'");
    }
  }
  a.validate();
  return a;
}

int run_metrics(const std::string& arch_name, const std::string& arch_file,
                const std::string& policy_file, bool as_json) {
  const ArchDescriptor arch = arch_file.empty() ? builtin_arch(arch_name) : load_arch_file(arch_file);
  const CompressionPolicy compressed =
      policy_file.empty() ? CompressionPolicy::reference_default() : load_policy_file(policy_file);
  const CompressionReport rep = compression_report(arch, CompressionPolicy::baseline32(), compressed);

  if (as_json) {
    std::cout << metrics_json(arch, compressed).dump(2) << "\n";
    return 0;
  }
  std::printf("%-12s %10s %12s %5s %5s %9s %9s %14s %14s\n", "layer", "params", "macs", "wbit",
              "abit", "surv_out", "surv_in", "size_bits", "bops");
  for (const auto& l : rep.layers) {
    std::printf("%-12s %10" PRId64 " %12" PRId64 " %5d %5d %9.4f %9.4f %14" PRId64 " %14" PRId64 "\n",
                l.name.c_str(), l.params, l.macs, l.weight_bits, l.act_in_bits, l.survival_out,
                l.survival_in, l.size_bits_compressed, l.bops_compressed);
  }
  std::printf("\nuncompressed: %.3f MB, %.3f GBOPs\n", rep.size_bits_baseline / 8e6,
              rep.bops_baseline / 1e9);
  std::printf("compressed:   %.3f MB, %.3f GBOPs\n", rep.size_bits_compressed / 8e6,
              rep.bops_compressed / 1e9);
  std::printf("model size reduction: x%.2f\n", rep.size_ratio);
  std::printf("BOPs reduction:       x%.2f\n", rep.bops_ratio);
  return 0;
}

int run_levels(int b, int k, bool is_signed, double alpha) {
  QuantConfig cfg;
  cfg.bits = b;
  cfg.base_bits = k;
  cfg.signed_values = is_signed;
  const LevelSet ls = build_level_set(cfg, alpha);
  std::printf("# b=%d k=%d signed=%d alpha=%g gamma=%.10g levels=%zu\n", b, k, is_signed ? 1 : 0,
              alpha, ls.gamma, ls.size());
  std::printf("index,level,terms\n");
  for (size_t i = 0; i < ls.size(); ++i) {
    std::printf("%zu,%.10g,%s\n", i, ls.levels[i], format_terms(ls.terms[i]).c_str());
  }
  return 0;
}

int run_verify_shift(int b, int k) {
  QuantConfig act_cfg;
  act_cfg.bits = b;
  act_cfg.base_bits = k;
  act_cfg.signed_values = false;
  QuantConfig w_cfg = act_cfg;
  w_cfg.signed_values = true;
  const LevelSet acts = build_level_set(act_cfg, 1.0);
  int failures = 0;
  for (bool sgn : {false, true}) {
    QuantConfig wc = sgn ? w_cfg : act_cfg;
    const LevelSet weights = build_level_set(wc, 1.0);
    const MacVerifyReport rep = verify_equivalence(acts, weights);
    std::printf("activations %zu levels x %s weights %zu levels: %zu pairs, %zu mismatches\n",
                acts.size(), sgn ? "signed" : "unsigned", weights.size(), rep.pair_count,
                rep.mismatch_count);
    for (const auto& m : rep.mismatches) {
      std::printf("  MISMATCH act=%.10g w=%.10g expected=%.10g got=%.10g\n", m.activation, m.weight,
                  m.expected, m.got);
    }
    if (!rep.ok()) ++failures;
  }
  std::printf(failures == 0 ? "OK: every product is an exact shift-add result\n"
                            : "FAILED: %d set(s) with mismatches\n",
              failures);
  return failures == 0 ? 0 : 1;
}

int run_hist(const std::string& checkpoint_path, const std::string& layer, int bins,
             const std::string& out_path) {
  const Checkpoint ck = load_checkpoint(checkpoint_path);
  const auto rows = weight_histogram(ck, layer, bins);
  const std::string csv = histogram_csv(rows);
  if (out_path.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    write_text_file(out_path, csv);
    std::printf("histogram written to %s\n", out_path.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prune + quantize compression toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  auto add_pipeline = [&](const std::string& name, const std::string& desc) {
    CLI::App* cmd = app.add_subcommand(name, desc);
    cmd->add_option("--config", config_path, "run configuration file")->required();
    cmd->add_option("--out", out_dir, "output directory (overrides run.out_dir)");
    return cmd;
  };
  CLI::App* cmd_train = add_pipeline("train", "full-precision baseline training");
  CLI::App* cmd_spq = add_pipeline("spq", "simultaneous pruning + quantization");
  CLI::App* cmd_ppq = add_pipeline("ppq", "staged pruning then quantization-aware training");

  std::string ck_path, split = "test";
  bool quantized = false;
  CLI::App* cmd_eval = app.add_subcommand("eval", "evaluate a checkpoint");
  cmd_eval->add_option("--checkpoint", ck_path, "checkpoint file")->required();
  cmd_eval->add_option("--config", config_path, "run configuration file")->required();
  cmd_eval->add_option("--split", split, "train | test")->check(CLI::IsMember({"train", "test"}));
  cmd_eval->add_flag("--quantized", quantized, "evaluate with the quantized forward path");

  std::string arch_name = "resnet20", arch_file, policy_file;
  bool as_json = false;
  CLI::App* cmd_metrics = app.add_subcommand("metrics", "analytic size and BOPs");
  cmd_metrics->add_option("--arch", arch_name, "builtin architecture name");
  cmd_metrics->add_option("--arch-file", arch_file, "architecture descriptor file");
  cmd_metrics->add_option("--policy", policy_file, "compression policy file");
  cmd_metrics->add_flag("--json", as_json, "machine-readable output");

  int b = 4, k = 2, bins = 32;
  bool is_signed = false;
  double alpha = 1.0;
  CLI::App* cmd_levels = app.add_subcommand("levels", "dump an APoT level set as CSV");
  cmd_levels->add_option("--b", b, "total bit-width")->required();
  cmd_levels->add_option("--k", k, "base bit-width")->required();
  cmd_levels->add_flag("--signed", is_signed, "signed level set");
  cmd_levels->add_option("--alpha", alpha, "clipping threshold");

  int vb = 4, vk = 2;
  CLI::App* cmd_verify = app.add_subcommand("verify-shift", "exhaustive shift-add MAC check");
  cmd_verify->add_option("--b", vb, "total bit-width")->required();
  cmd_verify->add_option("--k", vk, "base bit-width")->required();

  std::string layer, hist_out;
  CLI::App* cmd_hist = app.add_subcommand("hist", "weight histogram of a checkpoint layer");
  cmd_hist->add_option("--checkpoint", ck_path, "checkpoint file")->required();
  cmd_hist->add_option("--layer", layer, "layer name")->required();
  cmd_hist->add_option("--bins", bins, "bin count");
  cmd_hist->add_option("--out", hist_out, "write CSV here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_train->parsed()) return run_pipeline("train", config_path, out_dir);
    if (cmd_spq->parsed()) return run_pipeline("spq", config_path, out_dir);
    if (cmd_ppq->parsed()) return run_pipeline("ppq", config_path, out_dir);
    if (cmd_eval->parsed()) return run_eval(ck_path, config_path, quantized, split);
    if (cmd_metrics->parsed()) return run_metrics(arch_name, arch_file, policy_file, as_json);
    if (cmd_levels->parsed()) return run_levels(b, k, is_signed, alpha);
    if (cmd_verify->parsed()) return run_verify_shift(vb, vk);
    if (cmd_hist->parsed()) return run_hist(ck_path, layer, bins, hist_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
