#include <gtest/gtest.h>

#include <cmath>

#include "pqc/arch_metrics.hpp"

using namespace pqc;

namespace {

ArchDescriptor toy_two_layer() {
  ArchDescriptor a;
  a.name = "toy";
  a.input_channels = 3;
  a.layers.push_back(detail::conv_spec("l1", 3, 8, 3, 8, false, -1));
  a.layers.push_back(detail::conv_spec("l2", 8, 4, 3, 8, false, 0));
  return a;
}

double pct_diff(double got, double want) { return std::abs(got - want) / want * 100.0; }

}  // namespace

// 100 weights at 32 bits with no pruning -> 3200 bits.
TEST(ModelSize, SingleLayerFactorCheck) {
  ArchDescriptor a;
  a.name = "one";
  a.input_channels = 10;
  a.layers.push_back(detail::fc_spec("fc", 10, 10, -1));
  a.layers[0].has_bias = false;
  EXPECT_EQ(model_size_bits(a, CompressionPolicy::baseline32()), 3200);
}

// Hand arithmetic: 30% prune on layer 1 keeps 8 - floor(2.4) = 6 filters.
//   l1_eff = 6*3*9 = 162, l2_eff = 4*6*9 = 216, at 4 bits -> 1512 bits
//   macs_eff = 64*162 + 64*216 = 24192, at 4x4 -> 387072 bops
TEST(Metrics, ToyTwoLayerHandComputation) {
  ArchDescriptor a = toy_two_layer();
  CompressionPolicy p;
  p.body_bits = 4;
  p.first_last_bits = 4;
  p.input_act_bits = 4;
  p.prune_rate = 0.3;
  p.prune_rate_overrides["l2"] = 0.0;  // only layer 1 pruned in the hand computation
  EXPECT_EQ(model_size_bits(a, p), (162 + 216) * 4);
  EXPECT_EQ(bops(a, p), int64_t(64) * (162 + 216) * 4 * 4);
}

TEST(Bops, Uniform32PolicyIs1024TimesMacs) {
  ArchDescriptor a = builtin_arch("resnet20");
  int64_t total_macs = 0;
  for (const auto& l : a.layers) total_macs += l.macs();
  EXPECT_EQ(bops(a, CompressionPolicy::baseline32()), total_macs * 1024);
}

TEST(Metrics, AdditivityOverLayers) {
  ArchDescriptor a = builtin_arch("resnet20");
  const CompressionPolicy p = CompressionPolicy::reference_default();
  const ArchDescriptor resolved = apply_policy(a, p);
  int64_t sum = 0;
  for (const auto& l : resolved.layers) sum += effective_params(l) * l.weight_bits;
  EXPECT_EQ(model_size_bits(a, p), sum);
}

// Exact multiplicative laws on a single layer: halving every weight bit-width
// halves the size; BOPs scale by the weight-bit factor when activation bits
// are held fixed.
TEST(Metrics, BitScalingLaws) {
  ArchDescriptor a;
  a.name = "single";
  a.input_channels = 4;
  a.layers.push_back(detail::conv_spec("c", 4, 6, 3, 5, false, -1));
  CompressionPolicy p32 = CompressionPolicy::baseline32();
  CompressionPolicy p16 = p32;
  p16.body_bits = p16.first_last_bits = 16;
  EXPECT_EQ(model_size_bits(a, p32), 2 * model_size_bits(a, p16));
  CompressionPolicy p16a32 = p16;
  p16a32.input_act_bits = 32;
  EXPECT_EQ(bops(a, p32), 2 * bops(a, p16a32));
}

// On a deep chain of wide conv layers the size ratio approaches 1/(1-p)^2.
TEST(Metrics, PruningFactorLawOnWideChain) {
  ArchDescriptor a;
  a.name = "chain";
  a.input_channels = 400;
  int producer = -1;
  for (int i = 0; i < 100; ++i) {  // long chain damps the unpruned-input boundary layer
    a.layers.push_back(detail::conv_spec("c" + std::to_string(i), 400, 400, 3, 4, false, producer));
    producer = i;
  }
  CompressionPolicy base = CompressionPolicy::baseline32();
  CompressionPolicy pruned = base;
  pruned.prune_rate = 0.3;
  const double ratio = static_cast<double>(model_size_bits(a, base)) /
                       static_cast<double>(model_size_bits(a, pruned));
  const double ideal = 1.0 / (0.7 * 0.7);
  EXPECT_LT(std::abs(ratio - ideal) / ideal, 0.02);
}

TEST(Metrics, MonotoneInPruneRateAndBits) {
  ArchDescriptor a = builtin_arch("resnet20");
  CompressionPolicy p = CompressionPolicy::reference_default();
  CompressionPolicy more_prune = p;
  more_prune.prune_rate = 0.5;
  EXPECT_LE(model_size_bits(a, more_prune), model_size_bits(a, p));
  EXPECT_LE(bops(a, more_prune), bops(a, p));
  CompressionPolicy fewer_bits = p;
  fewer_bits.body_bits = 2;
  EXPECT_LE(model_size_bits(a, fewer_bits), model_size_bits(a, p));
  EXPECT_LE(bops(a, fewer_bits), bops(a, p));
}

TEST(CompressionReport, IdenticalPoliciesGiveUnitRatios) {
  ArchDescriptor a = builtin_arch("resnet32");
  const CompressionPolicy p = CompressionPolicy::reference_default();
  CompressionReport rep = compression_report(a, p, p);
  EXPECT_DOUBLE_EQ(rep.size_ratio, 1.0);
  EXPECT_DOUBLE_EQ(rep.bops_ratio, 1.0);
}

TEST(BuiltinArch, UnknownNameListsValidOnes) {
  try {
    builtin_arch("resnet18");
    FAIL() << "expected an exception";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("resnet20"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("vgg16"), std::string::npos);
  }
}

// Reference uncompressed sizes (2% tolerance): the descriptor conventions are
// projection-shortcut convs without bias and a biased classifier head.
TEST(BuiltinArch, UncompressedSizesMatchReferenceValues) {
  const struct {
    const char* name;
    double mb;
  } rows[] = {
      {"resnet20", 1.08}, {"resnet32", 1.86}, {"resnet56", 3.41}, {"resnet110", 6.89}, {"vgg16", 59.91}};
  for (const auto& row : rows) {
    ArchDescriptor a = builtin_arch(row.name);
    const double mb = static_cast<double>(model_size_bits(a, CompressionPolicy::baseline32())) / 8e6;
    EXPECT_LT(pct_diff(mb, row.mb), 2.0) << row.name << " got " << mb << " MB";
  }
}

TEST(BuiltinArch, ResNet20ParamCount) {
  ArchDescriptor a = builtin_arch("resnet20");
  EXPECT_EQ(a.total_params(), 270906);  // 0.27M, incl. two 1x1 projections and fc bias
}

TEST(BuiltinArch, CompressionRatiosMatchReferenceValues) {
  const struct {
    const char* name;
    double size_ratio;
    double bops_ratio;
  } rows[] = {{"resnet20", 15.78, 115.85},
              {"resnet32", 15.84, 118.18},
              {"resnet56", 15.89, 119.88},
              {"resnet110", 15.94, 120.95},
              {"vgg16", 15.95, 126.24}};
  for (const auto& row : rows) {
    ArchDescriptor a = builtin_arch(row.name);
    CompressionReport rep =
        compression_report(a, CompressionPolicy::baseline32(), CompressionPolicy::reference_default());
    EXPECT_LT(pct_diff(rep.size_ratio, row.size_ratio), 5.0)
        << row.name << " size ratio " << rep.size_ratio;
    EXPECT_LT(pct_diff(rep.bops_ratio, row.bops_ratio), 5.0)
        << row.name << " bops ratio " << rep.bops_ratio;
    EXPECT_EQ(rep.layers.size(), a.layers.size());  // per-layer breakdown present
  }
}

// Hand count of the 2-conv toy network: conv1 3->8 (224 with bias),
// conv2 8->16 (1168), fc 16->10 (170).
TEST(BuiltinArch, DeskNetSParamCount) {
  ArchDescriptor a = builtin_arch("desknet-s");
  EXPECT_EQ(a.total_params(), 224 + 1168 + 170);
}

TEST(BuiltinArch, DeskNetR8ParamCount) {
  ArchDescriptor a = builtin_arch("desknet-r8");
  EXPECT_EQ(a.total_params(), 19786);
}

TEST(BuiltinArch, ResidualLinksAreChannelConsistent) {
  for (const char* name : {"resnet20", "resnet56", "desknet-r8"}) {
    ArchDescriptor a = builtin_arch(name);
    EXPECT_NO_THROW(a.validate());
    EXPECT_FALSE(a.residual_links.empty());
  }
}

TEST(ArchDescriptor, InconsistentChannelsThrow) {
  ArchDescriptor a = toy_two_layer();
  a.layers[1].in_ch = 5;  // producer provides 8
  EXPECT_THROW(a.validate(), std::invalid_argument);
  EXPECT_THROW(model_size_bits(a, CompressionPolicy::baseline32()), std::invalid_argument);
}
