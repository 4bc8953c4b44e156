#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "colordet/kernel.hpp"
#include "colordet/tensor.hpp"

namespace colordet {

/// 1x1 reduce -> 3x3 -> 1x1 expand, with an optional 1x1 projection on the
/// shortcut. The stage stride sits on the 3x3 conv.
struct Bottleneck {
  ConvSpec reduce;
  ConvSpec inner;
  ConvSpec expand;
  std::optional<ConvSpec> projection;
};

struct Stage {
  std::string name;  // "Conv2" .. "Conv5"
  int inner_channels = 0;
  int out_channels = 0;
  int first_stride = 1;
  std::vector<Bottleneck> blocks;
};

struct Head {
  PoolSpec avg_pool{7, 1, 0};
  int fc_in = 2048;
  int fc_out = 1000;
};

/// Declarative backbone description: stem conv + max pool, four bottleneck
/// stages, and a classification head that the detection path bypasses.
struct LayerGraph {
  int in_channels = 3;
  ConvSpec stem;
  PoolSpec stem_pool;
  std::vector<Stage> stages;
  Head head;

  /// Number of convolutions inside bottleneck blocks (projections excluded).
  int bottleneck_conv_layers() const;
};

LayerGraph build_vcr_resnet();

/// One row of a shape table. `h`, `w`, `c` describe the layer output.
struct ShapeRow {
  std::string name;
  std::string kind;  // "input", "conv", "max_pool", "avg_pool", "fc", "stage"
  int kernel = 0;
  int stride = 0;
  int h = 0;
  int w = 0;
  int c = 0;
  std::size_t params = 0;
};

struct ShapeTable {
  std::vector<ShapeRow> layers;   // every conv/pool/fc in execution order
  std::vector<ShapeRow> summary;  // Input, Conv1, Max Pool, Conv2..Conv5, Average Pool, Fc
};

/// Static shape inference. Throws InvalidInput naming the first layer whose
/// window does not fit. The head rows are omitted when include_head is false.
ShapeTable infer_shapes(const LayerGraph& graph, int height, int width,
                        bool include_head = true);

struct ParamGroup {
  std::string name;
  std::size_t count = 0;
  /// Figure printed in the published layer table, for side-by-side display.
  std::optional<std::size_t> reference;
};

struct ParamReport {
  std::vector<ParamGroup> groups;  // Conv1, Conv2..Conv5, Fc
  std::size_t total = 0;
};

ParamReport param_count(const LayerGraph& graph);

struct BlockWeights {
  Tensor reduce;
  Tensor inner;
  Tensor expand;
  std::optional<Tensor> projection;
};

struct BackboneWeights {
  Tensor stem;
  std::vector<std::vector<BlockWeights>> stages;
  Tensor fc;  // (fc_out, fc_in, 1, 1)
};

/// Seeded uniform weights in [-0.01, 0.01].
BackboneWeights init_weights(const LayerGraph& graph, std::uint64_t seed);
BackboneWeights zero_weights(const LayerGraph& graph);

struct StageOutputs {
  Tensor c2;
  Tensor c3;
  Tensor c4;
  Tensor c5;
};

struct LayerTrace {
  std::string name;
  Shape shape;
};

struct ForwardResult {
  StageOutputs stages;
  std::optional<Tensor> logits;
  std::vector<LayerTrace> trace;  // same names and order as ShapeTable::layers
};

ForwardResult forward(const LayerGraph& graph, const BackboneWeights& weights,
                      const Tensor& x, bool with_head = false);

}  // namespace colordet
