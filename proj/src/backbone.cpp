#include "colordet/backbone.hpp"

#include "colordet/error.hpp"

namespace colordet {

namespace {

constexpr int kExpansion = 4;

ConvSpec conv(int in, int out, int k, int stride, Padding pad) {
  return ConvSpec{in, out, k, k, stride, pad, false};
}

Stage make_stage(std::string name, int in_channels, int inner, int blocks,
                 int first_stride) {
  Stage st;
  st.name = std::move(name);
  st.inner_channels = inner;
  st.out_channels = inner * kExpansion;
  st.first_stride = first_stride;
  for (int b = 0; b < blocks; ++b) {
    const int in = b == 0 ? in_channels : st.out_channels;
    const int stride = b == 0 ? first_stride : 1;
    Bottleneck blk{conv(in, inner, 1, 1, 0), conv(inner, inner, 3, stride, 1),
                   conv(inner, st.out_channels, 1, 1, 0), std::nullopt};
    if (b == 0) blk.projection = conv(in, st.out_channels, 1, stride, 0);
    st.blocks.push_back(blk);
  }
  return st;
}

std::string block_prefix(const Stage& st, std::size_t b) {
  return st.name + "." + std::to_string(b + 1) + ".";
}

ConvSpec fc_as_conv(const Head& h) { return conv(h.fc_in, h.fc_out, 1, 1, 0); }

}  // namespace

int LayerGraph::bottleneck_conv_layers() const {
  int n = 0;
  for (const auto& st : stages) n += 3 * static_cast<int>(st.blocks.size());
  return n;
}

LayerGraph build_vcr_resnet() {
  LayerGraph g;
  // Asymmetric stem padding: 227 -> 112 and 32m -> 16m - 1, so the max pool
  // lands on 56 and 8m respectively.
  g.stem = conv(3, 64, 7, 2, Padding{1, 2});
  g.stem_pool = PoolSpec{3, 2, 1};
  g.stages.push_back(make_stage("Conv2", 64, 64, 3, 1));
  g.stages.push_back(make_stage("Conv3", 256, 128, 4, 2));
  g.stages.push_back(make_stage("Conv4", 512, 256, 4, 2));
  g.stages.push_back(make_stage("Conv5", 1024, 512, 3, 2));
  return g;
}

ShapeTable infer_shapes(const LayerGraph& graph, int height, int width,
                        bool include_head) {
  if (height < 1 || width < 1) throw InvalidInput("infer_shapes: input dims must be >= 1");
  ShapeTable table;
  int h = height, w = width, c = graph.in_channels;
  table.summary.push_back({"Input", "input", 0, 0, h, w, c, 0});

  auto apply = [&](const std::string& name, const std::string& kind, int k,
                   int stride, Padding pad, int out_c, std::size_t params) {
    const int oh = conv_out_dim(h, k, stride, pad);
    const int ow = conv_out_dim(w, k, stride, pad);
    if (oh < 1 || ow < 1)
      throw InvalidInput("input " + std::to_string(height) + "x" + std::to_string(width) +
                         " too small: layer '" + name + "' (" + std::to_string(k) + "x" +
                         std::to_string(k) + ") does not fit a " + std::to_string(h) +
                         "x" + std::to_string(w) + " map");
    ShapeRow row{name, kind, k, stride, oh, ow, out_c, params};
    table.layers.push_back(row);
    return row;
  };
  auto apply_conv = [&](const std::string& name, const ConvSpec& s) {
    if (s.in_channels != c)
      throw InvalidInput("layer '" + name + "' expects " + std::to_string(s.in_channels) +
                         " channels, graph provides " + std::to_string(c));
    return apply(name, "conv", s.kernel_h, s.stride, s.padding, s.out_channels,
                 s.param_count());
  };

  ShapeRow r = apply_conv("Conv1", graph.stem);
  h = r.h, w = r.w, c = r.c;
  table.summary.push_back(r);
  r = apply("Max Pool", "max_pool", graph.stem_pool.kernel, graph.stem_pool.stride,
            graph.stem_pool.padding, c, 0);
  h = r.h, w = r.w;
  table.summary.push_back(r);

  for (const auto& st : graph.stages) {
    std::size_t stage_params = 0;
    for (std::size_t b = 0; b < st.blocks.size(); ++b) {
      const auto& blk = st.blocks[b];
      const std::string p = block_prefix(st, b);
      const int in_h = h, in_w = w, in_c = c;
      r = apply_conv(p + "reduce", blk.reduce);
      h = r.h, w = r.w, c = r.c;
      r = apply_conv(p + "inner", blk.inner);
      h = r.h, w = r.w, c = r.c;
      r = apply_conv(p + "expand", blk.expand);
      const ShapeRow main = r;
      stage_params += blk.reduce.param_count() + blk.inner.param_count() +
                      blk.expand.param_count();
      h = in_h, w = in_w, c = in_c;
      if (blk.projection) {
        r = apply_conv(p + "projection", *blk.projection);
        stage_params += blk.projection->param_count();
      } else {
        r = ShapeRow{p + "identity", "identity", 0, 0, h, w, c, 0};
      }
      if (r.h != main.h || r.w != main.w || r.c != main.c)
        throw InvalidInput("residual shape mismatch in block '" + p + "'");
      h = main.h, w = main.w, c = main.c;
    }
    table.summary.push_back({st.name, "stage", 0, st.first_stride, h, w, c, stage_params});
  }

  if (include_head) {
    const Head& hd = graph.head;
    r = apply("Average Pool", "avg_pool", hd.avg_pool.kernel, hd.avg_pool.stride,
              hd.avg_pool.padding, c, 0);
    h = r.h, w = r.w;
    table.summary.push_back(r);
    if (h != 1 || w != 1 || c != hd.fc_in)
      throw InvalidInput("layer 'Fc' expects a 1x1x" + std::to_string(hd.fc_in) +
                         " input, got " + std::to_string(h) + "x" + std::to_string(w) +
                         "x" + std::to_string(c));
    r = apply_conv("Fc", fc_as_conv(hd));
    r.kind = "fc";
    table.layers.back().kind = "fc";
    table.summary.push_back(r);
  }
  return table;
}

ParamReport param_count(const LayerGraph& graph) {
  static constexpr std::size_t kPublished[] = {442'368, 4'718'592, 18'874'368, 56'623'104};
  ParamReport rep;
  rep.groups.push_back({"Conv1", graph.stem.param_count(), 9'408});
  for (std::size_t i = 0; i < graph.stages.size(); ++i) {
    const auto& st = graph.stages[i];
    std::size_t n = 0;
    for (const auto& blk : st.blocks) {
      n += blk.reduce.param_count() + blk.inner.param_count() + blk.expand.param_count();
      if (blk.projection) n += blk.projection->param_count();
    }
    std::optional<std::size_t> ref;
    if (i < std::size(kPublished)) ref = kPublished[i];
    rep.groups.push_back({st.name, n, ref});
  }
  rep.groups.push_back({"Fc", fc_as_conv(graph.head).param_count(), 2'048'000});
  for (const auto& g : rep.groups) rep.total += g.count;
  return rep;
}

namespace {

template <typename Make>
BackboneWeights make_weights(const LayerGraph& graph, Make make) {
  BackboneWeights wts;
  wts.stem = make(graph.stem.weight_shape());
  for (const auto& st : graph.stages) {
    auto& blocks = wts.stages.emplace_back();
    for (const auto& blk : st.blocks) {
      BlockWeights bw{make(blk.reduce.weight_shape()), make(blk.inner.weight_shape()),
                      make(blk.expand.weight_shape()), std::nullopt};
      if (blk.projection) bw.projection = make(blk.projection->weight_shape());
      blocks.push_back(std::move(bw));
    }
  }
  wts.fc = make(fc_as_conv(graph.head).weight_shape());
  return wts;
}

}  // namespace

BackboneWeights init_weights(const LayerGraph& graph, std::uint64_t seed) {
  std::uint64_t next = seed;
  return make_weights(graph, [&](Shape s) {
    // Each tensor gets its own stream so layer order changes stay local.
    next = next * 6364136223846793005ULL + 1442695040888963407ULL;
    return Tensor::uniform(s, next);
  });
}

BackboneWeights zero_weights(const LayerGraph& graph) {
  return make_weights(graph, [](Shape s) { return Tensor(s); });
}

ForwardResult forward(const LayerGraph& graph, const BackboneWeights& weights,
                      const Tensor& x, bool with_head) {
  if (x.shape().c != graph.in_channels)
    throw InvalidInput("forward: input has " + std::to_string(x.shape().c) +
                       " channels, graph expects " + std::to_string(graph.in_channels));
  if (weights.stages.size() != graph.stages.size())
    throw InvalidInput("forward: weights do not match graph stages");

  ForwardResult res;
  auto record = [&](const std::string& name, const Tensor& t) {
    res.trace.push_back({name, t.shape()});
  };

  Tensor cur = conv2d(x, weights.stem, graph.stem);
  record("Conv1", cur);
  cur = max_pool(relu(cur), graph.stem_pool);
  record("Max Pool", cur);

  std::vector<Tensor> outs;
  for (std::size_t s = 0; s < graph.stages.size(); ++s) {
    const auto& st = graph.stages[s];
    if (weights.stages[s].size() != st.blocks.size())
      throw InvalidInput("forward: weights do not match blocks of " + st.name);
    for (std::size_t b = 0; b < st.blocks.size(); ++b) {
      const auto& blk = st.blocks[b];
      const auto& bw = weights.stages[s][b];
      const std::string p = block_prefix(st, b);
      Tensor y = conv2d(cur, bw.reduce, blk.reduce);
      record(p + "reduce", y);
      y = conv2d(relu(y), bw.inner, blk.inner);
      record(p + "inner", y);
      y = conv2d(relu(y), bw.expand, blk.expand);
      record(p + "expand", y);
      Tensor shortcut = cur;
      if (blk.projection) {
        if (!bw.projection) throw InvalidInput("forward: missing projection weights in " + p);
        shortcut = conv2d(cur, *bw.projection, *blk.projection);
        record(p + "projection", shortcut);
      }
      cur = relu(add(y, shortcut));
    }
    outs.push_back(cur);
  }
  if (outs.size() != 4) throw InvalidInput("forward: graph must have exactly four stages");
  res.stages = StageOutputs{outs[0], outs[1], outs[2], outs[3]};

  if (with_head) {
    Tensor pooled = avg_pool(cur, graph.head.avg_pool);
    record("Average Pool", pooled);
    if (pooled.shape().h != 1 || pooled.shape().w != 1)
      throw InvalidInput("forward: layer 'Fc' expects a 1x1 input, got " +
                         pooled.shape().str());
    Tensor logits = conv2d(pooled, weights.fc, fc_as_conv(graph.head));
    record("Fc", logits);
    res.logits = std::move(logits);
  }
  return res;
}

}  // namespace colordet
