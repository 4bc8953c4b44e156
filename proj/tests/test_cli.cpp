#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "colordet/cli.hpp"
#include "colordet/dataset.hpp"
#include "colordet/eval.hpp"
#include "colordet/image.hpp"
#include "support/synthetic.hpp"

using namespace colordet;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) { return colordet::testing::scratch_dir(COLORDET_TEST_TMP, name); }

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST(Cli, UnknownSubcommandIsUsageError) {
  const Result r = invoke({"frobnicate"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("Usage"), std::string::npos) << r.err;
  EXPECT_EQ(invoke({}).code, 1);
  EXPECT_EQ(invoke({"inspect", "--no-such-flag"}).code, 1);
  EXPECT_EQ(invoke({"inspect", "--input-size", "banana"}).code, 1);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(invoke({"--help"}).code, 0); }

TEST(Cli, InspectPublishedShapes) {
  const Result r = invoke({"inspect", "--input-size", "227x227", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("schema_version"), 1);
  std::vector<std::string> outputs;
  for (const auto& row : j.at("summary")) outputs.push_back(row.at("output"));
  const std::vector<std::string> want{"227x227x3",  "112x112x64", "56x56x64",  "56x56x256",
                                      "28x28x512",  "14x14x1024", "7x7x2048",  "1x1x2048",
                                      "1000"};
  EXPECT_EQ(outputs, want);
  EXPECT_EQ(j.at("bottleneck_conv_layers"), 42);

  const Result text = invoke({"inspect"});
  ASSERT_EQ(text.code, 0);
  EXPECT_NE(text.out.find("9,408"), std::string::npos);
  EXPECT_NE(text.out.find("442,368"), std::string::npos);
}

TEST(Cli, InspectFpnToy) {
  const Result r = invoke({"inspect", "--input-size", "64x64", "--fpn", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_FALSE(j.at("head_included").get<bool>());
  const auto& levels = j.at("fpn").at("levels");
  ASSERT_EQ(levels.size(), 4u);
  EXPECT_EQ(levels[0].at("shape"), nlohmann::json({1, 256, 16, 16}));
  EXPECT_EQ(levels[3].at("shape"), nlohmann::json({1, 256, 2, 2}));
}

TEST(Cli, InspectTooSmallIsRuntimeError) {
  const Result r = invoke({"inspect", "--input-size", "3x3"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("layer"), std::string::npos);
}

TEST(Cli, LossProbeSweep) {
  const Result r = invoke({"loss-probe", "--kind", "vcr", "--beta", "0.11", "--sweep", "-1,1,9"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "d,loss,grad");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  ASSERT_EQ(rows.size(), 9u);
  EXPECT_EQ(rows[4][0], 0.0);
  EXPECT_EQ(rows[4][1], 0.0);
  EXPECT_NEAR(rows[0][1], 0.945, 1e-15);
  EXPECT_EQ(invoke({"loss-probe", "--kind", "hinge"}).code, 1);
  EXPECT_EQ(invoke({"loss-probe", "--sweep", "1,2"}).code, 1);
}

TEST(Cli, NmsDemo) {
  const fs::path dir = scratch("nms");
  write(dir / "boxes.json",
        R"([{"bbox": [0, 0, 4, 4], "score": 0.8}, {"bbox": [0, 0, 4, 4], "score": 0.9},
            {"bbox": [10, 10, 12, 12], "score": 0.1}])");
  const Result r = invoke({"--out", (dir / "nms.json").string(), "nms-demo", "--boxes",
                           (dir / "boxes.json").string(), "--iou", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(dir / "nms.json"));
  EXPECT_EQ(j.at("kept"), nlohmann::json({1, 2}));
  EXPECT_EQ(invoke({"nms-demo", "--boxes", (dir / "missing.json").string()}).code, 2);
}

TEST(Cli, EvalRoundTrip) {
  const fs::path dir = scratch("eval");
  Dataset gt(1);
  gt[0] = {"a.jpg", 100, 100, {{{0, 0, 10, 10}, 0}, {{20, 20, 30, 30}, 0}}};
  write_annotations((dir / "gt.jsonl").string(), gt);
  const std::vector<Detection> preds{{"a.jpg", {0, 0, 10, 10}, 0, 0.95},
                                     {"a.jpg", {40, 40, 50, 50}, 0, 0.9},
                                     {"a.jpg", {20, 20, 30, 30}, 0, 0.8}};
  {
    std::ofstream p(dir / "pred.jsonl");
    for (const auto& d : preds) p << to_jsonl(d) << '\n';
  }
  const Result r = invoke({"--out", (dir / "report.json").string(), "eval", "--gt",
                           (dir / "gt.jsonl").string(), "--pred", (dir / "pred.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const EvalReport rep = eval_report_from_json(nlohmann::json::parse(slurp(dir / "report.json")));
  EXPECT_NEAR(rep.map, 0.5 + 0.5 * (2.0 / 3.0), 1e-12);
  const std::string csv = slurp(dir / "report.csv");
  EXPECT_EQ(csv.rfind("color,AP\nwhite,0.8333\n", 0), 0u) << csv;

  write(dir / "bad.jsonl", "{}\n{\"image\": 3}\n");
  const Result bad = invoke({"eval", "--gt", (dir / "gt.jsonl").string(), "--pred",
                             (dir / "bad.jsonl").string()});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("bad.jsonl:1"), std::string::npos) << bad.err;
}

TEST(Cli, StatsAndSplit) {
  const fs::path dir = scratch("dataset");
  const Dataset d = colordet::testing::make_table2_dataset(3, 1500);
  write_annotations((dir / "ann.jsonl").string(), d);

  const Result s = invoke({"--out", (dir / "stats.json").string(), "stats", "--ann",
                           (dir / "ann.jsonl").string(), "--table2-check"});
  ASSERT_EQ(s.code, 0) << s.err;
  const auto j = nlohmann::json::parse(slurp(dir / "stats.json"));
  EXPECT_EQ(j.at("total"), 31232);
  EXPECT_NE(s.out.find("white"), std::string::npos);

  const fs::path out1 = dir / "split1", out2 = dir / "split2";
  for (const auto& o : {out1, out2}) {
    const Result r = invoke({"--seed", "7", "--out", o.string(), "split", "--ann",
                             (dir / "ann.jsonl").string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  for (const char* f : {"train.jsonl", "val.jsonl", "test.jsonl", "split_report.json"})
    EXPECT_EQ(slurp(out1 / f), slurp(out2 / f)) << f;
  const Dataset train = load_annotations((out1 / "train.jsonl").string());
  const Dataset val = load_annotations((out1 / "val.jsonl").string());
  const Dataset test = load_annotations((out1 / "test.jsonl").string());
  EXPECT_EQ(train.size() + val.size() + test.size(), d.size());

  EXPECT_EQ(invoke({"split", "--ann", (dir / "ann.jsonl").string()}).code, 1);
  write(dir / "broken.jsonl", "{\"image\": \"x\", \"width\": 5, \"height\": 5, \"objects\": []}\n[");
  const Result bad = invoke({"stats", "--ann", (dir / "broken.jsonl").string()});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("broken.jsonl:2"), std::string::npos) << bad.err;
}

TEST(Cli, PreprocessFolder) {
  const fs::path dir = scratch("preprocess");
  fs::create_directories(dir / "in");
  std::vector<std::uint8_t> rgb(12 * 10 * 3);
  for (std::size_t i = 0; i < rgb.size(); ++i) rgb[i] = static_cast<std::uint8_t>(100 + i % 50);
  write_image(Image::from_rgb8(12, 10, rgb), (dir / "in" / "a.png").string());
  write_image(Image::from_rgb8(12, 10, rgb), (dir / "in" / "b.png").string());

  const Result r = invoke({"--jobs", "2", "preprocess", "--illum", "night", "--in",
                           (dir / "in").string(), "--out", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const Image out = read_image((dir / "out" / "a.png").string());
  EXPECT_EQ(out.to_rgb8()[0], 150);  // 100 * 1.5
  const auto rep = nlohmann::json::parse(slurp(dir / "out" / "preprocess_report.json"));
  EXPECT_EQ(rep.at("files").size(), 2u);

  const Result dh = invoke({"preprocess", "--dehaze", "--window", "3", "--in",
                            (dir / "in").string(), "--out", (dir / "out2").string()});
  EXPECT_EQ(dh.code, 0) << dh.err;
  EXPECT_EQ(invoke({"preprocess", "--dehaze", "--window", "4", "--in", (dir / "in").string(),
                    "--out", (dir / "out3").string()})
                .code,
            1);
  EXPECT_EQ(invoke({"preprocess", "--in", (dir / "in").string(), "--out",
                    (dir / "out4").string(), "--illum", "dusk"})
                .code,
            1);
}

TEST(Cli, PipelineIsDeterministic) {
  const fs::path dir = scratch("pipeline");
  std::vector<std::uint8_t> rgb(40 * 30 * 3);
  for (std::size_t i = 0; i < rgb.size(); ++i) rgb[i] = static_cast<std::uint8_t>(i * 7 % 256);
  write_image(Image::from_rgb8(40, 30, rgb), (dir / "img.png").string());
  for (const char* name : {"p1.json", "p2.json"}) {
    const Result r = invoke({"--seed", "5", "--out", (dir / name).string(), "pipeline", "--image",
                             (dir / "img.png").string(), "--dehaze", "--illum", "noon"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(slurp(dir / "p1.json"), slurp(dir / "p2.json"));
  const auto j = nlohmann::json::parse(slurp(dir / "p1.json"));
  EXPECT_EQ(j.at("schema_version"), 1);
  EXPECT_GT(j.at("total_anchors").get<int>(), 0);
}
