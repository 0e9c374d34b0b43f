#include <sys/wait.h>

#include <cstdlib>
#include <string>

#include <doctest.h>

#include "roigd/dataset.hpp"
#include "roigd/detection.hpp"
#include "roigd/io_util.hpp"
#include "test_support.hpp"

using namespace roigd;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string("\"") + testsup::cli_path() + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("cli eval reproduces the checked-in golden report byte-exactly") {
  testsup::TempDir tmp("eval");
  const auto fixtures = testsup::fixture_dir();
  const int rc = run_cli("eval --gt " + q(fixtures / "dataset") + " --det " +
                         q(fixtures / "detections.jsonl") + " --out " + q(tmp.path()));
  CHECK(rc == 0);
  CHECK(slurp_file(tmp.path() / "report") == slurp_file(fixtures / "golden" / "report"));
  CHECK(slurp_file(tmp.path() / "curve.csv") ==
        slurp_file(fixtures / "golden" / "curve.csv"));
}

TEST_CASE("cli eval hand-checked values in the golden report") {
  const auto fixtures = testsup::fixture_dir();
  const std::string report = slurp_file(fixtures / "golden" / "report");
  // apple AP from the planted TP,FP,TP,TP,FP pattern over 4 gt
  CHECK(report.find("\"apple\": 0.625") != std::string::npos);
  CHECK(report.find("\"tape\": 1.0") != std::string::npos);
  CHECK(report.find("\"map\": 0.8125") != std::string::npos);
}

TEST_CASE("cli eval exits 2 on missing inputs") {
  testsup::TempDir tmp("evalfail");
  const auto fixtures = testsup::fixture_dir();
  CHECK(run_cli("eval --gt " + q(tmp.path() / "nope") + " --det " +
                q(fixtures / "detections.jsonl") + " --out " + q(tmp.path() / "out")) == 2);
  CHECK(run_cli("eval --gt " + q(fixtures / "dataset") + " --det " +
                q(tmp.path() / "missing.jsonl") + " --out " + q(tmp.path() / "out")) == 2);
}

TEST_CASE("cli synth is deterministic across runs") {
  testsup::TempDir tmp("synth");
  const auto cfg = testsup::fixture_dir() / "synth_seed1.json";
  REQUIRE(run_cli("synth --config " + q(cfg) + " --out " + q(tmp.path() / "a")) == 0);
  REQUIRE(run_cli("synth --config " + q(cfg) + " --out " + q(tmp.path() / "b")) == 0);
  CHECK(slurp_file(tmp.path() / "a" / "index") == slurp_file(tmp.path() / "b" / "index"));
  CHECK(slurp_file(tmp.path() / "a" / "detections.jsonl") ==
        slurp_file(tmp.path() / "b" / "detections.jsonl"));
  CHECK(slurp_file(tmp.path() / "a" / "planted.jsonl") ==
        slurp_file(tmp.path() / "b" / "planted.jsonl"));
  const auto ids = load_dataset(tmp.path() / "a");
  REQUIRE(!ids.empty());
  const auto first = ids.front().image_id;
  CHECK(slurp_file(tmp.path() / "a" / "annotations" / (first + ".grasp")) ==
        slurp_file(tmp.path() / "b" / "annotations" / (first + ".grasp")));
}

TEST_CASE("cli nms with thresholds 1.0 is the identity") {
  testsup::TempDir tmp("nms");
  const auto fixtures = testsup::fixture_dir();
  const std::string input = slurp_file(fixtures / "detections.jsonl");
  // normalize through our own writer so byte comparison is meaningful
  const auto records = parse_detection_file(input, "detections.jsonl");
  write_file(tmp.path() / "in.jsonl", write_detection_file(records));
  REQUIRE(run_cli("nms --in " + q(tmp.path() / "in.jsonl") + " --out " +
                  q(tmp.path() / "out.jsonl") +
                  " --nms-grasp 1.0 --nms-box 1.0") == 0);
  CHECK(slurp_file(tmp.path() / "out.jsonl") == slurp_file(tmp.path() / "in.jsonl"));
}

TEST_CASE("cli nms suppresses duplicates") {
  testsup::TempDir tmp("nms2");
  DetectionRecord a;
  a.image_id = "img";
  a.category = "apple";
  a.score = 0.9;
  a.bbox = {10, 10, 60, 60};
  a.grasps = {{OrientedRect(30, 30, 20, 10, 0), 0.9},
              {OrientedRect(30, 30, 20, 10, 2), 0.8}};
  DetectionRecord b = a;
  b.score = 0.7;  // duplicate box, same class
  write_file(tmp.path() / "in.jsonl", write_detection_file({a, b}));
  REQUIRE(run_cli("nms --in " + q(tmp.path() / "in.jsonl") + " --out " +
                  q(tmp.path() / "out.jsonl") + " --nms-grasp 0.3 --nms-box 0.5") == 0);
  const auto out = parse_detection_file(slurp_file(tmp.path() / "out.jsonl"), "out");
  REQUIRE(out.size() == 1);
  CHECK(out[0].score == 0.9);
  CHECK(out[0].grasps.size() == 1);  // near-identical grasps collapse
}

TEST_CASE("cli convert round trips grasp files") {
  testsup::TempDir tmp("convert");
  const auto fixtures = testsup::fixture_dir();
  const auto src = fixtures / "dataset" / "annotations" / "fix_000.grasp";
  REQUIRE(run_cli("convert --in " + q(src) + " --out " + q(tmp.path() / "c.xywht") +
                  " --direction to-xywht") == 0);
  REQUIRE(run_cli("convert --in " + q(tmp.path() / "c.xywht") + " --out " +
                  q(tmp.path() / "back.grasp") + " --direction to-vertices") == 0);
  const auto before = parse_grasp_doc(slurp_file(src));
  const auto after = parse_grasp_doc(slurp_file(tmp.path() / "back.grasp"));
  REQUIRE(before.size() == after.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(approx_equal(before[i].rect, after[i].rect, 1e-4));
    CHECK(before[i].hard == after[i].hard);
    CHECK(before[i].owner_index == after[i].owner_index);
  }

  write_file(tmp.path() / "bad.grasp", "0 0 1 0 2 1 0 1 0 1\n");
  CHECK(run_cli("convert --in " + q(tmp.path() / "bad.grasp") + " --out " +
                q(tmp.path() / "x") + " --direction to-xywht") == 2);
}

TEST_CASE("cli augment applies the transform to the whole dataset") {
  testsup::TempDir tmp("augment");
  const auto fixtures = testsup::fixture_dir();
  REQUIRE(run_cli("augment --gt " + q(fixtures / "dataset") + " --transform hflip --out " +
                  q(tmp.path() / "flipped")) == 0);
  const auto original = load_dataset(fixtures / "dataset");
  const auto flipped = load_dataset(tmp.path() / "flipped");
  REQUIRE(original.size() == flipped.size());
  for (std::size_t i = 0; i < original.size(); ++i) {
    REQUIRE(original[i].grasps.size() == flipped[i].grasps.size());
    const auto expect = augment(original[i], Transform::hflip);
    for (std::size_t g = 0; g < expect.grasps.size(); ++g) {
      CHECK(approx_equal(expect.grasps[g].rect, flipped[i].grasps[g].rect, 1e-4));
    }
  }
}

TEST_CASE("cli grasp3d on the flat-plane fixture") {
  testsup::TempDir tmp("g3d");
  const auto fixtures = testsup::fixture_dir();
  REQUIRE(run_cli("grasp3d --det " + q(fixtures / "det3d.jsonl") + " --depth-dir " +
                  q(fixtures / "depth") + " --intrinsics " +
                  q(fixtures / "depth" / "intrinsics.json") + " --out " +
                  q(tmp.path() / "poses.jsonl")) == 0);
  const std::string out = slurp_file(tmp.path() / "poses.jsonl");
  CHECK(out.find("\"normal\":[0.0,0.0,-1.0]") != std::string::npos);
  CHECK(out.find("\"image_id\":\"plane\"") != std::string::npos);
}

TEST_CASE("cli grasp3d exits 3 when the rectangle has no valid depth") {
  testsup::TempDir tmp("g3dfail");
  const auto fixtures = testsup::fixture_dir();
  DetectionRecord det;
  det.image_id = "plane";
  det.category = "box";
  det.score = 0.9;
  det.bbox = {500, 400, 600, 470};
  det.grasps = {{OrientedRect(550, 430, 20, 10, 0), 0.9}};  // outside the 64x48 map
  write_file(tmp.path() / "det.jsonl", write_detection_file({det}));
  CHECK(run_cli("grasp3d --det " + q(tmp.path() / "det.jsonl") + " --depth-dir " +
                q(fixtures / "depth") + " --intrinsics " +
                q(fixtures / "depth" / "intrinsics.json") + " --out " +
                q(tmp.path() / "poses.jsonl")) == 3);
}

TEST_CASE("cli anchors dumps W*H*k rows") {
  testsup::TempDir tmp("anchors");
  REQUIRE(run_cli("anchors --roi 0 0 140 70 --grid-w 7 --grid-h 7 --k 4 --size 12 --out " +
                  q(tmp.path() / "anchors.csv")) == 0);
  const std::string csv = slurp_file(tmp.path() / "anchors.csv");
  std::size_t rows = 0;
  for (const char ch : csv) {
    if (ch == '\n') ++rows;
  }
  CHECK(rows == 7 * 7 * 4 + 1);  // header + anchors
  CHECK(csv.find("cell_x,cell_y,orientation") == 0);
}
