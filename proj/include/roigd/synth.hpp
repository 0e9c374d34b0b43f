#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "roigd/dataset.hpp"
#include "roigd/detection.hpp"
#include "roigd/metrics.hpp"

namespace roigd {

// Deterministic PRNG: std::mt19937_64 (bit-exact by the standard) with
// fixed value mappings, so generated fixtures reproduce across platforms.
// std::uniform_* distributions are implementation-defined and deliberately
// not used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // [0, 1) from the top 53 bits
  double uniform() { return (engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // inclusive bounds
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform() * (static_cast<double>(hi) - lo + 1.0));
  }
  bool bernoulli(double p) { return uniform() < p; }
  // Box-Muller, one value per pair of uniforms
  double normal(double mean, double sigma);

 private:
  std::mt19937_64 engine_;
};

struct ScoreModel {
  double tp_lo = 0.5;
  double tp_hi = 1.0;
  double fp_lo = 0.05;
  double fp_hi = 0.7;
};

struct SynthConfig {
  std::uint64_t seed = 1;
  int n_scenes = 20;
  double image_width = 640.0;
  double image_height = 480.0;
  std::array<int, 2> objects_per_scene{2, 5};
  std::array<int, 2> grasps_per_object{1, 3};
  // probability that an object (after the first of its scene) is placed
  // overlapping a previously placed one
  double overlap_bias = 0.3;
  double hard_rate = 0.1;
  // detector emulation
  double det_prob = 0.95;      // chance a gt object produces a detection
  double box_jitter = 0.0;     // sigma, pixels, on box corners
  double grasp_jitter = 0.0;   // sigma, pixels, on grasp center and extents
  double angle_jitter = 0.0;   // sigma, degrees
  double fp_rate = 0.0;        // chance of one spurious detection per image
  ScoreModel score_model;
};

SynthConfig synth_config_from_json(const std::string& text,
                                   const std::string& filename = "<config>");
std::string synth_config_to_json(const SynthConfig& cfg);

const std::array<std::string, 31>& category_names();

std::vector<SceneAnnotation> generate_scenes(const SynthConfig& cfg);

// A generated detection plus its label: planted_tp is the local TP check
// (some gt object passes all the category/box/grasp gates against it),
// ignoring duplicate competition.
struct PlantedDetection {
  DetectionRecord det;
  bool planted_tp = false;
  std::optional<int> source_object;  // gt object index, nullopt for spurious
};

std::vector<PlantedDetection> generate_detections(
    const std::vector<SceneAnnotation>& scenes, const SynthConfig& cfg,
    const EvalParams& params = {});

std::vector<DetectionRecord> strip_labels(const std::vector<PlantedDetection>& planted);

std::string planted_to_json(const std::vector<PlantedDetection>& planted);

}  // namespace roigd
