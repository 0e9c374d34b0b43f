#include <cmath>

#include <doctest.h>

#include "roigd/assignment.hpp"
#include "roigd/synth.hpp"
#include "reference_impls.hpp"
#include "test_support.hpp"

using namespace roigd;
using testref::reference_match;
using testref::reference_targets;

TEST_CASE("match_rois: examples") {
  std::vector<ObjectAnnotation> objects{{1, "apple", {0, 0, 100, 100}},
                                        {2, "tape", {200, 0, 300, 100}}};

  SUBCASE("identical box matches at IoU 1") {
    const auto m = match_rois({{0, 0, 100, 100}}, objects);
    REQUIRE(m[0].object_pos.has_value());
    CHECK(*m[0].object_pos == 0);
    CHECK(m[0].iou == 1.0);
  }
  SUBCASE("max IoU below the gate yields no match") {
    // IoU = 40*100 / (100*100 + 100*100 - 40*100) = 0.25
    const auto m = match_rois({{60, 0, 160, 100}}, objects);
    CHECK_FALSE(m[0].object_pos.has_value());
  }
  SUBCASE("argmax wins among candidates") {
    std::vector<ObjectAnnotation> pair{{1, "a", {0, 0, 100, 100}},
                                       {2, "b", {10, 0, 110, 100}}};
    // roi closer to object 2
    const auto m = match_rois({{12, 0, 112, 100}}, pair);
    REQUIRE(m[0].object_pos.has_value());
    CHECK(*m[0].object_pos == 1);
  }
}

TEST_CASE("match_rois equals exhaustive reference on random scenes") {
  Rng rng(41);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<ObjectAnnotation> objects;
    const int n_obj = rng.uniform_int(1, 6);
    for (int o = 0; o < n_obj; ++o) {
      objects.push_back({o + 1, "c", testsup::random_box(rng)});
    }
    std::vector<AxisAlignedBox> rois;
    const int n_roi = rng.uniform_int(1, 8);
    for (int r = 0; r < n_roi; ++r) {
      if (rng.bernoulli(0.5)) {
        // jittered copy of an object box, likely above the gate
        const auto& b = objects[rng.uniform_int(0, n_obj - 1)].bbox;
        rois.push_back({b.x_min + rng.uniform(-10, 10), b.y_min + rng.uniform(-10, 10),
                        b.x_max + rng.uniform(-10, 10), b.y_max + rng.uniform(-10, 10)});
        if (!rois.back().valid()) rois.back() = b;
      } else {
        rois.push_back(testsup::random_box(rng));
      }
    }
    const auto got = match_rois(rois, objects);
    const auto ref = reference_match(rois, objects);
    REQUIRE(got.size() == ref.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].object_pos == ref[i].object_pos);
      if (got[i].object_pos) {
        CHECK(got[i].iou == ref[i].iou);
        CHECK(got[i].iou > 0.5);
      }
    }
  }
}

TEST_CASE("roi_ground_truth: ownership decides, not containment") {
  // knife grasps lie inside the apple RoI but belong to the knife
  SceneAnnotation s;
  s.image_id = "fig3";
  s.width = 640;
  s.height = 480;
  s.objects.push_back({1, "apple", {100, 100, 400, 400}});
  s.objects.push_back({2, "knife", {150, 150, 350, 250}});  // nested inside the apple box
  s.grasps.push_back({OrientedRect(250, 300, 40, 20, 10), false, 1});
  s.grasps.push_back({OrientedRect(200, 200, 40, 12, 45), false, 2});
  s.grasps.push_back({OrientedRect(300, 200, 40, 12, -45), false, 2});

  const auto matches = match_rois({{105, 105, 395, 395}}, s.objects);
  REQUIRE(matches[0].object_pos.has_value());
  CHECK(*matches[0].object_pos == 0);

  const auto gt = roi_ground_truth(matches[0], s);
  REQUIRE(gt.size() == 1);
  CHECK(gt[0].owner_index == 1);

  SUBCASE("unmatched RoI gets nothing") {
    const auto none = match_rois({{0, 0, 50, 50}}, s.objects);
    CHECK(roi_ground_truth(none[0], s).empty());
  }
  SUBCASE("matched object without grasps gets nothing") {
    SceneAnnotation empty = s;
    empty.grasps.clear();
    CHECK(roi_ground_truth(matches[0], empty).empty());
  }
}

TEST_CASE("anchor_targets: examples") {
  const AxisAlignedBox roi{0, 0, 70, 70};
  const auto grid = build_anchor_grid(roi, {7, 7, 4, 12.0});

  SUBCASE("no grasps: everything ungraspable") {
    const auto t = anchor_targets(grid, {});
    for (const auto& a : t) CHECK(a.label == AnchorLabel::ungraspable);
  }
  SUBCASE("grasp at a cell center with an anchor angle: zero offsets") {
    // cell (3,3) center is (35,35); anchor angle 22.5 exists for k=4
    std::vector<GraspAnnotation> gt{{OrientedRect(35, 35, 12, 12, 22.5), false, 1}};
    const auto t = anchor_targets(grid, gt);
    const auto idx = grid.flat_index(3, 3, 2);
    CHECK(t[idx].label == AnchorLabel::graspable);
    REQUIRE(t[idx].offsets.has_value());
    CHECK(t[idx].offsets->tx == 0.0);
    CHECK(t[idx].offsets->ty == 0.0);
    CHECK(t[idx].offsets->tw == 0.0);
    CHECK(t[idx].offsets->th == 0.0);
    CHECK(t[idx].offsets->ttheta == 0.0);
    // the remaining anchors of that cell are ignored
    for (int m = 0; m < 4; ++m) {
      if (m != 2) CHECK(t[grid.flat_index(3, 3, m)].label == AnchorLabel::ignore);
    }
  }
  SUBCASE("theta 0 ties between -22.5 and 22.5 resolve to the lower index") {
    std::vector<GraspAnnotation> gt{{OrientedRect(35, 35, 12, 12, 0), false, 1}};
    const auto t = anchor_targets(grid, gt);
    CHECK(t[grid.flat_index(3, 3, 1)].label == AnchorLabel::graspable);  // -22.5
    CHECK(t[grid.flat_index(3, 3, 2)].label == AnchorLabel::ignore);
  }
  SUBCASE("grasp center outside the RoI") {
    std::vector<GraspAnnotation> gt{{OrientedRect(100, 35, 12, 12, 0), false, 1}};
    CHECK_THROWS_AS(anchor_targets(grid, gt), GraspOutsideRoi);
  }
  SUBCASE("hard grasps can be excluded") {
    std::vector<GraspAnnotation> gt{{OrientedRect(35, 35, 12, 12, 0), true, 1}};
    const auto with = anchor_targets(grid, gt, true);
    CHECK(with[grid.flat_index(3, 3, 1)].label == AnchorLabel::graspable);
    const auto without = anchor_targets(grid, gt, false);
    for (const auto& a : without) CHECK(a.label == AnchorLabel::ungraspable);
  }
}

TEST_CASE("anchor_targets equals exhaustive reference; offsets decode back") {
  Rng rng(43);
  for (int trial = 0; trial < 1000; ++trial) {
    const double x0 = rng.uniform(0, 50);
    const double y0 = rng.uniform(0, 50);
    const AxisAlignedBox roi{x0, y0, x0 + rng.uniform(50, 300), y0 + rng.uniform(50, 300)};
    const AnchorSpec spec{rng.uniform_int(1, 7), rng.uniform_int(1, 7),
                          rng.uniform_int(1, 6), rng.bernoulli(0.5) ? 12.0 : 24.0};
    const auto grid = build_anchor_grid(roi, spec);
    std::vector<GraspAnnotation> gt;
    const int n = rng.uniform_int(0, 5);
    for (int g = 0; g < n; ++g) {
      gt.push_back({OrientedRect(rng.uniform(roi.x_min, roi.x_max),
                                 rng.uniform(roi.y_min, roi.y_max),
                                 rng.uniform(4, 40), rng.uniform(4, 20),
                                 rng.uniform(-90, 90)),
                    false, 1});
    }
    const auto got = anchor_targets(grid, gt);
    const auto ref = reference_targets(grid, gt);
    REQUIRE(got.size() == ref.size());
    std::size_t graspable = 0;
    for (std::size_t a = 0; a < got.size(); ++a) {
      CHECK(got[a].label == ref[a].label);
      if (got[a].label == AnchorLabel::graspable) {
        ++graspable;
        REQUIRE(got[a].offsets.has_value());
        CHECK(got[a].offsets->tx == ref[a].offsets->tx);
        CHECK(got[a].offsets->ty == ref[a].offsets->ty);
        CHECK(got[a].offsets->tw == ref[a].offsets->tw);
        CHECK(got[a].offsets->th == ref[a].offsets->th);
        CHECK(got[a].offsets->ttheta == ref[a].offsets->ttheta);
        // decoding lands on one of the source grasps
        const auto dec = decode(*got[a].offsets, grid.anchors[a], spec.k);
        bool hit = false;
        for (const auto& g : gt) {
          if (std::abs(dec.x - g.rect.x) < 1e-6 && std::abs(dec.y - g.rect.y) < 1e-6 &&
              std::abs(dec.w - g.rect.w) < 1e-6 && std::abs(dec.h - g.rect.h) < 1e-6 &&
              angle_distance(dec.theta, g.rect.theta) < 1e-6) {
            hit = true;
            break;
          }
        }
        CHECK(hit);
      }
    }
    CHECK(graspable <= gt.size());
  }
}

TEST_CASE("baseline_assign: examples and threshold monotonicity") {
  const std::vector<AxisAlignedBox> boxes{{0, 0, 100, 100}};

  SUBCASE("single grasp above the gate is assigned wherever it sits") {
    const std::vector<ScoredGrasp> grasps{{OrientedRect(500, 500, 10, 5, 0), 0.3}};
    const auto a = baseline_assign(boxes, grasps);
    REQUIRE(a[0].has_value());
    CHECK(*a[0] == 0);
  }
  SUBCASE("all scores at or below 0.25 assign nothing") {
    const std::vector<ScoredGrasp> grasps{{OrientedRect(50, 50, 10, 5, 0), 0.25},
                                          {OrientedRect(50, 50, 10, 5, 0), 0.1}};
    CHECK_FALSE(baseline_assign(boxes, grasps)[0].has_value());
  }
  SUBCASE("nearer grasp wins") {
    const std::vector<ScoredGrasp> grasps{{OrientedRect(50, 70, 10, 5, 0), 0.9},
                                          {OrientedRect(50, 60, 10, 5, 0), 0.9}};
    const auto a = baseline_assign(boxes, grasps);
    REQUIRE(a[0].has_value());
    CHECK(*a[0] == 1);
  }
  SUBCASE("monotonicity: raising the threshold only changes results to none") {
    Rng rng(47);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<AxisAlignedBox> objs;
      for (int o = 0; o < 3; ++o) objs.push_back(testsup::random_box(rng));
      std::vector<ScoredGrasp> grasps;
      for (int g = 0; g < 6; ++g) {
        grasps.push_back({testsup::random_rect(rng), rng.uniform(0, 1)});
      }
      const auto low = baseline_assign(objs, grasps, 0.25);
      const auto high = baseline_assign(objs, grasps, 0.6);
      for (std::size_t o = 0; o < objs.size(); ++o) {
        if (high[o]) CHECK(low[o] == high[o]);
      }
    }
  }
}

TEST_CASE("select_execution_grasp: examples") {
  DetectionRecord det;
  det.bbox = {0, 0, 100, 100};

  SUBCASE("one candidate above 0.5") {
    det.grasps = {{OrientedRect(80, 80, 10, 5, 0), 0.6}};
    const auto g = select_execution_grasp(det);
    REQUIRE(g.has_value());
    CHECK(g->score == 0.6);
  }
  SUBCASE("all candidates at or below 0.5") {
    det.grasps = {{OrientedRect(50, 50, 10, 5, 0), 0.5},
                  {OrientedRect(50, 50, 10, 5, 0), 0.2}};
    CHECK_FALSE(select_execution_grasp(det).has_value());
  }
  SUBCASE("score gate applies before distance") {
    det.grasps = {{OrientedRect(55, 50, 10, 5, 0), 0.51},   // dist 5
                  {OrientedRect(52, 50, 10, 5, 0), 0.49}};  // dist 2 but gated out
    const auto g = select_execution_grasp(det);
    REQUIRE(g.has_value());
    CHECK(g->rect.x == 55);
  }
}
