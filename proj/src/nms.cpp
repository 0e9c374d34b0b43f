#include "roigd/nms.hpp"

#include <algorithm>
#include <numeric>

namespace roigd {

namespace {

template <typename T, typename Overlaps>
std::vector<std::size_t> greedy_keep(const std::vector<T>& candidates, Overlaps overlaps) {
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return candidates[a].score > candidates[b].score;
  });
  std::vector<std::size_t> kept;
  for (const std::size_t i : order) {
    bool suppressed = false;
    for (const std::size_t k : kept) {
      if (overlaps(candidates[i], candidates[k])) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(i);
  }
  return kept;
}

template <typename T>
std::vector<T> gather(const std::vector<T>& candidates,
                      const std::vector<std::size_t>& keep) {
  std::vector<T> out;
  out.reserve(keep.size());
  for (const std::size_t i : keep) out.push_back(candidates[i]);
  return out;
}

}  // namespace

std::vector<std::size_t> nms_grasps_keep(const std::vector<ScoredGrasp>& candidates,
                                         double iou_threshold) {
  return greedy_keep(candidates, [&](const ScoredGrasp& a, const ScoredGrasp& b) {
    return rotated_iou(a.rect, b.rect) > iou_threshold;
  });
}

std::vector<std::size_t> nms_boxes_keep(const std::vector<ScoredBox>& candidates,
                                        double iou_threshold) {
  return greedy_keep(candidates, [&](const ScoredBox& a, const ScoredBox& b) {
    return a.category == b.category && box_iou(a.box, b.box) > iou_threshold;
  });
}

std::vector<ScoredGrasp> nms_grasps(const std::vector<ScoredGrasp>& candidates,
                                    double iou_threshold) {
  return gather(candidates, nms_grasps_keep(candidates, iou_threshold));
}

std::vector<ScoredBox> nms_boxes(const std::vector<ScoredBox>& candidates,
                                 double iou_threshold) {
  return gather(candidates, nms_boxes_keep(candidates, iou_threshold));
}

}  // namespace roigd
