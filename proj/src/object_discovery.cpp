#include "moda/object_discovery.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "moda/resample.hpp"

namespace moda {

MaskedFeatures select_masked_features(const FeatureMap& features, const BinaryMask& instance_mask) {
  if (features.height() < 1 || features.width() < 1) throw ShapeError("empty feature map");
  const auto coverage =
      bilinear_resize(cast_grid<float>(instance_mask), features.height(), features.width());

  MaskedFeatures selected;
  selected.grid_height = features.height();
  selected.grid_width = features.width();
  for (Index r = 0; r < features.height(); ++r) {
    for (Index c = 0; c < features.width(); ++c) {
      if (coverage(r, c) >= 0.5f) selected.positions.push_back({r, c});
    }
  }
  if (selected.positions.empty()) {
    throw EmptySelection("instance mask covers no feature cell");
  }
  selected.vectors.resize(selected.count(), features.channels());
  for (Index e = 0; e < selected.count(); ++e) {
    const auto& p = selected.positions[static_cast<std::size_t>(e)];
    selected.vectors.row(e) = features.pixel(p.row, p.col).transpose();
  }
  return selected;
}

QuerySet build_queries(const MaskedFeatures& selected, Index query_grid) {
  if (query_grid < 1) throw DomainError("build_queries: query grid must be >= 1");
  QuerySet queries;
  if (selected.positions.empty()) return queries;

  Index r0 = std::numeric_limits<Index>::max(), r1 = -1;
  Index c0 = std::numeric_limits<Index>::max(), c1 = -1;
  for (const auto& p : selected.positions) {
    r0 = std::min(r0, p.row);
    r1 = std::max(r1, p.row);
    c0 = std::min(c0, p.col);
    c1 = std::max(c1, p.col);
  }
  const double g = static_cast<double>(query_grid);
  const double cell_h = static_cast<double>(r1 - r0 + 1) / g;
  const double cell_w = static_cast<double>(c1 - c0 + 1) / g;
  const double reach_h = std::max(cell_h, 0.5);
  const double reach_w = std::max(cell_w, 0.5);

  std::vector<char> taken(selected.positions.size(), 0);
  for (Index i = 0; i < query_grid; ++i) {
    const double pr = static_cast<double>(r0) - 0.5 + (static_cast<double>(i) + 0.5) * cell_h;
    for (Index j = 0; j < query_grid; ++j) {
      const double pc = static_cast<double>(c0) - 0.5 + (static_cast<double>(j) + 0.5) * cell_w;
      Index best = -1;
      double best_d2 = std::numeric_limits<double>::infinity();
      for (std::size_t e = 0; e < selected.positions.size(); ++e) {
        const double dr = static_cast<double>(selected.positions[e].row) - pr;
        const double dc = static_cast<double>(selected.positions[e].col) - pc;
        if (std::abs(dr) > reach_h || std::abs(dc) > reach_w) continue;
        const double d2 = dr * dr + dc * dc;
        if (d2 < best_d2) {
          best_d2 = d2;
          best = static_cast<Index>(e);
        }
      }
      if (best >= 0 && !taken[static_cast<std::size_t>(best)]) {
        taken[static_cast<std::size_t>(best)] = 1;
        queries.entries.push_back(best);
      }
    }
  }
  queries.vectors.resize(queries.count(), selected.vectors.cols());
  for (Index f = 0; f < queries.count(); ++f) {
    queries.vectors.row(f) = selected.vectors.row(queries.entries[static_cast<std::size_t>(f)]);
  }
  return queries;
}

ObjectnessScoreMap objectness_scores(const Eigen::MatrixXf& queries, const Eigen::MatrixXf& keys) {
  if (queries.cols() != keys.cols()) {
    throw DomainError("objectness_scores: query dim " + std::to_string(queries.cols()) +
                      " != key dim " + std::to_string(keys.cols()));
  }
  auto normalized = [](const Eigen::MatrixXf& m, const char* what) {
    Eigen::MatrixXd d = m.cast<double>();
    const Eigen::VectorXd norms = d.rowwise().norm();
    for (Index i = 0; i < norms.size(); ++i) {
      if (!(norms(i) > 0.0) || !std::isfinite(norms(i))) {
        throw DomainError(std::string("objectness_scores: zero-norm ") + what + " vector");
      }
    }
    return Eigen::MatrixXd(norms.cwiseInverse().asDiagonal() * d);
  };
  const Eigen::MatrixXd q = normalized(queries, "query");
  const Eigen::MatrixXd k = normalized(keys, "key");
  return (q * k.transpose()).cwiseMax(-1.0).cwiseMin(1.0).cast<float>();
}

std::vector<ScoredMask> masks_from_scores(const ObjectnessScoreMap& scores,
                                          const MaskedFeatures& keys, float tau) {
  if (!(tau >= 0.0f && tau <= 1.0f)) throw DomainError("masks_from_scores: tau must lie in [0, 1]");
  if (scores.cols() != keys.count()) throw ShapeError("masks_from_scores: score/key count mismatch");

  std::vector<ScoredMask> out;
  for (Index f = 0; f < scores.rows(); ++f) {
    const double lo = scores.row(f).minCoeff();
    const double hi = scores.row(f).maxCoeff();
    const double range = hi - lo;
    ScoredMask candidate{BinaryMask(keys.grid_height, keys.grid_width, 1), 0.0f, f};
    double sum = 0.0;
    Index members = 0;
    for (Index e = 0; e < scores.cols(); ++e) {
      const double norm = range > 0.0 ? (static_cast<double>(scores(f, e)) - lo) / range : 1.0;
      if (norm < tau) continue;
      const auto& p = keys.positions[static_cast<std::size_t>(e)];
      candidate.mask(p.row, p.col) = 1;
      sum += norm;
      ++members;
    }
    if (!members) continue;
    candidate.score = static_cast<float>(sum / static_cast<double>(members));
    out.push_back(std::move(candidate));
  }
  return out;
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  require_same_extent(a, b, "mask_iou");
  Index inter = 0;
  Index uni = 0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    inter += (da[i] && db[i]);
    uni += (da[i] || db[i]);
  }
  return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

std::vector<ScoredMask> rank_and_nms(std::vector<ScoredMask> candidates, float iou_threshold) {
  if (!(iou_threshold > 0.0f && iou_threshold <= 1.0f)) {
    throw DomainError("rank_and_nms: IoU threshold must lie in (0, 1]");
  }
  std::vector<Index> areas(candidates.size());
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) areas[i] = candidates[i].area();
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (candidates[a].score != candidates[b].score) return candidates[a].score > candidates[b].score;
    if (areas[a] != areas[b]) return areas[a] > areas[b];
    return candidates[a].order < candidates[b].order;
  });

  std::vector<ScoredMask> kept;
  for (auto i : order) {
    const bool overlaps = std::any_of(kept.begin(), kept.end(), [&](const ScoredMask& k) {
      return mask_iou(k.mask, candidates[i].mask) >= iou_threshold;
    });
    if (!overlaps) kept.push_back(std::move(candidates[i]));
  }
  return kept;
}

DiscoveryResult discover_objects(const FeatureMap& features, const BinaryMask& instance_mask,
                                 const DiscoveryConfig& config) {
  DiscoveryResult result;
  auto fallback = [&] {
    result.objects.clear();
    result.objects.push_back({instance_mask, 1.0f, 0});
    result.fallback = true;
    return result;
  };

  MaskedFeatures keys;
  try {
    keys = select_masked_features(features, instance_mask);
  } catch (const EmptySelection&) {
    return fallback();
  }
  const QuerySet queries = build_queries(keys, config.query_grid);
  ObjectnessScoreMap scores;
  try {
    scores = objectness_scores(queries.vectors, keys.vectors);
  } catch (const DomainError&) {
    // zero feature vectors under the mask carry no direction to compare
    return fallback();
  }
  auto kept = rank_and_nms(masks_from_scores(scores, keys, config.tau), config.iou_threshold);

  for (auto& candidate : kept) {
    BinaryMask full = nearest_resize(candidate.mask, instance_mask.height(), instance_mask.width());
    auto dst = full.data();
    const auto src = instance_mask.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = (dst[i] && src[i]) ? 1 : 0;
    if (mask_area(full) == 0) continue;
    result.objects.push_back(
        {std::move(full), candidate.score, static_cast<Index>(result.objects.size())});
  }
  if (result.objects.empty()) return fallback();
  return result;
}

}  // namespace moda
