#ifndef UAD_ANNOTATE_DATASET_HPP
#define UAD_ANNOTATE_DATASET_HPP

#include <string>
#include <vector>

#include "uad/annotate/embeddings.hpp"
#include "uad/annotate/postprocess.hpp"
#include "uad/annotate/similarity.hpp"
#include "uad/annotate/vlm.hpp"
#include "uad/regions/overlay.hpp"

namespace uad::annotate {

/// Everything annotation needs to know about one object.
struct ObjectScene {
  std::string object_id;
  std::string category;
  std::vector<geom::CameraView> views;
  std::vector<double> view_scores;         // empty -> view 0 is canonical
  std::vector<std::string> image_refs;     // per view
  std::vector<std::string> feature_refs;   // per view
  geom::PointCloud cloud;
  fusion::FeatureField field;
  regions::RegionLabeling labeling;
};

/// Dataset unit: one view, one instruction, one affordance map.
struct AffordanceTriplet {
  std::string object_id;
  int view = 0;
  std::string image_ref;
  std::string feature_ref;
  std::string instruction;
  int region = 0;
  Vec embedding;
  Map map;      // postprocessed target
  Map raw_map;  // before threshold + blur
  bool occluded = false;  // no pixel of this view belongs to the region
};

struct DatasetConfig {
  PostprocessConfig post;
  RetryPolicy retry;
  std::string prompt = kDefaultPrompt;
};

/// Builds the proposal request for an object from its canonical view.
inline VlmRequest make_request(const ObjectScene& scene, const geom::SpatialIndex& index,
                               const std::string& prompt, std::size_t* canonical = nullptr) {
  const std::size_t v = scene.view_scores.empty() ? 0 : select_canonical_view(scene.view_scores);
  if (canonical) *canonical = v;
  const auto& view = scene.views.at(v);
  const auto overlay = regions::render_region_overlay(scene.labeling, view, index);
  VlmRequest req;
  req.category = scene.category;
  req.image_png = io::encode_png(view.rgb.empty() ? Rgb(view.height(), view.width(), 3, 128) : view.rgb);
  req.overlay_png = io::encode_png(overlay.image);
  req.region_ids = scene.labeling.region_ids();
  req.prompt = prompt;
  return req;
}

/// Runs proposal, similarity and projection for every object and fans each
/// accepted proposal out to all of the object's views. Objects whose VLM
/// query fails after retries, and instructions without an embedding, are
/// skipped and logged.
inline std::vector<AffordanceTriplet> generate_dataset(const std::vector<ObjectScene>& scenes,
                                                       VlmClient& client,
                                                       const EmbeddingStore& embeddings,
                                                       const DatasetConfig& cfg = {},
                                                       const Logger& log = null_logger()) {
  std::vector<AffordanceTriplet> out;
  for (const auto& scene : scenes) {
    if (scene.cloud.empty() || scene.labeling.num_regions == 0) {
      log({{"event", "object_skipped"}, {"object", scene.object_id}, {"reason", "no regions"}});
      continue;
    }
    const geom::SpatialIndex index(scene.cloud.points);
    std::vector<TaskProposal> proposals;
    try {
      proposals = propose_tasks(client, make_request(scene, index, cfg.prompt), cfg.retry, log);
    } catch (const TransportError& e) {
      log({{"event", "object_skipped"}, {"object", scene.object_id}, {"reason", e.what()}});
      continue;
    }
    std::vector<LabelMap> pixel_labels;
    for (const auto& view : scene.views)
      pixel_labels.push_back(geom::label_pixels_by_nn<int>(view, index, scene.labeling.labels, 0));

    for (const auto& p : proposals) {
      const auto emb = embeddings.find(p.instruction);
      if (!emb) {
        log({{"event", "triplet_skipped"}, {"reason", "missing embedding"}, {"instruction", p.instruction}});
        continue;
      }
      const auto ref = reference_feature(scene.field, scene.labeling, p.region_label);
      if (ref.near_zero) {
        log({{"event", "triplet_skipped"}, {"reason", "near-zero reference feature"}, {"instruction", p.instruction}});
        continue;
      }
      const auto scores = similarity_scores(scene.field, ref.feature);
      for (std::size_t v = 0; v < scene.views.size(); ++v) {
        AffordanceTriplet t;
        t.object_id = scene.object_id;
        t.view = static_cast<int>(v);
        t.image_ref = v < scene.image_refs.size() ? scene.image_refs[v] : "";
        t.feature_ref = v < scene.feature_refs.size() ? scene.feature_refs[v] : "";
        t.instruction = p.instruction;
        t.region = p.region_label;
        t.embedding = *emb;
        t.raw_map = build_affordance_map(scores, scene.views[v], index);
        t.map = postprocess_map(t.raw_map, cfg.post);
        t.occluded = std::none_of(pixel_labels[v].data.begin(), pixel_labels[v].data.end(),
                                  [&](int l) { return l == p.region_label; });
        out.push_back(std::move(t));
      }
    }
    log({{"event", "object_annotated"}, {"object", scene.object_id}, {"proposals", proposals.size()}});
  }
  return out;
}

}  // namespace uad::annotate

#endif  // UAD_ANNOTATE_DATASET_HPP
