#ifndef UAD_CLI_DISPATCH_HPP
#define UAD_CLI_DISPATCH_HPP

#include <cstdlib>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "uad/uad.hpp"
#include "uad/cli/artifacts.hpp"
#include "uad/annotate/vlm_http.hpp"

namespace uad::cli {

using nlohmann::json;
namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitPipeline = 1;
inline constexpr int kExitUsage = 2;

/// Options every subcommand takes.
struct Common {
  std::uint64_t seed = 0;
  std::string config;
  std::string out_dir = "out";
};

namespace detail {

inline void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Root seed; module seeds are derived from it")->capture_default_str();
  sub->add_option("--config", c.config, "JSON file of option defaults (keys are long option names)");
  sub->add_option("--out-dir", c.out_dir, "Output directory")->envname("UAD_OUT_DIR")->capture_default_str();
}

inline bool has_flag(const std::vector<std::string>& args, const std::string& name) {
  const std::string flag = "--" + name;
  for (const auto& a : args)
    if (a == flag || a.starts_with(flag + "=")) return true;
  return false;
}

inline std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  return v.dump();
}

}  // namespace detail

/// Appends the keys of a --config JSON object as command-line options unless
/// the option is already on the command line. Environment variables take
/// precedence over the file for the options they cover.
inline std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].starts_with("--config=")) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  json cfg;
  try {
    cfg = json::parse(io::read_text(path));
  } catch (const json::exception& e) {
    throw Error("config", "cannot parse " + path + ": " + e.what());
  }
  if (!cfg.is_object()) throw Error("config", "config file must hold a JSON object");
  const std::map<std::string, const char*> env{{"out-dir", "UAD_OUT_DIR"}, {"vlm-endpoint", "UAD_VLM_ENDPOINT"}};
  const std::vector<std::string> given = args;
  for (const auto& [key, value] : cfg.items()) {
    if (key == "config" || detail::has_flag(given, key)) continue;
    if (auto it = env.find(key); it != env.end() && std::getenv(it->second)) continue;
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_array()) {
      for (const auto& v : value) {
        args.push_back(flag);
        args.push_back(detail::scalar_text(v));
      }
    } else if (!value.is_null()) {
      args.push_back(flag);
      args.push_back(detail::scalar_text(value));
    }
  }
  return args;
}

namespace detail {

struct Io {
  std::ostream& out;
  Logger log;
};

inline fs::path absolute(const std::string& p) { return fs::weakly_canonical(fs::absolute(p)); }

inline std::string tag2(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", i);
  return buf;
}

inline FusedScene load_regions(const std::string& path) {
  FusedScene s = load_fused(path);
  if (s.labeling.num_regions == 0) throw Error("cli", path + " holds no region labels; run `cluster` first");
  return s;
}

inline annotate::ObjectScene object_scene(const FusedScene& fs_, const io::SceneManifest& m) {
  annotate::ObjectScene s;
  s.object_id = m.object_id;
  s.category = m.category;
  s.views = m.load_views();
  s.view_scores = m.scores();
  for (const auto& v : m.views) {
    s.image_refs.push_back(v.rgb.empty() ? "" : m.path_of(v.rgb).string());
    s.feature_refs.push_back(v.features.empty() ? "" : m.path_of(v.features).string());
  }
  s.cloud = fs_.cloud;
  s.field = fs_.field;
  s.labeling = fs_.labeling;
  return s;
}

// ---------------------------------------------------------------------------

struct SynthOpts {
  std::string preset;
  int views = 14;
  int size = 64;
  int feature_dim = 16;
  int embed_dim = 32;
  double noise = 0.05;
  std::string object_id;
};

inline int cmd_synth(const Common& c, const SynthOpts& o, Io& io) {
  auto spec = synth::preset(o.preset, c.seed);
  if (!spec) throw Error("cli", "unknown preset '" + o.preset + "' (mug, cabinet, bottle, hammer, pan)");
  spec->cameras.count = o.views;
  spec->width = spec->height = o.size;
  spec->feature_dim = o.feature_dim;
  spec->embed_dim = o.embed_dim;
  spec->noise = o.noise;
  if (!o.object_id.empty()) spec->object_id = o.object_id;
  io.log({{"event", "synth_start"}, {"preset", o.preset}, {"views", o.views}});
  const auto scene = synth::generate(*spec);
  const auto path = synth::write_scene(scene, c.out_dir);
  io.log({{"event", "synth_done"}, {"scene", path.string()}});
  io.out << json{{"scene", path.string()}}.dump() << '\n';
  return kExitOk;
}

struct FuseOpts {
  std::string scene;
  std::size_t points = 2000;
  double tolerance = 0.005;
};

inline int cmd_fuse(const Common& c, const FuseOpts& o, Io& io) {
  const auto m = io::SceneManifest::load(o.scene);
  const auto views = m.load_views();
  const auto feats = m.load_features();
  io.log({{"event", "fuse_start"}, {"object", m.object_id}, {"views", views.size()}});
  FusedScene s;
  s.cloud = geom::downsample(geom::aggregate_scene(views), o.points);
  s.field = fusion::fuse_features(s.cloud, views, feats, {o.tolerance});
  s.header = {{"object_id", m.object_id},
              {"category", m.category},
              {"scene", absolute(o.scene).string()},
              {"tolerance", o.tolerance},
              {"target_points", o.points}};
  const fs::path out = fs::path(c.out_dir) / "fused.uadc";
  save_fused(out, s);
  io.log({{"event", "fuse_done"}, {"points", s.cloud.size()}, {"visible", s.field.valid_count()}, {"path", out.string()}});
  io.out << json{{"fused", out.string()}, {"points", s.cloud.size()}}.dump() << '\n';
  return kExitOk;
}

struct ClusterOpts {
  std::string fused;
  double quantile = 0.25;
  double min_bin_fraction = 0.01;
  int min_clusters = 5;
};

inline int cmd_cluster(const Common& c, const ClusterOpts& o, Io& io) {
  FusedScene s = load_fused(o.fused);
  regions::RegionConfig cfg;
  cfg.bandwidth_quantile = o.quantile;
  cfg.min_bin_fraction = o.min_bin_fraction;
  cfg.min_clusters = o.min_clusters;
  cfg.seed = derive_seed(c.seed, "cluster");
  s.labeling = regions::propose_regions(s.field, s.cloud, cfg);
  if (s.labeling.num_regions == 0) throw Error("cli", "no visible points to cluster");
  const fs::path dir = c.out_dir;
  save_fused(dir / "regions.uadc", s);

  const auto m = io::SceneManifest::load(s.header.at("scene").get<std::string>());
  const auto views = m.load_views();
  const auto scores = m.scores();
  const std::size_t canonical = scores.empty() ? 0 : annotate::select_canonical_view(scores);
  const geom::SpatialIndex index(s.cloud.points);
  const auto overlay = regions::render_region_overlay(s.labeling, views.at(canonical), index);
  io::write_png(dir / "overlay.png", overlay.image);
  json legend = json::array();
  for (const auto& e : overlay.legend)
    legend.push_back({{"region", e.label}, {"color", e.color}, {"points", e.point_count}});
  io::atomic_write(dir / "legend.json",
                   json{{"object_id", m.object_id}, {"view", canonical}, {"regions", legend}}.dump(2));
  const auto& l = s.labeling;
  io.log({{"event", "cluster_done"}, {"regions", l.num_regions}, {"per_link", l.per_link_path},
          {"fallback", l.used_fallback}, {"mean_shift_clusters", l.mean_shift_clusters}});
  io.out << json{{"regions", (dir / "regions.uadc").string()}, {"num_regions", l.num_regions}}.dump() << '\n';
  return kExitOk;
}

struct AnnotateOpts {
  std::vector<std::string> regions;
  std::vector<std::string> mock_fixtures;
  std::string vlm_endpoint;
  std::vector<std::string> embeddings;
  std::string prompt_file;
  double threshold = 0.5;
  double sigma = 0.8;
  int retries = 3;
  int retry_delay_ms = 200;
};

inline int cmd_annotate(const Common& c, const AnnotateOpts& o, Io& io) {
  std::vector<annotate::ObjectScene> scenes;
  std::vector<io::SceneManifest> manifests;
  annotate::EmbeddingStore store;
  for (const auto& path : o.regions) {
    const FusedScene fsn = load_regions(path);
    manifests.push_back(io::SceneManifest::load(fsn.header.at("scene").get<std::string>()));
    scenes.push_back(object_scene(fsn, manifests.back()));
  }
  if (o.embeddings.empty()) {
    for (const auto& m : manifests)
      if (!m.embeddings.empty()) store.merge(annotate::EmbeddingStore::load(m.path_of(m.embeddings)));
  } else {
    for (const auto& p : o.embeddings) store.merge(annotate::EmbeddingStore::load(p));
  }

  std::unique_ptr<annotate::VlmClient> client;
  if (!o.vlm_endpoint.empty()) {
    client = std::make_unique<annotate::HttpVlmClient>(o.vlm_endpoint);
    io.log({{"event", "vlm"}, {"endpoint", o.vlm_endpoint}});
  } else {
    auto mock = std::make_unique<annotate::MockVlm>();
    std::vector<fs::path> fixtures(o.mock_fixtures.begin(), o.mock_fixtures.end());
    if (fixtures.empty())
      for (const auto& m : manifests)
        if (!m.mock_fixture.empty()) fixtures.push_back(m.path_of(m.mock_fixture));
    if (fixtures.empty()) throw Error("cli", "no VLM configured: pass --vlm-endpoint or --mock-fixture");
    for (const auto& f : fixtures) mock->add_fixture(f);
    client = std::move(mock);
    io.log({{"event", "vlm"}, {"mock_fixtures", fixtures.size()}});
  }

  annotate::DatasetConfig cfg;
  cfg.post.threshold = o.threshold;
  cfg.post.sigma = o.sigma;
  cfg.retry.attempts = o.retries;
  cfg.retry.base_delay = std::chrono::milliseconds(o.retry_delay_ms);
  if (!o.prompt_file.empty()) cfg.prompt = io::read_text(o.prompt_file);
  const auto triplets = annotate::generate_dataset(scenes, *client, store, cfg, io.log);
  if (triplets.empty()) throw Error("annotate", "no triplets produced; see the skipped-object events");

  const fs::path dir = c.out_dir;
  const fs::path dataset_path = dir / "dataset.json";
  io::FileLock lock(dataset_path);
  Dataset ds;
  if (fs::exists(dataset_path)) ds = Dataset::load(dataset_path);
  ds.base = dir;
  std::set<std::string> objects;
  for (const auto& s : scenes) objects.insert(s.object_id);
  std::erase_if(ds.triplets, [&](const TripletRecord& r) { return objects.count(r.object_id) > 0; });

  annotate::EmbeddingStore used;
  const fs::path store_path = dir / ds.embeddings;
  if (fs::exists(store_path)) used = annotate::EmbeddingStore::load(store_path);
  std::map<std::pair<std::string, std::string>, int> instruction_index;
  for (const auto& t : triplets) {
    const auto key = std::make_pair(t.object_id, t.instruction);
    if (!instruction_index.count(key)) {
      int next = 0;
      for (const auto& [k, v] : instruction_index) next += k.first == t.object_id ? 1 : 0;
      instruction_index[key] = next;
    }
    std::size_t si = 0;
    while (scenes[si].object_id != t.object_id) ++si;
    TripletRecord r;
    r.object_id = t.object_id;
    r.scene = manifests[si].base.empty() ? "" : (manifests[si].base / "scene.json").string();
    r.view = t.view;
    r.image = t.image_ref;
    r.features = t.feature_ref;
    r.instruction = t.instruction;
    r.region = t.region;
    r.occluded = t.occluded;
    r.map = "maps/" + t.object_id + "_i" + tag2(instruction_index[key]) + "_v" + tag2(t.view) + ".uadt";
    io::write_tensor(dir / r.map, io::grid_tensor(t.map, io::DType::F64));
    used.put(t.instruction, t.embedding);
    ds.triplets.push_back(std::move(r));
  }
  used.save(store_path);
  ds.save(dataset_path);
  io.log({{"event", "annotate_done"}, {"triplets", triplets.size()}, {"dataset", dataset_path.string()}});
  io.out << json{{"dataset", dataset_path.string()}, {"triplets", triplets.size()}}.dump() << '\n';
  return kExitOk;
}

struct DistillOpts {
  std::string dataset;
  int epochs = 30;
  int batch = 8;
  double lr = 0.001;
  std::vector<int> exclude_views;
  std::string film_init = "identity";
  std::vector<int> plan = decoder::kLayerPlan;
  std::string init_checkpoint;
  bool print_config = false;
  bool epoch_checkpoints = true;
};

inline int cmd_distill(const Common& c, const DistillOpts& o, Io& io) {
  decoder::TrainConfig cfg;
  cfg.epochs = o.epochs;
  cfg.batch = o.batch;
  cfg.lr = o.lr;
  cfg.seed = derive_seed(c.seed, "distill");
  cfg.plan = o.plan;
  if (o.film_init == "identity") cfg.init = decoder::FilmInit::kIdentity;
  else if (o.film_init == "literal-ones") cfg.init = decoder::FilmInit::kLiteralOnes;
  else throw Error("cli", "--film-init must be identity or literal-ones");
  const json echo{{"epochs", cfg.epochs}, {"batch", cfg.batch},           {"lr", cfg.lr},
                  {"seed", c.seed},       {"film_init", o.film_init},     {"plan", cfg.plan},
                  {"exclude_views", o.exclude_views}, {"dataset", o.dataset}};
  io.log({{"event", "config"}, {"config", echo}});
  if (o.print_config) {
    io.out << echo.dump() << '\n';
    return kExitOk;
  }
  if (o.dataset.empty()) throw Error("cli", "distill needs --dataset");

  const Dataset ds = Dataset::load(o.dataset);
  const auto store = annotate::EmbeddingStore::load(ds.path_of(ds.embeddings));
  const std::set<int> excluded(o.exclude_views.begin(), o.exclude_views.end());
  std::map<std::string, std::shared_ptr<const RowMatrix>> features;
  std::vector<decoder::TrainItem> items;
  for (const auto& t : ds.triplets) {
    if (excluded.count(t.view)) continue;
    auto& f = features[t.features];
    if (!f) f = std::make_shared<RowMatrix>(decoder::pixels_as_rows(io::tensor_grid<float>(io::read_tensor(ds.path_of(t.features)))));
    const auto emb = store.find(t.instruction);
    if (!emb) throw Error("cli", "no embedding for instruction '" + t.instruction + "'");
    const Map target = io::tensor_grid<double>(io::read_tensor(ds.path_of(t.map)));
    if (static_cast<Eigen::Index>(target.pixels()) != f->rows()) throw Error("cli", "map/feature size mismatch for " + t.map);
    items.push_back({f, *emb, target.data});
  }
  io.log({{"event", "distill_start"}, {"items", items.size()}, {"images", features.size()}});

  const fs::path dir = c.out_dir;
  io::atomic_write(dir / "config.json", echo.dump(2));
  std::optional<decoder::FilmDecoder> init;
  if (!o.init_checkpoint.empty()) init = decoder::load_checkpoint(o.init_checkpoint).decoder;
  const auto on_epoch = [&](int epoch, const decoder::FilmDecoder& d) {
    if (o.epoch_checkpoints)
      decoder::save_checkpoint(dir / "checkpoints" / ("epoch_" + tag2(epoch) + ".uadc"), d,
                               {{"epoch", epoch}, {"seed", c.seed}});
  };
  const auto result = decoder::train(items, cfg, init ? &*init : nullptr, io.log, on_epoch);
  decoder::save_checkpoint(dir / "checkpoint.uadc", result.decoder,
                           {{"epoch", cfg.epochs}, {"seed", c.seed}, {"config", echo}});
  io::atomic_write(dir / "loss.json", json{{"epoch_loss", result.epoch_loss}}.dump(2));
  io.out << json{{"checkpoint", (dir / "checkpoint.uadc").string()},
                 {"final_loss", result.epoch_loss.empty() ? 0.0 : result.epoch_loss.back()}}
                .dump()
         << '\n';
  return kExitOk;
}

struct PredictOpts {
  std::string checkpoint;
  std::string features;
  std::string instruction;
  std::string embeddings;
  std::string name = "prediction";
  std::string dataset;
  std::vector<int> views;
  std::string ground_truth = "auto";  // auto | analytic | pseudo
};

inline int cmd_predict(const Common& c, const PredictOpts& o, Io& io) {
  const auto ck = decoder::load_checkpoint(o.checkpoint);
  const fs::path dir = c.out_dir;
  if (o.dataset.empty()) {
    if (o.features.empty() || o.instruction.empty() || o.embeddings.empty())
      throw Error("cli", "predict needs --features, --instruction and --embeddings (or --dataset)");
    const auto store = annotate::EmbeddingStore::load(o.embeddings);
    const auto emb = store.find(o.instruction);
    if (!emb) throw Error("cli", "no embedding for instruction '" + o.instruction + "'");
    const auto feats = io::tensor_grid<float>(io::read_tensor(o.features));
    const Map pred = decoder::predict(ck.decoder, feats, *emb);
    io::write_tensor(dir / (o.name + ".uadt"), io::grid_tensor(pred, io::DType::F64));
    io::write_png(dir / (o.name + ".png"), io::render_heatmap(pred));
    io.out << json{{"prediction", (dir / (o.name + ".uadt")).string()}}.dump() << '\n';
    return kExitOk;
  }
  if (o.ground_truth != "auto" && o.ground_truth != "analytic" && o.ground_truth != "pseudo")
    throw Error("cli", "--ground-truth must be auto, analytic or pseudo");

  const Dataset ds = Dataset::load(o.dataset);
  const auto store = annotate::EmbeddingStore::load(ds.path_of(ds.embeddings));
  const std::set<int> wanted(o.views.begin(), o.views.end());
  std::map<std::string, io::SceneManifest> manifests;
  json records = json::array();
  for (const auto& t : ds.triplets) {
    if (!wanted.empty() && !wanted.count(t.view)) continue;
    const auto emb = store.find(t.instruction);
    if (!emb) throw Error("cli", "no embedding for instruction '" + t.instruction + "'");
    const auto feats = io::tensor_grid<float>(io::read_tensor(ds.path_of(t.features)));
    const Map pred = decoder::predict(ck.decoder, feats, *emb);
    const std::string stem = fs::path(t.map).stem().string();
    const std::string pred_rel = "predictions/" + stem + ".uadt";
    io::write_tensor(dir / pred_rel, io::grid_tensor(pred, io::DType::F64));

    std::string gt_rel;
    std::string gt_kind = "pseudo";
    if (o.ground_truth != "pseudo" && !t.scene.empty()) {
      auto it = manifests.find(t.scene);
      if (it == manifests.end()) it = manifests.emplace(t.scene, io::SceneManifest::load(t.scene)).first;
      if (auto mask = ground_truth_mask(it->second, t.instruction, t.view)) {
        gt_rel = "ground_truth/" + stem + ".uadt";
        io::write_tensor(dir / gt_rel, io::grid_tensor(*mask, io::DType::F64));
        gt_kind = "analytic";
      }
    }
    if (gt_rel.empty()) {
      if (o.ground_truth == "analytic") throw Error("cli", "no analytic ground truth for " + t.map);
      gt_rel = "ground_truth/" + stem + ".uadt";
      io::write_tensor(dir / gt_rel, io::read_tensor(ds.path_of(t.map)));
    }
    records.push_back({{"id", t.object_id + "/v" + tag2(t.view) + "/" + t.instruction},
                       {"prediction", pred_rel},
                       {"ground_truth", gt_rel},
                       {"ground_truth_kind", gt_kind},
                       {"instruction", t.instruction}});
  }
  io::atomic_write(dir / "records.json", json{{"records", records}}.dump(2));
  io.log({{"event", "predict_done"}, {"records", records.size()}});
  io.out << json{{"records", (dir / "records.json").string()}, {"count", records.size()}}.dump() << '\n';
  return kExitOk;
}

struct EvalOpts {
  std::string records;
  double epsilon = 1e-6;
  double nss_threshold = 0.1;
};

inline int cmd_eval(const Common& c, const EvalOpts& o, Io& io) {
  const json j = json::parse(io::read_text(o.records));
  const fs::path base = fs::path(o.records).parent_path();
  std::vector<metrics::EvalRecord> recs;
  for (const auto& r : j.at("records")) {
    metrics::EvalRecord e;
    e.id = r.value("id", std::to_string(recs.size()));
    e.prediction = io::tensor_grid<double>(io::read_tensor(io::resolve(base, r.at("prediction").get<std::string>())));
    e.ground_truth = io::tensor_grid<double>(io::read_tensor(io::resolve(base, r.at("ground_truth").get<std::string>())));
    e.instruction = r.value("instruction", "");
    e.action = r.value("action", "");
    e.object = r.value("object", "");
    recs.push_back(std::move(e));
  }
  metrics::EvalConfig cfg;
  cfg.epsilon = o.epsilon;
  cfg.nss_threshold = o.nss_threshold;
  const auto report = metrics::evaluate_set(recs, cfg);
  const fs::path dir = c.out_dir;
  io::atomic_write(dir / "report.json", report.to_json().dump(2));
  io::atomic_write(dir / "report.csv", report.to_csv());
  json means = report.to_json().at("means");
  io.log({{"event", "eval_done"}, {"records", recs.size()}, {"means", means}});
  io.out << json{{"report", (dir / "report.json").string()}, {"means", means}}.dump() << '\n';
  return kExitOk;
}

struct PackOpts {
  std::string scene;
  std::vector<std::string> maps;
  std::vector<double> bounds{-1, -1, -1, 1, 1, 1};
  std::vector<double> proprio;
  double crop = 1.0;
};

inline int cmd_pack(const Common& c, const PackOpts& o, Io& io) {
  const auto m = io::SceneManifest::load(o.scene);
  const auto views = m.load_views();
  if (o.bounds.size() != 6) throw Error("cli", "--bounds takes 6 numbers: xmin ymin zmin xmax ymax zmax");
  if (!o.maps.empty() && o.maps.size() != views.size())
    throw Error("cli", "--maps needs one affordance map per view (" + std::to_string(views.size()) + ")");
  std::vector<Map> maps;
  for (std::size_t v = 0; v < views.size(); ++v)
    maps.push_back(o.maps.empty() ? Map(views[v].height(), views[v].width())
                                  : io::tensor_grid<double>(io::read_tensor(o.maps[v])));
  io::WorkspaceBounds b;
  b.min = Eigen::Vector3d(o.bounds[0], o.bounds[1], o.bounds[2]);
  b.max = Eigen::Vector3d(o.bounds[3], o.bounds[4], o.bounds[5]);
  const Vec proprio = Eigen::Map<const Vec>(o.proprio.data(), static_cast<Eigen::Index>(o.proprio.size()));
  auto pack = io::pack_observation(views, maps, b, proprio);
  std::vector<io::CropWindow> windows;
  if (o.crop < 1.0) pack = io::random_crop_augment(pack, o.crop, derive_seed(c.seed, "pack-obs/crop"), &windows);
  io::Container out;
  out.header = {{"kind", "observation"}, {"channels", io::kChannelNames}, {"bounds", o.bounds}, {"crop", o.crop}};
  json wj = json::array();
  for (const auto& w : windows) wj.push_back({w.row, w.col, w.height, w.width});
  out.header["crop_windows"] = wj;
  for (std::size_t v = 0; v < pack.views.size(); ++v)
    out.put("view_" + tag2(static_cast<int>(v)), io::grid_tensor(pack.views[v], io::DType::F64));
  out.put("proprio", io::Tensor::from<double>(o.proprio, {o.proprio.size()}, io::DType::F64));
  const fs::path path = fs::path(c.out_dir) / "obs.uadc";
  io::write_container(path, out);
  io.out << json{{"observation", path.string()}, {"views", pack.views.size()}}.dump() << '\n';
  return kExitOk;
}

struct MockServeOpts {
  std::vector<std::string> fixtures;
  std::string host = "127.0.0.1";
  int port = 0;
  int max_requests = 0;
};

inline int cmd_mock_vlm(const Common&, const MockServeOpts& o, Io& io) {
  annotate::MockVlm mock;
  for (const auto& f : o.fixtures) mock.add_fixture(fs::path(f));
  httplib::Server server;
  annotate::mount_vlm_service(server, mock);
  if (o.max_requests > 0)
    server.set_post_routing_handler([&](const httplib::Request&, httplib::Response&) {
      if (mock.calls() >= o.max_requests) server.stop();
    });
  const int port = o.port > 0 ? (server.bind_to_port(o.host, o.port) ? o.port : -1) : server.bind_to_any_port(o.host);
  if (port <= 0) throw Error("cli", "cannot bind " + o.host);
  io.log({{"event", "listening"}, {"host", o.host}, {"port", port}});
  io.out << json{{"port", port}}.dump() << std::endl;
  server.listen_after_bind();
  return kExitOk;
}

}  // namespace detail

/// Runs the `uad` command line. Progress goes to `err` as JSON lines; each
/// subcommand prints one JSON summary line to `out`.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Unsupervised affordance annotation and distillation pipeline", "uad"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  Common common;
  detail::SynthOpts synth_o;
  detail::FuseOpts fuse_o;
  detail::ClusterOpts cluster_o;
  detail::AnnotateOpts annotate_o;
  detail::DistillOpts distill_o;
  detail::PredictOpts predict_o;
  detail::EvalOpts eval_o;
  detail::PackOpts pack_o;
  detail::MockServeOpts mock_o;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene with ground truth");
  synth->add_option("--preset", synth_o.preset, "mug | cabinet | bottle | hammer | pan")->required();
  synth->add_option("--views", synth_o.views)->capture_default_str();
  synth->add_option("--size", synth_o.size, "Image width and height")->capture_default_str();
  synth->add_option("--feature-dim", synth_o.feature_dim)->capture_default_str();
  synth->add_option("--embed-dim", synth_o.embed_dim)->capture_default_str();
  synth->add_option("--noise", synth_o.noise, "Per-component noise σ relative to the signature norm")->capture_default_str();
  synth->add_option("--object-id", synth_o.object_id);

  auto* fuse = app.add_subcommand("fuse", "Fuse per-view features onto the object point cloud");
  fuse->add_option("--scene", fuse_o.scene, "Scene manifest")->required()->check(CLI::ExistingFile);
  fuse->add_option("--points", fuse_o.points, "Target point count after downsampling")->capture_default_str();
  fuse->add_option("--tolerance", fuse_o.tolerance, "Visibility depth tolerance in meters")->capture_default_str();

  auto* cluster = app.add_subcommand("cluster", "Propose candidate regions");
  cluster->add_option("--fused", cluster_o.fused, "fused.uadc from `fuse`")->required()->check(CLI::ExistingFile);
  cluster->add_option("--bandwidth-quantile", cluster_o.quantile)->capture_default_str();
  cluster->add_option("--min-bin-fraction", cluster_o.min_bin_fraction)->capture_default_str();
  cluster->add_option("--min-clusters", cluster_o.min_clusters)->capture_default_str();

  auto* annot = app.add_subcommand("annotate", "Query the VLM and build affordance triplets");
  annot->add_option("--regions", annotate_o.regions, "regions.uadc files from `cluster`")->required()->check(CLI::ExistingFile);
  annot->add_option("--mock-fixture", annotate_o.mock_fixtures, "Mock VLM fixture JSON (repeatable)")->check(CLI::ExistingFile);
  annot->add_option("--vlm-endpoint", annotate_o.vlm_endpoint, "http://host:port of a VLM service")->envname("UAD_VLM_ENDPOINT");
  annot->add_option("--embeddings", annotate_o.embeddings, "Embedding stores (default: from the scene manifests)");
  annot->add_option("--prompt-file", annotate_o.prompt_file)->check(CLI::ExistingFile);
  annot->add_option("--threshold", annotate_o.threshold)->capture_default_str();
  annot->add_option("--sigma", annotate_o.sigma)->capture_default_str();
  annot->add_option("--retries", annotate_o.retries)->capture_default_str();
  annot->add_option("--retry-delay-ms", annotate_o.retry_delay_ms)->capture_default_str();

  auto* distill = app.add_subcommand("distill", "Train the task-conditioned decoder");
  distill->add_option("--dataset", distill_o.dataset, "dataset.json from `annotate`");
  distill->add_option("--epochs", distill_o.epochs)->capture_default_str();
  distill->add_option("--batch", distill_o.batch)->capture_default_str();
  distill->add_option("--lr", distill_o.lr)->capture_default_str();
  distill->add_option("--exclude-views", distill_o.exclude_views, "Held-out view indices")->delimiter(',');
  distill->add_option("--film-init", distill_o.film_init, "identity | literal-ones")->capture_default_str();
  distill->add_option("--plan", distill_o.plan, "Layer output widths")->delimiter(',');
  distill->add_option("--init-checkpoint", distill_o.init_checkpoint)->check(CLI::ExistingFile);
  distill->add_flag("--print-config", distill_o.print_config, "Print the resolved configuration and exit");
  distill->add_flag("!--no-epoch-checkpoints", distill_o.epoch_checkpoints, "Only write the final checkpoint");

  auto* predict = app.add_subcommand("predict", "Predict affordance maps with a trained decoder");
  predict->add_option("--checkpoint", predict_o.checkpoint)->required()->check(CLI::ExistingFile);
  predict->add_option("--features", predict_o.features, "H×W×d feature tensor")->check(CLI::ExistingFile);
  predict->add_option("--instruction", predict_o.instruction);
  predict->add_option("--embeddings", predict_o.embeddings)->check(CLI::ExistingFile);
  predict->add_option("--name", predict_o.name)->capture_default_str();
  predict->add_option("--dataset", predict_o.dataset, "Predict every triplet of a dataset")->check(CLI::ExistingFile);
  predict->add_option("--views", predict_o.views, "Restrict dataset mode to these views")->delimiter(',');
  predict->add_option("--ground-truth", predict_o.ground_truth, "auto | analytic | pseudo")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  eval->add_option("--records", eval_o.records, "records.json")->required()->check(CLI::ExistingFile);
  eval->add_option("--epsilon", eval_o.epsilon)->capture_default_str();
  eval->add_option("--nss-threshold", eval_o.nss_threshold)->capture_default_str();

  auto* pack = app.add_subcommand("pack-obs", "Pack affordance maps into a policy observation");
  pack->add_option("--scene", pack_o.scene)->required()->check(CLI::ExistingFile);
  pack->add_option("--maps", pack_o.maps, "One affordance tensor per view")->delimiter(',');
  pack->add_option("--bounds", pack_o.bounds, "xmin,ymin,zmin,xmax,ymax,zmax")->delimiter(',');
  pack->add_option("--proprio", pack_o.proprio)->delimiter(',');
  pack->add_option("--crop", pack_o.crop, "Random crop fraction, 1 = none")->capture_default_str();

  auto* mock = app.add_subcommand("mock-vlm", "Serve mock VLM fixtures over HTTP");
  mock->add_option("--fixture", mock_o.fixtures)->required()->check(CLI::ExistingFile);
  mock->add_option("--host", mock_o.host)->capture_default_str();
  mock->add_option("--port", mock_o.port, "0 picks a free port")->capture_default_str();
  mock->add_option("--max-requests", mock_o.max_requests, "Stop after this many requests (0 = never)");

  for (auto* sub : app.get_subcommands({})) detail::add_common(sub, common);

  detail::Io io{out, [&err](const json& j) { err << j.dump() << '\n'; }};
  try {
    args = expand_config(std::move(args));
  } catch (const std::exception& e) {
    err << json{{"event", "error"}, {"kind", "config"}, {"message", e.what()}}.dump() << '\n';
    return kExitUsage;
  }
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n' << app.help();
    return kExitUsage;
  }

  try {
    if (*synth) return detail::cmd_synth(common, synth_o, io);
    if (*fuse) return detail::cmd_fuse(common, fuse_o, io);
    if (*cluster) return detail::cmd_cluster(common, cluster_o, io);
    if (*annot) return detail::cmd_annotate(common, annotate_o, io);
    if (*distill) return detail::cmd_distill(common, distill_o, io);
    if (*predict) return detail::cmd_predict(common, predict_o, io);
    if (*eval) return detail::cmd_eval(common, eval_o, io);
    if (*pack) return detail::cmd_pack(common, pack_o, io);
    if (*mock) return detail::cmd_mock_vlm(common, mock_o, io);
  } catch (const Error& e) {
    err << json{{"event", "error"}, {"kind", e.kind()}, {"message", e.what()}}.dump() << '\n';
    return kExitPipeline;
  } catch (const std::exception& e) {
    err << json{{"event", "error"}, {"kind", "internal"}, {"message", e.what()}}.dump() << '\n';
    return kExitPipeline;
  }
  return kExitUsage;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace uad::cli

#endif  // UAD_CLI_DISPATCH_HPP
