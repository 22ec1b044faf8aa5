#ifndef UAD_ANNOTATE_VLM_HPP
#define UAD_ANNOTATE_VLM_HPP

#include <chrono>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "uad/core/log.hpp"
#include "uad/io/base64.hpp"
#include "uad/io/png.hpp"
#include "uad/io/tensor_file.hpp"
#include "uad/regions/overlay.hpp"

namespace uad::annotate {

using nlohmann::json;

/// Default instruction text sent along with each proposal request.
inline constexpr const char* kDefaultPrompt =
    "You are shown two images of the same object: the original rendering and a copy in which "
    "candidate regions are painted in distinct colours, each colour marking one region id.\n"
    "1. List everyday tasks a person or robot could perform with this object.\n"
    "2. For every task, name the single coloured region that must be touched or used to perform "
    "it, and phrase the task as a short imperative sentence naming the part.\n"
    "Only use region ids that appear in the request. Answer as JSON: "
    "{\"proposals\": [{\"instruction\": <string>, \"region_id\": <int>}]}.\n"
    "Example: {\"instruction\": \"lift the kettle by its handle\", "
    "\"region_id\": 3}";

/// One instruction tied to one candidate region.
struct TaskProposal {
  std::string instruction;
  int region_label = 0;
  std::string object_category;
};

struct VlmRequest {
  std::string category;
  std::vector<std::uint8_t> image_png;
  std::vector<std::uint8_t> overlay_png;
  std::vector<int> region_ids;
  std::string prompt;

  [[nodiscard]] json to_json() const {
    json j{{"category", category},
           {"image_png_b64", io::base64_encode(image_png)},
           {"overlay_png_b64", io::base64_encode(overlay_png)},
           {"region_ids", region_ids}};
    if (!prompt.empty()) j["prompt"] = prompt;
    return j;
  }
  static VlmRequest from_json(const json& j) {
    VlmRequest r;
    r.category = j.at("category").get<std::string>();
    r.image_png = io::base64_decode(j.at("image_png_b64").get<std::string>());
    r.overlay_png = io::base64_decode(j.at("overlay_png_b64").get<std::string>());
    r.region_ids = j.at("region_ids").get<std::vector<int>>();
    r.prompt = j.value("prompt", "");
    return r;
  }
};

struct VlmResponse {
  struct Item {
    std::string instruction;
    int region_id = 0;
  };
  std::vector<Item> proposals;

  [[nodiscard]] json to_json() const {
    json arr = json::array();
    for (const auto& p : proposals) arr.push_back({{"instruction", p.instruction}, {"region_id", p.region_id}});
    return {{"proposals", arr}};
  }
  static VlmResponse from_json(const json& j) {
    VlmResponse r;
    for (const auto& p : j.at("proposals"))
      r.proposals.push_back({p.at("instruction").get<std::string>(), p.at("region_id").get<int>()});
    return r;
  }
};

/// Network or protocol failure talking to a VLM endpoint. Retriable.
class TransportError : public Error {
 public:
  explicit TransportError(const std::string& what) : Error("vlm_transport", what) {}
};

class VlmClient {
 public:
  virtual ~VlmClient() = default;
  virtual VlmResponse send(const VlmRequest& request) = 0;
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds base_delay{200};  // doubles per retry
};

/// Sends the request with bounded retries and validates the answer: proposals
/// naming a region outside the request, with an empty instruction, or repeating
/// an earlier instruction are dropped and logged.
inline std::vector<TaskProposal> propose_tasks(VlmClient& client, const VlmRequest& request,
                                               const RetryPolicy& retry = {},
                                               const Logger& log = null_logger()) {
  VlmResponse response;
  for (int attempt = 1;; ++attempt) {
    try {
      response = client.send(request);
      break;
    } catch (const TransportError& e) {
      log({{"event", "vlm_retry"}, {"attempt", attempt}, {"error", e.what()}});
      if (attempt >= retry.attempts) throw;
      std::this_thread::sleep_for(retry.base_delay * (1 << (attempt - 1)));
    }
  }
  const std::set<int> allowed(request.region_ids.begin(), request.region_ids.end());
  std::set<std::string> seen;
  std::vector<TaskProposal> out;
  for (const auto& p : response.proposals) {
    if (!allowed.count(p.region_id)) {
      log({{"event", "proposal_dropped"}, {"reason", "unknown region"}, {"region_id", p.region_id},
           {"instruction", p.instruction}});
      continue;
    }
    if (p.instruction.empty() || !seen.insert(p.instruction).second) {
      log({{"event", "proposal_dropped"}, {"reason", "empty or duplicate instruction"},
           {"instruction", p.instruction}});
      continue;
    }
    out.push_back({p.instruction, p.region_id, request.category});
  }
  if (out.empty()) log({{"event", "no_proposals"}, {"category", request.category}});
  return out;
}

/// Fixture-driven stand-in for a VLM.
///
/// Fixture JSON: {"objects": {<category>: {"proposals": [entry...]}}}. An entry
/// either names its region directly ({"instruction", "region_id"}) or points
/// at a ground-truth part ({"instruction", "part_map", "part_id"}), where
/// "part_map" is an H×W uint8 tensor of part ids for the image the VLM will be
/// shown. Part entries are resolved the way a human would: by reading which
/// overlay colour covers most of that part.
class MockVlm : public VlmClient {
 public:
  MockVlm() = default;
  explicit MockVlm(const io::fs::path& fixture) { add_fixture(fixture); }

  void add_fixture(const io::fs::path& fixture) {
    const json j = json::parse(io::read_text(fixture));
    add_fixture(j, fixture.parent_path());
  }

  void add_fixture(const json& j, const io::fs::path& base = {}) {
    for (const auto& [category, obj] : j.at("objects").items()) {
      for (const auto& p : obj.at("proposals")) {
        Entry e;
        e.instruction = p.at("instruction").get<std::string>();
        if (p.contains("region_id")) {
          e.region_id = p.at("region_id").get<int>();
        } else {
          e.part_id = p.at("part_id").get<int>();
          e.part_map = io::tensor_grid<int>(io::read_tensor(io::resolve(base, p.at("part_map").get<std::string>())));
        }
        entries_[category].push_back(std::move(e));
      }
    }
  }

  VlmResponse send(const VlmRequest& request) override {
    ++calls_;
    VlmResponse out;
    auto it = entries_.find(request.category);
    if (it == entries_.end()) return out;
    for (const auto& e : it->second)
      out.proposals.push_back({e.instruction, e.part_id ? resolve_part(e, request) : e.region_id});
    return out;
  }

  [[nodiscard]] int calls() const { return calls_; }

 private:
  struct Entry {
    std::string instruction;
    int region_id = 0;
    int part_id = 0;
    LabelMap part_map;
  };

  static int resolve_part(const Entry& e, const VlmRequest& request) {
    const Rgb image = io::decode_png(request.image_png);
    const Rgb overlay = io::decode_png(request.overlay_png);
    if (!overlay.same_shape(image) || !e.part_map.same_shape(image)) return 0;
    std::map<int, std::size_t> votes;
    for (int r = 0; r < image.height; ++r)
      for (int c = 0; c < image.width; ++c) {
        if (e.part_map.at(r, c) != e.part_id) continue;
        const int slot = regions::decode_overlay_slot(&overlay.at(r, c, 0), &image.at(r, c, 0));
        if (slot < 0) continue;
        for (int id : request.region_ids)
          if ((id - 1) % static_cast<int>(regions::kPalette.size()) == slot) {
            ++votes[id];
            break;
          }
      }
    int best = 0;
    std::size_t best_n = 0;
    for (const auto& [id, n] : votes)
      if (n > best_n) {
        best = id;
        best_n = n;
      }
    return best;
  }

  std::map<std::string, std::vector<Entry>> entries_;
  int calls_ = 0;
};

}  // namespace uad::annotate

#endif  // UAD_ANNOTATE_VLM_HPP
