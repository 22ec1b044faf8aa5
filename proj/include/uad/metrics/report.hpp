#ifndef UAD_METRICS_REPORT_HPP
#define UAD_METRICS_REPORT_HPP

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uad/metrics/saliency.hpp"

namespace uad::metrics {

using nlohmann::json;

struct EvalRecord {
  std::string id;
  Map prediction;
  Map ground_truth;
  std::string instruction{};
  std::string action{};  // optional (action, object) pair for templated instructions
  std::string object{};
};

/// (action, object) pairs whose templated instruction is replaced verbatim.
inline std::map<std::pair<std::string, std::string>, std::string> default_rewrites() {
  return {
      {{"hit", "axe"}, "handle of axe to hold during hitting"},
      {{"ride", "bicycle"}, "region to sit on and push the bicycle"},
      {{"pour", "cup"}, "handle of the cup to hold while pouring"},
      {{"wash", "cup"}, "rim of the cup to wash"},
      {{"hold", "cup"}, "handle to hold the cup"},
  };
}

struct EvalConfig {
  double epsilon = 1e-6;
  double nss_threshold = 0.1;
  double nss_strict_threshold = 0.5;
  double auc_gt_threshold = 0.5;
  std::map<std::pair<std::string, std::string>, std::string> rewrites = default_rewrites();
};

inline std::string template_instruction(const std::string& action, const std::string& object,
                                        const EvalConfig& cfg = {}) {
  auto it = cfg.rewrites.find({action, object});
  if (it != cfg.rewrites.end()) return it->second;
  return "region to " + action + " the " + object;
}

inline const std::vector<std::string> kMetricNames{"auc", "kld", "sim", "nss", "nss05"};

struct RecordResult {
  std::string id;
  std::string instruction;
  std::map<std::string, Metric> metrics;
  std::string error;
};

struct Report {
  std::vector<RecordResult> records;
  std::map<std::string, std::optional<double>> means;
  EvalConfig config;

  [[nodiscard]] json to_json() const {
    json recs = json::array();
    for (const auto& r : records) {
      json m = json::object();
      for (const auto& name : kMetricNames) {
        auto it = r.metrics.find(name);
        m[name] = (it != r.metrics.end() && it->second.defined) ? json(it->second.value) : json(nullptr);
      }
      json item{{"id", r.id}, {"instruction", r.instruction}, {"metrics", m}};
      if (!r.error.empty()) item["error"] = r.error;
      recs.push_back(item);
    }
    json means_j = json::object();
    for (const auto& [k, v] : means) means_j[k] = v ? json(*v) : json(nullptr);
    return {{"records", recs},
            {"means", means_j},
            {"config_echo",
             {{"epsilon", config.epsilon},
              {"thresholds",
               {{"nss", config.nss_threshold}, {"nss05", config.nss_strict_threshold}, {"auc_gt", config.auc_gt_threshold}}},
              {"sim_normalization", "sum"}}}};
  }

  [[nodiscard]] std::string to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "id";
    for (const auto& n : kMetricNames) os << ',' << n;
    os << '\n';
    for (const auto& r : records) {
      os << r.id;
      for (const auto& n : kMetricNames) {
        os << ',';
        auto it = r.metrics.find(n);
        if (it != r.metrics.end() && it->second.defined) os << it->second.value;
      }
      os << '\n';
    }
    return os.str();
  }
};

inline std::map<std::string, Metric> evaluate_pair(const Map& prediction, const Map& gt, const EvalConfig& cfg = {}) {
  return {{"auc", auc(prediction, gt, cfg.auc_gt_threshold)},
          {"kld", kld(prediction, gt, cfg.epsilon)},
          {"sim", sim(prediction, gt)},
          {"nss", nss(prediction, gt, cfg.nss_threshold)},
          {"nss05", nss(prediction, gt, cfg.nss_strict_threshold)}};
}

/// Scores every record; a failing record is reported with its error and
/// excluded from the means. Means are unweighted over records where the
/// metric is defined.
inline Report evaluate_set(const std::vector<EvalRecord>& records, const EvalConfig& cfg = {}) {
  Report rep;
  rep.config = cfg;
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& rec : records) {
    RecordResult r;
    r.id = rec.id;
    r.instruction = rec.instruction.empty() && !rec.action.empty()
                        ? template_instruction(rec.action, rec.object, cfg)
                        : rec.instruction;
    try {
      r.metrics = evaluate_pair(rec.prediction, rec.ground_truth, cfg);
      for (const auto& [name, m] : r.metrics)
        if (!std::isfinite(m.value)) throw Error("metrics", "non-finite " + name);
      for (const auto& [name, m] : r.metrics)
        if (m.defined) {
          acc[name].first += m.value;
          ++acc[name].second;
        }
    } catch (const std::exception& e) {
      r.metrics.clear();
      r.error = e.what();
    }
    rep.records.push_back(std::move(r));
  }
  for (const auto& n : kMetricNames) {
    auto it = acc.find(n);
    rep.means[n] = (it != acc.end() && it->second.second > 0)
                       ? std::optional<double>(it->second.first / static_cast<double>(it->second.second))
                       : std::nullopt;
  }
  return rep;
}

}  // namespace uad::metrics

#endif  // UAD_METRICS_REPORT_HPP
