#ifndef UAD_ANNOTATE_VLM_HTTP_HPP
#define UAD_ANNOTATE_VLM_HTTP_HPP

#include <mutex>
#include <semaphore>
#include <string>

// Eigen must be seen before httplib: <resolv.h> defines a `_res` macro that
// collides with Eigen parameter names.
#include "uad/annotate/vlm.hpp"

#include <httplib.h>

namespace uad::annotate {

inline constexpr const char* kProposePath = "/v1/propose";

/// JSON-over-HTTP client for POST /v1/propose. At most `max_in_flight`
/// requests are outstanding at once across threads sharing the client.
class HttpVlmClient : public VlmClient {
 public:
  explicit HttpVlmClient(std::string endpoint, int max_in_flight = 4,
                         std::chrono::seconds timeout = std::chrono::seconds(120))
      : endpoint_(std::move(endpoint)), slots_(max_in_flight), timeout_(timeout) {}

  VlmResponse send(const VlmRequest& request) override {
    slots_.acquire();
    struct Release {
      std::counting_semaphore<64>& s;
      ~Release() { s.release(); }
    } release{slots_};

    httplib::Client client(endpoint_);
    client.set_read_timeout(timeout_);
    client.set_connection_timeout(std::chrono::seconds(10));
    auto res = client.Post(kProposePath, request.to_json().dump(), "application/json");
    if (!res) throw TransportError("POST " + endpoint_ + kProposePath + " failed: " + httplib::to_string(res.error()));
    if (res->status >= 500) throw TransportError("server error " + std::to_string(res->status));
    if (res->status != 200) throw Error("vlm", "request rejected with status " + std::to_string(res->status));
    try {
      return VlmResponse::from_json(json::parse(res->body));
    } catch (const json::exception& e) {
      throw TransportError(std::string("malformed response: ") + e.what());
    }
  }

 private:
  std::string endpoint_;
  std::counting_semaphore<64> slots_;
  std::chrono::seconds timeout_;
};

/// Serves `client` (usually a MockVlm) behind the same wire contract.
inline void mount_vlm_service(httplib::Server& server, VlmClient& client) {
  auto mutex = std::make_shared<std::mutex>();
  server.Post(kProposePath, [&client, mutex](const httplib::Request& req, httplib::Response& res) {
    try {
      const VlmRequest request = VlmRequest::from_json(json::parse(req.body));
      std::lock_guard lock(*mutex);
      res.set_content(client.send(request).to_json().dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(json{{"error", e.what()}}.dump(), "application/json");
    }
  });
}

}  // namespace uad::annotate

#endif  // UAD_ANNOTATE_VLM_HTTP_HPP
