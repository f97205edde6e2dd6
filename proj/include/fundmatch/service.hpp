#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "fundmatch/pipeline.hpp"

namespace httplib {
class Server;
}

namespace fundmatch {

struct Response {
  int status = 200;
  nlohmann::json body;
};

/// Request handling over a published snapshot, independent of the transport.
/// Every read pins one snapshot for its whole duration; recompute builds the
/// next snapshot off to the side and swaps the pointer when it is complete.
class Service {
 public:
  explicit Service(std::shared_ptr<const RunSnapshot> initial);

  std::shared_ptr<const RunSnapshot> snapshot() const;

  Response health() const;
  Response snapshot_info() const;
  Response indicators() const;
  Response calls() const;
  Response recommendations(std::string_view researcher_id) const;
  /// min_percentile defaults to the snapshot's cutoff.
  Response candidates(std::string_view call_id, std::optional<std::string> indicator,
                      std::optional<std::string> min_percentile) const;
  Response analytics_summary() const;
  Response analytics_overlap() const;
  /// All indicators when none is given.
  Response analytics_distribution(std::optional<std::string> indicator) const;
  /// Body is a partial PipelineConfig. 409 while another recompute runs.
  Response recompute(std::string_view body);

 private:
  void publish(std::shared_ptr<const RunSnapshot> next);

  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const RunSnapshot> current_;
  std::mutex recompute_mutex_;
};

/// Registers the HTTP routes for `service` on `server`.
void mount(httplib::Server& server, Service& service);

}  // namespace fundmatch
