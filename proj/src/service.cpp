#include "fundmatch/service.hpp"

#include <httplib.h>

#include <charconv>
#include <cmath>

#include "fundmatch/error.hpp"

namespace fundmatch {

using nlohmann::json;

namespace {

Response error(int status, const std::string& message) { return {status, {{"error", message}}}; }

json entry_json(const PercentileEntry& e) {
  return {{"researcher_id", e.researcher_id}, {"z", e.z}, {"percentile", e.percentile}, {"rank", e.rank}};
}

}  // namespace

Service::Service(std::shared_ptr<const RunSnapshot> initial) : current_(std::move(initial)) {
  if (!current_) throw std::invalid_argument("Service needs an initial snapshot");
}

std::shared_ptr<const RunSnapshot> Service::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return current_;
}

void Service::publish(std::shared_ptr<const RunSnapshot> next) {
  std::lock_guard lock(snapshot_mutex_);
  current_ = std::move(next);
}

Response Service::health() const { return {200, {{"status", "ok"}, {"snapshot_id", snapshot()->snapshot_id}}}; }

Response Service::snapshot_info() const {
  auto s = snapshot();
  return {200,
          {{"snapshot_id", s->snapshot_id},
           {"config_digest", s->config_digest},
           {"corpus_digest", s->corpus_digest},
           {"created_at", s->created_at},
           {"config", to_json(s->config)},
           {"assignments", s->result.ranking.assignments().size()}}};
}

Response Service::indicators() const {
  auto s = snapshot();
  json list = json::array();
  for (const auto& ind : s->config.indicators) list.push_back(to_json(ind));
  return {200, {{"snapshot_id", s->snapshot_id}, {"indicators", list}}};
}

Response Service::calls() const {
  auto s = snapshot();
  json list = json::array();
  for (const auto& c : s->corpus->calls) list.push_back({{"call_id", c.call_id}, {"title", c.title}});
  return {200, {{"snapshot_id", s->snapshot_id}, {"calls", list}}};
}

Response Service::recommendations(std::string_view researcher_id) const {
  auto s = snapshot();
  try {
    json blocks = json::array();
    for (const auto& block : s->result.ranking.recommend_for_researcher(researcher_id)) {
      json calls = json::array();
      for (const auto& r : block.calls)
        calls.push_back({{"call_id", r.call_id}, {"rank", r.rank}, {"percentile", r.percentile}});
      blocks.push_back({{"indicator", block.indicator}, {"calls", calls}});
    }
    return {200, {{"snapshot_id", s->snapshot_id}, {"researcher_id", researcher_id}, {"indicators", blocks}}};
  } catch (const NotFoundError& e) {
    return error(404, e.what());
  }
}

Response Service::candidates(std::string_view call_id, std::optional<std::string> indicator,
                             std::optional<std::string> min_percentile) const {
  auto s = snapshot();
  if (!indicator || indicator->empty()) return error(400, "query parameter 'indicator' is required");
  double min = s->config.percentile_cutoff;
  if (min_percentile) {
    const auto& text = *min_percentile;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), min);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(min) || min < 0 || min > 100)
      return error(400, "min_percentile must be a number in [0, 100]");
  }
  try {
    json list = json::array();
    for (const auto& e : s->result.ranking.candidates_for_call(call_id, *indicator, min)) list.push_back(entry_json(e));
    return {200,
            {{"snapshot_id", s->snapshot_id},
             {"call_id", call_id},
             {"indicator", *indicator},
             {"min_percentile", min},
             {"candidates", list}}};
  } catch (const NotFoundError& e) {
    return error(404, e.what());
  }
}

Response Service::analytics_summary() const {
  auto s = snapshot();
  json rows = json::array();
  for (const auto& row : s->result.analytics.summary) rows.push_back(to_json(row));
  return {200, {{"snapshot_id", s->snapshot_id}, {"summary", rows}}};
}

Response Service::analytics_overlap() const {
  auto s = snapshot();
  json cells = json::array();
  for (const auto& c : s->result.analytics.overlap) cells.push_back(to_json(c));
  return {200, {{"snapshot_id", s->snapshot_id}, {"overlap", cells}}};
}

Response Service::analytics_distribution(std::optional<std::string> indicator) const {
  auto s = snapshot();
  json list = json::array();
  for (const auto& d : s->result.analytics.distributions)
    if (!indicator || d.indicator_name == *indicator) list.push_back(to_json(d));
  if (indicator && list.empty()) return error(404, "unknown indicator '" + *indicator + "'");
  return {200, {{"snapshot_id", s->snapshot_id}, {"distributions", list}}};
}

Response Service::recompute(std::string_view body) {
  std::unique_lock lock(recompute_mutex_, std::try_to_lock);
  if (!lock.owns_lock()) return error(409, "recompute already in progress");
  json overrides;
  try {
    overrides = body.empty() ? json::object() : json::parse(body);
  } catch (const json::parse_error& e) {
    return error(400, std::string("malformed JSON body: ") + e.what());
  }
  auto base = snapshot();
  try {
    auto config = apply_overrides(base->config, overrides);
    auto next = make_snapshot(base->corpus, config, base->corpus_digest);
    publish(next);
    return {200,
            {{"snapshot_id", next->snapshot_id},
             {"previous_snapshot_id", base->snapshot_id},
             {"config_digest", next->config_digest},
             {"corpus_digest", next->corpus_digest},
             {"assignments", next->result.ranking.assignments().size()}}};
  } catch (const ValidationError& e) {
    return error(400, e.what());
  } catch (const NotFoundError& e) {
    return error(400, e.what());
  }
}

namespace {

void send(httplib::Response& res, const Response& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

std::optional<std::string> param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  return req.get_param_value(name);
}

}  // namespace

void mount(httplib::Server& server, Service& service) {
  server.Get("/health", [&](const httplib::Request&, httplib::Response& res) { send(res, service.health()); });
  server.Get("/snapshot", [&](const httplib::Request&, httplib::Response& res) { send(res, service.snapshot_info()); });
  server.Get("/indicators", [&](const httplib::Request&, httplib::Response& res) { send(res, service.indicators()); });
  server.Get("/calls", [&](const httplib::Request&, httplib::Response& res) { send(res, service.calls()); });
  server.Get(R"(/researchers/([^/]+)/recommendations)", [&](const httplib::Request& req, httplib::Response& res) {
    send(res, service.recommendations(req.matches[1].str()));
  });
  server.Get(R"(/calls/([^/]+)/candidates)", [&](const httplib::Request& req, httplib::Response& res) {
    send(res, service.candidates(req.matches[1].str(), param(req, "indicator"), param(req, "min_percentile")));
  });
  server.Get("/analytics/summary",
             [&](const httplib::Request&, httplib::Response& res) { send(res, service.analytics_summary()); });
  server.Get("/analytics/overlap",
             [&](const httplib::Request&, httplib::Response& res) { send(res, service.analytics_overlap()); });
  server.Get("/analytics/distribution", [&](const httplib::Request& req, httplib::Response& res) {
    send(res, service.analytics_distribution(param(req, "indicator")));
  });
  server.Post("/recompute",
              [&](const httplib::Request& req, httplib::Response& res) { send(res, service.recompute(req.body)); });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    Response r = error(500, "internal error");
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      r = error(500, e.what());
    } catch (...) {
    }
    send(res, r);
  });
}

}  // namespace fundmatch
