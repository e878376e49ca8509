#include "mwscm/transport.hpp"

namespace mwscm {

SimNet::SimNet(SimConfig config) : config_(config), rng_(config.seed) {
  if (config_.drop_probability < 0.0 || config_.drop_probability >= 1.0)
    throw Error(ErrorCode::ConfigError, "drop probability must be in [0,1)");
}

void SimNet::require_registered(const Endpoint& endpoint) const {
  if (nodes_.find(endpoint) == nodes_.end())
    throw Error(ErrorCode::UnknownNode, endpoint.str());
}

void SimNet::check_payload(const std::string& payload) const {
  if (payload.empty()) throw Error(ErrorCode::MalformedPayload, "empty datagram");
  if (payload.size() > kMaxPayloadBytes)
    throw Error(ErrorCode::PayloadTooLarge, std::to_string(payload.size()) + " bytes");
}

void SimNet::register_node(const Endpoint& endpoint, NodeHandlers handlers) {
  if (nodes_.count(endpoint)) throw Error(ErrorCode::EndpointInUse, endpoint.str());
  nodes_.emplace(endpoint, std::move(handlers));
}

void SimNet::unregister_node(const Endpoint& endpoint) {
  nodes_.erase(endpoint);
  for (auto& [group, members] : groups_) members.erase(endpoint);
}

void SimNet::join_group(const Endpoint& member, const Endpoint& group) {
  require_registered(member);
  groups_[group].insert(member);
}

void SimNet::leave_group(const Endpoint& member, const Endpoint& group) {
  auto it = groups_.find(group);
  if (it != groups_.end()) it->second.erase(member);
}

void SimNet::push_event(std::uint64_t at, bool daemon, std::function<void()> fn) {
  if (!daemon) ++pending_normal_;
  queue_.push(Event{at, next_seq_++, daemon, std::move(fn)});
}

void SimNet::exec_next() {
  Event event = queue_.top();
  queue_.pop();
  if (!event.daemon) --pending_normal_;
  if (event.at > clock_) clock_ = event.at;
  event.fn();
}

bool SimNet::dropped() {
  if (config_.drop_probability <= 0.0) return false;
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < config_.drop_probability;
}

void SimNet::log_line(std::string line) {
  if (log_enabled_) event_log_.push_back(std::move(line));
}

std::uint64_t SimNet::run_until_idle() {
  while (pending_normal_ > 0) exec_next();
  return clock_;
}

void SimNet::run_for(std::uint64_t ms) {
  std::uint64_t horizon = clock_ + ms;
  while (!queue_.empty() && queue_.top().at <= horizon) exec_next();
  clock_ = horizon;
}

void SimNet::deliver(const Endpoint& to, Datagram datagram) {
  auto it = nodes_.find(to);
  if (it == nodes_.end() || !it->second.on_datagram) return;  // nobody listening
  ++stats_.datagrams_delivered;
  log_line("t=" + std::to_string(clock_) + " deliver " + datagram.source.str() + " -> " +
           to.str() + " bytes=" + std::to_string(datagram.payload.size()));
  it->second.on_datagram(datagram);
}

void SimNet::send(const Endpoint& from, const Endpoint& to, std::string payload) {
  require_registered(from);
  check_payload(payload);

  std::vector<Endpoint> targets;
  auto group = groups_.find(to);
  if (group != groups_.end()) {
    targets.assign(group->second.begin(), group->second.end());
  } else {
    targets.push_back(to);
  }

  std::uint64_t at = clock_ + config_.link_latency_ms;
  for (const auto& target : targets) {
    ++stats_.datagrams_sent;
    if (dropped()) {
      ++stats_.datagrams_dropped;
      log_line("t=" + std::to_string(clock_) + " drop " + from.str() + " -> " + target.str());
      continue;
    }
    push_event(at, false, [this, target, payload, from, at] {
      deliver(target, Datagram{payload, from, at});
    });
  }
}

std::string SimNet::request(const Endpoint& from, const Endpoint& to, std::string payload,
                            RequestClass cls) {
  require_registered(from);
  if (payload.empty()) throw Error(ErrorCode::MalformedPayload, "empty request");

  ++stats_.requests;
  if (cls == RequestClass::Fetch) ++stats_.fetch_requests;

  const std::uint64_t link = config_.link_latency_ms;
  const std::uint64_t extra =
      cls == RequestClass::Fetch ? config_.description_fetch_latency_ms : 0;

  // Draw both legs' fates up front so the rng sequence does not depend on
  // handler behaviour.
  const bool drop_request_leg = dropped();
  const bool drop_reply_leg = dropped();

  struct Pending {
    bool done = false;
    bool failed = false;
    std::string reply;
    std::string error;
  };
  auto state = std::make_shared<Pending>();

  auto finish_ok = [state](std::string reply) {
    state->done = true;
    state->reply = std::move(reply);
  };
  auto finish_err = [state](std::string error) {
    state->done = true;
    state->failed = true;
    state->error = std::move(error);
  };

  const std::uint64_t t_arrive = clock_ + link;
  push_event(t_arrive, false, [this, state, to, from, payload, link, extra, drop_request_leg,
                               drop_reply_leg, finish_ok, finish_err] {
    if (drop_request_leg) {
      // lost on the way out; the caller learns when the reply was due
      push_event(clock_ + link + extra, false,
                 [finish_err] { finish_err("request lost"); });
      return;
    }
    auto it = nodes_.find(to);
    if (it == nodes_.end() || !it->second.on_request) {
      push_event(clock_ + link, false,
                 [finish_err, to] { finish_err("refused by " + to.str()); });
      return;
    }
    std::string reply;
    try {
      reply = it->second.on_request(payload, from);
    } catch (const std::exception& e) {
      std::string detail = e.what();
      push_event(clock_ + link, false,
                 [finish_err, detail] { finish_err("handler failed: " + detail); });
      return;
    }
    if (drop_reply_leg) {
      push_event(clock_ + link + extra, false, [finish_err] { finish_err("reply lost"); });
      return;
    }
    push_event(clock_ + link + extra, false,
               [finish_ok, reply = std::move(reply)]() mutable { finish_ok(std::move(reply)); });
  });

  while (!state->done) {
    if (queue_.empty())
      throw Error(ErrorCode::TransportError, "event queue drained before reply");
    exec_next();
  }
  if (state->failed) throw Error(ErrorCode::TransportError, state->error + " (" + to.str() + ")");
  return state->reply;
}

std::uint64_t SimNet::schedule_periodic(std::uint32_t interval_ms, std::function<void()> fn) {
  if (interval_ms == 0) throw Error(ErrorCode::ConfigError, "zero periodic interval");
  std::uint64_t id = next_timer_id_++;
  timers_[id] = true;
  auto shared_fn = std::make_shared<std::function<void()>>(std::move(fn));
  // self-rescheduling daemon tick; the cycle through arm is cut when the
  // timer stops, so cancelled timers free their closures
  auto arm = std::make_shared<std::function<void()>>();
  *arm = [this, id, interval_ms, shared_fn, arm] {
    push_event(clock_ + interval_ms, true, [this, id, shared_fn, arm] {
      auto it = timers_.find(id);
      if (it == timers_.end() || !it->second) {
        timers_.erase(id);
        *arm = nullptr;
        return;
      }
      (*shared_fn)();
      if (*arm) (*arm)();
    });
  };
  (*arm)();
  return id;
}

void SimNet::cancel_periodic(std::uint64_t timer_id) {
  auto it = timers_.find(timer_id);
  if (it != timers_.end()) it->second = false;
}

}  // namespace mwscm
