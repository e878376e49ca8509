#include "mwscm/discovery.hpp"

#include <algorithm>
#include <charconv>

#include "text.hpp"

namespace mwscm {

std::string encode_advertisement(const Advertisement& ad) {
  return "ADVERTISE|" + ad.service_name + "|" + ad.service_type.str() + "|" +
         ad.endpoint.str() + "|" + std::to_string(ad.ttl_s) + "|" + std::to_string(ad.seq);
}

std::string encode_withdrawal(const Withdrawal& wd) {
  return "WITHDRAW|" + wd.service_name + "|" + std::to_string(wd.seq);
}

namespace {

template <typename T>
std::optional<T> parse_number(std::string_view field) {
  T out{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  if (ec != std::errc() || ptr != field.data() + field.size()) return std::nullopt;
  return out;
}

bool wire_name_ok(std::string_view name) {
  if (name.empty()) return false;
  for (char c : name)
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-')) return false;
  return true;
}

}  // namespace

std::optional<PoolMessage> decode_pool_message(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  auto fields = text::split(line, '|');
  if (fields.empty()) return std::nullopt;

  if (fields[0] == "ADVERTISE") {
    if (fields.size() != 6) return std::nullopt;
    Advertisement ad;
    if (!wire_name_ok(fields[1])) return std::nullopt;
    ad.service_name = std::string(fields[1]);
    try {
      ad.service_type = TypePath::parse(fields[2]);
      ad.endpoint = Endpoint::parse(fields[3]);
    } catch (const Error&) {
      return std::nullopt;
    }
    auto ttl = parse_number<std::uint32_t>(fields[4]);
    auto seq = parse_number<std::uint64_t>(fields[5]);
    if (!ttl || *ttl < 1 || !seq) return std::nullopt;
    ad.ttl_s = *ttl;
    ad.seq = *seq;
    return PoolMessage(std::move(ad));
  }

  if (fields[0] == "WITHDRAW") {
    if (fields.size() != 3) return std::nullopt;
    if (!wire_name_ok(fields[1])) return std::nullopt;
    auto seq = parse_number<std::uint64_t>(fields[2]);
    if (!seq) return std::nullopt;
    return PoolMessage(Withdrawal{std::string(fields[1]), *seq});
  }

  return std::nullopt;
}

ServicePool::ServicePool(TaxonomyPtr taxonomy, Network* net, Endpoint self, Endpoint group,
                         PoolOptions options)
    : taxonomy_(std::move(taxonomy)),
      net_(net),
      self_(std::move(self)),
      group_(std::move(group)),
      options_(options) {}

ServicePool::ServicePool(TaxonomyPtr taxonomy) : taxonomy_(std::move(taxonomy)) {}

std::uint64_t ServicePool::clock() const { return net_ ? net_->clock_ms() : 0; }

bool ServicePool::alive(const Entry& entry, std::uint64_t now) const {
  if (entry.withdrawn) return false;
  if (entry.ttl_ms == kRegisteredTtl) return true;
  return now <= entry.last_seen_ms + entry.ttl_ms;
}

void ServicePool::start_browsing(std::uint32_t interval_ms) {
  if (browsing_) throw Error(ErrorCode::AlreadyBrowsing, "");
  if (!net_) throw Error(ErrorCode::ConfigError, "pool has no network");
  net_->join_group(self_, group_);
  tick_timer_ = net_->schedule_periodic(interval_ms, [this] { tick(); });
  browsing_ = true;
}

void ServicePool::stop_browsing() {
  if (!browsing_) return;
  net_->cancel_periodic(tick_timer_);
  net_->leave_group(self_, group_);
  browsing_ = false;
}

void ServicePool::handle_message(const Datagram& datagram) {
  auto message = decode_pool_message(datagram.payload);
  if (!message) return;  // noise

  std::unique_lock lock(mutex_);
  if (const auto* ad = std::get_if<Advertisement>(&*message)) {
    if (!taxonomy_->resolves(ad->service_type)) return;
    ++stats_.advertisements_seen;
    auto it = entries_.find(ad->service_name);
    if (it != entries_.end() && static_cast<std::int64_t>(ad->seq) <= it->second.last_seq)
      return;  // stale
    Entry& entry = entries_[ad->service_name];
    if (entry.description && entry.endpoint != ad->endpoint) entry.description.reset();
    entry.endpoint = ad->endpoint;
    entry.service_type = ad->service_type;
    entry.last_seen_ms = datagram.timestamp_ms;
    entry.ttl_ms = static_cast<std::uint64_t>(ad->ttl_s) * 1000;
    entry.last_seq = static_cast<std::int64_t>(ad->seq);
    entry.withdrawn = false;
  } else {
    const auto& wd = std::get<Withdrawal>(*message);
    auto it = entries_.find(wd.service_name);
    if (it == entries_.end()) return;
    if (it->second.last_seq >= 0 && static_cast<std::int64_t>(wd.seq) < it->second.last_seq)
      return;  // stale
    ++stats_.withdrawals_seen;
    // hidden immediately, physically removed on the next tick
    it->second.withdrawn = true;
    it->second.last_seq = static_cast<std::int64_t>(wd.seq);
  }
}

void ServicePool::register_service(const ServiceDescription& desc) {
  std::unique_lock lock(mutex_);
  std::uint64_t now = clock();
  auto it = entries_.find(desc.service_name);
  if (it != entries_.end() && alive(it->second, now))
    throw Error(ErrorCode::DuplicateName, "'" + desc.service_name + "'");
  Entry entry;
  entry.endpoint = desc.endpoint;
  entry.service_type = desc.service_type;
  entry.last_seen_ms = now;
  entry.ttl_ms = kRegisteredTtl;
  entry.last_seq = -1;
  entry.description = desc;
  entries_[desc.service_name] = std::move(entry);
}

void ServicePool::tick() {
  std::unique_lock lock(mutex_);
  std::uint64_t now = clock();
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (!alive(it->second, now))
      it = entries_.erase(it);
    else
      ++it;
  }
}

std::vector<std::string> ServicePool::find_by_service_type(const TypePath& service_type) {
  if (!taxonomy_->resolves(service_type))
    throw Error(ErrorCode::UnknownType, "'" + service_type.str() + "'");
  std::shared_lock lock(mutex_);
  std::uint64_t now = clock();
  std::vector<std::string> names;
  for (const auto& [name, entry] : entries_) {
    if (!alive(entry, now)) continue;
    if (is_subtype(entry.service_type, service_type, *taxonomy_)) names.push_back(name);
  }
  return names;  // map iteration is already lexicographic
}

std::optional<ServiceDescription> ServicePool::fetch_description(const std::string& name,
                                                                 const Endpoint& endpoint) {
  {
    std::unique_lock lock(mutex_);
    ++stats_.description_fetches;
  }
  std::string reply;
  try {
    reply = net_->request(self_, endpoint, "GETDESC", RequestClass::Fetch);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (reply.rfind("200\n\n", 0) != 0) return std::nullopt;
  try {
    ServiceDescription desc = parse_service_description(reply.substr(5), *taxonomy_);
    if (desc.service_name != name) return std::nullopt;  // lying provider
    return desc;
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::vector<ServiceDelegatePtr> ServicePool::find_by_operation_type(const TypePath& op_type) {
  if (!taxonomy_->resolves(op_type))
    throw Error(ErrorCode::UnknownType, "'" + op_type.str() + "'");

  struct Candidate {
    std::string name;
    Endpoint endpoint;
    bool registered = false;
    std::optional<ServiceDescription> description;
  };
  std::vector<Candidate> candidates;
  {
    std::shared_lock lock(mutex_);
    std::uint64_t now = clock();
    for (const auto& [name, entry] : entries_)
      if (alive(entry, now))
        candidates.push_back({name, entry.endpoint, entry.last_seq < 0, entry.description});
  }

  std::vector<ServiceDelegatePtr> delegates;
  for (auto& candidate : candidates) {
    std::optional<ServiceDescription> desc = candidate.description;
    if (!desc || (!options_.memoize_descriptions && !candidate.registered)) {
      if (!net_) continue;  // registration-only pool: nothing to fetch with
      desc = fetch_description(candidate.name, candidate.endpoint);
      if (!desc) {
        std::unique_lock lock(mutex_);
        auto it = entries_.find(candidate.name);
        if (it != entries_.end()) it->second.withdrawn = true;  // expire the unreachable
        continue;
      }
      if (options_.memoize_descriptions) {
        std::unique_lock lock(mutex_);
        auto it = entries_.find(candidate.name);
        if (it != entries_.end()) it->second.description = *desc;
      }
    }
    for (const auto& op : desc->operations)
      if (is_subtype(op.op_type, op_type, *taxonomy_))
        delegates.push_back(std::make_shared<ServiceDelegate>(create_delegate(*desc, op.name)));
  }

  std::sort(delegates.begin(), delegates.end(),
            [](const ServiceDelegatePtr& a, const ServiceDelegatePtr& b) {
              if (a->service_name() != b->service_name())
                return a->service_name() < b->service_name();
              return a->operation().name < b->operation().name;
            });
  return delegates;
}

ServicePool::Stats ServicePool::stats() const {
  std::shared_lock lock(mutex_);
  return stats_;
}

std::size_t ServicePool::alive_count() const {
  std::shared_lock lock(mutex_);
  std::uint64_t now = clock();
  std::size_t count = 0;
  for (const auto& [name, entry] : entries_)
    if (alive(entry, now)) ++count;
  return count;
}

bool ServicePool::is_alive(const std::string& service_name) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(service_name);
  return it != entries_.end() && alive(it->second, clock());
}

}  // namespace mwscm
