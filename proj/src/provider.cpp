#include "mwscm/provider.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "mwscm/delegate.hpp"
#include "text.hpp"

namespace mwscm {

double vendor_match(const VendorCatalog& catalog, const std::string& genre,
                    const std::string& trading_time) {
  double score = 0.0;
  if (std::find(catalog.genres.begin(), catalog.genres.end(), genre) != catalog.genres.end())
    score += 0.5;
  if (std::find(catalog.trading_times.begin(), catalog.trading_times.end(), trading_time) !=
      catalog.trading_times.end())
    score += 0.5;
  return score;
}

const VendorEntry& best_vendor(const std::vector<VendorEntry>& entries, const std::string& genre,
                               const std::string& trading_time) {
  const VendorEntry* best = &entries.front();
  double best_score = vendor_match(best->catalog, genre, trading_time);
  for (const auto& entry : entries) {
    double score = vendor_match(entry.catalog, genre, trading_time);
    if (score > best_score || (score == best_score && entry.name < best->name)) {
      best = &entry;
      best_score = score;
    }
  }
  return *best;
}

namespace {

[[noreturn]] void config_fail(const std::string& what) {
  throw Error(ErrorCode::ConfigError, what);
}

std::vector<std::string> split_set(std::string_view field) {
  std::vector<std::string> out;
  if (field.empty()) return out;
  for (auto item : text::split(field, '|'))
    if (!item.empty()) out.emplace_back(item);
  return out;
}

VendorEntry parse_vendor_entry(std::string_view spec) {
  VendorEntry entry;
  for (auto field : text::split(spec, ',')) {
    std::string_view key, value;
    if (!text::split_kv(field, key, value)) config_fail("bad vendor field '" + std::string(field) + "'");
    if (key == "name") entry.name = std::string(value);
    else if (key == "genres") entry.catalog.genres = split_set(value);
    else if (key == "times") entry.catalog.trading_times = split_set(value);
    else if (key == "items") entry.catalog.items = split_set(value);
    else config_fail("unknown vendor field '" + std::string(key) + "'");
  }
  if (entry.name.empty()) config_fail("vendor entry without name");
  return entry;
}

HandlerSpec parse_handler_spec(std::string_view spec) {
  HandlerSpec handler;
  auto colon = spec.find(':');
  if (colon == std::string_view::npos) config_fail("handler spec missing ':'");
  auto kind = spec.substr(0, colon);
  auto body = spec.substr(colon + 1);

  if (kind == "fixture") {
    handler.kind = HandlerSpec::Kind::Fixture;
    if (!body.empty()) {
      for (auto field : text::split(body, ',')) {
        std::string_view key, value;
        if (!text::split_kv(field, key, value))
          config_fail("bad fixture field '" + std::string(field) + "'");
        handler.fixture[std::string(key)] = sniff_scalar(value);
      }
    }
    return handler;
  }
  if (kind == "fault") {
    handler.kind = HandlerSpec::Kind::Fault;
    if (body.empty()) config_fail("fault handler without code");
    handler.fault_code = std::string(body);
    return handler;
  }
  if (kind == "vendor-catalog") {
    auto semi = body.find(';');
    auto mode = semi == std::string_view::npos ? body : body.substr(0, semi);
    if (mode == "offer") handler.kind = HandlerSpec::Kind::VendorOffer;
    else if (mode == "recommend") handler.kind = HandlerSpec::Kind::VendorRecommend;
    else config_fail("vendor-catalog mode must be offer or recommend");
    if (semi == std::string_view::npos) config_fail("vendor-catalog without entries");
    for (auto entry : text::split(body.substr(semi + 1), ';'))
      handler.vendors.push_back(parse_vendor_entry(entry));
    if (handler.vendors.empty()) config_fail("vendor-catalog without entries");
    return handler;
  }
  config_fail("unknown handler kind '" + std::string(kind) + "'");
}

}  // namespace

std::map<std::string, HandlerSpec> parse_handlers(std::string_view content) {
  std::map<std::string, HandlerSpec> handlers;
  for (auto line : text::split(content, '\n')) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    std::string_view op, spec;
    if (!text::split_kv(line, op, spec)) config_fail("bad handler line '" + std::string(line) + "'");
    if (handlers.count(std::string(op))) config_fail("duplicate handler for '" + std::string(op) + "'");
    handlers[std::string(op)] = parse_handler_spec(spec);
  }
  return handlers;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_fail("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void check_handlers(const ProviderConfig& config) {
  for (const auto& op : config.description.operations)
    if (config.handlers.find(op.name) == config.handlers.end())
      config_fail("operation '" + op.name + "' of '" + config.description.service_name +
                  "' has no handler");
}

}  // namespace

ProviderConfig load_provider_config(const std::filesystem::path& description_path,
                                    const std::filesystem::path& handlers_path,
                                    const OperationTaxonomy& taxonomy) {
  ProviderConfig config;
  config.description_raw = read_file(description_path);
  config.description = parse_service_description(config.description_raw, taxonomy);
  config.handlers = parse_handlers(read_file(handlers_path));
  check_handlers(config);
  return config;
}

ProviderConfig make_provider_config(ServiceDescription desc,
                                    std::map<std::string, HandlerSpec> handlers,
                                    std::uint32_t advertise_ttl_s) {
  ProviderConfig config;
  config.description = std::move(desc);
  config.description_raw = serialize_service_description(config.description);
  config.handlers = std::move(handlers);
  config.advertise_ttl_s = advertise_ttl_s;
  check_handlers(config);
  return config;
}

ProviderHost::ProviderHost(ProviderConfig config, Network& net, Endpoint group)
    : config_(std::move(config)), net_(net), group_(std::move(group)) {
  check_handlers(config_);
  if (config_.advertise_ttl_s < 1) config_fail("advertise ttl must be >= 1 s");
}

ProviderHost::~ProviderHost() {
  if (running_) {
    try {
      stop();
    } catch (...) {
    }
  }
}

void ProviderHost::start() {
  if (running_) throw Error(ErrorCode::EndpointInUse, config_.description.endpoint.str());
  NodeHandlers handlers;
  handlers.on_request = [this](const std::string& payload, const Endpoint& from) {
    return handle_request(payload, from);
  };
  net_.register_node(config_.description.endpoint, std::move(handlers));
  running_ = true;
  advertise();
  timer_ = net_.schedule_periodic(config_.advertise_ttl_s * 1000 / 2, [this] { advertise(); });
}

void ProviderHost::stop() {
  if (!running_) throw Error(ErrorCode::NotRunning, config_.description.service_name);
  net_.cancel_periodic(timer_);
  try {
    net_.send(config_.description.endpoint, group_,
              encode_withdrawal({config_.description.service_name, seq_++}));
  } catch (const Error&) {
    // withdraw is best-effort; peers fall back to TTL expiry
  }
  net_.unregister_node(config_.description.endpoint);
  running_ = false;
}

void ProviderHost::advertise() {
  Advertisement ad;
  ad.service_name = config_.description.service_name;
  ad.service_type = config_.description.service_type;
  ad.endpoint = config_.description.endpoint;
  ad.ttl_s = config_.advertise_ttl_s;
  ad.seq = seq_++;
  try {
    net_.send(config_.description.endpoint, group_, encode_advertisement(ad));
    ++advertisements_sent_;
  } catch (const Error&) {
  }
}

Record ProviderHost::evaluate(const HandlerSpec& handler, const Record& args,
                              std::string& fault_code) const {
  switch (handler.kind) {
    case HandlerSpec::Kind::Fixture:
      return handler.fixture;
    case HandlerSpec::Kind::Fault:
      fault_code = handler.fault_code;
      return {};
    case HandlerSpec::Kind::VendorOffer: {
      const VendorEntry& entry = handler.vendors.front();
      Record record;
      record["vendor"] = entry.name;
      record["genres"] = [&] {
        std::string joined;
        for (const auto& g : entry.catalog.genres) joined += (joined.empty() ? "" : "|") + g;
        return joined;
      }();
      record["trading-times"] = [&] {
        std::string joined;
        for (const auto& t : entry.catalog.trading_times) joined += (joined.empty() ? "" : "|") + t;
        return joined;
      }();
      record["items"] = [&] {
        std::string joined;
        for (const auto& i : entry.catalog.items) joined += (joined.empty() ? "" : "|") + i;
        return joined;
      }();
      return record;
    }
    case HandlerSpec::Kind::VendorRecommend: {
      auto genre = args.find("genre");
      auto time = args.find("time");
      if (genre == args.end() || time == args.end()) {
        fault_code = "ArgumentMismatch";
        return {};
      }
      const VendorEntry& best =
          best_vendor(handler.vendors, scalar_text(genre->second), scalar_text(time->second));
      Record record;
      record["vendor"] = best.name;
      record["score"] = vendor_match(best.catalog, scalar_text(genre->second),
                                     scalar_text(time->second));
      return record;
    }
  }
  fault_code = "InvocationFault";
  return {};
}

std::string ProviderHost::handle_request(const std::string& payload, const Endpoint&) {
  if (payload == "GETDESC") return "200\n\n" + config_.description_raw;

  if (payload.rfind("CALL ", 0) == 0) {
    CallRequest call;
    try {
      call = decode_call(payload);
    } catch (const Error&) {
      return encode_call_fault("MalformedPayload");
    }
    const OperationSignature* op = config_.description.find_operation(call.operation);
    if (!op) return encode_call_fault("UnknownOperation");
    if (call.args.size() != op->inputs.size()) return encode_call_fault("ArgumentMismatch");
    Record args;
    for (const auto& [pname, kind] : op->inputs) {
      auto it = call.args.find(pname);
      if (it == call.args.end()) return encode_call_fault("ArgumentMismatch");
      auto value = scalar_from_text(it->second, kind);
      if (!value) return encode_call_fault("ArgumentMismatch");
      args[pname] = *value;
    }
    const HandlerSpec& handler = config_.handlers.at(call.operation);
    std::string fault_code;
    Record result = evaluate(handler, args, fault_code);
    if (!fault_code.empty()) return encode_call_fault(fault_code);
    return encode_call_ok(result);
  }

  return "404";
}

}  // namespace mwscm
