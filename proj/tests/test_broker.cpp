#include <doctest.h>

#include <random>

#include "mwscm/broker.hpp"
#include "testutil.hpp"

using namespace mwscm;

TEST_CASE("normalize urlencoded") {
  NormalizedRequest req = normalize("type=locate-user&user=alice", ClientFormat::Urlencoded);
  CHECK(req.request_type == "locate-user");
  CHECK(req.params == std::map<std::string, std::string>{{"user", "alice"}});
  CHECK(req.client_format == ClientFormat::Urlencoded);
}

TEST_CASE("normalize json") {
  NormalizedRequest req = normalize(
      R"({"type":"recommend-vendor","genre":"scifi","time":"evening"})", ClientFormat::Json);
  CHECK(req.request_type == "recommend-vendor");
  CHECK(req.params ==
        std::map<std::string, std::string>{{"genre", "scifi"}, {"time", "evening"}});
  CHECK(req.client_format == ClientFormat::Json);
}

TEST_CASE("normalize xml") {
  NormalizedRequest req =
      normalize(R"(<request type="locate-user" user="alice"/>)", ClientFormat::Xml);
  CHECK(req.request_type == "locate-user");
  CHECK(req.params == std::map<std::string, std::string>{{"user", "alice"}});
}

TEST_CASE("normalize error paths") {
  auto code_of = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::ConfigError;
  };
  CHECK(code_of([] { normalize("user=alice", ClientFormat::Urlencoded); }) ==
        ErrorCode::MissingRequestType);
  CHECK(code_of([] { normalize("type=&user=a", ClientFormat::Urlencoded); }) ==
        ErrorCode::MissingRequestType);
  CHECK(code_of([] { normalize(R"({"user":"alice"})", ClientFormat::Json); }) ==
        ErrorCode::MissingRequestType);
  CHECK(code_of([] { normalize("not json", ClientFormat::Json); }) == ErrorCode::MalformedPayload);
  CHECK(code_of([] { normalize(R"({"type":"x","v":[1]})", ClientFormat::Json); }) ==
        ErrorCode::MalformedPayload);
  CHECK(code_of([] { normalize("a&b", ClientFormat::Urlencoded); }) == ErrorCode::MalformedPayload);
  CHECK(code_of([] { normalize("a=1&a=2&type=t", ClientFormat::Urlencoded); }) ==
        ErrorCode::MalformedPayload);
  CHECK(code_of([] { normalize("<wrong type=\"x\"/>", ClientFormat::Xml); }) ==
        ErrorCode::MalformedPayload);
  CHECK(code_of([] { normalize("<request type=\"x\"><child/></request>", ClientFormat::Xml); }) ==
        ErrorCode::MalformedPayload);
}

TEST_CASE("json scalar fields coerce to canonical text") {
  NormalizedRequest req =
      normalize(R"({"type":"t","n":1,"f":2.5,"b":true})", ClientFormat::Json);
  CHECK(req.params.at("n") == "1");
  CHECK(req.params.at("f") == "2.5");
  CHECK(req.params.at("b") == "true");
}

TEST_CASE("format_response examples") {
  NormalizedResponse ok;
  ok.ok = true;
  ok.results["vendor"] = Scalar(std::string("mbv-2"));
  CHECK(format_response(ok, ClientFormat::Urlencoded) == "status=ok&vendor=mbv-2");
  CHECK(format_response(ok, ClientFormat::Json) == R"({"status":"ok","vendor":"mbv-2"})");
  CHECK(format_response(ok, ClientFormat::Xml) == R"(<response status="ok" vendor="mbv-2"/>)");

  NormalizedResponse err = NormalizedResponse::failure(ErrorCode::NoProvider, "");
  CHECK(format_response(err, ClientFormat::Xml) == R"(<response status="error" code="NoProvider"/>)");
  CHECK(format_response(err, ClientFormat::Urlencoded) == "code=NoProvider&status=error");
  CHECK(format_response(err, ClientFormat::Json) == R"({"code":"NoProvider","status":"error"})");
}

TEST_CASE("record results flatten to slot.field with sorted keys") {
  NormalizedResponse resp;
  resp.ok = true;
  resp.results["gps-fix"] = Record{{"lat", -37.88}, {"lon", 145.04}};
  resp.results["count"] = Scalar(std::int64_t{2});
  CHECK(format_response(resp, ClientFormat::Urlencoded) ==
        "count=2&gps-fix.lat=-37.88&gps-fix.lon=145.04&status=ok");
  CHECK(format_response(resp, ClientFormat::Json) ==
        R"({"count":2,"gps-fix.lat":-37.88,"gps-fix.lon":145.04,"status":"ok"})");
}

TEST_CASE("round trip: normalize(format_request(r)) is the identity") {
  std::mt19937_64 rng(98765);
  const ClientFormat formats[] = {ClientFormat::Urlencoded, ClientFormat::Xml, ClientFormat::Json};
  int cases = 0;
  for (int round = 0; round < 500; ++round) {
    NormalizedRequest request;
    request.request_type = testutil::random_name(rng);
    std::uniform_int_distribution<int> n_params(0, 5);
    int params = n_params(rng);
    for (int p = 0; p < params; ++p)
      request.params["f" + testutil::random_name(rng)] = testutil::random_value(rng);

    for (ClientFormat format : formats) {
      request.client_format = format;
      std::string encoded = format_request(request, format);
      NormalizedRequest back = normalize(encoded, format);
      CHECK(back == request);
      ++cases;
    }
  }
  CHECK(cases >= 1000);
}

TEST_CASE("cross-format agreement: one logical request, three encodings") {
  NormalizedRequest request;
  request.request_type = "locate-user";
  request.params = {{"user", "alice"}, {"floor", "7"}};

  auto from_url = normalize(format_request(request, ClientFormat::Urlencoded),
                            ClientFormat::Urlencoded);
  auto from_xml = normalize(format_request(request, ClientFormat::Xml), ClientFormat::Xml);
  auto from_json = normalize(format_request(request, ClientFormat::Json), ClientFormat::Json);

  CHECK(from_url.request_type == from_xml.request_type);
  CHECK(from_url.params == from_xml.params);
  CHECK(from_url.params == from_json.params);
}

TEST_CASE("a param named type is rejected by format_request") {
  NormalizedRequest request;
  request.request_type = "t";
  request.params = {{"type", "sneaky"}};
  CHECK_THROWS_AS(format_request(request, ClientFormat::Urlencoded), Error);
}

TEST_CASE("urlencoded escaping survives hostile values") {
  NormalizedRequest request;
  request.request_type = "t";
  request.params = {{"q", "a&b=c %20+d"}};
  std::string encoded = format_request(request, ClientFormat::Urlencoded);
  CHECK(normalize(encoded, ClientFormat::Urlencoded) == request);
}
