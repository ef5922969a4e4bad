#include <thread>
#include <unordered_set>

#include "doctest.h"
#include "ftproxy/envelope.hpp"

using namespace ftproxy;

namespace {
std::array<uint8_t, 32> counting_fp() {
  std::array<uint8_t, 32> fp{};
  for (size_t i = 0; i < fp.size(); ++i) fp[i] = static_cast<uint8_t>(i);
  return fp;
}
}  // namespace

TEST_CASE("service identity is deterministic") {
  auto fp = counting_fp();
  auto a = derive_service_identity("grasp", fp, 1);
  auto b = derive_service_identity("grasp", fp, 1);
  CHECK(a == b);
}

TEST_CASE("service identity separates names, fingerprints, versions") {
  auto fp = counting_fp();
  auto base = derive_service_identity("grasp", fp, 1);
  CHECK(base != derive_service_identity("grasp2", fp, 1));
  CHECK(base != derive_service_identity("grasp", std::array<uint8_t, 32>{}, 1));
  CHECK(base != derive_service_identity("grasp", fp, 2));
}

TEST_CASE("service identity golden values") {
  // Frozen from an independent SHA-256 implementation over the documented
  // length-prefixed encoding.
  std::array<uint8_t, 32> zeros{};
  CHECK(derive_service_identity("motion_plan", zeros, 1).hex() ==
        "8747c5fd34e0ff29add5dc9db7b957cceaac29946627c06eba2f05e919ee6f5f");
  auto fp = counting_fp();
  CHECK(derive_service_identity("grasp", fp, 1).hex() ==
        "97f36ed435a33c2be0a692bbc2bdef7e0d7c1dc6f1add173297635283f206e3d");
  CHECK(derive_service_identity("grasp2", fp, 1).hex() ==
        "f0fcadbda08fe4eb975507e2339dfdff0a32eda95ffdd219d31d457399bc6723");
}

TEST_CASE("service identity rejects empty name") {
  CHECK_THROWS_AS(derive_service_identity("", std::array<uint8_t, 32>{}, 1), InvalidArgument);
}

TEST_CASE("frame encoding matches the byte layout") {
  Bytes empty;
  CHECK(encode_frame(MsgType::Request, empty) ==
        Bytes{0xF6, 0x2F, 0x01, 0x01, 0x00, 0x00, 0x00, 0x00});
  Bytes body{0xAA, 0xBB, 0xCC};
  CHECK(encode_frame(MsgType::Response, body) ==
        Bytes{0xF6, 0x2F, 0x01, 0x02, 0x00, 0x00, 0x00, 0x03, 0xAA, 0xBB, 0xCC});
}

TEST_CASE("frame decode error taxonomy") {
  Frame f;
  size_t consumed = 0;
  SUBCASE("bad magic") {
    Bytes bad{0x00, 0x2F, 0x01, 0x01, 0, 0, 0, 0};
    CHECK(decode_frame(bad, f, consumed) == DecodeStatus::BadMagic);
  }
  SUBCASE("bad version") {
    Bytes bad{0xF6, 0x2F, 0x02, 0x01, 0, 0, 0, 0};
    CHECK(decode_frame(bad, f, consumed) == DecodeStatus::BadVersion);
  }
  SUBCASE("unknown msg type") {
    Bytes bad{0xF6, 0x2F, 0x01, 0x09, 0, 0, 0, 0};
    CHECK(decode_frame(bad, f, consumed) == DecodeStatus::BadMsgType);
  }
  SUBCASE("oversize") {
    Bytes bad{0xF6, 0x2F, 0x01, 0x01, 0xFF, 0xFF, 0xFF, 0xFF};
    CHECK(decode_frame(bad, f, consumed) == DecodeStatus::Oversize);
  }
  SUBCASE("truncation is resumable") {
    Bytes full = encode_frame(MsgType::Heartbeat, Bytes{1, 2, 3, 4});
    for (size_t cut = 0; cut < full.size(); ++cut) {
      Bytes prefix(full.begin(), full.begin() + cut);
      CHECK(decode_frame(prefix, f, consumed) == DecodeStatus::NeedMore);
    }
    CHECK(decode_frame(full, f, consumed) == DecodeStatus::Ok);
    CHECK(consumed == full.size());
  }
}

TEST_CASE("codec round-trip on random bodies") {
  StreamRng rng(20240601);
  for (int i = 0; i < 300; ++i) {
    auto type = static_cast<MsgType>(1 + static_cast<int>(rng.uniform() * 6) % 6);
    size_t len = static_cast<size_t>(rng.uniform() * 2048);
    Bytes body(len);
    for (auto& b : body) b = static_cast<uint8_t>(rng.next_u64());
    Bytes wire = encode_frame(type, body);
    Frame out;
    size_t consumed = 0;
    REQUIRE(decode_frame(wire, out, consumed) == DecodeStatus::Ok);
    CHECK(out.msg_type == type);
    CHECK(out.body == body);
    CHECK(consumed == wire.size());
  }
}

TEST_CASE("incremental decoder yields concatenated frames in order") {
  StreamRng rng(7);
  Bytes stream;
  std::vector<Bytes> bodies;
  for (int i = 0; i < 20; ++i) {
    Bytes body(static_cast<size_t>(rng.uniform() * 300));
    for (auto& b : body) b = static_cast<uint8_t>(rng.next_u64());
    bodies.push_back(body);
    Bytes wire = encode_frame(MsgType::Request, body);
    stream.insert(stream.end(), wire.begin(), wire.end());
  }
  FrameDecoder dec;
  // Feed in ragged chunks to exercise resumption.
  size_t pos = 0;
  std::vector<Bytes> seen;
  while (pos < stream.size()) {
    size_t chunk = std::min<size_t>(1 + static_cast<size_t>(rng.uniform() * 97), stream.size() - pos);
    dec.feed(std::span<const uint8_t>(stream.data() + pos, chunk));
    pos += chunk;
    Frame f;
    while (dec.next(f) == DecodeStatus::Ok) seen.push_back(f.body);
  }
  CHECK(seen == bodies);
  CHECK(dec.buffered() == 0);
}

TEST_CASE("request and response bodies round-trip") {
  RequestEnvelope req;
  req.request_id = {0xDEADBEEF12345678ull, 42};
  req.service_id = derive_service_identity("svc", std::array<uint8_t, 32>{}, 1);
  req.deadline_ms = 2'500;
  req.payload = {1, 2, 3, 9, 8, 7};
  auto req2 = decode_request_body(encode_request_body(req));
  CHECK(req2.request_id == req.request_id);
  CHECK(req2.service_id == req.service_id);
  CHECK(req2.deadline_ms == req.deadline_ms);
  CHECK(req2.payload == req.payload);

  ResponseEnvelope resp;
  resp.request_id = req.request_id;
  resp.replica_id = 7;
  resp.status = ResponseStatus::Ok;
  resp.payload = {0xFF};
  auto resp2 = decode_response_body(encode_response_body(resp));
  CHECK(resp2.request_id == resp.request_id);
  CHECK(resp2.replica_id == 7);
  CHECK(resp2.payload == resp.payload);
}

TEST_CASE("synthetic timeout responses are never wire-encodable") {
  ResponseEnvelope resp;
  resp.status = ResponseStatus::TimeoutSynthetic;
  CHECK_THROWS_AS(encode_response_body(resp), InvalidArgument);
}

TEST_CASE("discovery bodies round-trip") {
  auto sid = derive_service_identity("svc", std::array<uint8_t, 32>{}, 1);
  RegisterBody reg{sid, 11, "sim://replica-a#3"};
  auto reg2 = decode_register_body(encode_register_body(reg));
  CHECK(reg2.service_id == sid);
  CHECK(reg2.replica_id == 11);
  CHECK(reg2.endpoint == reg.endpoint);

  PeerListBody pl;
  pl.service_id = sid;
  pl.peers = {{1, "sim://a"}, {2, "sim://b"}};
  auto pl2 = decode_peer_list_body(encode_peer_list_body(pl));
  CHECK(pl2.peers == pl.peers);

  DisconnectReportBody d{sid, 2};
  auto d2 = decode_disconnect_body(encode_disconnect_body(d));
  CHECK(d2.replica_id == 2);
}

TEST_CASE("request ids are unique under concurrent submission") {
  RequestIdGenerator gen(0xABCD);
  std::vector<std::vector<uint64_t>> per_thread(8);
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t)
    threads.emplace_back([&gen, &out = per_thread[t]] {
      for (int i = 0; i < 5'000; ++i) out.push_back(gen.next().sequence);
    });
  for (auto& t : threads) t.join();
  std::unordered_set<uint64_t> all;
  for (auto& v : per_thread) {
    uint64_t prev = 0;
    for (uint64_t s : v) {
      CHECK(s > prev);  // strictly increasing per observer
      prev = s;
      CHECK(all.insert(s).second);
    }
  }
  CHECK(all.size() == 40'000);
}
