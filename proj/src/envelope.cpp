#include "ftproxy/envelope.hpp"

#include <openssl/sha.h>

#include <cstdio>

namespace ftproxy {

std::string to_hex(std::span<const uint8_t> data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (uint8_t b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xF]);
  }
  return out;
}

std::string RequestId::str() const {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%016llx-%llu",
                static_cast<unsigned long long>(client_guid),
                static_cast<unsigned long long>(sequence));
  return buf;
}

ServiceIdentity derive_service_identity(std::string_view service_name,
                                        std::span<const uint8_t, 32> credential_fingerprint,
                                        uint32_t protocol_version) {
  if (service_name.empty()) throw InvalidArgument("service_name must be non-empty");

  // Length-prefixed concatenation keeps field boundaries unambiguous:
  //   u32be(|name|) || name || u32be(32) || fingerprint || u32be(4) || u32be(version)
  Bytes enc;
  enc.reserve(service_name.size() + 32 + 16);
  put_u32be(enc, static_cast<uint32_t>(service_name.size()));
  enc.insert(enc.end(), service_name.begin(), service_name.end());
  put_u32be(enc, 32);
  enc.insert(enc.end(), credential_fingerprint.begin(), credential_fingerprint.end());
  put_u32be(enc, 4);
  put_u32be(enc, protocol_version);

  ServiceIdentity out;
  SHA256(enc.data(), enc.size(), out.id.data());
  return out;
}

bool msg_type_known(uint8_t raw) { return raw >= 1 && raw <= 6; }

Bytes encode_frame(MsgType msg_type, std::span<const uint8_t> body) {
  if (body.size() > 0xFFFFFFFFull) throw FrameTooLarge("frame body exceeds 2^32-1 bytes");
  Bytes out;
  out.reserve(kFrameHeaderSize + body.size());
  out.push_back(kFrameMagic0);
  out.push_back(kFrameMagic1);
  out.push_back(kFrameVersion);
  out.push_back(static_cast<uint8_t>(msg_type));
  put_u32be(out, static_cast<uint32_t>(body.size()));
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

const char* decode_status_name(DecodeStatus s) {
  switch (s) {
    case DecodeStatus::Ok: return "ok";
    case DecodeStatus::NeedMore: return "need-more-bytes";
    case DecodeStatus::BadMagic: return "bad-magic";
    case DecodeStatus::BadVersion: return "version-mismatch";
    case DecodeStatus::BadMsgType: return "unknown-msg-type";
    case DecodeStatus::Oversize: return "frame-too-large";
  }
  return "?";
}

DecodeStatus decode_frame(std::span<const uint8_t> data, Frame& out, size_t& consumed,
                          size_t max_body) {
  consumed = 0;
  if (data.size() < 2) {
    if (!data.empty() && data[0] != kFrameMagic0) return DecodeStatus::BadMagic;
    return DecodeStatus::NeedMore;
  }
  if (data[0] != kFrameMagic0 || data[1] != kFrameMagic1) return DecodeStatus::BadMagic;
  if (data.size() < kFrameHeaderSize) return DecodeStatus::NeedMore;
  if (data[2] != kFrameVersion) return DecodeStatus::BadVersion;
  if (!msg_type_known(data[3])) return DecodeStatus::BadMsgType;
  uint32_t body_len = 0;
  for (int i = 4; i < 8; ++i) body_len = body_len << 8 | data[i];
  if (body_len > max_body) return DecodeStatus::Oversize;
  if (data.size() < kFrameHeaderSize + body_len) return DecodeStatus::NeedMore;

  out.msg_type = static_cast<MsgType>(data[3]);
  out.body.assign(data.begin() + kFrameHeaderSize, data.begin() + kFrameHeaderSize + body_len);
  consumed = kFrameHeaderSize + body_len;
  return DecodeStatus::Ok;
}

DecodeStatus FrameDecoder::next(Frame& out) {
  size_t consumed = 0;
  DecodeStatus s = decode_frame(buf_, out, consumed, max_body_);
  if (s == DecodeStatus::Ok) buf_.erase(buf_.begin(), buf_.begin() + consumed);
  return s;
}

// --- bodies -----------------------------------------------------------------

static void put_service_id(Bytes& out, const ServiceIdentity& sid) {
  out.insert(out.end(), sid.id.begin(), sid.id.end());
}

static ServiceIdentity read_service_id(ByteReader& r) {
  ServiceIdentity sid;
  auto s = r.take(32);
  std::copy(s.begin(), s.end(), sid.id.begin());
  return sid;
}

static void put_request_id(Bytes& out, const RequestId& rid) {
  put_u64be(out, rid.client_guid);
  put_u64be(out, rid.sequence);
}

static RequestId read_request_id(ByteReader& r) {
  RequestId rid;
  rid.client_guid = r.u64be();
  rid.sequence = r.u64be();
  return rid;
}

Bytes encode_request_body(const RequestEnvelope& env) {
  Bytes out;
  out.reserve(56 + env.payload.size());
  put_request_id(out, env.request_id);
  put_service_id(out, env.service_id);
  put_u64be(out, env.deadline_ms);
  out.insert(out.end(), env.payload.begin(), env.payload.end());
  return out;
}

RequestEnvelope decode_request_body(std::span<const uint8_t> body) {
  ByteReader r(body);
  RequestEnvelope env;
  env.request_id = read_request_id(r);
  env.service_id = read_service_id(r);
  env.deadline_ms = r.u64be();
  env.payload = r.rest();
  return env;
}

Bytes encode_response_body(const ResponseEnvelope& env) {
  if (env.status == ResponseStatus::TimeoutSynthetic)
    throw InvalidArgument("TIMEOUT_SYNTHETIC responses are local-only, never wire-encoded");
  Bytes out;
  out.reserve(25 + env.payload.size());
  put_request_id(out, env.request_id);
  put_u64be(out, env.replica_id);
  out.push_back(static_cast<uint8_t>(env.status));
  out.insert(out.end(), env.payload.begin(), env.payload.end());
  return out;
}

ResponseEnvelope decode_response_body(std::span<const uint8_t> body) {
  ByteReader r(body);
  ResponseEnvelope env;
  env.request_id = read_request_id(r);
  env.replica_id = r.u64be();
  uint8_t status = r.u8();
  if (status > 1) throw ProtocolError("invalid response status on wire");
  env.status = static_cast<ResponseStatus>(status);
  env.payload = r.rest();
  return env;
}

Bytes encode_heartbeat_body(const HeartbeatBody& hb) {
  Bytes out;
  put_service_id(out, hb.service_id);
  put_u64be(out, hb.sender_tag);
  return out;
}

HeartbeatBody decode_heartbeat_body(std::span<const uint8_t> body) {
  ByteReader r(body);
  HeartbeatBody hb;
  hb.service_id = read_service_id(r);
  hb.sender_tag = r.u64be();
  return hb;
}

Bytes encode_register_body(const RegisterBody& reg) {
  Bytes out;
  put_service_id(out, reg.service_id);
  put_u64be(out, reg.replica_id);
  if (reg.endpoint.size() > 0xFFFF) throw InvalidArgument("endpoint too long");
  put_u16be(out, static_cast<uint16_t>(reg.endpoint.size()));
  out.insert(out.end(), reg.endpoint.begin(), reg.endpoint.end());
  return out;
}

RegisterBody decode_register_body(std::span<const uint8_t> body) {
  ByteReader r(body);
  RegisterBody reg;
  reg.service_id = read_service_id(r);
  reg.replica_id = r.u64be();
  reg.endpoint = r.str16();
  return reg;
}

Bytes encode_peer_list_body(const PeerListBody& pl) {
  Bytes out;
  out.push_back(pl.status);
  put_service_id(out, pl.service_id);
  if (pl.peers.size() > 0xFFFF) throw InvalidArgument("too many peers");
  put_u16be(out, static_cast<uint16_t>(pl.peers.size()));
  for (const auto& p : pl.peers) {
    put_u64be(out, p.replica_id);
    if (p.endpoint.size() > 0xFFFF) throw InvalidArgument("endpoint too long");
    put_u16be(out, static_cast<uint16_t>(p.endpoint.size()));
    out.insert(out.end(), p.endpoint.begin(), p.endpoint.end());
  }
  return out;
}

PeerListBody decode_peer_list_body(std::span<const uint8_t> body) {
  ByteReader r(body);
  PeerListBody pl;
  pl.status = r.u8();
  pl.service_id = read_service_id(r);
  size_t n = r.u16be();
  pl.peers.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    PeerEntry e;
    e.replica_id = r.u64be();
    e.endpoint = r.str16();
    pl.peers.push_back(std::move(e));
  }
  return pl;
}

Bytes encode_disconnect_body(const DisconnectReportBody& d) {
  Bytes out;
  put_service_id(out, d.service_id);
  put_u64be(out, d.replica_id);
  return out;
}

DisconnectReportBody decode_disconnect_body(std::span<const uint8_t> body) {
  ByteReader r(body);
  DisconnectReportBody d;
  d.service_id = read_service_id(r);
  d.replica_id = r.u64be();
  return d;
}

}  // namespace ftproxy
