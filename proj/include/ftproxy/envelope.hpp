#pragma once

#include <array>
#include <atomic>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "ftproxy/common.hpp"

namespace ftproxy {

// 256-bit identifier shared by every replica of one logical service.
// Deterministic in (service_name, credential_fingerprint, protocol_version),
// so a relaunched replica regenerates the same id on a fresh machine.
struct ServiceIdentity {
  std::array<uint8_t, 32> id{};

  auto operator<=>(const ServiceIdentity&) const = default;
  std::string hex() const { return to_hex(id); }
};

ServiceIdentity derive_service_identity(std::string_view service_name,
                                        std::span<const uint8_t, 32> credential_fingerprint,
                                        uint32_t protocol_version);

struct RequestId {
  uint64_t client_guid = 0;  // random per proxy instance
  uint64_t sequence = 0;     // strictly increasing per client_guid

  auto operator<=>(const RequestId&) const = default;
  std::string str() const;
};

struct RequestIdHash {
  size_t operator()(const RequestId& r) const {
    return splitmix64(r.client_guid ^ splitmix64(r.sequence));
  }
};

// Hands out RequestIds; safe under concurrent submission.
class RequestIdGenerator {
 public:
  explicit RequestIdGenerator(uint64_t client_guid) : client_guid_(client_guid) {}
  RequestId next() { return RequestId{client_guid_, seq_.fetch_add(1, std::memory_order_relaxed)}; }
  uint64_t client_guid() const { return client_guid_; }

 private:
  uint64_t client_guid_;
  std::atomic<uint64_t> seq_{1};
};

enum class ResponseStatus : uint8_t {
  Ok = 0,
  ServiceError = 1,
  // Fabricated locally by the robot proxy on deadline expiry; never on the wire.
  TimeoutSynthetic = 2,
};

struct RequestEnvelope {
  RequestId request_id;
  ServiceIdentity service_id;
  uint64_t deadline_ms = 0;  // relative to send; 0 = no deadline
  Bytes payload;
};

struct ResponseEnvelope {
  RequestId request_id;
  uint64_t replica_id = 0;
  ResponseStatus status = ResponseStatus::Ok;
  Bytes payload;
};

// --- framing ----------------------------------------------------------------
//
// magic(2) = F6 2F | version(1) = 01 | msg_type(1) | body_len(4, BE) | body

inline constexpr uint8_t kFrameMagic0 = 0xF6;
inline constexpr uint8_t kFrameMagic1 = 0x2F;
inline constexpr uint8_t kFrameVersion = 0x01;
inline constexpr size_t kFrameHeaderSize = 8;
inline constexpr size_t kDefaultMaxFrameBody = 16u << 20;  // 16 MiB

enum class MsgType : uint8_t {
  Request = 1,
  Response = 2,
  Heartbeat = 3,
  Register = 4,
  PeerList = 5,
  DisconnectReport = 6,
};

bool msg_type_known(uint8_t raw);

struct Frame {
  MsgType msg_type = MsgType::Request;
  Bytes body;
};

class FrameTooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

Bytes encode_frame(MsgType msg_type, std::span<const uint8_t> body);

enum class DecodeStatus {
  Ok,
  NeedMore,     // truncated input; resumable
  BadMagic,
  BadVersion,
  BadMsgType,
  Oversize,     // body_len exceeds the configured maximum
};

const char* decode_status_name(DecodeStatus s);

// Decodes exactly one frame from the front of `data`. On Ok, `consumed` is the
// frame's full size and later bytes are untouched. On NeedMore nothing is
// consumed. Errors leave `consumed` at 0.
DecodeStatus decode_frame(std::span<const uint8_t> data, Frame& out, size_t& consumed,
                          size_t max_body = kDefaultMaxFrameBody);

// Incremental decoder for a byte stream (TCP reads land here in chunks).
class FrameDecoder {
 public:
  explicit FrameDecoder(size_t max_body = kDefaultMaxFrameBody) : max_body_(max_body) {}

  void feed(std::span<const uint8_t> chunk) { buf_.insert(buf_.end(), chunk.begin(), chunk.end()); }

  // Ok: one frame popped. NeedMore: wait for more bytes. Anything else is a
  // protocol fault; the corrupt prefix stays buffered for the caller to report.
  DecodeStatus next(Frame& out);

  size_t buffered() const { return buf_.size(); }

 private:
  Bytes buf_;
  size_t max_body_;
};

// --- message bodies (layouts in docs/WIRE_FORMAT.md) ------------------------

Bytes encode_request_body(const RequestEnvelope& env);
RequestEnvelope decode_request_body(std::span<const uint8_t> body);

// Throws InvalidArgument for TimeoutSynthetic: that status is local-only.
Bytes encode_response_body(const ResponseEnvelope& env);
ResponseEnvelope decode_response_body(std::span<const uint8_t> body);

struct HeartbeatBody {
  ServiceIdentity service_id;
  uint64_t sender_tag = 0;
};
Bytes encode_heartbeat_body(const HeartbeatBody& hb);
HeartbeatBody decode_heartbeat_body(std::span<const uint8_t> body);

struct RegisterBody {
  ServiceIdentity service_id;
  uint64_t replica_id = 0;
  std::string endpoint;
};
Bytes encode_register_body(const RegisterBody& reg);
RegisterBody decode_register_body(std::span<const uint8_t> body);

struct PeerEntry {
  uint64_t replica_id = 0;
  std::string endpoint;

  bool operator==(const PeerEntry&) const = default;
};

struct PeerListBody {
  uint8_t status = 0;  // 0 = ok, 1 = rejected/protocol error
  ServiceIdentity service_id;
  std::vector<PeerEntry> peers;  // empty with status 0 from a client = lookup query
};
Bytes encode_peer_list_body(const PeerListBody& pl);
PeerListBody decode_peer_list_body(std::span<const uint8_t> body);

struct DisconnectReportBody {
  ServiceIdentity service_id;
  uint64_t replica_id = 0;
};
Bytes encode_disconnect_body(const DisconnectReportBody& d);
DisconnectReportBody decode_disconnect_body(std::span<const uint8_t> body);

}  // namespace ftproxy
