#include "ftproxy/sim_net.hpp"

namespace ftproxy {

TimeMs SimHost::now_ms() { return net_.loop_.now(); }

void SimHost::schedule(TimeMs delay_ms, std::function<void()> fn) {
  net_.loop_.schedule_in(delay_ms, [this, fn = std::move(fn)] {
    if (alive_) fn();
  });
}

LinkId SimHost::dial(const std::string& endpoint) { return net_.dial_from(this, endpoint); }

bool SimHost::send(LinkId link, const Bytes& frame_bytes) {
  return net_.send_from(this, link, frame_bytes);
}

void SimHost::close_link(LinkId link) { net_.close_from(this, link); }

std::string SimHost::base_name() const {
  auto pos = name_.find('#');
  return pos == std::string::npos ? name_ : name_.substr(0, pos);
}

SimHost* SimNetwork::add_node(const std::string& name, const std::string& region) {
  auto host = std::unique_ptr<SimHost>(new SimHost(*this, name, region));
  SimHost* raw = host.get();
  hosts_.push_back(std::move(host));
  by_name_[name] = raw;
  return raw;
}

void SimNetwork::kill(const std::string& name) {
  auto it = by_name_.find(name);
  if (it == by_name_.end() || !it->second->alive_) return;
  SimHost* victim = it->second;
  victim->alive_ = false;
  for (auto& [pair_id, link] : links_) {
    if (!link.open) continue;
    if (link.dialer != victim && link.target != victim) continue;
    link.open = false;
    SimHost* peer = link.dialer == victim ? link.target : link.dialer;
    LinkId peer_link = link.dialer == victim ? link.target_link : link.dialer_link;
    loop_.schedule_in(0, [peer, peer_link] {
      if (peer->alive() && peer->callbacks_) peer->callbacks_->on_link_reset(peer_link);
    });
  }
}

void SimNetwork::hang(const std::string& name) {
  auto it = by_name_.find(name);
  if (it != by_name_.end()) it->second->responsive_ = false;
}

bool SimNetwork::node_alive(const std::string& name) const {
  auto it = by_name_.find(name);
  return it != by_name_.end() && it->second->alive();
}

void SimNetwork::set_link_model(const std::string& base_name, LatencyModel model) {
  link_models_[base_name] = std::move(model);
}

LinkId SimNetwork::dial_from(SimHost* from, const std::string& endpoint) {
  LinkId local = next_link_id_++;
  std::string name = endpoint.starts_with("sim://") ? endpoint.substr(6) : endpoint;
  auto it = by_name_.find(name);
  if (it == by_name_.end() || !it->second->alive()) {
    loop_.schedule_in(control_latency_ms_, [from, local] {
      if (from->alive() && from->callbacks_) from->callbacks_->on_link_reset(local);
    });
    return local;
  }

  SimHost* target = it->second;
  LinkId remote = next_link_id_++;
  uint64_t pair_id = next_pair_id_++;
  LinkState link{from, local, target, remote, target->base_name(), true};
  links_.emplace(pair_id, link);
  link_to_pair_[local] = pair_id;
  link_to_pair_[remote] = pair_id;

  std::string from_ep = from->endpoint(), target_ep = target->endpoint();
  loop_.schedule_in(control_latency_ms_, [this, pair_id, from_ep, target_ep] {
    auto lit = links_.find(pair_id);
    if (lit == links_.end() || !lit->second.open) return;
    LinkState& l = lit->second;
    if (l.target->alive() && l.target->callbacks_) l.target->callbacks_->on_link_up(l.target_link, from_ep);
    if (l.dialer->alive() && l.dialer->callbacks_) l.dialer->callbacks_->on_link_up(l.dialer_link, target_ep);
  });
  return local;
}

bool SimNetwork::send_from(SimHost* from, LinkId link_id, const Bytes& frame_bytes) {
  auto pit = link_to_pair_.find(link_id);
  if (pit == link_to_pair_.end()) return false;
  auto lit = links_.find(pit->second);
  if (lit == links_.end() || !lit->second.open || !from->alive()) return false;
  LinkState& link = lit->second;

  SimHost* to = link.dialer == from ? link.target : link.dialer;
  LinkId to_link = link.dialer == from ? link.target_link : link.dialer_link;
  uint8_t raw_type = frame_bytes.size() > 3 ? frame_bytes[3] : 0;
  TimeMs delay = transit_delay(from, raw_type, link);
  uint64_t pair_id = pit->second;
  loop_.schedule_in(delay, [this, pair_id, to, to_link, bytes = frame_bytes]() mutable {
    deliver(pair_id, to, to_link, std::move(bytes));
  });
  return true;
}

void SimNetwork::close_from(SimHost* from, LinkId link_id) {
  auto pit = link_to_pair_.find(link_id);
  if (pit == link_to_pair_.end()) return;
  auto lit = links_.find(pit->second);
  if (lit == links_.end() || !lit->second.open) return;
  LinkState& link = lit->second;
  link.open = false;
  SimHost* peer = link.dialer == from ? link.target : link.dialer;
  LinkId peer_link = link.dialer == from ? link.target_link : link.dialer_link;
  loop_.schedule_in(0, [peer, peer_link] {
    if (peer->alive() && peer->callbacks_) peer->callbacks_->on_link_reset(peer_link);
  });
}

void SimNetwork::deliver(uint64_t pair_id, SimHost* to, LinkId to_link, Bytes bytes) {
  auto lit = links_.find(pair_id);
  if (lit == links_.end() || !lit->second.open || !to->alive() || !to->responsive_ ||
      !to->callbacks_) {
    ++frames_dropped_;
    return;
  }
  Frame frame;
  size_t consumed = 0;
  DecodeStatus status = decode_frame(bytes, frame, consumed);
  if (status != DecodeStatus::Ok) {
    to->callbacks_->on_frame_error(to_link, status);
    return;
  }
  to->callbacks_->on_frame(to_link, frame);
}

TimeMs SimNetwork::transit_delay(SimHost* sender, uint8_t raw_msg_type, const LinkState& link) {
  bool is_data = raw_msg_type == static_cast<uint8_t>(MsgType::Request) ||
                 raw_msg_type == static_cast<uint8_t>(MsgType::Response);
  TimeMs delay = control_latency_ms_;
  if (is_data) {
    auto mit = link_models_.find(link.stream_key);
    if (mit == link_models_.end()) {
      delay = 0;
    } else if (mit->second.kind == LatencyModel::Kind::Fixed) {
      delay = mit->second.mean_ms;
    } else {
      delay = mit->second.sample(link_stream(link.stream_key));
    }
  }
  if (!sender->region().empty()) {
    TimeMs now = loop_.now();
    for (const auto& w : slowdowns_)
      if (w.region == sender->region() && now >= w.start && now < w.end)
        delay += w.added_latency_ms;
  }
  return delay;
}

StreamRng& SimNetwork::link_stream(const std::string& key) {
  auto it = link_streams_.find(key);
  if (it == link_streams_.end())
    it = link_streams_.emplace(key, std::make_unique<StreamRng>(seed_, "link/" + key)).first;
  return *it->second;
}

}  // namespace ftproxy
