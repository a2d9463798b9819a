#include "parsetalk/runtime.hpp"

#include <algorithm>

namespace parsetalk::rt {

Message Actor::on_request(Runtime&, ActorRef, const Message& msg) {
  throw ProtocolViolation("actor does not accept synchronous requests: " + msg.name);
}

Runtime::Slot* Runtime::slot(ActorRef ref) {
  if (!ref.valid() || ref.id > slots_.size()) return nullptr;
  return &slots_[ref.id - 1];
}

const Runtime::Slot* Runtime::slot(ActorRef ref) const {
  if (!ref.valid() || ref.id > slots_.size()) return nullptr;
  return &slots_[ref.id - 1];
}

ActorRef Runtime::spawn(std::unique_ptr<Actor> behavior, std::string label) {
  Slot s;
  s.actor = std::move(behavior);
  s.label = std::move(label);
  s.live = true;
  slots_.push_back(std::move(s));
  ActorRef ref{static_cast<std::uint32_t>(slots_.size())};
  slots_.back().actor->self_ = ref;
  return ref;
}

void Runtime::relabel(ActorRef ref, std::string label) {
  if (Slot* s = slot(ref)) s->label = std::move(label);
}

void Runtime::terminate(ActorRef ref) {
  if (Slot* s = slot(ref)) {
    s->live = false;
    s->mailbox.clear();
  }
}

bool Runtime::live(ActorRef ref) const {
  const Slot* s = slot(ref);
  return s && s->live;
}

const std::string& Runtime::label(ActorRef ref) const {
  static const std::string none = "<none>";
  const Slot* s = slot(ref);
  return s ? s->label : none;
}

void Runtime::record(std::uint64_t step, ActorRef sender, ActorRef receiver,
                     const std::string& name, bool sync) {
  if (!trace_enabled_) return;
  trace_.push_back({step, label(sender), label(receiver), name, sync});
}

void Runtime::send_async(ActorRef sender, ActorRef target, Message msg) {
  Slot* s = slot(target);
  if (!s || !s->live) {
    dead_letters_.push_back(label(sender) + " -> " + label(target) + " " + msg.name);
    return;
  }
  s->mailbox.emplace_back(sender, std::move(msg));
}

Message Runtime::request(ActorRef sender, ActorRef target, Message msg) {
  Slot* s = slot(target);
  if (!s || !s->live)
    throw ProtocolViolation("synchronous request to terminated actor: " + msg.name);
  if (std::find(sync_stack_.begin(), sync_stack_.end(), target.id) != sync_stack_.end())
    throw ProtocolViolation("circular synchronous wait on " + s->label + " (" + msg.name + ")");
  record(steps_, sender, target, msg.name, /*sync=*/true);
  sync_stack_.push_back(target.id);
  Message reply = s->actor->on_request(*this, sender, msg);
  sync_stack_.pop_back();
  return reply;
}

bool Runtime::quiescent() const {
  for (const auto& s : slots_)
    if (s.live && !s.mailbox.empty()) return false;
  return true;
}

bool Runtime::step() {
  std::vector<std::uint32_t> runnable;
  for (std::uint32_t i = 0; i < slots_.size(); ++i)
    if (slots_[i].live && !slots_[i].mailbox.empty()) runnable.push_back(i);
  if (runnable.empty()) return false;
  std::uint32_t pick =
      runnable[std::uniform_int_distribution<std::size_t>(0, runnable.size() - 1)(rng_)];
  Slot& s = slots_[pick];
  auto [sender, msg] = std::move(s.mailbox.front());
  s.mailbox.pop_front();
  ++steps_;
  ++delivered_;
  record(steps_, sender, ActorRef{pick + 1}, msg.name, /*sync=*/false);
  s.actor->on_message(*this, sender, msg);
  return true;
}

RunReport Runtime::run_until_quiescent(std::uint64_t seed) {
  rng_.seed(seed);
  delivered_ = 0;
  while (step()) {
  }
  return RunReport{delivered_, dead_letters_};
}

void receipt_expect(ReceiptHandlerState& h, std::uint64_t n) { h.expected += n; }

void receipt_success(ReceiptHandlerState& h) {
  if (h.successes + h.failures + 1 > h.expected)
    throw ProtocolViolation("receipt exceeds expectations");
  ++h.successes;
}

void receipt_failure(ReceiptHandlerState& h) {
  if (h.successes + h.failures + 1 > h.expected)
    throw ProtocolViolation("receipt exceeds expectations");
  ++h.failures;
}

}  // namespace parsetalk::rt
