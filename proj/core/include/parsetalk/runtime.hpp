#pragma once

#include <any>
#include <cstdint>
#include <deque>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace parsetalk::rt {

struct ActorRef {
  std::uint32_t id = 0;
  bool valid() const { return id != 0; }
  bool operator==(const ActorRef&) const = default;
};

inline constexpr ActorRef kNoActor{};

struct Message {
  std::string name;
  std::any payload;
};

class ProtocolViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Runtime;

// An actor processes one message at a time, run to completion. Cross-actor
// state exchange happens via messages only.
class Actor {
 public:
  virtual ~Actor() = default;
  virtual void on_message(Runtime& rt, ActorRef sender, const Message& msg) = 0;
  // Synchronous protocol entry points; blocks only the sending activity.
  virtual Message on_request(Runtime& rt, ActorRef sender, const Message& msg);

  ActorRef self() const { return self_; }

 private:
  friend class Runtime;
  ActorRef self_;
};

struct TraceEntry {
  std::uint64_t step;
  std::string sender;
  std::string receiver;
  std::string message;
  bool sync = false;
};

struct RunReport {
  std::uint64_t delivered = 0;
  std::vector<std::string> dead_letters;
};

// Cooperative substrate with simulated concurrency: a seeded pseudo-random
// scheduler picks the next actor with pending mail. Equal seed and equal
// send history yield a bit-identical interleaving.
class Runtime {
 public:
  ActorRef spawn(std::unique_ptr<Actor> behavior, std::string label);
  void relabel(ActorRef ref, std::string label);
  void terminate(ActorRef ref);
  bool live(ActorRef ref) const;

  // Asynchronous send. Pairwise FIFO: per sender->receiver pair, delivery
  // order equals send order. Sends to a terminated actor go to the
  // dead-letter log.
  void send_async(ActorRef sender, ActorRef target, Message msg);

  // Synchronous request; the target handles it immediately within the
  // sender's activity. A circular synchronous wait raises ProtocolViolation.
  Message request(ActorRef sender, ActorRef target, Message msg);

  // Delivers messages until no mailbox is pending. Seeds the interleaving.
  RunReport run_until_quiescent(std::uint64_t seed);

  // Delivers at most one message; false when quiescent. run_until_quiescent
  // composes this; exposed for step-wise tests.
  bool step();

  void set_seed(std::uint64_t seed) { rng_.seed(seed); }
  bool quiescent() const;

  void enable_trace(bool on) { trace_enabled_ = on; }
  const std::vector<TraceEntry>& trace() const { return trace_; }
  const std::vector<std::string>& dead_letters() const { return dead_letters_; }
  const std::string& label(ActorRef ref) const;

 private:
  struct Slot {
    std::unique_ptr<Actor> actor;
    std::string label;
    std::deque<std::pair<ActorRef, Message>> mailbox;
    bool live = false;
  };
  Slot* slot(ActorRef ref);
  const Slot* slot(ActorRef ref) const;
  void record(std::uint64_t step, ActorRef sender, ActorRef receiver, const std::string& name,
              bool sync);

  std::vector<Slot> slots_;  // index = id - 1
  std::mt19937_64 rng_;
  std::uint64_t steps_ = 0;
  std::uint64_t delivered_ = 0;
  bool trace_enabled_ = false;
  std::vector<TraceEntry> trace_;
  std::vector<std::string> dead_letters_;
  std::vector<std::uint32_t> sync_stack_;
};

// Receipt bookkeeping for a fanned-out search protocol. Each forwarding step
// that fans a message out to k recipients adds k to `expected` and consumes
// the forwarder's own obligation by exactly one receipt.
struct ReceiptHandlerState {
  enum class Status { Open, TerminatedSuccess, TerminatedFailure };

  std::uint64_t expected = 0;
  std::uint64_t successes = 0;
  std::uint64_t failures = 0;

  Status status() const {
    if (expected == 0) return Status::TerminatedFailure;  // vacuous: no candidates
    if (successes + failures < expected) return Status::Open;
    return successes > 0 ? Status::TerminatedSuccess : Status::TerminatedFailure;
  }
  bool terminal() const { return status() != Status::Open; }
};

// Throws ProtocolViolation when receipts would exceed expectations.
void receipt_expect(ReceiptHandlerState& h, std::uint64_t n);
void receipt_success(ReceiptHandlerState& h);
void receipt_failure(ReceiptHandlerState& h);

}  // namespace parsetalk::rt
