#include "parsetalk/parser.hpp"

#include <algorithm>
#include <cassert>
#include <memory>

namespace parsetalk {

bool is_sentence_delimiter(const std::string& token) {
  return token == "." || token == "!" || token == "?";
}

namespace {

using rt::ActorRef;
using rt::Message;
using rt::Runtime;

enum class ContainerKind { Lexical, Composite, Boundary };
enum class SearchMode { Head, Mod };

using WordRefs = std::map<Position, ActorRef>;

// One phrase as a container sees it.
struct PhraseEntry {
  PhrasePtr state;
  ActorRef actor;
  ActorRef root_word;
};

struct SearchPayload {
  // The phrase looking for a head (head mode: the active phrase; mod mode:
  // the context phrase offered as modifier).
  PhrasePtr modifier;
  ActorRef modifier_actor;
  ActorRef modifier_root_word;
  ActorRef handler;
};

struct AnalyzeCtxPayload {
  ActorRef ctx;
  SearchMode mode;
};

struct SearchToPayload {
  ActorRef ctx;
  SearchMode mode;
  ActorRef handler;
};

struct AttachPayload {
  ValencyMatch match;
  PhrasePtr head;
  ActorRef head_root_word;
  PhrasePtr modifier;
  ActorRef modifier_root_word;
  // Merged interpretation context + modifier id offset when the edge carried
  // a sem role (produced by CONCEPTCHECK); otherwise merged at copy time.
  std::optional<std::pair<InterpretationContext, InstanceId>> checked_context;
  ActorRef handler;
};

struct CopyAndAttachPayload {
  AttachPayload attach;
  ActorRef container;
};

struct CopiedPayload {
  bool head_side;
  PhrasePtr state;
};

struct PhraseBuiltPayload {
  PhraseEntry entry;
  std::string head_signature;  // signature of the governing source phrase
  std::uint32_t attachment_depth;
  ActorRef handler;
};

struct InitContainerPayload {
  ContainerKind kind;
  std::vector<PhraseEntry> phrases;
};

struct CollectReply {
  std::vector<PhraseEntry> phrases;
  std::vector<std::pair<std::string, std::uint32_t>> built;  // (head sig, depth)
};

struct Env {
  const Grammar* grammar;
  const KnowledgeBase* kb;
  CheckCounters* counters;
  std::string tag;
  ActorRef parser;
};

template <typename T>
Message msg(const char* name, T payload) {
  return Message{name, std::make_shared<T>(std::move(payload))};
}
template <typename T>
const T& payload(const Message& m) {
  return *std::any_cast<std::shared_ptr<T>>(m.payload);
}

void expect_sync(Runtime& rt, ActorRef self, ActorRef handler, std::uint64_t n) {
  rt.request(self, handler, msg<std::uint64_t>("expect", n));
}

// ---------------------------------------------------------------------------
// ReceiptHandler: branch-counting partial-termination detection.

class ReceiptHandlerActor : public rt::Actor {
 public:
  explicit ReceiptHandlerActor(ActorRef notify) : notify_(notify) {}

  Message on_request(Runtime&, ActorRef, const Message& m) override {
    if (m.name != "expect") throw rt::ProtocolViolation("unexpected request " + m.name);
    rt::receipt_expect(state_, payload<std::uint64_t>(m));
    return Message{"expected", {}};
  }

  void on_message(Runtime& rt, ActorRef, const Message& m) override {
    if (m.name == "receiptSuccess")
      rt::receipt_success(state_);
    else if (m.name == "receiptFailure")
      rt::receipt_failure(state_);
    else
      throw rt::ProtocolViolation("unexpected message " + m.name);
    if (state_.terminal() && !notified_) {
      notified_ = true;
      rt.send_async(self(), notify_,
                    msg<bool>("searchResult",
                              state_.status() == rt::ReceiptHandlerState::Status::TerminatedSuccess));
    }
  }

  const rt::ReceiptHandlerState& state() const { return state_; }

 private:
  rt::ReceiptHandlerState state_;
  ActorRef notify_;
  bool notified_ = false;
};

// ---------------------------------------------------------------------------
// Word actor: runs the two predicates and participates in rim forwarding and
// phrase copying.

class WordActor : public rt::Actor {
 public:
  WordActor(std::shared_ptr<const Env> env, PhrasePtr phrase, Position pos, ActorRef phrase_actor,
            std::shared_ptr<const WordRefs> siblings)
      : env_(std::move(env)),
        phrase_(std::move(phrase)),
        pos_(pos),
        phrase_actor_(phrase_actor),
        siblings_(std::move(siblings)) {}

  void on_message(Runtime& rt, ActorRef sender, const Message& m) override {
    if (m.name == "searchHeadFor" || m.name == "searchModFor") {
      const auto& sp = payload<SearchPayload>(m);
      // Forward along the rim before checking; processing continues
      // concurrently at the receivers.
      const auto& node = phrase_->at(pos_);
      if (node.head) {
        expect_sync(rt, self(), sp.handler, 1);
        rt.send_async(self(), siblings_->at(node.head->first), msg<SearchPayload>(m.name.c_str(), sp));
      }
      run_checks(rt, sp);
    } else if (m.name == "copyHeadFor") {
      rt.send_async(self(), sender, msg<CopiedPayload>("copied", CopiedPayload{true, phrase_}));
    } else if (m.name == "copyModFor") {
      rt.send_async(self(), sender, msg<CopiedPayload>("copied", CopiedPayload{false, phrase_}));
    } else if (m.name == "update") {
      rt.send_async(self(), sender, Message{"updated", {}});
    } else {
      throw rt::ProtocolViolation("word actor: unexpected message " + m.name);
    }
  }

 private:
  void run_checks(Runtime& rt, const SearchPayload& sp) {
    auto match = syntax_check(*env_->grammar, *phrase_, pos_, *sp.modifier, *env_->counters,
                              env_->tag);
    if (match) {
      AttachPayload attach;
      attach.match = *match;
      attach.head = phrase_;
      attach.head_root_word = siblings_->at(phrase_->root);
      attach.modifier = sp.modifier;
      attach.modifier_root_word = sp.modifier_root_word;
      attach.handler = sp.handler;
      if (match->sem_role) {
        auto outcome = concept_check(*env_->kb, *phrase_, *sp.modifier, *match, *env_->counters,
                                     env_->tag);
        if (!outcome.consistent) {
          rt.send_async(self(), sp.handler, Message{"receiptFailure", {}});
          return;
        }
        attach.checked_context = std::move(*outcome.consistent);
      }
      rt.send_async(self(), phrase_actor_, msg<AttachPayload>("attach", std::move(attach)));
      return;
    }
    rt.send_async(self(), sp.handler, Message{"receiptFailure", {}});
  }

  std::shared_ptr<const Env> env_;
  PhrasePtr phrase_;
  Position pos_;
  ActorRef phrase_actor_;
  std::shared_ptr<const WordRefs> siblings_;
};

// ---------------------------------------------------------------------------
// Phrase actor: encapsulates the word actors of one dependency tree. A
// freshly created phrase actor starts as an empty shell and builds itself
// through the copyAndAttach protocol.

class PhraseActor : public rt::Actor {
 public:
  PhraseActor(std::shared_ptr<const Env> env, ActorRef container)
      : env_(std::move(env)), container_(container) {}

  // Builds the actor hierarchy for an already-known phrase (lexical init).
  void materialize(Runtime& rt, PhrasePtr state) {
    state_ = std::move(state);
    rt.relabel(self(), "phrase:c" + std::to_string(container_.id));
    auto refs = std::make_shared<WordRefs>();
    words_ = refs;
    for (const auto& [pos, _] : state_->nodes) {
      auto ref = rt.spawn(std::make_unique<WordActor>(env_, state_, pos, self(), refs),
                          "word:c" + std::to_string(container_.id) + ":" + std::to_string(pos));
      refs->emplace(pos, ref);
    }
  }

  PhrasePtr state() const { return state_; }
  ActorRef root_word() const { return words_->at(state_->root); }

  void on_message(Runtime& rt, ActorRef sender, const Message& m) override {
    if (m.name == "performSearchHeadTo" || m.name == "performSearchModTo") {
      const auto& sp = payload<SearchToPayload>(m);
      SearchPayload out{state_, self(), root_word(), sp.handler};
      const char* name = sp.mode == SearchMode::Head ? "performSearchHead" : "performSearchMod";
      rt.send_async(self(), sp.ctx, msg<SearchPayload>(name, std::move(out)));
    } else if (m.name == "searchHeadFor") {
      const auto& sp = payload<SearchPayload>(m);
      expect_sync(rt, self(), sp.handler, 1);
      rt.send_async(self(), sp.handler, Message{"receiptFailure", {}});
      rt.send_async(self(), words_->at(state_->rightmost()), msg<SearchPayload>("searchHeadFor", sp));
    } else if (m.name == "searchModFor") {
      const auto& sp = payload<SearchPayload>(m);
      expect_sync(rt, self(), sp.handler, 1);
      rt.send_async(self(), sp.handler, Message{"receiptFailure", {}});
      rt.send_async(self(), words_->at(state_->leftmost()), msg<SearchPayload>("searchModFor", sp));
    } else if (m.name == "attach") {
      const auto& ap = payload<AttachPayload>(m);
      Message next = rt.request(self(), container_, Message{"getNextContainer", {}});
      ActorRef nc = payload<ActorRef>(next);
      Message shell = rt.request(self(), nc, Message{"newIn", {}});
      ActorRef target = payload<ActorRef>(shell);
      rt.send_async(self(), target,
                    msg<CopyAndAttachPayload>("copyAndAttach", CopyAndAttachPayload{ap, nc}));
    } else if (m.name == "copyAndAttach") {
      job_ = std::make_unique<CopyAndAttachPayload>(payload<CopyAndAttachPayload>(m));
      rt.send_async(self(), job_->attach.head_root_word, Message{"copyHeadFor", {}});
      rt.send_async(self(), job_->attach.modifier_root_word, Message{"copyModFor", {}});
    } else if (m.name == "copied") {
      const auto& cp = payload<CopiedPayload>(m);
      (cp.head_side ? head_copy_ : mod_copy_) = cp.state;
      if (head_copy_ && mod_copy_) rt.send_async(self(), self(), Message{"establish", {}});
    } else if (m.name == "establish") {
      establish(rt);
    } else if (m.name == "updated") {
      if (--updates_pending_ == 0) {
        PhraseBuiltPayload built;
        built.entry = {state_, self(), root_word()};
        built.head_signature = tree_signature(*head_copy_);
        built.attachment_depth = attachment_depth_;
        built.handler = job_->attach.handler;
        rt.send_async(self(), job_->container, msg<PhraseBuiltPayload>("phraseBuilt", built));
        job_.reset();
        head_copy_.reset();
        mod_copy_.reset();
      }
    } else {
      (void)sender;
      throw rt::ProtocolViolation("phrase actor: unexpected message " + m.name);
    }
  }

 private:
  void establish(Runtime& rt) {
    const AttachPayload& ap = job_->attach;
    InterpretationContext merged;
    InstanceId offset;
    if (ap.checked_context) {
      std::tie(merged, offset) = *ap.checked_context;
    } else {
      std::tie(merged, offset) = merge_contexts(head_copy_->context, mod_copy_->context);
    }
    auto combined = std::make_shared<PhraseState>(
        attach_phrases(*head_copy_, ap.match.head_pos, *mod_copy_, ap.match.role_name,
                       ap.match.unified_agreement, merged, offset));
    materialize(rt, combined);
    // Depth of the attachment site, used to rank alternatives (lowest
    // attachment continues the analysis).
    attachment_depth_ = 0;
    Position cur = ap.match.head_pos;
    std::vector<Position> path{ap.match.modifier_root};
    while (true) {
      path.push_back(cur);
      const auto& node = combined->at(cur);
      if (!node.head) break;
      cur = node.head->first;
      ++attachment_depth_;
    }
    // Propagate the effects of the new relation to the word actors on the
    // path from the modifier root up to the phrase root.
    updates_pending_ = path.size();
    for (Position p : path) rt.send_async(self(), words_->at(p), Message{"update", {}});
  }

  std::shared_ptr<const Env> env_;
  ActorRef container_;
  PhrasePtr state_;
  std::shared_ptr<const WordRefs> words_;
  std::unique_ptr<CopyAndAttachPayload> job_;
  PhrasePtr head_copy_;
  PhrasePtr mod_copy_;
  std::size_t updates_pending_ = 0;
  std::uint32_t attachment_depth_ = 0;
};

// ---------------------------------------------------------------------------
// Container actor: alternative analyses over the same input span.

class ContainerActor : public rt::Actor {
 public:
  explicit ContainerActor(std::shared_ptr<const Env> env) : env_(std::move(env)) {}

  void on_message(Runtime& rt, ActorRef sender, const Message& m) override {
    if (m.name == "initLexicalContainer" || m.name == "initComposite" ||
        m.name == "initReopened" || m.name == "initBoundary") {
      const auto& init = payload<InitContainerPayload>(m);
      kind_ = init.kind;
      phrases_ = init.phrases;
    } else if (m.name == "analyzeWithContext") {
      const auto& ac = payload<AnalyzeCtxPayload>(m);
      Message created = rt.request(self(), env_->parser, Message{"createReceiptHandler", {}});
      ActorRef handler = payload<ActorRef>(created);
      expect_sync(rt, self(), handler, phrases_.size());
      const char* name =
          ac.mode == SearchMode::Head ? "performSearchHeadTo" : "performSearchModTo";
      for (const auto& entry : phrases_)
        rt.send_async(self(), entry.actor,
                      msg<SearchToPayload>(name, SearchToPayload{ac.ctx, ac.mode, handler}));
    } else if (m.name == "performSearchHead") {
      const auto& sp = payload<SearchPayload>(m);
      expect_sync(rt, self(), sp.handler, phrases_.size());
      rt.send_async(self(), sp.handler, Message{"receiptFailure", {}});
      for (const auto& entry : phrases_)
        rt.send_async(self(), entry.actor, msg<SearchPayload>("searchHeadFor", sp));
    } else if (m.name == "performSearchMod") {
      // Mirror: each context phrase is offered as modifier to the active
      // phrase, whose left-rim word actors run the checks.
      const auto& sp = payload<SearchPayload>(m);
      expect_sync(rt, self(), sp.handler, phrases_.size());
      rt.send_async(self(), sp.handler, Message{"receiptFailure", {}});
      for (const auto& entry : phrases_) {
        SearchPayload offer{entry.state, entry.actor, entry.root_word, sp.handler};
        rt.send_async(self(), sp.modifier_actor, msg<SearchPayload>("searchModFor", offer));
      }
    } else if (m.name == "phraseBuilt") {
      const auto& pb = payload<PhraseBuiltPayload>(m);
      phrases_.push_back(pb.entry);
      built_.emplace_back(pb.head_signature, pb.attachment_depth);
      rt.send_async(self(), pb.handler, Message{"receiptSuccess", {}});
    } else {
      (void)sender;
      throw rt::ProtocolViolation("container actor: unexpected message " + m.name);
    }
  }

  Message on_request(Runtime& rt, ActorRef, const Message& m) override {
    if (m.name == "getNextContainer")
      return rt.request(self(), env_->parser, Message{"createNextContainer", {}});
    if (m.name == "newIn") {
      auto shell = std::make_unique<PhraseActor>(env_, self());
      ActorRef ref = rt.spawn(std::move(shell), "phrase:new");
      return msg<ActorRef>("phraseRef", ref);
    }
    if (m.name == "collect")
      return msg<CollectReply>("collected", CollectReply{phrases_, built_});
    throw rt::ProtocolViolation("container actor: unexpected request " + m.name);
  }

 private:
  std::shared_ptr<const Env> env_;
  ContainerKind kind_ = ContainerKind::Lexical;
  std::vector<PhraseEntry> phrases_;
  std::vector<std::pair<std::string, std::uint32_t>> built_;
};

// ---------------------------------------------------------------------------
// Parser actor: global administration of the parsing process.

class ParserActor : public rt::Actor {
 public:
  ParserActor(const Grammar& g, const KnowledgeBase& kb, CheckCounters& counters, std::string tag)
      : grammar_(&g), kb_(&kb), counters_(&counters), tag_(std::move(tag)) {}

  ParseResult take_result() { return std::move(result_); }
  bool done() const { return done_; }

  void on_message(Runtime& rt, ActorRef, const Message& m) override {
    if (!env_) {
      auto env = std::make_shared<Env>();
      env->grammar = grammar_;
      env->kb = kb_;
      env->counters = counters_;
      env->tag = tag_;
      env->parser = self();
      env_ = std::move(env);
    }
    if (m.name == "analyze") {
      tokens_ = payload<std::vector<std::string>>(m);
      next_token_ = 0;
      start_token(rt);
    } else if (m.name == "searchResult") {
      ++result_.handlers_terminal;
      on_search_result(rt, payload<bool>(m));
    } else {
      throw rt::ProtocolViolation("parser actor: unexpected message " + m.name);
    }
  }

  Message on_request(Runtime& rt, ActorRef, const Message& m) override {
    if (m.name == "createReceiptHandler") {
      ActorRef ref = rt.spawn(std::make_unique<ReceiptHandlerActor>(self()), "receipt");
      handler_ = ref;
      ++result_.handlers_created;
      return msg<ActorRef>("handlerRef", ref);
    }
    if (m.name == "createNextContainer") {
      if (!next_container_.valid()) {
        ActorRef ref = rt.spawn(std::make_unique<ContainerActor>(env_), "container:composite");
        rt.relabel(ref, "container:composite:" + std::to_string(ref.id));
        rt.send_async(self(), ref,
                      msg<InitContainerPayload>("initComposite",
                                                InitContainerPayload{ContainerKind::Composite, {}}));
        Record rec;
        rec.kind = ContainerKind::Composite;
        rec.ref = ref;
        rec.context_link = records_.at(ctx_.id).context_link;
        rec.history_link = last_container_;
        records_.emplace(ref.id, std::move(rec));
        last_container_ = ref;
        next_container_ = ref;
      }
      return msg<ActorRef>("containerRef", next_container_);
    }
    throw rt::ProtocolViolation("parser actor: unexpected request " + m.name);
  }

 private:
  struct Record {
    ContainerKind kind = ContainerKind::Lexical;
    ActorRef ref;
    std::vector<PhraseEntry> phrases;
    ActorRef context_link;
    ActorRef history_link;
    bool retained = false;
    bool deleted = false;
    std::vector<PhraseEntry> pending;  // untried alternatives (backtrack targets)
    std::set<Position> span;
  };

  ActorRef spawn_container(Runtime& rt, ContainerKind kind, const char* init_name,
                           std::vector<PhraseEntry> phrases, std::set<Position> span) {
    const char* label = kind == ContainerKind::Lexical     ? "container:lexical"
                        : kind == ContainerKind::Composite ? "container:reopened"
                                                           : "container:boundary";
    ActorRef ref = rt.spawn(std::make_unique<ContainerActor>(env_), label);
    rt.relabel(ref, std::string(label) + ":" + std::to_string(ref.id));
    rt.send_async(self(), ref,
                  msg<InitContainerPayload>(init_name, InitContainerPayload{kind, phrases}));
    Record rec;
    rec.kind = kind;
    rec.ref = ref;
    rec.phrases = std::move(phrases);
    rec.context_link = frontier_;
    rec.history_link = last_container_;
    rec.span = std::move(span);
    records_.emplace(ref.id, std::move(rec));
    last_container_ = ref;
    return ref;
  }

  PhraseEntry spawn_phrase(Runtime& rt, ActorRef container, PhrasePtr state) {
    auto actor = std::make_unique<PhraseActor>(env_, container);
    PhraseActor* raw = actor.get();
    ActorRef ref = rt.spawn(std::move(actor), "phrase");
    raw->materialize(rt, state);
    return PhraseEntry{state, ref, raw->root_word()};
  }

  void start_token(Runtime& rt) {
    for (;;) {
      if (next_token_ >= tokens_.size()) {
        finalize();
        return;
      }
      cur_pos_ = static_cast<Position>(next_token_);
      const std::string& token = tokens_[next_token_++];
      if (is_sentence_delimiter(token)) {
        frontier_ = spawn_container(rt, ContainerKind::Boundary, "initBoundary", {}, {cur_pos_});
        continue;
      }
      // Word actor initialization: one single-word phrase per reading,
      // encapsulated in a lexical container.
      ActorRef container = rt.spawn(std::make_unique<ContainerActor>(env_), "container:lexical");
      rt.relabel(container, "container:lexical:" + std::to_string(container.id));
      std::vector<PhraseEntry> entries;
      for (const Reading& r : lexical_lookup(*grammar_, token)) {
        auto phrase = std::make_shared<PhraseState>(
            make_lexical_phrase(*grammar_, *kb_, cur_pos_, r));
        entries.push_back(spawn_phrase(rt, container, phrase));
      }
      rt.send_async(self(), container,
                    msg<InitContainerPayload>("initLexicalContainer",
                                              InitContainerPayload{ContainerKind::Lexical, entries}));
      Record rec;
      rec.kind = ContainerKind::Lexical;
      rec.ref = container;
      rec.phrases = entries;
      rec.context_link = frontier_;
      rec.history_link = last_container_;
      rec.span = {cur_pos_};
      records_.emplace(container.id, std::move(rec));
      last_container_ = container;

      active_ = container;
      attached_this_token_ = false;
      context_tried_ = false;
      ctx_ = rec_of(active_).context_link;
      if (launch_or_finish(rt)) return;  // instance launched, wait for result
    }
  }

  Record& rec_of(ActorRef ref) { return records_.at(ref.id); }

  bool searchable(ActorRef ref) const {
    auto it = records_.find(ref.id);
    return it != records_.end() && !it->second.deleted &&
           it->second.kind != ContainerKind::Boundary;
  }

  // Launches the next search instance when a context is available; returns
  // true when an instance is in flight, false when the token is finished.
  bool launch_or_finish(Runtime& rt) {
    for (;;) {
      if (searchable(ctx_)) {
        mode_ = SearchMode::Head;
        context_tried_ = true;
        next_container_ = ActorRef{};
        rt.send_async(self(), active_,
                      msg<AnalyzeCtxPayload>("analyzeWithContext",
                                             AnalyzeCtxPayload{ctx_, SearchMode::Head}));
        return true;
      }
      // Boundary reached.
      if (attached_this_token_) {
        frontier_ = active_;
        return false;
      }
      // Restricted backtracking: reopen the most recent retained container
      // with untried alternatives.
      ActorRef target;
      while (!retained_stack_.empty()) {
        ActorRef candidate = retained_stack_.back();
        retained_stack_.pop_back();
        if (!rec_of(candidate).pending.empty()) {
          target = candidate;
          break;
        }
      }
      if (target.valid()) {
        auto pending = std::move(rec_of(target).pending);
        rec_of(target).pending.clear();
        result_.diagnostics.backtracks.push_back({cur_pos_});
        ActorRef saved_frontier = frontier_;
        frontier_ = rec_of(target).context_link;  // reopened links left of target
        ActorRef reopened = spawn_container(rt, ContainerKind::Composite, "initReopened",
                                            std::move(pending), rec_of(target).span);
        frontier_ = saved_frontier;
        ctx_ = reopened;
        continue;
      }
      // GiveUpFragment: park the active container; it stays in the context
      // chain for later tokens. Not recorded when there was no context to
      // try in the first place (sentence start, boundary to the left).
      if (context_tried_) result_.diagnostics.parked.push_back({cur_pos_});
      frontier_ = active_;
      return false;
    }
  }

  void on_search_result(Runtime& rt, bool success) {
    if (success) {
      finish_success(rt);
    } else if (mode_ == SearchMode::Head) {
      mode_ = SearchMode::Mod;
      rt.send_async(self(), active_,
                    msg<AnalyzeCtxPayload>("analyzeWithContext",
                                           AnalyzeCtxPayload{ctx_, SearchMode::Mod}));
      return;
    } else {
      // Both searches failed: skip to the preceding context container.
      auto span = rec_of(ctx_).span;
      result_.diagnostics.skips.push_back(
          {cur_pos_, std::vector<Position>(span.begin(), span.end())});
      ctx_ = rec_of(ctx_).context_link;
      if (!launch_or_finish(rt)) start_token(rt);
      return;
    }
    if (!launch_or_finish(rt)) start_token(rt);
  }

  void finish_success(Runtime& rt) {
    ActorRef nc = next_container_;
    Message reply = rt.request(self(), nc, Message{"collect", {}});
    auto collected = payload<CollectReply>(reply);
    // Canonical order: lowest (deepest) attachment first, then signature.
    std::vector<std::size_t> order(collected.phrases.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (collected.built[a].second != collected.built[b].second)
        return collected.built[a].second > collected.built[b].second;
      return tree_signature(*collected.phrases[a].state) <
             tree_signature(*collected.phrases[b].state);
    });
    Record& nrec = rec_of(nc);
    nrec.phrases.clear();
    std::set<std::string> head_sigs;
    for (std::size_t i : order) {
      nrec.phrases.push_back(collected.phrases[i]);
      head_sigs.insert(collected.built[i].first);
    }
    nrec.span = nrec.phrases.front().state->coverage();

    ActorRef governor = mode_ == SearchMode::Head ? ctx_ : active_;
    ActorRef modifier = mode_ == SearchMode::Head ? active_ : ctx_;
    Record& grec = rec_of(governor);
    grec.retained = true;
    grec.pending.clear();
    for (const auto& entry : grec.phrases)
      if (!head_sigs.count(tree_signature(*entry.state))) grec.pending.push_back(entry);
    if (!grec.pending.empty()) retained_stack_.push_back(governor);
    // Containers holding modifying phrases are deleted upon attachment —
    // the source of the parser's incompleteness.
    rec_of(modifier).deleted = true;
    rt.terminate(modifier);

    attached_this_token_ = true;
    active_ = nc;
    ctx_ = nrec.context_link;
    next_container_ = ActorRef{};
  }

  void finalize() {
    std::vector<const Record*> chain;
    for (ActorRef cur = frontier_; cur.valid();) {
      const Record& rec = rec_of(cur);
      if (rec.kind != ContainerKind::Boundary) chain.push_back(&rec);
      cur = rec.context_link;
    }
    std::size_t best = 0;
    for (const Record* rec : chain) best = std::max(best, rec->span.size());
    for (const Record* rec : chain) {
      if (!rec->phrases.empty() && rec->span.size() == best) {
        for (const auto& entry : rec->phrases) result_.analyses.push_back(entry.state);
      } else if (!rec->phrases.empty()) {
        result_.fragments.push_back(rec->phrases.front().state);
      }
    }
    auto report_unfilled = [&](const PhrasePtr& p) {
      for (const auto& [pos, node] : p->nodes) {
        auto resolved = resolve_class(*grammar_, node.reading.word_class);
        for (const auto& v : resolved.valencies)
          if (v.obligatory && p->filler_count(pos, v.role_name) == 0)
            result_.diagnostics.unfilled_obligatory.push_back(std::to_string(pos) + " " +
                                                              v.role_name);
      }
    };
    for (const auto& p : result_.analyses) report_unfilled(p);
    for (const auto& p : result_.fragments) report_unfilled(p);
    done_ = true;
  }

  const Grammar* grammar_;
  const KnowledgeBase* kb_;
  CheckCounters* counters_;
  std::string tag_;
  std::shared_ptr<const Env> env_;

  std::vector<std::string> tokens_;
  std::size_t next_token_ = 0;
  Position cur_pos_ = 0;

  std::map<std::uint32_t, Record> records_;
  ActorRef frontier_;
  ActorRef last_container_;
  std::vector<ActorRef> retained_stack_;

  ActorRef active_, ctx_, handler_, next_container_;
  SearchMode mode_ = SearchMode::Head;
  bool attached_this_token_ = false;
  bool context_tried_ = false;

  ParseResult result_;
  bool done_ = false;
};

}  // namespace

ParseResult parse(const std::vector<std::string>& tokens, const Grammar& g,
                  const KnowledgeBase& kb, CheckCounters& counters, const ParseOptions& options) {
  if (tokens.empty()) throw std::invalid_argument("parse: empty token list");
  Runtime rt;
  rt.enable_trace(options.trace);
  auto parser = std::make_unique<ParserActor>(g, kb, counters, options.parser_tag);
  ParserActor* raw = parser.get();
  ActorRef ref = rt.spawn(std::move(parser), "parser");
  rt.send_async(rt::kNoActor, ref, msg<std::vector<std::string>>("analyze", tokens));
  auto report = rt.run_until_quiescent(options.seed);
  if (!raw->done())
    throw rt::ProtocolViolation("parser did not reach a result at quiescence");
  ParseResult result = raw->take_result();
  result.messages_delivered = report.delivered;
  result.dead_letters = report.dead_letters;
  if (options.trace) result.trace = rt.trace();
  return result;
}

}  // namespace parsetalk
