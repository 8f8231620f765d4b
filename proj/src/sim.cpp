#include "aims_bench/sim.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>

namespace aims {

std::string to_string(TraceKind k) {
  switch (k) {
    case TraceKind::Admit: return "ADMIT";
    case TraceKind::Block: return "BLOCK";
    case TraceKind::Commit: return "COMMIT";
    case TraceKind::Defer: return "DEFER";
    case TraceKind::Abort: return "ABORT";
    case TraceKind::Respond: return "RESPOND";
    case TraceKind::Affected: return "AFFECTED";
    case TraceKind::Recovered: return "RECOVERED";
    case TraceKind::Done: return "DONE";
  }
  return "?";
}

bool trace_kind_from_string(const std::string& s, TraceKind& out) {
  static const std::pair<const char*, TraceKind> table[] = {
      {"ADMIT", TraceKind::Admit},       {"BLOCK", TraceKind::Block},
      {"COMMIT", TraceKind::Commit},     {"DEFER", TraceKind::Defer},
      {"ABORT", TraceKind::Abort},       {"RESPOND", TraceKind::Respond},
      {"AFFECTED", TraceKind::Affected}, {"RECOVERED", TraceKind::Recovered},
      {"DONE", TraceKind::Done},
  };
  for (const auto& [name, kind] : table) {
    if (s == name) {
      out = kind;
      return true;
    }
  }
  return false;
}

bool SimTrace::complete() const {
  return !events.empty() && events.back().kind == TraceKind::Done;
}

void write_trace(const SimTrace& trace, std::ostream& out) {
  for (const auto& e : trace.events) {
    out << e.time << '\t' << to_string(e.kind) << '\t' << e.txn << '\t' << e.detail << "\n";
  }
}

SimTrace read_trace(std::istream& in) {
  SimTrace trace;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    TraceEvent e;
    std::size_t p1 = line.find('\t');
    std::size_t p2 = p1 == std::string::npos ? p1 : line.find('\t', p1 + 1);
    std::size_t p3 = p2 == std::string::npos ? p2 : line.find('\t', p2 + 1);
    if (p3 == std::string::npos) throw MalformedInput(lineno, "line", "expected 4 tab-separated fields");
    try {
      e.time = std::stoll(line.substr(0, p1));
      e.txn = static_cast<TxnId>(std::stol(line.substr(p2 + 1, p3 - p2 - 1)));
    } catch (const std::exception&) {
      throw MalformedInput(lineno, "time/txn", "not a number");
    }
    if (!trace_kind_from_string(line.substr(p1 + 1, p2 - p1 - 1), e.kind)) {
      throw MalformedInput(lineno, "kind", "unknown trace kind");
    }
    e.detail = line.substr(p3 + 1);
    trace.events.push_back(std::move(e));
  }
  return trace;
}

void write_trace_file(const SimTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_trace(trace, out);
}

SimTrace read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return read_trace(in);
}

std::map<StoreId, std::vector<ObjectId>> route(const Transaction& txn, const PartitionPlan& plan) {
  std::map<StoreId, std::vector<ObjectId>> out;
  for (ObjectId o : txn.read_write_set()) {
    out[plan.store_of(o)].push_back(o);
  }
  return out;
}

TimeMs commit_delay(const Transaction& txn, const PartitionPlan& plan, const StoreGraph& g,
                    TimeMs base) {
  const Span s = span(plan, txn);
  return s.distributed() ? base + communication_cost(g, s) : base;
}

// --- trace-derived metrics ---------------------------------------------------

namespace {

bool detail_value(const std::string& detail, const std::string& k, std::string& out) {
  std::istringstream ss(detail);
  std::string tok;
  while (ss >> tok) {
    if (tok.rfind(k + "=", 0) == 0) {
      out = tok.substr(k.size() + 1);
      return true;
    }
  }
  return false;
}

std::int64_t detail_int(const TraceEvent& e, const std::string& k) {
  std::string v;
  if (!detail_value(e.detail, k, v)) {
    throw IncompleteTrace("trace event at t=" + std::to_string(e.time) + " lacks " + k + "=");
  }
  return std::stoll(v);
}

}  // namespace

Metrics compute_metrics(const SimTrace& trace) {
  if (!trace.complete()) {
    throw IncompleteTrace("trace does not end with a DONE event");
  }
  Metrics m;
  std::int64_t commits = 0;
  std::int64_t response_sum = 0;
  std::int64_t recovery_sum = 0;
  std::vector<TimeMs> open_detections;  // det= of episodes not yet recovered, FIFO
  std::set<TxnId> blocked;
  for (const auto& e : trace.events) {
    switch (e.kind) {
      case TraceKind::Commit:
        ++commits;
        response_sum += e.time - detail_int(e, "at");
        break;
      case TraceKind::Block:
        blocked.insert(e.txn);
        break;
      case TraceKind::Respond:
        open_detections.push_back(detail_int(e, "det"));
        break;
      case TraceKind::Recovered: {
        if (open_detections.empty()) {
          throw IncompleteTrace("RECOVERED without matching RESPOND");
        }
        recovery_sum += e.time - open_detections.front();
        open_detections.erase(open_detections.begin());
        m.affected_count += detail_int(e, "redone");
        ++m.episodes;
        break;
      }
      default:
        break;
    }
  }
  if (!open_detections.empty()) {
    throw IncompleteTrace("episode left unfinished at trace end");
  }
  m.blocked_count = static_cast<std::int64_t>(blocked.size());
  m.avg_response_ms = commits ? static_cast<double>(response_sum) / static_cast<double>(commits) : 0.0;
  m.avg_recovery_ms =
      m.episodes ? static_cast<double>(recovery_sum) / static_cast<double>(m.episodes) : 0.0;
  return m;
}

// --- discrete-event engine ---------------------------------------------------

namespace {

// Tie-break order for simultaneous events: verdicts fire before commit
// completions (a detection at the commit boundary still aborts), recovery
// phases after commits at the same instant (so an in-flight commit is seen
// by the closure), arrivals last.
enum class EvKind : std::uint8_t { Verdict = 0, CommitDone = 1, RecoveryStep = 2, Arrival = 3 };

enum class RecoveryPhase : std::uint8_t { FindDone, RecoveryDone };

struct Event {
  TimeMs time;
  EvKind kind;
  std::int64_t seq;
  TxnId txn = -1;
  std::int32_t episode = -1;
  RecoveryPhase phase = RecoveryPhase::FindDone;
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.seq > b.seq;
  }
};

enum class TxnStatus : std::uint8_t {
  NotArrived,
  BlockedAdmission,
  InFlight,
  HeldForVerdict,
  DeferredCommit,
  Committed,
  Aborted,
};

class Engine : public RecoveryTarget {
 public:
  Engine(const Workload& w, const PartitionPlan& plan, const StoreGraph& g, const SimConfig& cfg)
      : w_(w), plan_(plan), graph_(g), cfg_(cfg) {}

  Money balance(ObjectId o) const override { return balances_[static_cast<std::size_t>(o)]; }
  void set_balance(ObjectId o, Money v) override { balances_[static_cast<std::size_t>(o)] = v; }
  StoreId store_of(ObjectId o) const override { return plan_.store_of(o); }

  SimResult run() {
    validate_inputs();
    const auto n_obj = static_cast<std::size_t>(w_.spec.num_accounts);
    balances_.assign(n_obj, w_.spec.initial_balance);
    log_.reset(w_.spec.num_accounts);
    txns_.assign(w_.transactions.size(), {});
    for (std::size_t i = 0; i < w_.transactions.size(); ++i) {
      txns_[i].rw = w_.transactions[i].read_write_set();
      schedule(w_.transactions[i].arrival_time, EvKind::Arrival, w_.transactions[i].id);
    }

    std::int64_t processed = 0;
    TimeMs last_time = 0;
    while (!queue_.empty()) {
      const Event ev = queue_.top();
      queue_.pop();
      if (++processed > cfg_.event_cap) {
        throw EventQueueOverflow("event cap " + std::to_string(cfg_.event_cap) + " exceeded");
      }
      last_time = ev.time;
      switch (ev.kind) {
        case EvKind::Arrival: on_arrival(ev.txn, ev.time); break;
        case EvKind::Verdict: on_verdict(ev.txn, ev.time); break;
        case EvKind::CommitDone: on_commit_done(ev.txn, ev.time); break;
        case EvKind::RecoveryStep:
          if (ev.phase == RecoveryPhase::FindDone) {
            on_find_done(ev.episode, ev.time);
          } else {
            on_recovery_done(ev.episode, ev.time);
          }
          break;
      }
    }

    check_drained();
    trace(last_time, TraceKind::Done, -1, "events=" + std::to_string(processed));

    SimResult result;
    result.trace = std::move(trace_);
    result.metrics = compute_metrics(result.trace);
    result.final_balances = std::move(balances_);
    result.log = std::move(log_);
    result.episodes = std::move(episodes_);
    result.commit_order = std::move(commit_order_);
    for (std::size_t i = 0; i < txns_.size(); ++i) {
      TxnOutcome o;
      o.status = txns_[i].status == TxnStatus::Committed ? TxnOutcome::Status::Committed
                                                         : TxnOutcome::Status::Aborted;
      o.admitted_at = txns_[i].admitted_at;
      o.commit_time = txns_[i].commit_time;
      o.was_blocked = txns_[i].was_blocked;
      o.distributed = txns_[i].distributed;
      result.outcomes.emplace(static_cast<TxnId>(i), o);
    }
    return result;
  }

 private:
  struct TxnState {
    TxnStatus status = TxnStatus::NotArrived;
    TimeMs admitted_at = 0;
    TimeMs commit_time = -1;
    bool verdict_seen = false;
    bool distributed = false;
    bool was_blocked = false;
    bool traced_defer = false;
    std::vector<ObjectId> rw;
  };

  struct ActiveEpisode {
    std::int32_t id = -1;
    AttackReport report;
    AffectedSet affected;
  };

  void validate_inputs() {
    if (cfg_.delta_ms < 0 || cfg_.base_commit_ms < 0) {
      throw Error("delta_ms and base_commit_ms must be >= 0");
    }
    if (static_cast<std::int32_t>(plan_.assignment.size()) != w_.spec.num_accounts) {
      throw InvalidPlan("plan covers " + std::to_string(plan_.assignment.size()) +
                        " objects, workload has " + std::to_string(w_.spec.num_accounts));
    }
    std::vector<std::int64_t> load(static_cast<std::size_t>(graph_.store_count()), 0);
    for (std::size_t o = 0; o < plan_.assignment.size(); ++o) {
      const StoreId s = plan_.assignment[o];
      if (s < 0 || s >= graph_.store_count()) throw InvalidPlan("object assigned to unknown store");
      ++load[static_cast<std::size_t>(s)];
    }
    for (StoreId s = 0; s < graph_.store_count(); ++s) {
      if (load[static_cast<std::size_t>(s)] > graph_.capacity(s)) {
        throw InvalidPlan("store " + graph_.name(s) + " over capacity");
      }
    }
  }

  void schedule(TimeMs t, EvKind kind, TxnId txn, std::int32_t episode = -1,
                RecoveryPhase phase = RecoveryPhase::FindDone) {
    queue_.push(Event{t, kind, next_seq_++, txn, episode, phase});
  }

  void trace(TimeMs t, TraceKind kind, TxnId txn, std::string detail = {}) {
    trace_.events.push_back(TraceEvent{t, kind, txn, std::move(detail)});
  }

  TxnState& st(TxnId id) { return txns_[static_cast<std::size_t>(id)]; }
  const Transaction& txn(TxnId id) const { return w_.transactions[static_cast<std::size_t>(id)]; }

  void on_arrival(TxnId id, TimeMs now) {
    const AdmitDecision d = admit(txn(id), cot_, lock_);
    if (d.admitted()) {
      do_admit(id, now);
    } else {
      st(id).status = TxnStatus::BlockedAdmission;
      st(id).was_blocked = true;
      blocked_.push_back(id);
      trace(now, TraceKind::Block, id,
            d.outcome == AdmitDecision::Outcome::BlockedByLock ? "reason=lock" : "reason=cot");
    }
  }

  void do_admit(TxnId id, TimeMs now) {
    TxnState& s = st(id);
    s.status = TxnStatus::InFlight;
    s.admitted_at = now;
    const Span sp = span(plan_, txn(id));
    s.distributed = sp.distributed();
    trace(now, TraceKind::Admit, id, "span=" + std::to_string(sp.size()));
    schedule(now + commit_delay(txn(id), plan_, graph_, cfg_.base_commit_ms), EvKind::CommitDone, id);
    schedule(ids_verdict(txn(id), now, cfg_.delta_ms).at, EvKind::Verdict, id);
  }

  void on_commit_done(TxnId id, TimeMs now) {
    TxnState& s = st(id);
    if (s.status == TxnStatus::Aborted) return;
    if (s.distributed && !s.verdict_seen) {
      // Commit-hold: a distributed transaction's commit waits for the IDS.
      s.status = TxnStatus::HeldForVerdict;
      return;
    }
    try_finalize(id, now);
  }

  void on_verdict(TxnId id, TimeMs now) {
    TxnState& s = st(id);
    s.verdict_seen = true;
    if (!txn(id).is_malicious) {
      if (s.status == TxnStatus::HeldForVerdict) try_finalize(id, now);
      return;
    }
    if (s.status == TxnStatus::Committed) {
      AttackReport report{id, s.commit_time, now};
      if (active_ || !pending_.empty()) {
        pending_.push_back(report);
      } else {
        start_episode(report, now);
      }
      return;
    }
    // Caught before its commit completed: the transaction is discarded and
    // no damage reaches the database.
    s.status = TxnStatus::Aborted;
    trace(now, TraceKind::Abort, id, {});
  }

  void try_finalize(TxnId id, TimeMs now) {
    TxnState& s = st(id);
    if (cot_.intersects(s.rw)) {
      if (s.status != TxnStatus::DeferredCommit) {
        s.status = TxnStatus::DeferredCommit;
        deferred_.push_back(id);
        if (!s.traced_defer) {
          s.traced_defer = true;
          trace(now, TraceKind::Defer, id, {});
        }
      }
      return;
    }
    // Execute atomically at the commit instant: the serial order of the
    // simulated history is the commit order.
    log_.open_batch(id, now, LogRecordKind::Original);
    apply_transfer(
        txn(id), [&](ObjectId o) { return balance(o); },
        [&](ObjectId o, Money v) {
          log_.append(o, balance(o), v, store_of(o));
          set_balance(o, v);
        });
    s.status = TxnStatus::Committed;
    s.commit_time = now;
    commit_order_.push_back(id);
    trace(now, TraceKind::Commit, id, "at=" + std::to_string(txn(id).arrival_time));
  }

  void start_episode(const AttackReport& report, TimeMs now) {
    ActiveEpisode ep;
    ep.id = static_cast<std::int32_t>(episodes_.size());
    ep.report = report;
    const std::vector<ObjectId> added = respond(report, log_, cot_, ep.id);
    lock_.acquire(ep.id);
    trace(now, TraceKind::Respond, report.malicious_txn,
          "objs=" + join(added) + " det=" + std::to_string(report.detection_time));
    EpisodeSummary summary;
    summary.episode = ep.id;
    summary.malicious_txn = report.malicious_txn;
    summary.commit_time = report.commit_time;
    summary.detection_time = report.detection_time;
    summary.started = now;
    episodes_.push_back(summary);
    active_ = ep;
    schedule(now + cfg_.base_commit_ms, EvKind::RecoveryStep, report.malicious_txn, ep.id,
             RecoveryPhase::FindDone);
  }

  void on_find_done(std::int32_t episode, TimeMs now) {
    ActiveEpisode& ep = *active_;
    const TaintAnalysis taint = analyze_taint(log_, ep.report.malicious_txn);
    ep.affected = taint.affected;

    // Shrink the quarantine to exactly the corrupted objects: writes of the
    // malicious transaction and of the affected set, plus objects whose
    // earlier compensations laundered the attacker's values.
    const std::set<ObjectId> corrupted(taint.corrupted_objects.begin(),
                                       taint.corrupted_objects.end());
    for (ObjectId o : cot_.sorted_objects_of(episode)) {
      if (!corrupted.count(o)) cot_.erase(o);
    }
    for (ObjectId o : corrupted) cot_.add(o, episode);

    lock_.release();

    EpisodeSummary& summary = episodes_[static_cast<std::size_t>(episode)];
    summary.identified = now;
    summary.affected = ep.affected.txns;
    summary.log_prefix = static_cast<std::int64_t>(log_.records().size());

    trace(now, TraceKind::Affected, ep.report.malicious_txn,
          "txns=" + join(ep.affected.txns) + " cot=" + join(cot_.sorted_objects_of(episode)));

    drain_blocked(now);

    const auto compensations = static_cast<TimeMs>(1 + 2 * ep.affected.txns.size());
    schedule(now + compensations * cfg_.base_commit_ms, EvKind::RecoveryStep,
             ep.report.malicious_txn, episode, RecoveryPhase::RecoveryDone);
  }

  void on_recovery_done(std::int32_t episode, TimeMs now) {
    ActiveEpisode ep = *active_;
    const CompensationRecord comp =
        recover(*this, log_, ep.report, ep.affected, w_, cot_, episode, now);
    episodes_[static_cast<std::size_t>(episode)].finished = now;
    trace(now, TraceKind::Recovered, ep.report.malicious_txn,
          "undone=" + std::to_string(comp.undone) + " redone=" + std::to_string(comp.redone));
    active_.reset();

    // Next detection first, so its quarantine is in place before anything
    // blocked or deferred gets re-evaluated.
    if (!pending_.empty()) {
      const AttackReport next = pending_.front();
      pending_.erase(pending_.begin());
      start_episode(next, now);
    }
    drain_deferred(now);
    drain_blocked(now);
  }

  void drain_blocked(TimeMs now) {
    std::deque<TxnId> keep;
    while (!blocked_.empty()) {
      const TxnId id = blocked_.front();
      blocked_.pop_front();
      if (admit(txn(id), cot_, lock_).admitted()) {
        do_admit(id, now);
      } else {
        keep.push_back(id);
      }
    }
    blocked_ = std::move(keep);
  }

  void drain_deferred(TimeMs now) {
    std::deque<TxnId> work = std::move(deferred_);
    deferred_.clear();
    for (const TxnId id : work) {
      if (st(id).status != TxnStatus::DeferredCommit) continue;  // aborted meanwhile
      st(id).status = TxnStatus::HeldForVerdict;  // transient; finalize decides
      try_finalize(id, now);
    }
  }

  void check_drained() const {
    if (!blocked_.empty() || !deferred_.empty()) {
      throw Error("simulation drained with transactions still blocked");
    }
    if (!cot_.empty() || lock_.held || active_ || !pending_.empty()) {
      throw Error("simulation drained with recovery state left over");
    }
  }

  template <typename T>
  static std::string join(const std::vector<T>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(v[i]);
    }
    return s;
  }

  const Workload& w_;
  const PartitionPlan& plan_;
  const StoreGraph& graph_;
  const SimConfig& cfg_;

  std::priority_queue<Event, std::vector<Event>, EventLater> queue_;
  std::int64_t next_seq_ = 0;
  std::vector<Money> balances_;
  TransactionLog log_{0};
  std::vector<TxnState> txns_;
  CorruptedObjectsTable cot_;
  RecoveryLock lock_;
  std::deque<TxnId> blocked_;
  std::deque<TxnId> deferred_;
  std::vector<AttackReport> pending_;
  std::optional<ActiveEpisode> active_;
  std::vector<EpisodeSummary> episodes_;
  std::vector<TxnId> commit_order_;
  SimTrace trace_;
};

}  // namespace

SimResult run_simulation(const Workload& w, const PartitionPlan& plan, const StoreGraph& g,
                         const SimConfig& cfg, std::uint64_t /*seed*/) {
  Engine engine(w, plan, g, cfg);
  return engine.run();
}

}  // namespace aims
