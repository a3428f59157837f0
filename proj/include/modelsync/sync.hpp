#pragma once

#include "modelsync/operation.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace modelsync {

/// Gap-free sequence of sequenced operations. `base` is the sequence number
/// just before the first entry (0 for a log that starts at seq 1).
class OpLog {
public:
    explicit OpLog(std::uint64_t base = 0) : base_(base) {}

    std::uint64_t base() const noexcept { return base_; }
    std::uint64_t last_seq() const noexcept { return base_ + entries_.size(); }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    const std::vector<Operation>& entries() const noexcept { return entries_; }

    /// Throws GapInLog unless op.seq == last_seq() + 1.
    void append(Operation op);
    /// Entries with seq > after.
    std::vector<Operation> suffix(std::uint64_t after) const;

private:
    std::uint64_t base_;
    std::vector<Operation> entries_;
};

struct Sequenced {
    Operation op;
    bool duplicate = false; // resubmission; op carries the original seq
};

/// The single serialization point assigning the authoritative total order.
class Sequencer {
public:
    Sequencer() = default;
    explicit Sequencer(OpLog log);

    /// Assigns seq = last + 1 and appends. Resubmitting a seen
    /// (actor, client_seq) returns the originally sequenced op, flagged.
    Sequenced sequence(Operation op);

    const OpLog& log() const noexcept { return log_; }

private:
    OpLog log_;
    std::map<std::pair<ActorId, std::uint64_t>, std::uint64_t> seen_;
};

/// A body that failed on apply; every replica records the same one.
struct NoOpRecord {
    std::uint64_t seq = 0;
    ActorId actor;
    std::uint64_t client_seq = 0;
    ErrorCode code = ErrorCode::UnknownElement;
    std::string diagnostic;

    friend bool operator==(const NoOpRecord&, const NoOpRecord&) = default;
};

/// Result of applying one sequenced op in order.
struct AppliedOp {
    Operation op;
    ApplyOutcome outcome;
};

class Replica {
public:
    Replica() = default;
    explicit Replica(ModelDocument doc);

    const ModelDocument& document() const noexcept { return doc_; }
    std::uint64_t applied_seq() const noexcept { return doc_.version(); }
    std::size_t pending_count() const noexcept { return pending_.size(); }
    const std::vector<NoOpRecord>& noops() const noexcept { return noops_; }

    /// Applies in-order ops (draining the buffer), buffers future ones and
    /// drops ones already applied. Returns the ops applied by this call.
    std::vector<AppliedOp> apply(const Operation& op);

private:
    AppliedOp apply_next(const Operation& op);

    ModelDocument doc_;
    std::map<std::uint64_t, Operation> pending_;
    std::vector<NoOpRecord> noops_;
};

std::string state_digest(const ModelDocument& doc);
inline std::string state_digest(const Replica& r) { return state_digest(r.document()); }

/// Rebuilds a document from a contiguous log. Throws GapInLog.
ModelDocument replay(const std::vector<Operation>& log, ModelDocument start = ModelDocument{});
/// Same, keeping the replica (and its no-op record).
Replica replay_replica(const std::vector<Operation>& log, ModelDocument start = ModelDocument{});

/// Newline-delimited JSON, one sequenced op message per line.
std::string oplog_to_ndjson(const std::vector<Operation>& ops);
std::vector<Operation> oplog_from_ndjson(std::string_view text);

} // namespace modelsync
