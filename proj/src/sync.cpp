#include "modelsync/sync.hpp"

#include "modelsync/snapshot.hpp"

#include <sstream>

namespace modelsync {

void OpLog::append(Operation op) {
    if (!op.seq || *op.seq != last_seq() + 1) {
        throw Error(ErrorCode::GapInLog, "expected seq " + std::to_string(last_seq() + 1) + ", got " +
                                             (op.seq ? std::to_string(*op.seq) : "none"));
    }
    entries_.push_back(std::move(op));
}

std::vector<Operation> OpLog::suffix(std::uint64_t after) const {
    std::vector<Operation> out;
    for (const auto& op : entries_) {
        if (*op.seq > after) {
            out.push_back(op);
        }
    }
    return out;
}

Sequencer::Sequencer(OpLog log) : log_(std::move(log)) {
    for (const auto& op : log_.entries()) {
        seen_.emplace(std::make_pair(op.actor, op.client_seq), *op.seq);
    }
}

Sequenced Sequencer::sequence(Operation op) {
    auto key = std::make_pair(op.actor, op.client_seq);
    if (auto it = seen_.find(key); it != seen_.end()) {
        return {log_.entries()[it->second - log_.base() - 1], true};
    }
    op.seq = log_.last_seq() + 1;
    seen_.emplace(std::move(key), *op.seq);
    log_.append(op);
    return {std::move(op), false};
}

Replica::Replica(ModelDocument doc) : doc_(std::move(doc)) {}

AppliedOp Replica::apply_next(const Operation& op) {
    AppliedOp applied{op, apply_body(doc_, op.body, op.actor, op.issued_at)};
    doc_.set_version(*op.seq);
    if (!applied.outcome.ok) {
        noops_.push_back({*op.seq, op.actor, op.client_seq,
                          applied.outcome.error.value_or(ErrorCode::MalformedMessage),
                          applied.outcome.diagnostic});
    }
    return applied;
}

std::vector<AppliedOp> Replica::apply(const Operation& op) {
    std::vector<AppliedOp> out;
    if (!op.seq || *op.seq <= applied_seq()) {
        return out;
    }
    if (*op.seq > applied_seq() + 1) {
        pending_.emplace(*op.seq, op);
        return out;
    }
    out.push_back(apply_next(op));
    for (auto it = pending_.begin(); it != pending_.end() && it->first == applied_seq() + 1;
         it = pending_.erase(it)) {
        out.push_back(apply_next(it->second));
    }
    // Anything at or below the applied point is a stale duplicate.
    while (!pending_.empty() && pending_.begin()->first <= applied_seq()) {
        pending_.erase(pending_.begin());
    }
    return out;
}

std::string state_digest(const ModelDocument& doc) {
    return sha256_hex(canonical_text(doc));
}

Replica replay_replica(const std::vector<Operation>& log, ModelDocument start) {
    Replica replica(std::move(start));
    for (const auto& op : log) {
        if (!op.seq) {
            throw Error(ErrorCode::GapInLog, "unsequenced op in log");
        }
        if (*op.seq <= replica.applied_seq()) {
            continue;
        }
        if (*op.seq != replica.applied_seq() + 1) {
            throw Error(ErrorCode::GapInLog, "log jumps from " + std::to_string(replica.applied_seq()) +
                                                 " to " + std::to_string(*op.seq));
        }
        replica.apply(op);
    }
    return replica;
}

ModelDocument replay(const std::vector<Operation>& log, ModelDocument start) {
    return replay_replica(log, std::move(start)).document();
}

std::string oplog_to_ndjson(const std::vector<Operation>& ops) {
    std::string out;
    for (const auto& op : ops) {
        out += op_to_json(op).dump();
        out += '\n';
    }
    return out;
}

std::vector<Operation> oplog_from_ndjson(std::string_view text) {
    std::vector<Operation> ops;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string_view::npos) {
            continue;
        }
        try {
            ops.push_back(op_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::MalformedMessage,
                        "oplog line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return ops;
}

} // namespace modelsync
