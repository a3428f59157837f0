#include "modelsync/materialize.hpp"

namespace modelsync {

Materialization materialize(const RecognitionResult& result, const Stroke& stroke) {
    return std::visit(
        [&](const auto& r) -> Materialization {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, recognition::ClassShape>) {
                return {body::CreateClass{stroke.board, r.bounds}, false};
            } else if constexpr (std::is_same_v<T, recognition::RelationshipLine>) {
                RelationshipSpec spec;
                spec.kind = RelationshipKind::Association;
                spec.source = r.source;
                spec.target = r.target;
                spec.waypoints = r.waypoints;
                return {body::CreateRelationship{std::move(spec)}, true};
            } else {
                return {body::AddStroke{stroke.board, stroke.points, stroke.t_start}, false};
            }
        },
        result);
}

MaterializeOutcome materialize_into(ModelDocument& doc, const RecognitionResult& result,
                                    const Stroke& stroke, const ActorId& actor, Millis now,
                                    std::size_t& syntactic_errors) {
    auto m = materialize(result, stroke);
    MaterializeOutcome out{apply_body(doc, m.body, actor, now), m.needs_kind_picker};
    if (!out.outcome.ok) {
        ++syntactic_errors;
        out.needs_kind_picker = false;
    }
    return out;
}

} // namespace modelsync
