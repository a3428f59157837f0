#pragma once

#include "modelsync/operation.hpp"
#include "modelsync/recognizer.hpp"

namespace modelsync {

/// A recognized stroke turned into the edit that realizes it.
struct Materialization {
    OpBody body;
    // Set for relationship lines: the kind picker should open so the user can
    // replace the default association.
    bool needs_kind_picker = false;
};

/// ClassShape -> create_class; RelationshipLine -> association;
/// InformalSketch -> the stroke stored verbatim.
Materialization materialize(const RecognitionResult& result, const Stroke& stroke);

/// Applies a materialization locally. Rejections count as syntactic errors.
struct MaterializeOutcome {
    ApplyOutcome outcome;
    bool needs_kind_picker = false;
};

MaterializeOutcome materialize_into(ModelDocument& doc, const RecognitionResult& result,
                                    const Stroke& stroke, const ActorId& actor, Millis now,
                                    std::size_t& syntactic_errors);

} // namespace modelsync
