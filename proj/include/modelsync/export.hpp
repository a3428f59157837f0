#pragma once

#include "modelsync/model.hpp"

#include <string>

namespace modelsync {

/// PlantUML class diagram. Classes are aliased by element id so duplicate
/// names stay distinct; inheritance renders as `Parent <|-- Child`.
std::string to_plantuml(const ModelDocument& doc);

} // namespace modelsync
