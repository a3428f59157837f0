#pragma once

#include "modelsync/model.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

namespace modelsync {

inline constexpr Millis kDefaultFadeMillis = 300'000;
inline constexpr std::size_t kPaletteSize = 16;

/// The default 16 hues, ordered so that each new joiner gets the hue
/// farthest from all earlier ones.
std::vector<Rgb> default_palette();

/// Parses "#rrggbb,#rrggbb,..." (leading '#' optional). Rejects black and
/// duplicates.
std::vector<Rgb> parse_palette(std::string_view text);

/// Default palette unless MODELSYNC_PALETTE is set.
std::vector<Rgb> palette_from_environment();

/// Injective actor -> color assignment in join order.
class PaletteAssigner {
public:
    explicit PaletteAssigner(std::vector<Rgb> colors = default_palette());

    /// Returns the actor's color, assigning the next free one on first sight.
    /// Throws PaletteExhausted when every color is taken.
    Rgb assign(const ActorId& actor);
    /// Frees the actor's color for reuse; the actor keeps a claim until
    /// someone else takes it.
    void release(const ActorId& actor);

    std::optional<Rgb> color_of(const ActorId& actor) const;
    std::size_t capacity() const noexcept { return colors_.size(); }
    const std::vector<Rgb>& colors() const noexcept { return colors_; }

private:
    std::vector<Rgb> colors_;
    std::map<ActorId, std::size_t> held_;
    std::map<ActorId, std::size_t> released_;
    std::vector<std::optional<ActorId>> owner_;
};

/// Linear fade of the editor's color to black over `fade` milliseconds,
/// rounding half up per channel. Never-edited elements are black.
Rgb fade_color(Rgb editor, Millis last_edit, Millis now, Millis fade = kDefaultFadeMillis);

Rgb trace_color(const ClassElement& element, const std::map<ActorId, Rgb>& colors, Millis now,
                Millis fade = kDefaultFadeMillis);

struct HistoryFilter {
    std::optional<ActorId> actor;
    std::optional<ElementId> element;
    std::optional<Millis> from; // inclusive
    std::optional<Millis> to;   // inclusive
};

/// Matching entries in timestamp order; ties keep append order.
std::vector<HistoryEntry> history_query(const ModelDocument& doc, const HistoryFilter& filter);

} // namespace modelsync
