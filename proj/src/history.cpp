#include "modelsync/history.hpp"

#include <algorithm>
#include <tuple>
#include <cmath>
#include <cstdlib>
#include <set>
#include <string>

namespace modelsync {

namespace {

Rgb hsv_to_rgb(double hue_deg, double s, double v) {
    const double c = v * s;
    const double hp = std::fmod(hue_deg, 360.0) / 60.0;
    const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1) { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else { r = c; b = x; }
    const double m = v - c;
    auto to8 = [](double f) { return static_cast<int>(std::lround(f * 255.0)); };
    return {to8(r + m), to8(g + m), to8(b + m)};
}

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

std::vector<Rgb> default_palette() {
    // Bit-reversed hue order over 16 steps of 22.5 degrees, starting at blue.
    // Odd steps use a darker value so neighbours stay distinguishable.
    static constexpr int kOrder[kPaletteSize] = {0, 8, 4, 12, 2, 10, 6, 14,
                                                 1, 9, 5, 13, 3, 11, 7, 15};
    std::vector<Rgb> out;
    out.reserve(kPaletteSize);
    for (int step : kOrder) {
        const double hue = 215.0 + step * 22.5;
        out.push_back(hsv_to_rgb(hue, 0.85, step % 2 == 0 ? 1.0 : 0.8));
    }
    return out;
}

std::vector<Rgb> parse_palette(std::string_view text) {
    std::vector<Rgb> out;
    std::set<std::tuple<int, int, int>> seen;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        auto token = text.substr(pos, comma == std::string_view::npos ? text.size() - pos : comma - pos);
        while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
        while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
        if (!token.empty() && token.front() == '#') token.remove_prefix(1);
        if (token.size() != 6) {
            throw Error(ErrorCode::InvalidConfig, "palette entry '" + std::string(token) + "' is not rrggbb");
        }
        int ch[3];
        for (int i = 0; i < 3; ++i) {
            const int hi = hex_digit(token[2 * i]);
            const int lo = hex_digit(token[2 * i + 1]);
            if (hi < 0 || lo < 0) {
                throw Error(ErrorCode::InvalidConfig, "palette entry has non-hex digits");
            }
            ch[i] = hi * 16 + lo;
        }
        Rgb c{ch[0], ch[1], ch[2]};
        if (c == Rgb{0, 0, 0}) {
            throw Error(ErrorCode::InvalidConfig, "black is reserved for faded traces");
        }
        if (!seen.insert({c.r, c.g, c.b}).second) {
            throw Error(ErrorCode::InvalidConfig, "palette colors must be distinct");
        }
        out.push_back(c);
        if (comma == std::string_view::npos) {
            break;
        }
        pos = comma + 1;
    }
    if (out.empty()) {
        throw Error(ErrorCode::InvalidConfig, "empty palette");
    }
    return out;
}

std::vector<Rgb> palette_from_environment() {
    const char* env = std::getenv("MODELSYNC_PALETTE");
    if (env == nullptr || *env == '\0') {
        return default_palette();
    }
    return parse_palette(env);
}

PaletteAssigner::PaletteAssigner(std::vector<Rgb> colors)
    : colors_(std::move(colors)), owner_(colors_.size()) {}

Rgb PaletteAssigner::assign(const ActorId& actor) {
    if (auto it = held_.find(actor); it != held_.end()) {
        return colors_[it->second];
    }
    // A returning actor gets its old color back if nobody took it.
    if (auto it = released_.find(actor); it != released_.end()) {
        const auto slot = it->second;
        released_.erase(it);
        if (!owner_[slot] || *owner_[slot] == actor) {
            owner_[slot] = actor;
            held_[actor] = slot;
            return colors_[slot];
        }
    }
    auto claimed_by_released = [&](std::size_t slot) {
        return std::any_of(released_.begin(), released_.end(),
                           [&](const auto& kv) { return kv.second == slot; });
    };
    std::optional<std::size_t> pick;
    for (std::size_t i = 0; i < colors_.size() && !pick; ++i) {
        if (!owner_[i] && !claimed_by_released(i)) {
            pick = i;
        }
    }
    for (std::size_t i = 0; i < colors_.size() && !pick; ++i) {
        if (!owner_[i]) {
            pick = i;
        }
    }
    if (!pick) {
        throw Error(ErrorCode::PaletteExhausted,
                    "all " + std::to_string(colors_.size()) + " colors are in use");
    }
    for (auto it = released_.begin(); it != released_.end();) {
        it = it->second == *pick ? released_.erase(it) : std::next(it);
    }
    owner_[*pick] = actor;
    held_[actor] = *pick;
    return colors_[*pick];
}

void PaletteAssigner::release(const ActorId& actor) {
    auto it = held_.find(actor);
    if (it == held_.end()) {
        return;
    }
    owner_[it->second].reset();
    released_[actor] = it->second;
    held_.erase(it);
}

std::optional<Rgb> PaletteAssigner::color_of(const ActorId& actor) const {
    if (auto it = held_.find(actor); it != held_.end()) {
        return colors_[it->second];
    }
    return std::nullopt;
}

Rgb fade_color(Rgb editor, Millis last_edit, Millis now, Millis fade) {
    if (fade <= 0) {
        return now >= last_edit ? Rgb{} : editor;
    }
    const Millis elapsed = std::clamp<Millis>(now - last_edit, 0, fade);
    const Millis remaining = fade - elapsed;
    // round(c * remaining / fade) with halves rounded up, in integers.
    auto channel = [&](int c) {
        return static_cast<int>((2 * static_cast<Millis>(c) * remaining + fade) / (2 * fade));
    };
    return {channel(editor.r), channel(editor.g), channel(editor.b)};
}

Rgb trace_color(const ClassElement& element, const std::map<ActorId, Rgb>& colors, Millis now,
                Millis fade) {
    if (!element.last_editor) {
        return {};
    }
    auto it = colors.find(*element.last_editor);
    if (it == colors.end()) {
        return {};
    }
    return fade_color(it->second, element.last_edit_time, now, fade);
}

std::vector<HistoryEntry> history_query(const ModelDocument& doc, const HistoryFilter& filter) {
    std::vector<HistoryEntry> out;
    for (const auto& h : doc.history()) {
        if (filter.actor && h.actor != *filter.actor) continue;
        if (filter.element && h.element_id != *filter.element) continue;
        if (filter.from && h.timestamp < *filter.from) continue;
        if (filter.to && h.timestamp > *filter.to) continue;
        out.push_back(h);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const HistoryEntry& a, const HistoryEntry& b) { return a.timestamp < b.timestamp; });
    return out;
}

} // namespace modelsync
