#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace fallacy {

enum class Label : std::uint8_t { none = 0, adhominem = 1 };

inline std::string_view to_string(Label l) { return l == Label::adhominem ? "adhominem" : "none"; }

inline std::optional<Label> parse_label(std::string_view s) {
  if (s == "adhominem") return Label::adhominem;
  if (s == "none") return Label::none;
  return std::nullopt;
}

}  // namespace fallacy
