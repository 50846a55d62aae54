#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace kvn {

// The nine hybrid generators. Enumeration order is the canonical normal-order
// rank: q < p < S1 < S2 < S3 < a < b < at < bt.
enum class Gen : std::uint8_t {
  QHat = 0,
  PHat,
  S1,
  S2,
  S3,
  A,
  B,
  ATilde,
  BTilde,
};

inline constexpr int kGenCount = 9;

constexpr int rank(Gen g) { return static_cast<int>(g); }

constexpr std::array<Gen, kGenCount> all_generators() {
  return {Gen::QHat, Gen::PHat, Gen::S1, Gen::S2, Gen::S3,
          Gen::A,    Gen::B,    Gen::ATilde, Gen::BTilde};
}

constexpr std::string_view gen_name(Gen g) {
  switch (g) {
    case Gen::QHat:   return "q";
    case Gen::PHat:   return "p";
    case Gen::S1:     return "S1";
    case Gen::S2:     return "S2";
    case Gen::S3:     return "S3";
    case Gen::A:      return "a";
    case Gen::B:      return "b";
    case Gen::ATilde: return "at";
    case Gen::BTilde: return "bt";
  }
  return "?";
}

inline std::optional<Gen> parse_gen(std::string_view s) {
  for (Gen g : all_generators())
    if (gen_name(g) == s) return g;
  return std::nullopt;
}

constexpr bool is_spin(Gen g) { return g == Gen::S1 || g == Gen::S2 || g == Gen::S3; }
constexpr bool is_canonical_quantum(Gen g) { return g == Gen::QHat || g == Gen::PHat; }
constexpr bool is_quantum(Gen g) { return is_spin(g) || is_canonical_quantum(g); }
constexpr bool is_classical(Gen g) {
  return g == Gen::A || g == Gen::B || g == Gen::ATilde || g == Gen::BTilde;
}
constexpr bool is_tilde(Gen g) { return g == Gen::ATilde || g == Gen::BTilde; }
constexpr bool is_classical_plain(Gen g) { return g == Gen::A || g == Gen::B; }

}  // namespace kvn
