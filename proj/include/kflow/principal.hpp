#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace kflow {

enum class PrincipalKind { Honest, Adversary, Primitive };

std::string_view kind_name(PrincipalKind k);
bool kind_from_name(std::string_view s, PrincipalKind& out);

// Principals are identified by name; the kind is descriptive.
struct Principal {
  std::string name;
  PrincipalKind kind = PrincipalKind::Honest;

  friend bool operator==(const Principal& a, const Principal& b) { return a.name == b.name; }
  friend auto operator<=>(const Principal& a, const Principal& b) { return a.name <=> b.name; }
};

// Name of the single merged adversary.
inline constexpr std::string_view kOscar = "o";

}  // namespace kflow
