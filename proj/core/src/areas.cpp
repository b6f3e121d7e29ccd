#include "tutor/areas.hpp"

#include <cctype>

namespace tutor {
namespace {

std::string fold(std::string_view name) {
  std::string out;
  for (std::size_t i = 0; i < name.size(); ++i) {
    const auto c = static_cast<unsigned char>(name[i]);
    if (c == ' ' || c == '-' || c == '_' || c == '\t') continue;
    // en dash, em dash, non-breaking hyphen, minus sign
    if (c == 0xE2 && i + 2 < name.size()) {
      const auto c1 = static_cast<unsigned char>(name[i + 1]);
      const auto c2 = static_cast<unsigned char>(name[i + 2]);
      if ((c1 == 0x80 && (c2 == 0x90 || c2 == 0x91 || c2 == 0x93 || c2 == 0x94)) || (c1 == 0x88 && c2 == 0x92)) {
        i += 2;
        continue;
      }
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

}  // namespace

std::optional<std::string> canonical_area(std::string_view name) {
  const auto key = fold(name);
  if (key.empty()) return std::nullopt;
  for (auto area : kAreaTaxonomy) {
    if (fold(area) == key) return std::string(area);
  }
  return std::nullopt;
}

std::size_t area_rank(std::string_view canonical) {
  for (std::size_t i = 0; i < kAreaTaxonomy.size(); ++i) {
    if (kAreaTaxonomy[i] == canonical) return i;
  }
  return kAreaTaxonomy.size();
}

}  // namespace tutor
