#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace circorb {

// One run of a single generator: power > 0 applies it that many times,
// power < 0 applies its inverse.
struct Syllable {
  std::string generator;
  long power = 1;

  bool operator==(const Syllable&) const = default;
};

// A freely reduced word, stored run-length encoded. Syllables are listed in
// application order: the first syllable acts on the point first.
class MapWord {
 public:
  MapWord() = default;

  static MapWord letter(const std::string& generator, long power = 1);

  // Accepts space-separated tokens "name", "name^-1", "name^k"; "" and "e" are the identity.
  static MapWord parse(std::string_view text);

  const std::vector<Syllable>& syllables() const { return syllables_; }
  bool empty() const { return syllables_.empty(); }
  std::size_t length() const;
  bool has_inverse_letters() const;

  // Appends generator^power on the acting end, cancelling against the last syllable.
  MapWord& append(const std::string& generator, long power);

  // The word that applies *this first and then next.
  MapWord then(const MapWord& next) const;
  MapWord inverse() const;

  // Letters written out one by one ("g f^-1 g").
  std::string str() const;
  // Runs collapsed ("g^3 f^-1").
  std::string compact() const;

  bool operator==(const MapWord&) const = default;

 private:
  std::vector<Syllable> syllables_;
};

}  // namespace circorb
