#include "circorb/map_word.hpp"

#include <cstdlib>
#include <sstream>

#include "circorb/error.hpp"

namespace circorb {

MapWord MapWord::letter(const std::string& generator, long power) {
  MapWord w;
  w.append(generator, power);
  return w;
}

MapWord MapWord::parse(std::string_view text) {
  MapWord w;
  std::istringstream in{std::string(text)};
  std::string token;
  while (in >> token) {
    if (token == "e") continue;
    long power = 1;
    std::string name = token;
    if (auto caret = token.find('^'); caret != std::string::npos) {
      name = token.substr(0, caret);
      const std::string exponent = token.substr(caret + 1);
      char* end = nullptr;
      power = std::strtol(exponent.c_str(), &end, 10);
      if (exponent.empty() || *end != '\0' || power == 0)
        throw Error(Errc::ParseError, "bad word token '" + token + "'");
    }
    if (name.empty()) throw Error(Errc::ParseError, "bad word token '" + token + "'");
    w.append(name, power);
  }
  return w;
}

std::size_t MapWord::length() const {
  std::size_t n = 0;
  for (const auto& s : syllables_) n += static_cast<std::size_t>(std::labs(s.power));
  return n;
}

bool MapWord::has_inverse_letters() const {
  for (const auto& s : syllables_)
    if (s.power < 0) return true;
  return false;
}

MapWord& MapWord::append(const std::string& generator, long power) {
  if (power == 0) return *this;
  if (!syllables_.empty() && syllables_.back().generator == generator) {
    syllables_.back().power += power;
    if (syllables_.back().power == 0) syllables_.pop_back();
  } else {
    syllables_.push_back({generator, power});
  }
  return *this;
}

MapWord MapWord::then(const MapWord& next) const {
  MapWord out = *this;
  for (const auto& s : next.syllables_) out.append(s.generator, s.power);
  return out;
}

MapWord MapWord::inverse() const {
  MapWord out;
  for (auto it = syllables_.rbegin(); it != syllables_.rend(); ++it) out.append(it->generator, -it->power);
  return out;
}

std::string MapWord::str() const {
  std::string out;
  for (const auto& s : syllables_) {
    const long reps = std::labs(s.power);
    for (long i = 0; i < reps; ++i) {
      if (!out.empty()) out += ' ';
      out += s.generator;
      if (s.power < 0) out += "^-1";
    }
  }
  return out;
}

std::string MapWord::compact() const {
  std::string out;
  for (const auto& s : syllables_) {
    if (!out.empty()) out += ' ';
    out += s.generator;
    if (s.power != 1) out += "^" + std::to_string(s.power);
  }
  return out;
}

}  // namespace circorb
