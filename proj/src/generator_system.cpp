#include "circorb/generator_system.hpp"

#include "circorb/error.hpp"

namespace circorb {

std::size_t GeneratorSystem::generator_index(const std::string& gname) const {
  for (std::size_t i = 0; i < generators.size(); ++i)
    if (generators[i].name() == gname) return i;
  throw Error(Errc::UnknownName, "no generator '" + gname + "' in system '" + name + "'");
}

const PiecewiseMap& GeneratorSystem::generator(const std::string& gname) const {
  return generators[generator_index(gname)];
}

bool GeneratorSystem::has_generator(const std::string& gname) const {
  for (const auto& g : generators)
    if (g.name() == gname) return true;
  return false;
}

const Rational& GeneratorSystem::point(const std::string& pname) const {
  for (const auto& p : designated)
    if (p.name == pname) return p.value;
  throw Error(Errc::UnknownName, "no designated point '" + pname + "' in system '" + name + "'");
}

std::vector<Rational> GeneratorSystem::ladder_points() const {
  std::vector<Rational> out;
  out.reserve(ladder.size());
  for (const auto& rung : ladder) out.push_back(point(rung));
  return out;
}

}  // namespace circorb
