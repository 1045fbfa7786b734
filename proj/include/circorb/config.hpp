#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "circorb/generator_system.hpp"

namespace circorb {

// JSON text for a system. Rationals are written as "p/q" strings, so the text
// round-trips exactly.
std::string write_system(const GeneratorSystem& system);

// Throws ParseError with the JSON pointer of the offending value (or the byte
// offset for syntax errors). Generators must be usable unless the document sets
// "allow_unusable": true, which write_system emits for systems that contain
// unusable maps.
GeneratorSystem read_system(std::string_view text);

GeneratorSystem load_system(const std::filesystem::path& path);
void save_system(const GeneratorSystem& system, const std::filesystem::path& path);

// Structural equality with exact comparison of every rational field.
bool same_system(const GeneratorSystem& a, const GeneratorSystem& b);

}  // namespace circorb
