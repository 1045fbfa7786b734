#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "circorb/action.hpp"
#include "circorb/catalog.hpp"
#include "circorb/classify.hpp"

namespace circorb {

void cmd_example(const ExampleSpec& spec, const std::filesystem::path& out_path);

// Orbit as CSV text: a header, then index,lo,hi,word per point in discovery order.
std::string orbit_csv(const OrbitSample& sample);
std::string cmd_orbit(const std::filesystem::path& system_path, const Rational& point, const OrbitBudget& budget,
                      const OrbitOptions& options);

struct CsvRow {
  long index = 0;
  Enclosure where;
  MapWord word;
};
std::vector<CsvRow> read_orbit_csv(const std::string& text);

// The remaining commands return JSON text.
std::string cmd_classify(const std::filesystem::path& system_path, const Rational& point, const OrbitBudget& budget,
                         const ClassifyParams& params, const OrbitOptions& options, bool budget_double);
std::string cmd_level(const std::filesystem::path& system_path, const Rational& point, const OrbitBudget& budget,
                      const OrbitOptions& options);
std::string cmd_fixed_points(const std::filesystem::path& system_path, const std::string& map_name,
                             const Rational& resolution);
std::string cmd_witness(const std::filesystem::path& system_path, const Rational& resolution);
// z defaults to the system's first ladder point.
std::string cmd_transport(const std::filesystem::path& system_path, long i, long j, const OrbitBudget& budget,
                          const std::optional<Rational>& z, const OrbitOptions& options);
std::string cmd_plot(const std::filesystem::path& orbit_csv_path, const std::filesystem::path& system_path);

// Command-line entry point. Returns 0 on success, 1 on domain errors and 2 on usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace circorb
