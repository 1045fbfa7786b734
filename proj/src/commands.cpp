#include "circorb/commands.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "circorb/config.hpp"
#include "circorb/error.hpp"
#include "circorb/homeo.hpp"
#include "circorb/svg.hpp"

namespace circorb {

namespace {

using ojson = nlohmann::ordered_json;

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::ParseError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::ParseError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::ParseError, "failed writing " + path.string());
}

ojson enclosure_json(const Enclosure& e) { return ojson::array({to_string(e.lo), to_string(e.hi)}); }

ojson budget_json(const OrbitBudget& b) { return {{"max_word_len", b.max_word_len}, {"max_points", b.max_points}}; }

std::string fixed_kind_name(FixedKind k) {
  switch (k) {
    case FixedKind::Certified: return "certified";
    case FixedKind::Possible: return "possible";
    case FixedKind::Interval: return "interval";
  }
  return "possible";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void cmd_example(const ExampleSpec& spec, const std::filesystem::path& out_path) {
  save_system(build_example(spec), out_path);
}

std::string orbit_csv(const OrbitSample& sample) {
  std::ostringstream out;
  out << "index,lo,hi,word\n";
  for (std::size_t i = 0; i < sample.points.size(); ++i) {
    const OrbitPoint& p = sample.points[i];
    out << i << ',' << to_string(p.where.lo) << ',' << to_string(p.where.hi) << ',' << p.word.str() << '\n';
  }
  return out.str();
}

std::string cmd_orbit(const std::filesystem::path& system_path, const Rational& point, const OrbitBudget& budget,
                      const OrbitOptions& options) {
  return orbit_csv(orbit(load_system(system_path), point, budget, options));
}

std::vector<CsvRow> read_orbit_csv(const std::string& text) {
  std::vector<CsvRow> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("index", 0) == 0) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 4) throw Error(Errc::ParseError, "orbit CSV line " + std::to_string(line_no) + ": expected 4 fields");
    try {
      CsvRow r;
      r.index = std::stol(fields[0]);
      r.where = Enclosure(parse_rational(fields[1]), parse_rational(fields[2]));
      r.word = MapWord::parse(fields[3]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw Error(Errc::ParseError, "orbit CSV line " + std::to_string(line_no) + ": bad index");
    } catch (const Error& e) {
      throw Error(Errc::ParseError, "orbit CSV line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

std::string cmd_classify(const std::filesystem::path& system_path, const Rational& point, const OrbitBudget& budget,
                         const ClassifyParams& params, const OrbitOptions& options, bool budget_double) {
  const GeneratorSystem system = load_system(system_path);
  const Classification c = classify_orbit(system, point, budget, params, options, budget_double);
  const Evidence& ev = c.evidence;
  ojson evidence = {{"max_gap_in_range", to_double(ev.max_gap_in_range)},
                    {"isolated_point_fraction", ev.isolated_point_fraction},
                    {"accumulation_set_summary", ev.accumulation_set_summary},
                    {"budget", budget_json(ev.budget)},
                    {"points", ev.points},
                    {"points_in_range", ev.points_in_range},
                    {"max_word_len_used", ev.max_word_len_used},
                    {"cluster_counts", ev.cluster_counts}};
  evidence["survived_doubling"] = ev.survived_doubling ? ojson(*ev.survived_doubling) : ojson(nullptr);
  ojson j = {{"system", system.name}, {"point", to_string(point)}, {"verdict", verdict_name(c.verdict)}};
  j["level"] = c.level ? ojson(*c.level) : ojson(nullptr);
  j["reason"] = c.reason;
  j["evidence"] = evidence;
  return dump(j);
}

std::string cmd_level(const std::filesystem::path& system_path, const Rational& point, const OrbitBudget& budget,
                      const OrbitOptions& options) {
  const GeneratorSystem system = load_system(system_path);
  const LevelEstimate le = estimate_level(system, point, budget, {}, options);
  ojson rungs = ojson::array();
  for (const auto& r : le.rungs) {
    ojson e = {{"name", r.name},         {"point", to_string(r.point)}, {"level", r.level},
               {"contains_x", r.contains_x}, {"accumulates", r.accumulates}, {"disjoint", r.disjoint}};
    e["closest_approach"] = r.closest_approach ? ojson(to_double(*r.closest_approach)) : ojson(nullptr);
    e["sample_points"] = r.sample_points;
    rungs.push_back(std::move(e));
  }
  return dump({{"system", system.name}, {"point", to_string(point)}, {"level", le.level}, {"rungs", rungs}});
}

std::string cmd_fixed_points(const std::filesystem::path& system_path, const std::string& map_name,
                             const Rational& resolution) {
  const GeneratorSystem system = load_system(system_path);
  if (!system.has_generator(map_name)) throw Error(Errc::UnknownName, "no generator named '" + map_name + "'");
  ojson list = ojson::array();
  for (const auto& f : fixed_point_enclosures(system.generator(map_name), resolution))
    list.push_back({{"where", enclosure_json(f.where)}, {"kind", fixed_kind_name(f.kind)}});
  return dump({{"system", system.name}, {"map", map_name}, {"resolution", to_string(resolution)}, {"fixed_points", list}});
}

std::string cmd_witness(const std::filesystem::path& system_path, const Rational& resolution) {
  const GeneratorSystem system = load_system(system_path);
  const WitnessInterval w = witness_interval(system, resolution);
  ojson certs = ojson::array();
  for (const auto& c : w.certificates)
    certs.push_back({{"generator", c.generator}, {"image", enclosure_json(c.image)}, {"overlaps", c.overlaps}});
  return dump({{"system", system.name},
               {"interval", ojson::array({to_string(w.a), to_string(w.b)})},
               {"condition", condition_name(w.condition)},
               {"generator", w.generator},
               {"c2_also_holds", w.c2_also_holds},
               {"certificates", certs},
               {"verified", verify_witness(system, w)},
               {"notes", w.notes}});
}

std::string cmd_transport(const std::filesystem::path& system_path, long i, long j, const OrbitBudget& budget,
                          const std::optional<Rational>& z, const OrbitOptions& options) {
  const GeneratorSystem system = load_system(system_path);
  Rational base;
  if (z) {
    base = *z;
  } else {
    if (system.ladder.empty()) throw Error(Errc::BadParams, "the system has no ladder point; pass --point");
    base = system.point(system.ladder.front());
  }
  const OrbitSample sample = orbit(system, base, budget, options);
  const MapWord w = transport_word(system, sample, i, j, options);
  return dump({{"system", system.name},
               {"z", to_string(base)},
               {"i", i},
               {"j", j},
               {"word", w.str()},
               {"compact", w.compact()}});
}

std::string cmd_plot(const std::filesystem::path& orbit_csv_path, const std::filesystem::path& system_path) {
  const GeneratorSystem system = load_system(system_path);
  std::vector<Rational> points;
  for (const auto& r : read_orbit_csv(read_file(orbit_csv_path))) points.push_back(r.where.mid());
  return render_svg(system, points);
}

// Command line ---------------------------------------------------------------

namespace {

Rational flag_rational(const std::string& name, const std::string& text) {
  try {
    return parse_rational(text);
  } catch (const Error&) {
    throw CLI::ValidationError(name, "not a rational: " + text);
  }
}

struct Flags {
  std::string system;
  std::string point;
  std::size_t max_word_len = OrbitBudget{}.max_word_len;
  std::size_t max_points = OrbitBudget{}.max_points;
  std::string prec;
  std::string dedup_tol;
  std::string out;
  bool as_printed = false;
  bool budget_double = false;
  std::string resolution = "1/1073741824";
  std::string map;
  std::string orbit_csv;
  std::string name;
  std::vector<std::string> params;
  long i = 0;
  long j = 0;
  std::string eps_dense, min_points, edge_margin, isolation_radius;

  OrbitBudget budget() const { return {max_word_len, max_points}; }

  OrbitOptions options() const {
    OrbitOptions o;
    if (!prec.empty()) o.prec = flag_rational("--prec", prec);
    if (!dedup_tol.empty()) o.dedup_tol = flag_rational("--dedup-tol", dedup_tol);
    if (o.prec <= 0 || o.dedup_tol <= 0) throw CLI::ValidationError("--prec/--dedup-tol", "must be positive");
    return o;
  }
};

void emit(const Flags& f, const std::string& text, std::ostream& out) {
  if (f.out.empty()) {
    out << text;
  } else {
    write_file(f.out, text);
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Orbit explorer for groups of piecewise maps of the interval, circle and line", "circorb"};
  app.require_subcommand(1);
  Flags f;

  auto add_system = [&](CLI::App* sub) { sub->add_option("--system", f.system, "system config (JSON)")->required()->check(CLI::ExistingFile); };
  auto add_point = [&](CLI::App* sub, bool required) {
    auto* o = sub->add_option("--point", f.point, "base point, a rational such as 1/2");
    if (required) o->required();
  };
  auto add_budget = [&](CLI::App* sub) {
    sub->add_option("--max-word-len", f.max_word_len, "longest word explored")->capture_default_str();
    sub->add_option("--max-points", f.max_points, "largest sample kept")->capture_default_str();
    sub->add_option("--prec", f.prec, "evaluation precision (rational)");
    sub->add_option("--dedup-tol", f.dedup_tol, "distance below which points are identified (rational)");
  };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", f.out, "output file (default: standard output)"); };

  auto* example = app.add_subcommand("example", "write a catalog system as a config file");
  example->add_option("name", f.name, "catalog name")->required();
  example->add_option("--param", f.params, "parameter override KEY=VALUE (repeatable)");
  example->add_flag("--as-printed", f.as_printed, "semigroup: keep the formulas exactly as printed");
  add_out(example);
  auto* list = app.add_subcommand("list", "list catalog systems");

  auto* orb = app.add_subcommand("orbit", "breadth-first orbit sample as CSV");
  add_system(orb);
  add_point(orb, true);
  add_budget(orb);
  add_out(orb);

  auto* cls = app.add_subcommand("classify", "classify the orbit of a point");
  add_system(cls);
  add_point(cls, true);
  add_budget(cls);
  add_out(cls);
  cls->add_flag("--budget-double", f.budget_double, "repeat with both budgets doubled and report stability");
  cls->add_option("--eps-dense", f.eps_dense, "largest gap for Dense, relative to component length");
  cls->add_option("--min-points", f.min_points, "smallest sample for a Dense or Cantor verdict");
  cls->add_option("--edge-margin", f.edge_margin, "excluded margin at component ends, relative");
  cls->add_option("--isolation-radius", f.isolation_radius, "radius for isolated points");

  auto* lvl = app.add_subcommand("level", "estimate the level of an orbit against the system's ladder");
  add_system(lvl);
  add_point(lvl, true);
  add_budget(lvl);
  add_out(lvl);

  auto* fix = app.add_subcommand("fixed-points", "fixed-point enclosures of one generator");
  add_system(fix);
  fix->add_option("--map", f.map, "generator name")->required();
  fix->add_option("--resolution", f.resolution, "enclosure width (rational)")->capture_default_str();
  add_out(fix);

  auto* wit = app.add_subcommand("witness", "find and certify a witness interval");
  add_system(wit);
  wit->add_option("--resolution", f.resolution, "search resolution (rational)")->capture_default_str();
  add_out(wit);

  auto* tr = app.add_subcommand("transport", "word carrying interval I_i onto I_j of a labeled orbit");
  add_system(tr);
  add_point(tr, false);
  tr->add_option("--i", f.i, "source label")->required();
  tr->add_option("--j", f.j, "target label")->required();
  add_budget(tr);
  add_out(tr);

  auto* plot = app.add_subcommand("plot", "render generator graphs and orbit points as SVG");
  add_system(plot);
  plot->add_option("--orbit", f.orbit_csv, "orbit CSV")->required()->check(CLI::ExistingFile);
  add_out(plot);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*list) {
      for (const auto& n : catalog_names()) out << n << '\n';
    } else if (*example) {
      ExampleSpec spec{f.name, {}, f.as_printed};
      for (const auto& kv : f.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw CLI::ValidationError("--param", "expected KEY=VALUE: " + kv);
        spec.params[kv.substr(0, eq)] = kv.substr(eq + 1);
      }
      const GeneratorSystem s = build_example(spec);
      emit(f, write_system(s), out);
    } else if (*orb) {
      emit(f, cmd_orbit(f.system, flag_rational("--point", f.point), f.budget(), f.options()), out);
    } else if (*cls) {
      ClassifyParams params;
      if (!f.eps_dense.empty()) params.eps_dense = flag_rational("--eps-dense", f.eps_dense);
      if (!f.edge_margin.empty()) params.edge_margin = flag_rational("--edge-margin", f.edge_margin);
      if (!f.isolation_radius.empty()) params.isolation_radius = flag_rational("--isolation-radius", f.isolation_radius);
      if (!f.min_points.empty()) {
        const Rational m = flag_rational("--min-points", f.min_points);
        if (m.get_den() != 1 || m <= 0) throw CLI::ValidationError("--min-points", "must be a positive integer");
        params.min_points = m.get_num().get_ui();
      }
      emit(f,
           cmd_classify(f.system, flag_rational("--point", f.point), f.budget(), params, f.options(), f.budget_double),
           out);
    } else if (*lvl) {
      emit(f, cmd_level(f.system, flag_rational("--point", f.point), f.budget(), f.options()), out);
    } else if (*fix) {
      const Rational res = flag_rational("--resolution", f.resolution);
      if (res <= 0) throw CLI::ValidationError("--resolution", "must be positive");
      emit(f, cmd_fixed_points(f.system, f.map, res), out);
    } else if (*wit) {
      const Rational res = flag_rational("--resolution", f.resolution);
      if (res <= 0) throw CLI::ValidationError("--resolution", "must be positive");
      emit(f, cmd_witness(f.system, res), out);
    } else if (*tr) {
      std::optional<Rational> z;
      if (!f.point.empty()) z = flag_rational("--point", f.point);
      emit(f, cmd_transport(f.system, f.i, f.j, f.budget(), z, f.options()), out);
    } else if (*plot) {
      emit(f, cmd_plot(f.orbit_csv, f.system), out);
    }
  } catch (const CLI::Error& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    const bool usage = e.code() == Errc::UnknownName || e.code() == Errc::BadParams || e.code() == Errc::ParseError;
    return usage ? 2 : 1;
  }
  return 0;
}

}  // namespace circorb
