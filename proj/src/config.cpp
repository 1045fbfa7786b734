#include "circorb/config.hpp"

#include <climits>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "circorb/cantor.hpp"
#include "circorb/error.hpp"
#include "circorb/rules.hpp"

namespace circorb {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json q(const Rational& r) { return to_string(r); }

json opt_q(const std::optional<Rational>& r) { return r ? q(*r) : json(nullptr); }

json segment_json(const AffineSegment& s) {
  return {{"lo", opt_q(s.lo)}, {"hi", opt_q(s.hi)}, {"slope", q(s.slope)}, {"offset", q(s.offset)}};
}

json rule_json(const RulePtr& rule);
json map_json(const PiecewiseMap& map);

json family_json(const PsiFamily& family) {
  if (const auto* list = dynamic_cast<const ListFamily*>(&family)) {
    json maps = json::array();
    for (const auto& m : list->maps()) maps.push_back(rule_json(m));
    return {{"kind", "list"}, {"first", list->first()}, {"maps", maps}, {"fallback", rule_json(list->fallback())}};
  }
  if (const auto* quad = dynamic_cast<const QuadSplitFamily*>(&family)) {
    return {{"kind", "quad-split"},
            {"k_lo", q(quad->k_lo())},
            {"k_hi", q(quad->k_hi())},
            {"d_hi", q(quad->d_hi())},
            {"offset", quad->offset()}};
  }
  throw Error(Errc::BadParams, "psi family '" + family.kind() + "' cannot be written");
}

// Rule fields without the interval; null means the identity.
json rule_json(const RulePtr& rule) {
  if (!rule) return nullptr;
  if (const auto* seg = dynamic_cast<const SegmentRule*>(rule.get())) {
    if (const auto& origin = seg->origin()) {
      json pins = json::array();
      for (const auto& [from, to] : origin->pins) pins.push_back(json::array({from.str(), to.str()}));
      return {{"kind", "cantor-split"},
              {"source", json::array({q(origin->source_lo), q(origin->source_hi)})},
              {"target", json::array({q(origin->target_lo), q(origin->target_hi)})},
              {"pins", pins}};
    }
    json segs = json::array();
    for (const auto& s : seg->segments()) segs.push_back(segment_json(s));
    return {{"kind", "segments"}, {"segments", segs}};
  }
  if (const auto* conj = dynamic_cast<const ConjugationRule*>(rule.get())) {
    const ConjugationSpec& s = conj->spec();
    return {{"kind", "conjugation"},  {"phi", map_json(s.phi)},     {"d0", q(s.d0)}, {"shift", s.shift},
            {"psi", family_json(*s.psi)}, {"range_lo", opt_q(s.lo)}, {"range_hi", opt_q(s.hi)}};
  }
  throw Error(Errc::BadParams, "rule kind '" + rule->kind() + "' cannot be written");
}

json piece_json(const Piece& p) {
  json out;
  if (const auto* a = std::get_if<AffineForm>(&p.form)) {
    out = {{"kind", "affine"}, {"slope", q(a->slope)}, {"offset", q(a->offset)}};
  } else if (const auto* w = std::get_if<PowerForm>(&p.form)) {
    out = {{"kind", "power"}, {"c", q(w->c)}, {"a", q(w->a)}, {"b", q(w->b)}, {"e", q(w->e)}, {"s", q(w->s)}};
  } else {
    out = rule_json(std::get<RulePtr>(p.form));
  }
  out["lo"] = opt_q(p.lo);
  out["hi"] = opt_q(p.hi);
  return out;
}

json map_json(const PiecewiseMap& map) {
  json pieces = json::array();
  for (const auto& p : map.pieces()) pieces.push_back(piece_json(p));
  return {{"name", map.name()}, {"domain", domain_kind_name(map.domain_kind())}, {"pieces", pieces}};
}

// Reading ------------------------------------------------------------------

class Reader {
 public:
  explicit Reader(const json& root) : root_(root) {}

  [[noreturn]] void fail(const json::json_pointer& at, const std::string& what) const {
    throw Error(Errc::ParseError, "at " + (at.empty() ? std::string("/") : at.to_string()) + ": " + what);
  }

  const json& node(const json::json_pointer& at) const {
    if (!root_.contains(at)) fail(at, "missing value");
    return root_.at(at);
  }

  const json& field(const json::json_pointer& at, const std::string& key) const {
    const json& v = node(at);
    if (!v.is_object()) fail(at, "expected an object");
    if (!v.contains(key)) fail(at, "missing field '" + key + "'");
    return v.at(key);
  }

  Rational rational(const json::json_pointer& at) const {
    const json& v = node(at);
    if (v.is_number_integer()) return Rational(std::to_string(v.get<long long>()));
    if (!v.is_string()) fail(at, "expected a rational string such as \"1/3\"");
    try {
      return parse_rational(v.get<std::string>());
    } catch (const Error& e) {
      fail(at, e.what());
    }
  }

  std::optional<Rational> opt_rational(const json::json_pointer& at) const {
    if (!root_.contains(at) || root_.at(at).is_null()) return std::nullopt;
    return rational(at);
  }

  long integer(const json::json_pointer& at) const {
    const json& v = node(at);
    if (!v.is_number_integer()) fail(at, "expected an integer");
    if (v.is_number_unsigned() ? v.get<unsigned long long>() > static_cast<unsigned long long>(LONG_MAX)
                               : false)
      fail(at, "integer out of range");
    return v.get<long>();
  }

  std::string text(const json::json_pointer& at) const {
    const json& v = node(at);
    if (!v.is_string()) fail(at, "expected a string");
    return v.get<std::string>();
  }

  std::size_t array_size(const json::json_pointer& at) const {
    if (!root_.contains(at) || !root_.at(at).is_array()) fail(at, "expected an array");
    return root_.at(at).size();
  }

  bool has(const json::json_pointer& at) const { return root_.contains(at) && !root_.at(at).is_null(); }

  AffineSegment segment(const json::json_pointer& at) const {
    field(at, "slope");
    field(at, "offset");
    return {opt_rational(at / "lo"), opt_rational(at / "hi"), rational(at / "slope"), rational(at / "offset")};
  }

  CantorAddress address(const json::json_pointer& at) const {
    try {
      return CantorAddress::parse(text(at));
    } catch (const Error& e) {
      fail(at, e.what());
    }
  }

  PsiFamilyPtr family(const json::json_pointer& at) const {
    const std::string kind = text(at / "kind");
    if (kind == "list") {
      std::vector<RulePtr> maps;
      const auto n = array_size(at / "maps");
      for (std::size_t i = 0; i < n; ++i) maps.push_back(rule(at / "maps" / i));
      RulePtr fallback = has(at / "fallback") ? rule(at / "fallback") : nullptr;
      return std::make_shared<const ListFamily>(integer(at / "first"), std::move(maps), std::move(fallback));
    }
    if (kind == "quad-split") {
      try {
        return std::make_shared<const QuadSplitFamily>(rational(at / "k_lo"), rational(at / "k_hi"),
                                                       rational(at / "d_hi"), integer(at / "offset"));
      } catch (const Error& e) {
        if (e.code() == Errc::ParseError) throw;
        fail(at, e.what());
      }
    }
    fail(at / "kind", "unknown psi family '" + kind + "'");
  }

  RulePtr rule(const json::json_pointer& at) const {
    if (!has(at)) return nullptr;
    const std::string kind = text(at / "kind");
    try {
      if (kind == "segments") {
        std::vector<AffineSegment> segs;
        const auto n = array_size(at / "segments");
        for (std::size_t i = 0; i < n; ++i) segs.push_back(segment(at / "segments" / i));
        if (segs.empty()) fail(at / "segments", "no segments");
        return make_segment_rule(std::move(segs));
      }
      if (kind == "cantor-split") {
        SplitHomeoSpec spec;
        if (array_size(at / "source") != 2) fail(at / "source", "expected [lo, hi]");
        if (array_size(at / "target") != 2) fail(at / "target", "expected [lo, hi]");
        spec.source_lo = rational(at / "source" / 0);
        spec.source_hi = rational(at / "source" / 1);
        spec.target_lo = rational(at / "target" / 0);
        spec.target_hi = rational(at / "target" / 1);
        const auto n = array_size(at / "pins");
        for (std::size_t i = 0; i < n; ++i) {
          if (array_size(at / "pins" / i) != 2) fail(at / "pins" / i, "expected [from, to]");
          spec.pins.emplace_back(address(at / "pins" / i / 0), address(at / "pins" / i / 1));
        }
        return make_split_rule(spec);
      }
      if (kind == "conjugation") {
        field(at, "phi");
        field(at, "psi");
        ConjugationSpec spec{map(at / "phi"),         rational(at / "d0"),
                             static_cast<int>(integer(at / "shift")), family(at / "psi"),
                             opt_rational(at / "range_lo"), opt_rational(at / "range_hi")};
        return std::make_shared<const ConjugationRule>(std::move(spec));
      }
    } catch (const Error& e) {
      if (e.code() == Errc::ParseError) throw;
      fail(at, e.what());
    }
    fail(at / "kind", "unknown rule kind '" + kind + "'");
  }

  Piece piece(const json::json_pointer& at) const {
    const std::string kind = text(at / "kind");
    Piece p{opt_rational(at / "lo"), opt_rational(at / "hi"), AffineForm{}};
    if (kind == "affine") {
      p.form = AffineForm{rational(at / "slope"), rational(at / "offset")};
    } else if (kind == "power") {
      PowerForm w{rational(at / "c"), rational(at / "a"), rational(at / "b"), rational(at / "e")};
      if (has(at / "s")) w.s = rational(at / "s");
      p.form = w;
    } else {
      p.form = rule(at);
    }
    return p;
  }

  PiecewiseMap map(const json::json_pointer& at) const {
    const std::string name = text(at / "name");
    DomainKind kind{};
    try {
      kind = parse_domain_kind(text(at / "domain"));
    } catch (const Error& e) {
      fail(at / "domain", e.what());
    }
    std::vector<Piece> pieces;
    const auto n = array_size(at / "pieces");
    for (std::size_t i = 0; i < n; ++i) pieces.push_back(piece(at / "pieces" / i));
    try {
      return PiecewiseMap(name, kind, std::move(pieces));
    } catch (const Error& e) {
      if (e.code() == Errc::ParseError) throw;
      fail(at / "pieces", e.what());
    }
  }

 private:
  const json& root_;
};

bool same_opt(const std::optional<Rational>& a, const std::optional<Rational>& b) {
  return a.has_value() == b.has_value() && (!a || *a == *b);
}

bool same_segment(const AffineSegment& a, const AffineSegment& b) {
  return same_opt(a.lo, b.lo) && same_opt(a.hi, b.hi) && a.slope == b.slope && a.offset == b.offset;
}

bool same_map(const PiecewiseMap& a, const PiecewiseMap& b);

bool same_rule(const RulePtr& a, const RulePtr& b);

bool same_family(const PsiFamily& a, const PsiFamily& b) {
  const auto* la = dynamic_cast<const ListFamily*>(&a);
  const auto* lb = dynamic_cast<const ListFamily*>(&b);
  if (la || lb) {
    if (!la || !lb || la->first() != lb->first() || la->maps().size() != lb->maps().size()) return false;
    for (std::size_t i = 0; i < la->maps().size(); ++i)
      if (!same_rule(la->maps()[i], lb->maps()[i])) return false;
    return same_rule(la->fallback(), lb->fallback());
  }
  const auto* qa = dynamic_cast<const QuadSplitFamily*>(&a);
  const auto* qb = dynamic_cast<const QuadSplitFamily*>(&b);
  return qa && qb && qa->k_lo() == qb->k_lo() && qa->k_hi() == qb->k_hi() && qa->d_hi() == qb->d_hi() &&
         qa->offset() == qb->offset();
}

bool same_rule(const RulePtr& a, const RulePtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind() != b->kind()) return false;
  const auto* sa = dynamic_cast<const SegmentRule*>(a.get());
  const auto* sb = dynamic_cast<const SegmentRule*>(b.get());
  if (sa && sb) {
    if (sa->origin() != sb->origin() || sa->segments().size() != sb->segments().size()) return false;
    for (std::size_t i = 0; i < sa->segments().size(); ++i)
      if (!same_segment(sa->segments()[i], sb->segments()[i])) return false;
    return true;
  }
  const auto* ca = dynamic_cast<const ConjugationRule*>(a.get());
  const auto* cb = dynamic_cast<const ConjugationRule*>(b.get());
  if (ca && cb) {
    const auto& x = ca->spec();
    const auto& y = cb->spec();
    return same_map(x.phi, y.phi) && x.d0 == y.d0 && x.shift == y.shift && same_opt(x.lo, y.lo) &&
           same_opt(x.hi, y.hi) && same_family(*x.psi, *y.psi);
  }
  return false;
}

bool same_piece(const Piece& a, const Piece& b) {
  if (!same_opt(a.lo, b.lo) || !same_opt(a.hi, b.hi) || a.form.index() != b.form.index()) return false;
  if (const auto* x = std::get_if<AffineForm>(&a.form)) {
    const auto& y = std::get<AffineForm>(b.form);
    return x->slope == y.slope && x->offset == y.offset;
  }
  if (const auto* x = std::get_if<PowerForm>(&a.form)) {
    const auto& y = std::get<PowerForm>(b.form);
    return x->c == y.c && x->a == y.a && x->b == y.b && x->e == y.e && x->s == y.s;
  }
  return same_rule(std::get<RulePtr>(a.form), std::get<RulePtr>(b.form));
}

bool same_map(const PiecewiseMap& a, const PiecewiseMap& b) {
  if (a.name() != b.name() || a.domain_kind() != b.domain_kind() || a.pieces().size() != b.pieces().size())
    return false;
  for (std::size_t i = 0; i < a.pieces().size(); ++i)
    if (!same_piece(a.pieces()[i], b.pieces()[i])) return false;
  return true;
}

}  // namespace

std::string write_system(const GeneratorSystem& system) {
  json gens = json::array();
  bool unusable = false;
  for (const auto& g : system.generators) {
    json m = map_json(g);
    m.erase("domain");
    gens.push_back(std::move(m));
    unusable = unusable || !g.usable();
  }
  json designated = json::array();
  for (const auto& p : system.designated) designated.push_back({{"name", p.name}, {"value", q(p.value)}});
  json finite = json::array();
  for (const auto& p : system.finite_orbit_points) finite.push_back(q(p));
  json doc = {{"format", kFormatVersion},
              {"name", system.name},
              {"domain", domain_kind_name(system.domain)},
              {"invertible", system.invertible},
              {"generators", gens},
              {"designated", designated},
              {"ladder", system.ladder},
              {"finite_orbit_points", finite},
              {"notes", system.notes}};
  if (unusable) doc["allow_unusable"] = true;
  return doc.dump(2) + "\n";
}

GeneratorSystem read_system(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseError, "byte " + std::to_string(e.byte) + ": malformed JSON");
  }
  const Reader r(doc);
  using ptr = json::json_pointer;
  const ptr root;
  if (!doc.is_object()) r.fail(root, "expected an object");
  if (doc.contains("format") && r.integer(ptr("/format")) != kFormatVersion)
    r.fail(ptr("/format"), "unsupported format version");

  GeneratorSystem s;
  s.name = r.text(ptr("/name"));
  try {
    s.domain = parse_domain_kind(r.text(ptr("/domain")));
  } catch (const Error& e) {
    if (e.code() == Errc::ParseError) throw;
    r.fail(ptr("/domain"), e.what());
  }
  if (doc.contains("invertible")) {
    if (!doc["invertible"].is_boolean()) r.fail(ptr("/invertible"), "expected true or false");
    s.invertible = doc["invertible"].get<bool>();
  }
  const bool allow_unusable = doc.value("allow_unusable", false);

  const auto n = r.array_size(ptr("/generators"));
  if (n == 0) r.fail(ptr("/generators"), "a system needs at least one generator");
  for (std::size_t i = 0; i < n; ++i) {
    const ptr at = ptr("/generators") / i;
    if (!doc.at(at).contains("domain")) doc.at(at)["domain"] = domain_kind_name(s.domain);
    PiecewiseMap g = r.map(at);
    if (g.domain_kind() != s.domain) r.fail(at / "domain", "generator domain differs from the system domain");
    if (s.has_generator(g.name())) r.fail(at / "name", "duplicate generator name '" + g.name() + "'");
    if (!allow_unusable && !g.usable()) {
      std::string why;
      for (const auto& p : g.report().problems) why += (why.empty() ? "" : "; ") + p;
      r.fail(at, "map '" + g.name() + "' is not usable: " + why);
    }
    s.generators.push_back(std::move(g));
  }

  if (doc.contains("designated")) {
    const auto m = r.array_size(ptr("/designated"));
    for (std::size_t i = 0; i < m; ++i) {
      const ptr at = ptr("/designated") / i;
      s.designated.push_back({r.text(at / "name"), r.rational(at / "value")});
    }
  }
  if (doc.contains("ladder")) {
    const auto m = r.array_size(ptr("/ladder"));
    for (std::size_t i = 0; i < m; ++i) {
      const ptr at = ptr("/ladder") / i;
      const std::string name = r.text(at);
      bool known = false;
      for (const auto& p : s.designated) known = known || p.name == name;
      if (!known) r.fail(at, "ladder names an unknown designated point '" + name + "'");
      s.ladder.push_back(name);
    }
  }
  if (doc.contains("finite_orbit_points")) {
    const auto m = r.array_size(ptr("/finite_orbit_points"));
    for (std::size_t i = 0; i < m; ++i) s.finite_orbit_points.push_back(r.rational(ptr("/finite_orbit_points") / i));
  }
  if (doc.contains("notes")) {
    const auto m = r.array_size(ptr("/notes"));
    for (std::size_t i = 0; i < m; ++i) s.notes.push_back(r.text(ptr("/notes") / i));
  }
  return s;
}

GeneratorSystem load_system(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::ParseError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return read_system(buf.str());
  } catch (const Error& e) {
    const std::string what = e.what();
    throw Error(e.code(), path.string() + ": " + what.substr(errc_name(e.code()).size() + 2));
  }
}

void save_system(const GeneratorSystem& system, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::ParseError, "cannot write " + path.string());
  out << write_system(system);
  if (!out) throw Error(Errc::ParseError, "failed writing " + path.string());
}

bool same_system(const GeneratorSystem& a, const GeneratorSystem& b) {
  if (a.name != b.name || a.domain != b.domain || a.invertible != b.invertible || a.designated != b.designated ||
      a.ladder != b.ladder || a.finite_orbit_points != b.finite_orbit_points || a.notes != b.notes ||
      a.generators.size() != b.generators.size())
    return false;
  for (std::size_t i = 0; i < a.generators.size(); ++i)
    if (!same_map(a.generators[i], b.generators[i])) return false;
  return true;
}

}  // namespace circorb
