#include "bfsmc/scenario_io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "bfsmc/errors.hpp"

namespace bfsmc {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_plain(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ConfigError("not a number: '" + s + "'");
  return v;
}

// Line numbers of "[section]" headers and "key = value" entries.
class LineIndex {
 public:
  explicit LineIndex(const std::string& text) {
    std::istringstream in(text);
    std::string line, section;
    long n = 0;
    while (std::getline(in, line)) {
      ++n;
      const std::string s = trim(line);
      if (s.empty() || s[0] == ';' || s[0] == '#') continue;
      if (s.front() == '[' && s.back() == ']') {
        section = trim(s.substr(1, s.size() - 2));
        lines_.emplace(section, n);
        sections_.push_back(section);
      } else if (auto eq = s.find('='); eq != std::string::npos) {
        lines_.emplace(section + "." + trim(s.substr(0, eq)), n);
      }
    }
  }
  const std::vector<std::string>& sections() const noexcept { return sections_; }
  long find(const std::string& key) const {
    auto it = lines_.find(key);
    return it == lines_.end() ? -1 : it->second;
  }

 private:
  std::map<std::string, long> lines_;
  std::vector<std::string> sections_;
};

class Reader {
 public:
  Reader(const pt::ptree& tree, const LineIndex& index, std::string origin)
      : tree_(tree), index_(index), origin_(std::move(origin)) {}

  [[noreturn]] void fail(const std::string& section, const std::string& key,
                         const std::string& msg) const {
    const long line = index_.find(key.empty() ? section : section + "." + key);
    std::string where = origin_;
    if (line > 0) where += ":" + std::to_string(line);
    where += " [" + section + "]";
    if (!key.empty()) where += " " + key;
    throw ParseError(where + ": " + msg, section, line);
  }

  const pt::ptree& section(const std::string& name) const {
    auto it = tree_.find(name);
    if (it == tree_.not_found()) fail(name, "", "missing section");
    return it->second;
  }
  bool has_section(const std::string& name) const { return tree_.find(name) != tree_.not_found(); }

  void allow_sections(const std::set<std::string>& allowed) const {
    for (const auto& [name, node] : tree_) {
      if (node.empty() && !node.data().empty()) fail("", name, "key outside a section");
    }
    for (const auto& name : index_.sections()) {
      if (!allowed.count(name)) fail(name, "", "unknown section");
    }
  }

  void allow_keys(const std::string& sec, const std::set<std::string>& allowed) const {
    for (const auto& [key, value] : section(sec)) {
      if (!allowed.count(key)) fail(sec, key, "unknown key");
    }
  }

  std::optional<std::string> text(const std::string& sec, const std::string& key) const {
    auto v = section(sec).get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return trim(*v);
  }
  std::string text_or(const std::string& sec, const std::string& key, const std::string& fallback) const {
    return text(sec, key).value_or(fallback);
  }
  double real(const std::string& sec, const std::string& key, double fallback) const {
    auto v = text(sec, key);
    if (!v) return fallback;
    try {
      return parse_real(*v);
    } catch (const ConfigError& e) {
      fail(sec, key, e.what());
    }
  }
  long integer(const std::string& sec, const std::string& key, long fallback) const {
    const double v = real(sec, key, static_cast<double>(fallback));
    if (v != std::floor(v)) fail(sec, key, "expected an integer");
    return static_cast<long>(v);
  }
  Eigen::VectorXd vector(const std::string& sec, const std::string& key) const {
    auto v = text(sec, key);
    if (!v) fail(sec, key, "missing key");
    std::string s = *v;
    for (char& c : s) {
      if (c == ',') c = ' ';
    }
    std::istringstream in(s);
    std::vector<double> values;
    std::string tok;
    while (in >> tok) {
      try {
        values.push_back(parse_real(tok));
      } catch (const ConfigError& e) {
        fail(sec, key, e.what());
      }
    }
    if (values.empty()) fail(sec, key, "empty vector");
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  }

 private:
  const pt::ptree& tree_;
  const LineIndex& index_;
  std::string origin_;
};

Scenario scenario_from_tree(const Reader& in, const std::string& base_dir) {
  in.allow_sections({"pair", "controller", "disturbance", "sim", "output"});
  for (const char* sec : {"pair", "controller", "disturbance", "sim"}) in.section(sec);

  Scenario sc;
  in.allow_keys("pair", {"r", "p", "kappa", "gains"});
  sc.pair.r = static_cast<int>(in.integer("pair", "r", sc.pair.r));
  sc.pair.p = in.real("pair", "p", sc.pair.p);
  sc.pair.kappa = in.real("pair", "kappa", sc.pair.kappa);
  try {
    make_params(sc.pair.r, sc.pair.p, sc.pair.kappa);
  } catch (const DomainError& e) {
    in.fail("pair", in.text("pair", "kappa") ? "kappa" : "r", e.what());
  }
  if (in.text_or("pair", "gains", "tune") != "tune") {
    sc.pair.gains = in.vector("pair", "gains");
    if (sc.pair.gains->size() != sc.pair.r) in.fail("pair", "gains", "expected r gains");
    if (!(sc.pair.gains->array() > 0.0).all()) in.fail("pair", "gains", "gains must be positive");
  }

  const std::string kind_name = in.text_or("controller", "kind", "case1");
  try {
    sc.controller.kind = controller_kind_from_string(kind_name);
  } catch (const ConfigError& e) {
    in.fail("controller", "kind", e.what());
  }
  std::set<std::string> ckeys = {"kind"};
  switch (sc.controller.kind) {
    case ControllerKind::Case1: ckeys.insert({"mu0", "lambda", "l0", "slope", "exp_rate"}); break;
    case ControllerKind::Host: ckeys.insert({"epsilon", "l0", "slope", "exp_rate"}); break;
    case ControllerKind::HostFixed: ckeys.insert({"kp", "ki"}); break;
    default: break;
  }
  in.allow_keys("controller", ckeys);
  ControllerSpec& c = sc.controller;
  c.mu0 = in.real("controller", "mu0", c.mu0);
  c.lambda = in.real("controller", "lambda", c.lambda);
  c.epsilon = in.real("controller", "epsilon", c.epsilon);
  c.growth.l0 = in.real("controller", "l0", c.growth.l0);
  c.growth.slope = in.real("controller", "slope", c.growth.slope);
  c.growth.exp_rate = in.real("controller", "exp_rate", c.growth.exp_rate);
  c.fixed.kp = in.real("controller", "kp", c.fixed.kp);
  c.fixed.ki = in.real("controller", "ki", c.fixed.ki);

  sc.disturbance.id = in.text_or("disturbance", "id", "zero");
  std::map<std::string, double> defaults;
  try {
    defaults = disturbance_defaults(sc.disturbance.id);
  } catch (const ConfigError& e) {
    in.fail("disturbance", "id", e.what());
  }
  std::set<std::string> dkeys = {"id"};
  if (sc.disturbance.id == "custom-tabulated") dkeys.insert("table");
  for (const auto& [k, v] : defaults) dkeys.insert(k);
  in.allow_keys("disturbance", dkeys);
  for (const auto& [k, v] : defaults) {
    if (in.text("disturbance", k)) sc.disturbance.params[k] = in.real("disturbance", k, v);
  }
  if (auto table = in.text("disturbance", "table")) {
    fs::path p(*table);
    sc.disturbance.table_path = p.is_absolute() ? p.string() : (fs::path(base_dir) / p).string();
  } else if (sc.disturbance.id == "custom-tabulated") {
    in.fail("disturbance", "table", "missing key");
  }

  in.allow_keys("sim", {"z0", "h", "horizon", "seed", "validation_samples", "name"});
  sc.z0 = in.vector("sim", "z0");
  sc.h = in.real("sim", "h", sc.h);
  sc.horizon = in.real("sim", "horizon", sc.horizon);
  const long seed = in.integer("sim", "seed", static_cast<long>(sc.seed));
  if (seed < 0) in.fail("sim", "seed", "seed must be non-negative");
  sc.seed = static_cast<std::uint64_t>(seed);
  sc.validation_samples = static_cast<int>(in.integer("sim", "validation_samples", sc.validation_samples));
  sc.name = in.text_or("sim", "name", "");

  if (in.has_section("output")) {
    in.allow_keys("output", {"csv", "decimation"});
    sc.output.csv = in.text_or("output", "csv", "");
    sc.output.decimation = static_cast<int>(in.integer("output", "decimation", 1));
  }

  try {
    sc.validate();
  } catch (const ConfigError& e) {
    in.fail("scenario", "", e.what());
  }
  return sc;
}

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

}  // namespace

double parse_real(const std::string& text) {
  const std::string s = trim(text);
  if (auto slash = s.find('/'); slash != std::string::npos) {
    const double num = parse_plain(trim(s.substr(0, slash)));
    const double den = parse_plain(trim(s.substr(slash + 1)));
    if (den == 0.0) throw ConfigError("zero denominator in '" + s + "'");
    return num / den;
  }
  return parse_plain(s);
}

std::string resolve_scenario_path(const std::string& name) {
  std::error_code ec;
  if (fs::is_regular_file(name, ec)) return name;
  const fs::path dir(BFSMC_SCENARIO_DIR);
  for (const fs::path& p : {dir / (name + ".ini"), dir / name}) {
    if (fs::is_regular_file(p, ec)) return p.string();
  }
  throw ParseError("cannot open scenario '" + name + "'");
}

Scenario parse_scenario_text(const std::string& text, const std::string& origin,
                             const std::string& base_dir, const Overrides& overrides) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(origin + ":" + std::to_string(e.line()) + ": " + e.message(), {},
                     static_cast<long>(e.line()));
  }
  for (const auto& [key, value] : overrides) {
    const auto dot = key.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == key.size()) {
      throw ParseError("override key must be 'section.key': '" + key + "'");
    }
    tree.put(pt::ptree::path_type(key, '.'), value);
  }
  const LineIndex index(text);
  Scenario sc = scenario_from_tree(Reader(tree, index, origin), base_dir);
  if (sc.name.empty()) sc.name = fs::path(origin).stem().string();
  return sc;
}

Scenario parse_scenario(const std::string& name_or_path, const Overrides& overrides) {
  const std::string path = resolve_scenario_path(name_or_path);
  std::ifstream file(path);
  if (!file) throw ParseError("cannot open scenario '" + path + "'");
  std::ostringstream text;
  text << file.rdbuf();
  return parse_scenario_text(text.str(), path, fs::path(path).parent_path().string(), overrides);
}

std::vector<std::string> csv_header(const Trajectory& tr) {
  std::vector<std::string> cols = {"t"};
  for (int i = 1; i <= tr.r(); ++i) cols.push_back("z_" + std::to_string(i));
  cols.insert(cols.end(), {"V", "bound", "phase"});
  if (tr.is_host()) {
    cols.insert(cols.end(), {"L1", "L2", "xi"});
  } else {
    cols.push_back("L");
  }
  cols.insert(cols.end(), {"u", "phi", "gamma"});
  return cols;
}

void write_csv(const Trajectory& tr, std::ostream& out, int decimation) {
  if (decimation < 1) throw ConfigError("decimation must be >= 1");
  if (tr.empty()) throw ConfigError("cannot write an empty trajectory");
  const auto header = csv_header(tr);
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n';
  std::string line;
  for (std::size_t i = 0; i < tr.size(); i += static_cast<std::size_t>(decimation)) {
    line = format_real(tr.t[i]);
    const auto z = tr.z(i);
    for (Eigen::Index j = 0; j < z.size(); ++j) line += "," + format_real(z(j));
    line += "," + format_real(tr.V[i]) + "," + format_real(tr.bound[i]) + "," + tr.phase[i];
    if (tr.is_host()) {
      line += "," + format_real(tr.L1[i]) + "," + format_real(tr.L2[i]) + "," + format_real(tr.xi[i]);
    } else {
      line += "," + format_real(tr.L[i]);
    }
    line += "," + format_real(tr.u[i]) + "," + format_real(tr.phi[i]) + "," + format_real(tr.gamma[i]);
    out << line << '\n';
  }
  for (const auto& [k, v] : tr.meta) out << "# meta " << k << '=' << v << '\n';
  for (const Event& e : tr.events) {
    out << "# event " << e.kind << " t=" << format_real(e.t);
    for (const auto& [k, v] : e.fields) out << ' ' << k << '=' << format_real(v);
    out << '\n';
  }
  if (!out) throw Error("CSV write failed");
}

void write_csv(const Trajectory& tr, const std::string& path, int decimation) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_csv(tr, out, decimation);
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

Trajectory read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("CSV: empty input");
  const auto header = split(trim(line), ',');
  std::map<std::string, std::size_t> col;
  for (std::size_t k = 0; k < header.size(); ++k) col[header[k]] = k;
  auto need = [&](const std::string& name) {
    auto it = col.find(name);
    if (it == col.end()) throw ConfigError("CSV: missing column '" + name + "'");
    return it->second;
  };
  int r = 0;
  while (col.count("z_" + std::to_string(r + 1))) ++r;
  if (r == 0) throw ConfigError("CSV: no state columns");
  const bool host = col.count("L1") > 0;

  std::vector<std::vector<std::string>> rows;
  std::map<std::string, std::string> meta;
  std::vector<Event> events;
  long n = 1;
  while (std::getline(in, line)) {
    ++n;
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string tag;
      ls >> tag;
      if (tag == "meta") {
        std::string rest;
        std::getline(ls, rest);
        rest = rest.substr(rest.find_first_not_of(' ') == std::string::npos ? rest.size()
                                                                             : rest.find_first_not_of(' '));
        const auto eq = rest.find('=');
        if (eq == std::string::npos) throw ConfigError("CSV line " + std::to_string(n) + ": bad meta");
        meta[rest.substr(0, eq)] = rest.substr(eq + 1);
      } else if (tag == "event") {
        Event e;
        ls >> e.kind;
        std::string kv;
        while (ls >> kv) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) throw ConfigError("CSV line " + std::to_string(n) + ": bad event");
          const double v = parse_plain(kv.substr(eq + 1));
          if (kv.compare(0, eq, "t") == 0) {
            e.t = v;
          } else {
            e.fields.emplace_back(kv.substr(0, eq), v);
          }
        }
        events.push_back(std::move(e));
      }
      continue;
    }
    auto cells = split(line, ',');
    if (cells.size() != header.size()) {
      throw ConfigError("CSV line " + std::to_string(n) + ": expected " +
                        std::to_string(header.size()) + " fields");
    }
    rows.push_back(std::move(cells));
  }

  ControllerKind kind = host ? ControllerKind::Host : ControllerKind::Case1;
  if (auto it = meta.find("controller"); it != meta.end()) kind = controller_kind_from_string(it->second);
  Trajectory tr(r, kind);
  tr.meta = std::move(meta);
  tr.events = std::move(events);
  tr.reserve(rows.size());
  const std::size_t it = need("t"), iv = need("V"), ib = need("bound"), iph = need("phase"),
                    iu = need("u"), iphi = need("phi"), ig = need("gamma");
  Eigen::VectorXd z(r);
  for (const auto& cells : rows) {
    Trajectory::Row row;
    row.t = parse_plain(cells[it]);
    for (int j = 0; j < r; ++j) z(j) = parse_plain(cells[need("z_" + std::to_string(j + 1))]);
    row.V = parse_plain(cells[iv]);
    row.bound = parse_plain(cells[ib]);
    row.phase = cells[iph];
    if (host) {
      row.L1 = parse_plain(cells[need("L1")]);
      row.L2 = parse_plain(cells[need("L2")]);
      row.xi = parse_plain(cells[need("xi")]);
    } else {
      row.L = parse_plain(cells[need("L")]);
    }
    row.u = parse_plain(cells[iu]);
    row.phi = parse_plain(cells[iphi]);
    row.gamma = parse_plain(cells[ig]);
    tr.push_back(row, z);
  }
  return tr;
}

Trajectory read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return read_csv(in);
}

}  // namespace bfsmc
