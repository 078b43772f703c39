#include "fkc/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "fkc/errors.hpp"

namespace fkc::cli {

namespace {

using Defaults = std::vector<std::pair<std::string, std::string>>;

const Defaults kKernelDefaults = {
    {"family", "stable"}, {"dim", "1"}, {"alpha", "1"}, {"gamma", "1"}, {"cnorm", "auto"}};

const Defaults kPotentialDefaults = {
    {"family", "logpower"}, {"lambda", "2"},  {"value", "0"},  {"base", "logpower"}, {"exceptional", "envelope"},
    {"k0", "2"},            {"theta", "2"},   {"c", "1"},      {"level", "1"},       {"K", "1"}};

const std::map<std::string, Defaults>& task_defaults() {
  static const std::map<std::string, Defaults> table = {
      {"classify", {{"band", "0.02"}, {"delta_scan", "yes"}, {"deltas", "0.1, 1, 10"}}},
      {"validate", {}},
      {"groundstate", {{"L", "100"}, {"n", "2001"}}},
      {"heatkernel", {{"L", "100"}, {"n", "1001"}, {"t", "1"}, {"kmax", "0"}, {"stride", "10"}}},
      {"superpoincare",
       {{"L", "20"}, {"n", "401"}, {"r", "1, 2, 4"}, {"s", "0.1, 1, 10"}, {"trials", "100"}, {"seed", "1"}}},
      {"gnprobe", {{"L", "200"}, {"n", "4001"}, {"n_values", "4, 8, 16, 32"}}},
      {"lyapunov", {{"L", "50"}, {"n", "1001"}, {"c0", "10"}}},
      {"simulate",
       {{"x", "0"}, {"t", "1"}, {"dt", "0.01"}, {"paths", "10000"}, {"seed", "1"}, {"eps", "0.001"},
        {"observable", "bump"}, {"width", "3"}}},
      {"ratiotest",
       {{"x", "10, 30, 100"}, {"t", "1"}, {"dt", "0.01"}, {"paths", "100000"}, {"seed", "1"}, {"eps", "0.001"}}},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool has_key(const Defaults& d, const std::string& key) {
  return std::any_of(d.begin(), d.end(), [&](const auto& kv) { return kv.first == key; });
}

[[noreturn]] void fail(int line, const std::string& text, const std::string& why) {
  throw ParseError("line " + std::to_string(line) + ": " + why + ": '" + text + "'");
}

double to_number(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ParseError("key '" + key + "': not a number: '" + v + "'");
  return x;
}

const Defaults& defaults_for(const std::string& section, const std::string& task) {
  if (section == "kernel") return kKernelDefaults;
  if (section == "potential") return kPotentialDefaults;
  return task_defaults().at(task);
}

Section* section_of(Scenario& sc, const std::string& name) {
  if (name == "kernel") return &sc.kernel;
  if (name == "potential") return &sc.potential;
  if (name == "task") return &sc.params;
  return nullptr;
}

void write_section(std::ostringstream& out, const std::string& name, const Section& s, const Defaults& order) {
  out << "\n[" << name << "]\n";
  for (const auto& [key, unused] : order) out << key << " = " << s.at(key) << "\n";
}

kernels::PotentialFamily potential_family(const std::string& name) {
  if (name == "power") return kernels::PotentialFamily::power;
  if (name == "logpower") return kernels::PotentialFamily::logpower;
  throw ParseError("potential: unknown base family '" + name + "'");
}

}  // namespace

const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, unused] : task_defaults()) v.push_back(k);
    return v;
  }();
  return names;
}

std::string Scenario::get(const std::string& key) const {
  const auto it = params.find(key);
  if (it == params.end()) throw ParseError("task '" + task + "' has no parameter '" + key + "'");
  return it->second;
}

double Scenario::number(const std::string& key) const { return to_number(key, get(key)); }

long Scenario::integer(const std::string& key) const {
  const double x = number(key);
  if (x != static_cast<double>(static_cast<long>(x))) throw ParseError("key '" + key + "': not an integer");
  return static_cast<long>(x);
}

std::vector<double> Scenario::numbers(const std::string& key) const {
  std::vector<double> out;
  for (const auto& v : split_list(get(key))) out.push_back(to_number(key, v));
  return out;
}

void Scenario::set(const std::string& section, const std::string& key, const std::string& value) {
  Section* s = section_of(*this, section);
  if (!s || !s->count(key)) throw ParseError("unknown parameter '" + section + "." + key + "'");
  (*s)[key] = value;
}

std::string Scenario::echo() const {
  std::ostringstream out;
  out << "id = " << id << "\n" << "task = " << task << "\n";
  write_section(out, "kernel", kernel, kKernelDefaults);
  write_section(out, "potential", potential, kPotentialDefaults);
  const auto& td = task_defaults().at(task);
  if (!td.empty()) write_section(out, "task", params, td);
  if (!grid.empty()) {
    out << "\n[grid]\ncap = " << sweep_cap << "\n";
    for (const auto& a : grid) {
      out << a.section << "." << a.key << " = ";
      for (std::size_t i = 0; i < a.values.size(); ++i) out << (i ? ", " : "") << a.values[i];
      out << "\n";
    }
  }
  return out.str();
}

Scenario parse_scenario(const std::string& text) {
  struct Entry {
    std::string section, key, value, raw;
    int line;
  };
  std::vector<Entry> entries;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    if (const auto hash = s.find('#'); hash != std::string::npos) s.erase(hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, raw, "malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "kernel" && section != "potential" && section != "task" && section != "grid")
        fail(line, raw, "unknown section");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, raw, "expected key = value");
    Entry e{section, trim(s.substr(0, eq)), trim(s.substr(eq + 1)), raw, line};
    if (e.key.empty()) fail(line, raw, "empty key");
    if (e.value.empty()) fail(line, raw, "empty value");
    entries.push_back(e);
  }

  Scenario sc;
  for (const auto& e : entries) {
    if (!e.section.empty()) continue;
    if (e.key == "id") sc.id = e.value;
    else if (e.key == "task") sc.task = e.value;
    else fail(e.line, e.raw, "unknown top-level key");
  }
  if (sc.id.empty()) throw ParseError("missing top-level key 'id'");
  if (sc.id.find_first_of("/\\ ") != std::string::npos || sc.id == "." || sc.id == "..")
    throw ParseError("id must be a plain name: '" + sc.id + "'");
  if (sc.task.empty()) throw ParseError("missing top-level key 'task'");
  if (!task_defaults().count(sc.task)) throw ParseError("unknown task '" + sc.task + "'");

  for (const auto& [k, v] : kKernelDefaults) sc.kernel[k] = v;
  for (const auto& [k, v] : kPotentialDefaults) sc.potential[k] = v;
  for (const auto& [k, v] : task_defaults().at(sc.task)) sc.params[k] = v;

  for (const auto& e : entries) {
    if (e.section.empty()) continue;
    if (e.section == "grid") {
      if (e.key == "cap") {
        const double cap = to_number("cap", e.value);
        if (!(cap >= 1.0)) fail(e.line, e.raw, "sweep cap must be at least 1");
        sc.sweep_cap = static_cast<std::size_t>(cap);
        continue;
      }
      const auto dot = e.key.find('.');
      if (dot == std::string::npos) fail(e.line, e.raw, "grid keys read section.key");
      GridAxis a{e.key.substr(0, dot), e.key.substr(dot + 1), split_list(e.value)};
      if (!section_of(sc, a.section) || !has_key(defaults_for(a.section, sc.task), a.key))
        fail(e.line, e.raw, "unknown grid parameter");
      if (a.values.empty()) fail(e.line, e.raw, "grid axis without values");
      sc.grid.push_back(std::move(a));
      continue;
    }
    if (!has_key(defaults_for(e.section, sc.task), e.key)) fail(e.line, e.raw, "unknown key in [" + e.section + "]");
    (*section_of(sc, e.section))[e.key] = e.value;
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

kernels::JumpKernelSpec build_kernel(const Scenario& sc) {
  const auto& k = sc.kernel;
  const std::string family = k.at("family");
  const double dimd = to_number("dim", k.at("dim"));
  const int dim = static_cast<int>(dimd);
  if (dim != dimd) throw ParseError("kernel: dim must be an integer");
  const double alpha = to_number("alpha", k.at("alpha"));
  const bool automatic = k.at("cnorm") == "auto";
  const double cnorm = automatic ? 1.0 : to_number("cnorm", k.at("cnorm"));
  if (family == "stable")
    return kernels::stable_kernel(dim, alpha, automatic ? std::nullopt : std::optional<double>(cnorm));
  if (family == "tempered") return kernels::tempered_kernel(dim, alpha, to_number("gamma", k.at("gamma")), cnorm);
  if (family == "truncated") return kernels::truncated_kernel(dim, alpha, cnorm);
  throw ParseError("kernel: unknown family '" + family + "'");
}

kernels::PotentialSpec build_potential(const Scenario& sc) {
  const auto& p = sc.potential;
  const std::string family = p.at("family");
  auto num = [&](const char* key) { return to_number(key, p.at(key)); };
  if (family == "power") return kernels::power_potential(num("lambda"));
  if (family == "logpower") return kernels::logpower_potential(num("lambda"));
  if (family == "constant") return kernels::constant_potential(num("value"));
  if (family == "irregular") {
    const int dim = static_cast<int>(to_number("dim", sc.kernel.at("dim")));
    kernels::ExceptionalSet set;
    const std::string kind = p.at("exceptional");
    if (kind == "ball_union") set = kernels::ball_union_set(dim, to_number("alpha", sc.kernel.at("alpha")), num("k0"));
    else if (kind == "envelope") set = kernels::envelope_set(dim, num("c"), num("theta"));
    else throw ParseError("potential: unknown exceptional set '" + kind + "'");
    return kernels::irregular_potential(potential_family(p.at("base")), num("lambda"), set, num("level"), num("K"));
  }
  throw ParseError("potential: unknown family '" + family + "'");
}

std::vector<Scenario> expand_grid(const Scenario& sc) {
  std::size_t total = 1;
  for (const auto& a : sc.grid) {
    total *= a.values.size();
    if (total > sc.sweep_cap)
      throw ParseError("sweep grid exceeds the cap of " + std::to_string(sc.sweep_cap) + " points");
  }
  std::vector<Scenario> out;
  out.reserve(total);
  std::vector<std::size_t> idx(sc.grid.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    Scenario point = sc;
    point.grid.clear();
    for (std::size_t a = 0; a < sc.grid.size(); ++a)
      point.set(sc.grid[a].section, sc.grid[a].key, sc.grid[a].values[idx[a]]);
    out.push_back(std::move(point));
    for (std::size_t a = sc.grid.size(); a-- > 0;) {
      if (++idx[a] < sc.grid[a].values.size()) break;
      idx[a] = 0;
    }
  }
  return out;
}

}  // namespace fkc::cli
