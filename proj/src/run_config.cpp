#include "rbec/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <sstream>

namespace rbec {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

template <class I>
std::optional<I> parse_int(const std::string& s) {
  I v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

struct Key {
  std::string name;
  bool required;
  std::function<std::optional<std::string>(RunConfig&, const std::string&)> set;  // error text or nullopt
  std::function<std::string(const RunConfig&)> get;
};

template <class F>
Key number(std::string name, bool required, F field) {
  return {std::move(name), required,
          [field](RunConfig& c, const std::string& v) -> std::optional<std::string> {
            const auto d = parse_double(v);
            if (!d) return "not a number: '" + v + "'";
            field(c) = *d;
            return std::nullopt;
          },
          [field](const RunConfig& c) { return fmt(field(c)); }};
}

template <class I, class F>
Key integer(std::string name, F field) {
  return {std::move(name), false,
          [field](RunConfig& c, const std::string& v) -> std::optional<std::string> {
            const auto d = parse_int<I>(v);
            if (!d) return "not an integer: '" + v + "'";
            field(c) = *d;
            return std::nullopt;
          },
          [field](const RunConfig& c) { return std::to_string(field(c)); }};
}

std::vector<Key> keys() {
  std::vector<Key> k;
  k.push_back(number("domain.half_width", true, [](auto& c) -> auto& { return c.params.half_width; }));
  k.push_back(integer<int>("mesh.subdivisions", [](auto& c) -> auto& { return c.subdivisions; }));
  k.push_back(integer<int>("mesh.order", [](auto& c) -> auto& { return c.order; }));
  k.push_back(number("model.beta", true, [](auto& c) -> auto& { return c.params.beta; }));
  k.push_back(number("model.omega", true, [](auto& c) -> auto& { return c.params.omega; }));
  k.push_back(number("model.gamma_x", true, [](auto& c) -> auto& { return c.params.gamma_x; }));
  k.push_back(number("model.gamma_y", true, [](auto& c) -> auto& { return c.params.gamma_y; }));
  k.push_back(number("solver.energy_tol", false, [](auto& c) -> auto& { return c.solver.energy_tol; }));
  k.push_back(integer<int>("solver.max_iter", [](auto& c) -> auto& { return c.solver.max_iter; }));
  k.push_back(number("solver.initial_step", false, [](auto& c) -> auto& { return c.solver.initial_step; }));
  k.push_back(
      number("solver.backtrack_factor", false, [](auto& c) -> auto& { return c.solver.backtrack_factor; }));
  k.push_back(number("solver.growth_factor", false, [](auto& c) -> auto& { return c.solver.growth_factor; }));
  k.push_back(number("solver.max_step", false, [](auto& c) -> auto& { return c.solver.max_step; }));
  k.push_back(number("solver.min_step", false, [](auto& c) -> auto& { return c.solver.min_step; }));
  k.push_back(number("solver.inner_tol", false, [](auto& c) -> auto& { return c.solver.inner_tol; }));
  k.push_back(integer<int>("solver.inner_max_iter", [](auto& c) -> auto& { return c.solver.inner_max_iter; }));
  k.push_back(number("solver.residual_tol", false, [](auto& c) -> auto& { return c.solver.residual_tol; }));
  k.push_back({"solver.preconditioner", false,
               [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
                 if (v == "multigrid") c.solver.preconditioner = Preconditioner::multigrid;
                 else if (v == "jacobi") c.solver.preconditioner = Preconditioner::jacobi;
                 else return "expected 'multigrid' or 'jacobi', got '" + v + "'";
                 return std::nullopt;
               },
               [](const RunConfig& c) -> std::string {
                 return c.solver.preconditioner == Preconditioner::multigrid ? "multigrid" : "jacobi";
               }});
  k.push_back(integer<std::uint64_t>("solver.seed", [](auto& c) -> auto& { return c.solver.seed; }));
  k.push_back(integer<int>("spectrum.count", [](auto& c) -> auto& { return c.spectrum_count; }));
  k.push_back(number("spectrum.tol", false, [](auto& c) -> auto& { return c.spectrum.tol; }));
  k.push_back(integer<int>("spectrum.max_iter", [](auto& c) -> auto& { return c.spectrum.max_iter; }));
  k.push_back({"study.levels", false,
               [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
                 c.levels.clear();
                 std::stringstream ss(v);
                 std::string item;
                 while (std::getline(ss, item, ',')) {
                   const auto n = parse_int<int>(trim(item));
                   if (!n) return "not a comma separated integer list: '" + v + "'";
                   c.levels.push_back(*n);
                 }
                 return std::nullopt;
               },
               [](const RunConfig& c) {
                 std::string s;
                 for (std::size_t i = 0; i < c.levels.size(); ++i) s += (i ? ", " : "") + std::to_string(c.levels[i]);
                 return s;
               }});
  k.push_back(integer<int>("study.reference", [](auto& c) -> auto& { return c.reference; }));
  k.push_back({"study.warm_start", false,
               [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
                 if (v == "true") c.warm_start = true;
                 else if (v == "false") c.warm_start = false;
                 else return "expected 'true' or 'false', got '" + v + "'";
                 return std::nullopt;
               },
               [](const RunConfig& c) -> std::string { return c.warm_start ? "true" : "false"; }});
  k.push_back(number("study.density_flag_threshold", false,
                     [](auto& c) -> auto& { return c.density_flag_threshold; }));
  return k;
}

void collect(std::vector<std::string>& problems, const std::function<void()>& check) {
  try {
    check();
  } catch (const std::invalid_argument& e) {
    std::stringstream ss(e.what());
    std::string line;
    std::getline(ss, line);  // heading
    while (std::getline(ss, line)) problems.push_back(trim(line));
  }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error([&] {
        std::string msg = "invalid configuration (" + std::to_string(problems.size()) + " problem" +
                          (problems.size() == 1 ? "" : "s") + "):";
        for (const auto& p : problems) msg += "\n  " + p;
        return msg;
      }()),
      problems_(std::move(problems)) {}

StudyConfig RunConfig::study() const {
  StudyConfig s;
  s.params = params;
  s.order = order;
  s.levels = levels;
  s.reference = reference;
  s.solver = solver;
  s.warm_start = warm_start;
  s.density_flag_threshold = density_flag_threshold;
  return s;
}

RunConfig parse_run_config(std::istream& in) {
  const std::vector<Key> table = keys();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < table.size(); ++i) index[table[i].name] = i;

  RunConfig c;
  std::vector<std::string> problems;
  std::vector<bool> seen(table.size(), false);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) {
      problems.push_back(where + "expected 'key = value', got '" + line + "'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = index.find(key);
    if (it == index.end()) {
      problems.push_back(where + "unknown key '" + key + "'");
      continue;
    }
    if (seen[it->second]) {
      problems.push_back(where + "duplicate key '" + key + "'");
      continue;
    }
    seen[it->second] = true;
    if (auto err = table[it->second].set(c, value)) problems.push_back(where + key + ": " + *err);
  }
  for (std::size_t i = 0; i < table.size(); ++i)
    if (table[i].required && !seen[i]) problems.push_back("missing required key '" + table[i].name + "'");

  collect(problems, [&] { c.params.validate(); });
  collect(problems, [&] { c.solver.validate(); });
  if (c.subdivisions < 2) problems.push_back("mesh.subdivisions must be >= 2");
  if (c.order != 1 && c.order != 2) problems.push_back("mesh.order must be 1 or 2");
  if (c.spectrum_count < 1) problems.push_back("spectrum.count must be >= 1");
  if (!(c.spectrum.tol > 0.0)) problems.push_back("spectrum.tol must be > 0");
  if (c.spectrum.max_iter < 1) problems.push_back("spectrum.max_iter must be >= 1");
  if (c.reference < 0) problems.push_back("study.reference must be >= 0");
  if (!(c.density_flag_threshold > 0.0)) problems.push_back("study.density_flag_threshold must be > 0");
  if (!problems.empty()) throw ConfigError(std::move(problems));

  for (const auto& k : table) c.echo.emplace_back(k.name, k.get(c));
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read configuration file '" + path + "'"});
  return parse_run_config(in);
}

void validate_study(const RunConfig& config) {
  std::vector<std::string> problems;
  if (config.levels.empty()) problems.push_back("study.levels must list at least one level");
  else collect(problems, [&] { config.study().validate(); });
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

std::string config_echo(const RunConfig& config) {
  std::string out;
  for (const auto& [k, v] : config.echo) out += k + " = " + v + "\n";
  return out;
}

}  // namespace rbec
