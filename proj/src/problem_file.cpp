#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "gepde/pde.hpp"

namespace gepde {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(std::size_t line, const std::string& message) {
  throw ProblemError("line " + std::to_string(line) + ": " + message);
}

double parse_real(std::string_view text, std::size_t line) {
  text = trim(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    fail(line, "expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

std::string format_real(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

struct Entry {
  std::string value;
  std::size_t line;
};

}  // namespace

Problem parse_problem(std::string_view text, const ParseOptions& options) {
  std::map<std::string, Entry> entries;
  std::size_t line_no = 0;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(begin, end - begin);
    begin = end + 1;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected 'key = value'");
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) fail(line_no, "missing key");
    if (!entries.emplace(key, Entry{value, line_no}).second) fail(line_no, "duplicate key '" + key + "'");
  }

  auto take = [&](const std::string& key) -> std::optional<Entry> {
    auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    Entry e = it->second;
    entries.erase(it);
    return e;
  };
  auto require = [&](const std::string& key) -> Entry {
    auto e = take(key);
    if (!e) throw ProblemError("missing key '" + key + "'");
    return *e;
  };
  auto expression = [&](const Entry& e) -> Expr {
    try {
      return parse_expression(e.value, options);
    } catch (const ParseError& err) {
      fail(e.line, err.what());
    }
  };

  Problem p;
  if (auto e = take("name")) p.name = e->value;
  {
    Entry e = require("dimension");
    double d = parse_real(e.value, e.line);
    if (d != 2.0 && d != 3.0) fail(e.line, "dimension must be 2 or 3");
    p.dimension = static_cast<int>(d);
  }
  for (int a = 0; a < p.dimension; ++a) {
    const std::string key = std::string(var_name(spatial_var(a))) + "_range";
    Entry e = require(key);
    const std::size_t comma = e.value.find(',');
    if (comma == std::string::npos) fail(e.line, key + " must be 'lower, upper'");
    p.domain[static_cast<std::size_t>(a)] = {parse_real(std::string_view(e.value).substr(0, comma), e.line),
                                             parse_real(std::string_view(e.value).substr(comma + 1), e.line)};
  }
  p.residual = expression(require("residual"));
  for (std::size_t f = 0; f < face_count(p.dimension); ++f) {
    p.boundary.push_back(expression(require(std::string(face_name(static_cast<Face>(f))))));
  }
  if (auto e = take("exact")) p.exact = expression(*e);
  p.grid_points = default_grid_points(p.dimension);
  if (auto e = take("T")) {
    double t = parse_real(e->value, e->line);
    if (t < 2 || t != static_cast<double>(static_cast<std::size_t>(t))) {
      fail(e->line, "T must be an integer >= 2");
    }
    p.grid_points = static_cast<std::size_t>(t);
  }
  if (!entries.empty()) {
    const auto& [key, e] = *entries.begin();
    fail(e.line, "unknown key '" + key + "'");
  }
  p.validate();
  return p;
}

std::string format_problem(const Problem& p) {
  std::ostringstream out;
  if (!p.name.empty()) out << "name = " << p.name << '\n';
  out << "dimension = " << p.dimension << '\n';
  for (int a = 0; a < p.dimension; ++a) {
    const Interval& iv = p.domain[static_cast<std::size_t>(a)];
    out << var_name(spatial_var(a)) << "_range = " << format_real(iv.lower) << ", "
        << format_real(iv.upper) << '\n';
  }
  out << "residual = " << to_string(p.residual) << '\n';
  for (std::size_t f = 0; f < p.boundary.size(); ++f) {
    out << face_name(static_cast<Face>(f)) << " = " << to_string(p.boundary[f]) << '\n';
  }
  if (p.exact) out << "exact = " << to_string(*p.exact) << '\n';
  out << "T = " << p.grid_points << '\n';
  return out.str();
}

Problem load_problem(const std::filesystem::path& path, const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw ProblemError("cannot open problem file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str(), options);
}

void save_problem(const Problem& problem, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ProblemError("cannot write problem file " + path.string());
  out << format_problem(problem);
  if (!out) throw ProblemError("failed writing problem file " + path.string());
}

}  // namespace gepde
