#include "qbohm/field_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "qbohm/error.hpp"

namespace qbohm {

std::string format_double(double v) {
  // Shortest representation that round-trips; never more than 17 significant digits.
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error(ErrorKind::io, "cannot format value");
  return std::string(buf, end);
}

std::string grid_header(const Grid& g) {
  std::ostringstream os;
  os << "# grid: dim=" << g.dim();
  for (int d = 0; d < g.dim(); ++d) {
    const Axis& a = g.axis(d);
    os << " axis" << d << "=" << format_double(a.min) << "," << format_double(a.max) << ","
       << a.points;
  }
  return os.str();
}

namespace {

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r')) --last;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw Error(ErrorKind::io, "malformed number '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

}  // namespace

Grid parse_grid_header(const std::string& line) {
  const std::string prefix = "# grid:";
  if (line.rfind(prefix, 0) != 0) throw Error(ErrorKind::io, "missing '# grid:' header");
  std::istringstream is(line.substr(prefix.size()));
  std::string tok;
  int dim = 0;
  std::vector<Axis> axes;
  while (is >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::io, "malformed header token '" + tok + "'");
    std::string key = tok.substr(0, eq);
    std::string val = tok.substr(eq + 1);
    if (key == "dim") {
      dim = static_cast<int>(parse_double(val));
    } else if (key.rfind("axis", 0) == 0) {
      auto parts = split(val, ',');
      if (parts.size() != 3) throw Error(ErrorKind::io, "axis needs min,max,points");
      axes.push_back(Axis{parse_double(parts[0]), parse_double(parts[1]),
                          static_cast<int>(parse_double(parts[2]))});
    } else {
      throw Error(ErrorKind::io, "unknown header key '" + key + "'");
    }
  }
  if (dim == 1 && axes.size() == 1) return Grid(axes[0]);
  if (dim == 2 && axes.size() == 2) return Grid(axes[0], axes[1]);
  throw Error(ErrorKind::io, "header dimension does not match its axes");
}

void write_field_csv(std::ostream& os, const ScalarField& f) {
  const Grid& g = f.grid();
  os << grid_header(g) << '\n';
  if (g.dim() == 1) {
    for (double v : f.values()) os << format_double(v) << '\n';
    return;
  }
  for (int i = 0; i < g.points(0); ++i) {
    for (int j = 0; j < g.points(1); ++j) {
      if (j) os << ',';
      os << format_double(f.at(i, j));
    }
    os << '\n';
  }
}

ScalarField read_field_csv(std::istream& is, Quantity quantity) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::io, "empty field file");
  Grid g = parse_grid_header(line);
  std::vector<double> values;
  values.reserve(g.size());
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    for (const auto& tok : split(line, ',')) values.push_back(parse_double(tok));
  }
  if (values.size() != g.size()) {
    std::ostringstream msg;
    msg << "expected " << g.size() << " values, read " << values.size();
    throw Error(ErrorKind::io, msg.str());
  }
  return ScalarField(g, std::move(values), quantity);
}

void save_field_csv(const std::string& path, const ScalarField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::io, "cannot open " + path + " for writing");
  write_field_csv(os, f);
}

ScalarField load_field_csv(const std::string& path, Quantity quantity) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::io, "cannot open " + path);
  return read_field_csv(is, quantity);
}

void write_masked_csv(std::ostream& os, const ScalarField& f, std::span<const std::uint8_t> valid) {
  if (valid.size() != f.size()) throw Error(ErrorKind::grid_mismatch, "mask length differs from field");
  os << grid_header(f.grid()) << '\n';
  for (std::size_t i = 0; i < f.size(); ++i)
    os << format_double(f[i]) << ',' << (valid[i] ? 1 : 0) << '\n';
}

}  // namespace qbohm
