#include "dfl/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dfl/errors.hpp"

namespace dfl {

namespace {

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(tok);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  std::size_t b = s.find_last_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

} // namespace

void write_density_csv(const std::string& path, const DiscreteDensity& rho) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  const Grid& g = rho.grid();
  const char* headers[3] = {"x,rho", "x,y,rho", "x,y,z,rho"};
  out << headers[g.dim() - 1] << "\n";
  // lexicographic in coordinates: last axis fastest would be reversed; we
  // emit in axis-major order (x slowest), matching the reader
  std::vector<std::size_t> multi(g.dim(), 0);
  for (;;) {
    std::size_t idx = g.ravel(multi);
    auto c = g.center(idx);
    for (int a = 0; a < g.dim(); ++a) out << format_full(c[a]) << ",";
    out << format_full(rho.value(idx)) << "\n";
    int a = g.dim() - 1;
    while (a >= 0) {
      if (++multi[a] < g.cells(a)) break;
      multi[a] = 0;
      --a;
    }
    if (a < 0) break;
  }
}

DiscreteDensity read_density_csv(const std::string& path, const std::optional<Grid>& declared,
                                 Boundary boundary) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open density file '" + path + "'");
  std::string header;
  if (!std::getline(in, header)) throw InputError("empty density file '" + path + "'");
  auto cols = split(trim(header), ',');
  int d = static_cast<int>(cols.size()) - 1;
  if (d < 1 || d > 3 || trim(cols.back()) != "rho")
    throw InputError("density header must be x[,y[,z]],rho");

  std::vector<std::vector<double>> coords(d);
  std::vector<double> values;
  std::vector<std::vector<double>> rows;
  std::string line;
  long long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto toks = split(line, ',');
    if (static_cast<int>(toks.size()) != d + 1)
      throw InputError("density file line " + std::to_string(lineno) + ": wrong column count");
    std::vector<double> row(d + 1);
    for (int a = 0; a <= d; ++a) row[a] = std::stod(toks[a]);
    rows.push_back(row);
  }
  if (rows.empty()) throw InputError("density file has no data rows");

  // strictly lexicographically increasing coordinate tuples
  for (std::size_t r = 1; r < rows.size(); ++r) {
    bool greater = false;
    for (int a = 0; a < d; ++a) {
      if (rows[r][a] > rows[r - 1][a] + 1e-15) {
        greater = true;
        break;
      }
      if (rows[r][a] < rows[r - 1][a] - 1e-15) break;
    }
    if (!greater)
      throw InputError("density coordinates must be strictly lexicographically increasing "
                       "(row " + std::to_string(r + 2) + ")");
  }

  Grid grid = [&]() -> Grid {
    if (declared) return *declared;
    // infer per-axis centers
    std::vector<std::vector<double>> axis(d);
    for (const auto& row : rows)
      for (int a = 0; a < d; ++a) {
        auto& v = axis[a];
        bool found = false;
        for (double x : v)
          if (std::abs(x - row[a]) < 1e-12) found = true;
        if (!found) v.push_back(row[a]);
      }
    std::vector<std::size_t> cells(d);
    std::vector<double> lengths(d);
    for (int a = 0; a < d; ++a) {
      std::sort(axis[a].begin(), axis[a].end());
      std::size_t m = axis[a].size();
      double h = m > 1 ? axis[a][1] - axis[a][0] : 2.0 * axis[a][0];
      for (std::size_t j = 1; j < m; ++j)
        if (std::abs(axis[a][j] - axis[a][j - 1] - h) > 1e-9 * h)
          throw InputError("density grid spacing is not uniform along an axis");
      if (std::abs(axis[a][0] - 0.5 * h) > 1e-9 * h)
        throw InputError("density centers must start at half a spacing from the origin");
      cells[a] = m;
      lengths[a] = h * double(m);
    }
    return Grid(cells, lengths, boundary);
  }();

  if (rows.size() != grid.size())
    throw InputError("density file row count does not match the grid");
  std::vector<double> masses(grid.size(), 0.0);
  const double h = grid.cell_volume();
  std::size_t r = 0;
  std::vector<std::size_t> multi(d, 0);
  for (;;) {
    std::size_t idx = grid.ravel(multi);
    auto c = grid.center(idx);
    for (int a = 0; a < d; ++a)
      if (std::abs(c[a] - rows[r][a]) > 1e-7 * (1.0 + std::abs(c[a])))
        throw InputError("density coordinates do not match the declared grid near row " +
                         std::to_string(r + 2));
    double v = rows[r][d];
    if (v < 0.0) throw InputError("negative density at " + format_coordinate(c));
    masses[idx] = v * h;
    ++r;
    int a = d - 1;
    while (a >= 0) {
      if (++multi[a] < grid.cells(a)) break;
      multi[a] = 0;
      --a;
    }
    if (a < 0) break;
  }
  return DiscreteDensity(grid, masses);
}

unsigned long long fnv1a64(const std::string& bytes) {
  unsigned long long hash = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

unsigned long long digest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "' for digest");
  std::stringstream ss;
  ss << in.rdbuf();
  return fnv1a64(ss.str());
}

std::map<std::string, std::string> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line, section;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("config line without '=': " + line);
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    out[section.empty() ? key : section + "." + key] = val;
  }
  return out;
}

Json result_envelope(const RunMeta& meta, const Json& inputs, const Json& outputs,
                     const Json& tolerances) {
  Json j;
  j["command"] = meta.subcommand;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  Json m;
  m["tolerances"] = tolerances;
  m["seed"] = meta.seed;
  m["params"] = meta.params;
  m["input_digests"] = meta.input_digests;
  m["version"] = tool_version();
  m["wall_time_s"] = meta.wall_time_s;
  j["meta"] = m;
  return j;
}

std::string tool_version() { return "0.1.0"; }

} // namespace dfl
