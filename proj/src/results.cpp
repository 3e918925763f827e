#include "fpp/results.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fpp/config.hpp"

namespace fpp {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double_field(const std::string& s) {
  const char* begin = s.c_str();
  char* end = nullptr;
  double x = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw ConfigError("results: malformed numeric field '" + s + "'");
  return x;
}

template <class T, class Parse>
std::optional<T> parse_optional(const std::string& s, Parse&& parse) {
  if (s.empty()) return std::nullopt;
  return parse(s);
}

std::string opt_double(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string to_csv_line(const ResultRow& row) {
  std::ostringstream out;
  out << row.experiment << ',' << row.model << ',';
  if (row.d) out << *row.d;
  out << ',' << opt_double(row.r) << ',' << opt_double(row.alpha) << ','
      << opt_double(row.xi) << ',';
  if (row.n) out << *row.n;
  out << ',' << row.estimator << ',' << opt_double(row.p_hat) << ','
      << opt_double(row.std_error) << ',' << opt_double(row.log_p) << ','
      << opt_double(row.bound) << ',' << row.seed << ','
      << opt_double(row.walltime_ms);
  return out.str();
}

ResultRow parse_csv_line(const std::string& line) {
  std::vector<std::string> f = split_fields(line);
  if (f.size() != 14)
    throw ConfigError("results: expected 14 columns, got " +
                      std::to_string(f.size()));
  auto as_double = [](const std::string& s) { return parse_double_field(s); };
  ResultRow row;
  row.experiment = f[0];
  row.model = f[1];
  row.d = parse_optional<int>(
      f[2], [](const std::string& s) { return std::stoi(s); });
  row.r = parse_optional<double>(f[3], as_double);
  row.alpha = parse_optional<double>(f[4], as_double);
  row.xi = parse_optional<double>(f[5], as_double);
  row.n = parse_optional<std::int64_t>(
      f[6], [](const std::string& s) { return std::stoll(s); });
  row.estimator = f[7];
  row.p_hat = parse_optional<double>(f[8], as_double);
  row.std_error = parse_optional<double>(f[9], as_double);
  row.log_p = parse_optional<double>(f[10], as_double);
  row.bound = parse_optional<double>(f[11], as_double);
  row.seed = std::strtoull(f[12].c_str(), nullptr, 10);
  row.walltime_ms = parse_optional<double>(f[13], as_double);
  return row;
}

void write_results_csv(const std::string& path,
                       const std::vector<ResultRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write results file: " + path);
  out << kResultsSchema << '\n' << kResultsHeader << '\n';
  for (const ResultRow& row : rows) out << to_csv_line(row) << '\n';
  if (!out) throw ConfigError("write failed: " + path);
}

std::vector<ResultRow> read_results_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read results file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kResultsSchema)
    throw ConfigError("results: missing schema line in " + path);
  if (!std::getline(in, line) || line != kResultsHeader)
    throw ConfigError("results: missing header line in " + path);
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(parse_csv_line(line));
  }
  return rows;
}

bool results_equal_modulo_walltime(const std::string& path_a,
                                   const std::string& path_b) {
  auto load_lines = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read results file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
  };
  std::vector<std::string> a = load_lines(path_a), b = load_lines(path_b);
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i < 2) {
      if (a[i] != b[i]) return false;
      continue;
    }
    std::size_t ca = a[i].rfind(','), cb = b[i].rfind(',');
    if (ca == std::string::npos || cb == std::string::npos)
      return a[i] == b[i];
    if (a[i].compare(0, ca, b[i], 0, cb) != 0) return false;
  }
  return true;
}

}  // namespace fpp
