#pragma once

// CSV formats for response matrices, spectra and counts. Numbers are written
// with 17 significant digits so a write/read cycle is bit-exact.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "specunfold/core.hpp"

namespace specunfold {

/// A file that could not be parsed; carries the path and 1-based line.
class ParseError : public ValidationError {
 public:
  ParseError(std::string file, std::size_t line, const std::string& what)
      : ValidationError(file + ":" + std::to_string(line) + ": " + what),
        file_(std::move(file)),
        line_(line) {}
  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool try_parse_number(std::string_view token, double& out) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  if (token.empty()) return false;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), out);
  return res.ec == std::errc{} && res.ptr == token.data() + token.size();
}

/// Non-blank lines of a file with their 1-based line numbers.
struct Line {
  std::size_t number;
  std::string text;
};

inline std::vector<Line> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::vector<Line> lines;
  std::string text;
  std::size_t number = 0;
  while (std::getline(in, text)) {
    ++number;
    if (trim(text).empty()) continue;
    lines.push_back({number, text});
  }
  return lines;
}

inline std::vector<double> parse_row(const std::string& file, const Line& line,
                                     std::size_t expected) {
  const auto fields = split_fields(line.text);
  if (expected != 0 && fields.size() != expected)
    throw ParseError(file, line.number,
                     "expected " + std::to_string(expected) + " values, found " +
                         std::to_string(fields.size()));
  std::vector<double> row;
  row.reserve(fields.size());
  for (auto f : fields) {
    double v = 0.0;
    if (!try_parse_number(f, v))
      throw ParseError(file, line.number,
                       "not a number: '" + std::string(f) + "'");
    row.push_back(v);
  }
  return row;
}

/// Re-throws a type-invariant failure as a ParseError pointing at the file.
template <typename F>
auto with_file_context(const std::string& file, std::size_t line, F&& make) {
  try {
    return make();
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ParseError(file, line, e.what());
  }
}

}  // namespace detail

/// Writes `content` to a sibling temp file, then renames over `path`.
inline void write_text_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// --- response matrix: "# response m=<m> n=<n>" then m rows of n values ---

inline std::string format_response(const ResponseMatrix& r) {
  std::string s = "# response m=" + std::to_string(r.rows()) +
                  " n=" + std::to_string(r.cols()) + "\n";
  for (std::size_t j = 0; j < r.rows(); ++j) {
    for (std::size_t i = 0; i < r.cols(); ++i) {
      if (i) s += ',';
      s += format_number(r(j, i));
    }
    s += '\n';
  }
  return s;
}

inline ResponseMatrix read_response(const std::filesystem::path& path) {
  const auto file = path.string();
  const auto lines = detail::read_lines(path);
  if (lines.empty()) throw ParseError(file, 1, "empty response file");
  std::size_t m = 0, n = 0;
  {
    const auto& h = lines.front();
    unsigned long mm = 0, nn = 0;
    char tail = 0;
    if (std::sscanf(h.text.c_str(), " # response m=%lu n=%lu %c", &mm, &nn,
                    &tail) != 2 ||
        mm == 0 || nn == 0)
      throw ParseError(file, h.number,
                       "expected header '# response m=<m> n=<n>'");
    m = mm;
    n = nn;
  }
  if (lines.size() - 1 != m)
    throw ParseError(file, lines.back().number,
                     "expected " + std::to_string(m) + " rows, found " +
                         std::to_string(lines.size() - 1));
  std::vector<double> values;
  values.reserve(m * n);
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto row = detail::parse_row(file, lines[k], n);
    values.insert(values.end(), row.begin(), row.end());
  }
  return detail::with_file_context(file, lines.front().number, [&] {
    return ResponseMatrix(m, n, std::move(values));
  });
}

// --- spectrum: header, floor boundary row, then n rows "upper,fluence" ---

inline std::string format_spectrum(const Spectrum& s) {
  const auto& g = s.grid();
  std::string out = "# spectrum n=" + std::to_string(s.size()) + "\n";
  out += "group_upper_bound_MeV,fluence\n";
  out += format_number(g.lower(0)) + "\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    out += format_number(g.upper(i)) + "," + format_number(s[i]) + "\n";
  return out;
}

inline Spectrum read_spectrum(const std::filesystem::path& path) {
  const auto file = path.string();
  std::vector<detail::Line> data;
  for (auto& l : detail::read_lines(path)) {
    const auto t = detail::trim(l.text);
    if (t.front() == '#') continue;
    double probe = 0.0;
    if (data.empty() &&
        !detail::try_parse_number(detail::split_fields(t).front(), probe))
      continue;  // column header
    data.push_back(std::move(l));
  }
  if (data.size() < 2)
    throw ParseError(file, data.empty() ? 1 : data.back().number,
                     "spectrum needs a floor row and at least one group");
  std::vector<double> boundaries;
  std::vector<double> fluence;
  const auto floor = detail::parse_row(file, data.front(), 0);
  if (floor.size() != 1 && floor.size() != 2)
    throw ParseError(file, data.front().number,
                     "floor row must hold one boundary value");
  boundaries.push_back(floor.front());
  for (std::size_t k = 1; k < data.size(); ++k) {
    const auto row = detail::parse_row(file, data[k], 2);
    boundaries.push_back(row[0]);
    fluence.push_back(row[1]);
  }
  return detail::with_file_context(file, data.front().number, [&] {
    return Spectrum(EnergyGrid(std::move(boundaries)), std::move(fluence));
  });
}

// --- counts: one value per line ---

inline std::string format_counts(std::span<const double> counts) {
  std::string out = "# counts m=" + std::to_string(counts.size()) + "\n";
  for (double c : counts) out += format_number(c) + "\n";
  return out;
}

inline DetectorCounts read_counts(const std::filesystem::path& path) {
  const auto file = path.string();
  std::vector<double> values;
  for (const auto& l : detail::read_lines(path)) {
    if (detail::trim(l.text).front() == '#') continue;
    const double v = detail::parse_row(file, l, 1).front();
    if (!(v > 0.0) || !std::isfinite(v))
      throw ParseError(file, l.number, "detector count must be finite and > 0");
    values.push_back(v);
  }
  if (values.empty()) throw ParseError(file, 1, "no detector counts");
  return DetectorCounts(std::move(values));
}

}  // namespace specunfold
