#include "rstc/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "binary_format.hpp"
#include "rstc/errors.hpp"

namespace rstc {
namespace {

std::string format_value(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  for (;;) {
    const auto pos = line.find(sep);
    out.push_back(line.substr(0, pos));
    if (pos == std::string_view::npos) return out;
    line = line.substr(pos + 1);
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatErrorKind::kIo, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::size_t parse_count(std::string_view v, const std::string& where) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw FormatError(FormatErrorKind::kMalformed, where + ": expected an integer, got '" +
                                                       std::string(v) + "'");
  }
  return out;
}

double parse_double(std::string_view v, const std::string& where) {
  const std::string s(v);
  char* end = nullptr;
  const double out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw FormatError(FormatErrorKind::kMalformed, where + ": expected a number, got '" + s + "'");
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  }
  return lines;
}

}  // namespace

std::string format_report_csv(const TrainReport& report) {
  std::string out = "step,clusters,change_rate,loss_c,loss_i,acc,nmi";
  for (std::size_t j = 0; j < report.num_classes; ++j) out += ",b_" + std::to_string(j);
  out += '\n';
  const double nan = std::nan("");
  for (const auto& r : report.records) {
    out += std::to_string(r.step) + ',' + std::to_string(r.clusters) + ',' +
           format_value(r.change_rate) + ',' + format_value(r.loss_c) + ',' +
           format_value(r.loss_i) + ',' + format_value(r.acc.value_or(nan)) + ',' +
           format_value(r.nmi.value_or(nan));
    for (double b : r.marginal) out += ',' + format_value(b);
    out += '\n';
  }
  return out;
}

void write_report_csv(const TrainReport& report, const std::filesystem::path& path) {
  detail::write_text_atomic(path, format_report_csv(report));
}

TrainReport parse_report_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw FormatError(FormatErrorKind::kMalformed, "report: empty file");
  const auto header = split(lines[0], ',');
  static constexpr std::string_view kFixed[] = {"step",   "clusters", "change_rate", "loss_c",
                                                "loss_i", "acc",      "nmi"};
  if (header.size() < std::size(kFixed)) {
    throw FormatError(FormatErrorKind::kMalformed, "report: header too short");
  }
  for (std::size_t k = 0; k < std::size(kFixed); ++k) {
    if (header[k] != kFixed[k]) {
      throw FormatError(FormatErrorKind::kMalformed,
                        "report: unexpected header column '" + std::string(header[k]) + "'");
    }
  }
  TrainReport report;
  report.num_classes = header.size() - std::size(kFixed);
  for (std::size_t j = 0; j < report.num_classes; ++j) {
    if (header[std::size(kFixed) + j] != "b_" + std::to_string(j)) {
      throw FormatError(FormatErrorKind::kMalformed, "report: bad marginal column header");
    }
  }
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const std::string where = "report line " + std::to_string(k + 1);
    const auto cells = split(lines[k], ',');
    if (cells.size() != header.size()) {
      throw FormatError(FormatErrorKind::kMalformed, where + ": wrong number of columns");
    }
    TrainRecord r;
    r.step = parse_count(cells[0], where);
    r.clusters = parse_count(cells[1], where);
    r.change_rate = parse_double(cells[2], where);
    r.loss_c = parse_double(cells[3], where);
    r.loss_i = parse_double(cells[4], where);
    const double acc = parse_double(cells[5], where);
    const double nmi = parse_double(cells[6], where);
    if (!std::isnan(acc)) r.acc = acc;
    if (!std::isnan(nmi)) r.nmi = nmi;
    for (std::size_t j = 0; j < report.num_classes; ++j) {
      r.marginal.push_back(parse_double(cells[std::size(kFixed) + j], where));
    }
    report.records.push_back(std::move(r));
  }
  return report;
}

TrainReport read_report_csv(const std::filesystem::path& path) {
  return parse_report_csv(read_text(path));
}

void write_assignments(std::span<const std::size_t> labels, const std::filesystem::path& path) {
  std::string out;
  for (std::size_t label : labels) out += std::to_string(label) + '\n';
  detail::write_text_atomic(path, out);
}

std::vector<std::size_t> read_assignments(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  std::vector<std::size_t> labels;
  const auto lines = lines_of(text);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    labels.push_back(parse_count(lines[k], path.string() + " line " + std::to_string(k + 1)));
  }
  return labels;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  detail::write_text_atomic(path, text);
}

}  // namespace rstc
