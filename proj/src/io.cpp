#include "prmix/io.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <system_error>
#include <utility>

#include "prmix/errors.hpp"

#ifndef PRMIX_VERSION
#define PRMIX_VERSION "0.0.0"
#endif

namespace prmix::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void malformed(const std::string& label, std::size_t line, const std::string& why) {
  throw DataError(label + ":" + std::to_string(line) + ": " + why);
}

}  // namespace

DataFormat parse_data_format(std::string_view text) {
  if (text == "csv-values" || text == "values") return DataFormat::Values;
  if (text == "csv-frequency" || text == "frequency") return DataFormat::Frequency;
  throw ConfigError("unknown data format '" + std::string(text) +
                    "' (expected csv-values or csv-frequency)");
}

std::string to_string(DataFormat format) {
  return format == DataFormat::Values ? "csv-values" : "csv-frequency";
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  // from_chars rejects a leading '+', which hand-written files do contain.
  if (text.front() == '+') text.remove_prefix(1);
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size() && std::isfinite(out);
}

Dataset ingest_text(std::string_view text, DataFormat format, std::string label) {
  Dataset ds;
  ds.label = std::move(label);
  std::vector<std::pair<double, long long>> freq;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;

    if (format == DataFormat::Values) {
      double v = 0.0;
      if (!parse_double(line, v)) malformed(ds.label, line_no, "expected one number, got '" + std::string(line) + "'");
      ds.observations.push_back(v);
    } else {
      const auto comma = line.find(',');
      if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
        malformed(ds.label, line_no, "expected 'value,count', got '" + std::string(line) + "'");
      }
      double v = 0.0;
      if (!parse_double(line.substr(0, comma), v)) malformed(ds.label, line_no, "bad value");
      const auto count_text = trim(line.substr(comma + 1));
      long long count = 0;
      const auto res =
          std::from_chars(count_text.data(), count_text.data() + count_text.size(), count);
      if (res.ec != std::errc() || res.ptr != count_text.data() + count_text.size()) {
        malformed(ds.label, line_no, "count must be an integer");
      }
      if (count < 1) malformed(ds.label, line_no, "count must be at least 1");
      freq.emplace_back(v, count);
    }
  }
  if (format == DataFormat::Frequency) {
    std::stable_sort(freq.begin(), freq.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [v, c] : freq) ds.observations.insert(ds.observations.end(), c, v);
  }
  if (ds.observations.empty()) throw DataError(ds.label + ": no observations");
  return ds;
}

Dataset ingest(const std::filesystem::path& path, DataFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read data file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ingest_text(ss.str(), format, path.string());
}

void write_estimate(std::ostream& out, const SupportSet& support, const MixingVector& weights) {
  if (support.size() != weights.size()) throw DomainError("support and weights differ in size");
  out << "support,weight\n";
  for (std::size_t i = 0; i < support.size(); ++i) {
    out << format_double(support[i]) << ',' << format_double(weights[i]) << '\n';
  }
}

Estimate read_estimate(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> u, w;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (!header) {
      if (t != "support,weight") malformed("estimate", line_no, "missing 'support,weight' header");
      header = true;
      continue;
    }
    const auto comma = t.find(',');
    double a = 0.0, b = 0.0;
    if (comma == std::string_view::npos || !parse_double(t.substr(0, comma), a) ||
        !parse_double(t.substr(comma + 1), b)) {
      malformed("estimate", line_no, "expected 'support,weight'");
    }
    u.push_back(a);
    w.push_back(b);
  }
  if (u.empty()) throw DataError("estimate: no rows");
  try {
    return Estimate{SupportSet(std::move(u)), MixingVector(std::move(w), 1e-9)};
  } catch (const DomainError& e) {
    throw DataError(std::string("estimate: ") + e.what());
  }
}

Estimate read_estimate(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read estimate file " + path.string());
  return read_estimate(in);
}

std::vector<double> seeded_order(std::span<const double> data, std::uint64_t seed) {
  std::vector<double> out(data.begin(), data.end());
  std::mt19937_64 rng(seed);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

OutputDirectory::OutputDirectory(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir_.string() + ": " + ec.message());
  lock_ = dir_ / kLockName;
  const int fd = ::open(lock_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    throw ConfigError("output directory " + dir_.string() + " is locked by another run (" +
                      lock_.string() + ")");
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const auto written = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

OutputDirectory::~OutputDirectory() {
  std::error_code ec;
  std::filesystem::remove(lock_, ec);
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* version() noexcept { return PRMIX_VERSION; }

}  // namespace prmix::io
