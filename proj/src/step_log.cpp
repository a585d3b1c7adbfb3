#include "seismic_htm/step_log.hpp"

#include <charconv>
#include <cstdlib>
#include <string_view>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "seismic_htm/errors.hpp"

namespace seismic_htm {

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

StepLogWriter::StepLogWriter(std::ostream& out) : out_(out) {
  out_ << "t,value,predicted,anomaly,jitter\n";
}

void StepLogWriter::write(const StepRecord& r) {
  out_ << r.t << ',' << format_real(r.value) << ',';
  if (r.predicted_value) out_ << format_real(*r.predicted_value);
  out_ << ',' << format_real(r.anomaly_score) << ',' << (r.jitter_active ? 1 : 0) << '\n';
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_real(std::string_view s, double& out) {
  if (s.empty()) return false;
  // strtod accepts the %.9g spellings including inf/nan.
  std::string tmp(s);
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size();
}

bool parse_u64(std::string_view s, std::uint64_t& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

} // namespace

std::vector<StepRecord> read_step_log(std::istream& in) {
  std::vector<StepRecord> records;
  std::string line;
  std::size_t line_no = 0;
  const auto bad = [&](const std::string& why) {
    throw FormatError("step log line " + std::to_string(line_no) + ": " + why);
  };

  if (!std::getline(in, line)) {
    line_no = 1;
    bad("missing header");
  }
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,value,predicted,anomaly,jitter") bad("unexpected header '" + line + "'");

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 5) bad("expected 5 fields, found " + std::to_string(f.size()));
    StepRecord r;
    if (!parse_u64(f[0], r.t)) bad("bad step index");
    if (!parse_real(f[1], r.value) || !std::isfinite(r.value)) bad("bad value");
    if (!f[2].empty()) {
      double p;
      if (!parse_real(f[2], p) || !std::isfinite(p)) bad("bad prediction");
      r.predicted_value = p;
    }
    if (!parse_real(f[3], r.anomaly_score) || !(r.anomaly_score >= 0.0 && r.anomaly_score <= 1.0)) {
      bad("anomaly must be a number in [0, 1]");
    }
    if (f[4] == "1") {
      r.jitter_active = true;
    } else if (f[4] != "0") {
      bad("jitter must be 0 or 1");
    }
    records.push_back(r);
  }
  return records;
}

std::vector<StepRecord> read_step_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open step log " + path.string());
  return read_step_log(in);
}

void write_window_stats(std::ostream& out, std::span<const WindowStats> windows) {
  out << "window,rms_error,mean_abs_error,mean_anomaly\n";
  for (const auto& w : windows) {
    out << w.window_index << ',' << format_real(w.rms_error) << ','
        << format_real(w.mean_abs_error) << ',' << format_real(w.mean_anomaly) << '\n';
  }
}

void write_signal_header(std::ostream& out) { out << "t,value,jitter_active\n"; }

void write_signal_row(std::ostream& out, const Sample& s) {
  out << s.t << ',' << format_real(s.value) << ',' << (s.jitter_active ? 1 : 0) << '\n';
}

} // namespace seismic_htm
