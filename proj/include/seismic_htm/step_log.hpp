#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "seismic_htm/detector.hpp"
#include "seismic_htm/signal_synth.hpp"

namespace seismic_htm {

/// Step log CSV: `t,value,predicted,anomaly,jitter`. Reals use 9 significant
/// digits; an absent prediction is an empty field; jitter is 0 or 1.
class StepLogWriter {
public:
  explicit StepLogWriter(std::ostream& out);
  void write(const StepRecord& r);

private:
  std::ostream& out_;
};

/// Parses a step log. Throws FormatError naming the 1-based line of the
/// first malformed row.
std::vector<StepRecord> read_step_log(std::istream& in);
std::vector<StepRecord> read_step_log(const std::filesystem::path& path);

/// `window,rms_error,mean_abs_error,mean_anomaly`
void write_window_stats(std::ostream& out, std::span<const WindowStats> windows);

/// Signal export: `t,value,jitter_active`
void write_signal_header(std::ostream& out);
void write_signal_row(std::ostream& out, const Sample& s);

/// printf("%.9g")
std::string format_real(double v);

} // namespace seismic_htm
