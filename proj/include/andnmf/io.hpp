#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "andnmf/matrix.hpp"
#include "andnmf/metrics.hpp"
#include "andnmf/solver.hpp"

namespace andnmf::io {

// Binary matrix layout:
//   bytes 0..3   magic "NMF1"
//   bytes 4..7   rows, uint32 little-endian
//   bytes 8..11  cols, uint32 little-endian
//   then rows*cols IEEE-754 binary64 little-endian values, column-major.
inline constexpr std::string_view kMatrixMagic = "NMF1";
inline constexpr std::size_t kMatrixHeaderBytes = 12;

std::string encode_matrix(const DenseMatrix& m);
// `source` names the input in diagnostics, which carry byte offsets.
DenseMatrix decode_matrix(std::string_view bytes, std::string_view source = "<memory>");

void write_matrix(const std::filesystem::path& path, const DenseMatrix& m);
DenseMatrix read_matrix(const std::filesystem::path& path);

// One row per line, comma separated, 17 significant digits.
void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& m);
DenseMatrix read_matrix_csv(const std::filesystem::path& path);

// Dispatches on extension: ".csv" is CSV, anything else binary.
DenseMatrix load_matrix(const std::filesystem::path& path);

inline constexpr std::string_view kTraceHeader = "stage,iter,seconds,alpha,total_error,log10_error,E_norm,N_norm";

// 17 significant digits; NaN is written as an empty field.
std::string format_number(double v);
std::string format_trace_row(const TraceRecord& rec);
TraceRecord parse_trace_row(std::string_view line);

// Streams trace rows to disk as they are produced, flushing each row.
class TraceWriter {
 public:
  explicit TraceWriter(const std::filesystem::path& path);
  void write(const TraceRecord& rec);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

void write_trace(const std::filesystem::path& path, const RunTrace& trace);
RunTrace read_trace(const std::filesystem::path& path);

nlohmann::json to_json(const ErrorReport& report);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace andnmf::io
