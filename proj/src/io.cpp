#include "andnmf/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <sstream>
#include <vector>

#include "andnmf/errors.hpp"

namespace andnmf::io {

namespace {

template <class T>
void put_le(std::string& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFFu));
}

template <class T>
T get_le(std::string_view bytes, std::size_t offset) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<T>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  return v;
}

[[noreturn]] void malformed(std::string_view source, std::size_t offset, const std::string& what) {
  std::ostringstream os;
  os << source << ": malformed matrix file at byte " << offset << ": " << what;
  throw IoError(os.str());
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// strtod-compatible parse that also accepts inf/-inf; empty -> NaN.
double parse_number(std::string_view field, std::string_view context) {
  field = trim(field);
  if (field.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::string tmp(field);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size()) {
    std::ostringstream os;
    os << context << ": cannot parse number '" << tmp << "'";
    throw IoError(os.str());
  }
  return v;
}

}  // namespace

std::string encode_matrix(const DenseMatrix& m) {
  if (m.rows() > std::numeric_limits<std::uint32_t>::max() || m.cols() > std::numeric_limits<std::uint32_t>::max())
    throw ValidationError("encode_matrix: dimensions exceed 32 bits");
  std::string out;
  out.reserve(kMatrixHeaderBytes + static_cast<std::size_t>(m.rows() * m.cols()) * 8);
  out.append(kMatrixMagic);
  put_le(out, static_cast<std::uint32_t>(m.rows()));
  put_le(out, static_cast<std::uint32_t>(m.cols()));
  const Eigen::MatrixXd& v = m.values();
  for (Index j = 0; j < v.cols(); ++j)
    for (Index i = 0; i < v.rows(); ++i) put_le(out, std::bit_cast<std::uint64_t>(v(i, j)));
  return out;
}

DenseMatrix decode_matrix(std::string_view bytes, std::string_view source) {
  if (bytes.size() < kMatrixHeaderBytes) {
    std::ostringstream os;
    os << "header truncated (" << bytes.size() << " of " << kMatrixHeaderBytes << " bytes)";
    malformed(source, bytes.size(), os.str());
  }
  if (bytes.substr(0, 4) != kMatrixMagic) malformed(source, 0, "bad magic, expected \"NMF1\"");
  const auto rows = get_le<std::uint32_t>(bytes, 4);
  const auto cols = get_le<std::uint32_t>(bytes, 8);
  if (rows == 0) malformed(source, 4, "row count is zero");
  if (cols == 0) malformed(source, 8, "column count is zero");
  const std::uint64_t count = static_cast<std::uint64_t>(rows) * cols;
  const std::uint64_t expected = kMatrixHeaderBytes + count * 8;
  if (bytes.size() != expected) {
    std::ostringstream os;
    os << (bytes.size() < expected ? "payload truncated" : "trailing bytes") << ": " << rows << "x" << cols
       << " needs " << expected << " bytes, file has " << bytes.size();
    malformed(source, std::min<std::uint64_t>(bytes.size(), expected), os.str());
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t offset = kMatrixHeaderBytes;
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i, offset += 8) {
      const double v = std::bit_cast<double>(get_le<std::uint64_t>(bytes, offset));
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "non-finite value at (" << i << ", " << j << ")";
        malformed(source, offset, os.str());
      }
      m(i, j) = v;
    }
  }
  return DenseMatrix(std::move(m));
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_matrix(const std::filesystem::path& path, const DenseMatrix& m) { write_text(path, encode_matrix(m)); }

DenseMatrix read_matrix(const std::filesystem::path& path) { return decode_matrix(read_text(path), path.string()); }

std::string format_number(double v) {
  if (std::isnan(v)) return {};
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& m) {
  std::string text;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) text.push_back(',');
      text += format_number(m(i, j));
    }
    text.push_back('\n');
  }
  write_text(path, text);
}

DenseMatrix read_matrix_csv(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    const std::string_view line = trim(std::string_view(text).substr(start, end - start));
    start = end + 1;
    if (line.empty()) continue;
    std::vector<double> row;
    for (auto field : split(line, ',')) {
      const std::string ctx = path.string() + ":" + std::to_string(line_no);
      const double v = parse_number(field, ctx);
      if (!std::isfinite(v)) throw IoError(ctx + ": missing or non-finite value");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path.string() + ": empty CSV matrix");
  Eigen::MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return DenseMatrix(std::move(m));
}

DenseMatrix load_matrix(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return read_matrix_csv(path);
  return read_matrix(path);
}

std::string format_trace_row(const TraceRecord& rec) {
  std::string s;
  s += std::to_string(rec.stage);
  s += ',';
  s += std::to_string(rec.iter);
  for (double v : {rec.seconds, rec.alpha, rec.total_error, rec.log10_error, rec.e_norm, rec.n_norm}) {
    s += ',';
    s += format_number(v);
  }
  return s;
}

TraceRecord parse_trace_row(std::string_view line) {
  const auto fields = split(trim(line), ',');
  if (fields.size() != 8) throw IoError("trace row must have 8 fields: " + std::string(line));
  TraceRecord rec;
  rec.stage = static_cast<Index>(parse_number(fields[0], "trace stage"));
  rec.iter = static_cast<Index>(parse_number(fields[1], "trace iter"));
  rec.seconds = parse_number(fields[2], "trace seconds");
  rec.alpha = parse_number(fields[3], "trace alpha");
  rec.total_error = parse_number(fields[4], "trace total_error");
  rec.log10_error = parse_number(fields[5], "trace log10_error");
  rec.e_norm = parse_number(fields[6], "trace E_norm");
  rec.n_norm = parse_number(fields[7], "trace N_norm");
  return rec;
}

TraceWriter::TraceWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::trunc) {
  if (!out_) throw IoError("cannot open " + path.string() + " for writing");
  out_ << kTraceHeader << '\n';
  out_.flush();
}

void TraceWriter::write(const TraceRecord& rec) {
  out_ << format_trace_row(rec) << '\n';
  out_.flush();
  if (!out_) throw IoError("failed writing " + path_.string());
}

void write_trace(const std::filesystem::path& path, const RunTrace& trace) {
  TraceWriter w(path);
  for (const auto& rec : trace.records) w.write(rec);
}

RunTrace read_trace(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != kTraceHeader)
    throw IoError(path.string() + ": missing or wrong trace header");
  RunTrace trace;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    trace.records.push_back(parse_trace_row(line));
  }
  return trace;
}

nlohmann::json to_json(const ErrorReport& report) {
  return nlohmann::json{{"per_column", report.per_column},
                        {"total", report.total},
                        {"matches", report.matched_column_indices},
                        {"scales", report.matched_scales}};
}

}  // namespace andnmf::io
