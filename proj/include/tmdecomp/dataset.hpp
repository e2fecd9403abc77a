#ifndef TMDECOMP_DATASET_HPP
#define TMDECOMP_DATASET_HPP

// Traffic matrices on disk and in memory, per-flow noise scale estimation,
// and persistence of decompositions.
//
// CSV: one row per time sample, comma separated, optional header row of flow
// ids. Binary: 8-byte header (T, P as little-endian uint32) followed by T*P
// little-endian float64 values in column-major order.

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "tmdecomp/common.hpp"

namespace tmdecomp {

/// T x P matrix of traffic volumes: rows are time samples, columns OD flows.
struct TrafficMatrix {
  Matrix data;
  int interval_seconds = 300;
  std::vector<std::string> flow_ids;

  Index samples() const { return data.rows(); }
  Index flows() const { return data.cols(); }

  /// Wraps a matrix, generating flow ids "f1".."fP".
  static TrafficMatrix from(Matrix m, int interval_seconds = 300) {
    TrafficMatrix tm{std::move(m), interval_seconds, {}};
    tm.flow_ids.reserve(static_cast<std::size_t>(tm.flows()));
    for (Index j = 0; j < tm.flows(); ++j) tm.flow_ids.push_back("f" + std::to_string(j + 1));
    tm.validate();
    return tm;
  }

  void validate() const {
    require(data.rows() >= 2, "traffic matrix needs at least 2 time samples");
    require(data.cols() >= 1, "traffic matrix needs at least 1 flow");
    require(interval_seconds > 0, "sampling interval must be positive");
    require(flow_ids.size() == static_cast<std::size_t>(data.cols()),
            "flow id count does not match column count");
    std::unordered_set<std::string> seen(flow_ids.begin(), flow_ids.end());
    require(seen.size() == flow_ids.size(), "flow ids must be distinct");
    for (Index j = 0; j < data.cols(); ++j)
      for (Index i = 0; i < data.rows(); ++i)
        if (!std::isfinite(data(i, j)))
          throw InputError("non-finite entry at row " + std::to_string(i + 1) + ", column " +
                           std::to_string(j + 1));
  }
};

/// Per-flow noise standard deviations.
struct NoiseScales {
  Vector sigma;
  /// 0-based columns whose estimate was clamped to the floor.
  std::vector<Index> floored;
};

/// Solver diagnostics attached to a decomposition.
struct Diagnostics {
  int iterations = 0;
  bool converged = false;
  double final_mu = 0.0;
  double residual_fro = 0.0;
  std::vector<double> objective_trace;
  std::vector<double> mu_trace;
};

/// Additive split X = A + E + N: low-rank, sparse and noise parts.
struct Decomposition {
  Matrix A, E, N;
  Diagnostics diagnostics;

  static Decomposition zeros(Index rows, Index cols) {
    return {Matrix::Zero(rows, cols), Matrix::Zero(rows, cols), Matrix::Zero(rows, cols), {}};
  }
  Matrix sum() const { return A + E + N; }
};

enum class MatrixFormat { csv, binary };

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

inline bool parse_double(std::string_view field, double& value) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  if (field.empty()) return false;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  return ec == std::errc() && ptr == field.data() + field.size();
}

inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

inline std::string cell_name(std::size_t row, std::size_t col) {
  return "row " + std::to_string(row) + ", column " + std::to_string(col);
}

inline void write_u32(std::ostream& os, std::uint32_t v) {
  std::array<unsigned char, 4> b{};
  for (int i = 0; i < 4; ++i) b[std::size_t(i)] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b.data()), 4);
}

inline void write_f64(std::ostream& os, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  std::array<unsigned char, 8> b{};
  for (int i = 0; i < 8; ++i) b[std::size_t(i)] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b.data()), 8);
}

template <std::size_t N>
std::uint64_t read_le(std::istream& is, const std::string& what) {
  std::array<unsigned char, N> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), N))
    throw InputError("truncated binary matrix while reading " + what);
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < N; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

inline TrafficMatrix parse_csv(std::istream& in, int interval_seconds) {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> header;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (rows.empty() && header.empty()) {
      // A first row without a single numeric field is a header of flow ids.
      bool any_numeric = false;
      double dummy = 0;
      for (auto f : fields) any_numeric = any_numeric || parse_double(f, dummy);
      if (!any_numeric) {
        for (auto f : fields) header.emplace_back(f);
        width = fields.size();
        continue;
      }
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width)
      throw InputError("ragged CSV: line " + std::to_string(line_no) + " has " +
                       std::to_string(fields.size()) + " fields, expected " + std::to_string(width));
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) {
      if (!parse_double(fields[c], row[c]))
        throw InputError("non-numeric value '" + std::string(fields[c]) + "' at " +
                         cell_name(rows.size() + 1, c + 1));
      if (!std::isfinite(row[c]))
        throw InputError("non-finite value '" + std::string(fields[c]) + "' at " +
                         cell_name(rows.size() + 1, c + 1));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError("CSV contains no data rows");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < width; ++c) m(Index(r), Index(c)) = rows[r][c];
  if (header.empty()) return TrafficMatrix::from(std::move(m), interval_seconds);
  TrafficMatrix tm{std::move(m), interval_seconds, std::move(header)};
  tm.validate();
  return tm;
}

inline TrafficMatrix parse_binary(std::istream& in, int interval_seconds) {
  const auto rows = read_le<4>(in, "header");
  const auto cols = read_le<4>(in, "header");
  if (rows == 0 || cols == 0) throw InputError("binary matrix header has a zero dimension");
  const auto here = in.tellg();
  if (here != std::streampos(-1)) {
    in.seekg(0, std::ios::end);
    const auto payload = static_cast<std::uint64_t>(in.tellg() - here);
    in.seekg(here);
    if (payload != rows * cols * 8)
      throw InputError("binary payload is " + std::to_string(payload) + " bytes, header declares " +
                       std::to_string(rows) + " x " + std::to_string(cols) + " doubles");
  }
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) {
      const auto bits = read_le<8>(in, detail::cell_name(std::size_t(i + 1), std::size_t(j + 1)));
      m(i, j) = std::bit_cast<double>(bits);
      if (!std::isfinite(m(i, j)))
        throw InputError("non-finite value at " + cell_name(std::size_t(i + 1), std::size_t(j + 1)));
    }
  if (in.peek() != std::char_traits<char>::eof())
    throw InputError("trailing bytes after binary matrix payload");
  return TrafficMatrix::from(std::move(m), interval_seconds);
}

}  // namespace detail

inline TrafficMatrix parse_matrix(std::istream& in, MatrixFormat format, int interval_seconds = 300) {
  return format == MatrixFormat::csv ? detail::parse_csv(in, interval_seconds)
                                     : detail::parse_binary(in, interval_seconds);
}

inline TrafficMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format,
                                 int interval_seconds = 300) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return parse_matrix(in, format, interval_seconds);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

inline void write_csv(std::ostream& os, const Matrix& m, const std::vector<std::string>* header = nullptr) {
  if (header) {
    for (std::size_t j = 0; j < header->size(); ++j) os << (j ? "," : "") << (*header)[j];
    os << '\n';
  }
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << detail::format_double(m(i, j));
    os << '\n';
  }
}

inline void write_binary(std::ostream& os, const Matrix& m) {
  detail::write_u32(os, static_cast<std::uint32_t>(m.rows()));
  detail::write_u32(os, static_cast<std::uint32_t>(m.cols()));
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) detail::write_f64(os, m(i, j));
}

/// Writes a matrix; CSV values use the shortest round-trip representation so a
/// reload is bit-identical.
inline void save_matrix(const std::filesystem::path& path, const Matrix& m, MatrixFormat format,
                        const std::vector<std::string>* header = nullptr) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot write " + path.string());
  if (format == MatrixFormat::csv)
    write_csv(os, m, header);
  else
    write_binary(os, m);
  if (!os) throw Error("write failed for " + path.string());
}

inline void save_matrix(const std::filesystem::path& path, const TrafficMatrix& tm, MatrixFormat format,
                        bool with_header = false) {
  save_matrix(path, tm.data, format, with_header ? &tm.flow_ids : nullptr);
}

/// Consistency constant of the MAD for a Gaussian, Phi^{-1}(3/4).
inline constexpr double kMadGaussian = 0.6745;

inline double median(std::vector<double> v) {
  require(!v.empty(), "median of an empty sample");
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

/// Per-flow white-noise sigma from the median absolute deviation of first
/// differences: sigma_j = MAD(diff X_j) / (sqrt(2) * 0.6745). Estimates below
/// floor_rel * max|X_j| (or floor_rel for an all-zero column) are clamped and
/// reported in NoiseScales::floored.
inline NoiseScales estimate_noise_scales(const Matrix& x, double floor_rel = 1e-8) {
  require(x.rows() >= 3, "noise scale estimation needs at least 3 time samples");
  require(floor_rel > 0, "sigma floor must be positive");
  NoiseScales out{Vector(x.cols()), {}};
  std::vector<double> diffs(static_cast<std::size_t>(x.rows() - 1));
  for (Index j = 0; j < x.cols(); ++j) {
    for (Index i = 0; i + 1 < x.rows(); ++i) diffs[std::size_t(i)] = x(i + 1, j) - x(i, j);
    const double center = median(diffs);
    std::vector<double> dev(diffs.size());
    std::transform(diffs.begin(), diffs.end(), dev.begin(), [&](double d) { return std::abs(d - center); });
    const double sigma = median(std::move(dev)) / (std::sqrt(2.0) * kMadGaussian);
    const double maxabs = x.col(j).cwiseAbs().maxCoeff();
    const double floor = floor_rel * (maxabs > 0 ? maxabs : 1.0);
    if (!(sigma > floor)) {
      out.sigma(j) = floor;
      out.floored.push_back(j);
    } else {
      out.sigma(j) = sigma;
    }
  }
  return out;
}

inline NoiseScales estimate_noise_scales(const TrafficMatrix& x, double floor_rel = 1e-8) {
  return estimate_noise_scales(x.data, floor_rel);
}

/// Divides column j by sigma_j.
inline Matrix normalize(const Matrix& x, const NoiseScales& s) {
  require(s.sigma.size() == x.cols(), "noise scale count " + std::to_string(s.sigma.size()) +
                                          " does not match flow count " + std::to_string(x.cols()));
  require((s.sigma.array() > 0).all() && s.sigma.allFinite(), "noise scales must be positive and finite");
  return x * s.sigma.cwiseInverse().asDiagonal();
}

inline TrafficMatrix normalize(const TrafficMatrix& x, const NoiseScales& s) {
  TrafficMatrix out = x;
  out.data = normalize(x.data, s);
  return out;
}

/// Multiplies column j by sigma_j.
inline Matrix denormalize(const Matrix& x, const NoiseScales& s) {
  require(s.sigma.size() == x.cols(), "noise scale count does not match flow count");
  return x * s.sigma.asDiagonal();
}

inline Decomposition denormalize(const Decomposition& d, const NoiseScales& s) {
  return {denormalize(d.A, s), denormalize(d.E, s), denormalize(d.N, s), d.diagnostics};
}

inline nlohmann::json to_json(const Diagnostics& d) {
  return {{"iterations", d.iterations},       {"converged", d.converged},
          {"final_mu", d.final_mu},           {"residual_fro", d.residual_fro},
          {"objective_trace", d.objective_trace}, {"mu_trace", d.mu_trace}};
}

inline Diagnostics diagnostics_from_json(const nlohmann::json& j) {
  Diagnostics d;
  d.iterations = j.at("iterations").get<int>();
  d.converged = j.at("converged").get<bool>();
  d.final_mu = j.at("final_mu").get<double>();
  d.residual_fro = j.at("residual_fro").get<double>();
  d.objective_trace = j.at("objective_trace").get<std::vector<double>>();
  if (j.contains("mu_trace")) d.mu_trace = j.at("mu_trace").get<std::vector<double>>();
  return d;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

/// Writes A.csv, E.csv, N.csv and diagnostics.json into dir (created if needed).
inline void save_decomposition(const Decomposition& d, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_matrix(dir / "A.csv", d.A, MatrixFormat::csv);
  save_matrix(dir / "E.csv", d.E, MatrixFormat::csv);
  save_matrix(dir / "N.csv", d.N, MatrixFormat::csv);
  write_json(dir / "diagnostics.json", to_json(d.diagnostics));
}

inline Decomposition load_decomposition(const std::filesystem::path& dir) {
  Decomposition d;
  d.A = load_matrix(dir / "A.csv", MatrixFormat::csv).data;
  d.E = load_matrix(dir / "E.csv", MatrixFormat::csv).data;
  d.N = load_matrix(dir / "N.csv", MatrixFormat::csv).data;
  require(d.A.rows() == d.E.rows() && d.A.rows() == d.N.rows() && d.A.cols() == d.E.cols() &&
              d.A.cols() == d.N.cols(),
          "decomposition parts in " + dir.string() + " have different shapes");
  if (std::filesystem::exists(dir / "diagnostics.json"))
    d.diagnostics = diagnostics_from_json(read_json(dir / "diagnostics.json"));
  return d;
}

}  // namespace tmdecomp

#endif  // TMDECOMP_DATASET_HPP
