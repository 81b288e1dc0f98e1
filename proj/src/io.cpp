#include "pico/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

namespace pico {

namespace {

constexpr char kMagic[4] = {'P', 'I', 'C', 'V'};
constexpr std::uint16_t kContainerVersion = 1;
constexpr std::uint16_t kMaxRank = 8;
constexpr std::uint64_t kMaxElements = 1ull << 28;  // 256M entries

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

struct Cursor {
  const std::string& bytes;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > bytes.size()) throw FormatError("array file is truncated");
  }
  std::uint16_t u16() {
    need(2);
    const auto b0 = static_cast<unsigned char>(bytes[pos]);
    const auto b1 = static_cast<unsigned char>(bytes[pos + 1]);
    pos += 2;
    return static_cast<std::uint16_t>(b0 | (b1 << 8));
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(
               bytes[pos + static_cast<std::size_t>(i)]))
           << (8 * i);
    pos += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
};

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed on '" + path + "'");
  return std::move(buf).str();
}

void write_file_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failed on '" + path + "'");
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

Index ArrayData::size() const {
  std::uint64_t product = 1;
  for (const auto d : dims) product *= d;
  return static_cast<Index>(product);
}

Shape ArrayData::shape2d() const {
  if (dims.size() != 2) throw FormatError("array is not two-dimensional");
  return Shape{static_cast<Index>(dims[0]), static_cast<Index>(dims[1])};
}

void write_array(const std::string& path, const ArrayData& array) {
  if (array.dims.empty() || array.dims.size() > kMaxRank)
    throw FormatError("array rank must be between 1 and 8");
  std::uint64_t product = 1;
  for (const auto d : array.dims) {
    if (d == 0) throw FormatError("array dimensions must be positive");
    product *= d;
    if (product > kMaxElements) throw FormatError("array exceeds size cap");
  }
  const Index n = static_cast<Index>(product);
  const bool is_complex = array.dtype == ArrayDtype::Complex64;
  if (is_complex ? array.complex_values.size() != n
                 : array.real_values.size() != n)
    throw ShapeMismatch("array payload length does not match dims");

  std::string bytes;
  bytes.reserve(16 + static_cast<std::size_t>(n) * (is_complex ? 8 : 4));
  bytes.append(kMagic, 4);
  put_u16(bytes, kContainerVersion);
  put_u16(bytes, static_cast<std::uint16_t>(array.dtype));
  put_u16(bytes, static_cast<std::uint16_t>(array.dims.size()));
  for (const auto d : array.dims) put_u32(bytes, d);
  if (is_complex) {
    for (Index k = 0; k < n; ++k) {
      put_f32(bytes, static_cast<float>(array.complex_values[k].real()));
      put_f32(bytes, static_cast<float>(array.complex_values[k].imag()));
    }
  } else {
    for (Index k = 0; k < n; ++k)
      put_f32(bytes, static_cast<float>(array.real_values[k]));
  }
  write_file_bytes(path, bytes);
}

ArrayData read_array(const std::string& path) {
  const std::string bytes = read_file_bytes(path);
  Cursor cur{bytes};
  cur.need(4);
  if (std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError("not an array file (bad magic)");
  cur.pos = 4;
  if (cur.u16() != kContainerVersion)
    throw FormatError("unsupported array container version");
  const std::uint16_t dtype = cur.u16();
  if (dtype > 1) throw FormatError("unknown array dtype code");
  const std::uint16_t rank = cur.u16();
  if (rank == 0 || rank > kMaxRank)
    throw FormatError("array rank must be between 1 and 8");

  ArrayData array;
  array.dtype = static_cast<ArrayDtype>(dtype);
  std::uint64_t product = 1;
  for (std::uint16_t i = 0; i < rank; ++i) {
    const std::uint32_t d = cur.u32();
    if (d == 0) throw FormatError("array dimensions must be positive");
    product *= d;
    if (product > kMaxElements) throw FormatError("array exceeds size cap");
    array.dims.push_back(d);
  }
  const Index n = static_cast<Index>(product);
  if (array.dtype == ArrayDtype::Complex64) {
    array.complex_values.resize(n);
    for (Index k = 0; k < n; ++k) {
      const double re = cur.f32();
      const double im = cur.f32();
      array.complex_values[k] = Complex(re, im);
    }
  } else {
    array.real_values.resize(n);
    for (Index k = 0; k < n; ++k) array.real_values[k] = cur.f32();
  }
  if (cur.pos != bytes.size())
    throw FormatError("array file has trailing bytes");
  return array;
}

void write_complex_image(const std::string& path, const ComplexImage& image) {
  ArrayData array;
  array.dtype = ArrayDtype::Complex64;
  array.dims = {static_cast<std::uint32_t>(image.shape.rows),
                static_cast<std::uint32_t>(image.shape.cols)};
  array.complex_values.resize(image.shape.size());
  Index k = 0;  // file payload is row-major; the image is column-major
  for (Index r = 0; r < image.shape.rows; ++r)
    for (Index c = 0; c < image.shape.cols; ++c)
      array.complex_values[k++] = image(r, c);
  write_array(path, array);
}

ComplexImage read_complex_image(const std::string& path) {
  const ArrayData array = read_array(path);
  if (array.dtype != ArrayDtype::Complex64)
    throw FormatError("expected a complex array in '" + path + "'");
  const Shape shape = array.shape2d();
  ComplexImage image = ComplexImage::zero(shape);
  Index k = 0;
  for (Index r = 0; r < shape.rows; ++r)
    for (Index c = 0; c < shape.cols; ++c) image(r, c) = array.complex_values[k++];
  return image;
}

void write_real_map(const std::string& path, const RVec& values, Shape shape) {
  if (values.size() != shape.size())
    throw ShapeMismatch("map length does not match shape");
  ArrayData array;
  array.dtype = ArrayDtype::Real32;
  array.dims = {static_cast<std::uint32_t>(shape.rows),
                static_cast<std::uint32_t>(shape.cols)};
  array.real_values.resize(shape.size());
  Index k = 0;  // row-major payload from column-major values
  for (Index r = 0; r < shape.rows; ++r)
    for (Index c = 0; c < shape.cols; ++c)
      array.real_values[k++] = values[c * shape.rows + r];
  write_array(path, array);
}

std::pair<RVec, Shape> read_real_map(const std::string& path) {
  const ArrayData array = read_array(path);
  if (array.dtype != ArrayDtype::Real32)
    throw FormatError("expected a real-valued map in '" + path + "'");
  const Shape shape = array.shape2d();
  RVec values(shape.size());
  Index k = 0;
  for (Index r = 0; r < shape.rows; ++r)
    for (Index c = 0; c < shape.cols; ++c)
      values[c * shape.rows + r] = array.real_values[k++];
  return {std::move(values), shape};
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end)
    throw FormatError("malformed number '" + text + "'");
  return value;
}

void write_curve_csv(const std::string& path, const ConvergenceCurve& curve) {
  std::string text = "n,nrmse,operator_applications\n";
  for (const auto& e : curve.entries) {
    text += std::to_string(e.n);
    text += ',';
    text += format_double(e.nrmse);
    text += ',';
    text += std::to_string(e.operator_applications);
    text += '\n';
  }
  write_file_bytes(path, text);
}

ConvergenceCurve read_curve_csv(const std::string& path) {
  const std::string text = read_file_bytes(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      trim(line) != "n,nrmse,operator_applications")
    throw FormatError("curve CSV missing its header");
  ConvergenceCurve curve;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos)
      throw FormatError("curve CSV row needs three columns");
    ConvergenceCurve::Entry e;
    e.n = static_cast<Index>(
        std::llround(parse_double(trim(line.substr(0, c1)))));
    e.nrmse = parse_double(trim(line.substr(c1 + 1, c2 - c1 - 1)));
    e.operator_applications = static_cast<std::int64_t>(
        std::llround(parse_double(trim(line.substr(c2 + 1)))));
    curve.entries.push_back(e);
  }
  return curve;
}

void render_pgm(const std::string& path, const RVec& values, Shape shape,
                double lo, double hi) {
  if (values.size() != shape.size())
    throw ShapeMismatch("map length does not match shape");
  std::string bytes = "P5\n" + std::to_string(shape.cols) + " " +
                      std::to_string(shape.rows) + "\n65535\n";
  const double span = hi - lo;
  for (Index r = 0; r < shape.rows; ++r)
    for (Index c = 0; c < shape.cols; ++c) {
      const double v = values[c * shape.rows + r];
      double t = span > 0.0 ? (v - lo) / span : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const auto g = static_cast<std::uint16_t>(std::lround(t * 65535.0));
      bytes.push_back(static_cast<char>((g >> 8) & 0xff));  // MSB first
      bytes.push_back(static_cast<char>(g & 0xff));
    }
  write_file_bytes(path, bytes);
}

std::vector<std::pair<std::string, std::string>> read_key_values(
    const std::string& path) {
  const std::string text = read_file_bytes(path);
  std::istringstream in(text);
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) +
                        " is not a 'key = value' line");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(line_no) + " has an empty key");
    for (const auto& [k, v] : pairs)
      if (k == key) throw ConfigError("duplicate key '" + key + "'");
    pairs.emplace_back(key, value);
  }
  return pairs;
}

void write_key_values(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::vector<std::string>& trailing_comments) {
  std::string text;
  for (const auto& [key, value] : pairs) text += key + " = " + value + "\n";
  for (const auto& comment : trailing_comments) text += "# " + comment + "\n";
  write_file_bytes(path, text);
}

SamplingPattern load_trajectory_csv(const std::string& path, Shape grid,
                                    Index R) {
  if (R < 1) throw ConfigError("R must be >= 1");
  if (grid.rows < 1 || grid.cols < 1)
    throw ConfigError("trajectory grid shape must be positive");
  const std::string text = read_file_bytes(path);
  std::istringstream in(text);
  std::string line;
  std::vector<double> kx, ky;
  std::vector<Index> interleave;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto c1 = t.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : t.find(',', c1 + 1);
    if (c2 == std::string::npos)
      throw FormatError("trajectory line " + std::to_string(line_no) +
                        " needs k_x,k_y,interleave");
    const double x = parse_double(trim(t.substr(0, c1)));
    const double y = parse_double(trim(t.substr(c1 + 1, c2 - c1 - 1)));
    const double ileaf = parse_double(trim(t.substr(c2 + 1)));
    if (ileaf < 0 || ileaf != std::floor(ileaf))
      throw FormatError("trajectory line " + std::to_string(line_no) +
                        " has a non-integer interleave");
    const Index leaf = static_cast<Index>(ileaf);
    if (leaf % R != 0) continue;
    kx.push_back(x);
    ky.push_back(y);
    interleave.push_back(leaf);
  }
  if (kx.empty()) throw FormatError("trajectory keeps no samples");

  SamplingPattern pattern;
  pattern.kind = PatternKind::NonCartesian;
  pattern.grid = grid;
  pattern.R = R;
  pattern.coords.resize(static_cast<Index>(kx.size()), 2);
  for (std::size_t s = 0; s < kx.size(); ++s) {
    pattern.coords(static_cast<Index>(s), 0) = kx[s];
    pattern.coords(static_cast<Index>(s), 1) = ky[s];
  }
  pattern.interleave = std::move(interleave);
  return pattern;
}

}  // namespace pico
