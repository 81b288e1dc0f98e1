#pragma once

#include "pico/analysis.hpp"
#include "pico/sampling.hpp"
#include "pico/types.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace pico {

inline constexpr char kPicoVersion[] = "1.0.0";

// On-disk array container: magic "PICV", version u16, dtype u16, rank u16,
// then rank u32 dims, then the row-major payload — all integers and payload
// little-endian. dtype 0 stores complex values as interleaved single
// precision (re, im); dtype 1 stores real single precision.
enum class ArrayDtype : std::uint16_t { Complex64 = 0, Real32 = 1 };

struct ArrayData {
  ArrayDtype dtype = ArrayDtype::Real32;
  std::vector<std::uint32_t> dims;
  CVec complex_values;  // used when dtype == Complex64
  RVec real_values;     // used when dtype == Real32

  Index size() const;     // product of dims
  Shape shape2d() const;  // FormatError unless rank 2
};

// Round trip is exact at the stored single precision. Read throws
// FormatError on bad magic/version/dtype/rank or truncated payload, IoError
// when the file cannot be opened; write throws IoError on filesystem errors.
void write_array(const std::string& path, const ArrayData& array);
ArrayData read_array(const std::string& path);

// Rank-2 conveniences.
void write_complex_image(const std::string& path, const ComplexImage& image);
ComplexImage read_complex_image(const std::string& path);
void write_real_map(const std::string& path, const RVec& values, Shape shape);
std::pair<RVec, Shape> read_real_map(const std::string& path);

// Shortest-representation decimal formatting: parse(format(x)) == x exactly
// for every finite double. parse throws FormatError on malformed input.
std::string format_double(double value);
double parse_double(const std::string& text);

// Convergence curve as CSV with header "n,nrmse,operator_applications";
// floating values round-trip exactly via format_double.
void write_curve_csv(const std::string& path, const ConvergenceCurve& curve);
ConvergenceCurve read_curve_csv(const std::string& path);

// 16-bit binary PGM preview (P5, maxval 65535, most significant byte first):
// values are clipped to [lo, hi] and mapped linearly onto [0, 65535]. A
// degenerate scale (hi <= lo) renders flat black.
void render_pgm(const std::string& path, const RVec& values, Shape shape,
                double lo, double hi);

// Line-based "key = value" files with full-line # comments and blank lines.
// Duplicate keys are rejected (ConfigError naming the key); a non-comment
// line without '=' is a ConfigError naming its line number. The writer emits
// one "key = value" line per pair in order, then the trailing comment lines
// verbatim (each prefixed "# ").
std::vector<std::pair<std::string, std::string>> read_key_values(
    const std::string& path);
void write_key_values(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::vector<std::string>& trailing_comments = {});

// Non-Cartesian sampling pattern from a CSV of "k_x,k_y,interleave" rows
// (cycles per field of view; non-negative integer interleave). Keeps the
// samples whose interleave index is divisible by R, mirroring the synthetic
// radial pattern's every-R-th-interleave acceleration.
SamplingPattern load_trajectory_csv(const std::string& path, Shape grid,
                                    Index R);

}  // namespace pico
