#pragma once

#include <cstdint>
#include <vector>

#include "dss/bits.hpp"
#include "dss/error.hpp"

namespace dss {

enum class SparseFormat : std::uint8_t { kDense = 0, kBitmap = 1, kCoo = 2, kCsr = 3 };

struct DenseMatrix {
  std::uint32_t rows = 0, cols = 0;
  std::vector<std::int8_t> v;  // row-major

  DenseMatrix() = default;
  DenseMatrix(std::uint32_t r, std::uint32_t c) : rows(r), cols(c) {
    if (r == 0 || c == 0) throw EmptyError("DenseMatrix: zero extent");
    v.assign(static_cast<std::size_t>(r) * c, 0);
  }
  std::int8_t at(std::uint32_t r, std::uint32_t c) const {
    if (r >= rows || c >= cols) throw ShapeError("DenseMatrix: index out of range");
    return v[static_cast<std::size_t>(r) * cols + c];
  }
  void set(std::uint32_t r, std::uint32_t c, std::int8_t x) {
    if (r >= rows || c >= cols) throw ShapeError("DenseMatrix: index out of range");
    v[static_cast<std::size_t>(r) * cols + c] = x;
  }
  bool operator==(const DenseMatrix& o) const {
    return rows == o.rows && cols == o.cols && v == o.v;
  }
};

// Occupancy mask plus nonzeros in mask order. Each row is laid out
// LSB-first and padded to a whole number of segment_len-bit segments
// (padding bits are 0), so a row is always a self-contained run of
// segments -- the unit the decode model inspects per cycle.
struct BitmapMatrix {
  std::uint32_t rows = 0, cols = 0;
  std::uint32_t segment_len = 0;
  BitVec mask;                      // rows * row_stride() bits
  std::vector<std::int8_t> values;  // nnz, mask order

  std::uint64_t positions() const { return static_cast<std::uint64_t>(rows) * cols; }
  std::uint32_t row_segments() const { return (cols + segment_len - 1) / segment_len; }
  std::uint64_t row_stride() const {
    return static_cast<std::uint64_t>(row_segments()) * segment_len;
  }
  std::uint64_t nnz() const { return values.size(); }
};

struct CooMatrix {
  std::uint32_t rows = 0, cols = 0;
  std::uint8_t row_bits = 0, col_bits = 0;      // declared index widths
  std::vector<std::uint32_t> row_idx, col_idx;  // row-major sorted
  std::vector<std::int8_t> values;
  std::uint64_t nnz() const { return values.size(); }
};

struct CsrMatrix {
  std::uint32_t rows = 0, cols = 0;
  std::uint8_t col_bits = 0, offset_bits = 0;  // declared widths
  std::vector<std::uint64_t> row_offsets;      // rows + 1
  std::vector<std::uint32_t> col_idx;
  std::vector<std::int8_t> values;
  std::uint64_t nnz() const { return values.size(); }
};

BitmapMatrix encode_bitmap(const DenseMatrix& m, std::uint32_t segment_len);
CooMatrix encode_coo(const DenseMatrix& m);
CsrMatrix encode_csr(const DenseMatrix& m);

DenseMatrix decode(const BitmapMatrix& m);
DenseMatrix decode(const CooMatrix& m);
DenseMatrix decode(const CsrMatrix& m);

// Storage cost models, in bits, using each format's declared widths.
//   bitmap: positions*1 + nnz*value_bits   (layout padding not counted)
//   coo:    nnz*(row_bits + col_bits + value_bits)
//   csr:    nnz*(col_bits + value_bits) + (rows+1)*offset_bits
//   dense:  positions*value_bits
std::uint64_t storage_bits(const BitmapMatrix& m, int value_bits);
std::uint64_t storage_bits(const CooMatrix& m, int value_bits);
std::uint64_t storage_bits(const CsrMatrix& m, int value_bits);
std::uint64_t storage_bits_dense(std::uint64_t positions, int value_bits);

// Decode-cycle model for one stored row against one spike vector.
//
// Bitmap: every segment costs max(1, popcount(spikes & mask_segment))
// cycles -- a zero-match segment still burns the cycle that inspects it.
std::uint64_t bitmap_row_cycles(const BitVec& spikes, const BitmapMatrix& m, std::uint32_t row);

// COO/CSR: the row's nonzero column indices and the spike vector's set
// positions advance through a two-pointer merge, one index per cycle; a
// matching pair retires both sides in its cycle and both streams drain
// to the end. Total = |weights| + |spikes| - matches.
std::uint64_t mergewalk_cycles(const std::vector<std::uint32_t>& weight_idx,
                               const std::vector<std::uint32_t>& spike_idx);

// Whole-matrix totals: every row against every vector in the stream.
// Vector length must equal the matrix column extent.
std::uint64_t decode_cycles(const BitmapMatrix& m, const std::vector<BitVec>& spike_stream);
std::uint64_t decode_cycles(const CooMatrix& m, const std::vector<BitVec>& spike_stream);
std::uint64_t decode_cycles(const CsrMatrix& m, const std::vector<BitVec>& spike_stream);

std::vector<std::uint32_t> set_positions(const BitVec& v);

}  // namespace dss
