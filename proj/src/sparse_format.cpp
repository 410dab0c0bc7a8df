#include "dss/sparse_format.hpp"

#include <algorithm>

namespace dss {

namespace {

void check_segment_len(std::uint32_t segment_len) {
  if (segment_len == 0) throw DomainError("bitmap: zero segment length");
}

}  // namespace

BitmapMatrix encode_bitmap(const DenseMatrix& m, std::uint32_t segment_len) {
  check_segment_len(segment_len);
  BitmapMatrix b;
  b.rows = m.rows;
  b.cols = m.cols;
  b.segment_len = segment_len;
  b.mask = BitVec(static_cast<std::size_t>(m.rows) * b.row_stride());
  for (std::uint32_t r = 0; r < m.rows; ++r)
    for (std::uint32_t c = 0; c < m.cols; ++c) {
      const std::int8_t x = m.at(r, c);
      if (x != 0) {
        b.mask.set(r * b.row_stride() + c, true);
        b.values.push_back(x);
      }
    }
  return b;
}

CooMatrix encode_coo(const DenseMatrix& m) {
  CooMatrix o;
  o.rows = m.rows;
  o.cols = m.cols;
  o.row_bits = static_cast<std::uint8_t>(ceil_log2(m.rows));
  o.col_bits = static_cast<std::uint8_t>(ceil_log2(m.cols));
  for (std::uint32_t r = 0; r < m.rows; ++r)
    for (std::uint32_t c = 0; c < m.cols; ++c) {
      const std::int8_t x = m.at(r, c);
      if (x != 0) {
        o.row_idx.push_back(r);
        o.col_idx.push_back(c);
        o.values.push_back(x);
      }
    }
  return o;
}

CsrMatrix encode_csr(const DenseMatrix& m) {
  CsrMatrix o;
  o.rows = m.rows;
  o.cols = m.cols;
  o.col_bits = static_cast<std::uint8_t>(ceil_log2(m.cols));
  o.row_offsets.assign(m.rows + 1, 0);
  for (std::uint32_t r = 0; r < m.rows; ++r) {
    for (std::uint32_t c = 0; c < m.cols; ++c) {
      const std::int8_t x = m.at(r, c);
      if (x != 0) {
        o.col_idx.push_back(c);
        o.values.push_back(x);
      }
    }
    o.row_offsets[r + 1] = o.values.size();
  }
  o.offset_bits = static_cast<std::uint8_t>(ceil_log2(o.nnz() + 1));
  return o;
}

DenseMatrix decode(const BitmapMatrix& m) {
  check_segment_len(m.segment_len);
  if (m.mask.size() != static_cast<std::size_t>(m.rows) * m.row_stride())
    throw ShapeError("decode(bitmap): mask length mismatch");
  DenseMatrix d(m.rows, m.cols);
  std::size_t vi = 0;
  for (std::uint32_t r = 0; r < m.rows; ++r)
    for (std::uint64_t p = 0; p < m.row_stride(); ++p) {
      if (!m.mask.get(r * m.row_stride() + p)) continue;
      if (p >= m.cols) throw DomainError("decode(bitmap): padding bit is set");
      if (vi >= m.values.size()) throw ShapeError("decode(bitmap): too few values");
      d.set(r, static_cast<std::uint32_t>(p), m.values[vi++]);
    }
  if (vi != m.values.size()) throw ShapeError("decode(bitmap): too many values");
  return d;
}

DenseMatrix decode(const CooMatrix& m) {
  if (m.row_idx.size() != m.values.size() || m.col_idx.size() != m.values.size())
    throw ShapeError("decode(coo): triple arrays disagree");
  DenseMatrix d(m.rows, m.cols);
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    if (i > 0) {
      const bool ordered = m.row_idx[i - 1] < m.row_idx[i] ||
                           (m.row_idx[i - 1] == m.row_idx[i] && m.col_idx[i - 1] < m.col_idx[i]);
      if (!ordered) throw DomainError("decode(coo): entries not row-major sorted");
    }
    if (m.values[i] == 0) throw DomainError("decode(coo): stored zero value");
    d.set(m.row_idx[i], m.col_idx[i], m.values[i]);
  }
  return d;
}

DenseMatrix decode(const CsrMatrix& m) {
  if (m.row_offsets.size() != static_cast<std::size_t>(m.rows) + 1)
    throw ShapeError("decode(csr): offset array length mismatch");
  if (m.row_offsets.front() != 0 || m.row_offsets.back() != m.values.size())
    throw ShapeError("decode(csr): offset endpoints mismatch");
  DenseMatrix d(m.rows, m.cols);
  for (std::uint32_t r = 0; r < m.rows; ++r) {
    if (m.row_offsets[r] > m.row_offsets[r + 1])
      throw DomainError("decode(csr): offsets not monotone");
    for (std::uint64_t i = m.row_offsets[r]; i < m.row_offsets[r + 1]; ++i) {
      if (i > m.row_offsets[r] && m.col_idx[i - 1] >= m.col_idx[i])
        throw DomainError("decode(csr): columns not sorted within row");
      if (m.values[i] == 0) throw DomainError("decode(csr): stored zero value");
      d.set(r, m.col_idx[i], m.values[i]);
    }
  }
  return d;
}

std::uint64_t storage_bits(const BitmapMatrix& m, int value_bits) {
  return m.positions() + m.nnz() * static_cast<std::uint64_t>(value_bits);
}

std::uint64_t storage_bits(const CooMatrix& m, int value_bits) {
  return m.nnz() * (static_cast<std::uint64_t>(m.row_bits) + m.col_bits + value_bits);
}

std::uint64_t storage_bits(const CsrMatrix& m, int value_bits) {
  return m.nnz() * (static_cast<std::uint64_t>(m.col_bits) + value_bits) +
         (static_cast<std::uint64_t>(m.rows) + 1) * m.offset_bits;
}

std::uint64_t storage_bits_dense(std::uint64_t positions, int value_bits) {
  return positions * static_cast<std::uint64_t>(value_bits);
}

std::uint64_t bitmap_row_cycles(const BitVec& spikes, const BitmapMatrix& m, std::uint32_t row) {
  if (spikes.size() != m.cols) throw ShapeError("bitmap_row_cycles: spike vector length mismatch");
  if (row >= m.rows) throw ShapeError("bitmap_row_cycles: row out of range");
  std::uint64_t cycles = 0;
  const std::uint64_t base = row * m.row_stride();
  for (std::uint32_t s = 0; s < m.row_segments(); ++s) {
    std::uint64_t matched = 0;
    const std::uint64_t lo = static_cast<std::uint64_t>(s) * m.segment_len;
    const std::uint64_t hi = std::min<std::uint64_t>(lo + m.segment_len, m.cols);
    for (std::uint64_t p = lo; p < hi; ++p)
      if (m.mask.get(base + p) && spikes.get(p)) ++matched;
    cycles += std::max<std::uint64_t>(1, matched);
  }
  return cycles;
}

std::uint64_t mergewalk_cycles(const std::vector<std::uint32_t>& weight_idx,
                               const std::vector<std::uint32_t>& spike_idx) {
  std::uint64_t cycles = 0;
  std::size_t i = 0, j = 0;
  while (i < weight_idx.size() && j < spike_idx.size()) {
    ++cycles;
    if (weight_idx[i] == spike_idx[j]) {
      ++i;
      ++j;
    } else if (weight_idx[i] < spike_idx[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  cycles += (weight_idx.size() - i) + (spike_idx.size() - j);
  return cycles;
}

std::vector<std::uint32_t> set_positions(const BitVec& v) {
  std::vector<std::uint32_t> out;
  const auto& words = v.words();
  for (std::size_t wi = 0; wi < words.size(); ++wi) {
    std::uint64_t w = words[wi];
    while (w != 0) {
      const int b = std::countr_zero(w);
      out.push_back(static_cast<std::uint32_t>(wi * 64 + b));
      w &= w - 1;
    }
  }
  return out;
}

std::uint64_t decode_cycles(const BitmapMatrix& m, const std::vector<BitVec>& spike_stream) {
  std::uint64_t cycles = 0;
  for (const BitVec& s : spike_stream)
    for (std::uint32_t r = 0; r < m.rows; ++r) cycles += bitmap_row_cycles(s, m, r);
  return cycles;
}

namespace {

std::uint64_t indexed_cycles(std::uint32_t rows, std::uint32_t cols,
                             const std::vector<std::vector<std::uint32_t>>& row_cols,
                             const std::vector<BitVec>& spike_stream) {
  std::uint64_t cycles = 0;
  for (const BitVec& s : spike_stream) {
    if (s.size() != cols) throw ShapeError("decode_cycles: spike vector length mismatch");
    const auto spk = set_positions(s);
    for (std::uint32_t r = 0; r < rows; ++r) cycles += mergewalk_cycles(row_cols[r], spk);
  }
  return cycles;
}

}  // namespace

std::uint64_t decode_cycles(const CooMatrix& m, const std::vector<BitVec>& spike_stream) {
  std::vector<std::vector<std::uint32_t>> row_cols(m.rows);
  for (std::size_t i = 0; i < m.values.size(); ++i) row_cols[m.row_idx[i]].push_back(m.col_idx[i]);
  return indexed_cycles(m.rows, m.cols, row_cols, spike_stream);
}

std::uint64_t decode_cycles(const CsrMatrix& m, const std::vector<BitVec>& spike_stream) {
  std::vector<std::vector<std::uint32_t>> row_cols(m.rows);
  for (std::uint32_t r = 0; r < m.rows; ++r)
    for (std::uint64_t i = m.row_offsets[r]; i < m.row_offsets[r + 1]; ++i)
      row_cols[r].push_back(m.col_idx[i]);
  return indexed_cycles(m.rows, m.cols, row_cols, spike_stream);
}

}  // namespace dss
