#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace orchestra {

// Dense row-major rows x cols table; rows are agents, columns regions.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, const T& fill = T())
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Grid FromRows(const std::vector<std::vector<T>>& rows) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    Grid g(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != cols) {
        throw std::invalid_argument("ragged grid rows");
      }
      for (std::size_t c = 0; c < cols; ++c) g(r, c) = rows[r][c];
    }
    return g;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<std::vector<T>> ToRows() const {
    std::vector<std::vector<T>> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
      out[r].assign(row(r).begin(), row(r).end());
    }
    return out;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

}  // namespace orchestra
