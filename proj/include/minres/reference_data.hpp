#pragma once

// Published reference values used by the regression suite: block structures
// of the symmetry-reduced SDP, optimal resolutions, decoupled-degree
// resolutions and uniform approximation errors.

#include <optional>
#include <vector>

namespace minres::reference {

struct BlockRow {
  int n;
  int r;
  std::vector<int> dims;
  int s;
};

inline const std::vector<BlockRow>& block_table() {
  static const std::vector<BlockRow> rows = {
      {2, 1, {2, 1}, 3},
      {2, 2, {4, 2}, 6},
      {2, 3, {6, 4}, 10},
      {2, 4, {9, 6}, 15},
      {2, 5, {12, 9}, 21},
      {2, 6, {16, 12}, 28},
      {2, 7, {20, 16}, 36},
      {2, 8, {25, 20}, 45},
      {2, 9, {30, 25}, 55},
      {2, 10, {36, 30}, 66},
      {3, 1, {2, 1}, 4},
      {3, 2, {4, 3}, 10},
      {3, 3, {7, 6, 1}, 20},
      {3, 4, {11, 11, 2}, 35},
      {3, 5, {16, 18, 4}, 56},
      {3, 6, {23, 27, 7}, 84},
      {3, 7, {31, 39, 11}, 120},
      {3, 8, {41, 54, 16}, 165},
      {3, 9, {53, 72, 23}, 220},
      {3, 10, {67, 94, 31}, 286},
      {4, 1, {2, 1}, 5},
      {4, 2, {4, 3, 1}, 15},
      {4, 3, {7, 7, 2, 1}, 35},
      {4, 4, {12, 13, 5, 3}, 70},
      {4, 5, {18, 23, 9, 7}, 126},
      {4, 6, {27, 37, 16, 13, 1}, 210},
      {4, 7, {38, 57, 25, 23, 2}, 330},
      {4, 8, {53, 83, 39, 37, 4}, 495},
      {4, 9, {71, 118, 56, 57, 7}, 715},
      {4, 10, {94, 162, 80, 83, 12}, 1001},
      {5, 1, {2, 1}, 6},
      {5, 2, {4, 3, 1}, 21},
      {5, 3, {7, 7, 3, 1}, 56},
      {5, 4, {12, 14, 7, 3, 1}, 126},
      {5, 5, {19, 25, 14, 8, 3}, 252},
      {5, 6, {29, 42, 26, 16, 7, 1}, 462},
      {5, 7, {42, 67, 44, 30, 14, 3}, 792},
      {5, 8, {60, 102, 71, 51, 26, 7}, 1287},
      {5, 9, {83, 150, 109, 83, 44, 14}, 2002},
      {5, 10, {113, 214, 162, 128, 71, 25, 1}, 3003},
  };
  return rows;
}

inline std::optional<BlockRow> find_block_row(int n, int r) {
  for (const auto& row : block_table())
    if (row.n == n && row.r == r) return row;
  return std::nullopt;
}

/// sigma^2 at (n, r, r'); r' == r for the coupled problem.
struct SigmaPoint {
  int n;
  int r;
  int r_gram;
  double sigma2;
};

/// Optimal resolutions at r' = r, four decimals.
inline const std::vector<SigmaPoint>& sigma_table() {
  static const std::vector<SigmaPoint> rows = {
      {2, 1, 1, 1.5},    {2, 2, 2, 1.0},    {2, 3, 3, 0.7378}, {2, 4, 4, 0.5487},
      {2, 10, 10, 0.1655}, {2, 20, 20, 0.0535}, {3, 1, 1, 2.5},    {3, 3, 3, 1.5},
      {3, 6, 6, 0.7764}, {3, 9, 9, 0.4692}, {4, 1, 1, 3.5},    {4, 2, 2, 2.9310},
      {4, 4, 4, 1.9948},
  };
  return rows;
}

/// Product-of-univariate-kernels column: (n, total degree, sigma^2).
struct ProductPoint {
  int n;
  int degree;
  double sigma2;
};

inline const std::vector<ProductPoint>& product_table() {
  static const std::vector<ProductPoint> rows = {
      {2, 4, 0.5858}, {2, 10, 0.1981}, {3, 9, 0.5729}, {4, 8, 1.1716},
  };
  return rows;
}

/// Decoupled degrees; the last entry is expensive and treated as a stretch target.
struct DecoupledPoint {
  SigmaPoint point;
  bool stretch;
};

inline const std::vector<DecoupledPoint>& decoupled_table() {
  static const std::vector<DecoupledPoint> rows = {
      {{2, 3, 4, 0.691}, false},
      {{2, 5, 7, 0.3765}, false},
      {{3, 2, 4, 1.7753}, false},
      {{3, 10, 18, 0.3089}, true},
  };
  return rows;
}

/// Uniform approximation error of the degree-r approximation of a builtin
/// function on [-1,1]^2 with the minimum-resolution kernel ("sdp") or the
/// product of two degree r/2 univariate kernels ("product").
struct ErrorPoint {
  const char* function;
  const char* kernel;
  int r;
  double error;
  bool stretch;
};

inline const std::vector<ErrorPoint>& error_table() {
  static const std::vector<ErrorPoint> rows = {
      {"qsin", "sdp", 10, 2.1668, false},   {"qsin", "product", 10, 2.9258, false},
      {"peaks", "sdp", 10, 9.8984, false},  {"peaks", "product", 10, 11.6499, false},
      {"qsin", "sdp", 50, 0.1717, true},    {"qsin", "product", 50, 0.2174, true},
      {"peaks", "sdp", 50, 0.2535, true},   {"peaks", "product", 50, 0.3717, true},
  };
  return rows;
}

}  // namespace minres::reference
