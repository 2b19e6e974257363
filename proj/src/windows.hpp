#pragma once

// Cyclic window sums and maxima on the mesh, shared by the maximal
// functions and the norms. Private to the library.

#include <cmath>
#include <functional>
#include <vector>

#include "bilab/dyadic.hpp"

namespace bilab::windows {

// Flat arrays over `coords` torus coordinates of extent N, coordinate c with
// stride N^c. A side of dimension d contributes d consecutive coordinates, so
// this is exactly the column-major layout of a GridFunction's values.
struct Box {
  int coords;
  int N;
  Index cells;
  Index stride(int c) const { return Index(1) << (c * int(std::log2(N))); }
};

inline Box box_of(const Mesh& mesh) {
  return Box{mesh.n + mesh.m, 1 << mesh.levels, mesh.cells(Axis::first) * mesh.cells(Axis::second)};
}

inline Box box_of(const Side& s) { return Box{s.dim, s.extent(), s.cells()}; }

template <typename Fn>
void for_each_line(const Box& box, int c, Fn&& fn) {
  const Index st = box.stride(c);
  const Index block = st * box.N;
  for (Index outer = 0; outer < box.cells; outer += block)
    for (Index inner = 0; inner < st; ++inner) fn(outer + inner, st);
}

// out[a] = sum_{t<s} v[a+t], cyclically, along coordinate c
inline void slide_sum(std::vector<double>& v, const Box& box, int c, int s) {
  const int N = box.N;
  if (s == 1) return;
  std::vector<double> prefix(N + s + 1);
  for_each_line(box, c, [&](Index base, Index st) {
    prefix[0] = 0.0;
    for (int k = 0; k < N + s; ++k) prefix[k + 1] = prefix[k] + v[base + (k % N) * st];
    for (int a = 0; a < N; ++a) v[base + a * st] = prefix[a + s] - prefix[a];
  });
}

// out[x] = max_{t<s} v[x-t], cyclically, along coordinate c. Block prefix and
// suffix maxima (van Herk / Gil-Werman) over the line extended by s-1 cells.
inline void slide_max(std::vector<double>& v, const Box& box, int c, int s) {
  const int N = box.N;
  if (s == 1) return;
  const int len = N + s - 1;
  std::vector<double> e(len), g(len), h(len);
  for_each_line(box, c, [&](Index base, Index st) {
    for (int j = 0; j < len; ++j) e[j] = v[base + ((j - (s - 1) + N) % N) * st];
    for (int j = 0; j < len; ++j) g[j] = (j % s == 0) ? e[j] : std::max(g[j - 1], e[j]);
    for (int j = len - 1; j >= 0; --j) h[j] = (j % s == s - 1 || j == len - 1) ? e[j] : std::max(h[j + 1], e[j]);
    for (int x = 0; x < N; ++x) v[base + x * st] = std::max(h[x], g[x + s - 1]);
  });
}

inline std::vector<int> range(int from, int count) {
  std::vector<int> r(count);
  for (int k = 0; k < count; ++k) r[k] = from + k;
  return r;
}

// Side lengths of the next window shape (odometer over groups); false once
// every shape has been visited.
inline bool next_sizes(std::vector<int>& sizes, int N, bool dyadic_sizes) {
  std::size_t g = 0;
  while (g < sizes.size() && sizes[g] == N) sizes[g++] = 1;
  if (g == sizes.size()) return false;
  sizes[g] = dyadic_sizes ? 2 * sizes[g] : sizes[g] + 1;
  return true;
}

// Averages over the windows of one shape, indexed by the window's lowest corner.
inline void window_averages(const double* data, const Box& box, const std::vector<std::vector<int>>& groups,
                            const std::vector<int>& sizes, std::vector<double>& work) {
  work.assign(data, data + box.cells);
  double vol = 1.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (int c : groups[g]) {
      slide_sum(work, box, c, sizes[g]);
      vol *= sizes[g];
    }
  }
  for (double& x : work) x /= vol;
}

// Every product of cubes, one cube per group of coordinates (side length
// shared inside a group); coordinates outside every group stay pointwise.
inline void for_each_window_average(const double* data, const Box& box, const std::vector<std::vector<int>>& groups,
                                    bool dyadic_sizes,
                                    const std::function<void(std::vector<double>&, const std::vector<int>&)>& fn) {
  std::vector<int> sizes(groups.size(), 1);
  std::vector<double> work;
  do {
    window_averages(data, box, groups, sizes, work);
    fn(work, sizes);
  } while (next_sizes(sizes, box.N, dyadic_sizes));
}

// sup of |data| averages over the windows containing each cell
inline std::vector<double> window_maximal(const double* data, const Box& box,
                                          const std::vector<std::vector<int>>& groups) {
  std::vector<double> a(box.cells);
  for (Index k = 0; k < box.cells; ++k) a[k] = std::abs(data[k]);
  std::vector<double> result(box.cells, 0.0);
  for_each_window_average(a.data(), box, groups, false, [&](std::vector<double>& work, const std::vector<int>& sizes) {
    for (std::size_t g = 0; g < groups.size(); ++g)
      for (int c : groups[g]) slide_max(work, box, c, sizes[g]);
    for (Index k = 0; k < box.cells; ++k) result[k] = std::max(result[k], work[k]);
  });
  return result;
}

// every mesh-aligned cube of a side, wrapped ones included, as cell lists
inline void for_each_window(const Side& s, bool dyadic_sizes, const std::function<void(const std::vector<Index>&)>& fn) {
  const int N = s.extent();
  std::vector<Index> cells;
  for (int size = 1; size <= N; size = dyadic_sizes ? 2 * size : size + 1) {
    const int corners1 = s.dim == 2 ? N : 1;
    for (int a1 = 0; a1 < corners1; ++a1) {
      for (int a0 = 0; a0 < N; ++a0) {
        cells.clear();
        const int span1 = s.dim == 2 ? size : 1;
        for (int t1 = 0; t1 < span1; ++t1)
          for (int t0 = 0; t0 < size; ++t0) cells.push_back((a0 + t0) % N + Index(N) * ((a1 + t1) % N));
        fn(cells);
      }
    }
  }
}

inline void for_each_window(const Side& s, const std::function<void(const std::vector<Index>&)>& fn) {
  for_each_window(s, false, fn);
}

}  // namespace bilab::windows
