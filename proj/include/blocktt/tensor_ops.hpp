#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace blocktt::detail {

// Column-major (first index fastest) permutation of a dense N-way array.
// out(i_{perm[0]}, ..., i_{perm[N-1]}) = in(i_0, ..., i_{N-1}).
template <std::size_t N>
void permute(std::span<const double> in, const std::array<std::size_t, N>& dims,
             const std::array<std::size_t, N>& perm, std::span<double> out) {
  std::array<std::size_t, N> in_stride{};
  std::size_t s = 1;
  for (std::size_t k = 0; k < N; ++k) {
    in_stride[k] = s;
    s *= dims[k];
  }
  // Walk the output in storage order, gathering from the input.
  std::array<std::size_t, N> out_dims{};
  std::array<std::size_t, N> gather{};
  for (std::size_t k = 0; k < N; ++k) {
    out_dims[k] = dims[perm[k]];
    gather[k] = in_stride[perm[k]];
  }
  const std::size_t total = s;
  if (total == 0) return;
  const std::size_t inner = out_dims[0];
  const std::size_t inner_stride = gather[0];
  std::array<std::size_t, N> idx{};
  std::size_t src = 0;
  for (std::size_t pos = 0; pos < total; pos += inner) {
    const double* from = in.data() + src;
    double* to = out.data() + pos;
    if (inner_stride == 1) {
      for (std::size_t i = 0; i < inner; ++i) to[i] = from[i];
    } else {
      for (std::size_t i = 0; i < inner; ++i) to[i] = from[i * inner_stride];
    }
    for (std::size_t k = 1; k < N; ++k) {
      ++idx[k];
      src += gather[k];
      if (idx[k] < out_dims[k]) break;
      src -= gather[k] * out_dims[k];
      idx[k] = 0;
    }
  }
}

template <std::size_t N>
std::vector<double> permuted(std::span<const double> in, const std::array<std::size_t, N>& dims,
                             const std::array<std::size_t, N>& perm) {
  std::vector<double> out(in.size());
  permute<N>(in, dims, perm, out);
  return out;
}

}  // namespace blocktt::detail
