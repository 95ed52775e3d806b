#include "idla/site_index.hpp"

#include <algorithm>
#include <cmath>

namespace idla {

namespace {
// 4M cells of int32: 16 MiB per aggregate at most.
constexpr std::uint64_t kMaxDenseCells = std::uint64_t{1} << 22;
}  // namespace

DenseBox DenseBox::for_strip(const SourceBox& sources, double n) {
  DenseBox box;
  box.center = sources.center.site();
  const int dim = box.center.dim();
  const double per_column = std::max(0.0, n);
  box.half[0] = static_cast<std::int64_t>(std::ceil(per_column)) + 16;
  for (int i = 1; i < dim; ++i) box.half[static_cast<std::size_t>(i)] = sources.radius + 16;
  // Shrink the first axis until the box fits; hash fallback covers the rest.
  while (box.cells() > kMaxDenseCells && box.half[0] > 8) box.half[0] /= 2;
  return box;
}

DenseBox DenseBox::for_ball(int dim, std::uint64_t count) {
  DenseBox box;
  box.center = Site(dim);
  const double unit_ball = dim == 2 ? M_PI : dim == 3 ? 4.0 * M_PI / 3.0 : M_PI * M_PI / 2.0;
  const double r = std::pow(static_cast<double>(count) / unit_ball, 1.0 / dim);
  const auto half = static_cast<std::int64_t>(std::ceil(1.25 * r)) + 8;
  for (int i = 0; i < dim; ++i) box.half[static_cast<std::size_t>(i)] = half;
  return box;
}

std::uint64_t DenseBox::cells() const noexcept {
  std::uint64_t n = 1;
  for (int i = 0; i < center.dim(); ++i) n *= static_cast<std::uint64_t>(2 * half[static_cast<std::size_t>(i)] + 1);
  return n;
}

SiteIndex::SiteIndex(int dim) : dim_(dim) { check_dimension(dim); }

SiteIndex::SiteIndex(int dim, const DenseBox& box) : dim_(dim) {
  check_dimension(dim);
  if (box.center.dim() != dim) throw Error(ErrorCode::invalid_argument, "dense box dimension mismatch");
  if (box.cells() <= kMaxDenseCells) {
    for (int i = 0; i < dim; ++i) {
      const auto k = static_cast<std::size_t>(i);
      low_[k] = static_cast<std::int64_t>(box.center[i]) - box.half[k];
      extent_[k] = 2 * box.half[k] + 1;
    }
    dense_.assign(box.cells(), -1);
  }
}

bool SiteIndex::insert(const Site& s, std::int32_t index) {
  const std::int64_t off = dense_offset(s);
  if (off >= 0) {
    auto& slot = dense_[static_cast<std::size_t>(off)];
    if (slot >= 0) return false;
    slot = index;
    return true;
  }
  return sparse_.emplace(s, index).second;
}

}  // namespace idla
