#pragma once

// Point-pattern primitives: windows, homogeneous Poisson sampling, a uniform
// grid index for neighbor queries, and the eavesdropper padding rule.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "secperc/errors.hpp"
#include "secperc/rng.hpp"

namespace secperc::geom {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }

inline double distance_sq(Point2 a, Point2 b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

/// Euclidean distance. Every distance comparison in the library goes through
/// this function so that predicates agree bit-for-bit with brute-force scans.
inline double distance(Point2 a, Point2 b) { return std::sqrt(distance_sq(a, b)); }

/// Max-norm, so that the square D_m = [-m, m]^2 is {p : sup_norm(p) <= m}.
inline double sup_norm(Point2 p) { return std::max(std::fabs(p.x), std::fabs(p.y)); }

inline double norm(Point2 p) { return std::sqrt(p.x * p.x + p.y * p.y); }

/// Closed axis-aligned rectangle.
class Window {
 public:
  enum class Kind { square, rectangle };

  /// D_m = [-m, m]^2.
  static Window square(double half_width) {
    if (!(half_width > 0.0) || !std::isfinite(half_width))
      throw ParameterError("window half-width must be positive and finite");
    return Window(Kind::square, -half_width, half_width, -half_width, half_width);
  }

  static Window rectangle(double x_lo, double x_hi, double y_lo, double y_hi) {
    if (!(x_hi > x_lo) || !(y_hi > y_lo) || !std::isfinite(x_lo) || !std::isfinite(x_hi) ||
        !std::isfinite(y_lo) || !std::isfinite(y_hi))
      throw ParameterError("window must have positive, finite area");
    return Window(Kind::rectangle, x_lo, x_hi, y_lo, y_hi);
  }

  Kind kind() const noexcept { return kind_; }
  double x_lo() const noexcept { return x_lo_; }
  double x_hi() const noexcept { return x_hi_; }
  double y_lo() const noexcept { return y_lo_; }
  double y_hi() const noexcept { return y_hi_; }
  double width() const noexcept { return x_hi_ - x_lo_; }
  double height() const noexcept { return y_hi_ - y_lo_; }
  double area() const noexcept { return width() * height(); }

  bool contains(Point2 p) const noexcept {
    return p.x >= x_lo_ && p.x <= x_hi_ && p.y >= y_lo_ && p.y <= y_hi_;
  }

  bool covers(const Window& other) const noexcept {
    return x_lo_ <= other.x_lo_ && x_hi_ >= other.x_hi_ && y_lo_ <= other.y_lo_ &&
           y_hi_ >= other.y_hi_;
  }

  /// Grows every side by `pad`; squares about the origin stay squares.
  Window padded(double pad) const {
    if (pad < 0.0) throw ParameterError("pad must be non-negative");
    if (kind_ == Kind::square) return square(x_hi_ + pad);
    return rectangle(x_lo_ - pad, x_hi_ + pad, y_lo_ - pad, y_hi_ + pad);
  }

  friend bool operator==(const Window&, const Window&) = default;

 private:
  Window(Kind kind, double x_lo, double x_hi, double y_lo, double y_hi)
      : kind_(kind), x_lo_(x_lo), x_hi_(x_hi), y_lo_(y_lo), y_hi_(y_hi) {}

  Kind kind_;
  double x_lo_, x_hi_, y_lo_, y_hi_;
};

/// A realized point pattern together with the parameters that produced it.
struct PPPSample {
  std::vector<Point2> points;
  double intensity = 0.0;
  Window window = Window::square(1.0);
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

/// Homogeneous Poisson process on `window`. The stream key is recorded as the
/// sample seed; the same (intensity, window, stream) reproduces the sample.
inline PPPSample sample_ppp(double intensity, const Window& window, rng::Stream stream) {
  if (!(intensity >= 0.0) || !std::isfinite(intensity))
    throw ParameterError("intensity must be finite and non-negative");
  PPPSample out{{}, intensity, window, stream.key()};
  const std::uint64_t n = rng::poisson(stream, intensity * window.area());
  out.points.reserve(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    const double x = stream.uniform(window.x_lo(), window.x_hi());
    const double y = stream.uniform(window.y_lo(), window.y_hi());
    out.points.push_back({x, y});
  }
  return out;
}

/// Independent thinning. Point k is kept iff the k-th draw of `marks` is
/// below `keep`, so thinnings of one sample at increasing `keep` are nested.
inline PPPSample thin(const PPPSample& sample, double keep, rng::Stream marks) {
  if (!(keep >= 0.0 && keep <= 1.0)) throw ParameterError("keep probability must lie in [0, 1]");
  PPPSample out{{}, sample.intensity * keep, sample.window, sample.seed};
  for (const Point2& p : sample.points)
    if (marks.uniform() < keep) out.points.push_back(p);
  return out;
}

/// Uniform-grid bucket index over a point set, stored in CSR order.
class GridIndex {
 public:
  GridIndex(const PPPSample& sample, double cell_size)
      : GridIndex(std::span<const Point2>(sample.points), cell_size) {
    fingerprint_ = fingerprint_of(sample);
  }

  GridIndex(std::span<const Point2> points, double cell_size) : count_(points.size()) {
    if (!(cell_size > 0.0)) throw ParameterError("grid cell size must be positive");
    if (points.empty()) {
      cell_size_ = std::isfinite(cell_size) ? cell_size : 1.0;
      offsets_.assign(2, 0);
      return;
    }
    double lo_x = kInf, hi_x = -kInf, lo_y = kInf, hi_y = -kInf;
    for (const Point2& p : points) {
      lo_x = std::min(lo_x, p.x);
      hi_x = std::max(hi_x, p.x);
      lo_y = std::min(lo_y, p.y);
      hi_y = std::max(hi_y, p.y);
    }
    // Keep the cell count proportional to the point count.
    const double max_cells = std::max(64.0, 4.0 * static_cast<double>(points.size()));
    const double extent = std::max(hi_x - lo_x, hi_y - lo_y);
    if (!std::isfinite(cell_size)) cell_size = std::max(extent, 1.0);
    const double cells_x = (hi_x - lo_x) / cell_size + 2.0;
    const double cells_y = (hi_y - lo_y) / cell_size + 2.0;
    if (cells_x * cells_y > max_cells) cell_size *= std::sqrt(cells_x * cells_y / max_cells);
    cell_size_ = cell_size;

    cx0_ = cell_coord(lo_x);
    cy0_ = cell_coord(lo_y);
    nx_ = cell_coord(hi_x) - cx0_ + 1;
    ny_ = cell_coord(hi_y) - cy0_ + 1;

    std::vector<std::size_t> cell_of_point(points.size());
    offsets_.assign(static_cast<std::size_t>(nx_ * ny_) + 1, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto c = flat(cell_coord(points[i].x), cell_coord(points[i].y));
      cell_of_point[i] = c;
      ++offsets_[c + 1];
    }
    for (std::size_t c = 1; c < offsets_.size(); ++c) offsets_[c] += offsets_[c - 1];
    ids_.resize(points.size());
    pts_.resize(points.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const std::size_t slot = fill[cell_of_point[i]]++;
      ids_[slot] = static_cast<std::uint32_t>(i);
      pts_[slot] = points[i];
    }
  }

  static std::uint64_t fingerprint_of(const PPPSample& s) noexcept {
    return rng::hash_combine(s.seed, s.points.size());
  }

  bool matches(const PPPSample& s) const noexcept {
    return count_ == s.points.size() && fingerprint_ == fingerprint_of(s);
  }

  double cell_size() const noexcept { return cell_size_; }
  std::size_t size() const noexcept { return count_; }

  std::int64_t cell_coord(double v) const noexcept {
    return static_cast<std::int64_t>(std::floor(v / cell_size_));
  }

  /// Ids of the points whose bucket is (cx, cy).
  std::span<const std::uint32_t> bucket(std::int64_t cx, std::int64_t cy) const noexcept {
    if (!in_range(cx, cy)) return {};
    const auto c = flat(cx, cy);
    return {ids_.data() + offsets_[c], offsets_[c + 1] - offsets_[c]};
  }

  /// Calls f(id, point) for every point in a cell overlapping the square of
  /// half-width `radius` about q. Candidates are a superset of the disc.
  template <class F>
  void for_each_candidate(Point2 q, double radius, F&& f) const {
    if (count_ == 0) return;
    std::int64_t x0 = cx0_, x1 = cx0_ + nx_ - 1, y0 = cy0_, y1 = cy0_ + ny_ - 1;
    if (std::isfinite(radius)) {
      // One extra cell each side absorbs floor() rounding at cell borders.
      x0 = std::max(x0, clamp_coord(q.x - radius) - 1);
      x1 = std::min(x1, clamp_coord(q.x + radius) + 1);
      y0 = std::max(y0, clamp_coord(q.y - radius) - 1);
      y1 = std::min(y1, clamp_coord(q.y + radius) + 1);
    }
    for (std::int64_t cy = y0; cy <= y1; ++cy) {
      const std::size_t row = static_cast<std::size_t>((cy - cy0_) * nx_);
      for (std::int64_t cx = x0; cx <= x1; ++cx) {
        const std::size_t c = row + static_cast<std::size_t>(cx - cx0_);
        for (std::size_t s = offsets_[c]; s < offsets_[c + 1]; ++s) f(ids_[s], pts_[s]);
      }
    }
  }

  /// Visits cells in square rings of growing Chebyshev radius about q's cell.
  /// visit(id, point) is called for every point of each ring; after ring k,
  /// done(bound) is asked whether to stop, where every unvisited point lies at
  /// least `bound` away from q.
  template <class Visit, class Done>
  void ring_search(Point2 q, Visit&& visit, Done&& done) const {
    if (count_ == 0) return;
    const std::int64_t qx = clamp_coord(q.x);
    const std::int64_t qy = clamp_coord(q.y);
    const std::int64_t max_ring =
        std::max({std::llabs(qx - cx0_), std::llabs(qx - (cx0_ + nx_ - 1)),
                  std::llabs(qy - cy0_), std::llabs(qy - (cy0_ + ny_ - 1))});
    auto cell = [&](std::int64_t cx, std::int64_t cy) {
      if (!in_range(cx, cy)) return;
      const auto c = flat(cx, cy);
      for (std::size_t s = offsets_[c]; s < offsets_[c + 1]; ++s) visit(ids_[s], pts_[s]);
    };
    for (std::int64_t k = 0; k <= max_ring; ++k) {
      if (k == 0) {
        cell(qx, qy);
      } else {
        for (std::int64_t cx = std::max(qx - k, cx0_); cx <= std::min(qx + k, cx0_ + nx_ - 1);
             ++cx) {
          cell(cx, qy - k);
          cell(cx, qy + k);
        }
        for (std::int64_t cy = std::max(qy - k + 1, cy0_);
             cy <= std::min(qy + k - 1, cy0_ + ny_ - 1); ++cy) {
          cell(qx - k, cy);
          cell(qx + k, cy);
        }
      }
      // Cells beyond ring k+1 lie at least k * cell_size away; one ring of
      // slack covers floor() rounding at cell borders.
      if (k >= 1 && done(static_cast<double>(k - 1) * cell_size_)) return;
    }
  }

  /// Nearest indexed point to q: (id, distance). (npos, +inf) when empty.
  std::pair<std::size_t, double> nearest(Point2 q) const {
    std::size_t best_id = npos;
    double best_sq = kInf;
    ring_search(
        q,
        [&](std::uint32_t id, Point2 p) {
          const double d2 = distance_sq(q, p);
          if (d2 < best_sq || (d2 == best_sq && id < best_id)) {
            best_sq = d2;
            best_id = id;
          }
        },
        [&](double bound) { return best_id != npos && std::sqrt(best_sq) <= bound; });
    return {best_id, std::sqrt(best_sq)};
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  bool in_range(std::int64_t cx, std::int64_t cy) const noexcept {
    return cx >= cx0_ && cx < cx0_ + nx_ && cy >= cy0_ && cy < cy0_ + ny_;
  }
  std::size_t flat(std::int64_t cx, std::int64_t cy) const noexcept {
    return static_cast<std::size_t>((cy - cy0_) * nx_ + (cx - cx0_));
  }
  // Cell coordinate saturated to a band around the grid so ring arithmetic
  // cannot overflow for far-away queries.
  std::int64_t clamp_coord(double v) const noexcept {
    const double c = std::floor(v / cell_size_);
    const double lim = 4e15;
    return static_cast<std::int64_t>(std::clamp(c, -lim, lim));
  }

  double cell_size_ = 1.0;
  std::size_t count_ = 0;
  std::uint64_t fingerprint_ = 0;
  std::int64_t cx0_ = 0, cy0_ = 0, nx_ = 1, ny_ = 1;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> ids_;
  std::vector<Point2> pts_;
};

/// Distance from `query` to the nearest point of `sample`; +inf when empty.
inline double nearest_distance(Point2 query, const PPPSample& sample, const GridIndex& index) {
  if (!index.matches(sample)) throw InternalError("grid index was not built over this sample");
  return index.nearest(query).second;
}

/// Pad p with expected_nodes * exp(-intensity_e * pi * p^2) <= tol, i.e. the
/// union bound on "some node's nearest eavesdropper lies beyond the pad".
inline double pad_width(double intensity_e, double tol, double expected_nodes) {
  if (!(tol > 0.0 && tol < 1.0)) throw ParameterError("pad tolerance must lie in (0, 1)");
  if (!(intensity_e > 0.0)) throw ParameterError("eavesdropper intensity must be positive");
  if (!(expected_nodes > tol)) return 0.0;
  return std::sqrt(std::log(expected_nodes / tol) / (std::numbers::pi * intensity_e));
}

/// Exact distance from the origin to the nearest point of an unbounded
/// homogeneous Poisson process, ignoring points closer than `inner_radius`.
/// Samples nested squares of doubling half-width until the best candidate is
/// no farther than the current half-width; points outside the square are
/// then provably farther.
inline double sample_nearest_distance(double intensity, double inner_radius,
                                      double initial_half_width, rng::Stream stream) {
  if (!(intensity > 0.0)) return kInf;
  double h = std::max({initial_half_width, inner_radius, 1e-3 / std::sqrt(intensity)});
  double prev = 0.0;
  double best = kInf;
  for (std::uint64_t round = 0;; ++round) {
    rng::Stream s = stream.split(round);
    const double ring_area = 4.0 * (h * h - prev * prev);
    const std::uint64_t n = rng::poisson(s, intensity * ring_area);
    for (std::uint64_t k = 0; k < n; ++k) {
      Point2 p;
      do {
        p = {s.uniform(-h, h), s.uniform(-h, h)};
      } while (sup_norm(p) < prev);
      const double d = norm(p);
      if (d >= inner_radius) best = std::min(best, d);
    }
    if (best <= h) return best;
    prev = h;
    h *= 2.0;
  }
}

}  // namespace secperc::geom
