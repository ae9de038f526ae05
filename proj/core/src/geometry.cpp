#include "pinnflow/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "pinnflow/errors.hpp"

namespace pinnflow::geom {

namespace {

constexpr double kTieTol = 1e-12;
constexpr double kPi = 3.141592653589793238462643383279502884;

struct Candidate {
  Vec2 p;
  Vec2 n;
  double dist;
};

Vec2 normalize(Vec2 v) {
  const double n = v.norm();
  return n > 0 ? Vec2{v.x / n, v.y / n} : Vec2{1, 0};
}

/// Nearest point on segment [a, b]; normal is fixed by the caller.
Candidate segment_candidate(Vec2 q, Vec2 a, Vec2 b, Vec2 normal) {
  const Vec2 ab = b - a;
  const double len2 = ab.dot(ab);
  double t = len2 > 0 ? (q - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Vec2 p = a + t * ab;
  return {p, normal, distance(q, p)};
}

void rect_edge_candidates(Vec2 q, Vec2 lo, Vec2 hi, std::vector<Candidate>& out) {
  out.push_back(segment_candidate(q, {lo.x, lo.y}, {hi.x, lo.y}, {0, -1}));  // bottom
  out.push_back(segment_candidate(q, {lo.x, hi.y}, {hi.x, hi.y}, {0, 1}));   // top
  out.push_back(segment_candidate(q, {lo.x, lo.y}, {lo.x, hi.y}, {-1, 0}));  // left
  out.push_back(segment_candidate(q, {hi.x, lo.y}, {hi.x, hi.y}, {1, 0}));   // right
}

// ---- shape membership -------------------------------------------------

bool inside(const RectShape& s, Vec2 q) {
  return q.x > s.lo.x && q.x < s.hi.x && q.y > s.lo.y && q.y < s.hi.y;
}

bool inside(const SemicircleShape& s, Vec2 q) {
  return q.x * q.x + q.y * q.y < s.radius * s.radius && q.y < 0.0;
}

bool inside(const WavyChannelShape& s, Vec2 q) {
  if (q.x <= 0.0 || q.x >= s.length) return false;
  const double yt = s.y_top(q.x);
  return q.y < yt && q.y > -yt;
}

bool inside(const RectWithDiskHoleShape& s, Vec2 q) {
  if (!(q.x > s.lo.x && q.x < s.hi.x && q.y > s.lo.y && q.y < s.hi.y)) return false;
  return distance(q, s.center) > s.hole_radius;
}

// ---- candidates per shape ---------------------------------------------

void candidates(const RectShape& s, Vec2 q, std::vector<Candidate>& out) {
  rect_edge_candidates(q, s.lo, s.hi, out);
}

void candidates(const SemicircleShape& s, Vec2 q, std::vector<Candidate>& out) {
  const double R = s.radius;
  out.push_back(segment_candidate(q, {-R, 0}, {R, 0}, {0, 1}));  // lid
  const double r = q.norm();
  if (r < 1e-300) {
    out.push_back({{0, -R}, {0, -1}, R});
    return;
  }
  Vec2 qa = (R / r) * q;
  if (qa.y <= 0.0) {
    out.push_back({qa, normalize(qa), std::abs(r - R)});
  } else {
    // Radial projection leaves the arc's angular range; the nearest arc
    // point is one of the endpoints, which coincide with the lid corners.
    const Vec2 end = q.x >= 0 ? Vec2{R, 0} : Vec2{-R, 0};
    out.push_back({end, normalize(end), distance(q, end)});
  }
}

/// Newton projection of q onto the curve t -> (t, sign*(h + A sin(w t))),
/// initialized from the vertically nearest point. Falls back to dense
/// sampling (1024 candidates, then polish) when Newton fails to settle.
Candidate wavy_wall_candidate(const WavyChannelShape& s, Vec2 q, double sign) {
  const double w = 2.0 * kPi / s.wavelength;
  const auto curve = [&](double t) {
    return Vec2{t, sign * (s.half_height + s.amplitude * std::sin(w * t))};
  };
  const auto d1 = [&](double t) { return sign * s.amplitude * w * std::cos(w * t); };
  const auto d2 = [&](double t) { return -sign * s.amplitude * w * w * std::sin(w * t); };

  const auto newton = [&](double t0, double& t_out) {
    double t = t0;
    for (int it = 0; it < 50; ++it) {
      const Vec2 c = curve(t);
      const double yp = d1(t);
      const double g = (c.x - q.x) + (c.y - q.y) * yp;          // grad of 0.5|c-q|^2
      const double gp = 1.0 + yp * yp + (c.y - q.y) * d2(t);
      if (!(std::isfinite(g) && std::isfinite(gp)) || gp <= 1e-12) return false;
      double step = g / gp;
      double tn = std::clamp(t - step, 0.0, s.length);
      if (std::abs(tn - t) < 1e-10) {
        t_out = tn;
        return true;
      }
      t = tn;
    }
    return false;
  };

  double t_best;
  if (!newton(std::clamp(q.x, 0.0, s.length), t_best)) {
    // Dense fallback.
    double best_d2 = std::numeric_limits<double>::infinity();
    double best_t = 0;
    const int n = 1024;
    for (int i = 0; i <= n; ++i) {
      const double t = s.length * i / n;
      const Vec2 c = curve(t);
      const double dd = (c - q).dot(c - q);
      if (dd < best_d2) {
        best_d2 = dd;
        best_t = t;
      }
    }
    if (!newton(best_t, t_best)) t_best = best_t;
  }

  const Vec2 p = curve(t_best);
  const double yp = d1(t_best);
  // Outward normal: up for the top wall, down for the bottom wall.
  const Vec2 n = sign > 0 ? Vec2{-yp, 1.0} : Vec2{yp, -1.0};
  return {p, normalize(n), distance(q, p)};
}

void candidates(const WavyChannelShape& s, Vec2 q, std::vector<Candidate>& out) {
  const double h0 = s.y_top(0.0);
  const double hl = s.y_top(s.length);
  out.push_back(segment_candidate(q, {0, -h0}, {0, h0}, {-1, 0}));                // inlet
  out.push_back(segment_candidate(q, {s.length, -hl}, {s.length, hl}, {1, 0}));  // outlet
  out.push_back(wavy_wall_candidate(s, q, +1.0));
  out.push_back(wavy_wall_candidate(s, q, -1.0));
}

void candidates(const RectWithDiskHoleShape& s, Vec2 q, std::vector<Candidate>& out) {
  rect_edge_candidates(q, s.lo, s.hi, out);
  Vec2 dir = q - s.center;
  if (dir.norm() < 1e-300) dir = {1, 0};
  const Vec2 p = s.center + s.hole_radius * normalize(dir);
  // Fluid is outside the disk, so the outward normal points into the hole.
  out.push_back({p, -1.0 * normalize(p - s.center), distance(q, p)});
}

const Candidate& best_candidate(const std::vector<Candidate>& cs) {
  const Candidate* best = &cs.front();
  for (const auto& c : cs) {
    if (c.dist < best->dist - kTieTol) {
      best = &c;
    } else if (c.dist <= best->dist + kTieTol) {
      // Medial-axis tie-break: smallest x, then smallest y.
      if (c.p.x < best->p.x - kTieTol ||
          (std::abs(c.p.x - best->p.x) <= kTieTol && c.p.y < best->p.y - kTieTol)) {
        best = &c;
      }
    }
  }
  return *best;
}

}  // namespace

double WavyChannelShape::y_top(double x) const {
  return half_height + amplitude * std::sin(2.0 * kPi * x / wavelength);
}

double WavyChannelShape::y_top_prime(double x) const {
  return amplitude * (2.0 * kPi / wavelength) * std::cos(2.0 * kPi * x / wavelength);
}

LevelSetGeometry::LevelSetGeometry(Shape shape, std::vector<BoundarySegment> segments)
    : shape_(std::move(shape)), segments_(std::move(segments)) {}

double LevelSetGeometry::signed_distance(Vec2 p) const {
  if (!p.finite()) throw InvalidArgumentError("signed_distance: non-finite point");
  std::vector<Candidate> cs;
  cs.reserve(5);
  const bool in = std::visit([&](const auto& s) {
    candidates(s, p, cs);
    return inside(s, p);
  }, shape_);
  const double d = best_candidate(cs).dist;
  return in ? -d : d;
}

Projection LevelSetGeometry::project_to_boundary(Vec2 p) const {
  if (!p.finite()) throw InvalidArgumentError("project_to_boundary: non-finite point");
  std::vector<Candidate> cs;
  cs.reserve(5);
  std::visit([&](const auto& s) { candidates(s, p, cs); }, shape_);
  const Candidate& c = best_candidate(cs);
  return {c.p, c.n, c.dist, segment_at(c.p)};
}

MirrorRecord LevelSetGeometry::mirror_point(Vec2 external, double max_dist) const {
  if (signed_distance(external) <= 0.0) {
    throw InvalidArgumentError("mirror_point: point is not outside the fluid domain");
  }
  const Projection proj = project_to_boundary(external);
  if (proj.dist > max_dist) {
    throw ConfigError("mirror_point: external point exceeds stencil reach (" +
                      std::to_string(proj.dist) + " > " + std::to_string(max_dist) + ")");
  }
  MirrorRecord rec;
  rec.external = external;
  rec.boundary = proj.point;
  rec.mirror = 2.0 * proj.point - external;
  rec.ap = proj.dist;
  rec.normal = proj.normal;
  rec.segment = proj.segment;
  rec.degenerate = !(signed_distance(rec.mirror) < 0.0);
  return rec;
}

std::pair<Vec2, Vec2> LevelSetGeometry::bounding_box() const {
  return std::visit([](const auto& s) -> std::pair<Vec2, Vec2> {
    using T = std::decay_t<decltype(s)>;
    if constexpr (std::is_same_v<T, RectShape>) {
      return {s.lo, s.hi};
    } else if constexpr (std::is_same_v<T, SemicircleShape>) {
      return {{-s.radius, -s.radius}, {s.radius, 0.0}};
    } else if constexpr (std::is_same_v<T, WavyChannelShape>) {
      const double ymax = s.half_height + s.amplitude;
      return {{0.0, -ymax}, {s.length, ymax}};
    } else {
      return {s.lo, s.hi};
    }
  }, shape_);
}

double LevelSetGeometry::min_feature_size() const {
  return std::visit([](const auto& s) -> double {
    using T = std::decay_t<decltype(s)>;
    if constexpr (std::is_same_v<T, RectShape>) {
      return std::min(s.hi.x - s.lo.x, s.hi.y - s.lo.y);
    } else if constexpr (std::is_same_v<T, SemicircleShape>) {
      return s.radius;
    } else if constexpr (std::is_same_v<T, WavyChannelShape>) {
      return 2.0 * (s.half_height - s.amplitude);
    } else {
      double gap = std::min(
          std::min(s.center.x - s.lo.x, s.hi.x - s.center.x),
          std::min(s.center.y - s.lo.y, s.hi.y - s.center.y)) - s.hole_radius;
      return std::min(s.hole_radius, gap);
    }
  }, shape_);
}

namespace {

/// One parametric boundary piece with an arclength lookup.
struct Piece {
  std::function<Vec2(double)> at;  // param in [0,1]
  double length = 0;
  std::vector<double> cumlen;      // cumulative length at i/M (curves only)

  Vec2 at_arclen(double s) const {
    if (cumlen.empty()) return at(length > 0 ? s / length : 0.0);
    const auto it = std::lower_bound(cumlen.begin(), cumlen.end(), s);
    const size_t i = std::min<size_t>(cumlen.size() - 1,
                                      static_cast<size_t>(it - cumlen.begin()));
    if (i == 0) return at(0.0);
    const double s0 = cumlen[i - 1], s1 = cumlen[i];
    const double M = static_cast<double>(cumlen.size() - 1);
    const double t = ((i - 1) + (s1 > s0 ? (s - s0) / (s1 - s0) : 0.0)) / M;
    return at(std::clamp(t, 0.0, 1.0));
  }
};

Piece line_piece(Vec2 a, Vec2 b) {
  Piece p;
  p.at = [a, b](double t) { return a + t * (b - a); };
  p.length = distance(a, b);
  return p;
}

Piece curve_piece(std::function<Vec2(double)> at, int samples = 4096) {
  Piece p;
  p.at = std::move(at);
  p.cumlen.resize(samples + 1);
  p.cumlen[0] = 0;
  Vec2 prev = p.at(0.0);
  for (int i = 1; i <= samples; ++i) {
    const Vec2 cur = p.at(static_cast<double>(i) / samples);
    p.cumlen[i] = p.cumlen[i - 1] + distance(prev, cur);
    prev = cur;
  }
  p.length = p.cumlen.back();
  return p;
}

std::vector<Piece> boundary_pieces(const Shape& shape) {
  return std::visit([](const auto& s) -> std::vector<Piece> {
    using T = std::decay_t<decltype(s)>;
    std::vector<Piece> ps;
    if constexpr (std::is_same_v<T, RectShape>) {
      ps.push_back(line_piece({s.lo.x, s.hi.y}, {s.hi.x, s.hi.y}));  // top
      ps.push_back(line_piece({s.lo.x, s.lo.y}, {s.hi.x, s.lo.y}));  // bottom
      ps.push_back(line_piece({s.lo.x, s.lo.y}, {s.lo.x, s.hi.y}));  // left
      ps.push_back(line_piece({s.hi.x, s.lo.y}, {s.hi.x, s.hi.y}));  // right
    } else if constexpr (std::is_same_v<T, SemicircleShape>) {
      const double R = s.radius;
      ps.push_back(line_piece({-R, 0}, {R, 0}));  // lid
      ps.push_back(curve_piece([R](double t) {
        const double th = kPi * (1.0 + t);  // from (-R,0) through (0,-R) to (R,0)
        return Vec2{R * std::cos(th), R * std::sin(th)};
      }));
    } else if constexpr (std::is_same_v<T, WavyChannelShape>) {
      const double h0 = s.y_top(0.0), hl = s.y_top(s.length);
      ps.push_back(line_piece({0, -h0}, {0, h0}));
      ps.push_back(line_piece({s.length, -hl}, {s.length, hl}));
      const auto top = [s](double t) {
        const double x = s.length * t;
        return Vec2{x, s.y_top(x)};
      };
      const auto bot = [s](double t) {
        const double x = s.length * t;
        return Vec2{x, -s.y_top(x)};
      };
      ps.push_back(curve_piece(top));
      ps.push_back(curve_piece(bot));
    } else {
      ps.push_back(line_piece({s.lo.x, s.hi.y}, {s.hi.x, s.hi.y}));
      ps.push_back(line_piece({s.lo.x, s.lo.y}, {s.hi.x, s.lo.y}));
      ps.push_back(line_piece({s.lo.x, s.lo.y}, {s.lo.x, s.hi.y}));
      ps.push_back(line_piece({s.hi.x, s.lo.y}, {s.hi.x, s.hi.y}));
      ps.push_back(curve_piece([s](double t) {
        const double th = 2.0 * kPi * t;
        return Vec2{s.center.x + s.hole_radius * std::cos(th),
                    s.center.y + s.hole_radius * std::sin(th)};
      }));
    }
    return ps;
  }, shape);
}

}  // namespace

double LevelSetGeometry::boundary_length() const {
  double total = 0;
  for (const auto& p : boundary_pieces(shape_)) total += p.length;
  return total;
}

std::vector<BoundaryPoint> LevelSetGeometry::boundary_points(
    double spacing, std::optional<int> total_count) const {
  if (!(spacing > 0)) throw InvalidArgumentError("boundary_points: spacing must be > 0");
  const auto pieces = boundary_pieces(shape_);
  double total_len = 0;
  for (const auto& p : pieces) total_len += p.length;

  std::vector<int> counts(pieces.size());
  if (total_count) {
    if (*total_count < static_cast<int>(pieces.size())) {
      throw InvalidArgumentError("boundary_points: total_count below piece count");
    }
    // Proportional split, remainder to largest fractional parts.
    std::vector<std::pair<double, size_t>> frac(pieces.size());
    int assigned = 0;
    for (size_t k = 0; k < pieces.size(); ++k) {
      const double exact = *total_count * pieces[k].length / total_len;
      counts[k] = std::max(1, static_cast<int>(std::floor(exact)));
      assigned += counts[k];
      frac[k] = {exact - std::floor(exact), k};
    }
    std::sort(frac.begin(), frac.end(), [](auto a, auto b) {
      return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    for (size_t j = 0; assigned < *total_count; ++j, ++assigned) {
      counts[frac[j % frac.size()].second] += 1;
    }
    while (assigned > *total_count) {
      for (size_t k = 0; k < pieces.size() && assigned > *total_count; ++k) {
        if (counts[k] > 1) {
          counts[k] -= 1;
          assigned -= 1;
        }
      }
    }
  } else {
    for (size_t k = 0; k < pieces.size(); ++k) {
      counts[k] = std::max(1, static_cast<int>(std::llround(pieces[k].length / spacing)));
    }
  }

  std::vector<BoundaryPoint> out;
  for (size_t k = 0; k < pieces.size(); ++k) {
    const double ds = pieces[k].length / counts[k];
    for (int i = 0; i < counts[k]; ++i) {
      const Vec2 pos = pieces[k].at_arclen((i + 0.5) * ds);
      out.push_back({pos, segment_at(pos)});
    }
  }
  return out;
}

int LevelSetGeometry::segment_at(Vec2 boundary_point) const {
  for (size_t i = 0; i < segments_.size(); ++i) {
    if (segments_[i].contains(boundary_point)) return static_cast<int>(i);
  }
  throw ConfigError("segment_at: boundary point not covered by any segment");
}

// ---- factories ----------------------------------------------------------

LevelSetGeometry make_square_cavity(double size, double lid_velocity) {
  if (!(size > 0)) throw InvalidArgumentError("square cavity: size must be > 0");
  RectShape shape{{0, 0}, {size, size}};
  const double top = size;
  std::vector<BoundarySegment> segs;
  segs.push_back({"lid",
                  {BcKind::Dirichlet, BcApplies::Both,
                   [lid_velocity](Vec2) { return Vec2{lid_velocity, 0.0}; }},
                  {},
                  [top](Vec2 p) { return std::abs(p.y - top) <= 1e-9; }});
  segs.push_back({"walls",
                  {BcKind::Dirichlet, BcApplies::Both, [](Vec2) { return Vec2{0, 0}; }},
                  {},
                  [](Vec2) { return true; }});
  return LevelSetGeometry(shape, std::move(segs));
}

LevelSetGeometry make_semicircle_cavity(double radius, double lid_velocity) {
  if (!(radius > 0)) throw InvalidArgumentError("semicircle cavity: radius must be > 0");
  SemicircleShape shape{radius};
  std::vector<BoundarySegment> segs;
  segs.push_back({"lid",
                  {BcKind::Dirichlet, BcApplies::Both,
                   [lid_velocity](Vec2) { return Vec2{lid_velocity, 0.0}; }},
                  {},
                  [](Vec2 p) { return std::abs(p.y) <= 1e-9; }});
  segs.push_back({"arc",
                  {BcKind::Dirichlet, BcApplies::Both, [](Vec2) { return Vec2{0, 0}; }},
                  {},
                  [](Vec2) { return true; }});
  return LevelSetGeometry(shape, std::move(segs));
}

LevelSetGeometry make_wavy_channel(double length, double half_height, double amplitude,
                                   double wavelength) {
  if (!(length > 0 && half_height > 0 && wavelength > 0) || amplitude < 0 ||
      amplitude >= half_height) {
    throw InvalidArgumentError("wavy channel: invalid shape parameters");
  }
  WavyChannelShape shape{length, half_height, amplitude, wavelength};
  const double h = half_height, L = length;
  std::vector<BoundarySegment> segs;
  segs.push_back({"inlet",
                  {BcKind::Dirichlet, BcApplies::Both,
                   [h](Vec2 p) {
                     const double yn = p.y / h;
                     return Vec2{1.5 * (1.0 - yn * yn), 0.0};
                   }},
                  {},
                  [](Vec2 p) { return std::abs(p.x) <= 1e-9; }});
  segs.push_back({"outlet",
                  {BcKind::Neumann, BcApplies::Both, [](Vec2) { return Vec2{0, 0}; }},
                  std::function<double(Vec2)>([](Vec2) { return 0.0; }),
                  [L](Vec2 p) { return std::abs(p.x - L) <= 1e-9; }});
  segs.push_back({"walls",
                  {BcKind::Dirichlet, BcApplies::Both, [](Vec2) { return Vec2{0, 0}; }},
                  {},
                  [](Vec2) { return true; }});
  return LevelSetGeometry(shape, std::move(segs));
}

LevelSetGeometry make_rect_with_disk_hole(Vec2 lo, Vec2 hi, Vec2 center,
                                          double hole_radius) {
  if (!(hi.x > lo.x && hi.y > lo.y && hole_radius > 0)) {
    throw InvalidArgumentError("rect-with-disk-hole: invalid shape parameters");
  }
  RectWithDiskHoleShape shape{lo, hi, center, hole_radius};
  std::vector<BoundarySegment> segs;
  segs.push_back({"hole",
                  {BcKind::Dirichlet, BcApplies::Both, [](Vec2) { return Vec2{0, 0}; }},
                  {},
                  [center, hole_radius](Vec2 p) {
                    return std::abs(distance(p, center) - hole_radius) <= 1e-9;
                  }});
  segs.push_back({"walls",
                  {BcKind::Dirichlet, BcApplies::Both, [](Vec2) { return Vec2{0, 0}; }},
                  {},
                  [](Vec2) { return true; }});
  return LevelSetGeometry(shape, std::move(segs));
}

LevelSetGeometry make_rect_dirichlet(Vec2 lo, Vec2 hi,
                                     std::function<Vec2(Vec2)> velocity) {
  if (!(hi.x > lo.x && hi.y > lo.y)) {
    throw InvalidArgumentError("rect: invalid bounds");
  }
  RectShape shape{lo, hi};
  std::vector<BoundarySegment> segs;
  segs.push_back({"boundary",
                  {BcKind::Dirichlet, BcApplies::Both, std::move(velocity)},
                  {},
                  [](Vec2) { return true; }});
  return LevelSetGeometry(shape, std::move(segs));
}

}  // namespace pinnflow::geom
