#include "wmbench/world_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wmbench/det_math.hpp"
#include "wmbench/error.hpp"
#include "wmbench/rng.hpp"

namespace wmbench {
namespace {

constexpr std::array<std::string_view, 8> kCategoryNames = {
    "landscape", "scifi", "stylized", "ancient", "urban", "industrial", "interior", "aquatic",
};

struct Theme {
  int landmark_count;
  double width_min, width_max;
  double height_min, height_max;
  double terrain_amplitude;
  Palette palette;
  double hue_offset;
  double saturation;
};

// Layout and palette rules per category. All palette channels stay inside
// [kToneMin, kToneMax] after shading.
const Theme& theme(SceneCategory c) {
  static const std::array<Theme, 8> kThemes = {{
      {16, 600, 2200, 400, 1800, 40,
       {{96, 140, 196}, {170, 196, 207}, {92, 140, 72}, {110, 156, 84}}, 0, 0.62},
      {18, 500, 1600, 800, 3000, 20,
       {{60, 60, 110}, {140, 120, 180}, {90, 96, 110}, {110, 116, 130}}, 200, 0.60},
      {14, 700, 2000, 500, 1500, 35,
       {{120, 170, 207}, {200, 200, 207}, {150, 190, 96}, {170, 200, 110}}, 40, 0.64},
      {14, 800, 2400, 400, 1400, 30,
       {{150, 150, 170}, {207, 190, 160}, {170, 150, 110}, {186, 166, 124}}, 20, 0.50},
      {24, 600, 1500, 1200, 4000, 8,
       {{130, 150, 180}, {190, 196, 207}, {110, 110, 110}, {124, 124, 124}}, 100, 0.58},
      {18, 800, 2000, 600, 2400, 15,
       {{120, 120, 120}, {180, 170, 150}, {100, 92, 80}, {116, 106, 92}}, 300, 0.52},
      {20, 400, 1200, 500, 1600, 0,
       {{80, 70, 64}, {120, 110, 100}, {150, 120, 90}, {130, 100, 74}}, 160, 0.56},
      {16, 600, 1800, 300, 1200, 12,
       {{100, 160, 207}, {180, 207, 207}, {60, 110, 170}, {70, 124, 184}}, 260, 0.60},
  }};
  return kThemes[static_cast<std::size_t>(c)];
}

constexpr double kTerrainCell = 1000.0;
constexpr double kStartKeepOut = 1500.0;
constexpr double kLandmarkGap = 300.0;
constexpr double kCheckerCell = 250.0;

std::uint8_t tone(double v) {
  const double r = std::floor(v + 0.5);
  return static_cast<std::uint8_t>(std::clamp(r, double(kToneMin), double(kToneMax)));
}

Rgb landmark_color(double hue_deg, double saturation, double value_hi) {
  // Piecewise-linear hue wheel; channel = lo + (hi - lo) * (1 - s + s * f).
  const double h = detmath::wrap_degrees(hue_deg) / 60.0;
  const int sector = static_cast<int>(std::floor(h));
  const double frac = h - sector;
  double f[3];
  switch (sector) {
    case 0: f[0] = 1; f[1] = frac; f[2] = 0; break;
    case 1: f[0] = 1 - frac; f[1] = 1; f[2] = 0; break;
    case 2: f[0] = 0; f[1] = 1; f[2] = frac; break;
    case 3: f[0] = 0; f[1] = 1 - frac; f[2] = 1; break;
    case 4: f[0] = frac; f[1] = 0; f[2] = 1; break;
    default: f[0] = 1; f[1] = 0; f[2] = 1 - frac; break;
  }
  constexpr double lo = 64.0;
  auto ch = [&](double fc) {
    return static_cast<std::uint8_t>(std::floor(lo + (value_hi - lo) * (1.0 - saturation + saturation * fc) + 0.5));
  };
  return {ch(f[0]), ch(f[1]), ch(f[2])};
}

Heightfield make_terrain(const WorldSpec& spec, const Theme& th, Rng& rng) {
  Heightfield hf;
  hf.cell = kTerrainCell;
  const int half = static_cast<int>(std::ceil(spec.extent / kTerrainCell)) + 1;
  hf.nx = hf.ny = 2 * half + 1;
  hf.origin_x = hf.origin_y = -half * kTerrainCell;
  std::vector<double> raw(std::size_t(hf.nx) * hf.ny);
  for (auto& v : raw) v = th.terrain_amplitude * rng.uniform(-1.0, 1.0);
  // Two 3x3 box-blur passes smooth the noise into rolling hills.
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<double> out(raw.size());
    for (int y = 0; y < hf.ny; ++y) {
      for (int x = 0; x < hf.nx; ++x) {
        double sum = 0.0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = std::clamp(x + dx, 0, hf.nx - 1);
            const int yy = std::clamp(y + dy, 0, hf.ny - 1);
            sum += raw[std::size_t(yy) * hf.nx + xx];
          }
        }
        out[std::size_t(y) * hf.nx + x] = sum / 9.0;
      }
    }
    raw.swap(out);
  }
  hf.heights = std::move(raw);
  hf.min_height = *std::min_element(hf.heights.begin(), hf.heights.end());
  hf.max_height = *std::max_element(hf.heights.begin(), hf.heights.end());
  return hf;
}

}  // namespace

std::string_view name(SceneCategory c) { return kCategoryNames[static_cast<std::size_t>(c)]; }

SceneCategory category_from_name(std::string_view text) {
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
    if (kCategoryNames[i] == text) return static_cast<SceneCategory>(i);
  }
  throw ConfigError("unknown scene category '" + std::string(text) + "'");
}

std::string_view name(Perspective p) {
  return p == Perspective::FirstPerson ? "first" : "third";
}

Perspective perspective_from_name(std::string_view text) {
  if (text == "first" || text == "first-person") return Perspective::FirstPerson;
  if (text == "third" || text == "third-person") return Perspective::ThirdPerson;
  throw ConfigError("unknown perspective '" + std::string(text) + "' (expected first|third)");
}

double Heightfield::height_at(double x, double y) const {
  double gx = (x - origin_x) / cell;
  double gy = (y - origin_y) / cell;
  gx = std::clamp(gx, 0.0, double(nx - 1));
  gy = std::clamp(gy, 0.0, double(ny - 1));
  int ix = std::min(static_cast<int>(gx), nx - 2);
  int iy = std::min(static_cast<int>(gy), ny - 2);
  const double fx = gx - ix;
  const double fy = gy - iy;
  const double* row0 = heights.data() + std::size_t(iy) * nx + ix;
  const double* row1 = row0 + nx;
  const double top = row0[0] + (row0[1] - row0[0]) * fx;
  const double bot = row1[0] + (row1[1] - row1[0]) * fx;
  return top + (bot - top) * fy;
}

double Heightfield::max_slope() const {
  double m = 0.0;
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      const double h = heights[std::size_t(y) * nx + x];
      if (x + 1 < nx) m = std::max(m, std::abs(heights[std::size_t(y) * nx + x + 1] - h) / cell);
      if (y + 1 < ny) m = std::max(m, std::abs(heights[std::size_t(y + 1) * nx + x] - h) / cell);
    }
  }
  return m;
}

World build_world(const WorldSpec& spec) {
  if (!(spec.extent > 0.0) || !std::isfinite(spec.extent)) {
    throw ConfigError("world extent must be > 0");
  }
  const Theme& th = theme(spec.category);
  Rng rng(derive_seed(spec.seed, 0x5157u + static_cast<unsigned>(spec.category)));

  World world;
  world.spec = spec;
  world.palette = th.palette;
  world.terrain = make_terrain(spec, th, rng);

  const double floor_z = world.terrain.min_height - 100.0;
  const int attempts = 400 * th.landmark_count;
  for (int a = 0; a < attempts && int(world.landmarks.size()) < th.landmark_count; ++a) {
    const double w = std::floor(rng.uniform(th.width_min, th.width_max));
    const double d = std::floor(rng.uniform(th.width_min, th.width_max));
    const double h = std::floor(rng.uniform(th.height_min, th.height_max));
    const double lim_x = spec.extent - w / 2 - 100.0;
    const double lim_y = spec.extent - d / 2 - 100.0;
    if (lim_x <= 0.0 || lim_y <= 0.0) continue;
    const double cx = std::floor(rng.uniform(-lim_x, lim_x));
    const double cy = std::floor(rng.uniform(-lim_y, lim_y));
    Aabb box{{cx - w / 2, cy - d / 2, floor_z}, {cx + w / 2, cy + d / 2, h}};
    // Keep the origin (default start) clear.
    const double nx = std::clamp(0.0, box.min.x, box.max.x);
    const double ny = std::clamp(0.0, box.min.y, box.max.y);
    if (std::sqrt(nx * nx + ny * ny) < kStartKeepOut) continue;
    bool clash = false;
    for (const auto& lm : world.landmarks) {
      if (lm.box.overlaps_xy(box, kLandmarkGap)) {
        clash = true;
        break;
      }
    }
    if (clash) continue;
    world.landmarks.push_back({box, 0, {}});
  }
  if (int(world.landmarks.size()) < kMinLandmarks) {
    throw ConfigError("extent " + std::to_string(spec.extent) + " too small to place " +
                      std::to_string(kMinLandmarks) + " landmarks (world seed " +
                      std::to_string(spec.seed) + ", category " + std::string(name(spec.category)) +
                      "; placed " + std::to_string(world.landmarks.size()) + ")");
  }
  const int n = int(world.landmarks.size());
  for (int i = 0; i < n; ++i) {
    auto& lm = world.landmarks[std::size_t(i)];
    lm.color_id = i;
    lm.color = landmark_color(th.hue_offset + 360.0 * i / n, th.saturation, (i % 2) ? 176.0 : 207.0);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (world.landmarks[std::size_t(i)].color == world.landmarks[std::size_t(j)].color) {
        throw Error("internal: duplicate landmark colours");
      }
    }
  }
  return world;
}

Pose start_pose(const World& world, double yaw_deg) {
  (void)world;
  Pose p;
  p.position = {0.0, 0.0, kEyeHeight};
  p.yaw = detmath::wrap_degrees(yaw_deg);
  return p;
}

std::size_t RenderLayers::count(std::uint8_t id) const {
  return static_cast<std::size_t>(std::count(surface.begin(), surface.end(), id));
}

// ---------------------------------------------------------------------------
// Raycaster

namespace {

struct CameraBasis {
  Vec3 origin;
  Vec3 fwd, right, up;
  double tan_y = 0.75;  ///< vertical half-extent of the image plane at unit depth
};

CameraBasis make_basis(const Pose& cam, Resolution res) {
  double sy, cy, sp, cp;
  detmath::sincos_deg(cam.yaw, sy, cy);
  detmath::sincos_deg(cam.pitch, sp, cp);
  CameraBasis b;
  b.origin = cam.position;
  b.fwd = {cp * sy, cp * cy, sp};
  b.right = {cy, -sy, 0.0};
  b.up = {-sp * sy, -sp * cy, cp};
  b.tan_y = double(res.height) / double(res.width);
  return b;
}

double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

struct BoxHit {
  double t = std::numeric_limits<double>::infinity();
  int index = -1;
  int axis = 0;
  bool positive_face = false;
};

// Slab test against one box for a ray starting outside it.
// Returns false early once the entry point cannot beat `best`.
inline bool ray_box(const Vec3& o, const double* d, const double* inv, const Aabb& box,
                    double& t_enter, int& axis, bool& positive_face,
                    double best = std::numeric_limits<double>::infinity()) {
  const double ov[3] = {o.x, o.y, o.z};
  const double lo[3] = {box.min.x, box.min.y, box.min.z};
  const double hi[3] = {box.max.x, box.max.y, box.max.z};
  double tn = -std::numeric_limits<double>::infinity();
  double tf = std::numeric_limits<double>::infinity();
  int ax = 0;
  bool pos = false;
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (ov[a] <= lo[a] || ov[a] >= hi[a]) return false;
      continue;
    }
    double t0 = (lo[a] - ov[a]) * inv[a];
    double t1 = (hi[a] - ov[a]) * inv[a];
    bool face_pos = false;
    if (t0 > t1) {
      std::swap(t0, t1);
      face_pos = true;
    }
    if (t0 > tn) {
      tn = t0;
      ax = a;
      pos = face_pos;
    }
    if (t1 < tf) tf = t1;
    if (tn > tf || tf <= 0.0 || tn >= best) return false;
  }
  if (tn > tf || tf <= 0.0) return false;
  t_enter = std::max(tn, 0.0);
  axis = ax;
  positive_face = pos;
  return true;
}

struct ScreenRect {
  int x0, x1, y0, y1;  // inclusive; empty when x0 > x1
};

ScreenRect project_box(const CameraBasis& cam, const Aabb& box, Resolution res) {
  const ScreenRect full{0, res.width - 1, 0, res.height - 1};
  double min_i = std::numeric_limits<double>::infinity(), max_i = -min_i;
  double min_j = min_i, max_j = -min_i;
  for (int c = 0; c < 8; ++c) {
    const Vec3 p{(c & 1) ? box.max.x : box.min.x, (c & 2) ? box.max.y : box.min.y,
                 (c & 4) ? box.max.z : box.min.z};
    const Vec3 v{p.x - cam.origin.x, p.y - cam.origin.y, p.z - cam.origin.z};
    const double zc = dot(v, cam.fwd);
    if (zc <= 1e-3) return full;  // straddles the camera plane: test everywhere
    const double nx = dot(v, cam.right) / zc;
    const double ny = dot(v, cam.up) / (zc * cam.tan_y);
    const double pi = ((nx + 1.0) * res.width - 1.0) * 0.5;
    const double pj = ((1.0 - ny) * res.height - 1.0) * 0.5;
    min_i = std::min(min_i, pi);
    max_i = std::max(max_i, pi);
    min_j = std::min(min_j, pj);
    max_j = std::max(max_j, pj);
  }
  auto clampi = [](double v, int lo, int hi) {
    return static_cast<int>(std::clamp(v, double(lo) - 1.0, double(hi) + 1.0));
  };
  ScreenRect r{clampi(std::floor(min_i) - 1, 0, res.width - 1),
               clampi(std::ceil(max_i) + 1, 0, res.width - 1),
               clampi(std::floor(min_j) - 1, 0, res.height - 1),
               clampi(std::ceil(max_j) + 1, 0, res.height - 1)};
  r.x0 = std::max(r.x0, 0);
  r.y0 = std::max(r.y0, 0);
  r.x1 = std::min(r.x1, res.width - 1);
  r.y1 = std::min(r.y1, res.height - 1);
  return r;
}

// Returns the ray parameter of the first terrain hit in [0, t_limit), or
// +inf. Fixed-schedule march followed by bisection.
// `lip` bounds |dh| per unit of horizontal travel, so a sample that is `a`
// above the terrain can safely advance a / (lip + descent rate).
double march_terrain(const Heightfield& hf, double lip, const Vec3& o, const double* d,
                     double t_limit) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double top = hf.max_height;
  const double bottom = hf.min_height;
  double t_start = 0.0;
  if (o.z > top) {
    if (d[2] >= 0.0) return inf;
    t_start = (top - o.z) / d[2];
  }
  double t_stop = t_limit;
  if (d[2] < 0.0) t_stop = std::min(t_stop, (bottom - o.z) / d[2]);
  else if (d[2] > 0.0) t_stop = std::min(t_stop, (top - o.z) / d[2]);
  if (!(t_start < t_stop)) return inf;

  const double hs = std::sqrt(d[0] * d[0] + d[1] * d[1]);
  if (hs == 0.0) {
    const double h = hf.height_at(o.x, o.y);
    const double t = (h - o.z) / d[2];
    return (t >= t_start && t < t_stop) ? t : inf;
  }
  auto above = [&](double t) {
    return (o.z + t * d[2]) - hf.height_at(o.x + t * d[0], o.y + t * d[1]);
  };
  const double descent = d[2] < 0.0 ? -d[2] / hs : 0.0;
  double prev = t_start;
  double t = t_start;
  while (true) {
    const double a = above(t);
    if (a <= 0.0) {
      if (t == t_start) return t;
      double lo = prev, hi = t;
      for (int it = 0; it < 8; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (above(mid) <= 0.0) hi = mid; else lo = mid;
      }
      return hi;
    }
    if (t >= t_stop) return inf;
    const double step_h = std::max({a / (lip + descent), 0.01 * t * hs, 20.0});
    prev = t;
    t = std::min(t + step_h / hs, t_stop);
  }
}

struct AvatarCapsule {
  Vec3 a, b;  // axis endpoints (a lower)
  double radius;
  double mid_z;
};

AvatarCapsule make_avatar(const Pose& character) {
  const Vec3 head = character.position;
  return {{head.x, head.y, head.z - 140.0}, {head.x, head.y, head.z - 10.0}, 30.0, head.z - 75.0};
}

// Ray/capsule intersection with a unit-length direction; returns -1 on miss.
double ray_capsule(const Vec3& ro, const Vec3& rd, const AvatarCapsule& cap) {
  const Vec3 ba{cap.b.x - cap.a.x, cap.b.y - cap.a.y, cap.b.z - cap.a.z};
  const Vec3 oa{ro.x - cap.a.x, ro.y - cap.a.y, ro.z - cap.a.z};
  const double baba = dot(ba, ba);
  const double bard = dot(ba, rd);
  const double baoa = dot(ba, oa);
  const double rdoa = dot(rd, oa);
  const double oaoa = dot(oa, oa);
  const double a = baba - bard * bard;
  double b = baba * rdoa - baoa * bard;
  double c = baba * oaoa - baoa * baoa - cap.radius * cap.radius * baba;
  double h = b * b - a * c;
  if (a != 0.0 && h >= 0.0) {
    const double t = (-b - std::sqrt(h)) / a;
    const double y = baoa + t * bard;
    if (y > 0.0 && y < baba && t > 0.0) return t;
  }
  // Caps: both spheres, nearest positive hit.
  double best = -1.0;
  for (const Vec3& cen : {cap.a, cap.b}) {
    const Vec3 oc{ro.x - cen.x, ro.y - cen.y, ro.z - cen.z};
    b = dot(rd, oc);
    c = dot(oc, oc) - cap.radius * cap.radius;
    h = b * b - c;
    if (h > 0.0) {
      const double t = -b - std::sqrt(h);
      if (t > 0.0 && (best < 0.0 || t < best)) best = t;
    }
  }
  return best;
}

void render_impl(const World& world, const Pose& camera, Resolution res, int frame_index,
                 const AvatarCapsule* avatar, Frame& out, std::vector<std::uint8_t>* surface) {
  if (res.width <= 0 || res.height <= 0) throw ConfigError("render resolution must be positive");
  if (!world.in_bounds(camera.position)) {
    throw ConfigError("camera outside world bounds");
  }
  out = Frame(res.width, res.height, frame_index);
  if (surface) surface->assign(std::size_t(res.width) * res.height, kSurfaceSky);

  const CameraBasis cam = make_basis(camera, res);
  const auto& lms = world.landmarks;
  const Palette& pal = world.palette;
  const double t_far_h = 3.0 * world.spec.extent;

  std::vector<ScreenRect> rects(lms.size());
  for (std::size_t i = 0; i < lms.size(); ++i) rects[i] = project_box(cam, lms[i].box, res);
  std::vector<int> row_boxes;
  row_boxes.reserve(lms.size());

  const double amp = std::max(std::abs(world.terrain.min_height), std::abs(world.terrain.max_height)) + 1.0;
  const double lip = 2.0 * world.terrain.max_slope();

  for (int j = 0; j < res.height; ++j) {
    row_boxes.clear();
    for (std::size_t i = 0; i < lms.size(); ++i) {
      if (rects[i].x0 <= rects[i].x1 && j >= rects[i].y0 && j <= rects[i].y1) {
        row_boxes.push_back(int(i));
      }
    }
    const double ny = (1.0 - (2.0 * j + 1.0) / res.height) * cam.tan_y;
    for (int i = 0; i < res.width; ++i) {
      const double nx = (2.0 * i + 1.0) / res.width - 1.0;
      const double d[3] = {cam.fwd.x + cam.right.x * nx + cam.up.x * ny,
                           cam.fwd.y + cam.right.y * nx + cam.up.y * ny,
                           cam.fwd.z + cam.right.z * nx + cam.up.z * ny};
      const double inv[3] = {d[0] != 0.0 ? 1.0 / d[0] : 0.0, d[1] != 0.0 ? 1.0 / d[1] : 0.0,
                             d[2] != 0.0 ? 1.0 / d[2] : 0.0};

      BoxHit hit;
      for (int bi : row_boxes) {
        const auto& r = rects[std::size_t(bi)];
        if (i < r.x0 || i > r.x1) continue;
        double t;
        int axis;
        bool pos;
        if (ray_box(cam.origin, d, inv, lms[std::size_t(bi)].box, t, axis, pos, hit.t) &&
            t < hit.t) {
          hit = {t, bi, axis, pos};
        }
      }
      const double hs = std::sqrt(d[0] * d[0] + d[1] * d[1]);
      double t_limit = hs > 0.0 ? t_far_h / hs : std::numeric_limits<double>::infinity();
      t_limit = std::min(t_limit, hit.t);
      const double t_ter = march_terrain(world.terrain, lip, cam.origin, d, t_limit);

      double t_scene = std::numeric_limits<double>::infinity();
      std::uint8_t sid = kSurfaceSky;
      Rgb color;
      if (t_ter < hit.t) {
        t_scene = t_ter;
        sid = kSurfaceTerrain;
        const double px = cam.origin.x + t_ter * d[0];
        const double py = cam.origin.y + t_ter * d[1];
        const long cx = static_cast<long>(std::floor(px / kCheckerCell));
        const long cy = static_cast<long>(std::floor(py / kCheckerCell));
        const Rgb base = ((cx + cy) & 1) ? pal.ground_a : pal.ground_b;
        const double tint = std::floor(world.terrain.height_at(px, py) / amp * 10.0 + 0.5);
        color = {tone(base.r + tint), tone(base.g + tint), tone(base.b + tint)};
      } else if (hit.index >= 0) {
        t_scene = hit.t;
        sid = static_cast<std::uint8_t>(kSurfaceLandmarkBase + hit.index);
        const Rgb c = lms[std::size_t(hit.index)].color;
        int shade = 256;
        if (hit.axis == 0) shade = 224;
        else if (hit.axis == 1) shade = 192;
        else shade = hit.positive_face ? 256 : 192;
        color = {tone((c.r * shade) >> 8), tone((c.g * shade) >> 8), tone((c.b * shade) >> 8)};
      } else {
        const double len = std::sqrt(hs * hs + d[2] * d[2]);
        const double e = std::clamp(2.0 * d[2] / len, 0.0, 1.0);
        color = {tone(pal.sky_horizon.r + (pal.sky_top.r - pal.sky_horizon.r) * e),
                 tone(pal.sky_horizon.g + (pal.sky_top.g - pal.sky_horizon.g) * e),
                 tone(pal.sky_horizon.b + (pal.sky_top.b - pal.sky_horizon.b) * e)};
      }

      if (avatar) {
        const double len = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
        const Vec3 dn{d[0] / len, d[1] / len, d[2] / len};
        const double tn = ray_capsule(cam.origin, dn, *avatar);
        if (tn > 0.0 && tn / len < t_scene) {
          sid = kSurfaceAvatar;
          const double hz = cam.origin.z + tn * dn.z;
          color = hz >= avatar->mid_z ? kAvatarUpper : kAvatarLower;
        }
      }

      std::uint8_t* px = out.at(i, j);
      px[0] = color.r;
      px[1] = color.g;
      px[2] = color.b;
      if (surface) (*surface)[std::size_t(j) * res.width + i] = sid;
    }
  }
}

// Nearest box entry along a ray from `o` with unit direction `dir`, or +inf.
double first_box_hit(const World& world, const Vec3& o, const Vec3& dir) {
  const double d[3] = {dir.x, dir.y, dir.z};
  const double inv[3] = {d[0] != 0.0 ? 1.0 / d[0] : 0.0, d[1] != 0.0 ? 1.0 / d[1] : 0.0,
                         d[2] != 0.0 ? 1.0 / d[2] : 0.0};
  double best = std::numeric_limits<double>::infinity();
  for (const auto& lm : world.landmarks) {
    double t;
    int axis;
    bool pos;
    if (ray_box(o, d, inv, lm.box, t, axis, pos)) best = std::min(best, t);
  }
  return best;
}

}  // namespace

RenderLayers render_layers(const World& world, const Pose& camera, Resolution res, int frame_index) {
  RenderLayers out;
  render_impl(world, camera, res, frame_index, nullptr, out.frame, &out.surface);
  return out;
}

Frame render(const World& world, const Pose& camera, Resolution res, int frame_index) {
  Frame f;
  render_impl(world, camera, res, frame_index, nullptr, f, nullptr);
  return f;
}

BoomCamera boom_camera(const Pose& character, const World& world) {
  const Pose ch = character.normalized();
  const double cam_pitch = std::clamp(ch.pitch - kBoomPitch, -kPitchLimit, kPitchLimit);
  double sy, cy, sp, cp;
  detmath::sincos_deg(ch.yaw, sy, cy);
  detmath::sincos_deg(cam_pitch, sp, cp);
  const Vec3 look{cp * sy, cp * cy, sp};   // camera -> head
  const Vec3 back{-look.x, -look.y, -look.z};  // head -> camera
  const Vec3& head = ch.position;

  double len = kBoomLength;
  // Landmarks.
  const double t_box = first_box_hit(world, head, back);
  if (t_box < len + kBoomMargin) len = std::min(len, t_box - kBoomMargin);
  // World boundary (x/y walls).
  const double e = world.spec.extent - 1.0;
  auto wall = [&](double o, double dcomp) {
    if (dcomp > 0.0) return (e - o) / dcomp;
    if (dcomp < 0.0) return (-e - o) / dcomp;
    return std::numeric_limits<double>::infinity();
  };
  len = std::min(len, wall(head.x, back.x));
  len = std::min(len, wall(head.y, back.y));
  // Terrain clearance, sampled every 10 units along the boom.
  for (double s = 10.0; s <= len; s += 10.0) {
    const double x = head.x + back.x * s, y = head.y + back.y * s, z = head.z + back.z * s;
    if (z - world.terrain.height_at(x, y) < kBoomMargin) {
      len = s - 10.0;
      break;
    }
  }
  len = std::max(len, 1.0);

  BoomCamera out;
  out.length = len;
  out.camera.position = {head.x + back.x * len, head.y + back.y * len, head.z + back.z * len};
  out.camera.yaw = ch.yaw;
  out.camera.pitch = cam_pitch;
  return out;
}

Pose third_person_camera(const Pose& character, const World& world) {
  return boom_camera(character, world).camera;
}

RenderLayers render_third_person_layers(const World& world, const Pose& character, Resolution res,
                                        int frame_index) {
  const Pose cam = third_person_camera(character, world);
  const AvatarCapsule avatar = make_avatar(character);
  RenderLayers out;
  render_impl(world, cam, res, frame_index, &avatar, out.frame, &out.surface);
  return out;
}

Frame render_third_person(const World& world, const Pose& character, Resolution res,
                          int frame_index) {
  const Pose cam = third_person_camera(character, world);
  const AvatarCapsule avatar = make_avatar(character);
  Frame f;
  render_impl(world, cam, res, frame_index, &avatar, f, nullptr);
  return f;
}

Frame render_view(const World& world, Perspective perspective, const Pose& agent, Resolution res,
                  int frame_index) {
  return perspective == Perspective::FirstPerson
             ? render(world, agent, res, frame_index)
             : render_third_person(world, agent, res, frame_index);
}

Vec3 resolve_collision(const World& world, const Vec3& from, const Vec3& to) {
  if (from == to) return from;
  const double d[3] = {to.x - from.x, to.y - from.y, to.z - from.z};
  const double o[3] = {from.x, from.y, from.z};
  double t_hit = 1.0;
  bool blocked = false;

  for (const auto& lm : world.landmarks) {
    const double lo[3] = {lm.box.min.x, lm.box.min.y, lm.box.min.z};
    const double hi[3] = {lm.box.max.x, lm.box.max.y, lm.box.max.z};
    double tn = -std::numeric_limits<double>::infinity();
    double tf = std::numeric_limits<double>::infinity();
    bool miss = false;
    for (int a = 0; a < 3 && !miss; ++a) {
      if (d[a] == 0.0) {
        if (o[a] <= lo[a] || o[a] >= hi[a]) miss = true;
        continue;
      }
      double t0 = (lo[a] - o[a]) / d[a];
      double t1 = (hi[a] - o[a]) / d[a];
      if (t0 > t1) std::swap(t0, t1);
      tn = std::max(tn, t0);
      tf = std::min(tf, t1);
    }
    // Penetration of the open interior along the segment (0, 1].
    if (miss || !(tn < tf) || tf <= 0.0 || tn >= 1.0) continue;
    const double t = std::max(tn, 0.0);
    if (t <= t_hit) {
      t_hit = t;
      blocked = true;
    }
  }
  const double e = world.spec.extent;
  for (int a = 0; a < 2; ++a) {
    if (o[a] + d[a] > e && d[a] > 0.0) {
      t_hit = std::min(t_hit, (e - o[a]) / d[a]);
      blocked = true;
    }
    if (o[a] + d[a] < -e && d[a] < 0.0) {
      t_hit = std::min(t_hit, (-e - o[a]) / d[a]);
      blocked = true;
    }
  }
  if (!blocked) return to;

  constexpr double kBackoff = 1e-3;  // world units
  const double len = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
  double t = std::max(0.0, t_hit - kBackoff / len);
  for (int attempt = 0; attempt < 8; ++attempt) {
    const Vec3 p{o[0] + d[0] * t, o[1] + d[1] * t, o[2] + d[2] * t};
    bool inside = !world.in_bounds(p);
    for (const auto& lm : world.landmarks) inside = inside || lm.box.contains_strict(p);
    if (!inside) return p;
    t = std::max(0.0, t - kBackoff * double(1 << (attempt + 1)) / len);
  }
  return from;
}

Pose step_in_world(const World& world, const Pose& pose, ActionVector action,
                   const ActionSpaceConfig& cfg) {
  Pose next = step_pose(pose, action, cfg);
  next.position = resolve_collision(world, pose.position, next.position);
  return next;
}

std::vector<Pose> simulate(const World& world, const Pose& start,
                           std::span<const ActionVector> actions, const ActionSpaceConfig& cfg) {
  std::vector<Pose> poses;
  poses.reserve(actions.size() + 1);
  poses.push_back(start);
  for (auto a : actions) poses.push_back(step_in_world(world, poses.back(), a, cfg));
  return poses;
}

}  // namespace wmbench
