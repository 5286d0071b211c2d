// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#include "bakelight/scene.hpp"

#include <atomic>
#include <cstring>
#include <fstream>
#include <sstream>

namespace bakelight {

Ray Camera::ray_at(float px, float py) const {
  Vec3 forward = normalize(look_at - position);
  Vec3 up_hint = up;
  if (std::fabs(dot(forward, normalize(up_hint))) > 0.999f) up_hint = {1, 0, 0};
  Vec3 right = normalize(cross(forward, up_hint));
  Vec3 cam_up = cross(right, forward);

  float tan_half = std::tan(vfov_deg * kPi / 180.0f * 0.5f);
  float aspect = float(width) / float(height);
  float sx = (2.0f * px / float(width) - 1.0f) * tan_half * aspect;
  float sy = (1.0f - 2.0f * py / float(height)) * tan_half;
  return {position, normalize(forward + sx * right + sy * cam_up)};
}

Vec3 Material::albedo_at(const Vec3& x) const {
  if (!checker) return albedo;
  int parity = (int(std::floor(x.x * checker_scale)) + int(std::floor(x.y * checker_scale)) +
                int(std::floor(x.z * checker_scale))) & 1;
  return parity ? albedo_b : albedo;
}

float Primitive::sdf(const Vec3& x) const {
  switch (shape) {
    case Shape::Sphere:
      return length(x - center) - radius;
    case Shape::Box: {
      Vec3 q = abs(x - center) - half_extents;
      Vec3 q_out = max(q, Vec3(0));
      float inside = std::min(max_component(q), 0.0f);
      return length(q_out) + inside;
    }
    case Shape::Plane:
      return dot(normal, x) - offset;
  }
  return 0;
}

namespace {
std::atomic<uint64_t> g_trace_exhaustions{0};
}

uint64_t trace_step_exhaustions() { return g_trace_exhaustions.load(); }
void reset_trace_step_exhaustions() { g_trace_exhaustions.store(0); }

float sdf_eval(const SdfScene& scene, const Vec3& x) {
  float d = std::numeric_limits<float>::max();
  for (const Primitive& p : scene.primitives) d = std::min(d, p.sdf(x));
  return d;
}

int nearest_primitive(const SdfScene& scene, const Vec3& x) {
  float best = std::numeric_limits<float>::max();
  int idx = -1;
  for (size_t i = 0; i < scene.primitives.size(); ++i) {
    float d = scene.primitives[i].sdf(x);
    if (d < best) {
      best = d;
      idx = int(i);
    }
  }
  return idx;
}

Vec3 sdf_normal(const SdfScene& scene, const Vec3& x, float h) {
  Vec3 g{sdf_eval(scene, {x.x + h, x.y, x.z}) - sdf_eval(scene, {x.x - h, x.y, x.z}),
         sdf_eval(scene, {x.x, x.y + h, x.z}) - sdf_eval(scene, {x.x, x.y - h, x.z}),
         sdf_eval(scene, {x.x, x.y, x.z + h}) - sdf_eval(scene, {x.x, x.y, x.z - h})};
  float len = length(g);
  if (len < 1e-20f) return {0, 0, 1};
  return g / len;
}

TraceResult sphere_trace(const SdfScene& scene, const Ray& ray, float t_min, float t_max,
                         const TraceConfig& cfg) {
  TraceResult res;
  float t = t_min;
  for (int step = 0; step < cfg.max_steps; ++step) {
    Vec3 p = ray.at(t);
    float d = sdf_eval(scene, p);
    res.steps = step + 1;
    if (d < cfg.eps_hit) {
      res.hit = true;
      res.t = t;
      res.x = p;
      res.n = sdf_normal(scene, p, cfg.normal_h);
      int idx = nearest_primitive(scene, p);
      const Material& m = scene.primitives[size_t(idx)].material;
      res.material = {m.albedo_at(p), m.roughness, res.n};
      return res;
    }
    t += d;
    if (t >= t_max) return res;
  }
  g_trace_exhaustions.fetch_add(1, std::memory_order_relaxed);
  return res;
}

VisibilitySample visibility_depth(const SdfScene& scene, const Vec3& x, const Vec3& wi,
                                  float near, float far, const TraceConfig& cfg) {
  Ray ray{x + near * wi, wi};
  TraceResult tr = sphere_trace(scene, ray, 0.0f, far - near, cfg);
  if (!tr.hit) return {true, far};
  return {false, std::clamp(near + tr.t, near, far)};
}

GBuffer trace_gbuffer(const SdfScene& scene, const Camera& camera, const TraceConfig& cfg) {
  GBuffer gb(camera.width, camera.height);
  float far = scene.primary_far(camera);
#pragma omp parallel for schedule(dynamic, 4)
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) {
      Ray ray = camera.pixel_ray(x, y);
      TraceResult tr = sphere_trace(scene, ray, 0.0f, far, cfg);
      if (tr.hit) {
        gb.mask.at(x, y) = 1.0f;
        gb.albedo.at(x, y) = tr.material.albedo;
        gb.roughness.at(x, y) = tr.material.roughness;
        gb.normal.at(x, y) = tr.n;
        gb.coordinate.at(x, y) = tr.x;
        gb.depth.at(x, y) = tr.t;
      } else {
        gb.mask.at(x, y) = 0.0f;
        gb.normal.at(x, y) = Vec3(0);
        gb.coordinate.at(x, y) = ray.at(far);
        gb.depth.at(x, y) = far;
      }
    }
  }
  return gb;
}

float pose_angle_deg(const SdfScene& scene, const Camera& a, const Camera& b) {
  Vec3 va = normalize(a.position - scene.center());
  Vec3 vb = normalize(b.position - scene.center());
  float c = std::clamp(dot(va, vb), -1.0f, 1.0f);
  return std::acos(c) * 180.0f / kPi;
}

Camera sample_hemisphere_pose(const SdfScene& scene, const PoseSampleParams& params,
                              RngStream& rng, const std::vector<Camera>& reject) {
  float sin_lo = std::sin(params.elevation_lo_deg * kPi / 180.0f);
  float sin_hi = std::sin(params.elevation_hi_deg * kPi / 180.0f);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    float azimuth = kTwoPi * rng.next_float();
    // uniform in sin(elevation) = uniform on the hemisphere band
    float sin_e = sin_lo + (sin_hi - sin_lo) * rng.next_float();
    float cos_e = std::sqrt(std::max(0.0f, 1.0f - sin_e * sin_e));
    Vec3 dir{cos_e * std::cos(azimuth), sin_e, cos_e * std::sin(azimuth)};

    Camera cam;
    cam.position = scene.center() + params.radius * dir;
    cam.look_at = scene.center();
    cam.vfov_deg = params.vfov_deg;
    cam.width = params.width;
    cam.height = params.height;

    bool ok = true;
    for (const Camera& r : reject) {
      if (pose_angle_deg(scene, cam, r) < params.min_angle_deg) {
        ok = false;
        break;
      }
    }
    if (ok) return cam;
  }
  throw std::runtime_error("sample_hemisphere_pose: pose space exhausted");
}

void save_gbuffer(const GBuffer& gb, const std::string& prefix) {
  write_pfm(prefix + ".albedo.pfm", gb.albedo);
  write_pfm(prefix + ".normal.pfm", gb.normal);
  write_pfm(prefix + ".coordinate.pfm", gb.coordinate);
  write_pfm(prefix + ".roughness.pfm", gb.roughness);
  write_pfm(prefix + ".mask.pfm", gb.mask);
  write_pfm(prefix + ".depth.pfm", gb.depth);
}

GBuffer load_gbuffer(const std::string& prefix) {
  GBuffer gb;
  gb.albedo = read_pfm3(prefix + ".albedo.pfm");
  gb.normal = read_pfm3(prefix + ".normal.pfm");
  gb.coordinate = read_pfm3(prefix + ".coordinate.pfm");
  gb.roughness = read_pfm1(prefix + ".roughness.pfm");
  gb.mask = read_pfm1(prefix + ".mask.pfm");
  gb.depth = read_pfm1(prefix + ".depth.pfm");
  gb.width = gb.albedo.width;
  gb.height = gb.albedo.height;
  return gb;
}

PointShading OraclePointShadingProvider::shade_params(const Vec3& x) const {
  PointShading ps;
  ps.normal = sdf_normal(scene_, x, cfg_.normal_h);
  int idx = nearest_primitive(scene_, x);
  const Material& m = scene_.primitives[size_t(idx)].material;
  ps.albedo = m.albedo_at(x);
  ps.roughness = m.roughness;
  return ps;
}

// ---------------------------------------------------------------------------
// Scene file: flat key=value text with one [primitive] section per shape and
// an optional [camera] section. Vectors are three space-separated floats.

namespace {

Vec3 parse_vec3(const std::string& s, const std::string& key) {
  std::istringstream iss(s);
  Vec3 v;
  if (!(iss >> v.x >> v.y >> v.z))
    throw std::runtime_error("scene: expected three floats for " + key);
  return v;
}

float parse_float(const std::string& s, const std::string& key) {
  try {
    return std::stof(s);
  } catch (...) {
    throw std::runtime_error("scene: expected float for " + key);
  }
}

}  // namespace

SdfScene SdfScene::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene file: " + path);

  SdfScene scene;
  Primitive* prim = nullptr;
  Camera* cam = nullptr;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);

    if (line == "[primitive]") {
      scene.primitives.emplace_back();
      prim = &scene.primitives.back();
      cam = nullptr;
      continue;
    }
    if (line == "[camera]") {
      scene.default_camera.emplace();
      cam = &*scene.default_camera;
      prim = nullptr;
      continue;
    }

    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("scene: bad line " + std::to_string(lineno) + " in " + path);
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
    };
    trim(key);
    trim(val);

    if (cam) {
      if (key == "position") cam->position = parse_vec3(val, key);
      else if (key == "look_at") cam->look_at = parse_vec3(val, key);
      else if (key == "up") cam->up = parse_vec3(val, key);
      else if (key == "vfov") cam->vfov_deg = parse_float(val, key);
      else if (key == "width") cam->width = int(parse_float(val, key));
      else if (key == "height") cam->height = int(parse_float(val, key));
      else throw std::runtime_error("scene: unknown camera key " + key);
    } else if (prim) {
      if (key == "shape") {
        if (val == "sphere") prim->shape = Primitive::Shape::Sphere;
        else if (val == "box") prim->shape = Primitive::Shape::Box;
        else if (val == "plane") prim->shape = Primitive::Shape::Plane;
        else throw std::runtime_error("scene: unknown shape " + val);
      } else if (key == "center") prim->center = parse_vec3(val, key);
      else if (key == "radius") prim->radius = parse_float(val, key);
      else if (key == "half_extents") prim->half_extents = parse_vec3(val, key);
      else if (key == "normal") prim->normal = normalize(parse_vec3(val, key));
      else if (key == "offset") prim->offset = parse_float(val, key);
      else if (key == "albedo") prim->material.albedo = parse_vec3(val, key);
      else if (key == "albedo_b") { prim->material.albedo_b = parse_vec3(val, key); prim->material.checker = true; }
      else if (key == "checker_scale") { prim->material.checker_scale = parse_float(val, key); prim->material.checker = true; }
      else if (key == "roughness") prim->material.roughness = parse_float(val, key);
      else throw std::runtime_error("scene: unknown primitive key " + key);
    } else {
      if (key == "name") scene.name = val;
      else if (key == "aabb_min") scene.aabb_min = parse_vec3(val, key);
      else if (key == "aabb_max") scene.aabb_max = parse_vec3(val, key);
      else throw std::runtime_error("scene: unknown key " + key);
    }
  }
  if (scene.primitives.empty()) throw std::runtime_error("scene has no primitives: " + path);
  return scene;
}

void SdfScene::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scene file: " + path);
  out << "name = " << name << "\n";
  out << "aabb_min = " << aabb_min.x << " " << aabb_min.y << " " << aabb_min.z << "\n";
  out << "aabb_max = " << aabb_max.x << " " << aabb_max.y << " " << aabb_max.z << "\n";
  for (const Primitive& p : primitives) {
    out << "\n[primitive]\n";
    switch (p.shape) {
      case Primitive::Shape::Sphere:
        out << "shape = sphere\n";
        out << "center = " << p.center.x << " " << p.center.y << " " << p.center.z << "\n";
        out << "radius = " << p.radius << "\n";
        break;
      case Primitive::Shape::Box:
        out << "shape = box\n";
        out << "center = " << p.center.x << " " << p.center.y << " " << p.center.z << "\n";
        out << "half_extents = " << p.half_extents.x << " " << p.half_extents.y << " "
            << p.half_extents.z << "\n";
        break;
      case Primitive::Shape::Plane:
        out << "shape = plane\n";
        out << "normal = " << p.normal.x << " " << p.normal.y << " " << p.normal.z << "\n";
        out << "offset = " << p.offset << "\n";
        break;
    }
    out << "albedo = " << p.material.albedo.x << " " << p.material.albedo.y << " "
        << p.material.albedo.z << "\n";
    if (p.material.checker) {
      out << "albedo_b = " << p.material.albedo_b.x << " " << p.material.albedo_b.y << " "
          << p.material.albedo_b.z << "\n";
      out << "checker_scale = " << p.material.checker_scale << "\n";
    }
    out << "roughness = " << p.material.roughness << "\n";
  }
}

}  // namespace bakelight
