// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#include "bakelight/distill.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace bakelight {

namespace fs = std::filesystem;
using tnn::Tensor;

std::string PseudoDataset::manifest_text() const {
  std::ostringstream os;
  os << "scene=" << scene_name << "\nseed=" << seed << "\nposes=" << poses.size() << "\n";
  for (const Camera& c : poses)
    os << c.position.x << " " << c.position.y << " " << c.position.z << " | " << c.look_at.x
       << " " << c.look_at.y << " " << c.look_at.z << " | " << c.vfov_deg << " " << c.width
       << " " << c.height << "\n";
  return os.str();
}

uint64_t PseudoDataset::manifest_hash() const {
  std::string text = manifest_text();
  return fnv1a64(text.data(), text.size());
}

void PseudoDataset::save(const std::string& dir) const {
  fs::create_directories(dir);
  std::ofstream manifest(dir + "/manifest.txt");
  if (!manifest) throw std::runtime_error("cannot write dataset manifest: " + dir);
  manifest << manifest_text();
  char hash_line[32];
  std::snprintf(hash_line, sizeof(hash_line), "%016llx",
                (unsigned long long)manifest_hash());
  manifest << "hash=" << hash_line << "\n";
  for (size_t i = 0; i < gbuffers.size(); ++i) {
    char prefix[32];
    std::snprintf(prefix, sizeof(prefix), "pose_%04zu", i);
    save_gbuffer(gbuffers[i], dir + "/" + prefix);
  }
}

PseudoDataset PseudoDataset::load(const std::string& dir) {
  std::ifstream manifest(dir + "/manifest.txt");
  if (!manifest) throw std::runtime_error("cannot open dataset manifest: " + dir);
  PseudoDataset ds;
  std::string line;
  size_t pose_count = 0;
  while (std::getline(manifest, line)) {
    if (line.rfind("scene=", 0) == 0) ds.scene_name = line.substr(6);
    else if (line.rfind("seed=", 0) == 0) ds.seed = std::stoull(line.substr(5));
    else if (line.rfind("poses=", 0) == 0) pose_count = std::stoul(line.substr(6));
    else if (line.rfind("hash=", 0) == 0) continue;
    else if (!line.empty()) {
      Camera c;
      char bar;
      std::istringstream is(line);
      is >> c.position.x >> c.position.y >> c.position.z >> bar >> c.look_at.x >> c.look_at.y >>
          c.look_at.z >> bar >> c.vfov_deg >> c.width >> c.height;
      if (!is) throw std::runtime_error("bad pose line in dataset manifest: " + dir);
      ds.poses.push_back(c);
    }
  }
  if (ds.poses.size() != pose_count)
    throw std::runtime_error("dataset manifest pose count mismatch: " + dir);
  for (size_t i = 0; i < pose_count; ++i) {
    char prefix[32];
    std::snprintf(prefix, sizeof(prefix), "pose_%04zu", i);
    ds.gbuffers.push_back(load_gbuffer(dir + "/" + prefix));
  }
  return ds;
}

PseudoDataset build_pseudo_dataset(const SdfScene& scene, int n_random,
                                   const std::vector<Camera>& train_poses,
                                   const std::vector<Camera>& test_poses,
                                   const PoseSampleParams& params, RngStream& rng) {
  PseudoDataset ds;
  ds.seed = rng.seed;
  ds.scene_name = scene.name;

  std::vector<Camera> reject = train_poses;
  reject.insert(reject.end(), test_poses.begin(), test_poses.end());
  for (int i = 0; i < n_random; ++i) {
    Camera c = sample_hemisphere_pose(scene, params, rng, reject);
    ds.poses.push_back(c);
    reject.push_back(c);  // later draws also stay apart
  }
  ds.poses.insert(ds.poses.end(), train_poses.begin(), train_poses.end());

  ds.gbuffers.reserve(ds.poses.size());
  for (const Camera& c : ds.poses) ds.gbuffers.push_back(trace_gbuffer(scene, c));
  return ds;
}

void write_loss_csv(const std::string& path, const std::vector<LossRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write loss trace: " + path);
  out << "step,total,albedo,normal,roughness,coordinate,mask_bce,vis_bce,depth_l1,lr\n";
  for (const LossRow& r : rows)
    out << r.step << "," << r.total << "," << r.albedo << "," << r.normal << "," << r.roughness
        << "," << r.coordinate << "," << r.mask_bce << "," << r.vis_bce << "," << r.depth_l1
        << "," << r.lr << "\n";
}

namespace {

float sigmoid_grad(float s) { return s * (1.0f - s); }

// L1 derivative with the 0-at-0 convention.
float l1_sign(float d) { return d > 0 ? 1.0f : d < 0 ? -1.0f : 0.0f; }

}  // namespace

std::vector<LossRow> train_cnn(DirectRenderer& model, const PseudoDataset& dataset,
                               const CnnTrainConfig& cfg) {
  if (dataset.poses.empty()) throw std::invalid_argument("train_cnn: empty dataset");
  const DirectRendererConfig& mc = model.config();
  const int ds = mc.downsample();
  const int batch = std::min<int>(cfg.poses_per_batch, int(dataset.poses.size()));
  const int full_h = dataset.gbuffers[0].height, full_w = dataset.gbuffers[0].width;
  const int64_t hw = int64_t(full_h) * full_w;
  const Vec3 extent = mc.aabb_max - mc.aabb_min;

  // raymaps are fixed per pose; build them once
  std::vector<Tensor> raymaps;
  raymaps.reserve(dataset.poses.size());
  for (const Camera& c : dataset.poses) raymaps.push_back(build_raymap(c, ds));

  tnn::Adam opt;
  opt.beta1 = 0.9;
  opt.beta2 = 0.999;
  model.register_params(opt);

  RngStream base(cfg.seed);
  std::vector<LossRow> trace;
  trace.reserve(size_t(std::max(0, cfg.total_steps - cfg.start_step)));

  Tensor input({batch, 6, full_h / ds, full_w / ds});
  const int64_t in_chw = input.numel() / batch;

  for (int step = cfg.start_step; step < cfg.total_steps; ++step) {
    RngStream step_rng = base.fork(uint64_t(step));
    std::vector<int> picks(static_cast<size_t>(batch));
    if (batch == int(dataset.poses.size())) {
      for (int i = 0; i < batch; ++i) picks[size_t(i)] = i;
    } else {
      for (int i = 0; i < batch; ++i)
        picks[size_t(i)] = int(step_rng.next_below(uint32_t(dataset.poses.size())));
    }
    for (int i = 0; i < batch; ++i)
      std::copy(raymaps[size_t(picks[size_t(i)])].values.begin(),
                raymaps[size_t(picks[size_t(i)])].values.end(),
                input.values.begin() + int64_t(i) * in_chw);

    Tensor raw = model.forward(input);
    Tensor draw(raw.shape, 0.0f);

    double loss_albedo = 0, loss_normal = 0, loss_rough = 0, loss_coord = 0, loss_mask = 0;
    double masked_px = 0;
    for (int b = 0; b < batch; ++b) masked_px += [&] {
      double m = 0;
      const GBuffer& gb = dataset.gbuffers[size_t(picks[size_t(b)])];
      for (float v : gb.mask.pixels) m += v > 0.5f ? 1.0 : 0.0;
      return m;
    }();
    if (masked_px < 1) masked_px = 1;
    const double inv_masked = 1.0 / masked_px;
    const double inv_all = 1.0 / double(int64_t(batch) * hw);

    const int64_t chw = int64_t(11) * hw;
    for (int b = 0; b < batch; ++b) {
      const GBuffer& gb = dataset.gbuffers[size_t(picks[size_t(b)])];
      const float* rb = raw.data() + int64_t(b) * chw;
      float* db = draw.data() + int64_t(b) * chw;
      for (int64_t i = 0; i < hw; ++i) {
        bool inside = gb.mask.pixels[size_t(i)] > 0.5f;
        // mask head: BCE over every pixel
        {
          float x = rb[10 * hw + i];
          float t = inside ? 1.0f : 0.0f;
          loss_mask += (std::max(x, 0.0f) - x * t + std::log1p(std::exp(-std::fabs(x)))) * inv_all;
          db[10 * hw + i] += float((sigmoid(x) - t) * inv_all);
        }
        if (!inside) continue;
        // albedo: sigmoid then L1
        for (int c = 0; c < 3; ++c) {
          float s = sigmoid(rb[c * hw + i]);
          float d = s - gb.albedo.pixels[size_t(i)][c];
          loss_albedo += std::fabs(d) * inv_masked;
          db[c * hw + i] += float(l1_sign(d) * sigmoid_grad(s) * inv_masked);
        }
        // normal: safe normalize then L1
        {
          float nx = rb[3 * hw + i], ny = rb[4 * hw + i], nz = rb[5 * hw + i];
          float len = std::sqrt(nx * nx + ny * ny + nz * nz);
          float safe = std::max(len, 1e-4f);
          Vec3 n{nx / safe, ny / safe, nz / safe};
          Vec3 t = gb.normal.pixels[size_t(i)];
          Vec3 sgn{l1_sign(n.x - t.x), l1_sign(n.y - t.y), l1_sign(n.z - t.z)};
          loss_normal +=
              (std::fabs(n.x - t.x) + std::fabs(n.y - t.y) + std::fabs(n.z - t.z)) * inv_masked;
          // d(n)/d(raw) = (I - n n^T) / len for len above the guard
          float dot_sn = sgn.x * n.x + sgn.y * n.y + sgn.z * n.z;
          db[3 * hw + i] += float((sgn.x - dot_sn * n.x) / safe * inv_masked);
          db[4 * hw + i] += float((sgn.y - dot_sn * n.y) / safe * inv_masked);
          db[5 * hw + i] += float((sgn.z - dot_sn * n.z) / safe * inv_masked);
        }
        // roughness: affine sigmoid then L1
        {
          float s = sigmoid(rb[6 * hw + i]);
          float r = kRoughnessMin + (kRoughnessMax - kRoughnessMin) * s;
          float d = r - gb.roughness.pixels[size_t(i)];
          loss_rough += std::fabs(d) * inv_masked;
          db[6 * hw + i] += float(l1_sign(d) * (kRoughnessMax - kRoughnessMin) *
                                  sigmoid_grad(s) * inv_masked);
        }
        // coordinate: AABB-normalized sigmoid then L1 in world units
        for (int c = 0; c < 3; ++c) {
          float s = sigmoid(rb[(7 + c) * hw + i]);
          float world = mc.aabb_min[c] + s * extent[c];
          float d = world - gb.coordinate.pixels[size_t(i)][c];
          loss_coord += std::fabs(d) * inv_masked;
          db[(7 + c) * hw + i] += float(l1_sign(d) * extent[c] * sigmoid_grad(s) * inv_masked);
        }
      }
    }

    double total = loss_albedo + loss_normal + loss_rough + loss_coord + loss_mask;
    if (!std::isfinite(total))
      throw std::runtime_error("train_cnn: non-finite loss at step " + std::to_string(step));

    model.backward(draw);
    double lr = tnn::cosine_lr(step, cfg.total_steps, cfg.lr0);
    opt.step(lr);

    LossRow row;
    row.step = step;
    row.total = total;
    row.albedo = loss_albedo;
    row.normal = loss_normal;
    row.roughness = loss_rough;
    row.coordinate = loss_coord;
    row.mask_bce = loss_mask;
    row.lr = lr;
    trace.push_back(row);
  }
  return trace;
}

namespace {

// Masked surface pixels per pose, cached for point sampling.
struct SurfacePool {
  std::vector<GBuffer> gbuffers;
  std::vector<std::vector<int>> masked;  // pixel indices with mask = 1

  size_t total_masked() const {
    size_t n = 0;
    for (auto& v : masked) n += v.size();
    return n;
  }
};

SurfacePool build_surface_pool(const SdfScene& scene, const HashTrainConfig& cfg) {
  SurfacePool pool;
  RngStream rng = RngStream(cfg.seed).fork(0xB00C);
  std::vector<Camera> poses;
  for (int i = 0; i < cfg.surface_pose_count; ++i)
    poses.push_back(sample_hemisphere_pose(scene, cfg.pose_params, rng, poses));
  for (const Camera& c : poses) {
    GBuffer gb = trace_gbuffer(scene, c);
    std::vector<int> idx;
    for (int i = 0; i < int(gb.mask.size()); ++i)
      if (gb.mask.pixels[size_t(i)] > 0.5f) idx.push_back(i);
    if (!idx.empty()) {
      pool.gbuffers.push_back(std::move(gb));
      pool.masked.push_back(std::move(idx));
    }
  }
  if (pool.gbuffers.empty())
    throw std::runtime_error("train_hash: no surface points visible from sampled poses");
  return pool;
}

}  // namespace

std::vector<LossRow> train_hash(HashRenderer& renderer, const SdfScene& scene,
                                const HashTrainConfig& cfg) {
  const HashGridConfig& hc = renderer.config();
  SurfacePool pool = build_surface_pool(scene, cfg);

  tnn::Adam opt;
  opt.weight_decay = cfg.weight_decay;
  renderer.register_params(opt);

  RngStream base(cfg.seed);
  std::vector<LossRow> trace;
  trace.reserve(size_t(std::max(0, cfg.total_steps - cfg.start_step)));

  const int P = cfg.points_per_batch;
  const int K = cfg.dirs_per_point;
  const int F = hc.feature_size();

  for (int step = cfg.start_step; step < cfg.total_steps; ++step) {
    RngStream srng = base.fork(uint64_t(step));

    // sample surface points with their oracle BRDF labels
    Tensor points({P, 3});
    std::vector<Vec3> label_n(static_cast<size_t>(P)), label_a(static_cast<size_t>(P));
    std::vector<float> label_r(static_cast<size_t>(P));
    for (int i = 0; i < P; ++i) {
      int pose = int(srng.next_below(uint32_t(pool.gbuffers.size())));
      const auto& idx = pool.masked[size_t(pose)];
      int px = idx[srng.next_below(uint32_t(idx.size()))];
      const GBuffer& gb = pool.gbuffers[size_t(pose)];
      Vec3 x = gb.coordinate.pixels[size_t(px)];
      points.values[size_t(i) * 3] = x.x;
      points.values[size_t(i) * 3 + 1] = x.y;
      points.values[size_t(i) * 3 + 2] = x.z;
      label_n[size_t(i)] = gb.normal.pixels[size_t(px)];
      label_a[size_t(i)] = gb.albedo.pixels[size_t(px)];
      label_r[size_t(i)] = gb.roughness.pixels[size_t(px)];
    }

    Tensor feat = renderer.encoder().forward(points);

    // BRDF decoder losses
    Tensor raw = renderer.decoder().forward(feat);
    Tensor draw(raw.shape, 0.0f);
    double loss_n = 0, loss_a = 0, loss_r = 0;
    const double inv_p = 1.0 / double(P);
    for (int i = 0; i < P; ++i) {
      const float* r = raw.data() + int64_t(i) * 7;
      float* d = draw.data() + int64_t(i) * 7;
      float len = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
      float safe = std::max(len, 1e-4f);
      Vec3 n{r[0] / safe, r[1] / safe, r[2] / safe};
      Vec3 tn = label_n[size_t(i)];
      Vec3 sgn{l1_sign(n.x - tn.x), l1_sign(n.y - tn.y), l1_sign(n.z - tn.z)};
      loss_n += (std::fabs(n.x - tn.x) + std::fabs(n.y - tn.y) + std::fabs(n.z - tn.z)) * inv_p;
      float dot_sn = sgn.x * n.x + sgn.y * n.y + sgn.z * n.z;
      d[0] += float((sgn.x - dot_sn * n.x) / safe * inv_p);
      d[1] += float((sgn.y - dot_sn * n.y) / safe * inv_p);
      d[2] += float((sgn.z - dot_sn * n.z) / safe * inv_p);
      for (int c = 0; c < 3; ++c) {
        float s = sigmoid(r[3 + c]);
        float diff = s - label_a[size_t(i)][c];
        loss_a += std::fabs(diff) * inv_p;
        d[3 + c] += float(l1_sign(diff) * sigmoid_grad(s) * inv_p);
      }
      float s = sigmoid(r[6]);
      float rough = kRoughnessMin + (kRoughnessMax - kRoughnessMin) * s;
      float diff = rough - label_r[size_t(i)];
      loss_r += std::fabs(diff) * inv_p;
      d[6] += float(l1_sign(diff) * (kRoughnessMax - kRoughnessMin) * sigmoid_grad(s) * inv_p);
    }
    Tensor dfeat = renderer.decoder().backward(draw);

    // implicit ray tracer: stratified sphere directions per point, oracle
    // visibility/depth labels, backfacing pairs masked out of the loss
    const int M = P * K;
    Tensor irt_in({M, F + 3});
    std::vector<float> vis_label(static_cast<size_t>(M)), depth_label(static_cast<size_t>(M));
    std::vector<float> weight(static_cast<size_t>(M), 0.0f);
    std::vector<Vec3> dirs_flat(static_cast<size_t>(M));
    RngStream dir_rng = base.fork(uint64_t(step)).fork(0xD1D5);
    for (int i = 0; i < P; ++i) {
      Vec3 x{points.values[size_t(i) * 3], points.values[size_t(i) * 3 + 1],
             points.values[size_t(i) * 3 + 2]};
      auto dirs = stratified_sphere_dirs(K, dir_rng);
      for (int k = 0; k < K; ++k) {
        int row = i * K + k;
        dirs_flat[size_t(row)] = dirs[size_t(k)];
        std::copy(feat.data() + int64_t(i) * F, feat.data() + int64_t(i + 1) * F,
                  irt_in.data() + int64_t(row) * (F + 3));
        irt_in.values[size_t(row) * (F + 3) + F] = dirs[size_t(k)].x;
        irt_in.values[size_t(row) * (F + 3) + F + 1] = dirs[size_t(k)].y;
        irt_in.values[size_t(row) * (F + 3) + F + 2] = dirs[size_t(k)].z;
        if (dot(dirs[size_t(k)], label_n[size_t(i)]) <= 0) continue;  // excluded
        weight[size_t(row)] = 1.0f;
      }
    }
#pragma omp parallel for schedule(dynamic, 64)
    for (int row = 0; row < M; ++row) {
      if (weight[size_t(row)] == 0.0f) continue;
      int i = row / K;
      Vec3 x{points.values[size_t(i) * 3], points.values[size_t(i) * 3 + 1],
             points.values[size_t(i) * 3 + 2]};
      VisibilitySample vs = visibility_depth(scene, x, dirs_flat[size_t(row)], hc.near, hc.far);
      vis_label[size_t(row)] = vs.visible ? 1.0f : 0.0f;
      depth_label[size_t(row)] = (vs.t - hc.near) / (hc.far - hc.near);
    }

    Tensor irt_raw = renderer.irt().forward(irt_in);
    Tensor dirt(irt_raw.shape, 0.0f);
    double wsum = 0;
    for (float wv : weight) wsum += wv;
    if (wsum < 1) wsum = 1;
    double loss_v = 0, loss_t = 0;
    for (int row = 0; row < M; ++row) {
      if (weight[size_t(row)] == 0.0f) continue;
      float x = irt_raw.values[size_t(row) * 2];
      float t = vis_label[size_t(row)];
      loss_v += (std::max(x, 0.0f) - x * t + std::log1p(std::exp(-std::fabs(x)))) / wsum;
      dirt.values[size_t(row) * 2] = float((sigmoid(x) - t) / wsum);

      float s = sigmoid(irt_raw.values[size_t(row) * 2 + 1]);
      float d = s - depth_label[size_t(row)];
      loss_t += std::fabs(d) / wsum;
      dirt.values[size_t(row) * 2 + 1] = float(l1_sign(d) * sigmoid_grad(s) / wsum);
    }

    Tensor dirt_in = renderer.irt().backward(dirt);
    for (int i = 0; i < P; ++i)
      for (int k = 0; k < K; ++k) {
        const float* src = dirt_in.data() + int64_t(i * K + k) * (F + 3);
        float* dst = dfeat.data() + int64_t(i) * F;
        for (int f = 0; f < F; ++f) dst[f] += src[f];
      }

    renderer.encoder().backward(dfeat);

    double total = loss_n + loss_a + loss_r + loss_v + loss_t;
    if (!std::isfinite(total))
      throw std::runtime_error("train_hash: non-finite loss at step " + std::to_string(step));
    double lr = tnn::exp_decay_lr(step, cfg.total_steps, cfg.lr0);
    opt.step(lr);

    LossRow row;
    row.step = step;
    row.total = total;
    row.normal = loss_n;
    row.albedo = loss_a;
    row.roughness = loss_r;
    row.vis_bce = loss_v;
    row.depth_l1 = loss_t;
    row.lr = lr;
    trace.push_back(row);
  }
  return trace;
}

HashEval evaluate_hash_renderer(const HashRenderer& renderer, const SdfScene& scene, int pairs,
                                uint64_t seed) {
  const HashGridConfig& hc = renderer.config();
  HashTrainConfig probe;
  probe.seed = seed ^ 0x5EED;
  probe.surface_pose_count = 16;
  SurfacePool pool = build_surface_pool(scene, probe);

  RngStream rng(seed);
  HashEval eval;
  int correct = 0, total = 0;
  double mae = 0;
  while (total < pairs) {
    int pose = int(rng.next_below(uint32_t(pool.gbuffers.size())));
    const auto& idx = pool.masked[size_t(pose)];
    int px = idx[rng.next_below(uint32_t(idx.size()))];
    const GBuffer& gb = pool.gbuffers[size_t(pose)];
    Vec3 x = gb.coordinate.pixels[size_t(px)];
    Vec3 n = gb.normal.pixels[size_t(px)];
    auto dirs = stratified_sphere_dirs(4, rng);
    for (const Vec3& d : dirs) {
      if (dot(d, n) <= 0) continue;
      if (total >= pairs) break;
      VisibilitySample oracle = visibility_depth(scene, x, d, hc.near, hc.far);
      auto [v, t] = renderer.trace_implicit_at(x, d);
      bool pred_visible = v > 0.5f;
      ++total;
      if (pred_visible == oracle.visible) ++correct;
      if (!oracle.visible) {
        mae += std::fabs(t - oracle.t);
        ++eval.occluded_pairs;
      }
    }
  }
  eval.vis_accuracy = double(correct) / double(total);
  eval.depth_mae_occluded = eval.occluded_pairs ? mae / eval.occluded_pairs : 0.0;
  return eval;
}

}  // namespace bakelight
