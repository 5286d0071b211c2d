// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bakelight/distill.hpp"
#include "bakelight/metrics.hpp"

using namespace bakelight;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

template <typename T>
void kv_get(const std::map<std::string, std::string>& kv, const std::string& key, T& out) {
  auto it = kv.find(key);
  if (it == kv.end()) return;
  if constexpr (std::is_same_v<T, int>) out = std::stoi(it->second);
  else if constexpr (std::is_same_v<T, double>) out = std::stod(it->second);
  else if constexpr (std::is_same_v<T, float>) out = std::stof(it->second);
  else out = it->second;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

std::string hex64(uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)v);
  return buf;
}

// Every artifact-producing command writes one of these next to its outputs.
void write_manifest(const std::string& dir, const std::string& command, const json& config,
                    uint64_t seed, const std::vector<std::string>& outputs) {
  json m;
  m["command"] = command;
  m["config"] = config;
  m["config_hash"] = hex64(fnv1a64(config.dump().data(), config.dump().size()));
  m["seed"] = seed;
  m["git_describe"] = BAKELIGHT_GIT_DESCRIBE;
  m["outputs"] = outputs;
  std::ofstream out(dir + "/manifest.json");
  out << m.dump(2) << "\n";
}

void set_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

DirectRendererConfig cnn_config_from_file(const std::string& path, const SdfScene& scene) {
  DirectRendererConfig cfg = DirectRendererConfig::desk_profile();
  if (!path.empty()) {
    auto kv = parse_kv_file(path);
    kv_get(kv, "stem_channels", cfg.stem_channels);
    kv_get(kv, "trunk_depth", cfg.trunk_depth);
    std::string sr;
    kv_get(kv, "sr_channels", sr);
    if (!sr.empty()) cfg.sr_channels = parse_int_list(sr);
  }
  cfg.aabb_min = scene.aabb_min;
  cfg.aabb_max = scene.aabb_max;
  return cfg;
}

HashGridConfig hash_config_from_file(const std::string& path, const SdfScene& scene) {
  HashGridConfig cfg = HashGridConfig::desk_profile();
  if (!path.empty()) {
    auto kv = parse_kv_file(path);
    kv_get(kv, "levels", cfg.levels);
    kv_get(kv, "table_log2", cfg.table_log2);
    kv_get(kv, "feature_dim", cfg.feature_dim);
    kv_get(kv, "n_min", cfg.n_min);
    kv_get(kv, "n_max", cfg.n_max);
    kv_get(kv, "near", cfg.near);
    kv_get(kv, "far", cfg.far);
  }
  cfg.aabb_min = scene.aabb_min;
  cfg.aabb_max = scene.aabb_max;
  return cfg;
}

Camera camera_for_render(const SdfScene& scene, uint64_t pose_seed, int width, int height) {
  Camera cam;
  if (scene.default_camera) {
    cam = *scene.default_camera;
  } else {
    PoseSampleParams pp;
    RngStream rng(pose_seed);
    cam = sample_hemisphere_pose(scene, pp, rng);
  }
  if (width > 0) cam.width = width;
  if (height > 0) cam.height = height;
  return cam;
}

int resumed_step(const std::string& checkpoint) {
  auto tensors = tnn::load_checkpoint(checkpoint);
  auto it = tensors.find("meta.step");
  return it == tensors.end() ? 0 : int(it->second.values.at(0));
}

void save_with_step(tnn::NamedTensors nt, int step, const std::string& path) {
  tnn::Tensor meta({1}, float(step));
  nt.add("meta.step", meta);
  nt.save(path);
}

// ---------------------------------------------------------------------------

struct PseudoArgs {
  std::string scene_path, out_dir;
  int n_poses = 32;
  int train_poses = 8;
  uint64_t seed = 1;
  int width = 128, height = 128;
};

int cmd_pseudo(const PseudoArgs& a) {
  SdfScene scene = SdfScene::load(a.scene_path);
  PoseSampleParams pp;
  pp.width = a.width;
  pp.height = a.height;
  RngStream rng(a.seed);
  std::vector<Camera> train;
  for (int i = 0; i < a.train_poses; ++i)
    train.push_back(sample_hemisphere_pose(scene, pp, rng, train));
  RngStream data_rng = RngStream(a.seed).fork(1);
  PseudoDataset ds = build_pseudo_dataset(scene, a.n_poses, train, {}, pp, data_rng);
  ds.seed = a.seed;
  ds.save(a.out_dir);

  json cfg = {{"scene", a.scene_path}, {"n_poses", a.n_poses}, {"train_poses", a.train_poses},
              {"width", a.width}, {"height", a.height}};
  write_manifest(a.out_dir, "pseudo", cfg, a.seed,
                 {"manifest.txt", "pose_*.{albedo,normal,coordinate,roughness,mask,depth}.pfm"});
  std::cout << "pseudo dataset: " << ds.poses.size() << " poses, manifest hash "
            << hex64(ds.manifest_hash()) << "\n";
  return kExitOk;
}

struct TrainCnnArgs {
  std::string scene_path, dataset_dir, config_path, out_path, resume;
  int steps = -1;
  uint64_t seed = 1;
};

int cmd_train_cnn(const TrainCnnArgs& a) {
  SdfScene scene = SdfScene::load(a.scene_path);
  PseudoDataset dataset = PseudoDataset::load(a.dataset_dir);
  DirectRendererConfig mc = cnn_config_from_file(a.config_path, scene);

  CnnTrainConfig tc;
  tc.seed = a.seed;
  if (!a.config_path.empty()) {
    auto kv = parse_kv_file(a.config_path);
    kv_get(kv, "poses_per_batch", tc.poses_per_batch);
    kv_get(kv, "total_steps", tc.total_steps);
    kv_get(kv, "lr0", tc.lr0);
  }
  if (a.steps >= 0) tc.total_steps = a.steps;

  DirectRenderer model(mc);
  RngStream init(a.seed ^ 0xC44);
  model.init(init);
  if (!a.resume.empty()) {
    direct_renderer_tensors(model).load(a.resume);
    tc.start_step = resumed_step(a.resume);
    tc.total_steps += tc.start_step;
  }

  auto trace = train_cnn(model, dataset, tc);
  save_with_step(direct_renderer_tensors(model), tc.total_steps, a.out_path);
  std::string csv = a.out_path + ".loss.csv";
  write_loss_csv(csv, trace);

  fs::path dir = fs::path(a.out_path).parent_path();
  json cfg = {{"scene", a.scene_path}, {"dataset", a.dataset_dir}, {"config", a.config_path},
              {"steps", tc.total_steps}, {"start_step", tc.start_step}};
  write_manifest(dir.empty() ? "." : dir.string(), "train-cnn", cfg, a.seed,
                 {a.out_path, csv});
  std::cout << "train-cnn: " << trace.size() << " steps, final loss "
            << (trace.empty() ? 0.0 : trace.back().total) << "\n";
  return kExitOk;
}

struct TrainHashArgs {
  std::string scene_path, config_path, out_path, resume;
  int steps = -1;
  uint64_t seed = 1;
};

int cmd_train_hash(const TrainHashArgs& a) {
  SdfScene scene = SdfScene::load(a.scene_path);
  HashGridConfig hc = hash_config_from_file(a.config_path, scene);

  HashTrainConfig tc;
  tc.seed = a.seed;
  if (!a.config_path.empty()) {
    auto kv = parse_kv_file(a.config_path);
    kv_get(kv, "rays_per_batch", tc.points_per_batch);
    kv_get(kv, "dirs_per_point", tc.dirs_per_point);
    kv_get(kv, "total_steps", tc.total_steps);
    kv_get(kv, "lr0", tc.lr0);
    kv_get(kv, "weight_decay", tc.weight_decay);
    kv_get(kv, "surface_pose_count", tc.surface_pose_count);
  }
  if (a.steps >= 0) tc.total_steps = a.steps;

  HashRenderer renderer(hc);
  RngStream init(a.seed ^ 0x4A5);
  renderer.init(init);
  if (!a.resume.empty()) {
    hash_renderer_tensors(renderer).load(a.resume);
    tc.start_step = resumed_step(a.resume);
    tc.total_steps += tc.start_step;
  }

  auto trace = train_hash(renderer, scene, tc);
  save_with_step(hash_renderer_tensors(renderer), tc.total_steps, a.out_path);
  std::string csv = a.out_path + ".loss.csv";
  write_loss_csv(csv, trace);

  fs::path dir = fs::path(a.out_path).parent_path();
  json cfg = {{"scene", a.scene_path}, {"config", a.config_path}, {"steps", tc.total_steps},
              {"start_step", tc.start_step}};
  write_manifest(dir.empty() ? "." : dir.string(), "train-hash", cfg, a.seed,
                 {a.out_path, csv});
  std::cout << "train-hash: " << trace.size() << " steps, final loss "
            << (trace.empty() ? 0.0 : trace.back().total) << "\n";
  return kExitOk;
}

struct RenderArgs {
  std::string scene_path, env_path, out_dir;
  std::string provider = "teacher";
  std::string cnn_ckpt, hash_ckpt;
  int spp = 16, bounces = 1;
  int width = 0, height = 0;
  uint64_t seed = 1, pose_seed = 1;
  bool no_denoise = false;
  int threads = 0;
};

int cmd_render(const RenderArgs& a) {
  set_threads(a.threads);
  SdfScene scene = SdfScene::load(a.scene_path);
  EnvironmentMap env = EnvironmentMap::load(a.env_path);
  LightCdf cdf = build_light_cdf(env);
  Camera cam = camera_for_render(scene, a.pose_seed, a.width, a.height);

  ShadeConfig cfg;
  cfg.spp = a.spp;
  cfg.bounces = a.bounces;
  cfg.seed = a.seed;
  cfg.env = &env;
  cfg.light_cdf = &cdf;

  std::unique_ptr<SurfaceProvider> surface;
  std::unique_ptr<VisibilityProvider> vis;
  std::unique_ptr<PointShadingProvider> shading;
  std::unique_ptr<DirectRenderer> cnn;
  std::unique_ptr<HashRenderer> hash;

  if (a.provider == "teacher") {
    surface = std::make_unique<TeacherSurfaceProvider>(scene);
    vis = std::make_unique<OracleVisibilityProvider>(scene);
    shading = std::make_unique<OraclePointShadingProvider>(scene);
  } else if (a.provider == "baked") {
    if (a.cnn_ckpt.empty() || a.hash_ckpt.empty())
      throw std::runtime_error("provider=baked needs --cnn and --hash checkpoints");
    DirectRendererConfig mc = cnn_config_from_file("", scene);
    // infer widths from the checkpoint shapes
    auto tensors = tnn::load_checkpoint(a.cnn_ckpt);
    mc.stem_channels = tensors.at("stem.conv.weight").dim(0);
    mc.trunk_depth = 0;
    while (tensors.count("trunk." + std::to_string(mc.trunk_depth) + ".conv.weight")) ++mc.trunk_depth;
    mc.sr_channels.clear();
    for (int k = 0; tensors.count("sr." + std::to_string(k) + ".a.conv.weight"); ++k)
      mc.sr_channels.push_back(tensors.at("sr." + std::to_string(k) + ".a.conv.weight").dim(0));
    cnn = std::make_unique<DirectRenderer>(mc);
    direct_renderer_tensors(*cnn).load(a.cnn_ckpt);

    auto hts = tnn::load_checkpoint(a.hash_ckpt);
    HashGridConfig hc = hash_config_from_file("", scene);
    hc.levels = hts.at("encoder.tables").dim(0);
    hc.table_log2 = int(std::round(std::log2(double(hts.at("encoder.tables").dim(1)))));
    hc.feature_dim = hts.at("encoder.tables").dim(2);
    hash = std::make_unique<HashRenderer>(hc);
    hash_renderer_tensors(*hash).load(a.hash_ckpt);

    surface = std::make_unique<CnnSurfaceProvider>(*cnn);
    vis = std::make_unique<BakedVisibilityProvider>(*hash);
    shading = std::make_unique<BakedPointShadingProvider>(*hash);
  } else {
    throw std::runtime_error("unknown provider: " + a.provider);
  }

  FrameOutput frame = shade_frame(*surface, *vis, a.bounces >= 2 ? shading.get() : nullptr,
                                  cfg, cam);
  Image3 final_image = frame.radiance;
  if (!a.no_denoise) {
    SvgfConfig svgf;
    final_image = denoise_frame(frame, svgf);
  }

  fs::create_directories(a.out_dir);
  write_pfm(a.out_dir + "/render.pfm", final_image);
  write_pfm(a.out_dir + "/raw.pfm", frame.radiance);
  write_pfm(a.out_dir + "/depth.pfm", frame.depth);
  write_pfm(a.out_dir + "/normal.pfm", frame.normal);
  write_pfm(a.out_dir + "/albedo.pfm", frame.albedo);
  write_pfm(a.out_dir + "/mask.pfm", frame.mask);
  write_png(a.out_dir + "/render.png", tonemap(final_image), final_image.width,
            final_image.height);

  json cfgj = {{"scene", a.scene_path}, {"env", a.env_path}, {"provider", a.provider},
               {"spp", a.spp}, {"bounces", a.bounces}, {"denoise", !a.no_denoise},
               {"pose_seed", a.pose_seed}, {"width", cam.width}, {"height", cam.height}};
  write_manifest(a.out_dir, "render", cfgj, a.seed,
                 {"render.pfm", "raw.pfm", "depth.pfm", "normal.pfm", "albedo.pfm",
                  "mask.pfm", "render.png"});
  std::cout << "render: " << cam.width << "x" << cam.height << " spp " << a.spp << " -> "
            << a.out_dir << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string a_path, b_path, mask_path, out_path;
  bool calibrate_albedo = false;
};

int cmd_eval(const EvalArgs& a) {
  Image3 img_a = read_pfm3(a.a_path);
  Image3 img_b = read_pfm3(a.b_path);
  Image1 mask;
  if (!a.mask_path.empty()) {
    mask = read_pfm1(a.mask_path);
  } else {
    mask = Image1(img_a.width, img_a.height, 1.0f);
  }

  json out;
  if (a.calibrate_albedo) {
    auto rescale = albedo_rescale(img_a, img_b, mask);
    out["albedo_scale"] = {rescale.scale.x, rescale.scale.y, rescale.scale.z};
    img_a = rescale.rescaled;
  }
  out["psnr"] = psnr(img_a, img_b);
  out["ssim"] = ssim(img_a, img_b);
  out["lpips"] = "n/a";

  std::cout << out.dump(2) << "\n";
  if (!a.out_path.empty()) {
    std::ofstream f(a.out_path);
    f << out.dump(2) << "\n";
  }
  return kExitOk;
}

struct BenchArgs {
  std::string scene_path, env_path, out_path;
  std::string provider = "teacher";
  std::string cnn_ckpt, hash_ckpt;
  std::string spp_list = "16";
  int bounces = 1;
  int repeats = 5;
  int width = 64, height = 64;
  uint64_t seed = 1;
  int threads = 1;
  bool no_denoise = false;
};

int cmd_bench(const BenchArgs& a) {
  set_threads(a.threads);
  SdfScene scene = SdfScene::load(a.scene_path);
  EnvironmentMap env = EnvironmentMap::load(a.env_path);
  LightCdf cdf = build_light_cdf(env);
  Camera cam = camera_for_render(scene, 1, a.width, a.height);

  TeacherSurfaceProvider teacher_surface(scene);
  OracleVisibilityProvider oracle_vis(scene);
  OraclePointShadingProvider oracle_shading(scene);

  std::unique_ptr<DirectRenderer> cnn;
  std::unique_ptr<HashRenderer> hash;
  std::unique_ptr<CnnSurfaceProvider> baked_surface;
  std::unique_ptr<BakedVisibilityProvider> baked_vis;
  std::unique_ptr<BakedPointShadingProvider> baked_shading;
  if (a.provider == "baked") {
    if (a.cnn_ckpt.empty() || a.hash_ckpt.empty())
      throw std::runtime_error("provider=baked needs --cnn and --hash checkpoints");
    RenderArgs probe;  // reuse the checkpoint-shape inference from render
    probe.scene_path = a.scene_path;
    DirectRendererConfig mc = cnn_config_from_file("", scene);
    auto tensors = tnn::load_checkpoint(a.cnn_ckpt);
    mc.stem_channels = tensors.at("stem.conv.weight").dim(0);
    mc.trunk_depth = 0;
    while (tensors.count("trunk." + std::to_string(mc.trunk_depth) + ".conv.weight")) ++mc.trunk_depth;
    mc.sr_channels.clear();
    for (int k = 0; tensors.count("sr." + std::to_string(k) + ".a.conv.weight"); ++k)
      mc.sr_channels.push_back(tensors.at("sr." + std::to_string(k) + ".a.conv.weight").dim(0));
    cnn = std::make_unique<DirectRenderer>(mc);
    direct_renderer_tensors(*cnn).load(a.cnn_ckpt);
    auto hts = tnn::load_checkpoint(a.hash_ckpt);
    HashGridConfig hc = hash_config_from_file("", scene);
    hc.levels = hts.at("encoder.tables").dim(0);
    hc.table_log2 = int(std::round(std::log2(double(hts.at("encoder.tables").dim(1)))));
    hc.feature_dim = hts.at("encoder.tables").dim(2);
    hash = std::make_unique<HashRenderer>(hc);
    hash_renderer_tensors(*hash).load(a.hash_ckpt);
    baked_surface = std::make_unique<CnnSurfaceProvider>(*cnn);
    baked_vis = std::make_unique<BakedVisibilityProvider>(*hash);
    baked_shading = std::make_unique<BakedPointShadingProvider>(*hash);
  }

  std::ofstream csv(a.out_path);
  if (!csv) throw std::runtime_error("cannot write bench csv: " + a.out_path);
  LatencyBreakdown header;
  json cfgj = {{"scene", a.scene_path}, {"provider", a.provider}, {"spp", a.spp_list},
               {"bounces", a.bounces}, {"threads", a.threads}};
  std::string cfg_hash = hex64(fnv1a64(cfgj.dump().data(), cfgj.dump().size()));
  csv << header.csv_header() << ",config_hash\n";

  for (int spp : parse_int_list(a.spp_list)) {
    BenchPipeline pipe;
    pipe.shade.spp = spp;
    pipe.shade.bounces = a.bounces;
    pipe.shade.seed = a.seed;
    pipe.shade.env = &env;
    pipe.shade.light_cdf = &cdf;
    pipe.denoise = !a.no_denoise;
    if (a.provider == "baked") {
      pipe.surface = baked_surface.get();
      pipe.vis = baked_vis.get();
      pipe.secondary = a.bounces >= 2 ? baked_shading.get() : nullptr;
    } else {
      pipe.surface = &teacher_surface;
      pipe.vis = &oracle_vis;
      pipe.secondary = a.bounces >= 2 ? &oracle_shading : nullptr;
    }
    LatencyBreakdown lb = bench_render(pipe, cam, a.repeats);
    std::string label = a.provider + "(" + std::to_string(spp) +
                        (a.bounces >= 2 ? ",d+i" : ",d") + ")";
    csv << lb.csv_row(label) << "," << cfg_hash << "\n";
    std::cout << lb.csv_row(label) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bakelight: analytic-teacher relighting with baked CNN/hash students"};
  app.require_subcommand(1);

  PseudoArgs pseudo;
  auto* sp = app.add_subcommand("pseudo", "generate a teacher G-buffer dataset");
  sp->add_option("--scene", pseudo.scene_path)->required();
  sp->add_option("--poses", pseudo.n_poses);
  sp->add_option("--train-poses", pseudo.train_poses);
  sp->add_option("--seed", pseudo.seed);
  sp->add_option("--width", pseudo.width);
  sp->add_option("--height", pseudo.height);
  sp->add_option("--out", pseudo.out_dir)->required();

  TrainCnnArgs tcnn;
  auto* sc = app.add_subcommand("train-cnn", "distill the direct-illumination renderer");
  sc->add_option("--scene", tcnn.scene_path)->required();
  sc->add_option("--dataset", tcnn.dataset_dir)->required();
  sc->add_option("--config", tcnn.config_path);
  sc->add_option("--steps", tcnn.steps);
  sc->add_option("--seed", tcnn.seed);
  sc->add_option("--resume", tcnn.resume);
  sc->add_option("--out", tcnn.out_path)->required();

  TrainHashArgs thash;
  auto* sh = app.add_subcommand("train-hash", "distill the visibility/indirect renderer");
  sh->add_option("--scene", thash.scene_path)->required();
  sh->add_option("--config", thash.config_path);
  sh->add_option("--steps", thash.steps);
  sh->add_option("--seed", thash.seed);
  sh->add_option("--resume", thash.resume);
  sh->add_option("--out", thash.out_path)->required();

  RenderArgs render;
  auto* sr = app.add_subcommand("render", "shade a frame with MIS (+ optional indirect)");
  sr->add_option("--scene", render.scene_path)->required();
  sr->add_option("--env", render.env_path)->required();
  sr->add_option("--provider", render.provider)->check(CLI::IsMember({"teacher", "baked"}));
  sr->add_option("--cnn", render.cnn_ckpt);
  sr->add_option("--hash", render.hash_ckpt);
  sr->add_option("--spp", render.spp);
  sr->add_option("--bounces", render.bounces)->check(CLI::IsMember({1, 2}));
  sr->add_option("--width", render.width);
  sr->add_option("--height", render.height);
  sr->add_option("--seed", render.seed);
  sr->add_option("--pose-seed", render.pose_seed);
  sr->add_option("--threads", render.threads);
  sr->add_flag("--no-denoise", render.no_denoise);
  sr->add_option("--out", render.out_dir)->required();

  EvalArgs eval;
  auto* se = app.add_subcommand("eval", "PSNR/SSIM between two PFM images");
  se->add_option("--a", eval.a_path)->required();
  se->add_option("--b", eval.b_path)->required();
  se->add_option("--mask", eval.mask_path);
  se->add_flag("--calibrate-albedo", eval.calibrate_albedo);
  se->add_option("--out", eval.out_path);

  BenchArgs bench;
  auto* sb = app.add_subcommand("bench", "latency breakdown CSV");
  sb->add_option("--scene", bench.scene_path)->required();
  sb->add_option("--env", bench.env_path)->required();
  sb->add_option("--provider", bench.provider)->check(CLI::IsMember({"teacher", "baked"}));
  sb->add_option("--cnn", bench.cnn_ckpt);
  sb->add_option("--hash", bench.hash_ckpt);
  sb->add_option("--spp", bench.spp_list);
  sb->add_option("--bounces", bench.bounces)->check(CLI::IsMember({1, 2}));
  sb->add_option("--repeats", bench.repeats);
  sb->add_option("--width", bench.width);
  sb->add_option("--height", bench.height);
  sb->add_option("--threads", bench.threads);
  sb->add_flag("--no-denoise", bench.no_denoise);
  sb->add_option("--out", bench.out_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*sp) return cmd_pseudo(pseudo);
    if (*sc) return cmd_train_cnn(tcnn);
    if (*sh) return cmd_train_hash(thash);
    if (*sr) return cmd_render(render);
    if (*se) return cmd_eval(eval);
    if (*sb) return cmd_bench(bench);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return std::string(e.what()).find("non-finite") != std::string::npos ? kExitNumeric
                                                                         : kExitConfig;
  }
  return kExitConfig;
}
