// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bakelight/envlight.hpp"
#include "bakelight/scene.hpp"

using namespace bakelight;
namespace fs = std::filesystem;

namespace {

const std::string kBin = BAKELIGHT_BIN;
const std::string kScenes = BAKELIGHT_SCENES_DIR;
const std::string kWork = "/tmp/bakelight_cli_test";

int run(const std::string& args) {
  std::string cmd = kBin + " " + args + " > " + kWork + "/stdout.txt 2>" + kWork + "/stderr.txt";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_env_fixture(const std::string& path) {
  Image3 img(32, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 32; ++x) {
      float u = (x + 0.5f) / 32, v = (y + 0.5f) / 16;
      img.at(x, y) = Vec3(0.5f + 0.3f * std::sin(2 * kPi * u) * std::sin(kPi * v),
                          0.45f + 0.2f * v, 0.4f);
    }
  img.at(7, 4) = Vec3(3, 2.8f, 2.5f);
  write_pfm(path, img);
}

struct CliFixture {
  CliFixture() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
    write_env_fixture(kWork + "/env.pfm");
    std::ofstream cfg(kWork + "/hash_tiny.cfg");
    cfg << "levels = 6\ntable_log2 = 10\nn_max = 128\nrays_per_batch = 64\n"
        << "dirs_per_point = 4\ntotal_steps = 10\nsurface_pose_count = 4\n";
    std::ofstream ccfg(kWork + "/cnn_tiny.cfg");
    ccfg << "stem_channels = 12\ntrunk_depth = 2\nsr_channels = 8,6,4\n"
         << "poses_per_batch = 4\ntotal_steps = 10\nlr0 = 1e-3\n";
  }
};

int csv_rows(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  int rows = -1;  // minus header
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  return rows;
}

}  // namespace

TEST_CASE("cli end to end") {
  static CliFixture fixture;  // shared across subcases in declaration order
  std::string scene = kScenes + "/occluder-pair.scene";

  SUBCASE("missing scene file exits with the config code") {
    CHECK(run("pseudo --scene /nonexistent.scene --out " + kWork + "/x") == 2);
  }

  SUBCASE("pseudo with zero random poses keeps train poses only") {
    int rc = run("pseudo --scene " + scene + " --poses 0 --train-poses 3 --width 64 --height 64"
                 " --seed 5 --out " + kWork + "/ds0");
    REQUIRE(rc == 0);
    std::string manifest = slurp(kWork + "/ds0/manifest.txt");
    CHECK(manifest.find("poses=3") != std::string::npos);
    CHECK(fs::exists(kWork + "/ds0/manifest.json"));
  }

  SUBCASE("pseudo is reproducible for a fixed seed") {
    REQUIRE(run("pseudo --scene " + scene + " --poses 2 --train-poses 2 --width 64 --height 64"
                " --seed 9 --out " + kWork + "/dsA") == 0);
    REQUIRE(run("pseudo --scene " + scene + " --poses 2 --train-poses 2 --width 64 --height 64"
                " --seed 9 --out " + kWork + "/dsB") == 0);
    CHECK(slurp(kWork + "/dsA/manifest.txt") == slurp(kWork + "/dsB/manifest.txt"));
    CHECK(slurp(kWork + "/dsA/pose_0000.albedo.pfm") ==
          slurp(kWork + "/dsB/pose_0000.albedo.pfm"));
  }

  SUBCASE("training smoke runs, loss csv rows, resume continues the counter") {
    REQUIRE(run("pseudo --scene " + scene + " --poses 0 --train-poses 4 --width 64 --height 64"
                " --seed 11 --out " + kWork + "/ds") == 0);
    REQUIRE(run("train-cnn --scene " + scene + " --dataset " + kWork + "/ds --config " + kWork +
                "/cnn_tiny.cfg --out " + kWork + "/cnn.blcp --seed 3") == 0);
    CHECK(csv_rows(kWork + "/cnn.blcp.loss.csv") == 10);

    REQUIRE(run("train-cnn --scene " + scene + " --dataset " + kWork + "/ds --config " + kWork +
                "/cnn_tiny.cfg --resume " + kWork + "/cnn.blcp --steps 5 --out " + kWork +
                "/cnn2.blcp --seed 3") == 0);
    std::ifstream csv(kWork + "/cnn2.blcp.loss.csv");
    std::string header, first;
    std::getline(csv, header);
    std::getline(csv, first);
    CHECK(first.rfind("10,", 0) == 0);  // step counter continues at 10
    CHECK(csv_rows(kWork + "/cnn2.blcp.loss.csv") == 5);

    REQUIRE(run("train-hash --scene " + scene + " --config " + kWork + "/hash_tiny.cfg --out " +
                kWork + "/hash.blcp --seed 4") == 0);
    CHECK(csv_rows(kWork + "/hash.blcp.loss.csv") == 10);
  }

  SUBCASE("render: providers, determinism, denoise flag") {
    std::string env = kWork + "/env.pfm";
    REQUIRE(run("render --scene " + scene + " --env " + env +
                " --provider teacher --spp 2 --width 64 --height 64 --seed 21 --out " + kWork +
                "/rt") == 0);
    REQUIRE(fs::exists(kWork + "/rt/render.pfm"));
    REQUIRE(fs::exists(kWork + "/rt/render.png"));
    REQUIRE(fs::exists(kWork + "/rt/manifest.json"));

    // bit-exact reproduction under the same seed
    REQUIRE(run("render --scene " + scene + " --env " + env +
                " --provider teacher --spp 2 --width 64 --height 64 --seed 21 --out " + kWork +
                "/rt2") == 0);
    CHECK(slurp(kWork + "/rt/render.pfm") == slurp(kWork + "/rt2/render.pfm"));

    // disabling the denoiser changes the output
    REQUIRE(run("render --scene " + scene + " --env " + env +
                " --provider teacher --spp 2 --width 64 --height 64 --seed 21 --no-denoise"
                " --out " + kWork + "/rt3") == 0);
    CHECK(slurp(kWork + "/rt/render.pfm") != slurp(kWork + "/rt3/render.pfm"));

    // baked provider produces the same resolution
    REQUIRE(run("render --scene " + scene + " --env " + env +
                " --provider baked --cnn " + kWork + "/cnn.blcp --hash " + kWork + "/hash.blcp" +
                " --spp 2 --width 64 --height 64 --seed 21 --bounces 2 --out " + kWork +
                "/rb") == 0);
    Image3 teacher_img = read_pfm3(kWork + "/rt/render.pfm");
    Image3 baked_img = read_pfm3(kWork + "/rb/render.pfm");
    CHECK(teacher_img.width == baked_img.width);
    CHECK(teacher_img.height == baked_img.height);
  }

  SUBCASE("eval") {
    std::string env = kWork + "/env.pfm";
    REQUIRE(run("eval --a " + kWork + "/rt/render.pfm --b " + kWork + "/rt/render.pfm --out " +
                kWork + "/m.json") == 0);
    std::string m = slurp(kWork + "/m.json");
    CHECK(m.find("99.0") != std::string::npos);

    // half-brightness prediction calibrates to scale 2
    Image3 ref = read_pfm3(kWork + "/rt/albedo.pfm");
    Image3 half = ref;
    for (auto& p : half.pixels) p *= 0.5f;
    write_pfm(kWork + "/half.pfm", half);
    REQUIRE(run("eval --a " + kWork + "/half.pfm --b " + kWork + "/rt/albedo.pfm"
                " --mask " + kWork + "/rt/mask.pfm --calibrate-albedo --out " + kWork +
                "/m2.json") == 0);
    CHECK(slurp(kWork + "/m2.json").find("2.0") != std::string::npos);

    // mismatched sizes are a config error
    Image3 small(8, 4, Vec3(0.5f));
    write_pfm(kWork + "/small.pfm", small);
    CHECK(run("eval --a " + kWork + "/small.pfm --b " + kWork + "/rt/render.pfm") == 2);
  }

  SUBCASE("bench writes the table csv") {
    std::string env = kWork + "/env.pfm";
    REQUIRE(run("bench --scene " + scene + " --env " + env + " --spp 1,2 --repeats 1"
                " --width 32 --height 32 --out " + kWork + "/bench.csv") == 0);
    std::string csv = slurp(kWork + "/bench.csv");
    CHECK(csv.find("model_op_ms,vis_ms,render_ms,dnsr_ms,total_ms,fps") != std::string::npos);
    CHECK(csv_rows(kWork + "/bench.csv") == 2);
  }
}
