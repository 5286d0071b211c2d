// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "bakelight/cnn_renderer.hpp"
#include "bakelight/hash_renderer.hpp"
#include "bakelight/scene.hpp"

namespace bakelight {

// Teacher G-buffers of random hemisphere poses plus the training poses,
// with poses rejected near any training or test pose.
struct PseudoDataset {
  uint64_t seed = 0;
  std::string scene_name;
  std::vector<Camera> poses;
  std::vector<GBuffer> gbuffers;

  // FNV over the manifest text (seed + every pose), for reproducibility
  // checks across regenerated datasets.
  uint64_t manifest_hash() const;
  std::string manifest_text() const;

  void save(const std::string& dir) const;
  static PseudoDataset load(const std::string& dir);
};

PseudoDataset build_pseudo_dataset(const SdfScene& scene, int n_random,
                                   const std::vector<Camera>& train_poses,
                                   const std::vector<Camera>& test_poses,
                                   const PoseSampleParams& params, RngStream& rng);

struct CnnTrainConfig {
  int poses_per_batch = 64;   // clipped to the dataset size
  int total_steps = 3000;     // desk default; paper scale 100k
  int start_step = 0;         // > 0 resumes the schedule and step numbering
  double lr0 = 5e-4;          // cosine decayed
  uint64_t seed = 0;
};

struct HashTrainConfig {
  int points_per_batch = 2048;
  int dirs_per_point = 16;    // desk default; paper scale 1024
  int total_steps = 5000;     // desk default; paper scale 80k
  int start_step = 0;
  double lr0 = 2e-3;          // exponential decay to 0.1 lr0
  double weight_decay = 1e-6; // MLPs only, never hash tables
  int surface_pose_count = 64;
  uint64_t seed = 0;
  PoseSampleParams pose_params;
};

struct LossRow {
  int step = 0;
  double total = 0;
  double albedo = 0, normal = 0, roughness = 0, coordinate = 0;
  double mask_bce = 0;   // CNN only
  double vis_bce = 0;    // hash only
  double depth_l1 = 0;   // hash only
  double lr = 0;
};

void write_loss_csv(const std::string& path, const std::vector<LossRow>& rows);

// Distills teacher G-buffers into the direct renderer: masked L1 on albedo,
// normal, roughness and coordinate plus BCE on the mask, Adam with cosine
// learning rate. Throws on a non-finite loss.
std::vector<LossRow> train_cnn(DirectRenderer& model, const PseudoDataset& dataset,
                               const CnnTrainConfig& cfg);

// Online distillation of the hash renderer against the scene oracles:
// surface points come from random-pose primary hits, visibility and depth
// labels are traced per direction, backfacing directions are excluded from
// the loss.
std::vector<LossRow> train_hash(HashRenderer& renderer, const SdfScene& scene,
                                const HashTrainConfig& cfg);

// Held-out evaluation used by the acceptance suite: classification accuracy
// of hard visibility and mean absolute depth error (scene units) on
// occluded pairs, against the sphere-trace oracle.
struct HashEval {
  double vis_accuracy = 0;
  double depth_mae_occluded = 0;
  int occluded_pairs = 0;
};

HashEval evaluate_hash_renderer(const HashRenderer& renderer, const SdfScene& scene,
                                int pairs, uint64_t seed);

}  // namespace bakelight
