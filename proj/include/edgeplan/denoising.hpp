#pragma once

// Perturbed-query generation for denoising supervision: bounded uniform
// endpoint displacement, probabilistic label flips, and the group attention
// mask that keeps perturbed instances from leaking into each other or into
// the latent queries.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "edgeplan/core.hpp"
#include "edgeplan/matching.hpp"

namespace edgeplan {

struct NoiseConfig {
  double lambda_geo = 0.4;   // displacement scale; |dx| < lambda * w / 2 per axis
  double gamma_flip = 0.2;   // label flip probability for valid tokens
  std::uint64_t seed = 0;
  std::size_t groups = 1;    // independent perturbed copies of the plan
};

struct PerturbedToken {
  DirectedEdge edge;
  int label = 0;
  std::size_t group = 0;
  std::size_t origin_room = 0;
  std::size_t origin_edge = 0;
  bool origin_valid = false;
};

struct PerturbedQuerySet {
  std::size_t groups = 1;
  std::size_t rooms_per_group = 0;
  std::size_t edges_per_room = 0;
  std::vector<PerturbedToken> tokens;  // group-major, room-major, edge-minor

  std::size_t size() const { return tokens.size(); }
  const PerturbedToken& at(std::size_t group, std::size_t room, std::size_t edge) const {
    return tokens[(group * rooms_per_group + room) * edges_per_room + edge];
  }
};

namespace detail {

// Uniform double strictly inside (0,1); 53-bit draw offset by half an ulp so
// neither endpoint is reachable.
inline double uniform_open01(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Uniform in (-half_range, half_range), strict on both ends.
inline double uniform_symmetric(std::mt19937_64& rng, double half_range) {
  return (2.0 * uniform_open01(rng) - 1.0) * half_range;
}

}  // namespace detail

// Perturb every valid ground-truth edge: endpoints get independent uniform
// displacements bounded by lambda/2 per axis (scaled by the image extent),
// clamped back into the extent; labels flip with probability gamma. Padding
// tokens pass through untouched. Draw order is fixed (group-major,
// room-major, edge-minor; per edge dx1, dy1, dx2, dy2, flip) so a seed fully
// determines the output.
inline PerturbedQuerySet perturb(const Floorplan& gt, const NoiseConfig& cfg, double image_w = 1.0,
                                 double image_h = 1.0) {
  if (cfg.lambda_geo < 0.0 || cfg.gamma_flip < 0.0 || cfg.gamma_flip > 1.0 || cfg.groups == 0)
    throw Error(Errc::invalid_config, "noise config requires lambda >= 0, gamma in [0,1], groups >= 1");
  if (!(image_w > 0.0) || !(image_h > 0.0))
    throw Error(Errc::invalid_config, "image extent must be positive");

  std::mt19937_64 rng(cfg.seed);
  const double half_dx = cfg.lambda_geo * image_w / 2.0;
  const double half_dy = cfg.lambda_geo * image_h / 2.0;
  const auto clamp_extent = [image_w, image_h](Point2 p) {
    return Point2{std::clamp(p.x, 0.0, image_w), std::clamp(p.y, 0.0, image_h)};
  };

  PerturbedQuerySet set;
  set.groups = cfg.groups;
  set.rooms_per_group = gt.rooms.size();
  set.edges_per_room = gt.edge_capacity();
  set.tokens.reserve(cfg.groups * set.rooms_per_group * set.edges_per_room);

  for (std::size_t g = 0; g < cfg.groups; ++g) {
    for (std::size_t m = 0; m < gt.rooms.size(); ++m) {
      const auto& room = gt.rooms[m];
      for (std::size_t n = 0; n < room.tokens.size(); ++n) {
        const auto& token = room.tokens[n];
        PerturbedToken out{token.edge, token.valid ? 1 : 0, g, m, n, token.valid};
        if (token.valid) {
          if (cfg.lambda_geo > 0.0) {
            Point2 d1{detail::uniform_symmetric(rng, half_dx), detail::uniform_symmetric(rng, half_dy)};
            Point2 d2{detail::uniform_symmetric(rng, half_dx), detail::uniform_symmetric(rng, half_dy)};
            out.edge.p1 = clamp_extent(token.edge.p1 + d1);
            out.edge.p2 = clamp_extent(token.edge.p2 + d2);
          }
          if (cfg.gamma_flip > 0.0 && detail::uniform_open01(rng) < cfg.gamma_flip) out.label = 0;
        }
        set.tokens.push_back(out);
      }
    }
  }
  return set;
}

// Perturbed tokens as a prediction set (labels become 0/1 confidences), one
// prediction room per (group, room) pair in group-major order.
inline PredictionSet as_prediction(const PerturbedQuerySet& set) {
  PredictionSet pred;
  pred.rooms.reserve(set.groups * set.rooms_per_group);
  for (std::size_t g = 0; g < set.groups; ++g) {
    for (std::size_t m = 0; m < set.rooms_per_group; ++m) {
      PredictedRoom room;
      room.tokens.reserve(set.edges_per_room);
      for (std::size_t n = 0; n < set.edges_per_room; ++n) {
        const auto& t = set.at(g, m, n);
        room.tokens.push_back({static_cast<double>(t.label), t.edge});
      }
      pred.rooms.push_back(std::move(room));
    }
  }
  return pred;
}

// Fraction of valid-origin tokens whose label no longer matches the source.
inline double flip_rate(const PerturbedQuerySet& set, const Floorplan& gt) {
  if (set.rooms_per_group != gt.rooms.size() || set.edges_per_room != gt.edge_capacity())
    throw Error(Errc::capacity_mismatch, "perturbed set and plan capacities differ");
  std::size_t valid = 0, flipped = 0;
  for (const auto& t : set.tokens) {
    if (!t.origin_valid) continue;
    ++valid;
    if (t.label != 1) ++flipped;
  }
  return valid == 0 ? 0.0 : static_cast<double>(flipped) / static_cast<double>(valid);
}

// Boolean attention grid over [perturbed | latent] token blocks. Perturbed
// tokens see only their own group; latent tokens see only latent tokens.
struct AttentionMask {
  std::size_t n_perturbed = 0;
  std::size_t n_latent = 0;
  std::vector<std::uint8_t> allowed;  // row = query token, column = key token

  std::size_t size() const { return n_perturbed + n_latent; }
  bool at(std::size_t query, std::size_t key) const { return allowed[query * size() + key] != 0; }
};

inline AttentionMask build_attention_mask(std::size_t n_groups, std::size_t tokens_per_group,
                                          std::size_t n_latent) {
  AttentionMask mask;
  mask.n_perturbed = n_groups * tokens_per_group;
  mask.n_latent = n_latent;
  const std::size_t total = mask.size();
  mask.allowed.assign(total * total, 0);
  for (std::size_t q = 0; q < total; ++q) {
    const bool q_latent = q >= mask.n_perturbed;
    for (std::size_t k = 0; k < total; ++k) {
      const bool k_latent = k >= mask.n_perturbed;
      bool ok = false;
      if (q_latent) {
        ok = k_latent;
      } else if (!k_latent && tokens_per_group > 0) {
        ok = (q / tokens_per_group) == (k / tokens_per_group);
      }
      mask.allowed[q * total + k] = ok ? 1 : 0;
    }
  }
  return mask;
}

}  // namespace edgeplan
