// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Criterion 10 drives the CLI binary named by the EDGEPLAN_CLI environment
// variable end to end.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgeplan/edgeplan.hpp"
#include "test_support.hpp"

using namespace edgeplan;
namespace fs = std::filesystem;

namespace {

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& what) {
  if (!cond) throw CheckFailure(what);
}

// --- criterion 1: assignment solver vs exhaustive minimum -------------------

void criterion_assignment_oracle() {
  std::mt19937_64 rng(1001);
  const auto start = std::chrono::steady_clock::now();
  std::size_t checked = 0;
  for (std::size_t size = 2; size <= 6; ++size) {
    for (int trial = 0; trial < 200; ++trial) {
      CostMatrix costs;
      costs.size = size;
      costs.values.resize(size * size);
      const bool dyadic = trial % 2 == 0;  // exact sums stress tie handling
      for (auto& v : costs.values)
        v = dyadic ? static_cast<double>(rng() % 64) / 64.0 : testsupport::uniform(rng, 0.0, 1.0);
      const auto result = hungarian(costs);
      const double oracle = testsupport::brute_force_assignment_cost(costs);
      require(result.total_cost == oracle,
              "solver " + std::to_string(result.total_cost) + " != oracle " + std::to_string(oracle));
      ++checked;
    }
  }
  const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
  require(checked == 1000, "expected 1000 matrices");
  require(elapsed.count() < 10.0, "oracle comparison exceeded 10 s");
}

// --- criterion 2: cyclic rotation invariance of the pair cost ---------------

PredictedRoom as_predicted_room(const RoomEdgeSequence& room) {
  PredictedRoom out;
  for (const auto& t : room.tokens) out.tokens.push_back({t.valid ? 1.0 : 0.0, t.edge});
  return out;
}

void criterion_cyclic_matching() {
  std::mt19937_64 rng(1002);
  const ModelCapacity cap{8, 40};
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = 3 + rng() % 10;
    const auto room = testsupport::random_room(rng, cap, n);
    for (std::size_t r = 0; r < room.valid_count; ++r) {
      const auto pc = pair_cost(room, as_predicted_room(rotate_valid(room, r)), 0.6);
      require(pc.cost == 0.0, "rotation " + std::to_string(r) + " cost " + std::to_string(pc.cost));
      require(pc.best_rotation == r, "wrong best rotation");
    }
  }

  for (int trial = 0; trial < 40; ++trial) {
    const auto fp = testsupport::random_floorplan(rng, cap, 2 + trial % 5);
    std::vector<std::size_t> perm(cap.max_rooms);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    PredictionSet pred;
    pred.rooms.resize(cap.max_rooms);
    for (std::size_t m = 0; m < cap.max_rooms; ++m) {
      const auto& room = fp.rooms[m];
      const std::size_t r = room.valid_count > 0 ? rng() % room.valid_count : 0;
      pred.rooms[perm[m]] = as_predicted_room(rotate_valid(room, r));
    }
    require(match_floorplans(fp, pred, 0.6).total_cost == 0.0,
            "permuted+rotated plan did not match at zero cost");
  }
}

// --- criterion 3: eps insensitivity --------------------------------------

void criterion_eps_insensitivity() {
  std::mt19937_64 rng(1003);
  const ModelCapacity cap{1, 40};
  const std::array<double, 5> eps_grid{1e-4, 0.01, 0.05, 0.1, 0.2};

  MetricCounts room_counts_per_eps[5];
  const MetricThresholds thresholds;

  for (int trial = 0; trial < 500; ++trial) {
    const auto n = 3 + rng() % 10;
    const auto loop = testsupport::random_simple_polygon(rng, n);
    const auto clean = make_room(edges_from_vertex_loop(loop), cap);

    // clean sets: vertices bit-stable across the whole grid
    const auto reference = edges_to_polygon(clean, eps_grid[0]);
    for (const double eps : eps_grid) {
      const auto poly = edges_to_polygon(clean, eps);
      require(poly.size() == reference.size(), "clean vertex count varies with eps");
      for (std::size_t v = 0; v < poly.size(); ++v)
        require(distance(poly.vertices[v], reference.vertices[v]) < 1e-9,
                "clean vertex drifts with eps");
    }

    // shrunk sets: identical wherever the slack covers the 2% gap, and the
    // room-level metrics must not move anywhere on the grid
    auto shrunk_edges = edges_from_vertex_loop(loop);
    for (auto& e : shrunk_edges) {
      const Point2 d = e.direction();
      e = {e.p1 + 0.02 * d, e.p2 - 0.02 * d};
    }
    const auto shrunk = make_room(shrunk_edges, cap);
    const auto wide_ref = edges_to_polygon(shrunk, 0.05);
    for (const double eps : {0.05, 0.1, 0.2}) {
      const auto poly = edges_to_polygon(shrunk, eps);
      require(poly.size() == wide_ref.size(), "shrunk vertex count varies with wide eps");
      for (std::size_t v = 0; v < poly.size(); ++v)
        require(distance(poly.vertices[v], wide_ref.vertices[v]) < 1e-9,
                "shrunk vertex drifts with wide eps");
    }
    require(testsupport::loop_distance_up_to_rotation(wide_ref, loop) < 1e-9,
            "shrunk edges did not recover the clean corners");

    for (std::size_t e = 0; e < eps_grid.size(); ++e) {
      const auto pred = edges_to_polygon(shrunk, eps_grid[e]);
      room_counts_per_eps[e] += evaluate_polygon_counts({loop}, {pred}, thresholds);
    }
  }

  const auto base = report_from_counts(room_counts_per_eps[3]);  // eps = 0.1
  for (std::size_t e = 0; e < eps_grid.size(); ++e) {
    const auto r = report_from_counts(room_counts_per_eps[e]);
    require(std::abs(r.room.precision - base.room.precision) < 1e-4 &&
                std::abs(r.room.recall - base.room.recall) < 1e-4 &&
                std::abs(r.room.f1 - base.room.f1) < 1e-4,
            "room metrics moved by >= 0.01% across eps");
  }
}

// --- criterion 4: vertex loop round trip -------------------------------------

void criterion_round_trip() {
  std::mt19937_64 rng(1004);
  const ModelCapacity cap{1, 40};
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = 3 + rng() % 38;
    const auto loop = testsupport::random_simple_polygon(rng, n);
    const auto poly = edges_to_polygon(make_room(edges_from_vertex_loop(loop), cap), 0.1);
    require(poly.size() == loop.size(), "vertex count changed in round trip");
    require(testsupport::loop_distance_up_to_rotation(poly, loop) < 1e-9,
            "round-trip vertex error >= 1e-9");
  }
}

// --- criterion 5: loss analytics ---------------------------------------------

void criterion_loss_analytics() {
  const std::vector<int> one{1};
  const std::vector<double> half{0.5};
  require(std::abs(bce_cls_loss(one, half) - std::log(2.0)) <= 1e-12, "BCE(1, 0.5) != ln 2");

  const auto half_mask = rasterize({{{0.0, 0.0}, {0.5, 0.0}, {0.5, 1.0}, {0.0, 1.0}}}, 256, 256);
  const auto full_mask = rasterize({{{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}}, 256, 256);
  require(std::abs(dice_loss(half_mask, full_mask) - 1.0 / 3.0) <= 0.02 / 3.0,
          "Dice(half, whole) != 1/3 within 2%");

  // dyadic displacements keep the expected sum exact
  const ModelCapacity cap{2, 6};
  const auto gt = make_room({{{0.25, 0.25}, {0.5, 0.25}}, {{0.5, 0.25}, {0.25, 0.75}}}, cap);
  auto pred = as_predicted_room(gt);
  pred.tokens[0].edge.p1.x += 0.03125;
  pred.tokens[0].edge.p1.y += 0.015625;
  pred.tokens[1].edge.p2.y -= 0.0625;
  const double expected = (0.03125 + 0.015625 + 0.0625) / 2.0;
  require(edge_l1_loss(gt, pred) == expected, "edge L1 is not the exact hand sum");

  // linearity of the weighted total in every component weight
  std::mt19937_64 rng(1005);
  const ModelCapacity cap2{4, 10};
  const auto fp = testsupport::random_floorplan(rng, cap2, 3);
  PredictionSet noisy = as_prediction(fp);
  for (auto& room : noisy.rooms)
    for (auto& t : room.tokens) {
      t.confidence = std::clamp(t.confidence == 1.0 ? 0.9 : 0.05, 0.0, 1.0);
      if (t.confidence > 0.5) {
        t.edge.p1.x += testsupport::uniform(rng, -0.02, 0.02);
        t.edge.p2.y += testsupport::uniform(rng, -0.02, 0.02);
      }
    }
  const auto match = match_floorplans(fp, noisy, 0.6);
  const auto dn = perturb(fp, {0.1, 0.3, 9, 1});
  const auto dn_pred = as_prediction(dn);

  LossOptions base_opts;
  base_opts.raster_resolution = 128;
  const auto base = total_loss(fp, noisy, match, base_opts, &fp, &dn_pred);
  const std::array<double LossWeights::*, 5> members{
      &LossWeights::cls, &LossWeights::edge, &LossWeights::ras, &LossWeights::cls_dn,
      &LossWeights::edge_dn};
  const std::array<double LossBreakdown::*, 5> components{
      &LossBreakdown::cls, &LossBreakdown::edge, &LossBreakdown::ras, &LossBreakdown::cls_dn,
      &LossBreakdown::edge_dn};
  for (std::size_t k = 0; k < members.size(); ++k) {
    LossOptions bumped = base_opts;
    bumped.weights.*members[k] += 1.0;
    const auto shifted = total_loss(fp, noisy, match, bumped, &fp, &dn_pred);
    const double component = base.*components[k];
    require(component > 0.0, "loss component " + std::to_string(k) + " unexpectedly zero");
    require(shifted.*components[k] == component, "component changed with its weight");
    require(std::abs((shifted.total - base.total) - component) <=
                1e-12 * std::max(1.0, std::abs(base.total)),
            "total is not linear in weight " + std::to_string(k));
  }
}

// --- criterion 6: perturbation contract --------------------------------------

void criterion_perturbation() {
  std::mt19937_64 rng(1006);
  const ModelCapacity cap{10, 25};
  std::vector<RoomEdgeSequence> rooms;
  for (std::size_t i = 0; i < 10; ++i)
    rooms.push_back(testsupport::random_room(rng, cap, 25, {0.5, 0.5}, 0.12, 0.26));
  const auto fp = make_floorplan(std::move(rooms), cap);  // interior: clamping never binds

  const NoiseConfig cfg{0.4, 0.2, 77, 40};  // 10,000 valid tokens, 20,000 endpoints
  const auto set = perturb(fp, cfg);

  std::size_t endpoints = 0, flips = 0, valid = 0;
  for (const auto& t : set.tokens) {
    if (!t.origin_valid) continue;
    ++valid;
    if (t.label != 1) ++flips;
    const auto& src = fp.rooms[t.origin_room].tokens[t.origin_edge].edge;
    for (const auto& [got, ref] : {std::pair{t.edge.p1, src.p1}, std::pair{t.edge.p2, src.p2}}) {
      require(std::abs(got.x - ref.x) < cfg.lambda_geo / 2.0, "|dx| >= lambda/2");
      require(std::abs(got.y - ref.y) < cfg.lambda_geo / 2.0, "|dy| >= lambda/2");
      require(in_unit_range(got), "perturbed endpoint left [0,1]^2");
      ++endpoints;
    }
  }
  require(valid == 10000, "expected 10,000 valid tokens, got " + std::to_string(valid));
  require(endpoints == 20000, "expected 20,000 endpoints");
  const double rate = static_cast<double>(flips) / static_cast<double>(valid);
  const double sigma = std::sqrt(cfg.gamma_flip * (1.0 - cfg.gamma_flip) / 10000.0);
  require(std::abs(rate - cfg.gamma_flip) <= 3.0 * sigma,
          "flip rate " + std::to_string(rate) + " outside 3 sigma of gamma");

  // identity at zero noise
  const auto identity = perturb(fp, {0.0, 0.0, 5, 1});
  for (std::size_t i = 0; i < identity.tokens.size(); ++i) {
    const auto& t = identity.tokens[i];
    require(t.edge == fp.rooms[t.origin_room].tokens[t.origin_edge].edge,
            "zero-noise geometry differs");
    require(t.label == (fp.rooms[t.origin_room].tokens[t.origin_edge].valid ? 1 : 0),
            "zero-noise label differs");
  }

  // bit-identical reruns
  const auto rerun = perturb(fp, cfg);
  require(rerun.tokens.size() == set.tokens.size(), "rerun size differs");
  for (std::size_t i = 0; i < set.tokens.size(); ++i)
    require(rerun.tokens[i].edge == set.tokens[i].edge && rerun.tokens[i].label == set.tokens[i].label,
            "rerun is not bit-identical");
}

// --- criterion 7: attention mask rules ---------------------------------------

void criterion_attention_mask() {
  for (std::size_t groups = 0; groups <= 4; ++groups) {
    for (std::size_t size = 0; size <= 8; ++size) {
      for (std::size_t latent = 0; latent <= 32; ++latent) {
        const auto mask = build_attention_mask(groups, size, latent);
        const std::size_t perturbed = groups * size;
        require(mask.size() == perturbed + latent, "mask extent wrong");
        for (std::size_t q = 0; q < mask.size(); ++q) {
          for (std::size_t k = 0; k < mask.size(); ++k) {
            const bool q_lat = q >= perturbed;
            const bool k_lat = k >= perturbed;
            const bool expect =
                (q_lat && k_lat) || (!q_lat && !k_lat && (q / size) == (k / size));
            if (mask.at(q, k) != expect)
              throw CheckFailure("mask rule violated at groups=" + std::to_string(groups) +
                                 " size=" + std::to_string(size) + " latent=" +
                                 std::to_string(latent) + " q=" + std::to_string(q) + " k=" +
                                 std::to_string(k));
          }
        }
      }
    }
  }
}

// --- criterion 8: metrics identity, monotonicity, micro-averaging -----------

void criterion_metrics() {
  std::mt19937_64 rng(1008);
  const ModelCapacity cap{8, 16};
  for (int trial = 0; trial < 100; ++trial) {
    const auto fp = testsupport::random_floorplan(rng, cap, 1 + trial % 6);
    const auto report = evaluate_scene(fp, as_prediction(fp));
    require(report.room.f1 == 1.0 && report.corner.f1 == 1.0 && report.angle.f1 == 1.0,
            "self-evaluation is not perfect at trial " + std::to_string(trial));
    require(report.room_iou == 1.0, "self IoU below 1");
  }

  for (int trial = 0; trial < 30; ++trial) {
    const auto fp = testsupport::random_floorplan(rng, cap, 2 + trial % 4);
    PredictionSet pred = as_prediction(fp);
    for (auto& room : pred.rooms)
      for (auto& t : room.tokens) {
        if (t.confidence == 0.0) continue;
        t.edge.p1.x = std::clamp(t.edge.p1.x + testsupport::uniform(rng, -0.02, 0.02), 0.0, 1.0);
        t.edge.p2.y = std::clamp(t.edge.p2.y + testsupport::uniform(rng, -0.02, 0.02), 0.0, 1.0);
      }
    const auto gt_polys = floorplan_to_polygons(fp, 0.1);
    const auto pred_polys = floorplan_to_polygons(as_floorplan(pred), 0.1);
    MetricThresholds tight{0.85, 4.0, 2.0};
    MetricThresholds loose{0.6, 12.0, 10.0};
    const auto a = evaluate_polygon_counts(gt_polys, pred_polys, tight);
    const auto b = evaluate_polygon_counts(gt_polys, pred_polys, loose);
    require(a.room_matches <= b.room_matches && a.corner_matches <= b.corner_matches &&
                a.angle_correct <= b.angle_correct,
            "loosening a threshold decreased a matched count");
  }

  // micro-average equals hand-computed ratios on a two-scene fixture
  const PolygonVertices big{{{0.2, 0.2}, {0.8, 0.2}, {0.8, 0.8}, {0.2, 0.8}}};
  const PolygonVertices small_a{{{0.1, 0.1}, {0.45, 0.1}, {0.45, 0.45}, {0.1, 0.45}}};
  const PolygonVertices small_b{{{0.55, 0.55}, {0.9, 0.55}, {0.9, 0.9}, {0.55, 0.9}}};
  auto counts = evaluate_polygon_counts({big}, {big}, {});
  counts += evaluate_polygon_counts({small_a, small_b}, {small_a}, {});
  const auto agg = report_from_counts(counts);
  require(agg.room.precision == 1.0, "micro precision != 2/2");
  require(std::abs(agg.room.recall - 2.0 / 3.0) < 1e-12, "micro recall != 2/3");
  require(std::abs(agg.room.f1 - 0.8) < 1e-12, "micro F1 != 0.8");
}

// --- criterion 9: projection properties --------------------------------------

void criterion_projection() {
  std::mt19937_64 rng(1009);
  for (int trial = 0; trial < 100; ++trial) {
    PointCloud cloud;
    const std::size_t n = 100 + rng() % 3000;
    for (std::size_t i = 0; i < n; ++i)
      cloud.points.push_back({testsupport::uniform(rng, -5.0, 5.0),
                              testsupport::uniform(rng, 2.0, 9.0),
                              testsupport::uniform(rng, 0.0, 2.5)});
    const auto map = project(cloud, 128, 128);
    const auto total = std::accumulate(map.counts.begin(), map.counts.end(), std::uint64_t{0});
    require(total == n, "count conservation failed");
    require(*std::max_element(map.values.begin(), map.values.end()) == 1.0,
            "max normalization failed");
  }

  PointCloud fixture;
  for (int i = 0; i < 4; ++i) fixture.points.push_back({3.0, 3.0, static_cast<double>(i)});
  const auto map = project(fixture, 256, 256, Bounds{0.0, 0.0, 10.0, 10.0});
  std::size_t ones = 0, nonzero = 0;
  for (double v : map.values) {
    if (v == 1.0) ++ones;
    if (v != 0.0) ++nonzero;
  }
  require(ones == 1 && nonzero == 1, "4-points-one-cell fixture is not a single 1.0 pixel");
}

// --- criterion 10: CLI end-to-end smoke --------------------------------------

std::string run_capture(const std::string& command) {
  std::string output;
  FILE* pipe = popen(command.c_str(), "r");
  require(pipe != nullptr, "failed to launch: " + command);
  std::array<char, 4096> buf;
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) output.append(buf.data(), got);
  const int status = pclose(pipe);
  require(status == 0, "command failed (" + std::to_string(status) + "): " + command);
  return output;
}

void criterion_end_to_end() {
  const char* cli = std::getenv("EDGEPLAN_CLI");
  require(cli != nullptr && *cli != '\0', "EDGEPLAN_CLI is not set (run through ctest)");

  const fs::path dir = fs::temp_directory_path() / "edgeplan_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir / "gt");
  fs::create_directories(dir / "pred");

  const ModelCapacity cap{20, 40};
  const std::vector<PolygonVertices> layout{
      {{{0.05, 0.05}, {0.30, 0.05}, {0.30, 0.45}, {0.05, 0.45}}},
      {{{0.30, 0.05}, {0.55, 0.05}, {0.55, 0.45}, {0.30, 0.45}}},
      {{{0.05, 0.45}, {0.30, 0.45}, {0.30, 0.95}, {0.05, 0.95}}},
      {{{0.30, 0.45}, {0.55, 0.45}, {0.55, 0.95}, {0.30, 0.95}}},
      {{{0.55, 0.05}, {0.95, 0.05}, {0.95, 0.95}, {0.75, 0.95}, {0.75, 0.55}, {0.55, 0.55}}}};
  std::vector<RoomEdgeSequence> rooms;
  for (const auto& poly : layout) rooms.push_back(make_room(edges_from_vertex_loop(poly), cap));
  const auto fp = make_floorplan(std::move(rooms), cap, "smoke");

  const auto gt_path = (dir / "gt" / "scene.json").string();
  io::save_floorplan(fp, gt_path);

  const std::string exe = std::string("'") + cli + "'";
  const auto perturbed = (dir / "perturbed.json").string();
  run_capture(exe + " perturb " + gt_path + " -o " + perturbed +
              " --lambda 0.05 --gamma 0 --seed 7 2>/dev/null");
  const auto polys = (dir / "pred" / "scene.json").string();
  run_capture(exe + " polygonize " + perturbed + " -o " + polys + " --eps 0.1 2>/dev/null");
  const auto report_text = run_capture(exe + " evaluate " + (dir / "gt").string() + " " +
                                       (dir / "pred").string() + " 2>/dev/null");

  const auto report = nlohmann::json::parse(report_text);
  const double room_f1 = report["aggregate"]["room"]["f1"].get<double>();
  require(room_f1 >= 90.0, "room F1 " + std::to_string(room_f1) + " below the 90% floor");
  // frozen regression value from the first run of this fixed-seed pipeline
  require(room_f1 == 100.0, "room F1 " + std::to_string(room_f1) + " regressed from 100");
  fs::remove_all(dir);
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<void()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "assignment solver equals the exhaustive minimum", criterion_assignment_oracle},
      {2, "pair cost is invariant over cyclic rotations", criterion_cyclic_matching},
      {3, "polygonization is insensitive to the slack threshold", criterion_eps_insensitivity},
      {4, "vertex loops round-trip through edges", criterion_round_trip},
      {5, "loss terms match their analytic values", criterion_loss_analytics},
      {6, "perturbation honors its bounds, rate and determinism", criterion_perturbation},
      {7, "attention mask isolates groups and latents", criterion_attention_mask},
      {8, "metrics identity, monotonicity and micro-averaging", criterion_metrics},
      {9, "projection conserves counts and normalizes to 1", criterion_projection},
      {10, "perturb -> polygonize -> evaluate keeps room F1 >= 90%", criterion_end_to_end},
  };

  const auto suite_start = std::chrono::steady_clock::now();
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
      c.run();
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
    std::printf("[%s] criterion %2d: %s (%.2fs)%s%s\n", ok ? "PASS" : "FAIL", c.id, c.name,
                secs.count(), detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  const auto total = std::chrono::duration<double>(std::chrono::steady_clock::now() - suite_start);
  std::printf("%d/%zu criteria passed in %.2fs\n", static_cast<int>(criteria.size()) - failures,
              criteria.size(), total.count());
  return failures == 0 ? 0 : 1;
}
