// Command-line front end: projection, polygonization, matching, loss
// evaluation, query perturbation, dataset evaluation and SVG rendering.
// Results go to stdout or the requested output file; diagnostics go to
// stderr as machine-readable JSON on failure.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "edgeplan/edgeplan.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace edgeplan;

namespace {

json level_json(const LevelScore& s) {
  return {{"precision", 100.0 * s.precision},
          {"recall", 100.0 * s.recall},
          {"f1", 100.0 * s.f1}};
}

json counts_json(const MetricCounts& c) {
  return {{"gt_rooms", c.gt_rooms},         {"pred_rooms", c.pred_rooms},
          {"room_matches", c.room_matches}, {"gt_corners", c.gt_corners},
          {"pred_corners", c.pred_corners}, {"corner_matches", c.corner_matches},
          {"angle_correct", c.angle_correct}, {"iou_sum", c.iou_sum},
          {"iou_count", c.iou_count}};
}

json report_json(const MetricsReport& r) {
  return {{"room", level_json(r.room)},
          {"corner", level_json(r.corner)},
          {"angle", level_json(r.angle)},
          {"room_iou", 100.0 * r.room_iou},
          {"counts", counts_json(r.counts)}};
}

json breakdown_json(const LossBreakdown& l) {
  return {{"cls", l.cls},       {"edge", l.edge},       {"ras", l.ras},
          {"cls_dn", l.cls_dn}, {"edge_dn", l.edge_dn}, {"total", l.total}};
}

void emit_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

struct SceneResult {
  std::string name;
  MetricsReport report;
};

int run_project(const std::string& cloud_path, const std::string& out_path, std::size_t res,
                const std::vector<double>& bounds) {
  const PointCloud cloud = io::read_xyz(cloud_path);
  std::optional<Bounds> b;
  if (!bounds.empty()) b = Bounds{bounds[0], bounds[1], bounds[2], bounds[3]};
  io::write_density_pgm(project(cloud, res, res, b), out_path);
  return 0;
}

int run_polygonize(const std::string& pred_path, const std::string& out_path, double eps,
                   double conf) {
  std::vector<std::string> warnings;
  const auto polys = io::load_as_polygons(pred_path, eps, conf, &warnings);
  emit_warnings(warnings);
  io::save_polygons(polys, out_path);
  return 0;
}

int run_match(const std::string& gt_path, const std::string& pred_path, double lambda_cls,
              bool include_reversed) {
  const auto gt = io::load_floorplan(gt_path);
  const auto pred = io::load_prediction(pred_path);
  const auto result = match_floorplans(gt, pred, lambda_cls, include_reversed);
  json out{{"total_cost", result.total_cost},
           {"assignment", result.assignment},
           {"per_pair_cost", result.per_pair_cost},
           {"best_rotation", result.best_rotation}};
  if (include_reversed) out["reversed"] = result.pair_reversed;
  std::cout << out.dump(2) << "\n";
  return 0;
}

PredictionSet load_prediction_like(const std::string& path) {
  switch (io::peek_kind(path)) {
    case io::DocumentKind::prediction: return io::load_prediction(path);
    case io::DocumentKind::floorplan: return as_prediction(io::load_floorplan(path));
    default:
      throw Error(Errc::schema_violation, path + ": expected a prediction or floorplan document");
  }
}

int run_loss(const std::string& gt_path, const std::string& pred_path,
             const std::string& dn_path, const LossOptions& opts, double lambda_cls) {
  const auto gt = io::load_floorplan(gt_path);
  const auto pred = load_prediction_like(pred_path);
  const auto match = match_floorplans(gt, pred, lambda_cls);
  LossBreakdown breakdown;
  if (!dn_path.empty()) {
    const auto dn = io::load_prediction(dn_path);
    breakdown = total_loss(gt, pred, match, opts, &gt, &dn);
  } else {
    breakdown = total_loss(gt, pred, match, opts);
  }
  std::cout << breakdown_json(breakdown).dump(2) << "\n";
  return 0;
}

int run_perturb(const std::string& gt_path, const std::string& out_path, const NoiseConfig& cfg) {
  const auto gt = io::load_floorplan(gt_path);
  const auto set = perturb(gt, cfg);
  auto pred = as_prediction(set);
  pred.metadata = gt.metadata;
  io::save_prediction(pred, out_path, set.groups);
  return 0;
}

int run_evaluate(const std::string& gt_dir, const std::string& pred_dir, double eps, double conf,
                 const MetricThresholds& thresholds, std::size_t jobs) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(gt_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) throw Error(Errc::io_error, "no .json scenes found in " + gt_dir);

  std::vector<SceneResult> scenes(names.size());
  std::vector<std::string> failures(names.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= names.size()) return;
      try {
        const auto gt_path = (fs::path(gt_dir) / names[i]).string();
        const auto pred_path = (fs::path(pred_dir) / names[i]).string();
        if (!fs::exists(pred_path))
          throw Error(Errc::io_error, "missing prediction file " + pred_path);
        const auto gt_polys = io::load_as_polygons(gt_path, eps, conf);
        const auto pred_polys = io::load_as_polygons(pred_path, eps, conf);
        scenes[i] = {names[i], evaluate_polygons(gt_polys, pred_polys, thresholds)};
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(jobs, names.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (!failures[i].empty()) throw Error(Errc::io_error, names[i] + ": " + failures[i]);

  MetricCounts total;
  LevelScore macro_room, macro_corner, macro_angle;
  json per_scene = json::array();
  std::fprintf(stderr, "%-28s %8s %8s %8s %8s\n", "scene", "room_f1", "corn_f1", "ang_f1", "iou");
  for (const auto& s : scenes) {
    total += s.report.counts;
    macro_room.f1 += s.report.room.f1;
    macro_corner.f1 += s.report.corner.f1;
    macro_angle.f1 += s.report.angle.f1;
    json entry = report_json(s.report);
    entry["name"] = s.name;
    per_scene.push_back(std::move(entry));
    std::fprintf(stderr, "%-28s %8.2f %8.2f %8.2f %8.2f\n", s.name.c_str(),
                 100.0 * s.report.room.f1, 100.0 * s.report.corner.f1, 100.0 * s.report.angle.f1,
                 100.0 * s.report.room_iou);
  }
  const double n = static_cast<double>(scenes.size());
  const auto aggregate = report_from_counts(total);
  json out{{"aggregate", report_json(aggregate)},
           {"macro",
            {{"room_f1", 100.0 * macro_room.f1 / n},
             {"corner_f1", 100.0 * macro_corner.f1 / n},
             {"angle_f1", 100.0 * macro_angle.f1 / n}}},
           {"scenes", std::move(per_scene)}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_render(const std::string& polys_path, const std::string& bg_path,
               const std::string& out_path, double eps, double conf) {
  std::vector<std::string> warnings;
  const auto polys = io::load_as_polygons(polys_path, eps, conf, &warnings);
  emit_warnings(warnings);
  std::optional<DensityMap> bg;
  if (!bg_path.empty()) bg = io::read_density_pgm(bg_path);
  io::render_svg(polys, bg ? &*bg : nullptr, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edge-based floorplan reconstruction toolkit"};
  app.require_subcommand(1);

  // project
  auto* project_cmd = app.add_subcommand("project", "project an xyz point cloud to a density PGM");
  std::string cloud_path, out_path;
  std::size_t res = 256;
  std::vector<double> bounds;
  project_cmd->add_option("cloud", cloud_path, "input .xyz file")->required();
  project_cmd->add_option("-o,--output", out_path, "output .pgm file")->required();
  project_cmd->add_option("--res", res, "raster resolution")->capture_default_str();
  project_cmd->add_option("--bounds", bounds, "projection bounds: min_x min_y max_x max_y")
      ->expected(4);

  // polygonize
  auto* poly_cmd = app.add_subcommand("polygonize", "convert edge tokens to closed polygons");
  std::string pred_path, poly_out;
  double eps = kDefaultPolygonEps;
  double conf = kDefaultConfidenceMin;
  poly_cmd->add_option("input", pred_path, "prediction or floorplan .json")->required();
  poly_cmd->add_option("-o,--output", poly_out, "output polygons .json")->required();
  poly_cmd->add_option("--eps", eps, "intersection slack, fraction of edge length")
      ->capture_default_str();
  poly_cmd->add_option("--conf", conf, "confidence threshold for valid edges")
      ->capture_default_str();

  // match
  auto* match_cmd = app.add_subcommand("match", "assign predicted rooms to ground truth");
  std::string gt_path, match_pred_path;
  double lambda_cls = kDefaultLambdaCls;
  bool include_reversed = false;
  match_cmd->add_option("gt", gt_path, "ground-truth floorplan .json")->required();
  match_cmd->add_option("pred", match_pred_path, "prediction .json")->required();
  match_cmd->add_option("--lambda-cls", lambda_cls, "confidence term weight")
      ->capture_default_str();
  match_cmd->add_flag("--include-reversed", include_reversed,
                      "also scan reversed ground-truth traversals");

  // loss
  auto* loss_cmd = app.add_subcommand("loss", "evaluate supervision terms for a prediction");
  std::string loss_gt, loss_pred, dn_path;
  LossOptions loss_opts;
  loss_cmd->add_option("gt", loss_gt, "ground-truth floorplan .json")->required();
  loss_cmd->add_option("pred", loss_pred, "prediction .json")->required();
  loss_cmd->add_option("--dn", dn_path, "aligned perturbed queries .json");
  loss_cmd->add_option("--lambda-cls", loss_opts.weights.cls)->capture_default_str();
  loss_cmd->add_option("--lambda-edge", loss_opts.weights.edge)->capture_default_str();
  loss_cmd->add_option("--lambda-ras", loss_opts.weights.ras)->capture_default_str();
  loss_cmd->add_option("--lambda-cls-dn", loss_opts.weights.cls_dn)->capture_default_str();
  loss_cmd->add_option("--lambda-edge-dn", loss_opts.weights.edge_dn)->capture_default_str();
  loss_cmd->add_option("--eps", loss_opts.eps)->capture_default_str();
  loss_cmd->add_option("--res", loss_opts.raster_resolution)->capture_default_str();
  loss_cmd->add_option("--conf", loss_opts.confidence_min)->capture_default_str();

  // perturb
  auto* perturb_cmd = app.add_subcommand("perturb", "generate perturbed denoising queries");
  std::string perturb_gt, perturb_out;
  NoiseConfig noise;
  perturb_cmd->add_option("gt", perturb_gt, "ground-truth floorplan .json")->required();
  perturb_cmd->add_option("-o,--output", perturb_out, "output prediction .json")->required();
  perturb_cmd->add_option("--lambda", noise.lambda_geo, "geometric noise scale")
      ->capture_default_str();
  perturb_cmd->add_option("--gamma", noise.gamma_flip, "label flip probability")
      ->capture_default_str();
  perturb_cmd->add_option("--seed", noise.seed, "RNG seed")->capture_default_str();
  perturb_cmd->add_option("--groups", noise.groups, "independent perturbed copies")
      ->capture_default_str();

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "room/corner/angle metrics over scene dirs");
  std::string gt_dir, pred_dir;
  MetricThresholds thresholds;
  double eval_eps = kDefaultPolygonEps;
  double eval_conf = kDefaultConfidenceMin;
  std::size_t jobs = 1;
  eval_cmd->add_option("gt_dir", gt_dir, "directory of ground-truth scene .json files")->required();
  eval_cmd->add_option("pred_dir", pred_dir, "directory of prediction .json files")->required();
  eval_cmd->add_option("--iou", thresholds.room_iou_min, "room match IoU threshold")
      ->capture_default_str();
  eval_cmd->add_option("--corner-px", thresholds.corner_dist_max, "corner match distance, pixels")
      ->capture_default_str();
  eval_cmd->add_option("--angle-deg", thresholds.angle_tol_deg, "angle tolerance, degrees")
      ->capture_default_str();
  eval_cmd->add_option("--eps", eval_eps)->capture_default_str();
  eval_cmd->add_option("--res", thresholds.raster_resolution)->capture_default_str();
  eval_cmd->add_option("--conf", eval_conf)->capture_default_str();
  eval_cmd->add_option("--jobs", jobs, "worker thread count")->capture_default_str();
  eval_cmd->add_flag("--optimal-rooms", thresholds.optimal_room_matching,
                     "use optimal assignment instead of greedy room matching");

  // render
  auto* render_cmd = app.add_subcommand("render", "render polygons (and a density map) to SVG");
  std::string render_in, render_bg, render_out;
  double render_eps = kDefaultPolygonEps;
  double render_conf = kDefaultConfidenceMin;
  render_cmd->add_option("input", render_in, "polygons/floorplan/prediction .json")->required();
  render_cmd->add_option("--bg", render_bg, "background density .pgm");
  render_cmd->add_option("-o,--output", render_out, "output .svg")->required();
  render_cmd->add_option("--eps", render_eps)->capture_default_str();
  render_cmd->add_option("--conf", render_conf)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (project_cmd->parsed()) return run_project(cloud_path, out_path, res, bounds);
    if (poly_cmd->parsed()) return run_polygonize(pred_path, poly_out, eps, conf);
    if (match_cmd->parsed())
      return run_match(gt_path, match_pred_path, lambda_cls, include_reversed);
    if (loss_cmd->parsed()) return run_loss(loss_gt, loss_pred, dn_path, loss_opts, lambda_cls);
    if (perturb_cmd->parsed()) return run_perturb(perturb_gt, perturb_out, noise);
    if (eval_cmd->parsed())
      return run_evaluate(gt_dir, pred_dir, eval_eps, eval_conf, thresholds, jobs);
    if (render_cmd->parsed())
      return run_render(render_in, render_bg, render_out, render_eps, render_conf);
  } catch (const Error& e) {
    const json err{{"error", {{"code", to_string(e.code())}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    const json err{{"error", {{"code", "Internal"}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 1;
}
