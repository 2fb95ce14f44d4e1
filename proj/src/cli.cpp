#include "ndf4d/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "ndf4d/checkpoint.hpp"
#include "ndf4d/config.hpp"
#include "ndf4d/errors.hpp"
#include "ndf4d/evaluation.hpp"
#include "ndf4d/io.hpp"
#include "ndf4d/mesher.hpp"
#include "ndf4d/parallel.hpp"
#include "ndf4d/ply.hpp"
#include "ndf4d/synth.hpp"
#include "ndf4d/trainer.hpp"

namespace ndf4d {

namespace fs = std::filesystem;

namespace {

// Flags every subcommand accepts.
struct CommonFlags {
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
  int workers = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--seed", flags.seed, "Random seed (overrides the configured seed)");
  cmd->add_flag("--deterministic", flags.deterministic, "Fixed reduction order; bit-identical outputs");
  cmd->add_option("--workers", flags.workers, "Worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);
}

int effective_workers(const CommonFlags& flags) { return flags.workers > 0 ? flags.workers : default_workers(); }

void write_text_file(const fs::path& path, const std::string& text) {
  write_file_atomic(path, [&](std::ostream& o) { o << text; }, false);
}

FieldSelection selection_from(bool is_static, std::optional<int> frame, const FieldModel& model) {
  if (is_static == frame.has_value()) throw ConfigError("choose exactly one of --static or --at-frame");
  if (is_static) return FieldSelection::static_map();
  if (*frame < 0 || *frame >= model.frame_count()) {
    throw ConfigError("--at-frame " + std::to_string(*frame) + " outside [0, " +
                      std::to_string(model.frame_count() - 1) + "]");
  }
  return FieldSelection::at_frame(*frame);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ndf4d: 4D neural signed distance mapping of dynamic scenes"};
  app.require_subcommand(1);
  app.name("ndf4d");

  // synth
  CommonFlags synth_flags;
  std::string synth_scene;
  std::string synth_out;
  bool synth_static = false;
  std::optional<double> synth_noise;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dynamic-scene dataset");
  synth->add_option("--scene", synth_scene, "Scene spec file (default: built-in scene)")->check(CLI::ExistingFile);
  synth->add_option("--out", synth_out, "Output dataset directory")->required();
  synth->add_flag("--static-variant", synth_static, "Drop all movers");
  synth->add_option("--range-noise", synth_noise, "Gaussian range noise std-dev in metres");
  add_common(synth, synth_flags);

  // train
  CommonFlags train_flags;
  std::string train_data, train_config, train_out, train_log;
  std::vector<std::string> train_sets;
  int log_every = 500;
  auto* train_cmd = app.add_subcommand("train", "Fit the 4D field to a dataset");
  train_cmd->add_option("--data", train_data, "Dataset directory")->required();
  train_cmd->add_option("--config", train_config, "Config file (key = value)");
  train_cmd->add_option("--set", train_sets, "Override key=value (repeatable, applied after --config)");
  train_cmd->add_option("--out", train_out, "Checkpoint path")->required();
  train_cmd->add_option("--loss-log", train_log, "Loss CSV path (default: <out>.loss.csv)");
  train_cmd->add_option("--log-every", log_every, "Print the loss every N steps (0 = quiet)");
  add_common(train_cmd, train_flags);

  // mesh
  CommonFlags mesh_flags;
  std::string mesh_ckpt, mesh_out;
  bool mesh_static = false;
  std::optional<int> mesh_frame;
  std::optional<double> mesh_cell;
  bool mesh_binary = false;
  auto* mesh = app.add_subcommand("mesh", "Extract a triangle mesh with marching cubes");
  mesh->add_option("--checkpoint", mesh_ckpt, "Trained checkpoint")->required();
  mesh->add_option("--out", mesh_out, "Output PLY")->required();
  mesh->add_flag("--static", mesh_static, "Mesh the static map");
  mesh->add_option("--at-frame", mesh_frame, "Mesh the field at frame T");
  mesh->add_option("--cell-size", mesh_cell, "Lattice spacing in metres (default: finest voxel / 2)");
  mesh->add_flag("--binary", mesh_binary, "Binary little-endian PLY");
  add_common(mesh, mesh_flags);

  // slice
  CommonFlags slice_flags;
  std::string slice_ckpt, slice_out, slice_axis = "z";
  double slice_coord = 0.0;
  double slice_clamp = 0.3;
  bool slice_static = false;
  std::optional<int> slice_frame;
  std::optional<double> slice_cell;
  auto* slice = app.add_subcommand("slice", "Export a 2D grid of clamped field values");
  slice->add_option("--checkpoint", slice_ckpt, "Trained checkpoint")->required();
  slice->add_option("--out", slice_out, "Output CSV")->required();
  slice->add_option("--axis", slice_axis, "Plane normal axis: x, y or z")->check(CLI::IsMember({"x", "y", "z"}));
  slice->add_option("--coord", slice_coord, "Plane coordinate in metres")->required();
  slice->add_option("--clamp", slice_clamp, "Clamp magnitude in metres")->check(CLI::PositiveNumber);
  slice->add_flag("--static", slice_static, "Slice the static map");
  slice->add_option("--at-frame", slice_frame, "Slice the field at frame T");
  slice->add_option("--cell-size", slice_cell, "Grid spacing in metres (default: finest voxel / 4)");
  add_common(slice, slice_flags);

  // segment
  CommonFlags seg_flags;
  std::string seg_ckpt, seg_data, seg_out, seg_gt, seg_report;
  std::optional<double> seg_threshold;
  auto* segment = app.add_subcommand("segment", "Label every input point static or dynamic");
  segment->add_option("--checkpoint", seg_ckpt, "Trained checkpoint")->required();
  segment->add_option("--data", seg_data, "Dataset directory whose scans are labelled")->required();
  segment->add_option("--out", seg_out, "Output directory for label files")->required();
  segment->add_option("--gt", seg_gt, "Dataset directory holding ground-truth labels/");
  segment->add_option("--d-static", seg_threshold, "Static distance threshold (default: from checkpoint)");
  segment->add_option("--report", seg_report, "Report path (default: <out>/segment_report.txt)");
  add_common(segment, seg_flags);

  // eval
  CommonFlags eval_flags;
  std::string eval_mesh, eval_gt, eval_report;
  double eval_density = kDefaultSurfaceDensity;
  std::vector<double> eval_thresholds = {1.0, 20.0};
  auto* eval = app.add_subcommand("eval", "Compare a mesh against a ground-truth point cloud");
  eval->add_option("--mesh", eval_mesh, "Predicted mesh PLY")->required();
  eval->add_option("--gt", eval_gt, "Ground-truth cloud PLY")->required();
  eval->add_option("--density", eval_density, "Mesh sampling density, points per m^2")->check(CLI::PositiveNumber);
  eval->add_option("--threshold", eval_thresholds, "F-score thresholds in cm (repeatable)");
  eval->add_option("--report", eval_report, "Report path (default: stdout only)");
  add_common(eval, eval_flags);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed()) {
      SceneSpec spec = default_scene_spec();
      if (!synth_scene.empty()) spec = load_scene_spec(synth_scene, spec);
      if (synth_static) spec = static_variant(spec);
      if (synth_flags.seed) spec.seed = *synth_flags.seed;
      if (synth_noise) spec.range_noise = *synth_noise;
      spec.validate();
      const Simulation sim = simulate(spec, effective_workers(synth_flags));
      write_dataset(sim, synth_out);
      write_text_file(fs::path(synth_out) / "scene.txt", scene_spec_to_text(spec));
      std::size_t points = 0;
      std::size_t dynamic = 0;
      for (const auto& f : sim.frames) {
        points += f.labels.size();
        dynamic += static_cast<std::size_t>(std::count(f.labels.begin(), f.labels.end(), PointLabel::kDynamic));
      }
      out << "synth: " << sim.frames.size() << " frames, " << points << " points (" << dynamic << " dynamic), "
          << sim.gt_static.size() << " GT static samples -> " << synth_out << "\n";
      return kExitOk;
    }

    if (train_cmd->parsed()) {
      MapConfig cfg;
      if (!train_config.empty()) cfg = load_config(train_config, cfg);
      apply_overrides(cfg, train_sets);
      if (train_flags.seed) cfg.seed = *train_flags.seed;
      cfg.validate();
      const LoadedDataset data = load_dataset(DatasetLayout{train_data});
      if (data.rejected_points) err << "train: dropped " << data.rejected_points << " non-finite points\n";
      TrainOptions opts;
      opts.workers = effective_workers(train_flags);
      opts.deterministic = train_flags.deterministic;
      if (log_every > 0) {
        opts.on_step = [&](const LossRecord& r) {
          if ((r.step + 1) % log_every != 0 && r.step + 1 != cfg.train_steps) return;
          char buf[200];
          std::snprintf(buf, sizeof(buf), "step %6d  total %.5f  surf %.5f  eik %.5f  free %.5f  certain %.5f\n",
                        r.step + 1, r.loss.total, r.loss.l_surf, r.loss.l_eik, r.loss.l_free, r.loss.l_certain);
          out << buf << std::flush;
        };
      }
      const TrainResult result = train(data.sequence, cfg, opts);
      save_checkpoint(result.model, train_out);
      const fs::path log_path = train_log.empty() ? fs::path(train_out + ".loss.csv") : fs::path(train_log);
      write_loss_log(log_path, result.log);
      out << "train: " << result.surface_samples << " surface, " << result.free_samples << " free, "
          << result.certain_samples << " certain-free samples; " << result.model.grid().vertex_count()
          << " grid vertices -> " << train_out << "\n";
      return kExitOk;
    }

    if (mesh->parsed()) {
      const FieldModel model = load_checkpoint(mesh_ckpt);
      const FieldSelection sel = selection_from(mesh_static, mesh_frame, model);
      const double cell = mesh_cell.value_or(model.config().finest_voxel_size / 2.0);
      if (!(cell > 0.0)) throw ConfigError("--cell-size must be positive");
      const TriangleMesh m = extract_mesh(model, sel, cell, effective_workers(mesh_flags));
      export_ply(m, mesh_out, mesh_binary ? PlyEncoding::kBinaryLittleEndian : PlyEncoding::kAscii);
      out << "mesh: " << m.vertices.size() << " vertices, " << m.triangles.size() << " triangles -> " << mesh_out
          << "\n";
      return kExitOk;
    }

    if (slice->parsed()) {
      const FieldModel model = load_checkpoint(slice_ckpt);
      const FieldSelection sel = selection_from(slice_static, slice_frame, model);
      const double cell = slice_cell.value_or(model.config().finest_voxel_size / 4.0);
      if (!(cell > 0.0)) throw ConfigError("--cell-size must be positive");
      const SliceGrid grid = export_slice(model, parse_slice_axis(slice_axis), slice_coord, sel, cell, slice_clamp,
                                          slice_out, effective_workers(slice_flags));
      out << "slice: " << grid.cols << " x " << grid.rows << " grid -> " << slice_out << "\n";
      return kExitOk;
    }

    if (segment->parsed()) {
      const FieldModel model = load_checkpoint(seg_ckpt);
      const double threshold = seg_threshold.value_or(model.config().d_static);
      const DatasetLayout layout{seg_data};
      const LoadedDataset data = load_dataset(layout);
      const DatasetLayout out_layout{seg_out};
      fs::create_directories(fs::path(seg_out) / "labels");
      std::vector<PointLabel> all_pred;
      std::vector<PointLabel> all_gt;
      for (const auto& scan : data.sequence.scans()) {
        const auto w0 = model.query_static_batch(scan.points_world);
        std::vector<PointLabel> labels(w0.size());
        for (std::size_t i = 0; i < w0.size(); ++i) labels[i] = classify_static_sdf(w0[i], threshold);
        write_labels(out_layout.label_path(scan.frame), labels);
        if (!seg_gt.empty()) {
          auto gt = read_labels(DatasetLayout{seg_gt}.label_path(scan.frame));
          if (gt.size() != labels.size()) {
            throw DataError("frame " + std::to_string(scan.frame) + ": " + std::to_string(gt.size()) +
                            " ground-truth labels for " + std::to_string(labels.size()) + " points");
          }
          all_gt.insert(all_gt.end(), gt.begin(), gt.end());
        }
        all_pred.insert(all_pred.end(), labels.begin(), labels.end());
      }
      const auto dynamic = std::count(all_pred.begin(), all_pred.end(), PointLabel::kDynamic);
      out << "segment: " << all_pred.size() << " points, " << dynamic << " dynamic -> " << seg_out << "/labels\n";
      if (!seg_gt.empty()) {
        const std::string text = format_seg_report(seg_metrics(all_pred, all_gt));
        out << text;
        write_text_file(seg_report.empty() ? fs::path(seg_out) / "segment_report.txt" : fs::path(seg_report), text);
      }
      return kExitOk;
    }

    if (eval->parsed()) {
      const TriangleMesh m = read_ply(eval_mesh);
      const TriangleMesh gt = read_ply(eval_gt);
      const auto pred = sample_mesh_surface(m, eval_density, eval_flags.seed.value_or(0));
      if (pred.empty()) throw DataError("mesh " + eval_mesh + " has no surface area to sample");
      const auto reports = recon_metrics_multi(pred, gt.vertices, eval_thresholds, effective_workers(eval_flags));
      const std::string text = format_recon_report(reports, eval_density);
      out << text;
      if (!eval_report.empty()) write_text_file(eval_report, text);
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace ndf4d
