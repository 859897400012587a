#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "gblend/blend.hpp"
#include "gblend/error_lab.hpp"
#include "gblend/image.hpp"
#include "gblend/io.hpp"
#include "gblend/raster.hpp"
#include "gblend/synth.hpp"

namespace gblend::cli {

namespace fs = std::filesystem;

double parse_scale(const std::string& text) {
  auto to_double = [&](std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
      throw std::invalid_argument("bad scale '" + text + "'");
    return v;
  };
  const std::string_view s = text;
  const auto slash = s.find('/');
  const double v = slash == std::string_view::npos
                       ? to_double(s)
                       : to_double(s.substr(0, slash)) / to_double(s.substr(slash + 1));
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("scale must be positive: '" + text + "'");
  return v;
}

namespace {

struct SceneArgs {
  std::string ply;
  std::string camera;
  std::string synth;
  std::uint64_t seed = 1;
  std::size_t count = 2000;
  std::string scale = "1";
  std::vector<int> crop;
};

struct RenderArgs {
  double epsilon = 1e-4;
  int ss_k = 16;
  int tile = 16;
  std::vector<double> bg{0.0, 0.0, 0.0};
  std::string lowpass = "auto";
  std::string legacy_clamp = "on";
  int threads = 0;
};

void add_scene_options(CLI::App* cmd, SceneArgs& a) {
  cmd->add_option("--ply", a.ply, "Splat PLY file");
  cmd->add_option("--camera", a.camera, "Camera JSON file");
  cmd->add_option("--synth", a.synth, "Synthetic scene instead of files")
      ->check(CLI::IsMember({"two-plane", "checker", "cloud"}));
  cmd->add_option("--seed", a.seed, "Seed for synthetic scenes");
  cmd->add_option("--count", a.count, "Splat count for the cloud scene");
  cmd->add_option("--scale", a.scale, "Resolution/intrinsics factor, e.g. 1/8 or 8");
  cmd->add_option("--crop", a.crop, "x0,y0,w,h sub-rectangle after scaling")->delimiter(',')->expected(4);
}

void add_render_options(CLI::App* cmd, RenderArgs& a) {
  cmd->add_option("--epsilon", a.epsilon, "Transmittance termination threshold")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--ss-k", a.ss_k, "Supersample grid size K (K x K samples)")->check(CLI::PositiveNumber);
  cmd->add_option("--tile", a.tile, "Tile size in pixels")->check(CLI::PositiveNumber);
  cmd->add_option("--bg", a.bg, "Background r,g,b")->delimiter(',')->expected(3);
  cmd->add_option("--lowpass", a.lowpass, "0.3 px^2 covariance floor: auto (center mode only), on, off")
      ->check(CLI::IsMember({"auto", "on", "off"}));
  cmd->add_option("--legacy-clamp", a.legacy_clamp, "Alpha clamps in the scalar modes")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--threads", a.threads, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
}

struct LoadedScene {
  std::vector<Splat3D> splats;
  Camera camera;
};

LoadedScene load_scene(const SceneArgs& a) {
  LoadedScene s;
  if (!a.synth.empty()) {
    if (!a.ply.empty() || !a.camera.empty())
      throw std::invalid_argument("--synth cannot be combined with --ply/--camera");
    SynthScene syn = make_synth_scene(a.synth, a.seed, a.count);
    s.splats = std::move(syn.splats);
    s.camera = syn.camera;
  } else {
    if (a.ply.empty() || a.camera.empty())
      throw std::invalid_argument("need --ply and --camera, or --synth");
    s.splats = load_ply(a.ply);
    s.camera = load_camera(a.camera);
  }
  s.camera = s.camera.scaled(parse_scale(a.scale));
  if (!a.crop.empty()) s.camera = crop_camera(s.camera, a.crop[0], a.crop[1], a.crop[2], a.crop[3]);
  s.camera.validate();
  return s;
}

RenderOptions render_options(const RenderArgs& a) {
  if (!(a.epsilon > 0.0 && a.epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  RenderOptions o;
  o.epsilon = a.epsilon;
  o.supersample_k = a.ss_k;
  o.tile_size = a.tile;
  o.background = {a.bg[0], a.bg[1], a.bg[2]};
  o.threads = a.threads;
  if (a.lowpass == "on") o.lowpass = 0.3;
  if (a.lowpass == "off") o.lowpass = 0.0;
  o.legacy_alpha_clamp = a.legacy_clamp == "on";
  return o;
}

void report_residual(std::ostream& out, const Framebuffer& fb) {
  if (fb.residual.empty()) return;
  const auto [lo, hi] = std::minmax_element(fb.residual.begin(), fb.residual.end());
  double sum = 0.0;
  for (double r : fb.residual) sum += r;
  out << "residual T: min " << *lo << " mean " << sum / static_cast<double>(fb.residual.size())
      << " max " << *hi << '\n';
}

void report_culls(std::ostream& err, const RenderStats& st) {
  if (st.projection.numerical_culls() > 0)
    err << "warning: " << st.projection.numerical_culls() << " splats culled (non-finite "
        << st.projection.non_finite << ", degenerate " << st.projection.degenerate << ")\n";
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

int cmd_render(const SceneArgs& sa, const RenderArgs& ra, const std::string& mode_name,
               const std::string& out_path, const std::string& png_path, std::ostream& out,
               std::ostream& err) {
  const LoadedScene scene = load_scene(sa);
  const BlendMode mode = parse_blend_mode(mode_name);
  RenderStats stats;
  const Framebuffer fb = render(scene.splats, scene.camera, mode, render_options(ra), &stats);
  ensure_parent(out_path);
  write_ppm(out_path, fb);
  if (!png_path.empty()) {
    ensure_parent(png_path);
    write_png(png_path, fb);
  }
  report_culls(err, stats);
  out << "rendered " << fb.width << "x" << fb.height << " mode " << to_string(mode) << ", "
      << stats.projected << " splats, " << stats.seconds << " s\n";
  report_residual(out, fb);
  return 0;
}

int cmd_compare(const SceneArgs& sa, const RenderArgs& ra, const std::string& a_name,
                const std::string& b_name, const std::string& ref_name, int ref_k,
                const std::string& out_dir, std::ostream& out, std::ostream& err) {
  const LoadedScene scene = load_scene(sa);
  const RenderOptions opts = render_options(ra);
  RenderOptions ref_opts = opts;
  ref_opts.supersample_k = ref_k;

  const BlendMode ma = parse_blend_mode(a_name), mb = parse_blend_mode(b_name),
                  mr = parse_blend_mode(ref_name);
  RenderStats st;
  const Framebuffer fa = render(scene.splats, scene.camera, ma, opts, &st);
  report_culls(err, st);
  const Framebuffer fbb = render(scene.splats, scene.camera, mb, opts);
  const Framebuffer fr = render(scene.splats, scene.camera, mr, ref_opts);

  out << "PSNR(" << a_name << ", " << ref_name << ") = " << psnr(fa, fr) << " dB\n";
  out << "PSNR(" << b_name << ", " << ref_name << ") = " << psnr(fbb, fr) << " dB\n";
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_ppm(fs::path(out_dir) / ("diff_" + a_name + ".ppm"), difference_image(fa, fr));
    write_ppm(fs::path(out_dir) / ("diff_" + b_name + ".ppm"), difference_image(fbb, fr));
  }
  return 0;
}

int cmd_sweep(SweepConfig cfg, const std::vector<std::string>& modes, const std::string& out_path,
              std::ostream& out) {
  if (!modes.empty()) {
    cfg.modes.clear();
    for (const std::string& m : modes) cfg.modes.push_back(parse_blend_mode(m));
  }
  const SweepTable table = run_sweep(cfg);
  if (out_path.empty()) {
    write_sweep_csv(out, table);
  } else {
    ensure_parent(out_path);
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + out_path + "' for writing");
    write_sweep_csv(f, table);
    f.close();
    if (!f) throw std::runtime_error("failed writing '" + out_path + "'");
  }
  print_sweep_summary(out, table);
  return 0;
}

int cmd_synth(const std::string& name, std::uint64_t seed, std::size_t count, const std::string& prefix,
              std::ostream& out) {
  const SynthScene scene = make_synth_scene(name, seed, count);
  const fs::path base(prefix);
  ensure_parent(base);
  const fs::path ply = fs::path(prefix + ".ply"), cam = fs::path(prefix + ".json");
  save_ply(ply, scene.splats);
  save_camera(cam, scene.camera);
  out << "wrote " << scene.splats.size() << " splats to " << ply.string() << " and camera to "
      << cam.string() << '\n';
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian splat reference renderer and blending lab", "gblend"};
  app.require_subcommand(1);

  SceneArgs render_scene, compare_scene;
  RenderArgs render_args, compare_args;
  std::string mode = "gb", out_path = "out.ppm", png_path;
  auto* render_cmd = app.add_subcommand("render", "Render one view");
  add_scene_options(render_cmd, render_scene);
  add_render_options(render_cmd, render_args);
  render_cmd->add_option("--mode", mode, "center | integrated | gb | ss")
      ->check(CLI::IsMember({"center", "integrated", "gb", "ss"}));
  render_cmd->add_option("--out", out_path, "Output PPM path");
  render_cmd->add_option("--png", png_path, "Also write a PNG here");

  std::string mode_a = "gb", mode_b = "center", mode_ref = "ss", out_dir;
  int ref_k = 256;
  auto* compare_cmd = app.add_subcommand("compare", "PSNR of two modes against a reference mode");
  add_scene_options(compare_cmd, compare_scene);
  add_render_options(compare_cmd, compare_args);
  const auto modes = CLI::IsMember({"center", "integrated", "gb", "ss"});
  compare_cmd->add_option("--a", mode_a, "First mode")->check(modes);
  compare_cmd->add_option("--b", mode_b, "Second mode")->check(modes);
  compare_cmd->add_option("--ref", mode_ref, "Reference mode")->check(modes);
  compare_cmd->add_option("--ref-k", ref_k, "Supersample K for the reference")->check(CLI::PositiveNumber);
  compare_cmd->add_option("--out", out_dir, "Directory for difference images");

  SweepConfig sweep_cfg;
  std::string sweep_var = "mu_x", sweep_out;
  std::vector<std::string> sweep_modes;
  std::optional<double> sweep_start, sweep_stop, sweep_step;
  auto* sweep_cmd = app.add_subcommand("sweep", "Two-splat transmittance error sweep");
  sweep_cmd->add_option("--var", sweep_var, "mu_x | sigma")->check(CLI::IsMember({"mu_x", "sigma"}));
  sweep_cmd->add_option("--start", sweep_start, "First grid value");
  sweep_cmd->add_option("--stop", sweep_stop, "Last grid value");
  sweep_cmd->add_option("--step", sweep_step, "Grid step (decades when log spaced)");
  sweep_cmd->add_flag("--log", sweep_cfg.log_spaced, "Log-spaced grid");
  sweep_cmd->add_option("--mu-x", sweep_cfg.mu_x, "Fixed mu_x for the sigma sweep");
  sweep_cmd->add_option("--sigma", sweep_cfg.sigma, "Fixed sigma for the mu_x sweep");
  sweep_cmd->add_option("--modes", sweep_modes, "Modes to evaluate")->delimiter(',')->check(modes);
  sweep_cmd->add_option("--ss-k", sweep_cfg.supersample_k, "Supersample K")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--epsilon", sweep_cfg.epsilon, "Termination threshold");
  sweep_cmd->add_option("--threads", sweep_cfg.threads, "Worker threads (0: all cores)");
  sweep_cmd->add_option("--out", sweep_out, "CSV path (default: standard output)");

  std::string synth_name = "two-plane", synth_out = "scene";
  std::uint64_t synth_seed = 1;
  std::size_t synth_count = 2000;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic scene as PLY + camera JSON");
  synth_cmd->add_option("--scene", synth_name, "two-plane | checker | cloud")
      ->check(CLI::IsMember({"two-plane", "checker", "cloud"}));
  synth_cmd->add_option("--seed", synth_seed, "Random seed");
  synth_cmd->add_option("--count", synth_count, "Splat count for the cloud scene");
  synth_cmd->add_option("--out", synth_out, "Output prefix; writes <prefix>.ply and <prefix>.json");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*render_cmd)
      return cmd_render(render_scene, render_args, mode, out_path, png_path, out, err);
    if (*compare_cmd)
      return cmd_compare(compare_scene, compare_args, mode_a, mode_b, mode_ref, ref_k, out_dir, out, err);
    if (*sweep_cmd) {
      if (sweep_var == "sigma") {
        const SweepConfig base = SweepConfig::sigma_sweep();
        sweep_cfg.variable = SweepVar::Sigma;
        if (!sweep_cmd->count("--log")) sweep_cfg.log_spaced = base.log_spaced;
        sweep_cfg.start = base.start;
        sweep_cfg.stop = base.stop;
        sweep_cfg.step = base.step;
      }
      if (sweep_start) sweep_cfg.start = *sweep_start;
      if (sweep_stop) sweep_cfg.stop = *sweep_stop;
      if (sweep_step) sweep_cfg.step = *sweep_step;
      return cmd_sweep(sweep_cfg, sweep_modes, sweep_out, out);
    }
    if (*synth_cmd) return cmd_synth(synth_name, synth_seed, synth_count, synth_out, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace gblend::cli
