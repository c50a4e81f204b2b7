#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tactile/ctnet.hpp"
#include "tactile/dataset.hpp"
#include "tactile/fixtures.hpp"
#include "tactile/policy.hpp"
#include "tactile/scene.hpp"
#include "tactile/signal.hpp"
#include "tactile/svg.hpp"

namespace fs = std::filesystem;
using namespace tactile;

namespace {

// Usage errors detected after parsing (exit code 1).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return in;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

std::vector<ShapeClass> parse_classes(const std::string& s) {
  if (s == "all") return all_shape_classes();
  std::vector<ShapeClass> out;
  for (const auto& name : split(s, ',')) {
    try {
      out.push_back(parse_shape_class(name));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (out.size() < 2) throw UsageError("--classes needs at least 2 classes");
  return out;
}

std::vector<int> parse_widths(const std::string& s) {
  std::vector<int> out;
  for (const auto& tok : split(s, ',')) {
    try {
      out.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw UsageError("--widths: bad entry '" + tok + "'");
    }
  }
  return out;
}

// --- scene selection --------------------------------------------------------------

struct SceneArgs {
  std::string path;
  std::string fixture;
  std::optional<double> ws, hs;
  std::optional<double> d_s;

  void add(CLI::App* cmd) {
    auto* file = cmd->add_option("--scene", path, "Scene file")->check(CLI::ExistingFile);
    auto* fix = cmd->add_option("--fixture", fixture, "Built-in fixture scene")
                    ->check(CLI::IsMember(fixture_names()));
    file->excludes(fix);
    cmd->add_option("--ws", ws, "Task-space width W_S (m); default from the scene [1.0]");
    cmd->add_option("--hs", hs, "Task-space height H_S (m); default from the scene [1.0]");
    cmd->add_option("--d-s", d_s,
                    "Isolation distance D_s for the scene check (m) [2 r_H + 2 contact radius]");
  }

  Scene load(double default_d_s) const {
    if (path.empty() == fixture.empty()) throw UsageError("give exactly one of --scene, --fixture");
    Scene scene = path.empty() ? fixture_scene(fixture) : load_scene(path, d_s.value_or(default_d_s));
    if (ws) scene.task_space.x_max = scene.task_space.x_min + *ws;
    if (hs) scene.task_space.y_max = scene.task_space.y_min + *hs;
    if (ws || hs) check_scene(scene);
    scene.isolation_warning = !validate_isolation(scene, d_s.value_or(default_d_s));
    return scene;
  }
};

// --- explore ------------------------------------------------------------------------

struct ExploreArgs {
  SceneArgs scene;
  std::string policy = "hybrid";
  double budget = 60.0;
  std::uint64_t seed = 0;
  std::string out;
  double r_h = 0.025, gamma = 10.0, f_h = 0.5, dt = 0.01;
  int n_tree = 1000;
  double d_near = 0.10, l_rbf = 0.08, sigma_n = 0.02;
  double contact_radius = kDefaultContactRadius;
  std::string bounce = "directed";
  std::string sensor = "ideal";
  int k_fs = 1;
  double frame_interval = 10.0;
  int svg_size = 800;
  int heatmap_grid = 60;
};

void add_explore(CLI::App& app, ExploreArgs& a) {
  auto* cmd = app.add_subcommand("explore", "Run one exploration episode on a scene");
  a.scene.add(cmd);
  cmd->add_option("--policy", a.policy, "Exploration policy")
      ->check(CLI::IsMember({"hybrid", "pure-os", "line-sweep"}))
      ->capture_default_str();
  cmd->add_option("--budget", a.budget, "Travel budget (m)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--seed", a.seed, "Random seed")->capture_default_str();
  cmd->add_option("--out", a.out, "Output directory")->required();
  cmd->add_option("--r-h", a.r_h, "Limit-cycle radius r_H (m)")->capture_default_str();
  cmd->add_option("--gamma", a.gamma, "Oscillator convergence ratio gamma")->capture_default_str();
  cmd->add_option("--f-h", a.f_h, "Oscillator frequency f_H (Hz)")->capture_default_str();
  cmd->add_option("--dt", a.dt, "Integration step (s)")->capture_default_str();
  cmd->add_option("--n-tree", a.n_tree, "Planning tree size N_tree")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--d-near", a.d_near, "Rewiring radius d_near (m)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--l-rbf", a.l_rbf, "GP kernel lengthscale l_RBF (m)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--sigma-n", a.sigma_n, "GP observation noise sigma_n")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--contact-radius", a.contact_radius, "Sensor contact radius (m)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--bounce", a.bounce, "Recentering rule after a contact")
      ->check(CLI::IsMember({"directed", "binary"}))
      ->capture_default_str();
  cmd->add_option("--sensor", a.sensor, "Contact sensing model")
      ->check(CLI::IsMember({"ideal", "filtered"}))
      ->capture_default_str();
  cmd->add_option("--kfs", a.k_fs, "Probes per extracted contour")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--frame-interval", a.frame_interval,
                  "Travel distance between SVG frames (m); 0 writes only the final frame")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--svg-size", a.svg_size, "SVG size (px)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--heatmap-grid", a.heatmap_grid, "GP heatmap cells per side (0: off)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

std::string contours_scene(const Scene& scene, const EpisodeLog& log) {
  Scene out;
  out.task_space = scene.task_space;
  for (std::size_t i = 0; i < log.objects.size(); ++i) {
    const auto& o = log.objects[i];
    SceneObject so;
    so.id = static_cast<int>(i);
    so.polygon = o.polygon;
    if (!o.probes.empty() && o.probes.front().z > 0.0) {
      so.volume = Prism{o.polygon, o.probes.front().z, {}};
    }
    out.objects.push_back(std::move(so));
  }
  return format_scene(out);
}

void write_frame(const Scene& scene, const EpisodeLog& log, const SvgOptions& base,
                 double distance, const fs::path& path) {
  SvgOptions opt = base;
  char caption[64];
  std::snprintf(caption, sizeof caption, "d=%.2f", distance);
  opt.caption = caption;
  auto out = open_out(path);
  render_svg(scene, &log, opt, out);
}

int run_explore(const ExploreArgs& a) {
  PolicyParams p;
  p.hopf.r_h = a.r_h;
  p.hopf.gamma = a.gamma;
  p.hopf.f_h = a.f_h;
  p.hopf.dt = a.dt;
  try {
    p.hopf.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  p.tos.n_tree = a.n_tree;
  p.tos.d_near = a.d_near;
  p.lengthscale = a.l_rbf;
  p.gp_noise = a.sigma_n;
  p.contact_radius = a.contact_radius;
  p.bounce = a.bounce == "binary" ? BounceMode::Binary : BounceMode::Directed;
  p.sensor = a.sensor == "filtered" ? SensorModel::Filtered : SensorModel::GroundTruth;
  p.k_fs = a.k_fs;

  const double default_d_s = 2.0 * a.r_h + 2.0 * a.contact_radius;
  const Scene scene = a.scene.load(default_d_s);
  if (scene.isolation_warning) {
    std::cerr << "warning: scene objects are closer than D_s = "
              << num(a.scene.d_s.value_or(default_d_s)) << "\n";
  }

  EpisodeLog log;
  if (a.policy == "hybrid") {
    log = run_episode(scene, p, a.budget, a.seed);
  } else if (a.policy == "pure-os") {
    log = run_baseline_pure_os(scene, p, a.budget, a.seed);
  } else {
    log = run_baseline_line_sweep(scene, p, a.budget, a.seed);
  }

  const fs::path dir(a.out);
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "episode.log");
    log.write(out);
  }
  {
    auto out = open_out(dir / "trajectory.csv");
    log.write_trajectory_csv(out);
  }
  {
    auto out = open_out(dir / "contacts.csv");
    log.write_contacts_csv(out);
  }
  {
    auto out = open_out(dir / "metrics.csv");
    log.write_metrics_csv(out);
  }
  {
    auto out = open_out(dir / "contours.txt");
    out << contours_scene(scene, log);
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("frame_", 0) == 0 && entry.path().extension() == ".svg") fs::remove(entry.path());
  }
  SvgOptions svg;
  svg.size_px = a.svg_size;
  svg.heatmap_grid = a.heatmap_grid;
  int frame = 0;
  char name[32];
  if (a.frame_interval > 0.0) {
    for (double d = a.frame_interval; d < log.travel_distance; d += a.frame_interval) {
      std::snprintf(name, sizeof name, "frame_%03d.svg", frame++);
      write_frame(scene, log.snapshot(log.time_at_travel(d)), svg, d, dir / name);
    }
  }
  std::snprintf(name, sizeof name, "frame_%03d.svg", frame);
  write_frame(scene, log, svg, log.travel_distance, dir / name);

  {
    auto out = open_out(dir / "config.txt");
    out << "command explore\n"
        << "scene " << (a.scene.path.empty() ? "fixture:" + a.scene.fixture : a.scene.path) << '\n'
        << "policy " << a.policy << '\n'
        << "budget " << num(a.budget) << '\n'
        << "seed " << a.seed << '\n'
        << "W_S " << num(scene.task_space.width()) << '\n'
        << "H_S " << num(scene.task_space.height()) << '\n'
        << "r_H " << num(a.r_h) << '\n'
        << "gamma " << num(a.gamma) << '\n'
        << "f_H " << num(a.f_h) << '\n'
        << "dt " << num(a.dt) << '\n'
        << "N_tree " << a.n_tree << '\n'
        << "d_near " << num(a.d_near) << '\n'
        << "l_RBF " << num(a.l_rbf) << '\n'
        << "sigma_n " << num(a.sigma_n) << '\n'
        << "D_s " << num(a.scene.d_s.value_or(default_d_s)) << '\n'
        << "contact_radius " << num(a.contact_radius) << '\n'
        << "bounce " << a.bounce << '\n'
        << "sensor " << a.sensor << '\n'
        << "k_fs " << a.k_fs << '\n'
        << "frame_interval " << num(a.frame_interval) << '\n';
  }

  std::cout << "policy " << a.policy << " travel " << num(log.travel_distance) << " end "
            << log.end_reason << " objects " << log.objects.size() << " contacts "
            << log.contacts.size();
  if (!log.metrics.empty()) {
    std::cout << " U_S " << num(log.metrics.back().scene_uncertainty) << " U_C "
              << num(log.metrics.back().contour_uncertainty);
  }
  std::cout << '\n';
  return 0;
}

// --- render -------------------------------------------------------------------------

struct RenderArgs {
  SceneArgs scene;
  std::string log;
  std::string out;
  std::optional<double> distance;
  int svg_size = 800;
  int heatmap_grid = 60;
};

void add_render(CLI::App& app, RenderArgs& a) {
  auto* cmd = app.add_subcommand("render", "Re-render an SVG from an episode.log");
  a.scene.add(cmd);
  cmd->add_option("--log", a.log, "episode.log written by explore")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", a.out, "Output SVG file")->required();
  cmd->add_option("--distance", a.distance, "Render the state at this travel distance (m)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--svg-size", a.svg_size, "SVG size (px)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--heatmap-grid", a.heatmap_grid, "GP heatmap cells per side (0: off)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

int run_render(const RenderArgs& a) {
  const Scene scene = a.scene.load(2.0 * 0.025 + 2.0 * kDefaultContactRadius);
  auto in = open_in(a.log);
  const EpisodeLog full = EpisodeLog::read(in);
  SvgOptions svg;
  svg.size_px = a.svg_size;
  svg.heatmap_grid = a.heatmap_grid;
  if (a.distance) {
    write_frame(scene, full.snapshot(full.time_at_travel(*a.distance)), svg,
                std::min(*a.distance, full.travel_distance), a.out);
  } else {
    write_frame(scene, full, svg, full.travel_distance, a.out);
  }
  return 0;
}

// --- dataset / classifier -----------------------------------------------------------

struct DatasetArgs {
  std::string classes = "all";
  int per_class = 50;
  int k_fs = 1;
  double noise = 0.02;
  std::uint64_t seed = 0;

  void add(CLI::App* cmd) {
    cmd->add_option("--classes", classes,
                    "Comma-separated shape classes or 'all' (circle,square,triangle,pentagram,"
                    "l-shape,s-shape,split-ring,ellipse)")
        ->capture_default_str();
    cmd->add_option("--per-class", per_class, "Samples per class")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--kfs", k_fs, "Probe points per sample")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--noise", noise, "Outline jitter, fraction of the shape scale")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
  }

  DatasetOptions options(std::uint64_t seed_offset = 0) const {
    DatasetOptions o;
    o.classes = parse_classes(classes);
    o.per_class = per_class;
    o.k_fs = k_fs;
    o.noise = noise;
    o.seed = seed + seed_offset;
    return o;
  }
};

struct GenArgs {
  DatasetArgs data;
  std::string out;
};

void add_gen(CLI::App& app, GenArgs& a) {
  auto* cmd = app.add_subcommand("gen-dataset", "Generate a synthetic point-set dataset");
  a.data.add(cmd);
  cmd->add_option("--out", a.out, "Output dataset file")->required();
}

int run_gen(const GenArgs& a) {
  const auto samples = generate_dataset(a.data.options());
  auto out = open_out(a.out);
  write_dataset(samples, out);
  std::cout << "wrote " << samples.size() << " samples to " << a.out << '\n';
  return 0;
}

std::vector<PointSetSample> read_samples(const std::string& path) {
  auto in = open_in(path);
  return read_dataset(in);
}

struct TrainArgs {
  DatasetArgs data;
  std::string train_file, val_file;
  double lr = 1e-4;
  int episodes = 500;
  int batch = 32;
  bool augment = true;
  int decay_every = 0;
  double decay_factor = 0.5;
  std::string widths = "64,128,256";
  int head = 128;
  int eval_every = 1;
  std::string out;
  std::string history;
};

void add_train(CLI::App& app, TrainArgs& a) {
  auto* cmd = app.add_subcommand(
      "train", "Train the point-set classifier (on generated data unless --train-data is given)");
  a.data.add(cmd);
  cmd->add_option("--train-data", a.train_file, "Training dataset file")->check(CLI::ExistingFile);
  cmd->add_option("--val-data", a.val_file,
                  "Validation dataset file (default: generated with seed + 1)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--lr", a.lr, "Adam learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--episodes", a.episodes, "Training episodes (passes over the data)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--batch", a.batch, "Minibatch size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_flag("--augment,!--no-augment", a.augment, "Random rotation augmentation")
      ->capture_default_str();
  cmd->add_option("--decay-every", a.decay_every, "Halve the learning rate every N episodes (0: never)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--decay-factor", a.decay_factor, "Learning-rate decay factor")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--widths", a.widths, "Per-point stage widths")->capture_default_str();
  cmd->add_option("--head", a.head, "Hidden width of the classifier head")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--eval-every", a.eval_every, "Validation accuracy every N episodes")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--out", a.out, "Output model checkpoint")->required();
  cmd->add_option("--history", a.history, "Per-episode history CSV");
}

int run_train(const TrainArgs& a) {
  std::vector<PointSetSample> train_set, val_set;
  const auto opts = a.data.options();
  train_set = a.train_file.empty() ? generate_dataset(opts) : read_samples(a.train_file);
  val_set = a.val_file.empty() && a.train_file.empty() ? generate_dataset(a.data.options(1))
            : a.val_file.empty()                       ? std::vector<PointSetSample>{}
                                                       : read_samples(a.val_file);

  CtNetShape shape;
  shape.widths = parse_widths(a.widths);
  shape.head_hidden = a.head;
  int max_label = 0;
  for (const auto& s : train_set) max_label = std::max(max_label, s.label);
  shape.n_classes = a.train_file.empty() ? static_cast<int>(opts.classes.size()) : max_label + 1;
  try {
    shape.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  CtNetModel model(shape, a.data.seed);
  TrainConfig cfg;
  cfg.learning_rate = a.lr;
  cfg.episodes = a.episodes;
  cfg.batch_size = a.batch;
  cfg.seed = a.data.seed;
  cfg.augment = a.augment;
  cfg.decay_every = a.decay_every;
  cfg.decay_factor = a.decay_factor;
  cfg.eval_every = a.eval_every;
  const auto hist = train(model, train_set, val_set, cfg);
  {
    auto out = open_out(a.out);
    model.save(out);
  }
  if (!a.history.empty()) {
    auto out = open_out(a.history);
    out << "episode,train_loss,train_accuracy,validation_accuracy\n";
    for (const auto& e : hist.episodes) {
      out << e.episode << ',' << num(e.train_loss) << ',' << num(e.train_accuracy) << ','
          << (std::isnan(e.validation_accuracy) ? std::string() : num(e.validation_accuracy))
          << '\n';
    }
  }
  const auto& last = hist.episodes.back();
  std::cout << "episodes " << last.episode << " loss " << num(last.train_loss) << " train_acc "
            << num(accuracy(model, train_set));
  if (!val_set.empty()) std::cout << " val_acc " << num(last.validation_accuracy);
  std::cout << '\n';
  return 0;
}

struct ClassifyArgs {
  std::string model;
  std::string data;
  std::string classes = "all";
  std::optional<int> index;
};

void add_classify(CLI::App& app, ClassifyArgs& a) {
  auto* cmd = app.add_subcommand("classify", "Print class probabilities for dataset samples");
  cmd->add_option("--model", a.model, "Model checkpoint")->required()->check(CLI::ExistingFile);
  cmd->add_option("--data", a.data, "Dataset file with the samples")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--classes", a.classes, "Class names in label order, or 'all'")
      ->capture_default_str();
  cmd->add_option("--index", a.index, "Classify only this sample (0-based)")
      ->check(CLI::NonNegativeNumber);
}

int run_classify(const ClassifyArgs& a) {
  auto in = open_in(a.model);
  const CtNetModel model = CtNetModel::load(in);
  const auto classes = parse_classes(a.classes);
  if (static_cast<int>(classes.size()) != model.shape().n_classes) {
    throw UsageError("--classes lists " + std::to_string(classes.size()) +
                     " classes but the model has " + std::to_string(model.shape().n_classes));
  }
  const auto samples = read_samples(a.data);
  std::size_t first = 0, last = samples.size();
  if (a.index) {
    if (static_cast<std::size_t>(*a.index) >= samples.size()) {
      throw UsageError("--index out of range (" + std::to_string(samples.size()) + " samples)");
    }
    first = static_cast<std::size_t>(*a.index);
    last = first + 1;
  }
  std::cout << "sample,label,predicted";
  for (auto c : classes) std::cout << ",p_" << shape_class_name(c);
  std::cout << '\n';
  for (std::size_t i = first; i < last; ++i) {
    const auto p = model.forward(samples[i]);
    std::size_t best = 0;
    for (std::size_t j = 1; j < p.size(); ++j) {
      if (p[j] > p[best]) best = j;
    }
    const int label = samples[i].label;
    std::cout << i << ','
              << (label >= 0 && label < static_cast<int>(classes.size())
                      ? shape_class_name(classes[label])
                      : std::to_string(label))
              << ',' << shape_class_name(classes[best]);
    for (double v : p) std::cout << ',' << num(v);
    std::cout << '\n';
  }
  return 0;
}

// --- signal demo --------------------------------------------------------------------

struct SignalArgs {
  double duration = 30.0;
  double drift = 0.017 / 30.0;
  std::vector<double> event_times{6.0, 14.0, 22.0};
  double magnitude = 0.01;
  double event_duration = 1.5;
  double noise = 1e-5;
  std::uint64_t seed = 0;
  double hp = 11.3, lp = 31.8, rate = 64.0, threshold = 0.0005;
  std::string out;
};

void add_signal(CLI::App& app, SignalArgs& a) {
  auto* cmd = app.add_subcommand("signal-demo", "Synthesize a barometer trace and filter it");
  cmd->add_option("--duration", a.duration, "Trace length (s)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--drift", a.drift, "Baseline drift (kPa/s)")->capture_default_str();
  cmd->add_option("--events", a.event_times, "Contact onset times (s)")
      ->delimiter(',')
      ->capture_default_str();
  cmd->add_option("--magnitude", a.magnitude, "Contact pressure offset (kPa)")
      ->capture_default_str();
  cmd->add_option("--event-duration", a.event_duration, "Contact duration (s)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--noise", a.noise, "Sensor noise std (kPa)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--seed", a.seed, "Noise seed")->capture_default_str();
  cmd->add_option("--hp", a.hp, "High-pass cutoff (Hz)")->capture_default_str();
  cmd->add_option("--lp", a.lp, "Low-pass cutoff (Hz)")->capture_default_str();
  cmd->add_option("--rate", a.rate, "Sample rate (Hz)")->capture_default_str();
  cmd->add_option("--threshold", a.threshold, "Detection threshold (kPa)")->capture_default_str();
  cmd->add_option("--out", a.out, "Output CSV")->required();
}

int run_signal(const SignalArgs& a) {
  FilterChain chain = [&] {
    try {
      return FilterChain(a.hp, a.lp, a.rate, a.threshold);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }();
  TraceOptions o;
  o.duration = a.duration;
  o.drift_rate = a.drift;
  for (double t : a.event_times) o.events.push_back({t, a.magnitude, a.event_duration});
  o.noise_std = a.noise;
  o.seed = a.seed;
  o.sample_rate = a.rate;
  const auto trace = synthesize_trace(o);
  std::vector<bool> truth(trace.samples.size(), false);
  for (const auto& [s, e] : trace.ground_truth_events) {
    for (std::size_t i = s; i <= e && i < truth.size(); ++i) truth[i] = true;
  }
  auto out = open_out(a.out);
  out << "t,raw,highpass,filtered,contact,event\n";
  int detections = 0;
  bool prev = false;
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    const double f = process_sample(chain, trace.samples[i]);
    const bool hit = f > chain.threshold();
    detections += hit && !prev;
    prev = hit;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.6f,%.9f,%.9g,%.9g,%d,%d\n", static_cast<double>(i) / a.rate,
                  trace.samples[i], chain.last_highpass(), f, hit ? 1 : 0, truth[i] ? 1 : 0);
    out << buf;
  }
  std::cout << "samples " << trace.samples.size() << " events " << trace.ground_truth_events.size()
            << " detections " << detections << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tactile exploration: scene search, contour tracing and shape classification"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  ExploreArgs explore;
  RenderArgs render;
  GenArgs gen;
  TrainArgs train_args;
  ClassifyArgs classify;
  SignalArgs signal;
  add_explore(app, explore);
  add_render(app, render);
  add_gen(app, gen);
  add_train(app, train_args);
  add_classify(app, classify);
  add_signal(app, signal);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "explore") return run_explore(explore);
    if (name == "render") return run_render(render);
    if (name == "gen-dataset") return run_gen(gen);
    if (name == "train") return run_train(train_args);
    if (name == "classify") return run_classify(classify);
    return run_signal(signal);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
