// airway: file-in/file-out pipelines over the airway library.

#include <fnmatch.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "airway/error.hpp"
#include "airway/metrics.hpp"
#include "airway/mhd.hpp"
#include "airway/morphology.hpp"
#include "airway/nnmath.hpp"
#include "airway/parallel.hpp"
#include "airway/preprocess.hpp"
#include "airway/synthgen.hpp"
#include "airway/tree.hpp"
#include "airway/uncertainty.hpp"
#include "airway/volume.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace airway;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr int kGridFormatVersion = 1;

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };
Level g_level = Level::Warn;

void log(Level l, const std::string& msg) {
  static const char* names[] = {"error", "warning", "info", "debug"};
  if (l <= g_level) std::cerr << "airway: " << names[static_cast<int>(l)] << ": " << msg << '\n';
}

int exit_code_for(Errc c) {
  switch (c) {
    case Errc::IoFailure:
    case Errc::MissingHeaderKey:
    case Errc::UnsupportedElementType:
    case Errc::SizeMismatch:
    case Errc::ParseError:
      return 2;
    case Errc::InvalidArgument:
    case Errc::IndexOutOfBounds:
    case Errc::RoleMismatch:
    case Errc::ShapeMismatch:
    case Errc::NonSquarePlane:
    case Errc::NonFiniteInput:
    case Errc::InvalidProbability:
    case Errc::NonPositiveDilation:
    case Errc::OutOfBounds:
      return 3;
    default:
      return 4;
  }
}

Error invalid(const std::string& msg) { return Error(Errc::InvalidArgument, msg); }

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

double parse_double(const std::string& s, const std::string& flag) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) throw invalid(flag + ": not a number: '" + s + "'");
  return v;
}

Dims parse_dims(const std::string& text, const std::string& flag) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) throw invalid(flag + " expects Z,Y,X, got '" + text + "'");
  std::int64_t v[3];
  for (int i = 0; i < 3; ++i) {
    std::size_t used = 0;
    try {
      v[i] = std::stoll(parts[i], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != parts[i].size() || v[i] <= 0) throw invalid(flag + " expects positive integers, got '" + text + "'");
  }
  return {v[0], v[1], v[2]};
}

std::string dims_text(const Dims& d) {
  return std::to_string(d.z) + "," + std::to_string(d.y) + "," + std::to_string(d.x);
}

json dims_json(const Dims& d) { return json::array({d.z, d.y, d.x}); }
Dims json_dims(const json& j) { return {j.at(0).get<std::int64_t>(), j.at(1).get<std::int64_t>(), j.at(2).get<std::int64_t>()}; }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(Errc::IoFailure, "cannot create directory " + dir.string());
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v == 0.0 ? 0.0 : v);
  return buf;
}

// Binary view of a mask file regardless of how it was stored.
Volume as_binary(const Volume& v) {
  switch (v.role()) {
    case Role::Binary:
      return v;
    case Role::Label:
      return foreground(v);
    case Role::Probability:
      return threshold(v, 0.5);
    default:
      throw Error(Errc::RoleMismatch, "expected a mask, got an intensity volume");
  }
}

std::vector<fs::path> mhd_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".mhd") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

struct Global {
  std::uint64_t seed = 0;
  bool seed_given = false;
  unsigned threads = 1;
};

// ---- preprocess / reassemble ----

struct PreprocessArgs {
  std::string in, out_dir, patch = "128,96,144", stride;
  bool normalize = false;
};

void cmd_preprocess(const PreprocessArgs& a) {
  const Dims patch = parse_dims(a.patch, "--patch");
  const Dims stride = a.stride.empty() ? patch : parse_dims(a.stride, "--stride");
  if (stride.z > patch.z || stride.y > patch.y || stride.x > patch.x)
    throw invalid("--stride must not exceed --patch on any axis");

  Volume v = load_volume(a.in);
  if (a.normalize) v = zscore_normalize(v);
  PatchGrid grid = plan_patches(v.shape(), patch, stride);
  grid.pad_value = default_pad_value(v);
  const auto patches = extract_patches(v, grid);

  ensure_dir(a.out_dir);
  char name[32];
  for (std::size_t i = 0; i < patches.size(); ++i) {
    std::snprintf(name, sizeof name, "patch_%04zu.mhd", i);
    save_volume(patches[i], fs::path(a.out_dir) / name);
  }
  json origins = json::array();
  for (const auto& o : grid.origins) origins.push_back({o.z, o.y, o.x});
  const json doc = {{"format_version", kGridFormatVersion},
                    {"full_shape", dims_json(grid.full_shape)},
                    {"patch_shape", dims_json(grid.patch_shape)},
                    {"stride", dims_json(grid.stride)},
                    {"padded_shape", dims_json(grid.padded_shape)},
                    {"pad_value", *grid.pad_value},
                    {"origins", origins},
                    {"spacing", {v.spacing().z, v.spacing().y, v.spacing().x}},
                    {"role", std::string(role_name(v.role()))},
                    {"normalized", a.normalize}};
  write_text(fs::path(a.out_dir) / "grid.json", doc.dump(2) + "\n");
  log(Level::Info, std::to_string(patches.size()) + " patches of " + dims_text(patch));
}

struct ReassembleArgs {
  std::string grid, in_dir, out;
};

void cmd_reassemble(const ReassembleArgs& a) {
  PatchGrid grid;
  Spacing spacing;
  std::optional<Role> role;
  try {
    const json j = json::parse(read_text(a.grid));
    if (j.at("format_version").get<int>() != kGridFormatVersion) throw Error(Errc::ParseError, "unsupported grid.json format_version");
    grid.full_shape = json_dims(j.at("full_shape"));
    grid.patch_shape = json_dims(j.at("patch_shape"));
    grid.stride = json_dims(j.at("stride"));
    grid.padded_shape = json_dims(j.at("padded_shape"));
    grid.pad_value = j.at("pad_value").get<double>();
    for (const auto& o : j.at("origins"))
      grid.origins.push_back({o.at(0).get<std::int64_t>(), o.at(1).get<std::int64_t>(), o.at(2).get<std::int64_t>()});
    const auto& s = j.at("spacing");
    spacing = {s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()};
    if (j.contains("role")) role = parse_role(j.at("role").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("grid.json: ") + e.what());
  }

  std::vector<Volume> patches;
  char name[32];
  for (std::size_t i = 0; i < grid.origins.size(); ++i) {
    std::snprintf(name, sizeof name, "patch_%04zu.mhd", i);
    patches.push_back(load_volume(fs::path(a.in_dir) / name, role));
  }
  Volume v = reassemble(patches, grid);
  v.set_spacing(spacing);
  save_volume(v, a.out);
}

// ---- augment ----

struct AugmentArgs {
  std::string in, out;
};

double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void cmd_augment(const AugmentArgs& a, const Global& g) {
  Volume v = load_volume(a.in);
  std::mt19937_64 rng(g.seed);
  for (Axis ax : {Axis::Z, Axis::Y, Axis::X}) {
    if (unit_draw(rng) < 0.5) v = flip(v, ax);
  }
  const int k = static_cast<int>(rng() % 4);
  if (k != 0 && v.shape().y == v.shape().x) v = rotate90(v, Axis::Z, k);
  const double factor = 0.9 + 0.2 * unit_draw(rng);
  if (v.role() == Role::Intensity) v = scale_values(v, factor);
  save_volume(v, a.out);
}

// ---- postprocess / skeletonize / branches ----

struct PostprocessArgs {
  std::string in, out;
  int connectivity = 26;
};

void cmd_postprocess(const PostprocessArgs& a) {
  const Connectivity conn = connectivity_from_int(a.connectivity);
  const Volume mask = as_binary(load_volume(a.in));
  if (mask.count_nonzero() == 0) {
    log(Level::Warn, "input mask is empty; writing an empty mask");
    save_volume(mask, a.out);
    return;
  }
  save_volume(keep_largest_component(mask, conn), a.out);
}

struct SkeletonizeArgs {
  std::string in, out;
};

void cmd_skeletonize(const SkeletonizeArgs& a) { save_volume(skeletonize(as_binary(load_volume(a.in))), a.out); }

struct BranchesArgs {
  std::string in, root = "min-z", labels_out, table_out;
  bool break_loops = false;
};

void cmd_branches(const BranchesArgs& a) {
  const RootPolicy root = parse_root_policy(a.root);
  if (a.labels_out.empty() && a.table_out.empty()) throw invalid("branches: give --labels-out and/or --table-out");
  const Volume mask = as_binary(load_volume(a.in));
  SkeletonGraph graph = build_skeleton_graph(skeletonize(mask));
  if (a.break_loops) graph = break_cycles(std::move(graph));
  const BranchTable table = decompose_branches(graph, mask.spacing(), root);
  if (!a.table_out.empty()) write_text(a.table_out, branch_table_to_json(table));
  if (!a.labels_out.empty()) save_volume(label_branches(mask, table), a.labels_out);
  const TreeStats st = tree_stats(table);
  std::cout << "branches " << st.branch_count << "\nlength_mm " << fmt6(st.total_length_mm) << "\nmax_generation "
            << st.max_generation << '\n';
}

// ---- evaluate ----

struct EvaluateArgs {
  std::string pred, gt, csv, json_out;
  double threshold = 0.5, theta = 0.8;
  bool postprocess = false;
  int connectivity = 26;
};

void cmd_evaluate(const EvaluateArgs& a) {
  if (!(a.threshold >= 0.0 && a.threshold <= 1.0)) throw invalid("--threshold must lie in [0,1]");
  if (!(a.theta >= 0.0 && a.theta <= 1.0)) throw invalid("--theta must lie in [0,1]");
  EvaluateOptions opts;
  opts.threshold = a.threshold;
  opts.theta = a.theta;
  opts.postprocess = a.postprocess;
  opts.connectivity = connectivity_from_int(a.connectivity);

  struct Case {
    std::string id;
    fs::path pred, gt;
  };
  std::vector<Case> cases;
  if (!fs::exists(a.pred)) throw Error(Errc::IoFailure, "no such file or directory: " + a.pred);
  if (!fs::exists(a.gt)) throw Error(Errc::IoFailure, "no such file or directory: " + a.gt);
  if (fs::is_directory(a.pred) != fs::is_directory(a.gt)) throw invalid("--pred and --gt must both be files or both be directories");
  if (fs::is_directory(a.pred)) {
    std::map<std::string, fs::path> preds, gts;
    for (const auto& p : mhd_files(a.pred)) preds[p.stem().string()] = p;
    for (const auto& p : mhd_files(a.gt)) gts[p.stem().string()] = p;
    for (const auto& [stem, path] : preds)
      if (!gts.count(stem)) throw invalid("prediction " + path.string() + " has no ground truth");
    for (const auto& [stem, path] : gts)
      if (!preds.count(stem)) throw invalid("ground truth " + path.string() + " has no prediction");
    for (const auto& [stem, path] : preds) cases.push_back({stem, path, gts[stem]});
    if (cases.empty()) throw Error(Errc::EmptyList, "no .mhd cases in " + a.pred);
  } else {
    cases.push_back({fs::path(a.pred).stem().string(), a.pred, a.gt});
  }

  std::vector<MetricsReport> reports(cases.size());
  parallel_for(cases.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      Volume pred = load_volume(cases[i].pred);
      if (pred.role() == Role::Label) pred = foreground(pred);
      reports[i] = evaluate_case(pred, as_binary(load_volume(cases[i].gt)), opts, cases[i].id);
    }
  });

  const AggregateReport agg = aggregate_reports(reports);
  if (!a.csv.empty()) write_text(a.csv, reports_to_csv(reports));
  if (!a.json_out.empty()) write_text(a.json_out, aggregate_to_json(agg, a.theta));
  std::cout << format_summary(agg);
}

// ---- uncertainty ----

struct UncertaintyArgs {
  std::string pred_glob, out_dir;
  std::optional<double> tau;
};

std::vector<fs::path> expand_glob(const std::string& pattern) {
  const fs::path p(pattern);
  const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
  const std::string name = p.filename().string();
  if (!fs::is_directory(dir)) throw Error(Errc::IoFailure, "no such directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    if (fnmatch(name.c_str(), e.path().filename().c_str(), FNM_PERIOD) == 0) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void cmd_uncertainty(const UncertaintyArgs& a) {
  if (a.tau && *a.tau < 0.0) throw invalid("--tau must be non-negative");
  const auto files = expand_glob(a.pred_glob);
  if (files.empty()) throw Error(Errc::EmptyStack, "no files match " + a.pred_glob);
  PredictionStack stack;
  for (const auto& f : files) {
    Volume v = load_volume(f);
    if (v.role() != Role::Probability && v.role() != Role::Binary) v.set_role(Role::Probability);
    stack.preds.push_back(std::move(v));
  }
  const UncertaintySummary s = aggregate(stack);
  ensure_dir(a.out_dir);
  save_volume(s.mean, fs::path(a.out_dir) / "mean.mhd");
  save_volume(s.variance, fs::path(a.out_dir) / "var.mhd");
  double sum = 0.0, mx = 0.0;
  for (std::size_t i = 0; i < s.variance.size(); ++i) {
    sum += s.variance[i];
    mx = std::max(mx, s.variance[i]);
  }
  const double mean_var = s.variance.size() ? sum / static_cast<double>(s.variance.size()) : 0.0;
  const json doc = {{"n_drop", stack.n_drop()}, {"mean_variance", mean_var}, {"max_variance", mx}};
  write_text(fs::path(a.out_dir) / "summary.json", doc.dump(2) + "\n");
  if (a.tau) save_volume(uncertainty_mask(s, *a.tau), fs::path(a.out_dir) / "uncertain.mhd");
}

// ---- loss ----

struct LossArgs {
  std::string pred, gt_labels, weights = "0.2,0.2,0.3,0.3", mode = "per-branch", variant = "skeleton", json_out;
  double threshold = 0.5, smooth = 1e-6;
};

void cmd_loss(const LossArgs& a) {
  const auto parts = split(a.weights, ',');
  if (parts.size() != 4) throw invalid("--weights expects w1,w2,w3,w4, got '" + a.weights + "'");
  LossWeights w{parse_double(parts[0], "--weights"), parse_double(parts[1], "--weights"),
                parse_double(parts[2], "--weights"), parse_double(parts[3], "--weights")};
  w.validate();
  BranchLossMode mode;
  if (a.mode == "per-branch") mode = BranchLossMode::PerBranchMean;
  else if (a.mode == "global") mode = BranchLossMode::Global;
  else throw invalid("--mode must be per-branch or global");
  CenterlineVariant variant;
  if (a.variant == "skeleton") variant = CenterlineVariant::SkeletonProduct;
  else if (a.variant == "recall") variant = CenterlineVariant::CenterlineRecall;
  else throw invalid("--variant must be skeleton or recall");
  if (!(a.smooth > 0.0)) throw invalid("--smooth must be positive");

  Volume pred = load_volume(a.pred);
  if (pred.role() == Role::Intensity) pred.set_role(Role::Probability);
  Volume labels = load_volume(a.gt_labels);
  if (labels.role() == Role::Probability) labels = threshold(labels, 0.5);
  const Volume gt = foreground(labels);

  const Smooth s{a.smooth};
  const double ld = dice_loss(pred, gt, s);
  const double lb = bce_loss(pred, gt);
  const double lbr = branch_loss(pred, labels, s, mode);
  const double lc = centerline_loss(pred, labels, a.threshold, s, variant);
  const double total = total_loss(ld, lb, lbr, lc, w);
  std::cout << "dice " << fmt6(ld) << "\nbce " << fmt6(lb) << "\nbranch " << fmt6(lbr) << "\ncenterline " << fmt6(lc)
            << "\ntotal " << fmt6(total) << '\n';
  if (!a.json_out.empty()) {
    const json doc = {{"dice", ld}, {"bce", lb}, {"branch", lbr}, {"centerline", lc}, {"total", total},
                      {"weights", {w.dice, w.bce, w.branch, w.centerline}}};
    write_text(a.json_out, doc.dump(2) + "\n");
  }
}

// ---- synth ----

struct SynthArgs {
  std::string spec, out_dir;
};

void cmd_synth(const SynthArgs& a, const Global& g) {
  TreeSpec spec = a.spec.empty() ? TreeSpec{} : tree_spec_from_json(read_text(a.spec));
  if (g.seed_given) spec.seed = g.seed;
  const SyntheticTree t = generate_tree(spec);
  ensure_dir(a.out_dir);
  save_volume(t.mask, fs::path(a.out_dir) / "mask.mhd");
  save_volume(t.centerline, fs::path(a.out_dir) / "centerline.mhd");
  write_text(fs::path(a.out_dir) / "table.json", branch_table_to_json(t.table));
  std::cout << "branches " << t.table.size() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Airway tree segmentation analysis toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("airway ") + kVersion + " (grid.json format " +
                                        std::to_string(kGridFormatVersion) + ", table.json format " +
                                        std::to_string(kTableFormatVersion) + ")");

  Global g;
  std::string level = "warning";
  auto* seed_opt = app.add_option("--seed", g.seed, "Seed for stochastic steps")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads, 0 = all cores")->capture_default_str();
  app.add_option("--log-level", level, "error, warning, info or debug")
      ->check(CLI::IsMember({"error", "warning", "info", "debug"}))
      ->capture_default_str();
  app.fallthrough();

  PreprocessArgs pre;
  auto* c_pre = app.add_subcommand("preprocess", "Split a volume into patches");
  c_pre->add_option("--in", pre.in)->required();
  c_pre->add_option("--out-dir", pre.out_dir)->required();
  c_pre->add_option("--patch", pre.patch, "Patch extent Z,Y,X")->capture_default_str();
  c_pre->add_option("--stride", pre.stride, "Window stride Z,Y,X (default: patch)");
  c_pre->add_flag("--normalize", pre.normalize, "z-score the intensities first");

  ReassembleArgs re;
  auto* c_re = app.add_subcommand("reassemble", "Rebuild a volume from patches");
  c_re->add_option("--grid", re.grid)->required();
  c_re->add_option("--in-dir", re.in_dir)->required();
  c_re->add_option("--out", re.out)->required();

  AugmentArgs aug;
  auto* c_aug = app.add_subcommand("augment", "Seeded random flip, rotation and intensity scaling");
  c_aug->add_option("--in", aug.in)->required();
  c_aug->add_option("--out", aug.out)->required();

  PostprocessArgs post;
  auto* c_post = app.add_subcommand("postprocess", "Keep the largest connected component");
  c_post->add_option("--in", post.in)->required();
  c_post->add_option("--out", post.out)->required();
  c_post->add_option("--connectivity", post.connectivity)->check(CLI::IsMember({6, 18, 26}))->capture_default_str();

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "DSC, precision, TD and BD against ground truth");
  c_ev->add_option("--pred", ev.pred, "Prediction file or directory")->required();
  c_ev->add_option("--gt", ev.gt, "Ground-truth file or directory")->required();
  c_ev->add_option("--threshold", ev.threshold)->capture_default_str();
  c_ev->add_flag("--postprocess", ev.postprocess, "Keep only the largest component of the prediction");
  c_ev->add_option("--connectivity", ev.connectivity)->check(CLI::IsMember({6, 18, 26}))->capture_default_str();
  c_ev->add_option("--theta", ev.theta, "Branch detection coverage")->capture_default_str();
  c_ev->add_option("--csv", ev.csv);
  c_ev->add_option("--json", ev.json_out);

  UncertaintyArgs un;
  double tau = 0.0;
  auto* c_un = app.add_subcommand("uncertainty", "Mean and variance of repeated predictions");
  c_un->add_option("--pred-glob", un.pred_glob)->required();
  c_un->add_option("--out-dir", un.out_dir)->required();
  auto* tau_opt = c_un->add_option("--tau", tau, "Also write uncertain.mhd where variance > tau");

  SkeletonizeArgs sk;
  auto* c_sk = app.add_subcommand("skeletonize", "Thin a mask to its centerline");
  c_sk->add_option("--in", sk.in)->required();
  c_sk->add_option("--out", sk.out)->required();

  BranchesArgs br;
  auto* c_br = app.add_subcommand("branches", "Decompose a mask into labeled branches");
  c_br->add_option("--in", br.in)->required();
  c_br->add_option("--root", br.root, "min-z, max-z or z,y,x")->capture_default_str();
  c_br->add_option("--labels-out", br.labels_out);
  c_br->add_option("--table-out", br.table_out);
  c_br->add_flag("--break-cycles", br.break_loops, "Cut loops at their highest-betweenness edge");

  LossArgs lo;
  auto* c_lo = app.add_subcommand("loss", "Combined segmentation loss");
  c_lo->add_option("--pred", lo.pred)->required();
  c_lo->add_option("--gt-labels", lo.gt_labels)->required();
  c_lo->add_option("--weights", lo.weights)->capture_default_str();
  c_lo->add_option("--mode", lo.mode, "per-branch or global")->capture_default_str();
  c_lo->add_option("--variant", lo.variant, "skeleton or recall")->capture_default_str();
  c_lo->add_option("--threshold", lo.threshold)->capture_default_str();
  c_lo->add_option("--smooth", lo.smooth)->capture_default_str();
  c_lo->add_option("--json", lo.json_out);

  SynthArgs sy;
  auto* c_sy = app.add_subcommand("synth", "Generate a synthetic tube tree");
  c_sy->add_option("--spec", sy.spec, "TreeSpec JSON (default parameters when omitted)");
  c_sy->add_option("--out-dir", sy.out_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  if (level == "error") g_level = Level::Error;
  else if (level == "info") g_level = Level::Info;
  else if (level == "debug") g_level = Level::Debug;
  g.seed_given = seed_opt->count() > 0;
  set_num_threads(g.threads);
  if (tau_opt->count() > 0) un.tau = tau;

  try {
    if (*c_pre) cmd_preprocess(pre);
    else if (*c_re) cmd_reassemble(re);
    else if (*c_aug) cmd_augment(aug, g);
    else if (*c_post) cmd_postprocess(post);
    else if (*c_ev) cmd_evaluate(ev);
    else if (*c_un) cmd_uncertainty(un);
    else if (*c_sk) cmd_skeletonize(sk);
    else if (*c_br) cmd_branches(br);
    else if (*c_lo) cmd_loss(lo);
    else if (*c_sy) cmd_synth(sy, g);
  } catch (const Error& e) {
    log(Level::Error, e.what());
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    log(Level::Error, e.what());
    return 2;
  } catch (const std::exception& e) {
    log(Level::Error, e.what());
    return 4;
  }
  return 0;
}
