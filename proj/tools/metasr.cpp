// metasr: command-line front end for degradation, PCA fitting, training,
// evaluation, super-resolution and comparison panels.

#include "manifest.hpp"
#include "panel.hpp"

#include "metasr/degrade.hpp"
#include "metasr/error.hpp"
#include "metasr/io.hpp"
#include "metasr/meta_encode.hpp"
#include "metasr/metrics.hpp"
#include "metasr/srnet.hpp"
#include "metasr/synth.hpp"
#include "metasr/trainer.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace metasr;
using metasr::cli::RunManifest;

namespace {

constexpr const char* kSidecarName = "degradations.jsonl";
constexpr const char* kBasisName = "basis.pca";

struct Common {
  std::uint64_t seed = 0;
  int scale = 4;
  std::string protocol = "blur";
  std::string layout = "kernel-pca";
  int crop = -1;
  std::string color = "luma";
};

std::vector<fs::path> list_pngs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigurationError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (entry.is_regular_file() && ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

/// Options that were given (on the command line, from the config file, or
/// by default) for the root and the active subcommand.
nlohmann::json resolved_config(const CLI::App& root, const CLI::App& sub) {
  nlohmann::json j = nlohmann::json::object();
  auto record = [&](const CLI::App& app) {
    for (const CLI::Option* opt : app.get_options()) {
      if (opt->get_lnames().empty()) continue;
      const std::string& name = opt->get_lnames().front();
      if (name == "help" || name == "config" || name == "version") continue;
      if (opt->count() > 0) {
        const auto& results = opt->results();
        if (opt->get_type_size() == 0) {
          j[name] = true;
        } else if (results.size() == 1) {
          j[name] = results.front();
        } else {
          j[name] = results;
        }
      } else if (opt->get_type_size() == 0) {
        j[name] = false;
      } else {
        j[name] = opt->get_default_str();
      }
    }
  };
  record(root);
  record(sub);
  return j;
}

std::optional<PCABasis> load_optional_basis(const std::string& path, RunManifest& manifest) {
  if (path.empty()) return std::nullopt;
  manifest.add_input(path);
  return load_basis(path);
}

std::map<std::string, DegradationRecord> records_by_name(const fs::path& sidecar) {
  std::map<std::string, DegradationRecord> out;
  for (auto& r : read_sidecar(sidecar)) out.emplace(r.source, r);
  return out;
}

/// The basis a checkpoint needs, or none for layouts without kernel codes.
/// Falls back to basis.pca next to the checkpoint.
std::optional<PCABasis> basis_for(const Checkpoint& ck, const fs::path& ckpt_path, std::string basis_path,
                                  RunManifest& manifest) {
  if (!ck.network.config.meta_enabled || !layout_uses_kernel(ck.network.config.layout)) return std::nullopt;
  if (basis_path.empty()) {
    const fs::path beside = ckpt_path.parent_path() / kBasisName;
    if (!fs::exists(beside)) throw ConfigurationError("checkpoint needs a PCA basis; pass --basis");
    basis_path = beside.string();
  }
  std::optional<PCABasis> basis = load_optional_basis(basis_path, manifest);
  if (ck.pca_digest && basis_digest(*basis) != *ck.pca_digest) {
    throw ConfigurationError("PCA basis digest mismatch: checkpoint expects " + *ck.pca_digest + ", " + basis_path +
                             " has " + basis_digest(*basis));
  }
  return basis;
}

std::optional<MetadataVector> metadata_for(const Network& net, const std::optional<DegradationRecord>& record,
                                           const std::optional<PCABasis>& basis, const std::string& name) {
  if (!net.config.meta_enabled) return std::nullopt;
  if (!record) throw ConfigurationError("no degradation record for '" + name + "'");
  return encode_metadata(*record, layout_uses_kernel(net.config.layout) ? &*basis : nullptr, net.config.layout);
}

/// HR trimmed to the SR extent, which is how degrade cropped it.
ImageBuffer align_hr(const ImageBuffer& hr, const ImageBuffer& sr) {
  if (hr.height() < sr.height() || hr.width() < sr.width()) {
    throw ConfigurationError("HR image is smaller than the super-resolved output");
  }
  return crop(hr, 0, 0, sr.height(), sr.width());
}

// Commands -------------------------------------------------------------------

struct SynthArgs {
  std::string out;
  int count = 8;
  int height = 256;
  int width = 256;
  std::uint64_t first = 0;
};

int cmd_synth(const SynthArgs& a, const Common& c, RunManifest& m) {
  fs::create_directories(a.out);
  m.seed = c.seed;
  for (int i = 0; i < a.count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "scene_%04d.png", i);
    const fs::path path = fs::path(a.out) / name;
    write_png(path, synthetic_scene(a.height, a.width, c.seed * 1000003ULL + a.first + static_cast<std::uint64_t>(i)));
    m.add_output(path);
  }
  m.write(fs::path(a.out) / "manifest.json");
  return 0;
}

struct PcaArgs {
  std::string out = kBasisName;
  std::int64_t count = 10000;
  double sigma_min = kSigmaMin;
  double sigma_max = kSigmaMax;
  int components = kPcaComponents;
};

int cmd_pca_fit(const PcaArgs& a, const Common& c, RunManifest& m) {
  m.seed = c.seed;
  const PCABasis basis = pca_fit(kernel_corpus(a.count, c.seed, a.sigma_min, a.sigma_max), a.components,
                                 {a.count, a.sigma_min, a.sigma_max, c.seed});
  save_basis(a.out, basis);
  m.add_output(a.out);
  m.config["explained_ratio"] = basis.explained_ratio();
  m.config["digest"] = basis_digest(basis);
  m.write(a.out + ".manifest.json");
  std::cout << "explained variance ratio " << format_metric(basis.explained_ratio()) << ", digest "
            << basis_digest(basis) << '\n';
  return 0;
}

struct DegradeArgs {
  std::string hr;
  std::string out;
};

int cmd_degrade(const DegradeArgs& a, const Common& c, RunManifest& m) {
  const Protocol protocol = parse_protocol(c.protocol);
  const auto files = list_pngs(a.hr);
  if (files.empty()) throw ConfigurationError("no PNG files in " + a.hr);
  fs::create_directories(a.out);
  std::vector<std::string> names;
  for (const auto& f : files) names.push_back(f.filename().string());
  // Records are drawn for every file up front so a failure does not shift
  // the draws of the files after it.
  const auto records = draw_records(names, protocol, c.scale, c.seed);
  std::vector<DegradationRecord> written;
  m.seed = c.seed;
  for (std::size_t i = 0; i < files.size(); ++i) {
    try {
      m.add_input(files[i]);
      const ImageBuffer hr = read_png(files[i]);
      const fs::path out = fs::path(a.out) / names[i];
      write_png(out, degrade_image(hr, records[i]).first);
      m.add_output(out);
      written.push_back(records[i]);
    } catch (const std::exception& e) {
      m.add_error(files[i].string(), e.what());
    }
  }
  const fs::path sidecar = fs::path(a.out) / kSidecarName;
  write_sidecar(sidecar, written);
  m.add_output(sidecar);
  m.write(fs::path(a.out) / "manifest.json");
  return m.ok() ? 0 : 1;
}

struct TrainArgs {
  std::string train_lr, train_hr, train_sidecar;
  std::string val_lr, val_hr, val_sidecar;
  std::string out;
  std::string basis;
  bool meta = false;
  int channels = 16;
  int blocks = 4;
  int hidden = 0;
  TrainConfig train;
};

Dataset load_split(const std::string& lr, const std::string& hr, std::string sidecar,
                   std::optional<MetadataLayout> layout, const PCABasis* basis, RunManifest& m) {
  if (sidecar.empty()) sidecar = (fs::path(lr) / kSidecarName).string();
  m.add_input(sidecar);
  Dataset d = load_dataset(lr, hr, sidecar, layout, basis);
  for (const auto& s : d.samples) m.add_input(fs::path(lr) / s.name);
  return d;
}

int cmd_train(TrainArgs a, const Common& c, RunManifest& m) {
  NetworkConfig cfg;
  cfg.channels = a.channels;
  cfg.n_blocks = a.blocks;
  cfg.scale = c.scale;
  cfg.meta_enabled = a.meta;
  cfg.layout = parse_layout(c.layout);
  cfg.hidden = a.hidden;
  cfg.validate();
  a.train.seed = c.seed;
  a.train.crop = c.crop;
  a.train.color = parse_color(c.color);
  m.seed = c.seed;

  std::optional<PCABasis> basis;
  if (a.meta && layout_uses_kernel(cfg.layout)) {
    if (a.basis.empty()) throw ConfigurationError("--basis is required for layout " + c.layout);
    basis = load_optional_basis(a.basis, m);
  }
  const std::optional<MetadataLayout> layout = a.meta ? std::optional(cfg.layout) : std::nullopt;
  const PCABasis* bp = basis ? &*basis : nullptr;
  const Dataset train_set = load_split(a.train_lr, a.train_hr, a.train_sidecar, layout, bp, m);
  const Dataset val_set = load_split(a.val_lr, a.val_hr, a.val_sidecar, layout, bp, m);
  for (const Dataset* d : {&train_set, &val_set})
    for (const auto& s : d->samples)
      if (s.record && s.record->scale != c.scale) {
        throw ConfigurationError("'" + s.name + "' was degraded at scale " + std::to_string(s.record->scale) +
                                 ", training at " + std::to_string(c.scale));
      }

  fs::create_directories(a.out);
  const TrainResult r = train(build_network(cfg, c.seed), train_set, val_set, a.train, [](const TraceRow& row) {
    std::cerr << "epoch " << row.epoch << " lr " << row.lr << " loss " << row.train_loss;
    if (row.val_psnr) std::cerr << " val_psnr " << *row.val_psnr << " val_ssim " << *row.val_ssim;
    std::cerr << '\n';
  });
  const fs::path out(a.out);
  save_checkpoint(out / "best.ckpt", r.best);
  Checkpoint last{clone_network(r.final_network), a.train.epochs,
                  r.trace.back().val_psnr.value_or(std::numeric_limits<double>::quiet_NaN()), r.best.pca_digest};
  save_checkpoint(out / "final.ckpt", last);
  write_trace_csv(out / "trace.csv", r.trace);
  for (const char* f : {"best.ckpt", "final.ckpt", "trace.csv"}) m.add_output(out / f);
  if (basis) {
    save_basis(out / kBasisName, *basis);
    m.add_output(out / kBasisName);
  }
  m.config["best_epoch"] = r.best.epoch;
  m.config["best_val_psnr"] = r.best.val_psnr;
  m.write(out / "manifest.json");
  std::cout << "best validation PSNR " << format_metric(r.best.val_psnr) << " dB at epoch " << r.best.epoch << '\n';
  return 0;
}

struct EvalArgs {
  std::string model;
  std::string lr, hr, sidecar;
  std::string basis;
  std::string out = "report.csv";
  std::string dataset;
};

struct Model {
  std::optional<Checkpoint> checkpoint;  // empty for bicubic
  std::optional<PCABasis> basis;
  std::string name;

  ImageBuffer run(const ImageBuffer& lr, const std::optional<DegradationRecord>& record, int scale,
                  const std::string& image_name) const {
    if (!checkpoint) return quantize(bicubic_resize(lr, {scale, 1}));
    const auto meta = metadata_for(checkpoint->network, record, basis, image_name);
    return super_resolve(checkpoint->network, lr, meta ? &*meta : nullptr);
  }
  int scale(int fallback) const { return checkpoint ? checkpoint->network.config.scale : fallback; }
  std::int64_t params() const { return checkpoint ? checkpoint->network.parameter_count() : 0; }
};

Model load_model(const std::string& ref, const std::string& basis, RunManifest& m) {
  Model model;
  model.name = ref;
  if (ref == "bicubic") return model;
  m.add_input(ref);
  model.checkpoint = load_checkpoint(ref);
  model.basis = basis_for(*model.checkpoint, ref, basis, m);
  model.name = fs::path(ref).stem().string();
  return model;
}

int cmd_eval(const EvalArgs& a, const Common& c, RunManifest& m) {
  const Model model = load_model(a.model, a.basis, m);
  const fs::path sidecar = a.sidecar.empty() ? fs::path(a.lr) / kSidecarName : fs::path(a.sidecar);
  std::map<std::string, DegradationRecord> records;
  std::vector<std::string> names;
  if (fs::exists(sidecar)) {
    m.add_input(sidecar);
    for (auto& [name, r] : records_by_name(sidecar)) {
      names.push_back(name);
      records.emplace(name, r);
    }
  } else {
    if (model.checkpoint && model.checkpoint->network.config.meta_enabled) {
      throw ConfigurationError("meta checkpoints need a sidecar; none at " + sidecar.string());
    }
    for (const auto& f : list_pngs(a.lr)) names.push_back(f.filename().string());
  }
  const int scale = model.scale(c.scale);
  if (model.checkpoint && model.checkpoint->network.config.meta_enabled) {
    for (const auto& [name, r] : records) {
      if (r.scale != scale) throw ConfigurationError("'" + name + "' has scale " + std::to_string(r.scale));
    }
  }
  const int crop_border = c.crop >= 0 ? c.crop : scale;
  const ColorMode color = parse_color(c.color);
  MetricReport report{model.name, model.params(), a.dataset.empty() ? fs::path(a.lr).filename().string() : a.dataset,
                      crop_border, color, {}};
  for (const auto& name : names) {
    try {
      const fs::path lr_path = fs::path(a.lr) / name, hr_path = fs::path(a.hr) / name;
      m.add_input(lr_path);
      m.add_input(hr_path);
      const auto it = records.find(name);
      const std::optional<DegradationRecord> record =
          it == records.end() ? std::nullopt : std::optional<DegradationRecord>(it->second);
      const ImageBuffer sr = model.run(read_png(lr_path), record, scale, name);
      const PairMetrics pm = evaluate_pair(sr, align_hr(read_png(hr_path), sr), crop_border, color);
      report.images.push_back({name, pm.psnr, pm.ssim});
    } catch (const ConfigurationError&) {
      throw;
    } catch (const std::exception& e) {
      m.add_error(name, e.what());
    }
  }
  write_report_csv(a.out, report);
  m.add_output(a.out);
  m.write(a.out + ".manifest.json");
  std::cout << report.model << ": mean PSNR " << format_metric(report.mean_psnr()) << " dB, mean SSIM "
            << format_metric(report.mean_ssim()) << " over " << report.images.size() << " images\n";
  return m.ok() ? 0 : 1;
}

struct SrArgs {
  std::string model;
  std::string input;
  std::string sidecar;
  std::string basis;
  std::string out;
};

int cmd_sr(const SrArgs& a, const Common&, RunManifest& m) {
  const Model model = load_model(a.model, a.basis, m);
  std::vector<fs::path> inputs = fs::is_directory(a.input) ? list_pngs(a.input) : std::vector<fs::path>{a.input};
  std::map<std::string, DegradationRecord> records;
  fs::path sidecar = a.sidecar;
  if (sidecar.empty()) {
    sidecar = (fs::is_directory(a.input) ? fs::path(a.input) : fs::path(a.input).parent_path()) / kSidecarName;
  }
  if (fs::exists(sidecar)) {
    m.add_input(sidecar);
    records = records_by_name(sidecar);
  }
  fs::create_directories(a.out);
  for (const auto& in : inputs) {
    const std::string name = in.filename().string();
    try {
      m.add_input(in);
      const auto it = records.find(name);
      const std::optional<DegradationRecord> record =
          it == records.end() ? std::nullopt : std::optional<DegradationRecord>(it->second);
      const fs::path out = fs::path(a.out) / name;
      write_png(out, model.run(read_png(in), record, model.scale(4), name));
      m.add_output(out);
    } catch (const std::exception& e) {
      m.add_error(in.string(), e.what());
    }
  }
  m.write(fs::path(a.out) / "manifest.json");
  return m.ok() ? 0 : 1;
}

struct CompareArgs {
  std::string a, b;
  std::string lr, hr, sidecar;
  std::string basis;
  std::vector<int> zoom;
  std::string out = "panel.png";
};

std::string caption(const std::string& label, double value) {
  if (std::isinf(value)) return label + " INF DB";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s %.2f DB", label.c_str(), value);
  return buf;
}

int cmd_compare(const CompareArgs& a, const Common& c, RunManifest& m) {
  const Model ma = load_model(a.a, a.basis, m), mb = load_model(a.b, a.basis, m);
  if (ma.scale(c.scale) != mb.scale(c.scale)) throw ConfigurationError("models disagree on scale");
  const int scale = ma.scale(c.scale);
  const std::string name = fs::path(a.lr).filename().string();
  std::optional<DegradationRecord> record;
  const fs::path sidecar = a.sidecar.empty() ? fs::path(a.lr).parent_path() / kSidecarName : fs::path(a.sidecar);
  if (fs::exists(sidecar)) {
    m.add_input(sidecar);
    const auto records = records_by_name(sidecar);
    if (auto it = records.find(name); it != records.end()) record = it->second;
  }
  m.add_input(a.lr);
  m.add_input(a.hr);
  const ImageBuffer lr = read_png(a.lr);
  const ImageBuffer sr_a = ma.run(lr, record, scale, name), sr_b = mb.run(lr, record, scale, name);
  const ImageBuffer bic = quantize(bicubic_resize(lr, {scale, 1}));
  const ImageBuffer hr = align_hr(read_png(a.hr), bic);
  const int crop_border = c.crop >= 0 ? c.crop : scale;
  const ColorMode color = parse_color(c.color);

  std::vector<std::pair<std::string, const ImageBuffer*>> items{
      {"HR", &hr}, {"BICUBIC", &bic}, {"A", &sr_a}, {"B", &sr_b}};
  std::vector<cli::Pane> panes;
  nlohmann::json captions = nlohmann::json::array();
  for (const auto& [label, img] : items) {
    const PairMetrics pm = evaluate_pair(*img, hr, crop_border, color);
    panes.push_back({label == "HR" ? std::string("HR") : caption(label, pm.psnr), *img});
    captions.push_back({{"label", label},
                        {"psnr", std::isinf(pm.psnr) ? nlohmann::json("inf") : nlohmann::json(pm.psnr)},
                        {"ssim", pm.ssim}});
  }
  std::optional<cli::ZoomBox> zoom;
  if (!a.zoom.empty()) {
    if (a.zoom.size() != 4) throw ConfigurationError("--zoom takes x,y,width,height");
    zoom = cli::ZoomBox{a.zoom[0], a.zoom[1], a.zoom[2], a.zoom[3]};
  }
  const auto [panel, layout] = cli::compose_panel(panes, zoom);
  write_png(a.out, panel);
  for (std::size_t i = 0; i < captions.size(); ++i) captions[i]["x"] = layout.pane_x[i];
  const nlohmann::json info = {{"panes", captions},        {"pane_width", layout.pane_width},
                               {"pane_height", layout.pane_height}, {"gutter", cli::kGutter},
                               {"width", layout.width},    {"height", layout.height},
                               {"crop", crop_border},      {"color", color_name(color)}};
  const std::string info_path = a.out + ".json";
  std::ofstream(info_path) << info.dump(2) << '\n';
  m.add_output(a.out);
  m.add_output(info_path);
  m.write(a.out + ".manifest.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metadata-conditioned super-resolution toolkit"};
  app.set_version_flag("--version", METASR_VERSION);
  app.set_config("--config", "", "TOML-style configuration file; command-line flags override it");
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("--seed", common.seed, "Random seed")->capture_default_str();
  app.add_option("--scale", common.scale, "Upscaling factor")->check(CLI::IsMember({1, 2, 3, 4}))->capture_default_str();
  app.add_option("--protocol", common.protocol, "Degradation protocol")
      ->check(CLI::IsMember({"blur", "blur+compress", "compress"}))
      ->capture_default_str();
  app.add_option("--layout", common.layout, "Metadata layout")
      ->check(CLI::IsMember({"kernel-pca", "qpi", "kernel-pca+qpi"}))
      ->capture_default_str();
  app.add_option("--crop", common.crop, "Border crop for metrics (-1: scale)")->capture_default_str();
  app.add_option("--color", common.color, "Metric colour space")
      ->check(CLI::IsMember({"luma", "rgb"}))
      ->capture_default_str();

  SynthArgs synth;
  auto* s_synth = app.add_subcommand("synth", "Write procedural HR test scenes");
  s_synth->add_option("--out", synth.out, "Output directory")->required();
  s_synth->add_option("--count", synth.count)->capture_default_str();
  s_synth->add_option("--height", synth.height)->capture_default_str();
  s_synth->add_option("--width", synth.width)->capture_default_str();
  s_synth->add_option("--first", synth.first, "Index of the first scene")->capture_default_str();

  PcaArgs pca;
  auto* s_pca = app.add_subcommand("pca-fit", "Fit the blur-kernel PCA basis");
  s_pca->add_option("--out", pca.out, "Basis file")->capture_default_str();
  s_pca->add_option("--count", pca.count, "Corpus size")->capture_default_str();
  s_pca->add_option("--sigma-min", pca.sigma_min)->capture_default_str();
  s_pca->add_option("--sigma-max", pca.sigma_max)->capture_default_str();
  s_pca->add_option("--components", pca.components)->capture_default_str();

  DegradeArgs degrade;
  auto* s_degrade = app.add_subcommand("degrade", "Synthesise LR images and a sidecar from HR images");
  s_degrade->add_option("--hr", degrade.hr, "HR directory")->required();
  s_degrade->add_option("--out", degrade.out, "Output directory")->required();

  TrainArgs train_args;
  auto* s_train = app.add_subcommand("train", "Train a plain or meta network");
  s_train->add_option("--train-lr", train_args.train_lr)->required();
  s_train->add_option("--train-hr", train_args.train_hr)->required();
  s_train->add_option("--train-sidecar", train_args.train_sidecar, "Defaults to <train-lr>/degradations.jsonl");
  s_train->add_option("--val-lr", train_args.val_lr)->required();
  s_train->add_option("--val-hr", train_args.val_hr)->required();
  s_train->add_option("--val-sidecar", train_args.val_sidecar);
  s_train->add_option("--out", train_args.out, "Output directory")->required();
  s_train->add_option("--basis", train_args.basis, "PCA basis (kernel-pca layouts)");
  s_train->add_flag("--meta", train_args.meta, "Enable meta-attention");
  s_train->add_option("--channels", train_args.channels)->capture_default_str();
  s_train->add_option("--blocks", train_args.blocks)->capture_default_str();
  s_train->add_option("--hidden", train_args.hidden, "Meta-attention hidden width (0: channels/2)")
      ->capture_default_str();
  s_train->add_option("--epochs", train_args.train.epochs)->capture_default_str();
  s_train->add_option("--patch", train_args.train.patch_size, "LR patch side")->capture_default_str();
  s_train->add_option("--batch", train_args.train.batch_size)->capture_default_str();
  s_train->add_option("--lr-max", train_args.train.lr_max)->capture_default_str();
  s_train->add_option("--lr-min", train_args.train.lr_min)->capture_default_str();
  s_train->add_option("--val-every", train_args.train.val_every)->capture_default_str();

  EvalArgs eval;
  auto* s_eval = app.add_subcommand("eval", "Score a checkpoint or bicubic against HR images");
  s_eval->add_option("--model", eval.model, "Checkpoint path or 'bicubic'")->required();
  s_eval->add_option("--lr", eval.lr, "LR directory")->required();
  s_eval->add_option("--hr", eval.hr, "HR directory")->required();
  s_eval->add_option("--sidecar", eval.sidecar, "Defaults to <lr>/degradations.jsonl");
  s_eval->add_option("--basis", eval.basis, "PCA basis (defaults to basis.pca beside the checkpoint)");
  s_eval->add_option("--out", eval.out, "Report CSV")->capture_default_str();
  s_eval->add_option("--dataset", eval.dataset, "Dataset label in the report");

  SrArgs sr;
  auto* s_sr = app.add_subcommand("sr", "Super-resolve LR images");
  s_sr->add_option("--model", sr.model, "Checkpoint path or 'bicubic'")->required();
  s_sr->add_option("--input", sr.input, "LR image or directory")->required();
  s_sr->add_option("--sidecar", sr.sidecar);
  s_sr->add_option("--basis", sr.basis);
  s_sr->add_option("--out", sr.out, "Output directory")->required();

  CompareArgs cmp;
  auto* s_cmp = app.add_subcommand("compare", "HR | bicubic | A | B comparison panel");
  s_cmp->add_option("--a", cmp.a, "First checkpoint (or 'bicubic')")->required();
  s_cmp->add_option("--b", cmp.b, "Second checkpoint (or 'bicubic')")->required();
  s_cmp->add_option("--lr", cmp.lr, "LR image")->required();
  s_cmp->add_option("--hr", cmp.hr, "HR image")->required();
  s_cmp->add_option("--sidecar", cmp.sidecar);
  s_cmp->add_option("--basis", cmp.basis);
  s_cmp->add_option("--zoom", cmp.zoom, "Zoom box x,y,width,height in HR pixels")->delimiter(',')->expected(4);
  s_cmp->add_option("--out", cmp.out, "Panel PNG")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  const CLI::App* active = app.get_subcommands().front();
  RunManifest manifest;
  manifest.command = active->get_name();
  manifest.config = resolved_config(app, *active);
  manifest.seed = common.seed;
  try {
    if (active == s_synth) return cmd_synth(synth, common, manifest);
    if (active == s_pca) return cmd_pca_fit(pca, common, manifest);
    if (active == s_degrade) return cmd_degrade(degrade, common, manifest);
    if (active == s_train) return cmd_train(train_args, common, manifest);
    if (active == s_eval) return cmd_eval(eval, common, manifest);
    if (active == s_sr) return cmd_sr(sr, common, manifest);
    if (active == s_cmp) return cmd_compare(cmp, common, manifest);
  } catch (const std::exception& e) {
    std::cerr << "metasr " << active->get_name() << ": " << e.what() << '\n';
    return 2;
  }
  return 2;
}
