// Command-line front end for the generation studies.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "seqdesign/config.hpp"
#include "seqdesign/errors.hpp"
#include "seqdesign/studies.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Overrides {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string backend;
  std::string endpoint;
};

struct StudyFlags {
  std::optional<std::size_t> repeats;
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> counts;
  std::optional<std::size_t> repeats_per_count;
  std::optional<double> noise_std;
  std::optional<std::size_t> repeat_count;
  std::optional<std::size_t> sets;
  std::vector<std::string> inputs;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config_path, "Experiment config (JSON)")->required();
  sub->add_option("--out", o.out, "Output directory (overrides output.directory)");
  sub->add_option("--seed", o.seed, "Top-level seed (overrides seed)");
  sub->add_option("--backend", o.backend, "Regressor backend: kernel, knn or remote");
  sub->add_option("--endpoint", o.endpoint, "Sidecar URL for the remote backend");
}

seqdesign::ExperimentConfig load_with_overrides(const Overrides& o) {
  auto cfg = seqdesign::load_config(o.config_path);
  if (!o.out.empty()) cfg.output_directory = o.out;
  if (o.seed) cfg.seed = *o.seed;
  try {
    if (!o.backend.empty()) cfg.regressor.backend = seqdesign::parse_backend_kind(o.backend);
    if (!o.endpoint.empty()) cfg.regressor.endpoint = o.endpoint;
    cfg.regressor.validate();
  } catch (const seqdesign::ArgumentError& e) {
    throw seqdesign::ConfigError(e.what());
  }
  seqdesign::validate_paths(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential conditional design generation studies"};
  app.require_subcommand(1);

  Overrides o;
  StudyFlags f;
  auto* gen = app.add_subcommand("gen", "Generate designs for the configured conditions");
  auto* inpaint = app.add_subcommand("inpaint", "Complete designs with missing parameters");
  auto* eval = app.add_subcommand("eval", "Generate and score designs (MAPE/MAE, PRD, MMD)");
  auto* refsize = app.add_subcommand("sweep-refsize", "Sweep the reference set size");
  auto* inpaint_sweep = app.add_subcommand("sweep-inpaint", "Sweep the number of missing parameters");
  auto* order = app.add_subcommand("study-order", "Repeat generation under random orders");
  auto* noise = app.add_subcommand("study-noise", "Repeat one condition with injected noise");
  auto* refsets = app.add_subcommand("study-refsets", "Compare independent reference subsets");
  auto* plot = app.add_subcommand("plot", "Render result CSVs to SVG");
  for (auto* sub : {gen, inpaint, eval, refsize, inpaint_sweep, order, noise, refsets, plot}) {
    add_common(sub, o);
  }
  order->add_option("--repeats", f.repeats, "Number of random-order runs");
  refsize->add_option("--sizes", f.sizes, "Reference sizes")->delimiter(',');
  inpaint_sweep->add_option("--counts", f.counts, "Missing-parameter counts")->delimiter(',');
  inpaint_sweep->add_option("--repeats-per-count", f.repeats_per_count, "Repeats per count");
  noise->add_option("--noise-std", f.noise_std, "Noise standard deviation (normalized space)");
  noise->add_option("--repeat-count", f.repeat_count, "Copies of the condition");
  refsets->add_option("--sets", f.sets, "Number of reference sets");
  plot->add_option("inputs", f.inputs, "Result CSVs (default: every CSV in the output directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  seqdesign::ExperimentConfig cfg;
  try {
    cfg = load_with_overrides(o);
  } catch (const seqdesign::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const auto& st = cfg.study;
    seqdesign::StudyOutput out;
    if (gen->parsed()) {
      out = seqdesign::run_generate(cfg);
    } else if (inpaint->parsed()) {
      out = seqdesign::run_inpaint(cfg);
    } else if (eval->parsed()) {
      out = seqdesign::run_generation_eval(cfg);
    } else if (refsize->parsed()) {
      out = seqdesign::run_reference_size_sweep(cfg, f.sizes.empty() ? st.sizes : f.sizes);
    } else if (inpaint_sweep->parsed()) {
      out = seqdesign::run_inpainting_sweep(cfg, f.counts.empty() ? st.missing_counts : f.counts,
                                            f.repeats_per_count.value_or(st.repeats_per_count));
    } else if (order->parsed()) {
      out = seqdesign::run_order_study(cfg, f.repeats.value_or(st.repeats));
    } else if (noise->parsed()) {
      out = seqdesign::run_noise_study(cfg, f.noise_std.value_or(st.noise_std),
                                       f.repeat_count.value_or(st.repeat_count));
    } else if (refsets->parsed()) {
      out = seqdesign::run_reference_variation_study(cfg, f.sets.value_or(st.num_reference_sets));
    } else if (plot->parsed()) {
      std::vector<std::filesystem::path> inputs(f.inputs.begin(), f.inputs.end());
      if (inputs.empty()) inputs = cfg.plot.inputs;
      out = seqdesign::run_plot(cfg, inputs);
    }
    for (const auto& file : out.files) std::cout << file.string() << "\n";
  } catch (const seqdesign::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
