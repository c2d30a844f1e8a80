#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "rgnet/errors.hpp"
#include "rgnet/plot.hpp"
#include "rgnet/trainer.hpp"

namespace fs = std::filesystem;
using namespace rgnet;

namespace {

struct Args {
  std::string command;
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
  bool deterministic = false;
  std::string data;
  std::string checkpoint;
  std::string axis;
  std::vector<double> values;
  std::string csv;
  bool force = false;
};

// Flags each command accepts besides the common ones.
const std::map<std::string, std::set<std::string>> kCommandFlags = {
    {"synth", {}},
    {"train", {"--data", "--force"}},
    {"eval", {"--data", "--checkpoint"}},
    {"predict", {"--data", "--checkpoint"}},
    {"sweep", {"--data", "--axis", "--values"}},
    {"plot", {"--csv"}},
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw FormatError(FormatErrorKind::Io, "cannot write " + path.string());
  out << text;
}

std::size_t num_workers() {
  const char* env = std::getenv("RGNET_NUM_WORKERS");
  const auto hw = std::max(1u, std::thread::hardware_concurrency());
  if (!env) return hw;
  try {
    std::size_t pos = 0;
    const long v = std::stol(env, &pos);
    if (pos != std::string(env).size() || v < 1) throw std::invalid_argument("range");
    return std::min<std::size_t>(static_cast<std::size_t>(v), hw);
  } catch (const std::exception&) {
    throw ConfigError(std::string("RGNET_NUM_WORKERS must be a positive integer, got '") + env + "'",
                      "RGNET_NUM_WORKERS");
  }
}

// Defaults, then the config file (or `base`), then --set, --seed and
// --deterministic. A key given twice with different values is rejected.
RunConfig resolve_config(const Args& args, const std::optional<RunConfig>& base) {
  RunConfig cfg = base.value_or(RunConfig{});
  if (!args.config.empty()) {
    if (!fs::exists(args.config)) throw ConfigError("config file not found: " + args.config, "config");
    cfg = load_config(args.config);
  }
  std::map<std::string, std::string> overrides;
  auto add = [&](const std::string& key, const std::string& value) {
    const auto [it, inserted] = overrides.emplace(key, value);
    if (!inserted && it->second != value) {
      throw ConfigError("conflicting overrides for '" + key + "': '" + it->second + "' vs '" + value + "'", key);
    }
  };
  for (const auto& kv : args.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + kv + "'", kv);
    add(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (args.seed) add("seed", std::to_string(*args.seed));
  if (args.deterministic) add("deterministic", "true");
  for (const auto& [key, value] : overrides) set_config_value(cfg, key, value);
  cfg.validate();
  return cfg;
}

void require(const std::string& value, const std::string& flag, const std::string& command) {
  if (value.empty()) throw ConfigError("'" + command + "' requires " + flag, flag.substr(2));
}

Dataset load_data(const Args& args) {
  require(args.data, "--data", args.command);
  const fs::path path = args.data;
  return load_manifest(fs::is_directory(path) ? path / "manifest.jsonl" : path, num_workers());
}

int run_synth(const Args& args, const fs::path& out) {
  const auto cfg = resolve_config(args, std::nullopt);
  const auto ds = generate_synthetic_dataset(cfg.synth);
  const auto manifest = write_dataset(ds, out);
  write_text(out / "config.json", config_to_json(cfg).dump(2) + "\n");
  std::cout << "wrote " << ds.videos.size() << " videos and " << ds.annotations.size() << " annotations to "
            << manifest.string() << "\n";
  return 0;
}

int run_train(const Args& args, const fs::path& out) {
  const auto cfg = resolve_config(args, std::nullopt);
  const auto ds = load_data(args);
  const auto ckpt = out / "checkpoint.rgck";
  if (fs::exists(ckpt) && !args.force) {
    throw Error("refusing to overwrite existing checkpoint " + ckpt.string() + " (pass --force)");
  }
  auto model = init_parameters(cfg.train.model, cfg.train.seed);
  TrainOptions opt;
  opt.log_path = out / "train_log.jsonl";
  const auto result = train(model, ds, cfg.train, opt);
  save_checkpoint(ckpt, model, {cfg, result.epochs_completed, result.steps, result.rng_state}, args.force);
  write_text(out / "config.json", config_to_json(cfg).dump(2) + "\n");
  std::cout << "trained " << result.steps << " steps over " << result.epochs_completed << " epochs";
  if (!result.log.empty()) std::cout << ", final loss " << result.log.back().loss_total;
  std::cout << "\ncheckpoint: " << ckpt.string() << "\n";
  return 0;
}

// Model dimensions come from the resolved config; the checkpoint must match.
std::pair<RGNetModel, RunConfig> model_for_eval(const Args& args) {
  require(args.checkpoint, "--checkpoint", args.command);
  const auto info = read_checkpoint_info(args.checkpoint);
  const auto cfg = resolve_config(args, info.config);
  RGNetModel model(cfg.train.model);
  load_parameters(model, args.checkpoint);
  model->eval();
  return {model, cfg};
}

int run_eval(const Args& args, const fs::path& out) {
  auto [model, cfg] = model_for_eval(args);
  const auto ds = load_data(args);
  apply_determinism(cfg.train.deterministic);
  const auto report = evaluate(model, ds, cfg);
  write_text(out / "metrics.json", report_to_json(report).dump(2) + "\n");
  const auto text = report_to_text(report);
  write_text(out / "metrics.txt", text);
  std::cout << text;
  return 0;
}

int run_predict(const Args& args, const fs::path& out) {
  auto [model, cfg] = model_for_eval(args);
  const auto ds = load_data(args);
  apply_determinism(cfg.train.deterministic);
  const PreparedData data(ds, cfg.train.proposal_length_s);
  const auto& ks = cfg.eval.grounding_ks;
  const auto preds = predict(model, data, cfg, static_cast<std::size_t>(*std::max_element(ks.begin(), ks.end())));
  std::ofstream file(out / "predictions.jsonl");
  if (!file) throw FormatError(FormatErrorKind::Io, "cannot write predictions");
  for (const auto& p : preds) {
    const auto& ann = ds.annotations[p.annotation];
    for (std::size_t r = 0; r < p.moments.size(); ++r) {
      const auto iv = moment_to_interval(p.moments[r].moment);
      file << nlohmann::json{{"query_id", ann.query_id}, {"video_id", ann.video_id}, {"rank", r + 1},
                             {"start_s", iv.start()},    {"end_s", iv.end()},       {"score", p.moments[r].score}}
                  .dump()
           << '\n';
    }
  }
  std::cout << "wrote predictions for " << preds.size() << " queries to " << (out / "predictions.jsonl").string()
            << "\n";
  return 0;
}

int run_sweep(const Args& args, const fs::path& out) {
  require(args.axis, "--axis", args.command);
  if (args.values.empty()) throw ConfigError("'sweep' requires --values", "values");
  const auto cfg = resolve_config(args, std::nullopt);
  const auto ds = load_data(args);
  const auto rows = sweep(cfg, ds, args.axis, args.values, [](const SweepRow& row) {
    std::cout << row.axis << "=" << row.value << " R@topk=" << row.report.retrieval.at(row.config.train.top_k)
              << "\n";
  });
  const auto csv = sweep_to_csv(rows);
  const auto stem = out / ("sweep_" + args.axis);
  write_text(stem.string() + ".csv", csv);
  write_text(stem.string() + ".svg", render_sweep_svg(parse_csv(csv), "sweep over " + args.axis));
  std::cout << "wrote " << stem.string() << ".csv and .svg\n";
  return 0;
}

int run_plot(const Args& args, const fs::path& out) {
  require(args.csv, "--csv", args.command);
  std::ifstream in(args.csv);
  if (!in) throw FormatError(FormatErrorKind::Io, "cannot open " + args.csv);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto target = out / (fs::path(args.csv).stem().string() + ".svg");
  write_text(target, render_sweep_svg(parse_csv(text), fs::path(args.csv).stem().string()));
  std::cout << "wrote " << target.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proposal retrieval and moment grounding for long videos.", "rgnet"};
  Args args;
  app.add_option("command", args.command, "synth | train | eval | predict | sweep | plot")
      ->required()
      ->check(CLI::IsMember({"synth", "train", "eval", "predict", "sweep", "plot"}));
  app.add_option("--config", args.config, "Flat JSON configuration file");
  app.add_option("--out", args.out, "Output directory (created if absent)")->required();
  app.add_option("--seed", args.seed, "Seed for data synthesis, initialization and sampling");
  app.add_option("--set", args.sets, "Override one config key, key=value (repeatable)")->take_all();
  app.add_flag("--deterministic", args.deterministic, "Single-threaded deterministic kernels");
  app.add_option("--data", args.data, "Dataset manifest or directory (train, eval, predict, sweep)");
  app.add_option("--checkpoint", args.checkpoint, "Checkpoint to evaluate (eval, predict)");
  app.add_option("--axis", args.axis, "Sweep axis: top_k | proposal_length_s | temperature | n_queries");
  app.add_option("--values", args.values, "Sweep values, space or comma separated")->delimiter(',');
  app.add_option("--csv", args.csv, "Sweep CSV to render (plot)");
  app.add_flag("--force", args.force, "Replace an existing checkpoint (train)");
  app.footer("Environment: RGNET_NUM_WORKERS caps parallel feature loading.\n"
             "Exit status: 0 success, 1 invalid arguments or configuration, 2 runtime failure.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  const auto& allowed = kCommandFlags.at(args.command);
  for (const auto* name : {"--data", "--checkpoint", "--axis", "--values", "--csv", "--force"}) {
    if (app.count(name) > 0 && !allowed.count(name)) {
      std::cerr << "error: " << name << " is not used by '" << args.command << "'\n\n" << app.help();
      return 1;
    }
  }

  try {
    const fs::path out = args.out;
    fs::create_directories(out);
    if (args.command == "synth") return run_synth(args, out);
    if (args.command == "train") return run_train(args, out);
    if (args.command == "eval") return run_eval(args, out);
    if (args.command == "predict") return run_predict(args, out);
    if (args.command == "sweep") return run_sweep(args, out);
    return run_plot(args, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error";
    if (!e.key().empty()) std::cerr << " [" << e.key() << "]";
    std::cerr << ": " << e.what() << "\n";
    return 1;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint load error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
