// trendcnn command-line tool: synth / ingest -> make-dataset -> train ->
// evaluate -> simulate, plus the labeling server.

#include <csignal>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "trendcnn/error.hpp"
#include "trendcnn/labeler_server.hpp"
#include "trendcnn/nn/checkpoint.hpp"
#include "trendcnn/pipeline.hpp"

namespace fs = std::filesystem;
using namespace trendcnn;
using json = nlohmann::json;

namespace {

void emit(const json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(out_path, text);
  }
}

// Model settings: config file first, then any flag given on the command line.
struct ModelFlags {
  std::string config;
  std::map<std::string, std::string> overrides;

  void add(CLI::App* cmd, const std::string& flag, const std::string& key, const std::string& help) {
    cmd->add_option_function<std::string>(flag, [this, key](const std::string& v) { overrides[key] = v; }, help);
  }

  ModelConfig resolve() const {
    KeyValueConfig kv = config.empty() ? KeyValueConfig{} : KeyValueConfig::load(config);
    for (const auto& [k, v] : overrides) kv.set(k, v);
    return model_config(kv);
  }
};

DateSplit parse_split(const std::string& date, const std::string& side) {
  DateSplit s;
  s.threshold = parse_date(date);
  if (side == "before") s.side = DateSplit::Side::Before;
  else if (side == "after") s.side = DateSplit::Side::OnOrAfter;
  else throw ValidationError("--side must be 'before' or 'after'");
  return s;
}

LabelerServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trend changepoint detection from candlestick images"};
  app.require_subcommand(1);

  // ingest
  std::vector<std::string> ingest_inputs;
  std::string ingest_out;
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate OHLC CSV files and write them normalized");
  ingest_cmd->add_option("inputs", ingest_inputs, "CSV files or directories")->required();
  ingest_cmd->add_option("--out", ingest_out, "Output series directory")->required();

  // synth
  std::string synth_out, synth_config_path;
  std::size_t synth_count = 20;
  std::uint64_t synth_seed = 1;
  std::optional<std::size_t> synth_bars;
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic series with exact expert labels");
  synth_cmd->add_option("--out", synth_out, "Output directory (series/ and labels/ are created)")->required();
  synth_cmd->add_option("--stocks", synth_count, "Number of stocks")->capture_default_str();
  synth_cmd->add_option("--seed", synth_seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--bars", synth_bars, "Bars per stock");
  synth_cmd->add_option("--config", synth_config_path, "Generator key=value file");

  // make-dataset
  ModelFlags ds_flags;
  std::string ds_series, ds_labels, ds_out, ds_split_date, ds_side = "before";
  bool ds_normalize = false;
  auto* ds_cmd = app.add_subcommand("make-dataset", "Render labeled slices into a CTF dataset");
  ds_cmd->add_option("--series", ds_series, "Series directory")->required();
  ds_cmd->add_option("--labels", ds_labels, "Label directory")->required();
  ds_cmd->add_option("--out", ds_out, "Output .ctf path (manifest written next to it)")->required();
  ds_cmd->add_option("--config", ds_flags.config, "Model key=value file");
  ds_flags.add(ds_cmd, "--kind", "kind", "chpc | chpr | tf");
  ds_flags.add(ds_cmd, "--n-days", "n_days", "Slice width in bars");
  ds_flags.add(ds_cmd, "--skip", "skip", "Slice step in bars");
  ds_flags.add(ds_cmd, "--dpi", "dpi", "Render resolution (10 or 20)");
  ds_flags.add(ds_cmd, "--policy", "policy", "keep_all | dedup | dedup_drop_contradictions");
  ds_flags.add(ds_cmd, "--snap-tolerance", "snap_tolerance", "Changepoint snap tolerance in bars");
  ds_cmd->add_option("--split-date", ds_split_date, "Keep only records on one side of this date");
  ds_cmd->add_option("--side", ds_side, "before | after")->capture_default_str();
  ds_cmd->add_flag("--normalize", ds_normalize, "Write features divided by 255");

  // train
  ModelFlags tr_flags;
  std::string tr_dataset, tr_out, tr_history;
  bool tr_quiet = false;
  auto* tr_cmd = app.add_subcommand("train", "Train a submodel on a CTF dataset");
  tr_cmd->add_option("--dataset", tr_dataset, "Training .ctf")->required();
  tr_cmd->add_option("--out", tr_out, "Checkpoint path")->required();
  tr_cmd->add_option("--history", tr_history, "Loss history CSV (default: <out>.history.csv)");
  tr_cmd->add_option("--config", tr_flags.config, "Model key=value file");
  tr_flags.add(tr_cmd, "--kind", "kind", "chpc | chpr | tf");
  tr_flags.add(tr_cmd, "--dpi", "dpi", "Render resolution of the dataset");
  tr_flags.add(tr_cmd, "--loss", "loss", "weighted_bce | f_measure | squared_error | ce_softmax");
  tr_flags.add(tr_cmd, "--w", "w", "Positive-class weight for weighted_bce");
  tr_flags.add(tr_cmd, "--learning-rate", "learning_rate", "SGD step size");
  tr_flags.add(tr_cmd, "--minibatch", "minibatch", "Minibatch size");
  tr_flags.add(tr_cmd, "--iterations", "iterations", "SGD iterations");
  tr_flags.add(tr_cmd, "--seed", "seed", "Init and shuffle seed");
  tr_cmd->add_flag("--quiet", tr_quiet, "No progress on stderr");

  // evaluate
  std::string ev_checkpoint, ev_dataset, ev_out;
  auto* ev_cmd = app.add_subcommand("evaluate", "Metric report for a checkpoint on a CTF dataset");
  ev_cmd->add_option("--checkpoint", ev_checkpoint, "Checkpoint path")->required();
  ev_cmd->add_option("--dataset", ev_dataset, "Test .ctf")->required();
  ev_cmd->add_option("--out", ev_out, "Write JSON here instead of stdout");

  // simulate
  std::string sim_chpc, sim_chpr, sim_tf, sim_series, sim_labels, sim_from, sim_to, sim_log, sim_out;
  StepConfig sim_step;
  bool sim_no_short = false, sim_flat_ignored = false, sim_baselines = false;
  auto* sim_cmd = app.add_subcommand("simulate", "Trading simulation driven by the three submodels");
  sim_cmd->add_option("--chpc", sim_chpc, "ChP-c checkpoint")->required();
  sim_cmd->add_option("--chpr", sim_chpr, "ChP-r checkpoint")->required();
  sim_cmd->add_option("--tf", sim_tf, "TF checkpoint")->required();
  sim_cmd->add_option("--series", sim_series, "Series directory")->required();
  sim_cmd->add_option("--labels", sim_labels, "Label directory (contingency table, expert baseline)");
  sim_cmd->add_option("--n-days", sim_step.slices.n_days, "Slice width")->capture_default_str();
  sim_cmd->add_option("--skip", sim_step.slices.skip, "Evaluation cadence")->capture_default_str();
  sim_cmd->add_option("--threshold", sim_step.chpc_threshold, "ChP-c decision threshold")->capture_default_str();
  sim_cmd->add_option("--from", sim_from, "First date (inclusive)");
  sim_cmd->add_option("--to", sim_to, "Last date (inclusive)");
  sim_cmd->add_flag("--no-short", sim_no_short, "Never open short positions");
  sim_cmd->add_flag("--flat-ignored", sim_flat_ignored, "Flat signals keep the current position");
  sim_cmd->add_flag("--baselines", sim_baselines, "Also report buy-and-hold (and expert, with --labels)");
  sim_cmd->add_option("--trade-log", sim_log, "Per-day CSV trade log");
  sim_cmd->add_option("--out", sim_out, "Write JSON here instead of stdout");

  // serve-labeler
  LabelerConfig srv_cfg;
  auto* srv_cmd = app.add_subcommand("serve-labeler", "HTTP API and static UI for expert labeling");
  srv_cmd->add_option("--series", srv_cfg.series_dir, "Series directory")->required();
  srv_cmd->add_option("--labels", srv_cfg.labels_dir, "Label directory")->required();
  srv_cmd->add_option("--ui-dir", srv_cfg.ui_dir, "Static UI assets");
  srv_cmd->add_option("--host", srv_cfg.host, "Bind address")->capture_default_str();
  srv_cmd->add_option("--port", srv_cfg.port, "Port")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*ingest_cmd) {
      emit(ingest(ingest_inputs, ingest_out), "");
    } else if (*synth_cmd) {
      SynthConfig base = synth_config_path.empty() ? SynthConfig{} : synth_config(KeyValueConfig::load(synth_config_path));
      if (synth_bars) base.bars = *synth_bars;
      base.validate();
      const auto stocks = synth_stocks(base, synth_count, synth_seed);
      write_stocks(stocks, (fs::path(synth_out) / "series").string(), (fs::path(synth_out) / "labels").string());
      std::size_t windows = 0;
      for (const auto& s : stocks) windows += s.windows.size();
      emit({{"stocks", stocks.size()}, {"bars", base.bars}, {"windows", windows}, {"seed", synth_seed}}, "");
    } else if (*ds_cmd) {
      const ModelConfig cfg = ds_flags.resolve();
      std::optional<DateSplit> split;
      if (!ds_split_date.empty()) split = parse_split(ds_split_date, ds_side);
      const auto opts = dataset_options(cfg, split);
      const auto stocks = load_stocks(ds_series, ds_labels);
      const auto ds = make_dataset(stocks, opts);
      const std::size_t n = write_dataset_files(ds, opts, ds_out, ds_normalize);
      std::size_t positives = 0;
      if (cfg.kind == SubmodelKind::ChPc) {
        for (std::size_t i = 0; i < ds.data.size(); ++i) positives += ds.data.labels(i)[0] > 0.5;
      }
      json summary = {{"records", n}, {"kind", to_string(cfg.kind)}, {"path", ds_out}};
      if (cfg.kind == SubmodelKind::ChPc) summary["positives"] = positives;
      emit(summary, "");
    } else if (*tr_cmd) {
      const ModelConfig cfg = tr_flags.resolve();
      RenderStyle style;
      style.dpi = cfg.dpi;
      const auto data = load_ctf_dataset(tr_dataset, label_dim(cfg.kind), input_shape(style).size());
      const std::size_t every = std::max<std::size_t>(1, cfg.iterations / 20);
      auto progress = [&](std::size_t it, double loss) {
        if (!tr_quiet && (it + 1) % every == 0) std::cerr << "iteration " << it + 1 << " loss " << loss << "\n";
      };
      auto result = train_submodel(data, train_config(cfg), progress);
      auto meta = result.metadata;
      meta["n_days"] = std::to_string(cfg.slices.n_days);
      meta["skip"] = std::to_string(cfg.slices.skip);
      nn::save_checkpoint(tr_out, result.network, meta);
      const std::string history_path = tr_history.empty() ? tr_out + ".history.csv" : tr_history;
      write_file_atomic(history_path, history_csv(result.history));
      emit({{"checkpoint", tr_out},
            {"history", history_path},
            {"records", data.size()},
            {"param_count", result.network.param_count()},
            {"w", result.bce_weight},
            {"final_loss", result.history.empty() ? json(nullptr) : json(result.history.back())}},
           "");
    } else if (*ev_cmd) {
      const auto ckpt = nn::load_checkpoint(ev_checkpoint);
      const auto it = ckpt.metadata.find("kind");
      if (it == ckpt.metadata.end()) throw ValidationError("checkpoint has no 'kind' metadata");
      const SubmodelKind kind = parse_submodel_kind(it->second);
      const auto data = load_ctf_dataset(ev_dataset, label_dim(kind), ckpt.network.input_shape().size());
      emit(to_json(evaluate(kind, ckpt.network, data)), ev_out);
    } else if (*sim_cmd) {
      TradePolicy policy{!sim_no_short, sim_flat_ignored};
      SimRange range;
      if (!sim_from.empty()) range.from = parse_date(sim_from);
      if (!sim_to.empty()) range.to = parse_date(sim_to);
      const auto stocks = load_stocks(sim_series, sim_labels);
      NetworkModels models(nn::load_checkpoint(sim_chpc).network, nn::load_checkpoint(sim_chpr).network,
                           nn::load_checkpoint(sim_tf).network);
      const auto result = run_simulation(stocks, models, sim_step, policy, range);
      json report = simulation_json(result.report, sim_step, policy, range);
      if (sim_baselines) {
        report["baselines"]["buy_and_hold"] = to_json(baseline_buy_and_hold(stocks, range).report);
        if (!sim_labels.empty()) report["baselines"]["expert"] = to_json(baseline_expert(stocks, policy, range).report);
      }
      if (!sim_log.empty()) write_file_atomic(sim_log, trade_log_csv(result.log));
      emit(report, sim_out);
    } else if (*srv_cmd) {
      LabelerServer server(srv_cfg);
      const int port = server.bind();
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "labeler listening on http://" << srv_cfg.host << ":" << port << "\n";
      server.run();
      g_server = nullptr;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: io: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
