#include "cibound/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cibound/errors.hpp"
#include "cibound/idx.hpp"

namespace cibound {

namespace {

using nlohmann::json;

[[noreturn]] void fail_field(const std::string& path, const std::string& why) {
  throw FormatError("config field '" + path + "': " + why, 0);
}

const json* find(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.is_object()) fail_field(path, "expected an object");
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

template <typename T>
T get_as(const json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    fail_field(path, e.what());
  }
}

template <typename T>
void read_opt(const json& obj, const std::string& parent, const std::string& key,
              T& target) {
  if (const json* j = find(obj, parent, key)) {
    target = get_as<T>(*j, parent + "." + key);
  }
}

void check_known_keys(const json& obj, const std::string& path,
                      std::initializer_list<const char*> known) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool ok = false;
    for (const char* k : known) {
      if (key == k) {
        ok = true;
        break;
      }
    }
    if (!ok) fail_field(path + "." + key, "unknown key");
  }
}

void parse_sweep(const json& root, ExperimentConfig& cfg) {
  const json* sweep = find(root, "(root)", "sweep");
  if (!sweep) fail_field("sweep", "required section is missing");
  check_known_keys(*sweep, "sweep", {"kind", "values"});
  const json* kind = find(*sweep, "sweep", "kind");
  if (!kind) fail_field("sweep.kind", "required field is missing");
  const auto kind_str = get_as<std::string>(*kind, "sweep.kind");
  if (kind_str == "n") {
    cfg.sweep_kind = SweepKind::TrainSize;
  } else if (kind_str == "epochs") {
    cfg.sweep_kind = SweepKind::Epochs;
  } else {
    fail_field("sweep.kind", "must be \"n\" or \"epochs\"");
  }
  const json* values = find(*sweep, "sweep", "values");
  if (!values) fail_field("sweep.values", "required field is missing");
  cfg.sweep_values = get_as<std::vector<long>>(*values, "sweep.values");
}

void parse_data(const json& root, ExperimentConfig& cfg) {
  const json* data = find(root, "(root)", "data");
  if (!data) return;
  check_known_keys(*data, "data",
                   {"source", "dim", "separation", "noise_sigma", "images", "labels",
                    "randomize_fraction", "binarize"});
  std::string source = "synthetic";
  read_opt(*data, "data", "source", source);
  if (source == "synthetic") {
    read_opt(*data, "data", "dim", cfg.synth.dim);
    read_opt(*data, "data", "separation", cfg.synth.separation);
    read_opt(*data, "data", "noise_sigma", cfg.synth.noise_sigma);
  } else if (source == "idx") {
    std::string images, labels;
    read_opt(*data, "data", "images", images);
    read_opt(*data, "data", "labels", labels);
    if (images.empty() || labels.empty()) {
      fail_field("data.images/labels", "idx source needs both paths");
    }
    cfg.fixed_data = load_idx(images, labels);
  } else {
    fail_field("data.source", "must be \"synthetic\" or \"idx\"");
  }
  read_opt(*data, "data", "randomize_fraction", cfg.randomize_fraction);
  read_opt(*data, "data", "binarize", cfg.binarize);
}

void parse_model(const json& root, ExperimentConfig& cfg) {
  if (const json* model = find(root, "(root)", "model")) {
    check_known_keys(*model, "model",
                     {"architecture", "hidden", "input_dim", "num_classes", "init_std"});
    std::string arch = "linear";
    read_opt(*model, "model", "architecture", arch);
    if (arch == "linear") {
      cfg.model.architecture = Architecture::Linear;
    } else if (arch == "mlp") {
      cfg.model.architecture = Architecture::MLP;
    } else {
      fail_field("model.architecture", "must be \"linear\" or \"mlp\"");
    }
    read_opt(*model, "model", "hidden", cfg.model.hidden);
    read_opt(*model, "model", "input_dim", cfg.model.input_dim);
    read_opt(*model, "model", "num_classes", cfg.model.num_classes);
    read_opt(*model, "model", "init_std", cfg.model.init_std);
  }

  // Derive the input/output shape from the data source unless given.
  const bool input_given =
      root.contains("model") && root["model"].is_object() && root["model"].contains("input_dim");
  const bool classes_given =
      root.contains("model") && root["model"].is_object() && root["model"].contains("num_classes");
  if (cfg.fixed_data) {
    if (!input_given) {
      if (cfg.fixed_data->items.empty()) fail_field("data", "idx dataset is empty");
      cfg.model.input_dim = static_cast<int>(cfg.fixed_data->items.front().x.size());
    }
    if (!classes_given) {
      cfg.model.num_classes = cfg.binarize ? 2 : cfg.fixed_data->num_classes;
    }
  } else {
    if (!input_given) cfg.model.input_dim = cfg.synth.dim;
    if (!classes_given) cfg.model.num_classes = 2;
  }
}

void parse_sgd(const json& root, ExperimentConfig& cfg) {
  const json* sgd = find(root, "(root)", "sgd");
  if (!sgd) return;
  check_known_keys(*sgd, "sgd",
                   {"alpha0", "decay_rate", "epoch_interval", "momentum", "batch_size",
                    "epochs", "stop_at_train_loss"});
  read_opt(*sgd, "sgd", "alpha0", cfg.sgd.alpha0);
  read_opt(*sgd, "sgd", "decay_rate", cfg.sgd.decay_rate);
  read_opt(*sgd, "sgd", "epoch_interval", cfg.sgd.epoch_interval);
  read_opt(*sgd, "sgd", "momentum", cfg.sgd.momentum);
  read_opt(*sgd, "sgd", "batch_size", cfg.sgd.batch_size);
  read_opt(*sgd, "sgd", "epochs", cfg.sgd.epochs);
  if (const json* stop = find(*sgd, "sgd", "stop_at_train_loss")) {
    cfg.sgd.stop_at_train_loss = get_as<double>(*stop, "sgd.stop_at_train_loss");
  }
}

void parse_pipeline(const json& root, ExperimentConfig& cfg) {
  const json* pipe = find(root, "(root)", "pipeline");
  if (!pipe) return;
  check_known_keys(*pipe, "pipeline",
                   {"replicas", "loss_draws", "prior_subsets", "sigma_threshold",
                    "sigma_draws", "delta", "single_draw", "lambda", "gamma"});
  read_opt(*pipe, "pipeline", "replicas", cfg.replicas);
  read_opt(*pipe, "pipeline", "loss_draws", cfg.loss_draws);
  read_opt(*pipe, "pipeline", "prior_subsets", cfg.prior.num_subsets);
  read_opt(*pipe, "pipeline", "sigma_threshold", cfg.sigma.threshold);
  read_opt(*pipe, "pipeline", "sigma_draws", cfg.sigma.mc_weight_draws);
  read_opt(*pipe, "pipeline", "delta", cfg.delta);
  read_opt(*pipe, "pipeline", "single_draw", cfg.single_draw);
  read_opt(*pipe, "pipeline", "lambda", cfg.lambda);
  read_opt(*pipe, "pipeline", "gamma", cfg.gamma);
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("config syntax error: ") + e.what(),
                      e.byte > 0 ? static_cast<std::size_t>(e.byte - 1) : 0);
  }
  if (!root.is_object()) throw FormatError("config root must be a JSON object", 0);
  check_known_keys(root, "(root)",
                   {"sweep", "n", "data", "model", "sgd", "pipeline", "seed", "output",
                    "csv"});

  RunConfig run;
  ExperimentConfig& cfg = run.experiment;
  parse_sweep(root, cfg);
  read_opt(root, "(root)", "n", cfg.n);
  parse_data(root, cfg);
  parse_model(root, cfg);
  parse_sgd(root, cfg);
  parse_pipeline(root, cfg);
  if (const json* seed = find(root, "(root)", "seed")) {
    cfg.master_seed = get_as<std::uint64_t>(*seed, "seed");
    run.seed_provided = true;
  }
  read_opt(root, "(root)", "output", run.output);
  read_opt(root, "(root)", "csv", run.csv);

  try {
    cfg.validate();
  } catch (const InvalidParameter& e) {
    throw FormatError(std::string("config validation: ") + e.what(), 0);
  }
  return run;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config file: " + path, 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string run_config_to_json(const RunConfig& cfg) {
  const ExperimentConfig& e = cfg.experiment;
  json root;
  root["sweep"]["kind"] = e.sweep_kind == SweepKind::TrainSize ? "n" : "epochs";
  root["sweep"]["values"] = e.sweep_values;
  root["n"] = e.n;
  if (e.fixed_data) {
    root["data"]["source"] = "idx";
  } else {
    root["data"]["source"] = "synthetic";
    root["data"]["dim"] = e.synth.dim;
    root["data"]["separation"] = e.synth.separation;
    root["data"]["noise_sigma"] = e.synth.noise_sigma;
  }
  root["data"]["randomize_fraction"] = e.randomize_fraction;
  root["data"]["binarize"] = e.binarize;
  root["model"]["architecture"] =
      e.model.architecture == Architecture::Linear ? "linear" : "mlp";
  if (!e.model.hidden.empty()) root["model"]["hidden"] = e.model.hidden;
  root["model"]["input_dim"] = e.model.input_dim;
  root["model"]["num_classes"] = e.model.num_classes;
  root["model"]["init_std"] = e.model.init_std;
  root["sgd"]["alpha0"] = e.sgd.alpha0;
  root["sgd"]["decay_rate"] = e.sgd.decay_rate;
  root["sgd"]["epoch_interval"] = e.sgd.epoch_interval;
  root["sgd"]["momentum"] = e.sgd.momentum;
  root["sgd"]["batch_size"] = e.sgd.batch_size;
  root["sgd"]["epochs"] = e.sgd.epochs;
  if (e.sgd.stop_at_train_loss) {
    root["sgd"]["stop_at_train_loss"] = *e.sgd.stop_at_train_loss;
  }
  root["pipeline"]["replicas"] = e.replicas;
  root["pipeline"]["loss_draws"] = e.loss_draws;
  root["pipeline"]["prior_subsets"] = e.prior.num_subsets;
  root["pipeline"]["sigma_threshold"] = e.sigma.threshold;
  root["pipeline"]["sigma_draws"] = e.sigma.mc_weight_draws;
  root["pipeline"]["delta"] = e.delta;
  root["pipeline"]["single_draw"] = e.single_draw;
  root["pipeline"]["lambda"] = e.lambda;
  root["pipeline"]["gamma"] = e.gamma;
  root["seed"] = e.master_seed;
  root["output"] = cfg.output;
  root["csv"] = cfg.csv;
  return root.dump(2) + "\n";
}

}  // namespace cibound
