// Command-line surface for training, inspecting, and evaluating the models
// in this library. Every command ends by printing one JSON object to stdout
// holding the run manifest (command, config, seed, input checksums) and the
// command result, so runs can be reproduced and diffed.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "nrbm/data.hpp"
#include "nrbm/digest.hpp"
#include "nrbm/errors.hpp"
#include "nrbm/knn.hpp"
#include "nrbm/lasso.hpp"
#include "nrbm/model_io.hpp"
#include "nrbm/pgm.hpp"
#include "nrbm/rbm.hpp"
#include "nrbm/stability.hpp"
#include "nrbm/train.hpp"

using nlohmann::json;

namespace {

struct DataFlags {
  std::string path;
  std::string format = "csv";
  std::string labels_path;  // idx label file
  bool label_col = false;
  bool header = false;
  bool normalize = false;
  std::size_t vocab = 0;
};

void add_data_flags(CLI::App* cmd, DataFlags& flags, const std::string& name,
                    const std::string& flag = "--data") {
  cmd->add_option(flag, flags.path, name + " path")->required();
  cmd->add_option("--format", flags.format, "input format")
      ->check(CLI::IsMember({"idx", "csv", "bow"}));
  cmd->add_option("--labels", flags.labels_path,
                  "IDX label file paired with --format idx");
  cmd->add_flag("--label-col", flags.label_col,
                "last CSV column is an integer class label");
  cmd->add_flag("--header", flags.header, "skip a CSV header row");
  cmd->add_flag("--normalize", flags.normalize,
                "min-max normalize CSV columns into [0,1]");
  cmd->add_option("--vocab", flags.vocab,
                  "vocabulary size for --format bow (0 = max index seen)");
}

nrbm::DataMatrix load_dataset(const DataFlags& flags) {
  if (flags.format != "idx" && !flags.labels_path.empty()) {
    throw nrbm::UsageError("--labels applies only to --format idx");
  }
  if (flags.format != "csv" &&
      (flags.label_col || flags.header || flags.normalize)) {
    throw nrbm::UsageError(
        "--label-col/--header/--normalize apply only to --format csv");
  }
  if (flags.format != "bow" && flags.vocab != 0) {
    throw nrbm::UsageError("--vocab applies only to --format bow");
  }

  if (flags.format == "idx") {
    return flags.labels_path.empty()
               ? nrbm::load_idx(flags.path)
               : nrbm::load_idx(flags.path, flags.labels_path);
  }
  if (flags.format == "bow") {
    std::size_t blanks = 0;
    nrbm::DataMatrix data =
        nrbm::load_sparse_bow(flags.path, flags.vocab, &blanks);
    if (blanks > 0) {
      std::cerr << "warning: skipped " << blanks << " blank line(s) in "
                << flags.path << "\n";
    }
    return data;
  }
  nrbm::CsvOptions opts;
  opts.has_label_col = flags.label_col;
  opts.has_header = flags.header;
  opts.normalize = flags.normalize;
  return nrbm::load_dense_csv(flags.path, opts);
}

json data_flags_json(const DataFlags& flags) {
  json j;
  j["path"] = flags.path;
  j["format"] = flags.format;
  if (!flags.labels_path.empty()) j["labels"] = flags.labels_path;
  if (flags.label_col) j["label_col"] = true;
  if (flags.header) j["header"] = true;
  if (flags.normalize) j["normalize"] = true;
  if (flags.vocab != 0) j["vocab"] = flags.vocab;
  return j;
}

json input_checksum(const std::string& path) {
  json j;
  j["path"] = path;
  j["sha256"] = nrbm::sha256_file(path);
  return j;
}

void emit(const std::string& command, const json& config, std::uint64_t seed,
          const json& inputs, const json& outputs, const json& result) {
  json doc;
  doc["manifest"] = {{"command", command},
                     {"config", config},
                     {"seed", seed},
                     {"inputs", inputs},
                     {"outputs", outputs}};
  doc["result"] = result;
  std::cout << doc.dump(2) << std::endl;
}

json train_config_json(const nrbm::TrainConfig& config) {
  return json{{"eta", config.eta},
              {"alpha", config.alpha},
              {"cd_k", config.cd_k},
              {"batch_size", config.batch_size},
              {"epochs", config.epochs},
              {"seed", config.seed},
              {"hidden_count", config.hidden_count},
              {"hidden_bias_init", config.hidden_bias_init},
              {"weight_init_max", config.weight_init_max}};
}

json metrics_json(const nrbm::ClassificationMetrics& m) {
  json j;
  j["sensitivity"] = m.sensitivity;
  j["specificity"] = m.specificity;
  j["precision"] = m.precision;
  j["f_measure"] = m.f_measure;
  if (m.auc) {
    j["auc"] = *m.auc;
    j["auc_ci_low"] = *m.auc_ci_low;
    j["auc_ci_high"] = *m.auc_ci_high;
  } else {
    j["auc"] = nullptr;
  }
  return j;
}

std::vector<double> parse_tau_set(const std::string& text) {
  // start:stop:step, inclusive of stop up to rounding.
  std::vector<double> taus;
  double start = 0, stop = 0, step = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3 ||
      !(step > 0.0) || stop < start) {
    throw nrbm::UsageError("--tau-set expects start:stop:step");
  }
  for (double t = start; t <= stop + 0.5 * step; t += step) {
    taus.push_back(t);
  }
  return taus;
}

std::vector<double> parse_edges(const std::string& text) {
  std::vector<double> edges;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t next = text.find(',', pos);
    if (next == std::string::npos) next = text.size();
    edges.push_back(std::stod(text.substr(pos, next - pos)));
    pos = next + 1;
  }
  return edges;
}

void write_posteriors_csv(const nrbm::Matrix& posteriors,
                          const std::vector<int>& labels,
                          const std::string& path) {
  nrbm::DataMatrix out;
  out.values = posteriors;
  out.labels = labels;
  nrbm::write_dense_csv(out, path);
}

// ---- commands ----

int cmd_train(const DataFlags& data_flags, const nrbm::TrainConfig& config,
              const std::string& out_path, const std::string& trace_path) {
  const nrbm::DataMatrix data = load_dataset(data_flags);
  data.validate();
  auto [params, trace] = nrbm::train(data, config);

  nrbm::ModelFile model;
  model.kind = config.alpha > 0.0 ? "nrbm" : "rbm";
  model.rbm = params;
  model.train_config = train_config_json(config);
  model.master_seed = config.seed;
  nrbm::save_model(model, out_path);
  if (!trace_path.empty()) trace.write_csv(trace_path);

  json outputs{{"model", out_path}};
  if (!trace_path.empty()) outputs["trace"] = trace_path;
  json result;
  result["model_kind"] = model.kind;
  result["rows"] = data.rows();
  result["cols"] = data.cols();
  result["final_recon_mse"] = trace.records.back().recon_mse;
  result["final_negative_fraction"] = trace.records.back().negative_fraction;
  result["final_used_units"] = trace.records.back().used_units;

  json config_j = train_config_json(config);
  config_j["data"] = data_flags_json(data_flags);
  emit("train", config_j, config.seed,
       json{{"data", input_checksum(data_flags.path)}}, outputs, result);
  return 0;
}

int cmd_transform(const std::string& model_path, const DataFlags& data_flags,
                  const std::string& out_path) {
  const nrbm::ModelFile model = nrbm::load_model(model_path);
  if (!model.rbm) {
    throw nrbm::UsageError("transform requires an rbm/nrbm/pipeline model");
  }
  const nrbm::DataMatrix data = load_dataset(data_flags);
  const nrbm::Matrix posteriors = nrbm::hidden_posteriors(*model.rbm, data);
  write_posteriors_csv(posteriors, data.labels, out_path);

  json config_j{{"model", model_path}, {"data", data_flags_json(data_flags)}};
  emit("transform", config_j, model.master_seed,
       json{{"model", input_checksum(model_path)},
            {"data", input_checksum(data_flags.path)}},
       json{{"posteriors", out_path}},
       json{{"rows", posteriors.rows()}, {"hidden", posteriors.cols()}});
  return 0;
}

int cmd_reconstruct(const std::string& model_path, const DataFlags& data_flags,
                    const std::string& out_path) {
  const nrbm::ModelFile model = nrbm::load_model(model_path);
  if (!model.rbm) {
    throw nrbm::UsageError("reconstruct requires an rbm/nrbm/pipeline model");
  }
  const nrbm::DataMatrix data = load_dataset(data_flags);
  const nrbm::Matrix recon = nrbm::reconstruct(*model.rbm, data);
  nrbm::DataMatrix out;
  out.values = recon;
  nrbm::write_dense_csv(out, out_path);

  const double mse = nrbm::reconstruction_mse(*model.rbm, data);
  json config_j{{"model", model_path}, {"data", data_flags_json(data_flags)}};
  emit("reconstruct", config_j, model.master_seed,
       json{{"model", input_checksum(model_path)},
            {"data", input_checksum(data_flags.path)}},
       json{{"reconstruction", out_path}}, json{{"recon_mse", mse}});
  return 0;
}

int cmd_dead_units(const std::string& model_path, const std::string& tau_set) {
  const nrbm::ModelFile model = nrbm::load_model(model_path);
  if (!model.rbm) {
    throw nrbm::UsageError("dead-units requires an rbm/nrbm/pipeline model");
  }
  nrbm::DeadUnitConfig config;
  config.thresholds = parse_tau_set(tau_set);
  config.n_visible = model.rbm->n_visible();
  const nrbm::DeadUnitReport report = nrbm::dead_units(*model.rbm, config);

  json result;
  result["thresholds"] = config.thresholds;
  result["used_per_threshold"] = report.used_per_threshold;
  result["averaged_used"] = report.averaged_used;
  result["hidden_count"] = model.rbm->n_hidden();
  emit("dead-units", json{{"model", model_path}, {"tau_set", tau_set}},
       model.master_seed, json{{"model", input_checksum(model_path)}}, json{},
       result);
  return 0;
}

int cmd_export_filters(const std::string& model_path, std::size_t width,
                       std::size_t height, std::size_t grid_cols,
                       const std::string& out_path) {
  const nrbm::ModelFile model = nrbm::load_model(model_path);
  if (!model.rbm) {
    throw nrbm::UsageError("export-filters requires an rbm/nrbm model");
  }
  nrbm::export_filters(*model.rbm, width, height, grid_cols, out_path);
  emit("export-filters",
       json{{"model", model_path},
            {"width", width},
            {"height", height},
            {"grid_cols", grid_cols}},
       model.master_seed, json{{"model", input_checksum(model_path)}},
       json{{"image", out_path}},
       json{{"filters", model.rbm->n_hidden()}});
  return 0;
}

int cmd_histogram(const std::string& model_path, const std::string& bins,
                  const std::string& out_path) {
  const nrbm::ModelFile model = nrbm::load_model(model_path);
  if (!model.rbm) {
    throw nrbm::UsageError("histogram requires an rbm/nrbm model");
  }
  const std::vector<double> edges =
      bins.empty() ? nrbm::default_trace_bin_edges() : parse_edges(bins);
  const std::vector<std::size_t> counts =
      nrbm::weight_histogram(*model.rbm, edges);

  std::ofstream out(out_path);
  if (!out) throw nrbm::FormatError("cannot open file for writing: " + out_path);
  out << "bin_lo,bin_hi,count\n";
  char buf[96];
  for (std::size_t b = 0; b < counts.size(); ++b) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%zu\n", edges[b], edges[b + 1],
                  counts[b]);
    out << buf;
  }
  out.close();

  emit("histogram", json{{"model", model_path}, {"bins", bins}},
       model.master_seed, json{{"model", input_checksum(model_path)}},
       json{{"histogram", out_path}},
       json{{"counts", counts}, {"total", model.rbm->weights.size()}});
  return 0;
}

int cmd_knn_eval(const std::string& train_path, const std::string& test_path,
                 std::size_t k, const std::string& metric_name) {
  nrbm::CsvOptions opts;
  opts.has_label_col = true;
  const nrbm::DataMatrix train = nrbm::load_dense_csv(train_path, opts);
  const nrbm::DataMatrix test = nrbm::load_dense_csv(test_path, opts);
  const nrbm::KnnMetric metric = nrbm::parse_knn_metric(metric_name);
  const double error =
      nrbm::knn_error_rate(train.values, train.labels, test.values,
                           test.labels, k, metric);

  emit("knn-eval",
       json{{"train_posteriors", train_path},
            {"test_posteriors", test_path},
            {"k", k},
            {"metric", metric_name}},
       0,
       json{{"train_posteriors", input_checksum(train_path)},
            {"test_posteriors", input_checksum(test_path)}},
       json{},
       json{{"error_rate", error},
            {"train_rows", train.rows()},
            {"test_rows", test.rows()}});
  return 0;
}

int cmd_stabilize(const DataFlags& data_flags, const DataFlags& test_flags,
                  bool has_test, const std::string& method_name,
                  nrbm::StabilityConfig config, const std::string& out_path,
                  std::string csv_path, const std::string& model_out,
                  const std::string& t_list_text) {
  config.method = nrbm::parse_stability_method(method_name);

  const nrbm::DataMatrix data = load_dataset(data_flags);
  std::optional<nrbm::DataMatrix> test;
  if (has_test) test = load_dataset(test_flags);

  // Subset sizes above the feature count cannot be selected; drop them.
  std::vector<std::size_t> sizes;
  for (std::size_t t : config.subset_sizes) {
    if (t <= data.cols()) {
      sizes.push_back(t);
    } else {
      std::cerr << "warning: dropping subset size " << t
                << " (only " << data.cols() << " features)\n";
    }
  }
  if (sizes.empty()) {
    throw nrbm::UsageError("--t-list has no entries <= feature count");
  }
  config.subset_sizes = sizes;

  const nrbm::StabilityOutcome outcome = nrbm::run_stability_protocol(
      data, config, test ? &*test : nullptr);

  json report;
  report["method"] = to_string(outcome.method);
  report["bootstraps"] = config.bootstraps;
  report["k_total"] = data.cols();
  report["per_subset_size"] = json::array();
  for (const nrbm::StabilityReport& r : outcome.per_size) {
    json subsets = json::array();
    for (const nrbm::FeatureSubset& s : r.subsets) {
      subsets.push_back(
          json{{"replicate", s.source_replicate}, {"indices", s.indices}});
    }
    report["per_subset_size"].push_back(json{{"T", r.subset_size},
                                             {"consistency", r.consistency},
                                             {"jaccard", r.jaccard},
                                             {"subsets", subsets}});
  }
  report["final_bias"] = outcome.final_bias;
  if (outcome.test_metrics) {
    report["test_metrics"] = metrics_json(*outcome.test_metrics);
  }
  std::ofstream out(out_path);
  if (!out) throw nrbm::FormatError("cannot open file for writing: " + out_path);
  out << report.dump(2) << '\n';
  out.close();

  if (csv_path.empty()) {
    csv_path = out_path;
    const std::size_t dot = csv_path.rfind('.');
    if (dot != std::string::npos) csv_path.resize(dot);
    csv_path += ".csv";
  }
  nrbm::write_stability_csv(outcome, csv_path);

  if (!model_out.empty()) {
    nrbm::ModelFile model;
    model.kind = "lasso";
    nrbm::LassoModel lasso;
    lasso.weights = outcome.final_weights;
    lasso.bias = outcome.final_bias;
    lasso.beta = config.beta;
    lasso.converged = true;
    model.lasso = lasso;
    model.master_seed = config.seed;
    model.train_config = train_config_json(config.stage1);
    nrbm::save_model(model, model_out);
  }

  json config_j{{"method", method_name},
                {"beta", config.beta},
                {"bootstraps", config.bootstraps},
                {"t_list", t_list_text},
                {"stage1", train_config_json(config.stage1)},
                {"data", data_flags_json(data_flags)}};
  json inputs{{"data", input_checksum(data_flags.path)}};
  if (has_test) inputs["test_data"] = input_checksum(test_flags.path);
  json outputs{{"report", out_path}, {"csv", csv_path}};
  if (!model_out.empty()) outputs["model"] = model_out;

  json result;
  result["per_subset_size"] = json::array();
  for (const nrbm::StabilityReport& r : outcome.per_size) {
    result["per_subset_size"].push_back(json{{"T", r.subset_size},
                                             {"consistency", r.consistency},
                                             {"jaccard", r.jaccard}});
  }
  if (outcome.test_metrics) {
    result["test_metrics"] = metrics_json(*outcome.test_metrics);
  }
  emit("stabilize", config_j, config.seed, inputs, outputs, result);
  return 0;
}

int cmd_evaluate(const std::string& model_path, const DataFlags& test_flags,
                 double threshold) {
  const nrbm::ModelFile model = nrbm::load_model(model_path);
  const nrbm::DataMatrix test = load_dataset(test_flags);
  if (!test.has_labels()) {
    throw nrbm::UsageError("evaluate requires labeled test data");
  }

  std::vector<double> scores;
  if (model.kind == "lasso") {
    scores = nrbm::lasso_scores(test.values, model.lasso->weights,
                                model.lasso->bias);
  } else if (model.kind == "pipeline") {
    const nrbm::Matrix posteriors =
        nrbm::hidden_posteriors(*model.rbm, test);
    scores = nrbm::lasso_scores(posteriors, model.lasso->weights,
                                model.lasso->bias);
  } else {
    throw nrbm::UsageError(
        "evaluate requires a lasso or pipeline model; rbm/nrbm models have "
        "no classifier head");
  }
  const nrbm::ClassificationMetrics metrics =
      nrbm::classification_metrics(scores, test.labels, threshold);

  emit("evaluate",
       json{{"model", model_path},
            {"threshold", threshold},
            {"test_data", data_flags_json(test_flags)}},
       model.master_seed,
       json{{"model", input_checksum(model_path)},
            {"test_data", input_checksum(test_flags.path)}},
       json{}, metrics_json(metrics));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonnegative restricted Boltzmann machines: parts-based "
               "feature learning and predictive model stabilization"};
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "train an NRBM (or plain RBM)");
  DataFlags train_data;
  nrbm::TrainConfig train_config;
  std::string train_out = "model.json";
  std::string train_trace;
  add_data_flags(train_cmd, train_data, "training data");
  train_cmd->add_option("--hidden", train_config.hidden_count, "hidden units")
      ->required();
  train_cmd->add_option("--alpha", train_config.alpha, "barrier strength");
  train_cmd->add_option("--eta", train_config.eta, "learning rate");
  train_cmd->add_option("--batch", train_config.batch_size, "mini-batch size");
  train_cmd->add_option("--epochs", train_config.epochs, "training epochs");
  train_cmd->add_option("--cd-k", train_config.cd_k, "CD chain length");
  train_cmd->add_option("--seed", train_config.seed, "master seed");
  train_cmd->add_option("--hidden-bias-init", train_config.hidden_bias_init,
                        "initial hidden bias");
  train_cmd->add_option("--weight-init-max", train_config.weight_init_max,
                        "upper end of the uniform weight init");
  train_cmd->add_option("--out", train_out, "output model file");
  train_cmd->add_option("--trace", train_trace, "per-epoch trace CSV");

  // transform
  auto* transform_cmd =
      app.add_subcommand("transform", "map data to hidden posteriors");
  std::string transform_model;
  DataFlags transform_data;
  std::string transform_out = "posteriors.csv";
  transform_cmd->add_option("--model", transform_model, "model file")
      ->required();
  add_data_flags(transform_cmd, transform_data, "input data");
  transform_cmd->add_option("--out", transform_out, "output CSV");

  // reconstruct
  auto* recon_cmd = app.add_subcommand(
      "reconstruct", "one-step mean-field reconstruction of data");
  std::string recon_model;
  DataFlags recon_data;
  std::string recon_out = "recon.csv";
  recon_cmd->add_option("--model", recon_model, "model file")->required();
  add_data_flags(recon_cmd, recon_data, "input data");
  recon_cmd->add_option("--out", recon_out, "output CSV");

  // dead-units
  auto* dead_cmd =
      app.add_subcommand("dead-units", "count used hidden units per threshold");
  std::string dead_model;
  std::string tau_set = "0.01:0.06:0.01";
  dead_cmd->add_option("--model", dead_model, "model file")->required();
  dead_cmd->add_option("--tau-set", tau_set, "thresholds start:stop:step");

  // export-filters
  auto* filters_cmd =
      app.add_subcommand("export-filters", "render receptive fields as PGM");
  std::string filters_model, filters_out = "filters.pgm";
  std::size_t filters_width = 0, filters_height = 0, filters_grid = 0;
  filters_cmd->add_option("--model", filters_model, "model file")->required();
  filters_cmd->add_option("--width", filters_width, "tile width")->required();
  filters_cmd->add_option("--height", filters_height, "tile height")
      ->required();
  filters_cmd->add_option("--grid-cols", filters_grid,
                          "tiles per row (0 = square grid)");
  filters_cmd->add_option("--out", filters_out, "output PGM file");

  // histogram
  auto* hist_cmd =
      app.add_subcommand("histogram", "histogram of weight values");
  std::string hist_model, hist_bins, hist_out = "hist.csv";
  hist_cmd->add_option("--model", hist_model, "model file")->required();
  hist_cmd->add_option("--bins", hist_bins,
                       "comma-separated bin edges (default: trace bins)");
  hist_cmd->add_option("--out", hist_out, "output CSV");

  // knn-eval
  auto* knn_cmd = app.add_subcommand(
      "knn-eval", "kNN error rate on labeled posterior CSVs");
  std::string knn_train, knn_test, knn_metric = "cosine";
  std::size_t knn_k = 4;
  knn_cmd->add_option("--train-posteriors", knn_train,
                      "training posteriors CSV (labels in last column)")
      ->required();
  knn_cmd->add_option("--test-posteriors", knn_test,
                      "test posteriors CSV (labels in last column)")
      ->required();
  knn_cmd->add_option("--k", knn_k, "neighbor count");
  knn_cmd->add_option("--metric", knn_metric, "similarity metric")
      ->check(CLI::IsMember({"cosine", "euclidean"}));

  // stabilize
  auto* stab_cmd = app.add_subcommand(
      "stabilize", "bootstrap feature-selection stability protocol");
  DataFlags stab_data, stab_test;
  std::string stab_method = "nrbm+lasso";
  std::string stab_out = "report.json", stab_csv, stab_model_out;
  std::string t_list_text = "10,50,100,150,200";
  nrbm::StabilityConfig stab_config;
  stab_config.stage1.hidden_count = 200;
  bool stab_has_test = false;
  add_data_flags(stab_cmd, stab_data, "labeled training data");
  stab_cmd->add_option("--method", stab_method, "protocol variant")
      ->check(CLI::IsMember({"lasso", "rbm+lasso", "nrbm+lasso"}));
  stab_cmd->add_option("--hidden", stab_config.stage1.hidden_count,
                       "stage-1 hidden units");
  stab_cmd->add_option("--beta", stab_config.beta, "lasso penalty");
  stab_cmd->add_option("--bootstraps", stab_config.bootstraps,
                       "bootstrap replicates");
  stab_cmd->add_option("--t-list", t_list_text, "subset sizes, comma-separated");
  stab_cmd->add_option("--seed", stab_config.seed, "master seed");
  stab_cmd->add_option("--alpha", stab_config.stage1.alpha,
                       "stage-1 barrier strength (nrbm+lasso)");
  stab_cmd->add_option("--eta", stab_config.stage1.eta, "stage-1 learning rate");
  stab_cmd->add_option("--epochs", stab_config.stage1.epochs,
                       "stage-1 training epochs");
  stab_cmd->add_option("--batch", stab_config.stage1.batch_size,
                       "stage-1 mini-batch size");
  stab_cmd->add_option("--cd-k", stab_config.stage1.cd_k,
                       "stage-1 CD chain length");
  auto* test_opt = stab_cmd->add_option("--test-data", stab_test.path,
                                        "held-out labeled data for metrics");
  stab_cmd->add_flag("--test-label-col", stab_test.label_col,
                     "last column of --test-data is the label");
  stab_cmd->add_option("--out", stab_out, "report JSON path");
  stab_cmd->add_option("--csv-out", stab_csv,
                       "report CSV path (default: derived from --out)");
  stab_cmd->add_option("--model-out", stab_model_out,
                       "save the averaged final linear model");

  // evaluate
  auto* eval_cmd = app.add_subcommand(
      "evaluate", "classification metrics of a saved model on test data");
  std::string eval_model;
  DataFlags eval_data;
  double eval_threshold = 0.5;
  eval_cmd->add_option("--model", eval_model, "model file")->required();
  add_data_flags(eval_cmd, eval_data, "labeled test data", "--test-data");
  eval_cmd->add_option("--threshold", eval_threshold, "decision threshold");

  try {
    app.parse(argc, argv);

    if (train_cmd->parsed()) {
      return cmd_train(train_data, train_config, train_out, train_trace);
    }
    if (transform_cmd->parsed()) {
      return cmd_transform(transform_model, transform_data, transform_out);
    }
    if (recon_cmd->parsed()) {
      return cmd_reconstruct(recon_model, recon_data, recon_out);
    }
    if (dead_cmd->parsed()) return cmd_dead_units(dead_model, tau_set);
    if (filters_cmd->parsed()) {
      return cmd_export_filters(filters_model, filters_width, filters_height,
                                filters_grid, filters_out);
    }
    if (hist_cmd->parsed()) return cmd_histogram(hist_model, hist_bins, hist_out);
    if (knn_cmd->parsed()) {
      return cmd_knn_eval(knn_train, knn_test, knn_k, knn_metric);
    }
    if (stab_cmd->parsed()) {
      stab_has_test = test_opt->count() > 0;
      stab_test.format = stab_data.format;
      stab_test.header = stab_data.header;
      stab_test.normalize = stab_data.normalize;
      stab_test.vocab = stab_data.vocab;
      stab_test.label_col = stab_test.label_col || stab_data.label_col;
      std::vector<std::size_t> sizes;
      for (double e : parse_edges(t_list_text)) {
        if (e < 1.0) throw nrbm::UsageError("--t-list entries must be >= 1");
        sizes.push_back(static_cast<std::size_t>(e));
      }
      stab_config.subset_sizes = sizes;
      return cmd_stabilize(stab_data, stab_test, stab_has_test, stab_method,
                           stab_config, stab_out, stab_csv, stab_model_out,
                           t_list_text);
    }
    if (eval_cmd->parsed()) {
      return cmd_evaluate(eval_model, eval_data, eval_threshold);
    }
    throw nrbm::UsageError("no command given");
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const nrbm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
