#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ubad/pipeline.hpp"
#include "ubad/svg.hpp"

namespace {

using namespace ubad;

struct Overrides {
  std::string workdir;
  std::optional<std::uint64_t> seed;
  std::string variant;
  std::optional<int> epochs;
  std::optional<int> omega;
  std::optional<int> matrix_days;
  std::optional<int> critic_n;
  std::string test_start;
  std::optional<int> stride;
  std::string preset;
};

RunConfig load_config(const std::string& path, const Overrides& ov) {
  RunConfig cfg = RunConfig::load(path);
  // Precedence: flag > UBAD_WORKDIR > config file.
  if (const char* env = std::getenv("UBAD_WORKDIR"); env && *env) cfg.workdir = env;
  if (!ov.workdir.empty()) cfg.workdir = ov.workdir;
  if (ov.seed) {
    cfg.seed = *ov.seed;
    if (cfg.org) cfg.org->seed = *ov.seed;
  }
  if (!ov.variant.empty()) cfg.variant = variant_from_name(ov.variant);
  if (ov.epochs) cfg.train.epochs = *ov.epochs;
  if (ov.omega) cfg.deviation.omega = *ov.omega;
  if (ov.matrix_days) cfg.deviation.matrix_days = *ov.matrix_days;
  if (ov.critic_n) cfg.critic_n = *ov.critic_n;
  if (!ov.test_start.empty()) cfg.test_start = parse_date(ov.test_start);
  if (ov.stride) cfg.train_stride = *ov.stride;
  if (!ov.preset.empty()) cfg.feature_preset = ov.preset;
  cfg.validate();
  return cfg;
}

int export_matrix(const RunConfig& cfg, const std::string& user, const std::string& day_str,
                  const std::string& aspect, std::string out_dir) {
  const std::string store_path = cfg.extract_dir() + "/measurements_" + aspect + ".json";
  if (!std::filesystem::exists(store_path)) {
    throw StageError("missing measurement store: " + store_path + " (run extract first)");
  }
  const MeasurementStore store = MeasurementStore::load(store_path);
  std::ifstream groups_in(cfg.extract_dir() + "/groups.json");
  if (!groups_in) throw StageError("missing group map: " + cfg.extract_dir() + "/groups.json");
  std::ostringstream buf;
  buf << groups_in.rdbuf();
  const GroupMap groups = GroupMap::from_json(buf.str());

  MatrixBuilder builder(store, groups, cfg.deviation);
  const CompoundMatrix matrix = builder.matrix(user, parse_date(day_str));
  if (out_dir.empty()) out_dir = cfg.eval_dir();
  std::filesystem::create_directories(out_dir);
  const std::string base = out_dir + "/matrix_" + aspect + "_" + user + "_" + day_str;
  write_matrix_csv(base + ".csv", matrix, cfg.frames);
  write_text_file(base + ".svg", svg_matrix_heatmap(matrix, cfg.frames, cfg.deviation.delta_cap));
  std::cout << "wrote " << base << ".csv and .svg\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"behavioral deviation anomaly detection pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides ov;
  std::string matrix_user, matrix_day, matrix_aspect = "http", matrix_out;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "run config (JSON)")->required();
    cmd->add_option("--workdir", ov.workdir, "override the working directory");
    cmd->add_option("--seed", ov.seed, "override the master seed");
    cmd->add_option("--variant", ov.variant,
                    "compound|one_day|no_group|all_in_one|baseline|base_ff");
    cmd->add_option("--epochs", ov.epochs, "override training epochs");
    cmd->add_option("--omega", ov.omega, "override the history window");
    cmd->add_option("--matrix-days", ov.matrix_days, "override the matrix day span");
    cmd->add_option("--n", ov.critic_n, "override the critic N");
    cmd->add_option("--test-start", ov.test_start, "override the first scored day");
    cmd->add_option("--stride", ov.stride, "override the training day stride");
    cmd->add_option("--preset", ov.preset, "override the feature preset");
  };

  auto* gen = app.add_subcommand("gen", "generate the synthetic dataset");
  auto* extract = app.add_subcommand("extract", "parse events and extract measurements");
  auto* train = app.add_subcommand("train", "train the per-aspect autoencoders");
  auto* score = app.add_subcommand("score", "score every user over the test days");
  auto* rank = app.add_subcommand("rank", "build daily investigation lists");
  auto* eval = app.add_subcommand("eval", "evaluate lists against labels, emit report");
  auto* repro = app.add_subcommand("repro", "run gen through eval end to end");
  auto* matrix = app.add_subcommand("matrix", "export one user's deviation matrix");
  for (auto* cmd : {gen, extract, train, score, rank, eval, repro, matrix}) add_common(cmd);
  matrix->add_option("--user", matrix_user, "user id")->required();
  matrix->add_option("--day", matrix_day, "matrix end day (YYYY-MM-DD)")->required();
  matrix->add_option("--aspect", matrix_aspect, "aspect (default http)");
  matrix->add_option("--out", matrix_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const RunConfig cfg = load_config(config_path, ov);
    if (gen->parsed()) stage_gen(cfg);
    if (extract->parsed()) stage_extract(cfg);
    if (train->parsed()) stage_train(cfg);
    if (score->parsed()) stage_score(cfg);
    if (rank->parsed()) stage_rank(cfg);
    if (eval->parsed()) stage_eval(cfg);
    if (repro->parsed()) stage_repro(cfg);
    if (matrix->parsed()) {
      return export_matrix(cfg, matrix_user, matrix_day, matrix_aspect, matrix_out);
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const TrainingDivergedError& e) {
    std::cerr << "training diverged: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
