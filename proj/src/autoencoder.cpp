#include "ubad/autoencoder.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "ubad/errors.hpp"
#include "ubad/rng.hpp"

namespace ubad {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;
using nlohmann::ordered_json;

namespace {

struct LayerCache {
  MatrixXd x_in;     // B x in
  MatrixXd xhat;     // bn-normalized activations
  RowVectorXd inv_std;
  MatrixXd pre_act;  // post-bn affine, pre-ReLU
};

MatrixXd relu(const MatrixXd& m) { return m.cwiseMax(0.0); }

void check_finite(const Eigen::MatrixXd& batch) {
  if (!batch.allFinite()) throw UsageError("batch contains non-finite values");
}

}  // namespace

void TrainConfig::validate(bool batch_norm) const {
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (batch_norm && batch_size < 2) {
    throw ConfigError("batch_size must be >= 2 with batch norm enabled");
  }
  if (!(adadelta.rho > 0.0 && adadelta.rho < 1.0)) throw ConfigError("rho must be in (0, 1)");
  if (adadelta.eps_opt <= 0.0) throw ConfigError("eps_opt must be > 0");
  if (bn.eps <= 0.0) throw ConfigError("bn eps must be > 0");
  if (!(bn.momentum >= 0.0 && bn.momentum < 1.0)) {
    throw ConfigError("bn momentum must be in [0, 1)");
  }
  if (patience < 0) throw ConfigError("patience must be >= 0");
}

std::vector<int> Autoencoder::default_hidden(int input_dim) {
  if (input_dim >= 256) return {512, 256, 128, 64};
  std::vector<int> widths;
  for (int w : {64, 32, 16, 8}) {
    if (w < input_dim) widths.push_back(w);
  }
  if (widths.empty()) {
    for (int w = input_dim / 2; w >= 1 && widths.size() < 4; w /= 2) widths.push_back(w);
  }
  if (widths.empty()) widths.push_back(1);
  return widths;
}

Autoencoder Autoencoder::init(int input_dim, std::vector<int> hidden_widths,
                              std::uint64_t seed, bool batch_norm) {
  if (input_dim < 1) throw ConfigError("input_dim must be >= 1");
  if (hidden_widths.empty()) hidden_widths = default_hidden(input_dim);
  int prev = 0;
  for (std::size_t i = 0; i < hidden_widths.size(); ++i) {
    const int w = hidden_widths[i];
    if (w < 1) throw ConfigError("hidden width must be >= 1");
    if (i > 0 && w >= prev) throw ConfigError("encoder widths must be strictly decreasing");
    prev = w;
  }

  std::vector<int> widths;
  widths.push_back(input_dim);
  for (int w : hidden_widths) widths.push_back(w);
  for (int i = static_cast<int>(hidden_widths.size()) - 2; i >= 0; --i) {
    widths.push_back(hidden_widths[i]);
  }
  widths.push_back(input_dim);

  Autoencoder model;
  model.input_dim_ = input_dim;
  model.hidden_ = hidden_widths;
  model.seed_ = seed;
  model.batch_norm_ = batch_norm;

  Rng rng(Rng::derive(seed, "init"));
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int in = widths[l];
    const int out = widths[l + 1];
    DenseLayer layer;
    layer.w.resize(in, out);
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    for (int i = 0; i < in; ++i) {
      for (int j = 0; j < out; ++j) layer.w(i, j) = rng.uniform(-limit, limit);
    }
    layer.b = VectorXd::Zero(out);
    const bool hidden = l + 2 < widths.size();
    layer.relu = hidden;
    layer.batch_norm = hidden && batch_norm;
    if (layer.batch_norm) {
      layer.gamma = VectorXd::Ones(out);
      layer.beta = VectorXd::Zero(out);
      layer.run_mean = VectorXd::Zero(out);
      layer.run_var = VectorXd::Ones(out);
      layer.eg2_gamma = VectorXd::Zero(out);
      layer.edx2_gamma = VectorXd::Zero(out);
      layer.eg2_beta = VectorXd::Zero(out);
      layer.edx2_beta = VectorXd::Zero(out);
    }
    layer.eg2_w = MatrixXd::Zero(in, out);
    layer.edx2_w = MatrixXd::Zero(in, out);
    layer.eg2_b = VectorXd::Zero(out);
    layer.edx2_b = VectorXd::Zero(out);
    model.layers_.push_back(std::move(layer));
  }
  return model;
}

namespace {

// Shared forward walk. `caches` non-null in training mode collects what the
// backward pass needs; `update_running` folds batch statistics into the
// running estimates.
MatrixXd forward_walk(const std::vector<DenseLayer>& layers, const BatchNormConfig& bn,
                      const MatrixXd& batch, bool training, bool update_running,
                      std::vector<LayerCache>* caches,
                      std::vector<DenseLayer>* mutable_layers) {
  MatrixXd x = batch;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const DenseLayer& layer = layers[l];
    LayerCache cache;
    if (caches) cache.x_in = x;
    MatrixXd z = (x * layer.w).rowwise() + layer.b.transpose();
    if (layer.batch_norm) {
      const double B = static_cast<double>(z.rows());
      RowVectorXd mu, var;
      if (training) {
        mu = z.colwise().mean();
        var = (z.rowwise() - mu).array().square().colwise().mean();
        if (update_running && mutable_layers) {
          DenseLayer& target = (*mutable_layers)[l];
          target.run_mean = bn.momentum * target.run_mean + (1.0 - bn.momentum) * mu.transpose();
          target.run_var = bn.momentum * target.run_var + (1.0 - bn.momentum) * var.transpose();
        }
        (void)B;
      } else {
        mu = layer.run_mean.transpose();
        var = layer.run_var.transpose();
      }
      const RowVectorXd inv_std = (var.array() + bn.eps).sqrt().inverse();
      MatrixXd xhat = (z.rowwise() - mu).array().rowwise() * inv_std.array();
      z = (xhat.array().rowwise() * layer.gamma.transpose().array()).matrix().rowwise() +
          layer.beta.transpose();
      if (caches) {
        cache.xhat = std::move(xhat);
        cache.inv_std = inv_std;
      }
    }
    if (caches) cache.pre_act = z;
    if (layer.relu) z = relu(z);
    if (caches) caches->push_back(std::move(cache));
    x = std::move(z);
  }
  return x;
}

std::vector<LayerGrads> backward_walk(const std::vector<DenseLayer>& layers,
                                      const std::vector<LayerCache>& caches,
                                      const MatrixXd& output, const MatrixXd& target) {
  const double n = static_cast<double>(output.rows()) * static_cast<double>(output.cols());
  MatrixXd d = 2.0 * (output - target) / n;

  std::vector<LayerGrads> grads(layers.size());
  for (int l = static_cast<int>(layers.size()) - 1; l >= 0; --l) {
    const DenseLayer& layer = layers[l];
    const LayerCache& cache = caches[l];
    if (layer.relu) {
      d = d.cwiseProduct((cache.pre_act.array() > 0.0).cast<double>().matrix());
    }
    if (layer.batch_norm) {
      const double B = static_cast<double>(d.rows());
      grads[l].gamma = d.cwiseProduct(cache.xhat).colwise().sum().transpose();
      grads[l].beta = d.colwise().sum().transpose();
      const MatrixXd dxhat =
          (d.array().rowwise() * layer.gamma.transpose().array()).matrix();
      const RowVectorXd sum_dxhat = dxhat.colwise().sum();
      const RowVectorXd sum_dxhat_xhat = dxhat.cwiseProduct(cache.xhat).colwise().sum();
      MatrixXd dz = B * dxhat;
      dz = dz.rowwise() - sum_dxhat;
      dz -= (cache.xhat.array().rowwise() * sum_dxhat_xhat.array()).matrix();
      dz = (dz.array().rowwise() * (cache.inv_std.array() / B)).matrix();
      d = std::move(dz);
    }
    grads[l].w = cache.x_in.transpose() * d;
    grads[l].b = d.colwise().sum().transpose();
    d = d * layer.w.transpose();
  }
  return grads;
}

void adadelta_step(Eigen::Ref<MatrixXd> param, Eigen::Ref<MatrixXd> eg2,
                   Eigen::Ref<MatrixXd> edx2, const MatrixXd& grad,
                   const AdadeltaParams& opt) {
  eg2.array() = opt.rho * eg2.array() + (1.0 - opt.rho) * grad.array().square();
  const MatrixXd dx =
      -((edx2.array() + opt.eps_opt) / (eg2.array() + opt.eps_opt)).sqrt() * grad.array();
  edx2.array() = opt.rho * edx2.array() + (1.0 - opt.rho) * dx.array().square();
  param.array() += dx.array();
}

void adadelta_step(VectorXd& param, VectorXd& eg2, VectorXd& edx2, const VectorXd& grad,
                   const AdadeltaParams& opt) {
  eg2.array() = opt.rho * eg2.array() + (1.0 - opt.rho) * grad.array().square();
  const VectorXd dx =
      (-((edx2.array() + opt.eps_opt) / (eg2.array() + opt.eps_opt)).sqrt() * grad.array())
          .matrix();
  edx2.array() = opt.rho * edx2.array() + (1.0 - opt.rho) * dx.array().square();
  param += dx;
}

}  // namespace

Eigen::MatrixXd Autoencoder::reconstruct(const Eigen::MatrixXd& batch) const {
  if (batch.cols() != input_dim_) {
    throw UsageError("batch width " + std::to_string(batch.cols()) +
                     " does not match input_dim " + std::to_string(input_dim_));
  }
  check_finite(batch);
  return forward_walk(layers_, bn_, batch, /*training=*/false, /*update_running=*/false,
                      nullptr, nullptr);
}

Eigen::MatrixXd Autoencoder::forward_batchstats(const Eigen::MatrixXd& batch) const {
  if (batch.cols() != input_dim_) throw UsageError("batch width mismatch");
  check_finite(batch);
  return forward_walk(layers_, bn_, batch, /*training=*/true, /*update_running=*/false,
                      nullptr, nullptr);
}

double Autoencoder::score(std::span<const double> vector) const {
  if (static_cast<int>(vector.size()) != input_dim_) {
    throw UsageError("vector length " + std::to_string(vector.size()) +
                     " does not match input_dim " + std::to_string(input_dim_));
  }
  Eigen::MatrixXd batch(1, input_dim_);
  for (int i = 0; i < input_dim_; ++i) batch(0, i) = vector[i];
  const Eigen::MatrixXd out = reconstruct(batch);
  return (out - batch).array().square().mean();
}

std::vector<double> Autoencoder::score_batch(const Eigen::MatrixXd& batch) const {
  const Eigen::MatrixXd out = reconstruct(batch);
  std::vector<double> scores(batch.rows());
  for (Eigen::Index i = 0; i < batch.rows(); ++i) {
    scores[i] = (out.row(i) - batch.row(i)).array().square().mean();
  }
  return scores;
}

std::vector<LayerGrads> Autoencoder::gradients(const Eigen::MatrixXd& batch) const {
  if (batch.cols() != input_dim_) throw UsageError("batch width mismatch");
  std::vector<LayerCache> caches;
  caches.reserve(layers_.size());
  const MatrixXd out = forward_walk(layers_, bn_, batch, /*training=*/true,
                                    /*update_running=*/false, &caches, nullptr);
  return backward_walk(layers_, caches, out, batch);
}

std::vector<double> Autoencoder::train(const std::vector<FlatVector>& data,
                                       const TrainConfig& config) {
  config.validate(batch_norm_);
  if (data.empty()) throw UsageError("training dataset is empty");
  const MatrixXd all = to_batch(data, input_dim_);
  const Eigen::Index n = all.rows();
  if (batch_norm_ && n < 2) {
    throw UsageError("batch norm needs at least two training samples");
  }
  bn_ = config.bn;

  Rng rng(Rng::derive(config.shuffle_seed, "shuffle"));
  std::vector<Eigen::Index> order(n);
  for (Eigen::Index i = 0; i < n; ++i) order[i] = i;

  std::vector<double> trace;
  trace.reserve(config.epochs);
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);

    // Batch boundaries; a trailing single sample is folded into the previous
    // batch so batch norm always sees at least two rows.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> batches;
    Eigen::Index pos = 0;
    while (pos < n) {
      Eigen::Index size = std::min<Eigen::Index>(config.batch_size, n - pos);
      if (batch_norm_ && n - pos - size == 1) size += 1;
      batches.emplace_back(pos, size);
      pos += size;
    }

    double squared_error = 0.0;
    for (const auto& [start, size] : batches) {
      MatrixXd batch(size, input_dim_);
      for (Eigen::Index i = 0; i < size; ++i) batch.row(i) = all.row(order[start + i]);

      std::vector<LayerCache> caches;
      caches.reserve(layers_.size());
      const MatrixXd out = forward_walk(layers_, bn_, batch, /*training=*/true,
                                        /*update_running=*/true, &caches, &layers_);
      squared_error += (out - batch).array().square().sum();
      const auto grads = backward_walk(layers_, caches, out, batch);

      for (std::size_t l = 0; l < layers_.size(); ++l) {
        DenseLayer& layer = layers_[l];
        adadelta_step(layer.w, layer.eg2_w, layer.edx2_w, grads[l].w, config.adadelta);
        adadelta_step(layer.b, layer.eg2_b, layer.edx2_b, grads[l].b, config.adadelta);
        if (layer.batch_norm) {
          adadelta_step(layer.gamma, layer.eg2_gamma, layer.edx2_gamma, grads[l].gamma,
                        config.adadelta);
          adadelta_step(layer.beta, layer.eg2_beta, layer.edx2_beta, grads[l].beta,
                        config.adadelta);
        }
      }
    }

    const double epoch_loss =
        squared_error / (static_cast<double>(n) * static_cast<double>(input_dim_));
    if (!std::isfinite(epoch_loss)) {
      throw TrainingDivergedError(
          "training diverged (non-finite loss) at epoch " + std::to_string(epoch), epoch);
    }
    trace.push_back(epoch_loss);

    if (config.patience > 0) {
      if (epoch_loss < best) {
        best = epoch_loss;
        since_best = 0;
      } else if (++since_best >= config.patience) {
        break;
      }
    }
  }
  return trace;
}

Eigen::MatrixXd to_batch(const std::vector<FlatVector>& data, int expected_dim) {
  MatrixXd batch(static_cast<Eigen::Index>(data.size()), expected_dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (static_cast<int>(data[i].dim()) != expected_dim) {
      throw UsageError("sample " + std::to_string(i) + " has dimension " +
                       std::to_string(data[i].dim()) + ", expected " +
                       std::to_string(expected_dim));
    }
    for (int j = 0; j < expected_dim; ++j) batch(i, j) = data[i].values[j];
  }
  return batch;
}

namespace {

ordered_json matrix_to_json(const MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) rows.push_back(m(i, j));
  }
  return rows;
}

MatrixXd matrix_from_json(const ordered_json& j, Eigen::Index rows, Eigen::Index cols) {
  if (static_cast<Eigen::Index>(j.size()) != rows * cols) {
    throw FormatError("checkpoint array has wrong length");
  }
  MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j[k++].get<double>();
  }
  return m;
}

ordered_json vector_to_json(const VectorXd& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

VectorXd vector_from_json(const ordered_json& j, Eigen::Index size) {
  if (static_cast<Eigen::Index>(j.size()) != size) {
    throw FormatError("checkpoint array has wrong length");
  }
  VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = j[i].get<double>();
  return v;
}

}  // namespace

std::string Autoencoder::to_json() const {
  ordered_json j;
  j["kind"] = "ubad-autoencoder";
  j["version"] = 1;
  j["input_dim"] = input_dim_;
  j["hidden"] = hidden_;
  j["seed"] = seed_;
  j["batch_norm"] = batch_norm_;
  j["bn_momentum"] = bn_.momentum;
  j["bn_eps"] = bn_.eps;
  // Doubles are written as shortest decimal strings that parse back to the
  // identical bit pattern, so save/load round-trips exactly.
  j["precision"] = "shortest-roundtrip-decimal";
  ordered_json layers = ordered_json::array();
  for (const auto& layer : layers_) {
    ordered_json lj;
    lj["in"] = layer.w.rows();
    lj["out"] = layer.w.cols();
    lj["batch_norm"] = layer.batch_norm;
    lj["relu"] = layer.relu;
    lj["w"] = matrix_to_json(layer.w);
    lj["b"] = vector_to_json(layer.b);
    lj["eg2_w"] = matrix_to_json(layer.eg2_w);
    lj["edx2_w"] = matrix_to_json(layer.edx2_w);
    lj["eg2_b"] = vector_to_json(layer.eg2_b);
    lj["edx2_b"] = vector_to_json(layer.edx2_b);
    if (layer.batch_norm) {
      lj["gamma"] = vector_to_json(layer.gamma);
      lj["beta"] = vector_to_json(layer.beta);
      lj["run_mean"] = vector_to_json(layer.run_mean);
      lj["run_var"] = vector_to_json(layer.run_var);
      lj["eg2_gamma"] = vector_to_json(layer.eg2_gamma);
      lj["edx2_gamma"] = vector_to_json(layer.edx2_gamma);
      lj["eg2_beta"] = vector_to_json(layer.eg2_beta);
      lj["edx2_beta"] = vector_to_json(layer.edx2_beta);
    }
    layers.push_back(std::move(lj));
  }
  j["layers"] = std::move(layers);
  return j.dump();
}

Autoencoder Autoencoder::from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded() || j.value("kind", "") != "ubad-autoencoder") {
    throw FormatError("not an autoencoder checkpoint");
  }
  if (j.value("version", 0) != 1) throw FormatError("unsupported checkpoint version");

  Autoencoder model;
  model.input_dim_ = j.at("input_dim").get<int>();
  model.hidden_ = j.at("hidden").get<std::vector<int>>();
  model.seed_ = j.at("seed").get<std::uint64_t>();
  model.batch_norm_ = j.at("batch_norm").get<bool>();
  model.bn_.momentum = j.at("bn_momentum").get<double>();
  model.bn_.eps = j.at("bn_eps").get<double>();
  for (const auto& lj : j.at("layers")) {
    DenseLayer layer;
    const auto in = lj.at("in").get<Eigen::Index>();
    const auto out = lj.at("out").get<Eigen::Index>();
    layer.batch_norm = lj.at("batch_norm").get<bool>();
    layer.relu = lj.at("relu").get<bool>();
    layer.w = matrix_from_json(lj.at("w"), in, out);
    layer.b = vector_from_json(lj.at("b"), out);
    layer.eg2_w = matrix_from_json(lj.at("eg2_w"), in, out);
    layer.edx2_w = matrix_from_json(lj.at("edx2_w"), in, out);
    layer.eg2_b = vector_from_json(lj.at("eg2_b"), out);
    layer.edx2_b = vector_from_json(lj.at("edx2_b"), out);
    if (layer.batch_norm) {
      layer.gamma = vector_from_json(lj.at("gamma"), out);
      layer.beta = vector_from_json(lj.at("beta"), out);
      layer.run_mean = vector_from_json(lj.at("run_mean"), out);
      layer.run_var = vector_from_json(lj.at("run_var"), out);
      layer.eg2_gamma = vector_from_json(lj.at("eg2_gamma"), out);
      layer.edx2_gamma = vector_from_json(lj.at("edx2_gamma"), out);
      layer.eg2_beta = vector_from_json(lj.at("eg2_beta"), out);
      layer.edx2_beta = vector_from_json(lj.at("edx2_beta"), out);
    }
    model.layers_.push_back(std::move(layer));
  }
  return model;
}

void Autoencoder::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << to_json() << '\n';
  if (!out) throw DataError("I/O error while writing: " + path);
}

Autoencoder Autoencoder::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StageError("missing checkpoint: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace ubad
