#include "core/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <unordered_map>

#include "core/util.hpp"

namespace vumac {

namespace {

Eigen::VectorXd normalize(const MlpModel& m, const Eigen::VectorXd& x) {
  return (x - m.norm_mean).cwiseQuotient(m.norm_scale);
}

// Forward pass over a batch (columns = samples); returns activations per
// layer, acts[0] being the normalized input.
std::vector<Eigen::MatrixXd> forward_batch(const MlpModel& m, const Eigen::MatrixXd& in) {
  std::vector<Eigen::MatrixXd> acts(m.W.size() + 1);
  acts[0] = in;
  for (std::size_t l = 0; l < m.W.size(); ++l) {
    Eigen::MatrixXd z = (m.W[l] * acts[l]).colwise() + m.b[l];
    if (l + 1 < m.W.size()) z = z.cwiseMax(0.0);
    acts[l + 1] = std::move(z);
  }
  return acts;
}

// Mean squared error over all entries plus parameter gradients.
double backward_batch(const MlpModel& m, const std::vector<Eigen::MatrixXd>& acts,
                      const Eigen::MatrixXd& target, std::vector<Eigen::MatrixXd>& gW,
                      std::vector<Eigen::VectorXd>& gb) {
  const auto L = m.W.size();
  const double count = static_cast<double>(target.rows()) * target.cols();
  Eigen::MatrixXd delta = acts[L] - target;
  double loss = delta.squaredNorm() / count;
  delta *= 2.0 / count;
  for (std::size_t l = L; l-- > 0;) {
    gW[l] = delta * acts[l].transpose();
    gb[l] = delta.rowwise().sum();
    if (l > 0) {
      delta = m.W[l].transpose() * delta;
      delta = (acts[l].array() > 0.0).cast<double>().matrix().cwiseProduct(delta);
    }
  }
  return loss;
}

double eval_mse(const MlpModel& m, const Eigen::MatrixXd& Xn, const Eigen::MatrixXd& Yt) {
  auto acts = forward_batch(m, Xn);
  return (acts.back() - Yt).squaredNorm() / (static_cast<double>(Yt.rows()) * Yt.cols());
}

}  // namespace

Eigen::VectorXd MlpModel::forward(const Eigen::VectorXd& x) const {
  Eigen::VectorXd a = normalize(*this, x);
  for (std::size_t l = 0; l < W.size(); ++l) {
    a = W[l] * a + b[l];
    if (l + 1 < W.size()) a = a.cwiseMax(0.0);
  }
  return a;
}

TrainResult train_mlp(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                      const std::vector<std::uint64_t>& group, const TrainConfig& cfg,
                      std::uint64_t seed) {
  const auto n = X.rows();
  if (n == 0 || Y.rows() != n || static_cast<Eigen::Index>(group.size()) != n)
    throw VumacError("train_mlp: X/Y/group size mismatch");
  if (cfg.batch_size < 1 || cfg.max_epochs < 1 || cfg.patience < 1 ||
      cfg.val_fraction <= 0.0 || cfg.val_fraction >= 1.0)
    throw VumacError("train_mlp: bad training configuration");

  // Group-wise validation split.
  std::unordered_map<std::uint64_t, std::size_t> gindex;
  std::size_t n_groups = 0;
  for (auto g : group)
    if (gindex.emplace(g, n_groups).second) ++n_groups;
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n_groups);
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t n_val_groups =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(n_groups * cfg.val_fraction)));
  if (n_val_groups >= n_groups)
    throw VumacError("train_mlp: validation split leaves no training groups");
  std::vector<bool> is_val_group(n_groups, false);
  for (std::size_t k = 0; k < n_val_groups; ++k) is_val_group[order[k]] = true;
  std::vector<Eigen::Index> tr_rows, va_rows;
  for (Eigen::Index r = 0; r < n; ++r) {
    if (is_val_group[gindex[group[static_cast<std::size_t>(r)]]])
      va_rows.push_back(r);
    else
      tr_rows.push_back(r);
  }

  const auto din = X.cols(), dout = Y.cols();
  Eigen::MatrixXd Xtr(din, static_cast<Eigen::Index>(tr_rows.size()));
  Eigen::MatrixXd Ytr(dout, static_cast<Eigen::Index>(tr_rows.size()));
  Eigen::MatrixXd Xva(din, static_cast<Eigen::Index>(va_rows.size()));
  Eigen::MatrixXd Yva(dout, static_cast<Eigen::Index>(va_rows.size()));
  for (std::size_t k = 0; k < tr_rows.size(); ++k) {
    Xtr.col(k) = X.row(tr_rows[k]).transpose();
    Ytr.col(k) = Y.row(tr_rows[k]).transpose();
  }
  for (std::size_t k = 0; k < va_rows.size(); ++k) {
    Xva.col(k) = X.row(va_rows[k]).transpose();
    Yva.col(k) = Y.row(va_rows[k]).transpose();
  }

  MlpModel m;
  m.sizes.push_back(static_cast<int>(din));
  for (int hsize : cfg.hidden) m.sizes.push_back(hsize);
  m.sizes.push_back(static_cast<int>(dout));
  m.norm_mean = Xtr.rowwise().mean();
  Eigen::VectorXd var = (Xtr.colwise() - m.norm_mean).rowwise().squaredNorm() /
                        static_cast<double>(Xtr.cols());
  m.norm_scale = var.cwiseSqrt().cwiseMax(1e-8);

  // He-normal initialization, zero biases.
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t l = 0; l + 1 < m.sizes.size(); ++l) {
    int fan_in = m.sizes[l], fan_out = m.sizes[l + 1];
    Eigen::MatrixXd Wl(fan_out, fan_in);
    double sd = std::sqrt(2.0 / fan_in);
    for (Eigen::Index r = 0; r < Wl.rows(); ++r)
      for (Eigen::Index c2 = 0; c2 < Wl.cols(); ++c2) Wl(r, c2) = sd * gauss(rng);
    m.W.push_back(std::move(Wl));
    m.b.push_back(Eigen::VectorXd::Zero(fan_out));
  }

  Eigen::MatrixXd Xtr_n =
      m.norm_scale.cwiseInverse().asDiagonal() * (Xtr.colwise() - m.norm_mean);
  Eigen::MatrixXd Xva_n =
      m.norm_scale.cwiseInverse().asDiagonal() * (Xva.colwise() - m.norm_mean);

  std::vector<Eigen::MatrixXd> gW(m.W.size()), vW(m.W.size());
  std::vector<Eigen::VectorXd> gb(m.b.size()), vb(m.b.size());
  for (std::size_t l = 0; l < m.W.size(); ++l) {
    vW[l] = Eigen::MatrixXd::Zero(m.W[l].rows(), m.W[l].cols());
    vb[l] = Eigen::VectorXd::Zero(m.b[l].size());
  }

  TrainResult out;
  out.history.best_val = std::numeric_limits<double>::infinity();
  MlpModel best = m;
  int since_best = 0;
  std::vector<Eigen::Index> perm(tr_rows.size());
  for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = static_cast<Eigen::Index>(k);

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(perm.begin(), perm.end(), rng);
    KahanSum epoch_loss;
    Eigen::Index done = 0, nt = Xtr_n.cols();
    while (done < nt) {
      Eigen::Index bs = std::min<Eigen::Index>(cfg.batch_size, nt - done);
      Eigen::MatrixXd xb(din, bs), yb(dout, bs);
      for (Eigen::Index k = 0; k < bs; ++k) {
        xb.col(k) = Xtr_n.col(perm[done + k]);
        yb.col(k) = Ytr.col(perm[done + k]);
      }
      auto acts = forward_batch(m, xb);
      double loss = backward_batch(m, acts, yb, gW, gb);
      if (!std::isfinite(loss)) throw VumacError("non-finite-loss during training");
      epoch_loss.add(loss * static_cast<double>(bs));
      for (std::size_t l = 0; l < m.W.size(); ++l) {
        vW[l] = cfg.momentum * vW[l] - cfg.learning_rate * gW[l];
        vb[l] = cfg.momentum * vb[l] - cfg.learning_rate * gb[l];
        m.W[l] += vW[l];
        m.b[l] += vb[l];
      }
      done += bs;
    }
    out.history.train_mse.push_back(epoch_loss.value() / static_cast<double>(nt));
    double val = eval_mse(m, Xva_n, Yva);
    if (!std::isfinite(val)) throw VumacError("non-finite-loss during validation");
    out.history.val_mse.push_back(val);
    if (val < out.history.best_val - 1e-12) {
      out.history.best_val = val;
      out.history.best_epoch = epoch;
      best = m;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  out.model = std::move(best);
  return out;
}

double gradient_check(const MlpModel& model, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      double eps) {
  MlpModel m = model;
  Eigen::MatrixXd xin = normalize(m, x);
  Eigen::MatrixXd yt = y;
  std::vector<Eigen::MatrixXd> gW(m.W.size());
  std::vector<Eigen::VectorXd> gb(m.b.size());
  auto acts = forward_batch(m, xin);
  backward_batch(m, acts, yt, gW, gb);

  auto loss_at = [&]() {
    auto a = forward_batch(m, xin);
    return (a.back() - yt).squaredNorm() / static_cast<double>(yt.rows());
  };
  double worst = 0.0;
  for (std::size_t l = 0; l < m.W.size(); ++l) {
    for (Eigen::Index r = 0; r < m.W[l].rows(); ++r)
      for (Eigen::Index c = 0; c < m.W[l].cols(); ++c) {
        double keep = m.W[l](r, c);
        m.W[l](r, c) = keep + eps;
        double up = loss_at();
        m.W[l](r, c) = keep - eps;
        double dn = loss_at();
        m.W[l](r, c) = keep;
        double fd = (up - dn) / (2.0 * eps);
        double an = gW[l](r, c);
        double denom = std::max({1e-8, std::abs(fd), std::abs(an)});
        worst = std::max(worst, std::abs(fd - an) / denom);
      }
    for (Eigen::Index r = 0; r < m.b[l].size(); ++r) {
      double keep = m.b[l][r];
      m.b[l][r] = keep + eps;
      double up = loss_at();
      m.b[l][r] = keep - eps;
      double dn = loss_at();
      m.b[l][r] = keep;
      double fd = (up - dn) / (2.0 * eps);
      double an = gb[l][r];
      double denom = std::max({1e-8, std::abs(fd), std::abs(an)});
      worst = std::max(worst, std::abs(fd - an) / denom);
    }
  }
  return worst;
}

void save_mlp(const MlpModel& model, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw VumacError("cannot open '" + file + "' for writing");
  out << "vumac-mlp 1\n";
  out << model.sizes.size();
  for (int s : model.sizes) out << ' ' << s;
  out << '\n';
  char buf[32];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (Eigen::Index k = 0; k < model.norm_mean.size(); ++k) {
    if (k) out << ' ';
    emit(model.norm_mean[k]);
  }
  out << '\n';
  for (Eigen::Index k = 0; k < model.norm_scale.size(); ++k) {
    if (k) out << ' ';
    emit(model.norm_scale[k]);
  }
  out << '\n';
  for (std::size_t l = 0; l < model.W.size(); ++l) {
    for (Eigen::Index r = 0; r < model.W[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < model.W[l].cols(); ++c) {
        if (c) out << ' ';
        emit(model.W[l](r, c));
      }
      out << '\n';
    }
    for (Eigen::Index r = 0; r < model.b[l].size(); ++r) {
      if (r) out << ' ';
      emit(model.b[l][r]);
    }
    out << '\n';
  }
  if (!out) throw VumacError("write failed for '" + file + "'");
}

MlpModel load_mlp(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw VumacError("cannot open '" + file + "'");
  std::string tag, ver;
  in >> tag >> ver;
  if (tag != "vumac-mlp" || ver != "1") throw VumacError("'" + file + "' is not a model file");
  std::size_t nlayers = 0;
  in >> nlayers;
  if (!in || nlayers < 2 || nlayers > 64) throw VumacError("corrupt model file");
  MlpModel m;
  m.sizes.resize(nlayers);
  for (auto& s : m.sizes) {
    in >> s;
    if (!in || s < 1 || s > 100'000) throw VumacError("corrupt model file");
  }
  m.norm_mean.resize(m.sizes[0]);
  m.norm_scale.resize(m.sizes[0]);
  for (Eigen::Index k = 0; k < m.norm_mean.size(); ++k) in >> m.norm_mean[k];
  for (Eigen::Index k = 0; k < m.norm_scale.size(); ++k) in >> m.norm_scale[k];
  for (std::size_t l = 0; l + 1 < nlayers; ++l) {
    Eigen::MatrixXd W(m.sizes[l + 1], m.sizes[l]);
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c) in >> W(r, c);
    Eigen::VectorXd b(m.sizes[l + 1]);
    for (Eigen::Index r = 0; r < b.size(); ++r) in >> b[r];
    m.W.push_back(std::move(W));
    m.b.push_back(std::move(b));
  }
  if (!in) throw VumacError("corrupt model file");
  return m;
}

}  // namespace vumac
