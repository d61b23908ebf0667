/*
 * Copyright 2026 The eocrc Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Histogram gradient-boosted trees behind the three boosting presets. The
// presets share this engine and differ in growth policy (leaf-wise vs
// depth-wise), gain curvature (hessian vs count denominators), and L2.
//
// Bin edges sit on training data values and splits test x <= edge, so
// predictions are invariant under strictly monotone feature transforms.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "model_impl.hpp"

namespace eocrc::models::detail {

namespace {

struct GbdtConfig {
  int n_rounds = 100;
  double learning_rate = 0.1;
  int n_bins = 64;
  double l2 = 0.0;
  bool leaf_wise = false;
  bool second_order = false;
  int max_leaves = 31;
  int max_depth = 6;  // 0 = unbounded (leaf-wise)
  int min_samples_leaf = 5;
};

GbdtConfig preset_config(ModelKind preset, const Hyperparams& h) {
  GbdtConfig c;
  switch (preset) {
    case ModelKind::LightGBMPreset:
      c.leaf_wise = true;
      c.second_order = false;
      c.l2 = 0.0;
      c.max_leaves = 31;
      c.max_depth = 0;
      break;
    case ModelKind::HGBPreset:
      c.leaf_wise = false;
      c.second_order = false;
      c.l2 = 0.0;
      c.max_depth = 6;
      break;
    case ModelKind::XGBoostPreset:
      c.leaf_wise = false;
      c.second_order = true;
      c.l2 = 1.0;
      c.max_depth = 6;
      break;
    default:
      throw ConfigError("not a GBDT preset");
  }
  c.n_rounds = h.inum("n_rounds", c.n_rounds);
  c.learning_rate = h.num("learning_rate", c.learning_rate);
  c.n_bins = h.inum("n_bins", c.n_bins);
  c.l2 = h.num("l2", c.l2);
  c.max_leaves = h.inum("max_leaves", c.max_leaves);
  c.max_depth = h.inum("max_depth", c.max_depth);
  c.min_samples_leaf = h.inum("min_samples_leaf", c.min_samples_leaf);
  if (c.n_rounds < 0) throw ConfigError("GBDT n_rounds must be >= 0");
  if (c.n_bins < 2) throw ConfigError("GBDT n_bins must be >= 2");
  return c;
}

// Per-feature bin edges; bin(v) = index of first edge >= v, clamped to the
// last bin for values above every edge.
struct Bins {
  std::vector<std::vector<double>> edges;
  std::vector<uint32_t> offset;  // flat histogram offsets per feature
  size_t total = 0;

  uint16_t bin_of(size_t f, double v) const {
    const auto& e = edges[f];
    const auto it = std::lower_bound(e.begin(), e.end(), v);
    if (it == e.end()) return static_cast<uint16_t>(e.size() - 1);
    return static_cast<uint16_t>(it - e.begin());
  }
};

Bins build_bins(const Csr& X, int n_bins) {
  Bins b;
  b.edges.resize(X.dim);
  std::vector<std::vector<double>> values(X.dim);
  for (size_t k = 0; k < X.idx.size(); ++k) values[X.idx[k]].push_back(X.val[k]);

  for (size_t f = 0; f < X.dim; ++f) {
    auto& v = values[f];
    v.push_back(0.0);  // implicit sparse zeros are real values
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    auto& e = b.edges[f];
    if (v.size() <= static_cast<size_t>(n_bins)) {
      e = v;
    } else {
      // quantile-thin to n_bins edges over distinct values, keeping the max
      e.reserve(n_bins);
      for (int k = 1; k <= n_bins; ++k) {
        e.push_back(v[(v.size() * k) / n_bins - 1]);
      }
      e.erase(std::unique(e.begin(), e.end()), e.end());
    }
  }
  b.offset.resize(X.dim + 1);
  b.offset[0] = 0;
  for (size_t f = 0; f < X.dim; ++f) {
    b.offset[f + 1] = b.offset[f] + static_cast<uint32_t>(b.edges[f].size());
  }
  b.total = b.offset[X.dim];
  return b;
}

// Binned sparse matrix plus each feature's zero bin.
struct BinnedMatrix {
  std::vector<uint16_t> entry_bin;  // parallel to Csr::idx
  std::vector<uint16_t> zero_bin;

  uint16_t row_bin(const Csr& X, size_t row, uint32_t feature) const {
    auto idx = X.row_idx(row);
    const auto it = std::lower_bound(idx.begin(), idx.end(), feature);
    if (it == idx.end() || *it != feature) return zero_bin[feature];
    const size_t k = static_cast<size_t>(it - idx.begin());
    return entry_bin[X.off[row] + k];
  }
};

BinnedMatrix bin_matrix(const Csr& X, const Bins& bins) {
  BinnedMatrix bm;
  bm.entry_bin.resize(X.idx.size());
  for (size_t k = 0; k < X.idx.size(); ++k) {
    bm.entry_bin[k] = bins.bin_of(X.idx[k], X.val[k]);
  }
  bm.zero_bin.resize(X.dim);
  for (size_t f = 0; f < X.dim; ++f) bm.zero_bin[f] = bins.bin_of(f, 0.0);
  return bm;
}

struct Histogram {
  std::vector<double> g, h;
  std::vector<uint32_t> n;

  void reset(size_t total) {
    g.assign(total, 0.0);
    h.assign(total, 0.0);
    n.assign(total, 0);
  }
};

struct NodeAgg {
  double G = 0, H = 0;
  uint32_t N = 0;
};

struct SplitInfo {
  double gain = 0;
  int feature = -1;
  uint16_t bin = 0;
  double threshold = 0;
  NodeAgg left, right;
};

class TreeBuilder {
 public:
  TreeBuilder(const Csr& X, const Bins& bins, const BinnedMatrix& bm, const GbdtConfig& cfg,
              const std::vector<double>& grad, const std::vector<double>& hess)
      : X_(X), bins_(bins), bm_(bm), cfg_(cfg), grad_(grad), hess_(hess) {}

  Tree build() {
    Tree tree;
    std::vector<uint32_t> all(X_.n_rows());
    std::iota(all.begin(), all.end(), 0);
    NodeAgg root = aggregate(all);
    tree.nodes.emplace_back();
    set_leaf(tree, 0, root);
    if (cfg_.leaf_wise) {
      grow_leaf_wise(tree, std::move(all), root);
    } else {
      grow_depth_wise(tree, std::move(all), root);
    }
    return tree;
  }

 private:
  NodeAgg aggregate(const std::vector<uint32_t>& rows) const {
    NodeAgg a;
    for (uint32_t r : rows) {
      a.G += grad_[r];
      a.H += hess_[r];
    }
    a.N = static_cast<uint32_t>(rows.size());
    return a;
  }

  double leaf_value(const NodeAgg& a) const {
    const double denom = (cfg_.second_order ? a.H : static_cast<double>(a.N)) + cfg_.l2;
    return -cfg_.learning_rate * a.G / std::max(denom, 1e-12);
  }

  void set_leaf(Tree& tree, int id, const NodeAgg& a) const {
    tree.nodes[id].feature = -1;
    tree.nodes[id].leaf_value = leaf_value(a);
  }

  double gain_term(double G, double H, double N) const {
    const double denom = (cfg_.second_order ? H : N) + cfg_.l2;
    return G * G / std::max(denom, 1e-12);
  }

  SplitInfo best_split(const std::vector<uint32_t>& rows, const NodeAgg& node) {
    hist_.reset(bins_.total);
    for (uint32_t r : rows) {
      const double g = grad_[r];
      const double h = hess_[r];
      auto idx = X_.row_idx(r);
      for (size_t k = 0; k < idx.size(); ++k) {
        const size_t slot = bins_.offset[idx[k]] + bm_.entry_bin[X_.off[r] + k];
        hist_.g[slot] += g;
        hist_.h[slot] += h;
        hist_.n[slot] += 1;
      }
    }

    SplitInfo best;
    const double parent = gain_term(node.G, node.H, node.N);
    for (size_t f = 0; f < X_.dim; ++f) {
      const size_t nb = bins_.edges[f].size();
      if (nb < 2) continue;
      const size_t base = bins_.offset[f];
      // fold implicit zeros into the zero bin
      double zg = node.G, zh = node.H;
      uint32_t zn = node.N;
      for (size_t b = 0; b < nb; ++b) {
        zg -= hist_.g[base + b];
        zh -= hist_.h[base + b];
        zn -= hist_.n[base + b];
      }
      const size_t zslot = base + bm_.zero_bin[f];
      const double zbg = hist_.g[zslot] + zg;
      const double zbh = hist_.h[zslot] + zh;
      const uint32_t zbn = hist_.n[zslot] + zn;

      double GL = 0, HL = 0;
      uint32_t NL = 0;
      for (size_t b = 0; b + 1 < nb; ++b) {
        GL += (b == bm_.zero_bin[f]) ? zbg : hist_.g[base + b];
        HL += (b == bm_.zero_bin[f]) ? zbh : hist_.h[base + b];
        NL += (b == bm_.zero_bin[f]) ? zbn : hist_.n[base + b];
        const uint32_t NR = node.N - NL;
        if (NL < static_cast<uint32_t>(cfg_.min_samples_leaf) ||
            NR < static_cast<uint32_t>(cfg_.min_samples_leaf)) {
          continue;
        }
        const double GR = node.G - GL;
        const double HR = node.H - HL;
        const double gain =
            0.5 * (gain_term(GL, HL, NL) + gain_term(GR, HR, NR) - parent);
        if (gain > best.gain + 1e-12) {
          best.gain = gain;
          best.feature = static_cast<int>(f);
          best.bin = static_cast<uint16_t>(b);
          best.threshold = bins_.edges[f][b];
          best.left = {GL, HL, NL};
          best.right = {GR, HR, NR};
        }
      }
    }
    return best;
  }

  std::pair<std::vector<uint32_t>, std::vector<uint32_t>> partition(
      const std::vector<uint32_t>& rows, int feature, uint16_t bin) const {
    std::vector<uint32_t> left, right;
    left.reserve(rows.size());
    right.reserve(rows.size());
    for (uint32_t r : rows) {
      if (bm_.row_bin(X_, r, static_cast<uint32_t>(feature)) <= bin) {
        left.push_back(r);
      } else {
        right.push_back(r);
      }
    }
    return {std::move(left), std::move(right)};
  }

  void apply_split(Tree& tree, int id, const SplitInfo& s) const {
    tree.nodes[id].feature = s.feature;
    tree.nodes[id].threshold = s.threshold;
    tree.nodes[id].gain = s.gain;
    tree.nodes[id].left = static_cast<int32_t>(tree.nodes.size());
    tree.nodes[id].right = static_cast<int32_t>(tree.nodes.size() + 1);
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
  }

  void grow_depth_wise(Tree& tree, std::vector<uint32_t> root_rows, const NodeAgg& root) {
    struct Item {
      int id;
      int depth;
      std::vector<uint32_t> rows;
      NodeAgg agg;
    };
    std::vector<Item> level;
    level.push_back({0, 0, std::move(root_rows), root});
    while (!level.empty()) {
      std::vector<Item> next;
      for (auto& item : level) {
        set_leaf(tree, item.id, item.agg);
        if (cfg_.max_depth > 0 && item.depth >= cfg_.max_depth) continue;
        const SplitInfo s = best_split(item.rows, item.agg);
        if (s.feature < 0) continue;
        apply_split(tree, item.id, s);
        auto [lrows, rrows] = partition(item.rows, s.feature, s.bin);
        next.push_back({tree.nodes[item.id].left, item.depth + 1, std::move(lrows), s.left});
        next.push_back({tree.nodes[item.id].right, item.depth + 1, std::move(rrows), s.right});
      }
      level = std::move(next);
    }
  }

  void grow_leaf_wise(Tree& tree, std::vector<uint32_t> root_rows, const NodeAgg& root) {
    struct Open {
      int id;
      int depth;
      std::vector<uint32_t> rows;
      NodeAgg agg;
      SplitInfo split;
    };
    std::vector<Open> open;
    {
      Open o{0, 0, std::move(root_rows), root, {}};
      o.split = best_split(o.rows, o.agg);
      open.push_back(std::move(o));
    }
    int leaves = 1;
    const int depth_cap = cfg_.max_depth > 0 ? cfg_.max_depth : 32;
    while (leaves < cfg_.max_leaves) {
      int pick = -1;
      for (size_t i = 0; i < open.size(); ++i) {
        if (open[i].split.feature < 0 || open[i].depth >= depth_cap) continue;
        if (pick < 0 || open[i].split.gain > open[pick].split.gain) {
          pick = static_cast<int>(i);
        }
      }
      if (pick < 0) break;
      Open node = std::move(open[pick]);
      open.erase(open.begin() + pick);

      apply_split(tree, node.id, node.split);
      auto [lrows, rrows] = partition(node.rows, node.split.feature, node.split.bin);

      Open l{tree.nodes[node.id].left, node.depth + 1, std::move(lrows), node.split.left, {}};
      Open r{tree.nodes[node.id].right, node.depth + 1, std::move(rrows), node.split.right, {}};
      set_leaf(tree, l.id, l.agg);
      set_leaf(tree, r.id, r.agg);
      l.split = best_split(l.rows, l.agg);
      r.split = best_split(r.rows, r.agg);
      open.push_back(std::move(l));
      open.push_back(std::move(r));
      ++leaves;
    }
  }

  const Csr& X_;
  const Bins& bins_;
  const BinnedMatrix& bm_;
  const GbdtConfig& cfg_;
  const std::vector<double>& grad_;
  const std::vector<double>& hess_;
  Histogram hist_;
};

}  // namespace

std::unique_ptr<TrainedModel> train_gbdt(ModelKind preset, const feat::DesignMatrix& m,
                                         const Hyperparams& h, uint64_t /*seed*/) {
  const GbdtConfig cfg = preset_config(preset, h);
  const Csr X = Csr::from(m);
  const Bins bins = build_bins(X, cfg.n_bins);
  const BinnedMatrix bm = bin_matrix(X, bins);

  const size_t n = X.n_rows();
  double pos = 0;
  for (int y : X.y) pos += y;
  const double rate = std::clamp(pos / static_cast<double>(n), 1e-6, 1.0 - 1e-6);

  TreeEnsemble ens;
  ens.base_score = std::log(rate / (1.0 - rate));

  std::vector<double> F(n, ens.base_score), grad(n), hess(n);
  for (int round = 0; round < cfg.n_rounds; ++round) {
    for (size_t i = 0; i < n; ++i) {
      const double p = sigmoid(F[i]);
      grad[i] = p - X.y[i];
      hess[i] = std::max(p * (1.0 - p), 1e-12);
    }
    TreeBuilder builder(X, bins, bm, cfg, grad, hess);
    Tree tree = builder.build();
    // leaf values carry the learning rate already
    std::vector<double> dense(X.dim, 0.0);
    for (size_t i = 0; i < n; ++i) {
      auto idx = X.row_idx(i);
      auto val = X.row_val(i);
      for (size_t k = 0; k < idx.size(); ++k) dense[idx[k]] = val[k];
      F[i] += tree.eval(dense);
      for (size_t k = 0; k < idx.size(); ++k) dense[idx[k]] = 0.0;
    }
    ens.trees.push_back(std::move(tree));
  }
  return make_gbdt_model(preset, m.dim(), std::move(ens));
}

}  // namespace eocrc::models::detail
