#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sleepgp/classifiers.hpp"
#include "sleepgp/common.hpp"
#include "sleepgp/dataset.hpp"
#include "sleepgp/rng.hpp"

namespace sleepgp {

// Expression trees over the attribute terminals with protected arithmetic.
// The F operator is an identity whose subtree marks one constructed feature.
enum class GpOp { add, sub, mul, div, ln, sqrt_, fmark };

struct GpNode {
  enum class Kind { terminal, constant, unary, binary };
  Kind kind = Kind::terminal;
  GpOp op = GpOp::add;
  int attr = 0;
  double value = 0.0;
};

struct GpTree {
  std::vector<GpNode> nodes;  // prefix order

  size_t size() const { return nodes.size(); }
};

int node_arity(const GpNode& n);
// One past the last node of the subtree rooted at i.
size_t subtree_end(const GpTree& t, size_t i);
// Edge depth of every node (root = 0).
std::vector<int> node_depths(const GpTree& t);
int tree_depth(const GpTree& t);
int count_f_nodes(const GpTree& t);
bool well_formed(const GpTree& t, int n_attrs);

// Protected full-tree evaluation: div(a,0)=1, ln(0)=1, ln(a)=ln|a|,
// sqrt(a)=sqrt|a|, F(x)=x; results saturate to +-1e300 and are never NaN.
double eval_node(const GpTree& t, std::span<const double> row);

// One output column per F node in prefix order (the root expression when the
// tree has no F node), evaluated on every row.
Matrix extract_features(const GpTree& t, const FeatureMatrix& fm);

std::string serialize(const GpTree& t);
GpTree parse_tree(const std::string& text);

enum class GenMethod { grow, full, ramped };

// Ramped half-and-half generator; terminals are attribute references, or
// ephemeral constants from U[-1,1] with probability const_prob.
GpTree random_tree(int depth_min, int depth_max, int n_attrs, rng_t& rng,
                   GenMethod method = GenMethod::ramped, double const_prob = 0.1);

// Uniformly chosen node in each parent, subtrees swapped; a child exceeding
// max_depth is replaced by its own parent.
std::pair<GpTree, GpTree> crossover_one_point(const GpTree& a, const GpTree& b,
                                              int max_depth, rng_t& rng);

// Uniformly chosen node's subtree replaced by a fresh grown tree that fits
// the remaining depth budget.
GpTree mutate_uniform(const GpTree& t, int max_depth, int n_attrs, rng_t& rng,
                      double const_prob = 0.1);

struct Individual {
  GpTree tree;
  std::optional<double> fitness;
  int n_features = 1;  // max(1, #F nodes)
};

struct EvolutionConfig {
  int generations = 300;
  int pop_size = 100;
  int tournament_size = 3;
  double p_crossover = 0.9;
  double p_mutation = 0.1;
  int max_depth = 17;
  int init_depth_min = 2;
  int init_depth_max = 6;
  double const_prob = 0.1;
  int cv_folds = 3;
  int n_threads = 1;
};

struct GenStats {
  double best = 0.0;
  double mean = 0.0;
};

struct EvolveResult {
  Individual best;
  std::vector<GenStats> history;  // one entry per generation
};

// Mean held-fold AUC of the given classifier over a stratified k-fold split
// of the constructed features. Folds and classifier seeds derive from `seed`
// only, so the value depends on the tree alone and is safe to cache.
double fitness(const GpTree& tree, const LabeledDataset& train,
               const ClassifierSpec& spec, std::uint64_t seed, int folds = 3);

// Generational loop: elite of one, tournament selection, one-point
// crossover, uniform mutation, reproduction otherwise. Per-slot RNG streams
// derive from (seed, generation, slot), so any evaluation parallelism yields
// identical results.
EvolveResult evolve(const EvolutionConfig& cfg, const LabeledDataset& train,
                    const ClassifierSpec& cspec, std::uint64_t seed);

}  // namespace sleepgp
