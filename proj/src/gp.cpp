#include "sleepgp/gp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "sleepgp/metrics.hpp"

namespace sleepgp {

int node_arity(const GpNode& n) {
  switch (n.kind) {
    case GpNode::Kind::terminal:
    case GpNode::Kind::constant: return 0;
    case GpNode::Kind::unary: return 1;
    case GpNode::Kind::binary: return 2;
  }
  return 0;
}

size_t subtree_end(const GpTree& t, size_t i) {
  long need = 1;
  size_t j = i;
  while (need > 0) {
    if (j >= t.nodes.size()) throw data_error("gp: malformed prefix encoding");
    need += node_arity(t.nodes[j]) - 1;
    ++j;
  }
  return j;
}

std::vector<int> node_depths(const GpTree& t) {
  std::vector<int> depth(t.nodes.size(), 0);
  std::vector<std::pair<int, int>> stack;  // (children left to visit, their depth)
  for (size_t i = 0; i < t.nodes.size(); ++i) {
    int d = 0;
    if (!stack.empty()) {
      d = stack.back().second;
      if (--stack.back().first == 0) stack.pop_back();
    }
    depth[i] = d;
    int ar = node_arity(t.nodes[i]);
    if (ar > 0) stack.emplace_back(ar, d + 1);
  }
  return depth;
}

int tree_depth(const GpTree& t) {
  auto d = node_depths(t);
  return d.empty() ? 0 : *std::max_element(d.begin(), d.end());
}

int count_f_nodes(const GpTree& t) {
  int n = 0;
  for (const auto& nd : t.nodes)
    if (nd.kind == GpNode::Kind::unary && nd.op == GpOp::fmark) ++n;
  return n;
}

bool well_formed(const GpTree& t, int n_attrs) {
  if (t.nodes.empty()) return false;
  long need = 1;
  for (const auto& nd : t.nodes) {
    if (need <= 0) return false;
    if (nd.kind == GpNode::Kind::terminal && (nd.attr < 0 || nd.attr >= n_attrs))
      return false;
    need += node_arity(nd) - 1;
  }
  return need == 0;
}

namespace {

constexpr double kSat = 1e300;

double saturate(double v) {
  if (std::isnan(v)) return 0.0;
  if (v > kSat) return kSat;
  if (v < -kSat) return -kSat;
  return v;
}

double apply_unary(GpOp op, double a) {
  switch (op) {
    case GpOp::ln: return a == 0.0 ? 1.0 : saturate(std::log(std::abs(a)));
    case GpOp::sqrt_: return saturate(std::sqrt(std::abs(a)));
    case GpOp::fmark: return a;
    default: break;
  }
  throw data_error("gp: bad unary op");
}

double apply_binary(GpOp op, double a, double b) {
  switch (op) {
    case GpOp::add: return saturate(a + b);
    case GpOp::sub: return saturate(a - b);
    case GpOp::mul: return saturate(a * b);
    case GpOp::div: return b == 0.0 ? 1.0 : saturate(a / b);
    default: break;
  }
  throw data_error("gp: bad binary op");
}

// Evaluates every node; out is indexed like t.nodes.
void eval_all(const GpTree& t, std::span<const double> row, std::vector<double>& out) {
  out.resize(t.nodes.size());
  std::vector<double> stack;
  for (size_t ri = t.nodes.size(); ri-- > 0;) {
    const GpNode& nd = t.nodes[ri];
    double v = 0.0;
    switch (nd.kind) {
      case GpNode::Kind::terminal:
        v = saturate(row[static_cast<size_t>(nd.attr)]);
        break;
      case GpNode::Kind::constant:
        v = nd.value;
        break;
      case GpNode::Kind::unary: {
        double a = stack.back();
        stack.pop_back();
        v = apply_unary(nd.op, a);
        break;
      }
      case GpNode::Kind::binary: {
        double a = stack.back();  // left child
        stack.pop_back();
        double b = stack.back();  // right child
        stack.pop_back();
        v = apply_binary(nd.op, a, b);
        break;
      }
    }
    out[ri] = v;
    stack.push_back(v);
  }
}

}  // namespace

double eval_node(const GpTree& t, std::span<const double> row) {
  std::vector<double> vals;
  eval_all(t, row, vals);
  return vals[0];
}

Matrix extract_features(const GpTree& t, const FeatureMatrix& fm) {
  std::vector<size_t> f_nodes;
  for (size_t i = 0; i < t.nodes.size(); ++i)
    if (t.nodes[i].kind == GpNode::Kind::unary && t.nodes[i].op == GpOp::fmark)
      f_nodes.push_back(i);

  Matrix out;
  out.reserve(fm.rows.size());
  std::vector<double> vals;
  for (const auto& row : fm.rows) {
    eval_all(t, row, vals);
    std::vector<double> feat;
    if (f_nodes.empty()) {
      feat.push_back(vals[0]);
    } else {
      feat.reserve(f_nodes.size());
      for (size_t i : f_nodes) feat.push_back(vals[i]);
    }
    out.push_back(std::move(feat));
  }
  return out;
}

// ---- text form ----------------------------------------------------------

namespace {

const char* op_name(const GpNode& nd) {
  switch (nd.op) {
    case GpOp::add: return "add";
    case GpOp::sub: return "sub";
    case GpOp::mul: return "mul";
    case GpOp::div: return "div";
    case GpOp::ln: return "ln";
    case GpOp::sqrt_: return "sqrt";
    case GpOp::fmark: return "F";
  }
  return "?";
}

void serialize_node(const GpTree& t, size_t i, std::string& out) {
  const GpNode& nd = t.nodes[i];
  switch (nd.kind) {
    case GpNode::Kind::terminal:
      out += "ARG" + std::to_string(nd.attr);
      break;
    case GpNode::Kind::constant: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", nd.value);
      std::string s = buf;
      if (s.find_first_of(".e") == std::string::npos) s += ".0";
      out += s;
      break;
    }
    case GpNode::Kind::unary: {
      out += op_name(nd);
      out += '(';
      serialize_node(t, i + 1, out);
      out += ')';
      break;
    }
    case GpNode::Kind::binary: {
      out += op_name(nd);
      out += '(';
      serialize_node(t, i + 1, out);
      out += ", ";
      serialize_node(t, subtree_end(t, i + 1), out);
      out += ')';
      break;
    }
  }
}

struct Parser {
  const std::string& s;
  size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }

  [[noreturn]] void fail(const std::string& what) {
    throw data_error("gp parse: " + what + " at offset " + std::to_string(pos));
  }

  void expect(char c) {
    skip_ws();
    if (pos >= s.size() || s[pos] != c) fail(std::string("expected '") + c + "'");
    ++pos;
  }

  void parse_expr(GpTree& t) {
    skip_ws();
    if (pos >= s.size()) fail("unexpected end of input");
    char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
      size_t idx = 0;
      double v = std::stod(s.substr(pos), &idx);
      pos += idx;
      GpNode nd;
      nd.kind = GpNode::Kind::constant;
      nd.value = v;
      t.nodes.push_back(nd);
      return;
    }
    size_t start = pos;
    while (pos < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
      ++pos;
    std::string name = s.substr(start, pos - start);
    if (name.empty()) fail("expected identifier or number");
    if (name.rfind("ARG", 0) == 0) {
      GpNode nd;
      nd.kind = GpNode::Kind::terminal;
      try {
        nd.attr = std::stoi(name.substr(3));
      } catch (...) {
        fail("bad terminal '" + name + "'");
      }
      t.nodes.push_back(nd);
      return;
    }
    GpNode nd;
    if (name == "add") { nd.kind = GpNode::Kind::binary; nd.op = GpOp::add; }
    else if (name == "sub") { nd.kind = GpNode::Kind::binary; nd.op = GpOp::sub; }
    else if (name == "mul") { nd.kind = GpNode::Kind::binary; nd.op = GpOp::mul; }
    else if (name == "div") { nd.kind = GpNode::Kind::binary; nd.op = GpOp::div; }
    else if (name == "ln") { nd.kind = GpNode::Kind::unary; nd.op = GpOp::ln; }
    else if (name == "sqrt") { nd.kind = GpNode::Kind::unary; nd.op = GpOp::sqrt_; }
    else if (name == "F") { nd.kind = GpNode::Kind::unary; nd.op = GpOp::fmark; }
    else fail("unknown operator '" + name + "'");
    t.nodes.push_back(nd);
    expect('(');
    parse_expr(t);
    if (nd.kind == GpNode::Kind::binary) {
      expect(',');
      parse_expr(t);
    }
    expect(')');
  }
};

}  // namespace

std::string serialize(const GpTree& t) {
  if (t.nodes.empty()) throw data_error("gp: cannot serialize an empty tree");
  std::string out;
  serialize_node(t, 0, out);
  return out;
}

GpTree parse_tree(const std::string& text) {
  Parser p{text};
  GpTree t;
  p.parse_expr(t);
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  return t;
}

// ---- variation ----------------------------------------------------------

namespace {

GpNode random_terminal(int n_attrs, double const_prob, rng_t& rng) {
  GpNode nd;
  if (rng.bernoulli(const_prob)) {
    nd.kind = GpNode::Kind::constant;
    nd.value = rng.uniform(-1.0, 1.0);
  } else {
    nd.kind = GpNode::Kind::terminal;
    nd.attr = static_cast<int>(rng.uniform_index(static_cast<size_t>(n_attrs)));
  }
  return nd;
}

GpNode random_internal(rng_t& rng) {
  static const std::pair<GpNode::Kind, GpOp> ops[7] = {
      {GpNode::Kind::binary, GpOp::add}, {GpNode::Kind::binary, GpOp::sub},
      {GpNode::Kind::binary, GpOp::mul}, {GpNode::Kind::binary, GpOp::div},
      {GpNode::Kind::unary, GpOp::ln},   {GpNode::Kind::unary, GpOp::sqrt_},
      {GpNode::Kind::unary, GpOp::fmark}};
  auto [kind, op] = ops[rng.uniform_index(7)];
  GpNode nd;
  nd.kind = kind;
  nd.op = op;
  return nd;
}

void gen_subtree(GpTree& t, int depth, int target, int depth_min, bool full,
                 int n_attrs, double const_prob, rng_t& rng) {
  bool terminal;
  if (depth >= target) terminal = true;
  else if (full) terminal = false;
  else terminal = depth >= depth_min && rng.bernoulli(0.3);

  if (terminal) {
    t.nodes.push_back(random_terminal(n_attrs, const_prob, rng));
    return;
  }
  GpNode nd = random_internal(rng);
  t.nodes.push_back(nd);
  int ar = node_arity(nd);
  for (int c = 0; c < ar; ++c)
    gen_subtree(t, depth + 1, target, depth_min, full, n_attrs, const_prob, rng);
}

}  // namespace

GpTree random_tree(int depth_min, int depth_max, int n_attrs, rng_t& rng,
                   GenMethod method, double const_prob) {
  if (n_attrs < 1) throw data_error("gp: need at least one attribute");
  if (depth_min < 0 || depth_max < depth_min)
    throw config_error("gp: bad depth range");
  int target = depth_min +
               static_cast<int>(rng.uniform_index(
                   static_cast<size_t>(depth_max - depth_min + 1)));
  bool full = method == GenMethod::full ||
              (method == GenMethod::ramped && rng.bernoulli(0.5));
  GpTree t;
  gen_subtree(t, 0, target, depth_min, full, n_attrs, const_prob, rng);
  return t;
}

std::pair<GpTree, GpTree> crossover_one_point(const GpTree& a, const GpTree& b,
                                              int max_depth, rng_t& rng) {
  size_t ia = rng.uniform_index(a.size());
  size_t ib = rng.uniform_index(b.size());
  size_t ea = subtree_end(a, ia), eb = subtree_end(b, ib);

  auto graft = [](const GpTree& host, size_t lo, size_t hi, const GpTree& donor,
                  size_t dlo, size_t dhi) {
    GpTree child;
    child.nodes.assign(host.nodes.begin(), host.nodes.begin() + static_cast<long>(lo));
    child.nodes.insert(child.nodes.end(), donor.nodes.begin() + static_cast<long>(dlo),
                       donor.nodes.begin() + static_cast<long>(dhi));
    child.nodes.insert(child.nodes.end(), host.nodes.begin() + static_cast<long>(hi),
                       host.nodes.end());
    return child;
  };

  GpTree c1 = graft(a, ia, ea, b, ib, eb);
  GpTree c2 = graft(b, ib, eb, a, ia, ea);
  if (tree_depth(c1) > max_depth) c1 = a;
  if (tree_depth(c2) > max_depth) c2 = b;
  return {std::move(c1), std::move(c2)};
}

GpTree mutate_uniform(const GpTree& t, int max_depth, int n_attrs, rng_t& rng,
                      double const_prob) {
  size_t i = rng.uniform_index(t.size());
  size_t e = subtree_end(t, i);
  int budget = max_depth - node_depths(t)[i];

  GpTree sub;
  gen_subtree(sub, 0, std::min(4, budget), 0, false, n_attrs, const_prob, rng);

  GpTree out;
  out.nodes.assign(t.nodes.begin(), t.nodes.begin() + static_cast<long>(i));
  out.nodes.insert(out.nodes.end(), sub.nodes.begin(), sub.nodes.end());
  out.nodes.insert(out.nodes.end(), t.nodes.begin() + static_cast<long>(e),
                   t.nodes.end());
  return out;
}

// ---- fitness ------------------------------------------------------------

double fitness(const GpTree& tree, const LabeledDataset& train,
               const ClassifierSpec& spec, std::uint64_t seed, int folds) {
  const size_t n = train.size();
  if (n < 2) throw data_error("fitness: training set too small");

  Matrix cols = extract_features(tree, train.features);

  // Stratified fold assignment from the run seed only: the value is a pure
  // function of the tree, so clones can share cached fitness.
  std::vector<size_t> pos_idx, neg_idx;
  for (size_t i = 0; i < n; ++i)
    (train.labels[i] ? pos_idx : neg_idx).push_back(i);
  if (pos_idx.empty() || neg_idx.empty())
    throw data_error("fitness: both classes required");

  std::vector<int> fold(n, 0);
  auto deal = [&](std::vector<size_t>& idx, std::uint64_t tag) {
    rng_t r(derive_seed(seed, tag));
    for (size_t i = idx.size(); i-- > 1;) {
      size_t j = r.uniform_index(i + 1);
      std::swap(idx[i], idx[j]);
    }
    for (size_t i = 0; i < idx.size(); ++i)
      fold[idx[i]] = static_cast<int>(i % static_cast<size_t>(folds));
  };
  deal(pos_idx, 41);
  deal(neg_idx, 43);

  double auc_sum = 0.0;
  for (int f = 0; f < folds; ++f) {
    Matrix tr_x, te_x;
    std::vector<int> tr_y, te_y;
    for (size_t i = 0; i < n; ++i) {
      if (fold[i] == f) {
        te_x.push_back(cols[i]);
        te_y.push_back(train.labels[i]);
      } else {
        tr_x.push_back(cols[i]);
        tr_y.push_back(train.labels[i]);
      }
    }
    bool degenerate =
        te_x.empty() || tr_x.empty() ||
        std::all_of(te_y.begin(), te_y.end(), [&](int v) { return v == te_y[0]; }) ||
        std::all_of(tr_y.begin(), tr_y.end(), [&](int v) { return v == tr_y[0]; });
    if (degenerate) {
      auc_sum += 0.5;  // uninformative fold
      continue;
    }
    Model m = train_classifier(spec, tr_x, tr_y,
                               derive_seed(seed, 47, static_cast<std::uint64_t>(f)));
    auc_sum += roc_auc(predict_score(m, te_x), te_y);
  }
  return auc_sum / static_cast<double>(folds);
}

// ---- evolution ----------------------------------------------------------

namespace {

struct FitnessCache {
  std::unordered_map<std::string, double> map;
};

void evaluate_population(std::vector<Individual>& pop, const LabeledDataset& train,
                         const ClassifierSpec& cspec, std::uint64_t fit_seed,
                         int folds, int n_threads, FitnessCache& cache) {
  std::vector<std::string> keys(pop.size());
  std::vector<size_t> todo;
  for (size_t i = 0; i < pop.size(); ++i) {
    if (pop[i].fitness) continue;
    keys[i] = serialize(pop[i].tree);
    auto it = cache.map.find(keys[i]);
    if (it != cache.map.end())
      pop[i].fitness = it->second;
    else
      todo.push_back(i);
  }

  auto eval_range = [&](size_t lo, size_t hi) {
    for (size_t k = lo; k < hi; ++k) {
      size_t i = todo[k];
      pop[i].fitness = fitness(pop[i].tree, train, cspec, fit_seed, folds);
    }
  };
  if (n_threads <= 1 || todo.size() < 2) {
    eval_range(0, todo.size());
  } else {
    size_t nt = std::min<size_t>(static_cast<size_t>(n_threads), todo.size());
    std::vector<std::thread> workers;
    size_t chunk = (todo.size() + nt - 1) / nt;
    for (size_t w = 0; w < nt; ++w) {
      size_t lo = w * chunk, hi = std::min(todo.size(), lo + chunk);
      if (lo < hi) workers.emplace_back(eval_range, lo, hi);
    }
    for (auto& th : workers) th.join();
  }
  for (size_t i : todo) cache.map[keys[i]] = *pop[i].fitness;
}

size_t tournament_pick(const std::vector<Individual>& pop, int size, rng_t& rng) {
  size_t best = rng.uniform_index(pop.size());
  for (int k = 1; k < size; ++k) {
    size_t c = rng.uniform_index(pop.size());
    if (*pop[c].fitness > *pop[best].fitness ||
        (*pop[c].fitness == *pop[best].fitness && c < best))
      best = c;
  }
  return best;
}

}  // namespace

EvolveResult evolve(const EvolutionConfig& cfg, const LabeledDataset& train,
                    const ClassifierSpec& cspec, std::uint64_t seed) {
  if (cfg.generations < 1 || cfg.pop_size < 2 || cfg.tournament_size < 1)
    throw config_error("evolve: counts must be positive (pop >= 2)");
  if (cfg.p_crossover < 0.0 || cfg.p_mutation < 0.0 ||
      cfg.p_crossover + cfg.p_mutation > 1.0)
    throw config_error("evolve: need p_crossover + p_mutation <= 1");
  if (cfg.init_depth_min < 0 || cfg.init_depth_max < cfg.init_depth_min ||
      cfg.init_depth_max > cfg.max_depth)
    throw config_error("evolve: bad init depth range");

  const int n_attrs = static_cast<int>(train.features.n_cols());
  const std::uint64_t fit_seed = derive_seed(seed, 71);
  FitnessCache cache;

  std::vector<Individual> pop(static_cast<size_t>(cfg.pop_size));
  for (size_t i = 0; i < pop.size(); ++i) {
    rng_t r(derive_seed(seed, 0, i));
    pop[i].tree = random_tree(cfg.init_depth_min, cfg.init_depth_max, n_attrs, r,
                              GenMethod::ramped, cfg.const_prob);
    pop[i].n_features = std::max(1, count_f_nodes(pop[i].tree));
  }
  evaluate_population(pop, train, cspec, fit_seed, cfg.cv_folds, cfg.n_threads, cache);

  Individual best_ever = pop[0];
  for (const auto& ind : pop)
    if (*ind.fitness > *best_ever.fitness) best_ever = ind;

  EvolveResult res;
  for (int gen = 1; gen <= cfg.generations; ++gen) {
    std::vector<Individual> next;
    next.reserve(pop.size());
    next.push_back(best_ever);  // elite

    while (next.size() < pop.size()) {
      rng_t vr(derive_seed(seed, static_cast<std::uint64_t>(gen), next.size()));
      double r = vr.uniform01();
      if (r < cfg.p_crossover) {
        size_t pa = tournament_pick(pop, cfg.tournament_size, vr);
        size_t pb = tournament_pick(pop, cfg.tournament_size, vr);
        auto [c1, c2] =
            crossover_one_point(pop[pa].tree, pop[pb].tree, cfg.max_depth, vr);
        Individual i1;
        i1.tree = std::move(c1);
        i1.n_features = std::max(1, count_f_nodes(i1.tree));
        next.push_back(std::move(i1));
        if (next.size() < pop.size()) {
          Individual i2;
          i2.tree = std::move(c2);
          i2.n_features = std::max(1, count_f_nodes(i2.tree));
          next.push_back(std::move(i2));
        }
      } else if (r < cfg.p_crossover + cfg.p_mutation) {
        size_t pa = tournament_pick(pop, cfg.tournament_size, vr);
        Individual ind;
        ind.tree = mutate_uniform(pop[pa].tree, cfg.max_depth, n_attrs, vr,
                                  cfg.const_prob);
        ind.n_features = std::max(1, count_f_nodes(ind.tree));
        next.push_back(std::move(ind));
      } else {
        next.push_back(pop[tournament_pick(pop, cfg.tournament_size, vr)]);
      }
    }

    pop = std::move(next);
    evaluate_population(pop, train, cspec, fit_seed, cfg.cv_folds, cfg.n_threads,
                        cache);
    double mean = 0.0;
    for (const auto& ind : pop) {
      mean += *ind.fitness;
      if (*ind.fitness > *best_ever.fitness) best_ever = ind;
    }
    res.history.push_back(
        {*best_ever.fitness, mean / static_cast<double>(pop.size())});
  }
  res.best = std::move(best_ever);
  return res;
}

}  // namespace sleepgp
