#include "dinerdash/dpgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "default_structures.hpp"
#include "dinerdash/errors.hpp"

namespace dinerdash {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Structure documents

namespace {

struct Binding {
  int action = 0;
  int table = -1;
  int group = -1;
};

std::vector<Binding> expand_action(const json& spec) {
  using namespace action_index;
  std::vector<Binding> out;
  if (spec.is_number_integer()) {
    const Action a = Action::from_index(spec.get<int>());
    out.push_back({a.index(), a.table, a.group});
    return out;
  }
  if (!spec.is_string()) throw std::invalid_argument("structure 'action' must be a name or an index");
  const std::string name = spec.get<std::string>();
  if (name == "SEAT") {
    for (int g = 0; g < kQueueSlots; ++g)
      for (int t = 0; t < kNumTables; ++t) out.push_back({seat(g, t), t, g});
    return out;
  }
  if (name == "MOVE_TO_TABLE") {
    for (int t = 0; t < kNumTables; ++t) out.push_back({move_to_table(t), t, -1});
    return out;
  }
  for (int i = kTakeOrder; i <= kMoveToKitchen; ++i)
    if (Action::from_index(i).name() == name) return {{i}};
  if (name == "WAIT") return {{kWait}};
  throw std::invalid_argument("unknown action '" + name + "' in structure document");
}

std::string bind_placeholders(const std::string& source, const Binding& b) {
  const auto open = source.find('[');
  if (open == std::string::npos) return source;
  std::string out = source.substr(0, open + 1);
  std::string token;
  auto flush = [&] {
    if (token == "t" || token == "g") {
      const int v = token == "t" ? b.table : b.group;
      if (v < 0) throw std::invalid_argument("placeholder '" + token + "' unbound for action " +
                                             Action::from_index(b.action).name());
      out += std::to_string(v);
    } else {
      out += token;
    }
    token.clear();
  };
  for (std::size_t i = open + 1; i < source.size(); ++i) {
    const char c = source[i];
    if (c == ',' || c == ']') {
      flush();
      out += c;
    } else if (c != ' ') {
      token += c;
    }
  }
  return out;
}

}  // namespace

StructureSet StructureSet::parse(std::string_view json_text, const EnvConfig& config) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("structure document: ") + e.what());
  }
  StructureSet set;
  set.source_ = std::string(json_text);
  set.config_ = config;
  std::vector<std::optional<ActionStructure>> slots(kNumActions);
  try {
    if (doc.value("format", "") != "dinerdash-structures")
      throw std::invalid_argument("structure document: format must be 'dinerdash-structures'");
    for (const json& entry : doc.at("actions")) {
      const std::string model = entry.at("model").get<std::string>();
      if (model != "graph" && model != "memo")
        throw std::invalid_argument("structure model must be 'graph' or 'memo', got '" + model + "'");
      for (const Binding& b : expand_action(entry.at("action"))) {
        std::vector<SelectorVariable> vars;
        std::vector<std::string> names;
        for (const json& v : entry.at("variables")) {
          SelectorVariable var;
          var.name = v.at("name").get<std::string>();
          if (std::find(names.begin(), names.end(), var.name) != names.end())
            throw std::invalid_argument("duplicate variable name '" + var.name + "'");
          names.push_back(var.name);
          var.source = FeatureSource::parse(bind_placeholders(v.at("source").get<std::string>(), b));
          if (v.contains("bins")) var.discretization = Discretization::bins(v.at("bins").get<std::vector<double>>());
          else if (v.contains("categorical")) var.discretization = Discretization::categorical(v.at("categorical").get<int>());
          else var.discretization = natural_discretization(var.source, config);
          vars.push_back(std::move(var));
        }
        if (vars.empty()) throw std::invalid_argument("action needs at least one variable");
        ActionStructure as;
        as.action = b.action;
        as.kind = model == "graph" ? ModelKind::kGraph : ModelKind::kMemo;
        if (as.kind == ModelKind::kGraph) {
          for (const json& f : entry.at("factors")) {
            std::vector<int> scope;
            for (const json& n : f) {
              const auto it = std::find(names.begin(), names.end(), n.get<std::string>());
              if (it == names.end())
                throw std::invalid_argument("factor refers to unknown variable '" + n.get<std::string>() + "'");
              scope.push_back(static_cast<int>(it - names.begin()));
            }
            as.factors.push_back(std::move(scope));
          }
        }
        as.selector = SubstateSelector(b.action, std::move(vars), config);
        if (as.kind == ModelKind::kGraph)  // validates scopes
          FactorGraphModel(as.selector.cardinalities(), as.factors);
        if (slots[static_cast<std::size_t>(b.action)])
          throw std::invalid_argument("action " + Action::from_index(b.action).name() + " defined twice");
        slots[static_cast<std::size_t>(b.action)] = std::move(as);
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("structure document: ") + e.what());
  }
  for (int a = 0; a < kNumActions; ++a) {
    if (!slots[static_cast<std::size_t>(a)])
      throw std::invalid_argument("structure document does not cover action " + Action::from_index(a).name());
    set.actions_.push_back(std::move(*slots[static_cast<std::size_t>(a)]));
  }
  return set;
}

StructureSet StructureSet::load_file(const std::string& path, const EnvConfig& config) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open structure file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), config);
}

std::string_view StructureSet::default_json() { return detail::kDefaultStructuresJson; }

StructureSet StructureSet::defaults(const EnvConfig& config) { return parse(default_json(), config); }

// ---------------------------------------------------------------------------
// Policy

DpgmPolicy::DpgmPolicy(StructureSet structures, EnvConfig config, int hidden_width, uint64_t seed)
    : structures_(std::move(structures)),
      config_(std::move(config)),
      graphs_(kNumActions),
      memos_(kNumActions),
      net_(kNumActions,
           {{hidden_width, nn::Activation::kRelu, 0.0}, {kNumActions, nn::Activation::kIdentity, 0.0}}, seed) {
  for (int a = 0; a < kNumActions; ++a) {
    const ActionStructure& s = structures_[a];
    if (s.kind == ModelKind::kGraph) graphs_[static_cast<std::size_t>(a)].emplace(s.selector.cardinalities(), s.factors);
    else memos_[static_cast<std::size_t>(a)].emplace(s.selector.cardinalities());
  }
}

std::array<double, kNumActions> DpgmPolicy::scores(const StateView& view) const {
  const ServiceBoard board = ServiceBoard::analyze(view, config_);
  std::array<double, kNumActions> out{};
  Substate x;
  for (int a = 0; a < kNumActions; ++a) {
    const ActionStructure& s = structures_[a];
    s.selector.select_into(view, board, x);
    out[static_cast<std::size_t>(a)] = s.kind == ModelKind::kGraph ? graph(a).infer(x) : memo(a).score(x);
  }
  return out;
}

std::array<double, kNumActions> DpgmPolicy::scores(std::span<const double> state) const {
  return scores(StateView::decode(state));
}

DpgmOutput DpgmPolicy::forward(std::span<const double> state) const {
  DpgmOutput out;
  out.scores = scores(state);
  const Eigen::VectorXd logits = net_.predict(out.scores);
  for (int a = 0; a < kNumActions; ++a) out.logits[static_cast<std::size_t>(a)] = logits(a);
  return out;
}

int DpgmPolicy::act(std::span<const double> state, ActMode mode, Rng* rng) const {
  const DpgmOutput out = forward(state);
  if (mode == ActMode::kArgmax) return nn::argmax(out.logits);
  if (!rng) throw std::invalid_argument("sampling mode needs an rng");
  const Eigen::VectorXd p = nn::softmax(out.logits);
  const double u = rng->uniform();
  double acc = 0.0;
  for (int a = 0; a < kNumActions; ++a) {
    acc += p(a);
    if (u < acc) return a;
  }
  return kNumActions - 1;
}

std::string DpgmPolicy::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "dinerdash-dpgm";
  j["version"] = 1;
  j["env_config"] = config_.to_text();
  j["structures"] = structures_.source_text();
  auto graphs = nlohmann::ordered_json::array();
  auto memos = nlohmann::ordered_json::array();
  for (int a = 0; a < kNumActions; ++a) {
    if (kind(a) == ModelKind::kGraph) {
      nlohmann::ordered_json g;
      g["action"] = a;
      auto tables = nlohmann::ordered_json::array();
      const FactorGraphModel& m = graph(a);
      for (std::size_t f = 0; f < m.num_factors(); ++f) {
        std::vector<double> flat;
        for (int c = 0; c < m.num_cells(f); ++c) {
          flat.push_back(m.theta(f)(c, 0));
          flat.push_back(m.theta(f)(c, 1));
        }
        tables.push_back(flat);
      }
      g["theta"] = tables;
      graphs.push_back(g);
    } else {
      nlohmann::ordered_json m;
      m["action"] = a;
      auto entries = nlohmann::ordered_json::array();
      for (const auto& [x, c] : memo(a).entries()) entries.push_back({{"x", x}, {"positive", c.positive}, {"total", c.total}});
      m["entries"] = entries;
      memos.push_back(m);
    }
  }
  j["graphs"] = graphs;
  j["memos"] = memos;
  j["net"] = net_.to_text();
  return j.dump(1);
}

DpgmPolicy DpgmPolicy::from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "dinerdash-dpgm") throw DataError("not a DPGM checkpoint");
    const EnvConfig config = parse_config(j.at("env_config").get<std::string>());
    StructureSet structures = StructureSet::parse(j.at("structures").get<std::string>(), config);
    nn::DenseNet net = nn::DenseNet::from_text(j.at("net").get<std::string>());
    if (net.input_width() != kNumActions || net.output_width() != kNumActions)
      throw DataError("DPGM checkpoint: reweighting net must map 57 -> 57");
    DpgmPolicy policy(std::move(structures), config, 1, 0);
    policy.net_ = std::move(net);
    for (const json& g : j.at("graphs")) {
      const int a = g.at("action").get<int>();
      if (a < 0 || a >= kNumActions || policy.kind(a) != ModelKind::kGraph)
        throw DataError("DPGM checkpoint: graph entry for non-graph action");
      FactorGraphModel& m = policy.graph(a);
      const auto& tables = g.at("theta");
      if (tables.size() != m.num_factors()) throw DataError("DPGM checkpoint: factor count mismatch");
      for (std::size_t f = 0; f < m.num_factors(); ++f) {
        const auto flat = tables[f].get<std::vector<double>>();
        if (flat.size() != static_cast<std::size_t>(2 * m.num_cells(f)))
          throw DataError("DPGM checkpoint: theta table size mismatch");
        for (int c = 0; c < m.num_cells(f); ++c) {
          m.theta(f)(c, 0) = flat[static_cast<std::size_t>(2 * c)];
          m.theta(f)(c, 1) = flat[static_cast<std::size_t>(2 * c + 1)];
        }
      }
    }
    for (const json& mj : j.at("memos")) {
      const int a = mj.at("action").get<int>();
      if (a < 0 || a >= kNumActions || policy.kind(a) != ModelKind::kMemo)
        throw DataError("DPGM checkpoint: memo entry for non-memo action");
      auto& entries = policy.memo(a).entries();
      for (const json& e : mj.at("entries")) {
        MemoTable::Counts c{e.at("positive").get<long>(), e.at("total").get<long>()};
        if (c.positive < 0 || c.positive > c.total) throw DataError("DPGM checkpoint: memo counts invalid");
        entries[e.at("x").get<Substate>()] = c;
      }
    }
    return policy;
  } catch (const json::exception& e) {
    throw DataError(std::string("DPGM checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("DPGM checkpoint: ") + e.what());
  }
}

void DpgmPolicy::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << to_json();
}

DpgmPolicy DpgmPolicy::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

// ---------------------------------------------------------------------------
// Training

namespace {

std::vector<std::size_t> shuffled(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i - 1)));
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace

DpgmTrainResult dpgm_train(const Dataset& dataset, const StructureSet& structures, const DpgmTrainConfig& config) {
  if (dataset.transitions.empty()) throw std::invalid_argument("dpgm_train: empty dataset");
  const EnvConfig& env_config = structures.env_config();
  DpgmTrainResult result{DpgmPolicy(structures, env_config, config.reweight_hidden, config.seed), {}};
  DpgmPolicy& policy = result.policy;
  DpgmTrainReport& report = result.report;
  const std::size_t n = dataset.transitions.size();

  // Phase 1: per-action scorers from relabeled data.
  std::vector<CountedSubstates> counted(kNumActions);
  std::vector<long> positives(kNumActions, 0);
  Substate x;
  for (const Transition& tr : dataset.transitions) {
    const StateView view = StateView::decode(tr.state);
    const ServiceBoard board = ServiceBoard::analyze(view, env_config);
    positives[static_cast<std::size_t>(tr.action)]++;
    for (int a = 0; a < kNumActions; ++a) {
      const ActionStructure& s = structures[a];
      s.selector.select_into(view, board, x);
      const int y = tr.action == a ? 1 : 0;
      if (s.kind == ModelKind::kGraph) {
        auto& c = counted[static_cast<std::size_t>(a)][x];
        (y ? c.positive : c.negative)++;
      } else {
        policy.memo(a).add(x, y);
      }
    }
  }
  for (int a = 0; a < kNumActions; ++a) {
    if (positives[static_cast<std::size_t>(a)] == 0) report.actions_without_positives.push_back(a);
    if (policy.kind(a) == ModelKind::kGraph) {
      const GraphTrainResult r = graph_train(policy.graph(a), counted[static_cast<std::size_t>(a)], config.graph);
      report.graph_final_loss[static_cast<std::size_t>(a)] = r.final_loss();
    }
  }
  counted.clear();

  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = dataset.transitions[i].action;
  Rng shuffle_rng(config.seed, stream::kShuffle);
  const std::size_t batch = static_cast<std::size_t>(std::max(1, config.batch_size));

  // Phase 2: reweighting net on frozen scores.
  nn::Matrix all_scores(static_cast<Eigen::Index>(n), kNumActions);
  for (std::size_t i = 0; i < n; ++i) {
    const auto sc = policy.scores(dataset.transitions[i].state);
    for (int a = 0; a < kNumActions; ++a) all_scores(static_cast<Eigen::Index>(i), a) = sc[static_cast<std::size_t>(a)];
  }
  {
    nn::Optimizer opt({nn::OptimizerConfig::Algorithm::kAdam, config.lr});
    nn::DenseNet& net = policy.net();
    for (int epoch = 0; epoch < config.reweight_epochs; ++epoch) {
      const auto order = shuffled(n, shuffle_rng);
      double loss_sum = 0.0;
      long correct = 0;
      for (std::size_t start = 0; start < n; start += batch) {
        const std::size_t end = std::min(n, start + batch);
        nn::Matrix xb(static_cast<Eigen::Index>(end - start), kNumActions);
        std::vector<int> yb(end - start);
        for (std::size_t k = start; k < end; ++k) {
          xb.row(static_cast<Eigen::Index>(k - start)) = all_scores.row(static_cast<Eigen::Index>(order[k]));
          yb[k - start] = labels[order[k]];
        }
        nn::ForwardCache cache;
        const nn::Matrix logits = net.forward(xb, true, &cache);
        const auto ce = nn::softmax_cross_entropy(logits, yb);
        if (!std::isfinite(ce.loss)) throw std::runtime_error("dpgm_train: non-finite reweighting loss");
        const auto grads = net.backward(cache, ce.grad);
        const auto params = net.parameters(grads);
        opt.step(params);
        loss_sum += ce.loss * static_cast<double>(end - start);
        correct += ce.correct;
      }
      report.reweight_loss.push_back(loss_sum / static_cast<double>(n));
      report.reweight_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(n));
    }
  }
  all_scores.resize(0, 0);

  // Phase 3: joint fine-tuning of theta and the net; memo tables stay fixed.
  if (config.finetune && config.finetune_epochs > 0) {
    nn::Optimizer net_opt({nn::OptimizerConfig::Algorithm::kAdam, config.finetune_lr});
    nn::Optimizer theta_opt({nn::OptimizerConfig::Algorithm::kAdam, config.finetune_lr});
    std::vector<int> graph_actions;
    for (int a = 0; a < kNumActions; ++a)
      if (policy.kind(a) == ModelKind::kGraph) graph_actions.push_back(a);
    std::vector<std::vector<Eigen::MatrixXd>> theta_grad(kNumActions);
    for (int a : graph_actions)
      for (std::size_t f = 0; f < policy.graph(a).num_factors(); ++f)
        theta_grad[static_cast<std::size_t>(a)].push_back(Eigen::MatrixXd::Zero(policy.graph(a).num_cells(f), 2));
    std::vector<nn::ParamRef> theta_params;
    for (int a : graph_actions) {
      FactorGraphModel& m = policy.graph(a);
      for (std::size_t f = 0; f < m.num_factors(); ++f)
        theta_params.push_back({"theta[" + std::to_string(a) + "][" + std::to_string(f) + "]", m.theta(f).data(),
                                theta_grad[static_cast<std::size_t>(a)][f].data(),
                                static_cast<std::size_t>(m.theta(f).size())});
    }

    struct GraphTerm {
      int action;
      std::vector<int> cells;
      double p;
    };
    for (int epoch = 0; epoch < config.finetune_epochs; ++epoch) {
      const auto order = shuffled(n, shuffle_rng);
      double loss_sum = 0.0;
      long correct = 0;
      std::vector<std::vector<GraphTerm>> terms;
      for (std::size_t start = 0; start < n; start += batch) {
        const std::size_t end = std::min(n, start + batch);
        const auto rows = static_cast<Eigen::Index>(end - start);
        nn::Matrix xb(rows, kNumActions);
        std::vector<int> yb(end - start);
        terms.assign(end - start, {});
        for (std::size_t k = start; k < end; ++k) {
          const Transition& tr = dataset.transitions[order[k]];
          const StateView view = StateView::decode(tr.state);
          const ServiceBoard board = ServiceBoard::analyze(view, env_config);
          const auto r = static_cast<Eigen::Index>(k - start);
          yb[k - start] = tr.action;
          for (int a = 0; a < kNumActions; ++a) {
            const ActionStructure& s = structures[a];
            s.selector.select_into(view, board, x);
            if (s.kind == ModelKind::kMemo) {
              xb(r, a) = policy.memo(a).score(x);
              continue;
            }
            const FactorGraphModel& m = policy.graph(a);
            GraphTerm term{a, {}, 0.0};
            for (std::size_t f = 0; f < m.num_factors(); ++f) term.cells.push_back(m.cell(f, x));
            term.p = m.infer(x);
            xb(r, a) = term.p;
            terms[k - start].push_back(std::move(term));
          }
        }
        nn::DenseNet& net = policy.net();
        nn::ForwardCache cache;
        const nn::Matrix logits = net.forward(xb, true, &cache);
        const auto ce = nn::softmax_cross_entropy(logits, yb);
        if (!std::isfinite(ce.loss)) throw std::runtime_error("dpgm_train: non-finite fine-tuning loss");
        const auto grads = net.backward(cache, ce.grad);

        for (int a : graph_actions)
          for (auto& g : theta_grad[static_cast<std::size_t>(a)]) g.setZero();
        for (Eigen::Index r = 0; r < rows; ++r) {
          for (const GraphTerm& term : terms[static_cast<std::size_t>(r)]) {
            const double dz = grads.input(r, term.action) * term.p * (1.0 - term.p);
            auto& g = theta_grad[static_cast<std::size_t>(term.action)];
            for (std::size_t f = 0; f < term.cells.size(); ++f) {
              g[f](term.cells[f], 1) += dz;
              g[f](term.cells[f], 0) -= dz;
            }
          }
        }
        const auto net_params = net.parameters(grads);
        net_opt.step(net_params);
        theta_opt.step(theta_params);
        loss_sum += ce.loss * static_cast<double>(rows);
        correct += ce.correct;
      }
      report.finetune_loss.push_back(loss_sum / static_cast<double>(n));
      report.finetune_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(n));
    }
  }
  return result;
}

double action_agreement(const DpgmPolicy& policy, const Dataset& dataset) {
  if (dataset.transitions.empty()) return 0.0;
  long hits = 0;
  for (const Transition& tr : dataset.transitions) hits += policy.act(tr.state) == tr.action;
  return static_cast<double>(hits) / static_cast<double>(dataset.transitions.size());
}

DpgmAgent::DpgmAgent(std::shared_ptr<const DpgmPolicy> policy, ActMode mode, std::string name)
    : policy_(std::move(policy)), mode_(mode), name_(std::move(name)) {}

int DpgmAgent::act(const Env& env) {
  const StateVec s = env.encode_state();
  return policy_->act(s, mode_, &rng_);
}

}  // namespace dinerdash
