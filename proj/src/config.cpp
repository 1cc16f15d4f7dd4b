// Copyright 2026 The PI-GPS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace pigps {

using nlohmann::json;

namespace {

bool NonNegativeInteger(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<int64_t>() >= 0);
}

// Walks one JSON object, converting known keys and remembering which keys
// were consumed so leftovers can be reported.
class Section {
 public:
  Section(const json* node, std::string path, std::vector<std::string>* problems)
      : node_(node), path_(std::move(path)), problems_(problems) {
    if (node_ != nullptr && !node_->is_object()) {
      Problem("must be an object");
      node_ = nullptr;
    }
  }

  ~Section() {
    if (node_ == nullptr) return;
    for (auto it = node_->begin(); it != node_->end(); ++it) {
      if (!used_.count(it.key())) problems_->push_back(Join(it.key()) + ": unknown key");
    }
  }

  Section Child(const std::string& key, bool required = false) {
    used_.insert(key);
    const json* child = Lookup(key);
    if (child == nullptr && required) problems_->push_back(Join(key) + ": required section missing");
    return Section(child, Join(key), problems_);
  }

  bool Has(const std::string& key) const { return Lookup(key) != nullptr; }

  void Get(const std::string& key, double& out) {
    if (const json* v = Take(key)) {
      if (v->is_number()) out = v->get<double>(); else Mistyped(key, "a number");
    }
  }

  void Get(const std::string& key, int& out) {
    if (const json* v = Take(key)) {
      if (v->is_number_integer()) out = v->get<int>(); else Mistyped(key, "an integer");
    }
  }

  void Get(const std::string& key, uint64_t& out) {
    if (const json* v = Take(key)) {
      if (NonNegativeInteger(*v)) {
        out = v->get<uint64_t>();
      } else {
        Mistyped(key, "a non-negative integer");
      }
    }
  }

  void Get(const std::string& key, bool& out) {
    if (const json* v = Take(key)) {
      if (v->is_boolean()) out = v->get<bool>(); else Mistyped(key, "a boolean");
    }
  }

  void Get(const std::string& key, std::string& out) {
    if (const json* v = Take(key)) {
      if (v->is_string()) out = v->get<std::string>(); else Mistyped(key, "a string");
    }
  }

  void Get(const std::string& key, std::vector<int>& out) {
    if (const json* v = Take(key)) {
      std::vector<int> parsed;
      if (!v->is_array()) return Mistyped(key, "an array of integers");
      for (const json& e : *v) {
        if (!e.is_number_integer()) return Mistyped(key, "an array of integers");
        parsed.push_back(e.get<int>());
      }
      out = std::move(parsed);
    }
  }

  void Get(const std::string& key, std::vector<uint64_t>& out) {
    if (const json* v = Take(key)) {
      std::vector<uint64_t> parsed;
      if (!v->is_array()) return Mistyped(key, "an array of non-negative integers");
      for (const json& e : *v) {
        if (!NonNegativeInteger(e)) {
          return Mistyped(key, "an array of non-negative integers");
        }
        parsed.push_back(e.get<uint64_t>());
      }
      out = std::move(parsed);
    }
  }

  void Get(const std::string& key, std::vector<double>& out) {
    if (const json* v = Take(key)) {
      std::vector<double> parsed;
      if (!v->is_array()) return Mistyped(key, "an array of numbers");
      for (const json& e : *v) {
        if (!e.is_number()) return Mistyped(key, "an array of numbers");
        parsed.push_back(e.get<double>());
      }
      out = std::move(parsed);
    }
  }

  void Get(const std::string& key, Vector& out) {
    if (const json* v = Take(key)) {
      if (!v->is_array()) return Mistyped(key, "an array of numbers");
      Vector parsed(static_cast<Eigen::Index>(v->size()));
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number()) return Mistyped(key, "an array of numbers");
        parsed[static_cast<Eigen::Index>(i)] = (*v)[i].get<double>();
      }
      out = std::move(parsed);
    }
  }

  void Problem(const std::string& what) { problems_->push_back(path_ + ": " + what); }
  void Problem(const std::string& key, const std::string& what) {
    problems_->push_back(Join(key) + ": " + what);
  }

 private:
  const json* Lookup(const std::string& key) const {
    if (node_ == nullptr) return nullptr;
    auto it = node_->find(key);
    return it == node_->end() ? nullptr : &*it;
  }

  const json* Take(const std::string& key) {
    used_.insert(key);
    return Lookup(key);
  }

  void Mistyped(const std::string& key, const char* expected) {
    problems_->push_back(Join(key) + ": must be " + expected);
  }

  std::string Join(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* node_;
  std::string path_;
  std::vector<std::string>* problems_;
  std::set<std::string> used_;
};

void ReadPointMass(Section s, PointMassParams& p) {
  s.Get("dt", p.dt);
  s.Get("horizon", p.horizon);
  s.Get("w_pos", p.w_pos);
  s.Get("w_vel", p.w_vel);
  s.Get("w_u", p.w_u);
  s.Get("action_limit", p.action_limit);
  s.Get("success_tolerance", p.success_tolerance);
}

void ReadLatch(Section s, LatchParams& p) {
  s.Get("dt", p.dt);
  s.Get("horizon", p.horizon);
  s.Get("engage_radius", p.engage_radius);
  s.Get("required_displacement", p.required_displacement);
  s.Get("failure_penalty", p.failure_penalty);
  s.Get("deadline", p.deadline);
  s.Get("w_u", p.w_u);
  s.Get("w_vel", p.w_vel);
  s.Get("action_limit", p.action_limit);
}

void ReadInstances(Section s, InstanceDistribution& d) {
  s.Get("target_low", d.target_low);
  s.Get("target_high", d.target_high);
  s.Get("start_low", d.start_low);
  s.Get("start_high", d.start_high);
}

void ReadTask(Section s, TaskSpec& task) {
  std::string kind = ToString(task.kind);
  s.Get("kind", kind);
  try {
    task.kind = ParseTaskKind(kind);
  } catch (const Error& e) {
    s.Problem("kind", e.what());
  }
  task.instances = DefaultInstances(task.kind);
  ReadPointMass(s.Child("point_mass"), task.point_mass);
  ReadLatch(s.Child("latch"), task.latch);
  ReadInstances(s.Child("instances"), task.instances);
}

void ReadGps(Section s, GpsConfig& g) {
  s.Get("local_iterations", g.local_iterations);
  s.Get("global_iterations", g.global_iterations);
  s.Get("instances_per_iteration", g.instances);
  s.Get("samples_per_instance", g.samples);
  s.Get("epsilon", g.epsilon);
  std::string optimizer = ToString(g.optimizer);
  s.Get("optimizer", optimizer);
  try {
    g.optimizer = ParseLocalOptimizer(optimizer);
  } catch (const Error& e) {
    s.Problem("optimizer", e.what());
  }
  std::string algorithm = ToString(g.algorithm);
  s.Get("algorithm", algorithm);
  try {
    g.algorithm = ParseAlgorithm(algorithm);
  } catch (const Error& e) {
    s.Problem("algorithm", e.what());
  }
  s.Get("initial_noise_std", g.initial_noise_std);
  s.Get("noise_increase", g.noise_increase);
  s.Get("kl_penalty_weight", g.kl_penalty_weight);
  s.Get("covariance_floor", g.covariance_floor);
  s.Get("hidden", g.hidden);
  {
    Section t = s.Child("train");
    t.Get("init_learning_rate", g.init_learning_rate);
    t.Get("global_learning_rate", g.global_learning_rate);
    t.Get("epochs", g.epochs);
    t.Get("batch_size", g.batch_size);
    t.Get("momentum", g.momentum);
  }
  {
    Section c = s.Child("curriculum");
    c.Get("enabled", g.curriculum);
    c.Get("start_fraction", g.curriculum_start);
  }
  {
    Section d = s.Child("dynamics");
    d.Get("prior_strength", g.dynamics_prior_strength);
    d.Get("ridge", g.dynamics_ridge);
  }
  {
    Section i = s.Child("init");
    i.Get("kp", g.init.kp);
    i.Get("kd", g.init.kd);
    i.Get("duration", g.init.duration);
    std::vector<double> offset(g.init.target_offset.begin(), g.init.target_offset.end());
    i.Get("target_offset", offset);
    if (offset.size() == 2) {
      g.init.target_offset = {offset[0], offset[1]};
    } else {
      i.Problem("target_offset", "must have 2 entries");
    }
  }
}

void ReadEvaluation(Section s, EvalProtocol& e) {
  s.Get("n_eval", e.n_eval);
  s.Get("seed", e.seed);
  s.Get("every", e.every);
  std::string policy = e.local ? "local" : "global";
  s.Get("policy", policy);
  if (policy == "local" || policy == "global") {
    e.local = policy == "local";
  } else {
    s.Problem("policy", "must be 'global' or 'local'");
  }
}

void ReadOutput(Section s, OutputConfig& o) {
  s.Get("dir", o.dir);
  s.Get("checkpoint_every", o.checkpoint_every);
}

template <typename F>
void Collect(std::vector<std::string>& problems, const std::string& prefix, F check) {
  try {
    check();
  } catch (const Error& e) {
    std::istringstream lines(e.what());
    std::string line;
    while (std::getline(lines, line)) {
      const auto start = line.find_first_not_of(" -");
      if (start == std::string::npos || line == "invalid configuration:") continue;
      problems.push_back(prefix + line.substr(start));
    }
  }
}

void Validate(const ExperimentConfig& c, std::vector<std::string>& problems) {
  if (c.name.empty()) problems.push_back("name: must not be empty");
  Collect(problems, "task.instances: ", [&] { ValidateDistribution(c.task.instances); });
  const InstanceDistribution& d = c.task.instances;
  if (d.target_low.size() == 2 && d.start_low.size() == 2) {
    const Instance center{d.TargetCenter(), d.StartCenter()};
    Collect(problems, "task: ", [&] { c.task.Make(center); });
  } else {
    problems.push_back("task.instances: target and start bounds must be 2-dimensional");
  }
  Collect(problems, "", [&] { ValidateGpsConfig(c.gps); });
  if (c.evaluation.n_eval < 1) problems.push_back("evaluation.n_eval: must be >= 1");
  if (c.evaluation.every < 0) problems.push_back("evaluation.every: must be >= 0");
  if (c.output.dir.empty()) problems.push_back("output.dir: must not be empty");
  if (c.output.checkpoint_every < 0) problems.push_back("output.checkpoint_every: must be >= 0");
  if (c.seeds.empty()) problems.push_back("seeds: must list at least one seed");
  if (std::set<uint64_t>(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size()) {
    problems.push_back("seeds: must be distinct");
  }
}

}  // namespace

InstanceDistribution DefaultInstances(TaskKind kind) {
  InstanceDistribution d;
  if (kind == TaskKind::kPointMass) {
    d.target_low = Vector::Constant(2, -2.0);
    d.target_high = Vector::Constant(2, 2.0);
  } else {
    d.target_low = (Vector(2) << 0.8, -0.4).finished();
    d.target_high = (Vector(2) << 1.2, 0.4).finished();
  }
  d.start_low = Vector::Zero(2);
  d.start_high = Vector::Zero(2);
  return d;
}

ExperimentConfig ParseExperiment(const json& doc) {
  std::vector<std::string> problems;
  ExperimentConfig c;
  {
    Section root(&doc, "", &problems);
    std::string schema;
    root.Get("schema", schema);
    if (schema.empty()) {
      root.Problem("schema", std::string("missing (expected '") + kExperimentSchema + "')");
    } else if (schema != kExperimentSchema) {
      root.Problem("schema", "unsupported '" + schema + "' (expected '" + kExperimentSchema + "')");
    }
    root.Get("name", c.name);
    ReadTask(root.Child("task", true), c.task);
    ReadGps(root.Child("gps", true), c.gps);
    ReadEvaluation(root.Child("evaluation", true), c.evaluation);
    ReadOutput(root.Child("output", true), c.output);
    if (!root.Has("seeds")) root.Problem("seeds", "required");
    root.Get("seeds", c.seeds);
  }
  // Mistyped fields keep their defaults, so the remaining checks stay meaningful.
  Validate(c, problems);
  if (!problems.empty()) {
    std::ostringstream msg;
    msg << "invalid configuration (" << problems.size() << " problem"
        << (problems.size() == 1 ? "" : "s") << "):";
    for (const std::string& p : problems) msg << "\n  - " << p;
    throw Error(ErrorCode::kConfig, msg.str());
  }
  if (!c.seeds.empty()) c.gps.seed = c.seeds.front();
  return c;
}

ExperimentConfig ParseExperimentText(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  return ParseExperiment(doc);
}

ExperimentConfig LoadExperiment(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseExperimentText(buffer.str());
}

json ToJson(const ExperimentConfig& c) {
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  const PointMassParams& pm = c.task.point_mass;
  const LatchParams& la = c.task.latch;
  const InstanceDistribution& d = c.task.instances;
  const GpsConfig& g = c.gps;
  json doc;
  doc["schema"] = kExperimentSchema;
  doc["name"] = c.name;
  doc["task"] = {
      {"kind", ToString(c.task.kind)},
      {"point_mass",
       {{"dt", pm.dt}, {"horizon", pm.horizon}, {"w_pos", pm.w_pos}, {"w_vel", pm.w_vel},
        {"w_u", pm.w_u}, {"action_limit", pm.action_limit},
        {"success_tolerance", pm.success_tolerance}}},
      {"latch",
       {{"dt", la.dt}, {"horizon", la.horizon}, {"engage_radius", la.engage_radius},
        {"required_displacement", la.required_displacement},
        {"failure_penalty", la.failure_penalty}, {"deadline", la.deadline}, {"w_u", la.w_u},
        {"w_vel", la.w_vel}, {"action_limit", la.action_limit}}},
      {"instances",
       {{"target_low", vec(d.target_low)}, {"target_high", vec(d.target_high)},
        {"start_low", vec(d.start_low)}, {"start_high", vec(d.start_high)}}}};
  doc["gps"] = {
      {"local_iterations", g.local_iterations},
      {"global_iterations", g.global_iterations},
      {"instances_per_iteration", g.instances},
      {"samples_per_instance", g.samples},
      {"epsilon", g.epsilon},
      {"optimizer", ToString(g.optimizer)},
      {"algorithm", ToString(g.algorithm)},
      {"initial_noise_std", g.initial_noise_std},
      {"noise_increase", g.noise_increase},
      {"kl_penalty_weight", g.kl_penalty_weight},
      {"covariance_floor", g.covariance_floor},
      {"hidden", g.hidden},
      {"train",
       {{"init_learning_rate", g.init_learning_rate},
        {"global_learning_rate", g.global_learning_rate}, {"epochs", g.epochs},
        {"batch_size", g.batch_size}, {"momentum", g.momentum}}},
      {"curriculum", {{"enabled", g.curriculum}, {"start_fraction", g.curriculum_start}}},
      {"dynamics", {{"prior_strength", g.dynamics_prior_strength}, {"ridge", g.dynamics_ridge}}},
      {"init",
       {{"kp", g.init.kp}, {"kd", g.init.kd}, {"duration", g.init.duration},
        {"target_offset", g.init.target_offset}}}};
  doc["evaluation"] = {{"n_eval", c.evaluation.n_eval},
                       {"seed", c.evaluation.seed},
                       {"every", c.evaluation.every},
                       {"policy", c.evaluation.local ? "local" : "global"}};
  doc["output"] = {{"dir", c.output.dir}, {"checkpoint_every", c.output.checkpoint_every}};
  doc["seeds"] = c.seeds;
  return doc;
}

std::string SerializeExperiment(const ExperimentConfig& config) {
  return ToJson(config).dump(2) + "\n";
}

void ApplyOverride(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::kConfig, "override '" + assignment + "' is not of the form key=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::size_t begin = 0;
  while (true) {
    const auto dot = path.find('.', begin);
    const std::string key = path.substr(begin, dot == std::string::npos ? std::string::npos : dot - begin);
    if (key.empty()) throw Error(ErrorCode::kConfig, "override '" + assignment + "' has an empty key");
    if (!node->is_object()) {
      throw Error(ErrorCode::kConfig, "override '" + path + "': '" + key + "' is inside a non-object");
    }
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    begin = dot + 1;
  }
}

}  // namespace pigps
