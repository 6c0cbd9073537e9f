#include "hysync/scenario_io.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <type_traits>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include <toml.hpp>

namespace hysync {
namespace {

[[noreturn]] void fail(const std::string& source, const toml::source_region& where, const std::string& msg) {
  if (where.begin.line > 0) throw ScenarioIoError(source + ":" + std::to_string(where.begin.line) + ": " + msg);
  throw ScenarioIoError(source + ": " + msg);
}

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void error(const toml::node* node, const std::string& msg) const {
    fail(source_, node ? node->source() : toml::source_region{}, msg);
  }

  double number(const toml::node& node, const std::string& key) const {
    if (auto v = node.value<double>()) return *v;
    if (auto s = node.value<std::string>()) {
      try {
        return parse_angle(*s);
      } catch (const std::exception&) {
      }
    }
    error(&node, "'" + key + "' must be a number");
  }

  long long integer(const toml::node& node, const std::string& key) const {
    if (auto v = node.value<int64_t>(); v && node.is_integer()) return *v;
    error(&node, "'" + key + "' must be an integer");
  }

  std::string string(const toml::node& node, const std::string& key) const {
    if (auto v = node.value<std::string>()) return *v;
    error(&node, "'" + key + "' must be a string");
  }

  VectorXd vector(const toml::node& node, const std::string& key) const {
    const toml::array* arr = node.as_array();
    if (!arr) error(&node, "'" + key + "' must be an array of numbers");
    VectorXd out(static_cast<Eigen::Index>(arr->size()));
    for (std::size_t k = 0; k < arr->size(); ++k) out(static_cast<Eigen::Index>(k)) = number((*arr)[k], key);
    return out;
  }

  VectorXi ivector(const toml::node& node, const std::string& key) const {
    const toml::array* arr = node.as_array();
    if (!arr) error(&node, "'" + key + "' must be an array of integers");
    VectorXi out(static_cast<Eigen::Index>(arr->size()));
    for (std::size_t k = 0; k < arr->size(); ++k)
      out(static_cast<Eigen::Index>(k)) = static_cast<int>(integer((*arr)[k], key));
    return out;
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
};

void check_keys(const Reader& rd, const toml::table& t, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  for (const auto& [k, v] : t) {
    bool ok = false;
    for (auto a : allowed) ok = ok || k.str() == a;
    if (!ok) rd.error(&v, "unknown key '" + std::string(k.str()) + "' in " + where);
  }
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

template <typename V>
std::string array(const V& v) {
  std::string out = "[";
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (k) out += ", ";
    if constexpr (std::is_same_v<typename V::Scalar, int>) {
      out += std::to_string(v(k));
    } else {
      out += num(v(k));
    }
  }
  return out + "]";
}

/// Trees given as edge lists are re-oriented; other edge sets are kept as given. When
/// tree_error is non-null, a failed tree build is reported there instead of thrown.
GeneralGraph read_graph(const Reader& rd, const toml::table& t, int n, std::string* tree_error) {
  try {
    if (auto e = t.get("edges")) {
      if (t.get("tree")) rd.error(e, "give either 'edges' or 'tree', not both");
      const toml::array* arr = e->as_array();
      if (!arr) rd.error(e, "'edges' must be an array of [i, j] pairs");
      std::vector<std::pair<int, int>> pairs;
      for (const toml::node& item : *arr) {
        const toml::array* p = item.as_array();
        if (!p || p->size() != 2) rd.error(&item, "each edge must be a pair [i, j]");
        pairs.emplace_back(static_cast<int>(rd.integer((*p)[0], "edges")) - 1,
                           static_cast<int>(rd.integer((*p)[1], "edges")) - 1);
      }
      std::vector<Edge> directed;
      for (auto [a, b] : pairs) directed.push_back({a, b});
      GeneralGraph as_given(n, directed);
      try {
        return OrientedTree::build(n, pairs);
      } catch (const GraphError& err) {
        if (tree_error) *tree_error = err.what();
        if (as_given.is_connected() || tree_error) return as_given;
        throw;
      }
    }
    std::string shape = "path";
    if (auto s = t.get("tree")) shape = rd.string(*s, "tree");
    if (shape == "path") return OrientedTree::path(n);
    if (shape == "star") return OrientedTree::star(n);
    rd.error(t.get("tree"), "tree must be \"path\" or \"star\"");
  } catch (const GraphError& e) {
    rd.error(t.get("edges"), e.what());
  }
}

/// Coupling from a table holding family / delta / w / s / values / table (defaults: sign).
CouplingSpec read_coupling(const Reader& rd, const toml::table* t, double delta, const std::filesystem::path& base_dir) {
  std::string family = "sign";
  if (t) {
    if (auto f = t->get("family")) family = rd.string(*f, "family");
    if (auto d = t->get("delta")) delta = rd.number(*d, "delta");
  }
  try {
    switch (parse_sigma_family(family)) {
      case SigmaFamily::Sign:
        return CouplingSpec::sign(delta);
      case SigmaFamily::Ramp:
        return CouplingSpec::ramp(delta);
      case SigmaFamily::SinePlusRamp: {
        std::optional<double> w;
        if (t)
          if (auto wn = t->get("w")) w = rd.number(*wn, "w");
        return CouplingSpec::sine_plus_ramp(delta, w);
      }
      case SigmaFamily::Table: {
        if (!t) rd.error(nullptr, "table coupling needs 'table' or 's' and 'values'");
        if (auto file = t->get("table")) {
          std::filesystem::path p = rd.string(*file, "table");
          if (p.is_relative()) p = base_dir / p;
          return CouplingSpec::table_from_file(delta, std::filesystem::absolute(p).lexically_normal());
        }
        const toml::node* s = t->get("s");
        const toml::node* v = t->get("values");
        if (!s || !v) rd.error(t, "table coupling needs 'table' or both 's' and 'values'");
        const VectorXd sv = rd.vector(*s, "s"), vv = rd.vector(*v, "values");
        return CouplingSpec::table(delta, {sv.data(), sv.data() + sv.size()}, {vv.data(), vv.data() + vv.size()});
      }
    }
  } catch (const ScenarioIoError&) {
    throw;
  } catch (const std::exception& e) {
    rd.error(t, e.what());
  }
  rd.error(t, "unknown coupling family");
}

toml::table parse_toml(std::string_view text, const std::string& source) {
  try {
    return toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    fail(source, e.source(), std::string(e.description()));
  }
}

std::string read_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioIoError(std::string("cannot open ") + what + " '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

}  // namespace

double parse_angle(std::string_view text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.empty()) throw ScenarioIoError("empty angle");
  const std::size_t pi = s.find("pi");
  char* end = nullptr;
  if (pi == std::string::npos) {
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) throw ScenarioIoError("bad angle '" + std::string(text) + "'");
    return v;
  }
  std::string head = s.substr(0, pi);
  std::string tail = s.substr(pi + 2);
  if (!head.empty() && head.back() == '*') head.pop_back();
  double factor = 1.0;
  if (head == "-") {
    factor = -1.0;
  } else if (!head.empty() && head != "+") {
    factor = std::strtod(head.c_str(), &end);
    if (end != head.c_str() + head.size()) throw ScenarioIoError("bad angle '" + std::string(text) + "'");
  }
  double divisor = 1.0;
  if (!tail.empty()) {
    if (tail.front() != '/') throw ScenarioIoError("bad angle '" + std::string(text) + "'");
    tail.erase(0, 1);
    divisor = std::strtod(tail.c_str(), &end);
    if (tail.empty() || end != tail.c_str() + tail.size() || divisor == 0.0)
      throw ScenarioIoError("bad angle '" + std::string(text) + "'");
  }
  return factor * kPi / divisor;
}

ScenarioConfig parse_scenario(std::string_view text, const std::string& source, const std::filesystem::path& base_dir) {
  const toml::table root = parse_toml(text, source);
  const Reader rd(source);
  check_keys(rd, root,
             {"id", "model", "seed", "nodes", "edges", "tree", "kappa", "delta", "physical_coupling", "omega",
              "coupling", "initial", "integrator"},
             "scenario");

  ScenarioConfig c;
  if (auto n = root.get("id")) c.id = rd.string(*n, "id");
  if (auto n = root.get("model")) {
    try {
      c.omega_model = parse_omega_model(rd.string(*n, "model"));
    } catch (const std::exception& e) {
      rd.error(n, e.what());
    }
    if (c.omega_model == OmegaModel::Custom) rd.error(n, "custom omega models cannot be loaded from a file");
  }
  if (auto n = root.get("seed")) {
    const long long s = rd.integer(*n, "seed");
    if (s < 0) rd.error(n, "seed must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (auto n = root.get("physical_coupling")) {
    try {
      c.physical_coupling = parse_physical_coupling(rd.string(*n, "physical_coupling"));
    } catch (const std::exception& e) {
      rd.error(n, e.what());
    }
  }

  const toml::node* nodes_node = root.get("nodes");
  if (!nodes_node) fail(source, {}, "missing 'nodes'");
  const long long n_nodes = rd.integer(*nodes_node, "nodes");
  if (n_nodes < 1 || n_nodes > 100000) rd.error(nodes_node, "'nodes' must be a positive integer");
  const int n = static_cast<int>(n_nodes);

  c.graph = read_graph(rd, root, n, nullptr);
  double delta = kPi / 4.0;
  if (auto d = root.get("delta")) delta = rd.number(*d, "delta");
  const toml::table* coupling = root["coupling"].as_table();
  if (coupling) check_keys(rd, *coupling, {"family", "delta", "w", "s", "values", "table"}, "[coupling]");
  c.coupling = read_coupling(rd, coupling, delta, base_dir);
  delta = c.coupling.delta();

  if (auto k = root.get("kappa")) c.kappa = rd.number(*k, "kappa");
  if (auto w = root.get("omega")) {
    if (c.omega_model != OmegaModel::ConstantVector) rd.error(w, "'omega' only applies to the constant model");
    c.constant_omega = rd.vector(*w, "omega");
  } else if (c.omega_model == OmegaModel::ConstantVector) {
    c.constant_omega = VectorXd::Zero(n);
  }
  if (c.omega_model != OmegaModel::ConstantVector) resample_grid_params(c);

  c.initial.theta = n >= 2 ? equally_spaced_initial(n, delta) : VectorXd::Zero(n);
  c.initial.q = VectorXi::Zero(c.graph.num_edges());
  if (const toml::table* init = root["initial"].as_table()) {
    check_keys(rd, *init, {"theta", "q", "aux"}, "[initial]");
    if (auto t = init->get("theta")) {
      if (t->is_string()) {
        if (rd.string(*t, "theta") != "equally_spaced") rd.error(t, "theta must be an array or \"equally_spaced\"");
      } else {
        c.initial.theta = rd.vector(*t, "theta");
      }
    }
    if (auto q = init->get("q")) c.initial.q = rd.ivector(*q, "q");
    if (auto a = init->get("aux")) c.initial.aux = rd.vector(*a, "aux");
  }

  if (const toml::table* integ = root["integrator"].as_table()) {
    check_keys(rd, *integ, {"step_h", "event_tol", "t_end", "max_jumps", "sliding", "sliding_band", "record_every"},
               "[integrator]");
    IntegratorConfig& g = c.integrator;
    if (auto v = integ->get("step_h")) g.step_h = rd.number(*v, "step_h");
    if (auto v = integ->get("event_tol")) g.event_tol = rd.number(*v, "event_tol");
    if (auto v = integ->get("t_end")) g.t_end = rd.number(*v, "t_end");
    if (auto v = integ->get("max_jumps")) g.max_jumps = static_cast<int>(rd.integer(*v, "max_jumps"));
    if (auto v = integ->get("sliding_band")) g.sliding_band = rd.number(*v, "sliding_band");
    if (auto v = integ->get("record_every")) g.record_every = static_cast<int>(rd.integer(*v, "record_every"));
    if (auto v = integ->get("sliding")) {
      try {
        g.sliding = parse_sliding_mode(rd.string(*v, "sliding"));
      } catch (const ConfigError& e) {
        rd.error(v, e.what());
      }
    }
  }

  try {
    c.validate();
  } catch (const ScenarioError& e) {
    fail(source, {}, e.what());
  }
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_file(path, "scenario file"), path.string(), path.parent_path());
}

std::string dump_scenario(const ScenarioConfig& c) {
  if (c.omega_model == OmegaModel::Custom) throw ScenarioIoError("custom omega models cannot be saved");
  std::ostringstream os;
  os << "id = " << quoted(c.id) << '\n'
     << "model = " << quoted(std::string(to_string(c.omega_model))) << '\n'
     << "seed = " << c.seed << '\n'
     << "nodes = " << c.num_nodes() << '\n'
     << "edges = [";
  for (std::size_t k = 0; k < c.graph.edges().size(); ++k) {
    const Edge& e = c.graph.edges()[k];
    os << (k ? ", " : "") << '[' << e.tail + 1 << ", " << e.head + 1 << ']';
  }
  os << "]\n"
     << "kappa = " << num(c.kappa) << '\n'
     << "physical_coupling = " << quoted(std::string(to_string(c.physical_coupling))) << '\n';
  if (c.omega_model == OmegaModel::ConstantVector) os << "omega = " << array(c.constant_omega) << '\n';

  const CouplingSpec& s = c.coupling;
  os << "\n[coupling]\n"
     << "family = " << quoted(std::string(to_string(s.family()))) << '\n'
     << "delta = " << num(s.delta()) << '\n';
  if (s.family() == SigmaFamily::SinePlusRamp) os << "w = " << num(s.weight()) << '\n';
  if (s.family() == SigmaFamily::Table) {
    if (!s.table_path().empty()) {
      os << "table = " << quoted(s.table_path().string()) << '\n';
    } else {
      const auto& xs = s.table_abscissae();
      const auto& vs = s.table_values();
      os << "s = " << array(Eigen::Map<const VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()))) << '\n'
         << "values = " << array(Eigen::Map<const VectorXd>(vs.data(), static_cast<Eigen::Index>(vs.size()))) << '\n';
    }
  }

  os << "\n[initial]\n"
     << "theta = " << array(c.initial.theta) << '\n'
     << "q = " << array(c.initial.q) << '\n';
  if (c.initial.aux.size() > 0) os << "aux = " << array(c.initial.aux) << '\n';

  const IntegratorConfig& g = c.integrator;
  os << "\n[integrator]\n"
     << "step_h = " << num(g.step_h) << '\n'
     << "event_tol = " << num(g.event_tol) << '\n'
     << "t_end = " << num(g.t_end) << '\n'
     << "max_jumps = " << g.max_jumps << '\n'
     << "sliding = " << quoted(std::string(to_string(g.sliding))) << '\n'
     << "sliding_band = " << num(g.sliding_band) << '\n'
     << "record_every = " << g.record_every << '\n';
  return os.str();
}

void save_scenario(const std::filesystem::path& path, const ScenarioConfig& scenario) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ScenarioIoError("cannot open '" + path.string() + "' for writing");
  os << dump_scenario(scenario);
  if (!os) throw ScenarioIoError("write to '" + path.string() + "' failed");
}

SpecFile load_spec_file(const std::filesystem::path& path, double default_delta) {
  SpecFile out;
  const std::string text = read_file(path, "spec file");
  if (path.extension() != ".toml") {
    out.coupling = CouplingSpec::table_from_file(default_delta, path);
    return out;
  }
  const toml::table root = parse_toml(text, path.string());
  const Reader rd(path.string());
  double delta = default_delta;
  if (auto d = root.get("delta")) delta = rd.number(*d, "delta");
  if (const toml::table* c = root["coupling"].as_table()) {
    out.coupling = read_coupling(rd, c, delta, path.parent_path());
  } else if (root.get("family")) {
    out.coupling = read_coupling(rd, &root, delta, path.parent_path());
  }
  if (auto nn = root.get("nodes")) {
    const long long n = rd.integer(*nn, "nodes");
    if (n < 1) rd.error(nn, "'nodes' must be a positive integer");
    std::string err;
    out.graph = read_graph(rd, root, static_cast<int>(n), &err);
    if (!err.empty()) out.tree_error = err;
  }
  if (!out.coupling && !out.graph) throw ScenarioIoError(path.string() + ": neither a coupling nor a graph found");
  return out;
}

}  // namespace hysync
