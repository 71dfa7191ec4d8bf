#include "ipfasst/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "ipfasst/error.hpp"

namespace ipfasst {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw ConfigError("field '" + key + "': " + why);
}

int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad(key, "expected an integer, got '" + v + "'");
  return out;
}

double parse_plain_double(const std::string& key, const std::string& v) {
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad(key, "expected a number, got '" + v + "'");
  return out;
}

// accepts "a/b" as well
double parse_double(const std::string& key, const std::string& v) {
  const auto slash = v.find('/');
  if (slash == std::string::npos) return parse_plain_double(key, v);
  const double den = parse_plain_double(key, trim(v.substr(slash + 1)));
  if (den == 0.0) bad(key, "zero denominator");
  return parse_plain_double(key, trim(v.substr(0, slash))) / den;
}

std::vector<int> parse_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_int(key, trim(item)));
  if (out.empty()) bad(key, "expected a comma-separated list of integers");
  return out;
}

std::string fmt_double(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

std::string fmt_list(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

const std::map<std::string, Variant> kVariants{
    {"SDC", Variant::SDC},       {"ISDC", Variant::ISDC},     {"MLSDC", Variant::MLSDC},
    {"IMLSDC", Variant::IMLSDC}, {"PFASST", Variant::PFASST}, {"IPFASST", Variant::IPFASST}};

const std::map<std::string, SmootherKind> kSmoothers{{"jacobi", SmootherKind::WeightedJacobi},
                                                     {"gauss-seidel", SmootherKind::GaussSeidelLex},
                                                     {"jor-rb", SmootherKind::JorRedBlack}};

std::string smoother_name(SmootherKind k) {
  for (const auto& [name, kind] : kSmoothers)
    if (kind == k) return name;
  return "?";
}

struct Field {
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define INT_FIELD(name) \
  Field{#name, [](ExperimentConfig& c, const std::string& v) { c.name = parse_int(#name, v); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.name); }}
#define DOUBLE_FIELD(name) \
  Field{#name, [](ExperimentConfig& c, const std::string& v) { c.name = parse_double(#name, v); }, \
        [](const ExperimentConfig& c) { return fmt_double(c.name); }}
#define LIST_FIELD(name) \
  Field{#name, [](ExperimentConfig& c, const std::string& v) { c.name = parse_list(#name, v); }, \
        [](const ExperimentConfig& c) { return fmt_list(c.name); }}
#define STRING_FIELD(name) \
  Field{#name, [](ExperimentConfig& c, const std::string& v) { c.name = v; }, \
        [](const ExperimentConfig& c) { return c.name; }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      STRING_FIELD(experiment),
      INT_FIELD(dim),
      INT_FIELD(nx),
      INT_FIELD(k),
      DOUBLE_FIELD(nu),
      DOUBLE_FIELD(length),
      DOUBLE_FIELD(t_end),
      INT_FIELD(nt),
      Field{"variant",
            [](ExperimentConfig& c, const std::string& v) {
              auto it = kVariants.find(v);
              if (it == kVariants.end()) bad("variant", "unknown variant '" + v + "'");
              c.variant = it->second;
            },
            [](const ExperimentConfig& c) { return variant_name(c.variant); }},
      INT_FIELD(levels),
      LIST_FIELD(nodes),
      LIST_FIELD(stencil),
      INT_FIELD(interp),
      Field{"smoother",
            [](ExperimentConfig& c, const std::string& v) {
              auto it = kSmoothers.find(v);
              if (it == kSmoothers.end())
                bad("smoother", "expected jacobi, gauss-seidel or jor-rb, got '" + v + "'");
              c.smoother = it->second;
            },
            [](const ExperimentConfig& c) { return smoother_name(c.smoother); }},
      DOUBLE_FIELD(omega),
      INT_FIELD(pre),
      INT_FIELD(post),
      INT_FIELD(vcycles),
      DOUBLE_FIELD(mg_tol),
      DOUBLE_FIELD(tol),
      INT_FIELD(max_iter),
      INT_FIELD(ranks),
      Field{"executor",
            [](ExperimentConfig& c, const std::string& v) {
              if (v == "serial") c.executor = Executor::Serial;
              else if (v == "threaded") c.executor = Executor::Threaded;
              else bad("executor", "expected serial or threaded, got '" + v + "'");
            },
            [](const ExperimentConfig& c) {
              return std::string(c.executor == Executor::Serial ? "serial" : "threaded");
            }},
      INT_FIELD(threads),
      LIST_FIELD(damping_nodes),
      INT_FIELD(damping_points),
      LIST_FIELD(orders),
      INT_FIELD(nt_min_exp),
      INT_FIELD(nt_max_exp),
      LIST_FIELD(vcycle_list),
      LIST_FIELD(sizes),
      STRING_FIELD(out),
      STRING_FIELD(trace),
  };
  return table;
}

#undef INT_FIELD
#undef DOUBLE_FIELD
#undef LIST_FIELD
#undef STRING_FIELD

const Field* find_field(const std::string& key) {
  for (const auto& f : fields())
    if (f.key == key) return &f;
  return nullptr;
}

void apply_preset(ExperimentConfig& c) {
  const std::string& e = c.experiment;
  if (e == "order-study") {
    c.variant = Variant::SDC;
    c.levels = 1;
    c.nodes = {1};
    c.stencil = {2};
    c.smoother = SmootherKind::GaussSeidelLex;
    c.mg_tol = 1e-13;
    c.tol = 1e-10;  // relative to each step's initial value
    c.max_iter = 50;
    c.nt_min_exp = 1;
  } else if (e == "vcycle-study") {
    c.nx = c.nt = c.ranks = 128;
  } else if (e == "weak-scaling") {
    c.smoother = SmootherKind::GaussSeidelLex;
    c.max_iter = 15;
  } else if (e == "strong-3d") {
    c.dim = 3;
    c.nx = 32;
    c.nt = 24;
    c.ranks = 24;
    c.nu = 1.0 / 3.0;
    c.levels = 2;
    c.nodes = {4, 2};
    c.stencil = {4, 2};
    c.interp = 4;
    c.smoother = SmootherKind::JorRedBlack;
  }
}

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::map<std::string, std::string> read_pairs(const std::string& text, const std::string& origin) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + " line " + std::to_string(lineno) + ": expected key=value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

}  // namespace

std::string variant_name(Variant v) {
  for (const auto& [name, var] : kVariants)
    if (var == v) return name;
  return "?";
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"damping",      "order-study", "vcycle-study",
                                              "weak-scaling", "strong-3d",   "single-run"};
  return names;
}

bool ExperimentConfig::inexact() const {
  return variant == Variant::ISDC || variant == Variant::IMLSDC || variant == Variant::IPFASST;
}

bool ExperimentConfig::multilevel() const {
  return variant != Variant::SDC && variant != Variant::ISDC;
}

bool ExperimentConfig::parallel() const {
  return variant == Variant::PFASST || variant == Variant::IPFASST;
}

SolvePolicy ExperimentConfig::policy() const {
  return inexact() ? SolvePolicy::fixed(vcycles) : SolvePolicy::to_tolerance(mg_tol);
}

MgConfig ExperimentConfig::mg() const {
  MgConfig m;
  m.smoother = {smoother, omega};
  m.pre_sweeps = pre;
  m.post_sweeps = post;
  return m;
}

ProblemSpec ExperimentConfig::problem() const {
  ProblemSpec p;
  p.dim = dim;
  p.length = length;
  p.nu = nu;
  p.mode = k;
  return p;
}

std::vector<LevelSpec> ExperimentConfig::level_specs(int fine_points) const {
  std::vector<LevelSpec> specs;
  for (int l = 0; l < levels; ++l) {
    LevelSpec s;
    s.points = fine_points >> l;
    s.substeps = nodes[static_cast<std::size_t>(l)];
    s.stencil_order = stencil[static_cast<std::size_t>(l)];
    s.mg = mg();
    s.policy = policy();
    s.space_interp_order = interp;
    specs.push_back(s);
  }
  return specs;
}

void ExperimentConfig::validate() const {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), experiment) == names.end())
    bad("experiment", "unknown experiment '" + experiment + "'");
  if (dim < 1 || dim > 3) bad("dim", "must be 1, 2 or 3");
  if (!is_pow2(nx) || nx < 8) bad("nx", "must be a power of two >= 8");
  if (k < 1 || k >= nx) bad("k", "must lie in 1..nx-1");
  if (!(nu > 0)) bad("nu", "must be positive");
  if (!(length > 0)) bad("length", "must be positive");
  if (!(t_end > 0)) bad("t_end", "must be positive");
  if (nt < 1) bad("nt", "must be positive");
  if (levels < 1 || levels > 3) bad("levels", "must be 1, 2 or 3");
  if (!multilevel() && levels != 1) bad("levels", variant_name(variant) + " runs on exactly one level");
  if (multilevel() && levels < 2) bad("levels", variant_name(variant) + " needs at least two levels");
  if (static_cast<int>(nodes.size()) != levels) bad("nodes", "needs one entry per level");
  if (static_cast<int>(stencil.size()) != levels) bad("stencil", "needs one entry per level");
  for (std::size_t l = 0; l < nodes.size(); ++l) {
    if (nodes[l] < 1) bad("nodes", "entries must be positive");
    if (l > 0 && nodes[l - 1] % nodes[l] != 0) bad("nodes", "each coarser count must divide the finer one");
  }
  for (std::size_t l = 0; l < stencil.size(); ++l) {
    if (stencil[l] != 2 && stencil[l] != 4) bad("stencil", "entries must be 2 or 4");
    if (l > 0 && stencil[l] > stencil[l - 1]) bad("stencil", "coarser levels cannot use a higher order");
  }
  if ((nx >> (levels - 1)) < 4) bad("levels", "too many levels for nx");
  if (interp != 2 && interp != 4) bad("interp", "must be 2 or 4");
  if (smoother != SmootherKind::GaussSeidelLex && !(omega > 0 && omega <= 1)) bad("omega", "must lie in (0, 1]");
  if (pre < 0 || post < 0 || pre + post < 1) bad("pre", "need at least one smoothing sweep");
  if (vcycles < 1) bad("vcycles", "must be positive");
  if (!(mg_tol > 0 && mg_tol < 1)) bad("mg_tol", "must lie in (0, 1)");
  if (max_iter < 1) bad("max_iter", "must be positive");
  if (ranks < 1) bad("ranks", "must be positive");
  if (threads < 1) bad("threads", "must be positive");

  if (!parallel() && ranks != 1) bad("ranks", variant_name(variant) + " is serial, ranks must be 1");
  if (parallel() && nt % ranks != 0) bad("nt", "must be a multiple of ranks");

  if (experiment == "damping") {
    for (int m : damping_nodes)
      if (m < 1) bad("damping_nodes", "entries must be positive");
    if (damping_points < 2) bad("damping_points", "need at least two points");
  } else if (experiment == "order-study") {
    if (multilevel()) bad("variant", "order-study runs SDC or ISDC");
    for (int o : orders)
      if (o < 1) bad("orders", "entries must be positive");
    if (nt_min_exp < 0 || nt_max_exp < nt_min_exp || nt_max_exp > 16)
      bad("nt_max_exp", "need 0 <= nt_min_exp <= nt_max_exp <= 16");
  } else if (experiment == "vcycle-study") {
    if (variant != Variant::IPFASST) bad("variant", "vcycle-study needs IPFASST (fixed V-cycle budgets)");
    if (nt != ranks) bad("ranks", "vcycle-study needs ranks == nt");
    for (int v : vcycle_list)
      if (v < 1) bad("vcycle_list", "entries must be positive");
  } else if (experiment == "weak-scaling") {
    if (!parallel()) bad("variant", "weak-scaling needs PFASST or IPFASST");
    for (int n : sizes)
      if (!is_pow2(n) || (n >> (levels - 1)) < 4) bad("sizes", "entries must be powers of two large enough for the hierarchy");
  } else if (experiment == "strong-3d") {
    if (!parallel()) bad("variant", "strong-3d needs PFASST or IPFASST");
  }
}

ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides,
                              const std::string& experiment) {
  auto pairs = read_pairs(text, "config");
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "': expected key=value");
    pairs[trim(o.substr(0, eq))] = trim(o.substr(eq + 1));
  }
  if (!experiment.empty()) pairs["experiment"] = experiment;

  std::vector<std::string> unknown;
  for (const auto& [key, value] : pairs)
    if (!find_field(key)) unknown.push_back(key);
  if (!unknown.empty()) {
    std::string msg = "unknown key(s):";
    for (const auto& u : unknown) msg += " " + u;
    throw ConfigError(msg);
  }

  std::vector<std::string> missing;
  if (!pairs.count("experiment")) missing.push_back("experiment");
  if (pairs.count("experiment") && pairs["experiment"] == "single-run")
    for (const char* key : {"variant", "nx", "nt"})
      if (!pairs.count(key)) missing.push_back(key);
  if (!missing.empty()) {
    std::string msg = "missing required key(s):";
    for (const auto& m : missing) msg += " " + m;
    throw ConfigError(msg);
  }

  ExperimentConfig cfg;
  cfg.experiment = pairs["experiment"];
  apply_preset(cfg);
  for (const auto& f : fields()) {
    auto it = pairs.find(f.key);
    if (it != pairs.end()) f.set(cfg, it->second);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides,
                             const std::string& experiment) {
  std::string text;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return parse_config(text, overrides, experiment);
}

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(cfg));
  return out;
}

}  // namespace ipfasst
