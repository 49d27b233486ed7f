#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "cli.hpp"

namespace fracsys::cli {

using nlohmann::json;

namespace {

// Line of every object key, by JSON pointer. A small scanner over the raw text;
// the text has already been accepted by the JSON parser.
std::map<std::string, int> key_lines(const std::string& text) {
  struct Level {
    bool object;
    std::string ptr;
    int index = 0;
    std::string key;
  };
  std::map<std::string, int> out;
  std::vector<Level> stack;
  int line = 1;
  auto child_ptr = [&]() {
    if (stack.empty()) return std::string();
    auto& top = stack.back();
    return top.ptr + "/" + (top.object ? top.key : std::to_string(top.index));
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\n') {
      ++line;
    } else if (c == '"') {
      std::string s;
      for (++i; i < text.size() && text[i] != '"'; ++i) {
        if (text[i] == '\\') ++i;
        if (i < text.size()) s += text[i];
      }
      std::size_t j = i + 1;
      while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j])) && text[j] != '\n') ++j;
      if (!stack.empty() && stack.back().object && j < text.size() && text[j] == ':') {
        stack.back().key = s;
        out[stack.back().ptr + "/" + s] = line;
      }
    } else if (c == '{' || c == '[') {
      std::string p = child_ptr();
      stack.push_back({c == '{', p, 0, {}});
    } else if (c == '}' || c == ']') {
      if (!stack.empty()) stack.pop_back();
    } else if (c == ',') {
      if (!stack.empty() && !stack.back().object) ++stack.back().index;
    }
  }
  return out;
}

class Reader {
 public:
  Reader(const json& root, std::string origin, std::map<std::string, int> lines)
      : root_(root), origin_(std::move(origin)), lines_(std::move(lines)) {}

  [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const {
    std::ostringstream os;
    os << origin_;
    auto it = lines_.find(ptr);
    if (it != lines_.end()) os << ":" << it->second;
    os << ": " << (ptr.empty() ? std::string("/") : ptr) << ": " << msg;
    throw ConfigError(os.str());
  }

  const json& at(const std::string& ptr) const { return root_.at(json::json_pointer(ptr)); }
  bool has(const std::string& ptr) const { return root_.contains(json::json_pointer(ptr)); }

  void allow(const std::string& ptr, const std::set<std::string>& keys) const {
    if (!has(ptr) && !ptr.empty()) return;
    const json& obj = ptr.empty() ? root_ : at(ptr);
    if (!obj.is_object()) fail(ptr, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!keys.count(it.key())) fail(ptr + "/" + it.key(), "unknown key '" + it.key() + "'");
  }

  void num(const std::string& ptr, double& x) const {
    if (!has(ptr)) return;
    const json& j = at(ptr);
    if (!j.is_number()) fail(ptr, "expected a number");
    x = j.get<double>();
  }
  template <class I>
  void integer(const std::string& ptr, I& x) const {
    if (!has(ptr)) return;
    const json& j = at(ptr);
    if (!j.is_number_integer()) fail(ptr, "expected an integer");
    if constexpr (std::is_unsigned_v<I>) {
      if (j.get<long long>() < 0) fail(ptr, "expected a nonnegative integer");
    }
    x = j.get<I>();
  }
  void boolean(const std::string& ptr, bool& x) const {
    if (!has(ptr)) return;
    const json& j = at(ptr);
    if (!j.is_boolean()) fail(ptr, "expected true or false");
    x = j.get<bool>();
  }
  void str(const std::string& ptr, std::string& x) const {
    if (!has(ptr)) return;
    const json& j = at(ptr);
    if (!j.is_string()) fail(ptr, "expected a string");
    x = j.get<std::string>();
  }
  void point(const std::string& ptr, std::array<double, 2>& x, int dim) const {
    if (!has(ptr)) return;
    const json& j = at(ptr);
    if (!j.is_array() || static_cast<int>(j.size()) != dim) fail(ptr, "expected an array of " + std::to_string(dim) + " numbers");
    x = {0.0, 0.0};
    for (int a = 0; a < dim; ++a) {
      if (!j[a].is_number()) fail(ptr, "expected an array of numbers");
      x[a] = j[a].get<double>();
    }
  }
  std::size_t array_size(const std::string& ptr) const {
    if (!has(ptr)) return 0;
    if (!at(ptr).is_array()) fail(ptr, "expected an array");
    return at(ptr).size();
  }

 private:
  const json& root_;
  std::string origin_;
  std::map<std::string, int> lines_;
};

void read_solver(const Reader& r, const std::string& p, SolverOpts& o) {
  r.allow(p, {"max_iters", "step_size", "grad_tol", "recenter_every", "min_step", "pin_target", "pin_width",
              "path_nodes", "reparam_every", "max_restarts"});
  r.integer(p + "/max_iters", o.max_iters);
  r.num(p + "/step_size", o.step_size);
  r.num(p + "/grad_tol", o.grad_tol);
  r.integer(p + "/recenter_every", o.recenter_every);
  r.num(p + "/min_step", o.min_step);
  r.num(p + "/pin_target", o.pin_target);
  r.num(p + "/pin_width", o.pin_width);
  r.integer(p + "/path_nodes", o.path_nodes);
  r.integer(p + "/reparam_every", o.reparam_every);
  r.integer(p + "/max_restarts", o.max_restarts);
  try {
    o.validate();
  } catch (const ParameterError& e) {
    r.fail(p, e.what());
  }
}

std::vector<Bump> read_bumps(const Reader& r, const std::string& p, int dim) {
  std::vector<Bump> out;
  for (std::size_t i = 0; i < r.array_size(p); ++i) {
    std::string q = p + "/" + std::to_string(i);
    r.allow(q, {"center", "width", "amplitude"});
    Bump b;
    r.point(q + "/center", b.center, dim);
    r.num(q + "/width", b.width);
    r.num(q + "/amplitude", b.amplitude);
    if (!(b.width > 0.0)) r.fail(q + "/width", "must be positive");
    if (!(b.amplitude >= 0.0)) r.fail(q + "/amplitude", "must be nonnegative");
    out.push_back(b);
  }
  return out;
}

json point_json(const std::array<double, 2>& c, int dim) {
  json j = json::array();
  for (int a = 0; a < dim; ++a) j.push_back(c[a]);
  return j;
}

json solver_json(const SolverOpts& o) {
  return {{"max_iters", o.max_iters},   {"step_size", o.step_size},         {"grad_tol", o.grad_tol},
          {"recenter_every", o.recenter_every}, {"min_step", o.min_step}, {"pin_target", o.pin_target},
          {"pin_width", o.pin_width},   {"path_nodes", o.path_nodes},       {"reparam_every", o.reparam_every},
          {"max_restarts", o.max_restarts}};
}

json bumps_json(const std::vector<Bump>& bs, int dim) {
  json a = json::array();
  for (const auto& b : bs) a.push_back({{"center", point_json(b.center, dim)}, {"width", b.width}, {"amplitude", b.amplitude}});
  return a;
}

}  // namespace

void RunConfig::validate() const {
  grid.validate();
  params.validate(grid);
  quotient.validate();
  first_solution.validate();
  mountain_pass.validate();
  decompose.opts.validate();
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  Reader r(root, origin, key_lines(text));
  if (!root.is_object()) r.fail("", "expected an object at top level");
  r.allow("", {"schema_version", "grid", "params", "forcing", "solver", "constants", "ground_state", "decompose",
               "verify", "output", "seed", "threads", "kappa_cache"});

  RunConfig c;
  if (!r.has("/schema_version")) r.fail("", "missing schema_version");
  r.integer("/schema_version", c.schema_version);
  if (c.schema_version != kSchemaVersion)
    r.fail("/schema_version", "unsupported schema_version " + std::to_string(c.schema_version) + " (expected " +
                                  std::to_string(kSchemaVersion) + ")");

  r.allow("/grid", {"dim", "n", "L", "s", "zero_mode"});
  r.integer("/grid/dim", c.grid.dim);
  r.integer("/grid/n", c.grid.n);
  r.num("/grid/L", c.grid.L);
  r.num("/grid/s", c.grid.s);
  if (r.has("/grid/zero_mode")) {
    std::string z;
    r.str("/grid/zero_mode", z);
    try {
      c.grid.zero_mode = zero_mode_from_string(z);
    } catch (const ParameterError& e) {
      r.fail("/grid/zero_mode", e.what());
    }
  }
  try {
    c.grid.validate();
  } catch (const ParameterError& e) {
    r.fail("/grid", e.what());
  }
  const int dim = c.grid.dim;

  r.allow("/params", {"alpha", "beta", "derive_beta"});
  bool derive = false;
  r.boolean("/params/derive_beta", derive);
  r.num("/params/alpha", c.params.alpha);
  if (derive) {
    if (r.has("/params/beta")) r.fail("/params/beta", "beta is derived when derive_beta is set");
    c.params.beta = c.grid.two_star() - c.params.alpha;
  } else {
    r.num("/params/beta", c.params.beta);
  }
  try {
    c.params.validate(c.grid);
  } catch (const ParameterError& e) {
    r.fail("/params", e.what());
  }

  r.allow("/forcing", {"units", "amplitude", "f", "g"});
  r.str("/forcing/units", c.forcing.units);
  if (c.forcing.units != "threshold_fraction" && c.forcing.units != "absolute")
    r.fail("/forcing/units", "expected \"threshold_fraction\" or \"absolute\"");
  r.num("/forcing/amplitude", c.forcing.amplitude);
  if (!(c.forcing.amplitude >= 0.0)) r.fail("/forcing/amplitude", "must be nonnegative");
  if (r.has("/forcing")) {
    c.forcing.f = read_bumps(r, "/forcing/f", dim);
    c.forcing.g = read_bumps(r, "/forcing/g", dim);
  } else {
    c.forcing.f = {Bump{}};
    c.forcing.g = {Bump{}};
  }
  if (c.forcing.f.empty() != c.forcing.g.empty())
    r.fail("/forcing", "f and g must both be empty or both nonempty (equal kernels)");

  r.allow("/solver", {"quotient", "first_solution", "mountain_pass"});
  read_solver(r, "/solver/quotient", c.quotient);
  read_solver(r, "/solver/first_solution", c.first_solution);
  read_solver(r, "/solver/mountain_pass", c.mountain_pass);

  r.allow("/constants", {"mu", "h_mu", "h_tau_min", "h_tau_max", "h_points"});
  if (r.has("/constants/mu")) {
    c.constants.mu.clear();
    for (std::size_t i = 0; i < r.array_size("/constants/mu"); ++i) {
      double m = 0.0;
      r.num("/constants/mu/" + std::to_string(i), m);
      if (!(m > 0.0)) r.fail("/constants/mu", "entries must be positive");
      c.constants.mu.push_back(m);
    }
  }
  r.num("/constants/h_mu", c.constants.h_mu);
  r.num("/constants/h_tau_min", c.constants.h_tau_min);
  r.num("/constants/h_tau_max", c.constants.h_tau_max);
  r.integer("/constants/h_points", c.constants.h_points);
  if (!(c.constants.h_mu > 0.0)) r.fail("/constants/h_mu", "must be positive");
  if (!(c.constants.h_tau_min > 0.0 && c.constants.h_tau_max > c.constants.h_tau_min))
    r.fail("/constants", "need 0 < h_tau_min < h_tau_max");
  if (c.constants.h_points < 2) r.fail("/constants/h_points", "must be at least 2");

  r.allow("/ground_state", {"scale", "t_prime", "center", "restarts"});
  r.num("/ground_state/scale", c.ground_state.scale);
  r.num("/ground_state/t_prime", c.ground_state.t_prime);
  r.point("/ground_state/center", c.ground_state.center, dim);
  r.integer("/ground_state/restarts", c.ground_state.restarts);
  if (!(c.ground_state.scale > 0.0)) r.fail("/ground_state/scale", "must be positive");
  if (!(c.ground_state.t_prime > 0.0)) r.fail("/ground_state/t_prime", "must be positive");
  if (c.ground_state.restarts < 1) r.fail("/ground_state/restarts", "must be at least 1");

  r.allow("/decompose", {"input", "input_stem", "include_limit", "bubbles", "max_bubbles", "residual_tol",
                         "defect_tol", "fit_threshold", "window_scales"});
  auto& d = c.decompose;
  r.str("/decompose/input", d.input);
  if (d.input != "synthetic" && d.input != "fields") r.fail("/decompose/input", "expected \"synthetic\" or \"fields\"");
  r.str("/decompose/input_stem", d.input_stem);
  if (d.input == "fields" && d.input_stem.empty()) r.fail("/decompose", "input \"fields\" needs input_stem");
  r.boolean("/decompose/include_limit", d.include_limit);
  for (std::size_t i = 0; i < r.array_size("/decompose/bubbles"); ++i) {
    std::string q = "/decompose/bubbles/" + std::to_string(i);
    r.allow(q, {"center", "scale", "amplitude"});
    SyntheticBubble b;
    r.point(q + "/center", b.center, dim);
    r.num(q + "/scale", b.scale);
    r.num(q + "/amplitude", b.amplitude);
    if (!(b.scale > 0.0)) r.fail(q + "/scale", "must be positive");
    if (b.amplitude < 0.0) r.fail(q + "/amplitude", "must be nonnegative (0 selects the ground-state amplitude)");
    d.bubbles.push_back(b);
  }
  r.integer("/decompose/max_bubbles", d.opts.max_bubbles);
  r.num("/decompose/residual_tol", d.opts.residual_tol);
  r.num("/decompose/defect_tol", d.opts.defect_tol);
  r.num("/decompose/fit_threshold", d.opts.extract.fit_threshold);
  r.num("/decompose/window_scales", d.opts.extract.window_scales);
  try {
    d.opts.validate();
  } catch (const ParameterError& e) {
    r.fail("/decompose", e.what());
  }

  r.allow("/verify", {"random_starts", "corpus_random", "corpus_bubbles", "test_pairs", "quadruples"});
  r.integer("/verify/random_starts", c.verify.random_starts);
  r.integer("/verify/corpus_random", c.verify.corpus_random);
  r.integer("/verify/corpus_bubbles", c.verify.corpus_bubbles);
  r.integer("/verify/test_pairs", c.verify.test_pairs);
  r.integer("/verify/quadruples", c.verify.quadruples);
  if (c.verify.random_starts < 1 || c.verify.corpus_random < 0 || c.verify.corpus_bubbles < 0 ||
      c.verify.corpus_random + c.verify.corpus_bubbles < 1 || c.verify.test_pairs < 1 || c.verify.quadruples < 1)
    r.fail("/verify", "counts must be positive");

  r.allow("/output", {"dir"});
  r.str("/output/dir", c.out_dir);
  r.integer("/seed", c.seed);
  r.integer("/threads", c.threads);
  if (c.threads < 0) r.fail("/threads", "must be nonnegative (0 = library default)");
  r.str("/kappa_cache", c.kappa_cache);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(path.string() + ": cannot open config");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path.string());
}

json to_json(const RunConfig& c) {
  const int dim = c.grid.dim;
  json j;
  j["schema_version"] = c.schema_version;
  j["grid"] = {{"dim", dim}, {"n", c.grid.n}, {"L", c.grid.L}, {"s", c.grid.s}, {"zero_mode", to_string(c.grid.zero_mode)}};
  j["params"] = {{"alpha", c.params.alpha}, {"beta", c.params.beta}};
  j["forcing"] = {{"units", c.forcing.units},
                  {"amplitude", c.forcing.amplitude},
                  {"f", bumps_json(c.forcing.f, dim)},
                  {"g", bumps_json(c.forcing.g, dim)}};
  j["solver"] = {{"quotient", solver_json(c.quotient)},
                 {"first_solution", solver_json(c.first_solution)},
                 {"mountain_pass", solver_json(c.mountain_pass)}};
  j["constants"] = {{"mu", c.constants.mu},
                    {"h_mu", c.constants.h_mu},
                    {"h_tau_min", c.constants.h_tau_min},
                    {"h_tau_max", c.constants.h_tau_max},
                    {"h_points", c.constants.h_points}};
  j["ground_state"] = {{"scale", c.ground_state.scale},
                       {"t_prime", c.ground_state.t_prime},
                       {"center", point_json(c.ground_state.center, dim)},
                       {"restarts", c.ground_state.restarts}};
  json bubbles = json::array();
  for (const auto& b : c.decompose.bubbles)
    bubbles.push_back({{"center", point_json(b.center, dim)}, {"scale", b.scale}, {"amplitude", b.amplitude}});
  const auto& o = c.decompose.opts;
  j["decompose"] = {{"input", c.decompose.input},
                    {"input_stem", c.decompose.input_stem},
                    {"include_limit", c.decompose.include_limit},
                    {"bubbles", bubbles},
                    {"max_bubbles", o.max_bubbles},
                    {"residual_tol", o.residual_tol},
                    {"defect_tol", o.defect_tol},
                    {"fit_threshold", o.extract.fit_threshold},
                    {"window_scales", o.extract.window_scales}};
  j["verify"] = {{"random_starts", c.verify.random_starts},
                 {"corpus_random", c.verify.corpus_random},
                 {"corpus_bubbles", c.verify.corpus_bubbles},
                 {"test_pairs", c.verify.test_pairs},
                 {"quadruples", c.verify.quadruples}};
  j["seed"] = c.seed;
  j["kappa_cache"] = c.kappa_cache;
  return j;
}

namespace {

Field bump_sum(const GridSpec& g, const std::vector<Bump>& bs) {
  return sample(g, [&](double x, double y) {
    double acc = 0.0;
    for (const auto& b : bs) {
      double dx = x - b.center[0], dy = g.dim == 2 ? y - b.center[1] : 0.0;
      acc += b.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * b.width * b.width));
    }
    return acc;
  });
}

}  // namespace

ForcingPair build_forcing(const RunConfig& cfg, double sab_estimate) {
  const auto& g = cfg.grid;
  if (cfg.forcing.f.empty()) return ForcingPair::zero(g);
  Field f = bump_sum(g, cfg.forcing.f), h = bump_sum(g, cfg.forcing.g);
  if (cfg.forcing.units == "threshold_fraction") {
    const double thr = admissibility_threshold(g, cfg.params, sab_estimate);
    for (Field* x : {&f, &h}) {
      double dn = dual_norm(*x);
      if (dn > 0.0) *x *= cfg.forcing.amplitude * thr / dn;
    }
  }
  ForcingPair out(std::move(f), std::move(h));
  out.validate();
  return out;
}

}  // namespace fracsys::cli
