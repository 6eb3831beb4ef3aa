#include "tdhfb/config.hpp"

#include "tdhfb/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace tdhfb {

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::identities: return "identities";
    case Scenario::free: return "free";
    case Scenario::hartree: return "hartree";
    case Scenario::full: return "full";
    case Scenario::flowcheck: return "flowcheck";
    case Scenario::fock: return "fock";
  }
  return "unknown";
}

Scenario scenario_from_string(const std::string& name) {
  for (Scenario s : {Scenario::identities, Scenario::free, Scenario::hartree, Scenario::full,
                     Scenario::flowcheck, Scenario::fock})
    if (name == to_string(s)) return s;
  fail(ErrorCode::config, "unknown scenario '" + name +
                              "' (expected identities, free, hartree, full, flowcheck or fock)");
}

RunConfig default_config() { return RunConfig{}; }

namespace {

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void error(const YAML::Node& n, const std::string& field, const std::string& msg) const {
    std::ostringstream os;
    os << origin_;
    if (n.IsDefined() && n.Mark().line >= 0) os << ':' << n.Mark().line + 1 << ':' << n.Mark().column + 1;
    os << ": " << field << ": " << msg;
    fail(ErrorCode::config, os.str());
  }

  using Handler = std::function<void(const YAML::Node&, const std::string&)>;

  void map(const YAML::Node& node, const std::string& path, const std::map<std::string, Handler>& handlers) const {
    if (node.IsNull()) return;
    if (!node.IsMap()) error(node, path.empty() ? "<root>" : path, "expected a mapping");
    std::map<std::string, YAML::Mark> seen;
    for (auto it = node.begin(); it != node.end(); ++it) {
      const std::string key = it->first.as<std::string>();
      const std::string field = path.empty() ? key : path + "." + key;
      if (auto s = seen.find(key); s != seen.end()) {
        std::ostringstream os;
        os << "duplicate key (first at line " << s->second.line + 1 << ", column " << s->second.column + 1
           << "; again at line " << it->first.Mark().line + 1 << ", column " << it->first.Mark().column + 1 << ")";
        error(it->first, field, os.str());
      }
      seen.emplace(key, it->first.Mark());
      const auto h = handlers.find(key);
      if (h == handlers.end()) error(it->first, field, "unknown key");
      h->second(it->second, field);
    }
  }

  double number(const YAML::Node& n, const std::string& field) const {
    if (!n.IsScalar()) error(n, field, "expected a number");
    try {
      return n.as<double>();
    } catch (const YAML::Exception&) {
      error(n, field, "expected a number, got '" + n.Scalar() + "'");
    }
  }

  long long integer(const YAML::Node& n, const std::string& field) const {
    if (!n.IsScalar()) error(n, field, "expected an integer");
    try {
      return n.as<long long>();
    } catch (const YAML::Exception&) {
      error(n, field, "expected an integer, got '" + n.Scalar() + "'");
    }
  }

  std::uint64_t unsigned_integer(const YAML::Node& n, const std::string& field) const {
    if (!n.IsScalar()) error(n, field, "expected an unsigned integer");
    try {
      return n.as<std::uint64_t>();
    } catch (const YAML::Exception&) {
      error(n, field, "expected an unsigned integer, got '" + n.Scalar() + "'");
    }
  }

  bool boolean(const YAML::Node& n, const std::string& field) const {
    if (!n.IsScalar()) error(n, field, "expected true or false");
    try {
      return n.as<bool>();
    } catch (const YAML::Exception&) {
      error(n, field, "expected true or false, got '" + n.Scalar() + "'");
    }
  }

  std::string string(const YAML::Node& n, const std::string& field) const {
    if (!n.IsScalar()) error(n, field, "expected a string");
    return n.Scalar();
  }

  // A number or a [re, im] pair.
  cplx complex(const YAML::Node& n, const std::string& field) const {
    if (n.IsScalar()) return {number(n, field), 0.0};
    if (n.IsSequence() && n.size() == 2) return {number(n[0], field), number(n[1], field)};
    error(n, field, "expected a number or a [re, im] pair");
  }

  std::vector<double> numbers(const YAML::Node& n, const std::string& field) const {
    if (!n.IsSequence()) error(n, field, "expected a list of numbers");
    std::vector<double> out;
    for (const auto& e : n) out.push_back(number(e, field));
    return out;
  }

  std::vector<cplx> complexes(const YAML::Node& n, const std::string& field) const {
    if (!n.IsSequence()) error(n, field, "expected a list");
    std::vector<cplx> out;
    for (const auto& e : n) {
      if (e.IsSequence() && e.size() > 0 && e[0].IsSequence()) {
        for (const auto& f : e) out.push_back(complex(f, field));
      } else {
        out.push_back(complex(e, field));
      }
    }
    return out;
  }

  void check(bool ok, const YAML::Node& n, const std::string& field, const std::string& msg) const {
    if (!ok) error(n, field, msg);
  }

 private:
  std::string origin_;
};

RunConfig parse_node(const YAML::Node& root, const std::string& origin) {
  RunConfig c = default_config();
  const Reader r(origin);
  using H = Reader::Handler;
  auto num = [&r](double& dst, std::function<bool(double)> ok = {}, std::string msg = {}) -> H {
    return [&r, &dst, ok, msg](const YAML::Node& n, const std::string& f) {
      dst = r.number(n, f);
      if (ok) r.check(ok(dst), n, f, msg);
    };
  };
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  auto integer = [&r](int& dst, int min, const std::string& msg) -> H {
    return [&r, &dst, min, msg](const YAML::Node& n, const std::string& f) {
      const long long v = r.integer(n, f);
      r.check(v >= min && v <= 1 << 30, n, f, msg);
      dst = static_cast<int>(v);
    };
  };
  auto positive_list = [&r](std::vector<double>& dst) -> H {
    return [&r, &dst](const YAML::Node& n, const std::string& f) {
      dst = r.numbers(n, f);
      for (double v : dst) r.check(v > 0.0 && std::isfinite(v), n, f, "entries must be positive");
    };
  };

  r.map(root, "",
        {{"scenario",
          [&](const YAML::Node& n, const std::string& f) {
            try {
              c.scenario = scenario_from_string(r.string(n, f));
            } catch (const Error& e) {
              r.error(n, f, e.what());
            }
          }},
         {"seed", [&](const YAML::Node& n, const std::string& f) { c.seed = r.unsigned_integer(n, f); }},
         {"out_dir", [&](const YAML::Node& n, const std::string& f) { c.out_dir = r.string(n, f); }},
         {"grid",
          [&](const YAML::Node& n, const std::string& p) {
            r.map(n, p,
                  {{"d", integer(c.grid.d, 1, "dimension must be 1 or 2")},
                   {"M", integer(c.grid.M, 2, "points per axis must be a power of two >= 2")},
                   {"L", num(c.grid.L, positive, "box length must be positive")}});
          }},
         {"physics",
          [&](const YAML::Node& n, const std::string& p) {
            r.map(n, p,
                  {{"N", num(c.physics.N, positive, "N must be positive")},
                   {"beta", num(c.physics.beta, [](double b) { return b >= 0.0 && b < 2.0 / 3.0; },
                                "beta must lie in [0, 2/3)")},
                   {"N_list", positive_list(c.N_list)}});
          }},
         {"potential",
          [&](const YAML::Node& n, const std::string& p) {
            r.map(n, p,
                  {{"sigma", num(c.potential.sigma, positive, "sigma must be positive")},
                   {"strength", num(c.potential.strength, [](double v) { return v >= 0.0 && std::isfinite(v); },
                                    "strength must be non-negative (repulsive interactions only)")}});
          }},
         {"init",
          [&](const YAML::Node& n, const std::string& p) {
            r.map(n, p,
                  {{"phi",
                    [&](const YAML::Node& m, const std::string& q) {
                      r.map(m, q,
                            {{"amp", num(c.init.phi.amp)},
                             {"center", num(c.init.phi.center)},
                             {"width", num(c.init.phi.width, positive, "width must be positive")},
                             {"momentum", num(c.init.phi.momentum)}});
                    }},
                   {"k", [&](const YAML::Node& m, const std::string& q) {
                      r.map(m, q,
                            {{"amp", num(c.init.k.amp)},
                             {"width_rel", num(c.init.k.width_rel, positive, "width must be positive")},
                             {"width_com", num(c.init.k.width_com, positive, "width must be positive")}});
                    }}});
          }},
         {"time",
          [&](const YAML::Node& n, const std::string& p) {
            r.map(n, p,
                  {{"T", num(c.T, positive, "T must be positive")},
                   {"dt", num(c.time.dt, positive, "dt must be positive")},
                   {"rtol", num(c.time.rtol, positive, "rtol must be positive")},
                   {"max_dt", num(c.time.max_dt, positive, "max_dt must be positive")},
                   {"min_dt", num(c.time.min_dt, positive, "min_dt must be positive")},
                   {"adaptive", [&](const YAML::Node& m, const std::string& f) { c.time.adaptive = r.boolean(m, f); }},
                   {"samples", integer(c.samples, 1, "samples must be >= 1")},
                   {"scheme", [&](const YAML::Node& m, const std::string& f) {
                      const std::string s = r.string(m, f);
                      if (s == "lawson_rk4")
                        c.time.scheme = Scheme::lawson_rk4;
                      else if (s == "rk4")
                        c.time.scheme = Scheme::rk4;
                      else
                        r.error(m, f, "expected lawson_rk4 or rk4");
                    }}});
          }},
         {"rhs_variant",
          [&](const YAML::Node& n, const std::string& f) {
            const std::string s = r.string(n, f);
            if (s == "hermitian")
              c.rhs_variant = RhsVariant::hermitian;
            else if (s == "literal")
              c.rhs_variant = RhsVariant::literal;
            else
              r.error(n, f, "expected hermitian or literal");
          }},
         {"monitors",
          [&](const YAML::Node& n, const std::string& p) {
            r.map(n, p,
                  {{"stride", integer(c.monitors.stride, 1, "stride must be >= 1")},
                   {"lebesgue_exponent", num(c.monitors.lebesgue_exponent, [](double q) { return q >= 1.0; },
                                             "Lebesgue exponent must be >= 1 (or .inf)")},
                   {"sobolev_order", num(c.monitors.sobolev_order)},
                   {"drift_threshold", num(c.monitors.drift_threshold, positive, "threshold must be positive")},
                   {"energy", [&](const YAML::Node& m, const std::string& f) { c.monitors.energy = r.boolean(m, f); }},
                   {"fit_window", [&](const YAML::Node& m, const std::string& f) {
                      const auto w = r.numbers(m, f);
                      r.check(w.size() == 2 && w[0] > 0.0 && w[1] > w[0], m, f,
                              "expected [t_min, t_max] with 0 < t_min < t_max");
                      c.monitors.fit_t_min = w[0];
                      c.monitors.fit_t_max = w[1];
                    }}});
          }},
         {"fock",
          [&](const YAML::Node& n, const std::string& p) {
            r.map(n, p,
                  {{"M_sites", integer(c.fock.M_sites, 2, "M_sites must be a power of two >= 2")},
                   {"n_max", integer(c.fock.n_max, 0, "n_max must be >= 0")},
                   {"N_list", positive_list(c.fock.N_list)},
                   {"L", num(c.fock.L, positive, "L must be positive")},
                   {"beta", num(c.fock.beta, [](double b) { return b >= 0.0 && b < 2.0 / 3.0; },
                                "beta must lie in [0, 2/3)")},
                   {"sigma", num(c.fock.sigma, positive, "sigma must be positive")},
                   {"strength", num(c.fock.strength, [](double v) { return v >= 0.0; }, "strength must be non-negative")},
                   {"T", num(c.fock.T, positive, "T must be positive")},
                   {"phi", [&](const YAML::Node& m, const std::string& f) { c.fock.phi = r.complexes(m, f); }},
                   {"k_hat", [&](const YAML::Node& m, const std::string& f) { c.fock.k_hat = r.complexes(m, f); }}});
          }},
         {"identities", [&](const YAML::Node& n, const std::string& p) {
            r.map(n, p,
                  {{"count", integer(c.identities.count, 1, "count must be >= 1")},
                   {"M", integer(c.identities.M, 2, "M must be a power of two >= 2")},
                   {"max_norm", num(c.identities.max_norm, positive, "max_norm must be positive")}});
          }}});
  c.physics.dim = c.grid.d;
  validate(c);
  return c;
}

}  // namespace

void validate(const RunConfig& c) {
  auto wrap = [](const std::string& field, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const Error& e) {
      fail(ErrorCode::config, field + ": " + e.what());
    }
  };
  wrap("grid", [&] { Grid::make(c.grid.d, c.grid.M, c.grid.L); });
  wrap("physics", [&] {
    PhysParams p = c.physics;
    p.dim = c.grid.d;
    p.validate();
    for (double n : c.N_list) require(n > 0.0, ErrorCode::argument, "N_list entries must be positive");
  });
  wrap("time", [&] { c.time.validate(); });
  require(c.samples >= 1, ErrorCode::config, "time.samples: must be >= 1");
  require(c.monitors.stride >= 1, ErrorCode::config, "monitors.stride: must be >= 1");
  require(c.monitors.lebesgue_exponent >= 1.0, ErrorCode::config, "monitors.lebesgue_exponent: must be >= 1");
  const double limit = c.grid.L / 8.0;
  require(c.init.phi.width <= limit, ErrorCode::config, "init.phi.width: exceeds L/8");
  if (c.init.k.amp != 0.0) {
    require(c.init.k.width_rel <= limit, ErrorCode::config, "init.k.width_rel: exceeds L/8");
    require(c.init.k.width_com <= limit, ErrorCode::config, "init.k.width_com: exceeds L/8");
  }
  require(c.init.phi.amp != 0.0, ErrorCode::config, "init.phi.amp: must be non-zero");
  const auto m = static_cast<std::size_t>(c.fock.M_sites);
  wrap("fock", [&] { Grid::make(1, c.fock.M_sites, c.fock.L, LaplacianKind::lattice); });
  require(c.fock.phi.size() == m, ErrorCode::config, "fock.phi: needs M_sites entries");
  require(c.fock.k_hat.size() == m * m, ErrorCode::config, "fock.k_hat: needs M_sites^2 entries");
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      require(std::abs(c.fock.k_hat[i * m + j] - c.fock.k_hat[j * m + i]) <= 1e-12, ErrorCode::config,
              "fock.k_hat: must be symmetric");
  require(!c.fock.N_list.empty(), ErrorCode::config, "fock.N_list: must not be empty");
  wrap("identities", [&] { Grid::make(1, c.identities.M, 1.0); });
}

RunConfig parse_config_string(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    std::ostringstream os;
    os << origin << ':' << e.mark.line + 1 << ':' << e.mark.column + 1 << ": malformed YAML: " << e.msg;
    fail(ErrorCode::config, os.str());
  }
  return parse_node(root, origin);
}

RunConfig parse_config_file(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    fail(ErrorCode::config, path + ": cannot open configuration file");
  } catch (const YAML::Exception& e) {
    std::ostringstream os;
    os << path << ':' << e.mark.line + 1 << ':' << e.mark.column + 1 << ": malformed YAML: " << e.msg;
    fail(ErrorCode::config, os.str());
  }
  return parse_node(root, path);
}

std::string to_yaml(const RunConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  auto cx = [&e](cplx v) { e << YAML::Flow << YAML::BeginSeq << v.real() << v.imag() << YAML::EndSeq; };
  e << YAML::BeginMap;
  e << YAML::Key << "scenario" << YAML::Value << to_string(c.scenario);
  e << YAML::Key << "seed" << YAML::Value << c.seed;
  e << YAML::Key << "out_dir" << YAML::Value << c.out_dir;
  e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap << YAML::Key << "d" << YAML::Value << c.grid.d
    << YAML::Key << "M" << YAML::Value << c.grid.M << YAML::Key << "L" << YAML::Value << c.grid.L << YAML::EndMap;
  e << YAML::Key << "physics" << YAML::Value << YAML::BeginMap << YAML::Key << "N" << YAML::Value << c.physics.N
    << YAML::Key << "beta" << YAML::Value << c.physics.beta << YAML::Key << "N_list" << YAML::Value << YAML::Flow
    << c.N_list << YAML::EndMap;
  e << YAML::Key << "potential" << YAML::Value << YAML::BeginMap << YAML::Key << "sigma" << YAML::Value
    << c.potential.sigma << YAML::Key << "strength" << YAML::Value << c.potential.strength << YAML::EndMap;
  e << YAML::Key << "init" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "phi" << YAML::Value << YAML::BeginMap << YAML::Key << "amp" << YAML::Value << c.init.phi.amp
    << YAML::Key << "center" << YAML::Value << c.init.phi.center << YAML::Key << "width" << YAML::Value
    << c.init.phi.width << YAML::Key << "momentum" << YAML::Value << c.init.phi.momentum << YAML::EndMap;
  e << YAML::Key << "k" << YAML::Value << YAML::BeginMap << YAML::Key << "amp" << YAML::Value << c.init.k.amp
    << YAML::Key << "width_rel" << YAML::Value << c.init.k.width_rel << YAML::Key << "width_com" << YAML::Value
    << c.init.k.width_com << YAML::EndMap;
  e << YAML::EndMap;
  e << YAML::Key << "time" << YAML::Value << YAML::BeginMap << YAML::Key << "T" << YAML::Value << c.T << YAML::Key
    << "dt" << YAML::Value << c.time.dt << YAML::Key << "rtol" << YAML::Value << c.time.rtol << YAML::Key << "max_dt"
    << YAML::Value << c.time.max_dt << YAML::Key << "min_dt" << YAML::Value << c.time.min_dt << YAML::Key
    << "adaptive" << YAML::Value << c.time.adaptive << YAML::Key << "scheme" << YAML::Value
    << to_string(c.time.scheme) << YAML::Key << "samples" << YAML::Value << c.samples << YAML::EndMap;
  e << YAML::Key << "rhs_variant" << YAML::Value << to_string(c.rhs_variant);
  e << YAML::Key << "monitors" << YAML::Value << YAML::BeginMap << YAML::Key << "stride" << YAML::Value
    << c.monitors.stride << YAML::Key << "lebesgue_exponent" << YAML::Value << c.monitors.lebesgue_exponent
    << YAML::Key << "sobolev_order" << YAML::Value << c.monitors.order(c.physics) << YAML::Key << "drift_threshold"
    << YAML::Value << c.monitors.drift_threshold << YAML::Key << "energy" << YAML::Value << c.monitors.energy
    << YAML::Key << "fit_window" << YAML::Value << YAML::Flow << YAML::BeginSeq << c.monitors.fit_t_min
    << (std::isinf(c.monitors.fit_t_max) ? c.T : c.monitors.fit_t_max) << YAML::EndSeq << YAML::EndMap;
  e << YAML::Key << "fock" << YAML::Value << YAML::BeginMap << YAML::Key << "M_sites" << YAML::Value
    << c.fock.M_sites << YAML::Key << "n_max" << YAML::Value << c.fock.n_max << YAML::Key << "N_list" << YAML::Value
    << YAML::Flow << c.fock.N_list << YAML::Key << "L" << YAML::Value << c.fock.L << YAML::Key << "beta"
    << YAML::Value << c.fock.beta << YAML::Key << "sigma" << YAML::Value << c.fock.sigma << YAML::Key << "strength"
    << YAML::Value << c.fock.strength << YAML::Key << "T" << YAML::Value << c.fock.T;
  e << YAML::Key << "phi" << YAML::Value << YAML::BeginSeq;
  for (cplx v : c.fock.phi) cx(v);
  e << YAML::EndSeq << YAML::Key << "k_hat" << YAML::Value << YAML::BeginSeq;
  for (cplx v : c.fock.k_hat) cx(v);
  e << YAML::EndSeq << YAML::EndMap;
  e << YAML::Key << "identities" << YAML::Value << YAML::BeginMap << YAML::Key << "count" << YAML::Value
    << c.identities.count << YAML::Key << "M" << YAML::Value << c.identities.M << YAML::Key << "max_norm"
    << YAML::Value << c.identities.max_norm << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace tdhfb
