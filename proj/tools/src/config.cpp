#include <cctype>
#include <fstream>

#include "bellqmc/errors.hpp"
#include "bellqmc_tools/runner.hpp"

namespace bellqmc::tools {

using nlohmann::json;

namespace {

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path + "." + key + ": missing");
  return *it;
}

template <class T>
T as(const json& v, const std::string& path) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + ": wrong type");
  }
}

template <class T>
T get(const json& obj, const std::string& key, const std::string& path) {
  return as<T>(field(obj, key, path), path + "." + key);
}

template <class T>
T get_or(const json& obj, const std::string& key, const std::string& path, T fallback) {
  return obj.contains(key) ? get<T>(obj, key, path) : fallback;
}

std::int64_t positive(std::int64_t v, const std::string& path) {
  if (v <= 0) throw ConfigError(path + ": must be positive");
  return v;
}

}  // namespace

double parse_beta(const json& value, int L) {
  if (value.is_number()) {
    const double b = value.get<double>();
    if (b < 0) throw ConfigError("beta: must be >= 0");
    return b;
  }
  if (!value.is_string()) throw ConfigError("beta: expected a number or an expression like \"4L\"");
  std::string text;
  for (char c : value.get<std::string>())
    if (!std::isspace(static_cast<unsigned char>(c)) && c != '*') text.push_back(c);
  if (text.empty() || text.back() != 'L') throw ConfigError("beta: expected a number or an expression like \"4L\"");
  text.pop_back();
  double k = 1.0;
  if (!text.empty()) {
    std::size_t used = 0;
    try {
      k = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != text.size()) throw ConfigError("beta: cannot read factor '" + text + "'");
  }
  if (k < 0) throw ConfigError("beta: must be >= 0");
  return k * L;
}

RunConfig parse_config(const json& doc) {
  const std::string root = "config";
  RunConfig cfg;
  const auto kind = model_kind_from_string(get<std::string>(doc, "model", root));
  const int L = get<int>(doc, "L", root);
  const double h = get<double>(doc, "h", root);
  if (h < 0) throw ConfigError("config.h: must be >= 0");
  try {
    if (kind == ModelKind::tfim_1d) {
      const auto b = get<std::string>(doc, "boundary", root);
      if (b != "open" && b != "periodic") throw ConfigError("config.boundary: expected open or periodic");
      cfg.model = make_tfim(L, b == "open" ? Boundary::open : Boundary::periodic, h);
    } else {
      if (doc.contains("boundary") && doc["boundary"] != "periodic")
        throw ConfigError("config.boundary: the gauge theory lives on the torus");
      cfg.model = make_lgt(L, h);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("config.L: ") + e.what());
  }
  if (doc.contains("complex_field") || doc.contains("hy"))
    throw ConfigError("config: complex (Y-type) couplings are not supported; the sampler needs a real Hamiltonian");
  cfg.model.split_plaquettes = get_or<bool>(doc, "split_plaquettes", root, true);
  cfg.beta = parse_beta(field(doc, "beta", root), L);
  cfg.n_equilibration_sweeps = positive(get<std::int64_t>(doc, "n_equilibration_sweeps", root), "config.n_equilibration_sweeps");
  cfg.n_measurement_sweeps = positive(get<std::int64_t>(doc, "n_measurement_sweeps", root), "config.n_measurement_sweeps");
  cfg.block_size = static_cast<std::size_t>(positive(get_or<std::int64_t>(doc, "block_size", root, default_block_size), "config.block_size"));
  cfg.master_seed = get<std::uint64_t>(doc, "master_seed", root);
  cfg.n_chains = static_cast<int>(positive(get<int>(doc, "n_chains", root), "config.n_chains"));
  cfg.output_dir = get<std::string>(doc, "output_dir", root);
  cfg.write_checkpoints = get_or<bool>(doc, "write_checkpoints", root, false);

  if (doc.contains("observables")) {
    const auto& list = doc["observables"];
    if (!list.is_array()) throw ConfigError("config.observables: expected an array");
    for (const auto& o : list) cfg.observables.push_back({o});
  }
  if (doc.contains("topo_ee")) {
    const auto& list = doc["topo_ee"];
    if (!list.is_array()) throw ConfigError("config.topo_ee: expected an array");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string p = "config.topo_ee[" + std::to_string(k) + "]";
      cfg.topo.push_back({get<std::string>(list[k], "label", p), get<std::string>(list[k], "ab", p),
                          get<std::string>(list[k], "bc", p), get<std::string>(list[k], "abc", p),
                          get<std::string>(list[k], "b", p)});
    }
  }
  if (doc.contains("ti")) {
    const auto& t = doc["ti"];
    TiSpec ti;
    ti.region = field(t, "region", "config.ti");
    ti.method = ext_method_from_string(get_or<std::string>(t, "method", "config.ti", "analytic_B"));
    ti.nodes = static_cast<int>(positive(get_or<int>(t, "nodes", "config.ti", 16), "config.ti.nodes"));
    cfg.ti = ti;
  }
  // Validate observables against the lattice now rather than mid-run.
  build_observables(cfg);
  if (cfg.ti) resolve_region(cfg.model.lattice, cfg.ti->region, "config.ti.region");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

SquareRegion resolve_region(const Lattice& lat, const json& desc, const std::string& path) {
  if (!desc.is_object()) throw ConfigError(path + ": expected an object");
  const std::string label = get_or<std::string>(desc, "label", path, "A");
  SquareRegion out;
  try {
    if (desc.contains("sites")) {
      out.interior = make_region(lat, get<std::vector<int>>(desc, "sites", path), label);
    } else if (desc.contains("mid_chain")) {
      out.interior = mid_chain_region(lat, get<int>(desc, "mid_chain", path));
    } else if (desc.contains("block")) {
      const auto b = get<std::vector<int>>(desc, "block", path);
      if (b.size() != 2) throw ConfigError(path + ".block: expected [first, length]");
      out.interior = chain_block(lat, b[0], b[1], label);
    } else if (desc.contains("square")) {
      const int m = get<int>(desc, "square", path);
      if (m * 2 == lat.linear_size)
        out = square_region(lat, lat.linear_size);
      else
        out = star_block_region(lat, 0, 0, m);
    } else if (desc.contains("stars")) {
      const auto s = get<std::vector<int>>(desc, "stars", path);
      if (s.size() != 3) throw ConfigError(path + ".stars: expected [x0, y0, m]");
      out = star_block_region(lat, s[0], s[1], s[2]);
    } else {
      throw ConfigError(path + ": expected one of sites, mid_chain, block, square, stars");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  out.interior.label = label;
  return out;
}

std::vector<Observable> build_observables(const RunConfig& cfg) {
  const auto& lat = cfg.model.lattice;
  std::vector<Observable> out;
  for (std::size_t k = 0; k < cfg.observables.size(); ++k) {
    const auto& o = cfg.observables[k].raw;
    const std::string p = "config.observables[" + std::to_string(k) + "]";
    const auto type = get<std::string>(o, "type", p);
    const bool translate = get_or<bool>(o, "translate", p, false);
    try {
      if (type == "energy") {
        out.push_back(energy_observable());
      } else if (type == "pauli_sq") {
        const auto label = get<std::string>(o, "label", p);
        PauliString s;
        if (o.contains("pauli")) {
          s = PauliString::parse(get<std::string>(o, "pauli", p));
        } else {
          std::vector<std::pair<int, char>> terms;
          for (const auto& t : field(o, "terms", p)) terms.emplace_back(as<int>(t.at(0), p + ".terms"), as<std::string>(t.at(1), p + ".terms").at(0));
          s = PauliString::from_terms(lat.n_sites, terms);
        }
        if (static_cast<int>(s.size()) != lat.n_sites) throw ConfigError(p + ".pauli: length differs from the lattice");
        out.push_back(pauli_sq_observable(label, s));
      } else if (type == "renyi2" || type == "renyi2_gauge") {
        auto region = resolve_region(lat, field(o, "region", p), p + ".region");
        region.interior.label = get<std::string>(o, "label", p);
        if (type == "renyi2")
          out.push_back(translate ? renyi2_translated_observable(lat, region.interior)
                                  : renyi2_observable(lat, region.interior));
        else
          out.push_back(renyi2_gauge_observable(lat, region, translate));
      } else if (type == "wilson") {
        auto w = wilson_observable(lat, get<int>(o, "w", p), get<int>(o, "h", p), translate);
        if (o.contains("label")) w.label = get<std::string>(o, "label", p);
        out.push_back(std::move(w));
      } else {
        throw ConfigError(p + ".type: unknown observable '" + type + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(p + ": " + e.what());
    } catch (const json::exception& e) {
      throw ConfigError(p + ": " + e.what());
    }
  }
  for (const auto& t : cfg.topo)
    for (const auto* name : {&t.ab, &t.bc, &t.abc, &t.b})
      if (std::none_of(out.begin(), out.end(), [&](const Observable& o) {
            return o.label == *name && o.kind == ObservableKind::renyi2;
          }))
        throw ConfigError("config.topo_ee." + t.label + ": no renyi2 observable labelled '" + *name + "'");
  return out;
}

}  // namespace bellqmc::tools
