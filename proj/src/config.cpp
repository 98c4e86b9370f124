#include "sdfit/config.hpp"

#include <fstream>
#include <set>

#include "sdfit/error.hpp"

namespace sdfit {

namespace {

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed, const char* where) {
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!keys.contains(key)) throw Error(Errc::invalid_input, std::string("unknown key '") + key + "' in " + where);
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

}  // namespace

void validate(const FitSettings& s) {
  if (s.m_supply < 1 || s.m_demand < 1) throw Error(Errc::invalid_argument, "segment counts must be >= 1");
  if (!(s.price_cap > 0.0) || s.price_cap > kMarketMaxPrice) {
    throw Error(Errc::invalid_argument, "price cap must lie in (0, 3000]");
  }
  const auto& o = s.options.solver;
  if (o.max_iterations < 1 || !(o.gtol >= 0.0) || !(o.xtol >= 0.0) || !(o.ftol >= 0.0)) {
    throw Error(Errc::invalid_argument, "solver tolerances must be >= 0 and max_iterations >= 1");
  }
  if (!(s.options.shortcut_resolution > 0.0)) throw Error(Errc::invalid_argument, "shortcut_resolution must be > 0");
}

nlohmann::ordered_json to_json(const FitSettings& s) {
  const auto& o = s.options.solver;
  return {
      {"m_supply", s.m_supply},
      {"m_demand", s.m_demand},
      {"method", std::string(to_string(s.method))},
      {"price_cap", s.price_cap},
      {"single_jump_shortcut", s.options.single_jump_shortcut},
      {"shortcut_resolution", s.options.shortcut_resolution},
      {"solver",
       {{"max_iterations", o.max_iterations}, {"gtol", o.gtol}, {"xtol", o.xtol}, {"ftol", o.ftol}}},
  };
}

nlohmann::ordered_json to_json(const GeneratorConfig& g) {
  auto bands = nlohmann::ordered_json::array();
  for (const auto& b : g.bands) {
    bands.push_back({{"name", b.name}, {"price_lo", b.price_lo}, {"price_hi", b.price_hi}, {"layer_share", b.layer_share}});
  }
  return {
      {"seed", g.seed},
      {"hours", g.hours},
      {"supply_layers", g.supply_layers},
      {"demand_layers", g.demand_layers},
      {"start_date", g.start_date},
      {"must_run_volume", g.must_run_volume},
      {"base_load", g.base_load},
      {"daily_swing", g.daily_swing},
      {"bands", std::move(bands)},
  };
}

nlohmann::ordered_json to_json(const BatchConfig& c) {
  return {{"fit", to_json(c.fit)}, {"generator", to_json(c.generator)}, {"workers", c.workers}};
}

BatchConfig config_from_json(const nlohmann::json& j) {
  BatchConfig c;
  try {
    reject_unknown(j, {"fit", "generator", "workers"}, "config");
    read(j, "workers", c.workers);
    if (j.contains("fit")) {
      const auto& f = j.at("fit");
      reject_unknown(f, {"m_supply", "m_demand", "method", "price_cap", "single_jump_shortcut", "shortcut_resolution", "solver"},
                     "fit");
      read(f, "m_supply", c.fit.m_supply);
      read(f, "m_demand", c.fit.m_demand);
      if (f.contains("method")) c.fit.method = method_from_string(f.at("method").get<std::string>());
      read(f, "price_cap", c.fit.price_cap);
      read(f, "single_jump_shortcut", c.fit.options.single_jump_shortcut);
      read(f, "shortcut_resolution", c.fit.options.shortcut_resolution);
      if (f.contains("solver")) {
        const auto& s = f.at("solver");
        reject_unknown(s, {"max_iterations", "gtol", "xtol", "ftol"}, "fit.solver");
        auto& o = c.fit.options.solver;
        read(s, "max_iterations", o.max_iterations);
        read(s, "gtol", o.gtol);
        read(s, "xtol", o.xtol);
        read(s, "ftol", o.ftol);
      }
    }
    if (j.contains("generator")) {
      const auto& g = j.at("generator");
      reject_unknown(g, {"seed", "hours", "supply_layers", "demand_layers", "start_date", "must_run_volume", "base_load",
                         "daily_swing", "bands"},
                     "generator");
      auto& gen = c.generator;
      read(g, "seed", gen.seed);
      read(g, "hours", gen.hours);
      read(g, "supply_layers", gen.supply_layers);
      read(g, "demand_layers", gen.demand_layers);
      read(g, "start_date", gen.start_date);
      read(g, "must_run_volume", gen.must_run_volume);
      read(g, "base_load", gen.base_load);
      read(g, "daily_swing", gen.daily_swing);
      if (g.contains("bands")) {
        gen.bands.clear();
        for (const auto& b : g.at("bands")) {
          gen.bands.push_back({b.at("name").get<std::string>(), b.at("price_lo").get<double>(),
                               b.at("price_hi").get<double>(), b.at("layer_share").get<double>()});
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_input, std::string("malformed config: ") + e.what());
  }
  validate(c.fit);
  if (c.workers < 1) throw Error(Errc::invalid_argument, "workers must be >= 1");
  return c;
}

BatchConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_input, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace sdfit
