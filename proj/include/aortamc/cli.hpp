#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "aortamc/checker.hpp"
#include "aortamc/config.hpp"
#include "aortamc/errors.hpp"
#include "aortamc/psl.hpp"
#include "aortamc/runtime.hpp"

namespace aortamc::cli {

enum ExitCode : int { kOk = 0, kMismatch = 1, kInputError = 2, kResourceLimit = 3 };

struct Options {
  std::filesystem::path config;
  std::optional<std::filesystem::path> properties;
  std::optional<std::filesystem::path> model;
  std::optional<std::filesystem::path> out;
  std::uint64_t seed = 0;
  std::size_t state_cap = checker::kDefaultStateCap;
  unsigned workers = 1;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double millis_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write file: " + p.string());
  f << text;
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ResourceLimit& e) {
    err << "error: " << e.what() << "\n";
    return kResourceLimit;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
}

inline std::filesystem::path properties_path(const Options& opt, const MasConfig* cfg) {
  if (opt.properties) return *opt.properties;
  if (cfg && cfg->properties) return *cfg->properties;
  throw ConfigError("no property file: pass --properties or name one in the configuration");
}

inline std::string join_messages(const std::vector<aorta::Message>& ms) {
  std::string out = "[";
  for (std::size_t i = 0; i < ms.size(); ++i) out += (i ? ", " : "") + ms[i].to_string();
  return out + "]";
}

inline std::string safe_name(const std::string& name) {
  std::string out;
  for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}

/// Shared reporting for both checking modes. Returns the exit code.
template <class CheckFn>
int report_properties(const std::vector<psl::Property>& props, const Options& opt, std::string_view mode,
                      std::ostream& out, CheckFn&& check) {
  auto t_all = Clock::now();
  std::size_t mismatches = 0;
  for (const auto& p : props) {
    auto t0 = Clock::now();
    checker::Verdict v = check(p.formula);
    double ms = millis_since(t0);
    bool ok = (v.result == checker::Result::Violated) == p.expect_fail;
    if (!ok) ++mismatches;

    nlohmann::json line = {{"property", p.name},
                           {"mode", mode},
                           {"verdict", checker::to_string(v.result)},
                           {"expectFail", p.expect_fail},
                           {"ok", ok},
                           {"states", v.states_explored},
                           {"productStates", v.product_states_explored},
                           {"timeMs", ms}};
    if (v.counterexample) {
      const auto& c = *v.counterexample;
      auto choices = nlohmann::json::array();
      for (std::size_t i = 1; i < c.steps.size(); ++i)
        choices.push_back(c.steps[i].stutter ? nlohmann::json() : nlohmann::json(*c.steps[i].agent));
      line["lasso"] = {{"choices", std::move(choices)},
                       {"cycleStart", c.cycle_start},
                       {"closing", c.closing_stutter ? nlohmann::json() : nlohmann::json(*c.closing_agent)}};
      line["counterexampleValid"] = c.validated;
      if (opt.out) {
        auto path = *opt.out / (safe_name(p.name) + ".cex.json");
        write_file(path, c.to_json().dump(1) + "\n");
        line["counterexample"] = path.string();
      }
    }
    out << line.dump() << "\n";
  }
  out << nlohmann::json{{"summary",
                         {{"properties", props.size()},
                          {"mismatches", mismatches},
                          {"timeMs", millis_since(t_all)}}}}
             .dump()
      << "\n";
  return mismatches ? kMismatch : kOk;
}

} // namespace detail

/// Executes one seeded interleaving to an end state and prints the trace.
/// The state cap bounds the number of states visited.
inline int cmd_run(const Options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    MasConfig cfg = load_config(opt.config);
    runtime::MasState s = cfg.initial();
    std::mt19937_64 rng(opt.seed);
    std::size_t step = 0;
    while (!runtime::is_end_state(s)) {
      if (step + 1 >= opt.state_cap)
        throw ResourceLimit("run exceeded the state cap of " + std::to_string(opt.state_cap));
      auto active = runtime::active_agents(s);
      std::uniform_int_distribution<std::size_t> pick(0, active.size() - 1);
      runtime::StepRecord rec;
      s = runtime::mas_step(std::move(s), active[pick(rng)], &rec);
      ++step;
      out << "step " << step << ": " << rec.agent
          << " | action=" << (rec.action ? rec.action->to_string() : "none")
          << " | delivered=" << detail::join_messages(rec.delivered) << "\n";
    }
    out << "end: steps=" << step;
    for (const auto& a : s.agents) {
      out << " | " << a.name() << " beliefs=[";
      bool first = true;
      for (const auto& b : a.aorta.ms.beliefs) {
        out << (first ? "" : ", ") << b.to_string();
        first = false;
      }
      out << "]";
    }
    out << "\n";
    if (opt.out) detail::write_file(*opt.out, runtime::to_json(s).dump(1) + "\n");
    return int(kOk);
  });
}

/// On-the-fly checking of every property. Exit 0 iff each property's
/// verdict matches its expect-fail marker.
inline int cmd_check(const Options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    MasConfig cfg = load_config(opt.config);
    runtime::MasState s0 = cfg.initial();
    auto props = psl::parse_properties(read_file(detail::properties_path(opt, &cfg)),
                                       psl::Domains::from(s0));
    checker::CheckOptions co{opt.state_cap};
    return detail::report_properties(props, opt, "on-the-fly", out, [&](const psl::Formula& f) {
      return checker::check_on_the_fly(s0, f, co);
    });
  });
}

/// Explores the full state space and writes the model file.
inline int cmd_explore(const Options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    if (!opt.out) throw ConfigError("explore needs --out <model file>");
    MasConfig cfg = load_config(opt.config);
    auto t0 = detail::Clock::now();
    auto m = checker::explore_full(cfg.initial(), {opt.state_cap, opt.workers});
    double ms = detail::millis_since(t0);
    detail::write_file(*opt.out, m.dump());
    out << nlohmann::json{{"model", opt.out->string()},
                          {"states", m.states.size()},
                          {"edges", m.edge_count()},
                          {"endStates", m.end_state_count()},
                          {"timeMs", ms}}
               .dump()
        << "\n";
    return int(kOk);
  });
}

/// Checks every property against a model file. The configuration is
/// optional here; when given, counterexamples are also replayed from its
/// initial state.
inline int cmd_check_model(const Options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    if (!opt.model) throw ConfigError("check-model needs --model <model file>");
    std::optional<MasConfig> cfg;
    if (!opt.config.empty()) cfg = load_config(opt.config);
    auto t0 = detail::Clock::now();
    auto m = checker::StateSpaceModel::parse(read_file(*opt.model));
    double load_ms = detail::millis_since(t0);
    out << nlohmann::json{{"model", opt.model->string()}, {"states", m.states.size()}, {"loadMs", load_ms}}.dump()
        << "\n";
    auto props = psl::parse_properties(read_file(detail::properties_path(opt, cfg ? &*cfg : nullptr)),
                                       psl::Domains::from(m.states[m.initial]));
    std::optional<runtime::MasState> s0;
    if (cfg) s0 = cfg->initial();
    return detail::report_properties(props, opt, "model", out, [&](const psl::Formula& f) {
      auto v = checker::check_on_model(m, f);
      if (v.counterexample && s0)
        v.counterexample->validated =
            v.counterexample->validated && checker::validate_counterexample(*s0, f, *v.counterexample);
      return v;
    });
  });
}

} // namespace aortamc::cli
