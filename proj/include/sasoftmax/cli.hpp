#ifndef SASOFTMAX_CLI_HPP
#define SASOFTMAX_CLI_HPP

// Command-line front end: gradcheck, sweep, train, eval, dump.
//
// Each subcommand has a table of config keys with defaults. The effective
// config is built as defaults <- --config JSON file <- explicit flags, with
// unknown file keys rejected, and is echoed to <out>/config.json.
//
// Exit codes: 0 success, 1 runtime or check failure, 2 usage/config error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sasoftmax/checkpoint.hpp"
#include "sasoftmax/corpus.hpp"
#include "sasoftmax/diagnostics.hpp"
#include "sasoftmax/error.hpp"
#include "sasoftmax/gradcheck.hpp"
#include "sasoftmax/io.hpp"
#include "sasoftmax/micro_lm.hpp"
#include "sasoftmax/variants.hpp"

namespace sasoftmax::cli {

using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Bad flags, bad config files, missing inputs.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ValueType { Integer, Real, Boolean, Text, RealList, KindList };

struct KeySpec {
  std::string key;
  ValueType type;
  json default_value;
  std::string help;
};

inline std::string flag_name(const std::string& key) {
  std::string f = "--";
  for (char c : key) f += (c == '_') ? '-' : c;
  return f;
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

inline double parse_real(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected a number, got '" + text + "'");
  }
}

inline json kinds_json(const std::vector<std::string>& names, const std::string& where) {
  json arr = json::array();
  for (const auto& n : names) {
    const auto k = parse_variant(n);
    if (!k) throw ConfigError(where + ": unknown kind '" + n + "' (baseline|v1|v2|v3|v4)");
    arr.push_back(std::string(to_string(*k)));
  }
  if (arr.empty()) throw ConfigError(where + ": needs at least one kind");
  return arr;
}

/// Converts a flag's text or a config-file value to the key's type.
inline json coerce(const KeySpec& spec, const json& raw, const std::string& where) {
  const bool is_text = raw.is_string();
  const std::string text = is_text ? raw.get<std::string>() : std::string();
  switch (spec.type) {
    case ValueType::Integer: {
      if (raw.is_number_integer()) return raw;
      if (is_text) {
        try {
          std::size_t used = 0;
          const long long v = std::stoll(text, &used);
          if (used != text.size()) throw std::invalid_argument("trailing");
          return v;
        } catch (const std::exception&) {
        }
      }
      throw ConfigError(where + ": expected an integer");
    }
    case ValueType::Real:
      if (raw.is_number()) return raw.get<double>();
      if (is_text) return parse_real(text, where);
      throw ConfigError(where + ": expected a number");
    case ValueType::Boolean:
      if (raw.is_boolean()) return raw;
      if (text == "true" || text == "1" || text == "on") return true;
      if (text == "false" || text == "0" || text == "off") return false;
      throw ConfigError(where + ": expected true or false");
    case ValueType::Text:
      if (is_text) return raw;
      throw ConfigError(where + ": expected a string");
    case ValueType::RealList: {
      json arr = json::array();
      if (raw.is_array()) {
        for (const auto& x : raw) {
          if (!x.is_number()) throw ConfigError(where + ": expected numbers");
          arr.push_back(x.get<double>());
        }
      } else if (is_text) {
        for (const auto& item : split_csv(text)) arr.push_back(parse_real(item, where));
      } else {
        throw ConfigError(where + ": expected a list of numbers");
      }
      if (arr.empty()) throw ConfigError(where + ": needs at least one value");
      return arr;
    }
    case ValueType::KindList: {
      if (raw.is_array()) {
        std::vector<std::string> names;
        for (const auto& x : raw) {
          if (!x.is_string()) throw ConfigError(where + ": expected kind names");
          names.push_back(x.get<std::string>());
        }
        return kinds_json(names, where);
      }
      if (is_text) return kinds_json(split_csv(text), where);
      throw ConfigError(where + ": expected a list of kinds");
    }
  }
  return raw;
}

inline std::string all_kinds_csv() { return "baseline,v1,v2,v3,v4"; }

}  // namespace detail

inline std::vector<KeySpec> keys_for(const std::string& sub) {
  using VT = ValueType;
  const std::string default_corpus = "data/sample_corpus.txt";
  if (sub == "gradcheck") {
    return {{"seed", VT::Integer, 7, "RNG seed"},
            {"samples", VT::Integer, 1000, "rows drawn per (T, kind)"},
            {"tmin", VT::Integer, 1, "smallest row length"},
            {"tmax", VT::Integer, 8, "largest row length"},
            {"kinds", VT::KindList, json::array({"baseline", "v1", "v2", "v3", "v4"}),
             "comma-separated kinds"},
            {"tol_rel", VT::Real, 1e-6, "relative tolerance"},
            {"abs_floor", VT::Real, 1e-9, "absolute error floor"},
            {"h", VT::Real, 1e-5, "central-difference step"},
            {"eps", VT::Real, kDefaultEps, "variant denominator epsilon"}};
  }
  if (sub == "sweep") {
    return {{"seed", VT::Integer, 0, "unused by the sweep; echoed for provenance"},
            {"gaps", VT::RealList, json::array({0, 2, 4, 6, 8, 10, 12, 14, 16}),
             "comma-separated peak offsets g"},
            {"t", VT::Integer, 4, "row length"},
            {"kinds", VT::KindList, json::array({"baseline", "v1", "v2", "v3", "v4"}),
             "comma-separated kinds"},
            {"profile", VT::Text, "one_peak", "one_peak | one_trough | uniform"},
            {"eps", VT::Real, kDefaultEps, "variant denominator epsilon"}};
  }
  if (sub == "train") {
    const TrainConfig d;
    return {{"seed", VT::Integer, 1, "RNG seed"},
            {"kind", VT::Text, "baseline", "baseline | v1 | v2 | v3 | v4"},
            {"corpus", VT::Text, default_corpus, "training text file"},
            {"layers", VT::Integer, d.layers, "decoder blocks"},
            {"d_model", VT::Integer, d.d_model, "model width (= head dim)"},
            {"seq_len", VT::Integer, d.seq_len, "window length"},
            {"batch", VT::Integer, d.batch, "windows per step"},
            {"steps", VT::Integer, d.steps, "optimizer steps"},
            {"lr", VT::Real, d.lr, "Adam learning rate"},
            {"beta1", VT::Real, d.beta1, "Adam beta1"},
            {"beta2", VT::Real, d.beta2, "Adam beta2"},
            {"adam_eps", VT::Real, d.adam_eps, "Adam epsilon"},
            {"rope", VT::Boolean, d.rope, "rotary embedding on queries/keys"},
            {"rope_base", VT::Real, d.rope_base, "rotary base"},
            {"init_std", VT::Real, d.init_std, "weight init std"},
            {"qk_init_std", VT::Real, d.qk_init_std, "query/key init std"},
            {"eps", VT::Real, d.eps, "variant denominator epsilon"},
            {"wall_clock", VT::Boolean, false, "record wall-clock step times in metrics.csv"}};
  }
  if (sub == "eval") {
    return {{"seed", VT::Integer, 0, "unused; echoed for provenance"},
            {"checkpoint", VT::Text, "", "checkpoint written by train"},
            {"text", VT::Text, default_corpus, "text file to score"},
            {"seq_len", VT::Integer, 0, "window length (0 = checkpoint's)"}};
  }
  if (sub == "dump") {
    return {{"seed", VT::Integer, 0, "unused; echoed for provenance"},
            {"checkpoint", VT::Text, "", "checkpoint written by train"},
            {"prompt", VT::Text, "", "prompt text"}};
  }
  throw ConfigError("unknown subcommand " + sub);
}

/// defaults <- file <- flags. `flags` maps key to raw flag text.
inline json effective_config(const std::vector<KeySpec>& keys, const json& file,
                             const std::map<std::string, std::string>& flags) {
  json cfg = json::object();
  for (const auto& k : keys) cfg[k.key] = k.default_value;
  if (!file.is_null()) {
    if (!file.is_object()) throw ConfigError("--config: top level must be a JSON object");
    for (auto it = file.begin(); it != file.end(); ++it) {
      const auto spec = std::find_if(keys.begin(), keys.end(),
                                     [&](const KeySpec& k) { return k.key == it.key(); });
      if (spec == keys.end()) throw ConfigError("--config: unknown key '" + it.key() + "'");
      cfg[it.key()] = detail::coerce(*spec, it.value(), "--config key '" + it.key() + "'");
    }
  }
  for (const auto& [key, text] : flags) {
    const auto spec =
        std::find_if(keys.begin(), keys.end(), [&](const KeySpec& k) { return k.key == key; });
    if (spec == keys.end()) throw ConfigError("unknown flag for key " + key);
    cfg[key] = detail::coerce(*spec, json(text), flag_name(key));
  }
  return cfg;
}

namespace detail {

inline std::int64_t get_int(const json& cfg, const std::string& key, std::int64_t min_value) {
  const auto v = cfg.at(key).get<std::int64_t>();
  if (v < min_value) {
    throw ConfigError(flag_name(key) + " must be at least " + std::to_string(min_value) +
                      ", got " + std::to_string(v));
  }
  return v;
}

inline double get_positive(const json& cfg, const std::string& key) {
  const double v = cfg.at(key).get<double>();
  if (!(v > 0.0)) throw ConfigError(flag_name(key) + " must be positive");
  return v;
}

inline std::vector<VariantKind> get_kinds(const json& cfg) {
  std::vector<VariantKind> out;
  for (const auto& n : cfg.at("kinds")) out.push_back(*parse_variant(n.get<std::string>()));
  return out;
}

inline VariantKind get_kind(const json& cfg) {
  const auto k = parse_variant(cfg.at("kind").get<std::string>());
  if (!k) throw ConfigError("--kind must be one of baseline|v1|v2|v3|v4");
  return *k;
}

inline void require_file(const json& cfg, const std::string& key) {
  const std::string path = cfg.at(key).get<std::string>();
  if (path.empty()) throw ConfigError(flag_name(key) + " is required");
  if (!std::filesystem::is_regular_file(path)) {
    throw ConfigError(flag_name(key) + ": no such file '" + path + "'");
  }
}

inline std::filesystem::path prepare_out(const std::string& out_dir, const json& cfg) {
  std::filesystem::path dir(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::IoError, "cannot create output directory '" + out_dir + "'");
  }
  write_file_atomic(dir / "config.json", cfg.dump(2) + "\n");
  return dir;
}

}  // namespace detail

inline TrainConfig train_config_from(const json& cfg) {
  using detail::get_int;
  using detail::get_positive;
  TrainConfig tc;
  tc.kind = detail::get_kind(cfg);
  tc.seed = static_cast<std::uint64_t>(get_int(cfg, "seed", 0));
  tc.corpus_path = cfg.at("corpus").get<std::string>();
  tc.layers = static_cast<std::size_t>(get_int(cfg, "layers", 1));
  tc.d_model = static_cast<std::size_t>(get_int(cfg, "d_model", 1));
  tc.seq_len = static_cast<std::size_t>(get_int(cfg, "seq_len", 1));
  tc.batch = static_cast<std::size_t>(get_int(cfg, "batch", 1));
  tc.steps = static_cast<std::size_t>(get_int(cfg, "steps", 0));
  tc.lr = get_positive(cfg, "lr");
  tc.beta1 = cfg.at("beta1").get<double>();
  tc.beta2 = cfg.at("beta2").get<double>();
  if (!(tc.beta1 > 0.0 && tc.beta1 < 1.0)) throw ConfigError("--beta1 must lie in (0, 1)");
  if (!(tc.beta2 > 0.0 && tc.beta2 < 1.0)) throw ConfigError("--beta2 must lie in (0, 1)");
  tc.adam_eps = get_positive(cfg, "adam_eps");
  tc.rope = cfg.at("rope").get<bool>();
  tc.rope_base = get_positive(cfg, "rope_base");
  tc.init_std = get_positive(cfg, "init_std");
  tc.qk_init_std = get_positive(cfg, "qk_init_std");
  tc.eps = get_positive(cfg, "eps");
  if (tc.rope && tc.d_model % 2 != 0) throw ConfigError("--d-model must be even with --rope");
  return tc;
}

inline int run_gradcheck(const json& cfg, const std::string& out_dir, std::ostream& out) {
  using detail::get_int;
  const auto samples = static_cast<std::size_t>(get_int(cfg, "samples", 1));
  const auto tmin = static_cast<std::size_t>(get_int(cfg, "tmin", 1));
  const auto tmax = static_cast<std::size_t>(get_int(cfg, "tmax", 1));
  if (tmax < tmin) throw ConfigError("--tmax must be at least --tmin");
  GradCheckOptions opt;
  opt.tol_rel = detail::get_positive(cfg, "tol_rel");
  opt.abs_floor = detail::get_positive(cfg, "abs_floor");
  opt.h = detail::get_positive(cfg, "h");
  opt.eps = detail::get_positive(cfg, "eps");
  const auto seed = static_cast<std::uint64_t>(get_int(cfg, "seed", 0));
  const auto kinds = detail::get_kinds(cfg);

  const auto dir = detail::prepare_out(out_dir, cfg);
  const auto reports = gradcheck(samples, tmin, tmax, kinds, seed, opt);
  std::size_t skipped = 0, failed = 0;
  double worst_rel = 0.0, worst_abs = 0.0;
  for (const auto& r : reports) {
    if (r.skipped_tie) {
      ++skipped;
      continue;
    }
    if (!r.passed) ++failed;
    worst_rel = std::max(worst_rel, r.max_rel_err);
    worst_abs = std::max(worst_abs, r.max_abs_err);
  }
  const bool ok = failed == 0;
  json doc = {{"all_passed", ok},
              {"rows", reports.size()},
              {"skipped_tie", skipped},
              {"failed", failed},
              {"max_rel_err", worst_rel},
              {"max_abs_err", worst_abs},
              {"reports", reports}};
  write_file_atomic(dir / "gradcheck.json", doc.dump() + "\n");
  json summary = doc;
  summary.erase("reports");
  out << summary.dump() << "\n";
  return ok ? kExitOk : kExitFailure;
}

inline int run_sweep(const json& cfg, const std::string& out_dir, std::ostream& out) {
  SweepSpec spec;
  spec.gaps = cfg.at("gaps").get<std::vector<double>>();
  spec.t = static_cast<std::size_t>(detail::get_int(cfg, "t", 2));
  spec.kinds = detail::get_kinds(cfg);
  const auto profile = parse_profile(cfg.at("profile").get<std::string>());
  if (!profile) throw ConfigError("--profile must be one_peak, one_trough or uniform");
  spec.profile = *profile;
  const double eps = detail::get_positive(cfg, "eps");

  const auto dir = detail::prepare_out(out_dir, cfg);
  const auto records = saturation_sweep(spec, eps);
  write_file_atomic(dir / "sweep.csv", sweep_csv(records));
  out << json{{"rows", records.size()}, {"csv", (dir / "sweep.csv").string()}}.dump() << "\n";
  return kExitOk;
}

inline int run_train(const json& cfg, const std::string& out_dir, std::ostream& out) {
  const TrainConfig tc = train_config_from(cfg);
  detail::require_file(cfg, "corpus");
  const Corpus corpus = [&] {
    try {
      return load_corpus(tc.corpus_path, tc.seq_len);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::CorpusTooSmall) throw ConfigError(std::string("--corpus: ") + e.what());
      throw;
    }
  }();

  const auto dir = detail::prepare_out(out_dir, cfg);
  const TrainResult res = train(tc, corpus);
  write_file_atomic(dir / "metrics.csv", metrics_csv(res.metrics, cfg.at("wall_clock").get<bool>()));
  save_checkpoint(Checkpoint{res.spec, res.params, res.vocab, tc.seq_len}, dir / "checkpoint.json");
  json summary = {{"steps", res.metrics.size()}, {"vocab", res.vocab.size()}};
  if (!res.metrics.empty()) {
    summary["initial_loss"] = res.metrics.steps.front().loss;
    summary["final_loss"] = res.metrics.steps.back().loss;
  }
  out << summary.dump() << "\n";
  return kExitOk;
}

inline int run_eval(const json& cfg, const std::string& out_dir, std::ostream& out) {
  detail::require_file(cfg, "checkpoint");
  detail::require_file(cfg, "text");
  auto seq_len = static_cast<std::size_t>(detail::get_int(cfg, "seq_len", 0));
  detail::prepare_out(out_dir, cfg);
  const Checkpoint ck = load_checkpoint(cfg.at("checkpoint").get<std::string>());
  if (seq_len == 0) seq_len = ck.seq_len;
  const std::string text = read_file(cfg.at("text").get<std::string>());
  const double ppl = evaluate_ppl(ck.spec, ck.params, ck.vocab, text, seq_len);
  out << json{{"ppl", ppl}}.dump() << "\n";
  return kExitOk;
}

inline int run_dump(const json& cfg, const std::string& out_dir, std::ostream& out) {
  detail::require_file(cfg, "checkpoint");
  const std::string prompt = cfg.at("prompt").get<std::string>();
  if (prompt.empty()) throw ConfigError("--prompt is required");
  const auto dir = detail::prepare_out(out_dir, cfg);
  const Checkpoint ck = load_checkpoint(cfg.at("checkpoint").get<std::string>());
  const auto maps = attention_maps(ck.spec, ck.params, ck.vocab.encode(prompt));
  const auto paths = dump_attention(maps, dir);
  json files = json::array();
  for (const auto& p : paths) files.push_back(p.string());
  out << json{{"files", files}}.dump() << "\n";
  return kExitOk;
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Self-adjusting softmax attention: gradient checks, diagnostics, micro-LM"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print this help and exit");
  const std::vector<std::string> names = {"gradcheck", "sweep", "train", "eval", "dump"};
  const std::map<std::string, std::string> about = {
      {"gradcheck", "analytic vs finite-difference Jacobians of every scoring variant"},
      {"sweep", "Jacobian norms over saturated logit rows (writes sweep.csv)"},
      {"train", "train the character-level model (writes metrics.csv, checkpoint.json)"},
      {"eval", "perplexity of a checkpoint on a text file"},
      {"dump", "per-layer attention matrices of a checkpoint on a prompt"}};

  struct SubState {
    CLI::App* app = nullptr;
    std::vector<KeySpec> keys;
    std::map<std::string, std::string> raw;
    std::map<std::string, CLI::Option*> opts;
    std::string config_path;
    std::string out_dir = "out";
    std::string kind;
    CLI::Option* kind_opt = nullptr;
  };
  std::map<std::string, SubState> subs;
  for (const auto& name : names) {
    SubState& s = subs[name];
    s.app = app.add_subcommand(name, about.at(name));
    s.keys = keys_for(name);
    s.app->add_option("--config", s.config_path, "JSON config file (flags override it)");
    s.app->add_option("--out", s.out_dir, "output directory")->capture_default_str();
    for (const auto& k : s.keys) {
      s.opts[k.key] = s.app->add_option(flag_name(k.key), s.raw[k.key], k.help);
    }
    if (name == "gradcheck" || name == "sweep") {
      s.kind_opt = s.app->add_option("--kind", s.kind, "single kind (shorthand for --kinds)");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (auto& [name, s] : subs) {
    if (!s.app->parsed()) continue;
    try {
      std::map<std::string, std::string> flags;
      for (const auto& [key, opt] : s.opts) {
        if (opt->count() > 0) flags[key] = s.raw[key];
      }
      if (s.kind_opt && s.kind_opt->count() > 0) {
        if (flags.count("kinds")) throw ConfigError("--kind and --kinds are mutually exclusive");
        flags["kinds"] = s.kind;
      }
      json file;
      if (!s.config_path.empty()) {
        try {
          file = json::parse(read_file(s.config_path));
        } catch (const nlohmann::json::exception& e) {
          throw ConfigError("--config: " + std::string(e.what()));
        } catch (const Error& e) {
          throw ConfigError("--config: " + std::string(e.what()));
        }
      }
      const json cfg = effective_config(s.keys, file, flags);
      if (name == "gradcheck") return run_gradcheck(cfg, s.out_dir, out);
      if (name == "sweep") return run_sweep(cfg, s.out_dir, out);
      if (name == "train") return run_train(cfg, s.out_dir, out);
      if (name == "eval") return run_eval(cfg, s.out_dir, out);
      if (name == "dump") return run_dump(cfg, s.out_dir, out);
    } catch (const ConfigError& e) {
      err << "error: " << e.what() << "\n";
      return kExitUsage;
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return e.code() == ErrorCode::InvalidArgument ? kExitUsage : kExitFailure;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kExitFailure;
    }
  }
  return kExitUsage;
}

}  // namespace sasoftmax::cli

#endif  // SASOFTMAX_CLI_HPP
