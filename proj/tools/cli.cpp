// Copyright 2026 The bgh Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "bgh/balanced_model.hpp"
#include "bgh/entropy.hpp"
#include "bgh/error.hpp"
#include "bgh/ingest.hpp"
#include "bgh/io.hpp"
#include "bgh/stkey.hpp"

namespace bgh::cli {

namespace {

// Flag values that parse but make no sense; reported as usage errors.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

template <typename T>
T parse_number(const std::string& s, const std::string& what) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw UsageError("invalid " + what + ": '" + s + "'");
  }
  return v;
}

// "0.5" or "2/3".
double parse_fraction(const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) return parse_number<double>(s, "--a");
  const double num = parse_number<double>(s.substr(0, slash), "--a numerator");
  const double den = parse_number<double>(s.substr(slash + 1), "--a denominator");
  if (den == 0.0) throw UsageError("--a denominator is zero");
  return num / den;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

nlohmann::json rect_json(const CellRect& r) {
  return {{"lat_min", r.lat_min}, {"lat_max", r.lat_max}, {"lon_min", r.lon_min},
          {"lon_max", r.lon_max}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entropy-balanced geohash toolkit", "bgh"};
  app.require_subcommand(1);

  // fit
  std::string fit_input, fit_output;
  int fit_q = 0;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a balanced model from weighted points");
  fit_cmd->add_option("--input", fit_input, "lat,lon[,weight] CSV")->required();
  fit_cmd->add_option("--q", fit_q, "Balance depth in bits (1-24)")->required();
  fit_cmd->add_option("--output", fit_output, "Model file to write")->required();

  // encode
  std::string enc_model, enc_time;
  double enc_lat = 0, enc_lon = 0;
  int enc_bits = 40, enc_prefix = 0, enc_suffix = 0;
  std::int64_t enc_resolution = 86400;
  auto* enc_cmd = app.add_subcommand("encode", "Balanced hash or spatiotemporal key of a point");
  enc_cmd->add_option("--model", enc_model, "Model file")->required();
  enc_cmd->add_option("--lat", enc_lat, "Latitude in degrees")->required();
  enc_cmd->add_option("--lon", enc_lon, "Longitude in degrees")->required();
  enc_cmd->add_option("--bits", enc_bits, "Hash length (default 40)");
  auto* time_opt = enc_cmd->add_option("--time", enc_time, "ISO-8601 UTC time; emits a key");
  enc_cmd->add_option("--resolution", enc_resolution, "Seconds per time bucket")->needs(time_opt);
  enc_cmd->add_option("--prefix-bits", enc_prefix, "Key prefix bits")->needs(time_opt);
  enc_cmd->add_option("--suffix-bits", enc_suffix, "Key suffix bits")->needs(time_opt);

  // decode
  std::string dec_model, dec_key;
  auto* dec_cmd = app.add_subcommand("decode", "Standard interval and cells of a balanced hash/key");
  dec_cmd->add_option("--model", dec_model, "Model file")->required();
  dec_cmd->add_option("--key", dec_key, "Bit string, or <hex>:<time>:<hex> key")->required();

  // entropy
  std::string ent_input, ent_model, ent_bits, ent_scheme;
  auto* ent_cmd = app.add_subcommand("entropy", "Entropy per precision as CSV");
  ent_cmd->add_option("--input", ent_input, "lat,lon[,weight] CSV")->required();
  ent_cmd->add_option("--model", ent_model, "Model file for the balanced scheme");
  ent_cmd->add_option("--bits", ent_bits, "Comma-separated precisions")->required();
  ent_cmd->add_option("--scheme", ent_scheme, "standard|balanced|both")
      ->check(CLI::IsMember({"standard", "balanced", "both"}));

  // bound
  int bound_q = 0;
  double bound_n = 0;
  std::string bound_a;
  auto* bound_cmd = app.add_subcommand("bound", "Entropy lower bound and its probability");
  bound_cmd->add_option("--q", bound_q, "Balance depth")->required();
  bound_cmd->add_option("--n", bound_n, "Sample size")->required();
  bound_cmd->add_option("--a", bound_a, "Fraction A in [0,1], decimal or p/q")->required();

  // buckets
  std::string bk_model, bk_output;
  int bk_bits = 0, bk_cap = 0;
  auto* bk_cmd = app.add_subcommand("buckets", "Export bucket regions as GeoJSON");
  bk_cmd->add_option("--model", bk_model, "Model file")->required();
  bk_cmd->add_option("--prefix-bits", bk_bits, "Bucket prefix length k")->required();
  bk_cmd->add_option("--depth-cap", bk_cap, "Deepest cell used in the cover")->required();
  bk_cmd->add_option("--output", bk_output, "GeoJSON file to write")->required();

  // plan
  std::string plan_model, plan_bbox, plan_from, plan_to;
  std::int64_t plan_resolution = 0;
  int plan_prefix = 0;
  std::size_t plan_max = 0;
  bool plan_json = false;
  auto* plan_cmd = app.add_subcommand("plan", "Plan key-range scans for a box and time window");
  plan_cmd->add_option("--model", plan_model, "Model file")->required();
  plan_cmd->add_option("--bbox", plan_bbox, "minlon,minlat,maxlon,maxlat")->required();
  plan_cmd->add_option("--from", plan_from, "ISO-8601 UTC start")->required();
  plan_cmd->add_option("--to", plan_to, "ISO-8601 UTC end (inclusive)")->required();
  plan_cmd->add_option("--resolution", plan_resolution, "Seconds per time bucket")->required();
  plan_cmd->add_option("--prefix-bits", plan_prefix, "Key prefix bits")->required();
  plan_cmd->add_option("--max-ranges", plan_max, "Range budget")->required();
  plan_cmd->add_flag("--json", plan_json, "Emit one JSON document instead of text");

  // synth
  std::string syn_spec, syn_output;
  std::size_t syn_n = 0;
  std::uint64_t syn_seed = 0;
  auto* syn_cmd = app.add_subcommand("synth", "Sample points from a mixture spec");
  syn_cmd->add_option("--spec", syn_spec, "Mixture spec JSON")->required();
  syn_cmd->add_option("--n", syn_n, "Number of points")->required();
  auto* seed_opt = syn_cmd->add_option("--seed", syn_seed, "Overrides the spec's seed");
  syn_cmd->add_option("--output", syn_output, "CSV file to write")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    if (*fit_cmd) {
      const auto points = read_points_csv(fit_input);
      const auto model = fit(points, fit_q);
      save(model, fit_output);
      out << "q=" << model.q() << " n=" << model.n_points() << " w=" << model.total_weight() << "\n";
    } else if (*enc_cmd) {
      const auto model = load(enc_model);
      const GeoPoint p{enc_lat, enc_lon};
      if (!enc_time.empty()) {
        if (enc_prefix == 0) throw UsageError("--time requires --prefix-bits");
        const StKeyConfig config{enc_prefix, enc_resolution, enc_suffix};
        out << make_key(config, model, p, parse_utc_timestamp(enc_time)).render() << "\n";
      } else {
        const HashCode h = balanced_encode(model, p, enc_bits);
        out << h.bit_string() << "\t" << (h.bits % 5 == 0 ? render_base32(h) : "-") << "\n";
      }
    } else if (*dec_cmd) {
      const auto model = load(dec_model);
      nlohmann::json doc;
      HashCode h;
      if (dec_key.find(':') != std::string::npos) {
        const StKey key = StKey::parse(dec_key);
        h = {(key.prefix << key.suffix_bits) | key.suffix, key.prefix_bits + key.suffix_bits};
        doc["time_bucket"] = key.time_bucket;
      } else {
        h = parse_bit_string(dec_key);
      }
      const HashInterval iv = balanced_decode(model, h);
      doc["bits"] = h.bits;
      doc["code"] = h.bit_string();
      doc["interval"] = {iv.lo_value(), iv.hi_value()};
      doc["empty"] = iv.empty();
      nlohmann::json cells = nlohmann::json::array();
      for (const auto& c : dyadic_cover(iv, kMaxBits)) {
        auto cj = rect_json(c.rect);
        cj["prefix"] = c.depth == 0 ? "" : HashCode{c.prefix, c.depth}.bit_string();
        cells.push_back(cj);
      }
      doc["cells"] = cells;
      out << doc.dump(2) << "\n";
    } else if (*ent_cmd) {
      std::vector<int> bits;
      for (const auto& b : split_commas(ent_bits)) bits.push_back(parse_number<int>(b, "--bits entry"));
      if (bits.empty()) throw UsageError("--bits is empty");
      std::string scheme = ent_scheme.empty() ? (ent_model.empty() ? "standard" : "both") : ent_scheme;
      if (scheme != "standard" && ent_model.empty()) {
        throw UsageError("--scheme " + scheme + " requires --model");
      }
      const auto points = read_points_csv(ent_input);
      EntropyReport report;
      if (scheme != "balanced") report = entropy_curve(points, nullptr, bits);
      if (scheme != "standard") {
        const auto model = load(ent_model);
        const auto balanced = entropy_curve(points, &model, bits);
        report.rows.insert(report.rows.end(), balanced.rows.begin(), balanced.rows.end());
      }
      out << report.to_csv();
    } else if (*bound_cmd) {
      const auto r = theorem_bound(bound_q, bound_n, parse_fraction(bound_a));
      out << "threshold " << fixed(r.threshold, 4) << "\n"
          << "probability " << fixed(r.probability_lower_bound, 4) << "\n";
    } else if (*bk_cmd) {
      const auto model = load(bk_model);
      if (bk_bits > model.q()) {
        err << "warning: prefix bits " << bk_bits << " exceed model depth q=" << model.q() << "\n";
      }
      const auto regions = bucket_regions(model, bk_bits, bk_cap);
      write_file_atomic(bk_output, export_buckets_geojson(regions));
    } else if (*plan_cmd) {
      const auto parts = split_commas(plan_bbox);
      if (parts.size() != 4) throw UsageError("--bbox needs minlon,minlat,maxlon,maxlat");
      CellRect bbox;
      bbox.lon_min = parse_number<double>(parts[0], "bbox minlon");
      bbox.lat_min = parse_number<double>(parts[1], "bbox minlat");
      bbox.lon_max = parse_number<double>(parts[2], "bbox maxlon");
      bbox.lat_max = parse_number<double>(parts[3], "bbox maxlat");
      const auto model = load(plan_model);
      const StKeyConfig config{plan_prefix, plan_resolution, 0};
      const auto plan = plan_query(config, model, bbox, parse_utc_timestamp(plan_from),
                                   parse_utc_timestamp(plan_to), plan_max);
      out << (plan_json ? plan.to_json() : plan.to_text());
    } else if (*syn_cmd) {
      auto spec = MixtureSpec::from_json(read_file(syn_spec));
      if (seed_opt->count() > 0) spec.seed = syn_seed;
      write_file_atomic(syn_output, write_points_csv(synth_mixture(spec, syn_n)));
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace bgh::cli
