#include "relucheck/analysis.hpp"

#include "relucheck/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace relucheck {

void CEDatabase::validate_against(const Network &net) const {
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto &rec = records[i];
    const std::string where = "record " + std::to_string(i);
    if (rec.seed_id < 0 ||
        rec.seed_id >= static_cast<int>(seeds.size()))
      throw Error(where + ": seed_id " + std::to_string(rec.seed_id) +
                  " out of range");
    const Vector &seed = seeds[static_cast<std::size_t>(rec.seed_id)];
    if (rec.noise.size() != seed.size())
      throw Error(where + ": noise vector size does not match the seed");
    const Vector input = seed + rec.noise;
    const int cls = classify(net, input);
    if (cls != rec.observed_class)
      throw Error(where + ": network answers class " + std::to_string(cls) +
                  ", record claims " + std::to_string(rec.observed_class));
    if (rec.observed_class == rec.true_class)
      throw Error(where + ": observed class equals the true class — not a "
                          "misclassification");
    if (classify(net, seed) != rec.true_class)
      throw Error(where + ": seed does not classify to the recorded true "
                          "class");
    // Noise must stay inside the recorded level's box.
    for (Index n = 0; n < seed.size(); ++n) {
      const double limit =
          std::abs(seed(n)) * (rec.noise_percent / 100.0);
      const double tol = 1e-9 * (1.0 + std::abs(seed(n)));
      if (std::abs(rec.noise(n)) > limit + tol)
        throw Error(where + ": noise on node " + std::to_string(n) +
                    " exceeds the " + std::to_string(rec.noise_percent) +
                    "% level");
    }
  }
}

BiasReport bias_report(const CEDatabase &db, double ratio_threshold) {
  if (!(ratio_threshold > 0.0))
    throw Error("bias ratio threshold must be positive");
  BiasReport r;
  r.ratio_threshold = ratio_threshold;

  int classes = 0;
  std::set<int> true_classes;
  for (const auto &rec : db.records) {
    if (rec.true_class < 0 || rec.observed_class < 0)
      throw Error("bias report: negative class index in database");
    classes = std::max(classes,
                       std::max(rec.true_class, rec.observed_class) + 1);
    true_classes.insert(rec.true_class);
  }
  r.class_count = classes;
  r.counts = Matrix::Zero(classes, classes);
  for (const auto &rec : db.records)
    r.counts(rec.true_class, rec.observed_class) += 1.0;

  r.sufficient = !db.records.empty() && true_classes.size() >= 2;
  if (!r.sufficient)
    return r;

  for (int a = 0; a < classes; ++a) {
    double out_of = 0.0, into = 0.0;
    for (int b = 0; b < classes; ++b) {
      out_of += r.counts(a, b);
      into += r.counts(b, a);
    }
    if (into > 0.0 && out_of / into < ratio_threshold)
      r.biased_toward.push_back(a);
  }
  return r;
}

SensitivityReport sensitivity_report(const CEDatabase &db, int bins,
                                     double sign_threshold) {
  if (bins < 1)
    throw Error("sensitivity report needs at least one histogram bin");
  if (sign_threshold < 0.0 || sign_threshold > 1.0)
    throw Error("sign threshold must lie in [0, 1]");
  SensitivityReport rep;
  rep.bins = bins;
  rep.sign_threshold = sign_threshold;
  rep.sufficient = !db.records.empty();

  Index dim = 0;
  if (!db.seeds.empty())
    dim = db.seeds.front().size();
  else if (!db.records.empty())
    dim = db.records.front().noise.size();
  rep.nodes.resize(static_cast<std::size_t>(dim));
  if (db.records.empty())
    return rep;

  const double n = static_cast<double>(db.records.size());
  for (Index node = 0; node < dim; ++node) {
    NodeSensitivity &ns = rep.nodes[static_cast<std::size_t>(node)];
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const auto &rec : db.records) {
      if (rec.noise.size() != dim)
        throw Error("sensitivity report: record noise size differs from the "
                    "seed dimension");
      const double v = rec.noise(node);
      if (v > 0.0)
        ns.fraction_positive += 1.0;
      else if (v < 0.0)
        ns.fraction_negative += 1.0;
      else
        ns.fraction_zero += 1.0;
      if (first) {
        lo = hi = v;
        first = false;
      } else {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    ns.fraction_positive /= n;
    ns.fraction_negative /= n;
    ns.fraction_zero /= n;
    ns.insensitive_to_positive = ns.fraction_positive < sign_threshold;
    ns.insensitive_to_negative = ns.fraction_negative < sign_threshold;
    ns.hist_lo = lo;
    ns.hist_hi = hi;
    ns.histogram.assign(static_cast<std::size_t>(bins), 0);
    for (const auto &rec : db.records) {
      const double v = rec.noise(node);
      long long idx = 0;
      if (hi > lo)
        idx = std::min<long long>(
            bins - 1,
            static_cast<long long>((v - lo) / (hi - lo) * bins));
      ++ns.histogram[static_cast<std::size_t>(idx)];
    }
  }
  return rep;
}

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

ordered_json vector_to_json(const Vector &v) {
  ordered_json a = ordered_json::array();
  for (Index i = 0; i < v.size(); ++i)
    a.push_back(v(i));
  return a;
}

Vector json_to_vector(const json &j, const std::string &context) {
  if (!j.is_array())
    throw Error(context + ": expected an array of numbers");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw Error(context + "[" + std::to_string(i) + "]: expected a number");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

} // namespace

std::string serialize_cedb(const CEDatabase &db) {
  ordered_json j;
  j["format"] = 1;
  j["net_hash"] = db.net_hash;
  j["property_hash"] = db.property_hash;
  j["engine"] = db.engine;
  j["created_at"] = db.created_at;
  j["seeds"] = ordered_json::array();
  for (const auto &s : db.seeds)
    j["seeds"].push_back(vector_to_json(s));
  j["records"] = ordered_json::array();
  for (const auto &rec : db.records) {
    ordered_json r;
    r["seed_id"] = rec.seed_id;
    r["true_class"] = rec.true_class;
    r["observed_class"] = rec.observed_class;
    r["noise"] = vector_to_json(rec.noise);
    r["noise_percent"] = rec.noise_percent;
    j["records"].push_back(std::move(r));
  }
  return j.dump(2) + "\n";
}

CEDatabase parse_cedb(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception &e) {
    throw Error(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object())
    throw Error("database file: expected a JSON object");
  if (!j.contains("format") || !j["format"].is_number_integer() ||
      j["format"].get<int>() != 1)
    throw Error("database file: unsupported format (expected 1)");

  CEDatabase db;
  auto str_field = [&](const char *key) -> std::string {
    if (!j.contains(key))
      return {};
    if (!j[key].is_string())
      throw Error(std::string(key) + ": expected a string");
    return j[key].get<std::string>();
  };
  db.net_hash = str_field("net_hash");
  db.property_hash = str_field("property_hash");
  db.engine = str_field("engine");
  db.created_at = str_field("created_at");

  if (!j.contains("seeds") || !j["seeds"].is_array())
    throw Error("database file: missing \"seeds\" array");
  for (std::size_t i = 0; i < j["seeds"].size(); ++i)
    db.seeds.push_back(
        json_to_vector(j["seeds"][i], "seeds[" + std::to_string(i) + "]"));

  if (!j.contains("records") || !j["records"].is_array())
    throw Error("database file: missing \"records\" array");
  for (std::size_t i = 0; i < j["records"].size(); ++i) {
    const auto &rj = j["records"][i];
    const std::string ctx = "records[" + std::to_string(i) + "]";
    if (!rj.is_object())
      throw Error(ctx + ": expected an object");
    auto int_field = [&](const char *key) {
      if (!rj.contains(key) || !rj[key].is_number_integer())
        throw Error(ctx + ": missing integer \"" + key + "\"");
      return rj[key].get<int>();
    };
    CERecord rec;
    rec.seed_id = int_field("seed_id");
    rec.true_class = int_field("true_class");
    rec.observed_class = int_field("observed_class");
    if (!rj.contains("noise"))
      throw Error(ctx + ": missing \"noise\"");
    rec.noise = json_to_vector(rj["noise"], ctx + ".noise");
    if (!rj.contains("noise_percent") || !rj["noise_percent"].is_number())
      throw Error(ctx + ": missing numeric \"noise_percent\"");
    rec.noise_percent = rj["noise_percent"].get<double>();
    if (rec.seed_id < 0 ||
        rec.seed_id >= static_cast<int>(db.seeds.size()))
      throw Error(ctx + ": seed_id out of range");
    db.records.push_back(std::move(rec));
  }
  return db;
}

CEDatabase load_cedb(const std::string &path, const Network *revalidate) {
  CEDatabase db;
  try {
    db = parse_cedb(read_file(path));
  } catch (const Error &e) {
    throw Error(path + ": " + e.what());
  }
  if (revalidate) {
    try {
      db.validate_against(*revalidate);
    } catch (const Error &e) {
      throw Error(path + ": rejected by the revalidation gate: " + e.what());
    }
  }
  return db;
}

void save_cedb(const CEDatabase &db, const std::string &path) {
  write_file(path, serialize_cedb(db));
}

std::string cedb_to_csv(const CEDatabase &db) {
  std::ostringstream out;
  out << "# net_hash=" << db.net_hash << " property_hash=" << db.property_hash
      << " engine=" << db.engine << " created_at=" << db.created_at << "\n";
  for (std::size_t i = 0; i < db.seeds.size(); ++i) {
    out << "# seed " << i;
    for (Index n = 0; n < db.seeds[i].size(); ++n)
      out << ' ' << fmt_double(db.seeds[i](n));
    out << "\n";
  }
  const Index dim = db.seeds.empty() ? 0 : db.seeds.front().size();
  out << "seed_id,true_class,observed_class,noise_percent";
  for (Index n = 0; n < dim; ++n)
    out << ",noise_" << n;
  out << "\n";
  for (const auto &rec : db.records) {
    out << rec.seed_id << ',' << rec.true_class << ',' << rec.observed_class
        << ',' << fmt_double(rec.noise_percent);
    for (Index n = 0; n < rec.noise.size(); ++n)
      out << ',' << fmt_double(rec.noise(n));
    out << "\n";
  }
  return out.str();
}

CEDatabase cedb_from_csv(const std::string &text) {
  CEDatabase db;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string word;
      meta >> word;
      if (word == "seed") {
        std::size_t idx = 0;
        meta >> idx;
        std::vector<double> vals;
        double v = 0.0;
        while (meta >> v)
          vals.push_back(v);
        if (idx != db.seeds.size())
          throw Error("line " + std::to_string(line_no) +
                      ": seeds must appear in order");
        db.seeds.push_back(
            Eigen::Map<Vector>(vals.data(), static_cast<Index>(vals.size())));
      } else {
        // Metadata line: key=value pairs.
        std::istringstream kv(line.substr(1));
        std::string pair;
        while (kv >> pair) {
          const auto eq = pair.find('=');
          if (eq == std::string::npos)
            continue;
          const std::string key = pair.substr(0, eq);
          const std::string val = pair.substr(eq + 1);
          if (key == "net_hash")
            db.net_hash = val;
          else if (key == "property_hash")
            db.property_hash = val;
          else if (key == "engine")
            db.engine = val;
          else if (key == "created_at")
            db.created_at = val;
        }
      }
      continue;
    }
    if (!header_seen) {
      if (line.rfind("seed_id,", 0) != 0)
        throw Error("line " + std::to_string(line_no) +
                    ": expected the CSV header");
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const auto comma = line.find(',', pos);
      cells.push_back(line.substr(
          pos, comma == std::string::npos ? std::string::npos : comma - pos));
      if (comma == std::string::npos)
        break;
      pos = comma + 1;
    }
    if (cells.size() < 4)
      throw Error("line " + std::to_string(line_no) + ": too few columns");
    CERecord rec;
    try {
      rec.seed_id = std::stoi(cells[0]);
      rec.true_class = std::stoi(cells[1]);
      rec.observed_class = std::stoi(cells[2]);
      rec.noise_percent = std::stod(cells[3]);
      rec.noise.resize(static_cast<Index>(cells.size()) - 4);
      for (std::size_t c = 4; c < cells.size(); ++c)
        rec.noise(static_cast<Index>(c) - 4) = std::stod(cells[c]);
    } catch (const std::exception &) {
      throw Error("line " + std::to_string(line_no) + ": malformed number");
    }
    if (rec.seed_id < 0 || rec.seed_id >= static_cast<int>(db.seeds.size()))
      throw Error("line " + std::to_string(line_no) + ": seed_id out of range");
    db.records.push_back(std::move(rec));
  }
  if (!header_seen)
    throw Error("CSV database: header line not found");
  return db;
}

std::string bias_report_json(const BiasReport &r) {
  ordered_json j;
  j["class_count"] = r.class_count;
  j["sufficient"] = r.sufficient;
  j["verdict"] = r.sufficient
                     ? (r.biased_toward.empty() ? "no bias detected"
                                                : "biased")
                     : "insufficient data";
  j["ratio_threshold"] = r.ratio_threshold;
  j["biased_toward"] = r.biased_toward;
  j["counts"] = ordered_json::array();
  for (int a = 0; a < r.class_count; ++a) {
    ordered_json row = ordered_json::array();
    for (int b = 0; b < r.class_count; ++b)
      row.push_back(static_cast<long long>(r.counts(a, b)));
    j["counts"].push_back(std::move(row));
  }
  return j.dump(2) + "\n";
}

std::string bias_report_csv(const BiasReport &r) {
  std::ostringstream out;
  out << "true_class,observed_class,count\n";
  for (int a = 0; a < r.class_count; ++a)
    for (int b = 0; b < r.class_count; ++b)
      if (a != b)
        out << a << ',' << b << ',' << static_cast<long long>(r.counts(a, b))
            << "\n";
  return out.str();
}

std::string sensitivity_report_json(const SensitivityReport &r) {
  ordered_json j;
  j["bins"] = r.bins;
  j["sign_threshold"] = r.sign_threshold;
  j["sufficient"] = r.sufficient;
  j["nodes"] = ordered_json::array();
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    const auto &ns = r.nodes[i];
    ordered_json nj;
    nj["node"] = i;
    nj["fraction_positive"] = ns.fraction_positive;
    nj["fraction_negative"] = ns.fraction_negative;
    nj["fraction_zero"] = ns.fraction_zero;
    nj["insensitive_to_positive"] = ns.insensitive_to_positive;
    nj["insensitive_to_negative"] = ns.insensitive_to_negative;
    nj["hist_lo"] = ns.hist_lo;
    nj["hist_hi"] = ns.hist_hi;
    nj["histogram"] = ns.histogram;
    j["nodes"].push_back(std::move(nj));
  }
  return j.dump(2) + "\n";
}

std::string sensitivity_report_csv(const SensitivityReport &r) {
  std::ostringstream out;
  out << "node,bin,bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    const auto &ns = r.nodes[i];
    const int bins = static_cast<int>(ns.histogram.size());
    for (int b = 0; b < bins; ++b) {
      const double w = bins > 0 ? (ns.hist_hi - ns.hist_lo) / bins : 0.0;
      out << i << ',' << b << ',' << fmt_double(ns.hist_lo + w * b) << ','
          << fmt_double(b + 1 == bins ? ns.hist_hi : ns.hist_lo + w * (b + 1))
          << ',' << ns.histogram[static_cast<std::size_t>(b)] << "\n";
    }
  }
  return out.str();
}

} // namespace relucheck
