#include "relucheck/network_io.hpp"

#include "relucheck/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <sstream>

namespace relucheck {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

struct LineReader {
  std::istringstream in;
  int line_no = 0;

  explicit LineReader(const std::string &text) : in(text) {}

  static bool blank_or_comment(const std::string &s) {
    std::size_t i = 0;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
      ++i;
    if (i == s.size())
      return true;
    return s.compare(i, 2, "//") == 0;
  }

  /// Next content line, or false at end of input.
  bool next(std::string &out) {
    std::string s;
    while (std::getline(in, s)) {
      ++line_no;
      if (!s.empty() && s.back() == '\r')
        s.pop_back();
      if (blank_or_comment(s))
        continue;
      out = s;
      return true;
    }
    return false;
  }
};

std::vector<double> parse_csv_numbers(const std::string &line, int line_no) {
  std::vector<double> vals;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t comma = line.find(',', pos);
    std::string tok = line.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    // Trim.
    std::size_t a = tok.find_first_not_of(" \t");
    std::size_t b = tok.find_last_not_of(" \t");
    if (a == std::string::npos) {
      // Empty token: allow the usual trailing comma, reject gaps inside.
      if (comma != std::string::npos && comma + 1 < line.size())
        throw Error("line " + std::to_string(line_no) +
                    ": empty value before a comma");
      if (comma == std::string::npos)
        break;
      pos = comma + 1;
      continue;
    }
    tok = tok.substr(a, b - a + 1);
    try {
      std::size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size())
        throw std::invalid_argument(tok);
      vals.push_back(v);
    } catch (const std::exception &) {
      throw Error("line " + std::to_string(line_no) + ": non-numeric token \"" +
                  tok + "\"");
    }
    if (comma == std::string::npos)
      break;
    pos = comma + 1;
  }
  return vals;
}

std::vector<double> expect_numbers(LineReader &r, std::size_t count,
                                   const std::string &what) {
  std::string line;
  if (!r.next(line))
    throw Error("unexpected end of file while reading " + what);
  auto vals = parse_csv_numbers(line, r.line_no);
  if (vals.size() != count)
    throw Error("line " + std::to_string(r.line_no) + ": expected " +
                std::to_string(count) + " values for " + what + ", got " +
                std::to_string(vals.size()));
  return vals;
}

long long expect_int(double v, int line_no, const std::string &what) {
  long long n = static_cast<long long>(v);
  if (static_cast<double>(n) != v)
    throw Error("line " + std::to_string(line_no) + ": " + what +
                " must be an integer");
  return n;
}

} // namespace

Network parse_nnet(const std::string &text) {
  LineReader r(text);

  auto header = expect_numbers(r, 4, "the layer-count header");
  const int header_line = r.line_no;
  const long long num_layers =
      expect_int(header[0], header_line, "layer count");
  const long long input_size = expect_int(header[1], header_line, "input size");
  const long long output_size =
      expect_int(header[2], header_line, "output size");
  expect_int(header[3], header_line, "maximum layer size");
  if (num_layers < 1)
    throw Error("line " + std::to_string(header_line) +
                ": layer count must be at least 1");
  if (input_size < 1 || output_size < 1)
    throw Error("line " + std::to_string(header_line) +
                ": input and output sizes must be at least 1");

  auto size_vals = expect_numbers(r, static_cast<std::size_t>(num_layers) + 1,
                                  "the layer sizes");
  std::vector<long long> sizes;
  for (double v : size_vals)
    sizes.push_back(expect_int(v, r.line_no, "layer size"));
  if (sizes.front() != input_size)
    throw Error("line " + std::to_string(r.line_no) +
                ": first layer size disagrees with the declared input size");
  if (sizes.back() != output_size)
    throw Error("line " + std::to_string(r.line_no) +
                ": last layer size disagrees with the declared output size");
  for (long long s : sizes)
    if (s < 1)
      throw Error("line " + std::to_string(r.line_no) +
                  ": layer sizes must be at least 1");

  auto sym = expect_numbers(r, 1, "the symmetry flag");
  if (expect_int(sym[0], r.line_no, "symmetry flag") != 0)
    throw Error("line " + std::to_string(r.line_no) +
                ": symmetric networks are not supported");

  auto mins = expect_numbers(r, static_cast<std::size_t>(input_size),
                             "the input minima");
  auto maxes = expect_numbers(r, static_cast<std::size_t>(input_size),
                              "the input maxima");
  // Means and ranges carry one extra value: the scalar output normalization.
  auto means = expect_numbers(r, static_cast<std::size_t>(input_size) + 1,
                              "the normalization means");
  auto ranges = expect_numbers(r, static_cast<std::size_t>(input_size) + 1,
                               "the normalization ranges");

  Network net;
  net.convention = OutputConvention::Argmin; // the format's native use
  net.input_mean = Eigen::Map<Vector>(means.data(), input_size);
  net.input_range = Eigen::Map<Vector>(ranges.data(), input_size);
  net.output_mean = means.back();
  net.output_range = ranges.back();
  net.input_min = Eigen::Map<Vector>(mins.data(), input_size);
  net.input_max = Eigen::Map<Vector>(maxes.data(), input_size);

  for (long long k = 0; k < num_layers; ++k) {
    const long long rows = sizes[k + 1];
    const long long cols = sizes[k];
    Matrix w(rows, cols);
    for (long long j = 0; j < rows; ++j) {
      auto row = expect_numbers(r, static_cast<std::size_t>(cols),
                                "weight row " + std::to_string(j) +
                                    " of layer " + std::to_string(k + 1));
      for (long long i = 0; i < cols; ++i)
        w(j, i) = row[i];
    }
    Vector b(rows);
    for (long long j = 0; j < rows; ++j) {
      auto bias = expect_numbers(r, 1,
                                 "bias " + std::to_string(j) + " of layer " +
                                     std::to_string(k + 1));
      b(j) = bias[0];
    }
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }

  std::string extra;
  if (r.next(extra))
    throw Error("line " + std::to_string(r.line_no) +
                ": trailing data after the last layer");

  net.validate();
  return net;
}

Network load_nnet(const std::string &path) {
  try {
    return parse_nnet(read_file(path));
  } catch (const Error &e) {
    throw Error(path + ": " + e.what());
  }
}

namespace {

const json &require_field(const json &j, const std::string &key,
                          const std::string &context) {
  if (!j.contains(key))
    throw Error(context + ": missing field \"" + key + "\"");
  return j.at(key);
}

Vector number_array(const json &j, const std::string &context) {
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

} // namespace

Network parse_network_json(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception &e) {
    throw Error(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object())
    throw Error("network file: expected a JSON object");
  const auto &fmt = require_field(j, "format", "network file");
  if (!fmt.is_number_integer() || fmt.get<int>() != 1)
    throw Error("network file: unsupported format (expected 1)");

  Network net;
  const auto &layers = require_field(j, "layers", "network file");
  if (!layers.is_array() || layers.empty())
    throw Error("layers: expected a non-empty array");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const std::string ctx = "layers[" + std::to_string(k) + "]";
    const auto &layer = layers[k];
    if (!layer.is_object())
      throw Error(ctx + ": expected an object");
    const auto &wj = require_field(layer, "weights", ctx);
    if (!wj.is_array() || wj.empty())
      throw Error(ctx + ".weights: expected a non-empty array of rows");
    const std::size_t rows = wj.size();
    std::size_t cols = 0;
    Matrix w;
    for (std::size_t row = 0; row < rows; ++row) {
      Vector rv = number_array(wj[row], ctx + ".weights[" +
                                            std::to_string(row) + "]");
      if (row == 0) {
        cols = static_cast<std::size_t>(rv.size());
        if (cols == 0)
          throw Error(ctx + ".weights[0]: rows must be non-empty");
        w.resize(rows, cols);
      } else if (static_cast<std::size_t>(rv.size()) != cols) {
        throw Error(ctx + ".weights[" + std::to_string(row) +
                    "]: row length differs from row 0");
      }
      w.row(static_cast<Index>(row)) = rv.transpose();
    }
    Vector b = number_array(require_field(layer, "bias", ctx), ctx + ".bias");
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }

  net.input_mean =
      number_array(require_field(j, "input_mean", "network file"), "input_mean");
  net.input_range = number_array(require_field(j, "input_range", "network file"),
                                 "input_range");
  if (j.contains("output_mean")) {
    if (!j["output_mean"].is_number())
      throw Error("output_mean: expected a number");
    net.output_mean = j["output_mean"].get<double>();
  }
  if (j.contains("output_range")) {
    if (!j["output_range"].is_number())
      throw Error("output_range: expected a number");
    net.output_range = j["output_range"].get<double>();
  }
  if (j.contains("output_relu")) {
    if (!j["output_relu"].is_boolean())
      throw Error("output_relu: expected a boolean");
    net.output_relu = j["output_relu"].get<bool>();
  }
  if (j.contains("convention")) {
    if (!j["convention"].is_string())
      throw Error("convention: expected a string");
    net.convention = output_convention_from_string(j["convention"]);
  }
  const bool has_min = j.contains("input_min");
  const bool has_max = j.contains("input_max");
  if (has_min != has_max)
    throw Error("input_min and input_max must be given together");
  if (has_min) {
    net.input_min = number_array(j["input_min"], "input_min");
    net.input_max = number_array(j["input_max"], "input_max");
  }

  net.validate();
  return net;
}

std::string serialize_network_json(const Network &net) {
  ordered_json j;
  j["format"] = 1;
  j["convention"] = to_string(net.convention);
  j["layers"] = ordered_json::array();
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    ordered_json layer;
    ordered_json rows = ordered_json::array();
    for (Index r = 0; r < net.weights[k].rows(); ++r) {
      ordered_json row = ordered_json::array();
      for (Index c = 0; c < net.weights[k].cols(); ++c)
        row.push_back(net.weights[k](r, c));
      rows.push_back(std::move(row));
    }
    layer["weights"] = std::move(rows);
    ordered_json bias = ordered_json::array();
    for (Index r = 0; r < net.biases[k].size(); ++r)
      bias.push_back(net.biases[k](r));
    layer["bias"] = std::move(bias);
    j["layers"].push_back(std::move(layer));
  }
  auto vec = [](const Vector &v) {
    ordered_json a = ordered_json::array();
    for (Index i = 0; i < v.size(); ++i)
      a.push_back(v(i));
    return a;
  };
  j["input_mean"] = vec(net.input_mean);
  j["input_range"] = vec(net.input_range);
  j["output_mean"] = net.output_mean;
  j["output_range"] = net.output_range;
  j["output_relu"] = net.output_relu;
  if (net.has_domain()) {
    j["input_min"] = vec(net.input_min);
    j["input_max"] = vec(net.input_max);
  }
  return j.dump(2) + "\n";
}

Network load_network(const std::string &path) {
  auto ends_with = [&](const char *suffix) {
    const std::size_t n = std::strlen(suffix);
    return path.size() >= n && path.compare(path.size() - n, n, suffix) == 0;
  };
  if (ends_with(".nnet"))
    return load_nnet(path);
  if (ends_with(".json")) {
    try {
      return parse_network_json(read_file(path));
    } catch (const Error &e) {
      throw Error(path + ": " + e.what());
    }
  }
  throw Error(path + ": unknown network format (expected .nnet or .json)");
}

void save_network_json(const Network &net, const std::string &path) {
  write_file(path, serialize_network_json(net));
}

std::string network_hash(const Network &net) {
  std::string buf;
  auto put_u64 = [&buf](std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
      buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  auto put_double = [&put_u64](double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof(bits));
    put_u64(bits);
  };
  auto put_vector = [&put_u64, &put_double](const Vector &v) {
    put_u64(static_cast<std::uint64_t>(v.size()));
    for (Index i = 0; i < v.size(); ++i)
      put_double(v(i));
  };
  put_u64(static_cast<std::uint64_t>(net.weights.size()));
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    put_u64(static_cast<std::uint64_t>(net.weights[k].rows()));
    put_u64(static_cast<std::uint64_t>(net.weights[k].cols()));
    for (Index r = 0; r < net.weights[k].rows(); ++r)
      for (Index c = 0; c < net.weights[k].cols(); ++c)
        put_double(net.weights[k](r, c));
    put_vector(net.biases[k]);
  }
  put_vector(net.input_mean);
  put_vector(net.input_range);
  put_double(net.output_mean);
  put_double(net.output_range);
  buf.push_back(net.output_relu ? 1 : 0);
  buf.push_back(static_cast<char>(net.convention));
  put_vector(net.input_min);
  put_vector(net.input_max);
  return to_hex(fnv1a64(buf));
}

} // namespace relucheck
