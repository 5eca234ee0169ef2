#include "relucheck/network.hpp"

#include <algorithm>
#include <cmath>

namespace relucheck {

std::string to_string(OutputConvention c) {
  switch (c) {
  case OutputConvention::Argmax:
    return "argmax";
  case OutputConvention::Argmin:
    return "argmin";
  case OutputConvention::Raw:
    return "raw";
  }
  throw Error("unknown output convention");
}

OutputConvention output_convention_from_string(const std::string &s) {
  if (s == "argmax")
    return OutputConvention::Argmax;
  if (s == "argmin")
    return OutputConvention::Argmin;
  if (s == "raw")
    return OutputConvention::Raw;
  throw Error("unknown output convention: \"" + s +
              "\" (expected argmax, argmin or raw)");
}

Index Network::input_size() const {
  if (weights.empty())
    throw Error("network has no layers");
  return weights.front().cols();
}

Index Network::output_size() const {
  if (weights.empty())
    throw Error("network has no layers");
  return weights.back().rows();
}

std::vector<Index> Network::layer_sizes() const {
  std::vector<Index> sizes;
  sizes.push_back(input_size());
  for (const auto &w : weights)
    sizes.push_back(w.rows());
  return sizes;
}

long long Network::parameter_count() const {
  long long n = 0;
  for (std::size_t k = 0; k < weights.size(); ++k)
    n += static_cast<long long>(weights[k].rows()) * weights[k].cols() +
         biases[k].size();
  return n;
}

Box Network::domain() const {
  if (!has_domain())
    throw Error("network declares no input domain");
  return Box(input_min, input_max);
}

void Network::validate() const {
  if (weights.empty())
    throw Error("network has no layers");
  if (weights.size() != biases.size())
    throw Error("layer count mismatch between weights and biases");
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k].rows() == 0 || weights[k].cols() == 0)
      throw Error("layer " + std::to_string(k) + " is empty");
    if (biases[k].size() != weights[k].rows())
      throw Error("layer " + std::to_string(k) + ": bias size " +
                  std::to_string(biases[k].size()) + " != row count " +
                  std::to_string(weights[k].rows()));
    if (k + 1 < weights.size() && weights[k + 1].cols() != weights[k].rows())
      throw Error("layer " + std::to_string(k + 1) + ": expects " +
                  std::to_string(weights[k + 1].cols()) +
                  " inputs but previous layer emits " +
                  std::to_string(weights[k].rows()));
    if (!weights[k].allFinite() || !biases[k].allFinite())
      throw Error("layer " + std::to_string(k) + " has non-finite parameters");
  }
  if (input_mean.size() != input_size() || input_range.size() != input_size())
    throw Error("input normalization vectors must match the input size");
  if (!input_mean.allFinite() || !input_range.allFinite())
    throw Error("input normalization has non-finite entries");
  for (Index i = 0; i < input_range.size(); ++i)
    if (input_range(i) == 0.0)
      throw Error("input_range is zero at node " + std::to_string(i));
  if (!std::isfinite(output_mean) || !std::isfinite(output_range))
    throw Error("output normalization is non-finite");
  if (output_range == 0.0)
    throw Error("output_range is zero");
  if (input_min.size() != input_max.size())
    throw Error("input_min and input_max differ in size");
  if (has_domain()) {
    if (input_min.size() != input_size())
      throw Error("declared input domain must match the input size");
    for (Index i = 0; i < input_min.size(); ++i)
      if (input_min(i) > input_max(i))
        throw Error("declared input domain inverted at node " +
                    std::to_string(i));
  }
}

Vector normalize_input(const Network &net, const Vector &x) {
  if (x.size() != net.input_size())
    throw Error("input has " + std::to_string(x.size()) +
                " nodes, network expects " +
                std::to_string(net.input_size()));
  return (x - net.input_mean).cwiseQuotient(net.input_range);
}

namespace {

// One affine layer, row by row: bias first, then inputs in ascending index
// order. forward() and forward_interval() must keep this exact accumulation
// order so a degenerate box propagates bit-identically to a point.
Vector affine(const Matrix &w, const Vector &b, const Vector &x) {
  Vector out(w.rows());
  for (Index j = 0; j < w.rows(); ++j) {
    double acc = b(j);
    for (Index i = 0; i < w.cols(); ++i)
      acc += w(j, i) * x(i);
    out(j) = acc;
  }
  return out;
}

void affine_interval(const Matrix &w, const Vector &b, const Vector &lo,
                     const Vector &hi, Vector &out_lo, Vector &out_hi) {
  out_lo.resize(w.rows());
  out_hi.resize(w.rows());
  for (Index j = 0; j < w.rows(); ++j) {
    double acc_lo = b(j);
    double acc_hi = b(j);
    for (Index i = 0; i < w.cols(); ++i) {
      const double a = w(j, i) * lo(i);
      const double c = w(j, i) * hi(i);
      acc_lo += std::min(a, c);
      acc_hi += std::max(a, c);
    }
    out_lo(j) = acc_lo;
    out_hi(j) = acc_hi;
  }
}

} // namespace

Vector forward(const Network &net, const Vector &x) {
  Vector cur = normalize_input(net, x);
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    cur = affine(net.weights[k], net.biases[k], cur);
    const bool hidden = k + 1 < net.weights.size();
    if (hidden || net.output_relu)
      cur = cur.cwiseMax(0.0);
    if (!cur.allFinite())
      throw Error("non-finite activation at layer " + std::to_string(k) +
                  " (corrupt weights or overflow)");
  }
  Vector out(cur.size());
  for (Index j = 0; j < cur.size(); ++j)
    out(j) = cur(j) * net.output_range + net.output_mean;
  return out;
}

int decide(const Network &net, const Vector &scores) {
  if (scores.size() != net.output_size())
    throw Error("score vector size does not match the network output size");
  if (net.convention == OutputConvention::Raw)
    throw Error("network has no class convention (raw outputs)");
  // Ties resolve to the lowest index: strict comparison while scanning up.
  Index best = 0;
  for (Index j = 1; j < scores.size(); ++j) {
    if (net.convention == OutputConvention::Argmax ? scores(j) > scores(best)
                                                   : scores(j) < scores(best))
      best = j;
  }
  return static_cast<int>(best);
}

int classify(const Network &net, const Vector &x) {
  return decide(net, forward(net, x));
}

Box forward_interval(const Network &net, const Box &box) {
  if (box.dim() != net.input_size())
    throw Error("box has " + std::to_string(box.dim()) +
                " nodes, network expects " +
                std::to_string(net.input_size()));
  Vector lo = normalize_input(net, box.lower);
  Vector hi = normalize_input(net, box.upper);
  for (Index i = 0; i < lo.size(); ++i)
    if (lo(i) > hi(i))
      std::swap(lo(i), hi(i)); // negative normalization range flips the interval
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    Vector nlo, nhi;
    affine_interval(net.weights[k], net.biases[k], lo, hi, nlo, nhi);
    const bool hidden = k + 1 < net.weights.size();
    if (hidden || net.output_relu) {
      nlo = nlo.cwiseMax(0.0);
      nhi = nhi.cwiseMax(0.0);
    }
    if (!nlo.allFinite() || !nhi.allFinite())
      throw Error("non-finite activation at layer " + std::to_string(k) +
                  " (corrupt weights or overflow)");
    lo = std::move(nlo);
    hi = std::move(nhi);
  }
  Vector out_lo(lo.size()), out_hi(hi.size());
  for (Index j = 0; j < lo.size(); ++j) {
    const double a = lo(j) * net.output_range + net.output_mean;
    const double b = hi(j) * net.output_range + net.output_mean;
    out_lo(j) = std::min(a, b);
    out_hi(j) = std::max(a, b);
  }
  return Box(out_lo, out_hi);
}

} // namespace relucheck
