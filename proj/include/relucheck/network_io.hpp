#pragma once

#include "relucheck/network.hpp"

#include <string>

namespace relucheck {

/// Parses the textual .nnet interchange format (header comment lines
/// starting with //, then layer counts, sizes, a symmetry flag, input
/// minima/maxima, per-node means and ranges with one trailing scalar each
/// for the outputs, then row-major weights and biases per layer).
/// Malformed input throws Error with the offending line number.
Network parse_nnet(const std::string &text);
Network load_nnet(const std::string &path);

/// JSON network description (format 1). Field names: "layers" (list of
/// {"weights": [[...]], "bias": [...]}), "input_mean", "input_range",
/// optional "output_mean", "output_range", "output_relu", "convention",
/// "input_min", "input_max". Errors name the offending field.
Network parse_network_json(const std::string &text);
std::string serialize_network_json(const Network &net);

/// Dispatches on file extension: ".nnet" or ".json".
Network load_network(const std::string &path);
void save_network_json(const Network &net, const std::string &path);

/// Stable content hash of the network parameters (architecture, weights,
/// biases, normalization); used to tie databases and manifests to a net.
std::string network_hash(const Network &net);

} // namespace relucheck
