#pragma once

#include "relucheck/network.hpp"
#include "relucheck/property.hpp"

#include <string>
#include <vector>

namespace relucheck {

/// One mined misclassification: at seeds[seed_id] + noise the network
/// answers observed_class instead of true_class.
struct CERecord {
  int seed_id = 0;
  int true_class = 0;
  int observed_class = 0;
  Vector noise;
  double noise_percent = 0.0;
};

struct CEDatabase {
  std::vector<Vector> seeds;
  std::vector<CERecord> records;

  // Provenance metadata.
  std::string net_hash;
  std::string property_hash;
  std::string engine;
  std::string created_at;

  /// Re-checks every record against `net`: the noisy input must reproduce
  /// observed_class, differ from true_class, and stay inside the record's
  /// noise box. Throws Error naming the first failing record.
  void validate_against(const Network &net) const;
};

/// Transition counts between true and observed classes. A class is flagged
/// as a bias target when traffic out of it is less than `ratio_threshold`
/// times the traffic into it.
struct BiasReport {
  int class_count = 0;
  Matrix counts; // counts(a, b): records with true a, observed b
  std::vector<int> biased_toward;
  bool sufficient = false; // needs records spanning >= 2 true classes
  double ratio_threshold = 0.25;
};

BiasReport bias_report(const CEDatabase &db, double ratio_threshold = 0.25);

struct NodeSensitivity {
  double fraction_positive = 0.0;
  double fraction_negative = 0.0;
  double fraction_zero = 0.0;
  /// Set when the matching sign's fraction is below the sign threshold:
  /// misclassification is essentially never driven by noise of that sign.
  bool insensitive_to_positive = false;
  bool insensitive_to_negative = false;
  std::vector<long long> histogram;
  double hist_lo = 0.0;
  double hist_hi = 0.0;
};

struct SensitivityReport {
  std::vector<NodeSensitivity> nodes;
  int bins = 20;
  double sign_threshold = 0.05;
  bool sufficient = false;
};

SensitivityReport sensitivity_report(const CEDatabase &db, int bins = 20,
                                     double sign_threshold = 0.05);

std::string serialize_cedb(const CEDatabase &db);
CEDatabase parse_cedb(const std::string &text);
/// When `revalidate` is given, a database that fails validate_against is
/// rejected (the import gate).
CEDatabase load_cedb(const std::string &path,
                     const Network *revalidate = nullptr);
void save_cedb(const CEDatabase &db, const std::string &path);

/// CSV round-trips bit-exactly: doubles are printed with 17 significant
/// digits. Seeds travel in a comment header so one file is self-contained.
std::string cedb_to_csv(const CEDatabase &db);
CEDatabase cedb_from_csv(const std::string &text);

std::string bias_report_json(const BiasReport &r);
std::string bias_report_csv(const BiasReport &r);
std::string sensitivity_report_json(const SensitivityReport &r);
std::string sensitivity_report_csv(const SensitivityReport &r);

} // namespace relucheck
