// Copyright 2026 The mmsent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mmsent/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <sstream>
#include <vector>

#include "mmsent/error.hpp"

namespace mmsent::metrics {
namespace {

template <typename A, typename B>
void CheckLengths(std::span<A> a, std::span<B> b, const char* what) {
  if (a.size() != b.size()) {
    throw PreconditionError(std::string(what) + ": length mismatch (" + std::to_string(a.size()) +
                            " vs " + std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw PreconditionError(std::string(what) + ": empty input");
}

double Ratio(std::uint64_t num, std::uint64_t den) {
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionMatrix Confusion(std::span<const Label> predicted, std::span<const Label> truth) {
  CheckLengths(predicted, truth, "confusion");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = predicted[i] == Label::kPositive;
    if (truth[i] == Label::kPositive) {
      (p ? cm.tp : cm.fn) += 1;
    } else {
      (p ? cm.fp : cm.tn) += 1;
    }
  }
  return cm;
}

std::string FormatConfusion(const ConfusionMatrix& cm) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%-18s%14s%14s\n%-18s%14llu%14llu\n%-18s%14llu%14llu\n", "",
                "pred positive", "pred negative", "actual positive",
                static_cast<unsigned long long>(cm.tp), static_cast<unsigned long long>(cm.fn),
                "actual negative", static_cast<unsigned long long>(cm.fp),
                static_cast<unsigned long long>(cm.tn));
  return buf;
}

Prf1 PrecisionRecallF1(const ConfusionMatrix& cm) {
  Prf1 r;
  if (cm.tp + cm.fp == 0) {
    r.precision_undefined = true;
  } else {
    r.precision = Ratio(cm.tp, cm.tp + cm.fp);
  }
  if (cm.tp + cm.fn == 0) {
    r.recall_undefined = true;
  } else {
    r.recall = Ratio(cm.tp, cm.tp + cm.fn);
  }
  if (r.precision + r.recall > 0.0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  } else {
    r.f1_undefined = true;
  }
  return r;
}

double ScaleConfidence(double confidence) {
  if (!(confidence >= 0.0 && confidence <= 1.0)) {
    throw PreconditionError("confidence must lie in [0, 1], got " + std::to_string(confidence));
  }
  return 6.0 * confidence - 3.0;
}

double UnscaleSentiment(double sentiment) { return (sentiment + 3.0) / 6.0; }

double MeanAbsoluteError(std::span<const double> predicted, std::span<const double> truth) {
  CheckLengths(predicted, truth, "mae");
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) sum += std::abs(predicted[i] - truth[i]);
  return sum / static_cast<double>(truth.size());
}

Correlation Pearson(std::span<const double> predicted, std::span<const double> truth) {
  CheckLengths(predicted, truth, "pearson");
  if (truth.size() < 2) throw PreconditionError("pearson: need at least 2 values");
  const double n = static_cast<double>(truth.size());
  double mp = 0.0, mt = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    mp += predicted[i];
    mt += truth[i];
  }
  mp /= n;
  mt /= n;
  double spp = 0.0, stt = 0.0, spt = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double dp = predicted[i] - mp, dt = truth[i] - mt;
    spp += dp * dp;
    stt += dt * dt;
    spt += dp * dt;
  }
  Correlation c;
  if (spp == 0.0 || stt == 0.0) {
    c.undefined = true;
    return c;
  }
  c.value = std::clamp(spt / std::sqrt(spp * stt), -1.0, 1.0);
  return c;
}

int SentimentClass(double sentiment, int classes) {
  if (classes != 5 && classes != 7) {
    throw PreconditionError("multiclass accuracy supports 5 or 7 classes, got " +
                            std::to_string(classes));
  }
  const double bound = classes == 7 ? 3.0 : 2.0;
  return static_cast<int>(std::round(std::clamp(sentiment, -bound, bound)));
}

double MulticlassAccuracy(std::span<const double> predicted, std::span<const double> truth,
                          int classes) {
  CheckLengths(predicted, truth, "multiclass accuracy");
  std::array<std::uint64_t, 7> total{}, hit{};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = SentimentClass(truth[i], classes);
    const int p = SentimentClass(predicted[i], classes);
    total[t + 3] += 1;
    hit[t + 3] += (t == p);
  }
  double sum = 0.0;
  int present = 0;
  for (std::size_t c = 0; c < total.size(); ++c) {
    if (total[c] == 0) continue;
    sum += Ratio(hit[c], total[c]);
    ++present;
  }
  return sum / present;
}

BinaryAccuracy BinaryAccuracies(std::span<const Label> predicted, std::span<const Label> truth) {
  const ConfusionMatrix cm = Confusion(predicted, truth);
  BinaryAccuracy a;
  a.plain = Ratio(cm.tp + cm.tn, cm.total());
  double sum = 0.0;
  int present = 0;
  if (cm.tp + cm.fn > 0) {
    sum += Ratio(cm.tp, cm.tp + cm.fn);
    ++present;
  }
  if (cm.tn + cm.fp > 0) {
    sum += Ratio(cm.tn, cm.tn + cm.fp);
    ++present;
  }
  a.weighted = sum / present;
  return a;
}

MetricReport BuildReport(std::string name, std::span<const double> confidence,
                         std::span<const Label> predicted, std::span<const double> truth) {
  CheckLengths(confidence, truth, "report");
  CheckLengths(predicted, truth, "report");
  MetricReport r;
  r.name = std::move(name);
  r.count = truth.size();
  std::vector<Label> truth_labels;
  std::vector<double> sentiment;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    truth_labels.push_back(Binarize(truth[i]));
    sentiment.push_back(ScaleConfidence(confidence[i]));
  }
  r.confusion = Confusion(predicted, truth_labels);
  r.prf1 = PrecisionRecallF1(r.confusion);
  r.binary = BinaryAccuracies(predicted, truth_labels);
  r.mae = MeanAbsoluteError(sentiment, truth);
  if (truth.size() >= 2) {
    r.correlation = Pearson(sentiment, truth);
  } else {
    r.correlation.undefined = true;
  }
  r.acc5 = MulticlassAccuracy(sentiment, truth, 5);
  r.acc7 = MulticlassAccuracy(sentiment, truth, 7);
  return r;
}

std::string ToKeyValue(const MetricReport& r) {
  std::ostringstream os;
  char buf[64];
  auto put = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%.6f", v);
    os << r.name << '.' << key << '=' << buf << '\n';
  };
  auto flag = [&](const char* key, bool v) {
    os << r.name << '.' << key << '=' << (v ? "true" : "false") << '\n';
  };
  os << r.name << ".count=" << r.count << '\n';
  os << r.name << ".tp=" << r.confusion.tp << '\n';
  os << r.name << ".fn=" << r.confusion.fn << '\n';
  os << r.name << ".fp=" << r.confusion.fp << '\n';
  os << r.name << ".tn=" << r.confusion.tn << '\n';
  put("precision", r.prf1.precision);
  put("recall", r.prf1.recall);
  put("f1", r.prf1.f1);
  flag("prf1_degenerate", r.prf1.degenerate());
  put("mae", r.mae);
  put("correlation", r.correlation.value);
  flag("correlation_undefined", r.correlation.undefined);
  put("binary_accuracy", r.binary.plain);
  put("weighted_binary_accuracy", r.binary.weighted);
  put("acc5", r.acc5);
  put("acc7", r.acc7);
  return os.str();
}

std::string ToJson(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["count"] = r.count;
  j["confusion"] = {{"orientation", "actual-major"},
                    {"tp", r.confusion.tp},
                    {"fn", r.confusion.fn},
                    {"fp", r.confusion.fp},
                    {"tn", r.confusion.tn}};
  j["precision"] = r.prf1.precision;
  j["recall"] = r.prf1.recall;
  j["f1"] = r.prf1.f1;
  j["flags"] = {{"precision_undefined", r.prf1.precision_undefined},
                {"recall_undefined", r.prf1.recall_undefined},
                {"f1_undefined", r.prf1.f1_undefined},
                {"correlation_undefined", r.correlation.undefined}};
  j["mae"] = r.mae;
  j["correlation"] = r.correlation.value;
  j["binary_accuracy"] = r.binary.plain;
  j["weighted_binary_accuracy"] = r.binary.weighted;
  j["acc5"] = r.acc5;
  j["acc7"] = r.acc7;
  j["conventions"] = {{"acc5", "clamp to [-2, 2] then round"},
                      {"acc7", "round to nearest integer in [-3, 3]"},
                      {"sentiment_scaling", "6c - 3"}};
  return j.dump(2) + "\n";
}

}  // namespace mmsent::metrics
