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

// Acceptance gate: runs every criterion, prints one PASS/FAIL line each and
// exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mmsent/audio.hpp"
#include "mmsent/binary_io.hpp"
#include "mmsent/classifier.hpp"
#include "mmsent/codebook.hpp"
#include "mmsent/fusion.hpp"
#include "mmsent/metrics.hpp"
#include "mmsent/video.hpp"
#include "reference_counts.hpp"
#include "svm_oracle.hpp"
#include "test_util.hpp"

using namespace mmsent;
namespace fs = std::filesystem;

namespace {

// Collects failed checks for one criterion.
class Checker {
 public:
  void Expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    failed_ += !ok;
  }
  bool ok() const { return failed_ == 0; }
  std::string Summary() const {
    std::ostringstream os;
    os << checks_ - failed_ << "/" << checks_ << " checks";
    for (const auto& f : failures_) os << "; " << f;
    return os.str();
  }

 private:
  std::size_t checks_ = 0, failed_ = 0;
  std::vector<std::string> failures_;
};

std::string Fmt(const char* fmt, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, a, b, c);
  return buf;
}

std::string g_cli;

// --- 1: metric oracle ------------------------------------------------------

void MetricOracle(Checker& c) {
  for (const auto& row : testing::kReferenceRows) {
    const auto r = metrics::PrecisionRecallF1(row.counts);
    c.Expect(std::abs(r.precision - row.precision) <= 5e-4,
             std::string(row.name) + Fmt(" precision %.5f vs %.4f", r.precision, row.precision));
    c.Expect(std::abs(r.recall - row.recall) <= 5e-4,
             std::string(row.name) + Fmt(" recall %.5f vs %.4f", r.recall, row.recall));
    c.Expect(std::abs(r.f1 - row.f1) <= 5e-4,
             std::string(row.name) + Fmt(" f1 %.5f vs %.4f", r.f1, row.f1));
  }
}

// --- 2: fusion equivalence -------------------------------------------------

void FusionEquivalence(Checker& c) {
  using fusion::FusionWeight;
  using fusion::ThresholdRule;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (ThresholdRule rule : {ThresholdRule::kOneMinusTheta, ThresholdRule::kFixedHalf}) {
    int mismatches = 0;
    const double th0 = fusion::FusionThreshold(FusionWeight(0.0), rule);
    const double th1 = fusion::FusionThreshold(FusionWeight(1.0), rule);
    for (int i = 0; i < 1000; ++i) {
      const fusion::ScorePair p{"s", u(rng), u(rng), std::nullopt};
      mismatches += (fusion::ScoreLevelFuse(p, FusionWeight(0.0), rule).label == Label::kPositive) !=
                    (p.audio > th0);
      mismatches += (fusion::ScoreLevelFuse(p, FusionWeight(1.0), rule).label == Label::kPositive) !=
                    (p.video > th1);
    }
    c.Expect(mismatches == 0, std::string(fusion::ThresholdRuleName(rule)) +
                                  Fmt(" unimodal mismatches %.0f", mismatches));

    for (int trial = 0; trial < 50; ++trial) {
      std::vector<fusion::ScorePair> pairs;
      for (int i = 0; i < 60; ++i) {
        const Label y = i % 3 == 0 ? Label::kNegative : Label::kPositive;
        const double s = y == Label::kPositive ? 0.15 : -0.15;
        pairs.push_back({"s", std::clamp(u(rng) + s, 0.0, 1.0), std::clamp(u(rng) + s, 0.0, 1.0), y});
      }
      const fusion::ThetaSearch search = fusion::GridSearchTheta(pairs, rule);
      // Recount the balanced error at every grid point from scratch.
      auto error = [&](double theta) {
        const double th = rule == ThresholdRule::kOneMinusTheta ? 1.0 - theta : 0.5;
        double wrong[2] = {0, 0}, total[2] = {0, 0};
        for (const auto& p : pairs) {
          const int k = *p.truth == Label::kPositive ? 0 : 1;
          total[k] += 1;
          wrong[k] += (theta * p.video + (1.0 - theta) * p.audio > th) != (k == 0);
        }
        return 0.5 * (wrong[0] / total[0] + wrong[1] / total[1]);
      };
      const double chosen = error(search.best);
      for (double theta : fusion::ThetaGrid()) {
        c.Expect(chosen <= error(theta) + 1e-15, Fmt("theta %.1f beats chosen %.1f", theta, search.best));
      }
    }
  }
}

// --- 3: EM correctness -----------------------------------------------------

void EmCorrectness(Checker& c) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::uint32_t k = 2 + (seed * 5) % 7, d = 2 + (seed * 3) % 7;
    std::mt19937_64 rng(1000 + seed);
    std::uniform_real_distribution<double> mu(-12.0, 12.0), sd(0.4, 0.8);
    std::vector<std::vector<double>> means;
    double min_sep = 0.0;
    do {
      means.assign(k, std::vector<double>(d));
      for (auto& m : means) for (double& x : m) x = mu(rng);
      min_sep = 1e300;
      for (std::uint32_t a = 0; a < k; ++a) {
        for (std::uint32_t b = a + 1; b < k; ++b) {
          double s = 0.0;
          for (std::uint32_t j = 0; j < d; ++j) s += std::pow(means[a][j] - means[b][j], 2);
          min_sep = std::min(min_sep, std::sqrt(s));
        }
      }
    } while (min_sep < 6.0);
    const std::size_t per = 400;
    codebook::Matrix data(k * per, d);
    std::normal_distribution<double> z(0.0, 1.0);
    for (std::uint32_t m = 0; m < k; ++m) {
      std::vector<double> s(d);
      for (double& x : s) x = sd(rng);
      for (std::size_t i = 0; i < per; ++i) {
        for (std::uint32_t j = 0; j < d; ++j) data.row(m * per + i)[j] = means[m][j] + s[j] * z(rng);
      }
    }
    codebook::FitOptions opt;
    opt.K = k;
    const codebook::GmmFit fit = codebook::FitGmm(data, Modality::kAudio, seed, opt);
    const auto& h = fit.loglik_history;
    bool monotone = h.size() >= 2;
    for (std::size_t i = 1; i < h.size(); ++i) monotone &= h[i] >= h[i - 1] - 1e-9 * std::abs(h[i - 1]);
    c.Expect(monotone, Fmt("seed %.0f: log-likelihood decreased", seed));

    // Greedy matching is a valid permutation whenever every error is under
    // half the separation; check that it is one.
    std::vector<bool> used(k, false);
    double worst = 0.0;
    bool perm = true;
    for (const auto& truth : means) {
      double best = 1e300;
      std::size_t arg = 0;
      for (std::uint32_t m = 0; m < k; ++m) {
        double s = 0.0;
        for (std::uint32_t j = 0; j < d; ++j) s += std::pow(fit.codebook.mean(m)[j] - truth[j], 2);
        if (std::sqrt(s) < best) best = std::sqrt(s), arg = m;
      }
      perm &= !used[arg];
      used[arg] = true;
      worst = std::max(worst, best);
    }
    c.Expect(perm && worst <= 0.05 * min_sep,
             Fmt("seed %.0f: mean error %.3f vs separation %.3f", seed, worst, min_sep));
  }
}

// --- 4: encoding oracle ----------------------------------------------------

void EncodingOracle(Checker& c) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> w(0.2, 1.0), m(-2.0, 2.0), v(0.3, 2.0), xd(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::uint32_t k = 2 + trial % 7, d = 1 + trial % 6;
    std::vector<double> weights(k), means(k * d), vars(k * d);
    double total = 0.0;
    for (double& x : weights) total += (x = w(rng));
    for (double& x : weights) x /= total;
    for (double& x : means) x = m(rng);
    for (double& x : vars) x = v(rng);
    const codebook::GmmCodebook cb(Modality::kAudio, d, weights, means, vars);
    std::vector<double> x(d), post(k);
    for (double& e : x) e = xd(rng);
    cb.Posteriors(x, post);
    std::vector<long double> joint(k);
    long double evidence = 0.0L;
    for (std::uint32_t q = 0; q < k; ++q) {
      long double p = weights[q];
      for (std::uint32_t j = 0; j < d; ++j) {
        const long double var = vars[q * d + j], diff = x[j] - means[q * d + j];
        p *= std::exp(-diff * diff / (2.0L * var)) / std::sqrt(2.0L * std::numbers::pi_v<long double> * var);
      }
      evidence += (joint[q] = p);
    }
    double worst = 0.0;
    for (std::uint32_t q = 0; q < k; ++q) {
      worst = std::max(worst, std::abs(post[q] - static_cast<double>(joint[q] / evidence)));
    }
    c.Expect(worst <= 1e-9, Fmt("case %.0f: posterior off by %.3g", trial, worst));

    if (trial % 10 == 0) {
      std::normal_distribution<double> z(0.0, 1.5);
      DescriptorSet set("seg", d);
      std::vector<double> row(d);
      for (int i = 0; i < 40; ++i) {
        for (double& e : row) e = z(rng);
        set.Append(std::span<const double>(row));
      }
      const auto enc = codebook::Encode(cb, set);
      double sum = 0.0;
      for (double e : enc.values) sum += e;
      c.Expect(std::abs(sum - 1.0) <= 1e-6, Fmt("pooled sum %.9f", sum));
      std::vector<std::size_t> order(set.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::shuffle(order.begin(), order.end(), rng);
      DescriptorSet shuffled("seg", d);
      for (std::size_t i : order) shuffled.Append(set.row(i));
      c.Expect(codebook::Encode(cb, shuffled).values == enc.values, "pooling depends on order");
    }
  }
}

// --- 5: SVM oracle ---------------------------------------------------------

void SvmOracle(Checker& c) {
  for (int k = 0; k < 10; ++k) {
    std::mt19937_64 rng(500 + k);
    const std::size_t n = 10 + k;  // 10..19 points
    const double gap = k % 2 == 0 ? 0.6 : 2.5, noise = k % 2 == 0 ? 1.0 : 0.4;
    std::normal_distribution<double> z(0.0, noise);
    codebook::Matrix X(n, 2);
    std::vector<Label> y;
    for (std::size_t i = 0; i < n; ++i) {
      const Label l = i % 2 == 0 ? Label::kPositive : Label::kNegative;
      y.push_back(l);
      X.row(i)[0] = Sign(l) * gap + z(rng);
      X.row(i)[1] = 0.5 * Sign(l) * gap + z(rng);
    }
    const double C = std::pow(4.0, k % 3 - 1);
    const auto model = classifier::TrainHyperplane(X, y, C, 1);
    const double ours = classifier::Objective(model.w, model.b, C, X, y);
    const double oracle = testing::SubgradientOracle(X, y, C);
    c.Expect(std::abs(ours - oracle) <= 1e-3 * oracle,
             Fmt("problem %.0f: objective %.6f vs oracle %.6f", k, ours, oracle));

    if (k % 2 == 1) {  // well separated: hard margin is attainable
      const auto hard = classifier::TrainSvm(X, y, 1e3, 1);
      int errors = 0;
      for (std::size_t i = 0; i < n; ++i) {
        errors += Sign(y[i]) * classifier::DecisionDistance(hard, X.row(i)) <= 0.0;
      }
      c.Expect(errors == 0, Fmt("problem %.0f: %.0f training errors", k, errors));
    }
  }
  std::mt19937_64 rng(55);
  std::normal_distribution<double> z(0.0, 1.0);
  codebook::Matrix X(60, 2);
  std::vector<Label> y;
  for (std::size_t i = 0; i < 60; ++i) {
    y.push_back(i % 2 == 0 ? Label::kPositive : Label::kNegative);
    X.row(i)[0] = Sign(y.back()) * 0.7 + z(rng);
    X.row(i)[1] = z(rng);
  }
  const auto grid = classifier::Log2Grid(-3, 15);
  c.Expect(grid.size() == 19, "C grid size");
  const auto a = classifier::CrossValidateC(X, y, grid, 9, 5, 1);
  const auto b = classifier::CrossValidateC(X, y, grid, 9, 5, 1);
  const auto p = classifier::CrossValidateC(X, y, grid, 9, 5, 4);
  c.Expect(a.best_C == b.best_C && a.mean_accuracy == b.mean_accuracy, "CV repeat differs");
  c.Expect(a.best_C == p.best_C && a.mean_accuracy == p.mean_accuracy, "CV differs across workers");
}

// --- 6: prosody accuracy ---------------------------------------------------

void ProsodyAccuracy(Checker& c) {
  std::size_t voiced = 0, octave = 0, frames = 0, off = 0;
  for (int harmonics : {1, 3}) {
    for (double f0 = 100.0; f0 <= 400.0; f0 += 10.0) {
      audio::PcmSignal s;
      s.samples.resize(8000);
      for (std::size_t i = 0; i < s.samples.size(); ++i) {
        double v = 0.0;
        for (int h = 1; h <= harmonics; ++h) v += std::sin(2.0 * std::numbers::pi * h * f0 * i / 16000.0) / h;
        s.samples[i] = 0.5 * v;
      }
      for (const auto& fr : audio::ExtractProsody(s).frames) {
        ++frames;
        if (fr.f0 == 0.0) continue;
        ++voiced;
        const double ratio = fr.f0 / f0;
        if (std::abs(ratio - 2.0) < 0.1 || std::abs(ratio - 0.5) < 0.05) {
          ++octave;
        } else if (std::abs(fr.f0 - f0) > 3.0) {
          ++off;
          c.Expect(false, Fmt("%.0f Hz tone read as %.2f Hz", f0, fr.f0));
        }
      }
    }
  }
  c.Expect(voiced >= 0.95 * frames, Fmt("only %.0f of %.0f tone frames voiced", voiced, frames));
  c.Expect(octave < 0.05 * voiced, Fmt("octave errors %.0f of %.0f voiced", octave, voiced));
  c.Expect(off == 0, "frames outside 3 Hz");
  audio::PcmSignal silence;
  silence.samples.assign(16000, 0.0);
  for (const auto& fr : audio::ExtractProsody(silence).frames) {
    c.Expect(fr.f0 == 0.0 && fr.voicing == 0.0, "silence voiced");
  }
}

// --- 7: interest point detection ------------------------------------------

video::FrameVolume Blob(double cx, double cy, double ct) {
  video::FrameVolume v(32, 48, 48);
  for (int t = 0; t < 32; ++t) {
    for (int y = 0; y < 48; ++y) {
      for (int x = 0; x < 48; ++x) {
        const double r2 = ((x - cx) * (x - cx) + (y - cy) * (y - cy)) / 9.0;
        v.at(t, y, x) = static_cast<float>(0.2 + 0.6 * std::exp(-0.5 * r2 - 0.5 * (t - ct) * (t - ct) / 4.0));
      }
    }
  }
  return v;
}

void Detection(Checker& c) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> shift(-5, 5), tshift(-4, 4);
  const auto base = video::Detect(video::IntegralVolume(Blob(24.0, 24.0, 15.0)), {}, 1e-4);
  c.Expect(!base.empty(), "no detection on the reference blob");
  if (base.empty()) return;
  c.Expect(std::abs(base[0].x - 24) <= 2 && std::abs(base[0].y - 24) <= 2 &&
               std::abs(base[0].t - 15) <= 1,
           Fmt("reference blob found at (%.0f, %.0f, %.0f)", base[0].x, base[0].y, base[0].t));
  for (int trial = 0; trial < 20; ++trial) {
    const int dx = shift(rng), dy = shift(rng), dt = tshift(rng);
    const auto pts =
        video::Detect(video::IntegralVolume(Blob(24.0 + dx, 24.0 + dy, 15.0 + dt)), {}, 1e-4);
    c.Expect(!pts.empty(), "no detection on a shifted blob");
    if (pts.empty()) continue;
    c.Expect(std::abs(pts[0].x - (24 + dx)) <= 2 && std::abs(pts[0].y - (24 + dy)) <= 2 &&
                 std::abs(pts[0].t - (15 + dt)) <= 1,
             Fmt("shifted blob localization off (%.0f, %.0f)", pts[0].x - 24 - dx, pts[0].y - 24 - dy));
    c.Expect(std::abs(pts[0].x - base[0].x - dx) <= 1 && std::abs(pts[0].y - base[0].y - dy) <= 1 &&
                 std::abs(pts[0].t - base[0].t - dt) <= 1,
             Fmt("trial %.0f not equivariant", trial));
  }
  for (float level : {0.0f, 0.4f, 1.0f}) {
    const video::FrameVolume flat(16, 32, 32, 25.0, level);
    c.Expect(video::Detect(video::IntegralVolume(flat), {}, 0.0).empty(), "constant video has detections");
  }
}

// --- 8 and 9: end-to-end through the command line --------------------------

int Run(const std::string& args, const fs::path& log) {
  const std::string cmd = "\"" + g_cli + "\" " + args + " >>\"" + log.string() + "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

bool FullRun(Checker& c, const fs::path& root, int workers) {
  fs::create_directories(root);
  const fs::path config = root / "config.json";
  std::ofstream(config) << R"({"codebook": {"K": 16, "budget": 20000}})";
  const fs::path log = root / "log.txt";
  const std::string common = " --config \"" + config.string() + "\" --workers " +
                             std::to_string(workers) + " --out-dir \"" + (root / "out").string() + "\"";
  const std::string manifest = " --manifest \"" + (root / "corpus" / "manifest.jsonl").string() + "\"";
  const std::vector<std::string> steps{
      "synth --segments 200 --train 150 --workers " + std::to_string(workers) + " --out-dir \"" +
          (root / "corpus").string() + "\"",
      "extract" + manifest + common,
      "train" + manifest + common,
      "evaluate" + manifest + common + " --fusion score",
  };
  for (const auto& s : steps) {
    const int rc = Run(s, log);
    c.Expect(rc == 0, "'" + s.substr(0, s.find(' ')) + "' exited " + std::to_string(rc) +
                          " (see " + log.string() + ")");
    if (rc != 0) return false;
  }
  return true;
}

nlohmann::json ReadReport(const fs::path& root) {
  return nlohmann::json::parse(io::ReadFile(root / "out" / "reports" / "validation.json"));
}

double F1(const nlohmann::json& report, const std::string& name) {
  for (const auto& r : report.at("reports")) {
    if (r.at("name") == name) return r.at("f1").get<double>();
  }
  throw Error("report has no " + name + " entry");
}

fs::path g_run_a;

void EndToEnd(Checker& c) {
  if (!FullRun(c, g_run_a, 1)) return;
  const auto score = ReadReport(g_run_a);
  const fs::path log = g_run_a / "log.txt";
  const std::string args = " --manifest \"" + (g_run_a / "corpus" / "manifest.jsonl").string() +
                           "\" --config \"" + (g_run_a / "config.json").string() + "\" --out-dir \"" +
                           (g_run_a / "out").string() + "\"";
  const int rc = Run("evaluate" + args + " --fusion output", log);
  c.Expect(rc == 0, "output-level evaluate failed");
  if (rc != 0) return;
  const auto output = ReadReport(g_run_a);
  // Leave the score-level reports in place for the determinism comparison.
  Run("evaluate" + args + " --fusion score", log);

  const double fa = F1(score, "audio"), fv = F1(score, "video");
  const double fs_ = F1(score, "fused"), fo = F1(output, "fused");
  std::printf("  audio F1 %.4f, video F1 %.4f, score fusion F1 %.4f (theta %.1f), output fusion F1 %.4f\n",
              fa, fv, fs_, score.at("theta").at("theta").get<double>(), fo);
  const double best = std::max(fs_, fo);
  c.Expect(best >= 0.95, Fmt("best fused F1 %.4f < 0.95", best));
  c.Expect(best >= std::max(fa, fv) - 0.02,
           Fmt("fused F1 %.4f below best unimodal %.4f - 0.02", best, std::max(fa, fv)));
}

void Determinism(Checker& c) {
  const fs::path run_b = g_run_a.parent_path() / "run-b";
  if (!fs::exists(g_run_a / "out" / "reports")) {
    c.Expect(false, "first run did not complete");
    return;
  }
  if (!FullRun(c, run_b, 4)) return;
  std::size_t compared = 0;
  for (const char* sub : {"corpus", "out"}) {
    for (const auto& e : fs::recursive_directory_iterator(g_run_a / sub)) {
      if (!e.is_regular_file() || e.path().filename() == "run_manifest.json") continue;
      const fs::path rel = fs::relative(e.path(), g_run_a);
      const fs::path other = run_b / rel;
      const bool same = fs::exists(other) && io::ReadFile(e.path()) == io::ReadFile(other);
      c.Expect(same, rel.string() + " differs");
      ++compared;
    }
  }
  // The second tree must not hold extra files either.
  for (const char* sub : {"corpus", "out"}) {
    for (const auto& e : fs::recursive_directory_iterator(run_b / sub)) {
      if (e.is_regular_file()) c.Expect(fs::exists(g_run_a / fs::relative(e.path(), run_b)),
                                        fs::relative(e.path(), run_b).string() + " only in second run");
    }
  }
  c.Expect(compared > 400, "too few artifacts compared");
  std::printf("  %zu artifacts byte-identical between workers=1 and workers=4\n", compared);
}

// --- 10: metric self-consistency -------------------------------------------

void MetricConsistency(Checker& c) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> s(-3.0, 3.0);
  double worst_round_trip = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double x = s(rng);
    worst_round_trip = std::max(worst_round_trip, std::abs(metrics::ScaleConfidence(metrics::UnscaleSentiment(x)) - x));
  }
  c.Expect(worst_round_trip <= 1e-12, Fmt("scaling round trip off by %.3g", worst_round_trip));

  auto cls = [](double v, int classes) {
    const double bound = classes == 7 ? 3.0 : 2.0;
    v = std::clamp(v, -bound, bound);
    return v >= 0 ? static_cast<int>(std::floor(v + 0.5)) : -static_cast<int>(std::floor(-v + 0.5));
  };
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p(40 + trial), t(40 + trial);
    for (double& x : p) x = s(rng);
    for (double& x : t) x = s(rng);
    long double abs_sum = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    const long double n = p.size();
    for (std::size_t i = 0; i < p.size(); ++i) {
      abs_sum += std::fabs(static_cast<long double>(p[i]) - t[i]);
      sx += p[i];
      sy += t[i];
      sxx += static_cast<long double>(p[i]) * p[i];
      syy += static_cast<long double>(t[i]) * t[i];
      sxy += static_cast<long double>(p[i]) * t[i];
    }
    const double mae = static_cast<double>(abs_sum / n);
    const double r = static_cast<double>((n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy)));
    c.Expect(std::abs(metrics::MeanAbsoluteError(p, t) - mae) <= 1e-9, "MAE disagrees");
    c.Expect(std::abs(metrics::Pearson(p, t).value - r) <= 1e-9, "Pearson disagrees");
    for (int classes : {5, 7}) {
      std::map<int, std::pair<int, int>> per;
      for (std::size_t i = 0; i < p.size(); ++i) {
        auto& e = per[cls(t[i], classes)];
        e.second += 1;
        e.first += cls(p[i], classes) == cls(t[i], classes);
      }
      double acc = 0.0;
      for (const auto& [k, e] : per) acc += static_cast<double>(e.first) / e.second;
      acc /= per.size();
      c.Expect(std::abs(metrics::MulticlassAccuracy(p, t, classes) - acc) <= 1e-9,
               Fmt("%.0f-class accuracy disagrees", classes));
    }
  }
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;  // 0: no runtime bound
  std::function<void(Checker&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--cli") g_cli = argv[i + 1];
  }
  if (g_cli.empty()) {
    std::fprintf(stderr, "usage: acceptance --cli <path to mmsent>\n");
    return 2;
  }
  testing::TempDir work("acceptance");
  g_run_a = work / "run-a";

  const std::vector<Criterion> criteria{
      {1, "metric oracle on reference counts", 1.0, MetricOracle},
      {2, "fusion equivalence and exhaustive theta check", 5.0, FusionEquivalence},
      {3, "EM monotonicity and mean recovery", 60.0, EmCorrectness},
      {4, "encoding posteriors and pooling", 0.0, EncodingOracle},
      {5, "SVM objective, separability and CV determinism", 0.0, SvmOracle},
      {6, "prosody pitch accuracy and silence", 30.0, ProsodyAccuracy},
      {7, "interest point localization and equivariance", 60.0, Detection},
      {8, "synthetic end-to-end F1", 300.0, EndToEnd},
      {9, "determinism across runs and worker counts", 0.0, Determinism},
      {10, "metric self-consistency", 0.0, MetricConsistency},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Checker checker;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.run(checker);
    } catch (const std::exception& e) {
      checker.Expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (cr.budget_seconds > 0.0) {
      checker.Expect(secs < cr.budget_seconds, Fmt("runtime %.1f s over %.0f s", secs, cr.budget_seconds));
    }
    const bool ok = checker.ok();
    failed += !ok;
    std::printf("%s criterion %2d: %s (%.2f s; %s)\n", ok ? "PASS" : "FAIL", cr.id, cr.name, secs,
                checker.Summary().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
