//
// Copyright 2026 The PCQR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "pcqr/dataset.h"

#include <charconv>
#include <cmath>
#include <numeric>
#include <string>
#include <system_error>

namespace pcqr {

void PrivacyBudget::Validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidArgument("epsilon must be positive, got " +
                          std::to_string(epsilon));
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InvalidArgument("delta must lie in (0, 1), got " +
                          std::to_string(delta));
  }
}

void AccuracyTarget::Validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidArgument("alpha must lie in (0, 1), got " +
                          std::to_string(alpha));
  }
  if (!(beta > 0.0 && beta < 1.0)) {
    throw InvalidArgument("beta must lie in (0, 1), got " +
                          std::to_string(beta));
  }
}

const char* OriginName(Origin origin) {
  switch (origin) {
    case Origin::kRaw:
      return "raw";
    case Origin::kSubsampled:
      return "subsampled";
    case Origin::kRelabeled:
      return "relabeled";
    case Origin::kResampled:
      return "resampled";
  }
  return "unknown";
}

UnlabeledDataset LabeledDataset::Unlabeled() const {
  UnlabeledDataset u;
  u.points.reserve(items.size());
  for (const Example& e : items) u.points.push_back(e.x);
  return u;
}

LabeledDataset SampleWithoutReplacement(const LabeledDataset& s,
                                        std::size_t n_prime,
                                        RandomSource& rng) {
  if (n_prime < 1 || n_prime > s.size()) {
    throw InvalidArgument("SampleWithoutReplacement: n_prime=" +
                          std::to_string(n_prime) +
                          " must lie in [1, |S|=" + std::to_string(s.size()) +
                          "]");
  }
  std::vector<std::size_t> index(s.size());
  std::iota(index.begin(), index.end(), std::size_t{0});
  LabeledDataset out;
  out.origin = Origin::kSubsampled;
  out.items.reserve(n_prime);
  for (std::size_t i = 0; i < n_prime; ++i) {
    const std::size_t j = i + rng.UniformInt(s.size() - i);
    std::swap(index[i], index[j]);
    out.items.push_back(s.items[index[i]]);
  }
  return out;
}

LabeledDataset ResampleWithReplacement(const LabeledDataset& s,
                                       std::size_t count, RandomSource& rng) {
  if (s.empty()) {
    throw InvalidArgument("ResampleWithReplacement: empty dataset");
  }
  if (count < 1) throw InvalidArgument("ResampleWithReplacement: count < 1");
  LabeledDataset out;
  out.origin = Origin::kResampled;
  out.items.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.items.push_back(s.items[rng.UniformInt(s.size())]);
  }
  return out;
}

std::string FormatDouble(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

void WriteCsv(const LabeledDataset& s, std::ostream& out) {
  out << "x,y\n";
  for (const Example& e : s.items) {
    out << FormatDouble(e.x) << ',' << ToInt(e.y) << '\n';
  }
}

LabeledDataset ReadCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("ReadCsv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,y") {
    throw InvalidArgument("ReadCsv: expected header 'x,y', got '" + line + "'");
  }
  LabeledDataset s;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw InvalidArgument("ReadCsv: line " + std::to_string(line_no) +
                            " has no comma");
    }
    Example e;
    const char* first = line.data();
    auto [xend, xec] = std::from_chars(first, first + comma, e.x);
    if (xec != std::errc() || xend != first + comma) {
      throw InvalidArgument("ReadCsv: bad feature on line " +
                            std::to_string(line_no));
    }
    const std::string label = line.substr(comma + 1);
    if (label == "0") {
      e.y = Label::kZero;
    } else if (label == "1") {
      e.y = Label::kOne;
    } else {
      throw InvalidArgument("ReadCsv: label must be 0 or 1 on line " +
                            std::to_string(line_no));
    }
    s.items.push_back(e);
  }
  return s;
}

}  // namespace pcqr
