// Copyright 2026 The iwies Authors.
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

#pragma once

// Text checkpoint for policy parameters:
//
//   iwies-theta v1 <input_dim> <hidden,comma,separated> <output_dim> <clip>
//   <value>
//   <value>
//   ...
//
// A network without hidden layers writes "-" for the hidden list. Values use
// shortest round-trip formatting, so load(write(theta)) is bit-exact.

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

#include "iwies/errors.hpp"
#include "iwies/policy_net.hpp"
#include "iwies/text.hpp"

namespace iwies {

struct Checkpoint {
  MlpArchitecture arch;
  ParameterVector theta;
};

inline void write_checkpoint(std::ostream& os, const ParameterVector& theta,
                             const MlpArchitecture& arch) {
  if (theta.size() != param_count(arch))
    throw input_error("checkpoint: parameter vector does not match architecture");
  os << "iwies-theta v1 " << arch.input_dim << ' ';
  if (arch.hidden.empty()) {
    os << '-';
  } else {
    for (std::size_t i = 0; i < arch.hidden.size(); ++i)
      os << (i ? "," : "") << arch.hidden[i];
  }
  os << ' ' << arch.output_dim << ' ' << text::format_double(arch.action_clip) << '\n';
  for (std::size_t i = 0; i < theta.size(); ++i)
    os << text::format_double(theta[i]) << '\n';
}

inline Checkpoint read_checkpoint(std::istream& is) {
  auto fail = [](std::size_t line, const std::string& msg) {
    return parse_error("checkpoint line " + std::to_string(line) + ": " + msg);
  };
  std::string line;
  if (!std::getline(is, line)) throw fail(1, "missing header");
  const auto fields = text::tokens(text::trim(line));
  if (fields.size() != 6 || fields[0] != "iwies-theta" || fields[1] != "v1")
    throw fail(1, "expected 'iwies-theta v1 <in> <hidden> <out> <clip>'");

  Checkpoint ck;
  auto in = text::parse_int<std::size_t>(fields[2]);
  auto out = text::parse_int<std::size_t>(fields[4]);
  auto clip = text::parse_double(fields[5]);
  if (!in || !out || !clip) throw fail(1, "malformed dimensions or clip");
  ck.arch.input_dim = *in;
  ck.arch.output_dim = *out;
  ck.arch.action_clip = *clip;
  ck.arch.hidden.clear();
  if (fields[3] != "-") {
    for (auto h : text::split(fields[3], ',')) {
      auto width = text::parse_int<std::size_t>(h);
      if (!width) throw fail(1, "malformed hidden width '" + std::string(h) + "'");
      ck.arch.hidden.push_back(*width);
    }
  }
  try {
    ck.arch.validate();
  } catch (const Error& e) {
    throw fail(1, e.what());
  }

  const std::size_t expected = param_count(ck.arch);
  std::vector<double> values;
  values.reserve(expected);
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    const auto t = text::trim(line);
    if (t.empty()) continue;
    auto v = text::parse_double(t);
    if (!v) throw fail(lineno, "not a number: '" + std::string(t) + "'");
    values.push_back(*v);
  }
  if (values.size() != expected)
    throw input_error("checkpoint shape mismatch: header declares " + std::to_string(expected) +
                      " parameters but file holds " + std::to_string(values.size()));
  ck.theta = ParameterVector(std::move(values));
  return ck;
}

inline void write_checkpoint(const std::filesystem::path& path,
                             const ParameterVector& theta, const MlpArchitecture& arch) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCategory::Io, "cannot open '" + path.string() + "' for writing");
  write_checkpoint(os, theta, arch);
  if (!os) throw Error(ErrorCategory::Io, "write failed for '" + path.string() + "'");
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCategory::Io, "cannot open '" + path.string() + "'");
  try {
    return read_checkpoint(is);
  } catch (const Error& e) {
    throw Error(e.category(), path.string() + ": " + e.what());
  }
}

}  // namespace iwies
