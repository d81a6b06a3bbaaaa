/* Copyright 2026 The WaveSense Toolkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

// Constructed detection/label cases with hand-counted outcomes, shared by the
// unit tests and the acceptance runner.

#include <string>
#include <vector>

#include "wavesense/eval.hpp"

namespace wavesense::testing {

struct DetectionScenario {
  std::string name;
  std::vector<Detection> detections;
  std::vector<StreamLabel> labels;
  double hours = 1.0;
  double match_window = 0.75;
  double frr = 0.0;
  double faph = 0.0;
  std::size_t hits = 0;
  std::size_t false_alarms = 0;
};

inline std::vector<StreamLabel> ten_keywords() {
  std::vector<StreamLabel> l;
  for (std::size_t i = 0; i < 10; ++i) l.push_back({0, 100.0 * i + 10, 100.0 * i + 11});
  return l;
}

inline std::vector<DetectionScenario> detection_scenarios() {
  std::vector<DetectionScenario> s;
  s.push_back({"no detections", {}, ten_keywords(), 1.0, 0.75, 1.0, 0.0, 0, 0});
  {
    DetectionScenario p{"one per keyword", {}, ten_keywords(), 1.0, 0.75, 0.0, 0.0, 10, 0};
    for (std::size_t i = 0; i < 10; ++i) p.detections.push_back({0, 100.0 * i + 10.5, 1.0});
    s.push_back(p);
  }
  {
    // 8 keywords hit, 3 detections far from any keyword, over 2 hours.
    DetectionScenario p{"8 of 10 hit, 3 stray", {}, ten_keywords(), 2.0, 0.75, 0.2, 1.5, 8, 3};
    for (std::size_t i = 0; i < 8; ++i) p.detections.push_back({0, 100.0 * i + 10.2, 1.0});
    for (double t : {50.0, 1500.0, 3000.0}) p.detections.push_back({0, t, 1.0});
    s.push_back(p);
  }
  s.push_back({"wrong class inside window", {{1, 10.5, 1.0}}, {{0, 10.0, 11.0}},
               1.0, 0.75, 1.0, 1.0, 0, 1});
  s.push_back({"on the early window edge", {{0, 9.25, 1.0}}, {{0, 10.0, 11.0}},
               1.0, 0.75, 0.0, 0.0, 1, 0});
  s.push_back({"just past the late window edge", {{0, 11.76, 1.0}}, {{0, 10.0, 11.0}},
               0.5, 0.75, 1.0, 2.0, 0, 1});
  s.push_back({"two detections on one keyword", {{0, 10.1, 1.0}, {0, 10.9, 1.0}},
               {{0, 10.0, 11.0}}, 1.0, 0.75, 0.0, 0.0, 1, 0});
  s.push_back({"one detection covers two keywords", {{0, 11.5, 1.0}},
               {{0, 10.0, 11.0}, {0, 12.0, 13.0}}, 1.0, 0.75, 0.0, 0.0, 2, 0});
  s.push_back({"no keywords", {{0, 1.0, 1.0}, {1, 2.0, 1.0}, {0, 3.0, 1.0}, {1, 4.0, 1.0}},
               {}, 0.5, 0.75, 0.0, 8.0, 0, 4});
  // Class 0 at 10-11 hit; class 1 at 20-21 missed (only a class 0 detection
  // near it, which is a false alarm); class 0 at 30-31 missed; class 1 at
  // 40-41 hit twice; one stray class 1 at 60 -> 2 of 4 hit, 2 false alarms.
  s.push_back({"mixed classes, zero match window",
               {{0, 10.0, 1.0}, {0, 20.5, 1.0}, {1, 40.0, 1.0}, {1, 41.0, 1.0}, {1, 60.0, 1.0}},
               {{0, 10.0, 11.0}, {1, 20.0, 21.0}, {0, 30.0, 31.0}, {1, 40.0, 41.0}},
               0.25, 0.0, 0.5, 8.0, 2, 2});
  return s;
}

}  // namespace wavesense::testing
