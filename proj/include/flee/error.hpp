/*
 * Copyright 2026 The flee Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace flee {

enum class ErrorKind {
  Config,
  UnknownPreset,
  InvalidParam,
  HypothesisFailure,
  NonConvergent,
  WindowTooSmall,
  NearCriticalValue,
  SeedFailure,
  CriticalCollision,
  StepUnderflow,
  QuadratureNonConvergent,
  PoleOnPath,
  CriticalMomentum,
  ContourTooClose,
  CriticalValue,
  RootFindingStall,
  EmptyRealPoleSet,
  NoConvergence,
  NearSingular,
  TruncationDominated,
  PoleCircleCrossesCut,
  GridTooCoarse,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config: return "Config";
    case ErrorKind::UnknownPreset: return "UnknownPreset";
    case ErrorKind::InvalidParam: return "InvalidParam";
    case ErrorKind::HypothesisFailure: return "HypothesisFailure";
    case ErrorKind::NonConvergent: return "NonConvergent";
    case ErrorKind::WindowTooSmall: return "WindowTooSmall";
    case ErrorKind::NearCriticalValue: return "NearCriticalValue";
    case ErrorKind::SeedFailure: return "SeedFailure";
    case ErrorKind::CriticalCollision: return "CriticalCollision";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::QuadratureNonConvergent: return "QuadratureNonConvergent";
    case ErrorKind::PoleOnPath: return "PoleOnPath";
    case ErrorKind::CriticalMomentum: return "CriticalMomentum";
    case ErrorKind::ContourTooClose: return "ContourTooClose";
    case ErrorKind::CriticalValue: return "CriticalValue";
    case ErrorKind::RootFindingStall: return "RootFindingStall";
    case ErrorKind::EmptyRealPoleSet: return "EmptyRealPoleSet";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NearSingular: return "NearSingular";
    case ErrorKind::TruncationDominated: return "TruncationDominated";
    case ErrorKind::PoleCircleCrossesCut: return "PoleCircleCrossesCut";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace flee
