// Copyright 2026 The wdistill Authors
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

#ifndef WDISTILL_TOLERANCES_H
#define WDISTILL_TOLERANCES_H

namespace wdistill::tol {

/// Normalization and Hermiticity of constructed states.
constexpr double kState = 1e-12;
/// Accepted deviation from Hermiticity for eigensolver input.
constexpr double kHermitian = 1e-10;
/// Eigenvalues above -kNegativeEigen are clamped to zero; below it the input is rejected.
constexpr double kNegativeEigen = 1e-10;
/// Branch probabilities below this are pruned.
constexpr double kPruneProbability = 1e-14;
/// Density-matrix eigenvalues at or below this are treated as exact zeros (rank cut).
constexpr double kRankCut = 1e-14;
/// Probability bookkeeping (branch sums, record consistency).
constexpr double kProbabilitySum = 1e-10;
/// Slack when clamping a real quantity into [0, 1].
constexpr double kClamp = 1e-10;
/// Total weight preserved by readout mitigation.
constexpr double kWeight = 1e-6;
/// Jacobi sweeps stop once the off-diagonal norm falls below this fraction of the matrix norm.
constexpr double kJacobiRelative = 1e-15;
constexpr int kJacobiMaxSweeps = 100;

}  // namespace wdistill::tol

#endif
