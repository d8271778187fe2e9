// Copyright 2026 The isolator-qc Authors
// SPDX-License-Identifier: Apache-2.0

//! Criterion benchmarks for the propagation kernels live in `benches/`.
