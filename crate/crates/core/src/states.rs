//! Density matrices, entangled probes, state supports and the separable
//! multi-copy measurement that discriminates states with pairwise
//! non-nested supports.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    c, contains, hermitian_eig, projector, sum_subspaces, CVector, ComplexMatrix, Subspace,
    Tolerance,
};

pub const DENSITY_HERMITIAN_TOL: f64 = 1e-9;
pub const DENSITY_TRACE_TOL: f64 = 1e-9;
pub const DENSITY_EIGEN_FLOOR: f64 = -1e-10;

/// Per-copy probabilities this close to 0 or 1 are sampled as exact.
pub const PROBABILITY_SNAP: f64 = 1e-12;

/// Largest copy count for which outcome patterns are enumerated.
pub const MAX_ENUMERATED_COPIES: usize = 20;

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::InvalidShape(format!(
                "density matrix must be square, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        let herm = mat.hermiticity_defect();
        if herm > DENSITY_HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "Hermiticity defect {herm:e}"
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > DENSITY_TRACE_TOL || tr.im.abs() > DENSITY_TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
        }
        let eig = hermitian_eig(&mat)?;
        let min = eig.values.last().copied().unwrap_or(0.0);
        if min < DENSITY_EIGEN_FLOOR {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(Self { mat })
    }

    /// `|v⟩⟨v| / ⟨v|v⟩`.
    pub fn from_pure(v: &CVector) -> Result<Self> {
        let norm = v.norm();
        if v.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidDensityMatrix(
                "zero or non-finite state vector".into(),
            ));
        }
        Self::new(ComplexMatrix::outer(&v.unscale(norm)))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(dim).scale(c(1.0 / dim as f64, 0.0)),
        }
    }

    /// Hermitian part of `mat` rescaled to unit trace, then validated.
    pub(crate) fn normalized(mat: ComplexMatrix) -> Result<Self> {
        let herm = (&mat + &mat.dagger()).scale(c(0.5, 0.0));
        let tr = herm.trace().re;
        if tr.is_nan() || tr <= 0.0 {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
        }
        Self::new(herm.scale(c(1.0 / tr, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    /// `Re tr(op · ρ)`.
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<f64> {
        if op.rows() != self.dim() || op.cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: op.rows(),
            });
        }
        Ok((op * &self.mat).trace().re)
    }
}

/// Bipartite pure state `Σ_t α_t |t⟩|t⟩` with every `α_t > 0`.
#[derive(Debug, Clone)]
pub struct ProbeState {
    main_dim: usize,
    schmidt_coeffs: Vec<f64>,
    vector: CVector,
}

impl ProbeState {
    pub fn main_dim(&self) -> usize {
        self.main_dim
    }

    pub fn ancilla_dim(&self) -> usize {
        self.main_dim
    }

    pub fn schmidt_coeffs(&self) -> &[f64] {
        &self.schmidt_coeffs
    }

    /// State vector on the `d²`-dimensional main ⊗ ancilla space.
    pub fn vector(&self) -> &CVector {
        &self.vector
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            mat: ComplexMatrix::outer(&self.vector),
        }
    }
}

/// Probe with full Schmidt number; maximally entangled when `coeffs` is `None`.
pub fn make_probe(d: usize, coeffs: Option<&[f64]>) -> Result<ProbeState> {
    if d == 0 {
        return Err(Error::InvalidShape(
            "probe dimension must be positive".into(),
        ));
    }
    let schmidt_coeffs = match coeffs {
        None => vec![1.0 / (d as f64).sqrt(); d],
        Some(a) => {
            if a.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: a.len(),
                });
            }
            if let Some((index, &value)) = a
                .iter()
                .enumerate()
                .find(|(_, v)| !(v.is_finite() && **v > 0.0))
            {
                return Err(Error::NonPositiveSchmidt { index, value });
            }
            let norm_sq: f64 = a.iter().map(|v| v * v).sum();
            if (norm_sq - 1.0).abs() > 1e-6 {
                return Err(Error::NotNormalized(norm_sq));
            }
            let norm = norm_sq.sqrt();
            a.iter().map(|v| v / norm).collect()
        }
    };
    let mut vector = CVector::zeros(d * d);
    for (t, &alpha) in schmidt_coeffs.iter().enumerate() {
        vector[t * d + t] = c(alpha, 0.0);
    }
    Ok(ProbeState {
        main_dim: d,
        schmidt_coeffs,
        vector,
    })
}

/// Span of eigenvectors whose eigenvalue exceeds `tol.cutoff(λ_max)`.
pub fn state_support(rho: &DensityMatrix, tol: &Tolerance) -> Result<Subspace> {
    let eig = hermitian_eig(&rho.mat)?;
    let lambda_max = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let cutoff = tol.cutoff(lambda_max);
    let kept = eig.values.iter().take_while(|&&l| l > cutoff).count();
    Ok(Subspace::from_orthonormal_columns(
        eig.vectors.columns(0, kept).into_owned(),
        cutoff,
    ))
}

/// Projector onto the kernel of `rho`.
pub fn kernel_projector(rho: &DensityMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    let support = state_support(rho, tol)?;
    Ok(&ComplexMatrix::identity(rho.dim()) - &projector(&support))
}

fn check_states(states: &[DensityMatrix]) -> Result<usize> {
    if states.len() < 2 {
        return Err(Error::TooFew {
            needed: 2,
            found: states.len(),
        });
    }
    let dim = states[0].dim();
    if let Some(s) = states.iter().find(|s| s.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: s.dim(),
        });
    }
    Ok(dim)
}

fn supports(states: &[DensityMatrix], tol: &Tolerance) -> Result<Vec<Subspace>> {
    states.iter().map(|s| state_support(s, tol)).collect()
}

/// Entry `i` is true iff `supp(ρ_i)` is not inside the sum of the other supports.
pub fn states_unambiguously_distinguishable(
    states: &[DensityMatrix],
    tol: &Tolerance,
) -> Result<Vec<bool>> {
    check_states(states)?;
    let supp = supports(states, tol)?;
    (0..supp.len())
        .map(|i| {
            let others: Vec<Subspace> = supp
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, s)| s.clone())
                .collect();
            let rest = sum_subspaces(&others, tol)?;
            Ok(!contains(&rest, &supp[i], tol)?.contained)
        })
        .collect()
}

/// Entry `(i, j)` is true iff `supp(ρ_i) ⊄ supp(ρ_j)`; the diagonal is false.
pub fn pairwise_support_condition(
    states: &[DensityMatrix],
    tol: &Tolerance,
) -> Result<Vec<Vec<bool>>> {
    check_states(states)?;
    let supp = supports(states, tol)?;
    pairwise_from_supports(&supp, tol).map(|m| {
        m.into_iter()
            .map(|row| row.into_iter().map(|(ok, _)| ok).collect())
            .collect()
    })
}

fn pairwise_from_supports(supp: &[Subspace], tol: &Tolerance) -> Result<Vec<Vec<(bool, f64)>>> {
    let n = supp.len();
    let mut out = vec![vec![(false, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let rep = contains(&supp[j], &supp[i], tol)?;
                out[i][j] = (!rep.contained, rep.max_residual);
            }
        }
    }
    Ok(out)
}

/// Outcome of the binary measurement on one copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    /// Projected onto the support of the copy's reference state.
    #[serde(rename = "P")]
    Support,
    /// Projected onto the kernel.
    #[serde(rename = "Q")]
    Kernel,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Support => "P",
            Outcome::Kernel => "Q",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Conclusive(usize),
    Inconclusive,
}

/// The `{P_i, Q_i}` pair measured on copy `i`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CopyMeasurement {
    pub support: ComplexMatrix,
    pub kernel: ComplexMatrix,
}

/// Separable measurement on `n` copies: copy `i` is measured with
/// `{P_i, Q_i}` built from state `i`. Only the pattern with a single `P` at
/// position `i` is conclusive, and it names state `i`.
#[derive(Debug, Clone)]
pub struct MeasurementPlan {
    dim: usize,
    per_copy: Vec<CopyMeasurement>,
}

impl MeasurementPlan {
    /// Assembles a plan from explicit projector pairs, checking the plan invariants.
    pub fn from_projectors(per_copy: Vec<CopyMeasurement>) -> Result<Self> {
        let first = per_copy
            .first()
            .ok_or(Error::Empty("plan needs at least one copy"))?;
        let dim = first.support.rows();
        let eye = ComplexMatrix::identity(dim);
        for (i, m) in per_copy.iter().enumerate() {
            for p in [&m.support, &m.kernel] {
                if p.rows() != dim || p.cols() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: p.rows(),
                    });
                }
                let herm = p.hermiticity_defect();
                let idem = (p * p).max_abs_diff(p);
                if herm > 1e-10 || idem > 1e-10 {
                    return Err(Error::InvalidShape(format!(
                        "copy {i}: not an orthogonal projector (hermiticity {herm:e}, idempotence {idem:e})"
                    )));
                }
            }
            let resolution = (&m.support + &m.kernel).max_abs_diff(&eye);
            if resolution > 1e-9 {
                return Err(Error::InvalidShape(format!(
                    "copy {i}: P + Q deviates from identity by {resolution:e}"
                )));
            }
        }
        Ok(Self { dim, per_copy })
    }

    pub fn copies(&self) -> usize {
        self.per_copy.len()
    }

    /// Dimension of the space each copy lives in.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn per_copy(&self) -> &[CopyMeasurement] {
        &self.per_copy
    }

    pub fn decode(&self, pattern: &[Outcome]) -> Verdict {
        decode_pattern(pattern)
    }

    /// Every outcome pattern with its verdict, in binary order (`P` before `Q`).
    pub fn decode_table(&self) -> Result<Vec<(Vec<Outcome>, Verdict)>> {
        Ok(patterns(self.copies())?
            .into_iter()
            .map(|p| {
                let v = decode_pattern(&p);
                (p, v)
            })
            .collect())
    }

    /// `(tr(P_k ρ), tr(Q_k ρ))` per copy, clamped to `[0, 1]`.
    pub fn copy_probabilities(&self, truth: &DensityMatrix) -> Result<Vec<(f64, f64)>> {
        if truth.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: truth.dim(),
            });
        }
        self.per_copy
            .iter()
            .map(|m| {
                // Roundoff can push tr(Qρ) a few ulps below zero.
                let p = truth.expectation(&m.support)?.clamp(0.0, 1.0);
                let q = truth.expectation(&m.kernel)?.clamp(0.0, 1.0);
                Ok((p, q))
            })
            .collect()
    }
}

fn decode_pattern(pattern: &[Outcome]) -> Verdict {
    let mut hit = None;
    for (i, o) in pattern.iter().enumerate() {
        if *o == Outcome::Support {
            if hit.is_some() {
                return Verdict::Inconclusive;
            }
            hit = Some(i);
        }
    }
    hit.map_or(Verdict::Inconclusive, Verdict::Conclusive)
}

fn patterns(n: usize) -> Result<Vec<Vec<Outcome>>> {
    if n > MAX_ENUMERATED_COPIES {
        return Err(Error::TooManyCopies(n));
    }
    Ok((0..1usize << n)
        .map(|bits| {
            (0..n)
                .map(|k| {
                    if bits >> (n - 1 - k) & 1 == 0 {
                        Outcome::Support
                    } else {
                        Outcome::Kernel
                    }
                })
                .collect()
        })
        .collect())
}

/// Builds the per-copy `{P_i, Q_i}` plan; fails with the first pair whose
/// supports are nested.
pub fn build_multicopy_measurement(
    states: &[DensityMatrix],
    tol: &Tolerance,
) -> Result<MeasurementPlan> {
    let dim = check_states(states)?;
    let supp = supports(states, tol)?;
    let pairs = pairwise_from_supports(&supp, tol)?;
    for (i, row) in pairs.iter().enumerate() {
        for (j, &(ok, residual)) in row.iter().enumerate() {
            if i != j && !ok {
                return Err(Error::SupportContained {
                    contained: i,
                    container: j,
                    residual,
                });
            }
        }
    }
    let eye = ComplexMatrix::identity(dim);
    let per_copy = supp
        .iter()
        .map(|s| {
            let support = projector(s);
            let kernel = &eye - &support;
            CopyMeasurement { support, kernel }
        })
        .collect();
    Ok(MeasurementPlan { dim, per_copy })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictSummary {
    pub success: f64,
    pub error: f64,
    pub inconclusive: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatternProbability {
    pub pattern: Vec<Outcome>,
    pub probability: f64,
    /// Index named by the pattern, `None` when inconclusive.
    pub conclusive: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub patterns: Vec<PatternProbability>,
    /// Present when a true index was declared.
    pub summary: Option<VerdictSummary>,
}

impl OutcomeDistribution {
    pub fn total(&self) -> f64 {
        self.patterns.iter().map(|p| p.probability).sum()
    }

    /// Probability of each conclusive verdict, indexed by state.
    pub fn conclusive_probabilities(&self, copies: usize) -> Vec<f64> {
        let mut out = vec![0.0; copies];
        for p in &self.patterns {
            if let Some(i) = p.conclusive {
                out[i] += p.probability;
            }
        }
        out
    }
}

/// Exact probability of every outcome pattern when each copy is in `truth`.
pub fn plan_outcome_probabilities(
    plan: &MeasurementPlan,
    truth: &DensityMatrix,
    declared: Option<usize>,
) -> Result<OutcomeDistribution> {
    let n = plan.copies();
    if let Some(i) = declared {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
    }
    let per_copy = plan.copy_probabilities(truth)?;
    let patterns: Vec<PatternProbability> = patterns(n)?
        .into_iter()
        .map(|pattern| {
            let probability = pattern
                .iter()
                .zip(&per_copy)
                .map(|(o, &(p, q))| match o {
                    Outcome::Support => p,
                    Outcome::Kernel => q,
                })
                .product();
            let conclusive = match decode_pattern(&pattern) {
                Verdict::Conclusive(i) => Some(i),
                Verdict::Inconclusive => None,
            };
            PatternProbability {
                pattern,
                probability,
                conclusive,
            }
        })
        .collect();
    let summary = declared.map(|i| {
        let mut success = 0.0;
        let mut error = 0.0;
        for p in &patterns {
            match p.conclusive {
                Some(j) if j == i => success += p.probability,
                Some(_) => error += p.probability,
                None => {}
            }
        }
        VerdictSummary {
            success,
            error,
            inconclusive: 1.0 - success - error,
        }
    });
    Ok(OutcomeDistribution { patterns, summary })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub trials: u64,
    /// Count of `Conclusive(i)` verdicts, indexed by `i`.
    pub conclusive: Vec<u64>,
    pub inconclusive: u64,
}

impl VerdictCounts {
    fn empty(copies: usize) -> Self {
        Self {
            trials: 0,
            conclusive: vec![0; copies],
            inconclusive: 0,
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.trials += other.trials;
        self.inconclusive += other.inconclusive;
        for (a, b) in self.conclusive.iter_mut().zip(other.conclusive) {
            *a += b;
        }
        self
    }

    /// Conclusive counts naming an index other than `truth`.
    pub fn wrong_conclusive(&self, truth: usize) -> u64 {
        self.conclusive
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != truth)
            .map(|(_, c)| c)
            .sum()
    }
}

fn snap(p: f64) -> f64 {
    if p < PROBABILITY_SNAP {
        0.0
    } else if p > 1.0 - PROBABILITY_SNAP {
        1.0
    } else {
        p
    }
}

/// Monte Carlo run of `plan` with every copy prepared in `truth`.
///
/// Trial `t` draws from a ChaCha8 stream seeded with `seed` and set to
/// stream `t`, so counts do not depend on how trials are scheduled.
pub fn sample_outcomes(
    plan: &MeasurementPlan,
    truth: &DensityMatrix,
    trials: u64,
    seed: u64,
) -> Result<VerdictCounts> {
    if trials == 0 {
        return Err(Error::TooFew {
            needed: 1,
            found: 0,
        });
    }
    let n = plan.copies();
    let p_support: Vec<f64> = plan
        .copy_probabilities(truth)?
        .into_iter()
        .map(|(p, _)| snap(p))
        .collect();
    let counts = (0..trials)
        .into_par_iter()
        .fold(
            || VerdictCounts::empty(n),
            |mut acc, t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t);
                let mut hit = None;
                let mut hits = 0;
                for (k, &p) in p_support.iter().enumerate() {
                    if rng.random::<f64>() < p {
                        hits += 1;
                        hit = Some(k);
                    }
                }
                acc.trials += 1;
                match (hits, hit) {
                    (1, Some(k)) => acc.conclusive[k] += 1,
                    _ => acc.inconclusive += 1,
                }
                acc
            },
        )
        .reduce(|| VerdictCounts::empty(n), VerdictCounts::merge);
    Ok(counts)
}
