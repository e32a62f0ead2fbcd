//! Feasibility checks and the constructive multi-use strategy.
//!
//! A set `{E_1, …, E_n}` is unambiguously distinguishable with one use (and
//! an ancilla of the same dimension) iff no `supp(E_i)` lies inside the sum of
//! the other supports. With several uses the condition weakens to pairwise
//! non-containment, and `n` uses with a full-Schmidt-rank probe per use and the
//! separable per-copy measurement suffice.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channels::ChannelSet;
use crate::error::{Error, Result};
use crate::numerics::{contains, CVector};
use crate::random::random_pure_state;
use crate::states::{
    build_multicopy_measurement, make_probe, sample_outcomes, states_unambiguously_distinguishable,
    DensityMatrix, MeasurementPlan, ProbeState, VerdictCounts, VerdictSummary,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    SingleUse,
    MultiUse,
}

/// One `supp(E_channel) ⊆ Σ supp(E_j), j ∈ against` test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContainmentCheck {
    pub channel: usize,
    pub against: Vec<usize>,
    pub contained: bool,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub mode: Mode,
    pub per_channel: Vec<bool>,
    pub overall: bool,
    /// Every test performed, so near-degenerate residuals stay visible.
    pub checks: Vec<ContainmentCheck>,
    /// The failing tests.
    pub witnesses: Vec<ContainmentCheck>,
}

impl FeasibilityReport {
    fn from_checks(mode: Mode, n: usize, checks: Vec<ContainmentCheck>) -> Self {
        let mut per_channel = vec![true; n];
        for ch in checks.iter().filter(|c| c.contained) {
            per_channel[ch.channel] = false;
        }
        let witnesses: Vec<_> = checks.iter().filter(|c| c.contained).cloned().collect();
        Self {
            mode,
            overall: per_channel.iter().all(|&b| b),
            per_channel,
            checks,
            witnesses,
        }
    }
}

/// Single use with an ancilla: channel `i` passes iff `supp(E_i) ⊄ supp(S_i)`.
pub fn check_single_use(set: &ChannelSet) -> FeasibilityReport {
    let n = set.len();
    let checks = (0..n)
        .map(|i| {
            let rest = set
                .set_support(Some(i))
                .expect("set has at least two channels");
            let own = set.support(i).expect("index in range");
            let rep = contains(&rest, &own, set.tol()).expect("common ambient dimension");
            ContainmentCheck {
                channel: i,
                against: (0..n).filter(|&j| j != i).collect(),
                contained: rep.contained,
                max_residual: rep.max_residual,
            }
        })
        .collect();
    FeasibilityReport::from_checks(Mode::SingleUse, n, checks)
}

/// Multiple uses: every ordered pair must satisfy `supp(E_i) ⊄ supp(E_j)`.
/// A failing pair rules out every number of uses.
pub fn check_multi_use(set: &ChannelSet) -> FeasibilityReport {
    let n = set.len();
    let supports: Vec<_> = (0..n)
        .map(|i| set.support(i).expect("index in range"))
        .collect();
    let mut checks = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let rep =
                contains(&supports[j], &supports[i], set.tol()).expect("common ambient dimension");
            checks.push(ContainmentCheck {
                channel: i,
                against: vec![j],
                contained: rep.contained,
                max_residual: rep.max_residual,
            });
        }
    }
    FeasibilityReport::from_checks(Mode::MultiUse, n, checks)
}

/// `n` uses, each fed the same probe, measured copy by copy.
#[derive(Debug, Clone)]
pub struct Strategy {
    channel_names: Vec<String>,
    probe: ProbeState,
    per_use_outputs: Vec<DensityMatrix>,
    plan: MeasurementPlan,
}

impl Strategy {
    /// Reassembles a strategy from its parts, checking their shapes agree.
    pub fn from_parts(
        channel_names: Vec<String>,
        probe: ProbeState,
        per_use_outputs: Vec<DensityMatrix>,
        plan: MeasurementPlan,
    ) -> Result<Self> {
        let n = channel_names.len();
        for len in [per_use_outputs.len(), plan.copies()] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: len,
                });
            }
        }
        let dim = probe.vector().len();
        for d in per_use_outputs
            .iter()
            .map(DensityMatrix::dim)
            .chain(std::iter::once(plan.dim()))
        {
            if d != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: d,
                });
            }
        }
        Ok(Self {
            channel_names,
            probe,
            per_use_outputs,
            plan,
        })
    }

    /// Number of channel uses; equals the number of channels.
    pub fn uses(&self) -> usize {
        self.channel_names.len()
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn probe(&self) -> &ProbeState {
        &self.probe
    }

    /// `(E_i ⊗ I)(|ψ⟩⟨ψ|)` for every channel.
    pub fn per_use_outputs(&self) -> &[DensityMatrix] {
        &self.per_use_outputs
    }

    pub fn plan(&self) -> &MeasurementPlan {
        &self.plan
    }
}

/// Builds the `n`-use strategy; fails with the first nested pair if the set
/// does not pass [`check_multi_use`].
pub fn build_strategy(set: &ChannelSet, probe_coeffs: Option<&[f64]>) -> Result<Strategy> {
    let report = check_multi_use(set);
    if let Some(w) = report.witnesses.first() {
        return Err(Error::Infeasible {
            contained: w.channel,
            container: w.against[0],
            residual: w.max_residual,
        });
    }
    let d = set.dim();
    let probe = make_probe(d, probe_coeffs)?;
    let input = probe.density();
    let per_use_outputs = set
        .channels()
        .iter()
        .map(|ch| ch.extend_with_identity(d)?.apply(&input))
        .collect::<Result<Vec<_>>>()?;
    let plan = build_multicopy_measurement(&per_use_outputs, set.tol())?;
    Strategy::from_parts(set.names(), probe, per_use_outputs, plan)
}

/// Exact success / error / inconclusive probabilities for each true channel.
pub fn evaluate_strategy(s: &Strategy) -> Vec<VerdictSummary> {
    s.per_use_outputs
        .iter()
        .enumerate()
        .map(|(i, truth)| {
            let per_copy = s
                .plan
                .copy_probabilities(truth)
                .expect("outputs share the plan dimension");
            conclusive_summary(&per_copy, i)
        })
        .collect()
}

/// Summary from per-copy `(tr(Pρ), tr(Qρ))` pairs without enumerating patterns.
fn conclusive_summary(per_copy: &[(f64, f64)], truth: usize) -> VerdictSummary {
    let conclusive = |i: usize| -> f64 {
        per_copy
            .iter()
            .enumerate()
            .map(|(k, &(p, q))| if k == i { p } else { q })
            .product()
    };
    let success = conclusive(truth);
    let error: f64 = (0..per_copy.len())
        .filter(|&j| j != truth)
        .map(conclusive)
        .sum();
    VerdictSummary {
        success,
        error,
        inconclusive: 1.0 - success - error,
    }
}

/// Monte Carlo run of the strategy with channel `true_index` in the box.
pub fn simulate_strategy(
    s: &Strategy,
    true_index: usize,
    trials: u64,
    seed: u64,
) -> Result<VerdictCounts> {
    let truth = s
        .per_use_outputs
        .get(true_index)
        .ok_or(Error::IndexOutOfRange {
            index: true_index,
            len: s.uses(),
        })?;
    sample_outcomes(&s.plan, truth, trials, seed)
}

/// Result of searching ancilla-free pure inputs.
///
/// Sampling cannot prove impossibility: a negative result only means no
/// witness was found among the tested inputs.
#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub any_input_found: bool,
    pub tested: usize,
    pub witnesses_found: usize,
    /// First input whose outputs were all distinguishable, as `[re, im]` pairs.
    pub first_witness: Option<Vec<[f64; 2]>>,
}

impl ScanReport {
    pub fn summary(&self) -> String {
        if self.any_input_found {
            format!(
                "found {} witness input(s) among {} samples",
                self.witnesses_found, self.tested
            )
        } else {
            format!("no witness found among {} samples", self.tested)
        }
    }
}

/// Tests explicit ancilla-free inputs `|φ⟩ ∈ C^d`.
pub fn no_ancilla_scan_inputs(set: &ChannelSet, inputs: &[CVector]) -> Result<ScanReport> {
    let mut report = ScanReport {
        any_input_found: false,
        tested: 0,
        witnesses_found: 0,
        first_witness: None,
    };
    for phi in inputs {
        if phi.len() != set.dim() {
            return Err(Error::DimensionMismatch {
                expected: set.dim(),
                found: phi.len(),
            });
        }
        let rho = DensityMatrix::from_pure(phi)?;
        let outputs = set
            .channels()
            .iter()
            .map(|ch| ch.apply(&rho))
            .collect::<Result<Vec<_>>>()?;
        report.tested += 1;
        if states_unambiguously_distinguishable(&outputs, set.tol())?
            .iter()
            .all(|&b| b)
        {
            report.witnesses_found += 1;
            if report.first_witness.is_none() {
                report.first_witness = Some(phi.iter().map(|z| [z.re, z.im]).collect());
            }
        }
    }
    report.any_input_found = report.witnesses_found > 0;
    Ok(report)
}

/// Heuristic refuter: tests `samples` random pure inputs without an ancilla.
/// Sample `k` is drawn from ChaCha8 stream `k` under `seed`.
pub fn no_ancilla_single_use_scan(
    set: &ChannelSet,
    samples: usize,
    seed: u64,
) -> Result<ScanReport> {
    if samples == 0 {
        return Err(Error::TooFew {
            needed: 1,
            found: 0,
        });
    }
    let inputs: Vec<CVector> = (0..samples as u64)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            random_pure_state(set.dim(), &mut rng)
        })
        .collect();
    no_ancilla_scan_inputs(set, &inputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{pauli_channel, unitary_channel, KrausChannel};
    use crate::numerics::{c, ComplexMatrix, Tolerance};

    fn bit_flip(p: f64) -> KrausChannel {
        pauli_channel("bit-flip", [p, 1.0 - p, 0.0, 0.0]).unwrap()
    }

    fn phase_flip(q: f64) -> KrausChannel {
        pauli_channel("phase-flip", [q, 0.0, 0.0, 1.0 - q]).unwrap()
    }

    fn xz(s: f64) -> KrausChannel {
        pauli_channel("xz", [0.0, s, 0.0, 1.0 - s]).unwrap()
    }

    fn set(chs: Vec<KrausChannel>) -> ChannelSet {
        ChannelSet::new(chs, Tolerance::default()).unwrap()
    }

    fn identity() -> KrausChannel {
        unitary_channel("id", ComplexMatrix::identity(2)).unwrap()
    }

    #[test]
    fn bit_and_phase_flip_single_use() {
        for (p, q) in [(0.5, 0.5), (0.2, 0.7), (0.9, 0.1)] {
            let r = check_single_use(&set(vec![bit_flip(p), phase_flip(q)]));
            assert!(r.overall);
            assert_eq!(r.mode, Mode::SingleUse);
            assert!(r.witnesses.is_empty());
            assert_eq!(r.checks.len(), 2);
        }
    }

    #[test]
    fn three_pauli_needs_multiple_uses() {
        let s = set(vec![bit_flip(0.5), phase_flip(0.5), xz(0.5)]);
        let single = check_single_use(&s);
        assert!(!single.overall);
        // span{I,X,Z} swallows every channel's support, not only the third.
        assert_eq!(single.per_channel, vec![false, false, false]);
        let third = single.witnesses.iter().find(|w| w.channel == 2).unwrap();
        assert_eq!(third.against, vec![0, 1]);
        assert!(third.max_residual < 1e-12);

        let multi = check_multi_use(&s);
        assert!(multi.overall);
        assert_eq!(multi.checks.len(), 6);
    }

    #[test]
    fn unitary_pairs() {
        let x = unitary_channel("x", ComplexMatrix::pauli_x()).unwrap();
        assert!(check_single_use(&set(vec![identity(), x])).overall);
        let phase =
            unitary_channel("phase", ComplexMatrix::identity(2).scale(c(0.6, 0.8))).unwrap();
        let r = check_single_use(&set(vec![identity(), phase]));
        assert!(!r.overall);
        assert_eq!(r.witnesses.len(), 2);
    }

    #[test]
    fn nested_pair_fails_multi_use() {
        let s = set(vec![bit_flip(0.3), identity()]);
        let r = check_multi_use(&s);
        assert!(!r.overall);
        assert_eq!(r.per_channel, vec![true, false]);
        assert_eq!(r.witnesses.len(), 1);
        assert_eq!((r.witnesses[0].channel, r.witnesses[0].against[0]), (1, 0));
        assert_eq!(check_single_use(&s).overall, r.overall);
        assert!(matches!(
            build_strategy(&s, None),
            Err(Error::Infeasible {
                contained: 1,
                container: 0,
                ..
            })
        ));
    }

    #[test]
    fn two_channel_strategy_at_half() {
        let s = build_strategy(&set(vec![bit_flip(0.5), phase_flip(0.5)]), None).unwrap();
        assert_eq!(s.uses(), 2);
        assert_eq!(s.plan().dim(), 4);
        let eval = evaluate_strategy(&s);
        for v in &eval {
            assert!((v.success - 0.5).abs() < 1e-10);
            assert!(v.error.abs() <= 1e-12);
            assert!((v.inconclusive - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn three_channel_strategy_at_half() {
        let s = build_strategy(&set(vec![bit_flip(0.5), phase_flip(0.5), xz(0.5)]), None).unwrap();
        assert_eq!(s.uses(), 3);
        for v in evaluate_strategy(&s) {
            assert!((v.success - 0.25).abs() < 1e-10);
            assert!(v.error.abs() <= 1e-12);
        }
    }

    #[test]
    fn orthogonal_unitaries_always_succeed() {
        let x = unitary_channel("x", ComplexMatrix::pauli_x()).unwrap();
        let s = build_strategy(&set(vec![identity(), x]), None).unwrap();
        for v in evaluate_strategy(&s) {
            assert!((v.success - 1.0).abs() < 1e-12);
        }
        let counts = simulate_strategy(&s, 1, 10_000, 3).unwrap();
        assert_eq!(counts.conclusive, vec![0, 10_000]);
        assert!(simulate_strategy(&s, 2, 10, 3).is_err());
    }

    #[test]
    fn strategy_rejects_bad_probe() {
        let s = set(vec![bit_flip(0.5), phase_flip(0.5)]);
        assert!(matches!(
            build_strategy(&s, Some(&[1.0, 0.0])),
            Err(Error::NonPositiveSchmidt { .. })
        ));
        let strat = build_strategy(&s, Some(&[0.6, 0.8])).unwrap();
        for v in evaluate_strategy(&strat) {
            assert!(v.success > 0.0);
            assert!(v.error.abs() <= 1e-12);
        }
    }

    #[test]
    fn summary_formula_matches_enumeration() {
        use crate::states::plan_outcome_probabilities;
        let s = build_strategy(
            &set(vec![bit_flip(0.3), phase_flip(0.6), xz(0.8)]),
            Some(&[0.6, 0.8]),
        )
        .unwrap();
        let eval = evaluate_strategy(&s);
        for (i, truth) in s.per_use_outputs().iter().enumerate() {
            let d = plan_outcome_probabilities(s.plan(), truth, Some(i)).unwrap();
            let e = d.summary.unwrap();
            assert!((e.success - eval[i].success).abs() < 1e-12);
            assert!((e.error - eval[i].error).abs() < 1e-12);
        }
    }

    #[test]
    fn scan_examples() {
        let s = set(vec![bit_flip(0.5), phase_flip(0.5)]);
        let r = no_ancilla_single_use_scan(&s, 200, 11).unwrap();
        assert!(!r.any_input_found);
        assert_eq!(r.tested, 200);
        assert_eq!(r.summary(), "no witness found among 200 samples");

        let x = unitary_channel("x", ComplexMatrix::pauli_x()).unwrap();
        let u = set(vec![identity(), x]);
        let zero = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let r = no_ancilla_scan_inputs(&u, &[zero]).unwrap();
        assert!(r.any_input_found);
        assert_eq!(r.first_witness, Some(vec![[1.0, 0.0], [0.0, 0.0]]));

        let a = no_ancilla_single_use_scan(&u, 1, 5).unwrap();
        let b = no_ancilla_single_use_scan(&u, 1, 5).unwrap();
        assert_eq!(a.first_witness, b.first_witness);
        assert_eq!(a.tested, 1);
        assert!(no_ancilla_single_use_scan(&u, 0, 5).is_err());
    }
}
