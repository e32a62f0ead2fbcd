//! Shared generators and independent oracles for integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use opdisc::numerics::{kron, CVector, ComplexMatrix, Tolerance};
use opdisc::random::{random_channel, random_pure_state};
use opdisc::states::{DensityMatrix, MeasurementPlan};
use opdisc::{ChannelSet, KrausChannel};
use rand::Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Probability of every outcome pattern, computed as
/// `tr((Ξ_1 ⊗ … ⊗ Ξ_n) truth^{⊗n})` with `P` before `Q` in binary order.
pub fn brute_force_patterns(plan: &MeasurementPlan, truth: &DensityMatrix) -> Vec<f64> {
    let n = plan.copies();
    let mut big = truth.matrix().clone();
    for _ in 1..n {
        big = kron(&big, truth.matrix());
    }
    (0..1usize << n)
        .map(|bits| {
            let mut op: Option<ComplexMatrix> = None;
            for k in 0..n {
                let m = &plan.per_copy()[k];
                let xi = if bits >> (n - 1 - k) & 1 == 0 {
                    &m.support
                } else {
                    &m.kernel
                };
                op = Some(match op {
                    None => xi.clone(),
                    Some(acc) => kron(&acc, xi),
                });
            }
            (&op.unwrap() * &big).trace().re
        })
        .collect()
}

/// `(success, error)` for true index `i` from the brute-force pattern table:
/// the conclusive pattern for `j` has a single `P` at position `j`.
pub fn brute_force_summary(plan: &MeasurementPlan, truth: &DensityMatrix, i: usize) -> (f64, f64) {
    let n = plan.copies();
    let table = brute_force_patterns(plan, truth);
    let mut success = 0.0;
    let mut error = 0.0;
    for (bits, p) in table.iter().enumerate() {
        let ps: Vec<usize> = (0..n).filter(|&k| bits >> (n - 1 - k) & 1 == 0).collect();
        if ps.len() == 1 {
            if ps[0] == i {
                success += p;
            } else {
                error += p;
            }
        }
    }
    (success, error)
}

/// Convex mixture of two channels; its support lies in the sum of theirs.
pub fn mixture(a: &KrausChannel, b: &KrausChannel, w: f64, name: &str) -> KrausChannel {
    let mut kraus: Vec<ComplexMatrix> = a
        .kraus()
        .iter()
        .map(|e| e.scale(c(w.sqrt(), 0.0)))
        .collect();
    kraus.extend(b.kraus().iter().map(|e| e.scale(c((1.0 - w).sqrt(), 0.0))));
    KrausChannel::checked(name, kraus, &Tolerance::default()).unwrap()
}

/// Random channel set with a mix of generic channels, unitaries, and
/// mixtures of earlier members (which force support containment).
pub fn random_channel_set(d: usize, n: usize, rng: &mut impl Rng) -> ChannelSet {
    let mut channels: Vec<KrausChannel> = Vec::with_capacity(n);
    for i in 0..n {
        let name = format!("c{i}");
        let kind = rng.random_range(0..4);
        let ch = match kind {
            0 if i >= 1 => {
                let a = &channels[rng.random_range(0..i)];
                let b = &channels[rng.random_range(0..i)];
                mixture(a, b, rng.random_range(0.2..0.8), &name)
            }
            1 => random_channel(name, d, 1, rng).unwrap(),
            _ => {
                let k = rng.random_range(1..=4);
                random_channel(name, d, k, rng).unwrap()
            }
        };
        channels.push(ch);
    }
    ChannelSet::new(channels, Tolerance::default()).unwrap()
}

/// Random mixed state of the given rank in `C^dim`.
pub fn random_mixed_state(dim: usize, rank: usize, rng: &mut impl Rng) -> DensityMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    for _ in 0..rank {
        let v = random_pure_state(dim, rng);
        let w = rng.random_range(0.2..1.0);
        m = &m + &ComplexMatrix::outer(&v).scale(c(w, 0.0));
    }
    let tr = m.trace().re;
    DensityMatrix::new(m.scale(c(1.0 / tr, 0.0))).unwrap()
}

/// Gram determinant of a list of vectors (3x3 or smaller, by cofactor expansion).
pub fn gram_det(vs: &[&CVector]) -> f64 {
    let g: Vec<Vec<Complex64>> = vs
        .iter()
        .map(|a| vs.iter().map(|b| a.dotc(b)).collect())
        .collect();
    match g.len() {
        1 => g[0][0].re,
        2 => (g[0][0] * g[1][1] - g[0][1] * g[1][0]).re,
        3 => {
            (g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
                - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
                + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]))
                .re
        }
        n => panic!("gram_det supports up to 3 vectors, got {n}"),
    }
}
