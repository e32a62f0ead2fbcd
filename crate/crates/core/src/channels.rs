//! Quantum operations in Kraus form.
//!
//! The support of a channel is the span of its vectorized Kraus operators in
//! `C^(d²)`; the support of a set of channels is the sum of the individual
//! supports.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{
    c, kron, span_of, sum_subspaces, vectorize, ComplexMatrix, Subspace, Tolerance,
};
use crate::states::DensityMatrix;

/// Maximum `‖Σ E†E − I‖_max` accepted for a trace-preserving channel.
pub const COMPLETENESS_TOL: f64 = 1e-8;

/// Unitarity / isometry check for builder inputs.
pub const UNITARITY_TOL: f64 = 1e-9;

/// Default dimension guard for [`KrausChannel::tensor_power`].
pub const DEFAULT_POWER_GUARD: usize = 64;

#[derive(Debug, Clone)]
pub struct KrausChannel {
    name: String,
    dim: usize,
    kraus: Vec<ComplexMatrix>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    pub ok: bool,
    pub completeness_defect: f64,
}

impl KrausChannel {
    /// Builds a channel from square operators of a common dimension.
    ///
    /// Operators with max-abs entry below `tol.abs` are rejected. Completeness
    /// is not enforced here; see [`KrausChannel::validate`] and
    /// [`KrausChannel::checked`].
    pub fn new(
        name: impl Into<String>,
        kraus: Vec<ComplexMatrix>,
        tol: &Tolerance,
    ) -> Result<Self> {
        let name = name.into();
        let first = kraus
            .first()
            .ok_or(Error::Empty("channel needs a Kraus operator"))?;
        let dim = first.rows();
        for (index, op) in kraus.iter().enumerate() {
            if !op.is_square() || op.rows() != dim {
                return Err(Error::InvalidShape(format!(
                    "channel `{name}`: Kraus operator {index} is {}x{}, expected {dim}x{dim}",
                    op.rows(),
                    op.cols()
                )));
            }
            if op.max_abs() < tol.abs {
                return Err(Error::ZeroKrausOperator {
                    channel: name,
                    index,
                });
            }
        }
        Ok(Self { name, dim, kraus })
    }

    /// [`KrausChannel::new`] followed by a completeness check.
    pub fn checked(
        name: impl Into<String>,
        kraus: Vec<ComplexMatrix>,
        tol: &Tolerance,
    ) -> Result<Self> {
        let ch = Self::new(name, kraus, tol)?;
        let report = ch.validate();
        if !report.ok {
            return Err(Error::Incomplete {
                channel: ch.name,
                defect: report.completeness_defect,
            });
        }
        Ok(ch)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn validate(&self) -> ValidationReport {
        let sum = self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.dim, self.dim), |acc, e| {
                &acc + &(&e.dagger() * e)
            });
        let defect = sum.max_abs_diff(&ComplexMatrix::identity(self.dim));
        ValidationReport {
            ok: defect <= COMPLETENESS_TOL,
            completeness_defect: defect,
        }
    }

    /// `span{vec(E_k)}` in `C^(d²)`.
    pub fn support(&self, tol: &Tolerance) -> Subspace {
        let vectors: Vec<_> = self.kraus.iter().map(vectorize).collect();
        span_of(&vectors, tol).expect("Kraus list is non-empty with uniform shape")
    }

    /// `Σ_k E_k ρ E_k†`, rescaled to unit trace.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rho.dim(),
            });
        }
        let out = self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.dim, self.dim), |acc, e| {
                &acc + &(&(e * rho.matrix()) * &e.dagger())
            });
        DensityMatrix::normalized(out)
    }

    /// `E ⊗ I` with Kraus operators `E_k ⊗ I_a`.
    pub fn extend_with_identity(&self, ancilla_dim: usize) -> Result<Self> {
        if ancilla_dim == 0 {
            return Err(Error::InvalidShape(
                "ancilla dimension must be positive".into(),
            ));
        }
        let eye = ComplexMatrix::identity(ancilla_dim);
        Ok(Self {
            name: self.name.clone(),
            dim: self.dim * ancilla_dim,
            kraus: self.kraus.iter().map(|e| kron(e, &eye)).collect(),
        })
    }

    /// `E^{⊗N}`; fails when `d^N` exceeds `guard`.
    pub fn tensor_power(&self, copies: usize, guard: usize) -> Result<Self> {
        if copies == 0 {
            return Err(Error::InvalidShape("tensor power needs N >= 1".into()));
        }
        let dim = (self.dim as u128).saturating_pow(copies as u32);
        if dim > guard as u128 {
            return Err(Error::GuardExceeded {
                dim: dim.min(usize::MAX as u128) as usize,
                guard,
            });
        }
        let mut kraus = self.kraus.clone();
        for _ in 1..copies {
            kraus = kraus
                .iter()
                .flat_map(|a| self.kraus.iter().map(move |b| kron(a, b)))
                .collect();
        }
        Ok(Self {
            name: format!("{}^{copies}", self.name),
            dim: dim as usize,
            kraus,
        })
    }

    /// Equivalent Kraus list `F_j = Σ_k V_jk E_k` for an isometry `V`.
    ///
    /// Numerically zero `F_j` are dropped; the map is unchanged.
    pub fn mix_kraus(&self, v: &ComplexMatrix, tol: &Tolerance) -> Result<Self> {
        let k = self.kraus.len();
        if v.cols() != k || v.rows() < k {
            return Err(Error::InvalidShape(format!(
                "isometry must be m x {k} with m >= {k}, got {}x{}",
                v.rows(),
                v.cols()
            )));
        }
        let defect = (&v.dagger() * v).max_abs_diff(&ComplexMatrix::identity(k));
        if defect > UNITARITY_TOL {
            return Err(Error::NotIsometry(defect));
        }
        let kraus: Vec<ComplexMatrix> = (0..v.rows())
            .map(|j| {
                let mut f = DMatrix::<Complex64>::zeros(self.dim, self.dim);
                for (idx, e) in self.kraus.iter().enumerate() {
                    f += e.as_dmatrix() * v.get(j, idx);
                }
                ComplexMatrix::from_dmatrix(f)
            })
            .collect::<Result<_>>()?;
        let kraus = kraus
            .into_iter()
            .filter(|f| f.max_abs() >= tol.abs)
            .collect();
        Self::new(self.name.clone(), kraus, tol)
    }
}

/// Channel `w_I ρ + w_X XρX + w_Y YρY + w_Z ZρZ`; zero-weight terms are dropped.
pub fn pauli_channel(name: impl Into<String>, weights: [f64; 4]) -> Result<KrausChannel> {
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::InvalidWeights(format!(
            "weight {w} is negative or non-finite"
        )));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > UNITARITY_TOL {
        return Err(Error::InvalidWeights(format!("weights sum to {total}")));
    }
    let tol = Tolerance::default();
    let paulis = [
        ComplexMatrix::identity(2),
        ComplexMatrix::pauli_x(),
        ComplexMatrix::pauli_y(),
        ComplexMatrix::pauli_z(),
    ];
    let kraus = weights
        .iter()
        .zip(paulis)
        .filter(|(w, _)| w.sqrt() >= tol.abs)
        .map(|(w, p)| p.scale(c(w.sqrt(), 0.0)))
        .collect();
    KrausChannel::checked(name, kraus, &tol)
}

/// Single-operator channel `UρU†`.
pub fn unitary_channel(name: impl Into<String>, u: ComplexMatrix) -> Result<KrausChannel> {
    if !u.is_square() {
        return Err(Error::InvalidShape(format!(
            "{}x{} unitary",
            u.rows(),
            u.cols()
        )));
    }
    let defect = (&u.dagger() * &u).max_abs_diff(&ComplexMatrix::identity(u.rows()));
    if defect > UNITARITY_TOL {
        return Err(Error::NotUnitary(defect));
    }
    KrausChannel::checked(name, vec![u], &Tolerance::default())
}

/// Sum of the supports of `channels`, optionally leaving out one index.
pub fn joint_support(
    channels: &[KrausChannel],
    exclude: Option<usize>,
    tol: &Tolerance,
) -> Result<Subspace> {
    if let Some(i) = exclude {
        if i >= channels.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: channels.len(),
            });
        }
    }
    let parts: Vec<Subspace> = channels
        .iter()
        .enumerate()
        .filter(|&(j, _)| Some(j) != exclude)
        .map(|(_, ch)| ch.support(tol))
        .collect();
    if parts.is_empty() {
        return match exclude {
            Some(i) => Err(Error::ExclusionEmptiesSet(i)),
            None => Err(Error::Empty("no channels")),
        };
    }
    sum_subspaces(&parts, tol)
}

/// At least two validated channels of a common dimension.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    channels: Vec<KrausChannel>,
    tol: Tolerance,
}

impl ChannelSet {
    pub fn new(channels: Vec<KrausChannel>, tol: Tolerance) -> Result<Self> {
        tol.check()?;
        if channels.len() < 2 {
            return Err(Error::TooFew {
                needed: 2,
                found: channels.len(),
            });
        }
        let dim = channels[0].dim();
        for ch in &channels {
            if ch.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: ch.dim(),
                });
            }
            let report = ch.validate();
            if !report.ok {
                return Err(Error::Incomplete {
                    channel: ch.name().to_string(),
                    defect: report.completeness_defect,
                });
            }
        }
        Ok(Self { channels, tol })
    }

    pub fn channels(&self) -> &[KrausChannel] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.channels[0].dim()
    }

    pub fn tol(&self) -> &Tolerance {
        &self.tol
    }

    pub fn with_tolerance(mut self, tol: Tolerance) -> Result<Self> {
        tol.check()?;
        self.tol = tol;
        Ok(self)
    }

    pub fn names(&self) -> Vec<String> {
        self.channels.iter().map(|c| c.name().to_string()).collect()
    }

    pub fn support(&self, index: usize) -> Result<Subspace> {
        self.channels
            .get(index)
            .map(|ch| ch.support(&self.tol))
            .ok_or(Error::IndexOutOfRange {
                index,
                len: self.len(),
            })
    }

    /// `supp(S_i)` when `exclude = Some(i)`, the support of the whole set otherwise.
    pub fn set_support(&self, exclude: Option<usize>) -> Result<Subspace> {
        joint_support(&self.channels, exclude, &self.tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{contains, projector, CVector};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn bit_flip(p: f64) -> KrausChannel {
        pauli_channel("bit-flip", [p, 1.0 - p, 0.0, 0.0]).unwrap()
    }

    fn phase_flip(q: f64) -> KrausChannel {
        pauli_channel("phase-flip", [q, 0.0, 0.0, 1.0 - q]).unwrap()
    }

    fn pauli_subspace(ops: &[ComplexMatrix]) -> Subspace {
        let v: Vec<_> = ops.iter().map(vectorize).collect();
        span_of(&v, &tol()).unwrap()
    }

    fn same_subspace(a: &Subspace, b: &Subspace) -> bool {
        (&projector(a) - &projector(b)).frobenius_norm() < 1e-9
    }

    #[test]
    fn validation_reports() {
        let id = KrausChannel::new("id", vec![ComplexMatrix::identity(2)], &tol()).unwrap();
        let r = id.validate();
        assert!(r.ok);
        assert_eq!(r.completeness_defect, 0.0);

        assert!(bit_flip(0.3).validate().ok);

        let double = KrausChannel::new(
            "double",
            vec![ComplexMatrix::identity(2), ComplexMatrix::identity(2)],
            &tol(),
        )
        .unwrap();
        let r = double.validate();
        assert!(!r.ok);
        assert!((r.completeness_defect - 1.0).abs() < 1e-15);
        assert!(matches!(
            KrausChannel::checked("double", double.kraus().to_vec(), &tol()),
            Err(Error::Incomplete { .. })
        ));
    }

    #[test]
    fn construction_rejects_bad_operators() {
        assert!(KrausChannel::new("e", vec![], &tol()).is_err());
        assert!(matches!(
            KrausChannel::new(
                "z",
                vec![ComplexMatrix::identity(2), ComplexMatrix::zeros(2, 2)],
                &tol()
            ),
            Err(Error::ZeroKrausOperator { index: 1, .. })
        ));
        assert!(KrausChannel::new(
            "mixed",
            vec![ComplexMatrix::identity(2), ComplexMatrix::identity(3)],
            &tol()
        )
        .is_err());
        assert!(KrausChannel::new("rect", vec![ComplexMatrix::zeros(2, 3)], &tol()).is_err());
    }

    #[test]
    fn supports_of_examples() {
        let s = bit_flip(0.4).support(&tol());
        assert_eq!(s.rank(), 2);
        assert!(same_subspace(
            &s,
            &pauli_subspace(&[ComplexMatrix::identity(2), ComplexMatrix::pauli_x()])
        ));

        let u = unitary_channel("y", ComplexMatrix::pauli_y()).unwrap();
        assert_eq!(u.support(&tol()).rank(), 1);

        let degenerate = bit_flip(1.0);
        assert_eq!(degenerate.kraus().len(), 1);
        assert!(same_subspace(
            &degenerate.support(&tol()),
            &pauli_subspace(&[ComplexMatrix::identity(2)])
        ));
    }

    fn three_pauli() -> Vec<KrausChannel> {
        vec![
            bit_flip(0.5),
            phase_flip(0.5),
            pauli_channel("xz", [0.0, 0.5, 0.0, 0.5]).unwrap(),
        ]
    }

    #[test]
    fn set_support_examples() {
        let set = ChannelSet::new(three_pauli(), tol()).unwrap();
        let s = set.set_support(Some(2)).unwrap();
        assert_eq!(s.rank(), 3);
        assert!(same_subspace(
            &s,
            &pauli_subspace(&[
                ComplexMatrix::identity(2),
                ComplexMatrix::pauli_x(),
                ComplexMatrix::pauli_z()
            ])
        ));
        assert!(
            contains(&s, &set.support(2).unwrap(), &tol())
                .unwrap()
                .contained
        );

        let single = [bit_flip(0.3)];
        let s = joint_support(&single, None, &tol()).unwrap();
        assert!(same_subspace(&s, &single[0].support(&tol())));
        assert!(matches!(
            joint_support(&single, Some(0), &tol()),
            Err(Error::ExclusionEmptiesSet(0))
        ));
        assert!(joint_support(&single, Some(3), &tol()).is_err());

        let twins = ChannelSet::new(vec![bit_flip(0.3), bit_flip(0.3)], tol()).unwrap();
        assert!(same_subspace(
            &twins.set_support(None).unwrap(),
            &twins.support(0).unwrap()
        ));
    }

    #[test]
    fn channel_set_invariants() {
        assert!(ChannelSet::new(vec![bit_flip(0.3)], tol()).is_err());
        let big = unitary_channel("i3", ComplexMatrix::identity(3)).unwrap();
        assert!(ChannelSet::new(vec![bit_flip(0.3), big], tol()).is_err());
        let double = KrausChannel::new(
            "double",
            vec![ComplexMatrix::identity(2), ComplexMatrix::identity(2)],
            &tol(),
        )
        .unwrap();
        assert!(matches!(
            ChannelSet::new(vec![bit_flip(0.3), double], tol()),
            Err(Error::Incomplete { .. })
        ));
        assert!(ChannelSet::new(
            three_pauli(),
            Tolerance {
                rel: -1.0,
                abs: 0.0
            }
        )
        .is_err());
    }

    fn ket(amps: &[Complex64]) -> CVector {
        CVector::from_column_slice(amps)
    }

    #[test]
    fn apply_examples() {
        let id = unitary_channel("id", ComplexMatrix::identity(2)).unwrap();
        let rho = DensityMatrix::from_pure(&ket(&[c(0.6, 0.0), c(0.0, 0.8)])).unwrap();
        assert!(id.apply(&rho).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-15);

        let zero = DensityMatrix::from_pure(&ket(&[c(1.0, 0.0), c(0.0, 0.0)])).unwrap();
        let out = bit_flip(0.5).apply(&zero).unwrap();
        assert!(
            out.matrix()
                .max_abs_diff(DensityMatrix::maximally_mixed(2).matrix())
                < 1e-15
        );

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = ket(&[c(h, 0.0), c(h, 0.0)]);
        let minus = ket(&[c(h, 0.0), c(-h, 0.0)]);
        let q = 0.3;
        let out = phase_flip(q)
            .apply(&DensityMatrix::from_pure(&plus).unwrap())
            .unwrap();
        let want = &ComplexMatrix::outer(&plus).scale(c(q, 0.0))
            + &ComplexMatrix::outer(&minus).scale(c(1.0 - q, 0.0));
        assert!(out.matrix().max_abs_diff(&want) < 1e-15);

        assert!(id.apply(&DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn extension_with_identity() {
        let b = bit_flip(0.3);
        assert_eq!(b.extend_with_identity(1).unwrap().kraus(), b.kraus());
        let ext = b.extend_with_identity(2).unwrap();
        assert_eq!(ext.dim(), 4);
        let want = [
            ComplexMatrix::identity(4).scale(c(0.3f64.sqrt(), 0.0)),
            kron(&ComplexMatrix::pauli_x(), &ComplexMatrix::identity(2))
                .scale(c(0.7f64.sqrt(), 0.0)),
        ];
        for (a, w) in ext.kraus().iter().zip(&want) {
            assert!(a.max_abs_diff(w) < 1e-15);
        }
        assert_eq!(ext.support(&tol()).rank(), 2);
        assert!(ext.validate().ok);
        assert!(b.extend_with_identity(0).is_err());

        let u = unitary_channel("z", ComplexMatrix::pauli_z()).unwrap();
        let ext = u.extend_with_identity(2).unwrap();
        assert_eq!(ext.kraus().len(), 1);
        assert!(ext.kraus()[0]
            .max_abs_diff(&kron(
                &ComplexMatrix::pauli_z(),
                &ComplexMatrix::identity(2)
            ))
            .eq(&0.0));
    }

    #[test]
    fn tensor_powers() {
        let b = bit_flip(0.3);
        assert_eq!(
            b.tensor_power(1, DEFAULT_POWER_GUARD).unwrap().kraus(),
            b.kraus()
        );

        let x = unitary_channel("x", ComplexMatrix::pauli_x()).unwrap();
        let x3 = x.tensor_power(3, DEFAULT_POWER_GUARD).unwrap();
        assert_eq!(x3.kraus().len(), 1);
        let xxx = kron(
            &kron(&ComplexMatrix::pauli_x(), &ComplexMatrix::pauli_x()),
            &ComplexMatrix::pauli_x(),
        );
        assert!(x3.kraus()[0].max_abs_diff(&xxx) < 1e-15);

        // Direct expansion: weights sqrt(p)^a sqrt(1-p)^b on I⊗I, I⊗X, X⊗I, X⊗X.
        let p: f64 = 0.3;
        let (i, xm) = (ComplexMatrix::identity(2), ComplexMatrix::pauli_x());
        let s = (p * (1.0 - p)).sqrt();
        let expected = [
            kron(&i, &i).scale(c(p, 0.0)),
            kron(&i, &xm).scale(c(s, 0.0)),
            kron(&xm, &i).scale(c(s, 0.0)),
            kron(&xm, &xm).scale(c(1.0 - p, 0.0)),
        ];
        let b2 = b.tensor_power(2, DEFAULT_POWER_GUARD).unwrap();
        assert_eq!(b2.kraus().len(), 4);
        for (a, w) in b2.kraus().iter().zip(&expected) {
            assert!(a.max_abs_diff(w) < 1e-15);
        }
        assert!(b2.validate().completeness_defect < 1e-15);

        assert!(matches!(
            b.tensor_power(7, DEFAULT_POWER_GUARD),
            Err(Error::GuardExceeded {
                dim: 128,
                guard: 64
            })
        ));
        assert!(b.tensor_power(0, DEFAULT_POWER_GUARD).is_err());
    }

    #[test]
    fn builders() {
        let b = pauli_channel("b", [0.25, 0.75, 0.0, 0.0]).unwrap();
        assert_eq!(b.kraus().len(), 2);
        assert!(b.kraus()[0].max_abs_diff(&ComplexMatrix::identity(2).scale(c(0.5, 0.0))) < 1e-15);

        let s: f64 = 0.2;
        let e3 = pauli_channel("e3", [0.0, s, 0.0, 1.0 - s]).unwrap();
        assert_eq!(e3.kraus().len(), 2);
        assert!(
            e3.kraus()[0].max_abs_diff(&ComplexMatrix::pauli_x().scale(c(s.sqrt(), 0.0))) < 1e-15
        );
        assert!(
            e3.kraus()[1].max_abs_diff(&ComplexMatrix::pauli_z().scale(c((1.0 - s).sqrt(), 0.0)))
                < 1e-15
        );

        let dep = pauli_channel("dep", [0.25; 4]).unwrap();
        assert_eq!(dep.support(&tol()).rank(), 4);

        assert!(pauli_channel("neg", [1.2, -0.2, 0.0, 0.0]).is_err());
        assert!(pauli_channel("sum", [0.5, 0.4, 0.0, 0.0]).is_err());
        assert!(matches!(
            unitary_channel("bad", ComplexMatrix::identity(2).scale(c(2.0, 0.0))),
            Err(Error::NotUnitary(_))
        ));

        let same = b.mix_kraus(&ComplexMatrix::identity(2), &tol()).unwrap();
        for (a, w) in same.kraus().iter().zip(b.kraus()) {
            assert_eq!(a.max_abs_diff(w), 0.0);
        }
        assert!(matches!(
            b.mix_kraus(&ComplexMatrix::identity(2).scale(c(2.0, 0.0)), &tol()),
            Err(Error::NotIsometry(_))
        ));
        assert!(b.mix_kraus(&ComplexMatrix::identity(3), &tol()).is_err());
    }

    #[test]
    fn mixing_preserves_map_and_support() {
        let b = bit_flip(0.3);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // 3x2 isometry
        let v = ComplexMatrix::new(
            3,
            2,
            vec![
                c(h, 0.0),
                c(0.0, h),
                c(h, 0.0),
                c(0.0, -h),
                c(0.0, 0.0),
                c(0.0, 0.0),
            ],
        )
        .unwrap();
        let mixed = b.mix_kraus(&v, &tol()).unwrap();
        assert_eq!(mixed.kraus().len(), 2);
        assert!(mixed.validate().ok);
        assert!(same_subspace(&mixed.support(&tol()), &b.support(&tol())));
        let rho = DensityMatrix::from_pure(&ket(&[c(0.6, 0.0), c(0.0, 0.8)])).unwrap();
        assert!(
            mixed
                .apply(&rho)
                .unwrap()
                .matrix()
                .max_abs_diff(b.apply(&rho).unwrap().matrix())
                < 1e-14
        );
    }
}
