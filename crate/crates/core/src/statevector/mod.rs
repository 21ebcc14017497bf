//! Dense statevector simulation.
//!
//! Amplitude index bit `q` is qubit `q` (qubit 0 least significant).

pub mod gates;
pub mod noise;
pub mod sampling;

use num_complex::Complex64;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::rng::Rng;

pub use gates::Mat2;
pub use noise::NoiseConfig;
pub use sampling::{estimate_expectation_sampled, sample_counts, Counts, SampledEstimator};

pub const MAX_QUBITS: usize = 26;
const NORM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

fn check_range(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::QubitRange(n));
    }
    Ok(())
}

impl StateVector {
    /// `|0...0>`
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_range(n_qubits)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// `|+...+>`, the uniform superposition.
    pub fn uniform(n_qubits: usize) -> Result<Self> {
        check_range(n_qubits)?;
        let dim = 1usize << n_qubits;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(Self {
            n_qubits,
            amps: vec![a; dim],
        })
    }

    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let mut s = Self::zero(n_qubits)?;
        if index >= s.dim() {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range"
            )));
        }
        s.amps[0] = Complex64::new(0.0, 0.0);
        s.amps[index] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Validates length and normalization.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_range(n_qubits)?;
        if amps.len() != 1 << n_qubits {
            return Err(Error::InvalidArgument(format!(
                "{} amplitudes for {n_qubits} qubits",
                amps.len()
            )));
        }
        let s = Self { n_qubits, amps };
        let n2 = s.norm_sqr();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(s)
    }

    /// No normalization check; used for operator images like `O|s>`.
    pub fn from_amplitudes_unchecked(n_qubits: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n_qubits);
        Self { n_qubits, amps }
    }

    /// Normalized vector of i.i.d. complex Gaussian amplitudes (Haar random).
    pub fn random(n_qubits: usize, rng: &mut Rng) -> Result<Self> {
        check_range(n_qubits)?;
        let mut amps: Vec<Complex64> = (0..1usize << n_qubits)
            .map(|_| {
                let (a, b) = gaussian_pair(rng);
                Complex64::new(a, b)
            })
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|<self|other>|^2`
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::QubitIndex {
                index: q,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    /// Applies a single-qubit unitary to qubit `q`.
    pub fn apply_1q(&mut self, u: &Mat2, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let err = gates::unitarity_error(u);
        if err > 1e-10 {
            return Err(Error::NotUnitary(err));
        }
        self.apply_1q_unchecked(u, q);
        Ok(())
    }

    pub(crate) fn apply_1q_unchecked(&mut self, u: &Mat2, q: usize) {
        let stride = 1usize << q;
        for block in self.amps.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x0, x1) = (*a0, *a1);
                *a0 = u[0][0] * x0 + u[0][1] * x1;
                *a1 = u[1][0] * x0 + u[1][1] * x1;
            }
        }
    }

    pub fn apply_cx(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::SameQubit(control));
        }
        self.apply_cx_unchecked(control, target);
        Ok(())
    }

    pub(crate) fn apply_cx_unchecked(&mut self, control: usize, target: usize) {
        let c = 1usize << control;
        let t = 1usize << target;
        for i in 0..self.amps.len() {
            if i & c != 0 && i & t == 0 {
                self.amps.swap(i, i | t);
            }
        }
    }

    /// Applies `exp(-i (angle/2) P)` without building a matrix.
    pub fn apply_pauli_rotation(&mut self, p: &PauliString, angle: f64) -> Result<()> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                found: p.n_qubits(),
            });
        }
        if p.is_identity() {
            return Err(Error::IdentityRotation);
        }
        self.apply_pauli_rotation_unchecked(p, angle);
        Ok(())
    }

    pub(crate) fn apply_pauli_rotation_unchecked(&mut self, p: &PauliString, angle: f64) {
        let (s, c) = (angle / 2.0).sin_cos();
        let base = p.base_phase();
        let minus_i_sin = Complex64::new(0.0, -s);
        let x = p.x_mask() as usize;
        if x == 0 {
            // diagonal: phase each amplitude by its eigenvalue
            let plus = Complex64::new(c, 0.0) + minus_i_sin * base;
            let minus = Complex64::new(c, 0.0) - minus_i_sin * base;
            let z = p.z_mask();
            for (j, a) in self.amps.iter_mut().enumerate() {
                *a *= if (j as u64 & z).count_ones() & 1 == 1 {
                    minus
                } else {
                    plus
                };
            }
            return;
        }
        let top = 1usize << (63 - (x as u64).leading_zeros());
        for j in 0..self.amps.len() {
            if j & top != 0 {
                continue;
            }
            let k = j ^ x;
            let (aj, ak) = (self.amps[j], self.amps[k]);
            // (P s)_j = phase(k) s_k
            self.amps[j] = aj * c + minus_i_sin * p.phase_of(base, k) * ak;
            self.amps[k] = ak * c + minus_i_sin * p.phase_of(base, j) * aj;
        }
    }

    /// `self <- P self`
    pub(crate) fn apply_pauli_in_place(&mut self, p: &PauliString) {
        let base = p.base_phase();
        let x = p.x_mask() as usize;
        if x == 0 {
            let z = p.z_mask();
            for (j, a) in self.amps.iter_mut().enumerate() {
                let sign = if (j as u64 & z).count_ones() & 1 == 1 {
                    -base
                } else {
                    base
                };
                *a *= sign;
            }
            return;
        }
        let top = 1usize << (63 - (x as u64).leading_zeros());
        for j in 0..self.amps.len() {
            if j & top != 0 {
                continue;
            }
            let k = j ^ x;
            let (aj, ak) = (self.amps[j], self.amps[k]);
            self.amps[j] = p.phase_of(base, k) * ak;
            self.amps[k] = p.phase_of(base, j) * aj;
        }
    }
}

fn gaussian_pair(rng: &mut Rng) -> (f64, f64) {
    // Box-Muller
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
    (r * c, r * s)
}

/// Formats basis index `b` as a bitstring, qubit 0 first.
pub fn bitstring(b: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|q| if (b >> q) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Inverse of [`bitstring`].
pub fn parse_bitstring(s: &str) -> Result<usize> {
    let mut b = 0usize;
    for (q, ch) in s.chars().enumerate() {
        match ch {
            '0' => {}
            '1' => b |= 1 << q,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "bad bitstring character {ch:?} at {q}"
                )))
            }
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_amps(s: &StateVector, expected: &[Complex64], tol: f64) {
        for (a, b) in s.amplitudes().iter().zip(expected) {
            assert!((a - b).norm() <= tol, "{:?} vs {:?}", s.amplitudes(), expected);
        }
    }

    #[test]
    fn init_zero() {
        assert_eq!(
            StateVector::zero(1).unwrap().amplitudes(),
            &[c(1., 0.), c(0., 0.)]
        );
        assert_eq!(
            StateVector::zero(2).unwrap().amplitudes(),
            &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]
        );
        assert!(matches!(StateVector::zero(0), Err(Error::QubitRange(0))));
        assert!(matches!(StateVector::zero(27), Err(Error::QubitRange(27))));
    }

    #[test]
    #[ignore = "allocates 1 GiB"]
    fn init_zero_max() {
        let s = StateVector::zero(26).unwrap();
        assert_eq!(s.norm_sqr(), 1.0);
    }

    #[test]
    fn single_qubit_gates() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_1q(&gates::hadamard(), 0).unwrap();
        assert_amps(&s, &[c(FRAC_1_SQRT_2, 0.), c(FRAC_1_SQRT_2, 0.)], 1e-15);

        let mut s = StateVector::zero(1).unwrap();
        s.apply_1q(&gates::ry(PI), 0).unwrap();
        assert_amps(&s, &[c(0., 0.), c(1., 0.)], 1e-15);

        let u = gates::u3(0.0, 0.0, 0.0);
        assert_eq!(u, gates::identity());
    }

    #[test]
    fn apply_1q_errors() {
        let mut s = StateVector::zero(2).unwrap();
        let bad = [[c(2., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]];
        assert!(matches!(s.apply_1q(&bad, 0), Err(Error::NotUnitary(_))));
        assert!(matches!(
            s.apply_1q(&gates::hadamard(), 2),
            Err(Error::QubitIndex { .. })
        ));
    }

    #[test]
    fn cx_examples() {
        // |10> in label order = qubit 0 set = index 1
        let mut s = StateVector::basis(2, 0b01).unwrap();
        s.apply_cx(0, 1).unwrap();
        assert_eq!(bitstring(1 | 2, 2), "11");
        assert_amps(&s, &[c(0., 0.), c(0., 0.), c(0., 0.), c(1., 0.)], 0.0);

        let mut s = StateVector::zero(2).unwrap();
        s.apply_cx(0, 1).unwrap();
        assert_amps(&s, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)], 0.0);

        let mut rng = SeedStream::new(3).child(0);
        let r = StateVector::random(3, &mut rng).unwrap();
        let mut t = r.clone();
        t.apply_cx(2, 0).unwrap();
        t.apply_cx(2, 0).unwrap();
        assert_eq!(t, r);

        assert!(matches!(s.apply_cx(1, 1), Err(Error::SameQubit(1))));
    }

    #[test]
    fn pauli_rotation_examples() {
        let theta = 0.7;
        let mut s = StateVector::zero(1).unwrap();
        s.apply_pauli_rotation(&PauliString::from_label("Z").unwrap(), theta)
            .unwrap();
        assert_amps(&s, &[Complex64::from_polar(1.0, -theta / 2.0), c(0., 0.)], 1e-15);

        let mut s = StateVector::zero(1).unwrap();
        s.apply_pauli_rotation(&PauliString::from_label("X").unwrap(), PI)
            .unwrap();
        assert_amps(&s, &[c(0., 0.), c(0., -1.)], 1e-15);

        assert!(matches!(
            s.apply_pauli_rotation(&PauliString::identity(1), 1.0),
            Err(Error::IdentityRotation)
        ));
    }

    #[test]
    fn fidelity_examples() {
        let zero = StateVector::zero(1).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        let plus = StateVector::uniform(1).unwrap();
        assert_abs_diff_eq!(zero.fidelity(&zero).unwrap(), 1.0);
        assert_abs_diff_eq!(zero.fidelity(&one).unwrap(), 0.0);
        assert_abs_diff_eq!(zero.fidelity(&plus).unwrap(), 0.5, epsilon = 1e-15);
        let two = StateVector::zero(2).unwrap();
        assert!(zero.fidelity(&two).is_err());
    }

    #[test]
    fn bitstring_roundtrip() {
        assert_eq!(bitstring(0b0110, 4), "0110");
        assert_eq!(bitstring(0b0001, 4), "1000");
        assert_eq!(parse_bitstring("1000").unwrap(), 1);
    }
}
