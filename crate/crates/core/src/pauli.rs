//! Pauli strings and real-weighted Pauli-sum observables.
//!
//! A string on `n` qubits is stored as two bit masks: bit `q` of `x_mask` is
//! set when qubit `q` carries X or Y, bit `q` of `z_mask` when it carries Z or
//! Y. Labels are read left to right, so character 0 acts on qubit 0, and qubit
//! 0 is the lowest-order bit of a statevector index. That convention is used
//! everywhere in the crate.
//!
//! Acting with a string on a basis state is an index XOR plus a phase:
//! `P|b> = i^{#Y} (-1)^{popcount(b & z_mask)} |b ^ x_mask>`.

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::statevector::StateVector;

const MAX_LABEL_QUBITS: usize = 64;
/// Cancelled coefficients below this magnitude are dropped when merging.
pub const DROP_THRESHOLD: f64 = 1e-15;
/// Dimension from which matvec and expectation split work across threads.
const PARALLEL_DIM: usize = 1 << 14;
/// Fixed chunk for deterministic partial sums.
const CHUNK: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x_mask: u64,
    z_mask: u64,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            x_mask: 0,
            z_mask: 0,
        }
    }

    /// Builds a string from raw masks. Bits above `n_qubits` are rejected.
    pub fn from_masks(n_qubits: usize, x_mask: u64, z_mask: u64) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_LABEL_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "Pauli string width {n_qubits} not in 1..={MAX_LABEL_QUBITS}"
            )));
        }
        let allowed = low_mask(n_qubits);
        if (x_mask | z_mask) & !allowed != 0 {
            return Err(Error::InvalidArgument(format!(
                "mask bits beyond qubit {} are set",
                n_qubits - 1
            )));
        }
        Ok(Self {
            n_qubits,
            x_mask,
            z_mask,
        })
    }

    /// Parses a label over `{I,X,Y,Z}`; character 0 is qubit 0.
    pub fn from_label(label: &str) -> Result<Self> {
        if label.is_empty() {
            return Err(Error::EmptyLabel);
        }
        let mut x_mask = 0u64;
        let mut z_mask = 0u64;
        let mut n = 0;
        for (position, c) in label.chars().enumerate() {
            let p = Pauli::from_char(c).ok_or(Error::PauliParse { position, found: c })?;
            if position >= MAX_LABEL_QUBITS {
                return Err(Error::TooLarge {
                    what: "label length",
                    value: label.chars().count(),
                    limit: MAX_LABEL_QUBITS,
                });
            }
            let (x, z) = p.bits();
            x_mask |= (x as u64) << position;
            z_mask |= (z as u64) << position;
            n += 1;
        }
        Self::from_masks(n, x_mask, z_mask)
    }

    /// String acting as `ops[k].1` on qubit `ops[k].0`, identity elsewhere.
    pub fn from_sparse(n_qubits: usize, ops: &[(usize, Pauli)]) -> Result<Self> {
        let mut x_mask = 0u64;
        let mut z_mask = 0u64;
        for &(q, p) in ops {
            if q >= n_qubits {
                return Err(Error::QubitIndex { index: q, n_qubits });
            }
            let (x, z) = p.bits();
            x_mask |= (x as u64) << q;
            z_mask |= (z as u64) << q;
        }
        Self::from_masks(n_qubits, x_mask, z_mask)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }

    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    pub fn is_diagonal(&self) -> bool {
        self.x_mask == 0
    }

    pub fn support(&self) -> u64 {
        self.x_mask | self.z_mask
    }

    pub fn weight(&self) -> usize {
        self.support().count_ones() as usize
    }

    pub fn get(&self, q: usize) -> Pauli {
        let x = (self.x_mask >> q) & 1 == 1;
        let z = (self.z_mask >> q) & 1 == 1;
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn label(&self) -> String {
        (0..self.n_qubits).map(|q| self.get(q).to_char()).collect()
    }

    /// True when on every qubit the two strings agree or one is I.
    pub fn qubit_wise_commutes(&self, other: &PauliString) -> bool {
        let overlap = self.support() & other.support();
        (self.x_mask ^ other.x_mask) & overlap == 0 && (self.z_mask ^ other.z_mask) & overlap == 0
    }

    /// Cyclic relabelling q -> q + shift (mod n).
    pub fn rotated(&self, shift: usize) -> PauliString {
        let n = self.n_qubits;
        let rot = |m: u64| {
            let s = shift % n;
            if s == 0 {
                return m;
            }
            ((m << s) | (m >> (n - s))) & low_mask(n)
        };
        PauliString {
            n_qubits: n,
            x_mask: rot(self.x_mask),
            z_mask: rot(self.z_mask),
        }
    }

    /// `i^{#Y}`, the phase every basis state picks up before the Z signs.
    #[inline]
    pub(crate) fn base_phase(&self) -> Complex64 {
        match (self.x_mask & self.z_mask).count_ones() % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Phase `p` with `P|b> = p |b ^ x_mask>`.
    #[inline]
    pub(crate) fn phase_of(&self, base: Complex64, b: usize) -> Complex64 {
        if (b as u64 & self.z_mask).count_ones() & 1 == 1 {
            -base
        } else {
            base
        }
    }

    /// Returns `P|s>`; the input is left untouched.
    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        check_width(self.n_qubits, s.n_qubits())?;
        let base = self.base_phase();
        let x = self.x_mask as usize;
        let amps = s.amplitudes();
        let out: Vec<Complex64> = (0..amps.len())
            .map(|j| {
                let k = j ^ x;
                self.phase_of(base, k) * amps[k]
            })
            .collect();
        Ok(StateVector::from_amplitudes_unchecked(s.n_qubits(), out))
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PauliString::from_label(s)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub string: PauliString,
}

/// Hermitian operator `sum_k c_k P_k` with real `c_k` and distinct `P_k`.
///
/// Terms keep first-insertion order; that order drives the QAOA cost layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl Observable {
    /// Merges duplicate strings and drops cancelled terms.
    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, PauliString)>,
    {
        if n_qubits == 0 || n_qubits > MAX_LABEL_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "observable width {n_qubits} not in 1..={MAX_LABEL_QUBITS}"
            )));
        }
        let mut merged: IndexMap<PauliString, f64> = IndexMap::new();
        for (c, p) in terms {
            check_width(n_qubits, p.n_qubits())?;
            if !c.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite coefficient on {p}")));
            }
            *merged.entry(p).or_insert(0.0) += c;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| c.abs() > DROP_THRESHOLD)
            .map(|(string, coefficient)| PauliTerm { coefficient, string })
            .collect();
        Ok(Self { n_qubits, terms })
    }

    /// Convenience constructor from `(coefficient, label)` pairs.
    pub fn from_labels(terms: &[(f64, &str)]) -> Result<Self> {
        let parsed = terms
            .iter()
            .map(|&(c, l)| PauliString::from_label(l).map(|p| (c, p)))
            .collect::<Result<Vec<_>>>()?;
        let n = parsed
            .first()
            .map(|(_, p)| p.n_qubits())
            .ok_or_else(|| Error::InvalidArgument("no terms".into()))?;
        Self::from_terms(n, parsed)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(|t| t.string.is_diagonal())
    }

    /// Coefficient on the identity string, zero if absent.
    pub fn identity_coefficient(&self) -> f64 {
        self.terms
            .iter()
            .find(|t| t.string.is_identity())
            .map_or(0.0, |t| t.coefficient)
    }

    pub fn scaled(&self, factor: f64) -> Observable {
        Observable::from_terms(
            self.n_qubits,
            self.terms.iter().map(|t| (factor * t.coefficient, t.string)),
        )
        .expect("scaling preserves validity")
    }

    /// `sum_k |c_k|`, an upper bound on the spectral radius.
    pub fn spectral_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }

    /// `<b|O|b>` for computational basis state `b`.
    pub fn diagonal_element(&self, b: usize) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.string.is_diagonal())
            .map(|t| {
                if (b as u64 & t.string.z_mask).count_ones() & 1 == 1 {
                    -t.coefficient
                } else {
                    t.coefficient
                }
            })
            .sum()
    }

    /// `O|s>`, computed term by term without a matrix.
    ///
    /// Every output amplitude sums its terms in a fixed order, so the result
    /// is identical for any worker count.
    pub fn matvec(&self, s: &StateVector) -> Result<StateVector> {
        check_width(self.n_qubits, s.n_qubits())?;
        let mut out = vec![Complex64::new(0.0, 0.0); s.dim()];
        self.matvec_into(s.amplitudes(), &mut out);
        Ok(StateVector::from_amplitudes_unchecked(s.n_qubits(), out))
    }

    /// Raw matvec on amplitude slices, used by the Lanczos solver.
    pub(crate) fn matvec_into(&self, input: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(input.len(), out.len());
        let prepared: Vec<(f64, usize, u64, Complex64)> = self
            .terms
            .iter()
            .map(|t| {
                (
                    t.coefficient,
                    t.string.x_mask as usize,
                    t.string.z_mask,
                    t.string.base_phase(),
                )
            })
            .collect();
        let kernel = |offset: usize, chunk: &mut [Complex64]| {
            for (i, o) in chunk.iter_mut().enumerate() {
                let j = offset + i;
                let mut acc = Complex64::new(0.0, 0.0);
                for &(c, x, z, base) in &prepared {
                    let k = j ^ x;
                    let sign = if (k as u64 & z).count_ones() & 1 == 1 {
                        -c
                    } else {
                        c
                    };
                    acc += base * input[k] * sign;
                }
                *o = acc;
            }
        };
        if out.len() >= PARALLEL_DIM {
            out.par_chunks_mut(CHUNK)
                .enumerate()
                .for_each(|(ci, chunk)| kernel(ci * CHUNK, chunk));
        } else {
            kernel(0, out);
        }
    }

    /// Complex `<s|O|s>` without the normalization or reality checks.
    pub fn expectation_complex(&self, s: &StateVector) -> Result<Complex64> {
        check_width(self.n_qubits, s.n_qubits())?;
        let amps = s.amplitudes();
        let prepared: Vec<(f64, usize, u64, Complex64)> = self
            .terms
            .iter()
            .map(|t| {
                (
                    t.coefficient,
                    t.string.x_mask as usize,
                    t.string.z_mask,
                    t.string.base_phase(),
                )
            })
            .collect();
        let partial = |range: std::ops::Range<usize>| {
            let mut total = Complex64::new(0.0, 0.0);
            for &(c, x, z, base) in &prepared {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in range.clone() {
                    let k = j ^ x;
                    let v = amps[j].conj() * amps[k];
                    if (k as u64 & z).count_ones() & 1 == 1 {
                        acc -= v;
                    } else {
                        acc += v;
                    }
                }
                total += base * acc * c;
            }
            total
        };
        let dim = amps.len();
        if dim >= PARALLEL_DIM {
            let parts: Vec<Complex64> = (0..dim.div_ceil(CHUNK))
                .into_par_iter()
                .map(|ci| partial(ci * CHUNK..((ci + 1) * CHUNK).min(dim)))
                .collect();
            Ok(parts.into_iter().sum())
        } else {
            Ok(partial(0..dim))
        }
    }

    /// `Re <s|O|s>` for a normalized state.
    ///
    /// Fails if the state is off-normal by more than 1e-8 or if the imaginary
    /// part exceeds 1e-10 (relative to the operator scale), which would mean
    /// the operator was not built Hermitian.
    pub fn expectation(&self, s: &StateVector) -> Result<f64> {
        let n2 = s.norm_sqr();
        if (n2 - 1.0).abs() > 1e-8 {
            return Err(Error::NotNormalized(n2));
        }
        let v = self.expectation_complex(s)?;
        if v.im.abs() > 1e-10 * self.spectral_bound().max(1.0) {
            return Err(Error::NonHermitian(v.im));
        }
        Ok(v.re)
    }

    /// One `coefficient<TAB>label` line per term.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for t in &self.terms {
            s.push_str(&format!("{}\t{}\n", t.coefficient, t.string.label()));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        let mut width = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (c, label) = line.split_once('\t').ok_or_else(|| {
                Error::InvalidArgument(format!("line {}: expected coefficient<TAB>label", i + 1))
            })?;
            let c: f64 = c
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("line {}: bad coefficient {c:?}", i + 1)))?;
            let p = PauliString::from_label(label.trim())?;
            width.get_or_insert(p.n_qubits());
            terms.push((c, p));
        }
        let n = width.ok_or_else(|| Error::InvalidArgument("empty observable text".into()))?;
        Self::from_terms(n, terms)
    }
}

fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn check_width(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::QubitMismatch { expected, found });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn label_encoding() {
        let p = PauliString::from_label("II").unwrap();
        assert_eq!((p.x_mask(), p.z_mask()), (0b00, 0b00));
        let p = PauliString::from_label("ZZ").unwrap();
        assert_eq!((p.x_mask(), p.z_mask()), (0b00, 0b11));
        // X on qubit 0, Y on qubit 1
        let p = PauliString::from_label("XY").unwrap();
        assert_eq!((p.x_mask(), p.z_mask()), (0b11, 0b10));
        assert_eq!(p.label(), "XY");
    }

    #[test]
    fn label_errors_name_position() {
        match PauliString::from_label("XQZ") {
            Err(Error::PauliParse { position, found }) => {
                assert_eq!(position, 1);
                assert_eq!(found, 'Q');
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(PauliString::from_label(""), Err(Error::EmptyLabel)));
    }

    #[test]
    fn single_qubit_actions() {
        let zero = StateVector::zero(1).unwrap();
        let z = PauliString::from_label("Z").unwrap().apply(&zero).unwrap();
        assert_eq!(z.amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        let x = PauliString::from_label("X").unwrap().apply(&zero).unwrap();
        assert_eq!(x.amplitudes(), &[c(0.0, 0.0), c(1.0, 0.0)]);
        let y = PauliString::from_label("Y").unwrap().apply(&zero).unwrap();
        assert_eq!(y.amplitudes(), &[c(0.0, 0.0), c(0.0, 1.0)]);
    }

    #[test]
    fn apply_rejects_width_mismatch() {
        let s = StateVector::zero(2).unwrap();
        let p = PauliString::from_label("Z").unwrap();
        assert!(matches!(p.apply(&s), Err(Error::QubitMismatch { .. })));
    }

    #[test]
    fn matvec_examples() {
        let zero = StateVector::zero(1).unwrap();
        let o = Observable::from_labels(&[(2.0, "Z")]).unwrap();
        let r = o.matvec(&zero).unwrap();
        assert_eq!(r.amplitudes(), &[c(2.0, 0.0), c(0.0, 0.0)]);
        let o = Observable::from_labels(&[(1.0, "X"), (1.0, "Z")]).unwrap();
        let r = o.matvec(&zero).unwrap();
        assert_eq!(r.amplitudes(), &[c(1.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn expectation_examples() {
        let zero = StateVector::zero(1).unwrap();
        let z = Observable::from_labels(&[(1.0, "Z")]).unwrap();
        assert_abs_diff_eq!(z.expectation(&zero).unwrap(), 1.0, epsilon = 1e-15);
        let plus = StateVector::uniform(1).unwrap();
        let x = Observable::from_labels(&[(1.0, "X")]).unwrap();
        assert_abs_diff_eq!(x.expectation(&plus).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn expectation_rejects_unnormalized() {
        let s = StateVector::from_amplitudes(1, vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(s.is_err());
        let s = StateVector::from_amplitudes_unchecked(1, vec![c(1.0, 0.0), c(1.0, 0.0)]);
        let z = Observable::from_labels(&[(1.0, "Z")]).unwrap();
        assert!(matches!(z.expectation(&s), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn merging_and_cancellation() {
        let o = Observable::from_labels(&[(1.0, "XZ"), (0.5, "ZZ"), (-1.0, "XZ"), (0.25, "ZZ")]).unwrap();
        assert_eq!(o.len(), 1);
        assert_eq!(o.terms()[0].string.label(), "ZZ");
        assert_abs_diff_eq!(o.terms()[0].coefficient, 0.75);
    }

    #[test]
    fn spectral_bound_examples() {
        assert_eq!(
            Observable::from_labels(&[(2.0, "Z")]).unwrap().spectral_bound(),
            2.0
        );
        let o = Observable::from_labels(&[(1.0, "X"), (1.0, "Z")]).unwrap();
        assert_eq!(o.spectral_bound(), 2.0);
    }

    #[test]
    fn text_roundtrip() {
        let o = Observable::from_labels(&[(0.1, "XXI"), (-2.5, "IYY"), (1e-3, "ZIZ")]).unwrap();
        let text = o.to_text();
        assert_eq!(text.lines().next().unwrap(), "0.1\tXXI");
        assert_eq!(Observable::from_text(&text).unwrap(), o);
    }

    #[test]
    fn qubit_wise_commutation() {
        let a = PauliString::from_label("XXI").unwrap();
        let b = PauliString::from_label("IXZ").unwrap();
        let c = PauliString::from_label("ZII").unwrap();
        assert!(a.qubit_wise_commutes(&b));
        assert!(!a.qubit_wise_commutes(&c));
    }

    #[test]
    fn rotation_is_cyclic() {
        let p = PauliString::from_label("XYIZ").unwrap();
        assert_eq!(p.rotated(1).label(), "ZXYI");
        assert_eq!(p.rotated(4), p);
    }
}
