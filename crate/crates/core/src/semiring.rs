//! Semirings over a shared `f64` carrier and matrices with entries in them.
//!
//! Elements are plain `f64` values interpreted by a [`Semiring`]: booleans
//! are `0.0`/`1.0`, logarithmic and tropical zeros are `-inf`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::RngSeed;
use crate::linalg::DenseMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Semiring {
    /// `(ℝ, +, ·, 0, 1)`.
    Real,
    /// `({0, 1}, ∨, ∧, 0, 1)`.
    Boolean,
    /// `(ℝ ∪ {±∞}, ⊕_ln, +, −∞, 0)` with `x ⊕_ln y = ln(eˣ + eʸ)`.
    Logarithmic,
    /// `(ℝ ∪ {−∞}, max, +, −∞, 0)`.
    Tropical,
}

impl Semiring {
    pub const ALL: [Semiring; 4] = [Semiring::Real, Semiring::Boolean, Semiring::Logarithmic, Semiring::Tropical];

    pub fn name(self) -> &'static str {
        match self {
            Semiring::Real => "real",
            Semiring::Boolean => "boolean",
            Semiring::Logarithmic => "logarithmic",
            Semiring::Tropical => "tropical",
        }
    }

    /// The instance with the given name.
    pub fn instance(name: &str) -> Result<Semiring> {
        name.parse()
    }

    pub fn zero(self) -> f64 {
        match self {
            Semiring::Real | Semiring::Boolean => 0.0,
            Semiring::Logarithmic | Semiring::Tropical => f64::NEG_INFINITY,
        }
    }

    pub fn one(self) -> f64 {
        match self {
            Semiring::Real | Semiring::Boolean => 1.0,
            Semiring::Logarithmic | Semiring::Tropical => 0.0,
        }
    }

    pub fn is_zero(self, x: f64) -> bool {
        x == self.zero()
    }

    /// Whether `x` is an element of the carrier.
    pub fn contains(self, x: f64) -> bool {
        match self {
            Semiring::Real => x.is_finite(),
            Semiring::Boolean => x == 0.0 || x == 1.0,
            Semiring::Logarithmic => !x.is_nan(),
            Semiring::Tropical => !x.is_nan() && x != f64::INFINITY,
        }
    }

    pub fn oplus(self, x: f64, y: f64) -> f64 {
        match self {
            Semiring::Real => x + y,
            Semiring::Boolean => {
                if x != 0.0 || y != 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Semiring::Logarithmic => log_add(x, y),
            Semiring::Tropical => x.max(y),
        }
    }

    pub fn odot(self, x: f64, y: f64) -> f64 {
        match self {
            Semiring::Real => x * y,
            Semiring::Boolean => {
                if x != 0.0 && y != 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Semiring::Logarithmic | Semiring::Tropical => {
                if x == f64::NEG_INFINITY || y == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    x + y
                }
            }
        }
    }

    /// `⊕` over an iterator, `0̄` when empty.
    pub fn sum(self, xs: impl IntoIterator<Item = f64>) -> f64 {
        xs.into_iter().fold(self.zero(), |acc, x| self.oplus(acc, x))
    }

    /// `⊙` over an iterator, `1̄` when empty.
    pub fn product(self, xs: impl IntoIterator<Item = f64>) -> f64 {
        xs.into_iter().fold(self.one(), |acc, x| self.odot(acc, x))
    }

    /// The morphism into `(ℝ, +, ·)`, where one exists: the identity for
    /// the real semiring and `exp` for the logarithmic one.
    pub fn morphism(self) -> Option<Morphism> {
        match self {
            Semiring::Real => Some(Morphism { name: "identity", forward: |x| x, inverse: Some(|x| x) }),
            Semiring::Logarithmic => Some(Morphism { name: "exp", forward: f64::exp, inverse: Some(f64::ln) }),
            Semiring::Boolean | Semiring::Tropical => None,
        }
    }

    /// Random carrier element. Zero, one and the infinities of the
    /// logarithmic and tropical carriers turn up with fixed probability.
    pub fn sample(self, rng: &mut impl Rng) -> f64 {
        let special = rng.gen_bool(0.15);
        match self {
            Semiring::Real => {
                if special {
                    [0.0, 1.0][rng.gen_range(0..2)]
                } else {
                    rng.gen_range(-10.0..10.0)
                }
            }
            Semiring::Boolean => f64::from(rng.gen_range(0..2u8)),
            Semiring::Logarithmic => {
                if special {
                    [f64::NEG_INFINITY, f64::INFINITY, 0.0][rng.gen_range(0..3)]
                } else {
                    rng.gen_range(-50.0..50.0)
                }
            }
            Semiring::Tropical => {
                if special {
                    [f64::NEG_INFINITY, 0.0][rng.gen_range(0..2)]
                } else {
                    rng.gen_range(-50.0..50.0)
                }
            }
        }
    }
}

impl fmt::Display for Semiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Semiring {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Semiring::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown semiring {s:?}")))
    }
}

/// `ln(eˣ + eʸ)` as `max + ln(1 + e^{−|x−y|})`.
pub fn log_add(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let m = x.max(y);
    if m == f64::INFINITY {
        return m;
    }
    m + (-(x - y).abs()).exp().ln_1p()
}

/// A map `ψ` from a semiring into the reals with `ψ(x ⊕ y) = ψ(x) + ψ(y)`,
/// `ψ(x ⊙ y) = ψ(x)ψ(y)`, `ψ(0̄) = 0` and `ψ(1̄) = 1`.
#[derive(Clone, Copy)]
pub struct Morphism {
    pub name: &'static str,
    pub forward: fn(f64) -> f64,
    pub inverse: Option<fn(f64) -> f64>,
}

impl Morphism {
    pub fn apply(&self, x: f64) -> f64 {
        (self.forward)(x)
    }

    pub fn invert(&self, y: f64) -> Result<f64> {
        let inv = self.inverse.ok_or_else(|| Error::InvalidArgument(format!("morphism {} has no inverse", self.name)))?;
        Ok(inv(y))
    }
}

impl fmt::Debug for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Morphism").field("name", &self.name).field("invertible", &self.inverse.is_some()).finish()
    }
}

/// Dense row-major matrix over a semiring.
#[derive(Clone, Debug, PartialEq)]
pub struct SemiringMatrix {
    semiring: Semiring,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SemiringMatrix {
    pub fn new(semiring: Semiring, rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        if let Some(x) = data.iter().find(|&&x| !semiring.contains(x)) {
            return Err(Error::InvalidArgument(format!("{x} is not an element of the {semiring} semiring")));
        }
        Ok(Self { semiring, rows, cols, data })
    }

    pub fn from_rows(semiring: Semiring, rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(semiring, rows.len(), cols, rows.concat())
    }

    /// All entries `0̄`.
    pub fn zeros(semiring: Semiring, rows: usize, cols: usize) -> Self {
        Self { semiring, rows, cols, data: vec![semiring.zero(); rows * cols] }
    }

    /// `1̄` on the diagonal, `0̄` elsewhere.
    pub fn identity(semiring: Semiring, n: usize) -> Self {
        let mut m = Self::zeros(semiring, n, n);
        for i in 0..n {
            m.data[i * n + i] = semiring.one();
        }
        m
    }

    pub fn semiring(&self) -> Semiring {
        self.semiring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: f64) -> Result<()> {
        if !self.semiring.contains(x) {
            return Err(Error::InvalidArgument(format!("{x} is not an element of the {} semiring", self.semiring)));
        }
        self.data[i * self.cols + j] = x;
        Ok(())
    }

    /// `[A ⊙̄ x]ᵢ = ⊕ⱼ Aᵢⱼ ⊙ xⱼ`.
    pub fn mat_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!("{}x{} matrix times vector of length {}", self.rows, self.cols, x.len())));
        }
        let s = self.semiring;
        Ok((0..self.rows)
            .map(|i| s.sum(self.data[i * self.cols..(i + 1) * self.cols].iter().zip(x).map(|(&a, &b)| s.odot(a, b))))
            .collect())
    }

    /// `[A ⊙̄ B]ᵢⱼ = ⊕ₖ Aᵢₖ ⊙ Bₖⱼ`.
    pub fn mat_mat(&self, other: &SemiringMatrix) -> Result<SemiringMatrix> {
        self.check_same_semiring(other)?;
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let s = self.semiring;
        let mut data = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                data.push(s.sum((0..self.cols).map(|k| s.odot(self.get(i, k), other.get(k, j)))));
            }
        }
        Ok(SemiringMatrix { semiring: s, rows: self.rows, cols: other.cols, data })
    }

    /// Semiring Kronecker product, entry `((i, i′), (j, j′))` at row
    /// `i·rows′ + i′`.
    pub fn kron(&self, other: &SemiringMatrix) -> Result<SemiringMatrix> {
        self.check_same_semiring(other)?;
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let mut data = vec![self.semiring.zero(); r * c];
        for i in 0..self.rows {
            for j in 0..self.cols {
                for ip in 0..other.rows {
                    for jp in 0..other.cols {
                        data[(i * other.rows + ip) * c + j * other.cols + jp] =
                            self.semiring.odot(self.get(i, j), other.get(ip, jp));
                    }
                }
            }
        }
        Ok(SemiringMatrix { semiring: self.semiring, rows: r, cols: c, data })
    }

    /// Entrywise image under `ψ`.
    pub fn map_to_real(&self, psi: &Morphism) -> DenseMatrix {
        DenseMatrix::from_fn(self.rows, self.cols, |i, j| psi.apply(self.get(i, j)))
    }

    fn check_same_semiring(&self, other: &SemiringMatrix) -> Result<()> {
        if self.semiring != other.semiring {
            return Err(Error::InvalidArgument(format!(
                "cannot combine {} and {} matrices",
                self.semiring, other.semiring
            )));
        }
        Ok(())
    }
}

pub fn semiring_mat_vec(a: &SemiringMatrix, x: &[f64]) -> Result<Vec<f64>> {
    a.mat_vec(x)
}

pub fn semiring_mat_mat(a: &SemiringMatrix, b: &SemiringMatrix) -> Result<SemiringMatrix> {
    a.mat_mat(b)
}

/// `a` and `b` agree to a relative tolerance, infinities exactly.
pub fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a.is_finite() && b.is_finite() && (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs()))
}

/// Pushes `A ⊙̄ x` through the semiring's morphism and compares
/// `ψ⁻¹(ψ(A) ψ(x))` with the semiring product.
pub fn pushthrough_mat_vec(a: &SemiringMatrix, x: &[f64], tol: f64) -> Result<bool> {
    let psi = morphism_of(a.semiring)?;
    let direct = a.mat_vec(x)?;
    let image: Vec<f64> = x.iter().map(|&v| psi.apply(v)).collect();
    let via = a.map_to_real(&psi).mul_vec(&image)?;
    for (d, v) in direct.iter().zip(via) {
        if !approx_eq(*d, psi.invert(v)?, tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// As [`pushthrough_mat_vec`] for `A ⊙̄ B`.
pub fn pushthrough_mat_mat(a: &SemiringMatrix, b: &SemiringMatrix, tol: f64) -> Result<bool> {
    let psi = morphism_of(a.semiring)?;
    let direct = a.mat_mat(b)?;
    let via = a.map_to_real(&psi).matmul(&b.map_to_real(&psi))?;
    for i in 0..direct.rows {
        for j in 0..direct.cols {
            if !approx_eq(direct.get(i, j), psi.invert(via.get(i, j))?, tol) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn morphism_of(s: Semiring) -> Result<Morphism> {
    s.morphism().ok_or_else(|| Error::InvalidArgument(format!("the {s} semiring has no morphism to the reals")))
}

/// Outcome of a randomized law check.
#[derive(Clone, Debug, PartialEq)]
pub struct LawReport {
    pub semiring: Semiring,
    pub samples: usize,
    pub seed: RngSeed,
    /// Each failed law with the offending elements.
    pub failures: Vec<String>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

const LAW_TOL: f64 = 1e-9;

/// Checks the semiring axioms on `samples` random triples: commutative
/// monoid `(⊕, 0̄)`, monoid `(⊙, 1̄)`, both distributive laws and
/// annihilation by `0̄`.
pub fn check_axioms(s: Semiring, samples: usize, seed: RngSeed) -> LawReport {
    let mut rng = seed.rng();
    let mut failures = Vec::new();
    let (z, o) = (s.zero(), s.one());
    for _ in 0..samples {
        let (x, y, w) = (s.sample(&mut rng), s.sample(&mut rng), s.sample(&mut rng));
        let laws: [(&str, f64, f64); 10] = [
            ("oplus associative", s.oplus(s.oplus(x, y), w), s.oplus(x, s.oplus(y, w))),
            ("oplus commutative", s.oplus(x, y), s.oplus(y, x)),
            ("oplus identity", s.oplus(x, z), x),
            ("odot associative", s.odot(s.odot(x, y), w), s.odot(x, s.odot(y, w))),
            ("odot left identity", s.odot(o, x), x),
            ("odot right identity", s.odot(x, o), x),
            ("left distributive", s.odot(x, s.oplus(y, w)), s.oplus(s.odot(x, y), s.odot(x, w))),
            ("right distributive", s.odot(s.oplus(y, w), x), s.oplus(s.odot(y, x), s.odot(w, x))),
            ("left annihilation", s.odot(z, x), z),
            ("right annihilation", s.odot(x, z), z),
        ];
        for (law, lhs, rhs) in laws {
            if !approx_eq(lhs, rhs, LAW_TOL) {
                failures.push(format!("{law}: x={x}, y={y}, z={w}: {lhs} != {rhs}"));
            }
        }
    }
    LawReport { semiring: s, samples, seed, failures }
}

/// Checks `ψ(x ⊕ y) = ψ(x) + ψ(y)`, `ψ(x ⊙ y) = ψ(x)ψ(y)`, `ψ(0̄) = 0` and
/// `ψ(1̄) = 1` on random pairs with finite images.
pub fn check_morphism(s: Semiring, samples: usize, seed: RngSeed) -> Result<LawReport> {
    let psi = morphism_of(s)?;
    let mut rng = seed.rng();
    let mut failures = Vec::new();
    if psi.apply(s.zero()) != 0.0 || psi.apply(s.one()) != 1.0 {
        failures.push("psi does not map zero to 0 and one to 1".to_string());
    }
    let mut checked = 0;
    while checked < samples {
        let (x, y) = (s.sample(&mut rng), s.sample(&mut rng));
        if !(psi.apply(x).is_finite() && psi.apply(y).is_finite()) {
            continue;
        }
        checked += 1;
        let (px, py) = (psi.apply(x), psi.apply(y));
        if !approx_eq(psi.apply(s.oplus(x, y)), px + py, LAW_TOL) {
            failures.push(format!("additive: x={x}, y={y}"));
        }
        if !approx_eq(psi.apply(s.odot(x, y)), px * py, LAW_TOL) {
            failures.push(format!("multiplicative: x={x}, y={y}"));
        }
    }
    Ok(LawReport { semiring: s, samples, seed, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_examples() {
        let l = Semiring::instance("logarithmic").unwrap();
        assert!((l.oplus(2f64.ln(), 3f64.ln()) - 5f64.ln()).abs() < 1e-15);
        let t = Semiring::Tropical;
        assert_eq!((t.oplus(3.0, 5.0), t.odot(3.0, 5.0)), (5.0, 8.0));
        let b = Semiring::Boolean;
        assert_eq!(b.odot(1.0, 0.0), 0.0);
        assert_eq!(b.odot(0.0, 1.0), 0.0);
        assert!(Semiring::instance("complex").is_err());
        assert!(Semiring::Tropical.morphism().is_none());
        assert!(Semiring::Logarithmic.morphism().is_some());
    }

    #[test]
    fn log_add_is_stable() {
        assert_eq!(log_add(700.0, 700.0), 700.0 + 2f64.ln());
        assert!((log_add(-700.0, -701.0) - (-700.0 + (1.0 + (-1f64).exp()).ln())).abs() < 1e-12);
        assert_eq!(log_add(f64::NEG_INFINITY, 3.0), 3.0);
        assert_eq!(log_add(f64::INFINITY, 3.0), f64::INFINITY);
        assert!((log_add(1.0, 2.0) - (1f64.exp() + 2f64.exp()).ln()).abs() < 1e-14);
    }

    #[test]
    fn mat_vec_examples() {
        let a = SemiringMatrix::from_rows(Semiring::Tropical, &[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(a.mat_vec(&[0.0, 0.0]).unwrap(), vec![2.0, 4.0]);
        let i = SemiringMatrix::identity(Semiring::Tropical, 2);
        assert_eq!(i.mat_vec(&[5.0, -1.0]).unwrap(), vec![5.0, -1.0]);
        assert_eq!(a.mat_mat(&i).unwrap(), a);
        let b = SemiringMatrix::from_rows(Semiring::Tropical, &[vec![0.0, -1.0], vec![2.0, 5.0]]).unwrap();
        let ab = a.mat_mat(&b).unwrap();
        assert_eq!(ab.get(0, 0), (1.0f64 + 0.0).max(2.0 + 2.0));
        assert_eq!(ab.get(1, 1), (3.0f64 - 1.0).max(4.0 + 5.0));
        assert!(a.mat_vec(&[0.0]).is_err());
        assert!(SemiringMatrix::new(Semiring::Boolean, 1, 1, vec![0.5]).is_err());
    }

    #[test]
    fn boolean_product_is_relational_join() {
        let r = SemiringMatrix::from_rows(Semiring::Boolean, &[vec![0., 1., 0.], vec![0., 0., 1.], vec![1., 0., 0.]]).unwrap();
        let s = SemiringMatrix::from_rows(Semiring::Boolean, &[vec![1., 1., 0.], vec![0., 0., 0.], vec![0., 0., 1.]]).unwrap();
        let rs = r.mat_mat(&s).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let joined = (0..3).any(|k| r.get(i, k) == 1.0 && s.get(k, j) == 1.0);
                assert_eq!(rs.get(i, j) == 1.0, joined);
            }
        }
    }

    #[test]
    fn axioms_and_morphisms() {
        for s in Semiring::ALL {
            let r = check_axioms(s, 1000, RngSeed(4));
            assert!(r.passed(), "{s}: {:?}", &r.failures[..r.failures.len().min(3)]);
        }
        for s in [Semiring::Real, Semiring::Logarithmic] {
            assert!(check_morphism(s, 1000, RngSeed(5)).unwrap().passed());
        }
        assert!(check_morphism(Semiring::Tropical, 10, RngSeed(5)).is_err());
    }

    #[test]
    fn pushthrough() {
        let mut rng = RngSeed(8).rng();
        for s in [Semiring::Real, Semiring::Logarithmic] {
            let a = SemiringMatrix::new(s, 3, 3, (0..9).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap();
            let b = SemiringMatrix::new(s, 3, 2, (0..6).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap();
            assert!(pushthrough_mat_vec(&a, &[0.1, -2.0, 1.5], 1e-9).unwrap());
            assert!(pushthrough_mat_mat(&a, &b, 1e-9).unwrap());
        }
        let t = SemiringMatrix::identity(Semiring::Tropical, 2);
        assert!(pushthrough_mat_vec(&t, &[0.0, 0.0], 1e-9).is_err());
    }
}
