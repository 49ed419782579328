//! Chain specifications and their Hamiltonians.
//!
//! Spin states follow `σ^z|0⟩ = +|0⟩`. The restricted basis is ordered
//! `[|0⟩, |1⟩, …, |N⟩]`, where `|j⟩` has only spin `j` flipped to `|1⟩`.
//! On the full `2^N` space spin 1 is the most significant tensor factor, so
//! `|j⟩` sits at index `1 << (N - j)`.

use std::fmt;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex;

use crate::error::{config, Error, Result};
use crate::scalar::Real;

/// Largest chain the dense `2^N` construction accepts.
pub const MAX_FULL_SPINS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Uniform ferromagnetic Heisenberg chain `-J Σ σ_i·σ_{i+1} - B Σ σ_i^z`.
    HeisenbergXxx,
    /// XY chain with mirror-periodic couplings `J_i = ω √(i(N-i)) / 2`.
    MirrorXy,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::HeisenbergXxx => "heisenberg",
            Family::MirrorXy => "mirror",
        })
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heisenberg" => Ok(Family::HeisenbergXxx),
            "mirror" => Ok(Family::MirrorXy),
            other => Err(config(format!(
                "unknown family `{other}` (expected heisenberg|mirror)"
            ))),
        }
    }
}

/// A validated chain: length, coupling family and energy parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSpec<T> {
    n: usize,
    family: Family,
    scale: T,
    field: T,
}

impl<T: Real> ChainSpec<T> {
    /// Heisenberg chain with uniform coupling `j > 0` and field `field`.
    pub fn heisenberg(n: usize, j: T, field: T) -> Result<Self> {
        Self::new(n, Family::HeisenbergXxx, j, field)
    }

    /// Mirror-periodic XY chain with coupling scale `omega > 0`.
    pub fn mirror(n: usize, omega: T) -> Result<Self> {
        Self::new(n, Family::MirrorXy, omega, T::zero())
    }

    /// `scale` is `J` for Heisenberg chains and `ω` for mirror chains.
    pub fn new(n: usize, family: Family, scale: T, field: T) -> Result<Self> {
        if n == 0 {
            return Err(config("chain length n must be at least 1"));
        }
        if !(scale > T::zero()) || !scale.is_finite() {
            let name = match family {
                Family::HeisenbergXxx => "j",
                Family::MirrorXy => "omega",
            };
            return Err(config(format!("{name} must be positive and finite, got {scale}")));
        }
        if !field.is_finite() {
            return Err(config("field must be finite"));
        }
        if family == Family::MirrorXy && field != T::zero() {
            return Err(config("mirror chains carry no field parameter"));
        }
        Ok(ChainSpec {
            n,
            family,
            scale,
            field,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// `J` (Heisenberg) or `ω` (mirror).
    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn field(&self) -> T {
        self.field
    }

    /// Same parameters, different length.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(n, self.family, self.scale, self.field)
    }

    /// Nearest-neighbour hopping amplitudes in the single-excitation sector.
    pub fn hoppings(&self) -> Vec<T> {
        match self.family {
            Family::HeisenbergXxx => vec![-(T::one() + T::one()) * self.scale; self.n.saturating_sub(1)],
            Family::MirrorXy => {
                if self.n < 2 {
                    Vec::new()
                } else {
                    mirror_couplings(self.n, self.scale).expect("validated spec")
                }
            }
        }
    }

    /// Time at which a mirror chain completes perfect transfer, `π/ω`.
    pub fn mirror_time(&self) -> T {
        T::pi() / self.scale
    }
}

/// `J_i = ω √(i(N−i)) / 2` for `i = 1..N−1`.
pub fn mirror_couplings<T: Real>(n: usize, omega: T) -> Result<Vec<T>> {
    if n < 2 {
        return Err(config(format!("mirror couplings need n >= 2, got {n}")));
    }
    if !(omega > T::zero()) {
        return Err(config(format!("omega must be positive, got {omega}")));
    }
    let half = T::of(0.5);
    Ok((1..n)
        .map(|i| omega * T::of((i * (n - i)) as f64).sqrt() * half)
        .collect())
}

/// Hamiltonian restricted to `span{|0⟩, |1⟩, …, |N⟩}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceHamiltonian<T: Real> {
    n: usize,
    matrix: DMatrix<Complex<T>>,
}

impl<T: Real> SubspaceHamiltonian<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn matrix(&self) -> &DMatrix<Complex<T>> {
        &self.matrix
    }

    /// Labels of the ordered basis, `"0"`, `"1"`, …, `"N"`.
    pub fn basis(&self) -> Vec<String> {
        (0..=self.n).map(|j| j.to_string()).collect()
    }

    /// Energy of the vacuum `|0⟩`.
    pub fn vacuum_energy(&self) -> T {
        self.matrix[(0, 0)].re
    }

    /// The `N × N` single-excitation block (rows/columns `1..=N`).
    pub fn excitation_block(&self) -> DMatrix<Complex<T>> {
        self.matrix.view((1, 1), (self.n, self.n)).into_owned()
    }
}

pub fn build_subspace_hamiltonian<T: Real>(spec: &ChainSpec<T>) -> SubspaceHamiltonian<T> {
    let n = spec.n();
    let zero = Complex::new(T::zero(), T::zero());
    let mut h = DMatrix::from_element(n + 1, n + 1, zero);
    for (i, &hop) in spec.hoppings().iter().enumerate() {
        let (a, b) = (i + 1, i + 2);
        h[(a, b)] = Complex::new(hop, T::zero());
        h[(b, a)] = Complex::new(hop, T::zero());
    }
    if spec.family() == Family::HeisenbergXxx {
        let j = spec.scale();
        let field = spec.field();
        let bonds = T::of(n.saturating_sub(1) as f64);
        let two = T::one() + T::one();
        // σ_i^z σ_{i+1}^z is -1 on the bonds touching the flipped spin and +1 elsewhere.
        h[(0, 0)] = Complex::new(-j * bonds - field * T::of(n as f64), T::zero());
        for site in 1..=n {
            let touching = usize::from(site > 1) + usize::from(site < n);
            let zz = bonds - two * T::of(touching as f64);
            let z = T::of(n as f64) - two;
            h[(site, site)] = Complex::new(-j * zz - field * z, T::zero());
        }
    }
    SubspaceHamiltonian { n, matrix: h }
}

/// Hamiltonian on the full `2^N`-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct FullHamiltonian<T: Real> {
    n: usize,
    matrix: DMatrix<Complex<T>>,
}

impl<T: Real> FullHamiltonian<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex<T>> {
        &self.matrix
    }

    /// Full-space index of the restricted basis state `|j⟩` (`j = 0` is the vacuum).
    pub fn subspace_index(&self, j: usize) -> usize {
        subspace_index(self.n, j)
    }

    /// Projects onto the ordered restricted basis.
    pub fn project_to_subspace(&self) -> DMatrix<Complex<T>> {
        let n = self.n;
        DMatrix::from_fn(n + 1, n + 1, |a, b| {
            self.matrix[(subspace_index(n, a), subspace_index(n, b))]
        })
    }

    /// Total magnetisation `Σ σ_i^z` as a diagonal.
    pub fn total_sz_diagonal(&self) -> Vec<T> {
        let dim = 1usize << self.n;
        (0..dim)
            .map(|b| T::of(self.n as f64 - 2.0 * b.count_ones() as f64))
            .collect()
    }
}

/// Index of `|j⟩` in the `2^n` computational basis.
pub fn subspace_index(n: usize, j: usize) -> usize {
    if j == 0 {
        0
    } else {
        1usize << (n - j)
    }
}

pub mod pauli {
    use super::*;

    fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
        Complex::new(T::of(re), T::of(im))
    }

    pub fn identity<T: Real>() -> Matrix2<Complex<T>> {
        Matrix2::new(c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.))
    }

    pub fn x<T: Real>() -> Matrix2<Complex<T>> {
        Matrix2::new(c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.))
    }

    pub fn y<T: Real>() -> Matrix2<Complex<T>> {
        Matrix2::new(c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.))
    }

    pub fn z<T: Real>() -> Matrix2<Complex<T>> {
        Matrix2::new(c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.))
    }

    /// `σ^+ = (σ^x + iσ^y)/2 = |0⟩⟨1|`.
    pub fn raise<T: Real>() -> Matrix2<Complex<T>> {
        Matrix2::new(c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.))
    }

    /// `σ^- = (σ^x − iσ^y)/2 = |1⟩⟨0|`.
    pub fn lower<T: Real>() -> Matrix2<Complex<T>> {
        Matrix2::new(c(0., 0.), c(0., 0.), c(1., 0.), c(0., 0.))
    }
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` on `site` (1-based) of an `n`-spin register.
pub fn site_operator<T: Real>(op: &Matrix2<Complex<T>>, site: usize, n: usize) -> DMatrix<Complex<T>> {
    assert!(site >= 1 && site <= n, "site {site} outside 1..={n}");
    let eye = |d: usize| DMatrix::<Complex<T>>::identity(d, d);
    let left = eye(1usize << (site - 1));
    let right = eye(1usize << (n - site));
    let op = DMatrix::from_iterator(2, 2, op.iter().copied());
    left.kronecker(&op).kronecker(&right)
}

pub fn build_full_hamiltonian<T: Real>(spec: &ChainSpec<T>) -> Result<FullHamiltonian<T>> {
    let n = spec.n();
    if n > MAX_FULL_SPINS {
        return Err(Error::SizeLimit {
            what: "full-space spins",
            got: n,
            max: MAX_FULL_SPINS,
        });
    }
    let dim = 1usize << n;
    let mut h = DMatrix::<Complex<T>>::zeros(dim, dim);
    let (sx, sy, sz) = (pauli::x::<T>(), pauli::y::<T>(), pauli::z::<T>());
    let real = |x: T| Complex::new(x, T::zero());
    match spec.family() {
        Family::HeisenbergXxx => {
            let j = spec.scale();
            for i in 1..n {
                for s in [&sx, &sy, &sz] {
                    let bond = site_operator(s, i, n) * site_operator(s, i + 1, n);
                    h -= bond * real(j);
                }
            }
            for i in 1..=n {
                h -= site_operator(&sz, i, n) * real(spec.field());
            }
        }
        Family::MirrorXy => {
            let half = T::of(0.5);
            for (k, &ji) in spec.hoppings().iter().enumerate() {
                let i = k + 1;
                let xx = site_operator(&sx, i, n) * site_operator(&sx, i + 1, n);
                let yy = site_operator(&sy, i, n) * site_operator(&sy, i + 1, n);
                h += (xx + yy) * real(ji * half);
            }
        }
    }
    Ok(FullHamiltonian { n, matrix: h })
}
