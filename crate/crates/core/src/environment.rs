//! One common spin environment coupled to the chain's total `σ^z`.
//!
//! The bath only rotates the phase of the target's coherence, so its whole
//! effect is a decoherence factor `γ(t) = Σ_m |c_m|² e^{iB_m t}` multiplying
//! the output off-diagonals.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex;

use crate::error::{config, Error, Result};
use crate::scalar::{cis, modulus, Real};
use crate::transfer::{fidelity_from_magnitude, TransferAmplitude};

/// Largest environment the factorised evaluation accepts.
pub const MAX_PRODUCT_SPINS: usize = 24;
/// Largest environment the `2^M` enumeration accepts.
pub const MAX_ENUMERATED_SPINS: usize = 12;

/// Anything that produces a decoherence factor for the target coherence.
pub trait CommonEnvironment<T: Real> {
    fn decoherence_factor(&self, t: T) -> Complex<T>;
}

/// Gaussian character function `η(B) = exp(−B²/ϑ) / √(πϑ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianEnvironment<T> {
    theta: T,
}

impl<T: Real> GaussianEnvironment<T> {
    pub fn new(theta: T) -> Result<Self> {
        if !(theta > T::zero()) || !theta.is_finite() {
            return Err(config(format!("theta must be positive, got {theta}")));
        }
        Ok(GaussianEnvironment { theta })
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    /// `e^{−ϑt²/4}`.
    pub fn factor(&self, t: T) -> T {
        (-self.theta * t * t / T::of(4.0)).exp()
    }

    /// Character function density at field `b`.
    pub fn density(&self, b: T) -> T {
        (-b * b / self.theta).exp() / (T::pi() * self.theta).sqrt()
    }
}

impl<T: Real> CommonEnvironment<T> for GaussianEnvironment<T> {
    fn decoherence_factor(&self, t: T) -> Complex<T> {
        Complex::new(self.factor(t), T::zero())
    }
}

pub fn gaussian_decoherence_factor<T: Real>(env: &GaussianEnvironment<T>, t: T) -> T {
    env.factor(t)
}

/// `M` environment spins in a product state; spin `k` couples with `g_k`
/// and is up (`σ^z = +1`) with probability `p_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitEnvironment<T> {
    couplings: Vec<T>,
    up_probabilities: Vec<T>,
}

impl<T: Real> ExplicitEnvironment<T> {
    pub fn new(couplings: Vec<T>, up_probabilities: Vec<T>) -> Result<Self> {
        if couplings.len() != up_probabilities.len() {
            return Err(config(format!(
                "{} couplings but {} probabilities",
                couplings.len(),
                up_probabilities.len()
            )));
        }
        if let Some(g) = couplings.iter().find(|g| !g.is_finite()) {
            return Err(config(format!("coupling {g} is not finite")));
        }
        if let Some(p) = up_probabilities
            .iter()
            .find(|&&p| !(p >= T::zero() && p <= T::one()))
        {
            return Err(config(format!("probability {p} outside [0, 1]")));
        }
        Ok(ExplicitEnvironment {
            couplings,
            up_probabilities,
        })
    }

    pub fn m(&self) -> usize {
        self.couplings.len()
    }

    pub fn couplings(&self) -> &[T] {
        &self.couplings
    }

    pub fn up_probabilities(&self) -> &[T] {
        &self.up_probabilities
    }

    /// Width of the matching Gaussian, `ϑ = 2 Σ g_k²` (exact for `p_k = 1/2`).
    pub fn gaussian_theta(&self) -> T {
        self.couplings.iter().fold(T::zero(), |a, &g| a + g * g) * T::of(2.0)
    }

    /// `Π_k (p_k e^{ig_k t} + (1−p_k) e^{−ig_k t})`.
    pub fn factor_product(&self, t: T) -> Result<Complex<T>> {
        if self.m() > MAX_PRODUCT_SPINS {
            return Err(Error::SizeLimit {
                what: "environment spins",
                got: self.m(),
                max: MAX_PRODUCT_SPINS,
            });
        }
        if t == T::zero() {
            return Ok(Complex::new(T::one(), T::zero()));
        }
        Ok(self
            .couplings
            .iter()
            .zip(&self.up_probabilities)
            .fold(Complex::new(T::one(), T::zero()), |acc, (&g, &p)| {
                acc * (cis(g * t) * p + cis(-g * t) * (T::one() - p))
            }))
    }

    /// `Σ_m |c_m|² e^{iB_m t}` over all `2^M` configurations.
    pub fn factor_enumerated(&self, t: T) -> Result<Complex<T>> {
        let m = self.m();
        if m > MAX_ENUMERATED_SPINS {
            return Err(Error::SizeLimit {
                what: "enumerated environment spins",
                got: m,
                max: MAX_ENUMERATED_SPINS,
            });
        }
        // The weights sum to one only up to rounding; t = 0 is pinned exactly.
        if t == T::zero() {
            return Ok(Complex::new(T::one(), T::zero()));
        }
        let mut acc = Complex::new(T::zero(), T::zero());
        for config in 0..(1usize << m) {
            let mut weight = T::one();
            let mut field = T::zero();
            for k in 0..m {
                let down = (config >> k) & 1 == 1;
                let p = self.up_probabilities[k];
                if down {
                    weight *= T::one() - p;
                    field -= self.couplings[k];
                } else {
                    weight *= p;
                    field += self.couplings[k];
                }
            }
            acc += cis(field * t) * weight;
        }
        Ok(acc)
    }
}

impl<T: Real> CommonEnvironment<T> for ExplicitEnvironment<T> {
    /// Factorised evaluation. Panics beyond [`MAX_PRODUCT_SPINS`]; use
    /// [`explicit_decoherence_factor`] for a checked call.
    fn decoherence_factor(&self, t: T) -> Complex<T> {
        self.factor_product(t).expect("environment within product-path limit")
    }
}

pub fn explicit_decoherence_factor<T: Real>(env: &ExplicitEnvironment<T>, t: T) -> Result<Complex<T>> {
    if !(t >= T::zero()) {
        return Err(config(format!("time must be non-negative, got {t}")));
    }
    env.factor_product(t)
}

/// Single-qubit density matrix in the basis `{|0⟩, |1⟩}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitDensity<T: Real> {
    matrix: Matrix2<Complex<T>>,
}

impl<T: Real> QubitDensity<T> {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: Matrix2<Complex<T>>) -> Result<Self> {
        let rho = QubitDensity { matrix };
        rho.check()?;
        Ok(rho)
    }

    pub(crate) fn from_parts(p00: T, p11: T, coherence01: Complex<T>) -> Self {
        let zero = T::zero();
        QubitDensity {
            matrix: Matrix2::new(
                Complex::new(p00, zero),
                coherence01,
                coherence01.conj(),
                Complex::new(p11, zero),
            ),
        }
    }

    pub fn matrix(&self) -> &Matrix2<Complex<T>> {
        &self.matrix
    }

    pub fn p0(&self) -> T {
        self.matrix[(0, 0)].re
    }

    pub fn p1(&self) -> T {
        self.matrix[(1, 1)].re
    }

    /// `ρ_01 = ⟨0|ρ|1⟩`.
    pub fn coherence(&self) -> Complex<T> {
        self.matrix[(0, 1)]
    }

    pub fn trace(&self) -> T {
        self.matrix[(0, 0)].re + self.matrix[(1, 1)].re
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> [T; 2] {
        let a = self.matrix[(0, 0)].re;
        let d = self.matrix[(1, 1)].re;
        let b = self.matrix[(0, 1)];
        let half = T::of(0.5);
        let disc = ((a - d) * (a - d) + b.norm_sqr() * T::of(4.0)).sqrt();
        [(a + d - disc) * half, (a + d + disc) * half]
    }

    /// `⟨φ|ρ|φ⟩` for `|φ⟩ = α|0⟩ + β|1⟩`.
    pub fn overlap(&self, alpha: Complex<T>, beta: Complex<T>) -> T {
        let m = &self.matrix;
        (alpha.conj() * m[(0, 0)] * alpha
            + alpha.conj() * m[(0, 1)] * beta
            + beta.conj() * m[(1, 0)] * alpha
            + beta.conj() * m[(1, 1)] * beta)
            .re
    }

    pub fn check(&self) -> Result<()> {
        let m = &self.matrix;
        let herm = modulus(m[(0, 1)] - m[(1, 0)].conj())
            .max(m[(0, 0)].im.abs())
            .max(m[(1, 1)].im.abs());
        if herm > T::tol(1e-12) {
            return Err(Error::Validation(format!("qubit density not Hermitian (defect {herm})")));
        }
        if (self.trace() - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::Validation(format!("qubit density trace {} != 1", self.trace())));
        }
        let low = self.eigenvalues()[0];
        if low < -T::tol(1e-10) {
            return Err(Error::Validation(format!("qubit density has eigenvalue {low}")));
        }
        Ok(())
    }
}

pub(crate) fn check_normalized<T: Real>(alpha: Complex<T>, beta: Complex<T>) -> Result<()> {
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if (norm - T::one()).abs() > T::tol(1e-10) {
        return Err(config(format!("input amplitudes not normalised: |α|²+|β|² = {norm}")));
    }
    Ok(())
}

/// Target-spin state after transferring `α|0⟩ + β|1⟩` with amplitude `f`,
/// coherences scaled by the decoherence factor.
pub fn decohered_target_density<T: Real>(
    f: &TransferAmplitude<T>,
    factor: Complex<T>,
    alpha: Complex<T>,
    beta: Complex<T>,
) -> Result<QubitDensity<T>> {
    check_normalized(alpha, beta)?;
    let (a2, b2) = (alpha.norm_sqr(), beta.norm_sqr());
    let f2 = f.value.norm_sqr();
    let rho10 = alpha.conj() * beta * f.value * factor;
    Ok(QubitDensity::from_parts(
        a2 + b2 * (T::one() - f2),
        b2 * f2,
        rho10.conj(),
    ))
}

/// Bloch-averaged fidelity with the field phase tuned away:
/// `1/2 + |f|²/6 + (|f|/3)·Re γ(t)`.
pub fn average_fidelity_common_env<T: Real, E: CommonEnvironment<T> + ?Sized>(
    f: &TransferAmplitude<T>,
    env: &E,
    t: T,
) -> T {
    fidelity_from_magnitude(f.magnitude(), env.decoherence_factor(t).re)
}

/// Two-qubit density in the basis `|00⟩, |01⟩, |10⟩, |11⟩`.
pub type TwoQubitDensity<T> = Matrix4<Complex<T>>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementResult<T> {
    pub lambda: T,
    pub zeta: Complex<T>,
    pub xi0: T,
    pub xi: T,
}

/// Ancilla `A` and target spin after sending half of `(|01⟩+|10⟩)/√2` down the
/// chain: `{(1−λ²)|00⟩⟨00| + λ²|01⟩⟨01| + |10⟩⟨10| + ζ|01⟩⟨10| + h.c.}/2`.
pub fn distributed_pair_density<T: Real>(lambda: T, zeta: Complex<T>) -> TwoQubitDensity<T> {
    let half = T::of(0.5);
    let re = |x: T| Complex::new(x * half, T::zero());
    let mut rho = Matrix4::zeros();
    rho[(0, 0)] = re(T::one() - lambda * lambda);
    rho[(1, 1)] = re(lambda * lambda);
    rho[(2, 2)] = re(T::one());
    rho[(1, 2)] = zeta * half;
    rho[(2, 1)] = zeta.conj() * half;
    rho
}

/// Same state built from the amplitude-damping Kraus pair
/// `M_0 = |0⟩⟨0| + f|1⟩⟨1|`, `M_1 = √(1−|f|²)|0⟩⟨1|` acting on the chain half.
pub fn amplitude_damped_pair<T: Real>(f: Complex<T>) -> TwoQubitDensity<T> {
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let s = T::of(0.5).sqrt();
    let psi = nalgebra::Vector4::new(zero, Complex::new(s, T::zero()), Complex::new(s, T::zero()), zero);
    let eye = Matrix2::identity();
    let m0 = Matrix2::new(one, zero, zero, f);
    let m1 = Matrix2::new(zero, Complex::new((T::one() - f.norm_sqr()).max(T::zero()).sqrt(), T::zero()), zero, zero);
    let pure = psi * psi.adjoint();
    [m0, m1].iter().fold(Matrix4::zeros(), |acc, m| {
        let k: Matrix4<Complex<T>> = eye.kronecker(m);
        acc + k * pure * k.adjoint()
    })
}

pub fn distribute_entanglement<T: Real>(
    f: &TransferAmplitude<T>,
    env: &GaussianEnvironment<T>,
    t: T,
) -> Result<EntanglementResult<T>> {
    if !(t >= T::zero()) {
        return Err(config(format!("time must be non-negative, got {t}")));
    }
    let lambda = f.magnitude();
    let factor = env.factor(t);
    let zeta = Complex::new(lambda * factor, T::zero());
    let xi0 = wootters_concurrence(&distributed_pair_density(lambda, Complex::new(lambda, T::zero())))?;
    let xi = wootters_concurrence(&distributed_pair_density(lambda, zeta))?;
    let expected = xi0 * factor;
    if (xi - expected).abs() > T::tol(1e-8) {
        return Err(Error::Numerical(format!(
            "concurrence {xi} deviates from ξ0·factor = {expected}"
        )));
    }
    Ok(EntanglementResult { lambda, zeta, xi0, xi })
}

fn sigma_y_sigma_y<T: Real>() -> Matrix4<Complex<T>> {
    let sy = crate::chain::pauli::y::<T>();
    sy.kronecker(&sy)
}

/// Wootters concurrence `max{0, √λ₁ − √λ₂ − √λ₃ − √λ₄}` of a two-qubit state.
///
/// The `λ_i` are the eigenvalues of `ρ ρ̃` with `ρ̃ = (σ^y⊗σ^y) ρ* (σ^y⊗σ^y)`,
/// obtained as the spectrum of the Hermitian `√ρ ρ̃ √ρ`.
pub fn wootters_concurrence<T: Real>(rho: &TwoQubitDensity<T>) -> Result<T> {
    let tol = T::tol(1e-9);
    let herm = (rho - rho.adjoint()).iter().map(|z| modulus(*z)).fold(T::zero(), |a, b| a.max(b));
    if herm > tol {
        return Err(Error::Validation(format!("two-qubit density not Hermitian (defect {herm})")));
    }
    let trace = rho.trace();
    if modulus(trace - Complex::new(T::one(), T::zero())) > tol {
        return Err(Error::Validation(format!("two-qubit density trace {trace} != 1")));
    }
    let eig = SymmetricEigen::new(*rho);
    if let Some(low) = eig.eigenvalues.iter().copied().reduce(|a, b| a.min(b)) {
        if low < -tol {
            return Err(Error::Validation(format!("two-qubit density has eigenvalue {low}")));
        }
    }
    let roots = eig.eigenvalues.map(|e| Complex::new(e.max(T::zero()).sqrt(), T::zero()));
    let sqrt_rho = eig.eigenvectors * Matrix4::from_diagonal(&roots) * eig.eigenvectors.adjoint();

    let yy = sigma_y_sigma_y::<T>();
    let flipped = yy * rho.conjugate() * yy;
    let r = sqrt_rho * flipped * sqrt_rho;
    let r = (r + r.adjoint()) * Complex::new(T::of(0.5), T::zero());
    let mut lams: Vec<T> = SymmetricEigen::new(r)
        .eigenvalues
        .iter()
        .map(|&l| l.max(T::zero()).sqrt())
        .collect();
    lams.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok((lams[0] - lams[1] - lams[2] - lams[3]).max(T::zero()))
}
