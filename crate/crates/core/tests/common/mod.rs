//! Independent reference computations used by the integration tests.
//!
//! Nothing here goes through the restricted-subspace code paths: Hamiltonians
//! and dissipators are assembled on the full `2^N` space from Kronecker
//! products, time evolution uses a dense matrix exponential or a fixed-step
//! classical RK4, and sphere averages use explicit point sets.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use spinchan::chain::{build_full_hamiltonian, pauli, site_operator, subspace_index};
use spinchan::{ChainSpec64, Channel};

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `⟨N|e^{-iHt}|1⟩` from the dense exponential of the full Hamiltonian.
pub fn full_space_amplitude(spec: &ChainSpec64, t: f64) -> Complex64 {
    let n = spec.n();
    let h = build_full_hamiltonian(spec).unwrap();
    let u = (h.matrix() * c(0.0, -t)).exp();
    u[(subspace_index(n, n), subspace_index(n, 1))]
}

/// Lifts a restricted-basis matrix onto the full space (zero elsewhere).
pub fn embed(n: usize, m: &CMat) -> CMat {
    let dim = 1usize << n;
    let mut out = CMat::zeros(dim, dim);
    for a in 0..=n {
        for b in 0..=n {
            out[(subspace_index(n, a), subspace_index(n, b))] = m[(a, b)];
        }
    }
    out
}

/// Restricted-basis block of a full-space matrix.
pub fn restrict(n: usize, m: &CMat) -> CMat {
    CMat::from_fn(n + 1, n + 1, |a, b| m[(subspace_index(n, a), subspace_index(n, b))])
}

/// Reduced density of the last spin by explicit partial trace.
pub fn partial_trace_last(n: usize, rho: &CMat) -> [[Complex64; 2]; 2] {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    let rest = 1usize << (n - 1);
    for r in 0..rest {
        for s in 0..2 {
            for s2 in 0..2 {
                out[s][s2] += rho[((r << 1) | s, (r << 1) | s2)];
            }
        }
    }
    out
}

/// Full-space Lindblad right-hand side with per-site operators.
pub struct FullLindblad {
    h: CMat,
    gamma: f64,
    channel: Channel,
    z: Vec<CMat>,
    lower: Vec<CMat>,
    raise: Vec<CMat>,
}

impl FullLindblad {
    pub fn new(spec: &ChainSpec64, channel: Channel, gamma: f64) -> Self {
        let n = spec.n();
        let h = build_full_hamiltonian(spec).unwrap().matrix().clone();
        FullLindblad {
            h,
            gamma,
            channel,
            z: (1..=n).map(|i| site_operator(&pauli::z(), i, n)).collect(),
            lower: (1..=n).map(|i| site_operator(&pauli::lower(), i, n)).collect(),
            raise: (1..=n).map(|i| site_operator(&pauli::raise(), i, n)).collect(),
        }
    }

    pub fn rhs(&self, rho: &CMat) -> CMat {
        let mut out = (&self.h * rho - rho * &self.h) * c(0.0, -1.0);
        let g = c(-self.gamma / 2.0, 0.0);
        for i in 0..self.z.len() {
            match self.channel {
                Channel::Dephasing => {
                    out += (rho - &self.z[i] * rho * &self.z[i]) * g;
                }
                Channel::Damping => {
                    let n = &self.lower[i] * &self.raise[i];
                    out += (&n * rho + rho * &n - &self.raise[i] * rho * &self.lower[i] * c(2.0, 0.0)) * g;
                }
            }
        }
        out
    }

    /// Classical RK4 with `steps` equal steps to each sample time.
    pub fn evolve(&self, rho0: &CMat, times: &[f64], steps_per_unit: usize) -> Vec<CMat> {
        let mut out = Vec::new();
        let mut rho = rho0.clone();
        let mut t = 0.0;
        for &target in times {
            let span = target - t;
            let steps = ((span * steps_per_unit as f64).ceil() as usize).max(1);
            let dt = span / steps as f64;
            if span > 0.0 {
                for _ in 0..steps {
                    let k1 = self.rhs(&rho);
                    let k2 = self.rhs(&(&rho + &k1 * c(dt / 2.0, 0.0)));
                    let k3 = self.rhs(&(&rho + &k2 * c(dt / 2.0, 0.0)));
                    let k4 = self.rhs(&(&rho + &k3 * c(dt, 0.0)));
                    rho += (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * c(dt / 6.0, 0.0);
                }
            }
            t = target;
            out.push(rho.clone());
        }
        out
    }
}

/// Fibonacci lattice on the unit sphere as `(α, β)` qubit amplitudes.
pub fn fibonacci_sphere(count: usize) -> Vec<(Complex64, Complex64)> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let theta = z.acos();
            let phi = golden * i as f64;
            let alpha = c((theta / 2.0).cos(), 0.0);
            let beta = Complex64::from_polar((theta / 2.0).sin(), phi);
            (alpha, beta)
        })
        .collect()
}

/// Composite Simpson rule on `[a, b]` with `intervals` (even) sub-intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * k as f64);
    }
    acc * h / 3.0
}

/// Random Hermitian matrix with entries in [-1, 1].
pub fn random_hermitian<R: rand::Rng>(rng: &mut R, d: usize) -> CMat {
    let m = CMat::from_fn(d, d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    (&m + m.adjoint()) * c(0.5, 0.0)
}

/// Random density matrix `A A† / Tr(A A†)`.
pub fn random_density<R: rand::Rng>(rng: &mut R, d: usize) -> CMat {
    let a = CMat::from_fn(d, d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let p = &a * a.adjoint();
    let tr = p.trace();
    p / tr
}
