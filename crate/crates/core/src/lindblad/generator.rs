//! Restricted Lindblad generators on `span{|0⟩, |1⟩, …, |N⟩}`.
//!
//! Dephasing uses `σ_i^z = I − 2|i⟩⟨i|`; damping uses `σ_i^- = |i⟩⟨0|`,
//! `σ_i^+ = |0⟩⟨i|`, `σ_i^-σ_i^+ = |i⟩⟨i|`. Both dissipators act element-wise
//! in this basis, so they are applied directly rather than through operator
//! products.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::chain::SubspaceHamiltonian;
use crate::error::{config, Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    /// `L_i ρ = −(γ/2)(ρ − σ_i^z ρ σ_i^z)`
    Dephasing,
    /// `L_i ρ = −(γ/2)(σ_i^-σ_i^+ ρ + ρ σ_i^-σ_i^+ − 2σ_i^+ ρ σ_i^-)`
    Damping,
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::Dephasing => "dephasing",
            Channel::Damping => "damping",
        })
    }
}

impl std::str::FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dephasing" => Ok(Channel::Dephasing),
            "damping" => Ok(Channel::Damping),
            other => Err(config(format!(
                "unknown channel `{other}` (expected dephasing|damping)"
            ))),
        }
    }
}

/// Channel and uniform per-site rate `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladConfig<T> {
    channel: Channel,
    gamma: T,
}

impl<T: Real> LindbladConfig<T> {
    pub fn new(channel: Channel, gamma: T) -> Result<Self> {
        if !(gamma >= T::zero()) || !gamma.is_finite() {
            return Err(config(format!("gamma must be non-negative, got {gamma}")));
        }
        Ok(LindbladConfig { channel, gamma })
    }

    pub fn dephasing(gamma: T) -> Result<Self> {
        Self::new(Channel::Dephasing, gamma)
    }

    pub fn damping(gamma: T) -> Result<Self> {
        Self::new(Channel::Damping, gamma)
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }
}

/// A generator bound to one Hamiltonian.
#[derive(Debug, Clone)]
pub struct Generator<T: Real> {
    config: LindbladConfig<T>,
    h: DMatrix<Complex<T>>,
}

impl<T: Real> Generator<T> {
    pub fn new(config: LindbladConfig<T>, h: &SubspaceHamiltonian<T>) -> Self {
        Generator {
            config,
            h: h.matrix().clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    /// `dρ/dt`. The caller guarantees matching dimensions.
    pub fn apply(&self, rho: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
        let hr = &self.h * rho;
        let rh = rho * &self.h;
        // −i[H, ρ]
        let mut out = (hr - rh).map(|z| Complex::new(z.im, -z.re));
        let gamma = self.config.gamma;
        if gamma == T::zero() {
            return out;
        }
        let d = self.dim();
        match self.config.channel {
            Channel::Dephasing => {
                for b in 0..d {
                    for a in 0..d {
                        if a == b {
                            continue;
                        }
                        let flips = T::of((usize::from(a > 0) + usize::from(b > 0)) as f64);
                        let z = rho[(a, b)];
                        out[(a, b)] -= Complex::new(z.re * gamma * flips, z.im * gamma * flips);
                    }
                }
            }
            Channel::Damping => {
                let half = gamma * T::of(0.5);
                for b in 0..d {
                    for a in 0..d {
                        let w = half * T::of((usize::from(a > 0) + usize::from(b > 0)) as f64);
                        let z = rho[(a, b)];
                        out[(a, b)] -= Complex::new(z.re * w, z.im * w);
                    }
                }
                let feed = (1..d).fold(T::zero(), |acc, i| acc + rho[(i, i)].re);
                let feed_im = (1..d).fold(T::zero(), |acc, i| acc + rho[(i, i)].im);
                out[(0, 0)] += Complex::new(gamma * feed, gamma * feed_im);
            }
        }
        out
    }
}

/// `−i[H, ρ] + Σ_i L_i ρ`.
pub fn apply_generator<T: Real>(
    config: &LindbladConfig<T>,
    h: &SubspaceHamiltonian<T>,
    rho: &DMatrix<Complex<T>>,
) -> Result<DMatrix<Complex<T>>> {
    if rho.nrows() != h.dim() || rho.ncols() != h.dim() {
        return Err(Error::Validation(format!(
            "density is {}x{} but the Hamiltonian is {}x{}",
            rho.nrows(),
            rho.ncols(),
            h.dim(),
            h.dim()
        )));
    }
    Ok(Generator::new(*config, h).apply(rho))
}
