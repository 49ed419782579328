//! Local independent environments: master-equation dynamics restricted to the
//! zero-plus-single-excitation subspace.

mod generator;
mod integrator;

pub use generator::{apply_generator, Channel, Generator, LindbladConfig};
pub use integrator::{Dopri5, Stats};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;

use crate::chain::{build_subspace_hamiltonian, ChainSpec, Family};
use crate::environment::{check_normalized, QubitDensity};
use crate::error::{config, Error, Result};
use crate::scalar::{modulus, neg_i_pow, Real};
use crate::transfer::{golden_section_max, time_grid, TimeWindow};

type Mat<T> = DMatrix<Complex<T>>;

/// Density matrix over the ordered basis `[|0⟩, |1⟩, …, |N⟩]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceDensity<T: Real> {
    matrix: Mat<T>,
}

impl<T: Real> SubspaceDensity<T> {
    /// Validates the physicality invariants.
    pub fn new(matrix: Mat<T>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() < 2 {
            return Err(Error::Validation(format!(
                "subspace density must be square with dimension >= 2, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let rho = SubspaceDensity { matrix };
        rho.check()?;
        Ok(rho)
    }

    /// `|j⟩⟨j|`.
    pub fn basis_state(n: usize, j: usize) -> Self {
        assert!(j <= n, "basis index {j} outside 0..={n}");
        let mut m = Mat::zeros(n + 1, n + 1);
        m[(j, j)] = Complex::new(T::one(), T::zero());
        SubspaceDensity { matrix: m }
    }

    /// `|ψ⟩⟨ψ|` for `ψ = α|0⟩ + β|1⟩`, the input state loaded onto site 1.
    pub fn input_state(n: usize, alpha: Complex<T>, beta: Complex<T>) -> Result<Self> {
        check_normalized(alpha, beta)?;
        let mut psi = nalgebra::DVector::zeros(n + 1);
        psi[0] = alpha;
        psi[1] = beta;
        Ok(SubspaceDensity {
            matrix: &psi * psi.adjoint(),
        })
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn matrix(&self) -> &Mat<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat<T> {
        self.matrix
    }

    /// `⟨N|ρ|N⟩`, the excitation-transfer probability.
    pub fn rho_nn(&self) -> T {
        let n = self.n();
        self.matrix[(n, n)].re
    }

    /// `⟨0|ρ|N⟩`.
    pub fn rho_0n(&self) -> Complex<T> {
        self.matrix[(0, self.n())]
    }

    pub fn trace(&self) -> Complex<T> {
        self.matrix.trace()
    }

    pub fn hermiticity_defect(&self) -> T {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn min_eigenvalue(&self) -> T {
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex::new(T::of(0.5), T::zero());
        SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .copied()
            .fold(T::max_value().unwrap_or_else(T::one), |a, b| a.min(b))
    }

    /// Hermitian within 1e-9, unit trace within 1e-8, eigenvalues ≥ −1e-8.
    pub fn check(&self) -> Result<()> {
        let herm = self.hermiticity_defect();
        if herm > T::tol(1e-9) {
            return Err(Error::Validation(format!("density not Hermitian (defect {herm})")));
        }
        let tr = self.trace();
        if modulus(tr - Complex::new(T::one(), T::zero())) > T::tol(1e-8) {
            return Err(Error::Validation(format!("density trace {tr} != 1")));
        }
        let low = self.min_eigenvalue();
        if low < -T::tol(1e-8) {
            return Err(Error::Validation(format!("density has eigenvalue {low}")));
        }
        Ok(())
    }
}

fn max_abs<T: Real>(m: &Mat<T>) -> T {
    m.iter().map(|z| modulus(*z)).fold(T::zero(), |a, b| a.max(b))
}

fn hermitize<T: Real>(m: &mut Mat<T>) {
    let half = Complex::new(T::of(0.5), T::zero());
    let sym = (&*m + m.adjoint()) * half;
    *m = sym;
}

#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<SubspaceDensity<T>>,
    pub spec: ChainSpec<T>,
    pub config: LindbladConfig<T>,
    pub stats: Stats,
}

impl<T: Real> Trajectory<T> {
    pub fn final_state(&self) -> &SubspaceDensity<T> {
        self.states.last().expect("trajectory has at least two samples")
    }

    /// Largest trace drift, Hermiticity defect and most negative eigenvalue.
    pub fn physicality(&self) -> Physicality<T> {
        let mut p = Physicality {
            trace_drift: T::zero(),
            hermiticity_defect: T::zero(),
            min_eigenvalue: T::max_value().unwrap_or_else(T::one),
        };
        for s in &self.states {
            p.trace_drift = p
                .trace_drift
                .max(modulus(s.trace() - Complex::new(T::one(), T::zero())));
            p.hermiticity_defect = p.hermiticity_defect.max(s.hermiticity_defect());
            p.min_eigenvalue = p.min_eigenvalue.min(s.min_eigenvalue());
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physicality<T> {
    pub trace_drift: T,
    pub hermiticity_defect: T,
    pub min_eigenvalue: T,
}

/// Evolves an arbitrary Hermitian operator (not necessarily a density) and
/// returns it at `sample_times`. The generator is linear, so this is also how
/// response functions are obtained.
pub fn evolve_operator<T: Real>(
    spec: &ChainSpec<T>,
    config: &LindbladConfig<T>,
    rho0: &Mat<T>,
    sample_times: &[T],
    solver: &Dopri5<T>,
) -> Result<(Vec<Mat<T>>, Stats)> {
    let h = build_subspace_hamiltonian(spec);
    if rho0.nrows() != h.dim() || rho0.ncols() != h.dim() {
        return Err(Error::Validation(format!(
            "initial state is {}x{} but the chain needs {}x{}",
            rho0.nrows(),
            rho0.ncols(),
            h.dim(),
            h.dim()
        )));
    }
    let t_end = sample_times.last().copied().unwrap_or_else(T::zero);
    let gen = Generator::new(*config, &h);
    solver.integrate(|r| gen.apply(r), rho0, t_end, sample_times, hermitize)
}

/// Integrates the master equation on `samples` equally spaced times over `[0, t_end]`.
pub fn integrate_master_equation<T: Real>(
    spec: &ChainSpec<T>,
    config: &LindbladConfig<T>,
    rho0: &SubspaceDensity<T>,
    t_end: T,
    samples: usize,
) -> Result<Trajectory<T>> {
    if !(t_end > T::zero()) {
        return Err(config_err(format!("t_end must be positive, got {t_end}")));
    }
    if samples < 2 {
        return Err(config_err("samples must be at least 2"));
    }
    let times = time_grid(t_end, samples);
    integrate_at(spec, config, rho0, &times)
}

fn config_err(msg: impl Into<String>) -> Error {
    config(msg)
}

/// Integrates the master equation and samples at the given times (sorted, starting at 0).
pub fn integrate_at<T: Real>(
    spec: &ChainSpec<T>,
    config: &LindbladConfig<T>,
    rho0: &SubspaceDensity<T>,
    times: &[T],
) -> Result<Trajectory<T>> {
    rho0.check()?;
    if times.first().copied() != Some(T::zero()) || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(config_err("sample times must increase strictly from 0"));
    }
    let (mats, stats) = evolve_operator(spec, config, rho0.matrix(), times, &Dopri5::default())?;
    let states = mats
        .into_iter()
        .zip(times)
        .map(|(m, &t)| {
            let s = SubspaceDensity { matrix: m };
            s.check()
                .map_err(|e| Error::Numerical(format!("state at t = {t} left the physical set: {e}")))?;
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        spec: *spec,
        config: *config,
        stats,
    })
}

/// Reduced state of spin `N`: `[[1−ρ_NN, ρ_0N], [ρ_0N*, ρ_NN]]`.
pub fn reduce_to_target<T: Real>(rho: &SubspaceDensity<T>) -> QubitDensity<T> {
    let p = rho.rho_nn();
    QubitDensity::from_parts(T::one() - p, p, rho.rho_0n())
}

/// Fidelity with the ideal output `α|0⟩ + (−i)^{N−1}β|1⟩`.
pub fn state_fidelity<T: Real>(reduced: &QubitDensity<T>, alpha: Complex<T>, beta: Complex<T>, n: usize) -> Result<T> {
    state_fidelity_with_phase(reduced, alpha, beta, neg_i_pow(n.saturating_sub(1)))
}

/// Fidelity with the ideal output `α|0⟩ + phase·β|1⟩`.
pub fn state_fidelity_with_phase<T: Real>(
    reduced: &QubitDensity<T>,
    alpha: Complex<T>,
    beta: Complex<T>,
    phase: Complex<T>,
) -> Result<T> {
    check_normalized(alpha, beta)?;
    let p = reduced.p1();
    let cross = phase * reduced.coherence() * alpha.conj() * beta;
    Ok((T::one() - p) * alpha.norm_sqr() + p * beta.norm_sqr() + cross.re * T::of(2.0))
}

/// Which output phase counts as ideal when averaging the fidelity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseReference {
    /// `(−i)^{N−1}`, the phase a mirror chain imprints at `π/ω`.
    MirrorImage,
    /// The best single phase for the given output, i.e. `|ρ_0N|` enters the average.
    Optimal,
}

impl PhaseReference {
    pub fn for_family(family: Family) -> Self {
        match family {
            Family::MirrorXy => PhaseReference::MirrorImage,
            Family::HeisenbergXxx => PhaseReference::Optimal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochAverage<T> {
    /// `ρ_NN(t)` for the input `|1⟩⟨1|`.
    pub population: T,
    /// `⟨0|ρ(t)|N⟩` for the input coherence `|0⟩⟨1|`.
    pub coherence: Complex<T>,
    pub fidelity: T,
}

/// Bloch-sphere average of the transfer fidelity at time `t`, using the
/// family's default phase reference.
pub fn average_fidelity_bloch<T: Real>(spec: &ChainSpec<T>, config: &LindbladConfig<T>, t: T) -> Result<T> {
    Ok(bloch_average(spec, config, t, PhaseReference::for_family(spec.family()))?.fidelity)
}

/// Two linear responses replace the sphere integral: the population response
/// of `|1⟩⟨1|` and the coherence response of `|0⟩⟨1|`. With the sphere moments
/// `⟨|α|²⟩ = 1/2`, `⟨|β|⁴⟩ = 1/3`, `⟨|α|²|β|²⟩ = 1/6` the average is
/// `1/2 + p/6 + Re{phase·c}/3`.
pub fn bloch_average<T: Real>(
    spec: &ChainSpec<T>,
    config: &LindbladConfig<T>,
    t: T,
    reference: PhaseReference,
) -> Result<BlochAverage<T>> {
    if !(t > T::zero()) {
        return Err(config_err(format!("t must be positive, got {t}")));
    }
    let n = spec.n();
    let d = n + 1;
    let solver = Dopri5::default();
    let times = [T::zero(), t];
    let one = Complex::new(T::one(), T::zero());

    let mut pop_seed = Mat::zeros(d, d);
    pop_seed[(1, 1)] = one;
    let (pop, _) = evolve_operator(spec, config, &pop_seed, &times, &solver)?;
    let pop = &pop[1];

    // |0⟩⟨1| + |1⟩⟨0| keeps the seed Hermitian; its (0, N) entry is the |0⟩⟨1| response.
    let mut coh_seed = Mat::zeros(d, d);
    coh_seed[(0, 1)] = one;
    coh_seed[(1, 0)] = one;
    let (coh, _) = evolve_operator(spec, config, &coh_seed, &times, &solver)?;
    let coh = &coh[1];

    let leak_pop = (1..d).map(|j| modulus(pop[(0, j)])).fold(T::zero(), |a, b| a.max(b));
    let mut leak_coh = modulus(coh[(0, 0)]);
    for a in 1..d {
        for b in 1..d {
            leak_coh = leak_coh.max(modulus(coh[(a, b)]));
        }
    }
    if leak_pop > T::tol(1e-10) || leak_coh > T::tol(1e-10) {
        return Err(Error::Numerical(format!(
            "excitation sectors mixed (population run {leak_pop}, coherence run {leak_coh})"
        )));
    }

    let population = pop[(n, n)].re;
    let coherence = coh[(0, n)];
    let aligned = match reference {
        PhaseReference::MirrorImage => (neg_i_pow::<T>(n - 1) * coherence).re,
        PhaseReference::Optimal => modulus(coherence),
    };
    let fidelity = T::of(0.5) + population / T::of(6.0) + aligned / T::of(3.0);
    Ok(BlochAverage {
        population,
        coherence,
        fidelity,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcitationPeak<T> {
    pub t: T,
    pub probability: T,
}

/// Maximises `ρ_NN(t)` for the input `|1⟩⟨1|` over `(0, t_max]`.
///
/// The trajectory is sampled finely enough to resolve the fastest Bohr
/// frequency of the excitation block, then the best sample is refined by
/// golden-section search, re-integrating from the preceding sample.
pub fn max_excitation_probability<T: Real>(
    spec: &ChainSpec<T>,
    config: &LindbladConfig<T>,
    window: TimeWindow<T>,
) -> Result<ExcitationPeak<T>> {
    let h = build_subspace_hamiltonian(spec);
    let block = h.excitation_block();
    let radius = (0..block.nrows())
        .map(|r| block.row(r).iter().map(|z| modulus(*z)).fold(T::zero(), |a, b| a + b))
        .fold(T::zero(), |a, b| a.max(b));
    let t_max = window.t_max();
    // Gershgorin bound on the largest energy gap, 24 samples per fastest period.
    let per_unit = (radius * T::of(2.0) / T::two_pi() * T::of(24.0)).max(T::one());
    let samples = ((t_max * per_unit).to_f64_lossy().ceil() as usize).clamp(1_000, 400_000);
    let times = time_grid(t_max, samples + 1);
    let rho0 = SubspaceDensity::basis_state(spec.n(), 1);
    let traj = integrate_at(spec, config, &rho0, &times)?;

    let (best, _) = traj
        .states
        .iter()
        .enumerate()
        .skip(1)
        .fold((1, -T::one()), |(bi, bp), (i, s)| {
            let p = s.rho_nn();
            if p > bp {
                (i, p)
            } else {
                (bi, bp)
            }
        });
    let start = best - 1;
    let span_end = (best + 1).min(times.len() - 1);
    let origin = traj.states[start].matrix().clone();
    let t0 = times[start];
    let gen = Generator::new(*config, &h);
    let solver = Dopri5::default();
    let probe = |t: T| -> T {
        let dt = t - t0;
        if dt <= T::zero() {
            return traj.states[start].rho_nn();
        }
        match solver.integrate(|r| gen.apply(r), &origin, dt, &[dt], hermitize) {
            Ok((m, _)) => m[0][(spec.n(), spec.n())].re,
            Err(_) => -T::one(),
        }
    };
    let t_star = golden_section_max(probe, t0, times[span_end], (times[1] - times[0]) * T::of(1e-7));
    let p_star = probe(t_star);
    let sampled = traj.states[best].rho_nn();
    Ok(if p_star >= sampled {
        ExcitationPeak {
            t: t_star,
            probability: p_star,
        }
    } else {
        ExcitationPeak {
            t: times[best],
            probability: sampled,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transfer::Propagator;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn reduce_basis_states() {
        let r = reduce_to_target(&SubspaceDensity::<f64>::basis_state(3, 0));
        assert_eq!((r.p0(), r.p1()), (1.0, 0.0));
        let r = reduce_to_target(&SubspaceDensity::<f64>::basis_state(3, 3));
        assert_eq!((r.p0(), r.p1()), (0.0, 1.0));
        assert_eq!(r.coherence(), c(0.0, 0.0));
    }

    #[test]
    fn fidelity_terms() {
        let rho = QubitDensity::from_parts(0.3, 0.7, c(0.1, 0.2));
        assert!((state_fidelity(&rho, c(1.0, 0.0), c(0.0, 0.0), 4).unwrap() - 0.3).abs() < 1e-15);
        assert!((state_fidelity(&rho, c(0.0, 0.0), c(1.0, 0.0), 4).unwrap() - 0.7).abs() < 1e-15);
        let perfect = QubitDensity::from_parts(0.0, 1.0, c(0.0, 0.0));
        assert_eq!(state_fidelity(&perfect, c(0.0, 0.0), c(1.0, 0.0), 5).unwrap(), 1.0);
        assert!(state_fidelity(&perfect, c(1.0, 0.0), c(1.0, 0.0), 5).is_err());
    }

    #[test]
    fn density_validation() {
        let mut m = Mat::<f64>::zeros(3, 3);
        m[(0, 0)] = c(0.5, 0.0);
        assert!(SubspaceDensity::new(m.clone()).is_err());
        m[(1, 1)] = c(0.5, 0.0);
        assert!(SubspaceDensity::new(m.clone()).is_ok());
        m[(0, 1)] = c(0.6, 0.0);
        m[(1, 0)] = c(0.6, 0.0);
        assert!(SubspaceDensity::new(m).is_err());
    }

    #[test]
    fn unitary_limit_matches_propagator() {
        let spec = ChainSpec::mirror(5, 1.0_f64).unwrap();
        let cfg = LindbladConfig::dephasing(0.0).unwrap();
        let traj = integrate_master_equation(&spec, &cfg, &SubspaceDensity::basis_state(5, 1), PI, 40).unwrap();
        let prop = Propagator::new(&build_subspace_hamiltonian(&spec)).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let psi = prop.column(1, *t);
            for a in 0..5 {
                for b in 0..5 {
                    let want = psi[a] * psi[b].conj();
                    assert!((s.matrix()[(a + 1, b + 1)] - want).norm() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn single_site_chain() {
        let spec = ChainSpec::mirror(1, 1.0_f64).unwrap();
        let cfg = LindbladConfig::damping(0.2).unwrap();
        let b = bloch_average(&spec, &cfg, 1.0, PhaseReference::MirrorImage).unwrap();
        assert!((b.population - (-0.2f64).exp()).abs() < 1e-8);
        assert!((b.coherence - c((-0.1f64).exp(), 0.0)).norm() < 1e-8);
    }

    #[test]
    fn perfect_transfer_bloch() {
        let spec = ChainSpec::mirror(6, 1.0_f64).unwrap();
        let f = average_fidelity_bloch(&spec, &LindbladConfig::damping(0.0).unwrap(), PI).unwrap();
        assert!((f - 1.0).abs() < 1e-8);
    }

    #[test]
    fn bad_arguments() {
        let spec = ChainSpec::mirror(3, 1.0_f64).unwrap();
        let cfg = LindbladConfig::damping(0.1).unwrap();
        let rho0 = SubspaceDensity::basis_state(3, 1);
        assert!(integrate_master_equation(&spec, &cfg, &rho0, 0.0, 10).is_err());
        assert!(integrate_master_equation(&spec, &cfg, &rho0, 1.0, 1).is_err());
        let wrong = SubspaceDensity::basis_state(4, 1);
        assert!(integrate_master_equation(&spec, &cfg, &wrong, 1.0, 4).is_err());
        assert!(average_fidelity_bloch(&spec, &cfg, 0.0).is_err());
    }

    #[test]
    fn mirror_peak_without_decoherence() {
        let spec = ChainSpec::mirror(4, 1.0_f64).unwrap();
        let peak = max_excitation_probability(
            &spec,
            &LindbladConfig::dephasing(0.0).unwrap(),
            TimeWindow::new(4.0).unwrap(),
        )
        .unwrap();
        assert!((peak.probability - 1.0).abs() < 1e-8);
        assert!((peak.t - PI).abs() < 1e-3);
    }
}
