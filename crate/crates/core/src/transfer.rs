//! Decoherence-free transfer: amplitudes, average fidelity, fidelity maximisation
//! and the critical chain length.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use rayon::prelude::*;

use crate::chain::{build_subspace_hamiltonian, ChainSpec, Family, SubspaceHamiltonian};
use crate::environment::GaussianEnvironment;
use crate::error::{config, Error, Result};
use crate::scalar::{argument, cis, modulus, Real};

/// `f_1N(t) = ⟨N|e^{-iHt}|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferAmplitude<T> {
    pub value: Complex<T>,
    pub t: T,
}

impl<T: Real> TransferAmplitude<T> {
    pub fn new(value: Complex<T>, t: T) -> Self {
        TransferAmplitude { value, t }
    }

    /// Amplitude with zero phase, as produced by an optimally tuned field.
    pub fn real(magnitude: T, t: T) -> Self {
        TransferAmplitude {
            value: Complex::new(magnitude, T::zero()),
            t,
        }
    }

    pub fn magnitude(&self) -> T {
        modulus(self.value)
    }

    pub fn phase(&self) -> T {
        argument(self.value)
    }
}

/// Spectral decomposition of the single-excitation block; evaluates
/// `e^{-iHt}` matrix elements for any `t` without refactorising.
#[derive(Debug, Clone)]
pub struct Propagator<T: Real> {
    energies: DVector<T>,
    vectors: DMatrix<Complex<T>>,
}

impl<T: Real> Propagator<T> {
    pub fn new(h: &SubspaceHamiltonian<T>) -> Result<Self> {
        let block = h.excitation_block();
        let dim = block.nrows();
        let norm = block.iter().map(|z| modulus(*z)).fold(T::zero(), |a, b| a.max(b));
        let eig = SymmetricEigen::try_new(block, T::eps(), 10_000).ok_or_else(|| {
            Error::Numerical(format!(
                "Hermitian eigensolver did not converge (dim {dim}, max |H_ij| {norm})"
            ))
        })?;
        Ok(Propagator {
            energies: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    pub fn n(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &DVector<T> {
        &self.energies
    }

    /// Spectral weights `c_k = ⟨to|k⟩⟨k|from⟩` (sites are 1-based).
    pub fn weights(&self, from: usize, to: usize) -> Vec<Complex<T>> {
        let (f, g) = (from - 1, to - 1);
        (0..self.n())
            .map(|k| self.vectors[(g, k)] * self.vectors[(f, k)].conj())
            .collect()
    }

    /// `⟨to|e^{-iHt}|from⟩` for sites in `1..=N`.
    pub fn element(&self, from: usize, to: usize, t: T) -> Complex<T> {
        let (f, g) = (from - 1, to - 1);
        let mut acc = Complex::new(T::zero(), T::zero());
        for k in 0..self.n() {
            acc += self.vectors[(g, k)] * self.vectors[(f, k)].conj() * cis(-self.energies[k] * t);
        }
        acc
    }

    /// Column `e^{-iHt}|from⟩` over the sites `1..=N`.
    pub fn column(&self, from: usize, t: T) -> Vec<Complex<T>> {
        let f = from - 1;
        let phases: Vec<_> = (0..self.n())
            .map(|k| self.vectors[(f, k)].conj() * cis(-self.energies[k] * t))
            .collect();
        (0..self.n())
            .map(|g| {
                phases
                    .iter()
                    .enumerate()
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (k, p)| acc + self.vectors[(g, k)] * p)
            })
            .collect()
    }

    pub fn amplitude(&self, t: T) -> TransferAmplitude<T> {
        TransferAmplitude::new(self.element(1, self.n(), t), t)
    }
}

pub fn transfer_amplitude<T: Real>(h: &SubspaceHamiltonian<T>, t: T) -> Result<TransferAmplitude<T>> {
    if !(t >= T::zero()) {
        return Err(config(format!("time must be non-negative, got {t}")));
    }
    Ok(Propagator::new(h)?.amplitude(t))
}

/// `[-i sin(ωt/2)]^{N-1}`.
pub fn closed_form_mirror_amplitude<T: Real>(n: usize, omega: T, t: T) -> TransferAmplitude<T> {
    let s = (omega * t * T::of(0.5)).sin();
    let base = Complex::new(T::zero(), -s);
    let mut value = Complex::new(T::one(), T::zero());
    for _ in 1..n {
        value *= base;
    }
    TransferAmplitude::new(value, t)
}

/// Bloch-averaged fidelity without decoherence, `1/2 + |f|²/6 + |f|/3`.
pub fn average_fidelity_free<T: Real>(f: &TransferAmplitude<T>) -> T {
    fidelity_from_magnitude(f.magnitude(), T::one())
}

/// `1/2 + |f|²/6 + (|f|/3)·coherence`.
pub(crate) fn fidelity_from_magnitude<T: Real>(mag: T, coherence: T) -> T {
    T::of(0.5) + mag * mag / T::of(6.0) + mag * coherence / T::of(3.0)
}

/// Search interval `(0, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow<T> {
    t_max: T,
}

impl<T: Real> TimeWindow<T> {
    pub fn new(t_max: T) -> Result<Self> {
        if !(t_max > T::zero()) || !t_max.is_finite() {
            return Err(config(format!("time window (0, {t_max}] is empty")));
        }
        Ok(TimeWindow { t_max })
    }

    pub fn t_max(&self) -> T {
        self.t_max
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    /// Coarse grid points across the window.
    pub grid_points: usize,
    /// How many of the highest grid maxima are refined by golden-section search.
    pub refine_candidates: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            grid_points: 100_000,
            refine_candidates: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityPeak<T> {
    pub t: T,
    pub fidelity: T,
    pub magnitude: T,
}

pub fn max_fidelity_search<T: Real>(
    spec: &ChainSpec<T>,
    window: TimeWindow<T>,
    env: Option<&GaussianEnvironment<T>>,
) -> Result<FidelityPeak<T>> {
    max_fidelity_search_with(spec, window, env, SearchOptions::default())
}

pub fn max_fidelity_search_with<T: Real>(
    spec: &ChainSpec<T>,
    window: TimeWindow<T>,
    env: Option<&GaussianEnvironment<T>>,
    opts: SearchOptions,
) -> Result<FidelityPeak<T>> {
    if opts.grid_points < 2 {
        return Err(config("grid_points must be at least 2"));
    }
    let prop = Propagator::new(&build_subspace_hamiltonian(spec))?;
    let objective = |t: T| -> (T, T) {
        let mag = modulus(prop.element(1, prop.n(), t));
        let coherence = env.map_or(T::one(), |e| e.factor(t));
        (fidelity_from_magnitude(mag, coherence), mag)
    };

    let t_max = window.t_max();
    let m = opts.grid_points;
    let dt = t_max / T::of(m as f64);
    let grid = scan_magnitudes(&prop, dt, m);
    let values: Vec<T> = grid
        .iter()
        .enumerate()
        .map(|(k, &mag)| {
            let t = dt * T::of((k + 1) as f64);
            let coherence = env.map_or(T::one(), |e| e.factor(t));
            fidelity_from_magnitude(mag, coherence)
        })
        .collect();

    // Local maxima of the grid, best first.
    let mut peaks: Vec<usize> = (0..m)
        .filter(|&k| {
            let left = if k == 0 { T::zero() } else { values[k - 1] };
            let right = if k + 1 == m { T::zero() } else { values[k + 1] };
            values[k] >= left && values[k] >= right
        })
        .collect();
    peaks.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap_or(std::cmp::Ordering::Equal));
    peaks.truncate(opts.refine_candidates.max(1));

    let mut best = {
        let k = peaks[0];
        let t = dt * T::of((k + 1) as f64);
        let (fidelity, magnitude) = objective(t);
        FidelityPeak { t, fidelity, magnitude }
    };
    for &k in &peaks {
        let lo = dt * T::of(k as f64);
        let hi = (dt * T::of((k + 2) as f64)).min(t_max);
        let t = golden_section_max(|t| objective(t).0, lo, hi, dt * T::of(1e-9));
        let (fidelity, magnitude) = objective(t);
        if fidelity > best.fidelity {
            best = FidelityPeak { t, fidelity, magnitude };
        }
    }
    Ok(best)
}

/// `|f_1N(k·dt)|` for `k = 1..=m`, by phase rotation with periodic re-seeding.
fn scan_magnitudes<T: Real>(prop: &Propagator<T>, dt: T, m: usize) -> Vec<T> {
    const RESEED: usize = 512;
    let weights = prop.weights(1, prop.n());
    let steps: Vec<Complex<T>> = prop.energies().iter().map(|&e| cis(-e * dt)).collect();
    let mut phases = vec![Complex::new(T::zero(), T::zero()); weights.len()];
    let mut out = Vec::with_capacity(m);
    for k in 1..=m {
        if (k - 1) % RESEED == 0 {
            let t = dt * T::of(k as f64);
            for (p, &e) in phases.iter_mut().zip(prop.energies().iter()) {
                *p = cis(-e * t);
            }
        } else {
            for (p, s) in phases.iter_mut().zip(&steps) {
                *p *= s;
            }
        }
        let f = weights
            .iter()
            .zip(&phases)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (w, p)| acc + w * p);
        out.push(modulus(f));
    }
    out
}

/// Maximiser of a unimodal `f` on `[lo, hi]`.
pub(crate) fn golden_section_max<T: Real, F: Fn(T) -> T>(f: F, mut lo: T, mut hi: T, tol: T) -> T {
    let ratio = T::of(0.618_033_988_749_894_8);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        }
    }
    let mid = (lo + hi) * T::of(0.5);
    [lo, mid, hi]
        .into_iter()
        .fold(mid, |best, x| if f(x) > f(best) { x } else { best })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalLengthResult<T> {
    /// Largest passing length; `0` when `N = 1` already fails.
    pub n_c: usize,
    /// True when no length up to the search limit failed; `n_c` is then that limit.
    pub censored: bool,
    pub threshold: T,
    pub window: TimeWindow<T>,
    /// `(N, t*, F_max)` for every length examined.
    pub per_n: Vec<(usize, T, T)>,
}

/// Classical-transmission bound on the average fidelity.
pub fn classical_threshold<T: Real>() -> T {
    T::of(2.0 / 3.0)
}

/// Walks `N = 1, 2, …` until the maximised fidelity no longer exceeds `threshold`.
/// Lengths are evaluated in parallel batches; the result does not depend on scheduling.
pub fn critical_chain_length<T: Real>(
    family: Family,
    scale: T,
    field: T,
    threshold: T,
    window: TimeWindow<T>,
    env: Option<&GaussianEnvironment<T>>,
    n_limit: usize,
) -> Result<CriticalLengthResult<T>> {
    if !(threshold > T::of(0.5) && threshold < T::one()) {
        return Err(config(format!("threshold must lie in (1/2, 1), got {threshold}")));
    }
    if n_limit == 0 {
        return Err(config("n_limit must be at least 1"));
    }
    let batch = rayon::current_num_threads().max(4);
    let mut per_n = Vec::new();
    let mut next = 1;
    while next <= n_limit {
        let end = (next + batch - 1).min(n_limit);
        let rows: Vec<Result<(usize, T, T)>> = (next..=end)
            .into_par_iter()
            .map(|n| {
                let spec = ChainSpec::new(n, family, scale, field)?;
                let peak = max_fidelity_search(&spec, window, env)?;
                Ok((n, peak.t, peak.fidelity))
            })
            .collect();
        for row in rows {
            let row = row?;
            per_n.push(row);
            if row.2 <= threshold {
                return Ok(CriticalLengthResult {
                    n_c: row.0 - 1,
                    censored: false,
                    threshold,
                    window,
                    per_n,
                });
            }
        }
        next = end + 1;
    }
    Ok(CriticalLengthResult {
        n_c: n_limit,
        censored: true,
        threshold,
        window,
        per_n,
    })
}

/// Sampled time series of a transfer metric.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityCurve<T> {
    pub times: Vec<T>,
    pub values: Vec<T>,
    pub label: String,
    pub spec: ChainSpec<T>,
    pub theta: Option<T>,
}

impl<T: Real> FidelityCurve<T> {
    pub fn new(
        times: Vec<T>,
        values: Vec<T>,
        label: impl Into<String>,
        spec: ChainSpec<T>,
        theta: Option<T>,
    ) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::Validation("times and values differ in length".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Validation("sample times must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("curve contains non-finite values".into()));
        }
        Ok(FidelityCurve {
            times,
            values,
            label: label.into(),
            spec,
            theta,
        })
    }
}

/// `samples` equally spaced times on `[0, t_max]`.
pub fn time_grid<T: Real>(t_max: T, samples: usize) -> Vec<T> {
    let last = T::of((samples.max(2) - 1) as f64);
    (0..samples)
        .map(|k| t_max * T::of(k as f64) / last)
        .collect()
}

/// Decoherence-free average fidelity sampled on `[0, t_max]`.
pub fn free_fidelity_curve<T: Real>(spec: &ChainSpec<T>, t_max: T, samples: usize) -> Result<FidelityCurve<T>> {
    if samples < 2 {
        return Err(config("samples must be at least 2"));
    }
    let prop = Propagator::new(&build_subspace_hamiltonian(spec))?;
    let times = time_grid(t_max, samples);
    let values = times
        .iter()
        .map(|&t| average_fidelity_free(&prop.amplitude(t)))
        .collect();
    FidelityCurve::new(times, values, "F_free", *spec, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_time_amplitude_vanishes() {
        for spec in [
            ChainSpec::heisenberg(5, 1.0_f64, 0.2).unwrap(),
            ChainSpec::mirror(4, 1.0_f64).unwrap(),
        ] {
            let f = transfer_amplitude(&build_subspace_hamiltonian(&spec), 0.0).unwrap();
            assert!(f.magnitude() < 1e-14);
        }
    }

    #[test]
    fn mirror_three_sites_at_pi() {
        let h = build_subspace_hamiltonian(&ChainSpec::mirror(3, 1.0_f64).unwrap());
        let f = transfer_amplitude(&h, std::f64::consts::PI).unwrap();
        assert!((f.value - Complex::new(-1.0, 0.0)).norm() < 1e-12);
        assert!((f.magnitude() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_time_rejected() {
        let h = build_subspace_hamiltonian(&ChainSpec::mirror(3, 1.0_f64).unwrap());
        assert!(transfer_amplitude(&h, -1.0).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let f = closed_form_mirror_amplitude(2, 1.0_f64, std::f64::consts::PI);
        assert!((f.value - Complex::new(0.0, -1.0)).norm() < 1e-15);
        assert_eq!(closed_form_mirror_amplitude(1, 1.0_f64, 0.0).value, Complex::new(1.0, 0.0));
        assert_eq!(closed_form_mirror_amplitude(4, 1.0_f64, 0.0).magnitude(), 0.0);

        let h = build_subspace_hamiltonian(&ChainSpec::mirror(5, 2.0_f64).unwrap());
        let num = transfer_amplitude(&h, 0.4).unwrap();
        let exact = closed_form_mirror_amplitude(5, 2.0, 0.4);
        assert!((num.value - exact.value).norm() < 1e-9);
    }

    #[test]
    fn free_fidelity_limits() {
        assert_eq!(average_fidelity_free(&TransferAmplitude::real(1.0_f64, 0.0)), 1.0);
        assert_eq!(average_fidelity_free(&TransferAmplitude::real(0.0_f64, 0.0)), 0.5);
        let f = average_fidelity_free(&TransferAmplitude::real(0.9_f64, 0.0));
        assert!((f - 0.935).abs() < 1e-15);
    }

    #[test]
    fn golden_section_parabola() {
        let x = golden_section_max(|x: f64| -(x - 0.3).powi(2), 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
    }

    #[test]
    fn window_and_threshold_validation() {
        assert!(TimeWindow::new(0.0_f64).is_err());
        assert!(TimeWindow::new(f64::NAN).is_err());
        let w = TimeWindow::new(10.0_f64).unwrap();
        assert!(critical_chain_length(Family::MirrorXy, 1.0, 0.0, 0.4, w, None, 5).is_err());
    }

    #[test]
    fn mirror_peak_at_pi_over_omega() {
        let spec = ChainSpec::mirror(4, 1.0_f64).unwrap();
        let peak = max_fidelity_search(&spec, TimeWindow::new(5.0).unwrap(), None).unwrap();
        assert!((peak.t - std::f64::consts::PI).abs() < 1e-4);
        assert!((peak.fidelity - 1.0).abs() < 1e-8);
    }

    #[test]
    fn mirror_never_fails() {
        let w = TimeWindow::new(4.0_f64).unwrap();
        let r = critical_chain_length(Family::MirrorXy, 1.0, 0.0, 2.0 / 3.0, w, None, 12).unwrap();
        assert!(r.censored);
        assert_eq!(r.n_c, 12);
        assert_eq!(r.per_n.len(), 12);
    }

    #[test]
    fn curve_rejects_unsorted_times() {
        let spec = ChainSpec::mirror(2, 1.0_f64).unwrap();
        assert!(FidelityCurve::new(vec![0.0, 0.0], vec![0.5, 0.5], "F", spec, None).is_err());
        let c = free_fidelity_curve(&spec, std::f64::consts::PI, 3).unwrap();
        assert_eq!(c.values[0], 0.5);
        assert!((c.values[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_precision_mirror() {
        let h = build_subspace_hamiltonian(&ChainSpec::mirror(6, 1.0_f32).unwrap());
        let prop = Propagator::new(&h).unwrap();
        for k in 0..20 {
            let t = 0.3 * k as f32;
            let a = prop.amplitude(t).value;
            let b = closed_form_mirror_amplitude(6, 1.0_f32, t).value;
            assert!((a - b).norm() < 1e-4, "t={t}: {a} vs {b}");
        }
    }
}
