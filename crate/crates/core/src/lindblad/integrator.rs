//! Dormand–Prince 5(4) with embedded error control and continuous extension,
//! for matrix-valued autonomous ODEs `dy/dt = f(y)`.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{modulus, Real};

type State<T> = DMatrix<Complex<T>>;

// Stage times are not needed: the right-hand side is autonomous.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub struct Dopri5<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
    pub safety: T,
    pub fac_min: T,
    pub fac_max: T,
}

impl<T: Real> Default for Dopri5<T> {
    fn default() -> Self {
        Dopri5 {
            rtol: T::of(1e-9),
            atol: T::of(1e-12),
            max_steps: 1_000_000,
            safety: T::of(0.9),
            fac_min: T::of(0.2),
            fac_max: T::of(10.0),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

fn scale<T: Real>(z: Complex<T>, by: T) -> Complex<T> {
    Complex::new(z.re * by, z.im * by)
}

/// `y + h Σ a_i k_i`.
fn combine<T: Real>(y: &State<T>, h: T, terms: &[(f64, &State<T>)]) -> State<T> {
    let mut out = y.clone();
    for &(a, k) in terms {
        if a != 0.0 {
            let w = h * T::of(a);
            out.zip_apply(k, |o, ki| *o += scale(ki, w));
        }
    }
    out
}

impl<T: Real> Dopri5<T> {
    fn error_norm(&self, y0: &State<T>, y1: &State<T>, err: &State<T>) -> T {
        let mut acc = T::zero();
        for ((a, b), e) in y0.iter().zip(y1.iter()).zip(err.iter()) {
            let sc = self.atol + self.rtol * modulus(*a).max(modulus(*b));
            let r = modulus(*e) / sc;
            acc += r * r;
        }
        (acc / T::of(y0.len().max(1) as f64)).sqrt()
    }

    fn initial_step<F: Fn(&State<T>) -> State<T>>(&self, f: &F, y0: &State<T>, f0: &State<T>, span: T) -> T {
        let zero = State::<T>::zeros(y0.nrows(), y0.ncols());
        let d0 = self.error_norm(&zero, y0, y0);
        let d1 = self.error_norm(&zero, y0, f0);
        let mut h0 = if d0 < T::of(1e-5) || d1 < T::of(1e-5) {
            T::of(1e-6)
        } else {
            T::of(0.01) * d0 / d1
        };
        h0 = h0.min(span);
        let y1 = combine(y0, h0, &[(1.0, f0)]);
        let f1 = f(&y1);
        let diff = &f1 - f0;
        let d2 = self.error_norm(&zero, y0, &diff) / h0;
        let h1 = if d1.max(d2) <= T::of(1e-15) {
            (h0 * T::of(1e-3)).max(T::of(1e-6))
        } else {
            (T::of(0.01) / d1.max(d2)).powf(T::of(0.2))
        };
        (h0 * T::of(100.0)).min(h1).min(span)
    }

    /// Integrates from `t = 0` to `t_end`, returning the state at each entry of
    /// `sample_times` (sorted, within `[0, t_end]`). `project` is applied to every
    /// accepted step and to every emitted sample.
    pub fn integrate<F, P>(
        &self,
        f: F,
        y0: &State<T>,
        t_end: T,
        sample_times: &[T],
        project: P,
    ) -> Result<(Vec<State<T>>, Stats)>
    where
        F: Fn(&State<T>) -> State<T>,
        P: Fn(&mut State<T>),
    {
        if !(t_end >= T::zero()) {
            return Err(Error::Config(format!("t_end must be non-negative, got {t_end}")));
        }
        if sample_times.windows(2).any(|w| w[1] < w[0])
            || sample_times.iter().any(|&s| s < T::zero() || s > t_end)
        {
            return Err(Error::Config("sample times must be sorted and inside [0, t_end]".into()));
        }

        let mut stats = Stats::default();
        let mut out = Vec::with_capacity(sample_times.len());
        let mut next = 0;
        let mut y = y0.clone();
        let mut t = T::zero();
        while next < sample_times.len() && sample_times[next] <= t {
            out.push(y.clone());
            next += 1;
        }
        if t_end == T::zero() {
            return Ok((out, stats));
        }

        let eval = |y: &State<T>, stats: &mut Stats| {
            stats.evaluations += 1;
            f(y)
        };
        let mut k1 = eval(&y, &mut stats);
        let mut h = self.initial_step(&f, &y, &k1, t_end);
        stats.evaluations += 1;
        let mut last_rejected = false;

        loop {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(Error::Numerical(format!(
                    "step limit {} reached at t = {t}",
                    self.max_steps
                )));
            }
            let remaining = t_end - t;
            let finishing = h >= remaining;
            if finishing {
                h = remaining;
            }
            if h <= T::eps() * T::of(16.0) * t.abs().max(T::one()) {
                return Err(Error::Numerical(format!("step size underflow at t = {t}")));
            }

            let k2 = eval(&combine(&y, h, &[(A21, &k1)]), &mut stats);
            let k3 = eval(&combine(&y, h, &[(A31, &k1), (A32, &k2)]), &mut stats);
            let k4 = eval(&combine(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]), &mut stats);
            let k5 = eval(
                &combine(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
                &mut stats,
            );
            let k6 = eval(
                &combine(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
                &mut stats,
            );
            let y1 = combine(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = eval(&y1, &mut stats);
            let zero = State::<T>::zeros(y.nrows(), y.ncols());
            let err = combine(
                &zero,
                h,
                &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
            );
            let err_norm = self.error_norm(&y, &y1, &err);
            if !err_norm.is_finite() {
                return Err(Error::Numerical(format!("non-finite error estimate at t = {t}")));
            }

            if err_norm <= T::one() {
                stats.accepted += 1;
                let t_new = if finishing { t_end } else { t + h };
                // Continuous extension over [t, t_new].
                if next < sample_times.len() && sample_times[next] <= t_new {
                    let ydiff = &y1 - &y;
                    let bspl = combine(&-&ydiff, h, &[(1.0, &k1)]);
                    let r4 = combine(&(&ydiff - &bspl), h, &[(-1.0, &k7)]);
                    let r5 = combine(
                        &zero,
                        h,
                        &[(D1, &k1), (D3, &k3), (D4, &k4), (D5, &k5), (D6, &k6), (D7, &k7)],
                    );
                    while next < sample_times.len() && sample_times[next] <= t_new {
                        let s = sample_times[next];
                        let mut ys = if s == t_new {
                            y1.clone()
                        } else {
                            let th = (s - t) / h;
                            let th1 = T::one() - th;
                            let mut inner = r5.map(|z| scale(z, th1));
                            inner += &r4;
                            inner.apply(|z| *z = scale(*z, th));
                            inner += &bspl;
                            inner.apply(|z| *z = scale(*z, th1));
                            inner += &ydiff;
                            inner.apply(|z| *z = scale(*z, th));
                            inner + &y
                        };
                        project(&mut ys);
                        out.push(ys);
                        next += 1;
                    }
                }
                y = y1;
                project(&mut y);
                k1 = k7;
                t = t_new;
                if finishing {
                    break;
                }
                let mut fac = self.safety * err_norm.max(T::of(1e-10)).powf(T::of(-0.2));
                fac = fac.max(self.fac_min).min(self.fac_max);
                if last_rejected {
                    fac = fac.min(T::one());
                }
                h *= fac;
                last_rejected = false;
            } else {
                stats.rejected += 1;
                let fac = (self.safety * err_norm.powf(T::of(-0.2))).max(self.fac_min);
                h *= fac;
                last_rejected = true;
            }
        }
        Ok((out, stats))
    }
}
