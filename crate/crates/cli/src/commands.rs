//! One function per subcommand, each turning a resolved config into a report.
//!
//! Inputs are dimensionless: energies in units of J (Heisenberg) or ω (mirror),
//! times in units of the inverse. They are converted to physical values before
//! calling the library and back again for the emitted `t` columns.

use num_complex::Complex64;
use rayon::prelude::*;
use spinchan::environment::distributed_pair_density;
use spinchan::transfer::{time_grid, Propagator};
use spinchan::{
    average_fidelity_bloch, average_fidelity_common_env, average_fidelity_free, build_subspace_hamiltonian,
    critical_chain_length, lindblad, max_excitation_probability, wootters_concurrence, ChainSpec64,
    CommonEnvironment, ExplicitEnvironment64, Family, GaussianEnvironment64, LindbladConfig64,
    SubspaceDensity64, TimeWindow64,
};

use crate::config::{load_env_file, Command, RunConfig};
use crate::table::{Cell, Report, Table};
use crate::{CliError, Failure};

enum Env {
    Free,
    Gaussian(GaussianEnvironment64),
    Explicit(ExplicitEnvironment64),
}

impl CommonEnvironment<f64> for Env {
    fn decoherence_factor(&self, t: f64) -> Complex64 {
        match self {
            Env::Free => Complex64::new(1.0, 0.0),
            Env::Gaussian(g) => g.decoherence_factor(t),
            Env::Explicit(e) => e.decoherence_factor(t),
        }
    }
}

fn gaussian(theta: f64, scale: f64) -> Result<Env, CliError> {
    if theta == 0.0 {
        Ok(Env::Free)
    } else {
        Ok(Env::Gaussian(GaussianEnvironment64::new(theta * scale * scale)?))
    }
}

fn spec_for(cfg: &RunConfig, n: usize) -> Result<ChainSpec64, CliError> {
    let scale = cfg.scale();
    Ok(ChainSpec64::new(n, cfg.family(), scale, cfg.field.unwrap_or(0.0) * scale)?)
}

fn single_theta(cfg: &RunConfig) -> Option<f64> {
    cfg.theta.as_ref().map(|v| v[0])
}

pub fn execute(cfg: &RunConfig) -> Result<Report, Failure> {
    match cfg.command() {
        Command::Transfer => Ok(transfer(cfg)?),
        Command::CommonEnv => Ok(common_env(cfg)?),
        Command::Lindblad => lindblad_sweep(cfg),
        Command::CriticalLength => Ok(critical_length(cfg)?),
        Command::Entangle => Ok(entangle(cfg)?),
    }
}

fn time_sweep<F>(cfg: &RunConfig, columns: Vec<&'static str>, row: F) -> Result<Table, CliError>
where
    F: Fn(usize, f64, &Propagator<f64>) -> Vec<Cell> + Sync,
{
    let scale = cfg.scale();
    let times = time_grid(cfg.t_max.expect("validated"), cfg.samples.expect("validated"));
    let blocks: Vec<Result<Vec<Vec<Cell>>, CliError>> = cfg
        .lengths()?
        .into_par_iter()
        .map(|n| {
            let prop = Propagator::new(&build_subspace_hamiltonian(&spec_for(cfg, n)?))?;
            Ok(times.iter().map(|&t| row(n, t / scale, &prop)).collect())
        })
        .collect();
    let mut table = Table::new(columns);
    for block in blocks {
        for r in block? {
            table.push(r);
        }
    }
    Ok(table)
}

fn transfer(cfg: &RunConfig) -> Result<Report, CliError> {
    let scale = cfg.scale();
    let env = single_theta(cfg).map(|th| gaussian(th, scale)).transpose()?;
    let mut columns = vec!["N", "t", "abs_f", "F_free"];
    if env.is_some() {
        columns.push("F_common");
    }
    let main = time_sweep(cfg, columns, |n, t, prop| {
        let f = prop.amplitude(t);
        let mut row = vec![n.into(), (t * scale).into(), f.magnitude().into(), average_fidelity_free(&f).into()];
        if let Some(env) = &env {
            row.push(average_fidelity_common_env(&f, env, t).into());
        }
        row
    })?;
    Ok(Report { main, appendix: None })
}

fn common_env(cfg: &RunConfig) -> Result<Report, CliError> {
    let scale = cfg.scale();
    let env = match (single_theta(cfg), &cfg.env_file) {
        (Some(th), _) => gaussian(th, scale)?,
        (None, Some(path)) => {
            let (g, p) = load_env_file(path)?;
            let g = g.into_iter().map(|x| x * scale).collect();
            let env = ExplicitEnvironment64::new(g, p).map_err(|e| CliError::Config(format!("env-file: {e}")))?;
            if env.m() > spinchan::environment::MAX_PRODUCT_SPINS {
                return Err(CliError::Config(format!(
                    "env-file: {} spins exceeds the limit of {}",
                    env.m(),
                    spinchan::environment::MAX_PRODUCT_SPINS
                )));
            }
            Env::Explicit(env)
        }
        (None, None) => unreachable!("validated"),
    };
    let columns = vec!["N", "t", "abs_f", "factor", "F_free", "F_common"];
    let main = time_sweep(cfg, columns, |n, t, prop| {
        let f = prop.amplitude(t);
        vec![
            n.into(),
            (t * scale).into(),
            f.magnitude().into(),
            env.decoherence_factor(t).re.into(),
            average_fidelity_free(&f).into(),
            average_fidelity_common_env(&f, &env, t).into(),
        ]
    })?;
    Ok(Report { main, appendix: None })
}

fn lindblad_row(cfg: &RunConfig, n: usize) -> Result<Vec<Cell>, CliError> {
    let scale = cfg.scale();
    let spec = spec_for(cfg, n)?;
    let lcfg = LindbladConfig64::new(cfg.channel.expect("validated").into(), cfg.gamma.expect("validated") * scale)?;
    let (t_star, p) = match spec.family() {
        Family::MirrorXy => {
            let t = spec.mirror_time();
            let traj = lindblad::integrate_at(&spec, &lcfg, &SubspaceDensity64::basis_state(n, 1), &[0.0, t])?;
            (t, traj.final_state().rho_nn())
        }
        Family::HeisenbergXxx => {
            let window = TimeWindow64::new(cfg.window.expect("validated") / scale)?;
            let peak = max_excitation_probability(&spec, &lcfg, window)?;
            (peak.t, peak.probability)
        }
    };
    let f = average_fidelity_bloch(&spec, &lcfg, t_star)?;
    Ok(vec![n.into(), (t_star * scale).into(), p.into(), f.into()])
}

fn lindblad_sweep(cfg: &RunConfig) -> Result<Report, Failure> {
    let rows: Vec<Result<Vec<Cell>, CliError>> =
        cfg.lengths()?.into_par_iter().map(|n| lindblad_row(cfg, n)).collect();
    let mut main = Table::new(vec!["N", "t_star", "P", "F_avg"]);
    for row in rows {
        match row {
            Ok(r) => main.push(r),
            Err(error) => {
                return Err(Failure {
                    partial: Some(Box::new(Report { main, appendix: None })),
                    error,
                })
            }
        }
    }
    Ok(Report { main, appendix: None })
}

fn critical_length(cfg: &RunConfig) -> Result<Report, CliError> {
    let scale = cfg.scale();
    let window = TimeWindow64::new(cfg.window.expect("validated") / scale)?;
    let threshold = cfg.threshold.expect("validated");
    let mut main = Table::new(vec!["theta", "threshold", "n_c", "censored"]);
    let mut appendix = Table::new(vec!["theta", "N", "t_star", "F_max"]);
    for &theta in cfg.theta.as_deref().expect("validated") {
        let env = match gaussian(theta, scale)? {
            Env::Gaussian(g) => Some(g),
            _ => None,
        };
        let res = critical_chain_length(
            cfg.family(),
            scale,
            cfg.field.unwrap_or(0.0) * scale,
            threshold,
            window,
            env.as_ref(),
            cfg.n_limit.expect("validated"),
        )?;
        main.push(vec![theta.into(), threshold.into(), res.n_c.into(), res.censored.into()]);
        for (n, t, f) in res.per_n {
            appendix.push(vec![theta.into(), n.into(), (t * scale).into(), f.into()]);
        }
    }
    Ok(Report {
        main,
        appendix: Some(appendix),
    })
}

fn concurrence(lambda: f64, zeta: f64) -> Result<f64, CliError> {
    let rho = distributed_pair_density(lambda, Complex64::new(zeta, 0.0));
    Ok(wootters_concurrence(&rho)?)
}

fn entangle(cfg: &RunConfig) -> Result<Report, CliError> {
    let scale = cfg.scale();
    let n = cfg.lengths()?[0];
    let prop = Propagator::new(&build_subspace_hamiltonian(&spec_for(cfg, n)?))?;
    let env = gaussian(single_theta(cfg).unwrap_or(0.0), scale)?;
    let mut main = Table::new(vec!["t", "xi0", "xi", "ratio", "factor"]);
    for t in time_grid(cfg.t_max.expect("validated"), cfg.samples.expect("validated")) {
        let t_phys = t / scale;
        let lambda = prop.amplitude(t_phys).magnitude();
        let factor = env.decoherence_factor(t_phys).re;
        let xi0 = concurrence(lambda, lambda)?;
        let xi = concurrence(lambda, lambda * factor)?;
        // The ratio does not depend on λ; evaluating it at λ = 1 avoids dividing two tiny concurrences.
        let ratio = concurrence(1.0, factor)? / concurrence(1.0, 1.0)?;
        main.push(vec![t.into(), xi0.into(), xi.into(), ratio.into(), factor.into()]);
    }
    Ok(Report { main, appendix: None })
}
