//! Run configuration: clap flags layered over an optional TOML file.
//!
//! Keys in the file use the same kebab-case names as the flags. The resolved
//! configuration (defaults filled in) is what gets echoed into output headers,
//! and [`parse_header`] reads it back.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const ARTIFACT: &str = concat!("spinchan ", env!("CARGO_PKG_VERSION"));

const DEFAULT_SAMPLES: usize = 201;
const DEFAULT_THRESHOLD: f64 = 2.0 / 3.0;
const DEFAULT_CRITICAL_WINDOW: f64 = 4000.0;
const DEFAULT_LINDBLAD_WINDOW: f64 = 50.0;
const DEFAULT_N_LIMIT: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Transfer,
    CommonEnv,
    Lindblad,
    CriticalLength,
    Entangle,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Transfer => "transfer",
            Command::CommonEnv => "common-env",
            Command::Lindblad => "lindblad",
            Command::CriticalLength => "critical-length",
            Command::Entangle => "entangle",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    Heisenberg,
    Mirror,
}

impl From<FamilyArg> for spinchan::Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Heisenberg => spinchan::Family::HeisenbergXxx,
            FamilyArg::Mirror => spinchan::Family::MirrorXy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelArg {
    Dephasing,
    Damping,
}

impl From<ChannelArg> for spinchan::Channel {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::Dephasing => spinchan::Channel::Dephasing,
            ChannelArg::Damping => spinchan::Channel::Damping,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every subcommand. All of them may also come from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Coupling family
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Chain length
    #[arg(long)]
    pub n: Option<usize>,
    /// Inclusive range of chain lengths, `A:B`
    #[arg(long)]
    pub n_range: Option<String>,
    /// Heisenberg exchange J (sets the energy unit)
    #[arg(long)]
    pub j: Option<f64>,
    /// Mirror-chain frequency ω (sets the energy unit)
    #[arg(long)]
    pub omega: Option<f64>,
    /// Uniform field B/J (Heisenberg only)
    #[arg(long, allow_negative_numbers = true)]
    pub field: Option<f64>,
    /// Gaussian environment width ϑ/J²; critical-length accepts a comma list
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub theta: Option<Vec<f64>>,
    /// Local decoherence rate γ/J (or γ/ω)
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Local decoherence channel
    #[arg(long, value_enum)]
    pub channel: Option<ChannelArg>,
    /// End of the time grid, in units of 1/J (or 1/ω)
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    /// Number of time samples, including both ends
    #[arg(long)]
    pub samples: Option<usize>,
    /// Search window for optimal times, in units of 1/J (or 1/ω)
    #[arg(long, allow_negative_numbers = true)]
    pub window: Option<f64>,
    /// Fidelity threshold for the critical length
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Largest chain length the critical-length search will try
    #[arg(long)]
    pub n_limit: Option<usize>,
    /// Explicit environment: one `g p` pair per line, `#` comments allowed
    #[arg(long)]
    pub env_file: Option<PathBuf>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// TOML file with any of the keys above; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_range: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_limit: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub env_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

fn bad(key: &str, msg: impl fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {msg}"))
}

fn missing(key: &str, command: Command) -> CliError {
    bad(key, format!("required by {command}"))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config file: {}", e.message().trim())))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Lays `flags` over `self`. `--n` and `--n-range` replace each other.
    fn overlay(mut self, flags: &Flags) -> Self {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if flags.$field.is_some() {
                    self.$field = flags.$field.clone();
                })*
            };
        }
        if flags.n.is_some() {
            self.n_range = None;
        }
        if flags.n_range.is_some() {
            self.n = None;
        }
        take!(family, n, n_range, j, omega, field, theta, gamma, channel, t_max, samples, window, threshold,
              n_limit, env_file, out, format);
        self
    }

    /// Merges the optional config file with the flags, fills defaults and validates.
    pub fn resolve(command: Command, flags: &Flags) -> Result<Self, CliError> {
        let base = match &flags.config {
            Some(path) => Self::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(c) = base.command {
            if c != command {
                return Err(bad("command", format!("config file is for {c}, not {command}")));
            }
        }
        let mut cfg = base.overlay(flags);
        cfg.command = Some(command);
        cfg.fill_defaults();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn command(&self) -> Command {
        self.command.expect("resolved config carries its command")
    }

    fn fill_defaults(&mut self) {
        let command = self.command();
        if command == Command::CriticalLength {
            self.family.get_or_insert(FamilyArg::Heisenberg);
            self.theta.get_or_insert_with(|| vec![0.0]);
            self.threshold.get_or_insert(DEFAULT_THRESHOLD);
            self.window.get_or_insert(DEFAULT_CRITICAL_WINDOW);
            self.n_limit.get_or_insert(DEFAULT_N_LIMIT);
        }
        match self.family {
            Some(FamilyArg::Heisenberg) => {
                self.j.get_or_insert(1.0);
                self.field.get_or_insert(0.0);
            }
            Some(FamilyArg::Mirror) => {
                self.omega.get_or_insert(1.0);
            }
            None => {}
        }
        if matches!(command, Command::Transfer | Command::CommonEnv | Command::Entangle) {
            self.samples.get_or_insert(DEFAULT_SAMPLES);
        }
        if command == Command::Lindblad && self.family == Some(FamilyArg::Heisenberg) {
            self.window.get_or_insert(DEFAULT_LINDBLAD_WINDOW);
        }
        self.format.get_or_insert(Format::Csv);
    }

    fn validate(&self) -> Result<(), CliError> {
        let command = self.command();
        let family = self.family.ok_or_else(|| missing("family", command))?;
        match family {
            FamilyArg::Heisenberg => {
                if self.omega.is_some() {
                    return Err(bad("omega", "only applies to the mirror family; use --j"));
                }
                positive("j", self.j)?;
                finite("field", self.field)?;
            }
            FamilyArg::Mirror => {
                if self.j.is_some() {
                    return Err(bad("j", "only applies to the heisenberg family; use --omega"));
                }
                if self.field.is_some() {
                    return Err(bad("field", "the mirror family carries no field"));
                }
                positive("omega", self.omega)?;
            }
        }
        if command != Command::CriticalLength {
            if self.n.is_some() && self.n_range.is_some() {
                return Err(bad("n-range", "give either n or n-range, not both"));
            }
            if self.n.is_none() && self.n_range.is_none() {
                return Err(missing("n", command));
            }
            self.lengths()?;
        } else if self.n.is_some() || self.n_range.is_some() {
            return Err(bad("n", "critical-length scans lengths itself; use n-limit"));
        }
        if command == Command::Entangle && self.lengths()?.len() != 1 {
            return Err(bad("n-range", "entangle takes a single chain length"));
        }

        if let Some(thetas) = &self.theta {
            if thetas.is_empty() {
                return Err(bad("theta", "empty list"));
            }
            if thetas.iter().any(|t| !t.is_finite() || *t < 0.0) {
                return Err(bad("theta", "must be finite and non-negative (0 means no environment)"));
            }
            if command != Command::CriticalLength && thetas.len() != 1 {
                return Err(bad("theta", format!("{command} takes a single value")));
            }
        }
        if let Some(s) = self.samples {
            if s < 2 {
                return Err(bad("samples", format!("must be at least 2, got {s}")));
            }
        }
        match command {
            Command::Transfer | Command::Entangle => {
                positive("t-max", self.t_max)?;
                if self.env_file.is_some() {
                    return Err(bad("env-file", format!("not used by {command}")));
                }
            }
            Command::CommonEnv => {
                positive("t-max", self.t_max)?;
                match (&self.theta, &self.env_file) {
                    (None, None) => return Err(bad("theta", "common-env needs theta or env-file")),
                    (Some(_), Some(_)) => return Err(bad("env-file", "give either theta or env-file, not both")),
                    _ => {}
                }
            }
            Command::Lindblad => {
                let gamma = self.gamma.ok_or_else(|| missing("gamma", command))?;
                if !gamma.is_finite() || gamma < 0.0 {
                    return Err(bad("gamma", format!("must be finite and non-negative, got {gamma}")));
                }
                if self.channel.is_none() {
                    return Err(missing("channel", command));
                }
                if family == FamilyArg::Heisenberg {
                    positive("window", self.window)?;
                }
            }
            Command::CriticalLength => {
                positive("window", self.window)?;
                let th = self.threshold.unwrap_or(DEFAULT_THRESHOLD);
                if !(th > 0.5 && th < 1.0) {
                    return Err(bad("threshold", format!("must lie in (1/2, 1), got {th}")));
                }
                if self.n_limit == Some(0) {
                    return Err(bad("n-limit", "must be at least 1"));
                }
            }
        }
        if command != Command::Lindblad && (self.gamma.is_some() || self.channel.is_some()) {
            let key = if self.gamma.is_some() { "gamma" } else { "channel" };
            return Err(bad(key, format!("not used by {command}")));
        }
        Ok(())
    }

    pub fn family(&self) -> spinchan::Family {
        self.family.expect("validated").into()
    }

    /// Energy unit: J for Heisenberg chains, ω for mirror chains.
    pub fn scale(&self) -> f64 {
        match self.family.expect("validated") {
            FamilyArg::Heisenberg => self.j.expect("validated"),
            FamilyArg::Mirror => self.omega.expect("validated"),
        }
    }

    pub fn lengths(&self) -> Result<Vec<usize>, CliError> {
        if let Some(n) = self.n {
            if n == 0 {
                return Err(bad("n", "must be at least 1"));
            }
            return Ok(vec![n]);
        }
        let range = self.n_range.as_deref().ok_or_else(|| missing("n", self.command()))?;
        let (a, b) = parse_range(range).ok_or_else(|| bad("n-range", format!("expected A:B, got {range:?}")))?;
        if a == 0 || b < a {
            return Err(bad("n-range", format!("empty or invalid range {range}")));
        }
        Ok((a..=b).collect())
    }
}

fn parse_range(s: &str) -> Option<(usize, usize)> {
    let (a, b) = s.split_once(':')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

fn positive(key: &str, v: Option<f64>) -> Result<f64, CliError> {
    match v {
        Some(x) if x.is_finite() && x > 0.0 => Ok(x),
        Some(x) => Err(bad(key, format!("must be finite and positive, got {x}"))),
        None => Err(bad(key, "missing")),
    }
}

fn finite(key: &str, v: Option<f64>) -> Result<(), CliError> {
    match v {
        Some(x) if !x.is_finite() => Err(bad(key, format!("must be finite, got {x}"))),
        _ => Ok(()),
    }
}

/// Header lines (without the `# ` prefix) describing a resolved config.
pub fn header_lines(cfg: &RunConfig) -> Vec<String> {
    let body = toml::to_string(cfg).expect("config serialises");
    std::iter::once(format!("artifact = {:?}", ARTIFACT))
        .chain(body.lines().filter(|l| !l.is_empty()).map(str::to_string))
        .collect()
}

/// Reads the `#` header at the top of an emitted CSV file back into a config.
pub fn parse_header(text: &str) -> Result<(String, RunConfig), CliError> {
    let body: String = text
        .lines()
        .map_while(|l| l.strip_prefix("# "))
        .take_while(|l| !l.starts_with("table ="))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut table: toml::Table = toml::from_str(&body).map_err(|e| bad("header", e.message().trim()))?;
    let artifact = match table.remove("artifact") {
        Some(toml::Value::String(s)) => s,
        _ => return Err(bad("header", "missing artifact line")),
    };
    let cfg = RunConfig::deserialize(toml::Value::Table(table)).map_err(|e| bad("header", e.message().trim()))?;
    Ok((artifact, cfg))
}

/// Explicit environment file: one `g p` pair per line.
pub fn load_env_file(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad("env-file", format!("cannot read {}: {e}", path.display())))?;
    let mut g = Vec::new();
    let mut p = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| bad("env-file", format!("line {}: expected two numbers, got {line:?}", i + 1)))?;
        if nums.len() != 2 {
            return Err(bad("env-file", format!("line {}: expected `g p`, got {line:?}", i + 1)));
        }
        g.push(nums[0]);
        p.push(nums[1]);
    }
    if g.is_empty() {
        return Err(bad("env-file", "no environment spins listed"));
    }
    Ok((g, p))
}
