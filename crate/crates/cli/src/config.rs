use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sspec_core::error::{Error, Result};
use sspec_core::extension::ExtensionParams;
use sspec_core::zeta_heat::Precision;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Spectrum,
    Trace,
    Zeta,
    Poles,
    Heat,
    Asympt,
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Output {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecisionArg {
    #[default]
    Double,
    Extended,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Precision {
        match p {
            PrecisionArg::Double => Precision::Double,
            PrecisionArg::Extended => Precision::Extended,
        }
    }
}

/// Everything that determines a run's output. Serialized into every JSON report.
#[derive(Clone, Debug, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// spectrum | trace | zeta | poles | heat | asympt | verify
    #[arg(value_enum)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub command: Option<Command>,

    /// Coupling g in [1/2, 3/2)
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub g: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub beta: Option<f64>,
    /// Extension parameter instead of alpha/beta
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rho: Option<f64>,
    /// Extension label at g = 1/2
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub theta: Option<f64>,

    /// Number of eigenvalues (spectrum)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<usize>,

    /// Real part of lambda (trace)
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<f64>,
    /// Imaginary part of lambda (trace)
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda_im: Option<f64>,
    /// Half plane, +1 or -1, for real positive lambda (trace) or the expansion (asympt)
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma: Option<i8>,

    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub s: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub s_from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub s_to: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub s_steps: Option<usize>,

    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t_from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t_to: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t_steps: Option<usize>,

    /// Number of terms (poles, heat expansion, asympt)
    #[arg(long = "K")]
    #[serde(rename = "K", skip_serializing_if = "Option::is_none", default)]
    pub k: Option<usize>,
    /// Explicit eigenvalues for spectral sums
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n_explicit: Option<usize>,

    #[arg(long, value_enum, default_value_t)]
    #[serde(default)]
    pub output: Output,
    #[arg(long, value_enum, default_value_t)]
    #[serde(default)]
    pub precision: PrecisionArg,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::MalformedInput(msg.into())
}

impl RunConfig {
    fn set_flags(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        let mut push = |on: bool, name: &'static str| {
            if on {
                v.push(name)
            }
        };
        push(self.g.is_some(), "g");
        push(self.alpha.is_some(), "alpha");
        push(self.beta.is_some(), "beta");
        push(self.rho.is_some(), "rho");
        push(self.theta.is_some(), "theta");
        push(self.n.is_some(), "n");
        push(self.lambda.is_some(), "lambda");
        push(self.lambda_im.is_some(), "lambda-im");
        push(self.sigma.is_some(), "sigma");
        push(self.s.is_some(), "s");
        push(self.s_from.is_some(), "s-from");
        push(self.s_to.is_some(), "s-to");
        push(self.s_steps.is_some(), "s-steps");
        push(self.t.is_some(), "t");
        push(self.t_from.is_some(), "t-from");
        push(self.t_to.is_some(), "t-to");
        push(self.t_steps.is_some(), "t-steps");
        push(self.k.is_some(), "K");
        push(self.n_explicit.is_some(), "n-explicit");
        push(self.precision != PrecisionArg::Double, "precision");
        v
    }

    /// Rejects missing, conflicting and inapplicable flags before any computation.
    pub fn validate(&self) -> Result<Command> {
        let cmd = self.command.ok_or_else(|| invalid("missing subcommand"))?;
        const EXT: [&str; 5] = ["g", "alpha", "beta", "rho", "theta"];
        let allowed: &[&str] = match cmd {
            Command::Spectrum => &["n"],
            Command::Trace => &["lambda", "lambda-im", "sigma", "n-explicit"],
            Command::Zeta => &["s", "s-from", "s-to", "s-steps", "n-explicit", "precision"],
            Command::Poles => &["K"],
            Command::Heat => &["t", "t-from", "t-to", "t-steps", "n-explicit", "precision", "K"],
            Command::Asympt => &["sigma", "K"],
            Command::Verify => &[],
        };
        for f in self.set_flags() {
            let ext_flag = EXT.contains(&f);
            if (ext_flag && cmd == Command::Verify) || (!ext_flag && !allowed.contains(&f)) {
                return Err(invalid(format!("--{f} does not apply to {cmd:?}").to_lowercase()));
            }
        }
        if cmd != Command::Verify {
            self.extension()?;
        }
        match cmd {
            Command::Spectrum if self.n == Some(0) => return Err(invalid("--n must be at least 1")),
            Command::Trace => {
                if self.lambda.is_none() {
                    return Err(invalid("trace needs --lambda"));
                }
            }
            Command::Zeta => {
                grid("s", self.s, self.s_from, self.s_to, self.s_steps)?;
            }
            Command::Heat => {
                let ts = grid("t", self.t, self.t_from, self.t_to, self.t_steps)?;
                if ts.iter().any(|&t| !(t > 0.0)) {
                    return Err(invalid("t must be positive"));
                }
            }
            _ => {}
        }
        if let Some(s) = self.sigma {
            if s != 1 && s != -1 {
                return Err(invalid("--sigma must be 1 or -1"));
            }
        }
        if self.n_explicit == Some(0) {
            return Err(invalid("--n-explicit must be at least 1"));
        }
        Ok(cmd)
    }

    pub fn extension(&self) -> Result<ExtensionParams> {
        let ab = self.alpha.is_some() || self.beta.is_some();
        let chosen = [ab, self.rho.is_some(), self.theta.is_some()].iter().filter(|&&b| b).count();
        if chosen != 1 {
            return Err(invalid("give exactly one of (--alpha, --beta), --rho, --theta"));
        }
        if let Some(theta) = self.theta {
            if self.g.is_some_and(|g| g != 0.5) {
                return Err(invalid("--theta labels extensions at g = 0.5 only"));
            }
            return ExtensionParams::from_theta(theta);
        }
        let g = self.g.ok_or_else(|| invalid("missing --g"))?;
        if let Some(rho) = self.rho {
            return ExtensionParams::from_rho(g, rho);
        }
        match (self.alpha, self.beta) {
            (Some(a), Some(b)) => ExtensionParams::new(g, a, b),
            _ => Err(invalid("--alpha and --beta go together")),
        }
    }

    pub fn s_grid(&self) -> Result<Vec<f64>> {
        grid("s", self.s, self.s_from, self.s_to, self.s_steps)
    }

    pub fn t_grid(&self) -> Result<Vec<f64>> {
        grid("t", self.t, self.t_from, self.t_to, self.t_steps)
    }
}

/// A single value, or `steps` evenly spaced points from `from` to `to` inclusive.
fn grid(name: &str, single: Option<f64>, from: Option<f64>, to: Option<f64>, steps: Option<usize>) -> Result<Vec<f64>> {
    match (single, from, to, steps) {
        (Some(x), None, None, None) => finite(name, x).map(|x| vec![x]),
        (None, Some(a), Some(b), Some(n)) => {
            finite(name, a)?;
            finite(name, b)?;
            match n {
                0 => Err(invalid(format!("--{name}-steps must be at least 1"))),
                1 if a != b => Err(invalid(format!("--{name}-steps 1 needs --{name}-from equal to --{name}-to"))),
                1 => Ok(vec![a]),
                _ => Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
            }
        }
        _ => Err(invalid(format!("give --{name}, or all of --{name}-from, --{name}-to, --{name}-steps"))),
    }
}

fn finite(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(format!("--{name} must be finite")))
    }
}
