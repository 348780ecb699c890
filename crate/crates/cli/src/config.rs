//! Experiment configuration: a JSON file merged under command-line flags.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use fklab::exact_num::parse_rational;
use fklab::{FiniteFKModel, FkError, Rational, Result};
use serde::Deserialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    EnumerateForests,
    Hilbert,
    CountJungles,
    Expand,
    PathExpand,
    Simulate,
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    /// E[(gamma^N_n)^{(x)q}(F)]
    Q,
    /// E[(eta^N_{n+1})^{(.)q}(F)]
    P,
    /// E[(eta^N_{n+1})^{(x)q}(F)]
    PTilde,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    Gamma,
    Lambda,
    GroundState,
    UStat,
}

/// Fields shared by the config file and the flags. Flags win.
#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Only read from the config file; the positional argument wins.
    #[arg(skip)]
    pub command: Option<Command>,
    /// Model JSON file, or a bundled fixture name (REF2, REF2b)
    #[arg(long)]
    pub model: Option<String>,
    /// Final time index
    #[arg(long)]
    pub n: Option<usize>,
    /// Block size
    #[arg(long)]
    pub q: Option<usize>,
    /// Path block sizes q_0,...,q_n
    #[arg(long, value_delimiter = ',')]
    pub qseq: Option<Vec<usize>>,
    /// Particle numbers
    #[arg(long = "particles", short = 'N', value_delimiter = ',')]
    pub particles: Option<Vec<usize>>,
    /// Inclusive order range lo:hi
    #[arg(long)]
    pub orders: Option<String>,
    /// Coalescence cap per level
    #[arg(long, value_delimiter = ',')]
    pub max_coal: Option<Vec<usize>>,
    /// Test function values as p/q rationals; repeat once per time for path-expand
    #[arg(long = "f", allow_hyphen_values = true)]
    pub f: Option<Vec<String>>,
    /// Center each test function under the exact flow
    #[arg(long)]
    pub centered: Option<bool>,
    #[arg(long, value_enum)]
    pub target: Option<Target>,
    #[arg(long, value_enum)]
    pub quantity: Option<Quantity>,
    /// Forest codes, e.g. "[()()]"
    #[arg(long)]
    pub forest: Option<Vec<String>>,
    /// Per-variable truncation degree
    #[arg(long)]
    pub degree: Option<usize>,
    /// Cap on total x degree
    #[arg(long)]
    pub total_cap: Option<usize>,
    /// Series in x and y (coalescence) rather than x alone
    #[arg(long)]
    pub coalescent: Option<bool>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl Params {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| FkError::Parse(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| FkError::Parse(format!("{}: {e}", path.display())))
    }
}

macro_rules! overlay {
    ($flags:expr, $file:expr, $($field:ident),*) => {
        $( if $flags.$field.is_none() { $flags.$field = $file.$field.take(); } )*
    };
}

impl Params {
    /// Fill every field not given on the command line from the config file.
    pub fn merge(mut self, mut file: Params) -> Params {
        overlay!(self, file, command, model, n, q, qseq, particles, orders, max_coal, f, centered, target, quantity, forest, degree, total_cap, coalescent, runs, seed, suite, format, output);
        self
    }

    pub fn need<T: Clone>(v: &Option<T>, name: &str) -> Result<T> {
        v.clone().ok_or_else(|| FkError::Parse(format!("missing parameter --{name}")))
    }

    pub fn load_model(&self) -> Result<FiniteFKModel> {
        let name = self.model.clone().unwrap_or_else(|| "REF2".into());
        if let Some(m) = fklab::fixtures::by_name(&name) {
            return Ok(m);
        }
        let text = std::fs::read_to_string(&name).map_err(|e| FkError::Parse(format!("model {name}: {e}")))?;
        FiniteFKModel::from_json_str(&text)
    }

    pub fn order_range(&self, default: (usize, usize)) -> Result<(usize, usize)> {
        let Some(s) = &self.orders else { return Ok(default) };
        let bad = || FkError::Parse(format!("--orders expects lo:hi, got {s:?}"));
        let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
        let (lo, hi): (usize, usize) = (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?);
        if lo > hi {
            return Err(bad());
        }
        Ok((lo, hi))
    }

    /// The test vectors, one per listed --f.
    pub fn vectors(&self) -> Result<Option<Vec<Vec<Rational>>>> {
        let Some(fs) = &self.f else { return Ok(None) };
        fs.iter()
            .map(|s| s.split(',').map(parse_rational).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: Params = serde_json::from_str(r#"{"command":"expand","n":2,"q":3,"seed":9}"#).unwrap();
        let flags = Params { q: Some(2), ..Default::default() };
        let merged = flags.merge(file);
        assert_eq!((merged.n, merged.q, merged.seed), (Some(2), Some(2), Some(9)));
        assert_eq!(merged.command, Some(Command::Expand));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<Params>(r#"{"nn":1}"#).is_err());
    }

    #[test]
    fn order_ranges() {
        let p = Params { orders: Some("1:3".into()), ..Default::default() };
        assert_eq!(p.order_range((0, 0)).unwrap(), (1, 3));
        let p = Params { orders: Some("3:1".into()), ..Default::default() };
        assert!(p.order_range((0, 0)).is_err());
    }
}
