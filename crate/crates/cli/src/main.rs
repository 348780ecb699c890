mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fklab::exact_num::{format_rational, pow_rat, rat, Rational};
use fklab::expansion::{laurent_table, q_exact};
use fklab::fk_model::dot;
use fklab::forest_core::{count_jungles, enumerate_forests, stabilizer_order, Forest};
use fklab::hilbert::{coalescent_hilbert_capped, forest_hilbert_capped};
use fklab::oracle::{dp_expected, DpTarget};
use fklab::particle_engine::{
    estimate_gamma, estimate_ground_state, estimate_lambda, format_f64, run_many, to_f64, u_statistic, Estimate, UKernel,
};
use fklab::path_expansion::{enumerate_colored_forests, p_derivatives, ColoredSum, PMode, QSeq};
use fklab::verify::{run_suite, Suite, VerifyOptions};
use fklab::{FiniteFKModel, FkError, TensorFunction};
use serde_json::json;

use config::{Command, Format, Params, Quantity, Target};

#[derive(Parser, Debug)]
#[command(name = "fklab", version, about = "Exact and Monte Carlo experiments on finite Feynman-Kac models")]
struct Cli {
    /// Command to run; may also come from the config file
    #[arg(value_enum)]
    command: Option<Command>,
    /// JSON config; command-line flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
}

#[derive(Debug)]
enum CliError {
    Fk(FkError),
    Io(std::io::Error),
    VerifyFailed,
}

impl From<FkError> for CliError {
    fn from(e: FkError) -> Self {
        CliError::Fk(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Rows with a fixed column set, emitted as CSV or as a JSON array of objects.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn write(&self, format: Format, out: &mut dyn Write) -> CliResult<()> {
        match format {
            Format::Csv => {
                let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
                w.write_record(&self.header)?;
                for r in &self.rows {
                    w.write_record(r)?;
                }
                w.flush()?;
            }
            Format::Json => {
                let items: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|r| serde_json::Value::Object(self.header.iter().cloned().zip(r.iter().map(|v| json!(v))).collect()))
                    .collect();
                serde_json::to_writer_pretty(&mut *out, &items).map_err(std::io::Error::from)?;
                writeln!(out)?;
            }
        }
        Ok(())
    }
}

fn open_output(p: &Params) -> CliResult<Box<dyn Write>> {
    Ok(match &p.output {
        Some(path) => Box::new(std::io::BufWriter::new(std::fs::File::create(path)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn emit(p: &Params, table: &Table) -> CliResult<()> {
    let mut out = open_output(p)?;
    table.write(p.format.unwrap_or_default(), &mut out)?;
    out.flush()?;
    Ok(())
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn centered(model: &FiniteFKModel, k: usize, f: Vec<Rational>) -> CliResult<Vec<Rational>> {
    let eta = model.flow_eta(k)?;
    let mean = dot(&eta[k], &f);
    Ok(f.into_iter().map(|v| v - &mean).collect())
}

/// The single test vector on E_k, checked against the level size.
fn level_vector(p: &Params, model: &FiniteFKModel, k: usize) -> CliResult<Vec<Rational>> {
    let fs = p.vectors()?.ok_or_else(|| FkError::Parse("missing parameter --f".into()))?;
    if fs.len() != 1 {
        return Err(FkError::Parse(format!("expected one --f, got {}", fs.len())).into());
    }
    let f = fs.into_iter().next().unwrap_or_default();
    if f.len() != model.size(k) {
        return Err(FkError::Parse(format!("--f has {} entries but E_{k} has {} points", f.len(), model.size(k))).into());
    }
    if p.centered.unwrap_or(false) {
        centered(model, k, f)
    } else {
        Ok(f)
    }
}

fn rows_from_series(table: &mut Table, values: &[Rational], lo: usize, hi: usize) {
    for (k, v) in values.iter().enumerate().filter(|(k, _)| (lo..=hi).contains(k)) {
        table.push(vec!["derivative".into(), k.to_string(), format_rational(v)]);
    }
}

fn series_at(values: &[Rational], nn: usize) -> Rational {
    let inv = rat(1, nn as i64);
    values.iter().enumerate().map(|(k, v)| v * pow_rat(&inv, k as i64)).sum()
}

fn cmd_enumerate(p: &Params) -> CliResult<()> {
    let max_coal = p.max_coal.clone().map(fklab::MultiIndex);
    let (forests, levels) = match &p.qseq {
        Some(qs) => {
            let seq = QSeq::new(qs)?;
            (enumerate_colored_forests(&seq, max_coal.as_ref())?, seq.colored_profile().len())
        }
        None => {
            let n = Params::need(&p.n, "n")?;
            let q = Params::need(&p.q, "q")?;
            (enumerate_forests(n, q, max_coal.as_ref())?, n + 1)
        }
    };
    let mut t = Table::new(&["forest", "jungles", "stabilizer", "coalescence"]);
    for f in &forests {
        t.push(vec![f.to_string(), count_jungles(f)?.to_string(), stabilizer_order(f)?.to_string(), join(&f.coalescence(levels).0)]);
    }
    emit(p, &t)
}

fn cmd_count(p: &Params) -> CliResult<()> {
    let codes = Params::need(&p.forest, "forest")?;
    let mut t = Table::new(&["forest", "jungles", "stabilizer"]);
    for code in &codes {
        let f = Forest::parse(code)?;
        t.push(vec![f.to_string(), count_jungles(&f)?.to_string(), stabilizer_order(&f)?.to_string()]);
    }
    emit(p, &t)
}

fn cmd_hilbert(p: &Params) -> CliResult<()> {
    let n = Params::need(&p.n, "n")?;
    let d = Params::need(&p.degree, "degree")?;
    let s = if p.coalescent.unwrap_or(false) { coalescent_hilbert_capped(n, d, p.total_cap)? } else { forest_hilbert_capped(n, d, p.total_cap)? };
    let mut header: Vec<String> = (0..s.nx).map(|i| format!("x{i}")).collect();
    header.extend((0..s.ny).map(|i| format!("y{i}")));
    header.push("count".into());
    let mut t = Table { header, rows: Vec::new() };
    for (x, y, c) in s.terms() {
        let mut row: Vec<String> = x.iter().chain(y).map(|d| d.to_string()).collect();
        row.push(c.to_string());
        t.push(row);
    }
    emit(p, &t)
}

fn cmd_expand(p: &Params) -> CliResult<()> {
    let model = p.load_model()?;
    let n = Params::need(&p.n, "n")?;
    let q = Params::need(&p.q, "q")?;
    if q == 0 {
        return Err(FkError::Parse("--q must be positive".into()).into());
    }
    let target = p.target.unwrap_or(Target::Q);
    let mut t = Table::new(&["quantity", "index", "value"]);
    match target {
        Target::Q => {
            let f = level_vector(p, &model, n)?;
            let big_f = TensorFunction::product(n, &vec![f; q])?.marked_symmetric()?;
            let values = laurent_table(&model, n, q, &big_f)?;
            let (lo, hi) = p.order_range((0, values.len() - 1))?;
            rows_from_series(&mut t, &values, lo, hi);
            for &nn in p.particles.as_deref().unwrap_or(&[]) {
                t.push(vec!["exact".into(), nn.to_string(), format_rational(&q_exact(&model, nn, n, q, &big_f)?)]);
                t.push(vec!["series".into(), nn.to_string(), format_rational(&series_at(&values, nn))]);
            }
        }
        Target::P | Target::PTilde => {
            if n + 1 > model.horizon() {
                return Err(FkError::Parse(format!("target P needs n + 1 <= horizon {}", model.horizon())).into());
            }
            let f = level_vector(p, &model, n + 1)?;
            let big_f = TensorFunction::product(n + 1, &vec![f; q])?.marked_symmetric()?;
            let mode = if target == Target::P { PMode::Standard } else { PMode::Tilde };
            let (lo, hi) = p.order_range((0, 1))?;
            for k in lo..=hi {
                t.push(vec!["derivative".into(), k.to_string(), format_rational(&p_derivatives(&model, k, n, &big_f, mode)?)]);
            }
            for &nn in p.particles.as_deref().unwrap_or(&[]) {
                let v = match target {
                    Target::P => dp_expected(&model, nn, DpTarget::P { n: n + 1, f: &big_f })?,
                    _ => dp_expected(&model, nn, DpTarget::PTilde { n: n + 1, f: &big_f })?,
                };
                t.push(vec!["exact".into(), nn.to_string(), format_rational(&v)]);
            }
        }
    }
    emit(p, &t)
}

fn cmd_path_expand(p: &Params) -> CliResult<()> {
    let model = p.load_model()?;
    let qs = Params::need(&p.qseq, "qseq")?;
    let seq = QSeq::new(&qs)?;
    let fs = p.vectors()?.ok_or_else(|| FkError::Parse("missing parameter --f".into()))?;
    if fs.len() != qs.len() {
        return Err(FkError::Parse(format!("--f must be given once per time: expected {}, got {}", qs.len(), fs.len())).into());
    }
    let mut big_f: Option<TensorFunction> = None;
    for (k, (f, &qk)) in fs.into_iter().zip(&qs).enumerate() {
        if k > model.horizon() {
            return Err(FkError::Parse(format!("q sequence runs past horizon {}", model.horizon())).into());
        }
        if f.len() != model.size(k) {
            return Err(FkError::Parse(format!("--f for time {k} has {} entries but E_{k} has {} points", f.len(), model.size(k))).into());
        }
        if qk == 0 {
            continue;
        }
        let f = if p.centered.unwrap_or(false) { centered(&model, k, f)? } else { f };
        let block = TensorFunction::product(k, &vec![f; qk])?;
        big_f = Some(match big_f {
            Some(acc) => acc.tensor(&block)?,
            None => block,
        });
    }
    let big_f = big_f.ok_or_else(|| FkError::Parse("q sequence is all zero".into()))?.marked_symmetric()?;
    let sum = ColoredSum::new(&model, &seq, None)?;
    let values = sum.laurent_values(&big_f)?;
    let (lo, hi) = p.order_range((0, values.len() - 1))?;
    let mut t = Table::new(&["quantity", "index", "value"]);
    rows_from_series(&mut t, &values, lo, hi);
    for &nn in p.particles.as_deref().unwrap_or(&[]) {
        t.push(vec!["exact".into(), nn.to_string(), format_rational(&sum.qbar(nn, &big_f)?)]);
        t.push(vec!["series".into(), nn.to_string(), format_rational(&series_at(&values, nn))]);
    }
    emit(p, &t)
}

fn cmd_simulate(p: &Params) -> CliResult<()> {
    let model = p.load_model()?;
    let ns = Params::need(&p.particles, "particles")?;
    let [nn] = ns[..] else {
        return Err(FkError::Parse("simulate takes a single particle number".into()).into());
    };
    let n = Params::need(&p.n, "n")?;
    let runs = p.runs.unwrap_or(1000);
    let seed = p.seed.unwrap_or(0);
    let quantity = p.quantity.unwrap_or(Quantity::Gamma);
    let (name, est): (&str, Estimate) = match quantity {
        Quantity::Gamma => {
            let f = if p.f.is_some() { level_vector(p, &model, n)? } else { vec![Rational::from_integer(1.into()); model.size(n)] };
            ("gamma", estimate_gamma(&model, nn, n, &f, runs, seed)?)
        }
        Quantity::Lambda => ("lambda", estimate_lambda(&model, nn, n, runs, seed)?),
        Quantity::GroundState => {
            let f = level_vector(p, &model, n)?;
            ("ground_state", estimate_ground_state(&model, nn, n, runs, seed, &f)?)
        }
        Quantity::UStat => {
            let q = Params::need(&p.q, "q")?;
            let f = level_vector(p, &model, n)?;
            let kernel = UKernel::SymProduct(vec![to_f64(&f); q]);
            ("u_stat", run_many(&model, nn, n, runs, seed, |t| u_statistic(t, n, q, &kernel))?)
        }
    };
    let mut t = Table::new(&["run_id", "quantity", "value"]);
    for (i, v) in est.values.iter().enumerate() {
        t.push(vec![i.to_string(), name.into(), format_f64(*v)]);
    }
    match p.format.unwrap_or_default() {
        Format::Csv => emit(p, &t),
        Format::Json => {
            let mut out = open_output(p)?;
            let body = json!({
                "quantity": name,
                "particles": nn,
                "n": n,
                "runs": runs,
                "seed": seed,
                "mean": format_f64(est.mean),
                "stderr": format_f64(est.stderr),
                "values": est.values.iter().map(|v| format_f64(*v)).collect::<Vec<_>>(),
            });
            serde_json::to_writer_pretty(&mut out, &body).map_err(std::io::Error::from)?;
            writeln!(out)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn cmd_verify(p: &Params) -> CliResult<()> {
    let suite: Suite = p.suite.as_deref().unwrap_or("all").parse()?;
    let defaults = VerifyOptions::default();
    let opts = VerifyOptions { runs: p.runs.unwrap_or(defaults.runs), seed: p.seed.unwrap_or(defaults.seed) };
    let report = run_suite(suite, &opts);
    for c in &report.criteria {
        eprintln!("{}", c.summary_line());
    }
    let mut out = open_output(p)?;
    match p.format.unwrap_or_default() {
        Format::Csv => report.write_csv(&mut out)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &report).map_err(std::io::Error::from)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::VerifyFailed)
    }
}

fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("FKLAB_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| FkError::Parse(format!("FKLAB_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(FkError::Parse("FKLAB_THREADS must be positive".into()).into());
        }
        // a pool may already exist when embedded; the first one wins
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let params = match &cli.config {
        Some(path) => cli.params.merge(Params::load(path)?),
        None => cli.params,
    };
    let command = cli.command.or(params.command).ok_or_else(|| FkError::Parse("no command given".into()))?;
    match command {
        Command::EnumerateForests => cmd_enumerate(&params),
        Command::Hilbert => cmd_hilbert(&params),
        Command::CountJungles => cmd_count(&params),
        Command::Expand => cmd_expand(&params),
        Command::PathExpand => cmd_path_expand(&params),
        Command::Simulate => cmd_simulate(&params),
        Command::Verify => cmd_verify(&params),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::VerifyFailed) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(CliError::Fk(e @ FkError::Resource(_))) => {
            eprintln!("fklab: {e}");
            ExitCode::from(3)
        }
        Err(CliError::Fk(e)) => {
            eprintln!("fklab: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Io(e)) => {
            eprintln!("fklab: {e}");
            ExitCode::from(2)
        }
    }
}
