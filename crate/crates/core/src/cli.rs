//! Command-line front end. `picod --help` lists the commands.
//!
//! Exit codes: 0 success, 2 invalid input, 3 budget exceeded, 4 a scheme
//! failed verification or a sweep found mismatches.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bounds::report::{bound_report, BoundOptions, BoundReport};
use crate::budget::Budget;
use crate::characterize::{crosscheck_small, enumerate_up_to, sandwich_sweep, sigma_sweep};
use crate::error::PicodError;
use crate::exact::{exact_linear_beta, ExactResult};
use crate::gflin::PrimeField;
use crate::instance::{
    builtin, complete_sigma, partition_class_instance, random_instance, MessageSet, PicodInstance,
};
use crate::schemes::{greedy_scheme, incremental_satisfaction, validate_scheme, LinearScheme};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_FAILED_CHECK: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "picod",
    version,
    about = "Bounds, schemes and exact solves for pliable index coding"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Field sizes to use, comma separated (2, 3 or 5).
    #[arg(long, global = true, value_delimiter = ',', default_value = "2")]
    pub q: Vec<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Largest m for lattice and F_q^m walks.
    #[arg(long, global = true)]
    pub budget_m: Option<usize>,
    /// Largest number of decoding choice functions.
    #[arg(long, global = true)]
    pub budget_demands: Option<u128>,
    /// Largest number of subspaces per dimension in the exact search.
    #[arg(long, global = true)]
    pub budget_subspaces: Option<u128>,
    /// Largest client count for the exact nesting number.
    #[arg(long, global = true)]
    pub budget_eta_clients: Option<usize>,
    /// Largest m for the exact nesting number.
    #[arg(long, global = true)]
    pub budget_eta_m: Option<usize>,
    /// Also write the machine-readable result to this path.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
    /// Seed for random generation.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write generated instances or schemes here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance file.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Lower bounds, and optionally the exact linear length.
    Analyze(AnalyzeArgs),
    /// Check a scheme file against an instance.
    Verify {
        /// Instance file or builtin name.
        instance: String,
        scheme: PathBuf,
    },
    /// Build a greedy scheme over the first field in --q.
    Scheme {
        /// Instance file or builtin name.
        instance: String,
    },
    /// Cross-validation sweeps.
    Sweep {
        #[command(subcommand)]
        kind: SweepKind,
    },
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    /// Every subset whose size is in --sigma.
    CompleteSigma {
        #[arg(long)]
        m: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        sigma: Vec<usize>,
    },
    /// n distinct random proper subsets (uses --seed).
    Random {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
    },
    /// Request sets are the blocks of nested partitions, e.g.
    /// "1,2,3,4;1,2|3,4" (levels split by ';', blocks by '|').
    Partition {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        levels: String,
    },
    Example2,
    #[command(alias = "lemma1-demo")]
    PartitionDemo,
    Singletons3,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Instance file or builtin name.
    pub instance: String,
    /// Every bound plus a greedy upper bound.
    #[arg(long)]
    pub all: bool,
    /// Exact linear length over each field in --q, with certification.
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub eta_exact: bool,
    #[arg(long)]
    pub tau: bool,
    #[arg(long)]
    pub greedy: bool,
}

#[derive(Debug, Subcommand)]
pub enum SweepKind {
    /// Closed forms for one and two clients.
    #[command(alias = "lemma7")]
    TwoClients {
        #[arg(long, default_value_t = 4)]
        m_max: usize,
    },
    /// Closed forms for three clients.
    #[command(alias = "lemma8")]
    ThreeClients {
        #[arg(long, default_value_t = 3)]
        m_max: usize,
    },
    /// eta <= tau1 <= tau2 <= exact linear length, exhaustively at --m and on
    /// --random seeded instances with --random-m messages.
    Sandwich {
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = 3)]
        n_max: usize,
        #[arg(long, default_value_t = 0)]
        random: u64,
        #[arg(long, default_value_t = 4)]
        random_m: usize,
        #[arg(long, default_value_t = 6)]
        random_n_max: usize,
    },
    /// Size-level collections of complete-sigma instances.
    Sigma {
        #[arg(long, default_value_t = 4)]
        m_max: usize,
    },
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Budget(String),
    Check(String),
}

impl From<PicodError> for Failure {
    fn from(e: PicodError) -> Self {
        if e.is_budget() {
            Failure::Budget(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => EXIT_INVALID,
            Failure::Budget(_) => EXIT_BUDGET,
            Failure::Check(_) => EXIT_FAILED_CHECK,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(s) | Failure::Budget(s) | Failure::Check(s) => s,
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let _ = if code == EXIT_OK {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return code;
        }
    };
    if let Some(j) = cli.global.jobs {
        // a pool may already exist when run twice in one process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global();
    }
    match execute(&cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

fn budget(g: &GlobalOpts) -> CliResult<Budget> {
    let d = Budget::default();
    let b = Budget {
        max_m: g.budget_m.unwrap_or(d.max_m),
        max_demand_functions: g.budget_demands.unwrap_or(d.max_demand_functions),
        max_subspaces: g.budget_subspaces.unwrap_or(d.max_subspaces),
        max_eta_clients: g.budget_eta_clients.unwrap_or(d.max_eta_clients),
        max_eta_m: g.budget_eta_m.unwrap_or(d.max_eta_m),
    };
    let positive = b.max_m > 0
        && b.max_demand_functions > 0
        && b.max_subspaces > 0
        && b.max_eta_clients > 0
        && b.max_eta_m > 0;
    if !positive {
        return Err(Failure::Input("budgets must be positive".into()));
    }
    Ok(b)
}

fn fields(g: &GlobalOpts) -> CliResult<Vec<PrimeField>> {
    let mut qs = g.q.clone();
    qs.sort_unstable();
    qs.dedup();
    Ok(qs
        .into_iter()
        .map(PrimeField::new)
        .collect::<crate::Result<Vec<_>>>()?)
}

fn load_instance(spec: &str, err: &mut dyn Write) -> CliResult<PicodInstance> {
    let path = Path::new(spec);
    if !path.exists() {
        if let Some(inst) = builtin::by_name(spec) {
            return Ok(inst);
        }
    }
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::Input(format!("cannot read instance {spec}: {e}")))?;
    let loaded = PicodInstance::load(&bytes)?;
    for w in &loaded.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    Ok(loaded.instance)
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text)
        .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn emit_json<T: Serialize>(g: &GlobalOpts, value: &T) -> CliResult<()> {
    if let Some(path) = &g.json {
        let text = serde_json::to_string_pretty(value).expect("report serialization");
        write_file(path, &(text + "\n"))?;
    }
    Ok(())
}

/// Writes `text` to `--out` or, without it, to `out`.
fn emit_artifact(g: &GlobalOpts, text: &str, out: &mut dyn Write) -> CliResult<()> {
    match &g.out {
        Some(path) => write_file(path, &format!("{text}\n")),
        None => {
            let _ = writeln!(out, "{text}");
            Ok(())
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let g = &cli.global;
    let budget = budget(g)?;
    let fields = fields(g)?;
    match &cli.command {
        Command::Gen { kind } => {
            let inst = generate(kind, g.seed)?;
            emit_artifact(g, &inst.to_json(), out)?;
            emit_json(
                g,
                &serde_json::from_str::<serde_json::Value>(&inst.to_json()).unwrap(),
            )
        }
        Command::Analyze(args) => analyze(g, args, &budget, &fields, out, err),
        Command::Verify { instance, scheme } => {
            let inst = load_instance(instance, err)?;
            let bytes = std::fs::read(scheme).map_err(|e| {
                Failure::Input(format!("cannot read scheme {}: {e}", scheme.display()))
            })?;
            let scheme = LinearScheme::load(&bytes)?;
            verify(g, &inst, &scheme, out)
        }
        Command::Scheme { instance } => {
            let inst = load_instance(instance, err)?;
            let scheme = greedy_scheme(&inst, fields[0], &budget)?;
            let _ = writeln!(
                err,
                "greedy scheme over F_{}: {} transmissions",
                fields[0].q(),
                scheme.len()
            );
            emit_artifact(g, &scheme.to_json(), out)?;
            emit_json(g, &scheme)
        }
        Command::Sweep { kind } => sweep(g, kind, &budget, &fields, out),
    }
}

fn parse_levels(text: &str) -> CliResult<Vec<Vec<MessageSet>>> {
    text.split(';')
        .map(|level| {
            level
                .split('|')
                .map(|block| {
                    let labels = block
                        .split(',')
                        .map(|x| {
                            x.trim()
                                .parse::<usize>()
                                .ok()
                                .filter(|&v| v >= 1)
                                .ok_or_else(|| {
                                    Failure::Input(format!("bad message label {x:?} in --levels"))
                                })
                        })
                        .collect::<CliResult<Vec<usize>>>()?;
                    if labels.iter().any(|&l| l > crate::instance::MAX_MESSAGES) {
                        return Err(Failure::Input("message label too large".into()));
                    }
                    Ok(MessageSet::from_labels(&labels))
                })
                .collect()
        })
        .collect()
}

fn generate(kind: &GenKind, seed: u64) -> CliResult<PicodInstance> {
    Ok(match kind {
        GenKind::CompleteSigma { m, sigma } => complete_sigma(*m, sigma)?,
        GenKind::Random { m, n } => random_instance(*m, *n, seed)?,
        GenKind::Partition { m, levels } => partition_class_instance(*m, &parse_levels(levels)?)?,
        GenKind::Example2 => builtin::example2(),
        GenKind::PartitionDemo => builtin::partition_demo(),
        GenKind::Singletons3 => builtin::singletons_3(),
    })
}

/// Left-aligned columns sized to their widest cell.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = String::new();
        for (k, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if k > 0 {
                s.push_str("  ");
            }
            let pad = w - cell.chars().count();
            s.push_str(cell);
            s.extend(std::iter::repeat_n(' ', pad));
        }
        s.trim_end().to_string() + "\n"
    };
    let total = widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1);
    let mut s = line(header.to_vec());
    s += &"-".repeat(total);
    s.push('\n');
    for row in rows {
        s += &line(row.iter().map(String::as_str).collect());
    }
    s
}

fn opt(v: Option<usize>) -> String {
    v.map_or("-".into(), |v| v.to_string())
}

#[derive(Serialize)]
struct AnalyzeOutput<'a> {
    instance: serde_json::Value,
    bounds: &'a BoundReport,
    exact: Vec<ExactResult>,
    /// Smallest exact linear length over the fields tested.
    beta_lin_min: Option<usize>,
    certified: Option<bool>,
    /// `[lower, upper]` on the optimal length when not certified.
    bracket: Option<(usize, usize)>,
}

fn analyze(
    g: &GlobalOpts,
    args: &AnalyzeArgs,
    budget: &Budget,
    fields: &[PrimeField],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult<()> {
    let inst = load_instance(&args.instance, err)?;
    let opts = BoundOptions {
        eta_exact: args.all || args.eta_exact,
        tau: args.all || args.tau,
        structural: true,
        greedy: args.all || args.greedy,
    };
    let report = bound_report(&inst, opts, budget)?;
    let mut exact = Vec::new();
    if args.exact {
        for &f in fields {
            let mut r = exact_linear_beta(&inst, f, None, budget)?.expect("identity has length m");
            r.best_lower = Some(report.best_lower);
            r.certified = r.beta_lin == report.best_lower;
            r.lower_used = r.certified.then_some(report.best_lower_source);
            exact.push(r);
        }
    }
    let beta_min = exact.iter().map(|r| r.beta_lin).min();
    let certified = beta_min.map(|b| b == report.best_lower);
    let bracket = beta_min
        .filter(|&b| b != report.best_lower)
        .map(|b| (report.best_lower, b));

    let mut rows: Vec<Vec<String>> = vec![
        vec!["m".into(), inst.m().to_string()],
        vec!["n".into(), inst.n().to_string()],
        vec!["delta".into(), report.delta.to_string()],
        vec!["eta_lb".into(), report.eta_lb.to_string()],
        vec!["eta".into(), opt(report.eta_exact)],
        vec!["tau1".into(), opt(report.tau1)],
        vec!["tau2".into(), opt(report.tau2)],
        vec!["absent_chain".into(), opt(report.absent_chain_bound)],
        vec!["sigma".into(), opt(report.sigma_bound)],
        vec!["absent_union".into(), opt(report.absent_union_bound)],
        vec![
            "nested_absent_pair".into(),
            opt(report.nested_absent_pair_bound),
        ],
        vec![
            "best_lower".into(),
            format!("{} ({})", report.best_lower, report.best_lower_source),
        ],
        vec!["greedy_upper".into(), opt(report.greedy_upper)],
    ];
    for r in &exact {
        rows.push(vec![format!("beta_lin_q{}", r.q), r.beta_lin.to_string()]);
    }
    if let Some(b) = beta_min {
        let qs: Vec<String> = fields.iter().map(|f| f.q().to_string()).collect();
        rows.push(vec![
            format!("linear, fields tested {}", qs.join(",")),
            b.to_string(),
        ]);
        let status = match bracket {
            None => format!("certified (beta = {b})"),
            Some((lo, hi)) => format!("not certified (beta in [{lo}, {hi}])"),
        };
        rows.push(vec!["status".into(), status]);
    }
    let _ = write!(out, "{}", table(&["quantity", "value"], &rows));
    emit_json(
        g,
        &AnalyzeOutput {
            instance: serde_json::from_str(&inst.to_json()).expect("instance json"),
            bounds: &report,
            exact,
            beta_lin_min: beta_min,
            certified,
            bracket,
        },
    )
}

#[derive(Serialize)]
struct VerifyOutput {
    satisfied: usize,
    clients: usize,
    /// Per client: 1-based decoded message, or null.
    witnesses: Vec<Option<usize>>,
    /// Per transmission: 1-based clients first satisfied by it.
    newly_satisfied: Vec<Vec<usize>>,
}

fn verify(
    g: &GlobalOpts,
    inst: &PicodInstance,
    scheme: &LinearScheme,
    out: &mut dyn Write,
) -> CliResult<()> {
    let report = validate_scheme(inst, scheme)?;
    let steps = incremental_satisfaction(inst, scheme)?;
    let mut first_at = vec![None; inst.n()];
    for (k, fresh) in steps.iter().enumerate() {
        for &c in fresh {
            first_at[c] = Some(k + 1);
        }
    }
    let rows: Vec<Vec<String>> = inst
        .clients()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let w = report.witnesses[i];
            vec![
                (i + 1).to_string(),
                s.to_string(),
                if w.is_some() { "yes" } else { "no" }.into(),
                opt(w.map(|j| j + 1)),
                opt(first_at[i]),
            ]
        })
        .collect();
    let mut text = table(
        &[
            "client",
            "side_info",
            "satisfied",
            "decodes",
            "transmission",
        ],
        &rows,
    );
    for (k, fresh) in steps.iter().enumerate() {
        let labels: Vec<String> = fresh.iter().map(|c| (c + 1).to_string()).collect();
        let _ = writeln!(text, "transmission {}: {{{}}}", k + 1, labels.join(","));
    }
    let _ = writeln!(text, "{}/{} satisfied", report.satisfied_count(), inst.n());
    let _ = write!(out, "{text}");
    emit_json(
        g,
        &VerifyOutput {
            satisfied: report.satisfied_count(),
            clients: inst.n(),
            witnesses: report.witnesses.iter().map(|w| w.map(|j| j + 1)).collect(),
            newly_satisfied: steps
                .iter()
                .map(|f| f.iter().map(|c| c + 1).collect())
                .collect(),
        },
    )?;
    if report.all_satisfied() {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "scheme leaves {} of {} clients unsatisfied",
            inst.n() - report.satisfied_count(),
            inst.n()
        )))
    }
}

fn sweep(
    g: &GlobalOpts,
    kind: &SweepKind,
    budget: &Budget,
    fields: &[PrimeField],
    out: &mut dyn Write,
) -> CliResult<()> {
    let (name, checked, bad) = match kind {
        SweepKind::TwoClients { m_max } | SweepKind::ThreeClients { m_max } => {
            let ns: &[usize] = if matches!(kind, SweepKind::TwoClients { .. }) {
                &[1, 2]
            } else {
                &[3]
            };
            let r = crosscheck_small(*m_max, ns, fields, budget)?;
            let mut counts = std::collections::BTreeMap::new();
            for e in &r.entries {
                *counts.entry(e.case_label).or_insert(0usize) += 1;
            }
            let rows: Vec<Vec<String>> = counts
                .iter()
                .map(|(label, c)| {
                    let v = label.values();
                    let bad = r
                        .entries
                        .iter()
                        .filter(|e| e.case_label == *label && !e.matches)
                        .count();
                    vec![
                        label.to_string(),
                        c.to_string(),
                        format!("({},{},{},{})", v.beta, v.tau2, v.tau1, v.eta),
                        bad.to_string(),
                    ]
                })
                .collect();
            let _ = write!(
                out,
                "{}",
                table(
                    &["case", "instances", "(beta,tau2,tau1,eta)", "mismatches"],
                    &rows
                )
            );
            emit_json(g, &r.entries)?;
            ("mismatches", r.instances, r.mismatches)
        }
        SweepKind::Sandwich {
            m,
            n_max,
            random,
            random_m,
            random_n_max,
        } => {
            let mut insts = enumerate_up_to(*m, *n_max)?;
            for k in 0..*random {
                let seed = g.seed.wrapping_add(k);
                let n = 1 + (seed % *random_n_max.max(&1) as u64) as usize;
                insts.push(random_instance(*random_m, n, seed)?);
            }
            let mut reports = Vec::new();
            for &f in fields {
                reports.push(sandwich_sweep(&insts, f, budget)?);
            }
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    vec![
                        r.q.to_string(),
                        r.instances.to_string(),
                        r.violations.to_string(),
                    ]
                })
                .collect();
            let _ = write!(out, "{}", table(&["q", "instances", "violations"], &rows));
            emit_json(g, &reports)?;
            (
                "violations",
                insts.len(),
                reports.iter().map(|r| r.violations).sum(),
            )
        }
        SweepKind::Sigma { m_max } => {
            let r = sigma_sweep(*m_max, budget)?;
            let rows: Vec<Vec<String>> = r
                .entries
                .iter()
                .map(|e| {
                    vec![
                        e.m.to_string(),
                        format!("{:?}", e.sigma),
                        e.clients.to_string(),
                        e.eta.to_string(),
                        if e.ok { "ok" } else { "VIOLATION" }.into(),
                    ]
                })
                .collect();
            let _ = write!(
                out,
                "{}",
                table(&["m", "sigma", "clients", "eta", "check"], &rows)
            );
            emit_json(g, &r)?;
            ("violations", r.instances, r.violations)
        }
    };
    let _ = writeln!(out, "{checked} instances, {bad} {name}");
    if bad == 0 {
        Ok(())
    } else {
        Err(Failure::Check(format!("{bad} {name}")))
    }
}
