//! The `locktree` command line. Every command is a deterministic batch job;
//! results go to stdout or files, progress and errors to stderr.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or parameter
//! error, 3 I/O or parse error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use locktree_core::construct::{
    build_chain_of_trees, build_locked_config, build_open_config, check_constraints, choose_params, ConstructError,
    Epsilon,
};
use locktree_core::document::{Document, DocumentError, Report};
use locktree_core::geom::Tolerance;
use locktree_core::model::{is_simple, Configuration, LinkTree, ModelError, PetalLayout, Simplicity};
use locktree_core::motion::{cspace_components, probe, unlock_check, MotionError, ProbeKind, ProbeStrategy};
use locktree_core::petal::{restricted_flags, PetalParams};
use locktree_core::render::{render_svg, RenderStyle};

/// Largest `k` accepted by `chain`; the document holds `2^k` placements.
pub const MAX_CHAIN_K: usize = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Verification(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<DocumentError> for CliError {
    fn from(e: DocumentError) -> Self {
        match e {
            DocumentError::MissingConfiguration(_) => CliError::Usage(e.to_string()),
            DocumentError::Model(_) => CliError::Verification(e.to_string()),
            _ => CliError::Io(e.to_string()),
        }
    }
}

fn io(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "locktree",
    version,
    about = "Locked planar trees: construct, verify, probe and draw"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    RandomWalk,
    Squeeze,
    Anneal,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Choose parameters and write a document with the locked and open trees.
    Construct {
        #[arg(long)]
        n: usize,
        /// Defaults to 0.01 for n = 5, 6 and 0.2 otherwise.
        #[arg(long)]
        epsilon_deg: Option<f64>,
        /// Use these lengths instead of choosing them from epsilon.
        #[arg(long, requires = "l2")]
        l1: Option<f64>,
        #[arg(long, requires = "l1")]
        l2: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check constraints and simplicity of every stored configuration.
    Verify { input: PathBuf },
    /// Search for a motion of the "locked" configuration that leaves (α, β).
    Probe {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "squeeze")]
        strategy: Strategy,
        #[arg(long, default_value_t = 0)]
        petal: usize,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest proposal scale per round.
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Draw a stored configuration as SVG.
    Render {
        input: PathBuf,
        #[arg(long, default_value = "locked")]
        config: String,
        #[arg(long)]
        out: PathBuf,
        /// Pixels per unit length.
        #[arg(long, default_value_t = 400.0)]
        scale: f64,
        #[arg(long, default_value_t = 1.5)]
        link_width: f64,
        #[arg(long, default_value_t = 2.0)]
        joint_radius: f64,
        #[arg(long)]
        labels: bool,
        /// Petal indices around the root to highlight.
        #[arg(long, value_delimiter = ',')]
        highlight: Vec<usize>,
    },
    /// Write the 2^k labeled configurations of a chain of k locked trees.
    Chain {
        #[arg(long)]
        k: usize,
        /// Length of each connector link.
        #[arg(long)]
        connector: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Census of the single-petal configuration space near the locked petal.
    Cspace {
        #[arg(long, default_value_t = 120)]
        grid: usize,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 0.9511)]
        l1: f64,
        #[arg(long, default_value_t = 0.299)]
        l2: f64,
        /// Instead, test whether a petal with this fixed wedge angle unfolds.
        #[arg(long)]
        unlock_deg: Option<f64>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn deg(x: f64) -> String {
    format!("{:.6}°", x.to_degrees())
}

fn construct_error(e: ConstructError) -> CliError {
    match e {
        ConstructError::Infeasible(r) => {
            let failed = r.first_failure().map(|f| f.id.to_string()).unwrap_or_default();
            CliError::Usage(format!("constraint {failed} fails\n{r}"))
        }
        other => CliError::Usage(other.to_string()),
    }
}

fn motion_error(e: MotionError) -> CliError {
    CliError::Usage(e.to_string())
}

fn write_report(path: &Option<PathBuf>, report: &Report) -> Result<(), CliError> {
    if let Some(p) = path {
        let text = serde_json::to_string_pretty(report).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(p, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn params_for(n: usize, epsilon_deg: Option<f64>, lengths: Option<(f64, f64)>) -> Result<PetalParams, CliError> {
    if n <= 4 {
        return Err(CliError::Usage(format!("constraint n > 4 fails: n = {n}")));
    }
    match lengths {
        Some((l1, l2)) => {
            let report = check_constraints(n, l1, l2);
            if let Some(f) = report.first_failure() {
                return Err(CliError::Usage(format!("constraint {} fails\n{report}", f.id)));
            }
            PetalParams::new(n, l1, l2).map_err(|e| CliError::Usage(e.to_string()))
        }
        None => {
            let eps = match epsilon_deg {
                Some(d) => Epsilon::from_degrees(n, d),
                None => Epsilon::default_for(n),
            }
            .map_err(construct_error)?;
            choose_params(n, eps).map_err(construct_error)
        }
    }
}

fn cmd_construct(
    n: usize,
    epsilon_deg: Option<f64>,
    lengths: Option<(f64, f64)>,
    out_path: &PathBuf,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let params = params_for(n, epsilon_deg, lengths)?;
    let locked = build_locked_config(&params).map_err(construct_error)?;
    let open = build_open_config(&params).map_err(construct_error)?;
    let report = check_constraints(params.n(), params.l1(), params.l2());
    let mut doc = Document::new(locked.tree().as_ref().clone(), Some(params));
    doc.insert_configuration("locked", &locked);
    doc.insert_configuration("open", &open);
    doc.insert_report("constraints", Report::Constraints(report.clone()));
    doc.save(out_path)?;
    writeln!(out, "{report}").map_err(io)?;
    writeln!(
        out,
        "angles: α {} θ_m {} θ̄ {} β {}",
        deg(params.alpha()),
        params.theta_m().map(deg).unwrap_or_else(|_| "undefined".into()),
        deg(params.theta_bar()),
        deg(params.beta())
    )
    .map_err(io)?;
    writeln!(
        out,
        "wrote {} ({} links)",
        out_path.display(),
        locked.tree().link_count()
    )
    .map_err(io)?;
    Ok(())
}

fn joint_pair(tree: &LinkTree, edge: usize) -> String {
    let e = &tree.edges()[edge];
    format!("{}-{}", tree.name(e.from), tree.name(e.to))
}

/// Simplicity verdict for one stored configuration, as a printable line.
fn check_configuration(doc: &Document, name: &str, tol: &Tolerance) -> Result<Option<Configuration>, String> {
    let tree = &doc.tree;
    let c = match doc.configuration(name, tol) {
        Ok(c) => c,
        Err(DocumentError::Model(ModelError::LengthViolations(v))) => {
            let list: Vec<String> = v
                .iter()
                .map(|l| {
                    format!(
                        "link {} has length {} instead of {}",
                        joint_pair(tree, l.edge),
                        l.actual,
                        l.expected
                    )
                })
                .collect();
            return Err(list.join("; "));
        }
        Err(e) => return Err(e.to_string()),
    };
    match is_simple(&c, tol) {
        Ok(Simplicity::Simple) => Ok(Some(c)),
        Ok(Simplicity::Violation(v)) => Err(format!(
            "links {} and {} cross ({:?})",
            joint_pair(tree, v.first),
            joint_pair(tree, v.second),
            v.relation
        )),
        Err(e) => Err(e.to_string()),
    }
}

fn cmd_verify(input: &PathBuf, out: &mut dyn Write) -> Result<(), CliError> {
    let doc = Document::load(input)?;
    let tol = Tolerance::default();
    let mut ok = true;
    let mut layouts = Vec::new();
    if let Some(p) = &doc.params {
        let report = check_constraints(p.n(), p.l1(), p.l2());
        ok &= report.all_pass();
        writeln!(out, "{report}").map_err(io)?;
        layouts = PetalLayout::find_all(&doc.tree, p.n(), p.l1(), p.l2(), &tol);
    }
    if !layouts.is_empty() {
        let centers: Vec<&str> = layouts.iter().map(|l| doc.tree.name(l.center)).collect();
        writeln!(
            out,
            "restricted flags per petal, trees centered at {}",
            centers.join(", ")
        )
        .map_err(io)?;
    }
    for name in doc.configurations.keys() {
        match check_configuration(&doc, name, &tol) {
            Ok(Some(c)) => {
                let mut line = format!("{name}: simple");
                if let Some(p) = &doc.params {
                    for l in &layouts {
                        let flags =
                            restricted_flags(&c, l, p, &tol).map_err(|e| CliError::Verification(e.to_string()))?;
                        let s: String = flags.iter().map(|f| if *f { 'R' } else { '.' }).collect();
                        line.push_str(&format!(" [{s}]"));
                    }
                }
                writeln!(out, "{line}").map_err(io)?;
            }
            Ok(None) => unreachable!("check_configuration returns a configuration when simple"),
            Err(why) => {
                ok = false;
                writeln!(out, "{name}: FAIL {why}").map_err(io)?;
            }
        }
    }
    if ok {
        writeln!(out, "verified").map_err(io)?;
        Ok(())
    } else {
        Err(CliError::Verification("verification failed".into()))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_probe(
    input: &PathBuf,
    strategy: Strategy,
    petal: usize,
    budget: usize,
    seed: u64,
    step: Option<f64>,
    report_path: &Option<PathBuf>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let doc = Document::load(input)?;
    let params = doc
        .params
        .ok_or_else(|| CliError::Usage("document has no petal parameters".into()))?;
    let tol = Tolerance::default();
    let start = doc.configuration("locked", &tol)?;
    let kind = match strategy {
        Strategy::RandomWalk => ProbeKind::RandomWalk,
        Strategy::Squeeze => ProbeKind::Squeeze { petal },
        Strategy::Anneal => ProbeKind::anneal(petal),
    };
    let mut s = ProbeStrategy::new(kind, seed, budget);
    if let Some(step) = step {
        s.step = step;
    }
    let outcome = probe(&start, s, &params, &tol).map_err(motion_error)?;
    let record = outcome.record();
    write_report(report_path, &Report::Probe(record.clone()))?;
    writeln!(out, "best_min_angle {}", deg(record.best_min_angle)).map_err(io)?;
    writeln!(out, "α {} β {}", deg(params.alpha()), deg(params.beta())).map_err(io)?;
    writeln!(
        out,
        "frames {} accepted {} rejected {}",
        record.frames, record.accepted, record.rejected
    )
    .map_err(io)?;
    writeln!(out, "{}", record.summary).map_err(io)?;
    if record.violation {
        Err(CliError::Verification("probe left (α, β)".into()))
    } else {
        Ok(())
    }
}

fn cmd_render(
    input: &PathBuf,
    config: &str,
    style: RenderStyle,
    out_svg: &PathBuf,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let doc = Document::load(input)?;
    let pts = doc
        .configurations
        .get(config)
        .ok_or_else(|| CliError::Usage(format!("no configuration named {config:?}")))?;
    let svg = render_svg(&doc.tree, pts, &style).map_err(|e| CliError::Usage(e.to_string()))?;
    std::fs::write(out_svg, svg).map_err(|e| CliError::Io(format!("{}: {e}", out_svg.display())))?;
    writeln!(out, "wrote {} ({} links)", out_svg.display(), doc.tree.link_count()).map_err(io)?;
    Ok(())
}

fn cmd_chain(k: usize, connector: Option<f64>, out_path: &PathBuf, out: &mut dyn Write) -> Result<(), CliError> {
    if k == 0 || k > MAX_CHAIN_K {
        return Err(CliError::Usage(format!(
            "k must be between 1 and {MAX_CHAIN_K}; the document holds 2^k configurations"
        )));
    }
    let fam = build_chain_of_trees(k, connector).map_err(construct_error)?;
    let tol = Tolerance::default();
    let mut doc = Document::new(fam.tree().as_ref().clone(), Some(*fam.params()));
    let layouts = fam.layouts().map_err(construct_error)?;
    let mut ok = true;
    for label in 0..fam.label_count() {
        let c = fam.configuration(label).map_err(construct_error)?;
        let simple = is_simple(&c, &tol).is_ok_and(|s| s.is_simple());
        ok &= simple;
        let mut flags = String::new();
        for l in &layouts {
            let f = restricted_flags(&c, l, fam.params(), &tol).map_err(|e| CliError::Verification(e.to_string()))?;
            flags.push_str(&format!(
                " [{}]",
                f.iter().map(|x| if *x { 'R' } else { '.' }).collect::<String>()
            ));
        }
        let name = fam.label_name(label);
        writeln!(out, "{name}: {}{flags}", if simple { "simple" } else { "NOT SIMPLE" }).map_err(io)?;
        doc.insert_configuration(&name, &c);
    }
    doc.save(out_path)?;
    writeln!(
        out,
        "wrote {} (N = {} links, {} configurations)",
        out_path.display(),
        fam.tree().link_count(),
        fam.label_count()
    )
    .map_err(io)?;
    if ok {
        Ok(())
    } else {
        Err(CliError::Verification(
            "some labeled configuration is not simple".into(),
        ))
    }
}

fn cmd_cspace(
    grid: usize,
    params: PetalParams,
    unlock_deg: Option<f64>,
    report_path: &Option<PathBuf>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let tol = Tolerance::default();
    if let Some(d) = unlock_deg {
        let r = unlock_check(&params, d.to_radians(), grid, &tol).map_err(motion_error)?;
        write_report(report_path, &Report::Unlock(r.clone()))?;
        writeln!(out, "wedge {d}°, grid {grid}: {} components", r.component_count).map_err(io)?;
        writeln!(
            out,
            "straightened and folded placements {}",
            if r.connected { "connected" } else { "not connected" }
        )
        .map_err(io)?;
        return Ok(());
    }
    let census = cspace_components(&params, grid, &tol).map_err(motion_error)?;
    write_report(report_path, &Report::Census(census.clone()))?;
    writeln!(
        out,
        "grid {grid}: {} simple of {} nodes, {} components, {} with restricted placements",
        census.simple_nodes, census.nodes, census.component_count, census.restricted_components
    )
    .map_err(io)?;
    if let Some(a) = &census.anchor_component {
        writeln!(
            out,
            "locked component: {} nodes, θ from {} to {}, truncated {:?}",
            a.size,
            deg(a.min_theta),
            deg(a.max_theta),
            a.truncation
        )
        .map_err(io)?;
        if let Ok(tm) = params.theta_m() {
            writeln!(out, "θ_m {} (min θ − θ_m = {})", deg(tm), deg(a.min_theta - tm)).map_err(io)?;
        }
    }
    Ok(())
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Construct {
            n,
            epsilon_deg,
            l1,
            l2,
            out: path,
        } => cmd_construct(n, epsilon_deg, l1.zip(l2), &path, out),
        Command::Verify { input } => cmd_verify(&input, out),
        Command::Probe {
            input,
            strategy,
            petal,
            budget,
            seed,
            step,
            report,
        } => cmd_probe(&input, strategy, petal, budget, seed, step, &report, out),
        Command::Render {
            input,
            config,
            out: svg,
            scale,
            link_width,
            joint_radius,
            labels,
            highlight,
        } => {
            let style = RenderStyle {
                scale,
                link_width,
                joint_radius,
                labels,
                highlight: highlight.into_iter().collect(),
                ..RenderStyle::default()
            };
            cmd_render(&input, &config, style, &svg, out)
        }
        Command::Chain {
            k,
            connector,
            out: path,
        } => cmd_chain(k, connector, &path, out),
        Command::Cspace {
            grid,
            n,
            l1,
            l2,
            unlock_deg,
            report,
        } => {
            let params = PetalParams::new(n, l1, l2).map_err(|e| CliError::Usage(e.to_string()))?;
            cmd_cspace(grid, params, unlock_deg, &report, out)
        }
    }
}
