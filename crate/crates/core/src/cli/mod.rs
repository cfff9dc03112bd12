//! The `sepcoset` command line: configuration, dispatch and report output.

pub mod verify;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::boundary_pairs::f4_split;
use crate::cber::{phi_pair_tailcheck, tail_equivalent, EvPeriodicSeq};
use crate::error::{LabError, Result};
use crate::group_model::{
    builtin_free_cyclic, builtin_free_product, load_model_spec, GroupElement, GroupModel,
};
use crate::rays::{phi_prefix_element, phi_prefix_scheme_measured, pigeonhole_k, RayScheme};
use crate::relative_graph::{
    delta_estimate, estimate_c, read_ball_cache, sample_points, write_ball_cache, ConstantsReport,
    ExplorationBudget, Explorer, Fraction, NgonSpec, RegionKind,
};
use crate::separating_cosets::{sep_cosets_measured, triple_split, SepCosetRecord};
use crate::y_graph::YGraph;

use verify::{run_verify, Ctx, VerifyConfig, SCHEMA};

/// Environment variable naming the ball-cache directory.
pub const CACHE_ENV: &str = "SEPCOSET_CACHE_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "sepcoset",
    version,
    about = "Separating cosets, relative Cayley graphs and lex-min rays at desk scale"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Group model: `free_cyclic`, `free_product`, or a path to a model file.
    #[arg(long, global = true, default_value = "free_cyclic")]
    pub model: String,
    /// Exploration budget `R,L` or `R,L,cap`: X-radius, H-letter X-length
    /// budget and geodesic enumeration cap.
    #[arg(long, global = true, value_parser = parse_budget)]
    pub budget: Option<(usize, usize, usize)>,
    /// Region shape for pair queries.
    #[arg(long, global = true, value_enum)]
    pub region: Option<RegionArg>,
    /// Separation constant D (positive). Defaults to 3*ceil(C)+1 from a C estimate.
    #[arg(long = "D", global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub d: Option<u64>,
    /// Seed for every sampler.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Directory for ball-graph caches.
    #[arg(long, global = true, env = CACHE_ENV)]
    pub cache: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum RegionArg {
    Ball,
    Tube,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Relative distance and Y-distance between two elements.
    Dist { f: String, g: String },
    /// All geodesics between two elements, in label order.
    Geodesics { f: String, g: String },
    /// The ordered separating cosets S(f, g; D).
    Sepcosets {
        #[arg(default_value = "1")]
        f: String,
        #[arg(default_value = "1")]
        g: String,
    },
    /// Members of Y inside a ball.
    Yball {
        /// Ball radius.
        #[arg(long, default_value_t = 6)]
        radius: usize,
    },
    /// Run property suites (`all`, a suite name, or property names).
    Verify {
        /// `all`, suite names, or property names.
        #[arg(default_value = "all")]
        suites: Vec<String>,
        /// Ball radius for sampled elements.
        #[arg(long, default_value_t = 6)]
        radius: usize,
        /// Instances per sampled property.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Polygons for the C estimate.
        #[arg(long, default_value_t = 2000)]
        polygons: usize,
        /// Use this C (as `p/q`) instead of estimating it.
        #[arg(long = "C", value_parser = parse_fraction)]
        c_hat: Option<Fraction>,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate C, delta and the pigeonhole constant K.
    Estimate {
        /// Number of sampled geodesic polygons.
        #[arg(long, default_value_t = 2000)]
        polygons: usize,
        /// Ball radius for sampled vertices.
        #[arg(long, default_value_t = 3)]
        vertex_radius: usize,
        /// Points for the four-point delta estimate.
        #[arg(long, default_value_t = 24)]
        points: usize,
    },
    /// Lex-min label sequence toward an element or along a ray scheme.
    Phi {
        /// Target element.
        #[arg(long, conflicts_with = "scheme")]
        target: Option<String>,
        /// Ray scheme, e.g. `base=1 prefix=[] period=[h:ab^3, x:a]`.
        #[arg(long)]
        scheme: Option<String>,
        /// Ray depth for schemes.
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// Tail equivalence of eventually periodic sequences, or of lex-min
    /// labels of a scheme and its translate.
    Tailcheck {
        /// First sequence, e.g. `pre=[2,3];per=[0,1]` (`pre` may be omitted).
        #[arg(long, requires = "w1")]
        w0: Option<String>,
        /// Second sequence, same syntax as `--w0`.
        #[arg(long)]
        w1: Option<String>,
        /// Ray scheme for the first direction.
        #[arg(long, requires_all = ["s2", "g"], conflicts_with = "w0")]
        s1: Option<String>,
        /// Ray scheme for the translated direction.
        #[arg(long)]
        s2: Option<String>,
        /// Translating element.
        #[arg(long)]
        g: Option<String>,
        /// Ray depth for the compared windows.
        #[arg(long, default_value_t = 10)]
        depth: usize,
    },
    /// Three-way split of a window (schemes) or of S(f, g) (elements).
    F4 {
        /// Ray scheme for the first direction.
        #[arg(long, requires_all = ["eta", "zeta"])]
        xi: Option<String>,
        /// Ray scheme for the second direction.
        #[arg(long)]
        eta: Option<String>,
        /// Ray scheme for the splitting direction.
        #[arg(long)]
        zeta: Option<String>,
        /// Window depth for schemes.
        #[arg(long, default_value_t = 6)]
        n: usize,
        /// Elements `f,g,z` instead of schemes.
        #[arg(long, conflicts_with = "xi", value_delimiter = ',', num_args = 1)]
        elements: Option<Vec<String>>,
        /// Use this C (as `p/q`) instead of estimating it.
        #[arg(long = "C", value_parser = parse_fraction)]
        c_hat: Option<Fraction>,
    },
    /// Acylindricity scan in the Y-graph (an estimate).
    Probe {
        /// Ball radius of the Y-graph.
        #[arg(long, default_value_t = 6)]
        radius: usize,
        /// Allowed Y-distance between a point and its translate.
        #[arg(long, default_value_t = 2)]
        epsilon: u32,
        /// Smallest Y-distance between the two scanned points.
        #[arg(long, default_value_t = 3)]
        min_separation: u64,
        /// Radius of the scanned group elements.
        #[arg(long, default_value_t = 2)]
        g_radius: usize,
        /// Number of sampled point pairs.
        #[arg(long, default_value_t = 20)]
        pairs: usize,
    },
}

fn parse_budget(s: &str) -> std::result::Result<(usize, usize, usize), String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| format!("bad budget entry '{p}'")))
        .collect::<std::result::Result<_, _>>()?;
    match parts.as_slice() {
        [r, l] => Ok((*r, *l, 4096)),
        [r, l, cap] if *cap > 0 => Ok((*r, *l, *cap)),
        _ => Err("expected R,L or R,L,cap with cap > 0".into()),
    }
}

fn parse_fraction(s: &str) -> std::result::Result<Fraction, String> {
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let num = n.trim().parse::<u64>().map_err(|_| format!("bad numerator in '{s}'"))?;
    let den = d.trim().parse::<u64>().map_err(|_| format!("bad denominator in '{s}'"))?;
    if den == 0 {
        return Err("denominator must be positive".into());
    }
    Ok(Fraction::new(num, den))
}

/// A command's result in every supported format.
pub struct Output {
    pub json: Value,
    pub text: String,
    /// Header and rows, for commands with tabular output.
    pub table: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
    pub exit: i32,
}

impl Output {
    fn plain(json: Value, text: String) -> Output {
        Output {
            json,
            text,
            table: None,
            exit: 0,
        }
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json)
                    .map_err(|e| LabError::Input(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
            Format::Text => Ok(self.text.clone()),
            Format::Csv => {
                let (head, rows) = self
                    .table
                    .as_ref()
                    .ok_or_else(|| LabError::Input("this command has no CSV output".into()))?;
                let mut s = head.join(",");
                s.push('\n');
                for r in rows {
                    let cells: Vec<String> = r.iter().map(|c| csv_cell(c)).collect();
                    s.push_str(&cells.join(","));
                    s.push('\n');
                }
                Ok(s)
            }
        }
    }
}

fn csv_cell(c: &str) -> String {
    if c.contains([',', '"', '\n']) {
        format!("\"{}\"", c.replace('"', "\"\""))
    } else {
        c.to_string()
    }
}

/// Parses `args` and runs the command, printing to stdout; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli).and_then(|out| Ok((out.render(cli.global.format)?, out.exit))) {
        Ok((text, code)) => {
            print!("{text}");
            code
        }
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

/// Loads a builtin or file model; the label is the name given.
pub fn load_model(name: &str) -> Result<Arc<GroupModel>> {
    match name {
        "free_cyclic" => Ok(Arc::new(builtin_free_cyclic())),
        "free_product" => Ok(Arc::new(builtin_free_product())),
        path => {
            let p = Path::new(path);
            let text = std::fs::read_to_string(p)
                .map_err(|e| LabError::Load(format!("cannot read {path}: {e}")))?;
            Ok(Arc::new(load_model_spec(&text, p.parent())?))
        }
    }
}

fn cache_file(dir: &Path, model: &GroupModel, b: &ExplorationBudget) -> PathBuf {
    let name: String = model
        .describe()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    dir.join(format!("ball-{name}-R{}-L{}.txt", b.x_radius, b.h_budget))
}

/// A ball explorer, loading or writing the cache when a directory is set.
pub fn ball_explorer(model: Arc<GroupModel>, budget: ExplorationBudget, cache: Option<&Path>) -> Explorer {
    let Some(dir) = cache else {
        return Explorer::new(model, budget);
    };
    let path = cache_file(dir, &model, &budget);
    if let Ok(f) = File::open(&path) {
        match read_ball_cache(BufReader::new(f), &model, &budget) {
            Ok(graph) => return Explorer::with_ball(model, budget, graph),
            Err(e) => eprintln!("warning: ignoring cache {}: {e}", path.display()),
        }
    }
    let e = Explorer::new(model, budget);
    let graph = e.ball_graph();
    let written = std::fs::create_dir_all(dir)
        .map_err(|err| LabError::Load(err.to_string()))
        .and_then(|_| File::create(&path).map_err(|err| LabError::Load(err.to_string())))
        .and_then(|f| write_ball_cache(&mut BufWriter::new(f), e.model(), &budget, &graph));
    if let Err(err) = written {
        eprintln!("warning: cannot write cache {}: {err}", path.display());
    }
    e
}

struct Session {
    global: GlobalArgs,
    model: Arc<GroupModel>,
}

impl Session {
    fn budget(&self, default_region: RegionKind, r: usize, l: usize) -> ExplorationBudget {
        let (r, l, cap) = self.global.budget.unwrap_or((r, l, 4096));
        let region = match self.global.region {
            Some(RegionArg::Ball) => RegionKind::Ball,
            Some(RegionArg::Tube) => RegionKind::Tube,
            None => default_region,
        };
        let b = match region {
            RegionKind::Ball => ExplorationBudget::ball(r, l),
            RegionKind::Tube => ExplorationBudget::tube(r, l),
        };
        b.with_cap(cap)
    }

    fn explorer(&self, budget: ExplorationBudget) -> Explorer {
        match budget.region {
            RegionKind::Ball => ball_explorer(self.model.clone(), budget, self.global.cache.as_deref()),
            RegionKind::Tube => Explorer::new(self.model.clone(), budget),
        }
    }

    /// Pair-query explorer: a tube wide enough for the H-letters of both words.
    fn pair_explorer(&self, f: &GroupElement, g: &GroupElement) -> Explorer {
        let m = &self.model;
        let l = m.x_length(&m.left_quotient(f, g)).max(8);
        self.explorer(self.budget(RegionKind::Tube, 3, l))
    }

    fn elem(&self, s: &str) -> Result<GroupElement> {
        self.model.parse_element(s)
    }

    fn fmt(&self, g: &GroupElement) -> String {
        self.model.format_element(g)
    }

    fn c_spec(&self, polygons: usize, vertex_radius: usize) -> NgonSpec {
        NgonSpec {
            sizes: vec![2, 3, 4, 5],
            count: polygons,
            vertex_radius,
            seed: self.global.seed,
        }
    }

    /// The configured D, or `3·⌈Ĉ⌉ + 1` from a default estimate.
    fn d(&self) -> Result<u64> {
        if let Some(d) = self.global.d {
            return Ok(d);
        }
        Ok(ConstantsReport::auto_d(self.c_hat(None)?))
    }

    fn c_hat(&self, given: Option<Fraction>) -> Result<Fraction> {
        if let Some(c) = given {
            return Ok(c);
        }
        let e = self.explorer(ExplorationBudget::ball(6, 6));
        Ok(estimate_c(&e, &self.c_spec(2000, 3))?.c_hat)
    }
}

/// Runs a parsed command.
pub fn execute(cli: &Cli) -> Result<Output> {
    let s = Session {
        global: cli.global.clone(),
        model: load_model(&cli.global.model)?,
    };
    match &cli.command {
        Command::Dist { f, g } => cmd_dist(&s, f, g),
        Command::Geodesics { f, g } => cmd_geodesics(&s, f, g),
        Command::Sepcosets { f, g } => cmd_sepcosets(&s, f, g),
        Command::Yball { radius } => cmd_yball(&s, *radius),
        Command::Verify {
            suites,
            radius,
            samples,
            polygons,
            c_hat,
            out,
        } => cmd_verify(&s, suites, *radius, *samples, *polygons, *c_hat, out.as_deref()),
        Command::Estimate {
            polygons,
            vertex_radius,
            points,
        } => cmd_estimate(&s, *polygons, *vertex_radius, *points),
        Command::Phi { target, scheme, depth } => cmd_phi(&s, target.as_deref(), scheme.as_deref(), *depth),
        Command::Tailcheck {
            w0,
            w1,
            s1,
            s2,
            g,
            depth,
        } => cmd_tailcheck(&s, w0, w1, s1, s2, g, *depth),
        Command::F4 {
            xi,
            eta,
            zeta,
            n,
            elements,
            c_hat,
        } => cmd_f4(&s, xi, eta, zeta, *n, elements, *c_hat),
        Command::Probe {
            radius,
            epsilon,
            min_separation,
            g_radius,
            pairs,
        } => cmd_probe(&s, *radius, *epsilon, *min_separation, *g_radius, *pairs),
    }
}

fn cmd_dist(s: &Session, f: &str, g: &str) -> Result<Output> {
    let (f, g) = (s.elem(f)?, s.elem(g)?);
    let d = s.d()?;
    let e = s.pair_explorer(&f, &g);
    let x = e.rel_distance(&f, &g)?;
    let r = s.model.x_length(&f).max(s.model.x_length(&g)).max(1);
    let ball = Arc::new(s.explorer(s.budget(RegionKind::Ball, r, r)));
    let y = YGraph::new(ball, d)?.y_distance_measured(&f, &g)?;
    let json = json!({
        "schema": SCHEMA,
        "model": s.model.describe(),
        "f": s.fmt(&f),
        "g": s.fmt(&g),
        "D": d,
        "d_xh": x,
        "d_yh": y,
    });
    let text = format!(
        "d_X(f,g) = {} ({})\nd_Y(f,g) = {} ({})\n",
        x.value,
        if x.stable { "stable" } else { "unstable" },
        y.value,
        if y.stable { "stable" } else { "unstable" }
    );
    let mut out = Output::plain(json, text);
    out.table = Some((
        vec!["f", "g", "D", "d_xh", "xh_stable", "d_yh", "yh_stable"],
        vec![vec![
            s.fmt(&f),
            s.fmt(&g),
            d.to_string(),
            x.value.to_string(),
            x.stable.to_string(),
            y.value.to_string(),
            y.stable.to_string(),
        ]],
    ));
    Ok(out)
}

fn cmd_geodesics(s: &Session, f: &str, g: &str) -> Result<Output> {
    let (f, g) = (s.elem(f)?, s.elem(g)?);
    let e = s.pair_explorer(&f, &g);
    let list = e.all_geodesics(&f, &g)?;
    let paths: Vec<Vec<String>> = list.paths.iter().map(|p| s.model.format_labels(&p.labels)).collect();
    let mut text = format!("length {} paths {}\n", list.length, paths.len());
    for p in &paths {
        let _ = writeln!(text, "  {}", p.join(" "));
    }
    let json = json!({
        "schema": SCHEMA,
        "model": s.model.describe(),
        "budget": e.budget(),
        "f": s.fmt(&f),
        "g": s.fmt(&g),
        "length": list.length,
        "overflow": list.overflow,
        "paths": paths,
    });
    let rows = paths
        .iter()
        .enumerate()
        .map(|(i, p)| vec![i.to_string(), p.join(" ")])
        .collect();
    let mut out = Output::plain(json, text);
    out.table = Some((vec!["index", "labels"], rows));
    if list.overflow {
        out.exit = 3;
    }
    Ok(out)
}

fn record_rows(s: &Session, recs: &[SepCosetRecord]) -> Vec<Vec<String>> {
    recs.iter()
        .map(|r| {
            let v = r.view(&s.model);
            vec![
                v.position.to_string(),
                v.family.to_string(),
                v.coset,
                v.entrance,
                v.exit,
                v.gap.to_string(),
                v.distance.to_string(),
            ]
        })
        .collect()
}

const RECORD_HEAD: [&str; 7] = ["position", "family", "coset", "entrance", "exit", "gap", "distance"];

fn cmd_sepcosets(s: &Session, f: &str, g: &str) -> Result<Output> {
    let (f, g) = (s.elem(f)?, s.elem(g)?);
    let d = s.d()?;
    let e = s.pair_explorer(&f, &g);
    let recs = sep_cosets_measured(&e, &f, &g, d)?;
    let rows = record_rows(s, &recs.value);
    let mut text = format!("S({}, {}; {d}): {} cosets\n", s.fmt(&f), s.fmt(&g), rows.len());
    for r in &rows {
        let _ = writeln!(text, "  {} {}H  in {}  out {}  gap {}", r[0], r[2], r[3], r[4], r[5]);
    }
    let json = json!({
        "schema": SCHEMA,
        "model": s.model.describe(),
        "budget": e.budget(),
        "f": s.fmt(&f),
        "g": s.fmt(&g),
        "D": d,
        "stable": recs.stable,
        "records": recs.value.iter().map(|r| r.view(&s.model)).collect::<Vec<_>>(),
    });
    let mut out = Output::plain(json, text);
    out.table = Some((RECORD_HEAD.to_vec(), rows));
    Ok(out)
}

fn cmd_yball(s: &Session, radius: usize) -> Result<Output> {
    let d = s.d()?;
    let ball = Arc::new(s.explorer(s.budget(RegionKind::Ball, radius, radius)));
    let y = YGraph::new(ball, d)?;
    let members: Vec<String> = y.members()?.iter().map(|g| s.fmt(g)).collect();
    let json = json!({
        "schema": SCHEMA,
        "model": s.model.describe(),
        "D": d,
        "radius": y.y_radius(),
        "count": members.len(),
        "members": members,
    });
    let text = format!("|Y ∩ ball({})| = {} for D = {d}\n", y.y_radius(), members.len());
    let rows = members.iter().map(|m| vec![m.clone()]).collect();
    let mut out = Output::plain(json, text);
    out.table = Some((vec!["member"], rows));
    Ok(out)
}

/// The configuration `verify` runs with for these arguments.
pub fn verify_config(
    model: Arc<GroupModel>,
    label: &str,
    d: u64,
    radius: usize,
    seed: u64,
    samples: usize,
    polygons: usize,
    c_hat: Option<Fraction>,
) -> VerifyConfig {
    VerifyConfig {
        model,
        model_label: label.to_string(),
        d,
        budget: ExplorationBudget::ball(radius, radius),
        seed,
        samples,
        polygons,
        c_hat,
    }
}

fn cmd_verify(
    s: &Session,
    suites: &[String],
    radius: usize,
    samples: usize,
    polygons: usize,
    c_hat: Option<Fraction>,
    out_path: Option<&Path>,
) -> Result<Output> {
    let d = s.d()?;
    let mut cfg = verify_config(s.model.clone(), &s.global.model, d, radius, s.global.seed, samples, polygons, c_hat);
    if let Some((r, l, cap)) = s.global.budget {
        cfg.budget = ExplorationBudget::ball(r, l).with_cap(cap);
    }
    let ball = Arc::new(ball_explorer(s.model.clone(), cfg.budget, s.global.cache.as_deref()));
    let ctx = Ctx::with_explorer(cfg, ball);
    let report = run_verify(&ctx, suites)?;
    let json = serde_json::to_value(&report).map_err(|e| LabError::Input(e.to_string()))?;
    if let Some(p) = out_path {
        let mut body = serde_json::to_string_pretty(&json).map_err(|e| LabError::Input(e.to_string()))?;
        body.push('\n');
        std::fs::write(p, body).map_err(|e| LabError::Input(format!("cannot write {}: {e}", p.display())))?;
    }
    let mut text = format!(
        "{} D={} {} seed={} C={}\n",
        report.model,
        report.d,
        report.budget,
        report.seed,
        report.c_hat.map(|c| c.to_string()).unwrap_or_else(|| "?".into())
    );
    let mut rows = Vec::new();
    for p in &report.properties {
        let status = serde_json::to_value(p.status).unwrap_or_default();
        let status = status.as_str().unwrap_or("?").to_string();
        let _ = writeln!(
            text,
            "{:<13} {:<18} {:<22} {:>7} instances {:>5} skipped{}",
            status,
            p.suite,
            p.name,
            p.instances,
            p.skipped,
            p.note.as_ref().map(|n| format!("  ({n})")).unwrap_or_default()
        );
        rows.push(vec![
            p.suite.to_string(),
            p.name.to_string(),
            status,
            p.instances.to_string(),
            p.skipped.to_string(),
            p.failures.to_string(),
            p.note.clone().unwrap_or_default(),
        ]);
    }
    let _ = writeln!(
        text,
        "passed {} failed {} inconclusive {}",
        report.passed, report.failed, report.inconclusive
    );
    Ok(Output {
        json,
        text,
        table: Some((
            vec!["suite", "property", "status", "instances", "skipped", "failures", "note"],
            rows,
        )),
        exit: report.exit_code(),
    })
}

fn cmd_estimate(s: &Session, polygons: usize, vertex_radius: usize, points: usize) -> Result<Output> {
    let (r, l, cap) = s.global.budget.unwrap_or((2 * vertex_radius, 2 * vertex_radius, 4096));
    let budget = ExplorationBudget::ball(r, l).with_cap(cap);
    let e = s.explorer(budget);
    let c = estimate_c(&e, &s.c_spec(polygons, vertex_radius))?;
    let pts = sample_points(&s.model, r / 2, points, s.global.seed);
    let delta = delta_estimate(&e, &pts)?;
    let d = s.global.d.unwrap_or_else(|| ConstantsReport::auto_d(c.c_hat));
    let t = 4 * c.c_hat.ceil();
    let k = match pigeonhole_k(&e, t) {
        Ok(k) => json!(k),
        Err(err) => json!({"error": err.to_string()}),
    };
    let json = json!({
        "schema": SCHEMA,
        "model": s.model.describe(),
        "budget": budget,
        "seed": s.global.seed,
        "estimate": true,
        "c_hat": c.c_hat,
        "c": c,
        "D": d,
        "D_auto": s.global.d.is_none(),
        "delta_x": delta.delta,
        "delta_points": delta.points,
        "pigeonhole_threshold": t,
        "K": k,
    });
    let text = format!(
        "C = {} ({} polygons, {} isolated)\nD = {d}{}\ndelta_X >= {} (ESTIMATE, {} points)\nK at t = {t}: {}\n",
        c.c_hat,
        c.samples,
        c.isolated_distinct,
        if s.global.d.is_none() { " (auto)" } else { "" },
        delta.delta,
        delta.points,
        json["K"].get("k").map(|v| v.to_string()).unwrap_or_else(|| json["K"].to_string()),
    );
    Ok(Output::plain(json, text))
}

fn cmd_phi(s: &Session, target: Option<&str>, scheme: Option<&str>, depth: usize) -> Result<Output> {
    let m = &s.model;
    if let Some(t) = target {
        let g = s.elem(t)?;
        let r = m.x_length(&g).max(1);
        let e = s.explorer(s.budget(RegionKind::Ball, r, r));
        let p = phi_prefix_element(&e, &g)?;
        let labels = m.format_labels(&p.labels);
        let json = json!({
            "schema": SCHEMA,
            "model": m.describe(),
            "budget": e.budget(),
            "target": s.fmt(&g),
            "labels": labels,
            "certified_len": p.certified_len,
        });
        let text = format!("{}\n", labels.join(" "));
        return Ok(Output::plain(json, text));
    }
    let src = scheme.ok_or_else(|| LabError::Input("give --target or --scheme".into()))?;
    let sch = RayScheme::parse(m, src)?;
    let d = s.d()?;
    let l = sch
        .prefix
        .iter()
        .chain(&sch.period)
        .map(|x| m.letter_x_length(x))
        .max()
        .unwrap_or(1)
        + 2;
    let e = s.explorer(s.budget(RegionKind::Tube, 3, l.max(8)));
    let p = phi_prefix_scheme_measured(&e, &sch, depth, d)?;
    let labels = m.format_labels(&p.value.labels);
    let json = json!({
        "schema": SCHEMA,
        "model": m.describe(),
        "budget": e.budget(),
        "scheme": sch.describe(m),
        "depth": depth,
        "D": d,
        "labels": labels,
        "certified_len": p.value.certified_len,
        "stable": p.stable,
    });
    let text = format!(
        "{}\ncertified {} of {}{}\n",
        labels.join(" "),
        p.value.certified_len,
        labels.len(),
        if p.stable { ", stable" } else { ", not stable" }
    );
    Ok(Output::plain(json, text))
}

fn cmd_tailcheck(
    s: &Session,
    w0: &Option<String>,
    w1: &Option<String>,
    s1: &Option<String>,
    s2: &Option<String>,
    g: &Option<String>,
    depth: usize,
) -> Result<Output> {
    if let (Some(a), Some(b)) = (w0, w1) {
        let a: EvPeriodicSeq = a.parse()?;
        let b: EvPeriodicSeq = b.parse()?;
        let r = tail_equivalent(&a, &b);
        let json = json!({
            "schema": SCHEMA,
            "w0": a.to_string(),
            "w1": b.to_string(),
            "equivalent": r.is_some(),
            "witness": r,
        });
        let text = match r {
            Some((n, m)) => format!("equivalent: shift w0 by {n} and w1 by {m}\n"),
            None => "not equivalent\n".to_string(),
        };
        return Ok(Output::plain(json, text));
    }
    let (Some(s1), Some(s2), Some(g)) = (s1, s2, g) else {
        return Err(LabError::Input("give --w0/--w1 or --s1/--s2/--g".into()));
    };
    let m = &s.model;
    let (s1, s2, g) = (RayScheme::parse(m, s1)?, RayScheme::parse(m, s2)?, s.elem(g)?);
    let d = s.d()?;
    let e = s.explorer(s.budget(RegionKind::Tube, 3, 8.max(2 * (d as usize / 2 + 1) + 2)));
    let v = phi_pair_tailcheck(&e, &s1, &s2, &g, depth, d)?;
    let json = json!({
        "schema": SCHEMA,
        "model": m.describe(),
        "budget": e.budget(),
        "s1": s1.describe(m),
        "s2": s2.describe(m),
        "g": s.fmt(&g),
        "D": d,
        "result": v,
    });
    let text = format!("{}\n", serde_json::to_string(&v).unwrap_or_default());
    Ok(Output::plain(json, text))
}

fn cmd_f4(
    s: &Session,
    xi: &Option<String>,
    eta: &Option<String>,
    zeta: &Option<String>,
    n: usize,
    elements: &Option<Vec<String>>,
    c_hat: Option<Fraction>,
) -> Result<Output> {
    let m = &s.model;
    let d = s.d()?;
    let c = s.c_hat(c_hat)?;
    let (split, inputs, budget) = if let Some(el) = elements {
        if el.len() != 3 {
            return Err(LabError::Input(format!("--elements takes exactly three elements, got {}", el.len())));
        }
        let v: Vec<GroupElement> = el.iter().map(|x| s.elem(x)).collect::<Result<_>>()?;
        let r = v.iter().map(|x| m.x_length(x)).max().unwrap_or(1).max(1) + 2;
        let e = s.explorer(s.budget(RegionKind::Ball, r, r.max(2 * (d as usize / 2 + 1))));
        let split = triple_split(&e, &v[0], &v[1], &v[2], d, Some(c))?;
        (split, json!({"f": el[0], "g": el[1], "z": el[2]}), e.budget())
    } else {
        let (Some(a), Some(b), Some(z)) = (xi, eta, zeta) else {
            return Err(LabError::Input("give --xi/--eta/--zeta or --elements f,g,z".into()));
        };
        let (a, b, z) = (RayScheme::parse(m, a)?, RayScheme::parse(m, b)?, RayScheme::parse(m, z)?);
        let l = [&a, &b, &z]
            .iter()
            .flat_map(|x| x.prefix.iter().chain(&x.period))
            .map(|x| m.letter_x_length(x))
            .max()
            .unwrap_or(1)
            + 2;
        let e = s.explorer(s.budget(RegionKind::Tube, 3, l.max(8)));
        let split = f4_split(&e, &a, &b, &z, n, d, Some(c))?;
        (
            split,
            json!({"xi": a.describe(m), "eta": b.describe(m), "zeta": z.describe(m), "n": n}),
            e.budget(),
        )
    };
    let views = |r: &[SepCosetRecord]| r.iter().map(|x| x.view(m)).collect::<Vec<_>>();
    let json = json!({
        "schema": SCHEMA,
        "model": m.describe(),
        "budget": budget,
        "D": d,
        "C": c,
        "inputs": inputs,
        "first": views(&split.first),
        "second": views(&split.second),
        "rest": views(&split.rest),
    });
    let text = format!(
        "first {} second {} rest {} (bound 4)\n",
        split.first.len(),
        split.second.len(),
        split.rest.len()
    );
    let mut out = Output::plain(json, text);
    let mut rows = Vec::new();
    for (part, recs) in [("first", &split.first), ("second", &split.second), ("rest", &split.rest)] {
        for mut r in record_rows(s, recs) {
            r.insert(0, part.to_string());
            rows.push(r);
        }
    }
    let mut head = vec!["part"];
    head.extend(RECORD_HEAD);
    out.table = Some((head, rows));
    Ok(out)
}

fn cmd_probe(
    s: &Session,
    radius: usize,
    epsilon: u32,
    min_separation: u64,
    g_radius: usize,
    pairs: usize,
) -> Result<Output> {
    let d = s.d()?;
    let ball = Arc::new(s.explorer(s.budget(RegionKind::Ball, radius, radius)));
    let y = YGraph::new(ball, d)?;
    let pts = sample_points(&s.model, radius / 2, 2 * pairs, s.global.seed);
    let list: Vec<(GroupElement, GroupElement)> = pts
        .chunks(2)
        .filter(|c| c.len() == 2)
        .map(|c| (c[0].clone(), c[1].clone()))
        .collect();
    let report = y.acylindricity_probe(epsilon, min_separation, g_radius, &list)?;
    let json = json!({
        "schema": SCHEMA,
        "model": s.model.describe(),
        "D": d,
        "radius": radius,
        "seed": s.global.seed,
        "acylindricity": report,
    });
    let text = format!(
        "ESTIMATE: max count {} over {} pairs (eps {}, separation >= {})\n",
        report.max_count, report.pairs_used, epsilon, min_separation
    );
    Ok(Output::plain(json, text))
}
